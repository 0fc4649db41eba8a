//! Deterministic synthetic gaze traces with known fixations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixation::{FixationSegment, IdtParams};
use crate::trace::{GazeSample, GazeTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_fixations: usize,
    /// Inclusive `(min, max)` fixation duration in seconds.
    pub fixation_duration_range: (f64, f64),
    pub saccade_duration: f64,
    pub jitter_sigma: f64,
    pub rate: f64,
    pub width: u32,
    pub height: u32,
    /// Minimum L1 distance between consecutive fixation centers.
    pub min_separation: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            n_fixations: 3,
            fixation_duration_range: (0.2, 0.5),
            saccade_duration: 0.02,
            jitter_sigma: 0.0,
            rate: 200.0,
            width: 1280,
            height: 1024,
            min_separation: 400.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SynthWarning {
    /// Some fixations may be shorter than `t_min`.
    FixationsTooShort,
    /// Jitter is large enough that dispersion may exceed `d_max`.
    JitterTooLarge,
    /// Saccade steps are small enough to merge with neighbouring fixations.
    SaccadeTooSlow,
    /// Fixation centers are close to the border, so jitter gets clamped.
    CentersNearBorder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub trace: GazeTrace,
    /// The generating fixations as index spans with sample-mean centers.
    pub segments: Vec<FixationSegment>,
    /// The centers the fixation samples were drawn around.
    pub centers: Vec<(f64, f64)>,
}

impl SynthSpec {
    fn check(&self) -> Result<()> {
        let (lo, hi) = self.fixation_duration_range;
        let positive = [lo, hi, self.rate, self.min_separation].iter().all(|v| *v > 0.0 && v.is_finite())
            && self.saccade_duration >= 0.0
            && self.jitter_sigma >= 0.0
            && self.n_fixations > 0
            && self.width > 0
            && self.height > 0;
        if !positive || lo > hi {
            return Err(Error::Argument(format!("invalid synthetic trace spec: {self:?}")));
        }
        Ok(())
    }

    fn saccade_samples(&self) -> usize {
        (self.saccade_duration * self.rate).round() as usize
    }

    /// Border margin keeping all but extreme jitter inside the frame.
    fn margin(&self) -> f64 {
        (4.0 * self.jitter_sigma).max(1.0)
    }

    /// Reasons the generated fixations may not be recovered under `params`.
    pub fn warnings(&self, params: IdtParams) -> Vec<SynthWarning> {
        let mut w = Vec::new();
        let dt = 1.0 / self.rate;
        let shortest_span = ((self.fixation_duration_range.0 * self.rate).ceil()) * dt;
        if shortest_span + 1e-12 < params.t_min {
            w.push(SynthWarning::FixationsTooShort);
        }
        // The L1 spread of a 2-D Gaussian cloud over a few hundred samples is
        // about 2 * 2 * 3 sigma.
        if 12.0 * self.jitter_sigma > params.d_max {
            w.push(SynthWarning::JitterTooLarge);
        }
        let step = self.min_separation / (self.saccade_samples() + 1) as f64;
        if step - 12.0 * self.jitter_sigma <= params.d_max {
            w.push(SynthWarning::SaccadeTooSlow);
        }
        if 2.0 * self.margin() >= f64::from(self.width.min(self.height)) {
            w.push(SynthWarning::CentersNearBorder);
        }
        w
    }
}

/// Generates piecewise-stationary gaze: Gaussian jitter around random
/// fixation centers joined by linear saccades, sampled at `rate`.
pub fn synth_trace(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let margin = spec.margin().min(f64::from(spec.width.min(spec.height)) / 4.0);
    let (w, h) = (f64::from(spec.width), f64::from(spec.height));
    let draw_center = |rng: &mut ChaCha8Rng| (rng.random_range(margin..w - margin), rng.random_range(margin..h - margin));

    let mut centers: Vec<(f64, f64)> = Vec::with_capacity(spec.n_fixations);
    for _ in 0..spec.n_fixations {
        let mut attempts = 0;
        let c = loop {
            let c = draw_center(&mut rng);
            match centers.last() {
                Some(p) if (c.0 - p.0).abs() + (c.1 - p.1).abs() < spec.min_separation => {}
                _ => break c,
            }
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::Argument(format!(
                    "cannot place centers {} px apart in a {}x{} frame",
                    spec.min_separation, spec.width, spec.height
                )));
            }
        };
        centers.push(c);
    }

    let jitter = Normal::new(0.0, spec.jitter_sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    let dt = 1.0 / spec.rate;
    let (lo, hi) = spec.fixation_duration_range;
    let n_sacc = spec.saccade_samples();
    let mut samples: Vec<GazeSample> = Vec::new();
    let mut spans = Vec::with_capacity(centers.len());
    let push = |samples: &mut Vec<GazeSample>, x: f64, y: f64| {
        let t = samples.len() as f64 * dt;
        samples.push(GazeSample::new(t, x, y));
    };
    for (k, &(cx, cy)) in centers.iter().enumerate() {
        let duration = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let n = (duration * spec.rate).ceil() as usize + 1;
        let start = samples.len();
        for _ in 0..n {
            let (dx, dy) = if spec.jitter_sigma > 0.0 {
                (jitter.sample(&mut rng), jitter.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            push(&mut samples, (cx + dx).clamp(0.0, w - 1.0), (cy + dy).clamp(0.0, h - 1.0));
        }
        spans.push((start, samples.len() - 1));
        if let Some(&(nx, ny)) = centers.get(k + 1) {
            for s in 1..=n_sacc {
                let f = s as f64 / (n_sacc + 1) as f64;
                push(&mut samples, cx + f * (nx - cx), cy + f * (ny - cy));
            }
        }
    }

    let trace = GazeTrace::new(samples, spec.width, spec.height, spec.rate)?;
    let segments = spans
        .iter()
        .map(|&(i, j)| {
            let s = &trace.samples()[i..=j];
            let n = s.len() as f64;
            let min_max = |f: fn(&GazeSample) -> f64| {
                s.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
            };
            let (x0, x1) = min_max(|p| p.x);
            let (y0, y1) = min_max(|p| p.y);
            FixationSegment {
                start_index: i,
                end_index: j,
                start_t: s[0].t,
                end_t: s[s.len() - 1].t,
                center_x: s.iter().map(|p| p.x).sum::<f64>() / n,
                center_y: s.iter().map(|p| p.y).sum::<f64>() / n,
                dispersion: (x1 - x0) + (y1 - y0),
            }
        })
        .collect();
    Ok(SynthOutput { trace, segments, centers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixation::detect_fixations;

    #[test]
    fn noiseless_traces_are_recovered_exactly() {
        for seed in 0..50 {
            let spec = SynthSpec { seed, n_fixations: 5, ..SynthSpec::default() };
            assert!(spec.warnings(IdtParams::default()).is_empty());
            let out = synth_trace(&spec).unwrap();
            let found = detect_fixations(&out.trace, IdtParams::default()).unwrap();
            assert_eq!(found, out.segments, "seed {seed}");
        }
    }

    #[test]
    fn single_fixation() {
        let out = synth_trace(&SynthSpec { n_fixations: 1, jitter_sigma: 2.0, ..SynthSpec::default() }).unwrap();
        assert_eq!(detect_fixations(&out.trace, IdtParams::default()).unwrap().len(), 1);
    }

    #[test]
    fn same_seed_same_trace() {
        let spec = SynthSpec { seed: 42, jitter_sigma: 3.0, ..SynthSpec::default() };
        assert_eq!(synth_trace(&spec).unwrap(), synth_trace(&spec).unwrap());
        let other = SynthSpec { seed: 43, ..spec.clone() };
        assert_ne!(synth_trace(&spec).unwrap().trace, synth_trace(&other).unwrap().trace);
    }

    #[test]
    fn warnings_flag_undetectable_specs() {
        let p = IdtParams::default();
        let short = SynthSpec { fixation_duration_range: (0.03, 0.05), ..SynthSpec::default() };
        assert!(short.warnings(p).contains(&SynthWarning::FixationsTooShort));
        let noisy = SynthSpec { jitter_sigma: 20.0, ..SynthSpec::default() };
        assert!(noisy.warnings(p).contains(&SynthWarning::JitterTooLarge));
        let slow = SynthSpec { saccade_duration: 0.2, min_separation: 100.0, ..SynthSpec::default() };
        assert!(slow.warnings(p).contains(&SynthWarning::SaccadeTooSlow));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(synth_trace(&SynthSpec { rate: 0.0, ..SynthSpec::default() }).is_err());
        assert!(synth_trace(&SynthSpec { n_fixations: 0, ..SynthSpec::default() }).is_err());
        assert!(synth_trace(&SynthSpec { min_separation: 1e6, n_fixations: 2, ..SynthSpec::default() }).is_err());
    }
}
