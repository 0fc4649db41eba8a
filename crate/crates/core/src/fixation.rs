//! Dispersion-threshold (I-DT) fixation detection and fixation-derived metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{GazeSample, GazeTrace};

/// Default minimum fixation duration in seconds.
pub const DEFAULT_T_MIN: f64 = 0.10;
/// Default maximum dispersion in pixels.
pub const DEFAULT_D_MAX: f64 = 50.0;
/// Default guard for the fixation / non-fixation ratio denominator.
pub const DEFAULT_RATIO_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdtParams {
    pub t_min: f64,
    pub d_max: f64,
}

impl Default for IdtParams {
    fn default() -> Self {
        Self { t_min: DEFAULT_T_MIN, d_max: DEFAULT_D_MAX }
    }
}

/// A detected fixation spanning samples `start_index..=end_index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixationSegment {
    pub start_index: usize,
    pub end_index: usize,
    #[serde(rename = "start_t_s")]
    pub start_t: f64,
    #[serde(rename = "end_t_s")]
    pub end_t: f64,
    pub center_x: f64,
    pub center_y: f64,
    #[serde(rename = "dispersion_px")]
    pub dispersion: f64,
}

impl FixationSegment {
    pub fn duration(&self) -> f64 {
        self.end_t - self.start_t
    }

    pub fn center(&self) -> (f64, f64) {
        (self.center_x, self.center_y)
    }

    pub fn len(&self) -> usize {
        self.end_index - self.start_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy)]
struct Extent {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Extent {
    fn of(s: &GazeSample) -> Self {
        Self { min_x: s.x, max_x: s.x, min_y: s.y, max_y: s.y }
    }

    fn with(mut self, s: &GazeSample) -> Self {
        self.min_x = self.min_x.min(s.x);
        self.max_x = self.max_x.max(s.x);
        self.min_y = self.min_y.min(s.y);
        self.max_y = self.max_y.max(s.y);
        self
    }

    fn dispersion(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

fn check_span(trace: &GazeTrace, i: usize, j: usize) -> Result<()> {
    if i > j || j >= trace.len() {
        return Err(Error::Argument(format!("index span [{i}, {j}] invalid for a trace of {} samples", trace.len())));
    }
    Ok(())
}

/// `(max x - min x) + (max y - min y)` over samples `i..=j`.
pub fn dispersion(trace: &GazeTrace, i: usize, j: usize) -> Result<f64> {
    check_span(trace, i, j)?;
    let s = &trace.samples()[i..=j];
    if let Some(k) = s.iter().position(|s| !s.valid) {
        return Err(Error::Argument(format!("sample {} in [{i}, {j}] is invalid", i + k)));
    }
    Ok(s[1..].iter().fold(Extent::of(&s[0]), |e, p| e.with(p)).dispersion())
}

fn make_segment(samples: &[GazeSample], i: usize, j: usize, dispersion: f64) -> FixationSegment {
    let (cx, cy) = mean_position(&samples[i..=j]);
    FixationSegment {
        start_index: i,
        end_index: j,
        start_t: samples[i].t,
        end_t: samples[j].t,
        center_x: cx,
        center_y: cy,
        dispersion,
    }
}

fn mean_position(s: &[GazeSample]) -> (f64, f64) {
    let n = s.len() as f64;
    let (sx, sy) = s.iter().fold((0.0, 0.0), |(ax, ay), p| (ax + p.x, ay + p.y));
    (sx / n, sy / n)
}

/// Greedy left-to-right I-DT segmentation.
///
/// A window opens at a valid sample and grows until it covers `t_min`. If its
/// dispersion is within `d_max` it is extended one sample at a time while the
/// dispersion stays within `d_max`, emitted, and scanning resumes after it.
/// Otherwise the window start slides by one sample. Invalid samples close any
/// open window and never belong to a fixation.
pub fn detect_fixations(trace: &GazeTrace, params: IdtParams) -> Result<Vec<FixationSegment>> {
    let IdtParams { t_min, d_max } = params;
    if trace.is_empty() {
        return Err(Error::EmptyInput("trace has no samples"));
    }
    if !(t_min > 0.0) || !t_min.is_finite() {
        return Err(Error::Argument(format!("t_min must be > 0, got {t_min}")));
    }
    if !(d_max >= 0.0) {
        return Err(Error::Argument(format!("d_max must be >= 0, got {d_max}")));
    }

    let s = trace.samples();
    let n = s.len();
    let mut out = Vec::new();
    let mut i = 0;
    'scan: while i < n {
        if !s[i].valid {
            i += 1;
            continue;
        }
        let mut j = i;
        let mut ext = Extent::of(&s[i]);
        while s[j].t - s[i].t < t_min {
            if j + 1 >= n {
                // Later starts cover even less time.
                break 'scan;
            }
            if !s[j + 1].valid {
                // No start in i..=j can reach t_min without crossing the gap.
                i = j + 2;
                continue 'scan;
            }
            j += 1;
            ext = ext.with(&s[j]);
        }
        if ext.dispersion() > d_max {
            i += 1;
            continue;
        }
        while j + 1 < n && s[j + 1].valid {
            let grown = ext.with(&s[j + 1]);
            if grown.dispersion() > d_max {
                break;
            }
            ext = grown;
            j += 1;
        }
        out.push(make_segment(s, i, j, ext.dispersion()));
        i = j + 1;
    }
    Ok(out)
}

/// Sum of fixation durations.
pub fn fixation_time(segments: &[FixationSegment]) -> f64 {
    segments.iter().map(FixationSegment::duration).sum()
}

/// `t_fix / (t_total - t_fix)`, or `None` when the denominator is below `eps`.
pub fn fix_nonfix_ratio(t_fix: f64, t_total: f64, eps: f64) -> Result<Option<f64>> {
    // A sum of disjoint sub-spans may exceed the span by rounding only.
    let slack = 1e-9 * t_total.abs().max(1.0);
    if !(t_fix >= 0.0) || t_fix > t_total + slack {
        return Err(Error::Argument(format!("fixation time {t_fix} must lie in [0, {t_total}]")));
    }
    let rest = t_total - t_fix;
    Ok(if rest >= eps { Some(t_fix / rest) } else { None })
}

/// Mean gaze position over the segment's samples.
pub fn fixation_center(trace: &GazeTrace, segment: &FixationSegment) -> Result<(f64, f64)> {
    check_span(trace, segment.start_index, segment.end_index)?;
    Ok(mean_position(&trace.samples()[segment.start_index..=segment.end_index]))
}

pub fn scanpath_length(centers: &[(f64, f64)]) -> f64 {
    centers.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DurationStats {
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl DurationStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self { mean, median: median(values), std: var.sqrt() })
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Duration-normalized fixation metrics for one trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixationMetrics {
    pub n_fix: usize,
    pub t_fix: f64,
    pub t_total: f64,
    pub ratio: Option<f64>,
    pub scanpath_length: f64,
    pub scanpath_speed: f64,
    pub fixation_rate: f64,
    pub hull_area: Option<f64>,
    pub hull_area_per_s: Option<f64>,
    pub duration_stats: Option<DurationStats>,
}

impl FixationMetrics {
    /// Records the gaze hull area with its per-second variant.
    pub fn set_hull_area(&mut self, area: f64) {
        self.hull_area = Some(area);
        self.hull_area_per_s = Some(area / self.t_total);
    }
}

pub fn summarize(trace: &GazeTrace, segments: &[FixationSegment]) -> Result<FixationMetrics> {
    let t_total = trace.total_duration();
    if !(t_total > 0.0) {
        return Err(Error::DegenerateTrace(format!("total duration is {t_total} s")));
    }
    let centers = segments.iter().map(|s| fixation_center(trace, s)).collect::<Result<Vec<_>>>()?;
    let durations: Vec<f64> = segments.iter().map(FixationSegment::duration).collect();
    let t_fix = fixation_time(segments);
    let length = scanpath_length(&centers);
    Ok(FixationMetrics {
        n_fix: segments.len(),
        t_fix,
        t_total,
        ratio: fix_nonfix_ratio(t_fix, t_total, DEFAULT_RATIO_EPS)?,
        scanpath_length: length,
        scanpath_speed: length / t_total,
        fixation_rate: segments.len() as f64 / t_total,
        hull_area: None,
        hull_area_per_s: None,
        duration_stats: DurationStats::of(&durations),
    })
}

/// Parses the fixation JSON array and checks that segments are well-formed,
/// ordered and disjoint.
pub fn parse_fixations_json(bytes: &[u8]) -> Result<Vec<FixationSegment>> {
    let segs: Vec<FixationSegment> = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    for (k, s) in segs.iter().enumerate() {
        if s.start_index > s.end_index {
            return Err(Error::Contract(format!("fixation {k}: start_index > end_index")));
        }
        if !(s.start_t.is_finite() && s.end_t.is_finite() && s.end_t >= s.start_t) {
            return Err(Error::Contract(format!("fixation {k}: bad time span")));
        }
        if k > 0 && segs[k - 1].end_index >= s.start_index {
            return Err(Error::Contract(format!("fixation {k}: overlaps or precedes fixation {}", k - 1)));
        }
    }
    Ok(segs)
}

/// Checks that `segments` index into `trace` consistently.
pub fn check_segments(trace: &GazeTrace, segments: &[FixationSegment]) -> Result<()> {
    for s in segments {
        check_span(trace, s.start_index, s.end_index)?;
        let samples = &trace.samples()[s.start_index..=s.end_index];
        if samples.iter().any(|p| !p.valid) {
            return Err(Error::Contract(format!("fixation [{}, {}] covers invalid samples", s.start_index, s.end_index)));
        }
        if samples[0].t != s.start_t || samples[samples.len() - 1].t != s.end_t {
            return Err(Error::Contract(format!(
                "fixation [{}, {}] timestamps do not match the trace",
                s.start_index, s.end_index
            )));
        }
    }
    Ok(())
}
