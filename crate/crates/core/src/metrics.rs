//! Saliency-map comparison metrics and the per-frame evaluation protocol.
//!
//! Distribution metrics (KLD, SIM) clamp maps at zero and normalize them as
//! `max(m, 0) / (sum(max(m, 0)) + eps)`. CC is the mean product of z-scored
//! maps with `eps` added to each standard deviation. NSS z-scores the
//! prediction (population std, no guard) and samples it at the first maximum
//! of the ground truth. FDM-SIM and FDM-CC compare fixation density maps
//! without any extra normalization.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spatial::{neumaier_sum, SaliencyGrid};

/// Guard used by KLD, CC and the normalizations.
pub const DEFAULT_EPS: f64 = 1e-7;

fn check_shape(a: &SaliencyGrid, b: &SaliencyGrid) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Returns `max(m, 0) / (sum + eps)` and the clamped sum.
fn to_distribution(m: &SaliencyGrid, eps: f64) -> (Vec<f64>, f64) {
    let clamped: Vec<f64> = m.values().iter().map(|v| v.max(0.0)).collect();
    let s = neumaier_sum(clamped.iter().copied());
    let d = clamped.iter().map(|v| v / (s + eps)).collect();
    (d, s)
}

/// Mean and population standard deviation.
fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = neumaier_sum(values.iter().copied()) / n;
    let var = neumaier_sum(values.iter().map(|v| (v - mean).powi(2))) / n;
    (mean, var.sqrt())
}

fn nondegenerate_std(values: &[f64]) -> Result<(f64, f64)> {
    let (mean, std) = moments(values);
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if !(std > 1e-12 * scale) {
        return Err(Error::DegenerateVariance);
    }
    Ok((mean, std))
}

pub fn kld(g: &SaliencyGrid, p: &SaliencyGrid) -> Result<f64> {
    kld_with_eps(g, p, DEFAULT_EPS)
}

/// `sum g_i log(eps + g_i / (eps + p_i))` over the normalized maps.
pub fn kld_with_eps(g: &SaliencyGrid, p: &SaliencyGrid, eps: f64) -> Result<f64> {
    check_shape(g, p)?;
    let (gd, gs) = to_distribution(g, eps);
    if !(gs > 0.0) {
        return Err(Error::DegenerateTarget);
    }
    let (pd, _) = to_distribution(p, eps);
    Ok(neumaier_sum(gd.iter().zip(&pd).map(|(gi, pi)| gi * (eps + gi / (eps + pi)).ln())))
}

pub fn cc(y: &SaliencyGrid, y_hat: &SaliencyGrid) -> Result<f64> {
    cc_with_eps(y, y_hat, DEFAULT_EPS)
}

pub fn cc_with_eps(y: &SaliencyGrid, y_hat: &SaliencyGrid, eps: f64) -> Result<f64> {
    check_shape(y, y_hat)?;
    let (my, sy) = nondegenerate_std(y.values())?;
    let (mp, sp) = nondegenerate_std(y_hat.values())?;
    let n = y.values().len() as f64;
    let acc = neumaier_sum(
        y.values()
            .iter()
            .zip(y_hat.values())
            .map(|(a, b)| ((a - my) / (sy + eps)) * ((b - mp) / (sp + eps))),
    );
    Ok(acc / n)
}

pub fn sim(p: &SaliencyGrid, q: &SaliencyGrid) -> Result<f64> {
    sim_with_eps(p, q, DEFAULT_EPS)
}

pub fn sim_with_eps(p: &SaliencyGrid, q: &SaliencyGrid, eps: f64) -> Result<f64> {
    check_shape(p, q)?;
    let (pd, ps) = to_distribution(p, eps);
    let (qd, qs) = to_distribution(q, eps);
    if !(ps > 0.0) || !(qs > 0.0) {
        return Err(Error::DegenerateDistribution);
    }
    Ok(neumaier_sum(pd.iter().zip(&qd).map(|(a, b)| a.min(*b))))
}

/// Z-scored prediction sampled at the ground truth's first maximum.
pub fn nss(y: &SaliencyGrid, y_hat: &SaliencyGrid) -> Result<f64> {
    check_shape(y, y_hat)?;
    let (mean, std) = nondegenerate_std(y_hat.values())?;
    Ok((y_hat.values()[y.argmax()] - mean) / std)
}

/// Histogram intersection of two probability FDMs.
pub fn fdm_sim(a: &SaliencyGrid, b: &SaliencyGrid) -> Result<f64> {
    if !a.is_probability() || !b.is_probability() {
        return Err(Error::Contract("FDM-SIM needs probability FDMs".into()));
    }
    check_shape(a, b)?;
    Ok(neumaier_sum(a.values().iter().zip(b.values()).map(|(x, y)| x.min(*y))))
}

/// Pearson correlation of two flattened FDMs.
pub fn fdm_cc(a: &SaliencyGrid, b: &SaliencyGrid) -> Result<f64> {
    check_shape(a, b)?;
    let (ma, _) = nondegenerate_std(a.values())?;
    let (mb, _) = nondegenerate_std(b.values())?;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.values().iter().zip(b.values()) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Bilinear resize with half-pixel-centre alignment and edge clamping.
pub fn resize_bilinear(src: &SaliencyGrid, dst_w: usize, dst_h: usize) -> Result<SaliencyGrid> {
    if dst_w == 0 || dst_h == 0 {
        return Err(Error::Shape("target size must be positive".into()));
    }
    let (sw, sh) = (src.width(), src.height());
    if (sw, sh) == (dst_w, dst_h) {
        return Ok(src.clone());
    }
    let axis = |d: usize, src_n: usize, dst_n: usize| {
        let s = ((d as f64 + 0.5) * src_n as f64 / dst_n as f64 - 0.5).clamp(0.0, (src_n - 1) as f64);
        let i0 = s.floor() as usize;
        let i1 = (i0 + 1).min(src_n - 1);
        (i0, i1, s - i0 as f64)
    };
    let cols: Vec<_> = (0..dst_w).map(|d| axis(d, sw, dst_w)).collect();
    let mut out = Vec::with_capacity(dst_w * dst_h);
    for v in 0..dst_h {
        let (y0, y1, fy) = axis(v, sh, dst_h);
        for &(x0, x1, fx) in &cols {
            let top = src.get(x0, y0) * (1.0 - fx) + src.get(x1, y0) * fx;
            let bottom = src.get(x0, y1) * (1.0 - fx) + src.get(x1, y1) * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    SaliencyGrid::new(dst_w, dst_h, out)
}

/// Scores for one frame. A metric is `None` when it is undefined on the frame;
/// `valid` is false when the ground truth is empty, in which case every metric
/// is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameScore {
    pub frame_index: usize,
    pub kld: Option<f64>,
    pub cc: Option<f64>,
    pub sim: Option<f64>,
    pub nss: Option<f64>,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MetricCounts {
    pub kld: usize,
    pub cc: usize,
    pub sim: usize,
    pub nss: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequenceSummary {
    pub kld: Option<f64>,
    pub cc: Option<f64>,
    pub sim: Option<f64>,
    pub nss: Option<f64>,
    pub n_frames_used_per_metric: MetricCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub frames: Vec<FrameScore>,
    pub summary: SequenceSummary,
}

#[derive(Serialize)]
struct FrameRow {
    i: usize,
    kld: Option<f64>,
    cc: Option<f64>,
    sim: Option<f64>,
    nss: Option<f64>,
    valid_kld: bool,
    valid_cc: bool,
    valid_sim: bool,
    valid_nss: bool,
}

impl Serialize for EvaluationReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Report<'a> {
            frames: Vec<FrameRow>,
            summary: &'a SequenceSummary,
        }
        let frames = self
            .frames
            .iter()
            .map(|f| FrameRow {
                i: f.frame_index,
                kld: f.kld,
                cc: f.cc,
                sim: f.sim,
                nss: f.nss,
                valid_kld: f.kld.is_some(),
                valid_cc: f.cc.is_some(),
                valid_sim: f.sim.is_some(),
                valid_nss: f.nss.is_some(),
            })
            .collect();
        Report { frames, summary: &self.summary }.serialize(serializer)
    }
}

pub fn score_frame(frame_index: usize, gt: &SaliencyGrid, pred: &SaliencyGrid) -> Result<FrameScore> {
    let pred = pred.map(|v| v.min(1.0))?;
    let pred = resize_bilinear(&pred, gt.width(), gt.height())?;
    if gt.values().iter().all(|v| *v <= 0.0) {
        return Ok(FrameScore { frame_index, kld: None, cc: None, sim: None, nss: None, valid: false });
    }
    Ok(FrameScore {
        frame_index,
        kld: kld(gt, &pred).ok(),
        cc: cc(gt, &pred).ok(),
        sim: sim(gt, &pred).ok(),
        nss: nss(gt, &pred).ok(),
        valid: true,
    })
}

fn mean_of(values: impl Iterator<Item = f64>) -> (Option<f64>, usize) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        (None, 0)
    } else {
        (Some(neumaier_sum(v.iter().copied()) / v.len() as f64), v.len())
    }
}

/// Scores every frame pair and averages each metric over the frames where it
/// is defined.
///
/// Predictions are clamped to `[0, 1]` and bilinearly resized to the
/// ground-truth grid. When `pred_native` is given every prediction must have
/// that size.
pub fn evaluate_sequence(
    gt_frames: &[SaliencyGrid],
    pred_frames: &[SaliencyGrid],
    pred_native: Option<(usize, usize)>,
) -> Result<EvaluationReport> {
    if gt_frames.len() != pred_frames.len() {
        return Err(Error::Shape(format!(
            "{} ground-truth frames vs {} predicted frames",
            gt_frames.len(),
            pred_frames.len()
        )));
    }
    if let Some((w, h)) = pred_native {
        if let Some(i) = pred_frames.iter().position(|p| (p.width(), p.height()) != (w, h)) {
            return Err(Error::Shape(format!("prediction {i} is not {w}x{h}")));
        }
    }
    let frames = gt_frames
        .par_iter()
        .zip(pred_frames)
        .enumerate()
        .map(|(i, (g, p))| score_frame(i, g, p))
        .collect::<Result<Vec<_>>>()?;
    let (kld, n_kld) = mean_of(frames.iter().filter_map(|f| f.kld));
    let (cc, n_cc) = mean_of(frames.iter().filter_map(|f| f.cc));
    let (sim, n_sim) = mean_of(frames.iter().filter_map(|f| f.sim));
    let (nss, n_nss) = mean_of(frames.iter().filter_map(|f| f.nss));
    Ok(EvaluationReport {
        frames,
        summary: SequenceSummary {
            kld,
            cc,
            sim,
            nss,
            n_frames_used_per_metric: MetricCounts { kld: n_kld, cc: n_cc, sim: n_sim, nss: n_nss },
        },
    })
}
