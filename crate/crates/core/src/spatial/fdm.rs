//! Duration-weighted fixation density maps.

use std::collections::BTreeMap;

use super::grid::SaliencyGrid;
use crate::error::{Error, Result};
use crate::fixation::{median, FixationSegment};
use crate::trace::GazeTrace;

pub const DEFAULT_FDM_SIGMA: f64 = 30.0;
/// Kernel support radius in units of sigma.
pub const FDM_TRUNCATION: f64 = 3.0;

/// Normalized, truncated 1-D Gaussian taps for offsets `-r..=r`.
pub fn gaussian_kernel_1d(sigma: f64, truncation: f64) -> Vec<f64> {
    let r = (truncation * sigma + 0.5).floor() as i64;
    let taps: Vec<f64> = (-r..=r).map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = taps.iter().sum();
    taps.into_iter().map(|w| w / s).collect()
}

/// Impulse location of a fixation: the per-axis median of its samples,
/// rounded to the nearest pixel and kept on the grid.
pub fn fixation_impulse(trace: &GazeTrace, segment: &FixationSegment) -> Result<(usize, usize)> {
    let samples = trace
        .samples()
        .get(segment.start_index..=segment.end_index)
        .ok_or_else(|| Error::Argument(format!("segment [{}, {}] outside trace", segment.start_index, segment.end_index)))?;
    let xs: Vec<f64> = samples.iter().filter(|s| s.valid).map(|s| s.x).collect();
    let ys: Vec<f64> = samples.iter().filter(|s| s.valid).map(|s| s.y).collect();
    if xs.is_empty() {
        return Err(Error::Argument("fixation segment has no valid samples".into()));
    }
    let place = |m: f64, dim: u32| m.round().clamp(0.0, f64::from(dim - 1)) as usize;
    Ok((place(median(&xs), trace.width()), place(median(&ys), trace.height())))
}

/// Builds an FDM at the trace's resolution.
///
/// Each fixation adds its duration at its impulse pixel; the impulse grid is
/// then smoothed with a separable Gaussian truncated at 3 sigma, with zero
/// padding (mass falling off the grid is lost). With `normalize` the result
/// is divided by its sum and marked as a probability grid.
pub fn build_fdm(trace: &GazeTrace, segments: &[FixationSegment], sigma: f64, normalize: bool) -> Result<SaliencyGrid> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Argument(format!("sigma must be > 0, got {sigma}")));
    }
    if normalize && segments.is_empty() {
        return Err(Error::EmptyDensity);
    }
    let (w, h) = (trace.width() as usize, trace.height() as usize);
    let mut impulses: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for seg in segments {
        let (u, v) = fixation_impulse(trace, seg)?;
        *impulses.entry((v, u)).or_insert(0.0) += seg.duration();
    }

    // The impulse grid is sparse, so splat the separable kernel around each
    // impulse instead of convolving the full grid.
    let kernel = gaussian_kernel_1d(sigma, FDM_TRUNCATION);
    let r = (kernel.len() / 2) as isize;
    let mut values = vec![0.0; w * h];
    for (&(v, u), &weight) in &impulses {
        let (u, v) = (u as isize, v as isize);
        let rows = (v - r).max(0)..=(v + r).min(h as isize - 1);
        let cols = (u - r).max(0)..=(u + r).min(w as isize - 1);
        for y in rows {
            let wy = weight * kernel[(y - v + r) as usize];
            let row = &mut values[y as usize * w..(y as usize + 1) * w];
            for x in cols.clone() {
                row[x as usize] += wy * kernel[(x - u + r) as usize];
            }
        }
    }
    let grid = SaliencyGrid::from_parts(w, h, values);
    if normalize {
        let s = grid.sum();
        if !(s > 0.0) {
            return Err(Error::EmptyDensity);
        }
        grid.normalized()
    } else {
        Ok(grid)
    }
}
