//! Per-frame truncated-Gaussian gaze heatmaps.

use super::grid::SaliencyGrid;
use crate::error::{Error, Result};
use crate::trace::GazeTrace;

pub const DEFAULT_HEATMAP_SIGMA: f64 = 5.0;
pub const DEFAULT_HEATMAP_TRUNCATION: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapParams {
    pub sigma: f64,
    /// Support radius in units of `sigma`.
    pub truncation: f64,
}

impl Default for HeatmapParams {
    fn default() -> Self {
        Self { sigma: DEFAULT_HEATMAP_SIGMA, truncation: DEFAULT_HEATMAP_TRUNCATION }
    }
}

/// Unnormalized Gaussian centred on a gaze point in grid coordinates.
///
/// Pixels are sampled at integer centres `(u, v)`. Pixels farther than
/// `truncation * sigma` from `(x, y)` are exactly zero.
pub fn gaze_heatmap_frame(x: f64, y: f64, grid_w: usize, grid_h: usize, params: HeatmapParams) -> Result<SaliencyGrid> {
    let HeatmapParams { sigma, truncation } = params;
    if !(sigma > 0.0) || !(truncation > 0.0) || !sigma.is_finite() || !truncation.is_finite() {
        return Err(Error::Argument(format!("sigma ({sigma}) and truncation ({truncation}) must be > 0")));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::Argument("gaze point must be finite".into()));
    }
    let mut grid = SaliencyGrid::zeros(grid_w, grid_h)?.into_values();
    let r = truncation * sigma;
    let r2 = r * r;
    let two_s2 = 2.0 * sigma * sigma;
    let u_lo = (x - r).ceil().max(0.0);
    let u_hi = (x + r).floor().min(grid_w as f64 - 1.0);
    let v_lo = (y - r).ceil().max(0.0);
    let v_hi = (y + r).floor().min(grid_h as f64 - 1.0);
    if u_lo <= u_hi && v_lo <= v_hi {
        for v in v_lo as usize..=v_hi as usize {
            let dy = v as f64 - y;
            for u in u_lo as usize..=u_hi as usize {
                let dx = u as f64 - x;
                let d2 = dx * dx + dy * dy;
                if d2 <= r2 {
                    grid[v * grid_w + u] = (-d2 / two_s2).exp();
                }
            }
        }
    }
    Ok(SaliencyGrid::from_parts(grid_w, grid_h, grid))
}

/// Heatmaps for a sequence of frame times.
///
/// Each frame uses the valid sample nearest to its time, provided it lies
/// within `tolerance` seconds; otherwise the frame is all zeros. Sample
/// coordinates are rescaled from the trace frame to the grid.
pub fn frame_heatmaps(
    trace: &GazeTrace,
    frame_times: &[f64],
    tolerance: f64,
    grid_w: usize,
    grid_h: usize,
    params: HeatmapParams,
) -> Result<Vec<SaliencyGrid>> {
    let valid: Vec<_> = trace.samples().iter().filter(|s| s.valid).collect();
    let sx = grid_w as f64 / f64::from(trace.width());
    let sy = grid_h as f64 / f64::from(trace.height());
    frame_times
        .iter()
        .map(|&t| {
            let k = valid.partition_point(|s| s.t < t);
            let nearest = [k.checked_sub(1), Some(k)]
                .into_iter()
                .flatten()
                .filter_map(|i| valid.get(i))
                .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()));
            match nearest {
                Some(s) if (s.t - t).abs() <= tolerance => gaze_heatmap_frame(s.x * sx, s.y * sy, grid_w, grid_h, params),
                _ => SaliencyGrid::zeros(grid_w, grid_h),
            }
        })
        .collect()
}
