//! Gaze hulls, per-frame heatmaps, fixation density maps, and the grid
//! container with its on-disk formats.

mod fdm;
mod grid;
mod heatmap;
mod hull;

pub use fdm::{build_fdm, fixation_impulse, gaussian_kernel_1d, DEFAULT_FDM_SIGMA, FDM_TRUNCATION};
pub use grid::{
    decode_sgm, decode_sgm_raw, encode_pgm, encode_sgm, neumaier_sum, write_sgm, SaliencyGrid, PROBABILITY_TOLERANCE,
};
pub use heatmap::{
    frame_heatmaps, gaze_heatmap_frame, HeatmapParams, DEFAULT_HEATMAP_SIGMA, DEFAULT_HEATMAP_TRUNCATION,
};
pub use hull::{convex_hull, cross, shoelace_area, HullPolygon, Point};
