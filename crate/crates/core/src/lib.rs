//! gazekit: gaze-trace analytics and saliency-map evaluation.
//!
//! The pipeline stages are:
//!
//! 1. **Ingest** ([`trace`]): gaze CSV parsing, frame clamping, resolution
//!    mapping.
//! 2. **Fixations** ([`fixation`]): dispersion-threshold (I-DT) detection and
//!    duration-normalized fixation metrics.
//! 3. **Spatial** ([`spatial`]): convex hulls, truncated-Gaussian gaze heatmaps,
//!    fixation density maps, and the SGM grid format.
//! 4. **Metrics** ([`metrics`]): KLD, CC, SIM, NSS, FDM-SIM and FDM-CC, plus
//!    per-frame sequence evaluation.
//! 5. **Dataset** ([`dataset`]): PerfIndex ranking, viewing-subset allocation,
//!    and leakage-safe splits conditioned on expertise and modality.
//!
//! [`synth`] generates synthetic traces with known fixations for tests and
//! demos.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod fixation;
pub mod json;
pub mod metrics;
pub mod spatial;
pub mod synth;
pub mod trace;
pub mod trial;

pub use error::{Error, Result};
pub use fixation::{detect_fixations, summarize, FixationMetrics, FixationSegment, IdtParams};
pub use metrics::{cc, evaluate_sequence, fdm_cc, fdm_sim, kld, nss, sim, EvaluationReport, FrameScore};
pub use spatial::{build_fdm, convex_hull, gaze_heatmap_frame, HeatmapParams, HullPolygon, SaliencyGrid};
pub use trace::{parse_gaze_csv, rescale_point, validate_trace, Coords, GazeSample, GazeTrace, ValidationReport};
pub use trial::{Expertise, Modality, Task, TrialRecord};
