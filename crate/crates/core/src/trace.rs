//! Gaze samples, traces, CSV ingestion, and resolution mapping.
//!
//! A [`GazeTrace`] is the validated, time-ordered input to every analysis.
//! Valid samples that fall outside the stimulus frame are clamped to
//! `[0, dim - 1]` on construction and their indices are recorded so that
//! [`validate_trace`] can report them later. Invalid samples (blinks, low
//! tracker confidence) are kept with `valid = false` because they still count
//! toward the total recording duration.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// One gaze sample in pixel coordinates, origin top-left, y downward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub valid: bool,
}

impl GazeSample {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Self { t, x, y, valid: true }
    }

    pub fn invalid(t: f64) -> Self {
        Self { t, x: f64::NAN, y: f64::NAN, valid: false }
    }
}

/// Coordinate system of the `x`,`y` columns in a gaze CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coords {
    #[default]
    Pixel,
    /// `[0, 1]` per axis; mapped to pixels by multiplying with the frame size.
    Normalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GazeTrace {
    samples: Vec<GazeSample>,
    width: u32,
    height: u32,
    nominal_rate: f64,
    clamped: Vec<usize>,
}

/// Nominal rate of the active (headset) recordings.
pub const ACTIVE_RATE_HZ: f64 = 200.0;
/// Nominal rate of the passive (screen-based) recordings.
pub const PASSIVE_RATE_HZ: f64 = 150.0;

impl GazeTrace {
    /// Builds a trace, clamping out-of-frame valid samples.
    ///
    /// Timestamps must be finite, non-negative and strictly increasing.
    /// Valid samples must have finite coordinates.
    pub fn new(mut samples: Vec<GazeSample>, width: u32, height: u32, nominal_rate: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Argument(format!("frame size must be positive, got {width}x{height}")));
        }
        let mut clamped = Vec::new();
        let max_x = f64::from(width - 1);
        let max_y = f64::from(height - 1);
        for (i, s) in samples.iter_mut().enumerate() {
            if !s.t.is_finite() || s.t < 0.0 {
                return Err(Error::Argument(format!("sample {i}: timestamp {} must be finite and >= 0", s.t)));
            }
            if !s.valid {
                continue;
            }
            if !s.x.is_finite() || !s.y.is_finite() {
                return Err(Error::Argument(format!("sample {i}: valid sample has non-finite coordinates")));
            }
            let in_x = s.x >= 0.0 && s.x < f64::from(width);
            let in_y = s.y >= 0.0 && s.y < f64::from(height);
            if !(in_x && in_y) {
                s.x = s.x.clamp(0.0, max_x);
                s.y = s.y.clamp(0.0, max_y);
                clamped.push(i);
            }
        }
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                return Err(Error::Argument(format!(
                    "sample {}: timestamp {} is not strictly after {}",
                    i + 1,
                    w[1].t,
                    w[0].t
                )));
            }
        }
        Ok(Self { samples, width, height, nominal_rate, clamped })
    }

    pub fn samples(&self) -> &[GazeSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn nominal_rate(&self) -> f64 {
        self.nominal_rate
    }

    /// Indices of valid samples that were clamped into the frame.
    pub fn clamped_indices(&self) -> &[usize] {
        &self.clamped
    }

    /// `t_last - t_first`, or 0 for an empty trace.
    pub fn total_duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Positions of all valid samples.
    pub fn valid_points(&self) -> Vec<(f64, f64)> {
        self.samples.iter().filter(|s| s.valid).map(|s| (s.x, s.y)).collect()
    }

    /// Maps every valid sample into a frame of a different resolution.
    pub fn rescaled(&self, to_w: u32, to_h: u32) -> Result<GazeTrace> {
        let mut out = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            if s.valid {
                let (x, y) = rescale_point(
                    s.x,
                    s.y,
                    f64::from(self.width),
                    f64::from(self.height),
                    f64::from(to_w),
                    f64::from(to_h),
                )?;
                out.push(GazeSample { x, y, ..*s });
            } else {
                out.push(*s);
            }
        }
        GazeTrace::new(out, to_w, to_h, self.nominal_rate)
    }

    /// Adds a constant to every timestamp.
    pub fn time_shifted(&self, dt: f64) -> Result<GazeTrace> {
        let samples = self.samples.iter().map(|s| GazeSample { t: s.t + dt, ..*s }).collect();
        GazeTrace::new(samples, self.width, self.height, self.nominal_rate)
    }
}

const HEADER: [&str; 4] = ["t", "x", "y", "valid"];

fn parse_field(field: &str, name: &str, line: u64) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("field `{name}` is not a number: {field:?}"),
    })
}

/// Parses the `t,x,y,valid` gaze CSV format.
///
/// Lines starting with `#` are comments. For invalid rows (`valid = 0`) the
/// coordinate fields may be empty or non-finite; they are stored as NaN.
pub fn parse_gaze_csv(bytes: &[u8], width: u32, height: u32, coords: Coords) -> Result<GazeTrace> {
    parse_gaze_csv_with_rate(bytes, width, height, coords, ACTIVE_RATE_HZ)
}

pub fn parse_gaze_csv_with_rate(
    bytes: &[u8],
    width: u32,
    height: u32,
    coords: Coords,
    nominal_rate: f64,
) -> Result<GazeTrace> {
    if width == 0 || height == 0 {
        return Err(Error::Argument(format!("frame size must be positive, got {width}x{height}")));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut records = reader.records();
    let header = loop {
        match records.next() {
            None => return Err(Error::EmptyInput("gaze CSV has no header")),
            Some(Err(e)) => return Err(csv_error(e)),
            Some(Ok(r)) if r.len() == 1 && r[0].is_empty() => continue,
            Some(Ok(r)) => break r,
        }
    };
    let header_line = header.position().map_or(1, |p| p.line());
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse {
            line: header_line,
            message: format!("expected header `t,x,y,valid`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let (sx, sy) = match coords {
        Coords::Pixel => (1.0, 1.0),
        Coords::Normalized => (f64::from(width), f64::from(height)),
    };
    let mut samples: Vec<GazeSample> = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 4 {
            return Err(Error::Parse { line, message: format!("expected 4 columns, found {}", rec.len()) });
        }
        let t = parse_field(&rec[0], "t", line)?;
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Parse { line, message: format!("timestamp {t} must be finite and >= 0") });
        }
        let valid = match &rec[3] {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Parse { line, message: format!("field `valid` must be 0 or 1, found {other:?}") })
            }
        };
        let (x, y) = if valid {
            let x = parse_field(&rec[1], "x", line)?;
            let y = parse_field(&rec[2], "y", line)?;
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Parse { line, message: "valid sample has non-finite coordinates".into() });
            }
            (x * sx, y * sy)
        } else {
            let lax = |f: &str| if f.is_empty() { Ok(f64::NAN) } else { parse_field(f, "x/y", line) };
            (lax(&rec[1])? * sx, lax(&rec[2])? * sy)
        };
        if let Some(prev) = samples.last() {
            if t <= prev.t {
                return Err(Error::Ordering { line, t, prev: prev.t });
            }
        }
        samples.push(GazeSample { t, x, y, valid });
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput("gaze CSV has no samples"));
    }
    GazeTrace::new(samples, width, height, nominal_rate)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse { line, message: e.to_string() }
}

fn write_coord(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

/// Writes a trace in pixel coordinates. Floats use the shortest
/// representation that parses back to the same bits.
pub fn write_gaze_csv<W: Write>(trace: &GazeTrace, mut out: W) -> Result<()> {
    writeln!(out, "t,x,y,valid")?;
    for s in trace.samples() {
        writeln!(out, "{},{},{},{}", s.t, write_coord(s.x), write_coord(s.y), u8::from(s.valid))?;
    }
    Ok(())
}

/// Maps a point between two frame resolutions by per-axis scaling.
pub fn rescale_point(x: f64, y: f64, from_w: f64, from_h: f64, to_w: f64, to_h: f64) -> Result<(f64, f64)> {
    // NaN fails every comparison, so `!(d > 0)` also rejects it.
    if [from_w, from_h, to_w, to_h].iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(Error::Argument(format!(
            "resolutions must be positive: {from_w}x{from_h} -> {to_w}x{to_h}"
        )));
    }
    Ok((x * to_w / from_w, y * to_h / from_h))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n_samples: usize,
    pub valid: usize,
    pub invalid: usize,
    pub clamped: usize,
    pub clamped_indices: Vec<usize>,
    pub t_first: Option<f64>,
    pub t_last: Option<f64>,
    pub span: f64,
}

pub fn validate_trace(trace: &GazeTrace) -> ValidationReport {
    let valid = trace.samples().iter().filter(|s| s.valid).count();
    ValidationReport {
        n_samples: trace.len(),
        valid,
        invalid: trace.len() - valid,
        clamped: trace.clamped_indices().len(),
        clamped_indices: trace.clamped_indices().to_vec(),
        t_first: trace.samples().first().map(|s| s.t),
        t_last: trace.samples().last().map(|s| s.t),
        span: trace.total_duration(),
    }
}
