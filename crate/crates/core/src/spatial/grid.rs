use std::io::Write;

use crate::error::{Error, Result};

/// Non-negative row-major 2-D grid: heatmaps, FDMs, ground truth, predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
    probability: bool,
}

/// Allowed deviation from 1 for a grid marked as a probability distribution.
pub const PROBABILITY_TOLERANCE: f64 = 1e-6;

impl SaliencyGrid {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!("grid dimensions must be positive, got {width}x{height}")));
        }
        if width.checked_mul(height) != Some(values.len()) {
            return Err(Error::Shape(format!("{width}x{height} grid needs {} values, got {}", width * height, values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Contract(format!("grid value {} at index {i} is not finite and >= 0", values[i])));
        }
        Ok(Self { width, height, values, probability: false })
    }

    /// Like [`SaliencyGrid::new`] but clamps negative entries to zero.
    pub fn new_clamped(width: usize, height: usize, mut values: Vec<f64>) -> Result<Self> {
        for v in &mut values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Self::new(width, height, values)
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    pub(crate) fn from_parts(width: usize, height: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        Self { width, height, values, probability: false }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[v * self.width + u]
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn sum(&self) -> f64 {
        neumaier_sum(self.values.iter().copied())
    }

    pub fn same_shape(&self, other: &SaliencyGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Divides by the total mass and marks the result as a probability grid.
    pub fn normalized(&self) -> Result<SaliencyGrid> {
        let s = self.sum();
        if !(s > 0.0) {
            return Err(Error::DegenerateDistribution);
        }
        Ok(Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|v| v / s).collect(),
            probability: true,
        })
    }

    /// Marks an already-normalized grid (e.g. read back from disk) as a
    /// probability grid after checking its mass. The values are rescaled by
    /// the exact sum to remove storage rounding.
    pub fn into_probability(self) -> Result<SaliencyGrid> {
        let s = self.sum();
        if (s - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::Contract(format!("grid sums to {s}, not 1")));
        }
        self.normalized()
    }

    /// Index of the first maximum in row-major order.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<SaliencyGrid> {
        Self::new(self.width, self.height, self.values.iter().map(|v| f(*v)).collect())
    }
}

/// Compensated summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

const SGM_MAGIC: &[u8] = b"SGM ";
const SGM_MAX_HEADER: usize = 64;

/// Writes the SGM format: `SGM <w> <h>\n` followed by little-endian f32
/// values, row-major, top row first.
pub fn write_sgm<W: Write>(grid: &SaliencyGrid, mut out: W) -> Result<()> {
    out.write_all(&encode_sgm(grid))?;
    Ok(())
}

pub fn encode_sgm(grid: &SaliencyGrid) -> Vec<u8> {
    let mut buf = format!("SGM {} {}\n", grid.width, grid.height).into_bytes();
    buf.reserve(grid.values.len() * 4);
    for v in &grid.values {
        buf.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    buf
}

fn parse_dim(field: &[u8]) -> Option<usize> {
    let canonical = !field.is_empty()
        && field.iter().all(u8::is_ascii_digit)
        && !(field.len() > 1 && field[0] == b'0');
    if !canonical {
        return None;
    }
    std::str::from_utf8(field).ok()?.parse::<usize>().ok().filter(|d| *d > 0)
}

/// Decodes an SGM buffer into `(width, height, values)` without imposing the
/// grid value invariants.
pub fn decode_sgm_raw(bytes: &[u8]) -> Result<(usize, usize, Vec<f32>)> {
    let bad = |m: &str| Error::Parse { line: 1, message: format!("SGM: {m}") };
    if !bytes.starts_with(SGM_MAGIC) {
        return Err(bad("missing `SGM ` magic"));
    }
    let nl = bytes
        .iter()
        .take(SGM_MAX_HEADER)
        .position(|b| *b == b'\n')
        .ok_or_else(|| bad("header line not terminated"))?;
    let mut fields = bytes[SGM_MAGIC.len()..nl].split(|b| *b == b' ');
    let (w, h) = match (fields.next(), fields.next(), fields.next()) {
        (Some(w), Some(h), None) => (parse_dim(w), parse_dim(h)),
        _ => return Err(bad("header must be `SGM <width> <height>`")),
    };
    let (w, h) = match (w, h) {
        (Some(w), Some(h)) => (w, h),
        _ => return Err(bad("dimensions must be canonical positive integers")),
    };
    let payload = &bytes[nl + 1..];
    let expected = w.checked_mul(h).and_then(|n| n.checked_mul(4)).ok_or_else(|| bad("dimensions overflow"))?;
    if payload.len() != expected {
        return Err(bad(&format!("expected {expected} payload bytes for {w}x{h}, found {}", payload.len())));
    }
    let values = payload.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok((w, h, values))
}

/// Decodes an SGM buffer; values must be finite and non-negative.
pub fn decode_sgm(bytes: &[u8]) -> Result<SaliencyGrid> {
    let (w, h, values) = decode_sgm_raw(bytes)?;
    SaliencyGrid::new(w, h, values.into_iter().map(f64::from).collect())
}

/// 8-bit binary PGM with linear min-max scaling. Constant grids map to 0.
pub fn encode_pgm(grid: &SaliencyGrid) -> Vec<u8> {
    let (lo, hi) = grid
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let mut buf = format!("P5\n{} {}\n255\n", grid.width, grid.height).into_bytes();
    let range = hi - lo;
    buf.extend(grid.values.iter().map(|v| {
        if range > 0.0 {
            ((v - lo) / range * 255.0).round() as u8
        } else {
            0
        }
    }));
    buf
}
