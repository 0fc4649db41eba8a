//! Graham-scan convex hull of planar gaze points.

use crate::error::{Error, Result};

pub type Point = (f64, f64);

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct HullPolygon {
    pub vertices: Vec<Point>,
    pub area: f64,
}

/// `(b - a) x (c - a)`; positive when `a, b, c` turn counter-clockwise.
pub fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Shoelace area of a simple polygon, positive for counter-clockwise order.
pub fn shoelace_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    twice / 2.0
}

/// Computes the convex hull with a Graham scan.
///
/// Collinear boundary points are dropped. One distinct point yields a single
/// vertex and collinear inputs yield their two extreme points, both with area 0.
pub fn convex_hull(points: &[Point]) -> Result<HullPolygon> {
    if points.is_empty() {
        return Err(Error::EmptyInput("convex hull of no points"));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::Argument("hull points must be finite".into()));
    }
    // Pivot: lowest y, then lowest x. Every other point lies at a polar angle
    // in [0, pi) around it.
    let pivot = *points
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .expect("non-empty");
    let dist2 = |p: &Point| (p.0 - pivot.0).powi(2) + (p.1 - pivot.1).powi(2);
    let mut rest: Vec<(f64, f64, Point)> = points
        .iter()
        .filter(|p| **p != pivot)
        .map(|p| ((p.1 - pivot.1).atan2(p.0 - pivot.0), dist2(p), *p))
        .collect();
    rest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2 .0.total_cmp(&b.2 .0)));
    rest.dedup_by(|a, b| a.2 == b.2);

    let mut stack: Vec<Point> = vec![pivot];
    for &(_, _, p) in &rest {
        while stack.len() >= 2 && cross(stack[stack.len() - 2], stack[stack.len() - 1], p) <= 0.0 {
            stack.pop();
        }
        stack.push(p);
    }
    // With the angle order, a collinear set collapses onto [pivot, farthest];
    // catch a trailing point collinear with the closing edge as well.
    while stack.len() >= 3 && cross(stack[stack.len() - 2], stack[stack.len() - 1], pivot) <= 0.0 {
        stack.pop();
    }
    let area = if stack.len() >= 3 { shoelace_area(&stack) } else { 0.0 };
    Ok(HullPolygon { vertices: stack, area })
}

impl HullPolygon {
    /// Whether `p` lies inside or on the hull, allowing `tol` of slack in the
    /// orientation test.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let v = &self.vertices;
        match v.len() {
            1 => (v[0].0 - p.0).abs() <= tol && (v[0].1 - p.1).abs() <= tol,
            2 => {
                let len = ((v[1].0 - v[0].0).powi(2) + (v[1].1 - v[0].1).powi(2)).sqrt().max(1.0);
                let on_line = cross(v[0], v[1], p).abs() <= tol * len;
                let dot = (p.0 - v[0].0) * (v[1].0 - v[0].0) + (p.1 - v[0].1) * (v[1].1 - v[0].1);
                on_line && dot >= -tol * len && dot <= len * len + tol * len
            }
            n => (0..n).all(|i| cross(v[i], v[(i + 1) % n], p) >= -tol),
        }
    }
}
