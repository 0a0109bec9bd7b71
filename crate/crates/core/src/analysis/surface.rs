//! Piecewise-linear boundary surface over the first two objectives.
//!
//! Points are min-max scaled in the (throughput, delay margin) plane,
//! Delaunay-triangulated there, and the third objective is interpolated
//! barycentrically at each grid node. Nodes outside the convex hull are left
//! empty.

use delaunator::{triangulate, Point};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major over `ys` then `xs`: `z[iy * xs.len() + ix]`.
    pub z: Vec<Option<f64>>,
}

impl Surface {
    pub fn at(&self, ix: usize, iy: usize) -> Option<f64> {
        self.z[iy * self.xs.len() + ix]
    }
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Interpolate `points[i][2]` over a `resolution x resolution` grid spanning
/// the bounding box of the first two coordinates.
pub fn boundary_surface(points: &[[f64; 3]], resolution: usize) -> Result<Surface> {
    if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(SimError::Insufficient("non-finite objective values".into()));
    }
    if points.len() < 3 {
        return Err(SimError::Insufficient(format!("{} points, need at least 3", points.len())));
    }
    if resolution < 2 {
        return Err(SimError::config("resolution", "need at least 2 grid nodes per axis"));
    }
    let (x0, x1) = span(points.iter().map(|p| p[0]));
    let (y0, y1) = span(points.iter().map(|p| p[1]));
    if x1 <= x0 || y1 <= y0 {
        return Err(SimError::Insufficient("points do not span two dimensions".into()));
    }
    let scale = |x: f64, y: f64| ((x - x0) / (x1 - x0), (y - y0) / (y1 - y0));
    let planar: Vec<Point> = points
        .iter()
        .map(|p| {
            let (x, y) = scale(p[0], p[1]);
            Point { x, y }
        })
        .collect();
    let tri = triangulate(&planar);
    if tri.triangles.is_empty() {
        return Err(SimError::Insufficient("points are collinear".into()));
    }
    let xs = linspace(x0, x1, resolution);
    let ys = linspace(y0, y1, resolution);
    let mut z = Vec::with_capacity(resolution * resolution);
    for &y in &ys {
        for &x in &xs {
            let (qx, qy) = scale(x, y);
            z.push(interpolate(&planar, &tri.triangles, points, qx, qy));
        }
    }
    Ok(Surface { xs, ys, z })
}

const EDGE_SLACK: f64 = 1e-12;

fn interpolate(planar: &[Point], triangles: &[usize], points: &[[f64; 3]], qx: f64, qy: f64) -> Option<f64> {
    for t in triangles.chunks_exact(3) {
        let (a, b, c) = (&planar[t[0]], &planar[t[1]], &planar[t[2]]);
        let det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
        if det.abs() < 1e-300 {
            continue;
        }
        let l1 = ((b.y - c.y) * (qx - c.x) + (c.x - b.x) * (qy - c.y)) / det;
        let l2 = ((c.y - a.y) * (qx - c.x) + (a.x - c.x) * (qy - c.y)) / det;
        let l3 = 1.0 - l1 - l2;
        if l1 >= -EDGE_SLACK && l2 >= -EDGE_SLACK && l3 >= -EDGE_SLACK {
            return Some(l1 * points[t[0]][2] + l2 * points[t[1]][2] + l3 * points[t[2]][2]);
        }
    }
    None
}
