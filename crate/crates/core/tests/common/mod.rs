//! Fixtures and property checks shared by the integration targets.

#![allow(dead_code)]

pub mod props;

use std::f64::consts::PI;

use lightning_core::geometry::{Edge, Polygon};
use lightning_core::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Concave quadrilateral with one reflex corner at `4 + 6i`.
pub fn quadrilateral() -> Polygon {
    Polygon::new(vec![c(2.0, 4.0), c(8.0, 4.0), c(4.0, 6.0), c(2.0, 10.0)]).unwrap()
}

/// L-shaped hexagon with the reflex corner replaced by a cubic arc.
pub fn curvy_l() -> Polygon {
    let v = vec![c(0.0, 0.0), c(2.0, 0.0), c(2.0, 1.0), c(1.0, 2.0), c(0.0, 2.0)];
    let c1 = c(2.0, 1.0) + Complex64::from_polar(0.5, 0.75 * PI);
    let mut edges = vec![Edge::Straight; 5];
    edges[2] = Edge::CubicBezier { c1, c2: c(1.0, 1.5) };
    Polygon::with_edges(v, edges).unwrap()
}

pub fn re2(z: Complex64) -> f64 {
    z.re * z.re
}

/// Least-squares slope and r² of `ys` against `xs`.
pub fn line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let f = lightning_core::analysis::fit_line(xs, ys);
    (f.slope, f.r2)
}
