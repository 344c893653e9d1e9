//! Sector domains, polygons with optional Bézier edges, and the sample grids
//! used for fitting and for sup-norm measurement.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;

const ARC_PANELS: usize = 32;
const ARC_ORDER: usize = 8;

/// The filled sector `{apex + e^{i·rot}·x·e^{iθ} : 0 ≤ x ≤ radius, |θ| ≤ βπ/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorDomain {
    beta: f64,
    radius: f64,
    apex: Complex64,
    axis_rotation: f64,
}

impl SectorDomain {
    pub fn new(beta: f64) -> Result<Self> {
        Self::with_params(beta, 1.0, Complex64::new(0.0, 0.0), 0.0)
    }

    pub fn with_params(beta: f64, radius: f64, apex: Complex64, axis_rotation: f64) -> Result<Self> {
        if !(0.0..2.0).contains(&beta) {
            return Err(invalid(format!("beta must lie in [0, 2), got {beta}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("radius must be positive, got {radius}")));
        }
        if !(apex.re.is_finite() && apex.im.is_finite() && axis_rotation.is_finite()) {
            return Err(invalid("apex and rotation must be finite"));
        }
        Ok(Self { beta, radius, apex, axis_rotation })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn apex(&self) -> Complex64 {
        self.apex
    }
    pub fn axis_rotation(&self) -> f64 {
        self.axis_rotation
    }
    pub fn half_angle(&self) -> f64 {
        self.beta * PI / 2.0
    }

    pub fn to_local(&self, z: Complex64) -> Complex64 {
        (z - self.apex) * Complex64::from_polar(1.0, -self.axis_rotation)
    }

    pub fn from_local(&self, w: Complex64) -> Complex64 {
        self.apex + w * Complex64::from_polar(1.0, self.axis_rotation)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let w = self.to_local(z);
        let tol = 1e-12 * self.radius;
        if w.norm() > self.radius + tol {
            return false;
        }
        w.norm() <= tol || w.arg().abs() <= self.half_angle() + 1e-12
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridRole {
    SupNorm,
    LeastSquares,
}

/// Geometric clustering toward a singular point: radii shrink by `ratio` per
/// level for `depth` levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Clustering {
    pub ratio: f64,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    pub points: Vec<Complex64>,
    pub role: GridRole,
    pub clustering: Clustering,
    /// Per-point least-squares weights (√ of the local spacing), when meaningful.
    pub weights: Option<Vec<f64>>,
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn ray_angles(domain: &SectorDomain, n_arc: usize) -> Vec<f64> {
    if domain.beta == 0.0 {
        return vec![0.0];
    }
    let half = domain.half_angle();
    let n = n_arc as isize;
    (-n..=n).map(|m| half * m as f64 / n as f64).collect()
}

/// Rays at `2·n_arc + 1` angles across the sector, each with radii
/// `radius·ratio^k` for `k = 0..=n_ray`, plus the apex.
pub fn sample_sector(domain: &SectorDomain, n_ray: usize, n_arc: usize, cluster_ratio: f64) -> Result<SampleGrid> {
    if n_ray < 2 || n_arc < 1 || !(cluster_ratio > 0.0 && cluster_ratio < 1.0) {
        return Err(invalid("sample_sector needs n_ray >= 2, n_arc >= 1, ratio in (0,1)"));
    }
    let mut pts = vec![domain.apex];
    for th in ray_angles(domain, n_arc) {
        let dir = Complex64::from_polar(1.0, th);
        let mut r = domain.radius;
        for _ in 0..=n_ray {
            pts.push(domain.from_local(dir * r));
            r *= cluster_ratio;
        }
    }
    Ok(SampleGrid {
        points: pts,
        role: GridRole::SupNorm,
        clustering: Clustering { ratio: cluster_ratio, depth: n_ray },
        weights: None,
    })
}

/// Boundary rays only (the V-shaped set), geometric radii plus the apex.
pub fn v_grid(domain: &SectorDomain, n_radial: usize, ratio: f64) -> SampleGrid {
    let half = domain.half_angle();
    let angles: &[f64] = if domain.beta == 0.0 { &[0.0] } else { &[half, -half] };
    let mut pts = vec![domain.apex];
    for &th in angles {
        let dir = Complex64::from_polar(1.0, th);
        let mut r = domain.radius;
        for _ in 0..=n_radial {
            pts.push(domain.from_local(dir * r));
            r *= ratio;
        }
    }
    SampleGrid {
        points: pts,
        role: GridRole::SupNorm,
        clustering: Clustering { ratio, depth: n_radial },
        weights: None,
    }
}

/// Whole sector boundary: the V-shaped rays plus `n_arc` points on the arc.
/// By the maximum principle this is where the error of an analytic
/// approximation attains its maximum.
pub fn sector_boundary_grid(domain: &SectorDomain, n_radial: usize, ratio: f64, n_arc: usize) -> SampleGrid {
    let mut grid = v_grid(domain, n_radial, ratio);
    if domain.beta > 0.0 && n_arc > 1 {
        let half = domain.half_angle();
        for k in 1..n_arc - 1 {
            let th = -half + 2.0 * half * k as f64 / (n_arc - 1) as f64;
            grid.points.push(domain.from_local(Complex64::from_polar(domain.radius, th)));
        }
    }
    grid
}

/// Chebyshev-spaced radii on the boundary rays plus equispaced arc points,
/// in the sector's local frame. Used as least-squares fitting nodes.
pub fn chebyshev_boundary_samples(domain: &SectorDomain, n_ray: usize, n_arc: usize) -> Vec<Complex64> {
    let r = domain.radius;
    let half = domain.half_angle();
    let radii: Vec<f64> = (0..n_ray)
        .map(|k| r * 0.5 * (1.0 - (PI * k as f64 / (n_ray - 1).max(1) as f64).cos()))
        .collect();
    let mut pts: Vec<Complex64> = Vec::new();
    if domain.beta == 0.0 {
        pts.extend(radii.iter().map(|&x| Complex64::new(x, 0.0)));
        return pts;
    }
    for th in [half, -half] {
        let dir = Complex64::from_polar(1.0, th);
        pts.extend(radii.iter().skip(usize::from(th < 0.0)).map(|&x| dir * x));
    }
    for k in 1..n_arc.saturating_sub(1) {
        let th = -half + 2.0 * half * k as f64 / (n_arc - 1) as f64;
        pts.push(Complex64::from_polar(r, th));
    }
    pts
}

/// An edge leaving vertex `k` toward vertex `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Edge {
    Straight,
    QuadraticBezier { control: Complex64 },
    CubicBezier { c1: Complex64, c2: Complex64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaSpec {
    Auto,
    Value(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CornerParams {
    pub beta: f64,
    pub alpha_spec: AlphaSpec,
    /// Resolved exponent: `1/β` under `Auto`.
    pub alpha: f64,
    /// Set when `1/β` is an integer and the leading singularity is log-type.
    pub log_type: bool,
}

impl CornerParams {
    fn resolve(beta: f64, alpha_spec: AlphaSpec) -> Self {
        let alpha = match alpha_spec {
            AlphaSpec::Auto => 1.0 / beta,
            AlphaSpec::Value(a) => a,
        };
        let inv = 1.0 / beta;
        let log_type = matches!(alpha_spec, AlphaSpec::Auto) && (inv - inv.round()).abs() < 1e-9;
        Self { beta, alpha_spec, alpha, log_type }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct EdgeTable {
    /// Cumulative arclength at the panel boundaries `t = i/ARC_PANELS`.
    cumulative: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Complex64>,
    edges: Vec<Edge>,
    corners: Vec<CornerParams>,
    ccw: bool,
    tables: Vec<EdgeTable>,
}

fn bezier(p0: Complex64, edge: &Edge, p1: Complex64, t: f64) -> Complex64 {
    let s = 1.0 - t;
    match *edge {
        Edge::Straight => p0 * s + p1 * t,
        Edge::QuadraticBezier { control } => p0 * (s * s) + control * (2.0 * s * t) + p1 * (t * t),
        Edge::CubicBezier { c1, c2 } => {
            p0 * (s * s * s) + c1 * (3.0 * s * s * t) + c2 * (3.0 * s * t * t) + p1 * (t * t * t)
        }
    }
}

fn bezier_derivative(p0: Complex64, edge: &Edge, p1: Complex64, t: f64) -> Complex64 {
    let s = 1.0 - t;
    match *edge {
        Edge::Straight => p1 - p0,
        Edge::QuadraticBezier { control } => (control - p0) * (2.0 * s) + (p1 - control) * (2.0 * t),
        Edge::CubicBezier { c1, c2 } => {
            (c1 - p0) * (3.0 * s * s) + (c2 - c1) * (6.0 * s * t) + (p1 - c2) * (3.0 * t * t)
        }
    }
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let cross = |u: Complex64, v: Complex64| u.re * v.im - u.im * v.re;
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl Polygon {
    /// Straight-edged polygon.
    pub fn new(vertices: Vec<Complex64>) -> Result<Self> {
        let edges = vec![Edge::Straight; vertices.len()];
        Self::with_edges(vertices, edges)
    }

    pub fn with_edges(vertices: Vec<Complex64>, edges: Vec<Edge>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(invalid("a polygon needs at least 3 vertices"));
        }
        if edges.len() != m {
            return Err(invalid("need exactly one edge descriptor per vertex"));
        }
        if vertices.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("vertices must be finite"));
        }
        let scale = vertices.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for k in 0..m {
            if (vertices[(k + 1) % m] - vertices[k]).norm() < 1e-14 * scale {
                return Err(Error::DegenerateEdge(k));
            }
        }
        let mut poly = Polygon {
            vertices,
            edges,
            corners: Vec::new(),
            ccw: true,
            tables: Vec::new(),
        };
        poly.tables = (0..m).map(|k| poly.build_table(k)).collect();
        if (0..m).any(|k| poly.edge_length(k) < 1e-14 * scale) {
            let k = (0..m).find(|&k| poly.edge_length(k) < 1e-14 * scale).unwrap_or(0);
            return Err(Error::DegenerateEdge(k));
        }
        let ring = poly.polyline(64);
        let area: f64 = ring
            .iter()
            .zip(ring.iter().cycle().skip(1))
            .map(|(a, b)| a.re * b.im - a.im * b.re)
            .sum();
        poly.ccw = area > 0.0;
        if !poly.is_simple(&ring) {
            return Err(invalid("boundary self-intersects"));
        }
        let betas = poly.compute_angles();
        for (k, &b) in betas.iter().enumerate() {
            if !(b > 1e-12 && b < 2.0 - 1e-12) {
                return Err(Error::UnsupportedAngle { corner: k, beta: b });
            }
        }
        poly.corners = betas.iter().map(|&b| CornerParams::resolve(b, AlphaSpec::Auto)).collect();
        Ok(poly)
    }

    /// Override the exponent at corner `k`.
    pub fn with_alpha(mut self, k: usize, spec: AlphaSpec) -> Result<Self> {
        if k >= self.len() {
            return Err(invalid(format!("corner {k} out of range")));
        }
        if let AlphaSpec::Value(a) = spec {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid(format!("alpha must be positive, got {a}")));
            }
        }
        let beta = self.corners[k].beta;
        self.corners[k] = CornerParams::resolve(beta, spec);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn corners(&self) -> &[CornerParams] {
        &self.corners
    }
    pub fn is_counterclockwise(&self) -> bool {
        self.ccw
    }

    fn ends(&self, k: usize) -> (Complex64, Complex64) {
        (self.vertices[k], self.vertices[(k + 1) % self.len()])
    }

    pub fn edge_point(&self, k: usize, t: f64) -> Complex64 {
        let (a, b) = self.ends(k);
        bezier(a, &self.edges[k], b, t)
    }

    pub fn edge_derivative(&self, k: usize, t: f64) -> Complex64 {
        let (a, b) = self.ends(k);
        bezier_derivative(a, &self.edges[k], b, t)
    }

    fn build_table(&self, k: usize) -> EdgeTable {
        let (xs, ws) = gauss_legendre(ARC_ORDER);
        let h = 1.0 / ARC_PANELS as f64;
        let mut cumulative = vec![0.0; ARC_PANELS + 1];
        for p in 0..ARC_PANELS {
            let c = (p as f64 + 0.5) * h;
            let seg: f64 = xs
                .iter()
                .zip(&ws)
                .map(|(x, w)| w * self.edge_derivative(k, c + 0.5 * h * x).norm())
                .sum::<f64>()
                * 0.5
                * h;
            cumulative[p + 1] = cumulative[p] + seg;
        }
        EdgeTable { cumulative }
    }

    /// Arclength of edge `k` (32-panel Gauss–Legendre).
    pub fn edge_length(&self, k: usize) -> f64 {
        self.tables[k].cumulative[ARC_PANELS]
    }

    fn arclength_to(&self, k: usize, t: f64) -> f64 {
        let h = 1.0 / ARC_PANELS as f64;
        let p = ((t / h).floor() as usize).min(ARC_PANELS - 1);
        let t0 = p as f64 * h;
        let width = t - t0;
        if width <= 0.0 {
            return self.tables[k].cumulative[p];
        }
        let (xs, ws) = gauss_legendre(ARC_ORDER);
        let partial: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(x, w)| w * self.edge_derivative(k, t0 + 0.5 * width * (1.0 + x)).norm())
            .sum::<f64>()
            * 0.5
            * width;
        self.tables[k].cumulative[p] + partial
    }

    /// Parameter `t` at which edge `k` has accumulated arclength `s`.
    pub fn parameter_at_arclength(&self, k: usize, s: f64) -> f64 {
        let len = self.edge_length(k);
        if matches!(self.edges[k], Edge::Straight) {
            return (s / len).clamp(0.0, 1.0);
        }
        let s = s.clamp(0.0, len);
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = s / len;
        for _ in 0..60 {
            let f = self.arclength_to(k, t) - s;
            if f.abs() <= 1e-15 * len.max(1.0) {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = f / self.edge_derivative(k, t).norm();
            let next = t - step;
            t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        t
    }

    pub fn point_at_arclength(&self, k: usize, s: f64) -> Complex64 {
        let (a, b) = self.ends(k);
        if matches!(self.edges[k], Edge::Straight) {
            // Exact endpoints and distances for straight edges.
            let len = (b - a).norm();
            return a + (b - a) * (s / len);
        }
        self.edge_point(k, self.parameter_at_arclength(k, s))
    }

    /// Closed polyline approximation: one segment per straight edge and
    /// `per_curve` segments per curved edge (first point of each edge only).
    pub fn polyline(&self, per_curve: usize) -> Vec<Complex64> {
        let mut pts = Vec::new();
        for k in 0..self.len() {
            let n = if matches!(self.edges[k], Edge::Straight) { 1 } else { per_curve };
            for i in 0..n {
                pts.push(self.edge_point(k, i as f64 / n as f64));
            }
        }
        pts
    }

    fn is_simple(&self, ring: &[Complex64]) -> bool {
        let n = ring.len();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_cross(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]) {
                    return false;
                }
            }
        }
        true
    }

    /// Unit tangent leaving vertex `k` and unit direction back toward the
    /// previous vertex along the incoming edge.
    pub fn corner_directions(&self, k: usize) -> (Complex64, Complex64) {
        let m = self.len();
        let prev = (k + m - 1) % m;
        let out = self.edge_derivative(k, 0.0);
        let back = -self.edge_derivative(prev, 1.0);
        (out / out.norm(), back / back.norm())
    }

    fn compute_angles(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let (out, back) = self.corner_directions(k);
                let ratio = if self.ccw { back / out } else { out / back };
                ratio.arg().rem_euclid(2.0 * PI) / PI
            })
            .collect()
    }

    /// Winding-number point-in-polygon test against the polyline approximation.
    pub fn contains(&self, z: Complex64) -> bool {
        let ring = self.polyline(256);
        let mut wind = 0.0;
        for (a, b) in ring.iter().zip(ring.iter().cycle().skip(1)) {
            wind += ((b - z) / (a - z)).arg();
        }
        wind.abs() > PI
    }

    pub fn centroid_of_vertices(&self) -> Complex64 {
        self.vertices.iter().sum::<Complex64>() / self.len() as f64
    }
}

/// Interior angles in units of π. Orientation-independent; curved edges use
/// their end tangents.
pub fn interior_angles(polygon: &Polygon) -> Result<Vec<f64>> {
    let m = polygon.len();
    for k in 0..m {
        if polygon.edge_derivative(k, 0.0).norm() == 0.0 || polygon.edge_derivative(k, 1.0).norm() == 0.0 {
            return Err(Error::DegenerateEdge(k));
        }
    }
    Ok(polygon.compute_angles())
}

/// Clustered boundary samples: on every edge, `per_corner` points at distances
/// `L·e^{-σ(√n - √j)}` from each end, with `L` half the edge length.
pub fn boundary_samples(polygon: &Polygon, per_corner: usize, cluster_sigma: f64) -> Result<SampleGrid> {
    if per_corner < 4 {
        return Err(invalid("boundary_samples needs per_corner >= 4"));
    }
    if !(cluster_sigma > 0.0) {
        return Err(invalid("cluster_sigma must be positive"));
    }
    let m = polygon.len();
    collocation_samples(polygon, &vec![per_corner; m], &vec![cluster_sigma; m], 1, 0)
}

/// Generalised clustered sampling. Corner `k` gets `per_pole · counts[k]`
/// points along each adjacent edge at distances `L·e^{-σ_k(√n_k - √(j/per_pole))}`;
/// every edge also receives `uniform_per_edge` equispaced (in arclength) points.
/// Points are ordered along the boundary and carry √(spacing) weights.
pub fn collocation_samples(
    polygon: &Polygon,
    counts: &[usize],
    sigmas: &[f64],
    per_pole: usize,
    uniform_per_edge: usize,
) -> Result<SampleGrid> {
    let m = polygon.len();
    if counts.len() != m || sigmas.len() != m || per_pole == 0 {
        return Err(invalid("need one count and one sigma per corner"));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut depth = 0;
    for k in 0..m {
        let len = polygon.edge_length(k);
        let half = 0.5 * len;
        let mut s: Vec<f64> = Vec::new();
        for (corner, from_start) in [(k, true), ((k + 1) % m, false)] {
            let n = counts[corner];
            let sig = sigmas[corner];
            depth = depth.max(n * per_pole);
            for j in 1..=n * per_pole {
                let d = half * (-sig * ((n as f64).sqrt() - (j as f64 / per_pole as f64).sqrt())).exp();
                s.push(if from_start { d } else { len - d });
            }
        }
        for i in 0..uniform_per_edge {
            s.push(len * (i as f64 + 0.5) / uniform_per_edge as f64);
        }
        s.sort_by(f64::total_cmp);
        for (i, &si) in s.iter().enumerate() {
            let before = if i == 0 { si } else { si - s[i - 1] };
            let after = if i + 1 == s.len() { len - si } else { s[i + 1] - si };
            weights.push((0.5 * (before + after)).max(0.0).sqrt());
            points.push(polygon.point_at_arclength(k, si));
        }
    }
    Ok(SampleGrid {
        points,
        role: GridRole::LeastSquares,
        clustering: Clustering { ratio: (-sigmas.iter().cloned().fold(0.0, f64::max)).exp(), depth },
        weights: Some(weights),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> Polygon {
        Polygon::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn square_and_triangle_angles() {
        for b in interior_angles(&square()).unwrap() {
            assert!((b - 0.5).abs() < 1e-14);
        }
        let tri = Polygon::new(vec![c(0.0, 0.0), c(1.0, 0.0), Complex64::from_polar(1.0, PI / 3.0)]).unwrap();
        for b in interior_angles(&tri).unwrap() {
            assert!((b - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn angles_do_not_depend_on_orientation() {
        let v = vec![c(2.0, 4.0), c(8.0, 4.0), c(4.0, 6.0), c(2.0, 10.0)];
        let mut r = v.clone();
        r.reverse();
        let a = interior_angles(&Polygon::new(v).unwrap()).unwrap();
        let mut b = interior_angles(&Polygon::new(r).unwrap()).unwrap();
        b.reverse();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_edge_is_reported() {
        let err = Polygon::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(matches!(err, Err(Error::DegenerateEdge(1))));
    }

    #[test]
    fn self_intersection_is_rejected() {
        let bowtie = Polygon::new(vec![c(0.0, 0.0), c(1.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(bowtie.is_err());
    }

    #[test]
    fn auto_alpha_and_log_flag() {
        let sq = square();
        assert!(sq.corners().iter().all(|p| (p.alpha - 2.0).abs() < 1e-12 && p.log_type));
        let tri = Polygon::new(vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(!tri.corners()[1].log_type);
        let sq = sq.with_alpha(0, AlphaSpec::Value(0.5)).unwrap();
        assert_eq!(sq.corners()[0].alpha, 0.5);
        assert!(!sq.corners()[0].log_type);
    }

    #[test]
    fn curved_edge_uses_tangents() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w3 = c(2.0, 1.0);
        let edges = vec![
            Edge::Straight,
            Edge::Straight,
            Edge::CubicBezier { c1: w3 + c(-0.5 * s, 0.5 * s), c2: c(1.0, 1.5) },
            Edge::Straight,
            Edge::Straight,
        ];
        let p = Polygon::with_edges(vec![c(0.0, 0.0), c(2.0, 0.0), w3, c(1.0, 2.0), c(0.0, 2.0)], edges).unwrap();
        let b = interior_angles(&p).unwrap();
        let want = [0.5, 0.5, 0.75, 0.5, 0.5];
        for (x, y) in b.iter().zip(want) {
            assert!((x - y).abs() < 1e-12, "{b:?}");
        }
    }

    #[test]
    fn arclength_of_a_quarter_circle_like_curve() {
        // Quadratic Bézier from 0 to 2 through control 1+i: length has a closed form.
        let p = Polygon::with_edges(
            vec![c(0.0, 0.0), c(2.0, 0.0), c(1.0, -1.0)],
            vec![Edge::QuadraticBezier { control: c(1.0, 1.0) }, Edge::Straight, Edge::Straight],
        )
        .unwrap();
        let exact = 2f64.sqrt() + (1.0 + 2f64.sqrt()).ln();
        assert!((p.edge_length(0) - exact).abs() < 1e-12);
        let t = p.parameter_at_arclength(0, 0.3 * exact);
        let back = p.arclength_to(0, t);
        assert!((back - 0.3 * exact).abs() < 1e-12);
    }

    #[test]
    fn sector_samples_examples() {
        let d0 = SectorDomain::new(0.0).unwrap();
        let g = sample_sector(&d0, 3, 1, 0.1).unwrap();
        assert!(g.points.iter().all(|z| z.im == 0.0 && (0.0..=1.0).contains(&z.re)));
        assert!(g.points.contains(&c(0.0, 0.0)) && g.points.contains(&c(1.0, 0.0)));

        let d1 = SectorDomain::new(1.0).unwrap();
        let g = sample_sector(&d1, 2, 2, 0.5).unwrap();
        assert!(g.points.iter().all(|z| z.norm() == 0.0 || z.arg().abs() <= PI / 2.0 + 1e-15));

        let d = SectorDomain::new(1.5).unwrap();
        let g = sample_sector(&d, 40, 20, 0.3).unwrap();
        let min = g.points.iter().map(|z| z.norm()).filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min);
        assert!((min / 0.3f64.powi(40) - 1.0).abs() < 1e-12);
        assert!(g.points.iter().all(|&z| d.contains(z)));
    }

    #[test]
    fn bad_sampling_arguments() {
        let d = SectorDomain::new(1.0).unwrap();
        assert!(sample_sector(&d, 1, 1, 0.5).is_err());
        assert!(sample_sector(&d, 2, 0, 0.5).is_err());
        assert!(sample_sector(&d, 2, 1, 1.0).is_err());
        assert!(SectorDomain::new(2.0).is_err());
        assert!(SectorDomain::with_params(1.0, 0.0, c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn square_boundary_samples_count() {
        let g = boundary_samples(&square(), 4, 2.0).unwrap();
        assert_eq!(g.len(), 32);
        assert!(boundary_samples(&square(), 3, 2.0).is_err());
    }

    #[test]
    fn tapered_distances_from_corner() {
        let sigma = 2.0;
        let g = boundary_samples(&square(), 5, sigma).unwrap();
        // First edge runs from 0 to 1: the first 5 samples measure distance from 0.
        for j in 1..=5 {
            let want = 0.5 * (-sigma * (5f64.sqrt() - (j as f64).sqrt())).exp();
            let got = g.points[j - 1].norm();
            assert!((got - want).abs() < 1e-15, "{j}: {got} vs {want}");
        }
    }

    #[test]
    fn containment_checks() {
        let sq = square();
        assert!(sq.contains(c(0.5, 0.5)));
        assert!(!sq.contains(c(1.5, 0.5)));
        let d = SectorDomain::with_params(0.5, 2.0, c(1.0, 1.0), 0.3).unwrap();
        assert!(d.contains(d.from_local(c(1.0, 0.1))));
        assert!(!d.contains(d.from_local(c(-1.0, 0.0))));
    }
}
