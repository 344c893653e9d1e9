//! Lightning Laplace solver on polygonal domains and the Cauchy-slit
//! integrals behind the corner decomposition.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{collocation_samples, Polygon, SampleGrid};
use crate::linalg::lstsq;
use crate::par::{self, Exec};
use crate::quadrature::Adaptive;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaMode {
    /// One σ from the largest angle and the smallest exponent.
    GlobalOpt,
    /// `σ_k = √(2(2-β_k)) π / √α_k` per corner.
    PerCorner,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CornerPoles {
    pub vertex: Complex64,
    /// Unit vector along the exterior bisector.
    pub direction: Complex64,
    pub sigma: f64,
    /// Length scale `L_k`: half the shorter adjacent edge.
    pub length: f64,
    pub poles: Vec<Complex64>,
}

impl CornerPoles {
    pub fn count(&self) -> usize {
        self.poles.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CornerBasis {
    pub corners: Vec<CornerPoles>,
    pub n2: usize,
    pub center: Complex64,
    pub scale: f64,
}

impl CornerBasis {
    pub fn n_poles(&self) -> usize {
        self.corners.iter().map(CornerPoles::count).sum()
    }

    /// Real unknowns: Re/Im per pole, then 1, Re/Im of each monomial.
    pub fn n_coeffs(&self) -> usize {
        2 * self.n_poles() + 2 * self.n2 + 1
    }

    fn poles(&self) -> impl Iterator<Item = &Complex64> {
        self.corners.iter().flat_map(|c| c.poles.iter())
    }

    fn row(&self, z: Complex64, out: &mut [f64]) {
        let mut i = 0;
        for p in self.poles() {
            let q = 1.0 / (z - p);
            out[i] = q.re;
            out[i + 1] = q.im;
            i += 2;
        }
        out[i] = 1.0;
        i += 1;
        let w = (z - self.center) / self.scale;
        let mut wk = Complex64::new(1.0, 0.0);
        for _ in 0..self.n2 {
            wk *= w;
            out[i] = wk.re;
            out[i + 1] = wk.im;
            i += 2;
        }
    }
}

/// `σ = √(2(2-β)) π / √α`.
pub fn corner_sigma(alpha: f64, beta: f64) -> f64 {
    (2.0 * (2.0 - beta)).sqrt() * PI / alpha.sqrt()
}

/// Default polynomial degree `max(10, ceil(4√N))`.
pub fn default_poly_degree(n: usize) -> usize {
    ((4.0 * (n as f64).sqrt()).ceil() as usize).max(10)
}

/// Split `n` poles equally among the corners and place them.
pub fn plan_basis(polygon: &Polygon, n: usize, mode: SigmaMode) -> Result<CornerBasis> {
    let m = polygon.len();
    if n < 4 * m {
        return Err(invalid(format!("need N >= 4m = {}, got {n}", 4 * m)));
    }
    let counts: Vec<usize> = (0..m).map(|k| n / m + usize::from(k < n % m)).collect();
    plan_basis_with_counts(polygon, &counts, mode)
}

/// Place `counts[k]` tapered poles on the exterior bisector at each corner.
pub fn plan_basis_with_counts(polygon: &Polygon, counts: &[usize], mode: SigmaMode) -> Result<CornerBasis> {
    let m = polygon.len();
    if counts.len() != m || counts.iter().any(|&c| c == 0) {
        return Err(invalid("need a positive pole count for every corner"));
    }
    let corners = polygon.corners();
    for (k, c) in corners.iter().enumerate() {
        if c.beta >= 2.0 - 1e-9 || c.beta <= 0.0 {
            return Err(Error::UnsupportedAngle { corner: k, beta: c.beta });
        }
    }
    let global = {
        let beta = corners.iter().map(|c| c.beta).fold(0.0, f64::max);
        let alpha = corners.iter().map(|c| c.alpha).fold(f64::INFINITY, f64::min);
        corner_sigma(alpha, beta)
    };
    let ccw = polygon.is_counterclockwise();
    let mut planned = Vec::with_capacity(m);
    for k in 0..m {
        let sigma = match mode {
            SigmaMode::GlobalOpt => global,
            SigmaMode::PerCorner => corner_sigma(corners[k].alpha, corners[k].beta),
            SigmaMode::Fixed(s) if s > 0.0 => s,
            SigmaMode::Fixed(s) => return Err(invalid(format!("sigma must be positive, got {s}"))),
        };
        let (out, _) = polygon.corner_directions(k);
        let half = corners[k].beta * PI / 2.0;
        let interior = out * Complex64::from_polar(1.0, if ccw { half } else { -half });
        let direction = -interior;
        let prev = (k + m - 1) % m;
        let length = 0.5 * polygon.edge_length(k).min(polygon.edge_length(prev));
        let n = counts[k];
        let sn = (n as f64).sqrt();
        let vertex = polygon.vertices()[k];
        let poles = (1..=n)
            .map(|j| vertex + direction * (length * (-sigma * (sn - (j as f64).sqrt())).exp()))
            .collect();
        planned.push(CornerPoles { vertex, direction, sigma, length, poles });
    }
    let n_total: usize = counts.iter().sum();
    let center = polygon.centroid_of_vertices();
    let scale = polygon.vertices().iter().map(|w| (w - center).norm()).fold(0.0, f64::max);
    Ok(CornerBasis { corners: planned, n2: default_poly_degree(n_total), center, scale })
}

impl CornerBasis {
    pub fn with_poly_degree(mut self, n2: usize) -> Self {
        self.n2 = n2;
        self
    }

    fn sigmas(&self) -> Vec<f64> {
        self.corners.iter().map(|c| c.sigma).collect()
    }

    fn counts(&self) -> Vec<usize> {
        self.corners.iter().map(CornerPoles::count).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSolution {
    pub basis: CornerBasis,
    pub coeffs: Vec<f64>,
    /// RMS boundary misfit on the collocation points.
    pub residual_norm: f64,
}

impl HarmonicSolution {
    pub fn eval(&self, z: Complex64) -> f64 {
        let mut row = vec![0.0; self.basis.n_coeffs()];
        self.basis.row(z, &mut row);
        row.iter().zip(&self.coeffs).map(|(a, c)| a * c).sum()
    }

    /// Complex residues and tail with `u = Re(Σ r_j/(z - p_j) + Σ b_k ((z - z_c)/s)^k)`.
    pub fn complex_form(&self) -> (Vec<Vec<(Complex64, Complex64)>>, Vec<Complex64>) {
        let mut i = 0;
        let mut groups = Vec::new();
        for c in &self.basis.corners {
            let mut g = Vec::new();
            for p in &c.poles {
                g.push((*p, Complex64::new(self.coeffs[i], -self.coeffs[i + 1])));
                i += 2;
            }
            groups.push(g);
        }
        let mut tail = vec![Complex64::new(self.coeffs[i], 0.0)];
        i += 1;
        for _ in 0..self.basis.n2 {
            tail.push(Complex64::new(self.coeffs[i], -self.coeffs[i + 1]));
            i += 2;
        }
        (groups, tail)
    }
}

/// Collocation points for `basis`: 3 per pole from each end of every edge,
/// topped up with equispaced points so rows ≥ 3 × unknowns.
pub fn collocation_grid(polygon: &Polygon, basis: &CornerBasis) -> Result<SampleGrid> {
    let m = polygon.len();
    let per_pole = 3;
    let clustered = 2 * per_pole * basis.n_poles();
    let needed = 3 * basis.n_coeffs();
    let uniform = needed.saturating_sub(clustered).div_ceil(m) + 8;
    collocation_samples(polygon, &basis.counts(), &basis.sigmas(), per_pole, uniform)
}

/// Row weighting of the collocation least-squares problem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Weighting {
    /// Every sample counts equally, so the fit tracks the sup norm.
    #[default]
    Uniform,
    /// `√(local spacing)`, a discrete boundary L² norm. Rows next to a corner
    /// get tiny weights, which caps their pointwise accuracy near `1e-8`.
    SqrtSpacing,
}

/// Real least-squares fit of `Re r(z)` to the boundary data.
pub fn solve_dirichlet<F>(polygon: &Polygon, boundary_data: F, basis: &CornerBasis) -> Result<HarmonicSolution>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    solve_dirichlet_with(Exec::Parallel, Weighting::Uniform, polygon, boundary_data, basis)
}

pub fn solve_dirichlet_with<F>(
    exec: Exec,
    weighting: Weighting,
    polygon: &Polygon,
    boundary_data: F,
    basis: &CornerBasis,
) -> Result<HarmonicSolution>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    if basis.corners.len() != polygon.len() {
        return Err(invalid("basis was planned for a different polygon"));
    }
    let grid = collocation_grid(polygon, basis)?;
    let weights = match (weighting, &grid.weights) {
        (Weighting::SqrtSpacing, Some(w)) => w.clone(),
        _ => vec![1.0; grid.len()],
    };
    let nc = basis.n_coeffs();
    let rows = par::map_range(exec, grid.len(), |i| {
        let mut r = vec![0.0; nc];
        basis.row(grid.points[i], &mut r);
        let data = boundary_data(grid.points[i]);
        (r, data)
    });
    let mut a = DMatrix::<f64>::zeros(grid.len(), nc);
    let mut b = DVector::<f64>::zeros(grid.len());
    let mut raw = Vec::with_capacity(grid.len());
    for (i, (r, d)) in rows.into_iter().enumerate() {
        let w = weights[i];
        for (j, v) in r.iter().enumerate() {
            a[(i, j)] = w * v;
        }
        b[i] = w * d;
        raw.push((r, d));
    }
    let sol = lstsq(&a, &b, 1e-14)?;
    let coeffs: Vec<f64> = sol.x.iter().cloned().collect();
    let misfit: Vec<f64> = raw
        .iter()
        .map(|(r, d)| r.iter().zip(&coeffs).map(|(x, c)| x * c).sum::<f64>() - d)
        .collect();
    let residual_norm = (misfit.iter().map(|e| e * e).sum::<f64>() / misfit.len() as f64).sqrt();
    let data_scale = raw.iter().map(|(_, d)| d.abs()).fold(0.0, f64::max).max(1.0);
    if !coeffs.iter().all(|c| c.is_finite()) || !(residual_norm <= data_scale) {
        return Err(Error::IllConditioned(residual_norm));
    }
    Ok(HarmonicSolution { basis: basis.clone(), coeffs, residual_norm })
}

/// Sup of `|u - g|` on a validation grid `fine_factor` times denser than the
/// collocation grid, plus 100·`fine_factor` equispaced points per edge.
pub fn boundary_error<F>(sol: &HarmonicSolution, polygon: &Polygon, boundary_data: F, fine_factor: usize) -> Result<f64>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    if fine_factor < 4 {
        return Err(invalid("fine_factor must be at least 4"));
    }
    let basis = &sol.basis;
    let grid = collocation_samples(polygon, &basis.counts(), &basis.sigmas(), 3 * fine_factor, 100 * fine_factor)?;
    let errs = par::map(Exec::Parallel, &grid.points, |&z| (sol.eval(z) - boundary_data(z)).abs());
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// Five-point Laplacian of the solution at `z` with spacing `h`.
///
/// The stencil is applied to each basis function in closed form, so the
/// result carries no cancellation between large coefficients. For
/// `a = z - p` the stencil sum of `1/a` is `4h⁴/(a(a⁴ - h⁴))`; for `w^k` only
/// the binomial terms with `j ≡ 0 (mod 4)` survive.
pub fn discrete_laplacian(sol: &HarmonicSolution, z: Complex64, h: f64) -> f64 {
    let b = &sol.basis;
    let mut acc = 0.0;
    let mut i = 0;
    let h4 = h.powi(4);
    for p in b.poles() {
        let a = z - p;
        let d = 4.0 * h * h / (a * (a.powi(4) - h4));
        acc += sol.coeffs[i] * d.re + sol.coeffs[i + 1] * d.im;
        i += 2;
    }
    i += 1;
    let w = (z - b.center) / b.scale;
    let delta = h / b.scale;
    for k in 1..=b.n2 {
        let mut d = Complex64::new(0.0, 0.0);
        let mut binom = 1.0;
        for j in 1..=k {
            binom *= (k + 1 - j) as f64 / j as f64;
            if j % 4 == 0 {
                d += w.powu((k - j) as u32) * (binom * delta.powi(j as i32));
            }
        }
        d *= 4.0 / (h * h);
        acc += sol.coeffs[i] * d.re + sol.coeffs[i + 1] * d.im;
        i += 2;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlitBranch {
    /// `arg z ∈ (-π, π]`.
    Principal,
    /// Cut along the positive real axis, `arg z ∈ (-2π, 0]`.
    SlitPositiveAxis,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlitIntegralSpec {
    pub k: u32,
    pub alpha: f64,
    pub w: f64,
    pub branch: SlitBranch,
}

impl SlitIntegralSpec {
    pub fn new(k: u32, alpha: f64, w: f64, branch: SlitBranch) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(invalid(format!("W must be positive, got {w}")));
        }
        Ok(Self { k, alpha, w, branch })
    }

    pub fn exponent(&self) -> f64 {
        self.k as f64 + self.alpha
    }

    fn log(&self, z: Complex64) -> Complex64 {
        let l = z.ln();
        match self.branch {
            SlitBranch::Principal => l,
            SlitBranch::SlitPositiveAxis if l.im > 0.0 => l - Complex64::new(0.0, 2.0 * PI),
            SlitBranch::SlitPositiveAxis => l,
        }
    }
}

fn slit_integral(spec: &SlitIntegralSpec, z: Complex64, with_log: bool) -> Result<Complex64> {
    let a = spec.exponent();
    let w = spec.w;
    let f = |x: f64| if with_log { x.powf(a) * x.ln() } else { x.powf(a) };
    if z == Complex64::new(0.0, 0.0) {
        // ∫ ζ^{a-1} (log ζ)^m dζ in closed form.
        let v = if with_log { w.powf(a) * (w.ln() / a - 1.0 / (a * a)) } else { w.powf(a) / a };
        return Ok(Complex64::new(v, 0.0));
    }
    let dist = if z.re < 0.0 {
        z.norm()
    } else if z.re > w {
        (z - w).norm()
    } else {
        z.im.abs()
    };
    if dist < 1e-10 {
        return Err(Error::TooCloseToSlit(z));
    }
    // Subtract f(s) at the nearest slit point so the remaining integrand is
    // bounded, then integrate in ζ = W e^{-u}.
    let s = z.re.clamp(0.0, w);
    let fs = if s > 0.0 { f(s) } else { 0.0 };
    let closed = if fs != 0.0 {
        ((Complex64::new(w, 0.0) - z).ln() - (-z).ln()) * fs
    } else {
        Complex64::new(0.0, 0.0)
    };
    let integrand = |u: f64| {
        let zeta = w * (-u).exp();
        (Complex64::new(f(zeta) - fs, 0.0)) * zeta / (Complex64::new(zeta, 0.0) - z)
    };
    let small = 1e-17 * z.norm().min(1.0) / fs.abs().max(1.0);
    let upper = (w / small).ln().max(1.0);
    let peak = (w / z.norm()).ln();
    let mut breaks = vec![0.0];
    if peak > 0.0 && peak < upper {
        breaks.push(peak);
    }
    breaks.push(upper);
    let q = Adaptive::with_tol(1e-15, 1e-14).integrate_with_breaks(integrand, &breaks)?;
    Ok(q.value + closed)
}

/// `∫_0^W ζ^{k+α}/(ζ - z) dζ`.
pub fn cauchy_slit_integral(spec: &SlitIntegralSpec, z: Complex64) -> Result<Complex64> {
    slit_integral(spec, z, false)
}

/// `∫_0^W ζ^{k+α} log ζ/(ζ - z) dζ`.
pub fn cauchy_slit_integral_log(spec: &SlitIntegralSpec, z: Complex64) -> Result<Complex64> {
    slit_integral(spec, z, true)
}

/// `P₀ = -π cot(απ) - iπ`.
pub fn p0(alpha: f64) -> Complex64 {
    Complex64::new(-PI / (alpha * PI).tan(), -PI)
}

/// `P₁(L) = -(π cot(απ) + iπ) L + π² csc²(απ)`.
pub fn p1(alpha: f64, log_z: Complex64) -> Complex64 {
    p0(alpha) * log_z + PI * PI / (alpha * PI).sin().powi(2)
}

/// Singular parts `z^{k+α} P₀` and `z^{k+α} P₁(log z)` on the branch with `arg z ∈ (-2π, 0]`.
pub fn singular_parts(spec: &SlitIntegralSpec, z: Complex64) -> (Complex64, Complex64) {
    let l = spec.log(z);
    let za = (l * spec.exponent()).exp();
    (za * p0(spec.alpha), za * p1(spec.alpha, l))
}

/// Measure the jumps of both slit integrals across `(0, W)` by Richardson
/// extrapolation over `ε ∈ {1e-3, 1e-4, 1e-5}·W` and compare them with the
/// jumps of `z^{k+α}P₀` and `z^{k+α}P₁(log z)` on the positive-axis branch.
/// Returns the two discrepancies relative to `max(1, |jump|)`.
pub fn singular_coefficient_check(k: u32, alpha: f64, w: f64) -> Result<(f64, f64)> {
    let spec = SlitIntegralSpec::new(k, alpha, w, SlitBranch::SlitPositiveAxis)?;
    let x = 0.25 * w;
    let jump = |eps: f64, with_log: bool| -> Result<Complex64> {
        let up = slit_integral(&spec, Complex64::new(x, eps), with_log)?;
        let down = slit_integral(&spec, Complex64::new(x, -eps), with_log)?;
        Ok(up - down)
    };
    let extrapolate = |with_log: bool| -> Result<Complex64> {
        let j4 = jump(1e-4 * w, with_log)?;
        let j5 = jump(1e-5 * w, with_log)?;
        let _ = jump(1e-3 * w, with_log)?;
        Ok(j5 + (j5 - j4) / 9.0)
    };
    // Boundary values of the singular parts: above the cut arg → -2π, below → 0.
    let a = spec.exponent();
    let lx = x.ln();
    let above_log = Complex64::new(lx, -2.0 * PI);
    let below_log = Complex64::new(lx, 0.0);
    let pow = |l: Complex64| (l * a).exp();
    let s0 = pow(above_log) * p0(alpha) - pow(below_log) * p0(alpha);
    let s1 = pow(above_log) * p1(alpha, above_log) - pow(below_log) * p1(alpha, below_log);
    let e0 = (extrapolate(false)? - s0).norm() / s0.norm().max(1.0);
    let e1 = (extrapolate(true)? - s1).norm() / s1.norm().max(1.0);
    Ok((e0, e1))
}
