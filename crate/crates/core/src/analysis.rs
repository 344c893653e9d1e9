//! Sup-norm error measurement, root-exponential rate fitting, and the
//! predicted bounds used for side-by-side comparison.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{sector_boundary_grid, SampleGrid, SectorDomain};
use crate::kernels::{self, KernelConfig, Singularity};
use crate::lp::{build_lp, sigma_opt, sqrt_n2, LpConfig, RationalApprox, Target};
use crate::par::{self, Exec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub sigma: f64,
    pub n1: usize,
    pub n2: usize,
    pub n: usize,
    pub sup_err: f64,
    pub predicted_log_err: f64,
    pub runtime_ms: f64,
}

/// `max |approx(z) - target(z)|` over the grid, with points mapped into the
/// domain's local frame. Points that hit a pole are skipped; more than 1%
/// skipped is an error.
pub fn sup_error(approx: &RationalApprox, target: &Target, alpha: f64, domain: &SectorDomain, grid: &SampleGrid) -> Result<f64> {
    sup_error_with(Exec::Parallel, approx, target, alpha, domain, grid)
}

pub fn sup_error_with(
    exec: Exec,
    approx: &RationalApprox,
    target: &Target,
    alpha: f64,
    domain: &SectorDomain,
    grid: &SampleGrid,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(invalid("empty grid"));
    }
    let errs = par::map(exec, &grid.points, |&z| -> Result<Option<f64>> {
        let w = domain.to_local(z);
        match approx.eval(w) {
            Ok(v) => Ok(Some((v - target.exact(w, alpha)?).norm())),
            Err(Error::PoleCollision { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    });
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    for e in errs {
        match e? {
            Some(v) => worst = worst.max(v),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("sup_error skipped {skipped} grid points at poles");
        if skipped * 100 > grid.len() {
            return Err(Error::TooManySkipped { skipped, total: grid.len() });
        }
    }
    Ok(worst)
}

/// Density of a boundary sup-norm grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridDensity {
    pub n_radial: usize,
    pub ratio: f64,
    pub n_arc: usize,
}

impl GridDensity {
    /// Ratio 0.9 radially, deep enough that the innermost radius falls a
    /// decade below the innermost pole (but not below `1e-13` of the radius,
    /// where points would sit inside the pole-collision threshold), and 200
    /// arc points.
    pub fn for_config(cfg: &LpConfig, domain: &SectorDomain) -> Self {
        let ratio: f64 = 0.9;
        let p1 = cfg.c() * (-cfg.sigma() * ((cfg.n1() as f64).sqrt() - 1.0)).exp();
        let floor = (0.1 * p1 / domain.radius()).max(1e-13);
        let depth = (floor.ln() / ratio.ln()).ceil().max(50.0) as usize;
        Self { n_radial: depth.min(5000), ratio, n_arc: 200 }
    }

    pub fn doubled(self) -> Self {
        Self { n_radial: 2 * self.n_radial, ratio: self.ratio.sqrt(), n_arc: 2 * self.n_arc }
    }

    pub fn grid(&self, domain: &SectorDomain) -> SampleGrid {
        sector_boundary_grid(domain, self.n_radial, self.ratio, self.n_arc)
    }
}

/// Sampled sup norm accepted once doubling the grid density changes it by
/// less than 5%; otherwise doubled again and the larger value kept.
pub fn sup_error_refined(
    exec: Exec,
    approx: &RationalApprox,
    target: &Target,
    alpha: f64,
    domain: &SectorDomain,
    density: GridDensity,
) -> Result<f64> {
    let coarse = sup_error_with(exec, approx, target, alpha, domain, &density.grid(domain))?;
    let fine_density = density.doubled();
    let fine = sup_error_with(exec, approx, target, alpha, domain, &fine_density.grid(domain))?;
    if (fine - coarse).abs() <= 0.05 * fine.max(coarse) {
        return Ok(fine);
    }
    let finer = sup_error_with(exec, approx, target, alpha, domain, &fine_density.doubled().grid(domain))?;
    Ok(fine.max(finer))
}

/// Predicted exponent `ρ` in `e^{-ρ√N}` and the power of `N` in the prefactor.
pub fn predicted_log_rate(sigma: f64, alpha: f64, beta: f64, kind: Singularity) -> (f64, f64) {
    let so = sigma_opt(alpha, beta);
    if sigma <= so {
        let pref = match kind {
            Singularity::Power => 0.0,
            Singularity::PowerLog => 0.5,
        };
        (sigma * alpha, pref)
    } else {
        (PI * (so / sigma) * (2.0 * (2.0 - beta) * alpha).sqrt(), 0.0)
    }
}

/// `log` of the predicted error shape (unit constant) at total degree `n`.
pub fn predicted_log_err(sigma: f64, alpha: f64, beta: f64, kind: Singularity, n: usize) -> f64 {
    let (rate, pref) = predicted_log_rate(sigma, alpha, beta, kind);
    let nf = n as f64;
    -rate * nf.sqrt() + pref * nf.ln()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub used: usize,
}

/// Ordinary least-squares line through the points.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LineFit { slope, intercept, r2, used: xs.len() }
}

/// Slope `ρ` of `-log(sup_err)` against `√N`, using records whose error lies
/// strictly inside `(floor, ceiling)`.
pub fn fit_rate(records: &[ConvergenceRecord], floor: f64, ceiling: f64) -> Result<LineFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.sup_err > floor && r.sup_err < ceiling)
        .map(|r| ((r.n as f64).sqrt(), -r.sup_err.ln()))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::InsufficientSpan(xs.len()));
    }
    Ok(fit_line(&xs, &ys))
}

pub const FIT_FLOOR: f64 = 1e-13;
pub const FIT_CEILING: f64 = 1e-2;

/// How the tail degree follows N1 in a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum N2Rule {
    /// `ceil(f·N1)`; `f = 1.3` is the experimental default.
    Proportional(f64),
    /// `ceil(f·√N1)`, matching the `O(√N1)` degree of the rate theorems.
    Sqrt(f64),
    Fixed(usize),
}

impl N2Rule {
    pub fn n2(&self, n1: usize) -> usize {
        match *self {
            N2Rule::Proportional(f) => (f * n1 as f64 - 1e-9).ceil() as usize,
            N2Rule::Sqrt(f) => sqrt_n2(n1, f),
            N2Rule::Fixed(n) => n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub sigmas: Vec<f64>,
    pub n1s: Vec<usize>,
    pub n2_rule: N2Rule,
    pub target: Target,
}

fn run_cell(spec: &SweepSpec, sigma: f64, n1: usize, domain: &SectorDomain) -> Result<ConvergenceRecord> {
    let start = Instant::now();
    let cfg = LpConfig::new(spec.alpha, spec.beta, sigma, n1)?
        .with_c(spec.c)?
        .with_n2(spec.n2_rule.n2(n1))?
        .with_target(spec.target.clone());
    let approx = build_lp(&cfg, domain)?;
    let density = GridDensity::for_config(&cfg, domain);
    let sup_err = sup_error_refined(Exec::Sequential, &approx, &spec.target, spec.alpha, domain, density)?;
    Ok(ConvergenceRecord {
        sigma,
        n1,
        n2: cfg.n2(),
        n: cfg.n(),
        sup_err,
        predicted_log_err: predicted_log_err(sigma, spec.alpha, spec.beta, spec.target.singularity(), cfg.n()),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Build and measure every (σ, N1) cell; rows come back sorted by (σ, N1).
pub fn sweep(spec: &SweepSpec, exec: Exec) -> Result<Vec<ConvergenceRecord>> {
    let domain = SectorDomain::new(spec.beta)?;
    let mut cells: Vec<(f64, usize)> = Vec::new();
    for &s in &spec.sigmas {
        for &n in &spec.n1s {
            cells.push((s, n));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    par::map(exec, &cells, |&(s, n)| run_cell(spec, s, n, &domain))
        .into_iter()
        .collect()
}

/// Constants of the near-origin and envelope estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundContext {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub c: f64,
    pub h: f64,
    pub t: f64,
    pub eta: f64,
    pub n_t: usize,
    pub m0: usize,
    pub delta0: f64,
    pub c0: f64,
    pub x_star: f64,
}

impl BoundContext {
    pub fn new(alpha: f64, beta: f64, sigma: f64, c: f64, t: f64) -> Result<Self> {
        let k = KernelConfig::with_truncation(alpha, c, (sigma * alpha).powi(2), t)?;
        Self::from_kernel(&k, beta)
    }

    pub fn from_kernel(k: &KernelConfig, beta: f64) -> Result<Self> {
        if !(0.0..2.0).contains(&beta) {
            return Err(invalid(format!("beta must lie in [0, 2), got {beta}")));
        }
        let (alpha, h) = (k.alpha(), k.h());
        let sigma = h.sqrt() / alpha;
        let m0 = smallest_m0(alpha, beta, h);
        let base = m0 as f64 * h + 0.25 * (2.0 - beta).powi(2) * (alpha * PI).powi(2);
        let mut delta0 = 0.0;
        while (1..=k.n_t().max(m0 + 1)).any(|j| (base + delta0 - j as f64 * h).abs() < 1e-9) {
            delta0 += h * 1e-3;
        }
        let c0 = (base + delta0).sqrt();
        Ok(Self {
            alpha,
            beta,
            sigma,
            c: k.c(),
            h,
            t: k.t(),
            eta: sigma_opt(alpha, beta) / sigma,
            n_t: k.n_t(),
            m0,
            delta0,
            c0,
            x_star: k.c() * ((c0 - k.t()) / alpha).exp(),
        })
    }

    /// `a_{0,β}(x) = (2-β) απ (T + α log(x/C))`.
    pub fn a0beta(&self, x: f64) -> f64 {
        (2.0 - self.beta) * self.alpha * PI * (self.t + self.alpha * (x / self.c).ln())
    }

    /// Pole `u_k(z^±)` of the substituted integrand for `z = x e^{±iθπ/2}`.
    pub fn lattice_pole(&self, k: i64, x: f64, theta: f64, upper: bool) -> Complex64 {
        let sign = if upper { 1.0 } else { -1.0 };
        let re = self.t + self.alpha * (x / self.c).ln();
        let im = self.alpha * PI * (2.0 * k as f64 - 1.0 + sign * theta / 2.0);
        Complex64::new(re, im).powu(2)
    }
}

/// Smallest positive integer `M0` with
/// `απ√(M0 h) ≥ max{h, √2 απ, 2√6 α²π², απ(√((4+β)απ/2) + (4h)^{1/4})²}`.
pub fn smallest_m0(alpha: f64, beta: f64, h: f64) -> usize {
    let ap = alpha * PI;
    let rhs = h
        .max(2f64.sqrt() * ap)
        .max(2.0 * 6f64.sqrt() * ap * ap)
        .max(ap * (((4.0 + beta) * ap / 2.0).sqrt() + (4.0 * h).powf(0.25)).powi(2));
    let mut m = 1usize;
    while ap * (m as f64 * h).sqrt() < rhs {
        m += 1;
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub q: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `Q(x) = x^α/(e^{(2π/h) a_{0,β}(x)} - 1)` and its two-sided bound for
/// `x ∈ [x*, 1]`. The bounds are stated for `C = 1` and need `x* ≤ 1`.
pub fn q_envelope(x: f64, ctx: &BoundContext) -> Result<Envelope> {
    if ctx.c != 1.0 {
        return Err(Error::OutsideEnvelope(format!("bounds require C = 1, got {}", ctx.c)));
    }
    if !(ctx.x_star <= 1.0) {
        return Err(Error::OutsideEnvelope(format!("x* = {} exceeds 1 (T below c0)", ctx.x_star)));
    }
    if !(x >= ctx.x_star && x <= 1.0) {
        return Err(Error::OutsideEnvelope(format!("x = {x} not in [{}, 1]", ctx.x_star)));
    }
    let e2 = ctx.eta * ctx.eta;
    let q = x.powf(ctx.alpha) / (e2 * (ctx.t + ctx.alpha * x.ln())).exp_m1();
    let at_one = 1.0 / (e2 * ctx.t).exp_m1();
    let sh = 0.5 * ctx.h.sqrt();
    let at_edge = (sh - ctx.t).exp() / (e2 * sh).exp_m1();
    let (lower, upper) = if ctx.eta >= 1.0 {
        (at_one, at_edge)
    } else {
        let lower = (1.0 - e2).powf(1.0 - 1.0 / e2) * (-ctx.t).exp() / e2;
        (lower, at_one.max(at_edge))
    };
    Ok(Envelope { q, lower, upper })
}

/// Points `e^{iθ}` on the unit arc of the sector, `θ ∈ [-βπ/2, βπ/2]`.
pub fn arc_grid(beta: f64, n: usize) -> SampleGrid {
    let half = beta * PI / 2.0;
    let points = if beta == 0.0 || n < 2 {
        vec![Complex64::new(1.0, 0.0)]
    } else {
        (0..n).map(|k| Complex64::from_polar(1.0, -half + 2.0 * half * k as f64 / (n - 1) as f64)).collect()
    };
    SampleGrid {
        points,
        role: crate::geometry::GridRole::SupNorm,
        clustering: crate::geometry::Clustering { ratio: 1.0, depth: 0 },
        weights: None,
    }
}

/// `sup_grid |I(z) - r_{N_t}(z)|` for each config, sorted by `T`.
pub fn quad_error_curve(cfgs: &[KernelConfig], kind: Singularity, grid: &SampleGrid) -> Result<Vec<(f64, f64)>> {
    quad_error_curve_with(Exec::Parallel, cfgs, kind, grid)
}

pub fn quad_error_curve_with(exec: Exec, cfgs: &[KernelConfig], kind: Singularity, grid: &SampleGrid) -> Result<Vec<(f64, f64)>> {
    let rows = par::map(exec, cfgs, |cfg| -> Result<(f64, f64)> {
        let mut worst: f64 = 0.0;
        for &z in &grid.points {
            let i = kernels::truncated_integral(kind, z, cfg)?.value;
            let r = kernels::trapezoid(kind, z, cfg)?;
            worst = worst.max((i - r).norm());
        }
        Ok((cfg.t(), worst))
    });
    let mut rows: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rows)
}

/// Slope of `-log(err)` against `T` over rows inside `(floor, ceiling)`.
pub fn quad_error_slope(rows: &[(f64, f64)], floor: f64, ceiling: f64) -> Result<LineFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|(_, e)| *e > floor && *e < ceiling)
        .map(|&(t, e)| (t, -e.ln()))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::InsufficientSpan(xs.len()));
    }
    Ok(fit_line(&xs, &ys))
}

/// Near-origin ratios `max |I - r|/e^{-T}` and `max |I_log - r̃|/(T e^{-T})`
/// over `x ∈ [0, min(x*, 1)]` and `θ ∈ [0, β]` on both sides of the axis.
pub fn near_origin_check(cfg: &KernelConfig, beta: f64) -> Result<(f64, f64)> {
    let ctx = BoundContext::from_kernel(cfg, beta)?;
    let x_end = ctx.x_star.min(1.0);
    let mut radii = vec![0.0];
    for k in 0..=60 {
        radii.push(x_end * 0.5f64.powi(k));
    }
    for k in 1..10 {
        radii.push(x_end * k as f64 / 10.0);
    }
    let n_theta = 9;
    let mut pts = Vec::new();
    for &x in &radii {
        for m in 0..n_theta {
            let th = if beta == 0.0 { 0.0 } else { beta * m as f64 / (n_theta - 1) as f64 };
            pts.push(Complex64::from_polar(x, th * PI / 2.0));
            if th > 0.0 {
                pts.push(Complex64::from_polar(x, -th * PI / 2.0));
            }
            if beta == 0.0 {
                break;
            }
        }
    }
    let t = cfg.t();
    let rows = par::map(Exec::Parallel, &pts, |&z| -> Result<(f64, f64)> {
        let ep = (kernels::i_of_z(z, cfg)?.value - kernels::trapezoid_r(z, cfg)?).norm();
        let el = (kernels::i_log_of_z(z, cfg)?.value - kernels::trapezoid_rlog(z, cfg)?).norm();
        Ok((ep, el))
    });
    let (mut mp, mut ml) = (0.0f64, 0.0f64);
    for r in rows {
        let (a, b) = r?;
        mp = mp.max(a);
        ml = ml.max(b);
    }
    Ok((mp / (-t).exp(), ml / (t * (-t).exp())))
}
