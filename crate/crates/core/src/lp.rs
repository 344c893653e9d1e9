//! Construction and evaluation of the lightning-plus-polynomial approximation
//! `r_N(z) = Σ_{j≤N1} a_j/(z - p_j) + b_{N2}(z)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{chebyshev_boundary_samples, SectorDomain};
use crate::kernels::{self, check_alpha, collision, KernelConfig, Singularity, ZERO};
use crate::linalg::lstsq;

/// Largest supported tail degree.
pub const MAX_N2: usize = 120;

pub type Prefactor = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Function being approximated.
#[derive(Clone)]
pub enum Target {
    Power,
    PowerLog,
    PrefactorPower(Prefactor),
    PrefactorPowerLog(Prefactor),
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Target {
    pub fn name(&self) -> &'static str {
        match self {
            Target::Power => "power",
            Target::PowerLog => "power_log",
            Target::PrefactorPower(_) => "prefactor_power",
            Target::PrefactorPowerLog(_) => "prefactor_power_log",
        }
    }

    pub fn singularity(&self) -> Singularity {
        match self {
            Target::Power | Target::PrefactorPower(_) => Singularity::Power,
            Target::PowerLog | Target::PrefactorPowerLog(_) => Singularity::PowerLog,
        }
    }

    pub fn prefactor(&self) -> Option<&Prefactor> {
        match self {
            Target::PrefactorPower(g) | Target::PrefactorPowerLog(g) => Some(g),
            _ => None,
        }
    }

    /// Exact value `g(z)·z^α` or `g(z)·z^α log z` on the principal branch.
    pub fn exact(&self, z: Complex64, alpha: f64) -> Result<Complex64> {
        let base = kernels::ref_value(self.singularity(), z, alpha)?;
        Ok(match self.prefactor() {
            Some(g) => g(z) * base,
            None => base,
        })
    }
}

pub fn sigma_opt(alpha: f64, beta: f64) -> f64 {
    (2.0 * (2.0 - beta)).sqrt() * PI / alpha.sqrt()
}

/// Default tail degree for a single approximant: `ceil(1.3·N1)`.
pub fn default_n2(n1: usize) -> usize {
    (1.3 * n1 as f64 - 1e-9).ceil() as usize
}

/// Tail degree growing like `√N1`, as in the convergence theorems.
pub fn sqrt_n2(n1: usize, factor: f64) -> usize {
    (factor * (n1 as f64).sqrt() - 1e-9).ceil() as usize
}

#[derive(Clone, Debug)]
pub struct LpConfig {
    alpha: f64,
    beta: f64,
    sigma: f64,
    c: f64,
    n1: usize,
    n2: usize,
    target: Target,
}

impl LpConfig {
    pub fn new(alpha: f64, beta: f64, sigma: f64, n1: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if !(0.0..2.0).contains(&beta) {
            return Err(invalid(format!("beta must lie in [0, 2), got {beta}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        if n1 == 0 {
            return Err(invalid("N1 must be positive"));
        }
        Ok(Self {
            alpha,
            beta,
            sigma,
            c: 1.0,
            n1,
            n2: default_n2(n1).min(MAX_N2),
            target: Target::Power,
        })
    }

    pub fn with_c(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("C must be positive, got {c}")));
        }
        self.c = c;
        Ok(self)
    }

    pub fn with_n2(mut self, n2: usize) -> Result<Self> {
        if n2 > MAX_N2 {
            return Err(invalid(format!("N2 = {n2} exceeds the cap {MAX_N2}")));
        }
        self.n2 = n2;
        Ok(self)
    }

    pub fn with_target(mut self, target: Target) -> Self {
        self.target = target;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }
    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }
    pub fn target(&self) -> &Target {
        &self.target
    }
    pub fn kappa(&self) -> f64 {
        self.alpha / (1.0 - self.alpha)
    }
    pub fn h(&self) -> f64 {
        (self.sigma * self.alpha).powi(2)
    }
    /// `T = √(N1 h)`, which puts the N1-th node exactly at `-C`.
    pub fn t(&self) -> f64 {
        (self.n1 as f64 * self.h()).sqrt()
    }
    /// Node count `floor(N1 (κ+1)²)`; satisfies `N1 = ceil(N_t/(κ+1)²)`.
    pub fn n_t(&self) -> usize {
        let k1 = (self.kappa() + 1.0).powi(2);
        ((self.n1 as f64 * k1 + 1e-9).floor() as usize).max(self.n1)
    }
    pub fn sigma_opt(&self) -> f64 {
        sigma_opt(self.alpha, self.beta)
    }
    pub fn eta(&self) -> f64 {
        self.sigma_opt() / self.sigma
    }

    pub fn kernel_config(&self) -> Result<KernelConfig> {
        KernelConfig::with_truncation(self.alpha, self.c, self.h(), self.t())
    }
}

/// Tapered poles `p_j = -C e^{-σ(√N1 - √j)}`, `j = 1..=N1`.
pub fn make_poles(cfg: &LpConfig) -> Vec<Complex64> {
    let s = (cfg.n1 as f64).sqrt();
    (1..=cfg.n1)
        .map(|j| Complex64::new(-cfg.c * (-cfg.sigma * (s - (j as f64).sqrt())).exp(), 0.0))
        .collect()
}

/// The same poles from the quadrature-node form `p_j = -C e^{(√(jh) - T)/α}`.
pub fn make_poles_quadrature(cfg: &LpConfig) -> Result<Vec<Complex64>> {
    let k = cfg.kernel_config()?;
    Ok(k.poles().into_iter().take(cfg.n1).map(|p| Complex64::new(p, 0.0)).collect())
}

fn near_residues(cfg: &LpConfig, kind: Singularity) -> Result<Vec<Complex64>> {
    let k = cfg.kernel_config()?;
    let w = k.weights(kind);
    Ok(make_poles(cfg)
        .iter()
        .zip(&w)
        .map(|(p, w)| p * (w * p.re.abs().powf(cfg.alpha)))
        .collect())
}

/// `a_j = √h p_j |p_j|^α sin(απ) / (2√j απ)`.
pub fn residues_power(cfg: &LpConfig) -> Result<Vec<Complex64>> {
    near_residues(cfg, Singularity::Power)
}

/// Residues of the log target:
/// `[h sin(απ)/(2α²π) + ½(χ/C^α - T sin(απ)/(α²π))√(h/j)] p_j |p_j|^α`.
pub fn residues_power_log(cfg: &LpConfig) -> Result<Vec<Complex64>> {
    near_residues(cfg, Singularity::PowerLog)
}

/// Analytic remainder `r₂` of the trapezoid sum once the N1 near poles are
/// split off, evaluated in the cancellation-free form
/// `Σ_{j>N1} w_j|p_j|^α z/(z - p_j) + Σ_{j≤N1} w_j|p_j|^α`.
#[derive(Clone, Debug)]
pub struct Remainder {
    far_poles: Vec<f64>,
    far_weights: Vec<f64>,
    constant: f64,
}

impl Remainder {
    pub fn new(cfg: &LpConfig) -> Result<Self> {
        let k = cfg.kernel_config()?;
        let poles = k.poles();
        let scaled: Vec<f64> = k
            .weights(cfg.target.singularity())
            .iter()
            .zip(&poles)
            .map(|(w, p)| w * p.abs().powf(cfg.alpha))
            .collect();
        let n1 = cfg.n1.min(poles.len());
        Ok(Self {
            far_poles: poles[n1..].to_vec(),
            far_weights: scaled[n1..].to_vec(),
            constant: scaled[..n1].iter().sum(),
        })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut s = ZERO;
        for (p, w) in self.far_poles.iter().zip(&self.far_weights) {
            s += z * *w / (z - p);
        }
        s + self.constant
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }
}

#[derive(Clone, Debug)]
pub struct TailFit {
    /// Coefficients of `(z/scale)^k`, `k = 0..=N2`.
    pub coeffs: Vec<Complex64>,
    pub scale: f64,
    pub rms: f64,
    /// Sup misfit on a validation grid twice as dense as the fitting grid.
    pub validation_sup: f64,
}

fn check_domain(cfg: &LpConfig, domain: &SectorDomain) -> Result<()> {
    if (cfg.beta - domain.beta()).abs() > 1e-14 {
        return Err(invalid(format!(
            "config beta {} does not match domain beta {}",
            cfg.beta,
            domain.beta()
        )));
    }
    Ok(())
}

fn horner(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * w + c)
}

/// Least-squares polynomial fit of the analytic remainder (plus, for
/// prefactor targets, the correction `Σ a_j (g(z) - g(p_j))/(z - p_j)`) on
/// clustered boundary samples of the sector, in its local frame.
pub fn fit_tail(cfg: &LpConfig, domain: &SectorDomain) -> Result<TailFit> {
    check_domain(cfg, domain)?;
    let rem = Remainder::new(cfg)?;
    let poles = make_poles(cfg);
    let residues = near_residues(cfg, cfg.target.singularity())?;
    let g = cfg.target.prefactor().cloned();
    let g_at_poles: Vec<Complex64> = match &g {
        Some(g) => poles.iter().map(|p| g(*p)).collect(),
        None => Vec::new(),
    };
    let rhs = |z: Complex64| -> Complex64 {
        match &g {
            None => rem.eval(z),
            Some(g) => {
                let gz = g(z);
                let mut corr = ZERO;
                for ((a, p), gp) in residues.iter().zip(&poles).zip(&g_at_poles) {
                    corr += a * (gz - gp) / (z - p);
                }
                gz * rem.eval(z) + corr
            }
        }
    };

    let n_coef = cfg.n2 + 1;
    let n_ray = (3 * n_coef).max(60);
    let samples = chebyshev_boundary_samples(domain, n_ray, n_ray);
    let scale = domain.radius();
    let vander = |pts: &[Complex64]| {
        DMatrix::from_fn(pts.len(), n_coef, |i, k| (pts[i] / scale).powu(k as u32))
    };
    let a = vander(&samples);
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|&z| rhs(z)));
    let sol = lstsq(&a, &b, 1e-15)?;
    let coeffs: Vec<Complex64> = sol.x.iter().cloned().collect();
    if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::RankDeficient);
    }
    let misfit = |z: Complex64| (horner(&coeffs, z / scale) - rhs(z)).norm();
    let rms = (samples.iter().map(|&z| misfit(z).powi(2)).sum::<f64>() / samples.len() as f64).sqrt();
    let fine = chebyshev_boundary_samples(domain, 2 * n_ray + 1, 2 * n_ray + 1);
    let validation_sup = fine.iter().map(|&z| misfit(z)).fold(0.0, f64::max);
    Ok(TailFit { coeffs, scale, rms, validation_sup })
}

/// Partial fractions plus a polynomial tail in the scaled variable `z/scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalApprox {
    pub poles: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub tail_coeffs: Vec<Complex64>,
    pub basis_scale: f64,
}

impl RationalApprox {
    pub fn new(poles: Vec<Complex64>, residues: Vec<Complex64>, tail_coeffs: Vec<Complex64>, basis_scale: f64) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(invalid("pole and residue counts differ"));
        }
        if !(basis_scale > 0.0 && basis_scale.is_finite()) {
            return Err(invalid("basis scale must be positive"));
        }
        Ok(Self { poles, residues, tail_coeffs, basis_scale })
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut s = ZERO;
        for (p, a) in self.poles.iter().zip(&self.residues) {
            if collision(z, *p) {
                return Err(Error::PoleCollision { z, pole: *p });
            }
            s += a / (z - p);
        }
        Ok(s + horner(&self.tail_coeffs, z / self.basis_scale))
    }

    /// Same approximation with `c` added to the constant term.
    pub fn shifted(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        if out.tail_coeffs.is_empty() {
            out.tail_coeffs.push(ZERO);
        }
        out.tail_coeffs[0] += c;
        out
    }
}

pub fn eval(approx: &RationalApprox, z: Complex64) -> Result<Complex64> {
    approx.eval(z)
}

/// Build the LP approximation for `cfg` on `domain` (local frame).
pub fn build_lp(cfg: &LpConfig, domain: &SectorDomain) -> Result<RationalApprox> {
    check_domain(cfg, domain)?;
    let poles = make_poles(cfg);
    let mut residues = near_residues(cfg, cfg.target.singularity())?;
    if let Some(g) = cfg.target.prefactor() {
        for (a, p) in residues.iter_mut().zip(&poles) {
            *a *= g(*p);
        }
    }
    let tail = fit_tail(cfg, domain)?;
    RationalApprox::new(poles, residues, tail.coeffs, tail.scale)
}
