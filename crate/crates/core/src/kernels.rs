//! Integral representations of `z^α` and `z^α log z`, their truncations, and
//! the trapezoidal sums whose nodes become the lightning poles.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{Adaptive, QuadratureResult};

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which singular function a kernel or sum represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Singularity {
    Power,
    PowerLog,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn on_cut(z: Complex64) -> bool {
    z.im == 0.0 && z.re < 0.0
}

/// Principal branch `z^α`, with `0^α = 0`.
pub fn ref_power(z: Complex64, alpha: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if z == ZERO {
        return Ok(ZERO);
    }
    if on_cut(z) {
        return Err(Error::BranchCut(z));
    }
    Ok((z.ln() * alpha).exp())
}

/// Principal branch `z^α log z`, with value 0 at the origin.
pub fn ref_power_log(z: Complex64, alpha: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if z == ZERO {
        return Ok(ZERO);
    }
    if on_cut(z) {
        return Err(Error::BranchCut(z));
    }
    let l = z.ln();
    Ok((l * alpha).exp() * l)
}

pub fn ref_value(kind: Singularity, z: Complex64, alpha: f64) -> Result<Complex64> {
    match kind {
        Singularity::Power => ref_power(z, alpha),
        Singularity::PowerLog => ref_power_log(z, alpha),
    }
}

pub fn chi(alpha: f64, c: f64) -> f64 {
    let ca = c.powf(alpha);
    ca * (alpha * PI).sin() * c.ln() / (alpha * PI) + ca * (alpha * PI).cos() / alpha
}

/// Smallest distance from `-z` to the positive real axis, relative to nothing:
/// `min_{y>0} |y + z|`.
fn min_distance(z: Complex64) -> f64 {
    if z.re >= 0.0 {
        z.norm()
    } else {
        z.im.abs()
    }
}

/// Untruncated representation evaluated by the adaptive oracle after `y = e^t`:
/// `z^α = sin(απ)/π ∫ z e^{αt}/(e^t + z) dt` and, for the log target,
/// `z^α log z = sin(απ)/π ∫ t z e^{αt}/(e^t + z) dt + cos(απ) ∫ z e^{αt}/(e^t + z) dt`.
/// The integration window is cut where the analytic tail bounds drop below `tol/10`.
pub fn identity_integral(kind: Singularity, z: Complex64, alpha: f64, tol: f64) -> Result<QuadratureResult> {
    check_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if z == ZERO {
        return Ok(QuadratureResult { value: ZERO, est_error: 0.0, evaluations: 1 });
    }
    if on_cut(z) {
        return Err(Error::BranchCut(z));
    }
    let r = z.norm();
    let m = min_distance(z);
    let t0 = r.ln();
    let lambda = 1.0 - alpha;
    let log_weight = |t: f64| match kind {
        Singularity::Power => 0.0,
        Singularity::PowerLog => t.abs(),
    };
    // ∫_{-∞}^{a} (|t|+1) r e^{αt}/m dt ≤ (r/m) e^{αa} (|a|/α + 1/α² + 1/α).
    let lower_tail = |a: f64| (r / m) * (alpha * a).exp() * (log_weight(a) / alpha + 1.0 / (alpha * alpha) + 1.0 / alpha);
    // For e^t ≥ 2r: |e^t + z| ≥ e^t/2, so the tail is ≤ 2r e^{-λb}(b/λ + 1/λ² + 1/λ).
    let upper_tail = |b: f64| 2.0 * r * (-lambda * b).exp() * (log_weight(b) / lambda + 1.0 / (lambda * lambda) + 1.0 / lambda);
    let target = tol / 10.0;
    let mut a = t0 - 2.0;
    while lower_tail(a) > target {
        a -= 1.0;
    }
    let mut b = (2.0 * r).ln().max(t0) + 2.0;
    while upper_tail(b) > target {
        b += 1.0;
    }
    let (s, c) = ((alpha * PI).sin(), (alpha * PI).cos());
    let integrand = |t: f64| {
        let v = z * (alpha * t).exp() / (Complex64::new(t.exp(), 0.0) + z);
        match kind {
            Singularity::Power => v * (s / PI),
            Singularity::PowerLog => v * (s / PI * t + c),
        }
    };
    Adaptive::with_tol(tol / 4.0, 0.0).integrate_with_breaks(integrand, &[a, t0, b])
}

pub fn identity_residual(z: Complex64, alpha: f64, tol: f64) -> Result<f64> {
    let q = identity_integral(Singularity::Power, z, alpha, tol)?;
    Ok((q.value - ref_power(z, alpha)?).norm())
}

pub fn identity_residual_log(z: Complex64, alpha: f64, tol: f64) -> Result<f64> {
    let q = identity_integral(Singularity::PowerLog, z, alpha, tol)?;
    Ok((q.value - ref_power_log(z, alpha)?).norm())
}

/// Parameters of the truncated integral and its trapezoidal discretisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelConfig {
    alpha: f64,
    c: f64,
    h: f64,
    n_t: usize,
    t: f64,
}

impl KernelConfig {
    /// Truncation derived from the node count: `T = √(N_t h)/(κ+1)`.
    pub fn new(alpha: f64, c: f64, h: f64, n_t: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let kappa = alpha / (1.0 - alpha);
        let t = ((n_t as f64) * h).sqrt() / (kappa + 1.0);
        Self::validated(alpha, c, h, n_t, t)
    }

    /// Explicit truncation `T`; the node count becomes `floor((κ+1)²T²/h)`.
    pub fn with_truncation(alpha: f64, c: f64, h: f64, t: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(h > 0.0 && t > 0.0 && t.is_finite()) {
            return Err(invalid("h and T must be positive"));
        }
        let kappa = alpha / (1.0 - alpha);
        let n_t = (((kappa + 1.0) * t).powi(2) / h + 1e-9).floor().max(1.0) as usize;
        Self::validated(alpha, c, h, n_t, t)
    }

    fn validated(alpha: f64, c: f64, h: f64, n_t: usize, t: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("C must be positive, got {c}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("h must be positive, got {h}")));
        }
        if n_t == 0 {
            return Err(invalid("N_t must be positive"));
        }
        let floor = (1.0 - alpha) * (2.0 * 2f64.ln() - c.ln());
        if t < floor {
            return Err(invalid(format!("truncation T = {t} is below the validity floor {floor}")));
        }
        Ok(Self { alpha, c, h, n_t, t })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn n_t(&self) -> usize {
        self.n_t
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn kappa(&self) -> f64 {
        self.alpha / (1.0 - self.alpha)
    }

    /// All trapezoid poles `p_j = -C e^{(√(jh) - T)/α}`, `j = 1..=N_t`.
    pub fn poles(&self) -> Vec<f64> {
        (1..=self.n_t)
            .map(|j| -self.c * (((j as f64 * self.h).sqrt() - self.t) / self.alpha).exp())
            .collect()
    }

    /// Trapezoid weights `w_j` such that the sum is `Σ w_j |p_j|^α z/(z - p_j)`.
    pub fn weights(&self, kind: Singularity) -> Vec<f64> {
        let (a, h) = (self.alpha, self.h);
        let s = (a * PI).sin();
        match kind {
            Singularity::Power => (1..=self.n_t)
                .map(|j| s / (2.0 * a * PI) * (h / j as f64).sqrt())
                .collect(),
            Singularity::PowerLog => {
                let k = 0.5 * (chi(a, self.c) / self.c.powf(a) - self.t * s / (a * a * PI));
                (1..=self.n_t)
                    .map(|j| h * s / (2.0 * a * a * PI) + k * (h / j as f64).sqrt())
                    .collect()
            }
        }
    }
}

/// Truncated integral in the variable `t = √u - T`:
/// `(sin(απ)/(απ)) C^α ∫_{-T}^{κT} g(t) z e^t/(C e^{t/α} + z) dt`, with
/// `g ≡ 1` for the power target and the log-target weights otherwise.
pub fn truncated_integral(kind: Singularity, z: Complex64, cfg: &KernelConfig) -> Result<QuadratureResult> {
    if z == ZERO {
        return Ok(QuadratureResult { value: ZERO, est_error: 0.0, evaluations: 1 });
    }
    if on_cut(z) {
        return Err(Error::BranchCut(z));
    }
    let (a, c, t) = (cfg.alpha, cfg.c, cfg.t);
    let s = (a * PI).sin();
    let ca = c.powf(a);
    let ch = chi(a, c);
    let integrand = |x: f64| {
        let v = z * x.exp() / (Complex64::new(c * (x / a).exp(), 0.0) + z);
        match kind {
            Singularity::Power => v * (s / (a * PI) * ca),
            Singularity::PowerLog => v * (s / (a * a * PI) * ca * x + ch),
        }
    };
    // The integrand peaks where C e^{t/α} ≈ |z|.
    let lo = -t;
    let hi = cfg.kappa() * t;
    let peak = a * (z.norm() / c).ln();
    let mut breaks = vec![lo];
    if peak > lo && peak < hi {
        breaks.push(peak);
    }
    breaks.push(hi);
    Adaptive::with_tol(1e-15, 5e-14).integrate_with_breaks(integrand, &breaks)
}

pub fn i_of_z(z: Complex64, cfg: &KernelConfig) -> Result<QuadratureResult> {
    truncated_integral(Singularity::Power, z, cfg)
}

pub fn i_log_of_z(z: Complex64, cfg: &KernelConfig) -> Result<QuadratureResult> {
    truncated_integral(Singularity::PowerLog, z, cfg)
}

pub(crate) fn collision(z: Complex64, p: Complex64) -> bool {
    (z - p).norm() < 1e-14 * p.norm().max(1.0)
}

fn trapezoid_sum(kind: Singularity, z: Complex64, cfg: &KernelConfig) -> Result<Complex64> {
    if z == ZERO {
        return Ok(ZERO);
    }
    let poles = cfg.poles();
    let weights = cfg.weights(kind);
    let mut sum = ZERO;
    for (p, w) in poles.iter().zip(&weights) {
        let pc = Complex64::new(*p, 0.0);
        if collision(z, pc) {
            return Err(Error::PoleCollision { z, pole: pc });
        }
        sum += z * (w * p.abs().powf(cfg.alpha)) / (z - pc);
    }
    Ok(sum)
}

/// Trapezoidal sum approximating `z^α`, summed in ascending `j`.
pub fn trapezoid_r(z: Complex64, cfg: &KernelConfig) -> Result<Complex64> {
    trapezoid_sum(Singularity::Power, z, cfg)
}

/// Trapezoidal sum approximating `z^α log z`, summed in ascending `j`.
pub fn trapezoid_rlog(z: Complex64, cfg: &KernelConfig) -> Result<Complex64> {
    trapezoid_sum(Singularity::PowerLog, z, cfg)
}

pub fn trapezoid(kind: Singularity, z: Complex64, cfg: &KernelConfig) -> Result<Complex64> {
    trapezoid_sum(kind, z, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn principal_powers() {
        assert!((ref_power(c(4.0, 0.0), 0.5).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ref_power(c(0.0, 1.0), 0.5).unwrap() - c(s, s)).norm() < 1e-15);
        assert_eq!(ref_power(c(1.0, 0.0), 0.37).unwrap(), c(1.0, 0.0));
        assert_eq!(ref_power(ZERO, 0.5).unwrap(), ZERO);
        assert!(matches!(ref_power(c(-1.0, 0.0), 0.5), Err(Error::BranchCut(_))));
        assert!(ref_power(c(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn chi_values() {
        assert!(chi(0.5, 1.0).abs() < 1e-15);
        assert!((chi(0.25, 1.0) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        let e = std::f64::consts::E;
        assert!((chi(0.5, e) - 2.0 * e.sqrt() / PI).abs() < 1e-14);
    }

    #[test]
    fn identity_examples() {
        assert!(identity_residual(c(1.0, 0.0), 0.5, 1e-12).unwrap() <= 1e-10);
        assert_eq!(identity_residual(ZERO, 0.5, 1e-12).unwrap(), 0.0);
        let z = Complex64::from_polar(0.3, 0.75 * PI * 0.9);
        assert!(identity_residual(z, 0.7, 1e-12).unwrap() <= 1e-10);
        assert!(identity_residual_log(z, 0.7, 1e-12).unwrap() <= 1e-9);
    }

    #[test]
    fn truncated_integral_at_zero_and_one() {
        let h = PI * PI;
        let cfg = KernelConfig::new(0.5, 1.0, h, 64).unwrap();
        assert_eq!(i_of_z(ZERO, &cfg).unwrap().value, ZERO);
        let q = i_of_z(c(1.0, 0.0), &cfg).unwrap();
        let t = (64.0 * h).sqrt() / 2.0;
        assert!((q.value - 1.0).norm() <= 3.0 * (-t).exp());
        assert!(q.est_error <= 1e-13 * q.value.norm().max(1.0));
    }

    #[test]
    fn truncated_log_integral_example() {
        let cfg = KernelConfig::new(0.5, 1.0, PI * PI, 100).unwrap();
        let t = cfg.t();
        let q = i_log_of_z(c(0.5, 0.0), &cfg).unwrap();
        let want = 0.5f64.sqrt() * 0.5f64.ln();
        assert!((want + 0.49012).abs() < 1e-5);
        assert!((q.value - want).norm() <= 3.0 * t * (-t).exp());
        let one = i_log_of_z(c(1.0, 0.0), &cfg).unwrap();
        assert!(one.value.norm() <= 3.0 * t * (-t).exp());
    }

    #[test]
    fn truncated_integrals_converge_for_other_scales() {
        // C ≠ 1 exercises the χ/C^α bookkeeping of the log kernel.
        for &cc in &[0.5, 2.0] {
            let cfg = KernelConfig::with_truncation(0.4, cc, 4.0, 30.0).unwrap();
            let z = Complex64::from_polar(0.6, 0.8);
            let p = i_of_z(z, &cfg).unwrap().value;
            let l = i_log_of_z(z, &cfg).unwrap().value;
            assert!((p - ref_power(z, 0.4).unwrap()).norm() < 1e-10, "C={cc}");
            assert!((l - ref_power_log(z, 0.4).unwrap()).norm() < 1e-9, "C={cc}");
        }
    }

    #[test]
    fn four_term_trapezoid_by_hand() {
        let h = PI * PI;
        let cfg = KernelConfig::new(0.5, 1.0, h, 4).unwrap();
        let t = (4.0 * h).sqrt() / 2.0;
        // Direct transcription of the sum with the e^{√(jh)-T} form.
        let mut want = 0.0;
        for j in 1..=4 {
            let x = (j as f64 * h).sqrt() - t;
            want += h / (2.0 * 0.5 * PI) / (j as f64 * h).sqrt() * x.exp() / ((x / 0.5).exp() + 1.0);
        }
        let got = trapezoid_r(c(1.0, 0.0), &cfg).unwrap();
        assert!((got.re - want).abs() < 1e-15 && got.im == 0.0);
        assert_eq!(trapezoid_r(ZERO, &cfg).unwrap(), ZERO);
    }

    #[test]
    fn small_log_trapezoid_by_hand() {
        let (a, cc, h) = (0.3, 1.7, 2.0);
        let cfg = KernelConfig::new(a, cc, h, 3).unwrap();
        let t = cfg.t();
        let s = (a * PI).sin();
        let z = c(0.4, 0.2);
        // Trapezoid rule in u applied to the truncated log integrand, u_j = jh.
        let mut want = ZERO;
        for j in 1..=3 {
            let u = j as f64 * h;
            let x = u.sqrt() - t;
            let f = z * x.exp() / (c(cc * (x / a).exp(), 0.0) + z);
            let g = s / (a * a * PI) * cc.powf(a) * x + chi(a, cc);
            want += f * g * (h / (2.0 * u.sqrt()));
        }
        let got = trapezoid_rlog(z, &cfg).unwrap();
        assert!((got - want).norm() < 1e-14 * want.norm().max(1.0));
    }

    #[test]
    fn pole_collision_detected() {
        let cfg = KernelConfig::new(0.5, 1.0, 1.0, 8).unwrap();
        let p = Complex64::new(cfg.poles()[3], 0.0);
        assert!(matches!(trapezoid_r(p, &cfg), Err(Error::PoleCollision { .. })));
    }

    #[test]
    fn truncation_floor_is_enforced() {
        assert!(KernelConfig::new(0.5, 1.0, 0.01, 1).is_err());
        let k = KernelConfig::with_truncation(0.5, 1.0, 1.0, 4.0).unwrap();
        assert_eq!(k.n_t(), 64);
    }
}
