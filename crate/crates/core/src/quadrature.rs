//! Gauss–Legendre rules and an adaptive composite integrator for complex-valued
//! integrands on real intervals.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let legendre = |z: f64| {
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        if n == 1 {
            (z, 1.0)
        } else {
            (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
        }
    };
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn gl15() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(15))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub est_error: f64,
    pub evaluations: usize,
}

/// Composite 15-point Gauss–Legendre with bisection of panels that fail the
/// local tolerance test.
#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_evals: usize,
    pub initial_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            tol_abs: 1e-13,
            tol_rel: 1e-13,
            max_evals: 4_000_000,
            initial_panels: 16,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    magnitude: f64,
}

impl Adaptive {
    pub fn with_tol(tol_abs: f64, tol_rel: f64) -> Self {
        Self {
            tol_abs,
            tol_rel,
            ..Self::default()
        }
    }

    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> Complex64,
    {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrate over `[breaks[0], breaks[last]]`, seeding panels so that every
    /// interior break point is a panel edge. Useful where the integrand peaks.
    pub fn integrate_with_breaks<F>(&self, f: F, breaks: &[f64]) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> Complex64,
    {
        assert!(breaks.len() >= 2);
        let (lo, hi) = (breaks[0], breaks[breaks.len() - 1]);
        if lo == hi {
            return Ok(QuadratureResult {
                value: Complex64::new(0.0, 0.0),
                est_error: 0.0,
                evaluations: 1,
            });
        }
        let width = hi - lo;
        let mut evals = 0usize;
        let rule = |a: f64, b: f64, evals: &mut usize| -> Panel {
            let (xs, ws) = gl15();
            let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
            let mut value = Complex64::new(0.0, 0.0);
            let mut magnitude = 0.0;
            for (x, w) in xs.iter().zip(ws) {
                let v = f(c + r * x) * (w * r);
                value += v;
                magnitude += v.norm();
            }
            *evals += xs.len();
            Panel { a, b, value, magnitude }
        };

        // Each entry holds a panel's refined value (sum of its two halves) and
        // the discrepancy against the single-panel rule. The panel with the
        // largest discrepancy is split until the total meets the tolerance.
        let split = |p: Panel, evals: &mut usize| -> Split {
            let mid = 0.5 * (p.a + p.b);
            let left = rule(p.a, mid, evals);
            let right = rule(mid, p.b, evals);
            let value = left.value + right.value;
            let err = (value - p.value).norm();
            let roundoff = 64.0 * f64::EPSILON * (left.magnitude + right.magnitude);
            let settled = err <= roundoff || (p.b - p.a) < 1e-13 * width.max(1.0);
            Split { left, right, value, err: if settled { 0.0 } else { err } }
        };

        let per_gap = (self.initial_panels / (breaks.len() - 1)).max(1);
        let mut heap = BinaryHeap::new();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            for k in 0..per_gap {
                let pa = a + (b - a) * k as f64 / per_gap as f64;
                let pb = if k + 1 == per_gap { b } else { a + (b - a) * (k + 1) as f64 / per_gap as f64 };
                let panel = rule(pa, pb, &mut evals);
                heap.push(split(panel, &mut evals));
            }
        }
        let mut total: Complex64 = heap.iter().map(|s| s.value).sum();
        let mut est: f64 = heap.iter().map(|s| s.err).sum();
        loop {
            let tol = self.tol_abs.max(self.tol_rel * total.norm());
            let worst = heap.peek().map_or(0.0, |s| s.err);
            if est <= tol || worst == 0.0 {
                // Re-sum exactly; the running totals only steer refinement.
                let value = heap.iter().map(|s| s.value).sum();
                let est_error = heap.iter().map(|s| s.err).sum();
                return Ok(QuadratureResult { value, est_error, evaluations: evals });
            }
            if evals > self.max_evals {
                return Err(Error::QuadratureNonConvergence { estimate: total, error: est, evaluations: evals });
            }
            let s = heap.pop().expect("non-empty heap");
            let (l, r) = (split(s.left, &mut evals), split(s.right, &mut evals));
            total += l.value + r.value - s.value;
            est = (est + l.err + r.err - s.err).max(0.0);
            heap.push(l);
            heap.push(r);
        }
    }
}

struct Split {
    left: Panel,
    right: Panel,
    value: Complex64,
    err: f64,
}

impl PartialEq for Split {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Split {}

impl PartialOrd for Split {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Split {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Fixed composite Gauss–Legendre rule: `panels` equal panels of `order` nodes.
pub fn composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let step = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let c = a + step * (k as f64 + 0.5);
            xs.iter().zip(&ws).map(|(x, w)| w * f(c + 0.5 * step * x)).sum::<f64>() * 0.5 * step
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(15);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 28 monomial: ∫ x^28 = 2/29
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(28)).sum();
        assert!((s - 2.0 / 29.0).abs() < 1e-14);
        let (x1, w1) = gauss_legendre(1);
        assert_eq!((x1[0], w1[0]), (0.0, 2.0));
    }

    #[test]
    fn adaptive_handles_a_sharp_peak() {
        let eps = 1e-4;
        let q = Adaptive::default()
            .integrate(|t| Complex64::new(eps / (t * t + eps * eps), 0.0), -1.0, 1.0)
            .unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((q.value.re - exact).abs() < 1e-11, "{}", q.value.re - exact);
    }

    #[test]
    fn budget_exhaustion_reports_partial_estimate() {
        let quad = Adaptive {
            max_evals: 200,
            ..Adaptive::with_tol(1e-15, 0.0)
        };
        let err = quad.integrate(|t| Complex64::new((1.0 / (t + 1e-9)).sin(), 0.0), 0.0, 1.0);
        assert!(matches!(err, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn composite_rule_arclength_of_circle() {
        let len = composite(|_| 1.0, 0.0, 2.0 * PI, 32, 8);
        assert!((len - 2.0 * PI).abs() < 1e-13);
    }
}
