//! Randomised invariants, runnable from both the property target and the
//! acceptance report. Every check uses a fixed seed.

use std::f64::consts::PI;
use std::sync::Arc;

use lightning_core::analysis::{
    fit_rate, predicted_log_rate, quad_error_curve, quad_error_slope, sup_error, sup_error_refined, ConvergenceRecord,
    GridDensity, FIT_CEILING, FIT_FLOOR,
};
use lightning_core::corners::{
    boundary_error, cauchy_slit_integral, discrete_laplacian, plan_basis, solve_dirichlet, SigmaMode, SlitBranch,
    SlitIntegralSpec,
};
use lightning_core::geometry::{interior_angles, sample_sector, v_grid, Polygon, SectorDomain};
use lightning_core::kernels::{self, identity_residual, identity_residual_log, KernelConfig, Singularity};
use lightning_core::linalg::lstsq;
use lightning_core::lp::{build_lp, make_poles, make_poles_quadrature, sigma_opt, LpConfig, Target};
use lightning_core::par::Exec;
use lightning_core::Complex64;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::{c, line, quadrilateral};

pub type Check = (&'static str, fn() -> Result<(), String>);

pub const ALL: &[Check] = &[
    ("interior_angle_sum", interior_angle_sum),
    ("sector_grid_translation", sector_grid_translation),
    ("sampling_is_deterministic", sampling_is_deterministic),
    ("identity_power", identity_power),
    ("identity_log", identity_log),
    ("doubling_truncation", doubling_truncation),
    ("pole_formula_equivalence", pole_formula_equivalence),
    ("pole_scaling", pole_scaling),
    ("conjugate_symmetry", conjugate_symmetry),
    ("root_exponential_decay", root_exponential_decay),
    ("prefactor_mode", prefactor_mode),
    ("sigma_ordering", sigma_ordering),
    ("branch_agreement", branch_agreement),
    ("fit_rate_scale_invariance", fit_rate_scale_invariance),
    ("quad_slopes_monotone", quad_slopes_monotone),
    ("v_grid_within_sector", v_grid_within_sector),
    ("harmonicity", harmonicity),
    ("maximum_principle", maximum_principle),
    ("cauchy_integral_analytic", cauchy_integral_analytic),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn fail<E: std::fmt::Debug>(e: E) -> TestCaseError {
    TestCaseError::fail(format!("{e:?}"))
}

/// Points of the unit sector: log-uniform radius, uniform angle.
fn sector_point(beta: f64) -> impl Strategy<Value = Complex64> {
    (-8.0f64..0.0, -1.0f64..1.0).prop_map(move |(lr, s)| Complex64::from_polar(10f64.powf(lr), s * beta * PI / 2.0))
}

/// Star-shaped polygon with sorted vertex angles.
fn star_polygon() -> impl Strategy<Value = Vec<Complex64>> {
    (3usize..10).prop_flat_map(|n| {
        (proptest::collection::vec(0.05f64..1.0, n), proptest::collection::vec(0.5f64..2.0, n)).prop_map(|(gaps, radii)| {
            let total: f64 = gaps.iter().sum();
            let mut th = 0.0;
            gaps.iter()
                .zip(&radii)
                .map(|(g, r)| {
                    th += 2.0 * PI * g / total;
                    Complex64::from_polar(*r, th)
                })
                .collect()
        })
    })
}

fn interior_angle_sum() -> Result<(), String> {
    run(200, star_polygon(), |v| {
        let Ok(poly) = Polygon::new(v) else { return Ok(()) };
        let betas = interior_angles(&poly).map_err(fail)?;
        let s: f64 = betas.iter().map(|b| (1.0 - b) * PI).sum();
        prop_assert!((s - 2.0 * PI).abs() < 1e-9, "sum {s}");
        Ok(())
    })
}

fn sector_grid_translation() -> Result<(), String> {
    let s = (0.0f64..1.99, -10.0f64..10.0, -10.0f64..10.0, -PI..PI);
    run(100, s, |(beta, ax, ay, rot)| {
        let base = SectorDomain::with_params(beta, 1.0, c(0.0, 0.0), rot).map_err(fail)?;
        let moved = SectorDomain::with_params(beta, 1.0, c(ax, ay), rot).map_err(fail)?;
        let g0 = sample_sector(&base, 20, 4, 0.7).map_err(fail)?;
        let g1 = sample_sector(&moved, 20, 4, 0.7).map_err(fail)?;
        for (p, q) in g0.points.iter().zip(&g1.points) {
            prop_assert!((q - c(ax, ay) - p).norm() <= 1e-14 * (1.0 + ax.hypot(ay)));
        }
        Ok(())
    })
}

fn sampling_is_deterministic() -> Result<(), String> {
    run(20, 0.1f64..1.9, |beta| {
        let d = SectorDomain::new(beta).map_err(fail)?;
        prop_assert_eq!(sample_sector(&d, 30, 5, 0.8).map_err(fail)?, sample_sector(&d, 30, 5, 0.8).map_err(fail)?);
        prop_assert_eq!(v_grid(&d, 30, 0.8), v_grid(&d, 30, 0.8));
        let q = quadrilateral();
        let a = lightning_core::geometry::boundary_samples(&q, 8, 4.0).map_err(fail)?;
        let b = lightning_core::geometry::boundary_samples(&q, 8, 4.0).map_err(fail)?;
        prop_assert_eq!(a, b);
        Ok(())
    })
}

fn identity_cases(log: bool) -> Result<(), String> {
    for &alpha in &[0.25, 0.5, 0.8] {
        for &beta in &[0.0, 1.0, 1.5] {
            run(200, sector_point(beta), |z| {
                let r = if log { identity_residual_log(z, alpha, 1e-13) } else { identity_residual(z, alpha, 1e-13) };
                let r = r.map_err(fail)?;
                let tol = if log { 1e-9 } else { 1e-10 };
                prop_assert!(r <= tol, "alpha {alpha} z {z} residual {r}");
                Ok(())
            })?;
        }
    }
    Ok(())
}

fn identity_power() -> Result<(), String> {
    identity_cases(false)
}

fn identity_log() -> Result<(), String> {
    identity_cases(true)
}

fn doubling_truncation() -> Result<(), String> {
    let s = (0.2f64..0.9, 1.0f64..6.0, 20usize..120, sector_point(1.0));
    run(60, s, |(alpha, h, n_t, z)| {
        let (Ok(a), Ok(b)) = (KernelConfig::new(alpha, 1.0, h, n_t), KernelConfig::new(alpha, 1.0, h, 2 * n_t)) else {
            return Ok(());
        };
        prop_assert!(b.t() > a.t());
        let exact = kernels::ref_power(z, alpha).map_err(fail)?;
        let ea = (kernels::i_of_z(z, &a).map_err(fail)?.value - exact).norm();
        let eb = (kernels::i_of_z(z, &b).map_err(fail)?.value - exact).norm();
        prop_assert!(eb <= 10.0 * ea.max(1e-15), "{ea} -> {eb}");
        Ok(())
    })
}

fn lp_config() -> impl Strategy<Value = LpConfig> {
    (0.1f64..0.95, 0.0f64..1.9, 0.5f64..2.0, 1usize..60).prop_filter_map("valid config", |(alpha, beta, f, n1)| {
        LpConfig::new(alpha, beta, f * sigma_opt(alpha, beta), n1).ok()
    })
}

fn pole_formula_equivalence() -> Result<(), String> {
    run(20, lp_config(), |cfg| {
        let Ok(q) = make_poles_quadrature(&cfg) else { return Ok(()) };
        let p = make_poles(&cfg);
        prop_assert_eq!(p.len(), q.len());
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).norm() <= 1e-13 * a.norm(), "{a} vs {b}");
        }
        Ok(())
    })
}

fn pole_scaling() -> Result<(), String> {
    run(50, (lp_config(), 0.01f64..100.0), |(cfg, lambda)| {
        let base = make_poles(&cfg);
        let scaled = make_poles(&cfg.clone().with_c(lambda).map_err(fail)?);
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!((a * lambda - b).norm() <= 1e-15 * b.norm(), "{a} {b}");
        }
        Ok(())
    })
}

fn small_lp() -> impl Strategy<Value = LpConfig> {
    (0.2f64..0.8, 0.0f64..1.5, 0.6f64..1.5, 4usize..25).prop_filter_map("valid config", |(alpha, beta, f, n1)| {
        LpConfig::new(alpha, beta, f * sigma_opt(alpha, beta), n1).ok()
    })
}

fn conjugate_symmetry() -> Result<(), String> {
    run(16, (small_lp(), -1.0f64..1.0, 0.0f64..1.0), |(cfg, s, r)| {
        let domain = SectorDomain::new(cfg.beta()).map_err(fail)?;
        let approx = build_lp(&cfg, &domain).map_err(fail)?;
        let z = Complex64::from_polar(r, s * PI / 2.0 * cfg.beta());
        let (Ok(a), Ok(b)) = (approx.eval(z), approx.eval(z.conj())) else { return Ok(()) };
        prop_assert!((a.conj() - b).norm() <= 1e-12 * (1.0 + a.norm()), "{a} {b}");
        Ok(())
    })
}

fn sup_for(cfg: &LpConfig) -> Result<f64, TestCaseError> {
    let domain = SectorDomain::new(cfg.beta()).map_err(fail)?;
    let approx = build_lp(cfg, &domain).map_err(fail)?;
    let density = GridDensity::for_config(cfg, &domain);
    sup_error_refined(Exec::Parallel, &approx, cfg.target(), cfg.alpha(), &domain, density).map_err(fail)
}

fn root_exponential_decay() -> Result<(), String> {
    run(6, (0.3f64..0.8, 0.0f64..1.5, 0.5f64..1.5), |(alpha, beta, f)| {
        let sigma = f * sigma_opt(alpha, beta);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for n1 in [4usize, 9, 16, 25] {
            let n2 = (3.0 * (n1 as f64).sqrt()).ceil() as usize;
            let cfg = LpConfig::new(alpha, beta, sigma, n1).and_then(|c| c.with_n2(n2)).map_err(fail)?;
            let e = sup_for(&cfg)?;
            if e > FIT_FLOOR {
                xs.push((cfg.n() as f64).sqrt());
                ys.push(e.ln());
            }
        }
        if xs.len() >= 3 {
            let (slope, _) = line(&xs, &ys);
            prop_assert!(slope < 0.0, "slope {slope}");
        }
        Ok(())
    })
}

fn prefactor_mode() -> Result<(), String> {
    let g: lightning_core::lp::Prefactor = Arc::new(|z: Complex64| z.exp());
    run(6, small_lp(), |cfg| {
        let plain = sup_for(&cfg)?;
        let weighted = sup_for(&cfg.clone().with_target(Target::PrefactorPower(g.clone())))?;
        let gmax = 1f64.exp();
        prop_assert!(weighted <= 10.0 * plain * gmax + 1e-13, "{weighted} vs {plain}");
        Ok(())
    })
}

fn sigma_ordering() -> Result<(), String> {
    let so = sigma_opt(0.5, 1.0);
    let errs: Vec<f64> = [so / 2.0, so, 2.0 * so]
        .iter()
        .map(|&s| {
            let cfg = LpConfig::new(0.5, 1.0, s, 64).and_then(|c| c.with_n2(24)).map_err(|e| e.to_string())?;
            sup_for(&cfg).map_err(|e| e.to_string())
        })
        .collect::<Result<_, String>>()?;
    if errs[1] <= errs[0] && errs[1] <= errs[2] {
        Ok(())
    } else {
        Err(format!("errors at σ_opt/2, σ_opt, 2σ_opt: {errs:?}"))
    }
}

fn branch_agreement() -> Result<(), String> {
    run(200, (0.05f64..0.99, 0.0f64..1.99), |(alpha, beta)| {
        let so = sigma_opt(alpha, beta);
        let lower = so * alpha;
        let upper = PI * (2.0 * (2.0 - beta) * alpha).sqrt();
        prop_assert!((lower - upper).abs() <= 1e-12 * upper);
        let (r, _) = predicted_log_rate(so, alpha, beta, Singularity::Power);
        let (r2, _) = predicted_log_rate(so * (1.0 + 1e-15), alpha, beta, Singularity::Power);
        prop_assert!((r - r2).abs() <= 1e-12 * r);
        Ok(())
    })
}

fn fit_rate_scale_invariance() -> Result<(), String> {
    let s = (proptest::collection::vec(1e-12f64..1e-1, 6), 1e-3f64..1e3);
    run(100, s, |(errs, k)| {
        let recs: Vec<ConvergenceRecord> = errs
            .iter()
            .enumerate()
            .map(|(i, &e)| ConvergenceRecord {
                sigma: 1.0,
                n1: (i + 2) * (i + 2),
                n2: 0,
                n: (i + 2) * (i + 2),
                sup_err: e,
                predicted_log_err: 0.0,
                runtime_ms: 0.0,
            })
            .collect();
        let scaled: Vec<_> = recs.iter().map(|r| ConvergenceRecord { sup_err: r.sup_err * k, ..*r }).collect();
        let a = fit_rate(&recs, 0.0, f64::INFINITY).map_err(fail)?;
        let b = fit_rate(&scaled, 0.0, f64::INFINITY).map_err(fail)?;
        prop_assert!((a.slope - b.slope).abs() <= 1e-9 * (1.0 + a.slope.abs()));
        prop_assert!((a.r2 - b.r2).abs() <= 1e-9);
        Ok(())
    })
}

/// Slope of the quadrature-error curve at `α = 0.5` on the unit arc.
pub fn quad_slope(beta: f64, sigma: f64) -> Result<f64, String> {
    let alpha = 0.5;
    let h = (sigma * alpha).powi(2);
    let cfgs: Vec<KernelConfig> = (4..400).step_by(12).filter_map(|n| KernelConfig::new(alpha, 1.0, h, n).ok()).collect();
    let grid = lightning_core::analysis::arc_grid(beta, 33);
    let rows = quad_error_curve(&cfgs, Singularity::Power, &grid).map_err(|e| e.to_string())?;
    Ok(quad_error_slope(&rows, FIT_FLOOR, FIT_CEILING).map_err(|e| e.to_string())?.slope)
}

fn quad_slopes_monotone() -> Result<(), String> {
    for beta in [0.5, 1.0] {
        let so = sigma_opt(0.5, beta);
        let slopes: Vec<f64> = [1.0, 1.5, 2.0, 3.0].iter().map(|f| quad_slope(beta, f * so)).collect::<Result<_, _>>()?;
        if slopes.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("beta {beta}: slopes {slopes:?}"));
        }
    }
    Ok(())
}

fn v_grid_within_sector() -> Result<(), String> {
    run(8, small_lp(), |cfg| {
        let domain = SectorDomain::new(cfg.beta()).map_err(fail)?;
        let approx = build_lp(&cfg, &domain).map_err(fail)?;
        let v = v_grid(&domain, 120, 0.85);
        let s = sample_sector(&domain, 120, 6, 0.85).map_err(fail)?;
        let ev = sup_error(&approx, cfg.target(), cfg.alpha(), &domain, &v).map_err(fail)?;
        let es = sup_error(&approx, cfg.target(), cfg.alpha(), &domain, &s).map_err(fail)?;
        prop_assert!(ev <= es, "{ev} > {es}");
        Ok(())
    })
}

/// Distance from `z` to the polygon's boundary, via its polyline.
fn boundary_distance(poly: &Polygon, z: Complex64) -> f64 {
    let ring = poly.polyline(64);
    let n = ring.len();
    (0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            let d = b - a;
            let t = (((z - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
            (a + d * t - z).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

fn interior_point(poly: &Polygon, margin: f64) -> impl Strategy<Value = Option<Complex64>> + '_ {
    let verts = poly.vertices();
    let (x0, x1) = verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(v.re), a.1.max(v.re)));
    let (y0, y1) = verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(v.im), a.1.max(v.im)));
    (x0..x1, y0..y1).prop_map(move |(x, y)| {
        let z = c(x, y);
        (poly.contains(z) && boundary_distance(poly, z) >= margin).then_some(z)
    })
}

fn harmonicity() -> Result<(), String> {
    let poly = quadrilateral();
    let basis = plan_basis(&poly, 80, SigmaMode::GlobalOpt).map_err(|e| e.to_string())?;
    let sol = solve_dirichlet(&poly, super::re2, &basis).map_err(|e| e.to_string())?;
    run(400, interior_point(&poly, 0.1), |z| {
        let Some(z) = z else { return Ok(()) };
        let lap = discrete_laplacian(&sol, z, 1e-4);
        let u = sol.eval(z);
        prop_assert!(lap.abs() <= 1e-4 * u.abs(), "z {z}: laplacian {lap}, u {u}");
        Ok(())
    })
}

fn maximum_principle() -> Result<(), String> {
    let poly = quadrilateral();
    let exact = |z: Complex64| (z * z).re;
    let basis = plan_basis(&poly, 40, SigmaMode::GlobalOpt).map_err(|e| e.to_string())?;
    let sol = solve_dirichlet(&poly, exact, &basis).map_err(|e| e.to_string())?;
    let bound = boundary_error(&sol, &poly, exact, 4).map_err(|e| e.to_string())?;
    run(300, interior_point(&poly, 0.0), |z| {
        let Some(z) = z else { return Ok(()) };
        let e = (sol.eval(z) - exact(z)).abs();
        prop_assert!(e <= 1.5 * bound, "z {z}: {e} vs boundary {bound}");
        Ok(())
    })
}

/// A Cauchy integral over a slit is analytic off the slit, so polynomial
/// fits on a disc away from it converge geometrically in the degree.
fn cauchy_integral_analytic() -> Result<(), String> {
    let spec = SlitIntegralSpec::new(0, 0.5, 1.0, SlitBranch::Principal).map_err(|e| e.to_string())?;
    let center = c(-1.5, 0.0);
    let nodes: Vec<Complex64> = (0..200).map(|k| center + Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 200.0)).collect();
    let vals: Vec<Complex64> = nodes.iter().map(|&z| cauchy_slit_integral(&spec, z)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for deg in [2usize, 4, 6, 8, 10, 12] {
        let a = DMatrix::from_fn(nodes.len(), deg + 1, |i, j| (nodes[i] - center).powu(j as u32));
        let b = DVector::from_vec(vals.clone());
        let x = lstsq(&a, &b, 1e-15).map_err(|e| e.to_string())?.x;
        let misfit = (&a * &x - &b).iter().map(|v| v.norm()).fold(0.0, f64::max);
        xs.push(deg as f64);
        ys.push(misfit.ln());
    }
    let (slope, r2) = line(&xs, &ys);
    if slope < 0.0 && r2 >= 0.9 {
        Ok(())
    } else {
        Err(format!("slope {slope}, r2 {r2}"))
    }
}
