//! The six experiment drivers. Each returns its CSV table, any extra
//! artifacts, and a JSON summary; none of them touch the filesystem except to
//! read inputs.

use std::f64::consts::PI;
use std::path::Path;

use lightning_core::analysis::{
    fit_line, fit_rate, near_origin_check, predicted_log_err, predicted_log_rate, quad_error_curve, quad_error_slope,
    sup_error_refined, sweep as run_sweep, arc_grid, ConvergenceRecord, GridDensity, N2Rule, SweepSpec, FIT_CEILING,
    FIT_FLOOR,
};
use lightning_core::corners::{
    boundary_error, corner_sigma, p0, plan_basis, singular_coefficient_check, solve_dirichlet_with, SigmaMode, Weighting,
};
use lightning_core::geometry::{Polygon, SectorDomain};
use lightning_core::kernels::{KernelConfig, Singularity};
use lightning_core::lp::{build_lp, sigma_opt, LpConfig, Target};
use lightning_core::par::Exec;
use lightning_core::textio::{fmt_f64, parse_polygon, parse_samples, write_csv, write_harmonic, write_rational};
use lightning_core::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::params::{Params, SigmaSpec};

#[derive(Debug, Serialize)]
pub struct Summary {
    pub fitted_rate: Value,
    pub predicted_rate: Value,
    pub pass: bool,
    pub details: Value,
}

#[derive(Debug)]
pub struct Report {
    pub csv: String,
    pub artifacts: Vec<(String, String)>,
    pub summary: Summary,
    /// Description of the first failed assertion, if any.
    pub failure: Option<String>,
}

fn target(p: &Params) -> Result<Target, CliError> {
    match p.raw("target").unwrap_or("power") {
        "power" => Ok(Target::Power),
        "log" | "power_log" => Ok(Target::PowerLog),
        other => Err(CliError::Config(format!("target must be `power` or `log`, got {other:?}"))),
    }
}

fn n2_rule(p: &Params) -> Result<N2Rule, CliError> {
    let raw = p.raw("n2_rule").unwrap_or("sqrt:3");
    let bad = || CliError::Config(format!("n2_rule must be `sqrt:<f>`, `prop:<f>` or `fixed:<n>`, got {raw:?}"));
    let (kind, v) = raw.split_once(':').ok_or_else(bad)?;
    match kind {
        "sqrt" => Ok(N2Rule::Sqrt(v.parse().map_err(|_| bad())?)),
        "prop" => Ok(N2Rule::Proportional(v.parse().map_err(|_| bad())?)),
        "fixed" => Ok(N2Rule::Fixed(v.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn timing(p: &Params) -> Result<bool, CliError> {
    p.get("timing", Some(false))
}

fn zero_runtime(mut records: Vec<ConvergenceRecord>, keep: bool) -> Vec<ConvergenceRecord> {
    if !keep {
        for r in &mut records {
            r.runtime_ms = 0.0;
        }
    }
    records
}

fn within(value: f64, target: f64, frac: f64) -> bool {
    (value - target).abs() <= frac * target.abs()
}

pub fn approx(p: &Params) -> Result<Report, CliError> {
    let alpha: f64 = p.get("alpha", None)?;
    let beta: f64 = p.get("beta", None)?;
    let sigma = p.get::<SigmaSpec>("sigma", Some(SigmaSpec::OptTimes(1.0)))?.resolve(sigma_opt(alpha, beta));
    let n1: usize = p.get("n1", None)?;
    let target = target(p)?;
    let mut cfg = LpConfig::new(alpha, beta, sigma, n1)?.with_c(p.get("c", Some(1.0))?)?.with_target(target.clone());
    if p.raw("n2").is_some() {
        cfg = cfg.with_n2(p.get("n2", None)?)?;
    }
    let start = std::time::Instant::now();
    let domain = SectorDomain::new(beta)?;
    let approx = build_lp(&cfg, &domain)?;
    let sup_err = sup_error_refined(Exec::Parallel, &approx, &target, alpha, &domain, GridDensity::for_config(&cfg, &domain))?;
    let kind = target.singularity();
    let record = ConvergenceRecord {
        sigma,
        n1,
        n2: cfg.n2(),
        n: cfg.n(),
        sup_err,
        predicted_log_err: predicted_log_err(sigma, alpha, beta, kind, cfg.n()),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let records = zero_runtime(vec![record], timing(p)?);
    let tol: Option<f64> = p.raw("tol").map(|_| p.get("tol", None)).transpose()?;
    let pass = sup_err.is_finite() && tol.map_or(true, |t| sup_err <= t);
    Ok(Report {
        csv: write_csv(&records),
        artifacts: vec![("approx.txt".into(), write_rational(&approx))],
        summary: Summary {
            fitted_rate: Value::Null,
            predicted_rate: json!(predicted_log_rate(sigma, alpha, beta, kind).0),
            pass,
            details: json!({ "sup_err": sup_err, "n2": cfg.n2(), "poles": approx.poles.len() }),
        },
        failure: (!pass).then(|| format!("sup_err {sup_err:e} exceeds tol {}", tol.unwrap_or(f64::NAN))),
    })
}

fn one_or_many(values: Vec<f64>) -> Value {
    if values.len() == 1 {
        json!(values[0])
    } else {
        json!(values)
    }
}

pub fn sweep(p: &Params) -> Result<Report, CliError> {
    let alpha: f64 = p.get("alpha", None)?;
    let beta: f64 = p.get("beta", None)?;
    let so = sigma_opt(alpha, beta);
    let sigmas: Vec<f64> =
        p.list::<SigmaSpec>("sigma", Some(vec![SigmaSpec::OptTimes(1.0)]))?.into_iter().map(|s| s.resolve(so)).collect();
    let target = target(p)?;
    let spec = SweepSpec {
        alpha,
        beta,
        c: p.get("c", Some(1.0))?,
        sigmas: sigmas.clone(),
        n1s: p.list("n1", None)?,
        n2_rule: n2_rule(p)?,
        target: target.clone(),
    };
    let rate_tol: f64 = p.get("rate_tol", Some(0.15))?;
    let records = zero_runtime(run_sweep(&spec, Exec::Parallel)?, timing(p)?);
    let mut fitted = Vec::new();
    let mut predicted = Vec::new();
    let mut per_sigma = Vec::new();
    let mut failure = None;
    let mut sorted = sigmas.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    for &s in &sorted {
        let rows: Vec<ConvergenceRecord> = records.iter().filter(|r| r.sigma == s).copied().collect();
        let want = predicted_log_rate(s, alpha, beta, target.singularity()).0;
        let (rho, r2) = match fit_rate(&rows, FIT_FLOOR, FIT_CEILING) {
            Ok(f) => (f.slope, f.r2),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let ok = within(rho, want, rate_tol);
        if !ok && failure.is_none() {
            failure = Some(format!("sigma {s}: fitted rate {rho:.4} not within {rate_tol} of {want:.4}"));
        }
        fitted.push(rho);
        predicted.push(want);
        per_sigma.push(json!({ "sigma": s, "fitted_rate": rho, "predicted_rate": want, "r2": r2, "pass": ok }));
    }
    Ok(Report {
        csv: write_csv(&records),
        artifacts: Vec::new(),
        summary: Summary {
            fitted_rate: one_or_many(fitted),
            predicted_rate: one_or_many(predicted),
            pass: failure.is_none(),
            details: json!({ "per_sigma": per_sigma, "target": target.name() }),
        },
        failure,
    })
}

/// `a:b:step` (half-open) or a comma list.
fn count_list(p: &Params, key: &str, default: Vec<usize>) -> Result<Vec<usize>, CliError> {
    match p.raw(key) {
        Some(v) if v.contains(':') => {
            let parts: Vec<usize> = v
                .split(':')
                .map(|s| s.trim().parse().map_err(|_| CliError::Config(format!("{key}: bad range {v:?}"))))
                .collect::<Result<_, _>>()?;
            match parts.as_slice() {
                [a, b, step] if *step > 0 => Ok((*a..*b).step_by(*step).collect()),
                _ => Err(CliError::Config(format!("{key}: expected start:end:step, got {v:?}"))),
            }
        }
        _ => p.list(key, Some(default)),
    }
}

pub fn quaderr(p: &Params) -> Result<Report, CliError> {
    let alpha: f64 = p.get("alpha", Some(0.5))?;
    let beta: f64 = p.get("beta", None)?;
    let c: f64 = p.get("c", Some(1.0))?;
    let so = sigma_opt(alpha, beta);
    let sigmas: Vec<f64> =
        p.list::<SigmaSpec>("sigma", Some(vec![SigmaSpec::OptTimes(1.0)]))?.into_iter().map(|s| s.resolve(so)).collect();
    let kind = target(p)?.singularity();
    let nts = count_list(p, "nt", (4..400).step_by(12).collect())?;
    let grid = arc_grid(beta, p.get("n_arc", Some(33))?);
    let slope_tol: f64 = p.get("slope_tol", Some(0.2))?;
    let mut csv = String::from("sigma,T,N_t,sup_err\n");
    let mut fitted = Vec::new();
    let mut predicted = Vec::new();
    let mut failure = None;
    for &sigma in &sigmas {
        let h = (sigma * alpha).powi(2);
        let cfgs: Vec<KernelConfig> = nts.iter().filter_map(|&n| KernelConfig::new(alpha, c, h, n).ok()).collect();
        let rows = quad_error_curve(&cfgs, kind, &grid)?;
        for (cfg, (t, e)) in cfgs.iter().zip(&rows) {
            csv += &format!("{},{},{},{}\n", fmt_f64(sigma), fmt_f64(*t), cfg.n_t(), fmt_f64(*e));
        }
        let eta = so / sigma;
        let want = if eta >= 1.0 { 1.0 } else { eta * eta };
        let slope = quad_error_slope(&rows, FIT_FLOOR, FIT_CEILING).map(|f| f.slope).unwrap_or(f64::NAN);
        if !within(slope, want, slope_tol) && failure.is_none() {
            failure = Some(format!("sigma {sigma}: slope {slope:.4} not within {slope_tol} of {want:.4}"));
        }
        fitted.push(slope);
        predicted.push(want);
    }
    Ok(Report {
        csv,
        artifacts: Vec::new(),
        summary: Summary {
            fitted_rate: one_or_many(fitted),
            predicted_rate: one_or_many(predicted),
            pass: failure.is_none(),
            details: json!({ "sigmas": sigmas }),
        },
        failure,
    })
}

pub fn nearorigin(p: &Params) -> Result<Report, CliError> {
    let alpha: f64 = p.get("alpha", Some(0.5))?;
    let beta: f64 = p.get("beta", Some(1.0))?;
    let h: f64 = p.get("h", Some(PI * PI))?;
    let ts: Vec<f64> = p.list("t", Some(vec![5.0, 10.0, 15.0]))?;
    let mut csv = String::from("T,N_t,power_ratio,log_ratio\n");
    let mut power = Vec::new();
    let mut log = Vec::new();
    for &t in &ts {
        let cfg = KernelConfig::with_truncation(alpha, 1.0, h, t)?;
        let (a, b) = near_origin_check(&cfg, beta)?;
        csv += &format!("{},{},{},{}\n", fmt_f64(cfg.t()), cfg.n_t(), fmt_f64(a), fmt_f64(b));
        power.push(a);
        log.push(b);
    }
    let spread = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
    let (sp, sl) = (spread(&power), spread(&log));
    let pass = sp < 10.0 && sl < 10.0;
    Ok(Report {
        csv,
        artifacts: Vec::new(),
        summary: Summary {
            fitted_rate: Value::Null,
            predicted_rate: Value::Null,
            pass,
            details: json!({ "power_spread": sp, "log_spread": sl }),
        },
        failure: (!pass).then(|| format!("ratio spread {sp:.3} (power), {sl:.3} (log) not below 10")),
    })
}

/// Boundary data sampled from a file, interpolated linearly along the
/// nearest segment between consecutive samples (cyclically).
struct Tabulated(Vec<(Complex64, f64)>);

impl Tabulated {
    fn eval(&self, z: Complex64) -> f64 {
        let s = &self.0;
        let n = s.len();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..n {
            let (a, fa) = s[i];
            let (b, fb) = s[(i + 1) % n];
            let d = b - a;
            let t = if d.norm_sqr() > 0.0 { (((z - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0) } else { 0.0 };
            let dist = (a + d * t - z).norm();
            if dist < best.0 {
                best = (dist, fa + t * (fb - fa));
            }
        }
        best.1
    }
}

enum Data {
    Re2,
    ReZ,
    Const1,
    Table(Tabulated),
}

impl Data {
    fn parse(selector: &str, base: &Path) -> Result<Self, CliError> {
        Ok(match selector {
            "re2" => Data::Re2,
            "rez" => Data::ReZ,
            "const1" => Data::Const1,
            path => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| CliError::Config(format!("data must be re2, rez, const1 or a samples file ({}: {e})", full.display())))?;
                let samples = parse_samples(&text)?;
                if samples.len() < 2 {
                    return Err(CliError::Config("samples file needs at least two rows".into()));
                }
                Data::Table(Tabulated(samples))
            }
        })
    }

    fn eval(&self, z: Complex64) -> f64 {
        match self {
            Data::Re2 => z.re * z.re,
            Data::ReZ => z.re,
            Data::Const1 => 1.0,
            Data::Table(t) => t.eval(z),
        }
    }
}

pub fn laplace(p: &Params) -> Result<Report, CliError> {
    let path = p.raw("polygon").ok_or_else(|| CliError::Config("missing required parameter `polygon`".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read polygon {path}: {e}")))?;
    let polygon: Polygon = parse_polygon(&text)?;
    let data = Data::parse(p.raw("data").unwrap_or("re2"), Path::new("."))?;
    let corners = polygon.corners();
    let beta_max = corners.iter().map(|c| c.beta).fold(0.0, f64::max);
    let alpha_min = corners.iter().map(|c| c.alpha).fold(f64::INFINITY, f64::min);
    let global = corner_sigma(alpha_min, beta_max);
    let sigma_raw = p.raw("sigma").unwrap_or("opt");
    let mode = match sigma_raw {
        "opt" => SigmaMode::GlobalOpt,
        "percorner" => SigmaMode::PerCorner,
        _ => SigmaMode::Fixed(p.get::<SigmaSpec>("sigma", None)?.resolve(global)),
    };
    let weighting = match p.raw("weighting").unwrap_or("uniform") {
        "uniform" => Weighting::Uniform,
        "sqrt-spacing" | "sqrt_spacing" => Weighting::SqrtSpacing,
        other => return Err(CliError::Config(format!("weighting must be uniform or sqrt-spacing, got {other:?}"))),
    };
    let ns: Vec<usize> = p.list("n", None)?;
    let tol: f64 = p.get("tol", Some(1e-6))?;
    let keep_time = timing(p)?;
    let mut records = Vec::new();
    let mut last = None;
    for &n in &ns {
        let start = std::time::Instant::now();
        let basis = plan_basis(&polygon, n, mode)?;
        let sol = solve_dirichlet_with(Exec::Parallel, weighting, &polygon, |z| data.eval(z), &basis)?;
        let err = boundary_error(&sol, &polygon, |z| data.eval(z), 4)?;
        let sigma = basis.corners[0].sigma;
        records.push(ConvergenceRecord {
            sigma,
            n1: basis.n_poles(),
            n2: basis.n2,
            n: basis.n_poles() + basis.n2,
            sup_err: err,
            predicted_log_err: predicted_log_err(sigma, alpha_min, beta_max, Singularity::Power, basis.n_poles() / corners.len()),
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        last = Some(sol);
    }
    let records = zero_runtime(records, keep_time);
    let errs: Vec<f64> = records.iter().map(|r| r.sup_err).collect();
    let xs: Vec<f64> = records.iter().map(|r| (r.n1 as f64).sqrt()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| -e.ln()).collect();
    let fit = (xs.len() >= 2).then(|| fit_line(&xs, &ys));
    let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
    let final_err = errs.last().copied().unwrap_or(f64::NAN);
    let failure = if !(final_err <= tol) {
        Some(format!("final boundary error {final_err:e} exceeds {tol:e}"))
    } else if !monotone {
        Some(format!("boundary errors not monotone: {errs:?}"))
    } else {
        None
    };
    let mut artifacts = Vec::new();
    if let (Some(sol), Some(&n)) = (last, ns.last()) {
        artifacts.push((format!("solution_N{n}.txt"), write_harmonic(&sol)));
    }
    let sigma = records.first().map_or(global, |r| r.sigma);
    Ok(Report {
        csv: write_csv(&records),
        artifacts,
        summary: Summary {
            fitted_rate: fit.map_or(Value::Null, |f| json!(f.slope)),
            // Poles are split evenly over the corners, so each sees N/m of them.
            predicted_rate: json!(
                predicted_log_rate(sigma, alpha_min, beta_max, Singularity::Power).0 / (corners.len() as f64).sqrt()
            ),
            pass: failure.is_none(),
            details: json!({ "errors": errs, "r2": fit.map(|f| f.r2), "sigma": sigma }),
        },
        failure,
    })
}

pub fn decomp(p: &Params) -> Result<Report, CliError> {
    let k: u32 = p.get("k", Some(0))?;
    let alpha: f64 = p.get("alpha", None)?;
    let w: f64 = p.get("w", Some(1.0))?;
    let tol: f64 = p.get("tol", Some(1e-6))?;
    let (e0, e1) = singular_coefficient_check(k, alpha, w)?;
    let p0 = p0(alpha);
    let csv = format!(
        "k,alpha,W,P0_re,P0_im,p0_err,p1_err\n{k},{},{},{},{},{},{}\n",
        fmt_f64(alpha),
        fmt_f64(w),
        fmt_f64(p0.re),
        fmt_f64(p0.im),
        fmt_f64(e0),
        fmt_f64(e1)
    );
    let pass = e0 <= tol && e1 <= tol;
    Ok(Report {
        csv,
        artifacts: Vec::new(),
        summary: Summary {
            fitted_rate: Value::Null,
            predicted_rate: Value::Null,
            pass,
            details: json!({ "P0": [p0.re, p0.im], "p0_err": e0, "p1_err": e1 }),
        },
        failure: (!pass).then(|| format!("jump discrepancies {e0:e}, {e1:e} exceed {tol:e}")),
    })
}
