//! Plain-text formats: rational approximations, Laplace solutions, polygon
//! files and convergence CSV.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::analysis::ConvergenceRecord;
use crate::corners::HarmonicSolution;
use crate::error::{Error, Result};
use crate::geometry::{AlphaSpec, Edge, Polygon};
use crate::lp::RationalApprox;

/// Shortest-exact scientific form with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| parse_err(line, format!("bad number {tok:?}")))
}

fn parse_pair(toks: &[&str], line: usize) -> Result<Complex64> {
    match toks {
        [re, im] => Ok(Complex64::new(parse_num(re, line)?, parse_num(im, line)?)),
        _ => Err(parse_err(line, "expected two numbers")),
    }
}

fn push_complex(out: &mut String, tag: &str, z: Complex64) {
    let _ = writeln!(out, "{tag} {} {}", fmt_f64(z.re), fmt_f64(z.im));
}

fn push_tail(out: &mut String, tail: &[Complex64]) {
    out.push_str("tail");
    for c in tail {
        let _ = write!(out, " {} {}", fmt_f64(c.re), fmt_f64(c.im));
    }
    out.push('\n');
}

pub fn write_rational(approx: &RationalApprox) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scale {}", fmt_f64(approx.basis_scale));
    for (p, r) in approx.poles.iter().zip(&approx.residues) {
        push_complex(&mut out, "pole", *p);
        push_complex(&mut out, "residue", *r);
    }
    push_tail(&mut out, &approx.tail_coeffs);
    out
}

pub fn parse_rational(text: &str) -> Result<RationalApprox> {
    let mut scale = None;
    let mut poles = Vec::new();
    let mut residues = Vec::new();
    let mut tail = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            [t, ..] if t.starts_with('#') => {}
            ["scale", s] => scale = Some(parse_num(s, line)?),
            ["pole", rest @ ..] => poles.push(parse_pair(rest, line)?),
            ["residue", rest @ ..] => residues.push(parse_pair(rest, line)?),
            ["tail", rest @ ..] => {
                if rest.len() % 2 != 0 {
                    return Err(parse_err(line, "tail needs re/im pairs"));
                }
                let t = rest.chunks(2).map(|p| parse_pair(p, line)).collect::<Result<Vec<_>>>()?;
                tail = Some(t);
            }
            [tag, ..] => return Err(parse_err(line, format!("unknown record {tag:?}"))),
        }
    }
    let scale = scale.ok_or_else(|| parse_err(0, "missing scale"))?;
    RationalApprox::new(poles, residues, tail.unwrap_or_default(), scale)
}

/// Complex-form listing of a Laplace solution, one `corner k` group per vertex.
pub fn write_harmonic(sol: &HarmonicSolution) -> String {
    let (groups, tail) = sol.complex_form();
    let b = &sol.basis;
    let mut out = String::new();
    let _ = writeln!(out, "scale {}", fmt_f64(b.scale));
    push_complex(&mut out, "center", b.center);
    for (k, g) in groups.iter().enumerate() {
        let _ = writeln!(out, "corner {}", k + 1);
        for (p, r) in g {
            push_complex(&mut out, "pole", *p);
            push_complex(&mut out, "residue", *r);
        }
    }
    push_tail(&mut out, &tail);
    out
}

/// Parse a polygon file: `re im [beta=v] [alpha=v|auto]` per vertex,
/// `curve <edge> quad cre cim` or `curve <edge> cubic c1re c1im c2re c2im`
/// for curved edges (1-based), `#` comments.
pub fn parse_polygon(text: &str) -> Result<Polygon> {
    let mut vertices = Vec::new();
    let mut declared_beta: Vec<Option<(f64, usize)>> = Vec::new();
    let mut alphas: Vec<Option<AlphaSpec>> = Vec::new();
    let mut curves: Vec<(usize, Edge, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["curve", id, kind, rest @ ..] => {
                let id: usize = id.parse().map_err(|_| parse_err(line, "bad curve id"))?;
                if id == 0 {
                    return Err(parse_err(line, "curve ids are 1-based"));
                }
                let nums = rest.iter().map(|t| parse_num(t, line)).collect::<Result<Vec<_>>>()?;
                let edge = match (*kind, nums.as_slice()) {
                    ("quad", [a, b]) => Edge::QuadraticBezier { control: Complex64::new(*a, *b) },
                    ("cubic", [a, b, c, d]) => Edge::CubicBezier { c1: Complex64::new(*a, *b), c2: Complex64::new(*c, *d) },
                    _ => return Err(parse_err(line, "expected `quad x y` or `cubic x1 y1 x2 y2`")),
                };
                curves.push((id - 1, edge, line));
            }
            [re, im, opts @ ..] => {
                vertices.push(Complex64::new(parse_num(re, line)?, parse_num(im, line)?));
                let mut beta = None;
                let mut alpha = None;
                for opt in opts {
                    match opt.split_once('=') {
                        Some(("beta", v)) => beta = Some((parse_num(v, line)?, line)),
                        Some(("alpha", "auto")) => alpha = Some(AlphaSpec::Auto),
                        Some(("alpha", v)) => alpha = Some(AlphaSpec::Value(parse_num(v, line)?)),
                        _ => return Err(parse_err(line, format!("unknown option {opt:?}"))),
                    }
                }
                declared_beta.push(beta);
                alphas.push(alpha);
            }
            _ => return Err(parse_err(line, "expected `re im` or a curve declaration")),
        }
    }
    let mut edges = vec![Edge::Straight; vertices.len()];
    for (id, edge, line) in curves {
        if id >= edges.len() {
            return Err(parse_err(line, format!("curve id {} exceeds vertex count", id + 1)));
        }
        edges[id] = edge;
    }
    let mut poly = Polygon::with_edges(vertices, edges)?;
    for (k, spec) in alphas.into_iter().enumerate() {
        if let Some(spec) = spec {
            poly = poly.with_alpha(k, spec)?;
        }
    }
    for (k, decl) in declared_beta.into_iter().enumerate() {
        if let Some((b, line)) = decl {
            let actual = poly.corners()[k].beta;
            if (b - actual).abs() > 1e-6 {
                return Err(parse_err(line, format!("declared beta {b} but the corner has {actual}")));
            }
        }
    }
    Ok(poly)
}

pub const CSV_HEADER: &str = "sigma,N1,N2,N,sup_err,predicted_log_err,runtime_ms";

pub fn write_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.sigma),
            r.n1,
            r.n2,
            r.n,
            fmt_f64(r.sup_err),
            fmt_f64(r.predicted_log_err),
            fmt_f64(r.runtime_ms)
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(parse_err(1, "missing CSV header")),
    }
    let mut out = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.split(',').collect();
        if f.len() != 7 {
            return Err(parse_err(line, "expected 7 fields"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err(line, format!("bad integer {s:?}")));
        out.push(ConvergenceRecord {
            sigma: parse_num(f[0], line)?,
            n1: int(f[1])?,
            n2: int(f[2])?,
            n: int(f[3])?,
            sup_err: parse_num(f[4], line)?,
            predicted_log_err: parse_num(f[5], line)?,
            runtime_ms: parse_num(f[6], line)?,
        });
    }
    Ok(out)
}

/// Boundary samples `re im value`, one per line.
pub fn parse_samples(text: &str) -> Result<Vec<(Complex64, f64)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            [re, im, v] => out.push((Complex64::new(parse_num(re, line)?, parse_num(im, line)?), parse_num(v, line)?)),
            _ => return Err(parse_err(line, "expected `re im value`")),
        }
    }
    Ok(out)
}
