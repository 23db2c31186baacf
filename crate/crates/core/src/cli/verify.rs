//! The invariant suite behind `radsob verify`.

use std::sync::Arc;

use serde::Serialize;

use crate::corpus::{bump_corpus, decaying_corpus, interval_corpus};
use crate::error::Result;
use crate::extension::{extend, extension_norm, sobolev_norm};
use crate::extremal::{
    default_initial, dilate, el_residual, fix_gauge, mass_profile, minimize_rayleigh, shoot_el,
    MinimizeOptions,
};
use crate::mesh::{build_grid, Edge, GridFunction, RadialGrid, SpacingLaw};
use crate::norms::{
    gradient_energy, hardy_constants, hardy_constants_with_exponent, rayleigh_quotient,
    weighted_integral, weighted_norm, HardySide,
};
use crate::operators::{apply_expansion, expansion_coefficients, m_gradient, Parity, ProblemParams};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn classical() -> ProblemParams {
    ProblemParams::new(1, 2.0, 3.0, 3.0, f64::INFINITY).expect("valid parameters")
}

fn mapped(n: usize) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(build_grid(f64::INFINITY, n, SpacingLaw::Algebraic { scale: 1.0, power: 2.0 })?))
}

fn sample(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::from_fn(grid.clone(), f).with_edge(Edge::Dirichlet)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn linearity(seed: u64) -> Result<(bool, String)> {
    let grid = Arc::new(build_grid(10.0, 400, SpacingLaw::Uniform)?);
    let p = ProblemParams::new(2, 2.0, 5.0, 5.0, f64::INFINITY)?;
    let fs = decaying_corpus(seed, 2, &p);
    let u = GridFunction::from_fn(grid.clone(), |r| fs[0].eval(r));
    let v = GridFunction::from_fn(grid.clone(), |r| fs[1].eval(r));
    let (a, b) = (1.5, -0.75);
    let lhs = m_gradient(&u.combine(a, &v, b)?, 2, 5.0)?;
    let gu = m_gradient(&u, 2, 5.0)?;
    let gv = m_gradient(&v, 2, 5.0)?;
    let scale = lhs.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = (0..lhs.len())
        .map(|k| (lhs.values()[k] - a * gu.values()[k] - b * gv.values()[k]).abs())
        .fold(0.0, f64::max)
        / scale;
    Ok((err < 1e-10, format!("max deviation {err:.2e} of scale")))
}

fn positivity(seed: u64) -> Result<(bool, String)> {
    let grid = mapped(400)?;
    let p = classical();
    let mut low = f64::INFINITY;
    for f in decaying_corpus(seed, 10, &p) {
        let u = sample(&grid, |r| -f.eval(r));
        low = low.min(weighted_norm(&u, 4.0, 3.0)?).min(gradient_energy(&u, &p)?);
    }
    let zero = weighted_norm(&GridFunction::zeros(grid), 4.0, 3.0)?;
    Ok((low > 0.0 && zero == 0.0, format!("smallest norm {low:.3e}, zero function {zero}")))
}

fn expansion() -> Result<(bool, String)> {
    let grid = Arc::new(build_grid(1.0, 32, SpacingLaw::Uniform)?);
    let u = GridFunction::from_fn(grid.clone(), |r| 1.0 + r * r + 0.5 * r.powi(4) + 0.1 * r.powi(6));
    let mut worst = 0.0f64;
    for k in 1..=2u32 {
        for alpha in [2.5, 3.0, 7.0] {
            let c = expansion_coefficients(k, alpha, Parity::Even)?;
            let a = apply_expansion(&u, &c)?;
            let b = m_gradient(&u, 2 * k, alpha)?;
            for i in 3..grid.n() - 3 {
                worst = worst.max(rel(a.values()[i], b.values()[i]));
            }
        }
    }
    Ok((worst < 1e-8, format!("max relative difference {worst:.2e}")))
}

fn dilation(seed: u64) -> Result<(bool, String)> {
    let grid = mapped(800)?;
    let p = classical();
    let q = p.p_star().expect("Sobolev");
    let mut worst = 0.0f64;
    for f in decaying_corpus(seed, 5, &p) {
        let u = sample(&grid, |r| f.eval(r));
        let (e0, m0) = (gradient_energy(&u, &p)?, weighted_integral(&u, q, p.theta)?);
        for eps in [0.1, 10.0] {
            let v = dilate(&u, eps, &p)?;
            worst = worst.max(rel(gradient_energy(&v, &p)?, e0)).max(rel(weighted_integral(&v, q, p.theta)?, m0));
        }
    }
    Ok((worst < 1e-8, format!("max relative change {worst:.2e}")))
}

fn gauge(seed: u64) -> Result<(bool, String)> {
    let grid = mapped(800)?;
    let p = classical();
    let (mut qe, mut me) = (0.0f64, 0.0f64);
    for f in decaying_corpus(seed, 10, &p) {
        let u = sample(&grid, |r| f.eval(r));
        let g = fix_gauge(&u, &p)?;
        let prof = mass_profile(&g, &p)?;
        me = me.max((prof.at(1.0) / prof.total - 0.5).abs());
        qe = qe.max(rel(rayleigh_quotient(&g, &p)?, rayleigh_quotient(&u, &p)?));
    }
    Ok((me < 1e-8 && qe < 1e-8, format!("|Q(1) − 1/2| ≤ {me:.2e}, quotient change {qe:.2e}")))
}

fn hardy() -> Result<(bool, String)> {
    let r = hardy_constants(1, 2.0, 3.0, 3.0, HardySide::Right, f64::INFINITY)?;
    let b = r.closed_form_bound_m0.unwrap_or(f64::NAN);
    let ok = r.finite && r.a_m0 <= b + 1e-3 && r.a_m1 <= r.closed_form_bound_m1.unwrap_or(f64::NAN) + 1e-3;
    let d = hardy_constants_with_exponent(1, 2.0, 3.0, 0.5, HardySide::Right, f64::INFINITY, 2.0)?;
    Ok((
        ok && !d.finite,
        format!("A_10 = {:.6}, A_11 = {:.6}, bound {b:.6}; θ < γ−mp finite = {}", r.a_m0, r.a_m1, d.finite),
    ))
}

fn extension(seed: u64) -> Result<(bool, String)> {
    let grid = Arc::new(build_grid(1.0, 200, SpacingLaw::Uniform)?);
    let mut exact = true;
    let mut worst = 0.0f64;
    for f in interval_corpus(seed, 10, 1.0) {
        let u = GridFunction::from_fn(grid.clone(), |r| f.eval(r));
        let t = extend(&u, 3.0)?.function;
        exact &= u.values().iter().enumerate().all(|(k, v)| t.values()[k] == *v);
        exact &= t.grid().nodes().iter().zip(t.values()).all(|(r, v)| *r < 2.0 || *v == 0.0);
        worst = worst.max(extension_norm(&u, 1, 2.0, 3.0)? / sobolev_norm(&u, 1, 2.0, 3.0)?);
    }
    Ok((exact && worst.is_finite(), format!("identity and support exact = {exact}, max ratio {worst:.4}")))
}

fn extremal(seed: u64) -> Result<Vec<(&'static str, bool, String)>> {
    let grid = mapped(400)?;
    let p = classical();
    let res = minimize_rayleigh(&p, &default_initial(&grid, &p), &MinimizeOptions::default())?;
    let s = res.s_estimate;
    let shot = shoot_el(&p, 1.0)?.s_implied;
    let q = p.p_star().expect("Sobolev");
    let lag = (q * res.lagrange_multiplier - 2.0 * s).abs() / s;
    let z = res.rescaled_profile();
    let zr = el_residual(&z, 1.0, &p)? / el_residual(&z, 0.0, &p)?;
    let mut low = f64::INFINITY;
    for f in bump_corpus(seed, 25, 10.0).into_iter().chain(decaying_corpus(seed, 25, &p)) {
        low = low.min(rayleigh_quotient(&sample(&grid, |r| f.eval(r)), &p)? / s);
    }
    Ok(vec![
        ("minimizer convergence", res.converged, format!("S = {s:.12}, {} iterations", res.iterations)),
        ("two-method agreement", rel(s, shot) < 1e-3, format!("shooting S = {shot:.12}, relative {:.2e}", rel(s, shot))),
        ("lagrange identity", res.converged && lag < 1e-3 && zr < 1e-6, format!("|2*λ − 2S|/S = {lag:.2e}, z_S residual {zr:.2e}")),
        ("sobolev witness", low >= 0.999, format!("smallest Q/S over 50 functions {low:.6}")),
    ])
}

/// Runs every check; an error inside a check counts as a failure of that check.
pub fn run_suite(seed: u64) -> Vec<CheckResult> {
    let single: Vec<(&str, Box<dyn Fn() -> Result<(bool, String)> + Sync>)> = vec![
        ("operator linearity", Box::new(move || linearity(seed))),
        ("norm positivity", Box::new(move || positivity(seed))),
        ("expansion equivalence", Box::new(expansion)),
        ("dilation invariance", Box::new(move || dilation(seed))),
        ("gauge mechanics", Box::new(move || gauge(seed))),
        ("hardy bounds", Box::new(hardy)),
        ("extension properties", Box::new(move || extension(seed))),
    ];
    let mut out: Vec<CheckResult> = single
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = f().unwrap_or_else(|e| (false, e.to_string()));
            CheckResult { name: name.to_string(), passed, detail }
        })
        .collect();
    match extremal(seed) {
        Ok(rows) => out.extend(rows.into_iter().map(|(n, passed, detail)| CheckResult {
            name: n.into(),
            passed,
            detail,
        })),
        Err(e) => out.push(CheckResult { name: "extremal".into(), passed: false, detail: e.to_string() }),
    }
    out
}
