//! Cutoff-and-reflection extension of functions on `(0, R)` to compactly supported
//! functions on `(0, L)`, with weighted Sobolev norms of both sides.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{build_grid, GridFunction, SpacingLaw};
use crate::operators::{derivative_with, DEFAULT_ACCURACY};
use crate::series;

/// Smooth step `η` with `η = 1` on `[0, R/4]` and `η = 0` on `[3R/4, ∞)`.
#[derive(Clone, Debug, Serialize)]
pub struct CutoffProfile {
    pub r: f64,
    pub plateau_end: f64,
    pub decay_end: f64,
    /// `max |η^{(j)}|` for `j = 0..=m`, sampled on the transition
    pub derivative_bounds: Vec<f64>,
}

/// `η(x) = f(1−x)/(f(1−x)+f(x))` with `f(x) = e^{−1/x}` and `x = (r − R/4)/(R/2)`.
pub fn build_cutoff(r: f64, m: u32) -> Result<CutoffProfile> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("cutoff radius {r} must be positive and finite")));
    }
    let mut profile = CutoffProfile { r, plateau_end: 0.25 * r, decay_end: 0.75 * r, derivative_bounds: vec![] };
    let order = m as usize;
    let mut bounds = vec![0.0f64; order + 1];
    let samples = 2000;
    for k in 0..=samples {
        let s = profile.plateau_end + (profile.decay_end - profile.plateau_end) * k as f64 / samples as f64;
        for (b, d) in bounds.iter_mut().zip(profile.derivatives(s, order)) {
            *b = b.max(d.abs());
        }
    }
    profile.derivative_bounds = bounds;
    Ok(profile)
}

/// Taylor coefficients of `e^{−1/x}` at `x0 > 0`.
fn flat_series(x0: f64, len: usize) -> Vec<f64> {
    if x0 <= 0.0 {
        return vec![0.0; len];
    }
    let inv = series::powf(&[x0, 1.0], -1.0, len);
    let neg: Vec<f64> = inv.iter().map(|v| -v).collect();
    series::exp(&neg, len)
}

impl CutoffProfile {
    pub fn eval(&self, r: f64) -> f64 {
        self.derivatives(r, 0)[0]
    }

    /// `η^{(j)}(r)` for `j = 0..=order`.
    pub fn derivatives(&self, r: f64, order: usize) -> Vec<f64> {
        let len = order + 1;
        let mut out = vec![0.0; len];
        if r <= self.plateau_end {
            out[0] = 1.0;
            return out;
        }
        if r >= self.decay_end {
            return out;
        }
        let width = self.decay_end - self.plateau_end;
        let x = (r - self.plateau_end) / width;
        // series in δ = x − x0; f(1−x) has series coefficients alternating in sign
        let a: Vec<f64> = flat_series(1.0 - x, len)
            .iter()
            .enumerate()
            .map(|(k, v)| if k % 2 == 0 { *v } else { -v })
            .collect();
        let b = flat_series(x, len);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        let eta = series::mul(&a, &series::powf(&sum, -1.0, len), len);
        let mut fact = 1.0;
        for (j, c) in eta.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            out[j] = c * fact / width.powi(j as i32);
        }
        out
    }
}

/// Result of [`extend`]: the extended function with the pieces needed for norms.
#[derive(Clone, Debug)]
pub struct Extension {
    pub function: GridFunction,
    pub cutoff: CutoffProfile,
    /// `true` when an infinite `L` was truncated to `4R`
    pub truncated: bool,
}

/// `Tu = u` on `(0, R)`, `Tu(r) = (1 − η(2R − r)) u(2R − r)` on `[R, 7R/4]`, and `0`
/// beyond, sampled on a uniform grid with the spacing `R/n` of the input.
///
/// For a uniform input grid every output node below `R` and every reflected point is an
/// input node, so (a) and (b) hold exactly; otherwise the input is interpolated.
pub fn extend(u: &GridFunction, l: f64) -> Result<Extension> {
    let r = u.grid().r_max();
    if u.grid().is_infinite() {
        return Err(Error::InvalidArgument("extension needs a finite source domain".into()));
    }
    if !(l > 2.0 * r) {
        return Err(Error::InvalidArgument(format!("L = {l} must exceed 2R = {}", 2.0 * r)));
    }
    let truncated = l.is_infinite();
    let l = if truncated { 4.0 * r } else { l };
    let h = r / u.grid().n() as f64;
    let n_out = (l / h - 1e-9).ceil() as usize;
    let grid = Arc::new(build_grid(n_out as f64 * h, n_out, SpacingLaw::Uniform)?);
    let cutoff = build_cutoff(r, 0)?;
    let (t, v) = u.knots();
    let nodes = u.grid().nodes();
    let source = |x: f64| {
        let k = nodes.partition_point(|&y| y < x);
        for j in [k.saturating_sub(1), k] {
            if j < nodes.len() && (nodes[j] - x).abs() <= 1e-9 * h {
                return u.values()[j];
            }
        }
        u.eval_with_knots(&t, &v, x)
    };
    let values = grid
        .nodes()
        .iter()
        .map(|&x| {
            if x < r {
                source(x)
            } else if x <= 1.75 * r {
                let s = 2.0 * r - x;
                (1.0 - cutoff.eval(s)) * source(s)
            } else {
                0.0
            }
        })
        .collect();
    Ok(Extension { function: GridFunction::new(grid, values)?, cutoff, truncated })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weight exponents `β_j = α − (m−j)p`, `j = 0..=m`.
pub fn chain_weights(m: u32, p: f64, alpha: f64) -> Vec<f64> {
    (0..=m).map(|j| alpha - (m - j) as f64 * p).collect()
}

fn check_weights(betas: &[f64]) -> Result<()> {
    match betas.iter().find(|b| !(**b > -1.0)) {
        Some(b) => Err(Error::WeightExponent(*b)),
        None => Ok(()),
    }
}

/// `Σ_j ‖u^{(j)}‖_{L^p_{β_j}(0,R)}` with `β_j = α − (m−j)p`.
pub fn sobolev_norm(u: &GridFunction, m: u32, p: f64, alpha: f64) -> Result<f64> {
    let betas = chain_weights(m, p, alpha);
    check_weights(&betas)?;
    let w = u.grid().weights();
    let nodes = u.grid().nodes();
    let mut total = 0.0;
    for (j, beta) in betas.iter().enumerate() {
        let d = derivative_with(u, j, DEFAULT_ACCURACY)?;
        let s: f64 = d
            .values()
            .iter()
            .zip(&w)
            .zip(nodes)
            .map(|((v, w), r)| w * v.abs().powf(p) * r.powf(*beta))
            .sum();
        total += s.powf(1.0 / p);
    }
    Ok(total)
}

/// `Σ_j ‖(Tu)^{(j)}‖_{L^p_{β_j}(0,L)}`, integrating the reflected branch piecewise in the
/// source variable `s = 2R − r`; `Tu` is only continuous across `r = R`.
pub fn extension_norm(u: &GridFunction, m: u32, p: f64, alpha: f64) -> Result<f64> {
    let betas = chain_weights(m, p, alpha);
    check_weights(&betas)?;
    let grid = u.grid();
    let r = grid.r_max();
    let cutoff = build_cutoff(r, m)?;
    let g = u.with_values(
        grid.nodes().iter().zip(u.values()).map(|(&s, v)| (1.0 - cutoff.eval(s)) * v).collect(),
    );
    let w = grid.weights();
    let nodes = grid.nodes();
    let mut total = 0.0;
    for (j, beta) in betas.iter().enumerate() {
        let du = derivative_with(u, j, DEFAULT_ACCURACY)?;
        let dg = derivative_with(&g, j, DEFAULT_ACCURACY)?;
        let mut s = 0.0;
        for k in 0..nodes.len() {
            s += w[k] * du.values()[k].abs().powf(p) * nodes[k].powf(*beta);
            s += w[k] * dg.values()[k].abs().powf(p) * (2.0 * r - nodes[k]).powf(*beta);
        }
        total += s.powf(1.0 / p);
    }
    Ok(total)
}

/// `(Tu)^{(l)}(x)` for `x ∈ (R, 2R)` by the Leibniz rule
/// `(−1)^l Σ_j C(l,j) (1−η)^{(j)}(s) u^{(l−j)}(s)` at `s = 2R − x`.
pub fn reflected_derivative(u: &GridFunction, l: usize, x: f64) -> Result<f64> {
    let r = u.grid().r_max();
    if !(x > r && x < 2.0 * r) {
        return Err(Error::InvalidArgument(format!("{x} is outside the reflected branch ({r}, {})", 2.0 * r)));
    }
    let s = 2.0 * r - x;
    let cutoff = build_cutoff(r, l as u32)?;
    let eta = cutoff.derivatives(s, l);
    let mut sum = 0.0;
    for j in 0..=l {
        let one_minus = if j == 0 { 1.0 - eta[0] } else { -eta[j] };
        if one_minus == 0.0 {
            continue;
        }
        let du = derivative_with(u, l - j, DEFAULT_ACCURACY)?;
        sum += binomial(l, j) * one_minus * du.eval_at(s);
    }
    Ok(if l % 2 == 0 { sum } else { -sum })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source(n: usize) -> GridFunction {
        let grid = Arc::new(build_grid(1.0, n, SpacingLaw::Uniform).unwrap());
        GridFunction::from_fn(grid, |r| (2.0 * r).cos() + r * r)
    }

    #[test]
    fn cutoff_plateaus() {
        let c = build_cutoff(2.0, 3).unwrap();
        assert_eq!(c.eval(0.25), 1.0);
        assert_eq!(c.eval(2.0), 0.0);
        assert!((c.eval(1.0) - 0.5).abs() < 1e-15);
        assert!(c.derivative_bounds.iter().all(|b| b.is_finite()));
        assert_eq!(c.derivative_bounds[0], 1.0);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = c.eval(0.5 + k as f64 / 100.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn cutoff_derivatives_match_differences() {
        let c = build_cutoff(1.0, 2).unwrap();
        let h = 1e-5;
        for r in [0.3, 0.45, 0.5, 0.6, 0.7] {
            let d = c.derivatives(r, 2);
            let fd = (c.eval(r + h) - c.eval(r - h)) / (2.0 * h);
            assert!((d[1] - fd).abs() < 1e-6 * d[1].abs().max(1.0), "{r}");
            let fd2 = (c.eval(r + h) - 2.0 * c.eval(r) + c.eval(r - h)) / (h * h);
            assert!((d[2] - fd2).abs() < 1e-3 * d[2].abs().max(1.0), "{r}");
        }
    }

    #[test]
    fn identity_and_support() {
        let u = source(200);
        let t = extend(&u, 3.0).unwrap().function;
        assert_eq!(t.grid().n(), 600);
        for (k, v) in u.values().iter().enumerate() {
            assert_eq!(t.values()[k], *v);
        }
        for (r, v) in t.grid().nodes().iter().zip(t.values()) {
            if *r >= 1.75 {
                assert_eq!(*v, 0.0);
            }
        }
        let near = extend(&u, f64::INFINITY).unwrap();
        assert!(near.truncated);
        assert!(extend(&u, 2.0).is_err());
    }

    #[test]
    fn leibniz_matches_stencils() {
        let u = source(400);
        let t = extend(&u, 3.0).unwrap().function;
        for l in 0..=2 {
            let d = derivative_with(&t, l, DEFAULT_ACCURACY).unwrap();
            for (k, &x) in t.grid().nodes().iter().enumerate() {
                if x > 1.1 && x < 1.9 {
                    let lb = reflected_derivative(&u, l, x).unwrap();
                    assert!((lb - d.values()[k]).abs() < 1e-5 * lb.abs().max(1.0), "l={l} x={x}");
                }
            }
        }
    }

    #[test]
    fn norm_ratio_is_bounded() {
        let u = source(400);
        let a = sobolev_norm(&u, 2, 2.0, 5.0).unwrap();
        let b = extension_norm(&u, 2, 2.0, 5.0).unwrap();
        assert!(b > a && b / a < 100.0, "{a} {b}");
        assert!(sobolev_norm(&u, 2, 2.0, 2.0).is_err());
    }
}
