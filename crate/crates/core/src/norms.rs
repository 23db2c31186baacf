//! Weighted norms, Rayleigh quotients, critical exponents, regime classification and
//! numerical Hardy constants.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{build_grid_gauss, extent, integrate, Edge, GridFunction, SpacingLaw};
use crate::operators::{GradientOperator, ProblemParams, DEFAULT_ACCURACY};

/// `p* = (θ+1)p/(α−mp+1)`.
pub fn critical_exponent(params: &ProblemParams) -> Result<f64> {
    params.require_sobolev()
}

fn tail_integral(value: f64, decay: f64, r_max: f64, q: f64, gamma: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    let e = decay * q - gamma - 1.0;
    if e <= 0.0 {
        return f64::INFINITY;
    }
    value.abs().powf(q) * r_max.powf(gamma + 1.0) / e
}

/// `(∫ |u|^q r^γ dr)^{1/q}`, including the exterior of a tail edge.
pub fn weighted_norm(u: &GridFunction, q: f64, gamma: f64) -> Result<f64> {
    Ok(weighted_integral(u, q, gamma)?.powf(1.0 / q))
}

/// `∫ |u|^q r^γ dr`.
pub fn weighted_integral(u: &GridFunction, q: f64, gamma: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("norm exponent {q} < 1")));
    }
    let powered = u.with_values(u.values().iter().map(|v| v.abs().powf(q)).collect());
    let mut s = integrate(&powered, gamma)?;
    if let Edge::Tail { value, decay } = u.edge() {
        s += tail_integral(value, decay, u.grid().r_max(), q, gamma);
    }
    Ok(s)
}

/// Unknown vector for a function: nodal values, then the tail value if present.
pub(crate) fn unknowns(u: &GridFunction) -> Vec<f64> {
    let mut x = u.values().to_vec();
    if let Edge::Tail { value, .. } = u.edge() {
        x.push(value);
    }
    x
}

/// `∫ |∇_α^m u|^p r^α dr` with the discrete gradient operator.
pub fn gradient_energy(u: &GridFunction, params: &ProblemParams) -> Result<f64> {
    let op = GradientOperator::new(u.grid(), params.m, params.alpha, DEFAULT_ACCURACY, u.edge())?;
    let mut e = op.energy(&unknowns(u), params.p);
    if let Edge::Tail { value, decay } = u.edge() {
        if params.m != 1 {
            return Err(Error::InvalidArgument("tail edges are only supported for m = 1".into()));
        }
        e += tail_gradient_energy(value, decay, u.grid().r_max(), params.p, params.alpha);
    }
    Ok(e)
}

/// `∫_R^∞ |d/dr [v (R/r)^e]|^p r^α dr`.
pub(crate) fn tail_gradient_energy(value: f64, decay: f64, r: f64, p: f64, alpha: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    let k = (decay + 1.0) * p - alpha - 1.0;
    if k <= 0.0 {
        return f64::INFINITY;
    }
    (value * decay / r).abs().powf(p) * r.powf(alpha + 1.0) / k
}

/// `‖∇_α^m u‖^p_{L^p_α} / ‖u‖^p_{L^{p*}_θ}`.
pub fn rayleigh_quotient(u: &GridFunction, params: &ProblemParams) -> Result<f64> {
    let q = params.require_sobolev()?;
    let den = weighted_integral(u, q, params.theta)?;
    if !(den > 0.0) {
        return Err(Error::ZeroFunction);
    }
    Ok(gradient_energy(u, params)? / den.powf(params.p / q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Sobolev,
    #[serde(rename = "Trudinger-Moser")]
    TrudingerMoser,
    Morrey,
}

/// Sign of `α_1 − p + 1`.
pub fn classify_regime(p: f64, alpha1: f64) -> Regime {
    let s = alpha1 - p + 1.0;
    if s > 0.0 {
        Regime::Sobolev
    } else if s == 0.0 {
        Regime::TrudingerMoser
    } else {
        Regime::Morrey
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HardySide {
    /// functions vanishing at `R` together with their derivatives
    Right,
    /// functions vanishing at the origin together with their derivatives
    Left,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HardyReport {
    pub side: HardySide,
    pub m: u32,
    pub p: f64,
    pub gamma: f64,
    pub theta: f64,
    /// target exponent of the left-hand norm
    pub q: f64,
    #[serde(with = "extent")]
    pub r_max: f64,
    pub a_m0: f64,
    pub a_m1: f64,
    pub argmax_m0: f64,
    pub argmax_m1: f64,
    pub closed_form_bound_m0: Option<f64>,
    pub closed_form_bound_m1: Option<f64>,
    pub finite: bool,
    /// largest log-log slope of the sampled functional toward an end of `(0,R)`,
    /// signed so that positive means growth
    pub growth_exponent: f64,
}

/// Hardy constants with the critical target exponent `q = p*`.
pub fn hardy_constants(
    m: u32,
    p: f64,
    gamma: f64,
    theta: f64,
    side: HardySide,
    r_max: f64,
) -> Result<HardyReport> {
    let gap = gamma - m as f64 * p + 1.0;
    if gap == 0.0 {
        return Err(Error::Regime("γ−mp+1 = 0, critical exponent undefined".into()));
    }
    let q = (theta + 1.0) * p / gap;
    hardy_constants_with_exponent(m, p, gamma, theta, side, r_max, q)
}

/// Hardy constants for an explicit target exponent `q ≥ p`.
pub fn hardy_constants_with_exponent(
    m: u32,
    p: f64,
    gamma: f64,
    theta: f64,
    side: HardySide,
    r_max: f64,
    q: f64,
) -> Result<HardyReport> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("Hardy criterion needs p > 1, got {p}")));
    }
    if !(r_max > 0.0) {
        return Err(Error::InvalidArgument(format!("R = {r_max} must be positive")));
    }
    if !(q >= p) || !q.is_finite() {
        return Err(Error::ExponentOrdering { p, q });
    }
    let mm = (m - 1) as f64;
    let kappa = -gamma / (p - 1.0);
    let b1 = mm * q;
    let b2 = p * mm / (p - 1.0);
    let mut ints = InnerIntegrals::default();
    let f0 = |t: f64, ints: &mut InnerIntegrals| -> f64 {
        match side {
            HardySide::Right => {
                ints.left(t, b1, theta) / q + (p - 1.0) / p * ints.right(t, r_max, 0.0, kappa)
            }
            HardySide::Left => {
                ints.right(t, r_max, b1, theta) / q + (p - 1.0) / p * ints.left(t, 0.0, kappa)
            }
        }
    };
    let f1 = |t: f64, ints: &mut InnerIntegrals| -> f64 {
        match side {
            HardySide::Right => {
                ints.left(t, 0.0, theta) / q + (p - 1.0) / p * ints.right(t, r_max, b2, kappa)
            }
            HardySide::Left => {
                ints.right(t, r_max, 0.0, theta) / q + (p - 1.0) / p * ints.left(t, b2, kappa)
            }
        }
    };
    let s0 = sup_search(|t| f0(t, &mut ints), r_max)?;
    let mut ints = InnerIntegrals::default();
    let s1 = sup_search(|t| f1(t, &mut ints), r_max)?;

    let critical = ((theta + 1.0) * p / (gamma - m as f64 * p + 1.0) - q).abs() < 1e-12 * q;
    let (b0, b1c) = closed_form_bounds(m, p, gamma, theta, side, q, critical);
    Ok(HardyReport {
        side,
        m,
        p,
        gamma,
        theta,
        q,
        r_max,
        a_m0: s0.value.exp(),
        a_m1: s1.value.exp(),
        argmax_m0: s0.argmax,
        argmax_m1: s1.argmax,
        closed_form_bound_m0: b0,
        closed_form_bound_m1: b1c,
        finite: s0.finite && s1.finite,
        growth_exponent: s0.growth.max(s1.growth),
    })
}

fn closed_form_bounds(
    m: u32,
    p: f64,
    gamma: f64,
    theta: f64,
    side: HardySide,
    q: f64,
    critical: bool,
) -> (Option<f64>, Option<f64>) {
    if !critical {
        return (None, None);
    }
    let mp = m as f64 * p;
    let e = (p - 1.0) / p;
    match side {
        HardySide::Right if theta >= gamma - mp && gamma - mp + 1.0 > 0.0 => {
            let c = (theta + 1.0).powf(-1.0 / q);
            (
                Some(c * ((p - 1.0) / (gamma - p + 1.0)).powf(e)),
                Some(c * ((p - 1.0) / (gamma - mp + 1.0)).powf(e)),
            )
        }
        HardySide::Left if theta <= gamma - mp && gamma - p + 1.0 < 0.0 => {
            let chi0 = (theta + 1.0) * (gamma - p + 1.0) / (gamma - mp + 1.0);
            let g = ((1.0 - p) / (gamma - p + 1.0)).powf(e);
            (Some((-chi0).powf(-1.0 / q) * g), Some(g * (-(1.0 + theta)).powf(-1.0 / q)))
        }
        _ => (None, None),
    }
}

/// Logarithms of `∫_0^t (t−r)^a r^b dr` and `∫_t^R (r−t)^a r^b dr` by mapped quadrature.
#[derive(Default)]
struct InnerIntegrals {
    unit: Vec<((u64, u64), f64)>,
}

impl InnerIntegrals {
    /// `ln ∫_0^1 (1−s)^a s^b ds`
    fn unit_ln(&mut self, a: f64, b: f64) -> f64 {
        if b <= -1.0 || a <= -1.0 {
            return f64::INFINITY;
        }
        let key = (a.to_bits(), b.to_bits());
        if let Some(&(_, v)) = self.unit.iter().find(|(k, _)| *k == key) {
            return v;
        }
        let exponent = (2.0 / (b + 1.0)).clamp(1.0, 8.0);
        let v = build_grid_gauss(1.0, 512, SpacingLaw::Graded { exponent }, 4)
            .map(|g| {
                let f = GridFunction::from_fn(Arc::new(g), |s| (1.0 - s).powf(a));
                integrate(&f, b).map(f64::ln).unwrap_or(f64::NAN)
            })
            .unwrap_or(f64::NAN);
        self.unit.push((key, v));
        v
    }

    fn left(&mut self, t: f64, a: f64, b: f64) -> f64 {
        (a + b + 1.0) * t.ln() + self.unit_ln(a, b)
    }

    fn right(&mut self, t: f64, r_max: f64, a: f64, b: f64) -> f64 {
        // r = t/s maps (t, R) onto (t/R, 1)
        let beta = -a - b - 2.0;
        let scale = (a + b + 1.0) * t.ln();
        if r_max.is_infinite() {
            return scale + self.unit_ln(a, beta);
        }
        let c = t / r_max;
        if c >= 1.0 {
            return f64::NEG_INFINITY;
        }
        // s = c^{1−x} on x ∈ (0,1)
        let lc = c.ln();
        let g = build_grid_gauss(1.0, 256, SpacingLaw::Uniform, 4).expect("static grid");
        let f = GridFunction::from_fn(Arc::new(g), |x| {
            let s = ((1.0 - x) * lc).exp();
            (1.0 - s).max(0.0).powf(a) * s.powf(beta + 1.0) * (-lc)
        });
        scale + integrate(&f, 0.0).map(f64::ln).unwrap_or(f64::NAN)
    }
}

struct SupResult {
    value: f64,
    argmax: f64,
    finite: bool,
    growth: f64,
}

/// Sup of `exp(f(t))` over `(0, R)` from geometric samples, refined at the argmax.
fn sup_search(mut f: impl FnMut(f64) -> f64, r_max: f64) -> Result<SupResult> {
    let per_decade = 10;
    let (lo, hi) = if r_max.is_infinite() { (-6.0, 6.0) } else { (-12.0, 0.0) };
    let base = if r_max.is_infinite() { 1.0 } else { r_max };
    let sample = |lo: f64, hi: f64, f: &mut dyn FnMut(f64) -> f64| -> Vec<(f64, f64)> {
        let n = ((hi - lo) * per_decade as f64).round() as usize;
        (0..=n)
            .map(|i| {
                let e = lo + (hi - lo) * i as f64 / n as f64;
                let t = if r_max.is_finite() && i == n {
                    base * (1.0 - 1e-9)
                } else {
                    base * 10f64.powf(e)
                };
                (t, f(t))
            })
            .collect()
    };
    let mut samples = sample(lo, hi, &mut f);
    if samples.iter().any(|s| s.1.is_nan()) {
        return Err(Error::InvalidArgument("Hardy inner integral is undefined".into()));
    }
    if samples.iter().any(|s| s.1 == f64::INFINITY) {
        return Ok(SupResult {
            value: f64::INFINITY,
            argmax: f64::NAN,
            finite: false,
            growth: f64::INFINITY,
        });
    }
    let slope = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (b.0.ln() - a.0.ln());
    let k = 2 * per_decade;
    let len = samples.len();
    // growth toward t → 0 (negative slope) and toward the outer end
    let low_growth = -slope(samples[0], samples[k]);
    let high_growth = if r_max.is_infinite() {
        slope(samples[len - 1 - k], samples[len - 1])
    } else {
        f64::NEG_INFINITY
    };
    let growth = low_growth.max(high_growth);

    let best = |s: &[(f64, f64)]| -> usize {
        s.iter().enumerate().fold(0, |bi, (i, v)| if v.1 > s[bi].1 { i } else { bi })
    };
    let mut i = best(&samples);
    // widen the window until the sup is stable
    let mut stable = false;
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..3 {
        let prev = samples[i].1;
        lo -= 2.0;
        if r_max.is_infinite() {
            hi += 2.0;
        }
        samples = sample(lo, hi, &mut f);
        i = best(&samples);
        if (samples[i].1 - prev).abs() < 1e-6 {
            stable = true;
            break;
        }
    }
    // ternary refinement in ln t around the argmax
    let (mut a, mut b) = (
        samples[i.saturating_sub(1)].0.ln(),
        samples[(i + 1).min(samples.len() - 1)].0.ln(),
    );
    let mut best_v = samples[i];
    for _ in 0..60 {
        let x1 = a + (b - a) / 3.0;
        let x2 = b - (b - a) / 3.0;
        let (v1, v2) = (f(x1.exp()), f(x2.exp()));
        if v1 > best_v.1 {
            best_v = (x1.exp(), v1);
        }
        if v2 > best_v.1 {
            best_v = (x2.exp(), v2);
        }
        if v1 < v2 {
            a = x1;
        } else {
            b = x2;
        }
    }
    let finite = stable && growth <= 0.05 && best_v.1.is_finite();
    Ok(SupResult { value: best_v.1, argmax: best_v.0, finite, growth })
}
