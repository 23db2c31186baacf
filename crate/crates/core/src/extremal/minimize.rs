use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dilation::{dilate, half_mass_radius};
use super::problem::{Discretization, TailClosure};
use super::residual::TestBumps;
use crate::error::{Error, Result};
use crate::mesh::{GridFunction, RadialGrid, SampledProfile};
use crate::operators::{ProblemParams, DEFAULT_ACCURACY};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    /// relative quotient decrease below which an iteration counts as stalled
    pub tol_q: f64,
    /// relative weak Euler–Lagrange residual required for convergence
    pub tol_r: f64,
    pub max_iter: usize,
    pub accuracy: usize,
    pub closure: TailClosure,
    /// halvings of the step before the line search gives up
    pub max_halvings: usize,
    /// consecutive stalled iterations after which the run stops
    pub max_stalls: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol_q: 1e-12,
            tol_r: 1e-6,
            max_iter: 500,
            accuracy: DEFAULT_ACCURACY,
            closure: TailClosure::Harmonic,
            max_halvings: 40,
            max_stalls: 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub quotient: f64,
    pub step: f64,
    /// half-mass radius before gauge fixing
    pub gauge: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremalResult {
    pub params: ProblemParams,
    #[serde(serialize_with = "serialize_profile")]
    pub profile: GridFunction,
    #[serde(rename = "S_estimate")]
    pub s_estimate: f64,
    /// `λ` with `2*·λ = 2S` at a minimizer
    #[serde(rename = "lambda")]
    pub lagrange_multiplier: f64,
    /// weak residual of the profile with coefficient `2*λ/2`
    pub el_residual: f64,
    /// `el_residual` relative to the residual with zero coefficient
    pub relative_residual: f64,
    pub half_mass_radius: f64,
    pub iterations: usize,
    pub converged: bool,
    /// smallest nodal value over the largest; negative when the profile changes sign
    pub min_over_max: f64,
    pub trace: Vec<TraceRecord>,
}

fn serialize_profile<S: serde::Serializer>(u: &GridFunction, s: S) -> std::result::Result<S::Ok, S::Error> {
    SampledProfile::from_function(u).serialize(s)
}

impl ExtremalResult {
    /// `z_S = S^{1/(2*−2)} z`, which solves the Euler–Lagrange equation with `λ = 1`.
    pub fn rescaled_profile(&self) -> GridFunction {
        let q = self.params.p_star().expect("Sobolev parameters");
        self.profile.scaled(self.s_estimate.powf(1.0 / (q - 2.0)))
    }
}

/// `(1+r²)^{−(α−2m+1)/2}`.
pub fn default_initial(grid: &Arc<RadialGrid>, params: &ProblemParams) -> GridFunction {
    let e = 0.5 * (params.alpha - 2.0 * params.m as f64 + 1.0);
    GridFunction::from_fn(grid.clone(), |r| (1.0 + r * r).powf(-e))
}

struct Iterate {
    x: Vec<f64>,
    quotient: f64,
    gauge: f64,
}

struct Solver<'a> {
    disc: &'a Discretization,
    params: ProblemParams,
}

impl Solver<'_> {
    fn normalize(&self, x: &mut [f64]) -> Result<()> {
        let m = self.disc.mass(x);
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::ZeroFunction);
        }
        let c = m.powf(-1.0 / self.disc.q);
        x.iter_mut().for_each(|v| *v *= c);
        Ok(())
    }

    /// Normalize, fix the gauge, normalize again.
    fn project(&self, mut x: Vec<f64>) -> Result<Iterate> {
        self.normalize(&mut x)?;
        let u = self.disc.to_function(&x);
        let rho = half_mass_radius(&u, &self.params)?;
        if (rho.ln()).abs() > 1e-10 {
            let v = dilate(&u, 1.0 / rho, &self.params)?;
            x = self.disc.from_function(&v)?;
            self.normalize(&mut x)?;
        }
        let quotient = self.disc.energy(&x);
        Ok(Iterate { x, quotient, gauge: rho })
    }
}

/// Minimizes the Rayleigh quotient for `p = 2` by a preconditioned gradient flow on the
/// constraint manifold `‖u‖_{L^{2*}_θ} = 1`, gauge-fixing the dilation every iteration.
///
/// The step direction is `d = S·A⁻¹B(x) − x`, the negative gradient in the energy inner
/// product, with a backtracking line search on the quotient.
pub fn minimize_rayleigh(
    params: &ProblemParams,
    init: &GridFunction,
    opts: &MinimizeOptions,
) -> Result<ExtremalResult> {
    if params.p != 2.0 {
        return Err(Error::InvalidArgument(format!("minimization needs p = 2, got {}", params.p)));
    }
    let q = params.require_sobolev()?;
    if q == 2.0 {
        return Err(Error::InvalidArgument("critical exponent 2 gives a linear eigenproblem".into()));
    }
    let disc =
        Discretization::new(init.grid_arc().clone(), *params, opts.accuracy, opts.closure, true)?;
    let solver = Solver { disc: &disc, params: *params };
    let mut x0 = disc.from_function(init)?;
    if x0.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroFunction);
    }
    let mut cur = solver.project(std::mem::take(&mut x0))?;
    let mut trace = vec![TraceRecord { quotient: cur.quotient, step: 0.0, gauge: cur.gauge }];
    let mut converged = false;
    let mut iterations = 0;
    let mut stalls = 0;
    let bumps = TestBumps::new(&disc, 1.0)?;
    for it in 1..=opts.max_iter {
        iterations = it;
        let s = cur.quotient;
        let b = disc.mass_gradient(&cur.x);
        let ainv_b = disc.solve(&b);
        let d: Vec<f64> = ainv_b.iter().zip(&cur.x).map(|(y, x)| s * y - x).collect();
        let ax = disc.apply_matrix(&cur.x);
        let slope: f64 = ax.iter().zip(&b).zip(&d).map(|((a, b), d)| 2.0 * (a - s * b) * d).sum();
        if slope > 1e-12 * s {
            return Err(Error::GradientInconsistent(slope));
        }
        let mut tau = 1.0;
        let mut next = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = cur.x.iter().zip(&d).map(|(x, d)| x + tau * d).collect();
            if let Ok(candidate) = solver.project(trial) {
                if candidate.quotient <= cur.quotient {
                    next = Some(candidate);
                    break;
                }
            }
            tau *= 0.5;
        }
        let Some(next) = next else {
            converged = relative_residual(&disc, &bumps, &cur.x)?.0 < opts.tol_r;
            break;
        };
        let decrease = (cur.quotient - next.quotient) / cur.quotient;
        trace.push(TraceRecord { quotient: next.quotient, step: tau, gauge: next.gauge });
        cur = next;
        if decrease < opts.tol_q {
            stalls += 1;
            if relative_residual(&disc, &bumps, &cur.x)?.0 < opts.tol_r {
                converged = true;
                break;
            }
            if stalls >= opts.max_stalls {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    let profile = disc.to_function(&cur.x);
    let rho = half_mass_radius(&profile, params)?;
    let (relative, coefficient, absolute) = relative_residual(&disc, &bumps, &cur.x)?;
    let max = cur.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let signed_max = cur.x.iter().copied().find(|v| v.abs() == max).unwrap_or(1.0);
    let (profile, x) = if signed_max < 0.0 {
        (profile.scaled(-1.0), cur.x.iter().map(|v| -v).collect::<Vec<_>>())
    } else {
        (profile, cur.x.clone())
    };
    let min = x.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    Ok(ExtremalResult {
        params: *params,
        profile,
        s_estimate: cur.quotient,
        lagrange_multiplier: 2.0 * coefficient / q,
        el_residual: absolute,
        relative_residual: relative,
        half_mass_radius: rho,
        iterations,
        converged,
        min_over_max: min / max,
        trace,
    })
}

/// `(relative residual, best coefficient, absolute residual)`.
fn relative_residual(disc: &Discretization, bumps: &TestBumps, x: &[f64]) -> Result<(f64, f64, f64)> {
    let (a, b) = bumps.moments(disc, x);
    let c = bumps.best_coefficient(&a, &b)?;
    let abs = bumps.norm(&a, &b, c)?;
    let zero = bumps.norm(&a, &b, 0.0)?;
    Ok((abs / zero, c, abs))
}
