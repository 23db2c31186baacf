use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{gauss_legendre, lagrange_eval, Edge, GridFunction, RadialGrid, INTERP_POINTS};
use crate::operators::ProblemParams;

/// `u_ε(r) = ε^{−β} u(r/ε)` with `β = (θ+1)/p*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationGauge {
    pub beta: f64,
    pub epsilon: f64,
}

impl DilationGauge {
    pub fn new(params: &ProblemParams, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("dilation factor {epsilon} must be positive")));
        }
        let q = params.require_sobolev()?;
        Ok(Self { beta: (params.theta + 1.0) / q, epsilon })
    }

    /// Resamples `u_ε` on the grid of `u`.
    pub fn apply(&self, u: &GridFunction) -> GridFunction {
        if self.epsilon == 1.0 {
            return u.clone();
        }
        let c = self.epsilon.powf(-self.beta);
        let (t, v) = u.knots();
        let values = u
            .grid()
            .nodes()
            .iter()
            .map(|&r| c * u.eval_with_knots(&t, &v, r / self.epsilon))
            .collect();
        let edge = match u.edge() {
            Edge::Tail { decay, .. } => {
                let r = u.grid().r_max();
                Edge::Tail { value: c * u.eval_with_knots(&t, &v, r / self.epsilon), decay }
            }
            e => e,
        };
        u.with_values(values).with_edge(edge)
    }
}

/// `r ↦ ε^{−(θ+1)/p*} u(r/ε)` on the grid of `u`.
pub fn dilate(u: &GridFunction, epsilon: f64, params: &ProblemParams) -> Result<GridFunction> {
    Ok(DilationGauge::new(params, epsilon)?.apply(u))
}

/// Cumulative critical mass `Q(r) = ∫_0^r |u|^{p*} s^θ ds` sampled at the nodes.
#[derive(Clone, Debug, Serialize)]
pub struct MassProfile {
    pub radii: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// `Q(∞)`, including the exterior of a tail edge
    pub total: f64,
    #[serde(skip)]
    density: Density,
}

#[derive(Clone, Debug)]
struct Density {
    grid: Arc<RadialGrid>,
    t: Vec<f64>,
    g: Vec<f64>,
    /// `Q` at the segment ends `t[k]`, starting with `Q(0) = 0`
    ends: Vec<f64>,
    r_max: f64,
    tail: Option<(f64, f64)>,
    q: f64,
    theta: f64,
}

const SEGMENT_GAUSS: usize = 6;

impl Density {
    fn segment(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let (x, w) = gauss_legendre(SEGMENT_GAUSS);
        let h = b - a;
        x.iter()
            .zip(&w)
            .map(|(x, w)| w * lagrange_eval(&self.t, &self.g, a + h * x, INTERP_POINTS))
            .sum::<f64>()
            * h
    }

    /// `Q` at computational coordinate `s ∈ [0, 1]`.
    fn at(&self, s: f64) -> f64 {
        let k = self.t.partition_point(|&ti| ti <= s);
        let left = if k == 0 { 0.0 } else { self.t[k - 1] };
        self.ends[k] + self.segment(left, s)
    }

    fn tail_mass(&self, r: f64) -> f64 {
        match self.tail {
            Some((value, decay)) if r > self.r_max => {
                let k = decay * self.q - self.theta - 1.0;
                value.abs().powf(self.q) * self.r_max.powf(self.theta + 1.0) / k
                    * (1.0 - (self.r_max / r).powf(k))
            }
            _ => 0.0,
        }
    }
}

/// Builds the cumulative mass profile of `u` by integrating a local interpolant of
/// `|u|^{p*} r^θ dr/dt` in the computational coordinate.
pub fn mass_profile(u: &GridFunction, params: &ProblemParams) -> Result<MassProfile> {
    let q = params.require_sobolev()?;
    let grid = u.grid();
    if let Some(k) = u.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    let (t, v) = u.knots();
    let g: Vec<f64> = t
        .iter()
        .zip(&v)
        .map(|(&s, &val)| {
            if val == 0.0 {
                return 0.0;
            }
            let r = grid.r_of_t(s);
            let dr = grid.dr_dt(s);
            if !r.is_finite() || !dr.is_finite() {
                return 0.0;
            }
            val.abs().powf(q) * r.powf(params.theta) * dr
        })
        .collect();
    let tail = match u.edge() {
        Edge::Tail { value, decay } if !grid.is_infinite() => Some((value, decay)),
        _ => None,
    };
    let mut density = Density {
        grid: u.grid_arc().clone(),
        t,
        g,
        ends: vec![0.0],
        r_max: grid.r_max(),
        tail,
        q,
        theta: params.theta,
    };
    let mut acc = 0.0;
    let mut left = 0.0;
    for k in 0..density.t.len() {
        acc += density.segment(left, density.t[k]);
        density.ends.push(acc);
        left = density.t[k];
    }
    let inner = acc + density.segment(left, 1.0);
    let total = inner + density.tail_mass(f64::INFINITY);
    let radii = grid.nodes().to_vec();
    let cumulative = density.ends[1..=grid.n()].to_vec();
    Ok(MassProfile { radii, cumulative, total, density })
}

impl MassProfile {
    /// `Q(r)`.
    pub fn at(&self, r: f64) -> f64 {
        let d = &self.density;
        if r <= 0.0 {
            return 0.0;
        }
        if r >= d.r_max {
            return d.at(1.0) + d.tail_mass(r);
        }
        d.at(d.grid.t_of_r(r))
    }

    /// Smallest `r` with `Q(r) = level`, by bisection in the computational coordinate.
    pub fn radius_of(&self, level: f64) -> Result<f64> {
        let d = &self.density;
        if !(self.total > 0.0) {
            return Err(Error::ZeroFunction);
        }
        if !(level >= 0.0 && level <= self.total) {
            return Err(Error::InvalidArgument(format!(
                "mass level {level} outside [0, {}]",
                self.total
            )));
        }
        let inner = d.at(1.0);
        if level > inner {
            let (value, decay) = d.tail.expect("mass beyond r_max needs a tail");
            let k = decay * d.q - d.theta - 1.0;
            let full = value.abs().powf(d.q) * d.r_max.powf(d.theta + 1.0) / k;
            let frac = (level - inner) / full;
            return Ok(d.r_max * (1.0 - frac).powf(-1.0 / k));
        }
        let k = d.ends.partition_point(|&e| e < level);
        let (mut lo, mut hi) = match k {
            0 => (0.0, 0.0),
            k if k < d.t.len() + 1 => (if k >= 2 { d.t[k - 2] } else { 0.0 }, d.t[k - 1]),
            _ => (d.t[d.t.len() - 1], 1.0),
        };
        for _ in 0..200 {
            if hi - lo <= 1e-15 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if d.at(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(d.grid.r_of_t(0.5 * (lo + hi)))
    }
}

/// Radius at which the cumulative critical mass reaches half of the total.
pub fn half_mass_radius(u: &GridFunction, params: &ProblemParams) -> Result<f64> {
    let profile = mass_profile(u, params)?;
    profile.radius_of(0.5 * profile.total)
}

/// Dilation of `u` with half-mass radius 1.
pub fn fix_gauge(u: &GridFunction, params: &ProblemParams) -> Result<GridFunction> {
    let rho = half_mass_radius(u, params)?;
    dilate(u, 1.0 / rho, params)
}
