//! Radial grids on `(0, R)` with quadrature for power weights `r^γ`, including mapped
//! infinite domains, and the sampled functions that live on them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::fornberg;
use crate::series;

/// Number of knots used for local Lagrange interpolation in the computational variable.
pub const INTERP_POINTS: usize = 8;

/// Node distribution in the computational variable `t ∈ (0,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", content = "params", rename_all = "lowercase")]
pub enum SpacingLaw {
    /// `r = R t`
    Uniform,
    /// `r = R t^exponent`
    Graded { exponent: f64 },
    /// `r = R (e^{ct} - 1)/(e^c - 1)` with `c = decades · ln 10`
    Log { decades: f64 },
    /// `r = L w^power` with `w = t/(1 + a t)`; `a = -1` on the infinite domain, so that
    /// `power = 1` gives `r = L t/(1-t)`.
    Algebraic {
        scale: f64,
        #[serde(default = "one")]
        power: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Serde helper writing an infinite extent as the string `"inf"`.
pub mod extent {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => {
                Ok(f64::INFINITY)
            }
            Raw::Text(s) => Err(de::Error::custom(format!("bad extent {s:?}"))),
        }
    }
}

/// Serializable grid description.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(flatten)]
    pub law: SpacingLaw,
    pub n: usize,
    #[serde(with = "extent")]
    pub r_max: f64,
    #[serde(default = "one_point")]
    pub gauss_points: usize,
}

fn one_point() -> usize {
    1
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        build_grid_gauss(self.r_max, self.n, self.law, self.gauss_points)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Map {
    Uniform { r: f64 },
    Graded { r: f64, q: f64 },
    Log { r: f64, c: f64, denom: f64 },
    Algebraic { l: f64, kappa: f64, a: f64 },
}

impl Map {
    fn r(&self, t: f64) -> f64 {
        match *self {
            Map::Uniform { r } => r * t,
            Map::Graded { r, q } => r * t.powf(q),
            Map::Log { r, c, denom } => r * (c * t).exp_m1() / denom,
            Map::Algebraic { l, kappa, a } => l * (t / (1.0 + a * t)).powf(kappa),
        }
    }

    fn dr(&self, t: f64) -> f64 {
        match *self {
            Map::Uniform { r } => r,
            Map::Graded { r, q } => r * q * t.powf(q - 1.0),
            Map::Log { r, c, denom } => r * c * (c * t).exp() / denom,
            Map::Algebraic { l, kappa, a } => {
                let d = 1.0 + a * t;
                let w = t / d;
                l * kappa * w.powf(kappa - 1.0) / (d * d)
            }
        }
    }

    fn t(&self, rr: f64) -> f64 {
        match *self {
            Map::Uniform { r } => rr / r,
            Map::Graded { r, q } => (rr / r).powf(1.0 / q),
            Map::Log { r, c, denom } => (rr * denom / r).ln_1p() / c,
            Map::Algebraic { l, kappa, a } => {
                if rr.is_infinite() {
                    return 1.0;
                }
                let w = (rr / l).powf(1.0 / kappa);
                w / (1.0 - a * w)
            }
        }
    }

    fn taylor(&self, t0: f64, order: usize) -> Vec<f64> {
        let len = order + 1;
        let mut rho = vec![0.0; len];
        match *self {
            Map::Uniform { r } => {
                rho[0] = r * t0;
                if len > 1 {
                    rho[1] = r;
                }
            }
            Map::Graded { r, q } => {
                rho = series::powf(&[t0, 1.0], q, len);
                rho.iter_mut().for_each(|v| *v *= r);
            }
            Map::Log { r, c, denom } => {
                let e = (c * t0).exp();
                rho[0] = r * (c * t0).exp_m1() / denom;
                let mut ck = 1.0;
                for (k, v) in rho.iter_mut().enumerate().skip(1) {
                    ck *= c / k as f64;
                    *v = r * e * ck / denom;
                }
            }
            Map::Algebraic { l, kappa, a } => {
                let d = 1.0 + a * t0;
                let mut w = vec![0.0; len];
                w[0] = t0 / d;
                let mut pw = 1.0;
                for (k, v) in w.iter_mut().enumerate().skip(1) {
                    *v = pw / d.powi(k as i32 + 1);
                    pw *= -a;
                }
                rho = series::powf(&w, kappa, len);
                rho.iter_mut().for_each(|v| *v *= l);
            }
        }
        rho
    }
}

/// Discretization of `(0, r_max)`: nodes at Gauss points of uniform cells in `t`.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    law: SpacingLaw,
    map: Map,
    r_max: f64,
    cells: usize,
    gauss_points: usize,
    t: Vec<f64>,
    t_weights: Vec<f64>,
    nodes: Vec<f64>,
    jacobian: Vec<f64>,
}

/// Midpoint-rule grid (one node per cell).
pub fn build_grid(r_max: f64, n: usize, law: SpacingLaw) -> Result<RadialGrid> {
    build_grid_gauss(r_max, n, law, 1)
}

/// Grid with `gauss_points` Gauss-Legendre nodes per cell; `n` counts nodes.
pub fn build_grid_gauss(
    r_max: f64,
    n: usize,
    law: SpacingLaw,
    gauss_points: usize,
) -> Result<RadialGrid> {
    if n < 16 {
        return Err(Error::TooFewNodes(n));
    }
    if gauss_points == 0 || gauss_points > 12 || n % gauss_points != 0 {
        return Err(Error::InvalidGrid(format!(
            "{gauss_points} Gauss points per cell do not divide {n} nodes"
        )));
    }
    if r_max.is_nan() || r_max <= 0.0 {
        return Err(Error::InvalidGrid(format!("r_max must be positive, got {r_max}")));
    }
    let infinite = r_max.is_infinite();
    let map = match law {
        SpacingLaw::Uniform if infinite => {
            return Err(Error::InvalidGrid(
                "infinite domain requires the algebraic map".into(),
            ))
        }
        SpacingLaw::Uniform => Map::Uniform { r: r_max },
        SpacingLaw::Graded { .. } | SpacingLaw::Log { .. } if infinite => {
            return Err(Error::InvalidGrid(
                "infinite domain requires the algebraic map".into(),
            ))
        }
        SpacingLaw::Graded { exponent } => {
            if !(exponent >= 1.0 && exponent.is_finite()) {
                return Err(Error::InvalidGrid(format!("grading exponent {exponent} < 1")));
            }
            Map::Graded { r: r_max, q: exponent }
        }
        SpacingLaw::Log { decades } => {
            if !(decades > 0.0 && decades <= 300.0) {
                return Err(Error::InvalidGrid(format!("bad decade count {decades}")));
            }
            let c = decades * std::f64::consts::LN_10;
            Map::Log { r: r_max, c, denom: c.exp_m1() }
        }
        SpacingLaw::Algebraic { scale, power } => {
            if !(scale > 0.0 && scale.is_finite() && power >= 1.0 && power.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "algebraic map needs scale > 0 and power >= 1, got {scale}, {power}"
                )));
            }
            let a = if infinite {
                -1.0
            } else {
                (scale / r_max).powf(1.0 / power) - 1.0
            };
            Map::Algebraic { l: scale, kappa: power, a }
        }
    };
    let cells = n / gauss_points;
    let (gx, gw) = gauss_legendre(gauss_points);
    let h = 1.0 / cells as f64;
    let mut t = Vec::with_capacity(n);
    let mut t_weights = Vec::with_capacity(n);
    for c in 0..cells {
        for (x, w) in gx.iter().zip(&gw) {
            t.push((c as f64 + x) * h);
            t_weights.push(w * h);
        }
    }
    let nodes: Vec<f64> = t.iter().map(|&ti| map.r(ti)).collect();
    let jacobian: Vec<f64> = t.iter().map(|&ti| map.dr(ti)).collect();
    for k in 0..n {
        let ok = nodes[k] > 0.0
            && nodes[k].is_finite()
            && jacobian[k] > 0.0
            && jacobian[k].is_finite()
            && (k == 0 || nodes[k] > nodes[k - 1]);
        if !ok {
            return Err(Error::InvalidGrid(format!("degenerate node {k} at r = {}", nodes[k])));
        }
    }
    Ok(RadialGrid { law, map, r_max, cells, gauss_points, t, t_weights, nodes, jacobian })
}

impl RadialGrid {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn t_nodes(&self) -> &[f64] {
        &self.t
    }
    /// `dr/dt` at each node.
    pub fn jacobian(&self) -> &[f64] {
        &self.jacobian
    }
    pub fn t_weights(&self) -> &[f64] {
        &self.t_weights
    }
    pub fn law(&self) -> SpacingLaw {
        self.law
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn is_infinite(&self) -> bool {
        self.r_max.is_infinite()
    }
    pub fn cells(&self) -> usize {
        self.cells
    }
    pub fn gauss_points(&self) -> usize {
        self.gauss_points
    }
    pub fn spec(&self) -> GridSpec {
        GridSpec { law: self.law, n: self.n(), r_max: self.r_max, gauss_points: self.gauss_points }
    }
    /// Quadrature weights in `r` (no power weight): `∫ f dr ≈ Σ w_k f(r_k)`.
    pub fn weights(&self) -> Vec<f64> {
        self.t_weights.iter().zip(&self.jacobian).map(|(w, j)| w * j).collect()
    }
    pub fn r_of_t(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return self.r_max;
        }
        self.map.r(t)
    }
    pub fn dr_dt(&self, t: f64) -> f64 {
        self.map.dr(t)
    }
    pub fn t_of_r(&self, r: f64) -> f64 {
        if r >= self.r_max {
            return 1.0;
        }
        self.map.t(r)
    }
    /// Taylor coefficients of `r(t)` about `t0`, orders `0..=order`.
    pub fn taylor(&self, t0: f64, order: usize) -> Vec<f64> {
        self.map.taylor(t0, order)
    }
    /// Cell index containing computational coordinate `t`.
    pub fn cell_of(&self, t: f64) -> usize {
        ((t * self.cells as f64) as usize).min(self.cells - 1)
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    if k == 1 {
        return (vec![0.5], vec![1.0]);
    }
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    for i in 0..k {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = k as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[k - 1 - i] = 0.5 * (1.0 + z);
        w[k - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Node weights for `∫ f(r) r^γ dr`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub gamma: f64,
    /// `Σ node_weights[k] · nodes[k]^γ` approximates `∫ r^γ dr`.
    pub node_weights: Vec<f64>,
    weighted: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(grid: &RadialGrid, gamma: f64) -> Result<Self> {
        if !(gamma > -1.0) || !gamma.is_finite() {
            return Err(Error::WeightExponent(gamma));
        }
        let node_weights = grid.weights();
        let weighted = node_weights
            .iter()
            .zip(grid.nodes())
            .map(|(w, r)| (w.ln() + gamma * r.ln()).exp())
            .collect();
        Ok(Self { gamma, node_weights, weighted })
    }

    /// Combined weights `w_k r_k^γ`.
    pub fn weighted(&self) -> &[f64] {
        &self.weighted
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        self.weighted.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// `∫_0^{r_max} f(r) r^γ dr`; second order for midpoint cells, order `2k` with `k`
/// Gauss points per cell.
pub fn integrate(f: &GridFunction, gamma: f64) -> Result<f64> {
    if let Some(k) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    Ok(QuadratureRule::new(&f.grid, gamma)?.apply(&f.values))
}

/// Behaviour at `r_max`, used by stencils and interpolation near the outer end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Edge {
    /// Nothing known at `r_max`; stencils are one-sided.
    Free,
    /// `u(r_max) = 0` (decay at infinity on mapped grids).
    Dirichlet,
    /// `u(r) = value · (r_max/r)^decay` for `r ≥ r_max`.
    Tail { value: f64, decay: f64 },
}

impl Edge {
    pub fn knot_value(&self) -> Option<f64> {
        match *self {
            Edge::Free => None,
            Edge::Dirichlet => Some(0.0),
            Edge::Tail { value, .. } => Some(value),
        }
    }
}

/// Sampled radial function.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    edge: Edge,
    derivative_cache: Option<Arc<DerivativeCache>>,
}

#[derive(Debug)]
pub struct DerivativeCache {
    pub accuracy: usize,
    /// `orders[j]` holds `u^{(j)}` at the nodes, `j = 0..`.
    pub orders: Vec<Vec<f64>>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values, edge: Edge::Free, derivative_cache: None })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values, edge: Edge::Free, derivative_cache: None }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n();
        Self { grid, values: vec![0.0; n], edge: Edge::Free, derivative_cache: None }
    }

    pub fn with_edge(mut self, edge: Edge) -> Self {
        self.edge = edge;
        self.derivative_cache = None;
        self
    }

    pub(crate) fn with_cache(mut self, cache: DerivativeCache) -> Self {
        self.derivative_cache = Some(Arc::new(cache));
        self
    }

    pub fn derivative_cache(&self) -> Option<&DerivativeCache> {
        self.derivative_cache.as_deref()
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn grid_arc(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn edge(&self) -> Edge {
        self.edge
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid and edge kind, new nodal values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self { grid: self.grid.clone(), values, edge: self.edge, derivative_cache: None }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let edge = match self.edge {
            Edge::Tail { value, decay } => Edge::Tail { value: c * value, decay },
            e => e,
        };
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            edge,
            derivative_cache: None,
        }
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<Self> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.nodes() != other.grid.nodes() {
            return Err(Error::InvalidArgument("functions live on different grids".into()));
        }
        let edge = match (self.edge, other.edge) {
            (Edge::Tail { value: v1, decay }, Edge::Tail { value: v2, decay: d2 })
                if decay == d2 =>
            {
                Edge::Tail { value: a * v1 + b * v2, decay }
            }
            (e1, e2) if e1 == e2 => e1,
            _ => Edge::Free,
        };
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { grid: self.grid.clone(), values, edge, derivative_cache: None })
    }

    /// Knots in `t` with values, including the edge knot at `t = 1` when known.
    pub fn knots(&self) -> (Vec<f64>, Vec<f64>) {
        let mut t = self.grid.t_nodes().to_vec();
        let mut v = self.values.clone();
        if let Some(e) = self.edge.knot_value() {
            t.push(1.0);
            v.push(e);
        }
        (t, v)
    }

    /// Value at an arbitrary radius by local Lagrange interpolation in `t`.
    pub fn eval_at(&self, r: f64) -> f64 {
        let (t, v) = self.knots();
        self.eval_with_knots(&t, &v, r)
    }

    pub(crate) fn eval_with_knots(&self, t: &[f64], v: &[f64], r: f64) -> f64 {
        if r >= self.grid.r_max() {
            return match self.edge {
                Edge::Tail { value, decay } => value * (self.grid.r_max() / r).powf(decay),
                _ => 0.0,
            };
        }
        let tr = self.grid.t_of_r(r.max(0.0));
        lagrange_eval(t, v, tr, INTERP_POINTS)
    }

    /// Values at many radii.
    pub fn eval_many(&self, rs: &[f64]) -> Vec<f64> {
        let (t, v) = self.knots();
        rs.iter().map(|&r| self.eval_with_knots(&t, &v, r)).collect()
    }
}

/// Serializable snapshot of a [`GridFunction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    pub grid: GridSpec,
    pub r: Vec<f64>,
    pub value: Vec<f64>,
    pub edge: Edge,
}

impl SampledProfile {
    pub fn from_function(u: &GridFunction) -> Self {
        Self {
            grid: u.grid.spec(),
            r: u.grid.nodes().to_vec(),
            value: u.values.clone(),
            edge: u.edge,
        }
    }

    /// Rebuilds the grid from its spec.
    pub fn to_function(&self) -> Result<GridFunction> {
        let grid = Arc::new(self.grid.build()?);
        Ok(GridFunction::new(grid, self.value.clone())?.with_edge(self.edge))
    }

    /// Two-column `r,value` CSV with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for (r, v) in self.r.iter().zip(&self.value) {
            out.push_str(&format!("{r:e},{v:e}\n"));
        }
        out
    }
}

/// Local Lagrange interpolation through the `points` knots nearest `x`.
pub(crate) fn lagrange_eval(t: &[f64], v: &[f64], x: f64, points: usize) -> f64 {
    let p = points.min(t.len());
    let idx = t.partition_point(|&ti| ti < x);
    if idx < t.len() && (t[idx] - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
        return v[idx];
    }
    let lo = idx.saturating_sub(p / 2).min(t.len() - p);
    let w = fornberg(x, &t[lo..lo + p], 0);
    w[0].iter().zip(&v[lo..lo + p]).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn uniform_midpoints() {
        let g = build_grid(1.0, 64, SpacingLaw::Uniform).unwrap();
        for (k, r) in g.nodes().iter().enumerate() {
            assert!(close(*r, (k as f64 + 0.5) / 64.0, 1e-15));
        }
    }

    #[test]
    fn algebraic_nodes_follow_map() {
        let g = build_grid(f64::INFINITY, 128, SpacingLaw::Algebraic { scale: 1.0, power: 1.0 })
            .unwrap();
        for (t, r) in g.t_nodes().iter().zip(g.nodes()) {
            assert!(close(*r, t / (1.0 - t), 1e-13));
        }
        for (t, j) in g.t_nodes().iter().zip(g.jacobian()) {
            assert!(close(*j, 1.0 / (1.0 - t).powi(2), 1e-12));
        }
    }

    #[test]
    fn rejects_small_and_bad_domains() {
        assert!(matches!(build_grid(1.0, 8, SpacingLaw::Uniform), Err(Error::TooFewNodes(8))));
        assert!(build_grid(f64::INFINITY, 64, SpacingLaw::Uniform).is_err());
        assert!(build_grid(-1.0, 64, SpacingLaw::Uniform).is_err());
        assert!(build_grid_gauss(1.0, 64, SpacingLaw::Uniform, 3).is_err());
    }

    #[test]
    fn gauss_rule_is_exact() {
        for k in 1..=8 {
            let (x, w) = gauss_legendre(k);
            for deg in 0..2 * k {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!(close(s, 1.0 / (deg as f64 + 1.0), 1e-14), "k={k} deg={deg}");
            }
        }
    }

    #[test]
    fn integrates_constant_against_cubic_weight() {
        let g = Arc::new(build_grid_gauss(1.0, 64, SpacingLaw::Uniform, 2).unwrap());
        let f = GridFunction::from_fn(g, |_| 1.0);
        assert!(close(integrate(&f, 3.0).unwrap(), 0.25, 1e-12));
    }

    #[test]
    fn gamma_integral_on_mapped_grid() {
        let g = Arc::new(
            build_grid(f64::INFINITY, 400, SpacingLaw::Algebraic { scale: 4.0, power: 2.0 })
                .unwrap(),
        );
        let f = GridFunction::from_fn(g, |r| (-r).exp());
        assert!(close(integrate(&f, 3.0).unwrap(), 6.0, 1e-6));
    }

    #[test]
    fn rejects_bad_weights_and_values() {
        let g = Arc::new(build_grid(1.0, 32, SpacingLaw::Uniform).unwrap());
        let f = GridFunction::from_fn(g.clone(), |_| 1.0);
        assert!(matches!(integrate(&f, -1.0), Err(Error::WeightExponent(_))));
        assert!(integrate(&f, f64::NAN).is_err());
        let bad = GridFunction::from_fn(g, |r| if r > 0.5 { f64::NAN } else { 1.0 });
        assert!(matches!(integrate(&bad, 0.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn inverse_maps_roundtrip() {
        let laws = [
            (1.0, SpacingLaw::Uniform),
            (2.0, SpacingLaw::Graded { exponent: 2.5 }),
            (10.0, SpacingLaw::Log { decades: 4.0 }),
            (20.0, SpacingLaw::Algebraic { scale: 1.0, power: 2.0 }),
            (f64::INFINITY, SpacingLaw::Algebraic { scale: 0.5, power: 3.0 }),
        ];
        for (rmax, law) in laws {
            let g = build_grid(rmax, 32, law).unwrap();
            for (&t, &r) in g.t_nodes().iter().zip(g.nodes()) {
                assert!(close(g.t_of_r(r), t, 1e-13), "{law:?}");
            }
            if rmax.is_finite() {
                assert!(close(g.r_of_t(1.0 - 1e-15), rmax, 1e-9));
            }
        }
    }

    #[test]
    fn taylor_coefficients_match_finite_differences() {
        let laws = [
            (2.0, SpacingLaw::Graded { exponent: 2.5 }),
            (10.0, SpacingLaw::Log { decades: 4.0 }),
            (20.0, SpacingLaw::Algebraic { scale: 1.0, power: 2.0 }),
            (f64::INFINITY, SpacingLaw::Algebraic { scale: 0.5, power: 1.0 }),
        ];
        for (rmax, law) in laws {
            let g = build_grid(rmax, 32, law).unwrap();
            let t0 = 0.4;
            let rho = g.taylor(t0, 3);
            let h = 1e-4;
            let d1 = (g.r_of_t(t0 + h) - g.r_of_t(t0 - h)) / (2.0 * h);
            let d2 = (g.r_of_t(t0 + h) - 2.0 * g.r_of_t(t0) + g.r_of_t(t0 - h)) / (h * h);
            assert!(close(rho[0], g.r_of_t(t0), 1e-14));
            assert!(close(rho[1], d1, 1e-6), "{law:?}");
            assert!(close(rho[1], g.dr_dt(t0), 1e-13));
            assert!(close(2.0 * rho[2], d2, 1e-5), "{law:?}");
        }
    }

    #[test]
    fn interpolation_reproduces_nodes_and_polynomials() {
        let g = Arc::new(build_grid(1.0, 32, SpacingLaw::Uniform).unwrap());
        let f = GridFunction::from_fn(g.clone(), |r| 1.0 + r - 2.0 * r * r + r.powi(5));
        for &r in g.nodes() {
            assert_eq!(f.eval_at(r), 1.0 + r - 2.0 * r * r + r.powi(5));
        }
        for x in [0.013f64, 0.3, 0.77, 0.99] {
            let exact = 1.0 + x - 2.0 * x * x + x.powi(5);
            assert!(close(f.eval_at(x), exact, 1e-12));
        }
    }

    #[test]
    fn tail_edge_extends_beyond_rmax() {
        let g = Arc::new(build_grid(2.0, 32, SpacingLaw::Uniform).unwrap());
        let f = GridFunction::zeros(g).with_edge(Edge::Tail { value: 3.0, decay: 2.0 });
        assert!(close(f.eval_at(4.0), 0.75, 1e-15));
    }

    #[test]
    fn spec_json_shape() {
        let spec = GridSpec {
            law: SpacingLaw::Algebraic { scale: 1.0, power: 2.0 },
            n: 128,
            r_max: f64::INFINITY,
            gauss_points: 1,
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            s,
            r#"{"law":"algebraic","params":{"scale":1.0,"power":2.0},"n":128,"r_max":"inf","gauss_points":1}"#
        );
        let back: GridSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let u: GridSpec = serde_json::from_str(r#"{"law":"uniform","n":64,"r_max":1}"#).unwrap();
        assert_eq!(u.law, SpacingLaw::Uniform);
    }
}
