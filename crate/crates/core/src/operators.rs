//! Finite-difference derivatives on radial grids, the operator `Δ_α = d²/dr² + (α/r) d/dr`,
//! the gradient `∇_α^m`, and the coefficients of the expanded form of `Δ_α^k`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{extent, DerivativeCache, Edge, GridFunction, RadialGrid};
use crate::series;

pub const DEFAULT_ACCURACY: usize = 6;

/// Finite-difference weights for derivatives `0..=m` at `x0` on the points `x`
/// (Fornberg's recursion). Returns `w[k][i]`.
pub fn fornberg(x0: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// The tuple `(m, p, α, θ, R)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub m: u32,
    pub p: f64,
    pub alpha: f64,
    pub theta: f64,
    #[serde(with = "extent")]
    pub r_max: f64,
}

impl ProblemParams {
    pub fn new(m: u32, p: f64, alpha: f64, theta: f64, r_max: f64) -> Result<Self> {
        let params = Self { m, p, alpha, theta, r_max };
        params.check_ranges()?;
        Ok(params)
    }

    pub fn check_ranges(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidArgument(format!("p = {} must be >= 1", self.p)));
        }
        if !(self.alpha > -1.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("α = {} must exceed -1", self.alpha)));
        }
        if !(self.theta > -1.0) || !self.theta.is_finite() {
            return Err(Error::InvalidArgument(format!("θ = {} must exceed -1", self.theta)));
        }
        if !(self.r_max > 0.0) {
            return Err(Error::InvalidArgument(format!("R = {} must be positive", self.r_max)));
        }
        Ok(())
    }

    /// `α − m·p + 1`
    pub fn sobolev_gap(&self) -> f64 {
        self.alpha - self.m as f64 * self.p + 1.0
    }

    /// Names the failing inequality when `α−mp+1 > 0` and `θ ≥ α−mp` do not both hold.
    pub fn sobolev_condition(&self) -> std::result::Result<(), String> {
        let gap = self.sobolev_gap();
        if gap <= 0.0 {
            return Err(format!("α−mp+1 = {gap}, Sobolev condition violated (needs α−mp+1 > 0)"));
        }
        if self.theta < gap - 1.0 {
            return Err(format!(
                "θ = {} < α−mp = {}, Sobolev condition violated (needs θ ≥ α−mp)",
                self.theta,
                gap - 1.0
            ));
        }
        Ok(())
    }

    pub fn is_sobolev(&self) -> bool {
        self.sobolev_condition().is_ok()
    }

    /// `p* = (θ+1)p/(α−mp+1)` when the Sobolev condition holds.
    pub fn p_star(&self) -> Option<f64> {
        self.is_sobolev().then(|| (self.theta + 1.0) * self.p / self.sobolev_gap())
    }

    pub fn require_sobolev(&self) -> Result<f64> {
        self.check_ranges()?;
        self.sobolev_condition().map_err(Error::Regime)?;
        Ok((self.theta + 1.0) * self.p / self.sobolev_gap())
    }
}

/// Weights at one evaluation point: `weights[j]` maps knot values `start..` to `u^{(j)}`.
#[derive(Clone, Debug)]
pub struct PointWeights {
    pub start: usize,
    pub weights: Vec<Vec<f64>>,
}

/// r-derivative weights of orders `0..=order` at computational coordinate `t0`,
/// using the `order + accuracy` knots nearest to it (shifted one-sided near the ends).
pub fn point_weights(
    grid: &RadialGrid,
    knots: &[f64],
    t0: f64,
    order: usize,
    accuracy: usize,
) -> Result<PointWeights> {
    let width = order + accuracy.max(1);
    if knots.len() < width {
        return Err(Error::GridTooCoarse(format!(
            "derivative of order {order} needs {width} knots, grid has {}",
            knots.len()
        )));
    }
    let idx = knots.partition_point(|&t| t < t0);
    let start = idx.saturating_sub(width / 2).min(knots.len() - width);
    let window = &knots[start..start + width];
    let wt = fornberg(t0, window, order);
    let chain = series::chain_matrix(&grid.taylor(t0, order), order);
    let mut weights = vec![vec![0.0; width]; order + 1];
    for (j, row) in chain.iter().enumerate() {
        for (i, &b) in row.iter().enumerate().take(j + 1) {
            if b != 0.0 {
                for (w, &v) in weights[j].iter_mut().zip(&wt[i]) {
                    *w += b * v;
                }
            }
        }
    }
    Ok(PointWeights { start, weights })
}

/// Node-collocated stencil for `d^order/dr^order`.
#[derive(Clone, Debug)]
pub struct DifferentialStencil {
    pub order: usize,
    pub accuracy: usize,
    /// One row per node, indexing the knot list (nodes followed by the edge knot if any).
    pub rows: Vec<(usize, Vec<f64>)>,
    pub uses_edge_knot: bool,
}

impl DifferentialStencil {
    pub fn new(grid: &RadialGrid, order: usize, accuracy: usize, edge_knot: bool) -> Result<Self> {
        if accuracy < 2 {
            return Err(Error::InvalidArgument(format!("stencil accuracy {accuracy} < 2")));
        }
        let mut knots = grid.t_nodes().to_vec();
        if edge_knot {
            knots.push(1.0);
        }
        let rows = grid
            .t_nodes()
            .iter()
            .map(|&t| {
                point_weights(grid, &knots, t, order, accuracy)
                    .map(|pw| (pw.start, pw.weights[order].clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { order, accuracy, rows, uses_edge_knot: edge_knot })
    }

    pub fn apply(&self, knot_values: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|(s, w)| w.iter().zip(&knot_values[*s..]).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn derived_edge(u: &GridFunction) -> Edge {
    if u.grid().is_infinite() && u.edge() == Edge::Dirichlet {
        Edge::Dirichlet
    } else {
        Edge::Free
    }
}

/// `u^{(j)}` at the nodes with the default accuracy.
pub fn derivative(u: &GridFunction, j: usize) -> Result<GridFunction> {
    derivative_with(u, j, DEFAULT_ACCURACY)
}

pub fn derivative_with(u: &GridFunction, j: usize, accuracy: usize) -> Result<GridFunction> {
    if j == 0 {
        return Ok(u.clone());
    }
    if let Some(cache) = u.derivative_cache() {
        if cache.accuracy == accuracy && j < cache.orders.len() {
            return Ok(u.with_values(cache.orders[j].clone()).with_edge(derived_edge(u)));
        }
    }
    let (_, knot_values) = u.knots();
    let st = DifferentialStencil::new(u.grid(), j, accuracy, u.edge().knot_value().is_some())?;
    Ok(u.with_values(st.apply(&knot_values)).with_edge(derived_edge(u)))
}

/// Attaches `u^{(0..=max_order)}` computed by the stencils of this module.
pub fn cache_derivatives(u: &GridFunction, max_order: usize, accuracy: usize) -> Result<GridFunction> {
    let mut orders = vec![u.values().to_vec()];
    for j in 1..=max_order {
        orders.push(derivative_with(u, j, accuracy)?.into_values());
    }
    Ok(u.clone().with_cache(DerivativeCache { accuracy, orders }))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("α = {alpha} must exceed -1")));
    }
    Ok(())
}

/// `u'' + (α/r) u'` at the nodes.
pub fn alpha_laplacian(u: &GridFunction, alpha: f64) -> Result<GridFunction> {
    alpha_laplacian_with(u, alpha, DEFAULT_ACCURACY)
}

pub fn alpha_laplacian_with(u: &GridFunction, alpha: f64, accuracy: usize) -> Result<GridFunction> {
    check_alpha(alpha)?;
    let d1 = derivative_with(u, 1, accuracy)?;
    let d2 = derivative_with(u, 2, accuracy)?;
    let values = d2
        .values()
        .iter()
        .zip(d1.values())
        .zip(u.grid().nodes())
        .map(|((a, b), r)| a + alpha * b / r)
        .collect();
    Ok(u.with_values(values).with_edge(derived_edge(u)))
}

/// `Δ_α^{m/2} u` for even `m`, `(Δ_α^{(m−1)/2} u)'` for odd `m`, by recursion.
pub fn m_gradient(u: &GridFunction, m: u32, alpha: f64) -> Result<GridFunction> {
    m_gradient_with(u, m, alpha, DEFAULT_ACCURACY)
}

pub fn m_gradient_with(u: &GridFunction, m: u32, alpha: f64, accuracy: usize) -> Result<GridFunction> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    check_alpha(alpha)?;
    let mut v = u.clone();
    for _ in 0..m / 2 {
        v = alpha_laplacian_with(&v, alpha, accuracy)?;
    }
    if m % 2 == 1 {
        v = derivative_with(&v, 1, accuracy)?;
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// `Δ_α^k u = u^{(2k)} + Σ_{i=1}^{2k−1} c_i u^{(2k−i)}/r^i` (even) or
/// `(Δ_α^k u)' = u^{(2k+1)} + Σ_{i=1}^{2k} d_i u^{(2k+1−i)}/r^i` (odd).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub k: u32,
    pub parity: Parity,
    pub alpha: f64,
    /// `values[i-1]` is `c_i` (or `d_i`).
    pub values: Vec<f64>,
}

impl ExpansionCoefficients {
    /// Leading derivative order: `2k` or `2k+1`.
    pub fn order(&self) -> usize {
        2 * self.k as usize + usize::from(self.parity == Parity::Odd)
    }

    /// `(derivative order, power of 1/r, coefficient)` including the leading term.
    pub fn terms(&self) -> Vec<(usize, i32, f64)> {
        let n = self.order();
        std::iter::once((n, 0, 1.0))
            .chain(self.values.iter().enumerate().map(|(i, &c)| (n - i - 1, i as i32 + 1, c)))
            .filter(|t| t.2 != 0.0)
            .collect()
    }
}

/// Coefficient polynomials in α: `out[i][d]` is the coefficient of `α^d` in the
/// term with `u^{(n−i)}/r^i`, `i = 0..n`. Built by applying `D² + (α/r)D` to
/// `u^{(j)} r^{−i}` repeatedly.
pub fn expansion_polynomials(k: u32, parity: Parity) -> Vec<Vec<f64>> {
    // entry i: polynomial in α (ascending powers)
    let mut ops: Vec<Vec<f64>> = vec![vec![1.0]];
    for _ in 0..k {
        let mut next = vec![Vec::new(); ops.len() + 2];
        for (i, c) in ops.iter().enumerate() {
            let fi = i as f64;
            add_poly(&mut next[i], c, &[1.0]);
            add_poly(&mut next[i + 1], c, &[-2.0 * fi, 1.0]);
            add_poly(&mut next[i + 2], c, &[fi * (fi + 1.0), -fi]);
        }
        ops = next;
    }
    if parity == Parity::Odd {
        let mut next = vec![Vec::new(); ops.len() + 1];
        for (i, c) in ops.iter().enumerate() {
            add_poly(&mut next[i], c, &[1.0]);
            add_poly(&mut next[i + 1], c, &[-(i as f64)]);
        }
        ops = next;
    }
    // the lowest derivative in the expanded form is u', so the last entry vanishes
    ops.truncate(2 * k as usize + usize::from(parity == Parity::Odd));
    ops
}

fn add_poly(acc: &mut Vec<f64>, c: &[f64], factor: &[f64]) {
    let prod = poly_mul(c, factor);
    if acc.len() < prod.len() {
        acc.resize(prod.len(), 0.0);
    }
    for (a, p) in acc.iter_mut().zip(prod) {
        *a += p;
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

pub fn expansion_coefficients(k: u32, alpha: f64, parity: Parity) -> Result<ExpansionCoefficients> {
    if k == 0 {
        return Err(Error::InvalidArgument("expansion order k must be at least 1".into()));
    }
    let polys = expansion_polynomials(k, parity);
    let values = polys.iter().skip(1).map(|p| poly_eval(p, alpha)).collect();
    Ok(ExpansionCoefficients { k, parity, alpha, values })
}

/// Expanded form of `∇_α^m`: `Δ_α^{m/2}` or `(Δ_α^{(m−1)/2})'`.
pub fn gradient_expansion(m: u32, alpha: f64) -> Result<ExpansionCoefficients> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if m == 1 {
        return Ok(ExpansionCoefficients { k: 0, parity: Parity::Odd, alpha, values: vec![] });
    }
    let parity = if m % 2 == 0 { Parity::Even } else { Parity::Odd };
    expansion_coefficients(m / 2, alpha, parity)
}

/// Term-by-term evaluation of the expanded operator.
pub fn apply_expansion(u: &GridFunction, coeffs: &ExpansionCoefficients) -> Result<GridFunction> {
    apply_expansion_with(u, coeffs, DEFAULT_ACCURACY)
}

pub fn apply_expansion_with(
    u: &GridFunction,
    coeffs: &ExpansionCoefficients,
    accuracy: usize,
) -> Result<GridFunction> {
    let mut out = vec![0.0; u.len()];
    for (order, power, c) in coeffs.terms() {
        let d = derivative_with(u, order, accuracy)?;
        for ((o, v), r) in out.iter_mut().zip(d.values()).zip(u.grid().nodes()) {
            *o += c * v / r.powi(power);
        }
    }
    Ok(u.with_values(out).with_edge(derived_edge(u)))
}

/// CSV audit dump with columns `k,parity,index,value`.
pub fn coefficients_csv(all: &[ExpansionCoefficients]) -> String {
    let mut s = String::from("k,parity,index,value\n");
    for c in all {
        let parity = match c.parity {
            Parity::Even => "even",
            Parity::Odd => "odd",
        };
        for (i, v) in c.values.iter().enumerate() {
            s.push_str(&format!("{},{},{},{:e}\n", c.k, parity, i + 1, v));
        }
    }
    s
}

/// One evaluation point of the discrete `∇_α^m`: value = `weights · x[start..]`.
#[derive(Clone, Debug)]
pub struct OperatorRow {
    pub t: f64,
    pub r: f64,
    /// `dr` measure of the point (computational width times `dr/dt`).
    pub measure: f64,
    pub start: usize,
    pub weights: Vec<f64>,
}

/// `∇_α^m` as a sparse map from unknowns to evaluation points carrying quadrature measure.
/// Even `m` evaluates at the nodes; odd `m` at the midpoints between consecutive knots,
/// which avoids the alternating null mode of centred first differences.
/// Unknowns are the nodal values, plus the edge value when the edge is a tail.
#[derive(Clone, Debug)]
pub struct GradientOperator {
    pub m: u32,
    pub alpha: f64,
    pub accuracy: usize,
    pub unknowns: usize,
    pub rows: Vec<OperatorRow>,
}

impl GradientOperator {
    pub fn new(grid: &RadialGrid, m: u32, alpha: f64, accuracy: usize, edge: Edge) -> Result<Self> {
        check_alpha(alpha)?;
        let expansion = gradient_expansion(m, alpha)?;
        let terms = expansion.terms();
        let order = expansion.order();
        let n = grid.n();
        let tn = grid.t_nodes();
        let mut knots = tn.to_vec();
        let edge_knot = edge.knot_value().is_some();
        if edge_knot {
            knots.push(1.0);
        }
        let unknowns = if matches!(edge, Edge::Tail { .. }) { n + 1 } else { n };
        let tw = grid.t_weights();
        let mut points: Vec<(f64, f64)> = Vec::new();
        if m % 2 == 0 {
            points.extend(tn.iter().zip(tw).map(|(&t, &w)| (t, w)));
        } else {
            points.push((0.5 * tn[0], tn[0]));
            for k in 0..n - 1 {
                points.push((0.5 * (tn[k] + tn[k + 1]), tn[k + 1] - tn[k]));
            }
            points.push((0.5 * (tn[n - 1] + 1.0), 1.0 - tn[n - 1]));
        }
        let mut rows = Vec::with_capacity(points.len());
        for (t, width) in points {
            let r = grid.r_of_t(t);
            let pw = point_weights(grid, &knots, t, order, accuracy)?;
            let mut w = vec![0.0; pw.weights[0].len()];
            for &(j, power, c) in &terms {
                let f = c / r.powi(power);
                for (acc, v) in w.iter_mut().zip(&pw.weights[j]) {
                    *acc += f * v;
                }
            }
            let mut start = pw.start;
            // Dirichlet knot carries value zero and is not an unknown
            if !matches!(edge, Edge::Tail { .. }) && edge_knot && pw.start + w.len() > n {
                w.truncate(n - pw.start);
            }
            while w.first() == Some(&0.0) && w.len() > 1 {
                w.remove(0);
                start += 1;
            }
            rows.push(OperatorRow { t, r, measure: width * grid.dr_dt(t), start, weights: w });
        }
        Ok(Self { m, alpha, accuracy, unknowns, rows })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.weights.iter().zip(&x[row.start..]).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Quadrature weights `measure · r^γ` for the evaluation points.
    pub fn point_weights(&self, gamma: f64) -> Vec<f64> {
        self.rows.iter().map(|row| (row.measure.ln() + gamma * row.r.ln()).exp()).collect()
    }

    /// `Σ ω_e |∇^m x|^p` with `ω_e = measure · r^α`.
    pub fn energy(&self, x: &[f64], p: f64) -> f64 {
        let g = self.apply(x);
        self.point_weights(self.alpha).iter().zip(g).map(|(w, v)| w * v.abs().powf(p)).sum()
    }

    /// Half-bandwidth of `Dᵀ W D`.
    pub fn bandwidth(&self) -> usize {
        self.rows.iter().map(|r| r.weights.len().saturating_sub(1)).max().unwrap_or(0)
    }
}

/// Convenience: a grid function built from a closure on a shared grid.
pub fn sample(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::from_fn(grid.clone(), f)
}
