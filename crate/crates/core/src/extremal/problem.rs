use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::banded::BandedSpd;
use crate::error::{Error, Result};
use crate::mesh::{lagrange_eval, Edge, GridFunction, QuadratureRule, RadialGrid, INTERP_POINTS};
use crate::norms::tail_gradient_energy;
use crate::operators::{GradientOperator, ProblemParams};

/// Closure of a finite domain at `r = R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailClosure {
    /// `u(R) = 0`
    Dirichlet,
    /// `u = u(R) (R/r)^{α−1}` on `(R, ∞)`, the `Δ_α`-harmonic decay, with `u(R)` free;
    /// only for `m = 1`
    Harmonic,
}

/// Quadratic energy `xᵀAx` and critical mass `Σ ω_k |x_k|^q` on the unknowns of a grid.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub grid: Arc<RadialGrid>,
    pub params: ProblemParams,
    pub q: f64,
    pub op: GradientOperator,
    pub energy_weights: Vec<f64>,
    pub mass_weights: Vec<f64>,
    /// `Some(decay)` when the last unknown is a tail value
    pub tail_decay: Option<f64>,
    tail_energy: f64,
    matrix: BandedSpd,
    factor: Option<BandedSpd>,
}

impl Discretization {
    pub fn new(
        grid: Arc<RadialGrid>,
        params: ProblemParams,
        accuracy: usize,
        closure: TailClosure,
        factor: bool,
    ) -> Result<Self> {
        let q = params.require_sobolev()?;
        if params.p != 2.0 {
            return Err(Error::InvalidArgument(format!(
                "the quadratic energy needs p = 2, got {}",
                params.p
            )));
        }
        let tail_decay = if grid.is_infinite() || closure == TailClosure::Dirichlet {
            None
        } else {
            if params.m != 1 {
                return Err(Error::InvalidArgument(
                    "the harmonic tail closure is only available for m = 1".into(),
                ));
            }
            Some(params.alpha - 1.0)
        };
        let edge = match tail_decay {
            Some(decay) => Edge::Tail { value: 0.0, decay },
            None => Edge::Dirichlet,
        };
        let op = GradientOperator::new(&grid, params.m, params.alpha, accuracy, edge)?;
        let energy_weights = op.point_weights(params.alpha);
        let rule = QuadratureRule::new(&grid, params.theta)?;
        let mut mass_weights = rule.weighted().to_vec();
        if grid.is_infinite() {
            // the last cell reaches r = ∞; a spike there has a discrete quotient below S
            let n = mass_weights.len();
            mass_weights[n - 1] = 0.0;
        }
        let mut tail_energy = 0.0;
        if let Some(decay) = tail_decay {
            let r = grid.r_max();
            let k = decay * q - params.theta - 1.0;
            mass_weights.push(r.powf(params.theta + 1.0) / k);
            tail_energy = tail_gradient_energy(1.0, decay, r, 2.0, params.alpha);
        }
        let n = op.unknowns;
        let mut matrix = BandedSpd::zeros(n, op.bandwidth());
        for (row, &w) in op.rows.iter().zip(&energy_weights) {
            for (a, &wa) in row.weights.iter().enumerate() {
                for (b, &wb) in row.weights.iter().enumerate().take(a + 1) {
                    matrix.add(row.start + a, row.start + b, w * wa * wb);
                }
            }
        }
        if tail_decay.is_some() {
            matrix.add(n - 1, n - 1, tail_energy);
        }
        let factor = if factor { Some(matrix.clone().factor()?) } else { None };
        Ok(Self {
            grid,
            params,
            q,
            op,
            energy_weights,
            mass_weights,
            tail_decay,
            tail_energy,
            matrix,
            factor,
        })
    }

    pub fn unknowns(&self) -> usize {
        self.op.unknowns
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let g = self.op.apply(x);
        let mut e: f64 = self.energy_weights.iter().zip(&g).map(|(w, v)| w * v * v).sum();
        if self.tail_decay.is_some() {
            e += self.tail_energy * x[x.len() - 1].powi(2);
        }
        e
    }

    pub fn apply_matrix(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.factor.as_ref().expect("discretization built without factorization").solve(b)
    }

    /// `Σ ω_k |x_k|^q`
    pub fn mass(&self, x: &[f64]) -> f64 {
        self.mass_weights.iter().zip(x).map(|(w, v)| w * v.abs().powf(self.q)).sum()
    }

    /// `ω_k |x_k|^{q−2} x_k`, the gradient of `mass/q`.
    pub fn mass_gradient(&self, x: &[f64]) -> Vec<f64> {
        self.mass_weights
            .iter()
            .zip(x)
            .map(|(w, v)| w * v.abs().powf(self.q - 2.0) * v)
            .collect()
    }

    pub fn edge(&self, x: &[f64]) -> Edge {
        match self.tail_decay {
            Some(decay) => Edge::Tail { value: x[x.len() - 1], decay },
            None => Edge::Dirichlet,
        }
    }

    pub fn to_function(&self, x: &[f64]) -> GridFunction {
        let n = self.grid.n();
        GridFunction::new(self.grid.clone(), x[..n].to_vec())
            .expect("length matches grid")
            .with_edge(self.edge(x))
    }

    /// Unknowns of `u`; a missing tail value is extrapolated to `t = 1`.
    pub fn from_function(&self, u: &GridFunction) -> Result<Vec<f64>> {
        if u.grid().nodes() != self.grid.nodes() {
            return Err(Error::InvalidArgument("function lives on a different grid".into()));
        }
        let mut x = u.values().to_vec();
        if self.tail_decay.is_some() {
            let v = match u.edge() {
                Edge::Tail { value, .. } => value,
                Edge::Dirichlet => 0.0,
                Edge::Free => lagrange_eval(self.grid.t_nodes(), u.values(), 1.0, INTERP_POINTS),
            };
            x.push(v);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, SpacingLaw};
    use crate::norms::{gradient_energy, weighted_integral};

    fn setup(r_max: f64, closure: TailClosure) -> (Discretization, GridFunction) {
        let grid = Arc::new(
            build_grid(r_max, 400, SpacingLaw::Algebraic { scale: 1.0, power: 2.0 }).unwrap(),
        );
        let p = ProblemParams::new(1, 2.0, 3.0, 3.0, r_max).unwrap();
        let d = Discretization::new(grid.clone(), p, 6, closure, true).unwrap();
        let u = GridFunction::from_fn(grid, |r| (1.0 + r * r).recip());
        (d, u)
    }

    #[test]
    fn matrix_reproduces_energy() {
        let (d, u) = setup(f64::INFINITY, TailClosure::Dirichlet);
        let x = d.from_function(&u).unwrap();
        let ax = d.apply_matrix(&x);
        let quad: f64 = ax.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((quad / d.energy(&x) - 1.0).abs() < 1e-12);
        let direct = gradient_energy(&u.clone().with_edge(Edge::Dirichlet), &d.params).unwrap();
        assert!((d.energy(&x) / direct - 1.0).abs() < 1e-12);
        let y = d.solve(&ax);
        assert!(y.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn harmonic_tail_adds_exterior() {
        let (d, u) = setup(20.0, TailClosure::Harmonic);
        assert_eq!(d.unknowns(), 401);
        let x = d.from_function(&u).unwrap();
        let v = d.to_function(&x);
        assert!(matches!(v.edge(), Edge::Tail { decay, .. } if decay == 2.0));
        let mass = weighted_integral(&v, d.q, 3.0).unwrap();
        assert!((d.mass(&x) / mass - 1.0).abs() < 1e-12);
        // the quotient of 1/(1+r²) on (0, ∞) is 4/√3; R = 20 with a harmonic tail is close
        let s = d.energy(&x) / d.mass(&x).sqrt();
        assert!((s - 4.0 / 3f64.sqrt()).abs() < 0.05, "{s}");
    }

    #[test]
    fn rejects_tail_for_higher_order() {
        let grid = Arc::new(build_grid(10.0, 64, SpacingLaw::Uniform).unwrap());
        let p = ProblemParams::new(2, 2.0, 7.0, 7.0, 10.0).unwrap();
        assert!(Discretization::new(grid.clone(), p, 6, TailClosure::Harmonic, false).is_err());
        assert!(Discretization::new(grid, p, 6, TailClosure::Dirichlet, false).is_ok());
    }
}
