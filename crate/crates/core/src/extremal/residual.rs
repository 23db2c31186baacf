use std::f64::consts::PI;

use super::dilation::half_mass_radius;
use super::problem::{Discretization, TailClosure};
use crate::error::{Error, Result};
use crate::mesh::{Edge, GridFunction, QuadratureRule};
use crate::operators::{ProblemParams, DEFAULT_ACCURACY};

/// Number of test bumps in the weak residual.
pub const TEST_BUMPS: usize = 16;
/// Half-width of the window of bump centres in `ln r`, around the half-mass radius.
const WINDOW: f64 = 3.0;

/// Test functions `cos^{2m+2}(πx/2)` in `x = (ln r − c_j)/w`, sampled at the nodes.
#[derive(Clone, Debug)]
pub struct TestBumps {
    pub centres: Vec<f64>,
    pub width: f64,
    pub values: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
}

impl TestBumps {
    pub fn new(disc: &Discretization, centre: f64) -> Result<Self> {
        let grid = &disc.grid;
        let mut hi = centre.ln() + WINDOW;
        let lo = centre.ln() - WINDOW;
        if !grid.is_infinite() {
            hi = hi.min((0.9 * grid.r_max()).ln());
        }
        let span = hi - lo;
        if !(span > 0.0) {
            return Err(Error::GridTooCoarse("no room for residual test bumps".into()));
        }
        let spacing = span / (TEST_BUMPS + 1) as f64;
        let width = 2.0 * spacing;
        let power = 2 * disc.params.m as i32 + 2;
        let centres: Vec<f64> = (1..=TEST_BUMPS).map(|j| lo + spacing * j as f64).collect();
        let n = disc.unknowns();
        let values: Vec<Vec<f64>> = centres
            .iter()
            .map(|&c| {
                let mut v: Vec<f64> = grid
                    .nodes()
                    .iter()
                    .map(|&r| {
                        let x = (r.ln() - c) / width;
                        if x.abs() < 1.0 {
                            (0.5 * PI * x).cos().powi(power)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                v.resize(n, 0.0);
                v
            })
            .collect();
        let rule = QuadratureRule::new(grid, disc.params.alpha)?;
        let w = rule.weighted();
        let gram = values
            .iter()
            .map(|a| values.iter().map(|b| (0..w.len()).map(|k| w[k] * a[k] * b[k]).sum()).collect())
            .collect();
        Ok(Self { centres, width, values, gram })
    }

    /// `(φ_jᵀ A x, φ_jᵀ B(x))` for every bump.
    pub fn moments(&self, disc: &Discretization, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ax = disc.apply_matrix(x);
        let bx = disc.mass_gradient(x);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let a = self.values.iter().map(|phi| dot(phi, &ax)).collect();
        let b = self.values.iter().map(|phi| dot(phi, &bx)).collect();
        (a, b)
    }

    /// `G^{-1} v` for the Gram matrix of the bumps in `L²_α`.
    fn gram_solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = v.len();
        let mut l = self.gram.clone();
        for i in 0..n {
            for j in 0..=i {
                let s = l[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite(i));
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        let mut y = v.to_vec();
        for i in 0..n {
            y[i] = (y[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
        }
        for i in (0..n).rev() {
            y[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * y[k]).sum::<f64>()) / l[i][i];
        }
        Ok(y)
    }

    /// `sqrt(ρᵀ G⁻¹ ρ)` with `ρ_j = a_j − c b_j`.
    pub fn norm(&self, a: &[f64], b: &[f64], c: f64) -> Result<f64> {
        let rho: Vec<f64> = a.iter().zip(b).map(|(a, b)| a - c * b).collect();
        let g = self.gram_solve(&rho)?;
        Ok(rho.iter().zip(&g).map(|(x, y)| x * y).sum::<f64>().max(0.0).sqrt())
    }

    /// Coefficient `c` minimizing `norm(a, b, c)`.
    pub fn best_coefficient(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let gb = self.gram_solve(b)?;
        let num: f64 = a.iter().zip(&gb).map(|(x, y)| x * y).sum();
        let den: f64 = b.iter().zip(&gb).map(|(x, y)| x * y).sum();
        if !(den > 0.0) {
            return Err(Error::ZeroFunction);
        }
        Ok(num / den)
    }
}

fn closure_of(u: &GridFunction) -> TailClosure {
    match u.edge() {
        Edge::Tail { .. } => TailClosure::Harmonic,
        _ => TailClosure::Dirichlet,
    }
}

/// Weak-form `L²_α` norm of `(−Δ_α)^m u − λ r^{θ−α}|u|^{p*−2}u`, tested against
/// [`TEST_BUMPS`] bumps centred around the half-mass radius.
pub fn el_residual(u: &GridFunction, lambda: f64, params: &ProblemParams) -> Result<f64> {
    let disc = Discretization::new(
        u.grid_arc().clone(),
        *params,
        DEFAULT_ACCURACY,
        closure_of(u),
        false,
    )?;
    let x = disc.from_function(u)?;
    let bumps = TestBumps::new(&disc, half_mass_radius(u, params)?)?;
    let (a, b) = bumps.moments(&disc, &x);
    bumps.norm(&a, &b, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use crate::mesh::{build_grid, SpacingLaw};

    fn bubble(n: usize) -> GridFunction {
        let grid = Arc::new(
            build_grid(f64::INFINITY, n, SpacingLaw::Algebraic { scale: 1.0, power: 2.0 }).unwrap(),
        );
        // 1/(1+r²) solves −Δ_3 u = 8 u³ with critical exponent 4
        GridFunction::from_fn(grid, |r| (1.0 + r * r).recip()).with_edge(Edge::Dirichlet)
    }

    fn params() -> ProblemParams {
        ProblemParams::new(1, 2.0, 3.0, 3.0, f64::INFINITY).unwrap()
    }

    #[test]
    fn exact_profile_has_small_residual() {
        let p = params();
        let coarse = el_residual(&bubble(100), 8.0, &p).unwrap();
        let fine = el_residual(&bubble(200), 8.0, &p).unwrap();
        let scale = el_residual(&bubble(200), 0.0, &p).unwrap();
        assert!(fine < 1e-4 * scale, "{fine} {scale}");
        assert!(fine < coarse / 4.0, "{coarse} {fine}");
    }

    #[test]
    fn zero_multiplier_measures_operator() {
        let p = params();
        let r0 = el_residual(&bubble(200), 0.0, &p).unwrap();
        let r1 = el_residual(&bubble(200), 4.0, &p).unwrap();
        assert!(r0 > 0.0);
        assert!((r1 / r0 - 0.5).abs() < 1e-3);
    }
}
