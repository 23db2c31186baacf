//! Seeded random test functions: decaying rational profiles on `(0, ∞)`, compactly
//! supported bumps, and smooth functions on a bounded interval.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::operators::ProblemParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CorpusFunction {
    /// `Σ c_i (1 + (r/s_i)²)^{−κ_i}`
    Rational { terms: Vec<(f64, f64, f64)> },
    /// `Σ a_i exp(−1/(1 − x_i²))` with `x_i = (r − c_i)/w_i`, supported in `|x_i| < 1`
    Bumps { terms: Vec<(f64, f64, f64)> },
    /// `Σ a_k cos(ω_k r + φ_k)`
    Trigonometric { terms: Vec<(f64, f64, f64)> },
}

impl CorpusFunction {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            CorpusFunction::Rational { terms } => {
                terms.iter().map(|&(c, s, k)| c * (1.0 + (r / s).powi(2)).powf(-k)).sum()
            }
            CorpusFunction::Bumps { terms } => terms
                .iter()
                .map(|&(a, c, w)| {
                    let x = (r - c) / w;
                    if x.abs() < 1.0 {
                        a * (-1.0 / (1.0 - x * x)).exp()
                    } else {
                        0.0
                    }
                })
                .sum(),
            CorpusFunction::Trigonometric { terms } => {
                terms.iter().map(|&(a, w, p)| a * (w * r + p).cos()).sum()
            }
        }
    }

    /// Support `(lo, hi)` for bumps, `None` otherwise.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            CorpusFunction::Bumps { terms } => Some(terms.iter().fold(
                (f64::INFINITY, 0.0f64),
                |(lo, hi), &(_, c, w)| (lo.min(c - w), hi.max(c + w)),
            )),
            _ => None,
        }
    }
}

/// ChaCha8 generator on an independent stream of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Positive combination of rational profiles with scales in `[1/2, 2]` and decay fast
/// enough for finite energy and mass.
pub fn decaying_profile<R: Rng>(g: &mut R, params: &ProblemParams) -> CorpusFunction {
    let gap = params.alpha - 2.0 * params.m as f64 + 1.0;
    let kappa_min = 0.5 * gap.max(0.5);
    let k = g.gen_range(1..=3);
    let terms = (0..k)
        .map(|_| {
            let c = g.gen_range(0.2..1.0);
            let s = 2f64.powf(g.gen_range(-1.0..1.0));
            let kappa = kappa_min + g.gen_range(0.0..1.5);
            (c, s, kappa)
        })
        .collect();
    CorpusFunction::Rational { terms }
}

pub fn decaying_corpus(seed: u64, count: usize, params: &ProblemParams) -> Vec<CorpusFunction> {
    let mut g = rng(seed, 1);
    (0..count).map(|_| decaying_profile(&mut g, params)).collect()
}

/// Sums of one to three smooth bumps with supports inside `(0.05 R, 0.95 R)`.
pub fn bump_corpus(seed: u64, count: usize, r_max: f64) -> Vec<CorpusFunction> {
    let mut g = rng(seed, 2);
    (0..count)
        .map(|_| {
            let k = g.gen_range(1..=3);
            let terms = (0..k)
                .map(|_| {
                    let a = g.gen_range(-1.0..1.0);
                    let lo = 0.05 * r_max;
                    let hi = 0.95 * r_max;
                    let w = g.gen_range(0.05..0.3) * r_max;
                    let c = g.gen_range((lo + w).min(hi - w)..=(hi - w).max(lo + w));
                    (a, c, w)
                })
                .collect();
            CorpusFunction::Bumps { terms }
        })
        .collect()
}

/// Smooth non-vanishing-at-`R` functions on `(0, R)`: sums of slow cosines.
pub fn interval_corpus(seed: u64, count: usize, r_max: f64) -> Vec<CorpusFunction> {
    let mut g = rng(seed, 3);
    (0..count)
        .map(|_| {
            let k = g.gen_range(1..=4);
            let terms = (0..k)
                .map(|_| {
                    let a = g.gen_range(-1.0..1.0);
                    let w = g.gen_range(0.0..4.0) / r_max;
                    let p = g.gen_range(0.0..std::f64::consts::TAU);
                    (a, w, p)
                })
                .collect();
            CorpusFunction::Trigonometric { terms }
        })
        .collect()
}
