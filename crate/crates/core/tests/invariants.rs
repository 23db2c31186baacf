use std::sync::Arc;

use proptest::prelude::*;
use radial_sobolev::corpus::{CorpusFunction, decaying_corpus};
use radial_sobolev::extension::extend;
use radial_sobolev::extremal::{default_initial, dilate, fix_gauge, mass_profile, minimize_rayleigh, MinimizeOptions};
use radial_sobolev::mesh::{build_grid, integrate, Edge, GridFunction, RadialGrid, SpacingLaw};
use radial_sobolev::norms::{gradient_energy, rayleigh_quotient, weighted_integral, weighted_norm};
use radial_sobolev::operators::{
    apply_expansion_with, derivative, expansion_coefficients, m_gradient, m_gradient_with, Parity,
    ProblemParams,
};

fn classical() -> ProblemParams {
    ProblemParams::new(1, 2.0, 3.0, 3.0, f64::INFINITY).unwrap()
}

fn mapped(n: usize) -> Arc<RadialGrid> {
    Arc::new(build_grid(f64::INFINITY, n, SpacingLaw::Algebraic { scale: 1.0, power: 2.0 }).unwrap())
}

fn uniform(r: f64, n: usize) -> Arc<RadialGrid> {
    Arc::new(build_grid(r, n, SpacingLaw::Uniform).unwrap())
}

fn on(grid: &Arc<RadialGrid>, f: &CorpusFunction) -> GridFunction {
    let u = GridFunction::from_fn(grid.clone(), |r| f.eval(r));
    if grid.is_infinite() {
        u.with_edge(Edge::Dirichlet)
    } else {
        u
    }
}

fn rational() -> impl Strategy<Value = CorpusFunction> {
    prop::collection::vec((0.2f64..1.0, 0.5f64..2.0, 1.0f64..2.5), 1..=3)
        .prop_map(|terms| CorpusFunction::Rational { terms })
}

/// Bumps supported inside `(lo, hi)`.
fn bumps(lo: f64, hi: f64) -> impl Strategy<Value = CorpusFunction> {
    prop::collection::vec((-1.0f64..1.0, 0.0f64..1.0, 0.1f64..0.3), 1..=3).prop_map(move |raw| {
        let span = hi - lo;
        let terms = raw
            .into_iter()
            .map(|(a, c, w)| {
                let w = w * span;
                (a, lo + w + c * (span - 2.0 * w), w)
            })
            .collect();
        CorpusFunction::Bumps { terms }
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadrature_is_positive(f in rational(), gamma in -0.9f64..6.0) {
        let u = on(&mapped(200), &f);
        let sq = u.with_values(u.values().iter().map(|x| x * x).collect());
        prop_assert!(integrate(&sq, gamma).unwrap() >= 0.0);
    }

    #[test]
    fn m_gradient_is_linear(f in rational(), g in rational(), a in -3.0f64..3.0, b in -3.0f64..3.0, m in 1u32..=3) {
        let grid = uniform(10.0, 300);
        let (u, v) = (on(&grid, &f), on(&grid, &g));
        let lhs = m_gradient(&u.combine(a, &v, b).unwrap(), m, 5.0).unwrap();
        let gu = m_gradient(&u, m, 5.0).unwrap();
        let gv = m_gradient(&v, m, 5.0).unwrap();
        // rounding is amplified by about h^{-m}·α/r at the first node
        let scale = max_abs(gu.values()).max(max_abs(gv.values())) * (a.abs() + b.abs());
        for k in 0..lhs.len() {
            let d = lhs.values()[k] - a * gu.values()[k] - b * gv.values()[k];
            prop_assert!(d.abs() <= 1e-9 * scale, "node {} deviation {:e}", k, d);
        }
    }

    #[test]
    fn expansion_matches_recursion(
        coefs in prop::collection::vec(0.1f64..1.0, 5),
        alpha_idx in 0usize..3,
        m in 2u32..=4,
    ) {
        // even polynomial of degree 8 with positive coefficients, so no Δ-power vanishes
        let alpha = [2.5, 3.0, 7.0][alpha_idx];
        let grid = uniform(1.0, 32);
        let u = GridFunction::from_fn(grid.clone(), |r| {
            coefs.iter().enumerate().map(|(i, c)| c * r.powi(2 * i as i32)).sum()
        });
        let parity = if m % 2 == 0 { Parity::Even } else { Parity::Odd };
        let c = expansion_coefficients(m / 2, alpha, parity).unwrap();
        let a = apply_expansion_with(&u, &c, 8).unwrap();
        let b = m_gradient_with(&u, m, alpha, 8).unwrap();
        for i in 4..grid.n() - 4 {
            let (x, y) = (a.values()[i], b.values()[i]);
            prop_assert!((x - y).abs() <= 1e-8 * y.abs(), "node {}: {} vs {}", i, x, y);
        }
    }

    #[test]
    fn transition_chain(f in bumps(0.05, 0.95)) {
        // ‖u^{(ℓ)}‖_{β_ℓ} ≤ Π_{j ≥ ℓ} 2/(β_j + 1) ‖u''‖_α with β_ℓ = α − 2(2−ℓ), for u vanishing near R
        let (m, alpha) = (2u32, 5.0);
        let grid = uniform(1.0, 400);
        let u = on(&grid, &f);
        let d: Vec<GridFunction> = (0..=m as usize).map(|l| derivative(&u, l).unwrap()).collect();
        let norm = |l: usize| weighted_norm(&d[l], 2.0, alpha - 2.0 * (m as f64 - l as f64)).unwrap();
        let top = norm(2);
        let c1 = 2.0 / (alpha - 2.0 + 1.0);
        let c0 = c1 * 2.0 / (alpha - 4.0 + 1.0);
        prop_assert!(norm(1) <= c1 * top * (1.0 + 1e-6), "{} {}", norm(1), c1 * top);
        prop_assert!(norm(0) <= c0 * top * (1.0 + 1e-6), "{} {}", norm(0), c0 * top);
    }

    #[test]
    fn norm_equivalence(f in bumps(0.05, 0.95)) {
        // ‖Δ_α u‖² = ‖u''‖² + α‖u'‖²_{α−2} lies in [1, 1 + 4α/(α−1)²]·‖u''‖²
        let alpha = 5.0;
        let grid = uniform(1.0, 400);
        let u = on(&grid, &f);
        let lap = weighted_norm(&m_gradient(&u, 2, alpha).unwrap(), 2.0, alpha).unwrap();
        let second = weighted_norm(&derivative(&u, 2).unwrap(), 2.0, alpha).unwrap();
        let ratio = (lap / second).powi(2);
        let hi = 1.0 + 4.0 * alpha / (alpha - 1.0).powi(2);
        prop_assert!(ratio >= 1.0 - 1e-6 && ratio <= hi + 1e-6, "ratio² = {}", ratio);
    }

    #[test]
    fn norms_are_homogeneous(f in rational(), c in -5.0f64..5.0) {
        prop_assume!(c.abs() > 1e-3);
        let p = classical();
        let u = on(&mapped(300), &f);
        let v = u.scaled(c);
        let (nu, nv) = (weighted_norm(&u, 4.0, 3.0).unwrap(), weighted_norm(&v, 4.0, 3.0).unwrap());
        prop_assert!(nu > 0.0);
        prop_assert!((nv / (c.abs() * nu) - 1.0).abs() < 1e-12);
        let (qu, qv) = (rayleigh_quotient(&u, &p).unwrap(), rayleigh_quotient(&v, &p).unwrap());
        prop_assert!((qu / qv - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dilation_preserves_integrals(f in rational(), log_eps in -2.3f64..2.3) {
        let p = classical();
        let u = on(&mapped(800), &f);
        let v = dilate(&u, log_eps.exp(), &p).unwrap();
        let e = gradient_energy(&v, &p).unwrap() / gradient_energy(&u, &p).unwrap();
        let m = weighted_integral(&v, 4.0, 3.0).unwrap() / weighted_integral(&u, 4.0, 3.0).unwrap();
        prop_assert!((e - 1.0).abs() < 1e-8 && (m - 1.0).abs() < 1e-8, "{} {}", e, m);
    }

    #[test]
    fn gauge_fixes_half_mass(f in rational()) {
        let p = classical();
        let u = on(&mapped(800), &f);
        let g = fix_gauge(&u, &p).unwrap();
        let prof = mass_profile(&g, &p).unwrap();
        prop_assert!((prof.at(1.0) / prof.total - 0.5).abs() < 1e-8);
        let q = rayleigh_quotient(&g, &p).unwrap() / rayleigh_quotient(&u, &p).unwrap();
        prop_assert!((q - 1.0).abs() < 1e-8);
    }

    #[test]
    fn extension_is_linear(f in bumps(0.0, 1.0), g in bumps(0.0, 1.0), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let grid = uniform(1.0, 200);
        let (u, v) = (on(&grid, &f), on(&grid, &g));
        let tu = extend(&u, 3.0).unwrap().function;
        let tv = extend(&v, 3.0).unwrap().function;
        let tw = extend(&u.combine(a, &v, b).unwrap(), 3.0).unwrap().function;
        let scale = max_abs(tu.values()).max(max_abs(tv.values())) * (a.abs() + b.abs()) + f64::MIN_POSITIVE;
        for k in 0..tw.len() {
            let d = tw.values()[k] - a * tu.values()[k] - b * tv.values()[k];
            prop_assert!(d.abs() <= 4.0 * f64::EPSILON * scale, "node {}: {:e}", k, d);
        }
    }

    #[test]
    fn extension_keeps_supported_functions(f in bumps(0.01, 0.24)) {
        let grid = uniform(1.0, 200);
        let u = on(&grid, &f);
        let t = extend(&u, 3.0).unwrap().function;
        for (k, (r, v)) in t.grid().nodes().iter().zip(t.values()).enumerate() {
            let expect = if *r < 1.0 { u.values()[k] } else { 0.0 };
            prop_assert_eq!(*v, expect);
        }
    }
}

#[test]
fn minimizer_respects_the_constraint() {
    let p = classical();
    let grid = mapped(400);
    let res = minimize_rayleigh(&p, &default_initial(&grid, &p), &MinimizeOptions::default()).unwrap();
    let n = weighted_norm(&res.profile, 4.0, 3.0).unwrap();
    assert!((n - 1.0).abs() < 1e-10, "{n}");
}

#[test]
fn translation_changes_the_quotient() {
    let p = classical();
    let grid = mapped(800);
    let mut largest = 0.0f64;
    for f in decaying_corpus(3, 10, &p) {
        let u = on(&grid, &f);
        let v = GridFunction::from_fn(grid.clone(), |r| f.eval(r + 0.5)).with_edge(Edge::Dirichlet);
        let (qu, qv) = (rayleigh_quotient(&u, &p).unwrap(), rayleigh_quotient(&v, &p).unwrap());
        largest = largest.max((qv / qu - 1.0).abs());
    }
    assert!(largest > 1e-3, "{largest}");
}
