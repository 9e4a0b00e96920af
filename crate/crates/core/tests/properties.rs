//! Randomized invariants of the grid, functionals, rearrangements and minimizer.

use std::sync::Arc;

use proptest::prelude::*;

use hardy_sobolev::functionals::{weighted_dirichlet, weighted_dirichlet_components, weighted_p_norm};
use hardy_sobolev::grid::{sphere_area, Components};
use hardy_sobolev::rearrange::{
    decreasing_rearrangement_1d, double_star, hardy_littlewood_check, monotone_weight_constraint, monotonicity_defect,
    reference_weight, schwarz_y,
};
use hardy_sobolev::sharp_constant::{convexity_bound, eps_quotient_closed_form, hardy_constant};
use hardy_sobolev::*;

fn grading() -> impl Strategy<Value = Grading> {
    prop_oneof![
        Just(Grading::Uniform),
        Just(Grading::EqualMeasure),
        (1.0..1.2f64).prop_map(|ratio| Grading::Geometric { ratio }),
        (0.1..0.9f64).prop_map(|f| Grading::Split { r_break: f }),
    ]
}

/// Grid with cells in `s` and (when `m > 0`) in `t`, sized so gradients are defined.
fn cyl(k: usize, m: usize, r_max: f64, ns: usize, nt: usize, grading: Grading) -> Arc<CylGrid> {
    let s = RadialGrid::new(k, r_max, ns, grading).unwrap();
    let t = (m > 0).then(|| RadialGrid::new(m, r_max, nt, grading).unwrap());
    Arc::new(CylGrid::new(s, t).unwrap())
}

/// Random nonnegative values with at least one positive entry.
fn values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, len).prop_map(|mut v| {
        v[0] += 0.5;
        v
    })
}

fn equal_measure(k: usize, m: usize, n: usize) -> Arc<CylGrid> {
    cyl(k, m, 3.0, n, n, Grading::EqualMeasure)
}

fn is_nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cell_measures_tile_the_ball(d in 1usize..5, r_max in 0.5..20.0f64, n in 1usize..200, g in grading()) {
        let grid = RadialGrid::new(d, r_max, n, g).unwrap();
        let ball = sphere_area(d).unwrap() * r_max.powi(d as i32) / d as f64;
        let total: f64 = grid.measures().iter().sum();
        prop_assert!((total - ball).abs() <= 1e-10 * ball);
        prop_assert!(grid.measures().iter().all(|m| *m > 0.0));
        prop_assert!(grid.edges().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn weight_averages_bracket_the_cell_extremes(d in 1usize..4, a in -0.9..3.0f64, n in 2usize..64, g in grading()) {
        let grid = RadialGrid::new(d, 4.0, n, g).unwrap();
        let w = grid.weight_average(a).unwrap();
        for (i, wi) in w.iter().enumerate().skip(1) {
            let (lo, hi) = (grid.edges()[i].powf(a), grid.edges()[i + 1].powf(a));
            prop_assert!(*wi >= lo.min(hi) * (1.0 - 1e-12) && *wi <= lo.max(hi) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn functionals_are_homogeneous(
        vals in values(8 * 6),
        c in 0.01..100.0f64,
        p in 1.2..5.0f64,
        a in -1.5..2.0f64,
    ) {
        let grid = cyl(2, 2, 3.0, 8, 6, Grading::Uniform);
        let u = GridFunction::new(grid, vals).unwrap();
        let cu = u.scaled(c).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-10 * y.abs().max(1e-300);
        prop_assert!(rel(weighted_p_norm(&cu, p, a).unwrap(), c.powf(p) * weighted_p_norm(&u, p, a).unwrap()));
        prop_assert!(rel(weighted_dirichlet(&cu, p, a).unwrap(), c.powf(p) * weighted_dirichlet(&u, p, a).unwrap()));
    }

    #[test]
    fn quotients_ignore_scaling(vals in values(8 * 6), c in 0.01..100.0f64, beta in 0.0..1.9f64) {
        let grid = cyl(2, 2, 3.0, 8, 6, Grading::Uniform);
        let u = GridFunction::new(grid, vals).unwrap();
        let cu = u.scaled(c).unwrap();
        let hs = Params::hardy_sobolev(4, 2, 2.0, beta).unwrap();
        let (a, b) = (hs_quotient(&u, &hs).unwrap().value, hs_quotient(&cu, &hs).unwrap().value);
        prop_assert!((a - b).abs() <= 1e-10 * a);
        prop_assert!(((hs_constraint(&cu, &hs).unwrap() / hs_constraint(&u, &hs).unwrap()) / c.powf(hs.q) - 1.0).abs() < 1e-10);
        let hardy = Params::hardy(4, 2, 2.0, 0.5).unwrap();
        let (a, b) = (hardy_quotient(&u, &hardy).unwrap().value, hardy_quotient(&cu, &hardy).unwrap().value);
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn one_gradient_component_never_exceeds_both(vals in values(10 * 7), p in 1.1..4.0f64) {
        let grid = cyl(3, 1, 2.0, 10, 7, Grading::Uniform);
        let u = GridFunction::new(grid, vals).unwrap();
        let full = weighted_dirichlet_components(&u, p, 0.5, Components::Full).unwrap();
        for part in [Components::SOnly, Components::TOnly] {
            prop_assert!(weighted_dirichlet_components(&u, p, 0.5, part).unwrap() <= full);
        }
    }

    #[test]
    fn smooth_radial_profiles_respect_the_hardy_bound(
        widths in prop::collection::vec(0.3..3.0f64, 1..4),
        heights in prop::collection::vec(0.1..1.0f64, 3),
        p in 1.5..3.0f64,
    ) {
        let params = Params::hardy(3, 3, p, 0.0).unwrap();
        let grid = cyl(3, 0, 30.0, 3000, 1, Grading::Uniform);
        let u = GridFunction::from_fn(grid, |s, _| {
            widths.iter().zip(&heights).map(|(w, h)| h * (-(s / w).powi(2)).exp()).sum()
        })
        .unwrap();
        let q = hardy_quotient(&u, &params).unwrap().value;
        prop_assert!(q >= params.hardy_target() * (1.0 - 1e-2), "{q}");
    }

    #[test]
    fn line_rearrangement_sorts_and_keeps_the_distribution(vals in prop::collection::vec(0.0..10.0f64, 1..40)) {
        let measures = vec![0.7; vals.len()];
        let r = decreasing_rearrangement_1d(&vals, &measures).unwrap();
        prop_assert!(is_nonincreasing(&r.values));
        prop_assert_eq!(r.max_measure_mismatch, 0.0);
        let (mut a, mut b) = (vals.clone(), r.values.clone());
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
        let again = decreasing_rearrangement_1d(&r.values, &measures).unwrap();
        prop_assert_eq!(again.values, r.values);
    }

    #[test]
    fn rearrangement_preserves_order(vals in prop::collection::vec(0.0..10.0f64, 2..30), i in 0usize..30, j in 0usize..30) {
        // u ≤ v pointwise implies u★ ≤ v★
        let n = vals.len();
        let lower: Vec<f64> = vals.iter().enumerate().map(|(k, v)| if k == i % n || k == j % n { 0.5 * v } else { *v }).collect();
        let measures = vec![1.0; n];
        let hi = decreasing_rearrangement_1d(&vals, &measures).unwrap();
        let lo = decreasing_rearrangement_1d(&lower, &measures).unwrap();
        prop_assert!(lo.values.iter().zip(&hi.values).all(|(a, b)| a <= b));
    }

    #[test]
    fn double_star_is_monotone_equimeasurable_and_idempotent(vals in values(16 * 16), q in 1.0..5.0f64) {
        let grid = equal_measure(2, 2, 16);
        let u = GridFunction::new(grid.clone(), vals).unwrap();
        let us = double_star(&u).unwrap();
        prop_assert_eq!(monotonicity_defect(&us), 0.0);
        let ys = schwarz_y(&u).unwrap();
        for j in 0..16 {
            let column: Vec<f64> = (0..16).map(|i| ys.at(i, j)).collect();
            prop_assert!(is_nonincreasing(&column));
        }
        let (a, b) = (weighted_p_norm(&u, q, 0.0).unwrap(), weighted_p_norm(&us, q, 0.0).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a);
        let twice = double_star(&us).unwrap();
        prop_assert_eq!(twice.values(), us.values());
    }

    #[test]
    fn symmetrization_raises_pairings_with_symmetric_weights(vals in values(16 * 16), beta in 0.0..1.5f64, cut in 0.5..3.0f64) {
        let grid = equal_measure(2, 2, 16);
        let u = GridFunction::new(grid.clone(), vals).unwrap();
        let (w, _) = reference_weight(grid.clone(), beta, cut, None).unwrap();
        let (plain, sym) = hardy_littlewood_check(&u, &w).unwrap();
        prop_assert!(sym >= plain * (1.0 - 1e-14));

        let g: Vec<f64> = grid.s().nodes().iter().map(|s| 1.0 / (1.0 + s * s)).collect();
        let h: Vec<f64> = grid.t().nodes().iter().map(|t| (-t).exp()).collect();
        let (plain, sym) = monotone_weight_constraint(&u, &g, &h, 2.5).unwrap();
        prop_assert!(sym >= plain * (1.0 - 1e-14));
    }

    #[test]
    fn convexity_bound_holds(s in 0.0..10.0f64, t in 0.0..10.0f64, lambda in 1e-6..(1.0 - 1e-6), p in 1.0001..6.0f64) {
        let (lhs, rhs) = convexity_bound(s, t, lambda, p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }

    #[test]
    fn closed_form_quotient_decreases_to_the_constant(p in 1.1..5.0f64, alpha in -0.9..3.0f64, n in 1usize..6, e1 in 1e-4..2.0f64, e2 in 1e-4..2.0f64) {
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assume!(hi - lo > 1e-6);
        let q = |e| eps_quotient_closed_form(e, p, alpha, n).unwrap();
        prop_assert!(q(lo) < q(hi));
        let limit = 1.0 / hardy_constant(p, alpha, n).unwrap();
        prop_assert!(q(lo) > limit);
        prop_assert!((q(1e-12) - limit).abs() <= 1e-9 * limit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn descent_is_monotone_and_stays_on_the_constraint(
        seed in 0u64..1000,
        amplitude in 0.0..0.9f64,
        p in 1.5..3.0f64,
        beta in 0.0..1.0f64,
    ) {
        let params = Params::hardy_sobolev(4, 2, p, beta.min(p)).unwrap();
        let grid = cyl(2, 2, 5.0, 12, 12, Grading::Uniform);
        let opts = DescentOptions { tol: 1e-12, max_iter: 40, ..DescentOptions::default() };
        let trace = minimize_hs(&params, grid, &Init::Perturbed { seed, amplitude }, &opts).unwrap();
        prop_assert!(trace.is_monotone());
        for it in &trace.iterations {
            prop_assert!((it.constraint - 1.0).abs() <= 1e-8, "{}", it.constraint);
        }
        let check = hs_constraint(&trace.final_u, &params).unwrap();
        prop_assert!((check - 1.0).abs() <= 1e-8);
    }
}
