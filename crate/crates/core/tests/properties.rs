use mmot::barycenter::extract_barycenter;
use mmot::monge::{enumerate_mmc, two_point_monge};
use mmot::simplex::{check_certificate, TransportLp};
use mmot::{
    build_tensor, center, moments, negsum_cost, pairwise_cost, verify_coupling, Convention, Instance, Rational, Scalar,
    SimplexConfig,
};
use proptest::prelude::*;

fn coords(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.0f64..6.0, len)
}

/// Instances with `N ∈ n`, `m ∈ m`, `d ∈ d`.
fn instances(
    n: std::ops::RangeInclusive<usize>,
    m: std::ops::RangeInclusive<usize>,
    d: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Instance> {
    (n, m, d).prop_flat_map(|(n, m, d)| {
        coords(n * m * d).prop_map(move |flat| {
            let points = flat
                .chunks(m * d)
                .map(|marginal| marginal.chunks(d).map(<[f64]>::to_vec).collect())
                .collect();
            Instance::from_points(points).unwrap()
        })
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn lp_value(inst: &Instance, convention: Convention) -> f64 {
    let tensor = build_tensor::<f64>(inst, convention).unwrap();
    mmot::solve_lp(inst, &tensor, &SimplexConfig::default()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn centering_is_idempotent_and_zero_mean(inst in instances(2..=4, 1..=4, 1..=3)) {
        let (once, shifts) = center(&inst);
        let (twice, _) = center(&once);
        let scale = inst.to_points().iter().flatten().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
        for (a, b) in once.to_points().iter().flatten().flatten().zip(twice.to_points().iter().flatten().flatten()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
        for mu in once.marginals() {
            let norm = mu.mean().iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(norm <= 1e-12 * scale);
        }
        let before = moments(&inst).total;
        let after = moments(&once).total;
        prop_assert!(after <= before + 1e-12 * before.max(1.0));
        let mean_mass: f64 = shifts.iter().map(|s| s.iter().map(|x| x * x).sum::<f64>()).sum();
        prop_assert!(rel_close(before, after + mean_mass, 1e-10));
    }

    #[test]
    fn pairwise_and_negsum_differ_by_squared_norms(pts in (2usize..=6, 1usize..=4).prop_flat_map(|(n, d)| prop::collection::vec(coords(d), n))) {
        let n = pts.len() as f64;
        let norms: f64 = pts.iter().map(|p| p.iter().map(|x| x * x).sum::<f64>()).sum();
        let lhs = pairwise_cost(&pts).unwrap();
        let rhs = n * norms + negsum_cost(&pts).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (n * norms).max(1.0));
    }

    #[test]
    fn convention_shift_holds_at_plan_level(inst in instances(3..=3, 2..=2, 1..=3)) {
        let shift = inst.n_marginals() as f64 * moments(&inst).total;
        let pair = build_tensor::<f64>(&inst, Convention::PairwiseUnordered).unwrap();
        let neg = build_tensor::<f64>(&inst, Convention::NegSquaredSum).unwrap();
        let config = SimplexConfig::default();
        let lp_pair = mmot::solve_lp(&inst, &pair, &config).unwrap();
        let lp_neg = mmot::solve_lp(&inst, &neg, &config).unwrap();
        prop_assert!(rel_close(lp_pair.value - lp_neg.value, shift, 1e-9));
        prop_assert!(rel_close(lp_pair.coupling.cost(&neg), lp_neg.value, 1e-9));
        let ordered = lp_value(&inst, Convention::PairwiseOrdered);
        prop_assert!(rel_close(ordered, 2.0 * lp_pair.value, 1e-9));
    }

    #[test]
    fn per_marginal_translation_keeps_the_plan_optimal(
        inst in instances(2..=4, 2..=3, 1..=2),
        raw in prop::collection::vec(-4.0f64..4.0, 8),
    ) {
        let d = inst.dim();
        let shifts: Vec<Vec<f64>> = (0..inst.n_marginals()).map(|i| (0..d).map(|c| raw[(i * d + c) % raw.len()]).collect()).collect();
        let moved = Instance::new(
            inst.marginals().iter().zip(&shifts).map(|(mu, t)| mu.translated(t)).collect(),
        ).unwrap();
        let config = SimplexConfig::default();
        let before = mmot::solve_lp(&inst, &build_tensor::<f64>(&inst, Convention::PairwiseUnordered).unwrap(), &config).unwrap();
        let moved_tensor = build_tensor::<f64>(&moved, Convention::PairwiseUnordered).unwrap();
        let after = mmot::solve_lp(&moved, &moved_tensor, &config).unwrap();
        // The old plan is still feasible and must still be optimal.
        prop_assert!(rel_close(before.coupling.cost(&moved_tensor), after.value, 1e-9));
    }

    #[test]
    fn solver_output_is_a_certified_vertex(inst in instances(2..=4, 2..=4, 1..=3)) {
        let tensor = build_tensor::<f64>(&inst, Convention::PairwiseUnordered).unwrap();
        let lp = mmot::solve_lp(&inst, &tensor, &SimplexConfig::default()).unwrap();
        let bound = inst.n_marginals() * (inst.support_size() - 1) + 1;
        prop_assert!(lp.coupling.support_size() <= bound);
        prop_assert!(verify_coupling(&inst, &lp.coupling).is_feasible(&1e-12));
        let check = check_certificate(&TransportLp::uniform(&tensor), &lp.coupling, &lp.certificate);
        prop_assert!(check.duality_gap <= 1e-9 * lp.value.abs().max(1.0));
        prop_assert!(check.max_infeasibility <= 1e-9 * lp.value.abs().max(1.0));
    }

    #[test]
    fn monge_cost_never_undercuts_the_lp(inst in instances(2..=4, 2..=3, 1..=3)) {
        let tensor = build_tensor::<f64>(&inst, Convention::PairwiseUnordered).unwrap();
        let lp = mmot::solve_lp(&inst, &tensor, &SimplexConfig::default()).unwrap();
        let mmc = enumerate_mmc(&inst, &tensor).unwrap().mmc;
        prop_assert!(mmc >= lp.value - 1e-7);
    }

    #[test]
    fn two_point_value_is_invariant_under_global_sign_flip(inst in instances(2..=6, 2..=2, 1..=4)) {
        let (centered, _) = center(&inst);
        let flipped = Instance::from_points(
            centered.to_points().iter().map(|mu| mu.iter().map(|p| p.iter().map(|x| -x).collect()).collect()).collect(),
        ).unwrap();
        let (_, a) = two_point_monge::<f64>(&centered).unwrap();
        let (_, b) = two_point_monge::<f64>(&flipped).unwrap();
        prop_assert!(rel_close(a, b, 1e-12));
        let (_, ea) = two_point_monge::<Rational>(&centered).unwrap();
        let (_, eb) = two_point_monge::<Rational>(&flipped).unwrap();
        prop_assert_eq!(ea, eb);
    }

    #[test]
    fn barycenter_weights_sum_to_one(inst in instances(2..=3, 2..=3, 1..=2)) {
        let config = SimplexConfig::default();
        let tensor = build_tensor::<Rational>(&inst, Convention::PairwiseUnordered).unwrap();
        let lp = mmot::solve_lp(&inst, &tensor, &config).unwrap();
        let bary = extract_barycenter(&inst, &lp.coupling, &config).unwrap();
        prop_assert_eq!(bary.total_weight(), Rational::from_count(1));
        let n = Rational::from_count(inst.n_marginals());
        prop_assert_eq!(bary.functional_value * n, lp.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn vertex_support_bound_on_500_instances(inst in instances(2..=4, 2..=4, 1..=3)) {
        let tensor = build_tensor::<f64>(&inst, Convention::PairwiseUnordered).unwrap();
        let lp = mmot::solve_lp(&inst, &tensor, &SimplexConfig::default()).unwrap();
        prop_assert!(lp.coupling.support_size() <= inst.n_marginals() * (inst.support_size() - 1) + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exact_and_float_values_agree(inst in instances(3..=3, 3..=3, 2..=2)) {
        let config = SimplexConfig::default();
        let float = mmot::solve_lp(&inst, &build_tensor::<f64>(&inst, Convention::PairwiseUnordered).unwrap(), &config).unwrap();
        let exact = mmot::solve_lp(&inst, &build_tensor::<Rational>(&inst, Convention::PairwiseUnordered).unwrap(), &config).unwrap();
        let exact_value = exact.value.to_f64();
        prop_assert!((float.value - exact_value).abs() <= 1e-8 * (1.0 + exact_value.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_marginal_vertices_are_scaled_permutations(inst in instances(2..=2, 2..=5, 1..=3)) {
        let tensor = build_tensor::<f64>(&inst, Convention::PairwiseUnordered).unwrap();
        let lp = mmot::solve_lp(&inst, &tensor, &SimplexConfig::default()).unwrap();
        let m = inst.support_size();
        prop_assert_eq!(lp.coupling.support_size(), m);
        let mut rows = vec![false; m];
        let mut cols = vec![false; m];
        for (alpha, w) in lp.coupling.entries() {
            prop_assert!((w - 1.0 / m as f64).abs() <= 1e-12);
            rows[alpha.0[0]] = true;
            cols[alpha.0[1]] = true;
        }
        prop_assert!(rows.iter().chain(&cols).all(|&hit| hit));
    }
}
