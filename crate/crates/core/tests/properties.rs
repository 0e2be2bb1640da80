use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use spinorbit::bench::{dove_prism, hwp, kron, mzim_sort, BetaSetting, NoiseModel, OpticalElement};
use spinorbit::contextuality::{kd_combinations, kd_report, DEFAULT_DECISION_TOL};
use spinorbit::coupling::{connection_targets, multimaximal_feasible, DEFAULT_FEASIBILITY_TOL};
use spinorbit::measurement::{
    correlation_m, correlation_set, expectations, measure_intensities, normalize_record,
    record_from_moments, simulate_table, AngleSet, Context, ExperimentTable, Property,
};
use spinorbit::mode::{concurrence, make_mode, rotated_decomposition, SpinOrbitMode};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn mode() -> impl Strategy<Value = SpinOrbitMode> {
    [complex(), complex(), complex(), complex()]
        .prop_filter("nonzero", |a| a.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6)
        .prop_map(|[a, b, c, d]| make_mode(a, b, c, d).unwrap())
}

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn noise() -> impl Strategy<Value = NoiseModel> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64)
        .prop_map(|(v1, v2, e)| NoiseModel::new(v1, v2, e).unwrap())
}

fn angles() -> impl Strategy<Value = AngleSet> {
    (angle(), angle(), angle(), angle()).prop_map(|(a1, a2, b1, b2)| AngleSet::new(a1, a2, b1, b2).unwrap())
}

/// Random 2×2 unitary `e^{iφ}·[[a, −b*], [b, a*]]`.
fn unitary2() -> impl Strategy<Value = [[Complex64; 2]; 2]> {
    (complex(), complex(), angle())
        .prop_filter("nonzero", |(a, b, _)| a.norm_sqr() + b.norm_sqr() > 1e-6)
        .prop_map(|(a, b, phi)| {
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (a, b) = (a / n, b / n);
            let g = Complex64::from_polar(1.0, phi);
            [[g * a, -g * b.conj()], [g * b, g * a.conj()]]
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn constructed_modes_are_normalized(m in mode()) {
        prop_assert!((m.as_vector().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concurrence_is_bounded(m in mode()) {
        let c = concurrence(&m);
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(m in mode(), u in unitary2(), w in unitary2()) {
        let local = OpticalElement { kind: spinorbit::bench::ElementKind::Composite, matrix: kron(&u, &w) };
        let moved = local.apply(m.as_vector()).normalize().unwrap();
        prop_assert!((concurrence(&moved) - concurrence(&m)).abs() < 1e-12);
    }

    #[test]
    fn decomposition_preserves_norm(m in mode(), a in angle(), b in angle()) {
        let total: f64 = rotated_decomposition(&m, a, b).intensities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plates_and_prisms_preserve_norm(m in mode(), theta in angle(), n in noise()) {
        prop_assert!((hwp(theta).apply(m.as_vector()).norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((dove_prism(theta, &NoiseModel::ideal()).apply(m.as_vector()).norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(dove_prism(theta, &n).is_unitary(1e-12));
    }

    #[test]
    fn parity_split_conserves_intensity(m in mode(), v in 0.0..=1.0f64) {
        let n = NoiseModel::new(v, v, 0.0).unwrap();
        let split = mzim_sort(m.as_vector(), &n, BetaSetting::First);
        prop_assert!((split.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn records_are_probability_vectors(m in mode(), a in angle(), b in angle(), n in noise()) {
        let r = measure_intensities(&m, a, b, BetaSetting::Second, &n).unwrap();
        prop_assert!(r.intensities().iter().all(|x| *x >= 0.0));
        prop_assert!((r.total() - 1.0).abs() < 1e-9);
        let corr = correlation_m(&r);
        prop_assert!(corr.abs() <= 1.0 + 1e-12);
        let e = expectations(&r);
        prop_assert_eq!(e.ab.to_bits(), corr.to_bits());
        prop_assert!(e.a.abs() <= 1.0 + 1e-12 && e.b.abs() <= 1.0 + 1e-12);
    }
}

fn table_from_raw(angles: AngleSet, raw: [[f64; 4]; 4]) -> ExperimentTable {
    ExperimentTable::from_records(
        angles,
        Context::ALL.map(|ctx| {
            let (a, b) = angles.context_angles(ctx);
            normalize_record(raw[ctx.slot()], a, b).unwrap()
        }),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn correlator_saturates_only_on_pure_parity(raw in prop::array::uniform4(0.0..1.0f64)) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let r = normalize_record(raw, 0.0, 0.0).unwrap();
        let m = correlation_m(&r);
        if (m.abs() - 1.0).abs() < 1e-15 {
            prop_assert!((r.i_pm() == 0.0 && r.i_mp() == 0.0) || (r.i_pp() == 0.0 && r.i_mm() == 0.0));
        }
    }

    #[test]
    fn delta0_equals_sum_of_connection_targets(
        m in mode(), set in angles(), n in noise()
    ) {
        let table = simulate_table(&m, &set, &n).unwrap();
        let t: f64 = connection_targets(&table).unwrap().iter().sum();
        let r = kd_report(&table, DEFAULT_DECISION_TOL).unwrap();
        prop_assert!((t - r.delta0).abs() < 1e-12);
    }

    #[test]
    fn shared_marginals_reduce_kd_to_chsh_variants(
        a in prop::array::uniform2(-0.3..0.3f64),
        b in prop::array::uniform2(-0.3..0.3f64),
        m in prop::array::uniform4(-0.35..0.35f64),
    ) {
        let set = AngleSet::preset();
        let records = Context::ALL.map(|ctx| {
            let (al, be) = set.context_angles(ctx);
            record_from_moments(al, be, a[ctx.i - 1], b[ctx.j - 1], m[ctx.slot()]).unwrap()
        });
        let table = ExperimentTable::from_records(set, records).unwrap();
        let r = kd_report(&table, DEFAULT_DECISION_TOL).unwrap();
        prop_assert!(r.delta0 < 1e-12);
        let chsh = kd_combinations(correlation_set(&table).unwrap().m_values());
        for (got, want) in r.s_kd.iter().zip(chsh) {
            prop_assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_perturbations_keep_clear_verdicts(
        raw in prop::array::uniform4(prop::array::uniform4(0.01..1.0f64)),
        bump in prop::array::uniform4(prop::array::uniform4(-1.0..1.0f64)),
    ) {
        let set = AngleSet::preset();
        let table = table_from_raw(set, raw);
        let r = kd_report(&table, DEFAULT_DECISION_TOL).unwrap();
        prop_assume!(r.margin.abs() > 1e-6);
        let nudged = table.complete_records().unwrap().map(|rec| rec.intensities());
        let mut perturbed = nudged;
        for k in 0..4 {
            for l in 0..4 {
                perturbed[k][l] = (nudged[k][l] + 1e-13 * bump[k][l]).max(0.0);
            }
        }
        let r2 = kd_report(&table_from_raw(set, perturbed), DEFAULT_DECISION_TOL).unwrap();
        prop_assert_eq!(r.contextual, r2.contextual);
    }

    #[test]
    fn feasibility_ignores_outcome_relabeling(
        m in mode(), set in angles(), n in noise(), which in 0usize..4
    ) {
        let table = simulate_table(&m, &set, &n).unwrap();
        let r = kd_report(&table, DEFAULT_DECISION_TOL).unwrap();
        prop_assume!(r.margin.abs() > 1e-6);
        let property = [Property::A(1), Property::A(2), Property::B(1), Property::B(2)][which];
        let flipped = table.flip(property);
        let before = multimaximal_feasible(&table, DEFAULT_FEASIBILITY_TOL).unwrap();
        let after = multimaximal_feasible(&flipped, DEFAULT_FEASIBILITY_TOL).unwrap();
        prop_assert_eq!(before.feasible, after.feasible);
        prop_assert_eq!(r.contextual, kd_report(&flipped, DEFAULT_DECISION_TOL).unwrap().contextual);
    }

    #[test]
    fn witnesses_reproduce_the_data(m in mode(), set in angles(), n in noise()) {
        let table = simulate_table(&m, &set, &n).unwrap();
        let verdict = multimaximal_feasible(&table, DEFAULT_FEASIBILITY_TOL).unwrap();
        if let Some(w) = &verdict.witness {
            let problem = spinorbit::coupling::CouplingProblem::new(&table, DEFAULT_FEASIBILITY_TOL).unwrap();
            prop_assert!(problem.witness_residual(w) <= DEFAULT_FEASIBILITY_TOL);
            prop_assert!(w.iter().all(|p| *p >= 0.0));
        }
    }
}
