//! Property tests for the invariants every construction must keep.

mod common;

use localdisc::one_way::beta_one_way;
use localdisc::report::{sweep, write_csv};
use localdisc::separable::{
    build_optimal_separable_povm_in, sep_lower_bound_mixed, twirl, SeparableForm,
};
use localdisc::two_way::trace_t_rank_weighted;
use localdisc::{
    beta_sep_pure, beta_two_way_qubit_analytic, beta_two_way_upper, build_mub_basis,
    build_optimal_separable_povm, build_two_way_t, grid_oracle, povm_element_check,
    simulate_protocol, state_from_spectrum, support_projection, trace_t_closed_form,
    BipartiteState, FamilySpec, Operator, OptimizerConfig, SchmidtBases, SchmidtSpectrum, Source,
    Vector,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn quick() -> OptimizerConfig {
    OptimizerConfig {
        starts: 4,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn separable_pair_matches_oracle_and_certifies(seed in any::<u64>(), d in 2usize..=5) {
        let s = random_spectrum(d, &mut rng(seed));
        let pair = build_optimal_separable_povm(&s);
        let check = pair.check().unwrap();
        prop_assert!(check.passed(), "{check:?}");
        prop_assert!(pair.t.max_abs_diff(&separable_t(s.lambdas())) < 1e-10);
        prop_assert!((pair.t.expectation(&psi(s.lambdas())).re - 1.0).abs() < 1e-10);
        let dim = (d * d) as f64;
        prop_assert!((pair.t.trace_re() / dim - beta_sep_pure(&s, d * d)).abs() < 1e-12);
        prop_assert!((beta_sep_pure(&s, d * d) - s.sum_sqrt().powi(2) / dim).abs() < 1e-12);
    }

    #[test]
    fn separable_pair_in_rotated_bases(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let s = random_spectrum(d, &mut r);
        let bases = SchmidtBases {
            a: random_orthonormal_basis(d, &mut r),
            b: random_orthonormal_basis(d, &mut r),
        };
        let pair = build_optimal_separable_povm_in(&s, bases.clone()).unwrap();
        prop_assert!(pair.check().unwrap().passed());
        let mut state = Vector::zeros(d * d);
        for (k, lambda) in s.lambdas().iter().enumerate() {
            let term = bases.a[k].tensor(&bases.b[k]).scale(Complex64::new(lambda.sqrt(), 0.0));
            state = &state + &term;
        }
        prop_assert!((pair.t.expectation(&state).re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn twirl_is_the_pinching_and_idempotent(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let t = random_psd(d * d, 1 + (seed as usize % (d * d)), &mut r);
        let bases = SchmidtBases::computational(d);
        let once = twirl(&t, &bases).unwrap();
        prop_assert!(once.max_abs_diff(&pinch(&t, d)) < 1e-10);
        prop_assert!(twirl(&once, &bases).unwrap().max_abs_diff(&once) < 1e-12);
    }

    #[test]
    fn product_twirl_stays_separable_and_pinches(seed in any::<u64>(), d in 2usize..=4, terms in 1usize..=3) {
        let mut r = rng(seed);
        let mut form = SeparableForm::new((d, d));
        for _ in 0..terms {
            let a = random_psd(d, 1 + (seed as usize % d), &mut r);
            let b = random_psd(d, d, &mut r);
            form.push(0.5, a, b).unwrap();
        }
        let bases = SchmidtBases::computational(d);
        let twirled = form.twirled(&bases).unwrap();
        prop_assert!(twirled.all_terms_psd(1e-10));
        prop_assert!(twirled.assemble().max_abs_diff(&pinch(&form.assemble(), d)) < 1e-10);
    }

    #[test]
    fn two_way_trace_matches_closed_form(seed in any::<u64>(), d in 2usize..=5) {
        let mut r = rng(seed);
        let s = random_spectrum(d, &mut r);
        let delta = random_delta(d, &mut r);
        let (t, protocol) = build_two_way_t(&s, &delta).unwrap();
        prop_assert!(povm_element_check(&t, 1e-10));
        prop_assert!(protocol.check().passed());
        prop_assert!((t.expectation(&psi(s.lambdas())).re - 1.0).abs() < 1e-9);
        let oracle = closed_form(s.lambdas(), &delta);
        prop_assert!((trace_t_closed_form(&s, &delta).unwrap() - oracle).abs() < 1e-9);
        prop_assert!((t.trace_re() - trace_t_rank_weighted(&s, &delta).unwrap()).abs() < 1e-9);
        // strictly positive entries make every branch full rank
        prop_assert!((t.trace_re() - oracle).abs() < 1e-9);
    }

    #[test]
    fn mub_basis_is_orthonormal_and_unbiased(seed in any::<u64>(), d in 1usize..=6, rank in 1usize..=6) {
        let rank = rank.min(d);
        let omega = random_density(d, rank, &mut rng(seed));
        let basis = build_mub_basis(&omega, rank).unwrap();
        prop_assert_eq!(basis.len(), rank);
        for (j, x) in basis.iter().enumerate() {
            prop_assert!((omega.expectation(x).re - 1.0 / rank as f64).abs() < 1e-9);
            for (k, y) in basis.iter().enumerate() {
                let expected = if j == k { 1.0 } else { 0.0 };
                prop_assert!((x.inner(y) - Complex64::new(expected, 0.0)).norm() < 1e-9);
            }
        }
        let span = basis.iter().fold(Operator::zeros(d), |acc, x| &acc + &Operator::projector(x));
        prop_assert!(span.max_abs_diff(&support_projection(&omega, None).unwrap()) < 1e-9);
    }

    #[test]
    fn optimizer_respects_the_chain(seed in any::<u64>(), d in 2usize..=4) {
        let s = random_spectrum(d, &mut rng(seed));
        let dim = d * d;
        let result = beta_two_way_upper(&s, dim, &quick()).unwrap();
        let sep = beta_sep_pure(&s, dim);
        let one_way = beta_one_way(&state_from_spectrum(&s)).value;
        prop_assert!(1.0 / dim as f64 <= sep + 1e-12);
        prop_assert!(sep <= result.beta_value + 1e-9);
        prop_assert!(result.beta_value <= one_way + 1e-9);
        let witness = trace_t_closed_form(&s, &result.best_delta).unwrap() / dim as f64;
        prop_assert!((witness - result.beta_value).abs() < 1e-12);
    }

    #[test]
    fn zero_padding_leaves_the_optimum_unchanged(seed in any::<u64>(), d in 2usize..=3, pad in 1usize..=2) {
        let s = random_spectrum(d, &mut rng(seed));
        let mut padded = s.lambdas().to_vec();
        padded.extend(std::iter::repeat_n(0.0, pad));
        let padded = SchmidtSpectrum::new(padded).unwrap();
        let dim = (d + pad) * (d + pad);
        let base = beta_two_way_upper(&s, dim, &quick()).unwrap();
        let wide = beta_two_way_upper(&padded, dim, &quick()).unwrap();
        prop_assert_eq!(wide.best_delta.d(), d + pad);
        prop_assert!((base.beta_value - wide.beta_value).abs() < 1e-9);
        let (t, _) = build_two_way_t(&padded, &wide.best_delta).unwrap();
        prop_assert!((t.trace_re() / dim as f64 - wide.beta_value).abs() < 1e-9);
    }

    #[test]
    fn grid_refinement_never_gets_worse(seed in any::<u64>(), m in 2usize..=4) {
        let s = random_spectrum(3, &mut rng(seed));
        let coarse = grid_oracle(&s, 9, 1.0 / m as f64).unwrap();
        let fine = grid_oracle(&s, 9, 1.0 / (2 * m) as f64).unwrap();
        prop_assert!(fine.beta_value <= coarse.beta_value + 1e-12);
        let gradient = beta_two_way_upper(&s, 9, &quick()).unwrap();
        prop_assert!(gradient.beta_value <= fine.beta_value + 1e-9);
    }

    #[test]
    fn mixed_state_lower_bounds_are_sane(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3, rank in 1usize..=9) {
        let dim = da * db;
        let rho = random_density(dim, rank.min(dim), &mut rng(seed));
        let state = BipartiteState::density(rho, (da, db)).unwrap();
        let sep = sep_lower_bound_mixed(&state).unwrap();
        let one_way = beta_one_way(&state);
        prop_assert!(!one_way.exact);
        for bound in [sep, one_way.value] {
            prop_assert!(1.0 / dim as f64 <= bound + 1e-9 && bound <= 1.0 + 1e-9);
        }
        prop_assert!(one_way.value * dim as f64 <= da as f64 + 1e-9);
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>()) {
        let s = random_spectrum(2, &mut rng(seed));
        let (_, protocol) = build_two_way_t(&s, &random_delta(2, &mut rng(seed ^ 1))).unwrap();
        let a = simulate_protocol(&protocol, Source::Mixed, 5000, seed).unwrap();
        let b = simulate_protocol(&protocol, Source::Mixed, 5000, seed).unwrap();
        prop_assert_eq!(a.accepted, b.accepted);
        let psi_run = simulate_protocol(&protocol, Source::Psi, 2000, seed).unwrap();
        prop_assert_eq!(psi_run.accepted, 2000);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn qubit_optimum_matches_analytic_form(lambda in 0.001f64..=0.5) {
        let s = SchmidtSpectrum::new(vec![1.0 - lambda, lambda]).unwrap();
        let numeric = beta_two_way_upper(&s, 4, &OptimizerConfig::default()).unwrap();
        let (analytic, delta) = beta_two_way_qubit_analytic(lambda).unwrap();
        prop_assert!((analytic - qubit_beta(lambda)).abs() < 1e-12);
        prop_assert!((numeric.beta_value - analytic).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&delta));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sweeps_are_ordered_and_byte_stable(index in 0usize..6, points in 2usize..=6, seed in any::<u64>()) {
        let name = FamilySpec::builtin_names().nth(index).unwrap();
        let family = FamilySpec::parse(name).unwrap();
        let config = OptimizerConfig { starts: 4, seed, ..Default::default() };
        let rows = sweep(&family, points, &config).unwrap();
        prop_assert_eq!(rows.len(), points);
        for pair in rows.windows(2) {
            prop_assert!(pair[0].t < pair[1].t);
        }
        for r in &rows {
            prop_assert!(r.beta_g <= r.beta_sep + 1e-9);
            prop_assert!(r.beta_sep <= r.beta_two_way_upper + 1e-9);
            prop_assert!(r.beta_two_way_upper <= r.beta_one_way + 1e-9);
        }
        let mut first = Vec::new();
        let mut second = Vec::new();
        write_csv(&rows, &mut first).unwrap();
        write_csv(&sweep(&family, points, &config).unwrap(), &mut second).unwrap();
        prop_assert_eq!(first, second);
    }
}
