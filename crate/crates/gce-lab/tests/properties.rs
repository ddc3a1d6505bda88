//! Property-based invariant checks over randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;

use gce_lab::gce::{gce, GceParams};
use gce_lab::permtest::{
    derangement_power, exact_probability_table, DigitString, ProbabilityTable,
};
use gce_lab::robustness::error_bound;
use gce_lab::rng::stream_seed;
use gce_lab::state::{
    apply_local_unitaries, haar_random_state, perturb_state, trace_distance_pure, PureState,
    SingleQubitUnitary, SubsetLabel,
};

/// Arbitrary normalized n-qubit statevector.
fn arb_state(n: usize) -> impl Strategy<Value = PureState> {
    let dim = 1usize << n;
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
        .prop_filter("needs nonzero norm", |v| {
            v.iter().map(|(re, im)| re * re + im * im).sum::<f64>() > 1e-6
        })
        .prop_map(move |v| {
            let amps: Vec<Complex64> = v.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            PureState::normalized(n, amps).unwrap()
        })
}

/// Arbitrary normalized single-qubit state.
fn arb_qubit() -> impl Strategy<Value = [Complex64; 2]> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("needs nonzero norm", |(a, b, c, d)| {
            a * a + b * b + c * c + d * d > 1e-6
        })
        .prop_map(|(a, b, c, d)| {
            let norm = (a * a + b * b + c * c + d * d).sqrt();
            [
                Complex64::new(a / norm, b / norm),
                Complex64::new(c / norm, d / norm),
            ]
        })
}

fn arb_unitary() -> impl Strategy<Value = SingleQubitUnitary> {
    use std::f64::consts::PI;
    (0.0..PI, -PI..PI, -PI..PI).prop_map(|(t, p, l)| SingleQubitUnitary::new(t, p, l))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gce_is_invariant_under_local_unitaries(
        psi in arb_state(3),
        us in prop::collection::vec(arb_unitary(), 3),
        k in prop::sample::select(vec![1.5, 2.0, 3.0]),
    ) {
        let params = GceParams::new(k, SubsetLabel::full(3)).unwrap();
        let before = gce(&psi, &params).unwrap();
        let moves: Vec<(usize, SingleQubitUnitary)> =
            us.into_iter().enumerate().collect();
        let rotated = apply_local_unitaries(&psi, &moves).unwrap();
        let after = gce(&rotated, &params).unwrap();
        prop_assert!((before - after).abs() <= 1e-10, "{before} vs {after}");
    }

    #[test]
    fn product_states_have_zero_gce(
        qs in prop::collection::vec(arb_qubit(), 2..=4),
        k in prop::sample::select(vec![1.5, 2.0, 3.0, 5.0]),
    ) {
        let psi = PureState::product_of(&qs).unwrap();
        let params = GceParams::new(k, SubsetLabel::full(psi.n())).unwrap();
        let value = gce(&psi, &params).unwrap();
        prop_assert!(value.abs() <= 1e-9, "{value}");
    }

    #[test]
    fn gce_stays_in_its_range(psi in arb_state(3), k in 1.1..6.0f64) {
        let params = GceParams::new(k, SubsetLabel::full(3)).unwrap();
        let value = gce(&psi, &params).unwrap();
        prop_assert!(value >= -1e-12);
        prop_assert!(value <= 1.0 / (k - 1.0) + 1e-12);
    }

    #[test]
    fn derangement_powers_form_a_cyclic_group(
        k in 2usize..9,
        z1 in 0usize..8,
        z2 in 0usize..8,
    ) {
        let (z1, z2) = (z1 % k, z2 % k);
        let a = derangement_power(k, z1).unwrap();
        let b = derangement_power(k, z2).unwrap();
        let ab = a.compose(&b).unwrap();
        let expected = derangement_power(k, (z1 + z2) % k).unwrap();
        prop_assert_eq!(ab.source(), expected.source());
    }

    #[test]
    fn digit_strings_round_trip_through_text(
        k in 2u32..36,
        raw in prop::collection::vec(0u32..36, 1..8),
    ) {
        let digits: Vec<u8> = raw.iter().map(|&d| (d % k) as u8).collect();
        let ds = DigitString::new(k, digits.clone()).unwrap();
        let back = DigitString::parse(k, &ds.to_string()).unwrap();
        prop_assert_eq!(back.digits(), &digits[..]);
    }

    #[test]
    fn exact_tables_are_distributions_and_round_trip_csv(
        seed in 0u64..1000,
        k in prop::sample::select(vec![2u32, 3]),
    ) {
        let psi = haar_random_state(2, seed).unwrap();
        let table = exact_probability_table(&psi, k).unwrap();
        prop_assert!((table.total() - 1.0).abs() <= 1e-10);
        for (_, p) in table.iter() {
            prop_assert!(p >= -1e-12);
        }
        let back = ProbabilityTable::from_csv_str(&table.to_csv_string(), k).unwrap();
        prop_assert_eq!(back.len(), table.len());
        for (digits, p) in table.iter() {
            prop_assert_eq!(back.probability(digits), p);
        }
    }

    #[test]
    fn statevectors_round_trip_through_json(psi in arb_state(2)) {
        let back = PureState::from_json_str(&psi.to_json_string()).unwrap();
        prop_assert_eq!(back.n(), psi.n());
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn perturbation_hits_the_requested_trace_distance(
        seed in 0u64..1000,
        eps in 0.0..0.9f64,
    ) {
        let psi = haar_random_state(3, seed).unwrap();
        let phi = perturb_state(&psi, eps, seed ^ 0xD1CE).unwrap();
        let d = trace_distance_pure(&psi, &phi).unwrap();
        prop_assert!((d - eps).abs() <= 1e-9, "{d} vs {eps}");
    }

    #[test]
    fn error_bound_is_nonnegative_and_monotone_in_noise(
        eps in prop::collection::vec(0.0..0.5f64, 2..6),
        s_size in 1usize..5,
    ) {
        let k = eps.len() as u32;
        let b = error_bound(&eps, k, s_size).unwrap();
        prop_assert!(b >= 0.0);
        let doubled: Vec<f64> = eps.iter().map(|&e| (e * 2.0).min(1.0)).collect();
        let b2 = error_bound(&doubled, k, s_size).unwrap();
        prop_assert!(b2 >= b - 1e-15, "{b2} < {b}");
    }

    #[test]
    fn stream_seeds_separate_by_tag(master in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assert_eq!(stream_seed(master, &[a, b]), stream_seed(master, &[a, b]));
        if a != b {
            prop_assert_ne!(stream_seed(master, &[a]), stream_seed(master, &[b]));
            // order matters
            prop_assert_ne!(stream_seed(master, &[a, b]), stream_seed(master, &[b, a]));
        }
    }

    #[test]
    fn subset_masks_round_trip_and_obey_set_laws(mask_a in 0u64..1024, mask_b in 0u64..1024) {
        let a = SubsetLabel::from_mask(mask_a);
        let b = SubsetLabel::from_mask(mask_b);
        prop_assert_eq!(a.mask(), mask_a);
        if a.is_disjoint_from(&b) {
            let u = a.union(&b).unwrap();
            prop_assert_eq!(u.mask(), mask_a | mask_b);
        } else {
            prop_assert!(a.union(&b).is_err() || (mask_a & mask_b) == 0);
        }
        let comp = a.complement(10).unwrap();
        prop_assert_eq!(comp.mask() | a.mask(), (1 << 10) - 1);
        prop_assert_eq!(comp.mask() & a.mask(), 0);
    }
}

#[test]
fn concentration_outcome_probabilities_sum_to_one() {
    use gce_lab::concentration::{run_permutation_test_k3, ConcentrationInput};
    for i in 0..50u64 {
        let input = ConcentrationInput::random_from_seed(stream_seed(0x50F7, &[i]));
        let outcomes = run_permutation_test_k3(&input).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() <= 1e-12, "sample {i}: {total}");
    }
}
