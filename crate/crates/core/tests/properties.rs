use proptest::prelude::*;

use num_complex::Complex64;
use scramble::hamiltonian::{build, Exponent, HamiltonianSpec};
use scramble::hilbert::{apply_local_pauli, product_state, schmidt_weights, LocalState, PauliKind, Region, StateVector};
use scramble::lightcone::{extract_contour, fit_butterfly_velocity, ScramblingField};
use scramble::observables::{entanglement_entropy, entropy_of_weights};
use scramble::operators::{
    average_squared_commutator, operator_density_profile, operator_size, OperatorDensityProfile, PauliString,
};
use scramble::propagation::{
    eigendecompose, HeisenbergEvolver, KrylovConfig, NumericalLimits, Propagator,
};
use scramble::LocalPauli;

fn random_state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero vector", move |v| {
        let amps: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| StateVector::new(n, amps.into_iter().map(|z| z / norm).collect()).unwrap())
    })
}

fn pauli_kind() -> impl Strategy<Value = PauliKind> {
    prop::sample::select(PauliKind::ALL.to_vec())
}

fn model(n: usize) -> impl Strategy<Value = HamiltonianSpec> {
    prop_oneof![
        Just(HamiltonianSpec::local(n)),
        (0.3f64..4.0, any::<bool>()).prop_map(move |(a, kac)| HamiltonianSpec::powerlaw(n, a, kac)),
        Just(HamiltonianSpec::fast_scrambler(n)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn paulis_are_involutions(psi in random_state(4), kind in pauli_kind(), site in 1usize..=4) {
        let once = apply_local_pauli(&psi, kind, site).unwrap();
        prop_assert!((once.norm_sqr() - 1.0).abs() < 1e-12);
        let twice = apply_local_pauli(&once, kind, site).unwrap();
        prop_assert!(twice.distance_sqr(&psi) < 1e-24);
    }

    #[test]
    fn string_index_roundtrip(index in 0usize..(1 << 12)) {
        let s = PauliString::from_index(index, 6);
        prop_assert_eq!(s.index(), index);
        prop_assert!(s.weight() <= s.size());
    }

    #[test]
    fn schmidt_spectrum_is_shared(psi in random_state(5), len in 1usize..5) {
        let a = Region::prefix(len, 5).unwrap();
        let b = a.complement(5);
        let wa = schmidt_weights(&psi, &a).unwrap();
        prop_assert!((wa.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let sa = entanglement_entropy(&psi, &a).unwrap();
        let sb = entanglement_entropy(&psi, &b).unwrap();
        prop_assert!((sa - sb).abs() < 1e-10);
        prop_assert!(sa >= -1e-12);
        prop_assert!(sa <= len.min(5 - len) as f64 * std::f64::consts::LN_2 + 1e-12);
    }

    #[test]
    fn evolution_is_unitary_and_conserves_energy(spec in model(6), t in -4.0f64..4.0) {
        let h = build(&spec).unwrap();
        let psi0 = product_state(LocalState::YPlus, 6).unwrap();
        let prop = Propagator::krylov(&h, KrylovConfig::default(), &NumericalLimits::default()).unwrap();
        let psi = prop.evolve(&psi0, t).unwrap();
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
        let e0 = h.energy(psi0.amplitudes());
        prop_assert!((h.energy(psi.amplitudes()) - e0).abs() < 1e-9);
        let back = prop.evolve(&psi, -t).unwrap();
        prop_assert!(back.distance_sqr(&psi0) < 1e-18);
    }

    #[test]
    fn operator_density_identities(spec in model(4), t in 0.0f64..6.0, kind in pauli_kind(), site in 1usize..=4) {
        prop_assume!(kind != PauliKind::Identity);
        let limits = NumericalLimits::default();
        let h = build(&spec).unwrap();
        let d = eigendecompose(&h, &limits).unwrap();
        let seed = LocalPauli::new(kind, site).to_matrix(4).unwrap();
        let w = HeisenbergEvolver::new(&d, seed.as_ref(), &limits).unwrap().at(t);
        let p = operator_density_profile(&w).unwrap();
        prop_assert!((p.total() - 1.0).abs() < 1e-9);
        prop_assert!(p.identity_weight < 1e-10);
        prop_assert!((p.p(4) - average_squared_commutator(&w, 4).unwrap()).abs() < 1e-10);
        for r in 2..=4 {
            prop_assert!(p.p(r) <= average_squared_commutator(&w, r).unwrap() + 1e-10);
        }
    }

    #[test]
    fn size_is_monotone_under_weight_shifts(
        weights in prop::collection::vec(0.0f64..1.0, 6),
        from in 0usize..6,
        to in 0usize..6,
        frac in 0.0f64..1.0,
    ) {
        prop_assume!(to > from);
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 1e-6);
        let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
        let before = OperatorDensityProfile { time: 0.0, identity_weight: 0.0, weights: w.clone() };
        let mut shifted = w;
        let moved = shifted[from] * frac;
        shifted[from] -= moved;
        shifted[to] += moved;
        let after = OperatorDensityProfile { time: 0.0, identity_weight: 0.0, weights: shifted };
        prop_assert!(operator_size(&after) >= operator_size(&before) - 1e-12);
    }

    #[test]
    fn entropy_bounds(weights in prop::collection::vec(0.0f64..1.0, 1..16)) {
        let total: f64 = weights.iter().sum();
        prop_assume!(total > 1e-6);
        let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
        let s = entropy_of_weights(&w);
        prop_assert!(s >= 0.0 && s <= (w.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn contours_are_monotone_in_threshold(
        rates in prop::collection::vec(0.2f64..3.0, 6),
        theta1 in 0.05f64..0.9,
        gap in 0.01f64..0.5,
    ) {
        let theta2 = (theta1 + gap).min(0.99);
        let field = ScramblingField::from_fn((1..=6).collect(), (0..200).map(|k| k as f64 * 0.05).collect(), |r, t| {
            // noisy but increasing fronts
            let x = (t * rates[r - 1] - r as f64).max(0.0);
            1.0 - (-x).exp() + 0.02 * (7.0 * t).sin()
        }).unwrap();
        let c1 = extract_contour(&field, theta1);
        let c2 = extract_contour(&field, theta2);
        for r in 1..=6 {
            if let (Some(a), Some(b)) = (c1.crossing(r), c2.crossing(r)) {
                prop_assert!(a <= b + 1e-12);
            }
        }
    }

    #[test]
    fn butterfly_fit_is_grid_invariant(v in 0.5f64..4.0, offset in 0.0f64..1.0) {
        let fit_at = |dt: f64| {
            let times: Vec<f64> = (0..=((14.0 / v + 2.0) / dt) as usize).map(|k| k as f64 * dt).collect();
            let field = ScramblingField::from_fn((1..=12).collect(), times, |r, t| {
                1.0 / (1.0 + (-(4.0 * (t * v - r as f64 - offset))).exp())
            }).unwrap();
            fit_butterfly_velocity(&extract_contour(&field, 0.5), (4, 10)).unwrap().velocity
        };
        let coarse = fit_at(0.1);
        let fine = fit_at(0.05);
        prop_assert!((coarse - fine).abs() < 0.05 * fine);
    }
}

#[test]
fn exponent_roundtrip() {
    for s in ["inf", "2.5"] {
        let e: Exponent = serde_json::from_str(&format!("\"{s}\"")).unwrap();
        assert_eq!(e.to_string(), s);
    }
}
