use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use proptest::prelude::*;

use nonlocality::chsh::{analytic_max_chsh, chsh_value, ChshSettings};
use nonlocality::detection::max_ch_over_relabelings;
use nonlocality::hardy::{hardy_certificate, HardyCertificate};
use nonlocality::polytope::{enumerate_vertices, kl_divergence, kl_to_local_with, KlOptions, SettingWeights};
use nonlocality::quantum::{behavior, entanglement_entropy, entropy_b, Scenario};
use nonlocality::{Bloch, State};

fn bloch() -> impl Strategy<Value = Bloch> {
    (0.0..PI, -PI..PI).prop_map(|(p, a)| Bloch::from_angles(p, a))
}

fn settings() -> impl Strategy<Value = ChshSettings<f64>> {
    prop::collection::vec(-PI..PI, 8).prop_map(|v| ChshSettings::from_angles(&v))
}

fn qubit_state() -> impl Strategy<Value = State> {
    prop::collection::vec(-1.0..1.0f64, 8).prop_filter_map("zero vector", |v| {
        let amps: Vec<Complex64> = v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        State::normalized(2, 2, amps).ok()
    })
}

fn qutrit_state() -> impl Strategy<Value = State> {
    prop::collection::vec(-1.0..1.0f64, 18).prop_filter_map("zero vector", |v| {
        let amps: Vec<Complex64> = v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        State::normalized(3, 3, amps).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantum_behaviors_are_normalized_and_nonsignaling(
        state in qubit_state(), a1 in bloch(), a2 in bloch(), b1 in bloch(), b2 in bloch()
    ) {
        let t = behavior(&state, &[a1.measurement(), a2.measurement()], &[b1.measurement(), b2.measurement()]).unwrap();
        for chunk in t.probs().chunks(4) {
            prop_assert!((chunk.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(chunk.iter().all(|&p| p >= 0.0));
        }
        prop_assert!(t.signaling_defect() < 1e-10);
    }

    #[test]
    fn chsh_never_exceeds_the_analytic_maximum(theta in 0.0..FRAC_PI_4, s in settings()) {
        let state = State::theta(theta).unwrap();
        let v = chsh_value(&state, &s).unwrap();
        prop_assert!(v <= analytic_max_chsh(theta) + 1e-9);
        prop_assert!(v >= -analytic_max_chsh(theta) - 1e-9);
    }

    #[test]
    fn entropy_is_symmetric_between_parties(state in qutrit_state()) {
        let (ea, eb) = (entanglement_entropy(&state), entropy_b(&state));
        prop_assert!((ea - eb).abs() < 1e-9);
        prop_assert!((-1e-12..=3f64.log2() + 1e-12).contains(&ea));
    }

    #[test]
    fn kl_distance_is_a_nonnegative_divergence(theta in 0.0..FRAC_PI_4, s in settings()) {
        let state = State::theta(theta).unwrap();
        let d = s.directions();
        let m = |v: [f64; 3]| Bloch::new(v).unwrap().measurement();
        let p = behavior(&state, &[m(d[0]), m(d[1])], &[m(d[2]), m(d[3])]).unwrap();
        let poly = enumerate_vertices::<f64>(Scenario::CHSH).unwrap();
        let w = SettingWeights::uniform(Scenario::CHSH);
        let r = kl_to_local_with(&p, &poly, &w, &KlOptions::default()).unwrap();
        prop_assert!(r.distance >= 0.0);
        let q = r.closest_local(&poly).unwrap();
        let direct = kl_divergence(&p, &q, &w).unwrap().finite().unwrap();
        prop_assert!((direct - r.distance).abs() < 1e-9, "{} vs {}", direct, r.distance);
    }

    #[test]
    fn hardy_certificate_matches_the_behavior_path(state in qubit_state()) {
        let cert = hardy_certificate(&state).unwrap();
        let zx = [Bloch::z().measurement(), Bloch::x().measurement()];
        let table = behavior(&state, &zx, &zx).unwrap();
        let again = HardyCertificate::from_behavior(&table).unwrap();
        prop_assert!((cert.p_xx_mm - again.p_xx_mm).abs() < 1e-12);
        for (x, y) in cert.zeros().iter().zip(again.zeros()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        if cert.holds {
            prop_assert!(max_ch_over_relabelings(&table).unwrap() > 0.0);
        }
    }
}
