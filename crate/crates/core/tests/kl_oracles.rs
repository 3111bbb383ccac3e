use nonlocality::cglmp::{gamma_schmidt, CglmpScenario};
use nonlocality::nlb::pr_box_behavior;
use nonlocality::polytope::{
    enumerate_vertices, kl_divergence, kl_to_local, kl_to_local_with, lp_membership, separation_certificate,
    KlOptions, KlSolver, SettingWeights,
};
use nonlocality::quantum::{BehaviorTable, Scenario};
use nonlocality::Behavior;

fn pr_mixture(v: f64) -> Behavior {
    let pr = pr_box_behavior::<f64>();
    let u = BehaviorTable::uniform(Scenario::CHSH);
    BehaviorTable::mixture(&[(v, &pr), (1.0 - v, &u)]).unwrap()
}

// Closest local point to the PR box is the even mixture of the eight
// vertices saturating CHSH: Q = 3/8 on PR cells, 1/8 elsewhere, so
// D = log2((1/2) / (3/8)).
#[test]
fn pr_box_distance_is_log_four_thirds() {
    let want = (4.0f64 / 3.0).log2();
    for solver in [KlSolver::ConditionalGradient, KlSolver::MultiplicativeWeights] {
        let poly = enumerate_vertices::<f64>(Scenario::CHSH).unwrap();
        let opts = KlOptions::default().with_solver(solver).with_gap(1e-11);
        let r = kl_to_local_with(&pr_box_behavior(), &poly, &SettingWeights::uniform(Scenario::CHSH), &opts).unwrap();
        assert!(r.converged, "{solver:?}");
        assert!((r.distance - want).abs() < 1e-9, "{solver:?}: {} vs {want}", r.distance);
        let q = r.closest_local(&poly).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let target = if a ^ b == x & y { 0.375 } else { 0.125 };
                        assert!((q.prob(x, y, a, b) - target).abs() < 1e-5);
                    }
                }
            }
        }
    }
}

#[test]
fn pr_mixtures_are_local_exactly_up_to_one_half() {
    let poly = enumerate_vertices::<f64>(Scenario::CHSH).unwrap();
    for i in 0..=20 {
        let v = i as f64 / 20.0;
        let p = pr_mixture(v);
        let lp = lp_membership(&p, &poly, 1e-9).unwrap();
        let kl = kl_to_local(&p).unwrap();
        assert_eq!(lp.member, v <= 0.5, "v = {v}, residual {}", lp.l1_residual);
        if v <= 0.5 {
            assert!(kl.distance < 1e-8, "v = {v}: {}", kl.distance);
        } else {
            assert!(kl.distance > 1e-6, "v = {v}: {}", kl.distance);
        }
    }
}

#[test]
fn distance_matches_direct_divergence() {
    let poly = enumerate_vertices::<f64>(Scenario::CGLMP).unwrap();
    let w = SettingWeights::uniform(Scenario::CGLMP);
    let (alphas, betas) = CglmpScenario::<f64>::standard_phases();
    let p = CglmpScenario::new(alphas, betas, gamma_schmidt(0.62)).unwrap().behavior().unwrap();
    let r = kl_to_local_with(&p, &poly, &w, &KlOptions::default()).unwrap();
    let q = r.closest_local(&poly).unwrap();
    let direct = kl_divergence(&p, &q, &w).unwrap().finite().unwrap();
    assert!((direct - r.distance).abs() < 1e-9);
    assert!(r.gap < 1e-9);
}

#[test]
fn separation_certificate_cuts_off_nonlocal_behaviors() {
    let poly = enumerate_vertices::<f64>(Scenario::CHSH).unwrap();
    let w = SettingWeights::uniform(Scenario::CHSH);
    let p = pr_mixture(0.8);
    let r = kl_to_local_with(&p, &poly, &w, &KlOptions::default().with_gap(1e-11)).unwrap();
    let sep = separation_certificate(&p, &r, &poly, &w).unwrap();
    assert!(sep.separates(), "margin {}", sep.margin());
    // KKT at the optimum: every vertex scores at most 1, the behavior
    // scores sum w P^2 / Q > 1
    assert!((sep.vertex_max - 1.0).abs() < 1e-6, "{}", sep.vertex_max);
}

#[test]
fn divergence_is_infinite_off_support() {
    let w = SettingWeights::uniform(Scenario::CHSH);
    let det = BehaviorTable::<f64>::deterministic(Scenario::CHSH, &[0, 0], &[0, 0]).unwrap();
    let u = BehaviorTable::uniform(Scenario::CHSH);
    assert!(kl_divergence(&u, &det, &w).unwrap().is_infinite());
    let d = kl_divergence(&det, &u, &w).unwrap().finite().unwrap();
    assert!((d - 2.0).abs() < 1e-12);
}

#[test]
fn setting_weights_are_validated() {
    assert!(SettingWeights::new(vec![0.5, 0.5, 0.5, -0.5]).is_err());
    assert!(SettingWeights::new(vec![0.3, 0.3, 0.3, 0.3]).is_err());
    let w = SettingWeights::new(vec![1.0 / 3.0; 3]).unwrap();
    let u = BehaviorTable::<f64>::uniform(Scenario::CHSH);
    assert!(kl_divergence(&u, &u, &w).is_err());
}
