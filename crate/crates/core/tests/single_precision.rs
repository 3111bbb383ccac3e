use nonlocality::cglmp::{cglmp_value, CglmpScenario};
use nonlocality::chsh::optimize_chsh;
use nonlocality::detection::chsh_optimal_critical_efficiency;
use nonlocality::hardy::hardy_certificate;
use nonlocality::nlb::{chsh_of_behavior, pr_box_behavior};
use nonlocality::polytope::kl_to_local;
use nonlocality::StateF32;

#[test]
fn f32_pipeline_agrees_with_f64_to_single_precision() {
    let t = std::f32::consts::FRAC_PI_4;
    let chsh = optimize_chsh(t).unwrap().result.value;
    assert!((chsh - 2.0 * 2f32.sqrt()).abs() < 1e-4);
    let eta = chsh_optimal_critical_efficiency(t).unwrap();
    assert!((eta - 2.0 / (1.0 + 2f32.sqrt())).abs() < 1e-5);

    let pr = pr_box_behavior::<f32>();
    assert_eq!(chsh_of_behavior(&pr).unwrap(), 4.0);
    let d = kl_to_local(&pr).unwrap().distance;
    assert!((d - (4.0f32 / 3.0).log2()).abs() < 1e-4, "{d}");

    let (alphas, betas) = CglmpScenario::<f32>::standard_phases();
    let third = 1.0 / 3f32.sqrt();
    let v = cglmp_value(&CglmpScenario::new(alphas, betas, [third; 3]).unwrap().behavior().unwrap()).unwrap();
    assert!((v - 4.0 * (2.0 * 3f32.sqrt() + 3.0) / 9.0).abs() < 1e-5);

    let cert = hardy_certificate(&StateF32::hardy()).unwrap();
    assert!((cert.p_xx_mm - 1.0 / 12.0).abs() < 1e-6);
    assert!(cert.holds);
}
