use nonlocality::report::{reproduce_all, ReproConfig, ToleranceProfile, CLAIMS, SCHEMA_VERSION};
use serde_json::Value;

fn strip_volatile(mut v: Value) -> Value {
    v["metadata"]["timestamp"] = Value::Null;
    for e in v["entries"].as_array_mut().unwrap() {
        e["runtime_s"] = Value::Null;
    }
    v
}

// One default run and one identical run with a tightened tolerance: the
// reports must agree everywhere except the volatile fields and the one
// overridden entry.
#[test]
fn report_is_deterministic_and_overrides_touch_one_entry() {
    let base = ReproConfig::default();
    let a = reproduce_all(&base).unwrap();
    let mut tight = base.clone();
    tight.tolerances.insert("6.kl-maximally-entangled".into(), 0.0);
    let b = reproduce_all(&tight).unwrap();

    assert_eq!(a.schema_version, SCHEMA_VERSION);
    assert_eq!(a.entries.len(), CLAIMS.len());
    for ((id, _), e) in CLAIMS.iter().zip(&a.entries) {
        assert_eq!(*id, e.id);
    }

    let failing: Vec<&str> = a.failures().map(|e| e.id.as_str()).collect();
    assert_eq!(failing, ["6.kl-gamma"]);
    assert!(!a.all_pass);
    let sweep = a.convention_sweep.as_ref().expect("sweep reported when a KL claim fails");
    assert_eq!(sweep.len(), 3);
    let gamma = a.entries.iter().find(|e| e.id == "6.kl-gamma").unwrap();
    assert!(gamma.notes.contains("convention"), "{}", gamma.notes);

    let ja = strip_volatile(serde_json::to_value(&a).unwrap());
    let mut jb = strip_volatile(serde_json::to_value(&b).unwrap());
    let idx = a.entries.iter().position(|e| e.id == "6.kl-maximally-entangled").unwrap();
    assert!(a.entries[idx].pass);
    assert!(!b.entries[idx].pass);
    assert_eq!(b.entries[idx].tolerance, 0.0);
    jb["entries"][idx] = ja["entries"][idx].clone();
    assert_eq!(ja, jb);
}

#[test]
fn config_rejects_unknown_claims_and_negative_tolerances() {
    let mut c = ReproConfig::default();
    c.tolerances.insert("9.nothing".into(), 1.0);
    assert!(reproduce_all(&c).is_err());
    let mut c = ReproConfig::default();
    c.tolerances.insert("1.gisin-curve".into(), -1.0);
    assert!(reproduce_all(&c).is_err());
}

#[test]
fn config_parses_from_toml() {
    let c: ReproConfig = toml::from_str(
        r#"
        seed = 5
        profile = "strict"
        [tolerances]
        "4.eta-small-theta" = 0.02
        [grids]
        chsh_thetas = 10
        "#,
    )
    .unwrap();
    assert_eq!(c.seed, 5);
    assert_eq!(c.profile, ToleranceProfile::Strict);
    assert_eq!(c.tolerance("4.eta-small-theta", 0.01), 0.02);
    assert!((c.tolerance("1.gisin-curve", 1e-6) - 1e-7).abs() < 1e-20);
    assert_eq!(c.grids.chsh_thetas, 10);
    assert_eq!(c.grids.detection_thetas, ReproConfig::default().grids.detection_thetas);
}
