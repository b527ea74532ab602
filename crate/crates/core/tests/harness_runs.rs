use hgauge::harness::{run_suites, Mode, Suite, SuiteConfig};

fn temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("hgauge-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn sabotaged_fixture_skips_downstream_suites() {
    let cfg = SuiteConfig {
        fixture: "sabotaged:sl2".into(),
        suites: vec![Suite::Bianchi, Suite::Eq1],
        instances: 3,
        ..SuiteConfig::default()
    };
    let r = run_suites(&cfg).unwrap();
    let axioms = r.suite(Suite::Axioms).unwrap();
    assert_eq!(axioms.failed, 1);
    assert!(axioms.failures.iter().any(|f| f.reason.contains("peiffer") && f.reason.contains("(E, F)")));
    assert!(r.suite(Suite::Bianchi).unwrap().skipped);
    assert!(r.suite(Suite::Eq1).unwrap().skipped);
    assert!(!r.all_passed());
}

#[test]
fn reports_are_deterministic_and_counts_add_up() {
    let cfg = SuiteConfig { instances: 6, ..SuiteConfig::default() };
    let a = run_suites(&cfg).unwrap();
    let b = run_suites(&cfg).unwrap();
    for (x, y) in a.suites.iter().zip(&b.suites) {
        assert_eq!(x.suite, y.suite);
        assert_eq!((x.passed, x.failed, x.nontrivial), (y.passed, y.failed, y.nontrivial));
        assert_eq!(x.passed + x.failed, x.instances);
        let seeds = |r: &hgauge::harness::SuiteReport| r.failures.iter().map(|f| f.seed).collect::<Vec<_>>();
        assert_eq!(seeds(x), seeds(y));
    }
    let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(json["config"]["fixture"], "adjoint:sl2");
    assert!(json["suites"][0]["wall_time_s"].is_number());
}

#[test]
fn failures_carry_seed_repro_and_dump() {
    let dir = temp_dir("dump");
    let cfg = SuiteConfig {
        suites: vec![Suite::Wzw],
        instances: 25,
        dump_dir: Some(dir.clone()),
        ..SuiteConfig::default()
    };
    let r = run_suites(&cfg).unwrap();
    let wzw = r.suite(Suite::Wzw).unwrap();
    assert!(wzw.failed > 0);
    let f = &wzw.failures[0];
    assert!(f.repro.contains(&format!("--only-instance {}", f.instance)));
    let dump = std::fs::read_to_string(f.dump.as_ref().unwrap()).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&dump).unwrap();
    assert_eq!(doc["seed"], f.seed);
    let inst = serde_json::to_string(&doc["inputs"][0]).unwrap();
    let back = hgauge::fixture::instance_from_json(&inst).unwrap();
    let gd = back.gauge.unwrap();
    let p = hgauge::symmetrized_trace_pairing(back.fa.module(), 1).unwrap();
    assert!(!hgauge::transgression::wzw_term(&back.fa, &gd, &p).unwrap().value.is_zero());

    let replay = run_suites(&SuiteConfig { only_instance: Some(f.instance), dump_dir: None, ..cfg }).unwrap();
    let rw = replay.suite(Suite::Wzw).unwrap();
    assert_eq!((rw.instances, rw.failed), (1, 1));
    assert_eq!(rw.failures[0].seed, f.seed);
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn numeric_mode_agrees_with_exact_mode() {
    let list = vec![Suite::Bianchi, Suite::CsDescent, Suite::Eq1, Suite::Wzw];
    let exact = run_suites(&SuiteConfig { suites: list.clone(), instances: 8, ..SuiteConfig::default() }).unwrap();
    let numeric = run_suites(&SuiteConfig {
        suites: list.clone(),
        instances: 8,
        mode: Mode::numeric(1e-9),
        ..SuiteConfig::default()
    })
    .unwrap();
    for s in list {
        let (e, n) = (exact.suite(s).unwrap(), numeric.suite(s).unwrap());
        assert!(n.max_residual.is_some());
        // A jet at a point can miss a nonzero residual but never invent one.
        assert!(n.failed <= e.failed, "{s}");
        if e.failed == 0 {
            assert_eq!(n.max_residual, Some(0.0), "{s}");
        }
    }
}

#[test]
fn missing_group_action_is_a_capability_error() {
    let dir = temp_dir("module");
    std::fs::create_dir_all(&dir).unwrap();
    let mut doc: serde_json::Value =
        serde_json::from_str(&hgauge::fixture::module_to_json(&hgauge::fixture::module("adjoint:sl2").unwrap())).unwrap();
    doc["group_action"] = serde_json::json!("none");
    doc["name"] = serde_json::json!("no-group");
    let path = dir.join("module.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let cfg = SuiteConfig {
        fixture: path.display().to_string(),
        suites: vec![Suite::Bianchi, Suite::Covariance],
        instances: 6,
        ..SuiteConfig::default()
    };
    let err = run_suites(&cfg).unwrap_err();
    assert!(matches!(err, hgauge::Error::Capability(_)), "{err}");
    let _ = std::fs::remove_dir_all(dir);
}
