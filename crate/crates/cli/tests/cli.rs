use std::process::{Command, Output};

fn uqr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uqr")).args(args).output().expect("spawn uqr")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn compute_r_all_methods_agree() {
    let o = uqr(&["compute-r", "--type", "A1", "--hw", "1", "--hw", "1", "--method", "all"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stderr.is_empty());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["agree"], true);
    assert_eq!(v["results"].as_array().unwrap().len(), 3);
}

#[test]
fn compute_r_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = uqr(&["compute-r", "--type", "A2", "--hw", "1,0", "--hw", "0,1", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty() && o.stderr.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["method"], "theta");
    assert_eq!(v["cartan"], "A2");
}

#[test]
fn golden_mode_writes_then_compares() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let args = ["canonical-basis", "--type", "A1", "--hw", "2", "--golden", g.to_str().unwrap()];
    assert_eq!(uqr(&args).status.code(), Some(0));
    assert!(g.exists());
    assert_eq!(uqr(&args).status.code(), Some(0));
    std::fs::write(&g, "{}\n").unwrap();
    assert_eq!(uqr(&args).status.code(), Some(1));
}

#[test]
fn non_dominant_weight_is_config_error() {
    let o = uqr(&["compute-r", "--type", "A1", "--hw", "-1", "--hw", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("weight not dominant"));
}

#[test]
fn unknown_type_and_bad_rank_are_config_errors() {
    assert_eq!(uqr(&["canonical-basis", "--type", "Z9", "--hw", "1"]).status.code(), Some(2));
    assert_eq!(uqr(&["canonical-basis", "--type", "A2", "--hw", "1"]).status.code(), Some(2));
    assert_eq!(uqr(&["verify", "--type", "A1", "--suite", "nope", "--hw", "1"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_small_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = uqr(&["verify", "--type", "A1", "--suite", "all", "--hw", "1", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(o.stderr.is_empty());
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    let reports: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(reports.len(), stdout(&o).lines().count());
}

#[test]
fn injected_faults_fail_with_counterexamples() {
    for (suite, fault) in [("ybe", "scale-block"), ("ybe", "wrong-flip"), ("hexagon", "scale-block"), ("method-agreement", "theta-sign")]
    {
        let o = uqr(&["verify", "--type", "A1", "--suite", suite, "--hw", "1", "--inject-fault", fault]);
        assert_eq!(o.status.code(), Some(1), "{suite} {fault}");
        assert!(stdout(&o).contains("counterexample"), "{suite} {fault}");
    }
}

#[test]
fn crystal_listing_and_dot() {
    let o = uqr(&["crystal", "--type", "A1", "--tensor", "1", "1", "--list-hw"]);
    assert_eq!(stdout(&o), "S^(2) = [b0]\nS^(0) = [b1]\n");
    let o = uqr(&["crystal", "--type", "A1", "--hw", "1"]);
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph crystal {"));
    assert!(dot.contains("v0 -> v1"));
}

#[test]
fn canonical_basis_json_has_all_elements() {
    let o = uqr(&["canonical-basis", "--type", "A2", "--hw", "1,1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["elements"].as_array().unwrap().len(), 8);
}
