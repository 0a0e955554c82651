use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn siglearn(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_siglearn")).args(args).output().expect("binary runs")
}

fn report(dir: &tempfile::TempDir) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn verdict<'a>(r: &'a serde_json::Value, name: &str) -> &'a serde_json::Value {
    r["verdicts"].as_array().unwrap().iter().find(|v| v["name"] == name).unwrap()
}

#[test]
fn analyze_quiche_pooling_fails_criterion_at_beer_fight() {
    let out = tempfile::tempdir().unwrap();
    let o = siglearn(&[
        "analyze",
        data("beerquiche.spec").to_str().unwrap(),
        "--profile",
        data("quiche_pooling.profile").to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let v = verdict(&r, "compatibility_criterion");
    assert_eq!(v["pass"], false);
    assert_eq!(v["detail"]["violations"][0]["signal"], "B");
    assert_eq!(v["detail"]["violations"][0]["action"], "F");
    assert_eq!(verdict(&r, "nash")["pass"], true);
    assert_eq!(r["data"]["compatibility"]["B"][0], "strong > weak");
    assert_eq!(r["data"]["compatibility"]["Q"][0], "weak > strong");
}

#[test]
fn analyze_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = siglearn(&[
            "analyze",
            data("beerquiche.spec").to_str().unwrap(),
            "--profile",
            data("beer_pooling.profile").to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let ra = std::fs::read(a.path().join("report.json")).unwrap();
    let rb = std::fs::read(b.path().join("report.json")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(verdict(&report(&a), "compatibility_criterion")["pass"], true);
}

#[test]
fn steady_exact_on_myopic_example() {
    let out = tempfile::tempdir().unwrap();
    let o = siglearn(&[
        "steady",
        data("myopic.spec").to_str().unwrap(),
        "--mode",
        "exact",
        "--gamma",
        "0.999",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(verdict(&r, "converged")["pass"], true);
    let p = r["data"]["profile"]["pi1"]["t1"]["s1"].as_f64().unwrap();
    assert!((p - (1.0 - 0.999f64.powi(6))).abs() < 1e-8, "{p}");
    assert_eq!(verdict(&r, "self_confirming")["pass"], true);
}

#[test]
fn verify_beer_quiche_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = siglearn(&[
        "verify",
        data("beerquiche.spec").to_str().unwrap(),
        "--samples",
        "40",
        "--seed",
        "7",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    let shown = siglearn(&["report", out.path().join("report.json").to_str().unwrap()]);
    assert!(shown.status.success());
    assert!(String::from_utf8_lossy(&shown.stdout).contains("index_ordering[strong>weak@B]"));
}

#[test]
fn short_scan_writes_trajectory() {
    let out = tempfile::tempdir().unwrap();
    let o = siglearn(&[
        "scan",
        data("beerquiche.spec").to_str().unwrap(),
        "--deltas",
        "0.5,0.6",
        "--gammas",
        "0.8",
        "--samples",
        "400",
        "--seed",
        "3",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(csv.starts_with("delta,gamma,residual,iterations,converged,pi1[strong][B]"));
    assert!(report(&out)["data"]["classification"].is_string());
}

#[test]
fn bad_spec_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.spec");
    let text = std::fs::read_to_string(data("beerquiche.spec")).unwrap().replace("\"9/10\", \"1/10\"", "0.5, 0.6");
    std::fs::write(&spec, text).unwrap();
    let o = siglearn(&["analyze", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("prior does not sum to 1"));
}
