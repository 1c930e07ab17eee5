use std::path::Path;
use std::process::{Command, Output};

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strata-forge"))
        .args(args)
        .env("STRATA_FORGE_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn documented_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["prank", "--p", "3", "--n", "1", "--f", "1,0,1,1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1");

    let o = run(dir.path(), &["clutch", "dim", "--tree", "path:1,1,1", "--f", "2"]);
    assert_eq!(stdout(&o).trim(), "2");

    let o = run(dir.path(), &["mono", "sp-order", "--g", "2", "--l", "3"]);
    assert_eq!(stdout(&o).trim(), "51840");
}

#[test]
fn supersingular_curve_has_p_rank_zero() {
    let dir = tempfile::tempdir().unwrap();
    // y² = x³ + x over F_3
    let o = run(dir.path(), &["prank", "--p", "3", "--f", "0,1,0,1"]);
    assert_eq!(stdout(&o).trim(), "0");
    let o = run(dir.path(), &["--json", "np", "--p", "3", "--f", "0,1,0,1"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["classification"], "supersingular");
    assert_eq!(v["schema"], "strata-forge/1");
}

#[test]
fn negative_coefficients_reduce() {
    let dir = tempfile::tempdir().unwrap();
    let a = stdout(&run(dir.path(), &["lpoly", "--p", "5", "--f", "-1,0,0,1"]));
    let b = stdout(&run(dir.path(), &["lpoly", "--p", "5", "--f", "4,0,0,1"]));
    assert_eq!(a, b);
    assert!(a.contains("l_poly: 1,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // genus 0
    assert_eq!(run(dir.path(), &["prank", "--p", "3", "--f", "1,0,1"]).status.code(), Some(1));
    // even characteristic
    assert_eq!(run(dir.path(), &["prank", "--p", "2", "--f", "1,0,1,1"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["bogus"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
    let o = run(dir.path(), &["--budget", "100", "census", "--p", "3", "--g", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn census_writes_cache_and_report_renders_without_recomputing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["census", "--p", "3", "--g", "1"]);
    assert!(o.status.success());
    let cache = dir.path().join("census_p3_n1_g1.jsonl");
    let text = std::fs::read_to_string(&cache).unwrap();
    assert_eq!(text.lines().count(), 18);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["schema"], "strata-forge/1");

    let o = run(dir.path(), &["experiment", "distribution", "--p", "3", "--g", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report = dir.path().join("report_distribution_p3_n1_g1.json");
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved["parameters"]["config"]["global"]["seed"], 1);

    // the census cache is no longer needed to re-render
    std::fs::remove_file(&cache).unwrap();
    let o = run(dir.path(), &["report"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("distribution [strata-forge/1] PASS"));
}

#[test]
fn cache_dir_flag_overrides_env() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = run(
        env_dir.path(),
        &["--cache-dir", flag_dir.path().to_str().unwrap(), "census", "--p", "3", "--g", "1"],
    );
    assert!(o.status.success());
    assert!(flag_dir.path().join("census_p3_n1_g1.jsonl").exists());
    assert!(!env_dir.path().join("census_p3_n1_g1.jsonl").exists());
}

#[test]
fn sampled_census_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for p in [&a, &b] {
        let o = run(
            dir.path(),
            &["--seed", "9", "census", "--p", "7", "--g", "2", "--sample", "200", "--out", p.to_str().unwrap()],
        );
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn baseline_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["mono", "baseline", "--g", "1", "--l", "3"]);
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert!(lines[0].starts_with("g,l,m,"));
    assert!(lines[1].starts_with("1,3,1,3,8"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn clutch_calculators() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["clutch", "labelings", "--tree", "path:2,1", "--f", "2"]);
    assert_eq!(stdout(&o), "2,0\n1,1\n");
    let o = run(dir.path(), &["clutch", "refines", "--tree", "path:1,1,1", "--target", "single:3"]);
    assert_eq!(stdout(&o).trim(), "true");
    let o = run(dir.path(), &["clutch", "coalesce", "--tree", "path:1,1,1", "--edge", "0"]);
    assert!(stdout(&o).starts_with("tree:"));
    let o = run(dir.path(), &["--json", "clutch", "witness", "--p", "3", "--g", "3", "--f", "2"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["p_rank"], 2);
}
