use std::path::Path;
use std::process::{Command, Output};

fn btsbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btsbm")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = btsbm(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn write_matches(dir: &Path) -> String {
    let path = dir.join("m.csv");
    let mut s = String::from("winner,loser,count\n");
    for (w, l, c) in [
        ("A", "B", 4), ("B", "A", 1), ("A", "C", 5), ("C", "A", 1), ("B", "C", 2),
        ("C", "B", 2), ("A", "D", 6), ("B", "D", 5), ("C", "D", 4), ("D", "C", 1),
    ] {
        s += &format!("{w},{l},{c}\n");
    }
    std::fs::write(&path, s).unwrap();
    path.to_str().unwrap().to_string()
}

const FAST: &[&str] = &["--iters", "600", "--burn-in", "100", "--seed", "3"];

#[test]
fn prior_reports_moments() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["prior", "--n", "105", "--gamma", "0.8", "--out", dir.path().to_str().unwrap()]);
    assert!(out.contains("E[K] = 2.3643"), "{out}");
    let json: serde_json::Value = serde_json::from_str(&read(&dir.path().join("prior.json"))).unwrap();
    assert!((json["var_k"].as_f64().unwrap() - 45.95).abs() < 0.01);
    let rows = read(&dir.path().join("prior_pmf.csv")).lines().count();
    assert_eq!(rows, 106);
}

#[test]
fn fit_writes_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_matches(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["fit", "--input", &input, "--out", out.to_str().unwrap()];
        args.extend_from_slice(FAST);
        ok(&args);
        out
    };
    let a = run("a");
    let b = run("b");
    for f in [
        "summary.json", "k_pmf.csv", "membership.csv", "strengths.csv", "entropy.csv", "partitions.csv", "trace.bin",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
    let summary: serde_json::Value = serde_json::from_str(&read(&a.join("summary.json"))).unwrap();
    assert_eq!(summary["n_items"], 4);
    assert_eq!(summary["n_draws"], 500);
    let labels = summary["consensus"]["labels"].as_array().unwrap();
    assert_eq!(labels.len(), 4);
    assert!(labels.iter().any(|l| l == 1));

    let trace = btsbm::io::load_trace(&a.join("trace.bin")).unwrap();
    assert_eq!(trace.len(), 500);
    assert_eq!(trace.n_items(), 4);
}

#[test]
fn compare_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_matches(dir.path());
    let out = dir.path().join("cmp");
    let mut args = vec!["compare", "--input", &input, "--out", out.to_str().unwrap(), "--se-method", "paired"];
    args.extend_from_slice(FAST);
    ok(&args);
    let report: serde_json::Value = serde_json::from_str(&read(&out.join("compare.json"))).unwrap();
    let d = report["delta_elpd"].as_f64().unwrap();
    let e1 = report["bt_sbm"]["elpd"].as_f64().unwrap();
    let e2 = report["bt"]["elpd"].as_f64().unwrap();
    assert!((d - (e1 - e2)).abs() < 1e-9);
    assert_eq!(read(&out.join("lpd.csv")).lines().count(), 1 + 6);
}

#[test]
fn simulate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "--out", sim.to_str().unwrap(), "--n", "24", "--k", "2,3", "--replicates", "2", "--seed", "5"]);
    for k in [2, 3] {
        for r in 1..=2 {
            assert!(sim.join(format!("data_k{k}_r{r}.csv")).exists());
            let truth = read(&sim.join(format!("truth_k{k}_r{r}.csv")));
            assert_eq!(truth.lines().count(), 25);
        }
    }
    let data = sim.join("data_k3_r1.csv");
    let out = dir.path().join("fit");
    let mut args = vec!["fit", "--input", data.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-trace"];
    args.extend_from_slice(FAST);
    ok(&args);
    assert!(!out.join("trace.bin").exists());
}

#[test]
fn diagnose_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "diagnose", "--out", dir.path().to_str().unwrap(), "--a", "1,2", "--delta", "-0.5,0,0.5", "--z", "1", "--w", "0,3",
    ]);
    let table = read(&dir.path().join("new_cluster_bias.csv"));
    assert_eq!(table.lines().count(), 1 + 2 * 3 * 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();

    let out = btsbm(&["prior", "--n", "10", "--gamma", "1.5", "--out", d]);
    assert_eq!(out.status.code(), Some(2));

    let out = btsbm(&["fit", "--input", "/no/such/file.csv", "--out", d]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.csv"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "winner,loser\nA,B\nC,C\n").unwrap();
    let out = btsbm(&["fit", "--input", bad.to_str().unwrap(), "--out", d]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains('3'));

    let input = write_matches(dir.path());
    let out = btsbm(&["fit", "--input", &input, "--out", d, "--iters", "10", "--burn-in", "10"]);
    assert_eq!(out.status.code(), Some(2));
}
