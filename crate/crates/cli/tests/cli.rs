use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wickgraph"));
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV report, split into fields.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn without_wallclock(csv: &str) -> String {
    csv.lines()
        .map(|l| match l.find("\"wallclock_s\"") {
            Some(i) if l.starts_with('#') => l[..i].to_string(),
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn relu_theory_table() {
    let o = run(&["jacobian-table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("stat,k,L,N,trials,mean,stderr,theory,z,theory_rational\n"));
    assert!(text.lines().last().unwrap().starts_with("# {"));
    let expected = [
        ["0.5", "0.75", "1.375", "2.8125"],
        ["0.25", "0.3125", "0.515625", "0.97265625"],
        ["0.125", "0.109375", "0.130859375", "0.180908203"],
    ];
    let r = rows(&text);
    assert_eq!(r.len(), 12);
    for row in &r {
        let k: usize = row[1].parse().unwrap();
        let l: usize = row[2].parse().unwrap();
        assert_eq!(row[7], expected[l - 1][k - 1], "k={k} L={l}");
    }
    assert_eq!(r[11][9], "741/4096");
}

#[test]
fn linear_table_is_catalan() {
    let o = run(&["jacobian-table", "--activation", "linear", "--depth", "1"]);
    assert!(o.status.success());
    let theory: Vec<String> = rows(&stdout(&o)).into_iter().map(|r| r[7].clone()).collect();
    assert_eq!(theory, ["1", "2", "5", "14"]);
}

#[test]
fn relu_mc_column_matches_printed_row() {
    let o = run(&["jacobian-table", "--depth", "1", "--mc", "--width", "500", "--trials", "200", "--seed", "1"]);
    assert!(o.status.success());
    let printed = [0.501, 0.752, 1.384, 2.840];
    for row in rows(&stdout(&o)) {
        let k: usize = row[1].parse().unwrap();
        let mean: f64 = row[5].parse().unwrap();
        let z: f64 = row[8].parse().unwrap();
        assert!(z.abs() <= 3.0, "k={k} z={z}");
        assert!((mean - printed[k - 1]).abs() <= 0.05 * printed[k - 1]);
        assert_eq!(row[3], "500");
        assert_eq!(row[4], "200");
    }
}

#[test]
fn mc_requires_seed() {
    let o = run(&["jacobian-table", "--mc", "--width", "10", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
    assert_eq!(run(&["rate"]).status.code(), Some(2));
    assert_eq!(run(&["wick-verify"]).status.code(), Some(2));
}

#[test]
fn output_is_reproducible() {
    let args = ["rate", "--widths", "8,16,32", "--trials", "8", "--k-max", "2", "--seed", "5"];
    let a = stdout(&run(&args));
    let b = stdout(&run_env(&args, &[("TOOL_THREADS", "1")]));
    let c = stdout(&run_env(&args, &[("TOOL_THREADS", "3")]));
    assert_eq!(without_wallclock(&a), without_wallclock(&b));
    assert_eq!(without_wallclock(&a), without_wallclock(&c));
}

#[test]
fn rate_schema_and_errors() {
    let o = run(&["rate", "--widths", "50,100", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
    let base = ["rate", "--widths", "10,20,40", "--trials", "10", "--k-max", "2", "--seed", "1"];
    let g = stdout(&run(&base));
    let mut ternary = base.to_vec();
    ternary.extend(["--distribution", "ternary"]);
    let t = run(&ternary);
    assert!(t.status.success());
    let t = stdout(&t);
    assert_eq!(g.lines().next(), t.lines().next());
    let kinds = |s: &str| rows(s).into_iter().map(|r| (r[0].clone(), r[1].clone(), r[2].clone())).collect::<Vec<_>>();
    assert_eq!(kinds(&g), kinds(&t));
    assert_eq!(rows(&t).iter().filter(|r| r[0] == "slope").count(), 2);
    assert!(t.contains("\"distribution\":\"ternary\""));
}

#[test]
fn wick_verify_fifty_graphs() {
    let o = run(&["wick-verify", "--count", "50", "--seed", "7"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let graphs: Vec<_> = r.iter().filter(|r| r[0].starts_with("graph_")).collect();
    assert_eq!(graphs.len(), 50);
    assert!(r.iter().all(|r| r[1] == "true"));
}

#[test]
fn gp_route_equivalence() {
    let o = run(&["gp", "--depth", "2", "--activation", "poly:0,1,1"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert!(r.iter().any(|r| r[0] == "route_equivalence" && r[1] == "true"));
}

#[test]
fn ntk_linear_closed_form() {
    let o = run(&["ntk", "--depth", "1", "--linear", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let checks = v["rows"].as_array().unwrap();
    let c = checks.iter().find(|c| c["check"] == "linear_closed_form").unwrap();
    assert_eq!(c["pass"], true);
    let ip = 0.6 * 0.5 + 0.3 * 0.1 + 0.8 * 0.7;
    assert!((c["measured"].as_f64().unwrap() - 2.0 * ip).abs() < 1e-12);
    assert_eq!(v["failed"], 0);
}

#[test]
fn trees_verify_passes() {
    let o = run(&["trees-verify", "--seed", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let r = rows(&stdout(&o));
    assert!(r.iter().any(|r| r[0].starts_with("jacobian_")));
    assert!(r.iter().all(|r| r[1] == "true"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fc.json");
    std::fs::write(&cfg, r#"{"command": "fc", "activation": ["linear"], "depth": 2, "k-max": 3, "format": "json"}"#).unwrap();
    let out = dir.path().join("out.json");
    let o = run(&["fc", "--config", cfg.to_str().unwrap(), "--depth", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["metadata"]["params"]["depth"], 1);
    assert_eq!(v["metadata"]["params"]["k-max"], 3);
    let m: Vec<f64> = v["rows"].as_array().unwrap().iter().map(|r| r["m_theory_float"].as_f64().unwrap()).collect();
    assert_eq!(m, [1.0, 2.0, 5.0]);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dept": 2}"#).unwrap();
    assert_eq!(run(&["fc", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&bad, r#"{"command": "rate"}"#).unwrap();
    assert_eq!(run(&["fc", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["fc", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert!(!Path::new("/nonexistent/cfg.json").exists());
}

#[test]
fn fc_csv_matches_golden() {
    let o = run(&["fc", "--depth", "2", "--k-max", "2"]);
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["k,L,m_theory_rational,m_theory_float", "1,1,1/2,0.5", "1,2,1/4,0.25", "2,1,3/4,0.75", "2,2,5/16,0.3125"]);
}

#[test]
fn invalid_parameters_exit_nonzero() {
    assert_eq!(run(&["fc", "--activation", "tanh"]).status.code(), Some(2));
    assert_eq!(run(&["gp", "--x", "1,2", "--y", "1"]).status.code(), Some(2));
    assert_eq!(run(&["jacobian-table", "--mc", "--seed", "1", "--x2", "2"]).status.code(), Some(2));
    assert_eq!(
        run(&["jacobian-table", "--mc", "--seed", "1", "--width", "4", "--trials", "2", "--distribution", "complex"]).status.code(),
        Some(2)
    );
    assert_ne!(run(&["no-such-command"]).status.code(), Some(0));
}
