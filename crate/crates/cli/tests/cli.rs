use std::fs;
use std::process::{Command, Output};

const FIGURE_GENS: &str = "5,6,2,1;1,2,0,1;7,0,2,7;5,0,0,5;2,7,7,1;1,4,0,1;1,0,4,1";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssgraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn build_single_vertex() {
    let o = run(&["build", "--p", "13", "--l", "2", "--H", "trivial"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 1);
    assert_eq!(v["adjacency"], serde_json::json!([[3]]));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["build", "--p", "23", "--l", "23"]).status.code(), Some(2));
    assert_eq!(run(&["build", "--p", "23", "--l", "3", "--N", "3", "--H", "borel"]).status.code(), Some(2));
    assert_eq!(run(&["build", "--p", "21", "--l", "2"]).status.code(), Some(2));
    assert_eq!(run(&["build", "--p", "23", "--l", "2", "--H", "nonsense", "--N", "3"]).status.code(), Some(2));
    assert_eq!(run(&["build", "--p", "23", "--l", "2", "--N", "4", "--H-gens", "2,0,0,1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["eta-scan", "--l", "2", "--p-max", "50", "--N", "2"]).status.code(), Some(2));
}

#[test]
fn figure_one_verifies() {
    let o = run(&["build", "--p", "23", "--l", "3", "--N", "8", "--H-gens", FIGURE_GENS]);
    assert_eq!(o.status.code(), Some(0));
    let g = json(&o);
    assert_eq!(g["N"], 8);

    let o = run(&["verify", "--p", "23", "--l", "3", "--N", "8", "--H-gens", FIGURE_GENS]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    let statuses: Vec<(String, String)> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap().into(), c["status"].as_str().unwrap().into()))
        .collect();
    assert!(statuses.iter().any(|(n, s)| n == "component_isomorphism" && s == "pass"));
    assert!(statuses.iter().all(|(_, s)| s == "pass" || s == "skipped"));

    let o = run(&["components", "--p", "23", "--l", "3", "--N", "8", "--H-gens", FIGURE_GENS]);
    assert_eq!(o.status.code(), Some(0));
    let c = json(&o);
    assert_eq!(c["components"]["connected_components"], 2);
    assert_eq!(c["components"]["cayley"]["k"], 2);
}

#[test]
fn borel_instances_verify() {
    for (p, n) in [("29", "5"), ("41", "7")] {
        let o = run(&["verify", "--p", p, "--l", "2", "--H", "borel", "--N", n]);
        assert_eq!(o.status.code(), Some(0), "p={p} N={n}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&["verify", "--p", "37", "--l", "2", "--H", "borel", "--N", "3", "--against-full"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("\"quotient\""));
}

#[test]
fn corrupted_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let o = run(&["build", "--p", "23", "--l", "2", "--H", "borel", "--N", "3", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut g: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let x = g["adjacency"][0][1].as_u64().unwrap();
    g["adjacency"][0][1] = (x + 1).into();
    fs::write(&path, g.to_string()).unwrap();
    assert_eq!(run(&["verify", "--input", path.to_str().unwrap()]).status.code(), Some(3));

    fs::write(&path, "{\"p\": 23,").unwrap();
    assert_eq!(run(&["verify", "--input", path.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(run(&["export", "--input", path.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn file_round_trip_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let p = path.to_str().unwrap();
    assert_eq!(run(&["build", "--p", "31", "--l", "2", "--H", "borel", "--N", "3", "-o", p]).status.code(), Some(0));
    let o = run(&["export", "--input", p, "--format", "json"]);
    assert_eq!(stdout(&o), fs::read_to_string(&path).unwrap());
    let dot = stdout(&run(&["export", "--input", p, "--format", "dot"]));
    assert!(dot.starts_with("digraph"));
    let csv = stdout(&run(&["export", "--input", p, "--format", "csv"]));
    let n = json(&run(&["build", "--p", "31", "--l", "2", "--H", "borel", "--N", "3"]))["vertices"]
        .as_array()
        .unwrap()
        .len();
    assert_eq!(csv.lines().count(), n);
    let o = run(&["verify", "--input", p]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["spectrum", "--input", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["gap"]["eta"].as_f64().unwrap() > 0.0);
}

#[test]
fn dims_match() {
    let o = run(&["dims", "--p", "23", "--H", "borel", "--N", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["matches"], true);
    assert_eq!(run(&["dims", "--p", "23", "--H", "split_cartan", "--N", "5"]).status.code(), Some(2));
}

#[test]
fn eta_scan_rows() {
    let o = run(&["eta-scan", "--l", "2", "--p-max", "200", "--H", "trivial"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("p,l,n_vertices,eta,log_inv_eta,thm_bound,ref_2loglogp"));
    // primes 5 <= p < 200 other than 2 and 3
    assert_eq!(lines.count(), 44);
}

#[test]
fn distribution_json() {
    let o = run(&["distribution", "--l", "2", "--H", "borel", "--N", "3", "--p", "41,61"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["runs"].as_array().unwrap().len(), 2);
    assert!(v["runs"][0]["km"]["ks"].as_f64().unwrap() > 0.0);
}

#[test]
fn deterministic_across_threads() {
    let a = run(&["--threads", "1", "spectrum", "--p", "43", "--l", "2", "--H", "borel", "--N", "5", "--seed", "7"]);
    let b = run(&["--threads", "4", "spectrum", "--p", "43", "--l", "2", "--H", "borel", "--N", "5", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# instance\np = 23\nl = 2\nH = borel\nN = 3\np-max = 100\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = run(&["build", "--config", c]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["p"], 23);
    let o = run(&["build", "--config", c, "--p", "29"]);
    assert_eq!(json(&o)["p"], 29);
    fs::write(&cfg, "q = 5\n").unwrap();
    assert_eq!(run(&["build", "--config", c]).status.code(), Some(2));
}
