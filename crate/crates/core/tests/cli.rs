use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn pollvote(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pollvote")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FIG1: &str = "dataset,voter_id,round_index,m,u1,u2,u3,u4,u5,s1,s2,s3,s4,s5,vote\n\
                    EX,v1,0,5,40,30,20,10,0,25,70,20,100,80,1\n";

const THREE: &str = "dataset,voter_id,round_index,m,u1,u2,u3,s1,s2,s3,vote\n\
                     T,a,0,3,10,5,0,40,35,25,1\n\
                     T,a,1,3,10,5,0,20,50,30,2\n\
                     T,b,0,3,10,5,0,10,30,60,3\n";

fn sim_config(voters: usize, rounds: usize, weights: (f64, f64)) -> String {
    format!(
        r#"{{
  "dataset": "SIM",
  "population": {{
    "components": [
      {{"spec": {{"family": "TRUTH"}}, "weight": {}, "tremble": 0.0}},
      {{"spec": {{"family": "KP", "k": 2}}, "weight": {}, "tremble": 0.1}}
    ],
    "rounds_per_voter": {rounds},
    "num_voters": {voters}
  }},
  "pollgen": {{"m": 3, "n": 300, "scheme": {{"type": "UNIFORM_ORDERINGS", "min_gap": 1}}, "seed": 5}}
}}"#,
        weights.0, weights.1
    )
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.csv", THREE);
    let o = pollvote(&["validate", s(&good)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("3 records"));

    let bad = write(&dir, "bad.csv", &THREE.replace("T,b,0,3,10,5,0,10,30,60,3", "T,b,0,3,10,5,0,10,30,60,4"));
    let o = pollvote(&["validate", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("b#0"), "{}", stderr(&o));

    let o = pollvote(&["validate", s(&dir.path().join("absent.csv"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent.csv"));
}

#[test]
fn predict_examples() {
    let dir = TempDir::new().unwrap();
    let fig1 = write(&dir, "fig1.csv", FIG1);
    let o = pollvote(&["predict", s(&fig1), "--family", "LDLB", "--param", "r=0.01"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "voter_id,round_index,predicted\nv1,0,4\n");

    let data = write(&dir, "three.csv", THREE);
    let o = pollvote(&["predict", s(&data), "--family", "TRUTH"]);
    let preds: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect();
    assert_eq!(preds, vec!["1", "1", "1"]);

    let o = pollvote(&["predict", s(&data), "--family", "AU", "--param", "alpha=0", "--param", "beta=5", "--param", "eps=0.1"]);
    let preds: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect();
    assert_eq!(preds, vec!["1", "2", "3"]);

    let o = pollvote(&["predict", s(&data), "--family", "KP", "--param", "k=7"]);
    assert_eq!(code(&o), 2);
    let o = pollvote(&["predict", s(&data), "--family", "KP", "--param", "r=0.1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_writes_dataset_and_labels() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sim.json", &sim_config(100, 36, (1.0, 1.0)));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = pollvote(&["simulate", s(&cfg), "--seed", "3", "--output", s(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stdout(&o).contains("3600 records"));
    }
    let data = std::fs::read_to_string(a.join("dataset.csv")).unwrap();
    assert_eq!(data.lines().count(), 3601);
    assert_eq!(data, std::fs::read_to_string(b.join("dataset.csv")).unwrap());
    assert_eq!(
        std::fs::read(a.join("ground_truth.json")).unwrap(),
        std::fs::read(b.join("ground_truth.json")).unwrap()
    );
    assert_eq!(code(&pollvote(&["validate", s(&a.join("dataset.csv"))])), 0);

    let c = dir.path().join("c");
    pollvote(&["simulate", s(&cfg), "--seed", "4", "--output", s(&c)]);
    assert_ne!(data, std::fs::read_to_string(c.join("dataset.csv")).unwrap());

    let o = pollvote(&["simulate", s(&cfg), "--format", "json", "--output", s(&c)]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(c.join("dataset.jsonl")).unwrap().lines().count(), 3600);
}

#[test]
fn simulate_rejects_bad_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "zero.json", &sim_config(10, 5, (0.0, 0.0)));
    let o = pollvote(&["simulate", s(&cfg), "--output", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("weight"), "{}", stderr(&o));

    let cfg = write(&dir, "broken.json", "{\"population\": 3}");
    assert_eq!(code(&pollvote(&["simulate", s(&cfg)])), 2);
}

#[test]
fn evaluate_truthful_population_and_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sim.json", &sim_config(6, 12, (1.0, 0.0)));
    let sim = dir.path().join("sim");
    assert_eq!(code(&pollvote(&["simulate", s(&cfg), "--output", s(&sim)])), 0);
    let out = dir.path().join("eval");
    // families whose grid contains a point that always votes truthfully
    let families = "TRUTH,KP,LD,LDLB,AU,AU_EPS,FREQ_BASELINE";
    let o = pollvote(&["evaluate", s(&sim.join("dataset.csv")), "--families", families, "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let overall = std::fs::read_to_string(out.join("overall.csv")).unwrap();
    let rows: Vec<&str> = overall.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2], "0.000000", "{row}");
    }

    let report = out.join("fit_report.json");
    let o = pollvote(&["report", s(&report), "--kind", "polltype"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 7);
    let order: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(order, ["Q1_Q2_Q3", "Q1_Q3_Q2", "Q2_Q1_Q3", "Q3_Q1_Q2", "Q2_Q3_Q1", "Q3_Q2_Q1"]);

    let o = pollvote(&["report", s(&report), "--kind", "bestmodel"]);
    let total: f64 = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 6.0).abs() < 1e-5, "{total}");

    let o = pollvote(&["report", s(&report), "--kind", "dominated"]);
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(",0")));

    assert_eq!(code(&pollvote(&["report", s(&report), "--kind", "pie"])), 2);
    assert_eq!(code(&pollvote(&["report", s(&out.join("overall.csv")), "--kind", "overall"])), 1);
}

#[test]
fn evaluate_usage_errors() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "three.csv", THREE);
    assert_eq!(code(&pollvote(&["evaluate", s(&data), "--families", "AU,WIZARD"])), 2);
    let grids = write(&dir, "grids.json", r#"{"LD": {"k": [1]}}"#);
    let o = pollvote(&["evaluate", s(&data), "--families", "LD", "--grids", s(&grids), "--output", s(dir.path())]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn evaluate_with_grid_overrides_and_short_voters() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "three.csv", THREE);
    let grids = write(&dir, "grids.json", r#"{"LD": {"r": [0.0, 0.5]}}"#);
    let out = dir.path().join("eval");
    let o = pollvote(&["evaluate", s(&data), "--families", "LD", "--grids", s(&grids), "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("fit_report.json")).unwrap()).unwrap();
    assert_eq!(report["excluded"][0]["voter_id"], "b");
    assert_eq!(report["voters"].as_array().unwrap().len(), 1);
    assert_eq!(report["voters"][0]["results"][0]["fold_params"].as_array().unwrap().len(), 2);
}

#[test]
fn planted_mixed_population_favours_au() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "mix.json",
        r#"{
  "population": {
    "components": [
      {"spec": {"family": "KP", "k": 2}, "weight": 1, "tremble": 0.1},
      {"spec": {"family": "LDLB", "r": 0.05}, "weight": 1, "tremble": 0.1},
      {"spec": {"family": "AU", "alpha": 0.8, "beta": 5, "eps": 1}, "weight": 1, "tremble": 0.1}
    ],
    "rounds_per_voter": 36,
    "num_voters": 18
  },
  "pollgen": {"m": 3, "n": 300, "scheme": {"type": "UNIFORM_ORDERINGS", "min_gap": 1}, "seed": 8}
}"#,
    );
    let sim = dir.path().join("sim");
    assert_eq!(code(&pollvote(&["simulate", s(&cfg), "--output", s(&sim)])), 0);
    let out = dir.path().join("eval");
    let o = pollvote(&["evaluate", s(&sim.join("dataset.csv")), "--families", "AU,CV,LD", "--output", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let overall = std::fs::read_to_string(out.join("overall.csv")).unwrap();
    let err = |family: &str| -> f64 {
        overall
            .lines()
            .find(|l| l.starts_with(&format!("{family},")))
            .unwrap()
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(err("AU") <= err("CV") && err("AU") <= err("LD"), "{overall}");
}

#[test]
fn ballot_order_and_ts16_inputs() {
    let dir = TempDir::new().unwrap();
    // ballot order: the favourite sits in column 3
    let ballot = write(
        &dir,
        "ballot.csv",
        "dataset,voter_id,round_index,m,u1,u2,u3,s1,s2,s3,vote\nB,x,0,3,0,5,10,40,35,25,3\n",
    );
    let o = pollvote(&["predict", s(&ballot), "--ballot-order", "--family", "TRUTH"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).ends_with("x,0,1\n"));
    assert_eq!(code(&pollvote(&["validate", s(&ballot), "--ballot-order", "--from-ts16"])), 2);
}
