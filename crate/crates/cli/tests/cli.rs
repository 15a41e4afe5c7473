use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use emlab_core::algebra::GroupElement;
use emlab_core::constructions::{build_sl2_family, Sl2FamilyOptions};
use emlab_core::graph::{build_g_of_h, named};
use emlab_core::spectra::SolverConfig;
use serde_json::Value;

fn emlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emlab"))
        .args(args)
        .output()
        .unwrap()
}

fn emlab_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emlab"))
        .args(args)
        .env(key, value)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn csv_values(text: &str) -> Vec<f64> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue"));
    lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn spectrum_of_k4() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "k4.txt", &named::complete(4).to_text());
    let out_path = dir.path().join("s.csv");
    let out = emlab(&[
        "spectrum",
        "--in",
        &input,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let values = csv_values(&fs::read_to_string(&out_path).unwrap());
    assert_eq!(values.len(), 4);
    assert!((values[0] - 3.0).abs() < 1e-12);
    for v in &values[1..] {
        assert!((v + 1.0).abs() < 1e-12);
    }
}

#[test]
fn spectrum_of_640_vertex_fixture_has_zero_trace() {
    let dir = tempfile::tempdir().unwrap();
    let g = build_g_of_h(&named::petersen(), 11).unwrap();
    let input = write(dir.path(), "g.txt", &g.to_text());
    let out = emlab(&["spectrum", "--in", &input]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let values = csv_values(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(values.len(), 640);
    assert!(values.iter().sum::<f64>().abs() < 1e-9);
    let squares: f64 = values.iter().map(|v| v * v).sum();
    let frobenius: u64 = g.edges().map(|(_, _, w)| 2 * w * w).sum();
    assert!((squares - frobenius as f64).abs() < 1e-8);
}

#[test]
fn corrupt_graph_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("header.txt", "grph v1 4\n0 1 1\n"),
        ("range.txt", "graph v1 3\n0 7 1\n"),
        ("fields.txt", "graph v1 3\n0 1\n"),
        ("empty.txt", ""),
    ] {
        let input = write(dir.path(), name, text);
        let out = emlab(&["spectrum", "--in", &input]);
        assert_eq!(code(&out), 2, "{name}");
        assert!(stderr(&out).contains("error"), "{name}: {}", stderr(&out));
    }
    let missing = emlab(&["spectrum", "--in", "/nonexistent/graph.txt"]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("cannot read"));
}

#[test]
fn input_errors_exit_with_2() {
    for args in [
        vec!["bounded", "--q", "4"],
        vec!["bounded", "--q", "3"],
        vec!["approx", "--petersen", "--ell", "10"],
        vec!["approx", "--petersen", "--eps", "0"],
        vec!["km", "--n", "201"],
        vec!["km", "--n", "50"],
        vec!["lemmas", "--ell", ""],
        vec!["lemmas", "--ell", "9"],
        vec!["lemmas", "--m", "3"],
        vec!["cayley", "--q", "4"],
        vec!["bounded", "--q", "5", "--format", "xml"],
        vec!["frobnicate"],
    ] {
        let out = emlab(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn size_cap_from_environment() {
    let out = emlab_env(&["bounded", "--q", "5"], "EMLAB_SIZE_CAP", "50");
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let bad = emlab_env(&["bounded", "--q", "5"], "EMLAB_SIZE_CAP", "lots");
    assert_eq!(code(&bad), 2);
    let ok = emlab_env(&["bounded", "--q", "5"], "EMLAB_SIZE_CAP", "80");
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
}

#[test]
fn perturbed_transfer_function_fails_with_1() {
    let out = emlab(&["lemmas", "--ell", "11", "--m", "4", "--perturb-f", "10"]);
    assert_eq!(code(&out), 1);
    let rep = json(&out);
    assert_eq!(rep["verdict"], "FAIL");
    let failed: Vec<&String> = rep["claims"]
        .as_object()
        .unwrap()
        .iter()
        .filter(|(_, c)| c["status"] == "fail")
        .map(|(k, _)| k)
        .collect();
    assert_eq!(failed.len(), 1, "{failed:?}");
    assert!(failed[0].contains("f′"));
}

#[test]
fn report_schema_and_number_format() {
    let out = emlab(&["bounded", "--q", "5"]);
    assert_eq!(code(&out), 0);
    let rep = json(&out);
    let keys: Vec<&String> = rep.as_object().unwrap().keys().collect();
    let mut expect = vec![
        "claims",
        "construction",
        "measured",
        "params",
        "schema",
        "seed",
        "tolerances",
        "verdict",
        "wall_clock_seconds",
    ];
    expect.sort();
    let mut keys: Vec<&str> = keys.iter().map(|k| k.as_str()).collect();
    keys.sort();
    assert_eq!(keys, expect);
    assert_eq!(rep["schema"], "emlab/1");
    assert_eq!(rep["verdict"], "PASS");
    assert_eq!(rep["params"]["m"], 4);
    let claim = &rep["claims"]["multiplicity ≥ √(n/log₂ n)"];
    assert_eq!(claim["status"], "not-applicable");
    assert_eq!(rep["claims"]["multiplicity ≥ q − 1"]["status"], "pass");

    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"lambda1\"")).unwrap();
    let number = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{number}");
}

#[test]
fn claims_csv_when_no_table_is_attached() {
    let out = emlab(&["lemmas", "--ell", "11", "--m", "4", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("claim,measured,relation,bound,kind,status\n"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn km_histogram_csv() {
    let out = emlab(&[
        "km",
        "--n",
        "200",
        "--samples",
        "2",
        "--bins",
        "1",
        "--friedman-n",
        "100",
        "--friedman-samples",
        "2",
        "--friedman-min-pass",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin,lo,hi,empirical,expected"));
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    // Only the top eigenvalue 3 falls outside [−2√2, 2√2].
    assert!((row[3] - (1.0 - 1.0 / 200.0)).abs() < 1e-12, "{row:?}");
    assert!((row[4] - 1.0).abs() < 1e-9);
    assert!(lines.next().is_none());
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "construction = \"bounded\"\nq = 7\nm = 5\n",
    );
    let out = emlab(&["bounded", "--config", &cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = json(&out);
    assert_eq!(rep["params"]["q"], 7);
    assert_eq!(rep["measured"]["vertices"], 7 * 6 * 5);

    let out = emlab(&["bounded", "--config", &cfg, "--q", "5"]);
    assert_eq!(json(&out)["measured"]["vertices"], 5 * 4 * 5);

    let wrong = emlab(&["approx", "--config", &cfg]);
    assert_eq!(code(&wrong), 2);
    let unknown = write(dir.path(), "bad.toml", "colour = 3\n");
    assert_eq!(code(&emlab(&["bounded", "--config", &unknown])), 2);
}

#[test]
fn cayley_with_supplied_generators() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "1 2 3\n");
    assert_eq!(
        code(&emlab(&["cayley", "--q", "3", "--generators", &bad])),
        2
    );
    let not_in_group = write(dir.path(), "det.txt", "1 1 0 0\n");
    assert_eq!(
        code(&emlab(&[
            "cayley",
            "--q",
            "3",
            "--generators",
            &not_in_group
        ])),
        2
    );

    let found = build_sl2_family(
        &Sl2FamilyOptions::search(3, 1000, 0),
        &SolverConfig::default(),
    )
    .unwrap();
    let lines: String = found
        .psl_set
        .unwrap()
        .elements()
        .iter()
        .map(|g| match g {
            GroupElement::ProjMat2([a, b, c, d]) => format!("{a} {b} {c} {d}\n"),
            other => panic!("unexpected {other}"),
        })
        .collect();
    let good = write(dir.path(), "good.txt", &format!("# searched set\n{lines}"));
    let out = emlab(&["cayley", "--q", "3", "--generators", &good]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = json(&out);
    assert_eq!(rep["measured"]["second_multiplicity"], 8);
    assert_eq!(rep["measured"]["search_tried"], 0);
}

#[test]
fn forced_augmentation_scales_the_graph() {
    let out = emlab(&["cayley", "--q", "3", "--augment", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = json(&out);
    assert_eq!(rep["measured"]["vertices"], 432);
    assert_eq!(rep["claims"]["degree = 18"]["status"], "not-applicable");
}
