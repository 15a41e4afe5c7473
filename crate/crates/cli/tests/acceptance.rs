//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Runs with `harness = false` so the lines are printed even when every
//! criterion passes. The process exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use emlab_core::algebra::{
    double_coset_count, induced_character_norm, orbit_count, quotient_preimage_sl2, ActionRule,
    FiniteGroup, GeneratingSet, GroupAction, GroupElement,
};
use emlab_core::chebyshev::f_inverse;
use emlab_core::constructions::{
    build_cayley_general, build_sl2_family, pathlen_samples, verify_f_correspondence,
    verify_pathlen_identity, CayleyGeneralInstance, Sl2FamilyOptions,
};
use emlab_core::graph::{cayley_graph, named};
use emlab_core::spectra::{
    eigenvalues_with, multiplicity, second_multiplicity, spectra_match, SolverConfig,
    SpectrumTransform,
};
use serde_json::Value;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

struct Run {
    code: i32,
    stdout: String,
    elapsed: Duration,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).expect("report is JSON")
    }
}

fn emlab(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_emlab"))
        .args(args)
        .output()
        .expect("emlab runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 output"),
        elapsed: start.elapsed(),
    }
}

fn status(report: &Value, claim: &str) -> bool {
    report["claims"][claim]["status"] == "pass"
}

fn failed_claims(report: &Value) -> Vec<String> {
    report["claims"]
        .as_object()
        .map(|m| {
            m.iter()
                .filter(|(_, c)| c["status"] == "fail")
                .map(|(k, _)| k.clone())
                .collect()
        })
        .unwrap_or_default()
}

fn int(report: &Value, key: &str) -> i64 {
    report["measured"][key].as_i64().unwrap_or(-1)
}

fn real(report: &Value, key: &str) -> f64 {
    report["measured"][key].as_f64().unwrap_or(f64::NAN)
}

fn affine_desk() -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let gamma = Arc::new(FiniteGroup::affine(5).unwrap());
    let s = GeneratingSet::new(
        gamma.clone(),
        (2..5).map(|a| GroupElement::Affine { scale: a, shift: 0 }),
    )
    .unwrap();
    let inst =
        CayleyGeneralInstance::new(gamma, s, GroupElement::Affine { scale: 1, shift: 1 }).unwrap();
    let out = build_cayley_general(&inst, &cfg).unwrap();
    let tol = out.spectrum.default_tol();
    let r = second_multiplicity(&out.spectrum, tol).unwrap();
    let sep = r.separation.unwrap_or(f64::INFINITY);
    let elapsed = start.elapsed();
    let passed = out.graph.n() == 20
        && out.graph.check_regular(5).is_ok()
        && out.graph.is_connected()
        && r.count >= 4
        && sep > 10.0 * tol
        && elapsed < Duration::from_secs(1);
    Outcome::new(
        passed,
        format!(
            "n = {}, multiplicity {} at {:.12}, separation {sep:.3e} vs 10·tol {:.1e}, {elapsed:.2?}",
            out.graph.n(),
            r.count,
            r.target,
            10.0 * tol
        ),
    )
}

fn bounded_instances() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (q, m, n, mult) in [(5, 4, 80, 4), (13, 6, 936, 12)] {
        let run = emlab(&["bounded", "--q", &q.to_string(), "--m", &m.to_string()]);
        let rep = run.json();
        let ok = run.code == 0
            && int(&rep, "vertices") == n
            && int(&rep, "max_degree") == 4
            && int(&rep, "second_multiplicity") >= mult
            && status(&rep, "cluster width < 1e-7·λ₁")
            && (q != 13 || run.elapsed < Duration::from_secs(30));
        passed &= ok;
        parts.push(format!(
            "q={q}: n = {}, multiplicity {}, width {:.1e}, {:.2?}",
            int(&rep, "vertices"),
            int(&rep, "second_multiplicity"),
            real(&rep, "cluster_width"),
            run.elapsed
        ));
    }
    Outcome::new(passed, parts.join("; "))
}

fn cayley_q3() -> Outcome {
    let run = emlab(&["cayley", "--q", "3", "--seed", "0"]);
    let rep = run.json();
    let mult = int(&rep, "second_multiplicity");
    let bound = 216f64.powf(0.4) - 1.0;
    let passed = run.code == 0
        && int(&rep, "vertices") == 216
        && mult >= 8
        && 8.0 >= bound
        && status(&rep, "gap of Cay(Π, S) ≥ 4")
        && run.elapsed < Duration::from_secs(300);
    Outcome::new(
        passed,
        format!(
            "route {}, top gap {:.6}, n = {}, multiplicity {mult} ≥ 8 ≥ {bound:.4}, {:.2?}",
            rep["measured"]["route"],
            real(&rep, "top_gap"),
            int(&rep, "vertices"),
            run.elapsed
        ),
    )
}

fn pathlen_identity() -> Outcome {
    let cases = pathlen_samples(20, 2024).unwrap();
    let mut worst: f64 = 0.0;
    let mut all = true;
    for c in &cases {
        let r = verify_pathlen_identity(&c.h1, &c.h2, c.m, &c.xs).unwrap();
        worst = worst.max(r.worst_rel);
        all &= r.passed && r.samples.len() == 3 && r.worst_rel < 1e-8;
    }
    Outcome::new(
        all && cases.len() == 20,
        format!(
            "{} triples × 3 abscissae, worst relative difference {worst:.3e}",
            cases.len()
        ),
    )
}

fn petersen_correspondence() -> Outcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let h = named::petersen();
    let g = emlab_core::graph::build_g_of_h(&h, 11).unwrap();
    let gs = eigenvalues_with(&g, &cfg).unwrap();
    let c = verify_f_correspondence(&h, 11, &cfg).unwrap();
    let tol = gs.default_tol();
    let at3 = multiplicity(&gs, f_inverse(3.0, 11).unwrap(), tol).count;
    let at1 = multiplicity(&gs, f_inverse(1.0, 11).unwrap(), tol).count;
    let elapsed = start.elapsed();
    let passed = g.n() == 640
        && c.worst_distance < 1e-6
        && at3 >= 1
        && at1 >= 5
        && elapsed < Duration::from_secs(30);
    Outcome::new(
        passed,
        format!(
            "n = {}, {} eigenvalues above 2 mapped, worst |f(λ) − μ| {:.3e}, counts {at3} and {at1}, {elapsed:.2?}",
            g.n(),
            c.mapped_count,
            c.worst_distance
        ),
    )
}

fn approx_desk() -> Outcome {
    let run = emlab(&[
        "approx", "--n", "50", "--ell", "11", "--eps", "1.0", "--seed", "0",
    ]);
    let rep = run.json();
    let passed = run.code == 0
        && rep["measured"]["connected"] == true
        && real(&rep, "base_gap") >= 0.01
        && status(&rep, "κ ≥ 0.001·α₀^(−ℓ)")
        && status(&rep, "interval count ≥ base cluster count")
        && run.elapsed < Duration::from_secs(120);
    Outcome::new(
        passed,
        format!(
            "κ = {:.4e} vs {:.4e} (margin {:.1}×), interval count {} vs H count {}, {:.2?}",
            real(&rep, "kappa"),
            real(&rep, "kappa_bound"),
            real(&rep, "kappa_margin"),
            int(&rep, "interval_count"),
            int(&rep, "base_interval_count"),
            run.elapsed
        ),
    )
}

fn lemma_suite() -> Outcome {
    let run = emlab(&["lemmas", "--ell", "11,12,13,14,15", "--m", "4,5,6,7,8,9,10"]);
    let rep = run.json();
    let failed = failed_claims(&rep);
    let claims = rep["claims"].as_object().map_or(0, |m| m.len());
    Outcome::new(
        run.code == 0 && failed.is_empty() && claims == 9,
        format!("{claims} clauses, failures: {failed:?}"),
    )
}

fn algebra_suite() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    let pairs: Vec<(String, FiniteGroup)> = vec![
        ("affine(5)".into(), FiniteGroup::affine(5).unwrap()),
        ("affine(7)".into(), FiniteGroup::affine(7).unwrap()),
        ("affine(13)".into(), FiniteGroup::affine(13).unwrap()),
        (
            "SL(2,3) ⋉ F_3²".into(),
            "semidirect:sl2:3:vec2"
                .parse::<emlab_core::algebra::GroupSpec>()
                .unwrap()
                .build()
                .unwrap(),
        ),
    ];
    for (name, gamma) in pairs {
        let pi = Arc::new(gamma.top_subgroup().unwrap());
        let dc = double_coset_count(&gamma, &pi).unwrap();
        let norm = induced_character_norm(&gamma, &pi).unwrap();
        // Π × Π acting on Γ by (a, b)·g = a g b⁻¹.
        let actor = Arc::new(FiniteGroup::direct_product(pi.clone(), pi.clone()).unwrap());
        let law = gamma.law().clone();
        let rule = ActionRule::custom(move |ab, g| match ab {
            GroupElement::Product(a, b) => law.mul(&law.mul(a, g), &law.inv(b)),
            _ => panic!("product element expected"),
        });
        let orbits =
            orbit_count(&GroupAction::new(actor, gamma.elements().to_vec(), rule).unwrap());
        passed &= dc == norm && norm == orbits && dc == 2;
        parts.push(format!("{name}: {dc}/{norm}/{orbits}"));
    }
    let mut orders_ok = true;
    for q in [3u64, 5, 7, 11] {
        orders_ok &= FiniteGroup::sl2(q).unwrap().order() as u64 == q * (q * q - 1);
        orders_ok &= FiniteGroup::psl2(q).unwrap().order() as u64 == q * (q * q - 1) / 2;
        orders_ok &= FiniteGroup::affine(q).unwrap().order() as u64 == q * (q - 1);
        orders_ok &= FiniteGroup::units(q).unwrap().order() as u64 == q - 1;
        orders_ok &= FiniteGroup::vec2(q).unwrap().order() as u64 == q * q;
    }
    passed &= orders_ok;
    parts.push(format!(
        "orders {}",
        if orders_ok { "match" } else { "mismatch" }
    ));

    let cfg = SolverConfig::default();
    let out = build_sl2_family(&Sl2FamilyOptions::search(3, 1000, 0), &cfg).unwrap();
    let lift_ok = match &out.psl_set {
        Some(s0) => {
            let sl = Arc::new(FiniteGroup::sl2(3).unwrap());
            let lifted = quotient_preimage_sl2(s0, sl.clone()).unwrap();
            let a = eigenvalues_with(&cayley_graph(s0.parent(), s0).unwrap(), &cfg).unwrap();
            let b = eigenvalues_with(&cayley_graph(&sl, &lifted).unwrap(), &cfg).unwrap();
            let pad = b.len() - a.len();
            spectra_match(
                &a,
                &b,
                &SpectrumTransform::scale(2.0).padded(0.0, pad),
                1e-9,
            ) && pad == 12
        }
        None => false,
    };
    passed &= lift_ok;
    parts.push(format!(
        "lift doubling {}",
        if lift_ok {
            "matches to 1e-9"
        } else {
            "mismatch"
        }
    ));
    Outcome::new(passed, parts.join("; "))
}

fn empirical() -> Outcome {
    let run = emlab(&[
        "km",
        "--n",
        "2000",
        "--samples",
        "5",
        "--bins",
        "40",
        "--seed",
        "0",
    ]);
    let rep = run.json();
    let passed = run.code == 0
        && real(&rep, "l1_distance") < 0.05
        && int(&rep, "friedman_pass_count") >= 8
        && rep["claims"]["Kesten–McKay L1 distance below threshold"]["kind"] == "empirical";
    Outcome::new(
        passed,
        format!(
            "L1 {:.4e} < 0.05, λ₂ ≤ 2√2 + 0.15 in {}/10 samples at n = 500, {:.2?}",
            real(&rep, "l1_distance"),
            int(&rep, "friedman_pass_count"),
            run.elapsed
        ),
    )
}

fn strip_wall_clock(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_clock_seconds\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let graph: PathBuf = dir.path().join("petersen.txt");
    std::fs::write(&graph, named::petersen().to_text()).unwrap();
    let graph = graph.display().to_string();
    let fixtures: Vec<Vec<&str>> = vec![
        vec!["bounded", "--q", "5"],
        vec!["cayley", "--q", "3", "--seed", "4"],
        vec!["approx", "--petersen", "--ell", "11"],
        vec![
            "approx", "--n", "20", "--ell", "11", "--eps", "1.0", "--seed", "3",
        ],
        vec![
            "km",
            "--n",
            "200",
            "--samples",
            "2",
            "--friedman-n",
            "200",
            "--friedman-samples",
            "3",
            "--seed",
            "9",
        ],
        vec!["lemmas", "--ell", "11", "--m", "4"],
        vec!["spectrum", "--in", &graph],
        vec!["spectrum", "--in", &graph, "--format", "json"],
    ];
    let mut differing = Vec::new();
    for args in &fixtures {
        let (a, b) = (emlab(args), emlab(args));
        if a.code != b.code
            || strip_wall_clock(&a.stdout) != strip_wall_clock(&b.stdout)
            || a.stdout.is_empty()
        {
            differing.push(args.join(" "));
        }
    }
    Outcome::new(
        differing.is_empty(),
        format!(
            "{} fixtures rerun, differing: {differing:?}",
            fixtures.len()
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (u8, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "affine(5) desk instance", affine_desk),
        (2, "bounded-degree instances q = 5, 13", bounded_instances),
        (3, "SL(2,3) ⋉ F_3² pipeline", cayley_q3),
        (4, "path-length determinant identity", pathlen_identity),
        (5, "Petersen f-correspondence", petersen_correspondence),
        (6, "approximate multiplicity at N = 50", approx_desk),
        (
            7,
            "transfer-function and Chebyshev identity checks",
            lemma_suite,
        ),
        (8, "algebra suite", algebra_suite),
        (9, "empirical random-regular checks", empirical),
        (10, "determinism of CLI fixtures", determinism),
    ];
    let results: Vec<Outcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, _, check)| {
                scope.spawn(move || {
                    std::panic::catch_unwind(check)
                        .unwrap_or_else(|_| Outcome::new(false, "panicked"))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut all = true;
    for ((id, name, _), r) in criteria.iter().zip(&results) {
        all &= r.passed;
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict}: {name}: {}", r.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
