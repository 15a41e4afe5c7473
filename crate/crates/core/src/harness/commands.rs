//! One function per CLI subcommand, each returning a [`VerificationReport`].

use std::f64::consts::SQRT_2;
use std::sync::Arc;
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use super::report::{ClaimKind, Measured, Relation, VerificationReport};
use crate::algebra::{canonical_projective, FiniteGroup, GeneratingSet, GroupElement, PrimeField};
use crate::chebyshev::{
    cheb_fact_b, f_eval, f_inverse, f_lower_bound_check, f_prime, lambda_star,
    ratio_fact_increasing, ALPHA0, C1,
};
use crate::constructions::{
    build_approx, build_bounded, build_sl2_family, kesten_mckay_mass, random_regular_graph_with,
    sample_good_h, ApproxInstance, BoundedInstance, Hypothesis, Sl2FamilyOptions, Sl2FamilyRoute,
    Sl2FamilySource, GAP_SLACK,
};
use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::graph::{named, Graph};
use crate::spectra::{
    eigenvalues_with, histogram, second_multiplicity, MultiplicityReport, SolverConfig, Spectrum,
};

fn record_hypotheses(r: &mut VerificationReport, hypotheses: &[Hypothesis]) {
    for h in hypotheses {
        let key = format!("hypothesis: {}", h.name);
        r.measure(&key, h.passed);
        r.claim(&h.name, &key, Relation::IsTrue, None, ClaimKind::Hypothesis);
    }
}

fn record_multiplicity(r: &mut VerificationReport, m: &MultiplicityReport) {
    r.measure("second_multiplicity", m.count)
        .measure("cluster_width", m.cluster_width())
        .measure("separation", m.separation.unwrap_or(f64::INFINITY))
        .tolerance("multiplicity_cluster", m.tolerance);
    r.claim(
        "second eigenvalue cluster is isolated",
        "separation",
        Relation::Gt,
        Some(m.tolerance),
        ClaimKind::Diagnostic,
    );
}

fn record_spectrum(r: &mut VerificationReport, g: &Graph, s: &Spectrum) {
    r.measure("vertices", g.n())
        .measure("max_degree", g.max_degree())
        .measure("connected", g.is_connected())
        .measure("lambda1", s.values()[0])
        .measure("lambda2", s.values()[1])
        .measure("spectral_gap", s.values()[0] - s.values()[1]);
    if let Some(b) = s.residual_bound() {
        r.measure("eigen_residual_bound", b);
    }
    r.claim(
        "connected",
        "connected",
        Relation::IsTrue,
        None,
        ClaimKind::Theorem,
    );
}

fn finish(mut r: VerificationReport, start: Instant) -> VerificationReport {
    r.wall_clock_seconds = start.elapsed().as_secs_f64();
    r
}

/// Parameters of [`cmd_cayley`].
#[derive(Clone, Debug, PartialEq)]
pub struct CayleyParams {
    pub q: u64,
    pub seed: u64,
    pub budget: u64,
    pub augment: Option<u64>,
    /// Matrices `[a, b, c, d]` of a `PSL(2,q)` connection set, skipping the search.
    pub generators: Option<Vec<[u64; 4]>>,
    pub tol: Option<f64>,
}

impl CayleyParams {
    pub const DEFAULT_Q: u64 = 3;
    pub const DEFAULT_BUDGET: u64 = 1000;

    pub fn from_config(c: &RunConfig, generators: Option<Vec<[u64; 4]>>) -> Self {
        Self {
            q: c.q.unwrap_or(Self::DEFAULT_Q),
            seed: c.seed.unwrap_or(0),
            budget: c.budget.unwrap_or(Self::DEFAULT_BUDGET),
            augment: c.augment,
            generators,
            tol: c.tol,
        }
    }

    fn effective(&self, c: &RunConfig) -> RunConfig {
        RunConfig {
            construction: Some("cayley".into()),
            q: Some(self.q),
            seed: Some(self.seed),
            budget: Some(self.budget),
            augment: self.augment,
            tol: self.tol,
            generators: c.generators.clone(),
            ..RunConfig::default()
        }
    }
}

/// Parses `a b c d` lines (blank lines and `#` comments skipped).
pub fn parse_generators(text: &str) -> Result<Vec<[u64; 4]>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let entries: Vec<u64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("{e}"),
            })?;
        let m: [u64; 4] = entries.try_into().map_err(|v: Vec<u64>| Error::Parse {
            line: i + 1,
            message: format!("expected 4 entries, found {}", v.len()),
        })?;
        out.push(m);
    }
    Ok(out)
}

pub fn cmd_cayley(
    p: &CayleyParams,
    base: &RunConfig,
    solver: &SolverConfig,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let source = match &p.generators {
        Some(mats) => {
            let field = PrimeField::new(p.q)?;
            let psl = Arc::new(FiniteGroup::psl2(p.q)?);
            let elements = mats
                .iter()
                .map(|m| GroupElement::ProjMat2(canonical_projective(&field, m.map(|x| x % p.q))));
            Sl2FamilySource::Given(GeneratingSet::new(psl, elements)?)
        }
        None => Sl2FamilySource::Search {
            budget: p.budget,
            seed: p.seed,
        },
    };
    let opts = Sl2FamilyOptions {
        q: p.q,
        source,
        size: 8,
        augment: p.augment,
    };
    let out = build_sl2_family(&opts, solver)?;
    let mut r = VerificationReport::new("cayley", p.effective(base).to_params(), Some(p.seed));
    let g = &out.cayley.graph;
    let s = &out.cayley.spectrum;
    let tol = p.tol.unwrap_or_else(|| s.default_tol());
    record_spectrum(&mut r, g, s);
    let mult = second_multiplicity(s, tol)?;
    record_multiplicity(&mut r, &mult);

    let q2 = (p.q * p.q - 1) as f64;
    let n = g.n() as f64;
    let n_bound = n.powf(0.4) - 1.0;
    let route = serde_json::to_value(out.route).expect("route serializes");
    r.measure("route", route.as_str().unwrap_or_default())
        .measure("search_tried", out.search_tried)
        .measure("search_exhaustive", out.search_exhaustive)
        .measure("connection_set_size", out.top_set.len() + 2)
        .measure("top_gap", out.top_gap)
        .measure("claimed_bound", out.cayley.claimed_bound)
        .measure("n_pow_2_5_minus_1", n_bound);
    if let Some(gap) = out.psl_gap {
        r.measure("psl_gap", gap);
    }
    record_hypotheses(&mut r, &out.cayley.hypotheses);

    let degree_key = "max_degree";
    r.claim(
        "degree = |S| + 2",
        degree_key,
        Relation::Eq,
        Some((out.top_set.len() + 2) as f64),
        ClaimKind::Theorem,
    );
    r.measure("regular", g.check_regular(g.max_degree()).is_ok());
    r.claim(
        "regular",
        "regular",
        Relation::IsTrue,
        None,
        ClaimKind::Theorem,
    );
    if out.route == Sl2FamilyRoute::Augmented {
        r.not_applicable(
            "degree = 18",
            degree_key,
            Relation::Eq,
            Some(18.0),
            ClaimKind::Theorem,
        );
    } else {
        r.claim(
            "degree = 18",
            degree_key,
            Relation::Eq,
            Some(18.0),
            ClaimKind::Theorem,
        );
    }
    r.claim(
        "gap of Cay(Π, S) ≥ 4",
        "top_gap",
        Relation::Ge,
        Some(4.0 - GAP_SLACK),
        ClaimKind::Hypothesis,
    );
    r.claim(
        "multiplicity ≥ q² − 1",
        "second_multiplicity",
        Relation::Ge,
        Some(q2),
        ClaimKind::Theorem,
    );
    if out.route == Sl2FamilyRoute::Augmented {
        r.not_applicable(
            "multiplicity ≥ n^(2/5) − 1",
            "second_multiplicity",
            Relation::Ge,
            Some(n_bound),
            ClaimKind::Theorem,
        );
    } else {
        r.claim(
            "multiplicity ≥ n^(2/5) − 1",
            "second_multiplicity",
            Relation::Ge,
            Some(n_bound),
            ClaimKind::Theorem,
        );
        r.claim(
            "n^(2/5) − 1 ≤ q² − 1",
            "n_pow_2_5_minus_1",
            Relation::Le,
            Some(q2),
            ClaimKind::Diagnostic,
        );
    }
    if let Some(lift) = &out.lift {
        r.measure("lift_matched", lift.matched)
            .measure(
                "lift_padding",
                lift.measured_padding.map_or(-1, |k| k as i64),
            )
            .tolerance("lift_match", lift.tol);
        r.claim(
            "lift doubles the spectrum",
            "lift_matched",
            Relation::IsTrue,
            None,
            ClaimKind::Theorem,
        );
        r.claim(
            "lift pads with |PSL(2,q)| zeros",
            "lift_padding",
            Relation::Eq,
            Some(lift.expected_padding as f64),
            ClaimKind::Theorem,
        );
    }
    if let Some((factor, check)) = &out.augment {
        r.measure("augment_factor", *factor)
            .measure("augment_matched", check.matched)
            .measure(
                "augment_padding",
                check.measured_padding.map_or(-1, |k| k as i64),
            )
            .tolerance("augment_match", check.tol);
        r.claim(
            "augmentation scales the spectrum",
            "augment_matched",
            Relation::IsTrue,
            None,
            ClaimKind::Theorem,
        );
        r.claim(
            "augmentation pads with |Π|(N − 1) zeros",
            "augment_padding",
            Relation::Eq,
            Some(check.expected_padding as f64),
            ClaimKind::Theorem,
        );
    }
    r.csv = Some(s.to_csv());
    Ok(finish(r, start))
}

/// Parameters of [`cmd_bounded`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedParams {
    pub q: u64,
    pub m: Option<usize>,
    pub tol: Option<f64>,
}

impl BoundedParams {
    pub const DEFAULT_Q: u64 = 13;

    pub fn from_config(c: &RunConfig) -> Self {
        Self {
            q: c.q.unwrap_or(Self::DEFAULT_Q),
            m: c.m,
            tol: c.tol,
        }
    }
}

/// Cluster width allowed for the second eigenvalue, relative to `λ₁`.
pub const BOUNDED_WIDTH_FACTOR: f64 = 1e-7;

pub fn cmd_bounded(p: &BoundedParams, solver: &SolverConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let inst = BoundedInstance::new(p.q, p.m)?;
    let out = build_bounded(&inst, solver)?;
    let effective = RunConfig {
        construction: Some("bounded".into()),
        q: Some(p.q),
        m: Some(inst.m()),
        tol: p.tol,
        ..RunConfig::default()
    };
    let mut r = VerificationReport::new("bounded", effective.to_params(), None);
    let g = &out.graph;
    let s = &out.spectrum;
    let tol = p.tol.unwrap_or_else(|| s.default_tol());
    record_spectrum(&mut r, g, s);
    let mult = second_multiplicity(s, tol)?;
    record_multiplicity(&mut r, &mult);
    record_hypotheses(&mut r, &out.hypotheses);

    let q = p.q as f64;
    let m = inst.m();
    let n = g.n() as f64;
    let group_order = (p.q * (p.q - 1)) as usize;
    let growth_bound = (n / n.log2()).sqrt();
    let width_limit = BOUNDED_WIDTH_FACTOR * s.values()[0];
    r.measure("m", m)
        .measure("m_floored", inst.m_floored())
        .measure("kappa", out.kappa)
        .measure("measured_kappa", out.measured_kappa)
        .measure("y0", out.y0)
        .measure("half_lambda2", 0.5 * s.values()[1])
        .measure("sqrt_n_over_log2_n", growth_bound)
        .measure(
            "group_vertices_degree_4",
            (0..group_order).all(|v| g.degree(v) == 4),
        )
        .measure(
            "path_vertices_degree_2",
            (group_order..g.n()).all(|v| g.degree(v) == 2),
        )
        .tolerance("cluster_width_limit", width_limit);
    r.claim(
        "n = q(q − 1)m",
        "vertices",
        Relation::Eq,
        Some(q * (q - 1.0) * m as f64),
        ClaimKind::Theorem,
    );
    r.claim(
        "max degree ≤ 4",
        "max_degree",
        Relation::Le,
        Some(4.0),
        ClaimKind::Theorem,
    );
    r.claim(
        "max degree = |S| + 2",
        "max_degree",
        Relation::Eq,
        Some(4.0),
        ClaimKind::Theorem,
    );
    r.claim(
        "group vertices have degree 4",
        "group_vertices_degree_4",
        Relation::IsTrue,
        None,
        ClaimKind::Diagnostic,
    );
    r.claim(
        "path vertices have degree 2",
        "path_vertices_degree_2",
        Relation::IsTrue,
        None,
        ClaimKind::Diagnostic,
    );
    r.claim(
        "multiplicity ≥ q − 1",
        "second_multiplicity",
        Relation::Ge,
        Some(q - 1.0),
        ClaimKind::Theorem,
    );
    r.claim(
        "cluster width < 1e-7·λ₁",
        "cluster_width",
        Relation::Lt,
        Some(width_limit),
        ClaimKind::Diagnostic,
    );
    let growth = "multiplicity ≥ √(n/log₂ n)";
    if inst.m_is_growth_formula() {
        r.claim(
            growth,
            "second_multiplicity",
            Relation::Ge,
            Some(growth_bound),
            ClaimKind::Theorem,
        );
    } else {
        r.not_applicable(
            growth,
            "second_multiplicity",
            Relation::Ge,
            Some(growth_bound),
            ClaimKind::Theorem,
        );
    }
    r.claim(
        "λ₂/2 > y₀",
        "half_lambda2",
        Relation::Gt,
        Some(out.y0),
        ClaimKind::Theorem,
    );
    r.csv = Some(s.to_csv());
    Ok(finish(r, start))
}

/// Parameters of [`cmd_approx`].
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxParams {
    pub n: usize,
    pub ell: usize,
    pub eps: f64,
    pub seed: u64,
    /// Use the Petersen graph as `H` instead of sampling.
    pub petersen: bool,
    pub max_tries: u64,
    /// Largest allowed `|f(λ) − μ|`.
    pub tol: Option<f64>,
}

impl ApproxParams {
    pub const DEFAULT_N: usize = 50;
    pub const DEFAULT_ELL: usize = 11;
    pub const DEFAULT_EPS: f64 = 1.0;
    pub const DEFAULT_MAX_TRIES: u64 = 100;

    pub fn from_config(c: &RunConfig) -> Self {
        Self {
            n: c.n.unwrap_or(Self::DEFAULT_N),
            ell: c.ell.unwrap_or(Self::DEFAULT_ELL),
            eps: c.eps.unwrap_or(Self::DEFAULT_EPS),
            seed: c.seed.unwrap_or(0),
            petersen: c.petersen.unwrap_or(false),
            max_tries: c.max_tries.unwrap_or(Self::DEFAULT_MAX_TRIES),
            tol: c.tol,
        }
    }
}

pub fn cmd_approx(p: &ApproxParams, solver: &SolverConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let inst = if p.petersen {
        ApproxInstance::from_graph(named::petersen(), p.ell, p.eps, p.seed, solver)?
    } else {
        sample_good_h(p.n, p.ell, p.eps, p.seed, p.max_tries, solver)?
    };
    let out = build_approx(&inst, solver)?;
    let effective = RunConfig {
        construction: Some("approx".into()),
        n: Some(inst.n),
        ell: Some(p.ell),
        eps: Some(p.eps),
        seed: Some(p.seed),
        petersen: Some(p.petersen),
        max_tries: Some(p.max_tries),
        tol: p.tol,
        ..RunConfig::default()
    };
    let mut r = VerificationReport::new("approx", effective.to_params(), Some(p.seed));
    record_spectrum(&mut r, &out.graph, &out.spectrum);
    record_hypotheses(&mut r, &out.hypotheses);

    let c = &out.correspondence;
    let f_tol = p.tol.unwrap_or(c.distance_tol);
    let scale = ALPHA0.powi(p.ell as i32);
    // implied constants of the asymptotic statement at this (N, ℓ, ε)
    let implied_c = C1 * (inst.n as f64).ln() / scale;
    let implied_delta = 2.0 * ALPHA0 * implied_c * p.eps / (C1 * C1);
    r.measure("base_vertices", inst.n)
        .measure("base_tries", inst.tries)
        .measure("base_gap", inst.gap_h)
        .measure("base_lambda2", inst.lambda2_h)
        .measure("base_interval_count", inst.h_interval_count)
        .measure("a_eps", inst.a_eps)
        .measure("a_eps_n", inst.a_eps_n)
        .measure("a_eps_degenerate", inst.degenerate)
        .measure("kappa", out.kappa)
        .measure("kappa_bound", out.kappa_bound)
        .measure("kappa_margin", out.kappa / out.kappa_bound)
        .measure("kappa_proof_bound", out.kappa_proof_bound)
        .measure("interval_lo", out.interval_lo)
        .measure("interval_count", out.interval_count)
        .measure("statement_interval_lo", out.statement_interval_lo)
        .measure("statement_interval_count", out.statement_interval_count)
        .measure("f_mapped_count", c.mapped_count)
        .measure("f_worst_distance", c.worst_distance)
        .measure("f_threshold", c.threshold)
        .measure("lambda_star", c.lambda_star)
        .measure("f_preimages_ok", c.preimages.iter().all(|q| q.passed))
        .measure("implied_c", implied_c)
        .measure("implied_delta", implied_delta)
        .tolerance("f_distance", f_tol);
    for pre in &c.preimages {
        let key = format!("preimage_count[mu={}]", fmt17(pre.mu));
        r.measure(&key, pre.g_count);
        r.measure(&format!("base_count[mu={}]", fmt17(pre.mu)), pre.h_count);
    }
    r.claim(
        "max degree = 6",
        "max_degree",
        Relation::Eq,
        Some(6.0),
        ClaimKind::Theorem,
    );
    r.claim(
        "κ ≥ 0.001·α₀^(−ℓ)",
        "kappa",
        Relation::Ge,
        Some(out.kappa_bound),
        ClaimKind::Theorem,
    );
    r.claim(
        "κ ≥ (f(λ₁) − f(λ₂))/(3α₀^ℓ)",
        "kappa",
        Relation::Ge,
        Some(out.kappa_proof_bound),
        ClaimKind::Theorem,
    );
    r.claim(
        "interval count ≥ base cluster count",
        "interval_count",
        Relation::Ge,
        Some(inst.h_interval_count as f64),
        ClaimKind::Theorem,
    );
    r.claim(
        "interval count ≥ a(ε)N",
        "interval_count",
        Relation::Ge,
        Some(inst.a_eps_n),
        ClaimKind::Theorem,
    );
    r.claim(
        "f maps eigenvalues above 2 onto spec(H)",
        "f_worst_distance",
        Relation::Lt,
        Some(f_tol),
        ClaimKind::Theorem,
    );
    r.claim(
        "preimage multiplicities dominate",
        "f_preimages_ok",
        Relation::IsTrue,
        None,
        ClaimKind::Theorem,
    );
    r.csv = Some(out.spectrum.to_csv());
    Ok(finish(r, start))
}

/// Eigenvalues and basic invariants of a graph read from its text form.
pub fn cmd_spectrum(text: &str, solver: &SolverConfig) -> Result<(Spectrum, VerificationReport)> {
    let start = Instant::now();
    let g = Graph::from_text(text)?;
    let s = eigenvalues_with(&g, solver)?;
    let mut r = VerificationReport::new("spectrum", Default::default(), None);
    let trace: f64 = (0..g.n()).map(|v| g.weight(v, v) as f64).sum();
    let sum: f64 = s.values().iter().sum();
    let frob: f64 = g
        .edges()
        .map(|(u, v, w)| {
            if u == v {
                (w * w) as f64
            } else {
                2.0 * (w * w) as f64
            }
        })
        .sum();
    let sq: f64 = s.values().iter().map(|x| x * x).sum();
    let tol = s.default_tol() * (g.n().max(1) as f64);
    r.measure("vertices", g.n())
        .measure("edges", g.edge_units())
        .measure("trace_error", (sum - trace).abs())
        .measure("frobenius_error", (sq - frob).abs() / frob.max(1.0))
        .tolerance("identity", tol);
    if g.n() > 0 {
        r.measure("lambda1", s.values()[0]);
    }
    if let Some(b) = s.residual_bound() {
        r.measure("eigen_residual_bound", b);
    }
    r.claim(
        "Σλ = trace(A)",
        "trace_error",
        Relation::Le,
        Some(tol),
        ClaimKind::Diagnostic,
    );
    r.claim(
        "Σλ² = ‖A‖²_F",
        "frobenius_error",
        Relation::Le,
        Some(tol),
        ClaimKind::Diagnostic,
    );
    r.csv = Some(s.to_csv());
    Ok((s, finish(r, start)))
}

/// Parameters of [`cmd_km_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct KmParams {
    pub n: usize,
    pub samples: usize,
    pub bins: usize,
    pub seed: u64,
    /// Largest accepted L1 distance (empirical).
    pub threshold: f64,
    /// Second-eigenvalue check: graph size, number of samples, required
    /// passing samples and slack above `2√2` (all empirical).
    pub friedman_n: usize,
    pub friedman_samples: usize,
    pub friedman_min_pass: usize,
    pub friedman_slack: f64,
}

impl KmParams {
    pub const DEFAULT_N: usize = 2000;
    pub const DEFAULT_SAMPLES: usize = 5;
    pub const DEFAULT_BINS: usize = 40;
    pub const DEFAULT_THRESHOLD: f64 = 0.05;
    pub const DEFAULT_FRIEDMAN_N: usize = 500;
    pub const DEFAULT_FRIEDMAN_SAMPLES: usize = 10;
    pub const DEFAULT_FRIEDMAN_MIN_PASS: usize = 8;
    pub const DEFAULT_FRIEDMAN_SLACK: f64 = 0.15;

    pub fn from_config(c: &RunConfig) -> Self {
        Self {
            n: c.n.unwrap_or(Self::DEFAULT_N),
            samples: c.samples.unwrap_or(Self::DEFAULT_SAMPLES),
            bins: c.bins.unwrap_or(Self::DEFAULT_BINS),
            seed: c.seed.unwrap_or(0),
            threshold: c.km_threshold.unwrap_or(Self::DEFAULT_THRESHOLD),
            friedman_n: c.friedman_n.unwrap_or(Self::DEFAULT_FRIEDMAN_N),
            friedman_samples: c.friedman_samples.unwrap_or(Self::DEFAULT_FRIEDMAN_SAMPLES),
            friedman_min_pass: c
                .friedman_min_pass
                .unwrap_or(Self::DEFAULT_FRIEDMAN_MIN_PASS),
            friedman_slack: c.friedman_slack.unwrap_or(Self::DEFAULT_FRIEDMAN_SLACK),
        }
    }

    fn effective(&self) -> RunConfig {
        RunConfig {
            construction: Some("km".into()),
            n: Some(self.n),
            samples: Some(self.samples),
            bins: Some(self.bins),
            seed: Some(self.seed),
            km_threshold: Some(self.threshold),
            friedman_n: Some(self.friedman_n),
            friedman_samples: Some(self.friedman_samples),
            friedman_min_pass: Some(self.friedman_min_pass),
            friedman_slack: Some(self.friedman_slack),
            ..RunConfig::default()
        }
    }
}

/// Stream offset separating the second-eigenvalue samples from the
/// histogram samples under the same seed.
const FRIEDMAN_STREAM: u64 = 1 << 32;

/// Spectrum of the random graph drawn from stream `stream` of `seed`.
fn sampled_spectrum(n: usize, seed: u64, stream: u64, solver: &SolverConfig) -> Result<Spectrum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    eigenvalues_with(&random_regular_graph_with(n, &mut rng)?, solver)
}

/// Spectra for streams `streams`, computed on scoped threads; the result
/// order follows `streams` whatever the scheduling.
fn sampled_spectra(
    n: usize,
    seed: u64,
    streams: &[u64],
    solver: &SolverConfig,
) -> Result<Vec<Spectrum>> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(streams.len().max(1));
    let mut slots: Vec<Option<Result<Spectrum>>> = (0..streams.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (w, chunk) in slots
            .chunks_mut(streams.len().div_ceil(workers).max(1))
            .enumerate()
        {
            let offset = w * streams.len().div_ceil(workers).max(1);
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(sampled_spectrum(n, seed, streams[offset + k], solver));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every slot filled"))
        .collect()
}

pub fn cmd_km_check(p: &KmParams, solver: &SolverConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    if p.n < 100 || p.n % 2 == 1 {
        return Err(Error::Precondition(format!(
            "n = {} must be even and at least 100",
            p.n
        )));
    }
    if p.samples == 0 || p.bins == 0 {
        return Err(Error::Precondition(
            "samples and bins must be positive".into(),
        ));
    }
    let solver = solver.uncertified();
    let edge = 2.0 * SQRT_2;
    let streams: Vec<u64> = (0..p.samples as u64).collect();
    let mut empirical = vec![0.0; p.bins];
    for s in sampled_spectra(p.n, p.seed, &streams, &solver)? {
        for (e, c) in empirical
            .iter_mut()
            .zip(histogram(&s, -edge, edge, p.bins)?)
        {
            *e += c as f64 / (p.n * p.samples) as f64;
        }
    }
    let width = 2.0 * edge / p.bins as f64;
    let mut csv = String::from("bin,lo,hi,empirical,expected\n");
    let mut l1 = 0.0;
    for (b, e) in empirical.iter().enumerate() {
        let lo = -edge + b as f64 * width;
        let hi = if b + 1 == p.bins { edge } else { lo + width };
        let expected = kesten_mckay_mass(lo, hi)?;
        l1 += (e - expected).abs();
        csv.push_str(&format!(
            "{b},{},{},{},{}\n",
            fmt17(lo),
            fmt17(hi),
            fmt17(*e),
            fmt17(expected)
        ));
    }

    let mut r = VerificationReport::new("km", p.effective().to_params(), Some(p.seed));
    r.measure("l1_distance", l1)
        .tolerance("km_l1_threshold", p.threshold);
    r.claim(
        "Kesten–McKay L1 distance below threshold",
        "l1_distance",
        Relation::Lt,
        Some(p.threshold),
        ClaimKind::Empirical,
    );
    if p.friedman_samples > 0 {
        let streams: Vec<u64> = (0..p.friedman_samples as u64)
            .map(|j| FRIEDMAN_STREAM + j)
            .collect();
        let limit = edge + p.friedman_slack;
        let lambda2: Vec<f64> = sampled_spectra(p.friedman_n, p.seed, &streams, &solver)?
            .iter()
            .map(|s| s.values()[1])
            .collect();
        let passing = lambda2.iter().filter(|&&l| l <= limit).count();
        r.measure("friedman_pass_count", passing)
            .measure(
                "friedman_max_lambda2",
                lambda2.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
            .tolerance("friedman_slack", p.friedman_slack);
        r.claim(
            "λ₂ ≤ 2√2 + slack in enough samples",
            "friedman_pass_count",
            Relation::Ge,
            Some(p.friedman_min_pass as f64),
            ClaimKind::Empirical,
        );
    }
    r.csv = Some(csv);
    Ok(finish(r, start))
}

/// Parameters of [`cmd_lemmas`].
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaParams {
    pub ells: Vec<usize>,
    pub ms: Vec<usize>,
    /// Multiplies `f` in the derivative-window clause; any value other than 1
    /// is a negative control.
    pub f_scale: f64,
}

impl LemmaParams {
    pub fn from_config(c: &RunConfig) -> Self {
        Self {
            ells: c.ells.clone().unwrap_or_else(|| (11..=15).collect()),
            ms: c.ms.clone().unwrap_or_else(|| (4..=8).collect()),
            f_scale: 1.0,
        }
    }
}

/// Sampled λ per path length for the derivative clauses.
const LEMMA_SAMPLES: usize = 200;
/// Grid resolution for sign and monotonicity sweeps.
const LEMMA_GRID: usize = 2000;

#[derive(Default)]
struct Tally {
    checked: usize,
    failures: usize,
}

impl Tally {
    fn check(&mut self, ok: bool) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
        }
    }
}

pub fn cmd_lemmas(p: &LemmaParams) -> Result<VerificationReport> {
    let start = Instant::now();
    if p.ells.is_empty() || p.ms.is_empty() {
        return Err(Error::Precondition("ℓ and m lists must be nonempty".into()));
    }
    if let Some(ell) = p.ells.iter().find(|&&l| l <= 10) {
        return Err(Error::Precondition(format!(
            "path length {ell} must exceed 10"
        )));
    }
    if let Some(m) = p.ms.iter().find(|&&m| m < 4) {
        return Err(Error::Precondition(format!(
            "subdivision length {m} must be at least 4"
        )));
    }

    let clauses = [
        "f(3) < 0",
        "f has a zero λ* > 3",
        "λ* is the only sign change",
        "f increases above λ*",
        "f(λ) ≥ (α − α₀)α₀^(ℓ−1) above α₀",
        "0.01·α₀^ℓ < f′ < 3·α₀^ℓ where f < 5",
        "f′ matches finite differences",
        "(T_m − 1)/U_(m−1) increases on [1, 3]",
        "U_(m−1) ≥ ((2T_m + 2)/U_(m−1))^(m−1) on [1, 3]",
    ];
    let mut tallies: Vec<Tally> = clauses.iter().map(|_| Tally::default()).collect();
    let f = |l: f64, ell: usize| -> Result<f64> { Ok(p.f_scale * f_eval(l, ell)?) };
    let fp = |l: f64, ell: usize| -> Result<f64> { Ok(p.f_scale * f_prime(l, ell)?) };

    for &ell in &p.ells {
        tallies[0].check(f_eval(3.0, ell)? < 0.0);
        let star = lambda_star(ell);
        tallies[1].check(
            star.as_ref()
                .is_ok_and(|&s| s > 3.0 && f_eval(s, ell).is_ok_and(|v| v.abs() < 1e-6)),
        );
        let Ok(star) = star else { continue };

        let (lo, hi) = (3.0, star + 2.0);
        let mut unique = true;
        let mut increasing = true;
        for k in 0..=LEMMA_GRID {
            let l = lo + (hi - lo) * k as f64 / LEMMA_GRID as f64;
            if (l - star).abs() < 1e-9 {
                continue;
            }
            let v = f_eval(l, ell)?;
            unique &= (l < star) == (v < 0.0);
            if l > star {
                increasing &= f_prime(l, ell)? > 0.0;
            }
        }
        tallies[2].check(unique);
        tallies[3].check(increasing);

        for k in 0..LEMMA_SAMPLES {
            let alpha = ALPHA0 + 3.0 * (k as f64 + 0.5) / LEMMA_SAMPLES as f64;
            tallies[4].check(f_lower_bound_check(alpha + 1.0 / alpha, ell)?);
        }

        let top = f_inverse(5.0, ell)?;
        let scale = ALPHA0.powi(ell as i32);
        for k in 0..LEMMA_SAMPLES {
            let l = star + (top - star) * (k as f64 + 0.5) / LEMMA_SAMPLES as f64;
            let d = fp(l, ell)?;
            tallies[5].check(0.01 * scale < d && d < 3.0 * scale);
            let h = 1e-6 * l;
            let fd = (f(l + h, ell)? - f(l - h, ell)?) / (2.0 * h);
            tallies[6].check(((fd - d) / d).abs() <= 1e-4);
        }
    }
    let zs: Vec<f64> = (0..=400).map(|k| 1.0 + 2.0 * k as f64 / 400.0).collect();
    for &m in &p.ms {
        tallies[7].check(ratio_fact_increasing(m, &zs)?);
        let mut all = true;
        for &z in &zs {
            all &= cheb_fact_b(m, z)?;
        }
        tallies[8].check(all);
    }

    let effective = RunConfig {
        construction: Some("lemmas".into()),
        ells: Some(p.ells.clone()),
        ms: Some(p.ms.clone()),
        ..RunConfig::default()
    };
    let mut params = effective.to_params();
    if p.f_scale != 1.0 {
        params.insert("f_scale".into(), toml::Value::Float(p.f_scale));
    }
    let mut r = VerificationReport::new("lemmas", params, None);
    for (name, t) in clauses.iter().zip(&tallies) {
        let key = format!("{name}: failures");
        r.measure(&format!("{name}: checked"), t.checked);
        r.measure(&key, Measured::Int(t.failures as i64));
        r.claim(name, &key, Relation::Eq, Some(0.0), ClaimKind::Theorem);
    }
    Ok(finish(r, start))
}
