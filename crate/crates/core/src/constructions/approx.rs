//! Approximate-multiplicity graphs `G(H, ℓ)` built from a 3-regular base `H`,
//! with the correspondence `λ ↦ f(λ)` between their spectra checked directly.

use serde::Serialize;

use super::random::a_eps;
use super::{require_all, Hypothesis};
use crate::chebyshev::{f_eval, f_inverse, lambda_star, ALPHA0, C1};
use crate::error::{Error, Result};
use crate::graph::{build_g_of_h, Graph};
use crate::spectra::{
    eigenvalues_with, interval_count, multiplicity, spectral_gap, SolverConfig, Spectrum,
};

/// The constant `c` of the cluster interval `[(1 − c·ε·α₀^{−ℓ})λ₂, λ₂]`.
pub const PROOF_INTERVAL_CONSTANT: f64 = 300.0;

/// Largest allowed `|f(λ) − μ|` between an eigenvalue `λ > 2` of `G` and the
/// nearest eigenvalue `μ` of `H`.
pub const F_DISTANCE_TOL: f64 = 1e-6;

/// Smallest spectral gap required of `H`.
pub const MIN_BASE_GAP: f64 = 0.01;

/// A 3-regular base graph with its measured cluster statistics.
#[derive(Clone, Debug)]
pub struct ApproxInstance {
    pub n: usize,
    pub ell: usize,
    pub seed: u64,
    pub eps: f64,
    pub h: Graph,
    pub h_spectrum: Spectrum,
    pub connected: bool,
    pub lambda2_h: f64,
    pub gap_h: f64,
    /// Eigenvalues of `H` in `[(1 − ε)λ₂(H), λ₂(H)]`.
    pub h_interval_count: usize,
    pub a_eps: f64,
    /// `a(ε)·n`.
    pub a_eps_n: f64,
    /// `a(ε)·n < 1`, so the count condition holds vacuously.
    pub degenerate: bool,
    /// Samples drawn to find `H` (1 for a fixed graph).
    pub tries: u64,
}

impl ApproxInstance {
    /// Measures `h`; `seed` is recorded only.
    pub fn from_graph(
        h: Graph,
        ell: usize,
        eps: f64,
        seed: u64,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        if ell <= 10 {
            return Err(Error::Precondition(format!(
                "path length {ell} must exceed 10"
            )));
        }
        h.check_regular(3)?;
        let a = a_eps(eps)?;
        let n = h.n();
        let h_spectrum = eigenvalues_with(&h, cfg)?;
        let lambda2_h = h_spectrum.values()[1];
        let gap_h = spectral_gap(&h_spectrum)?;
        let lo = (1.0 - eps) * lambda2_h;
        let h_interval_count = interval_count(&h_spectrum, lo.min(lambda2_h), lambda2_h)?;
        let a_eps_n = a * n as f64;
        Ok(Self {
            n,
            ell,
            seed,
            eps,
            connected: h.is_connected(),
            h,
            h_spectrum,
            lambda2_h,
            gap_h,
            h_interval_count,
            a_eps: a,
            a_eps_n,
            degenerate: a_eps_n < 1.0,
            tries: 1,
        })
    }

    pub fn with_tries(self, tries: u64) -> Self {
        Self { tries, ..self }
    }

    pub fn conditions(&self) -> Vec<Hypothesis> {
        vec![
            Hypothesis::new("H connected", self.connected, format!("n = {}", self.n)),
            Hypothesis::new(
                "gap(H) ≥ 0.01",
                self.gap_h >= MIN_BASE_GAP,
                format!("measured gap {:.12}", self.gap_h),
            ),
            Hypothesis::new(
                "H cluster count ≥ a(ε)n",
                self.h_interval_count as f64 >= self.a_eps_n,
                format!("{} vs {:.12}", self.h_interval_count, self.a_eps_n),
            ),
        ]
    }

    pub fn conditions_hold(&self) -> bool {
        self.conditions().iter().all(|h| h.passed)
    }
}

/// Preimage check for one eigenvalue cluster of `H`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreimageCheck {
    pub mu: f64,
    pub h_count: usize,
    pub lambda: f64,
    pub g_count: usize,
    pub passed: bool,
}

/// Both directions of the `f`-correspondence between `spec(G)` and `spec(H)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FCorrespondence {
    pub ell: usize,
    /// Eigenvalues of `G` above this threshold are mapped by `f`.
    pub threshold: f64,
    pub mapped_count: usize,
    pub worst_distance: f64,
    pub distance_tol: f64,
    pub lambda_star: f64,
    pub preimages: Vec<PreimageCheck>,
    pub passed: bool,
}

impl FCorrespondence {
    pub fn preimage_of(&self, mu: f64, tol: f64) -> Option<&PreimageCheck> {
        self.preimages.iter().find(|p| (p.mu - mu).abs() <= tol)
    }
}

/// Distinct clusters of a spectrum: `(representative, count)`, descending.
fn clusters(s: &Spectrum, tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut last = f64::INFINITY;
    for &v in s.values() {
        match out.last_mut() {
            Some((_, c)) if last - v <= tol => *c += 1,
            _ => out.push((v, 1)),
        }
        last = v;
    }
    out
}

/// Checks the correspondence on precomputed spectra of `H` and `G(H, ℓ)`.
///
/// Eigenvalues of `G` are mapped only above `2 + tol_G`, since `G` always has
/// the eigenvalue 2 and `f` is far from `spec(H)` there.
pub fn verify_f_correspondence_spectra(
    h: &Spectrum,
    g: &Spectrum,
    ell: usize,
) -> Result<FCorrespondence> {
    let tol_g = g.default_tol();
    let tol_h = h.default_tol();
    let threshold = 2.0 + tol_g;
    let mut worst_distance: f64 = 0.0;
    let mut mapped_count = 0;
    for &lambda in g.values().iter().take_while(|&&l| l > threshold) {
        let fl = f_eval(lambda, ell)?;
        let d = h
            .values()
            .iter()
            .map(|mu| (fl - mu).abs())
            .fold(f64::INFINITY, f64::min);
        worst_distance = worst_distance.max(d);
        mapped_count += 1;
    }
    let mut preimages = Vec::new();
    for (mu, h_count) in clusters(h, tol_h) {
        if mu < 0.0 {
            continue;
        }
        let lambda = f_inverse(mu.max(0.0), ell)?;
        let g_count = multiplicity(g, lambda, tol_g).count;
        preimages.push(PreimageCheck {
            mu,
            h_count,
            lambda,
            g_count,
            passed: g_count >= h_count,
        });
    }
    let passed = worst_distance < F_DISTANCE_TOL && preimages.iter().all(|p| p.passed);
    Ok(FCorrespondence {
        ell,
        threshold,
        mapped_count,
        worst_distance,
        distance_tol: F_DISTANCE_TOL,
        lambda_star: lambda_star(ell)?,
        preimages,
        passed,
    })
}

/// Builds `G(h, ℓ)`, computes both spectra and checks the correspondence.
pub fn verify_f_correspondence(
    h: &Graph,
    ell: usize,
    cfg: &SolverConfig,
) -> Result<FCorrespondence> {
    h.check_regular(3)?;
    if ell <= 10 {
        return Err(Error::Precondition(format!(
            "path length {ell} must exceed 10"
        )));
    }
    let g = build_g_of_h(h, ell)?;
    verify_f_correspondence_spectra(&eigenvalues_with(h, cfg)?, &eigenvalues_with(&g, cfg)?, ell)
}

/// Graph, spectrum and measured claims of an approximate-multiplicity build.
#[derive(Clone, Debug)]
pub struct ApproxOutcome {
    pub graph: Graph,
    pub spectrum: Spectrum,
    pub hypotheses: Vec<Hypothesis>,
    pub connected: bool,
    pub max_degree: u64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub kappa: f64,
    /// `C₁ α₀^{−ℓ}`.
    pub kappa_bound: f64,
    /// `(f(λ₁) − f(λ₂))/(3α₀^ℓ)`.
    pub kappa_proof_bound: f64,
    /// `(1 − 300εα₀^{−ℓ})λ₂`.
    pub interval_lo: f64,
    pub interval_count: usize,
    /// `(1 − C₁⁻¹εα₀^{−ℓ})λ₂`, clipped at zero.
    pub statement_interval_lo: f64,
    pub statement_interval_count: usize,
    pub correspondence: FCorrespondence,
}

pub fn build_approx(inst: &ApproxInstance, cfg: &SolverConfig) -> Result<ApproxOutcome> {
    let hypotheses = inst.conditions();
    require_all(&hypotheses)?;
    let ell = inst.ell;
    let graph = build_g_of_h(&inst.h, ell)?;
    let spectrum = eigenvalues_with(&graph, cfg)?;
    let (lambda1, lambda2) = (spectrum.values()[0], spectrum.values()[1]);
    let scale = ALPHA0.powi(ell as i32);
    let kappa_proof_bound = (f_eval(lambda1, ell)? - f_eval(lambda2, ell)?) / (3.0 * scale);
    let interval_lo = (1.0 - PROOF_INTERVAL_CONSTANT * inst.eps / scale) * lambda2;
    let statement_interval_lo = ((1.0 - inst.eps / (C1 * scale)) * lambda2).max(0.0);
    Ok(ApproxOutcome {
        connected: graph.is_connected(),
        max_degree: graph.max_degree(),
        lambda1,
        lambda2,
        kappa: lambda1 - lambda2,
        kappa_bound: C1 / scale,
        kappa_proof_bound,
        interval_lo,
        interval_count: interval_count(&spectrum, interval_lo, lambda2)?,
        statement_interval_lo,
        statement_interval_count: interval_count(&spectrum, statement_interval_lo, lambda2)?,
        correspondence: verify_f_correspondence_spectra(&inst.h_spectrum, &spectrum, ell)?,
        graph,
        spectrum,
        hypotheses,
    })
}
