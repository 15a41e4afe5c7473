//! Builders for the three graph families, each validating its hypotheses by
//! measurement, plus the samplers and identities they depend on.

mod approx;
mod bounded;
mod cayley;
mod pathlen;
mod random;

pub use approx::{
    build_approx, verify_f_correspondence, verify_f_correspondence_spectra, ApproxInstance,
    ApproxOutcome, FCorrespondence, PreimageCheck, F_DISTANCE_TOL, MIN_BASE_GAP,
    PROOF_INTERVAL_CONSTANT,
};
pub use bounded::{build_bounded, default_m, growth_formula_m, BoundedInstance, BoundedOutcome};
pub use cayley::{
    augment_gap, build_cayley_general, build_sl2_family, search_generating_set,
    CayleyGeneralInstance, CayleyGeneralOutcome, LiftCheck, SearchHit, Sl2FamilyOptions,
    Sl2FamilyOutcome, Sl2FamilyRoute, Sl2FamilySource,
};
pub use pathlen::{
    log_det, pathlen_samples, verify_pathlen_identity, PathlenCase, PathlenReport, PathlenSample,
    PATHLEN_REL_TOL,
};
pub use random::{
    a_eps, kesten_mckay_density, kesten_mckay_mass, random_regular_graph,
    random_regular_graph_with, sample_good_h, PAIRING_RETRY_CAP,
};

use serde::Serialize;

/// Outcome of one named hypothesis check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Hypothesis {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Errors with the first failed hypothesis, if any.
pub fn require_all(checks: &[Hypothesis]) -> crate::Result<()> {
    match checks.iter().find(|h| !h.passed) {
        Some(h) => Err(crate::Error::HypothesisFailure(format!(
            "{} ({})",
            h.name, h.detail
        ))),
        None => Ok(()),
    }
}

/// Slack when comparing a measured spectral gap against a threshold.
pub const GAP_SLACK: f64 = 1e-9;
