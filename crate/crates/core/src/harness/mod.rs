//! Verification reports, run configuration and the subcommand drivers the
//! `emlab` binary exposes.

mod commands;
mod config;
mod report;

pub use commands::{
    cmd_approx, cmd_bounded, cmd_cayley, cmd_km_check, cmd_lemmas, cmd_spectrum, parse_generators,
    ApproxParams, BoundedParams, CayleyParams, KmParams, LemmaParams, BOUNDED_WIDTH_FACTOR,
};
pub use config::RunConfig;
pub use report::{
    Claim, ClaimKind, ClaimStatus, Measured, Relation, Verdict, VerificationReport, SCHEMA,
};
