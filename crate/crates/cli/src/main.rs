//! `emlab`: build the constructions, measure their spectra and report which
//! claims hold.
//!
//! Exit status is 0 when every applicable claim passes, 1 when a claim or a
//! construction hypothesis fails, and 2 for malformed input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use emlab_core::harness::{
    cmd_approx, cmd_bounded, cmd_cayley, cmd_km_check, cmd_lemmas, cmd_spectrum, parse_generators,
    ApproxParams, BoundedParams, CayleyParams, KmParams, LemmaParams, RunConfig,
    VerificationReport,
};
use emlab_core::spectra::SolverConfig;
use emlab_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "emlab",
    version,
    about = "Second eigenvalue multiplicity laboratory"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Eigenvalue clustering tolerance (`approx`: largest allowed |f(λ) − μ|).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report (or CSV) here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; `csv` writes the spectrum, histogram or claim table.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// `key = value` file supplying defaults for unset flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cayley graph on SL(2,q) ⋉ F_q² with multiplicity at least q² − 1.
    Cayley {
        #[arg(long)]
        q: Option<u64>,
        /// Eigendecompositions the generating-set search may spend.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Augment the connection set by Z_N after the lift.
        #[arg(long)]
        augment: Option<u64>,
        /// PSL(2,q) connection set, one `a b c d` matrix per line.
        #[arg(long)]
        generators: Option<PathBuf>,
    },
    /// Maximum-degree-4 subdivided Cayley graph on affine(q).
    Bounded {
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        m: Option<usize>,
    },
    /// K₄ blowup G(H, ℓ) of a random 3-regular H.
    Approx {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use the Petersen graph as H.
        #[arg(long)]
        petersen: bool,
        #[arg(long)]
        max_tries: Option<u64>,
    },
    /// Spectrum of a graph file as `index,eigenvalue` CSV.
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Random 3-regular spectra against the Kesten–McKay law (empirical).
    Km {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest accepted L1 distance.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        friedman_n: Option<usize>,
        #[arg(long)]
        friedman_samples: Option<usize>,
        #[arg(long)]
        friedman_min_pass: Option<usize>,
        #[arg(long)]
        friedman_slack: Option<f64>,
    },
    /// Inequalities on Chebyshev polynomials and the transfer function.
    Lemmas {
        #[arg(long, value_delimiter = ',')]
        ell: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
        /// Negative control: scale f in the derivative-window clause.
        #[arg(long, hide = true)]
        perturb_f: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cayley { .. } => "cayley",
            Command::Bounded { .. } => "bounded",
            Command::Approx { .. } => "approx",
            Command::Spectrum { .. } => "spectrum",
            Command::Km { .. } => "km",
            Command::Lemmas { .. } => "lemmas",
        }
    }

    /// Flag values as a config layer.
    fn flags(&self, tol: Option<f64>) -> RunConfig {
        let base = RunConfig {
            tol,
            ..RunConfig::default()
        };
        match self {
            Command::Cayley {
                q,
                budget,
                seed,
                augment,
                generators,
            } => RunConfig {
                q: *q,
                budget: *budget,
                seed: *seed,
                augment: *augment,
                generators: generators.as_ref().map(|p| p.display().to_string()),
                ..base
            },
            Command::Bounded { q, m } => RunConfig {
                q: *q,
                m: *m,
                ..base
            },
            Command::Approx {
                n,
                ell,
                eps,
                seed,
                petersen,
                max_tries,
            } => RunConfig {
                n: *n,
                ell: *ell,
                eps: *eps,
                seed: *seed,
                petersen: petersen.then_some(true),
                max_tries: *max_tries,
                ..base
            },
            Command::Spectrum { .. } => base,
            Command::Km {
                n,
                samples,
                bins,
                seed,
                threshold,
                friedman_n,
                friedman_samples,
                friedman_min_pass,
                friedman_slack,
            } => RunConfig {
                n: *n,
                samples: *samples,
                bins: *bins,
                seed: *seed,
                km_threshold: *threshold,
                friedman_n: *friedman_n,
                friedman_samples: *friedman_samples,
                friedman_min_pass: *friedman_min_pass,
                friedman_slack: *friedman_slack,
                ..base
            },
            Command::Lemmas { ell, m, .. } => RunConfig {
                ells: ell.clone(),
                ms: m.clone(),
                ..base
            },
        }
    }
}

/// Errors that mean the input was unusable, as opposed to a failed claim.
fn is_input_error(e: &anyhow::Error) -> bool {
    match e.downcast_ref::<Error>() {
        Some(err) => !matches!(
            err,
            Error::HypothesisFailure(_)
                | Error::SearchExhausted { .. }
                | Error::RetryExhausted { .. }
                | Error::NoConvergence
                | Error::BracketFailure(_)
        ),
        None => true,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(common: &Common, body: &str) -> anyhow::Result<()> {
    match &common.out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<VerificationReport> {
    let solver = SolverConfig::from_env()?;
    let file = match &cli.common.config {
        Some(path) => RunConfig::from_toml(&read(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(kind) = &file.construction {
        if kind != cli.command.name() {
            return Err(Error::Config(format!(
                "config is for `{kind}` but the subcommand is `{}`",
                cli.command.name()
            ))
            .into());
        }
    }
    let cfg = cli.command.flags(cli.common.tol).or(&file);
    let report = match &cli.command {
        Command::Cayley { .. } => {
            let generators = match &cfg.generators {
                Some(path) => Some(parse_generators(&read(Path::new(path))?)?),
                None => None,
            };
            cmd_cayley(&CayleyParams::from_config(&cfg, generators), &cfg, &solver)?
        }
        Command::Bounded { .. } => cmd_bounded(&BoundedParams::from_config(&cfg), &solver)?,
        Command::Approx { .. } => cmd_approx(&ApproxParams::from_config(&cfg), &solver)?,
        Command::Spectrum { input } => cmd_spectrum(&read(input)?, &solver)?.1,
        Command::Km { .. } => cmd_km_check(&KmParams::from_config(&cfg), &solver)?,
        Command::Lemmas { perturb_f, .. } => {
            let mut p = LemmaParams::from_config(&cfg);
            p.f_scale = perturb_f.unwrap_or(1.0);
            cmd_lemmas(&p)?
        }
    };
    let default_format = match cli.command {
        Command::Spectrum { .. } => Format::Csv,
        _ => Format::Json,
    };
    let body = match cli.common.format.unwrap_or(default_format) {
        Format::Json => report.to_json(),
        Format::Csv => report.csv.clone().unwrap_or_else(|| report.claims_csv()),
    };
    emit(&cli.common, &body)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let failed: Vec<&str> = report.failed_claims().collect();
            if failed.is_empty() {
                eprintln!(
                    "emlab {}: PASS ({} claims)",
                    cli.command.name(),
                    report.claims.len()
                );
                ExitCode::SUCCESS
            } else {
                eprintln!("emlab {}: FAIL: {}", cli.command.name(), failed.join("; "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("emlab {}: error: {e:#}", cli.command.name());
            ExitCode::from(if is_input_error(&e) { 2 } else { 1 })
        }
    }
}
