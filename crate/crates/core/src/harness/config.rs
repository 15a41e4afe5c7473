//! Run configuration as `key = value` lines (a flat TOML table).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every field is optional; a command fills the gaps with its documented
/// defaults and echoes the effective values in its report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `cayley`, `bounded`, `approx`, `km` or `lemmas`.
    pub construction: Option<String>,
    pub q: Option<u64>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub ell: Option<usize>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub augment: Option<u64>,
    pub petersen: Option<bool>,
    pub max_tries: Option<u64>,
    pub samples: Option<usize>,
    pub bins: Option<usize>,
    pub tol: Option<f64>,
    pub km_threshold: Option<f64>,
    pub friedman_n: Option<usize>,
    pub friedman_samples: Option<usize>,
    pub friedman_min_pass: Option<usize>,
    pub friedman_slack: Option<f64>,
    pub ells: Option<Vec<usize>>,
    pub ms: Option<Vec<usize>>,
    /// Path to a `PSL(2,q)` connection set, one `a b c d` matrix per line.
    pub generators: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// Fields of `self`, falling back to `base` where unset.
    pub fn or(self, base: &RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: self.$f.or_else(|| base.$f.clone()),)* } };
        }
        pick!(
            construction,
            q,
            m,
            n,
            ell,
            eps,
            seed,
            budget,
            augment,
            petersen,
            max_tries,
            samples,
            bins,
            tol,
            km_threshold,
            friedman_n,
            friedman_samples,
            friedman_min_pass,
            friedman_slack,
            ells,
            ms,
            generators
        )
    }

    /// The set fields as a map, for echoing in reports.
    pub fn to_params(&self) -> BTreeMap<String, toml::Value> {
        match toml::Value::try_from(self).expect("flat config converts") {
            toml::Value::Table(t) => t.into_iter().collect(),
            _ => unreachable!("a struct converts to a table"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text =
            "construction = \"approx\"\nn = 50\nell = 11\neps = 1.0\nseed = 3\nells = [11, 12]\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.n, Some(50));
        assert_eq!(cfg.ells, Some(vec![11, 12]));
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let params = cfg.to_params();
        assert_eq!(params["ell"], toml::Value::Integer(11));
        assert!(!params.contains_key("q"));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(matches!(
            RunConfig::from_toml("colour = 3"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_toml("q = \"five\""),
            Err(Error::Config(_))
        ));
        assert!(matches!(RunConfig::from_toml("q ="), Err(Error::Config(_))));
    }

    #[test]
    fn layering() {
        let flags = RunConfig {
            q: Some(7),
            ..RunConfig::default()
        };
        let file = RunConfig::from_toml("q = 5\nm = 6").unwrap();
        let merged = flags.or(&file);
        assert_eq!((merged.q, merged.m), (Some(7), Some(6)));
    }
}
