//! Verification reports: measured values, claims evaluated against them, and
//! their JSON rendering with every real at 17 significant digits.

use std::collections::BTreeMap;
use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::format::fmt17;

/// Schema tag written into every report.
pub const SCHEMA: &str = "emlab/1";

/// A measured scalar.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Measured {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Measured {
    fn as_real(&self) -> Option<f64> {
        match *self {
            Measured::Int(i) => Some(i as f64),
            Measured::Real(x) => Some(x),
            _ => None,
        }
    }
}

impl From<f64> for Measured {
    fn from(x: f64) -> Self {
        Measured::Real(x)
    }
}

impl From<usize> for Measured {
    fn from(x: usize) -> Self {
        Measured::Int(x as i64)
    }
}

impl From<u64> for Measured {
    fn from(x: u64) -> Self {
        Measured::Int(x as i64)
    }
}

impl From<i64> for Measured {
    fn from(x: i64) -> Self {
        Measured::Int(x)
    }
}

impl From<bool> for Measured {
    fn from(x: bool) -> Self {
        Measured::Bool(x)
    }
}

impl From<&str> for Measured {
    fn from(x: &str) -> Self {
        Measured::Text(x.to_string())
    }
}

impl From<String> for Measured {
    fn from(x: String) -> Self {
        Measured::Text(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "==")]
    Eq,
    /// The measured value is the boolean `true`.
    #[serde(rename = "is-true")]
    IsTrue,
}

impl Relation {
    fn holds(self, value: &Measured, bound: Option<f64>) -> bool {
        if self == Relation::IsTrue {
            return *value == Measured::Bool(true);
        }
        let (Some(x), Some(b)) = (value.as_real(), bound) else {
            return false;
        };
        match self {
            Relation::Ge => x >= b,
            Relation::Gt => x > b,
            Relation::Le => x <= b,
            Relation::Lt => x < b,
            Relation::Eq => x == b,
            Relation::IsTrue => unreachable!(),
        }
    }
}

/// Where a claim's bound comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimKind {
    /// A theorem's conclusion at this instance.
    Theorem,
    /// A hypothesis a construction needs.
    Hypothesis,
    /// A threshold chosen for a statistical check, not implied by a theorem.
    Empirical,
    /// An arithmetic or numerical consistency check.
    Diagnostic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim {
    /// Key of the measured value the claim is about.
    pub measured: String,
    pub relation: Relation,
    pub bound: Option<f64>,
    pub kind: ClaimKind,
    pub status: ClaimStatus,
}

/// One run's record. Every claim names a key of `measured`, and the verdict
/// passes iff no applicable claim fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub construction: String,
    pub params: BTreeMap<String, toml::Value>,
    pub measured: BTreeMap<String, Measured>,
    pub claims: BTreeMap<String, Claim>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub wall_clock_seconds: f64,
    pub verdict: Verdict,
    /// Command-specific CSV body for `--format csv`.
    #[serde(skip)]
    pub csv: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl VerificationReport {
    pub fn new(
        construction: &str,
        params: BTreeMap<String, toml::Value>,
        seed: Option<u64>,
    ) -> Self {
        Self {
            schema: SCHEMA,
            construction: construction.to_string(),
            params,
            measured: BTreeMap::new(),
            claims: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            seed,
            wall_clock_seconds: 0.0,
            verdict: Verdict::Pass,
            csv: None,
        }
    }

    pub fn measure(&mut self, key: &str, value: impl Into<Measured>) -> &mut Self {
        self.measured.insert(key.to_string(), value.into());
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    /// Evaluates `measured[key] relation bound` and records the claim.
    ///
    /// Panics if `key` was not measured first.
    pub fn claim(
        &mut self,
        name: &str,
        key: &str,
        relation: Relation,
        bound: Option<f64>,
        kind: ClaimKind,
    ) -> bool {
        let value = self
            .measured
            .get(key)
            .unwrap_or_else(|| panic!("claim `{name}` references unmeasured `{key}`"));
        let ok = relation.holds(value, bound);
        self.insert_claim(
            name,
            key,
            relation,
            bound,
            kind,
            if ok {
                ClaimStatus::Pass
            } else {
                ClaimStatus::Fail
            },
        );
        ok
    }

    /// Records a claim whose hypothesis does not hold at this instance.
    pub fn not_applicable(
        &mut self,
        name: &str,
        key: &str,
        relation: Relation,
        bound: Option<f64>,
        kind: ClaimKind,
    ) {
        assert!(
            self.measured.contains_key(key),
            "claim `{name}` references unmeasured `{key}`"
        );
        self.insert_claim(name, key, relation, bound, kind, ClaimStatus::NotApplicable);
    }

    fn insert_claim(
        &mut self,
        name: &str,
        key: &str,
        relation: Relation,
        bound: Option<f64>,
        kind: ClaimKind,
        status: ClaimStatus,
    ) {
        self.claims.insert(
            name.to_string(),
            Claim {
                measured: key.to_string(),
                relation,
                bound,
                kind,
                status,
            },
        );
        if status == ClaimStatus::Fail {
            self.verdict = Verdict::Fail;
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed_claims(&self) -> impl Iterator<Item = &str> {
        self.claims
            .iter()
            .filter(|(_, c)| c.status == ClaimStatus::Fail)
            .map(|(k, _)| k.as_str())
    }

    /// Pretty JSON with reals at 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(
            &mut out,
            Fixed17(PrettyFormatter::with_indent(b"  ")),
        );
        self.serialize(&mut ser).expect("report serializes");
        out.push(b'\n');
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    /// Single-line JSON with reals at 17 significant digits.
    pub fn to_json_compact(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed17(CompactFormatter));
        self.serialize(&mut ser).expect("report serializes");
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    /// `claim,measured,relation,bound,kind,status` rows.
    pub fn claims_csv(&self) -> String {
        let mut out = String::from("claim,measured,relation,bound,kind,status\n");
        for (name, c) in &self.claims {
            let value = match &self.measured[&c.measured] {
                Measured::Int(i) => i.to_string(),
                Measured::Real(x) => fmt17(*x),
                Measured::Bool(b) => b.to_string(),
                Measured::Text(t) => t.clone(),
            };
            let bound = c.bound.map(fmt17).unwrap_or_default();
            let rel = serde_json::to_value(c.relation).expect("relation serializes");
            let kind = serde_json::to_value(c.kind).expect("kind serializes");
            let status = serde_json::to_value(c.status).expect("status serializes");
            out.push_str(&format!(
                "\"{}\",{value},{},{bound},{},{}\n",
                name.replace('"', "\"\""),
                rel.as_str().unwrap_or_default(),
                kind.as_str().unwrap_or_default(),
                status.as_str().unwrap_or_default(),
            ));
        }
        out
    }
}

/// Wraps a formatter so every `f64` is written as [`fmt17`] renders it.
struct Fixed17<F>(F);

impl<F: Formatter> Formatter for Fixed17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}
