use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::iteration::ProblemInstance;
use crate::moduli::NaturalBound;

/// Violations stored verbatim; the rest are only counted.
pub const MAX_REPORTED_VIOLATIONS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    LemmaInequality,
    Metastability,
    CauchyModulus,
    LiminfWitness,
}

/// Where a modulus came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Analytic,
    Empirical,
    GridOracle,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Empirical => "empirical",
            Source::GridOracle => "grid-oracle",
        }
    }
}

/// One failed check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub at: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Violation {
    pub fn new(check: &str, at: &[(&str, u64)]) -> Self {
        Violation {
            check: check.into(),
            at: at.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs: None,
            rhs: None,
            note: None,
        }
    }

    pub fn values(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A checkable record pairing an empirical witness with a computed bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub params: Value,
    /// SHA-256 of the serialized `params`.
    pub digest: String,
    #[serde(rename = "witness_N")]
    pub witness_n: Option<u64>,
    pub bound: Option<NaturalBound>,
    pub sound: bool,
    pub vacuous: bool,
    pub violations: Vec<Violation>,
    pub violation_count: u64,
    pub provenance: BTreeMap<String, String>,
    pub details: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn instance_digest(inst: &ProblemInstance) -> Result<String> {
    Ok(sha256_hex(serde_json::to_string(inst)?.as_bytes()))
}

impl Certificate {
    pub(crate) fn new(kind: CertificateKind, params: Value) -> Result<Self> {
        let digest = sha256_hex(serde_json::to_string(&params)?.as_bytes());
        Ok(Certificate {
            kind,
            params,
            digest,
            witness_n: None,
            bound: None,
            sound: true,
            vacuous: false,
            violations: Vec::new(),
            violation_count: 0,
            provenance: BTreeMap::new(),
            details: BTreeMap::new(),
            reason: None,
        })
    }

    /// Records a violation and marks the certificate unsound.
    pub(crate) fn violate(&mut self, v: Violation) {
        self.sound = false;
        self.violation_count += 1;
        if self.violations.len() < MAX_REPORTED_VIOLATIONS {
            self.violations.push(v);
        }
    }

    pub(crate) fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(key.into(), v);
    }

    pub(crate) fn provenance(&mut self, key: &str, value: &str) {
        self.provenance.insert(key.into(), value.into());
    }

    /// Fails the certificate with an explanation and no itemized violation.
    pub(crate) fn fail(&mut self, reason: impl Into<String>) {
        self.sound = false;
        self.reason = Some(reason.into());
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
