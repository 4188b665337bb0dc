//! Verification reports: named residuals against tolerances, timing and the
//! trace digest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn ok(&self) -> bool {
        self.value <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Echo of the goal that was run.
    pub goal: String,
    pub pass: bool,
    pub seconds: f64,
    /// SHA-256 of the trace file, empty when no trace was written.
    pub trace_digest: String,
    pub residuals: Vec<Residual>,
    /// Facts that are reported without a tolerance.
    #[serde(default)]
    pub notes: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn new(goal: impl Into<String>) -> Self {
        VerificationReport {
            goal: goal.into(),
            pass: true,
            seconds: 0.0,
            trace_digest: String::new(),
            residuals: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Record a residual; a NaN value counts as a failure.
    pub fn residual(&mut self, name: &str, value: f64, tolerance: f64) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        self.residuals.push(Residual {
            name: name.into(),
            value,
            tolerance,
        });
        self.pass = self.residuals.iter().all(Residual::ok);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn failures(&self) -> Vec<&Residual> {
        self.residuals.iter().filter(|r| !r.ok()).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fail_names_a_residual() {
        let mut r = VerificationReport::new("simulate");
        r.residual("energy_drift", 1e-15, 1e-8);
        assert!(r.pass);
        r.residual("particles_left", 1.0, 0.0);
        assert!(!r.pass);
        assert_eq!(r.failures()[0].name, "particles_left");
        r.residual("nan", f64::NAN, 1.0);
        assert_eq!(r.failures().len(), 2);
    }

    #[test]
    fn toml_round_trip() {
        let mut r = VerificationReport::new("illuminate");
        r.residual("oracle_symmetric_difference", 2e-5, 1e-3);
        r.note("controllable", true);
        let back: VerificationReport = toml::from_str(&r.to_toml()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(digest(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
