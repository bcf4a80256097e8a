//! Pass/fail records shared by the verification modules and the CLI.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A budget ran out before the check could decide.
    Inconclusive,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Inconclusive => "INCONCLUSIVE",
        };
        f.write_str(s)
    }
}

/// Outcome of one check. `lhs` is the measured side and `rhs` the bound it
/// is compared against; `witness` carries whatever makes a failure
/// reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub status: CheckStatus,
    #[serde(with = "float_or_tag")]
    pub lhs: f64,
    #[serde(with = "float_or_tag")]
    pub rhs: f64,
    #[serde(default)]
    pub witness: serde_json::Value,
    /// Wall time, kept out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub runtime_s: f64,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, status: CheckStatus, lhs: f64, rhs: f64) -> Self {
        Self {
            check: check.into(),
            status,
            lhs,
            rhs,
            witness: serde_json::Value::Null,
            runtime_s: 0.0,
        }
    }

    /// PASS when `lhs >= rhs - tol`.
    pub fn at_least(check: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let status = if lhs >= rhs - tol {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self::new(check, status, lhs, rhs)
    }

    /// PASS when `lhs <= rhs + tol`.
    pub fn at_most(check: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let status = if lhs <= rhs + tol {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self::new(check, status, lhs, rhs)
    }

    pub fn with_witness(mut self, witness: serde_json::Value) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_runtime(mut self, seconds: f64) -> Self {
        self.runtime_s = seconds;
        self
    }

    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// JSON has no NaN or infinities, so those are written as the strings
/// `"NaN"`, `"inf"` and `"-inf"`.
pub mod float_or_tag {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_nan() {
            s.serialize_str("NaN")
        } else if x.is_infinite() {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tag(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Tag(t) => match t.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(de::Error::custom(format!("not a number: {t:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(CheckReport::at_least("a", 1.0, 1.0 + 1e-12, 1e-9).passed());
        assert!(!CheckReport::at_least("a", 1.0, 1.1, 1e-9).passed());
        assert!(CheckReport::at_most("b", 1.0, 2.0, 0.0).passed());
        let r = CheckReport::at_most("b", 3.0, 2.0, 0.0).with_runtime(5.0);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"FAIL\"") && !s.contains("runtime"));
        assert_eq!(CheckStatus::Inconclusive.to_string(), "INCONCLUSIVE");
    }

    #[test]
    fn non_finite_round_trip() {
        let r = CheckReport::new("c", CheckStatus::Inconclusive, f64::NAN, f64::INFINITY);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"NaN\"") && s.contains("\"inf\""));
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert!(back.lhs.is_nan() && back.rhs == f64::INFINITY);
    }
}
