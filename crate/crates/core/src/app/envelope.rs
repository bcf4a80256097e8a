//! The report envelope and its JSON and CSV forms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::JobConfig;
use crate::error::{Error, Result};
use crate::report::{CheckReport, CheckStatus};

/// Bumped whenever a field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// CSV header, one check per row. `witness` is the compact JSON witness.
pub const CSV_HEADER: [&str; 6] = ["check", "p", "status", "lhs", "rhs", "witness"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

impl Summary {
    pub fn of(checks: &[CheckReport]) -> Self {
        let count = |s| checks.iter().filter(|c| c.status == s).count();
        Self {
            total: checks.len(),
            pass: count(CheckStatus::Pass),
            fail: count(CheckStatus::Fail),
            inconclusive: count(CheckStatus::Inconclusive),
        }
    }

    /// 0 when everything passed, 1 on any FAIL, 2 on INCONCLUSIVE without FAIL.
    pub fn exit_code(&self) -> i32 {
        if self.fail > 0 {
            1
        } else if self.inconclusive > 0 {
            2
        } else {
            0
        }
    }
}

/// A run's output. The wall time is not part of the serialized body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: JobConfig,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl ReportEnvelope {
    pub fn new(config: JobConfig, checks: Vec<CheckReport>) -> Self {
        let summary = Summary::of(&checks);
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            checks,
            summary,
            wall_time_s: 0.0,
        }
    }

    pub fn consistent(&self) -> bool {
        self.summary == Summary::of(&self.checks) && self.schema_version == SCHEMA_VERSION
    }
}

/// Pretty JSON with sorted keys. Going through `serde_json::Value` sorts
/// every object, and floats print as shortest round-trip decimals.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Structural(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Structural(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(s: &str) -> Result<ReportEnvelope> {
    serde_json::from_str(s).map_err(|e| Error::Structural(e.to_string()))
}

fn float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

pub fn to_csv(env: &ReportEnvelope) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Structural(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for c in &env.checks {
        let p = c
            .witness
            .get("p")
            .map(|p| p.to_string())
            .unwrap_or_default();
        let witness = serde_json::to_string(
            &serde_json::to_value(&c.witness).map_err(|e| Error::Structural(e.to_string()))?,
        )
        .map_err(|e| Error::Structural(e.to_string()))?;
        w.write_record([
            c.check.clone(),
            p,
            c.status.to_string(),
            float(c.lhs),
            float(c.rhs),
            witness,
        ])
        .map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Structural(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Structural(e.to_string()))
}

/// Output of the `list` and `report` subcommands: rows keyed by prime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEnvelope {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: JobConfig,
    pub rows: BTreeMap<u64, Vec<serde_json::Value>>,
}

impl TableEnvelope {
    pub fn new(config: JobConfig, rows: BTreeMap<u64, Vec<serde_json::Value>>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            rows,
        }
    }
}

/// One row per item: the prime and the compact JSON of the item.
pub fn table_to_csv(env: &TableEnvelope) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Structural(e.to_string());
    w.write_record(["p", "item"]).map_err(err)?;
    for (p, items) in &env.rows {
        for it in items {
            w.write_record([p.to_string(), it.to_string()])
                .map_err(err)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Structural(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Structural(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> ReportEnvelope {
        let checks = vec![
            CheckReport::new("a", CheckStatus::Pass, 1.0, 2.0)
                .with_witness(json!({"p": 7, "z": 1, "a": 0.1})),
            CheckReport::new("b", CheckStatus::Inconclusive, f64::NAN, 0.5),
        ];
        ReportEnvelope::new(JobConfig::default(), checks)
    }

    #[test]
    fn empty_envelope() {
        let env = ReportEnvelope::new(JobConfig::default(), vec![]);
        assert_eq!(env.summary.total, 0);
        assert_eq!(env.summary.exit_code(), 0);
        let back = from_json(&to_json(&env).unwrap()).unwrap();
        assert_eq!(back, env);
        assert_eq!(to_csv(&env).unwrap().lines().count(), 1);
    }

    #[test]
    fn round_trip_sorted_and_csv() {
        let env = sample();
        assert!(env.consistent());
        assert_eq!(env.summary.exit_code(), 2);
        let s = to_json(&env).unwrap();
        let back = from_json(&s).unwrap();
        assert_eq!(to_json(&back).unwrap(), s);
        // Keys come out sorted.
        assert!(s.find("\"a\": 0.1").unwrap() < s.find("\"z\": 1").unwrap());
        assert!(s.find("\"checks\"").unwrap() < s.find("\"config\"").unwrap());
        let csv = to_csv(&env).unwrap();
        assert_eq!(csv.lines().count(), env.checks.len() + 1);
        assert!(csv.starts_with("check,p,status,lhs,rhs,witness"));
        assert!(csv.contains("b,,INCONCLUSIVE,NaN,0.5,null"));
    }

    #[test]
    fn exit_codes() {
        let mut s = Summary {
            total: 2,
            pass: 1,
            fail: 1,
            inconclusive: 0,
        };
        assert_eq!(s.exit_code(), 1);
        s.fail = 0;
        s.pass = 2;
        assert_eq!(s.exit_code(), 0);
    }

    #[test]
    fn table_csv() {
        let rows = BTreeMap::from([(7, vec![json!("x,y"), json!({"a": 1})])]);
        let env = TableEnvelope::new(JobConfig::default(), rows);
        let csv = table_to_csv(&env).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("7,\"\"\"x,y\"\"\""));
        let back: TableEnvelope = serde_json::from_str(&to_json(&env).unwrap()).unwrap();
        assert_eq!(back, env);
    }
}
