//! Job configuration from an INI file and command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::fp::check_prime;
use crate::error::{Error, Result};
use crate::repulsion::job::DEFAULT_CONSTANTS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::Domain(format!("unknown output format {s:?}"))),
        }
    }
}

/// Everything a run depends on. The worker count is not serialized, so a
/// report body does not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobConfig {
    pub command: String,
    pub p: Vec<u64>,
    pub delta: f64,
    pub tol: f64,
    pub height_bound: Option<u64>,
    pub constants: BTreeMap<String, f64>,
    #[serde(skip, default = "default_jobs")]
    pub jobs: usize,
    pub seed: u64,
    pub out: OutputFormat,
    /// Subcommand options such as `check`, `r`, `R` or `set`.
    pub options: BTreeMap<String, String>,
}

fn default_jobs() -> usize {
    1
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            p: vec![7],
            delta: 0.1,
            tol: 1e-6,
            height_bound: None,
            constants: BTreeMap::new(),
            jobs: default_jobs(),
            seed: 0,
            out: OutputFormat::Json,
            options: BTreeMap::new(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Domain(format!("cannot parse {key} = {v:?}")))
}

pub fn parse_p_list(v: &str) -> Result<Vec<u64>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse("p", s))
        .collect()
}

/// `NAME=VALUE`.
pub fn parse_constant(s: &str) -> Result<(String, f64)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Domain(format!("expected NAME=VALUE, got {s:?}")))?;
    Ok((k.trim().to_string(), parse(k, v)?))
}

impl JobConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "p" => self.p = parse_p_list(value)?,
            "delta" => self.delta = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "height_bound" | "height-bound" => self.height_bound = Some(parse(key, value)?),
            "jobs" => self.jobs = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = value.parse()?,
            _ => match key.strip_prefix("const.") {
                Some(name) => {
                    self.constants.insert(name.to_string(), parse(key, value)?);
                }
                None => {
                    self.options
                        .insert(key.to_string(), value.trim().to_string());
                }
            },
        }
        Ok(())
    }

    /// Reads defaults from an INI file. Keys in the general section are
    /// settings; a `[constants]` section holds named constants and any other
    /// section name is ignored.
    pub fn load_ini(&mut self, path: &Path) -> Result<()> {
        let ini = ini::Ini::load_from_file(path)
            .map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?;
        for (section, props) in ini.iter() {
            for (k, v) in props.iter() {
                match section {
                    None => self.set(k, v)?,
                    Some("constants") => {
                        self.constants.insert(k.to_string(), parse(k, v)?);
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(Error::Domain("no prime given".into()));
        }
        for &p in &self.p {
            check_prime(p)?;
            if p <= 3 {
                return Err(Error::Domain(format!("p = {p} must be a prime above 3")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 0.25) {
            return Err(Error::Range(format!(
                "delta = {} outside (0, 0.25)",
                self.delta
            )));
        }
        if !(1e-12..=1e-3).contains(&self.tol) {
            return Err(Error::Range(format!(
                "tol = {} outside [1e-12, 1e-3]",
                self.tol
            )));
        }
        for (k, v) in &self.constants {
            if !DEFAULT_CONSTANTS.iter().any(|(n, _)| n == k) {
                return Err(Error::Domain(format!("unknown constant {k:?}")));
            }
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::Range(format!("constant {k} = {v} must be positive")));
            }
        }
        if self.jobs == 0 {
            return Err(Error::Range("jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn option(&self, key: &str) -> Option<&str> {
        self.options.get(key).map(String::as_str)
    }

    pub fn option_f64(&self, key: &str) -> Result<Option<f64>> {
        self.option(key).map(|v| parse(key, v)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        JobConfig::default().validate().unwrap();
    }

    #[test]
    fn ranges() {
        let bad = |f: fn(&mut JobConfig)| {
            let mut c = JobConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.p = vec![3]));
        assert!(bad(|c| c.p = vec![9]));
        assert!(bad(|c| c.delta = 0.25));
        assert!(bad(|c| c.delta = 0.0));
        assert!(bad(|c| c.tol = 1e-13));
        assert!(bad(|c| c.tol = 1e-2));
        assert!(bad(|c| {
            c.constants.insert("C_nope".into(), 1.0);
        }));
        assert!(bad(|c| c.jobs = 0));
        assert!(!bad(|c| c.p = vec![5, 7, 11]));
    }

    #[test]
    fn ini_and_settings() {
        let dir = std::env::temp_dir().join(format!("xplab-ini-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("job.ini");
        std::fs::write(
            &path,
            "p = 7,11\ndelta = 0.05\ncheck = htd\n[constants]\nC_omega = 4\n",
        )
        .unwrap();
        let mut c = JobConfig::default();
        c.load_ini(&path).unwrap();
        assert_eq!(c.p, vec![7, 11]);
        assert_eq!(c.delta, 0.05);
        assert_eq!(c.option("check"), Some("htd"));
        assert_eq!(c.constants["C_omega"], 4.0);
        c.set("const.C_tau", "2").unwrap();
        assert_eq!(
            parse_constant("C_mult=0.5").unwrap(),
            ("C_mult".to_string(), 0.5)
        );
        assert!(parse_constant("C_mult").is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
