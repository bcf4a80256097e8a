//! Parameters shared by the repulsion checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::fp::check_prime;
use crate::error::{Error, Result};

/// Named constants standing in for the `O(·)` terms, with their defaults.
pub const DEFAULT_CONSTANTS: &[(&str, f64)] = &[
    // h(M) ≤ C_height · p^{kδ}, with k set per check.
    ("C_height", 1.0),
    // Lens envelopes fit in radius δ log p + C_radius.
    ("C_radius", 4.0),
    // Cusps near a point: at most C_count · p^{12δ}.
    ("C_count", 16.0),
    // Hecke degrees: m ≤ C_hecke · p^{Kδ}, with K per check. For CM points
    // m = a² + b² with a, b of size p^δ. For bicusps g is pinned by three
    // points of height p^{2δ}, so its entries are O(p^{12δ}). For diagonals
    // the relations have height p^{6δ} and γ has entries O(p^{18δ}).
    ("C_hecke", 16.0),
    ("K_cm", 2.0),
    ("K_bicusp", 24.0),
    ("K_diag", 36.0),
    // "Many" diagonal neighborhoods means more than C_omega · log p.
    ("C_omega", 8.0),
    // Count bound C_diag · p^{1+δ/2} e^{-d} near singular bicusps.
    ("C_diag", 16.0),
    // Distance to a small Hecke curve at most C_tau · δ log p.
    ("C_tau", 16.0),
    // Multiplicity against C_mult · p^{-δ} · volume.
    ("C_mult", 1.0),
];

/// Enumeration caps. Running out yields an INCONCLUSIVE report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_tiles: usize,
    pub max_pairs: usize,
    pub sample_points: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_tiles: 2_000_000,
            max_pairs: 5_000_000,
            sample_points: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepulsionJob {
    pub p: u64,
    pub delta: f64,
    pub constants: BTreeMap<String, f64>,
    /// Overrides the height bound derived from `C_height`.
    pub height_bound: Option<u64>,
    pub budget: Budget,
    pub seed: u64,
    /// Quadrature tolerance for volumes.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-6
}

impl RepulsionJob {
    pub fn new(p: u64, delta: f64) -> Result<Self> {
        check_prime(p)?;
        if p < 5 {
            return Err(Error::Domain(format!("p = {p} is below 5")));
        }
        if !(delta > 0.0 && delta < 0.25) {
            return Err(Error::Range(format!("delta = {delta} outside (0, 1/4)")));
        }
        let constants = DEFAULT_CONSTANTS
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        Ok(Self {
            p,
            delta,
            constants,
            height_bound: None,
            budget: Budget::default(),
            seed: 0,
            tol: default_tol(),
        })
    }

    pub fn with_constant(mut self, name: &str, value: f64) -> Result<Self> {
        if !DEFAULT_CONSTANTS.iter().any(|(k, _)| *k == name) {
            return Err(Error::Domain(format!("unknown constant {name:?}")));
        }
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Range(format!(
                "constant {name} = {value} must be positive"
            )));
        }
        self.constants.insert(name.to_string(), value);
        Ok(self)
    }

    pub fn with_height_bound(mut self, h: u64) -> Self {
        self.height_bound = Some(h);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(1e-12..=1e-3).contains(&tol) {
            return Err(Error::Range(format!("tol = {tol} outside [1e-12, 1e-3]")));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn constant(&self, name: &str) -> f64 {
        self.constants
            .get(name)
            .copied()
            .or_else(|| {
                DEFAULT_CONSTANTS
                    .iter()
                    .find(|(k, _)| *k == name)
                    .map(|(_, v)| *v)
            })
            .unwrap_or_else(|| panic!("no constant named {name}"))
    }

    pub fn log_p(&self) -> f64 {
        (self.p as f64).ln()
    }

    /// Height bound `C_height · p^{kδ}`, at least one.
    pub fn height(&self, k: f64) -> u64 {
        self.height_bound.unwrap_or_else(|| {
            (self.constant("C_height") * (self.p as f64).powf(k * self.delta))
                .floor()
                .max(1.0) as u64
        })
    }

    /// Largest Hecke index accepted as `p^{O(δ)}`, with the named exponent.
    pub fn hecke_bound(&self, exponent: &str) -> f64 {
        self.constant("C_hecke") * (self.p as f64).powf(self.constant(exponent) * self.delta)
    }
}
