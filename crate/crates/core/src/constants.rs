//! Ledger of the unnamed positive constants appearing in the bounds this
//! toolkit evaluates.
//!
//! None of these constants have stated numerical values; every check that
//! consumes one is therefore *conditional on the supplied value*. Entries
//! default to 1.0 with a `placeholder` flag so reports can carry an explicit
//! "conditional on constants" banner instead of silently pretending to
//! verify anything. A few entries are derived quantities (computed, not
//! chosen) and carry `placeholder: false` from the start.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub value: f64,
    /// True until a user supplies the value deliberately.
    pub placeholder: bool,
    pub note: String,
}

/// Named positive constants, keyed by the conventional names used in the
/// bound statements (`c_0`, `c_2`, ..., `ck_1` for the family c(k)).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsLedger {
    entries: BTreeMap<String, ConstantEntry>,
}

impl Default for ConstantsLedger {
    fn default() -> Self {
        Self::with_defaults()
    }
}

pub const KNOWN_CONSTANTS: &[(&str, &str)] = &[
    ("c", "generic constant in capacity/Green bounds"),
    ("c_prime", "generic companion constant"),
    ("c_0", "Green decay base: g(x) <= (c_0 d / |x|_1)^(d/2-2)"),
    ("c_2", "embedding-count base: |Lambda_n| <= (c_2 l_0)^(2(d-1)2^n)"),
    ("c_3", "sprinkling base: increments ~ (c_3 (sqrt(d)+N))^(d-2)"),
    ("c_3_prime", "max_k c(k) over return-probability constants"),
    ("c_4", "threshold N >= c_4(eps) for the local connectivity bound"),
    ("c_4_prime", "bad-set exponent: |B_eps| <= |H| e^(-c_4' d^eps)"),
    ("c_5", "local connectivity rate: exp(-c_5 f(eps,N) d log d)"),
    ("c_8", "path-length selector inside l(eps, N_0)"),
    ("c_0_prime", "union-count factor in the 2-D recursion"),
    ("c_1_prime", "separation factor: d_1(K_1,K_2) >= c_1' L_{n+1}"),
    ("ck_0", "return-probability constant c(0)"),
    ("ck_1", "return-probability constant c(1)"),
    ("ck_2", "return-probability constant c(2)"),
    ("ck_3", "return-probability constant c(3)"),
    ("ck_4", "return-probability constant c(4)"),
    ("ck_5", "return-probability constant c(5)"),
];

impl ConstantsLedger {
    /// All known constants at the placeholder value 1.0.
    pub fn with_defaults() -> ConstantsLedger {
        let mut entries = BTreeMap::new();
        for (name, note) in KNOWN_CONSTANTS {
            entries.insert(
                name.to_string(),
                ConstantEntry {
                    value: 1.0,
                    placeholder: true,
                    note: note.to_string(),
                },
            );
        }
        ConstantsLedger { entries }
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.entries
            .get(name)
            .map(|e| e.value)
            .ok_or_else(|| Error::MissingConstant { name: name.into() })
    }

    pub fn entry(&self, name: &str) -> Option<&ConstantEntry> {
        self.entries.get(name)
    }

    /// Set a constant, clearing its placeholder flag.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if value <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "constant {name} must be positive, got {value}"
            )));
        }
        let note = self
            .entries
            .get(name)
            .map(|e| e.note.clone())
            .unwrap_or_else(|| "user supplied".into());
        self.entries.insert(
            name.into(),
            ConstantEntry {
                value,
                placeholder: false,
                note,
            },
        );
        Ok(())
    }

    /// Record a derived (computed) constant.
    pub fn set_derived(&mut self, name: &str, value: f64, note: &str) {
        self.entries.insert(
            name.into(),
            ConstantEntry {
                value,
                placeholder: false,
                note: note.into(),
            },
        );
    }

    /// Names of entries still at placeholder values; reports print these as
    /// a "conditional on constants" banner.
    pub fn placeholders(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|(_, e)| e.placeholder)
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn snapshot(&self) -> BTreeMap<String, ConstantEntry> {
        self.entries.clone()
    }

    pub fn from_json_file(path: &Path) -> Result<ConstantsLedger> {
        let text = std::fs::read_to_string(path)?;
        let overrides: BTreeMap<String, f64> = serde_json::from_str(&text)?;
        let mut ledger = ConstantsLedger::with_defaults();
        for (k, v) in overrides {
            ledger.set(&k, v)?;
        }
        Ok(ledger)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_placeholders() {
        let l = ConstantsLedger::with_defaults();
        assert_eq!(l.get("c_0").unwrap(), 1.0);
        assert!(l.placeholders().contains(&"c_0".to_string()));
    }

    #[test]
    fn set_clears_placeholder() {
        let mut l = ConstantsLedger::with_defaults();
        l.set("c_2", 2.5).unwrap();
        assert_eq!(l.get("c_2").unwrap(), 2.5);
        assert!(!l.placeholders().contains(&"c_2".to_string()));
        assert!(l.set("c_2", -1.0).is_err());
    }

    #[test]
    fn missing_constant_is_an_error() {
        let l = ConstantsLedger::with_defaults();
        assert!(matches!(
            l.get("nonexistent"),
            Err(Error::MissingConstant { .. })
        ));
    }
}
