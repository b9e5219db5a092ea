//! Memoized critical values of limit laws.
//!
//! Chi-square quantiles are analytic; every other law is resolved by Monte
//! Carlo from a stream determined by the cache seed, the law descriptor and
//! α, so a value can always be regenerated from its record. The on-disk form
//! is one whitespace-separated record per line:
//!
//! ```text
//! # descriptor alpha m seed value
//! wald_mixture:df=2:lambda=1 0.05 1000000 20160309 1.9031
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::RwLock;

use super::{mc_critical_value, LimitLaw};
use crate::error::{Error, Result};
use crate::sampling::labeled_rng;
use crate::stats::check_alpha;

/// Draws per Monte-Carlo critical value unless configured otherwise.
pub const DEFAULT_MC_DRAWS: usize = 1_000_000;

const CRITICAL_VALUE_LABEL: u64 = 0xC41C;

/// FNV-1a; stable across toolchains, unlike `DefaultHasher`.
fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

type Key = (String, u64, usize, u64);

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub descriptor: String,
    pub alpha: f64,
    pub draws: usize,
    pub seed: u64,
    pub value: f64,
}

#[derive(Debug)]
pub struct QuantileCache {
    draws: usize,
    seed: u64,
    entries: RwLock<HashMap<Key, f64>>,
}

impl QuantileCache {
    pub fn new(draws: usize, seed: u64) -> Self {
        QuantileCache {
            draws: draws.max(1),
            seed,
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn key(&self, law: &LimitLaw, alpha: f64) -> Key {
        (law.descriptor(), alpha.to_bits(), self.draws, self.seed)
    }

    /// `(1 - α)`-quantile of `law`: analytic when possible, otherwise looked
    /// up or simulated with `draws` variates and remembered.
    pub fn critical_value(&self, law: &LimitLaw, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        if let Some(v) = law.analytic_critical_value(alpha) {
            return v;
        }
        let key = self.key(law, alpha);
        if let Some(&v) = self.entries.read().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let mut rng = labeled_rng(
            self.seed,
            &[CRITICAL_VALUE_LABEL, fnv1a(&key.0), alpha.to_bits()],
        );
        let value = mc_critical_value(law, alpha, self.draws, &mut rng)?;
        self.entries.write().expect("cache lock").insert(key, value);
        Ok(value)
    }

    /// Records sorted by descriptor, α, draws, seed.
    pub fn entries(&self) -> Vec<CacheEntry> {
        let mut out: Vec<CacheEntry> = self
            .entries
            .read()
            .expect("cache lock")
            .iter()
            .map(|((d, a, m, s), &v)| CacheEntry {
                descriptor: d.clone(),
                alpha: f64::from_bits(*a),
                draws: *m,
                seed: *s,
                value: v,
            })
            .collect();
        out.sort_by(|a, b| {
            (&a.descriptor, a.draws, a.seed)
                .cmp(&(&b.descriptor, b.draws, b.seed))
                .then(a.alpha.total_cmp(&b.alpha))
        });
        out
    }

    pub fn insert(&self, entry: CacheEntry) {
        self.entries.write().expect("cache lock").insert(
            (entry.descriptor, entry.alpha.to_bits(), entry.draws, entry.seed),
            entry.value,
        );
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# descriptor alpha m seed value\n");
        for e in self.entries() {
            let _ = writeln!(s, "{} {} {} {} {}", e.descriptor, e.alpha, e.draws, e.seed, e.value);
        }
        s
    }

    /// Adds the records in `text`; blank lines and `#` comments are skipped.
    pub fn merge_text(&self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                column: None,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(parse_err(format!("expected 5 fields, found {}", fields.len())));
            }
            LimitLaw::from_descriptor(fields[0]).map_err(|e| parse_err(e.to_string()))?;
            let num = |k: usize, what: &str| -> Result<f64> {
                fields[k].parse().map_err(|_| parse_err(format!("bad {what} `{}`", fields[k])))
            };
            let entry = CacheEntry {
                descriptor: fields[0].to_string(),
                alpha: num(1, "alpha")?,
                draws: fields[2]
                    .parse()
                    .map_err(|_| parse_err(format!("bad m `{}`", fields[2])))?,
                seed: fields[3]
                    .parse()
                    .map_err(|_| parse_err(format!("bad seed `{}`", fields[3])))?,
                value: num(4, "value")?,
            };
            self.insert(entry);
        }
        Ok(())
    }

    pub fn load(&self, path: &Path) -> Result<()> {
        self.merge_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_laws_bypass_simulation() {
        let cache = QuantileCache::new(10, 1);
        let v = cache.critical_value(&LimitLaw::chi_square(2).unwrap(), 0.05).unwrap();
        assert!((v - 5.991464547107979).abs() < 1e-9);
        assert!(cache.entries().is_empty());
    }

    #[test]
    fn simulated_values_are_reproducible_and_persist() {
        let law = LimitLaw::wald_mixture(2, 1.0).unwrap();
        let a = QuantileCache::new(50_000, 9);
        let va = a.critical_value(&law, 0.05).unwrap();
        let b = QuantileCache::new(50_000, 9);
        assert_eq!(b.critical_value(&law, 0.05).unwrap(), va);

        let c = QuantileCache::new(50_000, 9);
        c.merge_text(&a.to_text()).unwrap();
        assert_eq!(c.entries(), a.entries());
        assert!(c.merge_text("wald_mixture:df=2:lambda=1 0.05 10").is_err());
        assert!(c.merge_text("bogus 0.05 10 1 2.0").is_err());
    }
}
