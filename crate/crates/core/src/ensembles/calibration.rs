//! Isotropy scales for the uniform ℓ_p ball.
//!
//! The scale `s(p, dim)` makes `s · X` have unit per-coordinate variance when
//! `X` is uniform on the unit ℓ_p ball of `R^dim`. Exact values are used for
//! `p = 2` (`√(dim + 2)`) and `p = ∞` (`√3`); every other `p` is estimated by
//! Monte Carlo from a seed derived from `(p, dim)`, so the estimate is the
//! same in every process. Results are memoised in a process-wide cache that
//! can be persisted as JSON.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rng::{child_seed, rng_from_seed};

use super::fill_lp_ball;

/// Minimum number of scalar coordinates drawn by a Monte Carlo calibration.
pub const MIN_MC_SAMPLES: usize = 4_000_000;
/// Largest accepted relative standard error of a Monte Carlo calibration.
pub const MAX_REL_ERR: f64 = 0.005;
const MIN_MC_VECTORS: usize = 64;
const CALIBRATION_MASTER_SEED: u64 = 0x6973_6f74_726f_7079;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMethod {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotropyCalibration {
    pub p: f64,
    pub dim: usize,
    pub scale: f64,
    pub method: CalibrationMethod,
    pub mc_samples: usize,
    /// Relative standard error of the variance estimate (0 when analytic).
    pub rel_err: f64,
}

type Key = (u64, usize);

fn cache() -> &'static RwLock<HashMap<Key, IsotropyCalibration>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, IsotropyCalibration>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

pub fn calibrate_isotropy(p: f64, dim: usize) -> Result<IsotropyCalibration> {
    super::validate_p(p)?;
    if dim == 0 {
        return Err(LabError::invalid("dim", "dimension must be at least 1"));
    }
    let key = (p.to_bits(), dim);
    if let Some(c) = cache().read().expect("calibration cache poisoned").get(&key) {
        return Ok(*c);
    }
    let cal = compute(p, dim);
    cache()
        .write()
        .expect("calibration cache poisoned")
        .entry(key)
        .or_insert(cal);
    Ok(cal)
}

fn compute(p: f64, dim: usize) -> IsotropyCalibration {
    if p.is_infinite() {
        return analytic(p, dim, 3f64.sqrt());
    }
    if p == 2.0 {
        return analytic(p, dim, ((dim + 2) as f64).sqrt());
    }
    let seed = child_seed(CALIBRATION_MASTER_SEED, p.to_bits() ^ (dim as u64).rotate_left(32));
    let mut rng = rng_from_seed(seed);
    let mut vectors = MIN_MC_VECTORS.max(MIN_MC_SAMPLES.div_ceil(dim));
    let mut buf = vec![0.0; dim];
    let mut per_vector: Vec<f64> = Vec::with_capacity(vectors);
    loop {
        while per_vector.len() < vectors {
            fill_lp_ball(&mut rng, p, &mut buf);
            per_vector.push(buf.iter().map(|x| x * x).sum::<f64>() / dim as f64);
        }
        let var = crate::stats::mean(&per_vector);
        let rel_err = crate::stats::standard_error(&per_vector) / var;
        if rel_err <= MAX_REL_ERR {
            return IsotropyCalibration {
                p,
                dim,
                scale: 1.0 / var.sqrt(),
                method: CalibrationMethod::MonteCarlo,
                mc_samples: vectors * dim,
                rel_err,
            };
        }
        vectors *= 2;
    }
}

fn analytic(p: f64, dim: usize, scale: f64) -> IsotropyCalibration {
    IsotropyCalibration {
        p,
        dim,
        scale,
        method: CalibrationMethod::Analytic,
        mc_samples: 0,
        rel_err: 0.0,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheEntry {
    scale: f64,
    method: CalibrationMethod,
    mc_samples: usize,
    #[serde(default)]
    rel_err: f64,
}

fn cache_key(p: f64, dim: usize) -> String {
    format!("{p},{dim}")
}

fn parse_key(key: &str) -> Result<(f64, usize)> {
    let bad = || LabError::invalid("calibration cache", format!("malformed key {key:?}"));
    let (p, dim) = key.split_once(',').ok_or_else(bad)?;
    Ok((p.trim().parse().map_err(|_| bad())?, dim.trim().parse().map_err(|_| bad())?))
}

/// Snapshot of every cached calibration, sorted by `(p, dim)`.
pub fn cached_calibrations() -> Vec<IsotropyCalibration> {
    let mut all: Vec<_> = cache()
        .read()
        .expect("calibration cache poisoned")
        .values()
        .copied()
        .collect();
    all.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.dim.cmp(&b.dim)));
    all
}

/// JSON map `{"p,dim": {"scale", "method", "mc_samples", "rel_err"}}`.
pub fn calibrations_to_json(cals: &[IsotropyCalibration]) -> Result<String> {
    let map: BTreeMap<String, CacheEntry> = cals
        .iter()
        .map(|c| {
            (
                cache_key(c.p, c.dim),
                CacheEntry {
                    scale: c.scale,
                    method: c.method,
                    mc_samples: c.mc_samples,
                    rel_err: c.rel_err,
                },
            )
        })
        .collect();
    Ok(serde_json::to_string_pretty(&map)?)
}

pub fn calibrations_from_json(text: &str) -> Result<Vec<IsotropyCalibration>> {
    let map: BTreeMap<String, CacheEntry> = serde_json::from_str(text)?;
    map.into_iter()
        .map(|(k, e)| {
            let (p, dim) = parse_key(&k)?;
            Ok(IsotropyCalibration {
                p,
                dim,
                scale: e.scale,
                method: e.method,
                mc_samples: e.mc_samples,
                rel_err: e.rel_err,
            })
        })
        .collect()
}

pub fn save_calibration_cache(path: &Path) -> Result<()> {
    std::fs::write(path, calibrations_to_json(&cached_calibrations())?)?;
    Ok(())
}

/// Merges a persisted cache into the process cache. Entries already present
/// are kept.
pub fn load_calibration_cache(path: &Path) -> Result<usize> {
    let cals = calibrations_from_json(&std::fs::read_to_string(path)?)?;
    let mut guard = cache().write().expect("calibration cache poisoned");
    let mut added = 0;
    for c in cals {
        super::validate_p(c.p)?;
        if !(c.scale > 0.0) {
            return Err(LabError::invalid("calibration cache", "scale must be positive"));
        }
        if let std::collections::hash_map::Entry::Vacant(slot) = guard.entry((c.p.to_bits(), c.dim)) {
            slot.insert(c);
            added += 1;
        }
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_cases() {
        let c = calibrate_isotropy(f64::INFINITY, 7).unwrap();
        assert_eq!(c.scale, 3f64.sqrt());
        assert_eq!(c.method, CalibrationMethod::Analytic);
        let c = calibrate_isotropy(2.0, 10).unwrap();
        assert_eq!(c.scale, 12f64.sqrt());
    }

    #[test]
    fn monte_carlo_is_deterministic_and_cached() {
        let a = compute(1.5, 9);
        let b = compute(1.5, 9);
        assert_eq!(a, b);
        assert_eq!(a.method, CalibrationMethod::MonteCarlo);
        assert!(a.mc_samples >= MIN_MC_SAMPLES);
        assert!(a.rel_err <= MAX_REL_ERR);
        let c = calibrate_isotropy(1.5, 9).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn json_round_trip() {
        let cals = vec![
            analytic(f64::INFINITY, 4, 3f64.sqrt()),
            IsotropyCalibration {
                p: 1.0,
                dim: 4,
                scale: 1.2345,
                method: CalibrationMethod::MonteCarlo,
                mc_samples: 4_000_000,
                rel_err: 0.001,
            },
        ];
        let text = calibrations_to_json(&cals).unwrap();
        assert!(text.contains("\"1,4\"") && text.contains("\"inf,4\""));
        let mut back = calibrations_from_json(&text).unwrap();
        back.sort_by(|a, b| a.p.total_cmp(&b.p));
        assert_eq!(back, cals.into_iter().rev().collect::<Vec<_>>());
    }

    #[test]
    fn bad_key_rejected() {
        assert!(calibrations_from_json(r#"{"x": {"scale": 1.0, "method": "analytic", "mc_samples": 0}}"#).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(calibrate_isotropy(0.5, 3).is_err());
        assert!(calibrate_isotropy(1.0, 0).is_err());
    }
}
