//! Seeded samplers for isotropic unconditional log-concave matrix laws.
//!
//! Four families are provided:
//!
//! | family           | law of the `n × n` matrix                                   |
//! |------------------|-------------------------------------------------------------|
//! | `ginibre`        | i.i.d. standard normal entries                              |
//! | `laplace_iid`    | i.i.d. symmetric exponential entries with unit variance     |
//! | `lp_ball_global` | one uniform point of the isotropic ℓ_p ball of `R^{n²}`     |
//! | `lp_ball_rows`   | independent rows, each uniform on the isotropic ℓ_p ball of `R^n` |
//!
//! The global ℓ_p family has dependent, non-identically-structured entries
//! yet is log-concave, isotropic and unconditional. Matrices are filled in
//! row-major order, so `lp_ball_global` reshapes the `R^{n²}` vector row by row.

mod calibration;
mod gamma;

use std::fmt;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::matrix::Matrix;
use crate::rng::{rng_from_seed, LabRng};

pub use calibration::{
    cached_calibrations, calibrate_isotropy, calibrations_from_json, calibrations_to_json,
    load_calibration_cache, save_calibration_cache, CalibrationMethod, IsotropyCalibration,
    MAX_REL_ERR, MIN_MC_SAMPLES,
};
pub use gamma::sample_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleFamily {
    Ginibre,
    LaplaceIid,
    LpBallGlobal,
    LpBallRows,
}

impl EnsembleFamily {
    pub const ALL: [EnsembleFamily; 4] = [
        EnsembleFamily::Ginibre,
        EnsembleFamily::LaplaceIid,
        EnsembleFamily::LpBallGlobal,
        EnsembleFamily::LpBallRows,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleFamily::Ginibre => "ginibre",
            EnsembleFamily::LaplaceIid => "laplace_iid",
            EnsembleFamily::LpBallGlobal => "lp_ball_global",
            EnsembleFamily::LpBallRows => "lp_ball_rows",
        }
    }

    pub fn uses_p(self) -> bool {
        matches!(self, EnsembleFamily::LpBallGlobal | EnsembleFamily::LpBallRows)
    }
}

impl fmt::Display for EnsembleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EnsembleFamily {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        EnsembleFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                LabError::invalid(
                    "ensemble",
                    format!("unknown family {s:?} (expected ginibre, laplace_iid, lp_ball_global or lp_ball_rows)"),
                )
            })
    }
}

/// Serde helpers writing `p = ∞` as the string `"inf"`.
pub mod p_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() && *p > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => super::parse_p(&t).map_err(de::Error::custom),
        }
    }
}

/// Parses `p`, accepting `inf`/`infinity` for `+∞`.
pub fn parse_p(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    if t == "inf" || t == "infinity" || t == "+inf" {
        return Ok(f64::INFINITY);
    }
    t.parse()
        .map_err(|_| LabError::invalid("p", format!("not a number: {text:?}")))
}

pub(crate) fn validate_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(LabError::invalid("p", "log-concavity requires p ≥ 1"));
    }
    Ok(())
}

/// Full description of a matrix law; the unit of reproducibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub family: EnsembleFamily,
    pub n: usize,
    /// Only read by the ℓ_p families.
    #[serde(with = "p_serde")]
    pub p: f64,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(family: EnsembleFamily, n: usize, seed: u64) -> Self {
        EnsembleSpec {
            family,
            n,
            p: 1.0,
            seed,
        }
    }

    pub fn lp(family: EnsembleFamily, n: usize, p: f64, seed: u64) -> Self {
        EnsembleSpec { family, n, p, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        EnsembleSpec { seed, ..self }
    }

    pub fn with_n(self, n: usize) -> Self {
        EnsembleSpec { n, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LabError::invalid("n", "matrix side must be at least 1"));
        }
        if self.family.uses_p() {
            validate_p(self.p)?;
        }
        Ok(())
    }

    /// Short human label, e.g. `lp_ball_global(p=1)`.
    pub fn label(&self) -> String {
        if self.family.uses_p() {
            format!("{}(p={})", self.family, self.p)
        } else {
            self.family.to_string()
        }
    }
}

/// i.i.d. draws with density `∝ exp(−|t|^p)`, realised as `±G^{1/p}` with
/// `G ~ Gamma(1/p, 1)`.
pub fn sample_exp_power(p: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    validate_p(p)?;
    if p.is_infinite() {
        return Err(LabError::invalid("p", "exp-power law needs a finite p"));
    }
    if count == 0 {
        return Err(LabError::invalid("count", "need at least one draw"));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..count).map(|_| exp_power_draw(&mut rng, p)).collect())
}

#[inline]
fn exp_power_draw<R: Rng + ?Sized>(rng: &mut R, p: f64) -> f64 {
    let g = if p == 1.0 {
        rng.sample::<f64, _>(Exp1)
    } else {
        sample_gamma(rng, 1.0 / p).powf(1.0 / p)
    };
    if rng.random::<bool>() {
        g
    } else {
        -g
    }
}

/// Fills `out` with a uniform point of the unit ℓ_p ball of `R^{out.len()}`:
/// `g / (Σ|g_i|^p + E)^{1/p}` with `g_i` exp-power and `E ~ Exp(1)`.
pub(crate) fn fill_lp_ball<R: Rng + ?Sized>(rng: &mut R, p: f64, out: &mut [f64]) {
    if p.is_infinite() {
        for x in out.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
        return;
    }
    let mut norm_p = 0.0;
    for x in out.iter_mut() {
        let g = exp_power_draw(rng, p);
        norm_p += if p == 1.0 { g.abs() } else { g.abs().powf(p) };
        *x = g;
    }
    let e: f64 = rng.sample(Exp1);
    let denom = if p == 1.0 {
        norm_p + e
    } else {
        (norm_p + e).powf(1.0 / p)
    };
    for x in out.iter_mut() {
        *x /= denom;
    }
}

/// One point uniform on the unit ℓ_p ball of `R^dim` (not isotropically scaled).
pub fn sample_lp_ball(dim: usize, p: f64, seed: u64) -> Result<Vec<f64>> {
    validate_p(p)?;
    if dim == 0 {
        return Err(LabError::invalid("dim", "dimension must be at least 1"));
    }
    let mut out = vec![0.0; dim];
    fill_lp_ball(&mut rng_from_seed(seed), p, &mut out);
    Ok(out)
}

/// `count` independent points of the unit ℓ_p ball from one stream.
pub fn sample_lp_ball_batch(dim: usize, p: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    validate_p(p)?;
    if dim == 0 {
        return Err(LabError::invalid("dim", "dimension must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..count)
        .map(|_| {
            let mut v = vec![0.0; dim];
            fill_lp_ball(&mut rng, p, &mut v);
            v
        })
        .collect())
}

fn alloc(len: usize) -> Result<Vec<f64>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|e| LabError::Resource(format!("cannot allocate {len} entries: {e}")))?;
    v.resize(len, 0.0);
    Ok(v)
}

/// Draws one `n × n` matrix from `spec`. Bit-identical for equal specs.
pub fn sample_matrix(spec: &EnsembleSpec) -> Result<Matrix> {
    spec.validate()?;
    let n = spec.n;
    let len = n
        .checked_mul(n)
        .ok_or_else(|| LabError::Resource(format!("n = {n} overflows")))?;
    let mut data = alloc(len)?;
    let mut rng: LabRng = rng_from_seed(spec.seed);
    match spec.family {
        EnsembleFamily::Ginibre => {
            for x in data.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
        }
        EnsembleFamily::LaplaceIid => {
            let b = std::f64::consts::FRAC_1_SQRT_2;
            for x in data.iter_mut() {
                let e: f64 = rng.sample(Exp1);
                *x = if rng.random::<bool>() { b * e } else { -b * e };
            }
        }
        EnsembleFamily::LpBallGlobal => {
            let scale = calibrate_isotropy(spec.p, len)?.scale;
            fill_lp_ball(&mut rng, spec.p, &mut data);
            data.iter_mut().for_each(|x| *x *= scale);
        }
        EnsembleFamily::LpBallRows => {
            let scale = calibrate_isotropy(spec.p, n)?.scale;
            for row in data.chunks_mut(n) {
                fill_lp_ball(&mut rng, spec.p, row);
                row.iter_mut().for_each(|x| *x *= scale);
            }
        }
    }
    Matrix::from_row_major(n, n, data)
}

/// Anything that can produce an `n × n` random matrix from a seed.
pub trait MatrixSource: Sync {
    fn label(&self) -> String;
    fn sample(&self, n: usize, seed: u64) -> Result<Matrix>;
}

impl MatrixSource for EnsembleSpec {
    fn label(&self) -> String {
        EnsembleSpec::label(self)
    }

    fn sample(&self, n: usize, seed: u64) -> Result<Matrix> {
        sample_matrix(&self.with_n(n).with_seed(seed))
    }
}

/// Empirical `P(|X| ≥ t)` for each `t` of the grid.
pub fn tail_survival(samples: &[f64], t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(LabError::invalid("samples", "empty input"));
    }
    if samples.len() < 1000 {
        return Err(LabError::invalid("samples", "need at least 1000 samples"));
    }
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len() as f64;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let below = abs.partition_point(|&a| a < t);
            (t, (abs.len() - below) as f64 / n)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_round_trip() {
        for f in EnsembleFamily::ALL {
            assert_eq!(f.name().parse::<EnsembleFamily>().unwrap(), f);
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(json, format!("\"{}\"", f.name()));
        }
        assert!("wishart".parse::<EnsembleFamily>().is_err());
    }

    #[test]
    fn spec_serde_handles_infinite_p() {
        let spec = EnsembleSpec::lp(EnsembleFamily::LpBallRows, 4, f64::INFINITY, 3);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"p\":\"inf\""));
        let back: EnsembleSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn validation() {
        assert!(EnsembleSpec::new(EnsembleFamily::Ginibre, 0, 1).validate().is_err());
        let err = EnsembleSpec::lp(EnsembleFamily::LpBallGlobal, 3, 0.5, 1)
            .validate()
            .unwrap_err();
        assert!(err.to_string().contains("log-concavity requires p ≥ 1"));
        // p ignored for product families
        assert!(EnsembleSpec::lp(EnsembleFamily::Ginibre, 3, 0.5, 1).validate().is_ok());
        assert!(sample_exp_power(0.9, 10, 1).is_err());
        assert!(sample_exp_power(1.0, 0, 1).is_err());
    }

    #[test]
    fn lp_ball_points_are_inside() {
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            for v in sample_lp_ball_batch(5, p, 200, 9).unwrap() {
                let norm = if p.is_infinite() {
                    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
                } else {
                    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
                };
                assert!(norm <= 1.0, "p={p}: {norm}");
            }
        }
    }

    #[test]
    fn sample_matrix_is_deterministic() {
        for f in EnsembleFamily::ALL {
            let spec = EnsembleSpec::lp(f, 8, 1.0, 42);
            let a = sample_matrix(&spec).unwrap();
            let b = sample_matrix(&spec).unwrap();
            assert_eq!(a.as_slice(), b.as_slice(), "{f}");
            let c = sample_matrix(&spec.with_seed(43)).unwrap();
            assert_ne!(a.as_slice(), c.as_slice());
        }
    }

    #[test]
    fn tail_survival_edges() {
        assert!(tail_survival(&[], &[1.0]).is_err());
        let zeros = vec![0.0; 1000];
        assert_eq!(tail_survival(&zeros, &[1.0]).unwrap(), vec![(1.0, 0.0)]);
        assert_eq!(tail_survival(&zeros, &[0.0]).unwrap(), vec![(0.0, 1.0)]);
    }
}
