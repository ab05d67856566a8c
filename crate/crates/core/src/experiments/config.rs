use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{p_serde, validate_p, EnsembleFamily, EnsembleSpec};
use crate::error::{LabError, Result};
use crate::spectral::ShiftSpec;

/// Flat experiment configuration; every key mirrors a CLI flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleFamily,
    #[serde(default = "default_p", with = "p_serde")]
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Shift; the deterministic matrix defaults to `M = −z√n·Id`.
    #[serde(default, with = "z_serde")]
    pub z: Complex64,
    /// Points at which potentials are compared.
    #[serde(default = "default_z_points", with = "z_list_serde")]
    pub z_points: Vec<Complex64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, alias = "master_seed")]
    pub seed: u64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_rho")]
    pub rho_comp: f64,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<f64>,
    #[serde(default = "default_radial_tol")]
    pub radial_tol: f64,
    #[serde(default = "default_sector_tol")]
    pub sector_tol: f64,
    #[serde(default = "default_potential_tol")]
    pub potential_tol: f64,
}

fn default_p() -> f64 {
    1.0
}
fn default_z_points() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(2.0, 0.0),
    ]
}
fn default_trials() -> usize {
    8
}
fn default_gamma() -> f64 {
    0.5
}
fn default_alpha() -> f64 {
    0.05
}
fn default_delta() -> f64 {
    0.1
}
fn default_rho() -> f64 {
    0.1
}
fn default_k_grid() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}
fn default_radial_tol() -> f64 {
    0.05
}
fn default_sector_tol() -> f64 {
    0.03
}
fn default_potential_tol() -> f64 {
    0.05
}

impl ExperimentConfig {
    /// Defaults everywhere except the family and a single size.
    pub fn new(ensemble: EnsembleFamily, n: usize) -> Self {
        ExperimentConfig {
            ensemble,
            p: default_p(),
            n: Some(n),
            n_list: None,
            z: Complex64::new(0.0, 0.0),
            z_points: default_z_points(),
            trials: default_trials(),
            seed: 0,
            gamma: default_gamma(),
            alpha: default_alpha(),
            delta: default_delta(),
            rho_comp: default_rho(),
            k_grid: default_k_grid(),
            radial_tol: default_radial_tol(),
            sector_tol: default_sector_tol(),
            potential_tol: default_potential_tol(),
        }
    }

    pub fn with_sizes(mut self, sizes: &[usize]) -> Self {
        self.n = None;
        self.n_list = Some(sizes.to_vec());
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_z(mut self, z: Complex64) -> Self {
        self.z = z;
        self
    }

    /// Matrix sizes in run order: `n_list` if given, else `[n]`.
    pub fn sizes(&self) -> Vec<usize> {
        match (&self.n_list, self.n) {
            (Some(list), _) => list.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => Vec::new(),
        }
    }

    pub fn largest_n(&self) -> usize {
        self.sizes().into_iter().max().unwrap_or(0)
    }

    /// Ensemble at size `n`; the seed is filled in per trial.
    pub fn spec(&self, n: usize) -> EnsembleSpec {
        EnsembleSpec::lp(self.ensemble, n, self.p, self.seed)
    }

    /// `M = −z√n·Id`, whose norm budget is `R = |z|`.
    pub fn shift(&self) -> ShiftSpec {
        ShiftSpec {
            z: self.z,
            m: None,
            r: self.z.norm(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_p(self.p)?;
        let sizes = self.sizes();
        if sizes.is_empty() {
            return Err(LabError::invalid("n", "give n or n_list"));
        }
        if sizes.contains(&0) {
            return Err(LabError::invalid("n", "matrix side must be at least 1"));
        }
        if self.trials == 0 {
            return Err(LabError::invalid("trials", "need at least one trial"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(LabError::invalid("gamma", "need γ ∈ (0, 1)"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(LabError::invalid("alpha", "need α ∈ (0, 2]"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(LabError::invalid("delta", "need δ ∈ (0, 1]"));
        }
        if !(self.rho_comp > 0.0 && self.rho_comp.is_finite()) {
            return Err(LabError::invalid("rho_comp", "need ρ_comp > 0"));
        }
        if self.k_grid.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(LabError::invalid("k_grid", "fractions must lie in (0, 1)"));
        }
        if !self.z.is_finite() || self.z_points.iter().any(|z| !z.is_finite()) {
            return Err(LabError::invalid("z", "shift must be finite"));
        }
        for (name, v) in [
            ("radial_tol", self.radial_tol),
            ("sector_tol", self.sector_tol),
            ("potential_tol", self.potential_tol),
        ] {
            if !(v > 0.0) {
                return Err(LabError::invalid(name, "tolerance must be positive"));
            }
        }
        Ok(())
    }
}

/// Parses `"re,im"` or `"re"`.
pub fn parse_z(text: &str) -> Result<Complex64> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| LabError::invalid("z", format!("expected \"re,im\", got {text:?}")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(LabError::invalid("z", format!("expected \"re,im\", got {text:?}"))),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ZRepr {
    Text(String),
    Pair([f64; 2]),
    Real(f64),
}

impl ZRepr {
    fn into_complex(self) -> Result<Complex64> {
        match self {
            ZRepr::Text(t) => parse_z(&t),
            ZRepr::Pair([re, im]) => Ok(Complex64::new(re, im)),
            ZRepr::Real(re) => Ok(Complex64::new(re, 0.0)),
        }
    }
}

/// `z` as `[re, im]`; also accepts `"re,im"` and a bare real.
pub mod z_serde {
    use super::*;
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
        ZRepr::deserialize(d)?.into_complex().map_err(de::Error::custom)
    }
}

pub mod z_list_serde {
    use super::*;
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = zs.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Complex64>, D::Error> {
        Vec::<ZRepr>::deserialize(d)?
            .into_iter()
            .map(|z| z.into_complex().map_err(de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"ensemble":"ginibre","n":64}"#).unwrap();
        assert_eq!(c.gamma, 0.5);
        assert_eq!(c.alpha, 0.05);
        assert_eq!(c.trials, 8);
        assert_eq!(c.sizes(), vec![64]);
        c.validate().unwrap();
    }

    #[test]
    fn z_forms() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"ensemble":"ginibre","n":4,"z":"0.5,0.25"}"#).unwrap();
        assert_eq!(c.z, Complex64::new(0.5, 0.25));
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"ensemble":"ginibre","n":4,"z":[1,2]}"#).unwrap();
        assert_eq!(c.z, Complex64::new(1.0, 2.0));
        assert!(parse_z("1,2,3").is_err());
        assert!(parse_z("a").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let bad_p: ExperimentConfig =
            serde_json::from_str(r#"{"ensemble":"lp_ball_global","n":4,"p":0.5}"#).unwrap();
        let msg = bad_p.validate().unwrap_err().to_string();
        assert!(msg.contains("p") && msg.contains("log-concavity requires p ≥ 1"), "{msg}");
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"ensemble":"ginibre","n":4,"bogus":1}"#).is_err());
        let mut c = ExperimentConfig::new(EnsembleFamily::Ginibre, 4);
        c.k_grid = vec![1.0];
        assert!(c.validate().is_err());
        let c = ExperimentConfig::new(EnsembleFamily::Ginibre, 4).with_trials(0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::new(EnsembleFamily::LpBallRows, 16)
            .with_p(f64::INFINITY)
            .with_z(Complex64::new(0.5, -0.5))
            .with_seed(9);
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
