//! Empirical measures and their functionals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleSpec;
use crate::error::{LabError, Result};
use crate::spectral::{SingularSpectrum, Spectrum, NUMERICAL_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    RealLine,
    ComplexPlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: Complex64,
    pub weight: f64,
}

/// Finitely many weighted atoms with total mass one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<Atom>,
    domain: Domain,
}

impl EmpiricalMeasure {
    /// Weights must be positive and sum to 1 within 1e-12; real-line atoms
    /// must have zero imaginary part.
    pub fn new(atoms: Vec<Atom>, domain: Domain) -> Result<Self> {
        if atoms.is_empty() {
            return Err(LabError::invalid("atoms", "measure needs at least one atom"));
        }
        if atoms.iter().any(|a| !(a.weight > 0.0) || !a.position.is_finite()) {
            return Err(LabError::invalid("atoms", "weights must be positive and positions finite"));
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(LabError::invalid("atoms", format!("weights sum to {total}, not 1")));
        }
        if domain == Domain::RealLine && atoms.iter().any(|a| a.position.im != 0.0) {
            return Err(LabError::invalid("atoms", "real-line atoms must be real"));
        }
        Ok(EmpiricalMeasure { atoms, domain })
    }

    /// Equal weights `1/len` on the given points.
    pub fn uniform(points: impl IntoIterator<Item = Complex64>, domain: Domain) -> Result<Self> {
        let points: Vec<Complex64> = points.into_iter().collect();
        if points.is_empty() {
            return Err(LabError::invalid("atoms", "measure needs at least one atom"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(LabError::invalid("atoms", "positions must be finite"));
        }
        if domain == Domain::RealLine && points.iter().any(|p| p.im != 0.0) {
            return Err(LabError::invalid("atoms", "real-line atoms must be real"));
        }
        // Summing len copies of 1/len drifts by O(len·ε); the weights are exact by construction.
        let w = 1.0 / points.len() as f64;
        let atoms = points
            .into_iter()
            .map(|position| Atom { position, weight: w })
            .collect();
        Ok(EmpiricalMeasure { atoms, domain })
    }

    /// Equal weights on real points.
    pub fn uniform_real(points: &[f64]) -> Result<Self> {
        Self::uniform(points.iter().map(|&x| Complex64::new(x, 0.0)), Domain::RealLine)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.atoms.iter().map(|a| a.position)
    }

    /// Concatenates measures and reweights so that each one carries equal mass.
    pub fn pooled(parts: &[EmpiricalMeasure]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| LabError::invalid("parts", "nothing to pool"))?;
        if parts.iter().any(|m| m.domain != first.domain) {
            return Err(LabError::invalid("parts", "mixed domains"));
        }
        let k = parts.len() as f64;
        let atoms = parts
            .iter()
            .flat_map(|m| {
                m.atoms.iter().map(move |a| Atom {
                    position: a.position,
                    weight: a.weight / k,
                })
            })
            .collect();
        Ok(EmpiricalMeasure {
            atoms,
            domain: first.domain,
        })
    }
}

/// Empirical spectral distribution, optionally of `A/√n`.
pub fn esd(spectrum: &Spectrum, scale_by_inv_sqrt_n: bool) -> Result<EmpiricalMeasure> {
    let n = spectrum.len();
    if n == 0 {
        return Err(LabError::invalid("spectrum", "no eigenvalues"));
    }
    let f = if scale_by_inv_sqrt_n && !spectrum.normalized {
        1.0 / (n as f64).sqrt()
    } else {
        1.0
    };
    EmpiricalMeasure::uniform(spectrum.eigenvalues.iter().map(|l| l * f), Domain::ComplexPlane)
}

/// Uniform measure on the singular values `ν_{z,n}`.
pub fn singular_measure(svals: &SingularSpectrum) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::uniform_real(&svals.values)
}

/// `m_μ(ξ) = ∫ (λ − ξ)⁻¹ μ(dλ)` for `Im ξ > 0`.
pub fn stieltjes(measure: &EmpiricalMeasure, xi: Complex64) -> Result<Complex64> {
    if measure.domain != Domain::RealLine {
        return Err(LabError::invalid("measure", "Stieltjes transform needs a real-line measure"));
    }
    if !(xi.im > 0.0) {
        return Err(LabError::invalid("xi", "need Im ξ > 0"));
    }
    Ok(measure
        .atoms
        .iter()
        .map(|a| a.weight / (a.position - xi))
        .sum())
}

/// A potential value with a flag for zero singular values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    /// `+∞` when degenerate.
    pub value: f64,
    pub degenerate: bool,
}

/// `U_n(z) = −(1/n) Σ log s_i`, i.e. `−(1/n) log|det(A/√n − z)|`.
pub fn log_potential_from_singulars(svals: &SingularSpectrum) -> Result<Potential> {
    if svals.values.is_empty() {
        return Err(LabError::invalid("svals", "no singular values"));
    }
    if svals.values.iter().any(|&s| s <= NUMERICAL_FLOOR) {
        return Ok(Potential {
            value: f64::INFINITY,
            degenerate: true,
        });
    }
    let sum: f64 = svals.values.iter().map(|s| s.ln()).sum();
    Ok(Potential {
        value: -sum / svals.values.len() as f64,
        degenerate: false,
    })
}

/// Logarithmic potential of the uniform law on the unit disc.
pub fn circular_potential(z: Complex64) -> f64 {
    let r = z.norm();
    if r > 1.0 {
        -r.ln()
    } else {
        0.5 * (1.0 - r * r)
    }
}

/// Default radial grid: 101 equispaced points on `[0, 1.2]`.
pub fn default_r_grid() -> Vec<f64> {
    (0..=100).map(|i| 1.2 * i as f64 / 100.0).collect()
}

pub const DEFAULT_SECTORS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscUniformity {
    /// `sup_r |F̂(r) − min(r², 1)|` over the grid.
    pub radial_discrepancy: f64,
    /// Radius attaining the radial sup.
    pub radial_argmax: f64,
    /// `sup_k |mass_k − 1/K|` among atoms with `|λ| ≤ 1`, normalised by their mass.
    pub sector_discrepancy: f64,
    pub sector_count: usize,
    /// Mass of atoms outside the closed unit disc.
    pub mass_outside: f64,
}

pub fn disc_uniformity(
    measure: &EmpiricalMeasure,
    r_grid: &[f64],
    sector_count: usize,
) -> Result<DiscUniformity> {
    if measure.domain != Domain::ComplexPlane {
        return Err(LabError::invalid("measure", "disc statistics need a complex-plane measure"));
    }
    if r_grid.is_empty() || sector_count == 0 {
        return Err(LabError::invalid("r_grid", "need a nonempty grid and at least one sector"));
    }
    let mut radial: Vec<(f64, f64)> = measure
        .atoms
        .iter()
        .map(|a| (a.position.norm(), a.weight))
        .collect();
    radial.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = Vec::with_capacity(radial.len());
    let mut acc = 0.0;
    for &(_, w) in &radial {
        acc += w;
        cum.push(acc);
    }
    let (mut sup, mut arg) = (0.0f64, r_grid[0]);
    for &r in r_grid {
        let k = radial.partition_point(|a| a.0 <= r);
        let f = if k == 0 { 0.0 } else { cum[k - 1] };
        let d = (f - (r * r).min(1.0)).abs();
        if d > sup {
            sup = d;
            arg = r;
        }
    }

    let mut mass = vec![0.0; sector_count];
    let mut inside = 0.0;
    let tau = std::f64::consts::TAU;
    for a in &measure.atoms {
        if a.position.norm() <= 1.0 {
            let theta = a.position.arg().rem_euclid(tau);
            let k = ((theta / tau * sector_count as f64) as usize).min(sector_count - 1);
            mass[k] += a.weight;
            inside += a.weight;
        }
    }
    let target = 1.0 / sector_count as f64;
    let sector = if inside > 0.0 {
        mass.iter()
            .map(|m| (m / inside - target).abs())
            .fold(0.0, f64::max)
    } else {
        1.0 - target
    };
    Ok(DiscUniformity {
        radial_discrepancy: sup,
        radial_argmax: arg,
        sector_discrepancy: sector,
        sector_count,
        mass_outside: (1.0 - inside).max(0.0),
    })
}

/// `(1/n) Σ (s_i^α + s_i^{−α})`; `+∞` when some `s_i` vanishes.
pub fn uniform_integrability_stat(svals: &SingularSpectrum, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(LabError::invalid("alpha", "need α ∈ (0, 2]"));
    }
    if svals.values.is_empty() {
        return Err(LabError::invalid("svals", "no singular values"));
    }
    if svals.values.iter().any(|&s| s <= 0.0) {
        return Ok(f64::INFINITY);
    }
    let total: f64 = svals
        .values
        .iter()
        .map(|&s| s.powf(alpha) + s.powf(-alpha))
        .sum();
    Ok(total / svals.values.len() as f64)
}

/// Empirical against theoretical potential at one shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialComparison {
    pub z_re: f64,
    pub z_im: f64,
    /// `−(1/n) Σ log s_i`.
    #[serde(rename = "U_n")]
    pub u_n: f64,
    #[serde(rename = "U_theory")]
    pub u_theory: f64,
    /// `∫ log s ν_{z,n}(ds)`, the opposite-sign expression (equals `−U_n`).
    pub integral_log_s: f64,
    pub degenerate: bool,
    pub n: usize,
    pub ensemble: EnsembleSpec,
    pub seed: u64,
}

impl PotentialComparison {
    pub fn new(z: Complex64, svals: &SingularSpectrum, ensemble: EnsembleSpec) -> Result<Self> {
        let pot = log_potential_from_singulars(svals)?;
        Ok(PotentialComparison {
            z_re: z.re,
            z_im: z.im,
            u_n: pot.value,
            u_theory: circular_potential(z),
            integral_log_s: -pot.value,
            degenerate: pot.degenerate,
            n: svals.n,
            ensemble,
            seed: ensemble.seed,
        })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.z_re, self.z_im)
    }

    pub fn error(&self) -> f64 {
        (self.u_n - self.u_theory).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ShiftSpec;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn svals(v: &[f64]) -> SingularSpectrum {
        SingularSpectrum::from_values(v.to_vec(), ShiftSpec::zero()).unwrap()
    }

    #[test]
    fn esd_examples() {
        let s = Spectrum {
            eigenvalues: vec![c(1.0, 0.0), c(2.0, 0.0)],
            normalized: false,
        };
        let m = esd(&s, false).unwrap();
        assert_eq!(m.atoms()[1], Atom { position: c(2.0, 0.0), weight: 0.5 });
        let one = Spectrum { eigenvalues: vec![c(2.0, 0.0)], normalized: false };
        assert_eq!(esd(&one, true).unwrap().atoms()[0].position, c(2.0, 0.0));
        let four = Spectrum {
            eigenvalues: vec![c(2.0, 0.0), c(2.0, 0.0), c(-2.0, 0.0), c(-2.0, 0.0)],
            normalized: false,
        };
        let m = esd(&four, true).unwrap();
        let plus: f64 = m.atoms().iter().filter(|a| a.position.re == 1.0).map(|a| a.weight).sum();
        assert_abs_diff_eq!(plus, 0.5);
        assert!(m.atoms().iter().all(|a| a.position.re.abs() == 1.0));
    }

    #[test]
    fn measure_validation() {
        assert!(EmpiricalMeasure::new(vec![], Domain::RealLine).is_err());
        let bad = vec![Atom { position: c(0.0, 1.0), weight: 1.0 }];
        assert!(EmpiricalMeasure::new(bad.clone(), Domain::RealLine).is_err());
        assert!(EmpiricalMeasure::new(bad, Domain::ComplexPlane).is_ok());
        let light = vec![Atom { position: c(0.0, 0.0), weight: 0.9 }];
        assert!(EmpiricalMeasure::new(light, Domain::ComplexPlane).is_err());
    }

    #[test]
    fn stieltjes_examples() {
        let i = c(0.0, 1.0);
        let d0 = EmpiricalMeasure::uniform_real(&[0.0]).unwrap();
        assert_abs_diff_eq!((stieltjes(&d0, i).unwrap() - i).norm(), 0.0, epsilon = 1e-15);
        let d1 = EmpiricalMeasure::uniform_real(&[1.0]).unwrap();
        assert_abs_diff_eq!((stieltjes(&d1, i).unwrap() - c(0.5, 0.5)).norm(), 0.0, epsilon = 1e-15);
        let two = EmpiricalMeasure::uniform_real(&[0.0, 2.0]).unwrap();
        assert_abs_diff_eq!((stieltjes(&two, i).unwrap() - c(0.2, 0.6)).norm(), 0.0, epsilon = 1e-15);
        assert!(stieltjes(&two, c(1.0, 0.0)).is_err());
        assert!(stieltjes(&two, c(1.0, -1.0)).is_err());
    }

    #[test]
    fn potential_examples() {
        assert_abs_diff_eq!(log_potential_from_singulars(&svals(&[1.0; 3])).unwrap().value, 0.0);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(
            log_potential_from_singulars(&svals(&[e, e])).unwrap().value,
            -1.0,
            epsilon = 1e-15
        );
        let deg = log_potential_from_singulars(&svals(&[1.0, 0.0])).unwrap();
        assert!(deg.degenerate && deg.value.is_infinite());
    }

    #[test]
    fn circular_potential_examples() {
        assert_eq!(circular_potential(c(0.0, 0.0)), 0.5);
        assert_abs_diff_eq!(circular_potential(c(2.0, 0.0)), -0.693147, epsilon = 1e-6);
        assert_eq!(circular_potential(c(1.0, 0.0)), 0.0);
        assert_abs_diff_eq!(circular_potential(c(1.0 + 1e-12, 0.0)), 0.0, epsilon = 1e-11);
    }

    #[test]
    fn disc_single_atom() {
        let m = EmpiricalMeasure::uniform([c(0.0, 0.0)], Domain::ComplexPlane).unwrap();
        let d = disc_uniformity(&m, &[0.5], 16).unwrap();
        assert_abs_diff_eq!(d.radial_discrepancy, 0.75);
    }

    #[test]
    fn disc_quantile_grid() {
        let (jj, kk) = (50usize, 16usize);
        let pts = (1..=jj).flat_map(|j| {
            let r = (j as f64 / jj as f64).sqrt();
            (0..kk).map(move |k| {
                Complex64::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.5) / kk as f64)
            })
        });
        let m = EmpiricalMeasure::uniform(pts, Domain::ComplexPlane).unwrap();
        let d = disc_uniformity(&m, &default_r_grid(), kk).unwrap();
        assert!(d.radial_discrepancy <= 1.0 / jj as f64 + 1e-12, "{}", d.radial_discrepancy);
        assert!(d.sector_discrepancy < 1e-12);
    }

    #[test]
    fn integrability_examples() {
        assert_abs_diff_eq!(uniform_integrability_stat(&svals(&[1.0; 4]), 0.3).unwrap(), 2.0);
        assert_abs_diff_eq!(uniform_integrability_stat(&svals(&[2.0, 0.5]), 1.0).unwrap(), 2.5);
        assert!(uniform_integrability_stat(&svals(&[1.0, 0.0]), 1.0).unwrap().is_infinite());
        assert!(uniform_integrability_stat(&svals(&[1.0]), 0.0).is_err());
        assert!(uniform_integrability_stat(&svals(&[1.0]), 2.5).is_err());
    }
}
