//! The kernel `Φ(ζ, z)` of a circularly slit disk.
//!
//! `Φ = (ζ + z)/(ζ − z) + H(z)` with `H` analytic and single-valued,
//! `Re Φ = 0` on the unit circle and `Re Φ` constant on every slit. The
//! imaginary constant of `H` is fixed by `Φ(ζ, 0) = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{Hole, LaplaceOptions};
use super::fit::{Component, Fitter, HarmonicFunction, IdentityChart};
use crate::domain::CircularSlitDisk;
use crate::error::{Error, Result};

/// Distance to `ζ` below which the kernel refuses evaluation.
pub const POLE_GUARD: f64 = 1e-7;

/// `(ξ + z)/(ξ − z)`.
pub fn mobius_kernel(xi: Complex64, z: Complex64) -> Result<Complex64> {
    let d = xi - z;
    if d.norm() < POLE_GUARD {
        return Err(Error::PoleHit { distance: d.norm() });
    }
    Ok((xi + z) / d)
}

/// Factorized kernel problem for one domain; cheap to evaluate for many `ζ`.
pub struct KernelSolver {
    pub domain: CircularSlitDisk,
    fitter: Option<Fitter>,
}

impl KernelSolver {
    pub fn new(domain: &CircularSlitDisk, opts: &LaplaceOptions) -> Result<Self> {
        domain.validate()?;
        let holes: Vec<Hole> = domain.slits.iter().cloned().map(Hole::Arc).collect();
        let fitter = if holes.is_empty() { None } else { Some(Fitter::new(&holes, opts, false, true, &IdentityChart)?) };
        Ok(Self { domain: domain.clone(), fitter })
    }

    pub fn field(&self, zeta: Complex64) -> Result<KernelField> {
        let zeta = zeta / zeta.norm();
        let Some(fitter) = &self.fitter else {
            return Ok(KernelField { zeta, correction: None, offset: Complex64::new(0.0, 0.0), residual: 0.0 });
        };
        let h = fitter.fit(|s| match s.on {
            Component::Outer => 0.0,
            Component::Hole { .. } => -((zeta + s.z) / (zeta - s.z)).re,
        })?;
        let offset = h.analytic(Complex64::new(0.0, 0.0));
        let residual = h.residual + offset.re.abs();
        Ok(KernelField { zeta, correction: Some(h), offset, residual })
    }
}

/// `z ↦ Φ(ζ, z)` for a fixed pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelField {
    pub zeta: Complex64,
    /// Analytic correction `H` (absent for the plain disk).
    pub correction: Option<HarmonicFunction>,
    /// `H(0)`, subtracted so that `Φ(ζ, 0) = 1`.
    pub offset: Complex64,
    /// Boundary mismatch of `Re Φ` on the validation grid.
    pub residual: f64,
}

impl KernelField {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let m = mobius_kernel(self.zeta, z)?;
        Ok(match &self.correction {
            Some(h) => m + (h.analytic(z) - self.offset),
            None => m,
        })
    }

    /// Value on slit `j` at the prime end with local coordinate `e^{iθ}`.
    pub fn eval_on_slit(&self, j: usize, theta: f64) -> Result<Complex64> {
        let h = self.correction.as_ref().ok_or_else(|| Error::InvalidDomain("the disk has no slits".into()))?;
        let z = h.holes[j].point(theta);
        let m = mobius_kernel(self.zeta, z)?;
        Ok(m + h.analytic_at(z, z, Some((j, Complex64::from_polar(1.0, theta)))) - self.offset)
    }

    /// Fitted constant `Re Φ` on slit `j`.
    pub fn slit_level(&self, j: usize) -> f64 {
        self.correction.as_ref().map(|h| h.levels[j]).unwrap_or(0.0)
    }
}

/// `Φ(ζ, ·)` for `domain`.
pub fn phi_kernel(domain: &CircularSlitDisk, zeta: Complex64, opts: &LaplaceOptions) -> Result<KernelField> {
    KernelSolver::new(domain, opts)?.field(zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ArcSlit;

    #[test]
    fn mobius_values() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(mobius_kernel(one, Complex64::new(0.0, 0.0)).unwrap(), one);
        assert_eq!(mobius_kernel(one, -one).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(mobius_kernel(one, Complex64::new(1.0 - 1e-9, 0.0)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn disk_kernel_is_mobius() {
        let zeta = Complex64::from_polar(1.0, 0.7);
        let f = phi_kernel(&CircularSlitDisk::disk(), zeta, &LaplaceOptions::default()).unwrap();
        let z = Complex64::new(0.3, -0.5);
        assert_eq!(f.eval(z).unwrap(), mobius_kernel(zeta, z).unwrap());
    }

    #[test]
    fn one_slit_kernel_structure() {
        let d = CircularSlitDisk::new(vec![ArcSlit::new(0.5, 2.0, 3.8)]);
        let f = phi_kernel(&d, Complex64::new(1.0, 0.0), &LaplaceOptions::default()).unwrap();
        assert!(f.residual < 1e-8, "{}", f.residual);
        assert_eq!(f.eval(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        let lv = f.slit_level(0);
        for th in [0.4, 1.5, -2.0, 3.0] {
            assert!((f.eval_on_slit(0, th).unwrap().re - lv).abs() < 1e-8);
        }
        for th in [0.5f64, 2.0, -1.5] {
            let z = Complex64::from_polar(1.0 - 1e-12, th);
            assert!(f.eval(z).unwrap().re.abs() < 1e-6);
        }
        assert!(f.eval(Complex64::new(0.2, 0.3)).unwrap().re > 0.0);
    }
}
