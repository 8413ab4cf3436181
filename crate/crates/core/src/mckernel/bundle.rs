//! Harmonic measures, period matrix and Green's function.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{Hole, LaplaceOptions};
use super::fit::{Component, Fitter, HarmonicFunction, IdentityChart};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicBundle {
    pub holes: Vec<Hole>,
    /// `ω_j`: 1 on hole `j`, 0 on the other components.
    pub measures: Vec<HarmonicFunction>,
    /// Symmetrized period matrix `P_jk`, the flux of `ω_k` into hole `j`.
    pub periods: Vec<Vec<f64>>,
    /// `max |P − Pᵀ|` before symmetrization.
    pub asymmetry: f64,
    pub min_eigenvalue: f64,
    pub condition: f64,
}

impl HarmonicBundle {
    pub fn is_empty(&self) -> bool {
        self.holes.is_empty()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.holes.len();
        DMatrix::from_fn(n, n, |i, j| self.periods[i][j])
    }

    /// Harmonic measure vector at `z`.
    pub fn omega(&self, z: Complex64) -> Vec<f64> {
        self.measures.iter().map(|w| w.value(z)).collect()
    }
}

/// Harmonic measures and period matrix of the disk minus `holes`.
pub fn harmonic_bundle(holes: &[Hole], opts: &LaplaceOptions) -> Result<HarmonicBundle> {
    let n = holes.len();
    if n == 0 {
        return Ok(HarmonicBundle {
            holes: Vec::new(),
            measures: Vec::new(),
            periods: Vec::new(),
            asymmetry: 0.0,
            min_eigenvalue: f64::INFINITY,
            condition: 1.0,
        });
    }
    let fitter = Fitter::new(holes, opts, true, false, &IdentityChart)?;
    let measures = (0..n)
        .map(|j| {
            fitter.fit(|s| match s.on {
                Component::Hole { index, .. } if index == j => 1.0,
                _ => 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = DMatrix::from_fn(n, n, |j, k| measures[k].flux(j));
    let asymmetry = (&raw - raw.transpose()).amax();
    let p = (&raw + raw.transpose()) * 0.5;
    let eig = p.clone().symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.min();
    let max_eigenvalue = eig.eigenvalues.max();
    if !(min_eigenvalue > 0.0) || p.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    Ok(HarmonicBundle {
        holes: holes.to_vec(),
        measures,
        periods: (0..n).map(|i| (0..n).map(|j| p[(i, j)]).collect()).collect(),
        asymmetry,
        min_eigenvalue,
        condition: max_eigenvalue / min_eigenvalue,
    })
}

/// Green's function `G(·, pole) = −ln |z − pole| + u`, `u` harmonic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenFunction {
    pub pole: Complex64,
    pub corrector: HarmonicFunction,
}

impl GreenFunction {
    pub fn value(&self, z: Complex64) -> f64 {
        -(z - self.pole).norm().ln() + self.corrector.value(z)
    }

    pub fn residual(&self) -> f64 {
        self.corrector.residual
    }
}

pub fn green(holes: &[Hole], pole: Complex64, opts: &LaplaceOptions) -> Result<GreenFunction> {
    if !(pole.norm() < 1.0) || holes.iter().any(|h| h.distance(pole) <= 0.0) {
        return Err(Error::OutsideDomain { re: pole.re, im: pole.im });
    }
    let fitter = Fitter::new(holes, opts, true, false, &IdentityChart)?;
    let corrector = fitter.fit(|s| (s.z - pole).norm().ln())?;
    Ok(GreenFunction { pole, corrector })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ArcSlit;

    fn opts() -> LaplaceOptions {
        LaplaceOptions { outer_degree: 32, hole_degree: 28, ..Default::default() }
    }

    #[test]
    fn empty_bundle_for_disk() {
        assert!(harmonic_bundle(&[], &opts()).unwrap().is_empty());
    }

    #[test]
    fn annulus_period() {
        let rho: f64 = 0.5;
        let b = harmonic_bundle(&[Hole::Disk { center: Complex64::new(0.0, 0.0), radius: rho }], &opts()).unwrap();
        assert!((b.periods[0][0] - std::f64::consts::TAU / (1.0 / rho).ln()).abs() < 1e-9);
    }

    #[test]
    fn three_connected_periods_spd() {
        let holes = vec![Hole::Arc(ArcSlit::new(0.4, -0.8, 0.9)), Hole::Disk { center: Complex64::new(-0.4, -0.3), radius: 0.15 }];
        let b = harmonic_bundle(&holes, &opts()).unwrap();
        assert!(b.asymmetry < 1e-6, "{}", b.asymmetry);
        assert!(b.min_eigenvalue > 0.0);
        for w in &b.measures {
            for z in [Complex64::new(0.1, 0.6), Complex64::new(-0.7, 0.2)] {
                let v = w.value(z);
                assert!((-1e-6..=1.0 + 1e-6).contains(&v));
            }
        }
    }

    #[test]
    fn disk_green_functions() {
        let a = Complex64::new(0.3, -0.2);
        let g = green(&[], a, &opts()).unwrap();
        for z in [Complex64::new(0.1, 0.5), Complex64::new(-0.6, -0.1)] {
            let exact = -((z - a) / (1.0 - a.conj() * z)).norm().ln();
            assert!((g.value(z) - exact).abs() < 1e-10);
        }
        let g0 = green(&[], Complex64::new(0.0, 0.0), &opts()).unwrap();
        assert!((g0.value(Complex64::new(0.5, 0.0)) + 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn green_symmetry() {
        let holes = vec![Hole::Arc(ArcSlit::new(0.5, 2.0, 3.5))];
        let (z, w) = (Complex64::new(0.2, 0.1), Complex64::new(-0.1, -0.6));
        let gz = green(&holes, z, &opts()).unwrap();
        let gw = green(&holes, w, &opts()).unwrap();
        assert!((gz.value(w) - gw.value(z)).abs() < 1e-5);
        assert!(gz.value(w) > 0.0);
    }
}
