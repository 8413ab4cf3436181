//! Canonical circular-slit maps and `lmr` on multiply connected domains.
//!
//! For a domain `Ω` (the disk minus holes, possibly minus a slit hull with
//! normalized slit map `g`) the canonical map is `F = w · e^{−H}` with
//! `w = g(z)` and `H` analytic and single-valued, `Re H = ln |w|` on the
//! outer boundary and `Re H = ln |w| + ℓ_j` on hole `j`. Then `|F| = 1` on
//! the outer boundary, `|F| = e^{−ℓ_j}` on hole `j`, and
//! `lmr(F) = lmr(g) − Re H(0)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{angles, Hole, LaplaceOptions};
use super::fit::{Chart, Component, Fitter, HarmonicFunction, IdentityChart};
use crate::domain::{unwrap_angles, ArcSlit, CircularSlitDisk};
use crate::error::{Error, Result};
use crate::capacity::LmrOracle;
use crate::domain::HullConfig;
use crate::scmap::{build_hull_map, ConformalMapRep, MapOptions};

/// Chart given by the slit map of a hull.
pub struct SlitMapChart<'a> {
    pub map: &'a ConformalMapRep,
}

impl Chart for SlitMapChart<'_> {
    fn outer_point(&self, theta: f64) -> Result<(Complex64, Complex64)> {
        let w = Complex64::from_polar(1.0, theta);
        Ok((self.map.evaluate_inverse_boundary(w)?, w))
    }

    fn forward(&self, z: Complex64) -> Result<Complex64> {
        self.map.evaluate(z)
    }

    fn corners(&self) -> Vec<Complex64> {
        self.map.base_images()
    }
}

/// Normalized canonical map of the disk minus holes onto a circularly slit
/// disk, `F(z0) = 0`, `F'(z0) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMap {
    pub basepoint: Complex64,
    pub correction: HarmonicFunction,
    /// `Im H(z0)`, removed so that `F'(z0) > 0`.
    pub phase: f64,
    pub image: CircularSlitDisk,
    /// Largest deviation of `|F|` from its target level on the validation grid.
    pub residual: f64,
}

impl CanonicalMap {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let h = self.correction.analytic(z);
        (z - self.basepoint) * (-(h - Complex64::new(0.0, self.phase))).exp()
    }

    fn eval_on_hole(&self, j: usize, theta: f64) -> Complex64 {
        let z = self.correction.holes[j].point(theta);
        let h = self.correction.analytic_at(z, z, Some((j, Complex64::from_polar(1.0, theta))));
        (z - self.basepoint) * (-(h - Complex64::new(0.0, self.phase))).exp()
    }

    /// `ln F'(z0)`.
    pub fn lmr(&self) -> f64 {
        -self.correction.analytic(self.basepoint).re
    }
}

fn image_arc(samples: &[Complex64], radius: f64) -> ArcSlit {
    let raw: Vec<f64> = samples.iter().map(|w| w.arg()).collect();
    let un = unwrap_angles(&raw);
    let lo = un.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = un.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ArcSlit::new(radius, lo, hi)
}

/// Canonical circular-slit map of the disk minus `holes` at `z0`.
pub fn canonical_slit_disk_map(holes: &[Hole], z0: Complex64, opts: &LaplaceOptions) -> Result<CanonicalMap> {
    if !(z0.norm() < 1.0) || holes.iter().any(|h| h.distance(z0) <= 0.0) {
        return Err(Error::OutsideDomain { re: z0.re, im: z0.im });
    }
    let fitter = Fitter::new(holes, opts, false, true, &IdentityChart)?;
    let correction = fitter.fit(|s| (s.z - z0).norm().ln())?;
    let phase = correction.analytic(z0).im;
    let mut map = CanonicalMap { basepoint: z0, correction, phase, image: CircularSlitDisk::disk(), residual: 0.0 };
    let mut residual: f64 = 0.0;
    for th in angles(opts.outer_points(), 0.75) {
        residual = residual.max((map.eval(Complex64::from_polar(1.0, th)).norm() - 1.0).abs());
    }
    let mut arcs = Vec::with_capacity(holes.len());
    let n = opts.hole_points().max(64);
    for j in 0..holes.len() {
        let radius = (-map.correction.levels[j]).exp();
        // traverse the hole boundary once, starting at θ = −π
        let pts: Vec<Complex64> = (0..=n).map(|i| map.eval_on_hole(j, -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / n as f64)).collect();
        for p in &pts {
            residual = residual.max((p.norm() - radius).abs());
        }
        arcs.push(image_arc(&pts, radius));
    }
    map.image = CircularSlitDisk::new(arcs);
    map.residual = residual;
    if residual > opts.tol {
        return Err(Error::ResidualTooLarge { residual, tolerance: opts.tol });
    }
    Ok(map)
}

/// Canonical map composed with a slit map: `F = g · e^{−H}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedMap {
    pub correction: HarmonicFunction,
    pub phase: f64,
    /// `lmr(F ∘ g)`.
    pub lmr: f64,
    pub residual: f64,
}

impl ReducedMap {
    /// Image of a boundary point with slit-map image `w` (`|w| = 1`) and
    /// preimage `z`, such as a slit tip.
    pub fn boundary_image(&self, z: Complex64, w: Complex64) -> Complex64 {
        let h = self.correction.analytic_at(z, w, None);
        w * (-(h - Complex64::new(0.0, self.phase))).exp()
    }
}

/// `lmr` of the normalized canonical map of `D \ (hull ∪ holes)`, where
/// `map` is the slit map of the hull in the disk.
pub fn reduced_map(map: &ConformalMapRep, holes: &[Hole], opts: &LaplaceOptions) -> Result<ReducedMap> {
    if holes.is_empty() {
        return Ok(ReducedMap {
            correction: HarmonicFunction {
                holes: Vec::new(),
                outer: vec![Complex64::new(0.0, 0.0)],
                poles: Vec::new(),
                inner: Vec::new(),
                logs: Vec::new(),
                levels: Vec::new(),
                fit_residual: 0.0,
                residual: 0.0,
            },
            phase: 0.0,
            lmr: map.lmr(),
            residual: 0.0,
        });
    }
    let chart = SlitMapChart { map };
    let fitter = Fitter::new(holes, opts, false, true, &chart)?;
    let correction = fitter.fit(|s| match s.on {
        Component::Outer => 0.0,
        Component::Hole { .. } => s.w.norm().ln(),
    })?;
    let h0 = correction.analytic_at(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), None);
    Ok(ReducedMap { phase: h0.im, lmr: map.lmr() - h0.re, residual: correction.residual, correction })
}

/// `lmr` of hulls in the unit disk minus `holes`, by [`reduced_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct HoleOracle {
    pub map: MapOptions,
    pub laplace: LaplaceOptions,
    pub holes: Vec<Hole>,
}

impl HoleOracle {
    /// Oracle for hulls in a circularly slit disk.
    pub fn for_domain(domain: &CircularSlitDisk, map: MapOptions, laplace: LaplaceOptions) -> Self {
        Self { map, laplace, holes: domain.slits.iter().cloned().map(Hole::Arc).collect() }
    }
}

impl LmrOracle for HoleOracle {
    fn lmr(&self, config: &HullConfig, truncation: &[f64]) -> Result<f64> {
        // the slit map sees the hull alone; the holes enter through the chart
        let bare = HullConfig::new(config.curves.clone(), config.horizon);
        let g = build_hull_map(&bare, truncation, &self.map)?;
        Ok(reduced_map(&g, &self.holes, &self.laplace)?.lmr)
    }
}
