//! Least-squares fitting of harmonic functions in the disk minus holes.
//!
//! A fitted function has the form
//!
//! ```text
//! u(z) = Re[ Σ a_n w^n + Σ_j Σ_n b_{jn} q_j(z)^{−n} ] + Σ_j c_j L_j(z)
//! ```
//!
//! where `w` is a chart coordinate for the outer boundary (the identity, or
//! a slit map of the disk), `q_j` the exterior coordinate of hole `j` and
//! `L_j` its logarithmic term. Optional free constants `d_j` relax the
//! boundary condition on hole `j` to `u − d_j = data`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{angles, clustered, inverse_series, power_series, Hole, LaplaceOptions, Lsq};
use crate::error::{Error, Result};

/// Boundary component of a collocation sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Outer,
    /// Hole `index`, with the local coordinate of the sample (which side of
    /// a slit it sits on).
    Hole { index: usize, q: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub z: Complex64,
    /// Chart coordinate of `z`.
    pub w: Complex64,
    pub on: Component,
}

/// Coordinates used for the outer polynomial part.
pub trait Chart: Sync {
    /// Outer boundary point with chart coordinate `e^{iθ}`: returns `(z, w)`.
    fn outer_point(&self, theta: f64) -> Result<(Complex64, Complex64)>;
    /// Chart coordinate of a point of the closed domain.
    fn forward(&self, z: Complex64) -> Result<Complex64>;
    /// Points of the unit circle where the fitted function may be singular.
    fn corners(&self) -> Vec<Complex64> {
        Vec::new()
    }
}

/// The unit disk itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityChart;

impl Chart for IdentityChart {
    fn outer_point(&self, theta: f64) -> Result<(Complex64, Complex64)> {
        let z = Complex64::from_polar(1.0, theta);
        Ok((z, z))
    }

    fn forward(&self, z: Complex64) -> Result<Complex64> {
        Ok(z)
    }
}

/// Fitted harmonic function (the numerical carrier of `G`, `ω_j`, `Re Φ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFunction {
    pub holes: Vec<Hole>,
    /// Coefficients of `w^n`, `n ≥ 0`.
    pub outer: Vec<Complex64>,
    /// Coefficients of `q_j^{−n}`, `n ≥ 1`, per hole.
    pub inner: Vec<Vec<Complex64>>,
    /// Poles outside the unit circle (chart coordinate) and their residues.
    #[serde(default)]
    pub poles: Vec<(Complex64, Complex64)>,
    /// Coefficients of the logarithmic terms (empty if not fitted).
    pub logs: Vec<f64>,
    /// Fitted per-hole constants (empty if not fitted).
    pub levels: Vec<f64>,
    /// Largest boundary mismatch on the collocation grid.
    pub fit_residual: f64,
    /// Largest boundary mismatch on the validation grid.
    pub residual: f64,
}

impl HarmonicFunction {
    /// Single-valued analytic part at a point with chart value `w`; `on`
    /// selects the side for points on a slit.
    pub fn analytic_at(&self, z: Complex64, w: Complex64, on: Option<(usize, Complex64)>) -> Complex64 {
        let mut acc = power_series(&self.outer, w);
        for (p, c) in &self.poles {
            acc += c / (w - p);
        }
        for (j, (hole, c)) in self.holes.iter().zip(&self.inner).enumerate() {
            let q = match on {
                Some((i, q)) if i == j => q,
                _ => hole.local(z),
            };
            acc += inverse_series(c, q);
        }
        acc
    }

    pub fn logs_at(&self, z: Complex64, on: Option<(usize, Complex64)>) -> f64 {
        self.logs
            .iter()
            .zip(&self.holes)
            .enumerate()
            .map(|(j, (c, hole))| {
                let q = match on {
                    Some((i, q)) if i == j => q,
                    _ => hole.local(z),
                };
                c * hole.log_term(z, q)
            })
            .sum()
    }

    /// Value for the identity chart.
    pub fn value(&self, z: Complex64) -> f64 {
        self.analytic_at(z, z, None).re + self.logs_at(z, None)
    }

    /// Analytic part for the identity chart.
    pub fn analytic(&self, z: Complex64) -> Complex64 {
        self.analytic_at(z, z, None)
    }

    pub fn value_at(&self, s: &Sample) -> f64 {
        let on = match s.on {
            Component::Hole { index, q } => Some((index, q)),
            Component::Outer => None,
        };
        self.analytic_at(s.z, s.w, on).re + self.logs_at(s.z, on)
    }

    /// Flux `∮ ∂u/∂n ds` into hole `j`; only the logarithmic term carries flux.
    pub fn flux(&self, j: usize) -> f64 {
        -std::f64::consts::TAU * self.logs.get(j).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
struct Layout {
    poles: Vec<Complex64>,
    outer: usize,
    inner: usize,
    holes: usize,
    logs: bool,
    levels: bool,
}

impl Layout {
    fn cols(&self) -> usize {
        (2 * self.outer + 1) + 2 * self.poles.len() + 2 * self.inner * self.holes + if self.logs { self.holes } else { 0 } + if self.levels { self.holes } else { 0 }
    }

    fn row(&self, holes: &[Hole], s: &Sample, out: &mut [f64]) {
        let mut c = 0;
        let mut p = Complex64::new(1.0, 0.0);
        out[c] = 1.0;
        c += 1;
        for _ in 0..self.outer {
            p *= s.w;
            out[c] = p.re;
            out[c + 1] = -p.im;
            c += 2;
        }
        for p in &self.poles {
            let v = (s.w - p).inv();
            out[c] = v.re;
            out[c + 1] = -v.im;
            c += 2;
        }
        let mut qs = Vec::with_capacity(holes.len());
        for (j, hole) in holes.iter().enumerate() {
            let q = match s.on {
                Component::Hole { index, q } if index == j => q,
                _ => hole.local(s.z),
            };
            qs.push(q);
            let r = if q.is_finite() { q.inv() } else { Complex64::new(0.0, 0.0) };
            let mut p = Complex64::new(1.0, 0.0);
            for _ in 0..self.inner {
                p *= r;
                out[c] = p.re;
                out[c + 1] = -p.im;
                c += 2;
            }
        }
        if self.logs {
            for (hole, q) in holes.iter().zip(&qs) {
                out[c] = hole.log_term(s.z, *q);
                c += 1;
            }
        }
        if self.levels {
            for j in 0..holes.len() {
                out[c] = match s.on {
                    Component::Hole { index, .. } if index == j => -1.0,
                    _ => 0.0,
                };
                c += 1;
            }
        }
    }

    fn unpack(&self, holes: &[Hole], x: &DVector<f64>) -> Unpacked {
        let mut c = 1;
        let mut outer = vec![Complex64::new(x[0], 0.0)];
        for _ in 0..self.outer {
            outer.push(Complex64::new(x[c], x[c + 1]));
            c += 2;
        }
        let mut poles = Vec::with_capacity(self.poles.len());
        for p in &self.poles {
            poles.push((*p, Complex64::new(x[c], x[c + 1])));
            c += 2;
        }
        let mut inner = Vec::new();
        for _ in holes {
            let mut v = Vec::with_capacity(self.inner);
            for _ in 0..self.inner {
                v.push(Complex64::new(x[c], x[c + 1]));
                c += 2;
            }
            inner.push(v);
        }
        let mut logs = Vec::new();
        if self.logs {
            for _ in holes {
                logs.push(x[c]);
                c += 1;
            }
        }
        let mut levels = Vec::new();
        if self.levels {
            for _ in holes {
                levels.push(x[c]);
                c += 1;
            }
        }
        Unpacked { outer, poles, inner, logs, levels }
    }
}

struct Unpacked {
    outer: Vec<Complex64>,
    poles: Vec<(Complex64, Complex64)>,
    inner: Vec<Vec<Complex64>>,
    logs: Vec<f64>,
    levels: Vec<f64>,
}

/// A factorized collocation problem, reusable for many boundary data.
pub struct Fitter {
    holes: Vec<Hole>,
    layout: Layout,
    lsq: Lsq,
    fit: Vec<Sample>,
    check: Vec<Sample>,
    check_design: DMatrix<f64>,
    tol: f64,
}

impl Fitter {
    pub fn new(holes: &[Hole], opts: &LaplaceOptions, logs: bool, levels: bool, chart: &dyn Chart) -> Result<Self> {
        let corners = chart.corners();
        let mut poles = Vec::new();
        for c in &corners {
            for d in clustered(opts.corner_poles, opts.cluster_sigma, 0.0) {
                poles.push(c * (1.0 + d));
            }
        }
        let layout = Layout {
            poles,
            outer: opts.outer_degree,
            inner: if holes.is_empty() { 0 } else { opts.hole_degree },
            holes: holes.len(),
            logs,
            levels,
        };
        let fit = Self::samples(holes, opts, chart, &corners, 0.25)?;
        let check = Self::samples(holes, opts, chart, &corners, 0.75)?;
        let cols = layout.cols();
        let design = Self::design(&layout, holes, &fit, cols);
        let check_design = Self::design(&layout, holes, &check, cols);
        let lsq = Lsq::new(design)?;
        Ok(Self { holes: holes.to_vec(), layout, lsq, fit, check, check_design, tol: opts.tol })
    }

    fn samples(holes: &[Hole], opts: &LaplaceOptions, chart: &dyn Chart, corners: &[Complex64], off: f64) -> Result<Vec<Sample>> {
        let mut out = Vec::new();
        for th in angles(opts.outer_points(), off) {
            let (z, w) = chart.outer_point(th)?;
            out.push(Sample { z, w, on: Component::Outer });
        }
        // collocation clustered like the poles, on both sides of each corner
        for c in corners {
            let th0 = c.arg();
            for d in clustered(2 * opts.corner_poles, opts.cluster_sigma, off) {
                for sign in [-1.0, 1.0] {
                    let (z, w) = chart.outer_point(th0 + sign * d)?;
                    out.push(Sample { z, w, on: Component::Outer });
                }
            }
        }
        for (index, hole) in holes.iter().enumerate() {
            for th in angles(opts.hole_points(), off) {
                let z = hole.point(th);
                let w = chart.forward(z)?;
                out.push(Sample { z, w, on: Component::Hole { index, q: Complex64::from_polar(1.0, th) } });
            }
        }
        Ok(out)
    }

    fn design(layout: &Layout, holes: &[Hole], samples: &[Sample], cols: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(samples.len(), cols);
        let mut row = vec![0.0; cols];
        for (i, s) in samples.iter().enumerate() {
            layout.row(holes, s, &mut row);
            for (j, v) in row.iter().enumerate() {
                a[(i, j)] = *v;
            }
        }
        a
    }

    pub fn fit_samples(&self) -> &[Sample] {
        &self.fit
    }

    pub fn condition(&self) -> f64 {
        self.lsq.condition
    }

    /// Fits boundary data `target(sample)`; fails if the validation
    /// residual exceeds the tolerance.
    pub fn fit<F: Fn(&Sample) -> f64>(&self, target: F) -> Result<HarmonicFunction> {
        let f = self.fit_unchecked(target);
        if !(f.residual <= self.tol) {
            return Err(Error::ResidualTooLarge { residual: f.residual, tolerance: self.tol });
        }
        Ok(f)
    }

    /// As [`Fitter::fit`] without the residual check.
    pub fn fit_unchecked<F: Fn(&Sample) -> f64>(&self, target: F) -> HarmonicFunction {
        let b = DVector::from_iterator(self.fit.len(), self.fit.iter().map(&target));
        let x = self.lsq.solve(&b);
        let fit_residual = self.lsq.residual(&x, &b);
        let bc = DVector::from_iterator(self.check.len(), self.check.iter().map(&target));
        let residual = (&self.check_design * &x - bc).amax();
        let u = self.layout.unpack(&self.holes, &x);
        HarmonicFunction {
            holes: self.holes.clone(),
            outer: u.outer,
            poles: u.poles,
            inner: u.inner,
            logs: u.logs,
            levels: u.levels,
            fit_residual,
            residual,
        }
    }
}

/// Solves the Dirichlet problem with boundary data `data(component, z)`.
pub fn solve_dirichlet<F>(holes: &[Hole], data: F, opts: &LaplaceOptions) -> Result<HarmonicFunction>
where
    F: Fn(Component, Complex64) -> f64,
{
    let fitter = Fitter::new(holes, opts, true, false, &IdentityChart)?;
    fitter.fit(|s| data(s.on, s.z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ArcSlit;

    fn small() -> LaplaceOptions {
        LaplaceOptions { outer_degree: 24, hole_degree: 24, ..Default::default() }
    }

    #[test]
    fn constant_data() {
        let holes = vec![Hole::Arc(ArcSlit::new(0.5, -1.0, 1.0))];
        let u = solve_dirichlet(&holes, |_, _| 2.5, &small()).unwrap();
        for z in [Complex64::new(0.1, 0.2), Complex64::new(-0.6, 0.3)] {
            assert!((u.value(z) - 2.5).abs() < 1e-9);
        }
        assert!(u.residual < 1e-10);
    }

    #[test]
    fn annulus_harmonic_measure() {
        let rho: f64 = 0.5;
        let holes = vec![Hole::Disk { center: Complex64::new(0.0, 0.0), radius: rho }];
        let u = solve_dirichlet(&holes, |c, _| if c == Component::Outer { 0.0 } else { 1.0 }, &small()).unwrap();
        for r in [0.55, 0.7, 0.95] {
            for th in [0.0, 2.0, -1.0] {
                let z = Complex64::from_polar(r, th);
                assert!((u.value(z) - r.ln() / rho.ln()).abs() < 1e-10);
            }
        }
        let flux = u.flux(0);
        assert!((flux - std::f64::consts::TAU / (1.0 / rho).ln()).abs() < 1e-10);
    }

    #[test]
    fn too_few_points() {
        let holes = vec![Hole::Arc(ArcSlit::new(0.5, -0.1, 0.1))];
        let opts = LaplaceOptions { oversample: 0.2, ..Default::default() };
        assert!(matches!(solve_dirichlet(&holes, |_, _| 0.0, &opts), Err(Error::IllConditioned(_))));
    }
}
