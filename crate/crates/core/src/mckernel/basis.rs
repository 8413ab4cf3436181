//! Boundary components, local coordinates and the least-squares engine.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{ArcSlit, CircularSlitDisk};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// An interior boundary component of a domain inside the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hole {
    /// Circular arc slit centered at the origin.
    Arc(ArcSlit),
    /// Closed disk `|z − center| ≤ radius`.
    Disk { center: Complex64, radius: f64 },
}

impl Hole {
    /// A point on or inside the hole.
    pub fn center(&self) -> Complex64 {
        match self {
            Hole::Arc(a) => a.midpoint(),
            Hole::Disk { center, .. } => *center,
        }
    }

    fn arc_frame(a: &ArcSlit) -> (Complex64, f64) {
        let mid = 0.5 * (a.alpha + a.beta);
        let half = 0.5 * (a.beta - a.alpha);
        (Complex64::from_polar(a.radius, mid), (0.5 * half).tan())
    }

    /// Local exterior coordinate `q` with `|q| ≥ 1` off the hole and
    /// `|q| = 1` on it. For an arc this is the inverse Joukowski variable,
    /// which straightens the square-root behavior at the tips.
    pub fn local(&self, z: Complex64) -> Complex64 {
        match self {
            Hole::Disk { center, radius } => (z - center) / *radius,
            Hole::Arc(a) => {
                let (frame, scale) = Self::arc_frame(a);
                let u = z / frame;
                let s = I * (1.0 - u) / (1.0 + u) / scale;
                let q = s + (s - 1.0).sqrt() * (s + 1.0).sqrt();
                if q.is_finite() {
                    q
                } else {
                    Complex64::new(f64::INFINITY, 0.0)
                }
            }
        }
    }

    /// Boundary point with local coordinate `q = e^{iθ}`. For arcs the two
    /// signs of `θ` are the two sides of the slit.
    pub fn point(&self, theta: f64) -> Complex64 {
        match self {
            Hole::Disk { center, radius } => center + Complex64::from_polar(*radius, theta),
            Hole::Arc(a) => {
                let (frame, scale) = Self::arc_frame(a);
                let x = theta.cos() * scale;
                frame * (I - x) / (I + x)
            }
        }
    }

    /// Harmonic term with unit flux `2π` around the hole, smooth up to it.
    /// For an arc it is `ln |q(z)(z − p)|` with `p` the point sent to
    /// `q = ∞`, which removes the pole of `q` from the domain.
    pub fn log_term(&self, z: Complex64, q: Complex64) -> f64 {
        match self {
            Hole::Disk { center, .. } => (z - center).norm().ln(),
            Hole::Arc(a) => {
                let (frame, _) = Self::arc_frame(a);
                q.norm().ln() + (z + frame).norm().ln()
            }
        }
    }

    /// Distance from `z` to the hole.
    pub fn distance(&self, z: Complex64) -> f64 {
        match self {
            Hole::Disk { center, radius } => ((z - center).norm() - radius).max(0.0),
            Hole::Arc(a) => a.distance(z),
        }
    }
}

/// Domain: unit disk minus holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct LaplaceDomain {
    pub holes: Vec<Hole>,
}

impl LaplaceDomain {
    pub fn new(holes: Vec<Hole>) -> Self {
        Self { holes }
    }

    pub fn connectivity(&self) -> usize {
        self.holes.len() + 1
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() < 1.0 && self.holes.iter().all(|h| h.distance(z) > 0.0)
    }
}

impl From<&CircularSlitDisk> for LaplaceDomain {
    fn from(d: &CircularSlitDisk) -> Self {
        Self { holes: d.slits.iter().cloned().map(Hole::Arc).collect() }
    }
}

/// Basis sizes and sampling for least-squares fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceOptions {
    /// Highest power of the outer polynomial part.
    pub outer_degree: usize,
    /// Highest inverse power of each hole's local coordinate.
    pub hole_degree: usize,
    /// Collocation points per real unknown on each component.
    pub oversample: f64,
    /// Accepted boundary residual on the validation grid.
    pub tol: f64,
    /// Poles clustered at each corner singularity of the outer chart.
    pub corner_poles: usize,
    /// Clustering exponent: pole distances are `e^{−σ(√N − √j)}`.
    pub cluster_sigma: f64,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        Self { outer_degree: 48, hole_degree: 32, oversample: 3.0, tol: 1e-6, corner_poles: 48, cluster_sigma: 4.0 }
    }
}

/// Exponentially clustered distances `e^{−σ(√n − √j)}`, `j = 1..n`; the
/// `shift` moves `j` by a fraction for interlaced validation samples.
pub fn clustered(n: usize, sigma: f64, shift: f64) -> impl Iterator<Item = f64> {
    let root = (n as f64).sqrt();
    (1..=n).map(move |j| (-sigma * (root - (j as f64 - shift).max(0.0).sqrt())).exp())
}

impl LaplaceOptions {
    pub fn outer_points(&self) -> usize {
        ((self.oversample * (2 * self.outer_degree + 1) as f64).ceil() as usize).max(1)
    }

    pub fn hole_points(&self) -> usize {
        ((self.oversample * (2 * self.hole_degree + 2) as f64).ceil() as usize).max(1)
    }
}

/// Equally spaced angles offset by a fraction of the spacing.
pub fn angles(n: usize, off: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| std::f64::consts::TAU * (i as f64 + off) / n as f64 - std::f64::consts::PI)
}

/// Sum of `c_n q^{−n}`, `n ≥ 1`, by Horner's rule.
pub fn inverse_series(coeffs: &[Complex64], q: Complex64) -> Complex64 {
    if !q.is_finite() {
        return Complex64::new(0.0, 0.0);
    }
    let r = q.inv();
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = (acc + c) * r;
    }
    acc
}

/// Sum of `c_n w^n`, `n ≥ 0`.
pub fn power_series(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * w + c;
    }
    acc
}

/// Column-scaled pseudo-inverse of a tall design matrix.
#[derive(Debug, Clone)]
pub struct Lsq {
    pinv: DMatrix<f64>,
    scale: DVector<f64>,
    design: DMatrix<f64>,
    pub condition: f64,
}

impl Lsq {
    pub fn new(mut a: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = a.shape();
        if rows < cols {
            return Err(Error::IllConditioned(format!("{rows} collocation rows for {cols} unknowns")));
        }
        let design = a.clone();
        let mut scale = DVector::zeros(cols);
        for (j, mut col) in a.column_iter_mut().enumerate() {
            let n = col.norm();
            let s = if n > 0.0 { 1.0 / n } else { 1.0 };
            col *= s;
            scale[j] = s;
        }
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(smax > 0.0) {
            return Err(Error::IllConditioned(format!("design condition number {condition:.3e}")));
        }
        let pinv = svd.pseudo_inverse(smax * 1e-15).map_err(|e| Error::IllConditioned(e.to_string()))?;
        Ok(Self { pinv, scale, design, condition })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let x = &self.pinv * b;
        x.component_mul(&self.scale)
    }

    /// Largest row mismatch `|A x − b|`.
    pub fn residual(&self, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (&self.design * x - b).amax()
    }
}
