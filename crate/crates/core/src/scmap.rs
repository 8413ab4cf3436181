//! Normalized Riemann maps of the unit disk minus polyline slits.
//!
//! A hull map is stored as a composition of elementary stages. Each stage
//! removes one hyperbolic geodesic arc running from a boundary point `ξ` to
//! an interior point `p` and renormalizes so that 0 is fixed with positive
//! derivative. In the upper half-plane picture (`ξ ↦ 0`, `0 ↦ i`) the stage
//! is the classical geodesic zipper step
//!
//! ```text
//! u ↦ c u / (c − u)   (arc to vertical segment [0, ib]),
//! w ↦ sqrt(w² + b²)   (vertical segment to the real axis),
//! ```
//!
//! followed by a disk automorphism. The logarithmic mapping radius of every
//! stage is known in closed form, so `lmr` of a composition is the exact sum
//! of stage increments.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{AnnularSector, HullConfig};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which prime end of a boundary point sitting exactly at a slit base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Counterclockwise neighbour of the base.
    Ccw,
    /// Clockwise neighbour of the base.
    Cw,
}

/// Accuracy and resolution knobs for hull maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapOptions {
    /// Longest polyline piece absorbed by one stage.
    pub max_piece: f64,
    /// Tolerance on boundary samples landing on the unit circle.
    pub tol_map: f64,
    /// Boundary evaluation is refused this close to a slit base.
    pub guard: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self { max_piece: 0.01, tol_map: 1e-8, guard: 1e-6 }
    }
}

/// `C(z) = i(1 − z)/(1 + z)`: disk to upper half-plane, `1 ↦ 0`, `0 ↦ i`.
fn cayley(z: Complex64) -> Complex64 {
    I * (1.0 - z) / (1.0 + z)
}

fn cayley_inv(w: Complex64) -> Complex64 {
    (I - w) / (I + w)
}

/// One elementary slit-removal stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitStage {
    pub slit: usize,
    /// End time of the absorbed polyline piece.
    pub time: f64,
    /// Boundary point where the geodesic attaches, in stage input coordinates.
    pub base: Complex64,
    /// Real pole of the straightening Möbius map; `None` for a vertical arc.
    pub pole: Option<f64>,
    /// Height `b` of the straightened vertical slit.
    pub height: f64,
    /// Center of the renormalizing automorphism.
    pub center: Complex64,
    /// Unimodular factor of the renormalizing automorphism.
    pub rotation: Complex64,
    pub lmr_increment: f64,
}

impl SlitStage {
    /// Stage removing the geodesic from `base ∈ ∂D` to `target ∈ D`.
    pub fn new(slit: usize, time: f64, base: Complex64, target: Complex64) -> Result<Self> {
        let base = base / base.norm();
        let a = cayley(base.conj() * target);
        if !(a.im > 0.0) || !a.is_finite() {
            return Err(Error::OutsideDomain { re: target.re, im: target.im });
        }
        let a2 = a.norm_sqr();
        let pole = if a.re.abs() > 1e-15 * a.norm() { Some(a2 / a.re) } else { None };
        let height = a2 / a.im;
        let mut stage = Self {
            slit,
            time,
            base,
            pole,
            height,
            center: Complex64::new(0.0, 0.0),
            rotation: Complex64::new(1.0, 0.0),
            lmr_increment: 0.0,
        };
        let (v, dv) = stage.inner_with_derivative(Complex64::new(0.0, 0.0))?;
        let rot = Complex64::from_polar(1.0, -dv.arg());
        stage.center = v;
        stage.rotation = rot;
        stage.lmr_increment = (dv.norm() / (1.0 - v.norm_sqr())).ln();
        Ok(stage)
    }

    fn straighten(&self, u: Complex64) -> (Complex64, Complex64) {
        match self.pole {
            Some(c) => (c * u / (c - u), c * c / ((c - u) * (c - u))),
            None => (u, Complex64::new(1.0, 0.0)),
        }
    }

    fn unstraighten(&self, w: Complex64) -> Complex64 {
        match self.pole {
            Some(c) => c * w / (c + w),
            None => w,
        }
    }

    /// Map before renormalization and its derivative; refuses points on the
    /// removed arc.
    fn inner_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let q = self.base.conj() * z;
        let u = cayley(q);
        let du = -2.0 * I / ((1.0 + q) * (1.0 + q));
        let (w, dw) = self.straighten(u);
        let b = self.height;
        if w.re.abs() <= 1e-13 * b && w.im >= -1e-13 * b && w.im <= b * (1.0 + 1e-13) {
            return Err(Error::OutsideDomain { re: z.re, im: z.im });
        }
        // w·√(1 + b²/w²) is analytic off the slit [0, ib] and ≈ w at ∞
        let mut s = w * (1.0 + (b / w) * (b / w)).sqrt();
        if s.im < 0.0 {
            // rounding below the real axis
            s = s.conj();
        }
        let ds = w / s;
        let y = cayley_inv(s);
        let dy = -2.0 * I / ((I + s) * (I + s));
        Ok((self.base * y, self.base * dy * ds * dw * du * self.base.conj()))
    }

    fn normalize(&self, y: Complex64) -> (Complex64, Complex64) {
        let v = self.center;
        let den = 1.0 - v.conj() * y;
        let out = self.rotation * (y - v) / den;
        let d = self.rotation * (1.0 - v.norm_sqr()) / (den * den);
        (out, d)
    }

    /// Image of an interior point with the derivative of the stage there.
    pub fn apply_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (y, dy) = self.inner_with_derivative(z)?;
        let (out, dn) = self.normalize(y);
        Ok((out, dn * dy))
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        self.apply_with_derivative(z).map(|p| p.0)
    }

    /// Image of a point of the unit circle. A point exactly at the base is
    /// split into its two prime ends by `side`.
    pub fn apply_boundary(&self, z: Complex64, side: Side) -> Complex64 {
        let rel = self.base.conj() * z;
        let phi = rel.im.atan2(rel.re);
        let x = (0.5 * phi).tan();
        let y = match self.pole {
            Some(c) => {
                if x.is_infinite() || x.abs() > 1e300 {
                    -c
                } else {
                    c * x / (c - x)
                }
            }
            None => x,
        };
        let b = self.height;
        let s = if y == 0.0 {
            match side {
                Side::Ccw => b,
                Side::Cw => -b,
            }
        } else if y.is_infinite() {
            y
        } else {
            y.signum() * (y * y + b * b).sqrt()
        };
        let psi = 2.0 * s.atan();
        let w = self.base * Complex64::from_polar(1.0, psi);
        let (out, _) = self.normalize(w);
        out / out.norm()
    }

    /// Image of the absorbed tip: the point `ξ` before renormalization.
    pub fn tip_image(&self) -> Complex64 {
        let (out, _) = self.normalize(self.base);
        out / out.norm()
    }

    pub fn invert(&self, w: Complex64) -> Result<Complex64> {
        let rw = self.rotation.conj() * w;
        let v = self.center;
        let y = (rw + v) / (1.0 + v.conj() * rw);
        let s = cayley(self.base.conj() * y);
        let b = self.height;
        // s·√(1 − b²/s²) keeps the sign of s on the real axis off [−b, b]
        let mut x = s * (1.0 - (b / s) * (b / s)).sqrt();
        if x.im < 0.0 {
            x = x.conj();
        }
        let u = self.unstraighten(x);
        Ok(self.base * cayley_inv(u))
    }

    /// Angular distance from `z ∈ ∂D` to the base.
    fn base_distance(&self, z: Complex64) -> f64 {
        (z - self.base).norm()
    }
}

/// A hull map `g` (or `f_{k;t,τ}`) as a composition of stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalMapRep {
    pub stages: Vec<SlitStage>,
    /// Cached `ln g'(0)`, the sum of stage increments.
    pub lmr: f64,
    /// Per-slit end time used when building.
    pub truncation: Vec<f64>,
    /// Current image of each slit's tip (the base point for empty slits).
    pub tips: Vec<Complex64>,
    /// Largest deviation of a retained boundary sample from the unit circle.
    pub boundary_residual: f64,
    pub options: MapOptions,
}

/// Absorption record for one polyline piece.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    slit: usize,
    t_end: f64,
    end: Complex64,
}

fn piece_list(
    config: &HullConfig,
    truncation: &[f64],
    options: &MapOptions,
    breaks: &[(usize, f64)],
) -> Result<Vec<Piece>> {
    let mut pieces = Vec::new();
    for (k, curve) in config.curves.iter().enumerate() {
        let tk = truncation[k];
        let mut extra: Vec<f64> = breaks.iter().filter(|b| b.0 == k).map(|b| b.1).collect();
        extra.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 0..curve.len() - 1 {
            let (t0, t1) = (curve.times[i], curve.times[i + 1]);
            if t0 >= tk {
                break;
            }
            let len = (curve.points[i + 1] - curve.points[i]).norm();
            let n = ((len / options.max_piece).ceil() as usize).max(1);
            let mut cuts: Vec<f64> = (1..n).map(|j| t0 + (t1 - t0) * j as f64 / n as f64).collect();
            cuts.extend(extra.iter().copied().filter(|&b| b > t0 && b < t1));
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.push(t1);
            let mut start = t0;
            for &c in &cuts {
                if c <= start {
                    continue;
                }
                if c <= tk {
                    let end = if c == t1 { curve.points[i + 1] } else { curve.sample(c)? };
                    pieces.push(Piece { slit: k, t_end: c, end });
                    start = c;
                } else {
                    if tk - start > 1e-13 * (1.0 + tk.abs()) {
                        pieces.push(Piece { slit: k, t_end: tk, end: curve.sample(tk)? });
                    }
                    break;
                }
            }
        }
    }
    pieces.sort_by(|a, b| a.t_end.partial_cmp(&b.t_end).unwrap().then(a.slit.cmp(&b.slit)));
    Ok(pieces)
}

/// Builds the normalized map from the disk minus the truncated curves.
///
/// `truncation[k]` is the end time of curve `k`; `(t, …, t)` gives `g_t`,
/// and `(τ, …, t, …, τ)` with `t` at position `k` gives `f_{k;t,τ}`.
pub fn build_hull_map(config: &HullConfig, truncation: &[f64], options: &MapOptions) -> Result<ConformalMapRep> {
    build_hull_map_with_breaks(config, truncation, options, &[])
}

/// As [`build_hull_map`], additionally splitting pieces at the given
/// `(slit, time)` breakpoints so those curve points become stage ends.
pub fn build_hull_map_with_breaks(
    config: &HullConfig,
    truncation: &[f64],
    options: &MapOptions,
    breaks: &[(usize, f64)],
) -> Result<ConformalMapRep> {
    if !config.initial_domain.is_disk() {
        return Err(Error::InvalidDomain(
            "slit maps need a simply connected initial domain; reduce with the canonical map first".into(),
        ));
    }
    if truncation.len() != config.curves.len() {
        return Err(Error::InvalidDomain(format!(
            "{} truncation times for {} curves",
            truncation.len(),
            config.curves.len()
        )));
    }
    for (k, &t) in truncation.iter().enumerate() {
        if !(t >= 0.0 && t <= config.curves[k].end_time() * (1.0 + 1e-14)) {
            return Err(Error::TruncationOutOfRange { slit: k, t, horizon: config.curves[k].end_time() });
        }
    }
    let pieces = piece_list(config, truncation, options, breaks)?;
    let mut map = ConformalMapRep {
        stages: Vec::with_capacity(pieces.len()),
        lmr: 0.0,
        truncation: truncation.to_vec(),
        tips: config.curves.iter().map(|c| c.base() / c.base().norm()).collect(),
        boundary_residual: 0.0,
        options: *options,
    };
    for p in pieces {
        map.absorb(p.slit, p.t_end, p.end)?;
    }
    if map.boundary_residual > options.tol_map {
        return Err(Error::AccuracyNotReached { residual: map.boundary_residual, tolerance: options.tol_map });
    }
    Ok(map)
}

impl ConformalMapRep {
    pub fn identity(slits: usize) -> Self {
        Self {
            stages: Vec::new(),
            lmr: 0.0,
            truncation: vec![0.0; slits],
            tips: vec![Complex64::new(1.0, 0.0); slits],
            boundary_residual: 0.0,
            options: MapOptions::default(),
        }
    }

    /// Pushes `point` (in the original domain) forward and absorbs the
    /// geodesic from slit `slit`'s current tip image to its image.
    fn absorb(&mut self, slit: usize, time: f64, point: Complex64) -> Result<()> {
        let target = self.evaluate_interior(point)?;
        let stage = SlitStage::new(slit, time, self.tips[slit], target)?;
        for (j, tip) in self.tips.iter_mut().enumerate() {
            *tip = if j == slit { stage.tip_image() } else { stage.apply_boundary(*tip, Side::Ccw) };
        }
        let m = self.tips[slit].norm();
        self.boundary_residual = self.boundary_residual.max((m - 1.0).abs());
        self.lmr += stage.lmr_increment;
        self.stages.push(stage);
        Ok(())
    }

    fn evaluate_interior(&self, z: Complex64) -> Result<Complex64> {
        let mut w = z;
        for s in &self.stages {
            w = s.apply(w)?;
        }
        Ok(w)
    }

    /// Image of `z`; points of the unit circle are continued by reflection
    /// and refused within the guard radius of a slit base.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        if r > 1.0 + 1e-12 {
            return Err(Error::OutsideDomain { re: z.re, im: z.im });
        }
        if r >= 1.0 - 1e-14 {
            let mut w = z / r;
            for s in &self.stages {
                if s.base_distance(w) < self.options.guard {
                    return Err(Error::OutsideDomain { re: z.re, im: z.im });
                }
                w = s.apply_boundary(w, Side::Ccw);
            }
            return Ok(w);
        }
        self.evaluate_interior(z)
    }

    /// Image of `z` together with the derivative of the map at `z`.
    pub fn evaluate_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        if z.norm() >= 1.0 {
            return Err(Error::OutsideDomain { re: z.re, im: z.im });
        }
        let mut w = z;
        let mut d = Complex64::new(1.0, 0.0);
        for s in &self.stages {
            let (nw, ds) = s.apply_with_derivative(w)?;
            w = nw;
            d *= ds;
        }
        Ok((w, d))
    }

    /// Preimage of `w ∈ D`, inverting stage by stage.
    pub fn evaluate_inverse(&self, w: Complex64) -> Result<Complex64> {
        if !(w.norm() < 1.0 - 1e-14) {
            return Err(Error::NotInImage { re: w.re, im: w.im });
        }
        let mut z = w;
        for s in self.stages.iter().rev() {
            z = s.invert(z)?;
        }
        Ok(z)
    }

    /// Preimage of a point of the closed disk; points of the unit circle
    /// pull back to the boundary of the slit domain.
    pub fn evaluate_inverse_boundary(&self, w: Complex64) -> Result<Complex64> {
        let r = w.norm();
        if r < 1.0 - 1e-14 {
            return self.evaluate_inverse(w);
        }
        if r > 1.0 + 1e-12 {
            return Err(Error::NotInImage { re: w.re, im: w.im });
        }
        let mut z = w / r;
        for s in self.stages.iter().rev() {
            z = s.invert(z)?;
        }
        Ok(z)
    }

    /// Images of both prime ends at the base of every started slit.
    pub fn base_images(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for k in 0..self.tips.len() {
            let Some(first) = self.stages.iter().position(|s| s.slit == k) else { continue };
            let mut b = self.stages[first].base;
            b /= b.norm();
            out.push(self.push_boundary(b, first, Side::Cw));
            out.push(self.push_boundary(b, first, Side::Ccw));
        }
        out
    }

    /// Pushes a boundary prime end from just after stage `from` onward. The
    /// side only matters at the stage whose base it sits on.
    pub fn push_boundary(&self, point: Complex64, from: usize, side: Side) -> Complex64 {
        let mut w = point;
        for s in &self.stages[from..] {
            w = s.apply_boundary(w, side);
        }
        w
    }

    /// `ln |g'(0)|`.
    pub fn lmr(&self) -> f64 {
        self.lmr
    }

    /// Composition `self ∘ inner`.
    pub fn after(&self, inner: &ConformalMapRep) -> ConformalMapRep {
        let mut stages = inner.stages.clone();
        stages.extend(self.stages.iter().cloned());
        ConformalMapRep {
            stages,
            lmr: inner.lmr + self.lmr,
            truncation: inner.truncation.clone(),
            tips: self.tips.clone(),
            boundary_residual: self.boundary_residual.max(inner.boundary_residual),
            options: self.options,
        }
    }

    /// The map `T` with `after = T ∘ before`, when the stages of `before`
    /// are a prefix of those of `after`.
    pub fn transition(before: &ConformalMapRep, after: &ConformalMapRep) -> Result<ConformalMapRep> {
        let n = before.stages.len();
        if after.stages.len() < n || after.stages[..n] != before.stages[..] {
            return Err(Error::InvalidDomain("the earlier map is not a prefix of the later one".into()));
        }
        let stages = after.stages[n..].to_vec();
        Ok(ConformalMapRep {
            lmr: stages.iter().map(|s| s.lmr_increment).sum(),
            stages,
            truncation: after.truncation.clone(),
            tips: after.tips.clone(),
            boundary_residual: after.boundary_residual,
            options: after.options,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// `lmr` as a free function.
pub fn lmr(map: &ConformalMapRep) -> f64 {
    map.lmr()
}

/// Centered finite-difference estimate of `ln |g'(0)|`.
pub fn lmr_finite_difference(map: &ConformalMapRep, h: f64) -> Result<f64> {
    let a = map.evaluate(Complex64::new(h, 0.0))?;
    let b = map.evaluate(Complex64::new(-h, 0.0))?;
    let c = map.evaluate(Complex64::new(0.0, h))?;
    let d = map.evaluate(Complex64::new(0.0, -h))?;
    let deriv = 0.5 * ((a - b) / (2.0 * h) + (c - d) / (2.0 * h * I));
    Ok(deriv.norm().ln())
}

/// Driving value `ξ_k(t, τ)`: the image of slit `k`'s tip.
pub fn tip_image(map: &ConformalMapRep, config: &HullConfig, k: usize) -> Result<Complex64> {
    if k >= config.curves.len() || k >= map.tips.len() {
        return Err(Error::InvalidDomain(format!("no slit {k}")));
    }
    let tip = map.tips[k];
    let dev = (tip.norm() - 1.0).abs();
    if dev > map.options.tol_map {
        return Err(Error::AccuracyNotReached { residual: dev, tolerance: map.options.tol_map });
    }
    Ok(tip)
}

/// Outcome of the two-sided power bound `|z|^{1+δ} ≤ |f(z)| ≤ |z|^{1−δ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBound {
    /// `max |d/dz log(f(z)/z)|` over the fitting grid.
    pub delta: f64,
    pub checked: usize,
    pub violations: usize,
    /// Smallest slack of either inequality in log form.
    pub margin: f64,
}

/// Fits `δ` on an `nr × nt` grid of `sector` and checks the bound at
/// `samples` (points outside the sector are skipped).
pub fn power_bound(map: &ConformalMapRep, sector: &AnnularSector, nr: usize, nt: usize, samples: &[Complex64]) -> Result<PowerBound> {
    let mut delta: f64 = 0.0;
    for z in sector.grid(nr, nt) {
        // the derivative is taken just inside the circle
        let z = if z.norm() >= 1.0 - 1e-12 { z * (1.0 - 1e-9) } else { z };
        let (w, dw) = map.evaluate_with_derivative(z)?;
        delta = delta.max((dw / w - z.inv()).norm());
    }
    let mut out = PowerBound { delta, checked: 0, violations: 0, margin: f64::INFINITY };
    for &z in samples.iter().filter(|z| sector.contains(**z)) {
        let lz = z.norm().ln();
        let lf = map.evaluate(z)?.norm().ln();
        // both sides vanish on the circle; allow rounding there
        let slack = (lf - (1.0 + delta) * lz).min((1.0 - delta) * lz - lf);
        out.checked += 1;
        out.margin = out.margin.min(slack);
        if slack < -1e-12 {
            out.violations += 1;
        }
    }
    Ok(out)
}

/// Which image set a [`BoundaryArc`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcKind {
    /// Interior image `S_{k;t−,t+,τ}` of the not yet absorbed curve piece.
    Slit,
    /// Boundary image `s_{k;t−,t+,τ}` of the absorbed piece (both sides).
    Circle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub kind: ArcKind,
    pub samples: Vec<Complex64>,
}

impl BoundaryArc {
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.samples.iter().enumerate() {
            for b in &self.samples[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }
}

/// Images of `γ_k([t−, t+])`.
///
/// When slit `k` of `map` ends at `t−` this is the interior set `S` (tip
/// image first). When it ends at `t+` it is the two-sided boundary set `s`,
/// ordered clockwise-side knots, tip image, counterclockwise-side knots. The
/// map is rebuilt with a breakpoint at `t−` if that time is not a stage end.
pub fn boundary_arc_image(
    map: &ConformalMapRep,
    config: &HullConfig,
    k: usize,
    t_minus: f64,
    t_plus: f64,
) -> Result<BoundaryArc> {
    if !(t_minus <= t_plus) {
        return Err(Error::OutOfRange { t: t_minus, lo: 0.0, hi: t_plus });
    }
    let curve = &config.curves[k];
    let tk = map.truncation[k];
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-13 * (1.0 + b.abs());
    if close(tk, t_minus) {
        let mut samples = vec![tip_image(map, config, k)?];
        let mut times: Vec<f64> = curve.times.iter().copied().filter(|&t| t > t_minus && t < t_plus).collect();
        if t_plus > t_minus {
            times.push(t_plus);
        }
        for t in times {
            samples.push(map.evaluate(curve.sample(t)?)?);
        }
        return Ok(BoundaryArc { kind: ArcKind::Slit, samples });
    }
    if !close(tk, t_plus) {
        return Err(Error::TruncationOutOfRange { slit: k, t: tk, horizon: t_plus });
    }
    if close(t_minus, t_plus) {
        return Ok(BoundaryArc { kind: ArcKind::Circle, samples: vec![tip_image(map, config, k)?] });
    }
    let needs_break = t_minus > 0.0 && !map.stages.iter().any(|s| s.slit == k && close(s.time, t_minus));
    let rebuilt;
    let map = if needs_break {
        rebuilt = build_hull_map_with_breaks(config, &map.truncation, &map.options, &[(k, t_minus)])?;
        &rebuilt
    } else {
        map
    };
    // prime ends: stage ends of slit k in [t−, t+), plus the base when t− = 0
    let mut starts: Vec<(Complex64, usize)> = Vec::new();
    if t_minus == 0.0 {
        let first = map.stages.iter().position(|s| s.slit == k).unwrap_or(map.stages.len());
        let mut b = curve.base() / curve.base().norm();
        for s in &map.stages[..first] {
            b = s.apply_boundary(b, Side::Ccw);
        }
        starts.push((b, first));
    }
    for (i, s) in map.stages.iter().enumerate() {
        if s.slit == k && s.time >= t_minus * (1.0 - 1e-13) && s.time < t_plus && !close(s.time, t_plus) {
            starts.push((s.tip_image(), i + 1));
        }
    }
    let cw: Vec<Complex64> = starts.iter().map(|&(p, i)| map.push_boundary(p, i, Side::Cw)).collect();
    let ccw: Vec<Complex64> = starts.iter().map(|&(p, i)| map.push_boundary(p, i, Side::Ccw)).collect();
    let mut samples = cw;
    samples.push(tip_image(map, config, k)?);
    samples.extend(ccw.into_iter().rev());
    Ok(BoundaryArc { kind: ArcKind::Circle, samples })
}

/// Closed-form `lmr` of the disk minus the radial slit `[r, 1]`.
pub fn radial_slit_lmr(r: f64) -> f64 {
    ((1.0 + r) * (1.0 + r) / (4.0 * r)).ln()
}

/// Tip modulus `r` with `4r/(1 + r)² = e^{−t}`.
pub fn radial_tip_modulus(t: f64) -> f64 {
    let e = (-t).exp();
    // r² + (2 − 4/e) r + 1 = 0, smaller root
    let b = 2.0 - 4.0 / e;
    let disc = (b * b - 4.0).max(0.0).sqrt();
    2.0 / (-b + disc)
}

/// Wraps an angle difference into `(−π, π]`.
pub fn angle_gap(a: Complex64, b: Complex64) -> f64 {
    let d = (a * b.conj()).arg();
    if d <= -PI {
        d + 2.0 * PI
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SlitCurve;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_radial(theta: f64, tip: f64) -> HullConfig {
        HullConfig::new(vec![SlitCurve::radial(0, theta, tip, 8, 1.0)], 1.0)
    }

    fn curved_pair() -> HullConfig {
        let a = SlitCurve::new(
            0,
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![c(1.0, 0.0), c(0.85, 0.03), c(0.72, 0.09), c(0.62, 0.17), c(0.55, 0.27)],
        );
        let b = SlitCurve::new(
            1,
            vec![0.0, 0.5, 1.0],
            vec![Complex64::from_polar(1.0, 2.5), Complex64::from_polar(0.8, 2.6), Complex64::from_polar(0.62, 2.5)],
        );
        HullConfig::new(vec![a, b], 1.0).validate().unwrap()
    }

    #[test]
    fn empty_truncation_is_identity() {
        let cfg = one_radial(0.3, 0.5);
        let m = build_hull_map(&cfg, &[0.0], &MapOptions::default()).unwrap();
        assert_eq!(m.lmr(), 0.0);
        let z = c(0.3, 0.4);
        assert_eq!(m.evaluate(z).unwrap(), z);
        assert_eq!(m.evaluate_inverse(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(tip_image(&m, &cfg, 0).unwrap(), Complex64::from_polar(1.0, 0.3));
    }

    #[test]
    fn radial_slit_lmr_matches_closed_form() {
        let r = 1.0 / 3.0;
        for theta in [0.0, 1.1, -2.7] {
            let m = build_hull_map(&one_radial(theta, r), &[1.0], &MapOptions::default()).unwrap();
            assert!((m.lmr() - (4.0f64 / 3.0).ln()).abs() < 1e-12, "{}", m.lmr());
            assert!((m.lmr() - radial_slit_lmr(r)).abs() < 1e-12);
            let tip = tip_image(&m, &one_radial(theta, r), 0).unwrap();
            assert!((tip - Complex64::from_polar(1.0, theta)).norm() < 1e-12);
        }
        assert!((radial_tip_modulus((4.0f64 / 3.0).ln()) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn truncation_out_of_range() {
        let cfg = one_radial(0.0, 0.5);
        assert!(matches!(
            build_hull_map(&cfg, &[1.5], &MapOptions::default()),
            Err(Error::TruncationOutOfRange { .. })
        ));
    }

    #[test]
    fn maps_fix_origin_with_positive_derivative() {
        let cfg = curved_pair();
        let m = build_hull_map(&cfg, &[1.0, 0.7], &MapOptions::default()).unwrap();
        let (w, d) = m.evaluate_with_derivative(c(0.0, 0.0)).unwrap();
        assert!(w.norm() < 1e-14);
        assert!(d.im.abs() < 1e-12 && d.re > 0.0);
        assert!((d.re.ln() - m.lmr()).abs() < 1e-12);
        let fd = lmr_finite_difference(&m, 1e-4).unwrap();
        assert!((fd - m.lmr()).abs() < 1e-6, "fd {fd} vs {}", m.lmr());
        let sum: f64 = m.stages.iter().map(|s| s.lmr_increment).sum();
        assert!((sum - m.lmr()).abs() < 1e-14);
    }

    #[test]
    fn round_trip_and_inverse_derivative() {
        let cfg = curved_pair();
        let m = build_hull_map(&cfg, &[0.8, 1.0], &MapOptions::default()).unwrap();
        for z in [c(0.1, 0.2), c(-0.4, -0.3), c(0.5, -0.5), c(0.0, 0.9)] {
            let w = m.evaluate(z).unwrap();
            assert!(w.norm() <= 1.0 + 1e-8);
            let back = m.evaluate_inverse(w).unwrap();
            assert!((back - z).norm() < 1e-7, "{z} -> {w} -> {back}");
        }
        let h = 1e-5;
        let a = m.evaluate_inverse(c(h, 0.0)).unwrap();
        let b = m.evaluate_inverse(c(-h, 0.0)).unwrap();
        let dinv = (a - b).norm() / (2.0 * h);
        assert!((dinv - (-m.lmr()).exp()).abs() < 1e-7);
        assert!(matches!(m.evaluate_inverse(m.tips[0]), Err(Error::NotInImage { .. })));
    }

    #[test]
    fn conjugate_symmetry() {
        let cfg = HullConfig::new(vec![SlitCurve::radial(0, 0.0, 0.4, 5, 1.0)], 1.0);
        let m = build_hull_map(&cfg, &[0.6], &MapOptions::default()).unwrap();
        for z in [c(0.2, 0.3), c(-0.5, 0.1)] {
            let a = m.evaluate(z.conj()).unwrap();
            let b = m.evaluate(z).unwrap().conj();
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn point_on_slit_is_outside_domain() {
        let cfg = one_radial(0.0, 0.5);
        let m = build_hull_map(&cfg, &[1.0], &MapOptions::default()).unwrap();
        assert!(matches!(m.evaluate(c(0.7, 0.0)), Err(Error::OutsideDomain { .. })));
        assert!(matches!(m.evaluate(c(1.0, 0.0)), Err(Error::OutsideDomain { .. })));
        assert!(m.evaluate(c(-1.0, 0.0)).is_ok());
    }

    #[test]
    fn composition_adds_lmr() {
        let cfg = curved_pair();
        let a = build_hull_map(&cfg, &[0.5, 0.5], &MapOptions::default()).unwrap();
        let b = build_hull_map(&one_radial(1.0, 0.7), &[1.0], &MapOptions::default()).unwrap();
        let ab = b.after(&a);
        assert!((ab.lmr() - a.lmr() - b.lmr()).abs() < 1e-15);
        let fd = lmr_finite_difference(&ab, 1e-4).unwrap();
        assert!((fd - ab.lmr()).abs() < 1e-6);
    }

    #[test]
    fn tip_images_of_conjugate_pair() {
        let a = SlitCurve::new(0, vec![0.0, 0.5, 1.0], vec![
            Complex64::from_polar(1.0, 1.0), c(0.3, 0.6), c(0.35, 0.3)]);
        let b = a.conjugated();
        let b = SlitCurve { slit_index: 1, ..b };
        let cfg = HullConfig::new(vec![a, b], 1.0).validate().unwrap();
        let m = build_hull_map(&cfg, &[1.0, 1.0], &MapOptions::default()).unwrap();
        let (x, y) = (tip_image(&m, &cfg, 0).unwrap(), tip_image(&m, &cfg, 1).unwrap());
        assert!((x - y.conj()).norm() < 1e-6, "{x} {y}");
    }

    #[test]
    fn boundary_arcs() {
        let cfg = curved_pair();
        let opts = MapOptions::default();
        let tau = 0.6;
        // S variant: slit 0 truncated at t−
        let m_lo = build_hull_map(&cfg, &[0.3, tau], &opts).unwrap();
        let s_arc = boundary_arc_image(&m_lo, &cfg, 0, 0.3, 0.6).unwrap();
        assert_eq!(s_arc.kind, ArcKind::Slit);
        assert_eq!(s_arc.samples[0], m_lo.tips[0]);
        assert!(s_arc.samples[1..].iter().all(|z| z.norm() < 1.0));
        // s variant: slit 0 truncated at t+
        let m_hi = build_hull_map(&cfg, &[0.6, tau], &opts).unwrap();
        let arc = boundary_arc_image(&m_hi, &cfg, 0, 0.3, 0.6).unwrap();
        assert_eq!(arc.kind, ArcKind::Circle);
        assert!(arc.samples.iter().all(|z| (z.norm() - 1.0).abs() < 1e-10));
        assert!(arc.samples.contains(&m_hi.tips[0]));
        // degenerate interval
        let one = boundary_arc_image(&m_hi, &cfg, 0, 0.6, 0.6).unwrap();
        assert_eq!(one.samples, vec![m_hi.tips[0]]);
        // shrinking intervals
        let mut prev = f64::INFINITY;
        for d in [0.2, 0.1, 0.05, 0.025] {
            let arc = boundary_arc_image(&m_hi, &cfg, 0, 0.6 - d, 0.6).unwrap();
            let dia = arc.diameter();
            assert!(dia < prev, "{dia} !< {prev}");
            prev = dia;
        }
        // square-root scaling near the tip
        assert!(prev < 0.25);
    }

    #[test]
    fn map_dump_round_trips() {
        let cfg = curved_pair();
        let m = build_hull_map(&cfg, &[0.4, 0.9], &MapOptions::default()).unwrap();
        let back = ConformalMapRep::from_json(&m.to_json()).unwrap();
        let z = c(-0.2, 0.35);
        assert_eq!(m.evaluate(z).unwrap(), back.evaluate(z).unwrap());
    }

    #[test]
    fn boundary_preimages_map_back() {
        let cfg = curved_pair();
        let m = build_hull_map(&cfg, &[1.0, 1.0], &MapOptions::default()).unwrap();
        for i in 0..400 {
            let w = Complex64::from_polar(1.0, -3.1 + 6.2 * i as f64 / 400.0);
            let z = m.evaluate_inverse_boundary(w).unwrap();
            if z.norm() > 1.0 - 1e-9 {
                assert!((m.evaluate(z).unwrap() - w).norm() < 1e-8, "{w} {z}");
            }
        }
    }

    #[test]
    fn transition_power_bound() {
        let cfg = curved_pair();
        let g0 = build_hull_map(&cfg, &[0.5, 0.5], &MapOptions::default()).unwrap();
        let mut deltas = Vec::new();
        for t in [0.75, 0.625] {
            let g1 = build_hull_map(&cfg, &[t, 0.5], &MapOptions::default()).unwrap();
            let tr = ConformalMapRep::transition(&g0, &g1).unwrap();
            assert!((tr.lmr() + g0.lmr() - g1.lmr()).abs() < 1e-12);
            let xi = g0.tips[0].arg();
            let sector = AnnularSector::new(0.5, xi + 0.6, xi + 2.0).unwrap();
            let samples: Vec<Complex64> = sector.grid(23, 31).into_iter().map(|z| z * (1.0 - 1e-3)).collect();
            let pb = power_bound(&tr, &sector, 40, 60, &samples).unwrap();
            assert!(pb.checked > 500 && pb.violations == 0, "{pb:?}");
            deltas.push(pb.delta);
        }
        assert!(deltas[1] < deltas[0]);
        let other = build_hull_map(&cfg, &[0.25, 0.75], &MapOptions::default()).unwrap();
        assert!(ConformalMapRep::transition(&g0, &other).is_err());
    }
}
