//! Geometric and temporal data shared by every other module: slit curves,
//! hull configurations, circularly slit disks, partitions, driving data and
//! annular sectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default clearance used by the disjointness checks.
pub const DEFAULT_CLEARANCE: f64 = 1e-12;

/// Tolerance on `|γ_k(0)| = 1`.
pub const BASE_TOLERANCE: f64 = 1e-9;

/// A time-parametrized polyline growing from the unit circle into the disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitCurve {
    pub slit_index: usize,
    pub times: Vec<f64>,
    pub points: Vec<Complex64>,
}

impl SlitCurve {
    pub fn new(slit_index: usize, times: Vec<f64>, points: Vec<Complex64>) -> Self {
        assert_eq!(times.len(), points.len(), "times and points must have equal length");
        Self { slit_index, times, points }
    }

    /// Straight radial slit at angle `theta` from the circle down to modulus
    /// `tip`, with `n` equal segments over `[0, horizon]`.
    pub fn radial(slit_index: usize, theta: f64, tip: f64, n: usize, horizon: f64) -> Self {
        let dir = Complex64::from_polar(1.0, theta);
        let n = n.max(1);
        let times = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
        let points = (0..=n)
            .map(|i| dir * (1.0 - (1.0 - tip) * i as f64 / n as f64))
            .collect();
        Self { slit_index, times, points }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("nonempty curve")
    }

    pub fn base(&self) -> Complex64 {
        self.points[0]
    }

    /// Piecewise-linear interpolant of the curve at time `t`; exact at knots.
    pub fn sample(&self, t: f64) -> Result<Complex64> {
        let (lo, hi) = (self.start_time(), self.end_time());
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let i = self.segment_index(t);
        if i + 1 == self.times.len() {
            return Ok(self.points[i]);
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let s = (t - t0) / (t1 - t0);
        Ok(self.points[i] + (self.points[i + 1] - self.points[i]) * s)
    }

    /// Index `i` of the segment `[t_i, t_{i+1}]` containing `t` (the last
    /// knot index when `t` equals the end time).
    pub fn segment_index(&self, t: f64) -> usize {
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    /// Largest speed `|Δz| / Δt` over the segments.
    pub fn max_slope(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.points.windows(2))
            .map(|(t, p)| (p[1] - p[0]).norm() / (t[1] - t[0]))
            .fold(0.0, f64::max)
    }

    pub fn rotated(&self, alpha: f64) -> Self {
        let r = Complex64::from_polar(1.0, alpha);
        Self {
            slit_index: self.slit_index,
            times: self.times.clone(),
            points: self.points.iter().map(|p| p * r).collect(),
        }
    }

    pub fn conjugated(&self) -> Self {
        Self {
            slit_index: self.slit_index,
            times: self.times.clone(),
            points: self.points.iter().map(|p| p.conj()).collect(),
        }
    }

    /// Insert the interpolated point at every time of `extra` that is not
    /// already a knot. Geometry is unchanged.
    pub fn with_extra_knots(&self, extra: &[f64]) -> Result<Self> {
        let mut times: Vec<f64> = self.times.clone();
        for &t in extra {
            if t > self.start_time() && t < self.end_time() {
                times.push(t);
            }
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        let points = times.iter().map(|&t| self.sample(t)).collect::<Result<Vec<_>>>()?;
        Ok(Self { slit_index: self.slit_index, times, points })
    }
}

/// One concentric circular arc slit `{ r e^{iθ} : θ ∈ [α, β] }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSlit {
    pub radius: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ArcSlit {
    pub fn new(radius: f64, alpha: f64, beta: f64) -> Self {
        Self { radius, alpha, beta }
    }

    pub fn start(&self) -> Complex64 {
        Complex64::from_polar(self.radius, self.alpha)
    }

    pub fn end(&self) -> Complex64 {
        Complex64::from_polar(self.radius, self.beta)
    }

    pub fn midpoint(&self) -> Complex64 {
        Complex64::from_polar(self.radius, 0.5 * (self.alpha + self.beta))
    }

    pub fn point(&self, s: f64) -> Complex64 {
        Complex64::from_polar(self.radius, self.alpha + s * (self.beta - self.alpha))
    }

    /// Whether angle `theta` lies on the arc.
    pub fn covers_angle(&self, theta: f64) -> bool {
        let d = (theta - self.alpha).rem_euclid(2.0 * PI);
        d <= self.beta - self.alpha
    }

    /// Euclidean distance from `z` to the arc.
    pub fn distance(&self, z: Complex64) -> f64 {
        if self.covers_angle(z.arg()) {
            (z.norm() - self.radius).abs()
        } else {
            (z - self.start()).norm().min((z - self.end()).norm())
        }
    }
}

/// Unit disk minus finitely many concentric circular arc slits. An empty
/// slit list is the unit disk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CircularSlitDisk {
    #[serde(default)]
    pub slits: Vec<ArcSlit>,
}

impl CircularSlitDisk {
    pub fn disk() -> Self {
        Self { slits: Vec::new() }
    }

    pub fn new(slits: Vec<ArcSlit>) -> Self {
        Self { slits }
    }

    pub fn is_disk(&self) -> bool {
        self.slits.is_empty()
    }

    /// Connectivity `n` (the unit circle plus one per slit).
    pub fn connectivity(&self) -> usize {
        self.slits.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        for (j, s) in self.slits.iter().enumerate() {
            if !(s.radius > 0.0 && s.radius < 1.0) {
                return Err(Error::InvalidDomain(format!("slit {j}: radius {} not in (0,1)", s.radius)));
            }
            let width = s.beta - s.alpha;
            if !(width > 0.0 && width < 2.0 * PI) {
                return Err(Error::InvalidDomain(format!("slit {j}: angular width {width} not in (0, 2π)")));
            }
        }
        for i in 0..self.slits.len() {
            for j in i + 1..self.slits.len() {
                let (a, b) = (&self.slits[i], &self.slits[j]);
                if (a.radius - b.radius).abs() < DEFAULT_CLEARANCE
                    && (a.covers_angle(b.alpha) || a.covers_angle(b.beta) || b.covers_angle(a.alpha))
                {
                    return Err(Error::InvalidDomain(format!("slits {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    /// Distance from `z` to the nearest interior slit (infinite for the disk).
    pub fn distance_to_slits(&self, z: Complex64) -> f64 {
        self.slits.iter().map(|s| s.distance(z)).fold(f64::INFINITY, f64::min)
    }

    pub fn rotated(&self, alpha: f64) -> Self {
        Self {
            slits: self
                .slits
                .iter()
                .map(|s| ArcSlit::new(s.radius, s.alpha + alpha, s.beta + alpha))
                .collect(),
        }
    }
}

/// The initial domain together with `m` slit curves on a common horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullConfig {
    pub curves: Vec<SlitCurve>,
    #[serde(default)]
    pub initial_domain: CircularSlitDisk,
    pub horizon: f64,
}

impl HullConfig {
    pub fn new(curves: Vec<SlitCurve>, horizon: f64) -> Self {
        Self { curves, initial_domain: CircularSlitDisk::disk(), horizon }
    }

    pub fn with_domain(mut self, domain: CircularSlitDisk) -> Self {
        self.initial_domain = domain;
        self
    }

    pub fn slit_count(&self) -> usize {
        self.curves.len()
    }

    /// Checks every invariant of the curves and the initial domain and
    /// returns the config unchanged when they hold.
    pub fn validate(self) -> Result<Self> {
        self.validate_with_clearance(DEFAULT_CLEARANCE)
    }

    pub fn validate_with_clearance(self, clearance: f64) -> Result<Self> {
        self.initial_domain.validate()?;
        for (k, c) in self.curves.iter().enumerate() {
            validate_curve(k, c, self.horizon, clearance)?;
            for (seg, w) in c.points.windows(2).enumerate() {
                for (j, slit) in self.initial_domain.slits.iter().enumerate() {
                    if segment_arc_distance(w[0], w[1], slit) <= clearance {
                        return Err(Error::HitsDomainSlit { curve: k, segment: seg, slit: j });
                    }
                }
            }
        }
        for a in 0..self.curves.len() {
            for b in a + 1..self.curves.len() {
                let (ca, cb) = (&self.curves[a], &self.curves[b]);
                if (ca.base() - cb.base()).norm() <= clearance {
                    return Err(Error::CurvesIntersect { first: a, first_segment: 0, second: b, second_segment: 0 });
                }
                for (i, wa) in ca.points.windows(2).enumerate() {
                    for (j, wb) in cb.points.windows(2).enumerate() {
                        if segment_distance(wa[0], wa[1], wb[0], wb[1]) <= clearance {
                            return Err(Error::CurvesIntersect {
                                first: a,
                                first_segment: i,
                                second: b,
                                second_segment: j,
                            });
                        }
                    }
                }
            }
        }
        Ok(self)
    }

    pub fn rotated(&self, alpha: f64) -> Self {
        Self {
            curves: self.curves.iter().map(|c| c.rotated(alpha)).collect(),
            initial_domain: self.initial_domain.rotated(alpha),
            horizon: self.horizon,
        }
    }

    /// Sorted union of all knot times of all curves.
    pub fn knot_times(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.curves.iter().flat_map(|c| c.times.iter().copied()).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        all
    }
}

fn validate_curve(k: usize, c: &SlitCurve, horizon: f64, clearance: f64) -> Result<()> {
    if c.times.len() != c.points.len() || c.is_empty() {
        return Err(Error::NonMonotoneTimes { curve: k, sample: 0 });
    }
    if c.times[0] != 0.0 {
        return Err(Error::NonMonotoneTimes { curve: k, sample: 0 });
    }
    for (i, w) in c.times.windows(2).enumerate() {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::NonMonotoneTimes { curve: k, sample: i + 1 });
        }
    }
    if (c.end_time() - horizon).abs() > 1e-12 * (1.0 + horizon.abs()) {
        return Err(Error::HorizonMismatch { curve: k, last: c.end_time(), horizon });
    }
    let m0 = c.points[0].norm();
    if (m0 - 1.0).abs() > BASE_TOLERANCE {
        return Err(Error::BaseNotOnCircle { curve: k, modulus: m0 });
    }
    for (i, p) in c.points.iter().enumerate().skip(1) {
        let m = p.norm();
        if m <= clearance {
            return Err(Error::OriginHit { curve: k, sample: i });
        }
        if m >= 1.0 {
            return Err(Error::OutsideDisk { curve: k, sample: i, modulus: m });
        }
    }
    for (i, w) in c.points.windows(2).enumerate() {
        if point_segment_distance(Complex64::new(0.0, 0.0), w[0], w[1]) <= clearance {
            return Err(Error::OriginHit { curve: k, sample: i });
        }
    }
    let n = c.points.len();
    for i in 0..n.saturating_sub(1) {
        for j in i + 1..n - 1 {
            let (a0, a1, b0, b1) = (c.points[i], c.points[i + 1], c.points[j], c.points[j + 1]);
            if j == i + 1 {
                // adjacent segments share a knot; they may only meet there
                let back = point_segment_distance(b1, a0, a1).min(point_segment_distance(a0, b0, b1));
                if back <= clearance {
                    return Err(Error::SelfIntersection { curve: k, first: i, second: j });
                }
            } else if segment_distance(a0, a1, b0, b1) <= clearance {
                return Err(Error::SelfIntersection { curve: k, first: i, second: j });
            }
        }
    }
    Ok(())
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + d * s)).norm()
}

/// Distance between two closed segments (zero when they cross).
pub(crate) fn segment_distance(a0: Complex64, a1: Complex64, b0: Complex64, b1: Complex64) -> f64 {
    let d1 = cross(a1 - a0, b0 - a0);
    let d2 = cross(a1 - a0, b1 - a0);
    let d3 = cross(b1 - b0, a0 - b0);
    let d4 = cross(b1 - b0, a1 - b0);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .min(point_segment_distance(a1, b0, b1))
        .min(point_segment_distance(b0, a0, a1))
        .min(point_segment_distance(b1, a0, a1))
}

fn segment_arc_distance(a: Complex64, b: Complex64, arc: &ArcSlit) -> f64 {
    // dense sampling of the arc is adequate at the clearance scales used here
    let n = 256;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let p = arc.point(i as f64 / (n - 1) as f64);
        best = best.min(point_segment_distance(p, a, b));
    }
    let ra = a.norm();
    let rb = b.norm();
    if (ra - arc.radius) * (rb - arc.radius) <= 0.0 {
        // segment crosses the circle of the arc: check the crossing angle
        let s = if (rb - ra).abs() > 0.0 { (arc.radius - ra) / (rb - ra) } else { 0.0 };
        let p = a + (b - a) * s.clamp(0.0, 1.0);
        if arc.covers_angle(p.arg()) {
            best = best.min((p.norm() - arc.radius).abs());
        }
    }
    best
}

/// Strictly increasing knots `t_0 < … < t_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    knots: Vec<f64>,
}

impl Partition {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::DegeneratePartition);
        }
        Ok(Self { knots })
    }

    /// `n` equally spaced knots covering `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 || !(b > a) {
            return Err(Error::DegeneratePartition);
        }
        Self::new((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// `|Z| = max_j |t_j − t_{j−1}|`.
    pub fn norm(&self) -> Result<f64> {
        if self.knots.len() < 2 {
            return Err(Error::DegeneratePartition);
        }
        Ok(self.knots.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
    }

    /// Dyadic refinement: inserts every interval midpoint.
    pub fn bisect(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.knots.len());
        for w in self.knots.windows(2) {
            out.push(w[0]);
            out.push(0.5 * (w[0] + w[1]));
        }
        out.push(self.last());
        Self { knots: out }
    }

    /// Union of the knots of `self` and `other`.
    pub fn union(&self, other: &Partition) -> Self {
        let mut all: Vec<f64> = self.knots.iter().chain(other.knots.iter()).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.dedup();
        Self { knots: all }
    }
}

/// `partition_norm` as a free function.
pub fn partition_norm(z: &Partition) -> Result<f64> {
    z.norm()
}

/// Sampled driving angles `θ_k(t)` and weights `λ_k(t)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingSpec {
    pub grid: Vec<f64>,
    /// `angles[k][i]` is the unwrapped angle of slit `k` at `grid[i]`.
    pub angles: Vec<Vec<f64>>,
    /// `weights[k][i]` is `λ_k(grid[i])`.
    pub weights: Vec<Vec<f64>>,
    #[serde(default = "default_weight_tolerance")]
    pub tolerance: f64,
}

fn default_weight_tolerance() -> f64 {
    1e-6
}

impl DrivingSpec {
    pub fn new(grid: Vec<f64>, angles: Vec<Vec<f64>>, weights: Vec<Vec<f64>>) -> Self {
        Self { grid, angles, weights, tolerance: default_weight_tolerance() }
    }

    /// One slit with constant angle `theta` and weight 1 on `[0, horizon]`.
    pub fn constant(thetas: &[f64], weights: &[f64], horizon: f64) -> Self {
        Self::new(
            vec![0.0, horizon],
            thetas.iter().map(|&t| vec![t, t]).collect(),
            weights.iter().map(|&w| vec![w, w]).collect(),
        )
    }

    pub fn slit_count(&self) -> usize {
        self.angles.len()
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().unwrap_or(&0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidDriving("empty grid".into()));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidDriving("grid times must increase strictly".into()));
        }
        let m = self.angles.len();
        if m == 0 || self.weights.len() != m {
            return Err(Error::InvalidDriving("angles and weights must list the same slits".into()));
        }
        for k in 0..m {
            if self.angles[k].len() != self.grid.len() || self.weights[k].len() != self.grid.len() {
                return Err(Error::InvalidDriving(format!("slit {k}: sample count differs from grid")));
            }
        }
        for (i, &t) in self.grid.iter().enumerate() {
            let mut sum = 0.0;
            for k in 0..m {
                let w = self.weights[k][i];
                if !(w >= 0.0) {
                    return Err(Error::InvalidDriving(format!("λ_{k}({t}) = {w} is negative")));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > self.tolerance {
                return Err(Error::InvalidDriving(format!("Σλ = {sum} at t = {t}")));
            }
            for a in 0..m {
                for b in a + 1..m {
                    let d = (self.angles[a][i] - self.angles[b][i]).rem_euclid(2.0 * PI);
                    if d < 1e-12 || 2.0 * PI - d < 1e-12 {
                        return Err(Error::InvalidDriving(format!("slits {a} and {b} share a driving point at t = {t}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.grid.len();
        if n == 1 || t <= self.grid[0] {
            return (0, 0.0);
        }
        if t >= self.grid[n - 1] {
            return (n - 2, 1.0);
        }
        let i = match self.grid.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        (i, (t - self.grid[i]) / (self.grid[i + 1] - self.grid[i]))
    }

    /// Piecewise-linear unwrapped driving angle.
    pub fn angle(&self, k: usize, t: f64) -> f64 {
        if self.grid.len() == 1 {
            return self.angles[k][0];
        }
        let (i, s) = self.locate(t);
        self.angles[k][i] * (1.0 - s) + self.angles[k][i + 1] * s
    }

    pub fn driving_point(&self, k: usize, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.angle(k, t))
    }

    /// Piecewise-linear weights renormalized to sum exactly to one.
    pub fn weights_at(&self, t: f64) -> Vec<f64> {
        let m = self.slit_count();
        let raw: Vec<f64> = if self.grid.len() == 1 {
            (0..m).map(|k| self.weights[k][0]).collect()
        } else {
            let (i, s) = self.locate(t);
            (0..m).map(|k| self.weights[k][i] * (1.0 - s) + self.weights[k][i + 1] * s).collect()
        };
        let sum: f64 = raw.iter().sum();
        raw.iter().map(|w| w / sum).collect()
    }

    pub fn rotated(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            angles: self.angles.iter().map(|a| a.iter().map(|x| x + alpha).collect()).collect(),
            weights: self.weights.clone(),
            tolerance: self.tolerance,
        }
    }

    pub fn conjugated(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            angles: self.angles.iter().map(|a| a.iter().map(|x| -x).collect()).collect(),
            weights: self.weights.clone(),
            tolerance: self.tolerance,
        }
    }
}

/// Unwraps a sequence of angles so consecutive values differ by less than π.
pub fn unwrap_angles(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    for (i, &a) in raw.iter().enumerate() {
        if i == 0 {
            out.push(a);
            continue;
        }
        let prev: f64 = out[i - 1];
        let d = (a - prev + PI).rem_euclid(2.0 * PI) - PI;
        out.push(prev + d);
    }
    out
}

/// Normalizes an angle to `(−π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// `A(r0, θ1, θ2) = { r e^{iθ} : r ∈ [r0, 1], θ ∈ [θ1, θ2] }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnularSector {
    pub r0: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl AnnularSector {
    pub fn new(r0: f64, theta1: f64, theta2: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 1.0) || !(theta2 > theta1) || theta2 - theta1 >= 2.0 * PI {
            return Err(Error::InvalidDomain(format!("annular sector ({r0}, {theta1}, {theta2})")));
        }
        Ok(Self { r0, theta1, theta2 })
    }

    /// The sector `A_ε(ζ) = A(1 − ε, θ − πε, θ + πε)` around `ζ = e^{iθ}`.
    pub fn around(zeta: Complex64, eps: f64) -> Result<Self> {
        let th = zeta.arg();
        Self::new(1.0 - eps, th - PI * eps, th + PI * eps)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        let slack = 1e-12;
        if r < self.r0 - slack || r > 1.0 + slack {
            return false;
        }
        let d = (z.arg() - self.theta1 + slack).rem_euclid(2.0 * PI);
        d <= self.theta2 - self.theta1 + 2.0 * slack
    }

    /// Tensor grid of `nr × nt` points covering the sector (closed).
    pub fn grid(&self, nr: usize, nt: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(nr * nt);
        for i in 0..nr {
            let r = self.r0 + (1.0 - self.r0) * i as f64 / (nr.max(2) - 1) as f64;
            for j in 0..nt {
                let th = self.theta1 + (self.theta2 - self.theta1) * j as f64 / (nt.max(2) - 1) as f64;
                out.push(Complex64::from_polar(r, th));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radial_polyline_is_valid() {
        let cfg = HullConfig::new(vec![SlitCurve::new(0, vec![0.0, 1.0], vec![c(1.0, 0.0), c(0.5, 0.0)])], 1.0);
        assert!(cfg.clone().validate().is_ok());
        // idempotent
        assert_eq!(cfg.clone().validate().unwrap().validate().unwrap(), cfg);
    }

    #[test]
    fn base_off_circle_rejected() {
        let cfg = HullConfig::new(vec![SlitCurve::new(0, vec![0.0, 1.0], vec![c(0.9, 0.0), c(0.5, 0.0)])], 1.0);
        assert!(matches!(cfg.validate(), Err(Error::BaseNotOnCircle { curve: 0, .. })));
    }

    #[test]
    fn shared_interior_sample_rejected() {
        let a = SlitCurve::new(0, vec![0.0, 0.5, 1.0], vec![c(1.0, 0.0), c(0.5, 0.1), c(0.4, 0.4)]);
        let b = SlitCurve::new(1, vec![0.0, 0.5, 1.0], vec![c(0.0, 1.0), c(0.5, 0.1), c(-0.3, 0.3)]);
        let cfg = HullConfig::new(vec![a, b], 1.0);
        assert!(matches!(cfg.validate(), Err(Error::CurvesIntersect { .. })));
    }

    #[test]
    fn self_intersection_and_origin() {
        let loopy = SlitCurve::new(
            0,
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.2), c(0.7, 0.2), c(0.7, -0.1)],
        );
        assert!(matches!(
            HullConfig::new(vec![loopy], 4.0).validate(),
            Err(Error::SelfIntersection { curve: 0, .. })
        ));
        let through = SlitCurve::new(0, vec![0.0, 1.0], vec![c(1.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(HullConfig::new(vec![through], 1.0).validate(), Err(Error::OriginHit { .. })));
        let back = SlitCurve::new(0, vec![0.0, 1.0, 2.0], vec![c(1.0, 0.0), c(0.5, 0.0), c(0.7, 0.0)]);
        assert!(matches!(
            HullConfig::new(vec![back], 2.0).validate(),
            Err(Error::SelfIntersection { .. })
        ));
    }

    #[test]
    fn times_must_increase() {
        let bad = SlitCurve::new(0, vec![0.0, 0.5, 0.5], vec![c(1.0, 0.0), c(0.8, 0.0), c(0.6, 0.0)]);
        assert!(matches!(
            HullConfig::new(vec![bad], 0.5).validate(),
            Err(Error::NonMonotoneTimes { curve: 0, sample: 2 })
        ));
    }

    #[test]
    fn domain_slit_collision() {
        let cfg = HullConfig::new(vec![SlitCurve::radial(0, 0.0, 0.3, 4, 1.0)], 1.0)
            .with_domain(CircularSlitDisk::new(vec![ArcSlit::new(0.5, -0.2, 0.2)]));
        assert!(matches!(cfg.validate(), Err(Error::HitsDomainSlit { .. })));
    }

    #[test]
    fn sample_curve_knots_midpoints_range() {
        let cv = SlitCurve::new(0, vec![0.0, 1.0], vec![c(1.0, 0.0), c(0.2, 0.4)]);
        assert_eq!(cv.sample(0.0).unwrap(), c(1.0, 0.0));
        assert_eq!(cv.sample(1.0).unwrap(), c(0.2, 0.4));
        let mid = cv.sample(0.5).unwrap();
        assert!((mid - c(0.6, 0.2)).norm() < 1e-15);
        assert!(matches!(cv.sample(1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn partition_norms() {
        assert_eq!(Partition::new(vec![0.0, 0.5, 1.0]).unwrap().norm().unwrap(), 0.5);
        for n in 2..12 {
            let z = Partition::uniform(0.0, 1.0, n).unwrap();
            assert!((z.norm().unwrap() - 1.0 / (n - 1) as f64).abs() < 1e-15);
        }
        let single = Partition::new(vec![0.0]).unwrap();
        assert_eq!(single.norm(), Err(Error::DegeneratePartition));
    }

    #[test]
    fn driving_validation() {
        let ok = DrivingSpec::constant(&[0.0, 2.0], &[0.5, 0.5], 1.0);
        assert!(ok.validate().is_ok());
        let bad = DrivingSpec::constant(&[0.0], &[0.8], 1.0);
        assert!(matches!(bad.validate(), Err(Error::InvalidDriving(_))));
        let clash = DrivingSpec::constant(&[0.3, 0.3 + 2.0 * PI], &[0.5, 0.5], 1.0);
        assert!(matches!(clash.validate(), Err(Error::InvalidDriving(_))));
    }

    #[test]
    fn angles_unwrap_and_normalize() {
        let u = unwrap_angles(&[3.0, -3.0, -2.5]);
        assert!((u[1] - (2.0 * PI - 3.0)).abs() < 1e-12);
        assert!(u.windows(2).all(|w| (w[1] - w[0]).abs() < PI));
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn sector_membership() {
        let s = AnnularSector::around(c(0.0, 1.0), 0.1).unwrap();
        assert!(s.contains(c(0.0, 0.95)));
        assert!(!s.contains(c(0.0, 0.85)));
        assert!(s.grid(5, 7).iter().all(|&z| s.contains(z)));
    }
}
