//! Capacity calculus: partition sums, capacity profiles `c_k`, weights
//! `λ_k`, the difference-quotient ratio and capacity reparametrization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{HullConfig, Partition, SlitCurve};
use crate::error::{Error, Result};
use crate::scmap::{build_hull_map, MapOptions};

/// Truncation vector `(τ, …, t, …, τ)` with `t` at position `k`.
pub fn truncation(m: usize, k: usize, t: f64, tau: f64) -> Vec<f64> {
    let mut v = vec![tau; m];
    v[k] = t;
    v
}

/// Source of `lmr` for the normalized map of the domain minus a truncated
/// hull.
pub trait LmrOracle: Sync {
    fn lmr(&self, config: &HullConfig, truncation: &[f64]) -> Result<f64>;
}

/// Hulls in the unit disk, through the slit map.
impl LmrOracle for MapOptions {
    fn lmr(&self, config: &HullConfig, truncation: &[f64]) -> Result<f64> {
        build_hull_map(config, truncation, self).map(|map| map.lmr())
    }
}

/// `lmr(f_{k;t,τ})`.
pub fn lmr_f<O: LmrOracle + ?Sized>(config: &HullConfig, k: usize, t: f64, tau: f64, opts: &O) -> Result<f64> {
    opts.lmr(config, &truncation(config.slit_count(), k, t, tau))
}

/// `lmr(g_t)`.
pub fn lmr_g<O: LmrOracle + ?Sized>(config: &HullConfig, t: f64, opts: &O) -> Result<f64> {
    opts.lmr(config, &vec![t; config.slit_count()])
}

/// `S(f_k, [t−, t+], Z)` where `Z` partitions `[t−, t+]`.
pub fn partition_sum<O: LmrOracle + ?Sized>(config: &HullConfig, k: usize, z: &Partition, opts: &O) -> Result<f64> {
    let terms = partition_terms(config, z.knots(), opts)?;
    Ok(terms[k].iter().sum())
}

/// Per-slit, per-interval terms `lmr(f_{k;t_{l+1},t_l}) − lmr(g_{t_l})`.
fn partition_terms<O: LmrOracle + ?Sized>(config: &HullConfig, knots: &[f64], opts: &O) -> Result<Vec<Vec<f64>>> {
    let m = config.slit_count();
    let base: Vec<f64> = knots[..knots.len() - 1].par_iter().map(|&t| lmr_g(config, t, opts)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..m).flat_map(|k| (0..knots.len() - 1).map(move |l| (k, l))).collect();
    let vals: Vec<f64> = jobs
        .par_iter()
        .map(|&(k, l)| {
            if m == 1 {
                // f_{1;t,τ} = g_t: reuse so the sum telescopes exactly
                lmr_g(config, knots[l + 1], opts)
            } else {
                lmr_f(config, k, knots[l + 1], knots[l], opts)
            }
        })
        .collect::<Result<_>>()?;
    let n = knots.len() - 1;
    Ok((0..m).map(|k| (0..n).map(|l| vals[k * n + l] - base[l]).collect()).collect())
}

/// Refinement knobs for [`capacity_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub map: MapOptions,
    /// Dyadic refinement stops once successive levels differ by less.
    pub tol: f64,
    pub max_depth: usize,
    pub min_depth: usize,
    /// Combine successive levels by first-order Richardson extrapolation.
    pub extrapolate: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { map: MapOptions::default(), tol: 1e-4, max_depth: 14, min_depth: 2, extrapolate: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityProfile {
    pub grid: Vec<f64>,
    /// `c[k][i] = c_k(grid[i])`.
    pub c: Vec<Vec<f64>>,
    /// `λ_k` by central differences of `c_k` on the grid.
    pub lambda: Vec<Vec<f64>>,
    /// `lmr(g_t)` on the grid.
    pub lmr: Vec<f64>,
    pub depth: usize,
    /// `|Z|` of the finest partition used.
    pub partition_norm: f64,
    pub cauchy_gap: f64,
}

impl CapacityProfile {
    pub fn slit_count(&self) -> usize {
        self.c.len()
    }

    pub fn sum_c(&self, i: usize) -> f64 {
        self.c.iter().map(|ck| ck[i]).sum()
    }

    pub fn sum_lambda(&self, i: usize) -> f64 {
        self.lambda.iter().map(|l| l[i]).sum()
    }
}

fn dyadic_knots(base: &[f64], level: usize) -> Vec<f64> {
    let parts = 1usize << level;
    let mut out = Vec::with_capacity((base.len() - 1) * parts + 1);
    for w in base.windows(2) {
        for j in 0..parts {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / parts as f64);
        }
    }
    out.push(*base.last().unwrap());
    out
}

/// Central differences on a nonuniform grid, one-sided at the ends.
pub fn differentiate(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (values[b] - values[a]) / (grid[b] - grid[a])
        })
        .collect()
}

/// `c_k(t) = lim_{|Z|→0} S(f_k, [0, t], Z)` on `grid` by dyadic refinement.
pub fn capacity_profile(config: &HullConfig, grid: &[f64], opts: &ProfileOptions) -> Result<CapacityProfile> {
    let mut base = vec![0.0];
    for &t in grid {
        if t < 0.0 || t > config.horizon {
            return Err(Error::OutOfRange { t, lo: 0.0, hi: config.horizon });
        }
        if t > *base.last().unwrap() {
            base.push(t);
        } else if t < *base.last().unwrap() {
            return Err(Error::InvalidDomain("capacity grid must be increasing".into()));
        }
    }
    let m = config.slit_count();
    let at_grid = |knots: &[f64], terms: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..m)
            .map(|k| {
                let mut acc = 0.0;
                let mut j = 0;
                grid.iter()
                    .map(|&t| {
                        while j < knots.len() - 1 && knots[j] < t {
                            acc += terms[k][j];
                            j += 1;
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    };
    let lmr: Vec<f64> = grid.par_iter().map(|&t| lmr_g(config, t, &opts.map)).collect::<Result<_>>()?;
    if base.len() == 1 {
        let zero = vec![vec![0.0; grid.len()]; m];
        return Ok(CapacityProfile {
            grid: grid.to_vec(),
            c: zero.clone(),
            lambda: zero,
            lmr,
            depth: 0,
            partition_norm: 0.0,
            cauchy_gap: 0.0,
        });
    }
    let mut prev_raw: Option<Vec<Vec<f64>>> = None;
    let mut prev_est: Option<Vec<Vec<f64>>> = None;
    let mut gap = f64::INFINITY;
    for level in 0..=opts.max_depth {
        let knots = dyadic_knots(&base, level);
        let terms = partition_terms(config, &knots, &opts.map)?;
        let raw = at_grid(&knots, &terms);
        let est = match (&prev_raw, opts.extrapolate) {
            (Some(p), true) => raw.iter().zip(p).map(|(a, b)| a.iter().zip(b).map(|(x, y)| 2.0 * x - y).collect()).collect(),
            _ => raw.clone(),
        };
        if let Some(p) = &prev_est {
            gap = est.iter().zip(p).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max);
        }
        let ready = level >= opts.min_depth && (level >= 2 || !opts.extrapolate);
        if ready && gap < opts.tol {
            let lambda = est.iter().map(|ck| differentiate(grid, ck)).collect();
            return Ok(CapacityProfile {
                grid: grid.to_vec(),
                c: est,
                lambda,
                lmr,
                depth: level,
                partition_norm: crate::domain::partition_norm(&Partition::new(knots)?)?,
                cauchy_gap: gap,
            });
        }
        prev_raw = Some(raw);
        prev_est = Some(est);
    }
    Err(Error::NoConvergence(format!("capacity profile Cauchy gap {gap:.3e} above {:.3e} at depth {}", opts.tol, opts.max_depth)))
}

/// Weight estimates with both one-sided quotients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub grid: Vec<f64>,
    /// Central quotient (one-sided at the ends).
    pub lambda: Vec<Vec<f64>>,
    pub forward: Vec<Vec<f64>>,
    pub backward: Vec<Vec<f64>>,
}

impl Weights {
    pub fn sum(&self, i: usize) -> f64 {
        self.lambda.iter().map(|l| l[i]).sum()
    }

    /// Gap between the one-sided quotients, where both exist.
    pub fn one_sided_gap(&self, k: usize, i: usize) -> f64 {
        let (f, b) = (self.forward[k][i], self.backward[k][i]);
        if f.is_finite() && b.is_finite() {
            (f - b).abs()
        } else {
            0.0
        }
    }
}

/// `λ_k(t) ≈ [lmr(f_{k;t+h,t}) − lmr(f_{k;t−h,t})] / 2h`.
pub fn weights<O: LmrOracle + ?Sized>(config: &HullConfig, grid: &[f64], h: f64, opts: &O) -> Result<Weights> {
    if !(h > 0.0) {
        return Err(Error::OutOfRange { t: h, lo: 0.0, hi: f64::INFINITY });
    }
    let m = config.slit_count();
    let horizon = config.horizon;
    let rows: Vec<Vec<(f64, f64, f64)>> = grid
        .par_iter()
        .map(|&t| {
            let mid = lmr_g(config, t, opts)?;
            (0..m)
                .map(|k| {
                    let fw = if t + h <= horizon * (1.0 + 1e-14) {
                        (lmr_f(config, k, (t + h).min(horizon), t, opts)? - mid) / h
                    } else {
                        f64::NAN
                    };
                    let bw = if t - h >= -1e-14 {
                        (mid - lmr_f(config, k, (t - h).max(0.0), t, opts)?) / h
                    } else {
                        f64::NAN
                    };
                    let central = match (fw.is_finite(), bw.is_finite()) {
                        (true, true) => 0.5 * (fw + bw),
                        (true, false) => fw,
                        (false, true) => bw,
                        (false, false) => return Err(Error::OutOfRange { t, lo: 0.0, hi: horizon }),
                    };
                    Ok((central, fw, bw))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let pick = |f: fn(&(f64, f64, f64)) -> f64| (0..m).map(|k| rows.iter().map(|r| f(&r[k])).collect()).collect();
    Ok(Weights { grid: grid.to_vec(), lambda: pick(|r| r.0), forward: pick(|r| r.1), backward: pick(|r| r.2) })
}

/// Weights on a non-uniform grid, each quotient reaching to the neighboring
/// grid times. With the grid taken from curve knots no truncation falls
/// between knots, where the polyline is not capacity-linear.
pub fn knot_weights<O: LmrOracle + ?Sized>(config: &HullConfig, grid: &[f64], opts: &O) -> Result<Weights> {
    let m = config.slit_count();
    let n = grid.len();
    if n < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::DegeneratePartition);
    }
    let rows: Vec<Vec<(f64, f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = grid[i];
            let mid = lmr_g(config, t, opts)?;
            (0..m)
                .map(|k| {
                    let fw = match grid.get(i + 1) {
                        Some(&b) => (lmr_f(config, k, b, t, opts)? - mid) / (b - t),
                        None => f64::NAN,
                    };
                    let bw = match i.checked_sub(1).map(|j| grid[j]) {
                        Some(a) => (mid - lmr_f(config, k, a, t, opts)?) / (t - a),
                        None => f64::NAN,
                    };
                    // second order everywhere: blend the one-sided quotients
                    // inside, three-point one-sided stencils at the ends
                    let central = match (fw.is_finite(), bw.is_finite()) {
                        (true, true) => {
                            let (hf, hb) = (grid[i + 1] - t, t - grid[i - 1]);
                            (hb * fw + hf * bw) / (hf + hb)
                        }
                        _ if n >= 3 => {
                            let (j1, j2) = if i == 0 { (1, 2) } else { (n - 2, n - 3) };
                            let (x1, x2) = (grid[j1], grid[j2]);
                            let f1 = lmr_f(config, k, x1, t, opts)?;
                            let f2 = lmr_f(config, k, x2, t, opts)?;
                            mid * (2.0 * t - x1 - x2) / ((t - x1) * (t - x2)) + f1 * (t - x2) / ((x1 - t) * (x1 - x2)) + f2 * (t - x1) / ((x2 - t) * (x2 - x1))
                        }
                        (true, false) => fw,
                        _ => bw,
                    };
                    Ok((central, fw, bw))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let pick = |f: fn(&(f64, f64, f64)) -> f64| (0..m).map(|k| rows.iter().map(|r| f(&r[k])).collect()).collect();
    Ok(Weights { grid: grid.to_vec(), lambda: pick(|r| r.0), forward: pick(|r| r.1), backward: pick(|r| r.2) })
}

/// `[lmr(f_{k;t−,τ−}) − lmr(f_{k;t+,τ−})] / [lmr(f_{k;t−,τ+}) − lmr(f_{k;t+,τ+})]`.
pub fn ratio_diagnostic<O: LmrOracle + ?Sized>(
    config: &HullConfig,
    k: usize,
    t_minus: f64,
    t_plus: f64,
    tau_minus: f64,
    tau_plus: f64,
    opts: &O,
) -> Result<f64> {
    if !(t_plus > t_minus) || !(tau_plus >= tau_minus) {
        return Err(Error::DegenerateWindow { denominator: 0.0 });
    }
    let num = lmr_f(config, k, t_minus, tau_minus, opts)? - lmr_f(config, k, t_plus, tau_minus, opts)?;
    if tau_plus == tau_minus || config.slit_count() == 1 {
        return if num != 0.0 { Ok(1.0) } else { Err(Error::DegenerateWindow { denominator: num }) };
    }
    let den = lmr_f(config, k, t_minus, tau_plus, opts)? - lmr_f(config, k, t_plus, tau_plus, opts)?;
    if den.abs() < 1e-14 {
        return Err(Error::DegenerateWindow { denominator: den });
    }
    Ok(num / den)
}

/// Options for [`reparametrize_capacity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReparamOptions {
    pub map: MapOptions,
    /// Root tolerance for `lmr(g_s) = τ`.
    pub tol: f64,
    /// Spacing of the uniform capacity knots added to every curve.
    pub spacing: f64,
}

impl Default for ReparamOptions {
    fn default() -> Self {
        Self { map: MapOptions::default(), tol: 1e-12, spacing: 0.005 }
    }
}

/// Solves `lmr(g_s) = target` for `s ∈ [lo, hi]` by safeguarded regula
/// falsi on the increasing function `s ↦ lmr(g_s)`.
fn invert_lmr(config: &HullConfig, target: f64, mut lo: f64, mut hi: f64, fl: f64, fh: f64, opts: &ReparamOptions) -> Result<f64> {
    let (mut flo, mut fhi) = (fl - target, fh - target);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::NoConvergence(format!("capacity {target} not bracketed")));
    }
    let mut side = 0i32;
    for _ in 0..200 {
        if hi - lo <= opts.tol * (1.0 + hi.abs()) || fhi - flo <= opts.tol {
            break;
        }
        let mut s = (lo * fhi - hi * flo) / (fhi - flo);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let fs = lmr_g(config, s, &opts.map)? - target;
        if fs.abs() <= 0.1 * opts.tol {
            return Ok(s);
        }
        if fs < 0.0 {
            lo = s;
            flo = fs;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = s;
            fhi = fs;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    if hi - lo > 1e3 * opts.tol * (1.0 + hi.abs()) && fhi - flo > 1e3 * opts.tol {
        return Err(Error::NoConvergence(format!("lmr inversion at capacity {target}")));
    }
    Ok(if -flo < fhi { lo } else { hi })
}

/// Retimes every curve so that `lmr(g_t) = t`; the polylines keep their
/// geometry and gain knots on a uniform capacity grid.
pub fn reparametrize_capacity(config: &HullConfig, opts: &ReparamOptions) -> Result<HullConfig> {
    let config = config.clone().validate()?;
    let old_knots = config.knot_times();
    let old_lmr: Vec<f64> = old_knots.par_iter().map(|&t| lmr_g(&config, t, &opts.map)).collect::<Result<_>>()?;
    for w in old_lmr.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::NoConvergence("lmr(g_t) is not strictly increasing".into()));
        }
    }
    let horizon = *old_lmr.last().unwrap();
    let n = (horizon / opts.spacing).ceil() as usize;
    let step = horizon / n as f64;
    // capacity grows like the square of the slit length at first; grade
    // the knots geometrically towards t = 0
    let mut targets: Vec<f64> = (1..8).rev().map(|j| step / (1u32 << j) as f64).collect();
    targets.extend((1..n).map(|j| step * j as f64));
    let near_old = |tau: f64| {
        let j = old_lmr.partition_point(|&v| v < tau);
        let d0 = if j > 0 { tau - old_lmr[j - 1] } else { f64::INFINITY };
        let d1 = if j < old_lmr.len() { old_lmr[j] - tau } else { f64::INFINITY };
        d0.min(d1) < 1e-3 * step
    };
    targets.retain(|&tau| !near_old(tau));
    let roots: Vec<(f64, f64)> = targets
        .par_iter()
        .map(|&tau| {
            let j = old_lmr.partition_point(|&v| v < tau);
            let (lo, hi) = (old_knots[j - 1], old_knots[j]);
            Ok((invert_lmr(&config, tau, lo, hi, old_lmr[j - 1], old_lmr[j], opts)?, tau))
        })
        .collect::<Result<_>>()?;
    let mut pairs: Vec<(f64, f64)> = old_knots.iter().copied().zip(old_lmr.iter().copied()).collect();
    pairs.extend(roots);
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs[0] = (0.0, 0.0);
    let curves = config
        .curves
        .iter()
        .map(|c| retime(c, &pairs, horizon))
        .collect::<Result<Vec<_>>>()?;
    HullConfig { curves, initial_domain: config.initial_domain.clone(), horizon }.validate()
}

fn retime(curve: &SlitCurve, pairs: &[(f64, f64)], horizon: f64) -> Result<SlitCurve> {
    let mut times = Vec::with_capacity(pairs.len());
    let mut points = Vec::with_capacity(pairs.len());
    for &(s, tau) in pairs {
        times.push(tau);
        points.push(curve.sample(s)?);
    }
    *times.last_mut().unwrap() = horizon;
    Ok(SlitCurve::new(curve.slit_index, times, points))
}
