//! The Komatu–Loewner flow `ġ = g · Σ λ_k Φ(ξ_k, g)`.
//!
//! Forward integration moves marked points; backward integration from just
//! inside a driving point recovers the slit tip. On a circularly slit disk
//! the slits of `D_t` move too: they stay concentric arcs, so only their
//! radius and endpoint angles are tracked, with the domain held fixed over
//! short intervals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{point_segment_distance, unwrap_angles, ArcSlit, CircularSlitDisk, DrivingSpec, HullConfig, SlitCurve};
use crate::error::{Error, Result};
use crate::mckernel::{mobius_kernel, Hole, KernelSolver, LaplaceOptions, POLE_GUARD};
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::capacity::knot_weights;
use crate::scmap::{angle_gap, build_hull_map, tip_image, MapOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionOptions {
    pub ode: OdeOptions,
    pub laplace: LaplaceOptions,
    /// Longest interval over which a slit domain is held fixed.
    pub interval: f64,
    /// Two distances from the driving point for the backward start, the
    /// second half the first.
    pub lifts: [f64; 2],
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        Self { ode: OdeOptions::default(), laplace: LaplaceOptions::default(), interval: 0.01, lifts: [1e-4, 5e-5] }
    }
}

// three-point Gauss–Legendre on [0, 1]
const GAUSS: [(f64, f64); 3] = [(0.112_701_665_379_258_3, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.887_298_334_620_741_7, 5.0 / 18.0)];

/// The domains `D_t`, piecewise constant on a time partition.
pub struct DomainHistory {
    /// Interval endpoints `0 = b_0 < … < b_n = T`.
    pub breaks: Vec<f64>,
    /// `D` at each break.
    pub domains: Vec<CircularSlitDisk>,
    /// Largest kernel fit residual met on each interval.
    pub residuals: Vec<f64>,
    solvers: Vec<Option<KernelSolver>>,
}

/// Output times refined so that no interval exceeds `max_step`.
fn refine(times: &[f64], max_step: f64) -> Vec<f64> {
    let mut out = vec![times[0]];
    for w in times.windows(2) {
        let n = ((w[1] - w[0]) / max_step).ceil().max(1.0) as usize;
        out.extend((1..=n).map(|i| if i == n { w[1] } else { w[0] + (w[1] - w[0]) * i as f64 / n as f64 }));
    }
    out
}

/// Sorted times from `extra` and the driving grid within `[0, horizon]`.
fn time_grid(driving: &DrivingSpec, horizon: f64, extra: &[f64]) -> Vec<f64> {
    let mut t: Vec<f64> = driving.grid.iter().chain(extra).copied().filter(|&s| (0.0..=horizon).contains(&s)).collect();
    t.push(0.0);
    t.push(horizon);
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    t
}

fn check_driving(driving: &DrivingSpec, horizon: f64) -> Result<()> {
    driving.validate()?;
    if !(horizon >= 0.0) || horizon > driving.horizon() * (1.0 + 1e-12) {
        return Err(Error::InvalidDriving(format!("horizon {horizon} outside the driving interval [0, {}]", driving.horizon())));
    }
    Ok(())
}

impl DomainHistory {
    /// Evolves the slits of `domain0` up to `horizon`, breaking at `times`.
    pub fn evolve(domain0: &CircularSlitDisk, driving: &DrivingSpec, horizon: f64, times: &[f64], opts: &EvolutionOptions) -> Result<Self> {
        domain0.validate()?;
        let grid = time_grid(driving, horizon, times);
        if domain0.is_disk() {
            let n = grid.len();
            return Ok(Self { breaks: grid, domains: vec![CircularSlitDisk::disk(); n], residuals: vec![0.0; n - 1], solvers: (1..n).map(|_| None).collect() });
        }
        let breaks = refine(&grid, opts.interval);
        let mut domains = vec![domain0.clone()];
        let mut residuals = Vec::new();
        let mut solvers = Vec::new();
        for w in breaks.windows(2) {
            let d = domains.last().unwrap().clone();
            let solver = KernelSolver::new(&d, &opts.laplace)?;
            let (next, res) = advance_arcs(&solver, driving, w[0], w[1])?;
            next.validate()?;
            residuals.push(res);
            solvers.push(Some(solver));
            domains.push(next);
        }
        Ok(Self { breaks, domains, residuals, solvers })
    }

    fn interval(&self, s: f64) -> usize {
        let i = self.breaks.partition_point(|&b| b <= s);
        i.saturating_sub(1).min(self.solvers.len().saturating_sub(1))
    }

    fn rhs(&self, i: usize, driving: &DrivingSpec, s: f64, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, l) in driving.weights_at(s).iter().enumerate() {
            if *l == 0.0 {
                continue;
            }
            let zeta = driving.driving_point(k, s);
            acc += l * match self.solvers.get(i).and_then(|o| o.as_ref()) {
                None => mobius_kernel(zeta, z)?,
                Some(solver) => solver.field(zeta)?.eval(z)?,
            };
        }
        Ok(z * acc)
    }

    /// `Φ(ζ, z)` for the domain in force at time `s`.
    pub fn kernel(&self, s: f64, zeta: Complex64, z: Complex64) -> Result<Complex64> {
        match self.solvers.get(self.interval(s)).and_then(|o| o.as_ref()) {
            None => mobius_kernel(zeta, z),
            Some(solver) => solver.field(zeta)?.eval(z),
        }
    }

    /// `z · Σ λ_k(s) Φ(ξ_k(s), z)`.
    pub fn velocity(&self, driving: &DrivingSpec, s: f64, z: Complex64) -> Result<Complex64> {
        self.rhs(self.interval(s), driving, s, z)
    }

    /// Domain at time `s` (the record at the start of its interval).
    pub fn domain_at(&self, s: f64) -> &CircularSlitDisk {
        let i = self.breaks.partition_point(|&b| b <= s + 1e-14);
        &self.domains[i.saturating_sub(1)]
    }

    /// Integrates the flow from `t0` to `t1` (either direction), restarting
    /// at every break so each piece sees a fixed domain.
    pub fn flow(&self, driving: &DrivingSpec, t0: f64, t1: f64, z0: Complex64, opts: &OdeOptions) -> Result<(Complex64, OdeStats)> {
        let mut cuts: Vec<f64> = self.breaks.iter().copied().filter(|&b| b > t0.min(t1) && b < t0.max(t1)).collect();
        if t1 < t0 {
            cuts.reverse();
        }
        cuts.push(t1);
        let mut z = z0;
        let mut a = t0;
        let mut stats = OdeStats::default();
        let mut h = opts.h_init;
        for b in cuts {
            let mid = 0.5 * (a + b);
            let i = self.interval(mid);
            let f = |s: f64, w: Complex64| self.rhs(i, driving, s, w);
            let (zn, st) = integrate(&f, a, b, z, &mut h, opts)?;
            stats.add(st);
            z = zn;
            a = b;
        }
        Ok((z, stats))
    }
}

/// Moves every slit of the solver's domain over `[a, b]`: the radius by the
/// constant `Re Φ` on the slit, the endpoints by `Im Φ` there.
fn advance_arcs(solver: &KernelSolver, driving: &DrivingSpec, a: f64, b: f64) -> Result<(CircularSlitDisk, f64)> {
    let d = &solver.domain;
    let n = d.slits.len();
    let holes: Vec<Hole> = d.slits.iter().cloned().map(Hole::Arc).collect();
    // local angle of each endpoint: θ = 0 and θ = π are the two ends
    let ends: Vec<(f64, f64)> = holes
        .iter()
        .zip(&d.slits)
        .map(|(h, s)| if (h.point(0.0) - s.start()).norm() < (h.point(std::f64::consts::PI) - s.start()).norm() { (0.0, std::f64::consts::PI) } else { (std::f64::consts::PI, 0.0) })
        .collect();
    let mut dlog = vec![0.0; n];
    let mut dalpha = vec![0.0; n];
    let mut dbeta = vec![0.0; n];
    let mut residual: f64 = 0.0;
    for (x, wq) in GAUSS {
        let s = a + (b - a) * x;
        let w = wq * (b - a);
        for (k, l) in driving.weights_at(s).iter().enumerate() {
            if *l == 0.0 {
                continue;
            }
            let field = solver.field(driving.driving_point(k, s))?;
            residual = residual.max(field.residual);
            for j in 0..n {
                dlog[j] += w * l * field.slit_level(j);
                dalpha[j] += w * l * field.eval_on_slit(j, ends[j].0)?.im;
                dbeta[j] += w * l * field.eval_on_slit(j, ends[j].1)?.im;
            }
        }
    }
    let slits = d
        .slits
        .iter()
        .enumerate()
        .map(|(j, s)| ArcSlit::new(s.radius * dlog[j].exp(), s.alpha + dalpha[j], s.beta + dbeta[j]))
        .collect();
    Ok((CircularSlitDisk::new(slits), residual))
}

/// Trajectory of one marked point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: Complex64,
    /// Images at the trace times, truncated when the point is swallowed.
    pub values: Vec<Complex64>,
    /// Time at which integration broke down near a driving point.
    pub swallowed_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
    /// `D_t` at each time.
    pub domains: Vec<CircularSlitDisk>,
    /// `lmr(g_t)`, integrated from `Σ λ_k Re Φ(ξ_k, 0)`.
    pub lmr: Vec<f64>,
    /// `ξ_k(t)`, indexed `[time][slit]`; these are the tip images.
    pub driving: Vec<Vec<Complex64>>,
    pub weights: Vec<Vec<f64>>,
    /// Largest kernel fit residual used up to each time.
    pub kernel_residual: Vec<f64>,
    pub stats: OdeStats,
    pub flags: Vec<String>,
}

/// Moves `marked` points of `domain0` along the flow up to `horizon`.
pub fn solve_forward(
    domain0: &CircularSlitDisk,
    driving: &DrivingSpec,
    marked: &[Complex64],
    horizon: f64,
    opts: &EvolutionOptions,
) -> Result<EvolutionTrace> {
    check_driving(driving, horizon)?;
    if driving.slit_count() == 0 {
        return Err(Error::InvalidDriving("no driving functions".into()));
    }
    for z in marked {
        if !(z.norm() < 1.0) || domain0.slits.iter().any(|s| s.distance(*z) <= POLE_GUARD) {
            return Err(Error::OutsideDomain { re: z.re, im: z.im });
        }
    }
    let times = time_grid(driving, horizon, &[]);
    let history = DomainHistory::evolve(domain0, driving, horizon, &times, opts)?;
    let runs: Vec<(Trajectory, OdeStats)> = marked
        .par_iter()
        .map(|&z0| {
            let mut values = vec![z0];
            let mut stats = OdeStats::default();
            let mut swallowed_at = None;
            for w in times.windows(2) {
                match history.flow(driving, w[0], w[1], *values.last().unwrap(), &opts.ode) {
                    Ok((z, st)) => {
                        stats.add(st);
                        values.push(z);
                    }
                    Err(_) => {
                        swallowed_at = Some(w[0]);
                        break;
                    }
                }
            }
            (Trajectory { start: z0, values, swallowed_at }, stats)
        })
        .collect();
    let mut stats = OdeStats::default();
    let mut flags = Vec::new();
    let mut trajectories = Vec::with_capacity(runs.len());
    for (p, (tr, st)) in runs.into_iter().enumerate() {
        stats.add(st);
        if let Some(t) = tr.swallowed_at {
            flags.push(format!("SingularApproach: point {p} swallowed after t = {t}"));
        }
        trajectories.push(tr);
    }
    // lmr by the trapezoid rule on the domain breaks, refined tenfold
    let fine = refine(&history.breaks, horizon.max(1e-300) / (10.0 * history.breaks.len() as f64));
    let rate = |s: f64| -> Result<f64> {
        let lambda = driving.weights_at(s);
        let mut acc = 0.0;
        for (k, l) in lambda.iter().enumerate() {
            acc += l * history.kernel(s, driving.driving_point(k, s), Complex64::new(0.0, 0.0))?.re;
        }
        Ok(acc)
    };
    let mut lmr = vec![0.0];
    let mut acc = 0.0;
    let mut prev = (0.0, rate(0.0)?);
    let mut next_out = 1;
    for &s in fine.iter().skip(1) {
        let r = rate(s)?;
        acc += 0.5 * (s - prev.0) * (r + prev.1);
        prev = (s, r);
        while next_out < times.len() && (times[next_out] - s).abs() <= 1e-14 {
            lmr.push(acc);
            next_out += 1;
        }
    }
    let mut kernel_residual = Vec::with_capacity(times.len());
    let mut worst: f64 = 0.0;
    for &t in &times {
        for (i, w) in history.breaks.windows(2).enumerate() {
            if w[0] < t {
                worst = worst.max(history.residuals[i]);
            }
        }
        kernel_residual.push(worst);
    }
    let m = driving.slit_count();
    Ok(EvolutionTrace {
        domains: times.iter().map(|&t| history.domain_at(t).clone()).collect(),
        driving: times.iter().map(|&t| (0..m).map(|k| driving.driving_point(k, t)).collect()).collect(),
        weights: times.iter().map(|&t| driving.weights_at(t)).collect(),
        times,
        trajectories,
        lmr,
        kernel_residual,
        stats,
        flags,
    })
}

/// Hull regenerated from driving data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracedHull {
    pub config: HullConfig,
    /// First violated curve invariant, if any.
    pub violation: Option<String>,
    pub stats: OdeStats,
}

/// `(r² z(ε/r) − z(ε)) / (r² − 1)`: the tip preimage depends on the lift
/// through `(w − ξ)²`, so the leading error is quadratic.
fn richardson(lifts: [f64; 2], z: [Complex64; 2]) -> Complex64 {
    let r2 = (lifts[0] / lifts[1]).powi(2);
    (r2 * z[1] - z[0]) / (r2 - 1.0)
}

/// Tips `γ_k(t)` for the sample `times`, each by backward flow from just
/// inside `ξ_k(t)` down to time 0.
pub fn trace_hull(domain0: &CircularSlitDisk, driving: &DrivingSpec, horizon: f64, times: &[f64], opts: &EvolutionOptions) -> Result<TracedHull> {
    check_driving(driving, horizon)?;
    let grid = time_grid(driving, horizon, times);
    let history = DomainHistory::evolve(domain0, driving, horizon, &grid, opts)?;
    let m = driving.slit_count();
    let jobs: Vec<(usize, usize)> = (0..m).flat_map(|k| (0..grid.len()).map(move |i| (k, i))).collect();
    let tips: Vec<(Complex64, OdeStats)> = jobs
        .par_iter()
        .map(|&(k, i)| {
            let t = grid[i];
            let xi = driving.driving_point(k, t);
            if t == 0.0 {
                return Ok((xi, OdeStats::default()));
            }
            let mut stats = OdeStats::default();
            let mut z = [Complex64::new(0.0, 0.0); 2];
            for (j, eps) in opts.lifts.iter().enumerate() {
                let (p, st) = history.flow(driving, t, 0.0, xi * (1.0 - eps), &opts.ode).map_err(|_| Error::SingularApproach { point: i, slit: k, t })?;
                stats.add(st);
                z[j] = p;
            }
            Ok((richardson(opts.lifts, z), stats))
        })
        .collect::<Result<_>>()?;
    let mut stats = OdeStats::default();
    let mut curves = Vec::with_capacity(m);
    for k in 0..m {
        let pts: Vec<Complex64> = tips[k * grid.len()..(k + 1) * grid.len()].iter().map(|(p, st)| {
            stats.add(*st);
            *p
        }).collect();
        curves.push(SlitCurve::new(k, grid.clone(), pts));
    }
    let config = HullConfig::new(curves, horizon).with_domain(domain0.clone());
    let violation = config.clone().validate().err().map(|e| e.to_string());
    Ok(TracedHull { config, violation, stats })
}

/// Symmetric Hausdorff distance between two polylines.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|&x| {
                if q.len() == 1 {
                    return (x - q[0]).norm();
                }
                q.windows(2).map(|w| point_segment_distance(x, w[0], w[1])).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Accepted `|Σ λ_k − 1|` for extracted weights, which are renormalized
/// when evaluated.
pub const EXTRACTED_WEIGHT_TOLERANCE: f64 = 1e-2;

/// `(ξ_k, λ_k)` of a capacity-parametrized hull on `grid` (ideally curve
/// knots).
pub fn extract_driving(config: &HullConfig, grid: &[f64], opts: &MapOptions) -> Result<DrivingSpec> {
    let m = config.slit_count();
    let w = knot_weights(config, grid, opts)?;
    let tips: Vec<Vec<Complex64>> = grid
        .par_iter()
        .map(|&t| {
            let map = build_hull_map(config, &vec![t; m], opts)?;
            (0..m).map(|k| tip_image(&map, config, k)).collect()
        })
        .collect::<Result<_>>()?;
    let angles = (0..m).map(|k| unwrap_angles(&tips.iter().map(|row| row[k].arg()).collect::<Vec<_>>())).collect();
    let lambda = w.lambda.iter().map(|l| l.iter().map(|v| v.max(0.0)).collect()).collect();
    let mut spec = DrivingSpec::new(grid.to_vec(), angles, lambda);
    spec.tolerance = EXTRACTED_WEIGHT_TOLERANCE;
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub driving: DrivingSpec,
    pub traced: TracedHull,
    /// Hausdorff distance between given and regenerated curves, per slit.
    pub hausdorff: Vec<f64>,
    /// Largest angle between given and regenerated driving points, per slit.
    pub driving_mismatch: Vec<f64>,
    /// `max |Σ λ_k − 1|` over the grid.
    pub weight_sum_error: f64,
}

/// Extracts the driving data of `config`, traces the hull it generates and
/// compares the two. The knots of `config` serve as the grid.
pub fn roundtrip_residual(config: &HullConfig, map: &MapOptions, opts: &EvolutionOptions) -> Result<RoundTrip> {
    let config = config.clone().validate()?;
    let m = config.slit_count();
    let grid = config.knot_times();
    if grid.len() < 2 || config.horizon == 0.0 {
        let driving = DrivingSpec::new(vec![0.0], config.curves.iter().map(|c| vec![c.base().arg()]).collect(), vec![vec![1.0 / m.max(1) as f64]; m]);
        return Ok(RoundTrip {
            driving,
            traced: TracedHull { config: config.clone(), violation: None, stats: OdeStats::default() },
            hausdorff: vec![0.0; m],
            driving_mismatch: vec![0.0; m],
            weight_sum_error: 0.0,
        });
    }
    let driving = extract_driving(&config, &grid, map)?;
    let weight_sum_error = (0..grid.len()).map(|i| (driving.weights.iter().map(|l| l[i]).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    let traced = trace_hull(&config.initial_domain, &driving, config.horizon, &grid, opts)?;
    if let Some(v) = &traced.violation {
        return Err(Error::InvalidDriving(format!("regenerated hull is not admissible: {v}")));
    }
    let hausdorff = (0..m).map(|k| hausdorff(&config.curves[k].points, &traced.config.curves[k].points)).collect();
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&t| {
            let g = build_hull_map(&traced.config, &vec![t; m], map)?;
            (0..m).map(|k| Ok(angle_gap(tip_image(&g, &traced.config, k)?, driving.driving_point(k, t)).abs())).collect()
        })
        .collect::<Result<_>>()?;
    let driving_mismatch = (0..m).map(|k| rows.iter().map(|r| r[k]).fold(0.0, f64::max)).collect();
    Ok(RoundTrip { driving, traced, hausdorff, driving_mismatch, weight_sum_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scmap::{lmr, radial_tip_modulus};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_horizon_is_identity() {
        let d = DrivingSpec::constant(&[0.0], &[1.0], 1.0);
        let z = [c(0.2, 0.3), c(-0.5, 0.0)];
        let tr = solve_forward(&CircularSlitDisk::disk(), &d, &z, 0.0, &EvolutionOptions::default()).unwrap();
        assert_eq!(tr.times, vec![0.0]);
        assert_eq!(tr.trajectories[1].values, vec![z[1]]);
        let hull = trace_hull(&CircularSlitDisk::disk(), &d, 0.0, &[], &EvolutionOptions::default()).unwrap();
        assert_eq!(hull.config.curves[0].points, vec![c(1.0, 0.0)]);
    }

    #[test]
    fn radial_forward_flow() {
        let d = DrivingSpec::constant(&[0.0], &[1.0], 0.5);
        let tr = solve_forward(&CircularSlitDisk::disk(), &d, &[c(-0.5, 0.0), c(0.1, 0.4)], 0.5, &EvolutionOptions::default()).unwrap();
        let last = *tr.trajectories[0].values.last().unwrap();
        assert!(last.im.abs() < 1e-12 && last.re < -0.5);
        // ġ = g(1 + g)/(1 − g) on the negative axis has the closed form
        // g/(1 + g)² · e^{−t} = const
        let k = |x: f64| x / (1.0 + x).powi(2);
        assert!((k(last.re) * (-0.5f64).exp() - k(-0.5)).abs() < 1e-8);
        assert!((tr.lmr.last().unwrap() - 0.5).abs() < 1e-12);
        for p in &tr.trajectories {
            assert!(p.values.windows(2).all(|w| w[1].norm() >= w[0].norm()));
        }
    }

    #[test]
    fn radial_tip_law() {
        let d = DrivingSpec::constant(&[0.7], &[1.0], 0.5);
        let hull = trace_hull(&CircularSlitDisk::disk(), &d, 0.5, &[0.1, 0.2877, 0.4], &EvolutionOptions::default()).unwrap();
        assert!(hull.violation.is_none());
        let curve = &hull.config.curves[0];
        for (t, p) in curve.times.iter().zip(&curve.points) {
            assert!((p.arg() - 0.7).abs() < 1e-8);
            assert!((p.norm() - radial_tip_modulus(*t)).abs() < 1e-7, "{t} {}", p.norm() - radial_tip_modulus(*t));
        }
        let g = build_hull_map(&hull.config, &[0.5], &MapOptions::default()).unwrap();
        assert!((lmr(&g) - 0.5).abs() < 5e-8, "{}", lmr(&g) - 0.5);
    }

    #[test]
    fn rotation_and_conjugation() {
        let grid = vec![0.0, 0.1, 0.2];
        let d = DrivingSpec::new(grid.clone(), vec![vec![0.0, 0.1, 0.15], vec![2.5, 2.45, 2.3]], vec![vec![0.5, 0.6, 0.55], vec![0.5, 0.4, 0.45]]);
        let z = [c(0.3, -0.2), c(-0.6, 0.5)];
        let o = EvolutionOptions::default();
        let base = solve_forward(&CircularSlitDisk::disk(), &d, &z, 0.2, &o).unwrap();
        let rot = Complex64::from_polar(1.0, 0.9);
        let zr: Vec<Complex64> = z.iter().map(|p| p * rot).collect();
        let r = solve_forward(&CircularSlitDisk::disk(), &d.rotated(0.9), &zr, 0.2, &o).unwrap();
        let zc: Vec<Complex64> = z.iter().map(|p| p.conj()).collect();
        let cj = solve_forward(&CircularSlitDisk::disk(), &d.conjugated(), &zc, 0.2, &o).unwrap();
        for p in 0..2 {
            for (i, v) in base.trajectories[p].values.iter().enumerate() {
                assert!((v * rot - r.trajectories[p].values[i]).norm() < 1e-8);
                assert!((v.conj() - cj.trajectories[p].values[i]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn swallowed_point_is_flagged() {
        let d = DrivingSpec::constant(&[0.0], &[1.0], 1.0);
        let tr = solve_forward(&CircularSlitDisk::disk(), &d, &[c(0.9, 0.0)], 1.0, &EvolutionOptions::default()).unwrap();
        assert!(tr.trajectories[0].swallowed_at.is_some());
        assert_eq!(tr.flags.len(), 1);
    }

    #[test]
    fn slit_domain_co_evolves() {
        let dom = CircularSlitDisk::new(vec![ArcSlit::new(0.5, 2.0, 3.5)]);
        let d = DrivingSpec::constant(&[0.0], &[1.0], 0.1);
        let o = EvolutionOptions { laplace: LaplaceOptions { outer_degree: 32, hole_degree: 24, ..Default::default() }, ..Default::default() };
        let tr = solve_forward(&dom, &d, &[c(0.0, 0.3)], 0.1, &o).unwrap();
        let end = tr.domains.last().unwrap();
        assert!(end.slits[0].radius > 0.5 && end.slits[0].radius < 1.0);
        assert!((tr.lmr.last().unwrap() - 0.1).abs() < 1e-6);
        let p = &tr.trajectories[0].values;
        assert!(p.last().unwrap().norm() > 0.3);
        assert!(tr.kernel_residual.last().unwrap() < &1e-6);
    }

    #[test]
    fn radial_round_trip() {
        let cfg = HullConfig::new(vec![SlitCurve::radial(0, 0.4, 1.0 - 0.3, 1, 1.0)], 1.0);
        let cfg = crate::capacity::reparametrize_capacity(&cfg, &Default::default()).unwrap();
        let rt = roundtrip_residual(&cfg, &MapOptions::default(), &EvolutionOptions::default()).unwrap();
        assert!(rt.hausdorff[0] < 1e-3, "{:?}", rt.hausdorff);
        assert!(rt.driving_mismatch[0] < 1e-3);
    }
}
