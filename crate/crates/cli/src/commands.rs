use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use multislit::capacity::{capacity_profile, reparametrize_capacity};
use multislit::domain::{CircularSlitDisk, DrivingSpec, HullConfig};
use multislit::evolution::{extract_driving, solve_forward, trace_hull};
use multislit::mckernel::phi_kernel;
use multislit::verify::{Suite, CHECKS};

use crate::failure::Failure;
use crate::io::{read_json, OutputDir};
use crate::manifest::RunManifest;
use crate::{Command, Global};

/// Input of `forward` and `trace-hull`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowConfig {
    #[serde(default)]
    pub domain: CircularSlitDisk,
    /// Points followed by `forward`; ignored by `trace-hull`.
    #[serde(default)]
    pub marked: Vec<Complex64>,
    /// Defaults to the end of the driving grid.
    #[serde(default)]
    pub horizon: Option<f64>,
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    point_id: usize,
    re: f64,
    im: f64,
    lmr: f64,
}

#[derive(Serialize)]
struct DrivingRow {
    t: f64,
    k: usize,
    theta: f64,
    lambda: f64,
}

#[derive(Serialize)]
struct CurveRow {
    slit_index: usize,
    t: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct CapacityRow {
    t: f64,
    k: usize,
    c_k: f64,
    lambda_k: f64,
    sum_lambda: f64,
    sum_c_minus_t: f64,
    lmr: f64,
    cauchy_gap: f64,
}

#[derive(Serialize)]
struct KernelRow {
    re_z: f64,
    im_z: f64,
    re_phi: f64,
    im_phi: f64,
}

pub fn run(cmd: &Command, g: &Global, manifest: &mut RunManifest, out: Option<&mut OutputDir>) -> Result<(), Failure> {
    match (cmd, out) {
        (Command::Verify { list, fixture, only, .. }, out) => verify(*list, fixture.as_deref(), only, manifest, out),
        (_, None) => unreachable!("every other command has an output directory"),
        (Command::Forward { config, driving, .. }, Some(out)) => {
            let (cfg, d1) = read_json::<FlowConfig>(config)?;
            let (drv, d2) = read_json::<DrivingSpec>(driving)?;
            manifest.inputs = vec![d1, d2];
            forward(&cfg, &drv, manifest, out)
        }
        (Command::TraceHull { config, driving, samples, .. }, Some(out)) => {
            let (cfg, d1) = read_json::<FlowConfig>(config)?;
            let (drv, d2) = read_json::<DrivingSpec>(driving)?;
            manifest.inputs = vec![d1, d2];
            hull(&cfg, &drv, *samples, manifest, out)
        }
        (Command::Extract { config, samples, .. }, Some(out)) => {
            let (cfg, d) = read_json::<HullConfig>(config)?;
            manifest.inputs = vec![d];
            extract(cfg.validate()?, *samples, g.reparam, manifest, out)
        }
        (Command::Kernel { domain, zeta, grid, .. }, Some(out)) => {
            let (dom, d1) = read_json::<CircularSlitDisk>(domain)?;
            let (points, d2) = read_json::<Vec<Complex64>>(grid)?;
            manifest.inputs = vec![d1, d2];
            kernel(&dom, parse_point(zeta)?, &points, manifest, out)
        }
        (Command::Reparam { config, .. }, Some(out)) => {
            let (cfg, d) = read_json::<HullConfig>(config)?;
            manifest.inputs = vec![d];
            let cfg = reparametrize_capacity(&cfg.validate()?, &manifest.settings.reparam)?;
            out.json("reparam.json", &cfg)?;
            out.csv("curves.csv", curve_rows(&cfg))?;
            manifest.summary = json!({ "horizon": cfg.horizon, "knots": cfg.knot_times().len() });
            Ok(())
        }
    }
}

fn parse_point(s: &str) -> Result<Complex64, Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Failure::input("ParseError", format!("expected a point as re,im, got {s:?}"));
    match parts.as_slice() {
        [re, im] => Ok(Complex64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn curve_rows(cfg: &HullConfig) -> impl Iterator<Item = CurveRow> + '_ {
    cfg.curves.iter().flat_map(|c| c.times.iter().zip(&c.points).map(move |(&t, p)| CurveRow { slit_index: c.slit_index, t, re: p.re, im: p.im }))
}

fn driving_rows(d: &DrivingSpec) -> Vec<DrivingRow> {
    let mut rows = Vec::new();
    for (i, &t) in d.grid.iter().enumerate() {
        for k in 0..d.slit_count() {
            rows.push(DrivingRow { t, k, theta: d.angles[k][i], lambda: d.weights[k][i] });
        }
    }
    rows
}

fn forward(cfg: &FlowConfig, drv: &DrivingSpec, manifest: &mut RunManifest, out: &mut OutputDir) -> Result<(), Failure> {
    cfg.domain.validate()?;
    drv.validate()?;
    let horizon = cfg.horizon.unwrap_or(drv.horizon());
    let trace = solve_forward(&cfg.domain, drv, &cfg.marked, horizon, &manifest.settings.evolution)?;
    let mut rows = Vec::new();
    for (i, &t) in trace.times.iter().enumerate() {
        for (p, tr) in trace.trajectories.iter().enumerate() {
            if let Some(z) = tr.values.get(i) {
                rows.push(TraceRow { t, point_id: p, re: z.re, im: z.im, lmr: trace.lmr[i] });
            }
        }
    }
    out.csv("trace.csv", rows)?;
    out.json("trace.json", &trace)?;
    manifest.flags = trace.flags.clone();
    manifest.summary = json!({
        "horizon": horizon,
        "points": cfg.marked.len(),
        "times": trace.times.len(),
        "final_lmr": trace.lmr.last(),
        "kernel_residual": trace.kernel_residual.last(),
        "accepted_steps": trace.stats.accepted,
        "rejected_steps": trace.stats.rejected,
    });
    Ok(())
}

fn hull(cfg: &FlowConfig, drv: &DrivingSpec, samples: usize, manifest: &mut RunManifest, out: &mut OutputDir) -> Result<(), Failure> {
    cfg.domain.validate()?;
    drv.validate()?;
    if samples == 0 {
        return Err(Failure::input("InvalidArgument", "--samples must be positive"));
    }
    let horizon = cfg.horizon.unwrap_or(drv.horizon());
    let times: Vec<f64> = (1..=samples).map(|i| horizon * i as f64 / samples as f64).collect();
    let traced = trace_hull(&cfg.domain, drv, horizon, &times, &manifest.settings.evolution)?;
    out.csv("curves.csv", curve_rows(&traced.config))?;
    out.json("hull.json", &traced.config)?;
    manifest.flags.extend(traced.violation.clone());
    manifest.summary = json!({ "horizon": horizon, "slits": traced.config.slit_count(), "samples": samples });
    Ok(())
}

fn extract(mut cfg: HullConfig, samples: usize, reparam: bool, manifest: &mut RunManifest, out: &mut OutputDir) -> Result<(), Failure> {
    if samples == 0 {
        return Err(Failure::input("InvalidArgument", "--samples must be positive"));
    }
    if reparam {
        cfg = reparametrize_capacity(&cfg, &manifest.settings.reparam)?;
        out.json("reparam.json", &cfg)?;
    }
    let grid = knot_grid(&cfg, samples);
    let profile = capacity_profile(&cfg, &grid, &manifest.settings.profile)?;
    let mut rows = Vec::new();
    for (i, &t) in grid.iter().enumerate() {
        for k in 0..cfg.slit_count() {
            rows.push(CapacityRow {
                t,
                k,
                c_k: profile.c[k][i],
                lambda_k: profile.lambda[k][i],
                sum_lambda: profile.sum_lambda(i),
                sum_c_minus_t: profile.sum_c(i) - t,
                lmr: profile.lmr[i],
                cauchy_gap: profile.cauchy_gap,
            });
        }
    }
    out.csv("capacity.csv", rows)?;
    let lmr_end = *profile.lmr.last().unwrap();
    if (lmr_end - cfg.horizon).abs() <= 1e-6 {
        let driving = extract_driving(&cfg, &cfg.knot_times(), &manifest.settings.map)?;
        out.csv("driving.csv", driving_rows(&driving))?;
        out.json("driving.json", &driving)?;
    } else {
        manifest.flags.push(format!("NotCapacityParametrized: lmr at the horizon is {lmr_end}; driving functions skipped, rerun with --reparam"));
    }
    let worst = |f: &dyn Fn(usize) -> f64| (0..grid.len()).map(f).fold(0.0, f64::max);
    manifest.summary = json!({
        "horizon": cfg.horizon,
        "depth": profile.depth,
        "cauchy_gap": profile.cauchy_gap,
        "max_sum_lambda_error": worst(&|i| (profile.sum_lambda(i) - 1.0).abs()),
        "max_sum_c_error": worst(&|i| (profile.sum_c(i) - grid[i]).abs()),
    });
    Ok(())
}

/// About `samples` curve knots spread evenly over `(0, horizon]`; the
/// horizon is always included.
fn knot_grid(cfg: &HullConfig, samples: usize) -> Vec<f64> {
    let knots = cfg.knot_times();
    let mut grid: Vec<f64> = (1..=samples)
        .map(|i| {
            let target = cfg.horizon * i as f64 / samples as f64;
            let j = knots.partition_point(|&t| t < target).min(knots.len() - 1);
            if j > 0 && target - knots[j - 1] < knots[j] - target {
                knots[j - 1]
            } else {
                knots[j]
            }
        })
        .filter(|&t| t > 0.0)
        .collect();
    grid.dedup();
    grid
}

fn kernel(dom: &CircularSlitDisk, zeta: Complex64, points: &[Complex64], manifest: &mut RunManifest, out: &mut OutputDir) -> Result<(), Failure> {
    dom.validate()?;
    if let Some(z) = points.iter().find(|z| z.norm() >= 1.0 || z.norm().is_nan() || dom.distance_to_slits(**z) <= 0.0) {
        return Err(Failure::input("OutsideDomain", format!("sample point {z} is not inside the domain")));
    }
    let field = phi_kernel(dom, zeta, &manifest.settings.evolution.laplace)?;
    let values = points.iter().map(|&z| field.eval(z)).collect::<Result<Vec<_>, _>>()?;
    out.csv("kernel.csv", points.iter().zip(&values).map(|(z, v)| KernelRow { re_z: z.re, im_z: z.im, re_phi: v.re, im_phi: v.im }))?;
    out.json("bundle.json", &field)?;
    manifest.summary = json!({
        "samples": points.len(),
        "residual": field.residual,
        "min_re_phi": values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min),
    });
    Ok(())
}

fn verify(list: bool, fixture: Option<&std::path::Path>, only: &[String], manifest: &mut RunManifest, out: Option<&mut OutputDir>) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut so = stdout.lock();
    if list {
        for (id, title) in CHECKS {
            let _ = writeln!(so, "{id} {title}");
        }
        return Ok(());
    }
    let ids: Vec<&str> = if only.is_empty() { CHECKS.iter().map(|c| c.0).collect() } else { only.iter().map(String::as_str).collect() };
    if let Some(bad) = ids.iter().find(|id| !CHECKS.iter().any(|c| c.0 == **id)) {
        return Err(Failure::input("UnknownCheck", format!("no check named {bad}")));
    }
    let suite = match fixture {
        Some(path) => {
            let (configs, d) = read_json::<Vec<HullConfig>>(path)?;
            manifest.inputs.push(d);
            Suite::with_configs(configs)
        }
        None => Suite::shipped(),
    };
    let mut results = Vec::new();
    for id in ids {
        let r = suite.run(id);
        let _ = writeln!(so, "{}", r.line());
        let _ = so.flush();
        results.push(r);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.id.as_str()).collect();
    manifest.summary = json!({ "passed": results.len() - failed.len(), "failed": failed });
    if let Some(out) = out {
        out.json("report.json", &results)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::verify(format!("failed checks: {}", failed.join(", "))))
    }
}
