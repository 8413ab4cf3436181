//! Acceptance run: one PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails. Reference values are computed here, independently of
//! the library.

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use multislit::capacity::{capacity_profile, knot_weights, lmr_f, lmr_g, partition_sum, ratio_diagnostic, reparametrize_capacity, truncation, weights, ProfileOptions, ReparamOptions, Weights};
use multislit::domain::{AnnularSector, CircularSlitDisk, HullConfig, Partition, SlitCurve};
use multislit::evolution::{roundtrip_residual, trace_hull, EvolutionOptions};
use multislit::mckernel::{canonical_slit_disk_map, harmonic_bundle, phi_kernel, Hole, HoleOracle, LaplaceOptions};
use multislit::scmap::{build_hull_map, power_bound, ConformalMapRep, MapOptions};
use multislit::verify::fixtures;

type Verdict = (bool, String);
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

/// Tip modulus of the radial slit with `lmr = t`: the root in (0, 1) of
/// `q r² + (2q − 4) r + q = 0`, `q = e^{−t}`.
fn radial_modulus(t: f64) -> f64 {
    let q = (-t).exp();
    (2.0 - q - 2.0 * (1.0 - q).sqrt()) / q
}

fn mobius(zeta: Complex64, z: Complex64) -> Complex64 {
    (zeta + z) / (zeta - z)
}

fn capacity(cfg: &HullConfig) -> HullConfig {
    reparametrize_capacity(cfg, &ReparamOptions::default()).expect("reparametrization")
}

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn a1() -> Verdict {
    let start = Instant::now();
    assert!((radial_modulus((4.0f64 / 3.0).ln()) - 1.0 / 3.0).abs() < 1e-15);
    let times = [0.1, 0.2877, 0.5];
    let hull = trace_hull(&CircularSlitDisk::disk(), &fixtures::radial_driving(), 0.5, &times, &EvolutionOptions::default()).unwrap();
    let c = &hull.config.curves[0];
    let angle = max(c.points.iter().map(|p| p.im.atan2(p.re).abs()));
    let modulus = max(times.iter().map(|&t| {
        let i = c.times.iter().position(|&s| s == t).expect("output time");
        (c.points[i].norm() - radial_modulus(t)).abs()
    }));
    let secs = start.elapsed().as_secs_f64();
    (angle < 1e-4 && modulus < 1e-5 && secs < 10.0, format!("angle {angle:.2e} (< 1e-4), |r − r*| {modulus:.2e} (≤ 1e-5), {secs:.1} s (< 10)"))
}

fn a2(configs: &[HullConfig]) -> Verdict {
    let start = Instant::now();
    let worst = max(configs.iter().map(|cfg| {
        let grid = cfg.knot_times();
        let w = knot_weights(cfg, &grid, &MapOptions::default()).unwrap();
        max((0..grid.len()).map(|i| (w.lambda.iter().map(|l| l[i]).sum::<f64>() - 1.0).abs()))
    }));
    let secs = start.elapsed().as_secs_f64();
    (worst <= 1e-3 && secs < 120.0, format!("max |Σλ − 1| {worst:.2e} (≤ 1e-3) over {} configs, {secs:.1} s (< 120)", configs.len()))
}

fn a3() -> Verdict {
    let cfg = capacity(&fixtures::symmetric_pair());
    let grid = cfg.knot_times();
    let w = knot_weights(&cfg, &grid, &MapOptions::default()).unwrap();
    let lambda = max(w.lambda.iter().flatten().map(|l| (l - 0.5).abs()));
    let h = cfg.horizon;
    let p = capacity_profile(&cfg, &[0.25 * h, 0.5 * h, 0.75 * h, h], &ProfileOptions::default()).unwrap();
    let gap = max(p.c[0].iter().zip(&p.c[1]).map(|(a, b)| (a - b).abs()));
    (lambda <= 1e-3 && gap <= 1e-6, format!("max |λ_k − 1/2| {lambda:.2e} (≤ 1e-3), max |c_1 − c_2| {gap:.2e} (≤ 1e-6)"))
}

fn a4(configs: &[HullConfig]) -> Verdict {
    let worst = max(configs.iter().map(|cfg| {
        let grid: Vec<f64> = (1..=5).map(|i| cfg.horizon * i as f64 / 5.0).collect();
        let p = capacity_profile(cfg, &grid, &ProfileOptions::default()).unwrap();
        max(grid.iter().enumerate().map(|(i, t)| ((0..cfg.slit_count()).map(|k| p.c[k][i]).sum::<f64>() - t).abs()))
    }));
    (worst <= 1e-3, format!("max |Σc_k − t| {worst:.2e} (≤ 1e-3)"))
}

fn a5() -> Verdict {
    let opts = MapOptions::default();
    let cfg = HullConfig::new(vec![fixtures::bent_curve(0, -0.7, 0.4, 0.55, 9)], 1.0).validate().unwrap();
    let t = 0.75;
    let parts = [Partition::uniform(0.0, t, 3).unwrap(), Partition::uniform(0.0, t, 11).unwrap(), Partition::new(vec![0.0, 0.01, 0.3, 0.31, 0.6, t]).unwrap()];
    let target = lmr_g(&cfg, t, &opts).unwrap();
    let sums: Vec<f64> = parts.iter().map(|z| partition_sum(&cfg, 0, z, &opts).unwrap()).collect();
    let worst = max(sums.iter().map(|s| (s - target).abs()));
    // radial slit: lmr of the slit to modulus r is −ln(4r/(1+r)²)
    let radial = HullConfig::new(vec![SlitCurve::radial(0, 0.3, 0.4, 8, 1.0)], 1.0).validate().unwrap();
    let r: f64 = 1.0 - 0.6 * 0.5;
    let closed = -(4.0 * r / (1.0 + r).powi(2)).ln();
    let direct = lmr_g(&radial, 0.5, &opts).unwrap();
    let radial_sum = partition_sum(&radial, 0, &Partition::uniform(0.0, 0.5, 7).unwrap(), &opts).unwrap();
    let closed_err = (direct - closed).abs().max((radial_sum - closed).abs());
    (worst <= 1e-10 && closed_err <= 1e-10, format!("max |S_Z − lmr(g_t)| {worst:.2e} (≤ 1e-10), radial closed form {closed_err:.2e}"))
}

fn a6(configs: &[HullConfig]) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let pairs: Vec<(usize, usize, f64, f64, f64)> = (0..100)
        .map(|i| {
            let c = i % configs.len();
            let h = configs[c].horizon;
            let d = rng.gen_range(0.01..0.1) * h;
            (c, rng.gen_range(0..configs[c].slit_count()), rng.gen_range(0.0..h - d), rng.gen_range(0.0..h - d), d)
        })
        .collect();
    let opts = MapOptions::default();
    let violations = pairs
        .par_iter()
        .filter(|&&(c, k, t, tau, d)| {
            let cfg = &configs[c];
            let f = |a: f64, b: f64| lmr_f(cfg, k, a, b, &opts).unwrap();
            let base = f(t, tau);
            !(f(t + d, tau) > base && f(t, tau + d) > base)
        })
        .count();
    (violations == 0, format!("{violations} violations in 100 pairs"))
}

fn a7(two: &HullConfig) -> Verdict {
    let start = Instant::now();
    let rt = roundtrip_residual(two, &MapOptions::default(), &EvolutionOptions::default()).unwrap();
    // Hausdorff distance recomputed from the point sets
    let dist = |a: &[Complex64], b: &[Complex64]| max(a.iter().map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)));
    let haus = max(two.curves.iter().zip(&rt.traced.config.curves).map(|(a, b)| dist(&a.points, &b.points).max(dist(&b.points, &a.points))));
    let drive = max(rt.driving_mismatch.iter().copied());
    let secs = start.elapsed().as_secs_f64();
    (haus <= 1e-2 && drive <= 1e-2 && secs < 300.0, format!("Hausdorff {haus:.2e}, driving {drive:.2e} (≤ 1e-2), {secs:.1} s (< 300)"))
}

fn a8() -> Verdict {
    let zeta = Complex64::new(1.0, 0.0);
    let field = phi_kernel(&CircularSlitDisk::disk(), zeta, &LaplaceOptions::default()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..20 {
            let z = Complex64::from_polar(0.9 * (i as f64 + 1.0) / 10.0, TAU * (j as f64 + 0.25) / 20.0);
            worst = worst.max((field.eval(z).unwrap() - mobius(zeta, z)).norm());
        }
    }
    (worst <= 1e-6, format!("max |Φ − (ζ+z)/(ζ−z)| {worst:.2e} (≤ 1e-6) on 200 points"))
}

fn a9() -> Verdict {
    let domain = fixtures::one_slit_domain();
    let zeta = Complex64::new(1.0, 0.0);
    let field = phi_kernel(&domain, zeta, &LaplaceOptions::default()).unwrap();
    let circle = max((0..500).map(|i| 0.1 + (TAU - 0.2) * i as f64 / 499.0).map(|th| field.eval(Complex64::from_polar(1.0, th)).unwrap().re.abs()));
    let slit = domain.slits[0];
    let levels: Vec<f64> = (0..=100).map(|i| field.eval_on_slit(0, slit.alpha + (slit.beta - slit.alpha) * i as f64 / 100.0).unwrap().re).collect();
    let mean = levels.iter().sum::<f64>() / levels.len() as f64;
    let spread = max(levels.iter().map(|l| (l - mean).abs())) / mean.abs();
    let origin = field.eval(Complex64::new(0.0, 0.0)).unwrap();
    let bundle = harmonic_bundle(&[Hole::Arc(slit)], &LaplaceOptions::default()).unwrap();
    let p = bundle.matrix();
    let spd = p.clone().cholesky().is_some() && (p.clone() - p.transpose()).amax() <= 1e-8 * p.amax();
    let pass = circle <= 1e-4 && spread <= 1e-4 && origin == Complex64::new(1.0, 0.0) && spd && bundle.min_eigenvalue > 0.0;
    (pass, format!("|Re Φ| on circle {circle:.2e}, slit spread {spread:.2e} (≤ 1e-4), Φ(ζ,0) = {origin}, P SPD {spd}"))
}

fn a10(two: &HullConfig) -> Verdict {
    let t = 0.1;
    let devs: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|d| (ratio_diagnostic(two, 0, t, t + d, t, t + d, &MapOptions::default()).unwrap() - 1.0).abs()).collect();
    let monotone = devs[1] < devs[0] && devs[2] < devs[1];
    (monotone && devs[2] <= 5e-3, format!("deviations {:.2e} {:.2e} {:.2e}, terminal ≤ 5e-3", devs[0], devs[1], devs[2]))
}

fn a11(two: &HullConfig) -> Verdict {
    let m = two.slit_count();
    let knots = two.knot_times();
    let opts = MapOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut violations, mut checked) = (0usize, 0usize);
    for frac in [0.25, 0.5, 0.75] {
        let i0 = knots.partition_point(|&t| t < frac * two.horizon);
        let before = build_hull_map(two, &vec![knots[i0]; m], &opts).unwrap();
        for k in 0..m {
            let xi = before.tips[k].arg();
            let (a, b) = (xi + 0.5, xi + TAU - 0.5);
            let sector = AnnularSector::new(0.5, a, b).unwrap();
            let samples: Vec<Complex64> = (0..300).map(|_| Complex64::from_polar(rng.gen_range(0.5..1.0), rng.gen_range(a..b))).collect();
            for step in [1, 3] {
                let after = build_hull_map(two, &truncation(m, k, knots[(i0 + step).min(knots.len() - 1)], knots[i0]), &opts).unwrap();
                let map = ConformalMapRep::transition(&before, &after).unwrap();
                let delta = power_bound(&map, &sector, 40, 80, &samples).unwrap().delta;
                for z in &samples {
                    let r = z.norm();
                    let f = map.evaluate(*z).unwrap().norm();
                    if !(r.powf(1.0 + delta) <= f * (1.0 + 1e-12) && f <= r.powf(1.0 - delta) * (1.0 + 1e-12)) {
                        violations += 1;
                    }
                    checked += 1;
                }
            }
        }
    }
    (violations == 0, format!("{violations} violations in {checked} samples"))
}

fn normalized(w: &Weights) -> Vec<f64> {
    (0..w.grid.len()).flat_map(|i| {
        let s: f64 = w.lambda.iter().map(|l| l[i]).sum();
        w.lambda.iter().map(move |l| l[i] / s).collect::<Vec<_>>()
    }).collect()
}

fn a12() -> Verdict {
    let (hole, cfg) = fixtures::doubly_connected();
    let lap = LaplaceOptions { outer_degree: 32, hole_degree: 24, corner_poles: 24, tol: 1e-4, ..Default::default() };
    let grid = [0.25, 0.5, 0.75];
    let direct = HoleOracle { map: MapOptions::default(), laplace: lap, holes: vec![hole.clone()] };
    let wd = weights(&cfg, &grid, 0.05, &direct).unwrap();
    let canon = canonical_slit_disk_map(&[hole], Complex64::new(0.0, 0.0), &lap).unwrap();
    let curves = cfg
        .curves
        .iter()
        .map(|c| {
            let mut pts: Vec<Complex64> = c.points.iter().map(|&p| canon.eval(p)).collect();
            let r = pts[0].norm();
            pts[0] /= r;
            SlitCurve::new(c.slit_index, c.times.clone(), pts)
        })
        .collect();
    let moved = HullConfig::new(curves, cfg.horizon).with_domain(canon.image.clone()).validate().unwrap();
    let reduced = HoleOracle::for_domain(&canon.image, MapOptions::default(), lap);
    let wr = weights(&moved, &grid, 0.05, &reduced).unwrap();
    let worst = max(normalized(&wd).iter().zip(normalized(&wr)).map(|(a, b)| (a - b).abs()));
    (worst <= 5e-3, format!("max normalized weight difference {worst:.2e} (≤ 5e-3)"))
}

fn main() {
    let configs: Vec<HullConfig> = fixtures::random_configs(fixtures::SEED, 5).iter().map(capacity).collect();
    let two = capacity(&fixtures::two_slits());
    let criteria: Vec<Criterion> = vec![
        ("A1", Box::new(a1)),
        ("A2", Box::new(|| a2(&configs))),
        ("A3", Box::new(a3)),
        ("A4", Box::new(|| a4(&configs))),
        ("A5", Box::new(a5)),
        ("A6", Box::new(|| a6(&configs))),
        ("A7", Box::new(|| a7(&two))),
        ("A8", Box::new(a8)),
        ("A9", Box::new(a9)),
        ("A10", Box::new(|| a10(&two))),
        ("A11", Box::new(|| a11(&two))),
        ("A12", Box::new(a12)),
    ];
    let mut failed = Vec::new();
    for (id, run) in &criteria {
        let (pass, detail) = run();
        println!("{id} {}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(*id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        std::process::exit(1);
    }
}
