//! Shipped fixtures for the verification suite.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{ArcSlit, CircularSlitDisk, DrivingSpec, HullConfig, SlitCurve};
use crate::mckernel::Hole;

/// Seed of the randomized configurations.
pub const SEED: u64 = 20_240_611;

/// Curve from `e^{iθ}` inward to modulus `1 − len`, turning by `bend`
/// radians quadratically in its parameter; `n` segments on `[0, 1]`.
pub fn bent_curve(k: usize, theta: f64, bend: f64, len: f64, n: usize) -> SlitCurve {
    let times = (0..=n).map(|i| i as f64 / n as f64).collect::<Vec<_>>();
    let points = times.iter().map(|&s| Complex64::from_polar(1.0 - len * s, theta + bend * s * s)).collect();
    SlitCurve::new(k, times, points)
}

/// One slit, `ξ ≡ 1`, `λ ≡ 1` up to time 0.5.
pub fn radial_driving() -> DrivingSpec {
    DrivingSpec::constant(&[0.0], &[1.0], 0.5)
}

/// `count` admissible two- and three-slit configurations (not yet in
/// capacity parametrization).
pub fn random_configs(seed: u64, count: usize) -> Vec<HullConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = if out.len() % 2 == 0 { 2 } else { 3 };
        let start = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let curves = (0..m)
            .map(|k| {
                let theta = start + std::f64::consts::TAU * k as f64 / m as f64 + rng.gen_range(-0.3..0.3);
                bent_curve(k, theta, rng.gen_range(-0.3..0.3), rng.gen_range(0.35..0.55), 10)
            })
            .collect();
        if let Ok(cfg) = HullConfig::new(curves, 1.0).validate() {
            out.push(cfg);
        }
    }
    out
}

/// Two slits mirrored in the real axis.
pub fn symmetric_pair() -> HullConfig {
    let a = bent_curve(0, 0.9, 0.25, 0.5, 12);
    let b = SlitCurve::new(1, a.times.clone(), a.points.iter().map(|p| p.conj()).collect());
    HullConfig::new(vec![a, b], 1.0)
}

/// Smooth two-slit hull: a long slit and a short one across the disk.
pub fn two_slits() -> HullConfig {
    HullConfig::new(vec![bent_curve(0, 0.2, 0.25, 0.75, 24), bent_curve(1, 3.2, -0.2, 0.25, 24)], 1.0)
}

/// Circularly slit disk with one slit.
pub fn one_slit_domain() -> CircularSlitDisk {
    CircularSlitDisk::new(vec![ArcSlit::new(0.5, 2.0, 3.8)])
}

/// Disk minus a small disk, with two slits growing from the circle.
pub fn doubly_connected() -> (Hole, HullConfig) {
    let hole = Hole::Disk { center: Complex64::new(0.0, -0.55), radius: 0.12 };
    (hole, HullConfig::new(vec![bent_curve(0, 0.2, 0.2, 0.5, 20), bent_curve(1, 3.2, -0.2, 0.45, 20)], 1.0))
}
