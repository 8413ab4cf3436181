//! Adaptive Dormand–Prince 5(4) integration of scalar complex ODEs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    /// Local error target per step, used as both absolute and relative tolerance.
    pub tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol: 1e-9, h_init: 1e-3, h_min: 1e-15, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl OdeStats {
    pub fn add(&mut self, other: OdeStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One trial step; `Err` from the right-hand side is passed through.
fn trial<F>(f: &F, t: f64, z: Complex64, k1: Complex64, h: f64) -> Result<(Complex64, Complex64, Complex64)>
where
    F: Fn(f64, Complex64) -> Result<Complex64>,
{
    let mut k = [Complex64::new(0.0, 0.0); 7];
    k[0] = k1;
    for s in 1..7 {
        let mut acc = z;
        for (j, kj) in k.iter().enumerate().take(s) {
            acc += h * A[s][j] * kj;
        }
        k[s] = f(t + C[s] * h, acc)?;
    }
    let mut z5 = z;
    for j in 0..6 {
        z5 += h * A[6][j] * k[j];
    }
    let mut err = Complex64::new(0.0, 0.0);
    for j in 0..7 {
        err += h * E[j] * k[j];
    }
    Ok((z5, err, k[6]))
}

/// Integrates `z' = f(t, z)` from `t0` to `t1` (either direction). `h` holds
/// the step-size guess and is updated for reuse across calls.
pub fn integrate<F>(f: &F, t0: f64, t1: f64, z0: Complex64, h: &mut f64, opts: &OdeOptions) -> Result<(Complex64, OdeStats)>
where
    F: Fn(f64, Complex64) -> Result<Complex64>,
{
    let mut stats = OdeStats::default();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((z0, stats));
    }
    let dir = span.signum();
    let mut t = t0;
    let mut z = z0;
    let mut k1 = f(t, z)?;
    let mut step = if h.abs() > 0.0 { h.abs() } else { opts.h_init };
    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 1e-15 * (1.0 + t1.abs()) {
            break;
        }
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integrator(format!("step budget exhausted at t = {t}")));
        }
        let last = step >= remaining;
        let hs = if last { remaining } else { step } * dir;
        match trial(f, t, z, k1, hs) {
            Ok((zn, err, k7)) => {
                let scale = opts.tol * (1.0 + z.norm().max(zn.norm()));
                let ratio = err.norm() / scale;
                if ratio <= 1.0 && zn.is_finite() {
                    t = if last { t1 } else { t + hs };
                    z = zn;
                    k1 = k7;
                    stats.accepted += 1;
                    let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                    if !last || grow < 1.0 {
                        step = hs.abs() * grow;
                    }
                } else {
                    stats.rejected += 1;
                    let shrink = if ratio.is_finite() { (0.9 * ratio.powf(-0.25)).clamp(0.1, 0.5) } else { 0.1 };
                    step = hs.abs() * shrink;
                }
            }
            Err(e) => {
                // the trial stage reached a singular point; retreat
                stats.rejected += 1;
                step = hs.abs() * 0.1;
                if step < opts.h_min {
                    return Err(e);
                }
            }
        }
        if step < opts.h_min {
            return Err(Error::Integrator(format!("step size underflow at t = {t}")));
        }
    }
    *h = step;
    Ok((z, stats))
}
