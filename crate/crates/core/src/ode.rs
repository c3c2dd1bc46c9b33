//! Adaptive Dormand–Prince 5(4) integrator for small autonomous or
//! time-dependent systems.

use crate::error::{Error, Result};

/// Tolerances of [`dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerances {
    /// Relative local error tolerance.
    pub rel_tol: f64,
    /// Absolute local error tolerance.
    pub abs_tol: f64,
    /// Maximum number of accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`, returning `y(t1)` and
/// the number of accepted steps.
pub fn dopri5<const N: usize, F>(f: F, t0: f64, y0: [f64; N], t1: f64, tol: &OdeTolerances) -> Result<([f64; N], usize)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if !(t1 >= t0) {
        return Err(Error::InvalidParameter("integration interval must be forward".into()));
    }
    let mut t = t0;
    let mut y = y0;
    if t1 == t0 {
        return Ok((y, 0));
    }
    let mut h = (t1 - t0) * 1e-3;
    let mut accepted = 0;
    let mut k = [[0.0; N]; 7];
    for _ in 0..tol.max_steps {
        if t >= t1 {
            return Ok((y, accepted));
        }
        if t + h > t1 {
            h = t1 - t;
        }
        k[0] = f(t, &y);
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                for (j, kj) in k.iter().enumerate().take(s) {
                    *yi += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let sc = tol.abs_tol + tol.rel_tol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (d5 - d4)).abs() / sc);
        }
        if err <= 1.0 || h.abs() < 1e-14 * t.abs().max(1.0) {
            t += h;
            y = y5;
            accepted += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Err(Error::NonTermination(tol.max_steps))
}
