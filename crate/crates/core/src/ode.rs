//! Adaptive Dormand-Prince 5(4) integrator for real first-order systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1`, calling `observe(t, y)`
/// after every accepted step (and once at `t0`). Returns the final state.
pub fn integrate<F, O>(
    f: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    tol: Tolerance,
    max_step: f64,
    mut observe: O,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let span = t1 - t0;
    let mut h = (span * 1e-6).min(max_step);
    observe(t, &y);
    f(t, &y, &mut k[0]);
    let mut steps = 0usize;
    while t < t1 {
        steps += 1;
        if steps > 50_000_000 {
            return Err(Error::Integrator("step budget exhausted".into()));
        }
        if t + h > t1 {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    acc += h * A[s][j] * k[j][i];
                }
                tmp[i] = acc;
            }
            f(t + C[s] * h, &tmp, &mut k[s]);
        }
        let mut err = 0.0f64;
        for i in 0..n {
            let mut s5 = y[i];
            let mut s4 = y[i];
            for s in 0..7 {
                s5 += h * B5[s] * k[s][i];
                s4 += h * B4[s] * k[s][i];
            }
            y5[i] = s5;
            let sc = tol.atol + tol.rtol * y[i].abs().max(s5.abs());
            err = err.max(((s5 - s4) / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Integrator(format!(
                "non-finite error estimate at t = {t}"
            )));
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
            // first-same-as-last: stage 7 was evaluated at the new point
            k.swap(0, 6);
            observe(t, &y);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(max_step);
        if h < 1e-14 * span.abs().max(1.0) * f64::EPSILON {
            return Err(Error::Integrator(format!("step size underflow at t = {t}")));
        }
    }
    Ok(y)
}
