//! Dormand-Prince 5(4) integration of small complex linear systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub h_max: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-11,
            rtol: 1e-9,
            h_max: f64::INFINITY,
            h_init: None,
            h_min: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

/// Accepted step times and states; includes both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo(y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])], out: &mut [Complex64]) {
    for i in 0..y.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (with `t1 >= t0`).
///
/// `f(t, y, dy)` writes the derivative into `dy`.
pub fn dopri45(
    mut f: impl FnMut(f64, &[Complex64], &mut [Complex64]),
    t0: f64,
    y0: &[Complex64],
    t1: f64,
    opts: &OdeOptions,
) -> Result<OdeSolution> {
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y.clone()],
    };
    if t1 <= t0 {
        return Ok(sol);
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    f(t, &y, &mut k1);

    let span = t1 - t0;
    let mut h = opts.h_init.unwrap_or_else(|| {
        let scale: f64 = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let rate: f64 = k1.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if rate > 0.0 {
            (0.01 * (scale + opts.atol) / rate).min(span)
        } else {
            span * 1e-3
        }
    });
    h = h.min(opts.h_max).max(opts.h_min);
    let mut steps = 0usize;
    let mut prev_err: f64 = 1e-4;

    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        combo(&y, h, &[(A21, &k1)], &mut tmp);
        f(t + C2 * h, &tmp, &mut k2);
        combo(&y, h, &[(A31, &k1), (A32, &k2)], &mut tmp);
        f(t + C3 * h, &tmp, &mut k3);
        combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)], &mut tmp);
        f(t + C4 * h, &tmp, &mut k4);
        combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &mut tmp);
        f(t + C5 * h, &tmp, &mut k5);
        combo(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            &mut tmp,
        );
        f(t + h, &tmp, &mut k6);
        combo(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            &mut ynew,
        );
        f(t + h, &ynew, &mut k7);

        let mut err = 0.0f64;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            sol.times.push(t);
            sol.states.push(y.clone());
            // PI controller
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0)).clamp(0.2, 5.0)
            };
            prev_err = err.max(1e-4);
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < opts.h_min {
                return Err(Error::StepSizeUnderflow { t, h });
            }
        }
    }
    Ok(sol)
}
