//! Discrete energy balance
//! `dE/dt = -nu (|grad_L U|^2 + |grad_L B|^2) - <U^1, U^2> + <B^1, B^2>`.

use crate::error::{Error, Result};
use crate::field::MhdState;

use super::run::Trajectory;

/// Right-hand side of the balance law at one state.
pub fn energy_rate(state: &MhdState) -> f64 {
    let t = state.t;
    let nu = state.params.nu;
    let mut dissipation = 0.0;
    if nu != 0.0 {
        for c in state.u.comps.iter().chain(state.b.comps.iter()) {
            for (i, z) in c.coeffs.iter().enumerate() {
                if z.re != 0.0 || z.im != 0.0 {
                    dissipation += c.frequency(i).p(t) * z.norm_sqr();
                }
            }
        }
    }
    let u = &state.u.comps;
    let b = &state.b.comps;
    -nu * dissipation - u[0].inner(&u[1]) + b[0].inner(&b[1])
}

/// Nonuniform Simpson rule on `t0 < t1 < t2`.
pub fn simpson_nonuniform(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    (h1 + h2) / 6.0 * ((2.0 - h2 / h1) * f[0] + (h1 + h2).powi(2) / (h1 * h2) * f[1] + (2.0 - h1 / h2) * f[2])
}

/// Integral over `[a, b]` of the cubic through four points (two-point Gauss).
fn cubic_interval(t: &[f64], f: &[f64], a: f64, b: f64) -> f64 {
    let lagrange = |x: f64| {
        let mut acc = 0.0;
        for i in 0..t.len() {
            let mut w = 1.0;
            for j in 0..t.len() {
                if j != i {
                    w *= (x - t[j]) / (t[i] - t[j]);
                }
            }
            acc += w * f[i];
        }
        acc
    };
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let g = half / 3f64.sqrt();
    half * (lagrange(mid - g) + lagrange(mid + g))
}

/// Per-interval residual
/// `E(t_{i+1}) - E(t_i) + dropped - int_{t_i}^{t_{i+1}} dE/dt`, using a
/// locally cubic interpolant of the sampled rate. Interpolation stencils do
/// not reach across remap samples, where the rate has a jump.
pub fn energy_balance_residual(traj: &Trajectory) -> Result<Vec<f64>> {
    let s = &traj.samples;
    if s.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "energy balance needs at least 2 samples, found {}",
            s.len()
        )));
    }
    let n = s.len();
    let mut out = Vec::with_capacity(n - 1);
    let mut start = 0;
    while start < n - 1 {
        // segment [start, end]: no remap strictly inside
        let mut end = start + 1;
        while end < n - 1 && !s[end].remapped {
            end += 1;
        }
        let t: Vec<f64> = s[start..=end].iter().map(|x| x.t).collect();
        let r: Vec<f64> = (start..=end)
            .map(|i| {
                if i == end {
                    s[i].energy_rate_before_remap
                } else {
                    s[i].energy_rate
                }
            })
            .collect();
        let len = t.len();
        for i in 0..len - 1 {
            let lo = i.saturating_sub(1).min(len.saturating_sub(4));
            let hi = (lo + 4).min(len);
            let integral = cubic_interval(&t[lo..hi], &r[lo..hi], t[i], t[i + 1]);
            let g = start + i;
            out.push(s[g + 1].energy - s[g].energy + s[g + 1].dropped_energy - integral);
        }
        start = end;
    }
    Ok(out)
}
