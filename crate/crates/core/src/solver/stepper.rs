//! Integrating-factor RK4 (Lawson) time stepping.
//!
//! The per-mode linear part `alpha d_sigma` plus `nu Delta_L` is integrated
//! exactly: with `Z^+- = U +- B` it reduces to
//! `Z^+-(b) = e^{+- i alpha s (b - a)} e^{-nu int_a^b p} Z^+-(a)`.
//! Everything else goes through classical RK4 in the transformed variable.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::PhysicalField;
use crate::field::{MhdState, SpectralVectorField};
use crate::grid::PhysParams;
use crate::spectral::{div_l_residual, leray_project_in_place};

use super::rhs::{check_output, RhsEvaluator};

/// Relative `div_L` residual tolerated after each step.
pub const STEP_DIV_TOL: f64 = 1e-11;

/// Exact propagator of the linear part from `t0` to `t1`.
pub fn propagate(
    u: &SpectralVectorField,
    b: &SpectralVectorField,
    t0: f64,
    t1: f64,
    params: &PhysParams,
) -> (SpectralVectorField, SpectralVectorField) {
    let mut nu_out = u.clone();
    let mut nb_out = b.clone();
    let sigma = params.sigma;
    let proto = &u.comps[0];
    let factors: Vec<(f64, f64, f64)> = (0..proto.coeffs.len())
        .into_par_iter()
        .map(|x| {
            let fr = proto.frequency(x);
            let visc = (-params.nu * fr.p_integral(t0, t1)).exp();
            let theta = params.alpha * sigma.symbol(fr.k, fr.l) * (t1 - t0);
            let (sn, cs) = theta.sin_cos();
            (visc, cs * visc, sn * visc)
        })
        .collect();
    for c in 0..3 {
        let uc = &u.comps[c].coeffs;
        let bc = &b.comps[c].coeffs;
        let (ou, ob) = (&mut nu_out.comps[c].coeffs, &mut nb_out.comps[c].coeffs);
        ou.par_iter_mut()
            .zip(ob.par_iter_mut())
            .enumerate()
            .for_each(|(x, (o_u, o_b))| {
                let (_, cs, sn) = factors[x];
                let isn = Complex64::new(0.0, sn);
                *o_u = uc[x] * cs + isn * bc[x];
                *o_b = isn * uc[x] + bc[x] * cs;
            });
    }
    nu_out.set_t_frame(t1);
    nb_out.set_t_frame(t1);
    (nu_out, nb_out)
}

/// Upper bound on `sup |U| + sup |B|` from absolute coefficient sums.
pub fn velocity_bound(state: &MhdState) -> f64 {
    let bound = |v: &SpectralVectorField| {
        v.comps
            .iter()
            .map(|c| c.coeffs.iter().map(|z| z.norm()).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt()
    };
    bound(&state.u) + bound(&state.b)
}

/// Largest admissible `dt` under `dt <= 0.5 min(dx, dy, dz) / v_max`.
pub fn cfl_limit(state: &MhdState) -> f64 {
    let (dx, dy, dz) = PhysicalField::spacing(&state.grid());
    let v = velocity_bound(state);
    if v == 0.0 {
        f64::INFINITY
    } else {
        0.5 * dx.min(dy).min(dz) / v
    }
}

fn axpy(y: &SpectralVectorField, a: f64, x: &SpectralVectorField) -> SpectralVectorField {
    let mut out = y.clone();
    for c in 0..3 {
        out.comps[c].axpy(a, &x.comps[c]);
    }
    out
}

#[derive(Debug)]
pub struct Stepper {
    pub eval: RhsEvaluator,
}

impl Stepper {
    pub fn new(eval: RhsEvaluator) -> Self {
        Self { eval }
    }

    /// One Lawson RK4 step of size `dt`, followed by the `div_L` projection at
    /// the new time and exact Hermitian symmetrization.
    pub fn step(&self, state: &MhdState, dt: f64) -> Result<MhdState> {
        let limit = cfl_limit(state);
        if dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
        let p = state.params;
        let t = state.t;
        let h2 = 0.5 * dt;
        let (u, b) = (&state.u, &state.b);
        let ex = |u: &SpectralVectorField, b: &SpectralVectorField, t: f64| self.eval.explicit_terms(u, b, t);

        let (k1u, k1b) = ex(u, b, t);
        let (a_u, a_b) = propagate(&axpy(u, h2, &k1u), &axpy(b, h2, &k1b), t, t + h2, &p);
        let (k2u, k2b) = ex(&a_u, &a_b, t + h2);
        let (pu, pb) = propagate(u, b, t, t + h2, &p);
        let (b_u, b_b) = (axpy(&pu, h2, &k2u), axpy(&pb, h2, &k2b));
        let (k3u, k3b) = ex(&b_u, &b_b, t + h2);
        let (pk3u, pk3b) = propagate(&k3u, &k3b, t + h2, t + dt, &p);
        let (fu, fb) = propagate(u, b, t, t + dt, &p);
        let (c_u, c_b) = (axpy(&fu, dt, &pk3u), axpy(&fb, dt, &pk3b));
        let (k4u, k4b) = ex(&c_u, &c_b, t + dt);

        let (pk1u, pk1b) = propagate(&k1u, &k1b, t, t + dt, &p);
        let mid_u = k2u.add(&k3u);
        let mid_b = k2b.add(&k3b);
        let (pmu, pmb) = propagate(&mid_u, &mid_b, t + h2, t + dt, &p);
        let w = dt / 6.0;
        let mut nu_ = axpy(&axpy(&axpy(&fu, w, &pk1u), 2.0 * w, &pmu), w, &k4u);
        let mut nb_ = axpy(&axpy(&axpy(&fb, w, &pk1b), 2.0 * w, &pmb), w, &k4b);

        let t1 = t + dt;
        for v in [&mut nu_, &mut nb_] {
            v.set_t_frame(t1);
            leray_project_in_place(v, t1);
            v.enforce_hermitian();
        }
        check_output(&nu_, &nb_, t1)?;
        for v in [&nu_, &nb_] {
            let r = div_l_residual(v, t1);
            if r > STEP_DIV_TOL {
                return Err(Error::NotDivergenceFree {
                    residual: r,
                    tol: STEP_DIV_TOL,
                });
            }
        }
        Ok(MhdState {
            u: nu_,
            b: nb_,
            t: t1,
            params: p,
        })
    }
}
