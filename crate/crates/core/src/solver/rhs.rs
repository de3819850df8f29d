//! Right-hand side of the perturbation system in the shearing frame.
//!
//! ```text
//! d_t U = alpha d_sigma B - (U^2, 0, 0) + 2 grad_L Delta_L^{-1} d_X U^2
//!         - P_L d_j (U^j U - B^j B) + nu Delta_L U
//! d_t B = alpha d_sigma U + (B^2, 0, 0) + d_j (B^j U - U^j B) + nu Delta_L B
//! ```
//!
//! with `P_L` the moving-frame Leray projection and `d_sigma = sigma d_X + d_Z`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{MhdState, SpectralVectorField};
use crate::grid::GridSpec;
use crate::spectral::{div_l_residual, grad_symbols, leray_project_in_place};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative `div_L` residual accepted on input states.
pub const INPUT_DIV_TOL: f64 = 1e-10;

/// Symmetric pairs `(i, j)` of `U^i U^j - B^i B^j` and antisymmetric pairs
/// `(j, i)`, `j < i`, of `B^j U^i - U^j B^i`.
const SYM: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
const ANTI: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    SYM.iter().position(|&p| p == (a, b)).expect("valid pair")
}

/// Evaluator owning the FFT plans for one grid.
#[derive(Debug)]
pub struct RhsEvaluator {
    plan: Fft3,
    pub nonlinear: bool,
}

impl RhsEvaluator {
    pub fn new(grid: GridSpec, nonlinear: bool) -> Self {
        Self {
            plan: Fft3::new(grid),
            nonlinear,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.plan.grid()
    }

    /// Two Hermitian spectra to two real sample arrays with one transform.
    fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut z: Vec<Complex64> = a.par_iter().zip(b.par_iter()).map(|(x, y)| x + I * y).collect();
        self.plan.inverse_complex(&mut z);
        z.into_par_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// Two real sample arrays to two exactly Hermitian, dealiased spectra.
    fn forward_pair(&self, a: &[f64], b: Option<&[f64]>) -> (Vec<Complex64>, Vec<Complex64>) {
        let g = self.grid();
        let mut z: Vec<Complex64> = match b {
            Some(b) => a
                .par_iter()
                .zip(b.par_iter())
                .map(|(x, y)| Complex64::new(*x, *y))
                .collect(),
            None => a.par_iter().map(|x| Complex64::new(*x, 0.0)).collect(),
        };
        self.plan.forward_complex(&mut z);
        (0..g.len())
            .into_par_iter()
            .map(|i| {
                if !g.is_retained(g.mode_at(i)) {
                    return (ZERO, ZERO);
                }
                let zc = z[g.conjugate_index(i)].conj();
                let zi = z[i];
                (0.5 * (zi + zc), -0.5 * I * (zi - zc))
            })
            .unzip()
    }

    /// Quadratic terms: `(-P_L d_j(U^j U - B^j B), d_j(B^j U - U^j B))`.
    pub fn quadratic_terms(
        &self,
        u: &SpectralVectorField,
        b: &SpectralVectorField,
        t: f64,
    ) -> (SpectralVectorField, SpectralVectorField) {
        let (u0, u1) = self.inverse_pair(&u.comps[0].coeffs, &u.comps[1].coeffs);
        let (u2, b0) = self.inverse_pair(&u.comps[2].coeffs, &b.comps[0].coeffs);
        let (b1, b2) = self.inverse_pair(&b.comps[1].coeffs, &b.comps[2].coeffs);
        let uu = [&u0, &u1, &u2];
        let bb = [&b0, &b1, &b2];
        let n = u0.len();
        let products: Vec<Vec<f64>> = SYM
            .iter()
            .map(|&(i, j)| {
                (0..n)
                    .into_par_iter()
                    .map(|x| uu[i][x] * uu[j][x] - bb[i][x] * bb[j][x])
                    .collect()
            })
            .chain(ANTI.iter().map(|&(j, i)| {
                (0..n)
                    .into_par_iter()
                    .map(|x| bb[j][x] * uu[i][x] - uu[j][x] * bb[i][x])
                    .collect()
            }))
            .collect();
        let mut spectra: Vec<Vec<Complex64>> = Vec::with_capacity(9);
        for pair in products.chunks(2) {
            let (a, b) = self.forward_pair(&pair[0], pair.get(1).map(|v| v.as_slice()));
            spectra.push(a);
            if pair.len() == 2 {
                spectra.push(b);
            }
        }
        let s = |i: usize, j: usize| &spectra[sym_index(i, j)];
        let a01 = &spectra[6];
        let a02 = &spectra[7];
        let a12 = &spectra[8];
        let proto = &u.comps[0];
        let rows: Vec<[Complex64; 6]> = (0..n)
            .into_par_iter()
            .map(|x| {
                let g = grad_symbols(proto.frequency(x), t);
                let mut out = [ZERO; 6];
                for i in 0..3 {
                    out[i] = -(g[0] * s(0, i)[x] + g[1] * s(1, i)[x] + g[2] * s(2, i)[x]);
                }
                out[3] = -g[1] * a01[x] - g[2] * a02[x];
                out[4] = g[0] * a01[x] - g[2] * a12[x];
                out[5] = g[0] * a02[x] + g[1] * a12[x];
                out
            })
            .collect();
        let comp = |c: usize| {
            let mut f = proto.clone_meta();
            f.t_frame = t;
            f.coeffs = rows.iter().map(|r| r[c]).collect();
            f
        };
        let mut du = SpectralVectorField::new([comp(0), comp(1), comp(2)]);
        leray_project_in_place(&mut du, t);
        let db = SpectralVectorField::new([comp(3), comp(4), comp(5)]);
        (du, db)
    }

    /// Lift-up, linear pressure and (optionally) quadratic terms: the part of
    /// the right-hand side not carried by the integrating factor.
    pub fn explicit_terms(
        &self,
        u: &SpectralVectorField,
        b: &SpectralVectorField,
        t: f64,
    ) -> (SpectralVectorField, SpectralVectorField) {
        let (mut du, mut db) = if self.nonlinear {
            self.quadratic_terms(u, b, t)
        } else {
            let z = SpectralVectorField::zeros(u.grid(), t);
            let mut zu = z.clone();
            let mut zb = z;
            for c in zu.comps.iter_mut().chain(zb.comps.iter_mut()) {
                c.shear_shift = u.comps[0].shear_shift;
            }
            (zu, zb)
        };
        let n = u.comps[0].coeffs.len();
        let u2 = &u.comps[1].coeffs;
        let b2 = &b.comps[1].coeffs;
        let proto = &u.comps[0];
        let pressure: Vec<[Complex64; 3]> = (0..n)
            .into_par_iter()
            .map(|x| {
                let fr = proto.frequency(x);
                if fr.k == 0 {
                    return [ZERO; 3];
                }
                // 2 grad_L Delta_L^{-1} d_X U^2
                let g = grad_symbols(fr, t);
                let f = I * (fr.k as f64) * u2[x] * (-2.0 / fr.p(t));
                [g[0] * f, g[1] * f, g[2] * f]
            })
            .collect();
        for x in 0..n {
            for c in 0..3 {
                du.comps[c].coeffs[x] += pressure[x][c];
            }
            du.comps[0].coeffs[x] -= u2[x];
            db.comps[0].coeffs[x] += b2[x];
        }
        du.div_free_moving_frame = false;
        db.div_free_moving_frame = false;
        (du, db)
    }

    /// Full right-hand side `(d_t U, d_t B)` of the system.
    ///
    /// The input must be finite and `div_L`-free. The output satisfies
    /// `div_L d_t U = d_X U^2` and `div_L d_t B = d_X B^2`, which is what keeps
    /// `div_L U = div_L B = 0` under the time-dependent symbol.
    pub fn full_rhs(&self, state: &MhdState) -> Result<(SpectralVectorField, SpectralVectorField)> {
        check_input(state)?;
        let t = state.t;
        let (mut du, mut db) = self.explicit_terms(&state.u, &state.b, t);
        let params = state.params;
        let sigma = params.sigma;
        let n = du.comps[0].coeffs.len();
        for c in 0..3 {
            for x in 0..n {
                let fr = state.u.comps[c].frequency(x);
                let ias = I * params.alpha * sigma.symbol(fr.k, fr.l);
                let visc = params.nu * fr.p(t);
                let uc = state.u.comps[c].coeffs[x];
                let bc = state.b.comps[c].coeffs[x];
                du.comps[c].coeffs[x] += ias * bc - uc * visc;
                db.comps[c].coeffs[x] += ias * uc - bc * visc;
            }
        }
        check_output(&du, &db, t)?;
        Ok((du, db))
    }
}

fn check_input(state: &MhdState) -> Result<()> {
    state.check_finite()?;
    for v in [&state.u, &state.b] {
        let r = div_l_residual(v, state.t);
        if r > INPUT_DIV_TOL {
            return Err(Error::NotDivergenceFree {
                residual: r,
                tol: INPUT_DIV_TOL,
            });
        }
    }
    Ok(())
}

pub(crate) fn check_output(du: &SpectralVectorField, db: &SpectralVectorField, t: f64) -> Result<()> {
    let names = ["du1", "du2", "du3", "db1", "db2", "db3"];
    for (i, c) in du.comps.iter().chain(db.comps.iter()).enumerate() {
        if let Some(mode) = c.first_non_finite() {
            return Err(Error::NonFinite {
                component: names[i],
                mode,
                t,
            });
        }
    }
    Ok(())
}

/// `full_rhs` with a throwaway evaluator.
pub fn nonlinear_rhs(state: &MhdState) -> Result<(SpectralVectorField, SpectralVectorField)> {
    RhsEvaluator::new(state.grid(), true).full_rhs(state)
}

/// Discrete energy transfer of the quadratic terms,
/// `<-P(U.grad U - B.grad B), U> + <B.grad U - U.grad B, B>`.
pub fn quadratic_energy_transfer(eval: &RhsEvaluator, u: &SpectralVectorField, b: &SpectralVectorField, t: f64) -> f64 {
    let (du, db) = eval.quadratic_terms(u, b, t);
    du.inner(u) + db.inner(b)
}
