//! Moving-frame Fourier calculus.
//!
//! All operators act per mode through their symbols:
//! `d_X -> i k`, `d_Y^L = d_Y - t d_X -> i (eta - k t)`, `d_Z -> i l`,
//! `Delta_L -> -p(t)` with `p = k^2 + (eta - k t)^2 + l^2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{MhdState, SpectralScalarField, SpectralVectorField};
use crate::grid::{Frequency, ModeClass, RationalShearAngle};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `exp(i theta)` with `exp(-i theta) == conj(exp(i theta))` bit for bit.
#[inline]
pub(crate) fn unit_phase(theta: f64) -> Complex64 {
    let (s, c) = theta.abs().sin_cos();
    if theta < 0.0 {
        Complex64::new(c, -s)
    } else {
        Complex64::new(c, s)
    }
}

/// Keeps only the frequencies of the requested class.
///
/// The three classes partition the lattice, so the three projections sum to
/// the input exactly.
pub fn project_modes(f: &SpectralScalarField, class: ModeClass, sigma: RationalShearAngle) -> SpectralScalarField {
    let mut out = f.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let mode = f.grid.mode_at(i);
        if ModeClass::of(mode.k, mode.l, sigma) != class {
            *c = ZERO;
        }
    }
    out
}

pub fn project_vector(v: &SpectralVectorField, class: ModeClass, sigma: RationalShearAngle) -> SpectralVectorField {
    let mut out = v.map(|c| project_modes(c, class, sigma));
    // class projection commutes with div_L
    out.div_free_moving_frame = v.div_free_moving_frame;
    out
}

/// Oscillation multiplier: each coefficient times `exp(i a (sigma k + l) t)`.
pub fn apply_oscillation(f: &SpectralScalarField, sigma: RationalShearAngle, a: f64, t: f64) -> SpectralScalarField {
    let p = sigma.p() as f64;
    f.map_symbol(|fr| unit_phase(a * sigma.numerator(fr.k, fr.l) as f64 * t / p))
}

pub fn apply_oscillation_vector(
    v: &SpectralVectorField,
    sigma: RationalShearAngle,
    a: f64,
    t: f64,
) -> SpectralVectorField {
    let mut out = v.map(|c| apply_oscillation(c, sigma, a, t));
    out.div_free_moving_frame = v.div_free_moving_frame;
    out
}

/// `W^{+-} = T^{-t}_{+-alpha}(U +- B)`.
pub fn good_unknowns_forward(state: &MhdState) -> (SpectralVectorField, SpectralVectorField) {
    let sigma = state.params.sigma;
    let alpha = state.params.alpha;
    let plus = apply_oscillation_vector(&state.u.add(&state.b), sigma, -alpha, state.t);
    let minus = apply_oscillation_vector(&state.u.sub(&state.b), sigma, alpha, state.t);
    (plus, minus)
}

/// Inverse of [`good_unknowns_forward`]:
/// `U = (T^t_alpha W^+ + T^t_{-alpha} W^-) / 2`, `B = (T^t_alpha W^+ - T^t_{-alpha} W^-) / 2`.
pub fn good_unknowns_inverse(
    w_plus: &SpectralVectorField,
    w_minus: &SpectralVectorField,
    sigma: RationalShearAngle,
    alpha: f64,
    t: f64,
) -> (SpectralVectorField, SpectralVectorField) {
    let zp = apply_oscillation_vector(w_plus, sigma, alpha, t);
    let zm = apply_oscillation_vector(w_minus, sigma, -alpha, t);
    (zp.add(&zm).scale(0.5), zp.sub(&zm).scale(0.5))
}

/// Symbols of `grad_L` at time `t`.
#[inline]
pub fn grad_symbols(fr: Frequency, t: f64) -> [Complex64; 3] {
    [
        Complex64::new(0.0, fr.k as f64),
        Complex64::new(0.0, fr.sheared(t)),
        Complex64::new(0.0, fr.l as f64),
    ]
}

pub fn grad_l(f: &SpectralScalarField, t: f64) -> SpectralVectorField {
    SpectralVectorField::new([
        f.map_symbol(|fr| grad_symbols(fr, t)[0]),
        f.map_symbol(|fr| grad_symbols(fr, t)[1]),
        f.map_symbol(|fr| grad_symbols(fr, t)[2]),
    ])
}

pub fn div_l(v: &SpectralVectorField, t: f64) -> SpectralScalarField {
    let mut out = v.comps[0].clone_meta();
    out.coeffs = (0..v.comps[0].coeffs.len())
        .map(|i| {
            let g = grad_symbols(v.comps[0].frequency(i), t);
            g[0] * v.comps[0].coeffs[i] + g[1] * v.comps[1].coeffs[i] + g[2] * v.comps[2].coeffs[i]
        })
        .collect();
    out
}

pub fn laplace_l(f: &SpectralScalarField, t: f64) -> SpectralScalarField {
    f.map_symbol(|fr| Complex64::new(-fr.p(t), 0.0))
}

/// Exact inverse of `Delta_L` on mean-free fields.
pub fn inv_laplace_l(f: &SpectralScalarField, t: f64) -> Result<SpectralScalarField> {
    let mean = f.mean().norm();
    if mean != 0.0 {
        return Err(Error::MeanModeNotInvertible(mean));
    }
    Ok(inv_laplace_l_mean_free(f, t))
}

/// Inverse of `Delta_L` with the mean coefficient projected out.
pub fn inv_laplace_l_mean_free(f: &SpectralScalarField, t: f64) -> SpectralScalarField {
    f.map_symbol(|fr| {
        let p = fr.p(t);
        if p == 0.0 {
            ZERO
        } else {
            Complex64::new(-1.0 / p, 0.0)
        }
    })
}

/// `v - grad_L Delta_L^{-1} div_L v`, with the mean mode passed through.
pub fn leray_project_moving(v: &SpectralVectorField, t: f64) -> SpectralVectorField {
    let mut out = v.clone();
    leray_project_in_place(&mut out, t);
    out
}

pub fn leray_project_in_place(v: &mut SpectralVectorField, t: f64) {
    let n = v.comps[0].coeffs.len();
    let [c0, c1, c2] = &mut v.comps;
    for i in 0..n {
        let fr = c0.frequency(i);
        let p = fr.p(t);
        if p == 0.0 {
            continue;
        }
        let g = grad_symbols(fr, t);
        let d = g[0] * c0.coeffs[i] + g[1] * c1.coeffs[i] + g[2] * c2.coeffs[i];
        let s = d / p;
        c0.coeffs[i] += g[0] * s;
        c1.coeffs[i] += g[1] * s;
        c2.coeffs[i] += g[2] * s;
    }
    v.div_free_moving_frame = true;
}

/// Relative `div_L` residual: `max |div| / max (sqrt(p) |v|)` over modes.
pub fn div_l_residual(v: &SpectralVectorField, t: f64) -> f64 {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for i in 0..v.comps[0].coeffs.len() {
        let fr = v.comps[0].frequency(i);
        let g = grad_symbols(fr, t);
        let a = [v.comps[0].coeffs[i], v.comps[1].coeffs[i], v.comps[2].coeffs[i]];
        let d = g[0] * a[0] + g[1] * a[1] + g[2] * a[2];
        num = num.max(d.norm());
        let mag = (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt();
        den = den.max(fr.p(t).sqrt() * mag);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `H^N` norm with weight `<k, eta, l>^N` and lattice measure `1/m`.
pub fn sobolev_norm(f: &SpectralScalarField, n: f64) -> f64 {
    let m = f.grid.m as f64;
    let s: f64 = f
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(i, c)| f.frequency(i).bracket().powf(2.0 * n) * c.norm_sqr())
        .sum();
    (s / m).sqrt()
}

pub fn sobolev_norm_vector(v: &SpectralVectorField, n: f64) -> f64 {
    v.comps.iter().map(|c| sobolev_norm(c, n).powi(2)).sum::<f64>().sqrt()
}

/// Fraction of `L^2` mass outside `|eta| <= eta_band` (band-concentration check).
pub fn mass_outside_eta_band(f: &SpectralScalarField, eta_band: f64) -> f64 {
    let total = f.norm_sq();
    if total == 0.0 {
        return 0.0;
    }
    let outside: f64 = f
        .coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| f.frequency(*i).eta.abs() > eta_band)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    outside / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, ModeIndex, PhysParams};
    use crate::random::{random_field, random_vector};
    use approx::assert_relative_eq;

    fn grid() -> GridSpec {
        GridSpec::new(8, 8, 8, 2).unwrap()
    }

    #[test]
    fn projections_partition_and_annihilate() {
        let sigma = RationalShearAngle::new(1, 2).unwrap();
        let f = random_field(grid(), 7, true);
        let classes = [ModeClass::Zero, ModeClass::Homogeneous, ModeClass::Nonhomogeneous];
        let parts: Vec<_> = classes.iter().map(|&c| project_modes(&f, c, sigma)).collect();
        let sum = parts[0].add(&parts[1]).add(&parts[2]);
        assert_eq!(sum.coeffs, f.coeffs);
        for (a, ca) in classes.iter().enumerate() {
            let twice = project_modes(&parts[a], *ca, sigma);
            assert_eq!(twice.coeffs, parts[a].coeffs);
            for (b, cb) in classes.iter().enumerate() {
                if a != b {
                    assert_eq!(project_modes(&parts[a], *cb, sigma).max_abs(), 0.0);
                }
            }
        }
        let zero = SpectralScalarField::zeros(grid(), 0.0);
        for c in classes {
            assert_eq!(project_modes(&zero, c, sigma).max_abs(), 0.0);
        }
    }

    #[test]
    fn oscillation_example_phase() {
        // a = 2 alpha, alpha = 10, sigma = 1, mode (1, 0, 0), t = 0.1 -> e^{2i}
        let g = grid();
        let sigma = RationalShearAngle::integer(1);
        let mut f = SpectralScalarField::zeros(g, 0.0);
        let idx = g.index_of(ModeIndex::new(1, 0, 0)).unwrap();
        f.coeffs[idx] = Complex64::new(1.0, 0.0);
        let out = apply_oscillation(&f, sigma, 20.0, 0.1);
        let expected = Complex64::new(2.0f64.cos(), 2.0f64.sin());
        assert!((out.coeffs[idx] - expected).norm() < 1e-15);
        assert_relative_eq!(out.coeffs[idx].norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn oscillation_identity_cases_and_fixed_points() {
        let sigma = RationalShearAngle::integer(1);
        let f = random_field(grid(), 3, true);
        assert_eq!(apply_oscillation(&f, sigma, 0.0, 3.0).coeffs, f.coeffs);
        assert_eq!(apply_oscillation(&f, sigma, 4.0, 0.0).coeffs, f.coeffs);
        let h = project_modes(&f, ModeClass::Homogeneous, sigma);
        assert_eq!(apply_oscillation(&h, sigma, 7.5, 2.25).coeffs, h.coeffs);
        let out = apply_oscillation(&f, sigma, 3.0, 1.7);
        for (a, b) in out.coeffs.iter().zip(&f.coeffs) {
            assert!((a.norm() - b.norm()).abs() <= 1e-15 * b.norm().max(1.0));
        }
        assert_eq!(out.hermitian_defect(), 0.0);
    }

    #[test]
    fn good_unknowns_at_zero_time_and_zero_field() {
        let g = grid();
        let params = PhysParams::new(1e-2, 10.0, RationalShearAngle::integer(1)).unwrap();
        let u = leray_project_moving(&random_vector(g, 1), 0.0);
        let b = leray_project_moving(&random_vector(g, 2), 0.0);
        let state = MhdState {
            u: u.clone(),
            b: b.clone(),
            t: 0.0,
            params,
        };
        let (wp, wm) = good_unknowns_forward(&state);
        for i in 0..3 {
            assert_eq!(wp.comps[i].coeffs, u.comps[i].add(&b.comps[i]).coeffs);
            assert_eq!(wm.comps[i].coeffs, u.comps[i].sub(&b.comps[i]).coeffs);
        }
        let state_b0 = MhdState {
            u: u.clone(),
            b: SpectralVectorField::zeros(g, 0.0),
            t: 1.3,
            params,
        };
        let (wp, wm) = good_unknowns_forward(&state_b0);
        let back = apply_oscillation_vector(&wm, params.sigma, -2.0 * params.alpha, 1.3);
        for i in 0..3 {
            let d = back.comps[i].sub(&wp.comps[i]).max_abs();
            assert!(d < 1e-14);
        }
    }

    #[test]
    fn operator_identities() {
        let g = grid();
        let f = random_field(g, 11, true);
        let t = 2.5;
        let lhs = div_l(&grad_l(&f, t), t);
        let rhs = laplace_l(&f, t);
        let scale = rhs.max_abs();
        assert!(lhs.sub(&rhs).max_abs() <= 1e-13 * scale);
        // t = 0 reduces to the stationary Laplacian
        let stat = laplace_l(&f, 0.0);
        for i in 0..f.coeffs.len() {
            let fr = f.frequency(i);
            let p0 = (fr.k * fr.k + fr.l * fr.l) as f64 + fr.eta * fr.eta;
            assert_eq!(stat.coeffs[i], f.coeffs[i] * -p0);
        }
    }

    #[test]
    fn inverse_laplacian_requires_mean_free() {
        let g = grid();
        let mut f = random_field(g, 5, true);
        assert!(matches!(inv_laplace_l(&f, 1.0), Err(Error::MeanModeNotInvertible(_))));
        f.coeffs[0] = ZERO;
        let inv = inv_laplace_l(&f, 1.0).unwrap();
        let back = laplace_l(&inv, 1.0);
        assert!(back.sub(&f).max_abs() <= 1e-13 * f.max_abs());
    }

    #[test]
    fn leray_fixed_point_gradient_annihilation_and_div_free() {
        let g = grid();
        let t = 3.0;
        let v = random_vector(g, 9);
        let p = leray_project_moving(&v, t);
        let d = div_l(&p, t);
        assert!(d.max_abs() < 1e-12 * v.max_abs());
        let pp = leray_project_moving(&p, t);
        assert!(pp.sub(&p).max_abs() < 1e-13 * p.max_abs());
        let mut phi = random_field(g, 4, true);
        phi.coeffs[0] = ZERO;
        let grad = grad_l(&phi, t);
        assert!(leray_project_moving(&grad, t).max_abs() < 1e-12 * grad.max_abs());
    }

    #[test]
    fn first_component_recovered_from_divergence_constraint() {
        let g = grid();
        let t = 1.75;
        let v = leray_project_moving(&random_vector(g, 21), t);
        for i in 0..v.comps[0].coeffs.len() {
            let fr = v.comps[0].frequency(i);
            if fr.k == 0 {
                continue;
            }
            let rec = -(v.comps[1].coeffs[i] * fr.sheared(t) + v.comps[2].coeffs[i] * fr.l as f64) / fr.k as f64;
            assert!((rec - v.comps[0].coeffs[i]).norm() <= 1e-12 * v.max_abs().max(1e-300) * fr.p(t).sqrt());
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = GridSpec::new(4, 4, 4, 1).unwrap();
        let zero = SpectralScalarField::zeros(g, 0.0);
        assert_eq!(sobolev_norm(&zero, 3.0), 0.0);
        let mut f = zero.clone();
        f.coeffs[g.index_of(ModeIndex::new(1, 0, 0)).unwrap()] = Complex64::new(1.0, 0.0);
        // <(1,0,0)>^2 = 2, so the N = 2 norm is 2
        assert_relative_eq!(sobolev_norm(&f, 2.0), 2.0, epsilon = 1e-15);
        let r = random_field(g, 8, false);
        assert_relative_eq!(sobolev_norm(&r, 0.0), r.norm_sq().sqrt(), epsilon = 1e-14);
    }
}
