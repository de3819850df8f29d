//! Time-dependent Fourier multipliers of the energy method.
//!
//! * `M1`: `d_t M1 / M1 = -(k^2 + |k l|) / p`, inviscid damping.
//! * `M2`: `d_t M2 / M2 = -nu^{1/3} k^2 / (k^2 + nu^{2/3} (eta - k t)^2)`, enhanced dissipation.
//! * `M3`: `d_t M3 / M3 = -Upsilon`, used on the zero mode.
//! * `M = e^{delta0 nu^{1/3} t} M1 M2` for `k != 0` and `M3` for `k = 0`.
//!
//! All multipliers equal one at `t = 0` and on the branches where they are
//! not defined (`M1 = M2 = 1` for `k = 0`).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Frequency, PhysParams};
use crate::quadrature::{integrate, QuadOptions};

pub const UPSILON_DEFAULT_KMAX: i64 = 4096;

/// `M3` from the quadrature must reach this absolute accuracy on the exponent.
pub const M3_QUAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    M1,
    M2,
    M3,
    Upsilon,
    M,
}

impl Which {
    pub fn as_str(&self) -> &'static str {
        match self {
            Which::M1 => "M1",
            Which::M2 => "M2",
            Which::M3 => "M3",
            Which::Upsilon => "Upsilon",
            Which::M => "M",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    TruncatedSum,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::TruncatedSum => "truncated_sum",
        }
    }
}

/// One multiplier evaluation with its provenance and error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplierSample {
    pub which: Which,
    pub t: f64,
    pub k: i64,
    pub eta: f64,
    pub l: i64,
    pub value: f64,
    pub method: Method,
    pub error_bound: f64,
}

impl MultiplierSample {
    fn new(which: Which, t: f64, fr: Frequency, value: f64, method: Method, error_bound: f64) -> Self {
        Self {
            which,
            t,
            k: fr.k,
            eta: fr.eta,
            l: fr.l,
            value,
            method,
            error_bound,
        }
    }
}

/// `-log M1` accumulated over `[t0, t1]`.
pub fn m1_exponent(fr: Frequency, t0: f64, t1: f64) -> f64 {
    if fr.k == 0 {
        return 0.0;
    }
    let k = fr.k as f64;
    let l = fr.l as f64;
    let r = (k * k + l * l).sqrt();
    let coef = (k.abs() + l.abs()) / r;
    let a0 = ((fr.eta - k * t0) / r).atan();
    let a1 = ((fr.eta - k * t1) / r).atan();
    coef * k.signum() * (a0 - a1)
}

/// `-log M2` accumulated over `[t0, t1]`.
pub fn m2_exponent(fr: Frequency, nu: f64, t0: f64, t1: f64) -> f64 {
    if fr.k == 0 {
        return 0.0;
    }
    let k = fr.k as f64;
    let c = nu.cbrt() / k.abs();
    let a0 = (c * (fr.eta - k * t0)).atan();
    let a1 = (c * (fr.eta - k * t1)).atan();
    k.signum() * (a0 - a1)
}

pub fn m1_value(t: f64, fr: Frequency) -> f64 {
    (-m1_exponent(fr, 0.0, t)).exp()
}

pub fn m2_value(t: f64, fr: Frequency, nu: f64) -> f64 {
    (-m2_exponent(fr, nu, 0.0, t)).exp()
}

/// `-d_t M1 / M1` at time `t`.
pub fn m1_rate(t: f64, fr: Frequency) -> f64 {
    if fr.k == 0 {
        return 0.0;
    }
    (fr.k * fr.k + (fr.k * fr.l).abs()) as f64 / fr.p(t)
}

/// `-d_t M2 / M2` at time `t`.
pub fn m2_rate(t: f64, fr: Frequency, nu: f64) -> f64 {
    if fr.k == 0 {
        return 0.0;
    }
    let k2 = (fr.k * fr.k) as f64;
    let s = fr.sheared(t);
    nu.cbrt() * k2 / (k2 + nu.powf(2.0 / 3.0) * s * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `nu^{1/3} / 2` with `nu (eta - k t)^2 - d_t M2 / M2`.
pub fn check_enhanced_dissipation_inequality(fr: Frequency, t: f64, nu: f64) -> Result<DissipationCheck> {
    if fr.k == 0 {
        return Err(Error::MultiplierUndefinedBranch(
            "enhanced dissipation inequality needs k != 0".into(),
        ));
    }
    let s = fr.sheared(t);
    let lhs = 0.5 * nu.cbrt();
    let rhs = nu * s * s + m2_rate(t, fr, nu);
    Ok(DissipationCheck {
        lhs,
        rhs,
        holds: rhs >= lhs,
    })
}

#[inline]
fn upsilon_term(t: f64, k: i64, eta: f64, kp: i64) -> f64 {
    let c = k - kp;
    let ac = c.unsigned_abs() as f64;
    let a = 1.0 + ac + kp.unsigned_abs() as f64;
    let s = eta - c as f64 * t;
    a / (ac * (a * a + s * s))
}

/// Bound on the omitted terms `|k'| > k_max`, each below `1 / (k - k')^2`.
pub fn upsilon_tail_bound(k: i64, k_max: i64) -> f64 {
    let gap = (k_max - k.abs()).max(1) as f64;
    2.0 / gap
}

/// Truncated `Upsilon(t, k, eta, .)` over `|k'| <= k_max` with its tail bound.
///
/// `Upsilon` does not depend on `l`.
pub fn upsilon(t: f64, fr: Frequency, k_max: i64) -> MultiplierSample {
    let k_max = k_max.max(fr.k.abs() + 1);
    // small terms first
    let mut sum = 0.0;
    for d in (1..=k_max).rev() {
        for kp in [-d, d] {
            if kp != fr.k {
                sum += upsilon_term(t, fr.k, fr.eta, kp);
            }
        }
    }
    if fr.k != 0 {
        sum += upsilon_term(t, fr.k, fr.eta, 0);
    }
    MultiplierSample::new(
        Which::Upsilon,
        t,
        fr,
        sum,
        Method::TruncatedSum,
        upsilon_tail_bound(fr.k, k_max),
    )
}

/// Closed-form `int_{t0}^{t1}` of one `Upsilon` term.
#[inline]
fn upsilon_term_integral(t0: f64, t1: f64, k: i64, eta: f64, kp: i64) -> f64 {
    let c = (k - kp) as f64;
    let a = 1.0 + c.abs() + kp.unsigned_abs() as f64;
    (((eta - c * t0) / a).atan() - ((eta - c * t1) / a).atan()) / (c.abs() * c)
}

/// `int_{t0}^{t1} Upsilon` for the truncated sum, summed term by term.
pub fn upsilon_integral_closed_form(fr: Frequency, t0: f64, t1: f64, k_max: i64) -> f64 {
    let k_max = k_max.max(fr.k.abs() + 1);
    let mut sum = 0.0;
    for d in (1..=k_max).rev() {
        for kp in [-d, d] {
            if kp != fr.k {
                sum += upsilon_term_integral(t0, t1, fr.k, fr.eta, kp);
            }
        }
    }
    if fr.k != 0 {
        sum += upsilon_term_integral(t0, t1, fr.k, fr.eta, 0);
    }
    sum
}

/// `M3 = exp(-int_0^t Upsilon)` by adaptive quadrature of the truncated sum.
pub fn m3_value(t: f64, fr: Frequency) -> Result<MultiplierSample> {
    m3_value_with(t, fr, UPSILON_DEFAULT_KMAX)
}

pub fn m3_value_with(t: f64, fr: Frequency, k_max: i64) -> Result<MultiplierSample> {
    if t == 0.0 {
        return Ok(MultiplierSample::new(Which::M3, t, fr, 1.0, Method::Quadrature, 0.0));
    }
    let opts = QuadOptions {
        abs_tol: M3_QUAD_TOL,
        rel_tol: 0.0,
        max_evaluations: 100_000,
    };
    let r = integrate(|tau| upsilon(tau, fr, k_max).value, 0.0, t, opts)?;
    let value = (-r.value).exp();
    Ok(MultiplierSample::new(
        Which::M3,
        t,
        fr,
        value,
        Method::Quadrature,
        value * r.error,
    ))
}

/// `M3` from the term-wise closed-form integral of the truncated sum.
pub fn m3_closed_form(t: f64, fr: Frequency, k_max: i64) -> MultiplierSample {
    let value = (-upsilon_integral_closed_form(fr, 0.0, t, k_max)).exp();
    // each omitted term integrates to at most pi / (k - k')^2
    let bound = value * PI * upsilon_tail_bound(fr.k, k_max);
    MultiplierSample::new(Which::M3, t, fr, value, Method::ClosedForm, bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M3Method {
    Quadrature,
    ClosedForm,
}

/// The main multiplier `M`.
pub fn m_combined(t: f64, fr: Frequency, params: &PhysParams, m3: M3Method) -> Result<MultiplierSample> {
    if fr.k == 0 {
        let s = match m3 {
            M3Method::Quadrature => m3_value(t, fr)?,
            M3Method::ClosedForm => m3_closed_form(t, fr, UPSILON_DEFAULT_KMAX),
        };
        return Ok(MultiplierSample { which: Which::M, ..s });
    }
    let log = params.delta0 * params.nu_third() * t - m1_exponent(fr, 0.0, t) - m2_exponent(fr, params.nu, 0.0, t);
    Ok(MultiplierSample::new(
        Which::M,
        t,
        fr,
        log.exp(),
        Method::ClosedForm,
        0.0,
    ))
}

/// Closed form of `int_R dxi / ((a^2 + xi^2)(b^2 + (c - xi)^2))`.
pub fn quadrature_identity_check(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "integral identity needs a, b > 0, got a = {a}, b = {b}"
        )));
    }
    let s = a + b;
    Ok(PI / (a * b) * s / (s * s + c * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RationalShearAngle;
    use crate::quadrature::integrate_real_line;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fr(k: i64, eta: f64, l: i64) -> Frequency {
        Frequency::new(k, eta, l)
    }

    #[test]
    fn m1_examples() {
        assert_eq!(m1_value(0.0, fr(3, 1.5, -2)), 1.0);
        assert_eq!(m1_value(7.0, fr(0, 1.5, -2)), 1.0);
        assert_relative_eq!(m1_value(1e12, fr(1, 0.0, 0)), (-PI / 2.0).exp(), epsilon = 1e-10);
        assert_relative_eq!((-PI / 2.0).exp(), 0.207880, epsilon = 1e-6);
    }

    #[test]
    fn m2_examples() {
        assert_eq!(m2_value(0.0, fr(2, 0.3, 1), 1e-3), 1.0);
        let v = m2_value(100.0, fr(1, 0.0, 5), 1e-3);
        assert_relative_eq!(v, (-(10.0f64).atan()).exp(), epsilon = 1e-12);
        assert_relative_eq!(v, 0.229666, epsilon = 1e-6);
    }

    #[test]
    fn dissipation_examples() {
        let c = check_enhanced_dissipation_inequality(fr(1, 0.0, 0), 0.0, 1e-3).unwrap();
        assert_relative_eq!(c.rhs, 0.1, epsilon = 1e-12);
        assert!(c.holds);
        let c = check_enhanced_dissipation_inequality(fr(1, 100.0, 0), 0.0, 1e-3).unwrap();
        assert!(c.rhs >= 10.0 && c.holds);
        assert!(matches!(
            check_enhanced_dissipation_inequality(fr(0, 1.0, 1), 0.0, 1e-3),
            Err(Error::MultiplierUndefinedBranch(_))
        ));
    }

    #[test]
    fn upsilon_at_origin() {
        let s = upsilon(0.0, fr(0, 0.0, 0), 4_000_000);
        let exact = 2.0 * (2.0 - 2.0 * 2f64.ln());
        assert!(s.error_bound <= 1e-6);
        assert!((s.value - exact).abs() <= s.error_bound);
        assert!((s.value - exact).abs() < 1e-6);
    }

    #[test]
    fn upsilon_independent_of_l_and_decreasing_in_eta() {
        let a = upsilon(1.0, fr(0, 5.0, 0), 512).value;
        let b = upsilon(1.0, fr(0, 5.0, 7), 512).value;
        assert_eq!(a, b);
        let c = upsilon(1.0, fr(0, 9.0, 0), 512).value;
        assert!(c < a);
        assert!(a > 0.0);
    }

    #[test]
    fn m3_closed_form_matches_quadrature() {
        for &(t, k, eta) in &[(0.5, 0, 0.0), (3.0, 0, 2.5), (2.0, 2, -1.0)] {
            let q = m3_value_with(t, fr(k, eta, 1), 256).unwrap();
            let c = m3_closed_form(t, fr(k, eta, 1), 256);
            assert!((q.value - c.value).abs() < 1e-8, "{q:?} {c:?}");
        }
    }

    #[test]
    fn m3_small_time_slope() {
        let t = 1e-3;
        let v = m3_closed_form(t, fr(0, 0.0, 0), 1_000_000).value;
        assert!((v - (-1.227411 * t).exp()).abs() < 1e-6);
    }

    #[test]
    fn m_combined_composition() {
        let params = PhysParams::new(1e-3, 10.0, RationalShearAngle::integer(1)).unwrap();
        let f = fr(2, 0.7, -1);
        let t = 13.0;
        let m = m_combined(t, f, &params, M3Method::ClosedForm).unwrap().value;
        let expect = params.delta0 * params.nu_third() * t + m1_value(t, f).ln() + m2_value(t, f, params.nu).ln();
        assert!((m.ln() - expect).abs() < 1e-12);
        assert_eq!(m_combined(0.0, f, &params, M3Method::ClosedForm).unwrap().value, 1.0);
        let z = fr(0, 0.5, 1);
        let mq = m_combined(1.0, z, &params, M3Method::Quadrature).unwrap();
        assert_eq!(mq.value, m3_value(1.0, z).unwrap().value);
    }

    #[test]
    fn identity_examples() {
        assert_relative_eq!(
            quadrature_identity_check(1.0, 2.0, 0.0).unwrap(),
            PI / 6.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            quadrature_identity_check(1.0, 1.0, 0.0).unwrap(),
            PI / 2.0,
            epsilon = 1e-15
        );
        assert!(quadrature_identity_check(0.0, 1.0, 0.0).is_err());
        let n = integrate_real_line(
            |x| 1.0 / ((1.0 + x * x) * (4.0 + x * x)),
            QuadOptions {
                abs_tol: 1e-13,
                rel_tol: 1e-13,
                max_evaluations: 100_000,
            },
        )
        .unwrap();
        assert!((n.value - PI / 6.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn flow_property(k in -8i64..=8, l in -8i64..=8, eta in -20.0f64..20.0,
                         t1 in 0.0f64..50.0, dt in 0.0f64..50.0, nu in 1e-5f64..1.0) {
            let f = fr(k, eta, l);
            let t2 = t1 + dt;
            let r1 = m1_value(t2, f) / m1_value(t1, f);
            prop_assert!((r1 - (-m1_exponent(f, t1, t2)).exp()).abs() < 1e-12);
            let r2 = m2_value(t2, f, nu) / m2_value(t1, f, nu);
            prop_assert!((r2 - (-m2_exponent(f, nu, t1, t2)).exp()).abs() < 1e-12);
        }

        #[test]
        fn uniform_bounds(k in -16i64..=16, l in -16i64..=16, eta in -100.0f64..100.0,
                          t in 0.0f64..1e3, nu in 1e-6f64..1.0) {
            let f = fr(k, eta, l);
            let m1 = m1_value(t, f);
            let m2 = m2_value(t, f, nu);
            prop_assert!(m1 <= 1.0 + 1e-15 && m1 >= (-(2f64.sqrt()) * PI).exp() - 1e-15);
            prop_assert!(m2 <= 1.0 + 1e-15 && m2 >= (-PI).exp() - 1e-15);
        }

        #[test]
        fn identity_even_in_c(a in 0.1f64..10.0, b in 0.1f64..10.0, c in -10.0f64..10.0) {
            prop_assert_eq!(quadrature_identity_check(a, b, c).unwrap(), quadrature_identity_check(a, b, -c).unwrap());
        }
    }
}
