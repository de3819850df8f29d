use mhd_couette::multipliers::{m1_exponent, m1_rate, m1_value, m2_exponent, m2_value};
use mhd_couette::quadrature::{integrate, QuadOptions};
use mhd_couette::Frequency;
use proptest::prelude::*;

fn nonzero_k() -> impl Strategy<Value = i64> {
    prop_oneof![-6i64..=-1, 1i64..=6]
}

proptest! {
    #[test]
    fn weights_stay_in_unit_interval(k in nonzero_k(), l in -6i64..=6, eta in -50.0f64..50.0, t in 0.0f64..200.0, nu in 1e-6f64..1e-1) {
        let fr = Frequency::new(k, eta, l);
        let m1 = m1_value(t, fr);
        let m2 = m2_value(t, fr, nu);
        // the total variation of arctan is at most pi
        let floor1 = (-std::f64::consts::PI * (k.abs() + l.abs()) as f64 / ((k * k + l * l) as f64).sqrt()).exp();
        prop_assert!(m1 <= 1.0 + 1e-15 && m1 >= floor1 * (1.0 - 1e-12));
        prop_assert!(m2 <= 1.0 + 1e-15 && m2 >= (-std::f64::consts::PI).exp() * (1.0 - 1e-12));
    }

    #[test]
    fn exponents_are_additive(k in nonzero_k(), l in -4i64..=4, eta in -20.0f64..20.0, a in 0.0f64..30.0, b in 0.0f64..30.0, c in 0.0f64..30.0) {
        let fr = Frequency::new(k, eta, l);
        let s = m1_exponent(fr, a, b) + m1_exponent(fr, b, c);
        prop_assert!((s - m1_exponent(fr, a, c)).abs() < 1e-12);
        let s = m2_exponent(fr, 1e-3, a, b) + m2_exponent(fr, 1e-3, b, c);
        prop_assert!((s - m2_exponent(fr, 1e-3, a, c)).abs() < 1e-12);
    }
}

#[test]
fn m1_exponent_integrates_its_rate() {
    let fr = Frequency::new(2, 7.5, -1);
    let q = integrate(|t| m1_rate(t, fr), 0.0, 12.0, QuadOptions::default()).unwrap().value;
    assert!((q - m1_exponent(fr, 0.0, 12.0)).abs() < 1e-10);
}

#[test]
fn zero_streamwise_modes_carry_no_weight() {
    let fr = Frequency::new(0, 3.0, 2);
    assert_eq!(m1_value(40.0, fr), 1.0);
    assert_eq!(m2_value(40.0, fr, 1e-4), 1.0);
}
