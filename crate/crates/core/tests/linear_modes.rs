use mhd_couette::linear_modes::{homogeneous_g2_exact, homogeneous_q2_exact, LinearModeSystem, SystemKind};
use mhd_couette::{Frequency, PhysParams, RationalShearAngle};
use num_complex::Complex64;

fn system(kind: SystemKind, fr: Frequency, nu: f64, alpha: f64, y0: Vec<Complex64>) -> LinearModeSystem {
    let params = PhysParams::new(nu, alpha, RationalShearAngle::new(1, 1).unwrap()).unwrap();
    LinearModeSystem::new(kind, fr, params, y0).unwrap()
}

#[test]
fn uncoupled_homogeneous_mode_follows_exact_factors() {
    let fr = Frequency::new(1, 2.0, -1);
    let nu = 1e-2;
    let params = PhysParams::new(nu, 0.0, RationalShearAngle::new(1, 1).unwrap()).unwrap();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    for (slot, y0) in [(0, vec![one, zero]), (1, vec![zero, one])] {
        let sol = system(SystemKind::HomogeneousQG, fr, nu, 0.0, y0).integrate(30.0).unwrap();
        for (t, a) in sol.times.iter().zip(&sol.amplitudes) {
            let exact = if slot == 0 {
                homogeneous_q2_exact(fr, &params, *t).unwrap()
            } else {
                homogeneous_g2_exact(fr, &params, *t).unwrap()
            };
            assert!((a[slot].norm() - exact).abs() < 1e-7 * exact.max(1e-3), "t = {t}");
        }
    }
}

#[test]
fn systems_reject_the_wrong_mode_class() {
    let y0 = vec![Complex64::new(1.0, 0.0); 2];
    let params = PhysParams::new(1e-3, 10.0, RationalShearAngle::new(1, 1).unwrap()).unwrap();
    // k + l != 0 is not homogeneous for sigma = 1
    assert!(LinearModeSystem::new(SystemKind::HomogeneousQG, Frequency::new(1, 0.0, 1), params, y0.clone()).is_err());
    assert!(LinearModeSystem::new(SystemKind::NonhomogeneousF2, Frequency::new(1, 0.0, -1), params, y0).is_err());
}

#[test]
fn strong_field_suppresses_transient_growth() {
    let fr = Frequency::new(1, 3.0, 1);
    let y0 = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let free = system(SystemKind::NonhomogeneousF2, fr, 1e-3, 0.0, y0.clone()).integrate(60.0).unwrap();
    let tied = system(SystemKind::NonhomogeneousF2, fr, 1e-3, 10.0, y0).integrate(60.0).unwrap();
    assert!(tied.peak.1 < free.peak.1, "{:?} vs {:?}", tied.peak, free.peak);
}
