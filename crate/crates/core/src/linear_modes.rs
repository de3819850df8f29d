//! Per-mode linear dynamics in the shearing frame.
//!
//! Symbols used below, for a frequency `(k, eta, l)` at time `t`:
//! `p = k^2 + (eta - k t)^2 + l^2`, `c = k (eta - k t) / p` (the symbol of
//! `d_XY^L Delta_L^{-1}`), and `s = sigma k + l`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Frequency, ModeClass, PhysParams, RationalShearAngle};
use crate::ode::{dopri45, OdeOptions};
use crate::spectral::unit_phase;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    /// `(Q^2, G^2)` of a homogeneous mode.
    HomogeneousQG,
    /// `(F^{+,2}, F^{-,2})`.
    NonhomogeneousF2,
    /// `(F^{+,1}, F^{+,2}, F^{+,3}, F^{-,1}, F^{-,2}, F^{-,3})`.
    NonhomogeneousFull,
    /// `d_X |grad_L| W^{+-,2}`.
    NonhomogeneousSymV2,
    /// `(U^1, U^2, U^3, B^1, B^2, B^3)` at `k = 0`.
    ZeroModeLiftup,
}

impl SystemKind {
    pub fn dimension(&self) -> usize {
        match self {
            SystemKind::HomogeneousQG | SystemKind::NonhomogeneousF2 | SystemKind::NonhomogeneousSymV2 => 2,
            SystemKind::NonhomogeneousFull | SystemKind::ZeroModeLiftup => 6,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::HomogeneousQG => "homogeneous_qg",
            SystemKind::NonhomogeneousF2 => "nonhomogeneous_f2",
            SystemKind::NonhomogeneousFull => "nonhomogeneous_full",
            SystemKind::NonhomogeneousSymV2 => "nonhomogeneous_sym_v2",
            SystemKind::ZeroModeLiftup => "zero_mode_liftup",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SystemKind::HomogeneousQG,
            SystemKind::NonhomogeneousF2,
            SystemKind::NonhomogeneousFull,
            SystemKind::NonhomogeneousSymV2,
            SystemKind::ZeroModeLiftup,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    fn required_class(&self) -> ModeClass {
        match self {
            SystemKind::HomogeneousQG => ModeClass::Homogeneous,
            SystemKind::ZeroModeLiftup => ModeClass::Zero,
            _ => ModeClass::Nonhomogeneous,
        }
    }
}

/// A linear per-mode system together with its initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModeSystem {
    pub kind: SystemKind,
    pub mode: Frequency,
    pub params: PhysParams,
    pub initial: Vec<Complex64>,
    /// Keeps the `W^+ / W^-` exchange terms; off gives the decoupled system.
    pub coupling: bool,
}

fn check_class(kind: SystemKind, fr: Frequency, sigma: RationalShearAngle) -> Result<()> {
    let class = ModeClass::of(fr.k, fr.l, sigma);
    if class != kind.required_class() {
        return Err(Error::WrongModeClass {
            system: kind.name(),
            detail: format!(
                "mode (k={}, eta={}, l={}) is {:?} for sigma = {}/{}",
                fr.k,
                fr.eta,
                fr.l,
                class,
                sigma.q(),
                sigma.p()
            ),
        });
    }
    if kind == SystemKind::ZeroModeLiftup && fr.eta == 0.0 && fr.l == 0 {
        return Err(Error::WrongModeClass {
            system: kind.name(),
            detail: "(eta, l) = (0, 0) carries no dynamics".into(),
        });
    }
    Ok(())
}

impl LinearModeSystem {
    pub fn new(kind: SystemKind, mode: Frequency, params: PhysParams, initial: Vec<Complex64>) -> Result<Self> {
        check_class(kind, mode, params.sigma)?;
        if initial.len() != kind.dimension() {
            return Err(Error::InvalidParameter(format!(
                "{} needs {} initial components, got {}",
                kind.name(),
                kind.dimension(),
                initial.len()
            )));
        }
        if kind == SystemKind::ZeroModeLiftup {
            // div-free at k = 0: eta U^2 + l U^3 = 0, same for B
            let scale = initial.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
            for off in [0, 3] {
                let d = initial[off + 1] * mode.eta + initial[off + 2] * mode.l as f64;
                if d.norm() > 1e-12 * scale * (mode.eta.abs() + mode.l.abs() as f64) {
                    return Err(Error::NotDivergenceFree {
                        residual: d.norm() / scale,
                        tol: 1e-12,
                    });
                }
            }
        }
        Ok(Self {
            kind,
            mode,
            params,
            initial,
            coupling: true,
        })
    }

    pub fn decoupled(mut self) -> Self {
        self.coupling = false;
        self
    }

    fn s(&self) -> f64 {
        self.params.sigma.symbol(self.mode.k, self.mode.l)
    }

    /// Largest step that still resolves the `alpha` oscillation.
    pub fn oscillation_step(&self) -> f64 {
        let s = match self.kind {
            SystemKind::ZeroModeLiftup => self.mode.l as f64,
            _ => self.s(),
        };
        let w = 2.0 * self.params.alpha * s.abs();
        if w > 0.0 {
            0.1 / w
        } else {
            f64::INFINITY
        }
    }

    pub fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let fr = self.mode;
        let nu = self.params.nu;
        let p = fr.p(t);
        let visc = nu * p;
        let k = fr.k as f64;
        let l = fr.l as f64;
        let c = if fr.k == 0 { 0.0 } else { k * fr.sheared(t) / p };
        let alpha = self.params.alpha;
        // e^{-2 i alpha s t} multiplies W^- in the W^+ equation, and conversely
        let theta = 2.0 * alpha * self.s() * t;
        let (ph_p, ph_m) = if self.coupling {
            (unit_phase(-theta), unit_phase(theta))
        } else {
            (ZERO, ZERO)
        };
        match self.kind {
            SystemKind::HomogeneousQG => {
                dy[0] = -y[0] * visc;
                dy[1] = -y[1] * (2.0 * c + visc);
            }
            SystemKind::NonhomogeneousF2 => {
                dy[0] = -y[0] * (c + visc) + ph_p * y[1] * c;
                dy[1] = -y[1] * (c + visc) + ph_m * y[0] * c;
            }
            SystemKind::NonhomogeneousSymV2 => {
                dy[0] = ph_p * y[1] * c - y[0] * visc;
                dy[1] = ph_m * y[0] * c - y[1] * visc;
            }
            SystemKind::NonhomogeneousFull => {
                let kk = k * k / p;
                let kl = k * l / p;
                for (me, other, ph) in [(0usize, 3usize, ph_p), (3, 0, ph_m)] {
                    let f2 = y[me + 1];
                    let tf2 = ph * y[other + 1];
                    dy[me] = -y[me] * (2.0 * c + visc) + (f2 + tf2) * kk - tf2;
                    dy[me + 1] = -f2 * (c + visc) + tf2 * c;
                    dy[me + 2] = -y[me + 2] * (2.0 * c + visc) + (f2 + tf2) * kl;
                }
            }
            SystemKind::ZeroModeLiftup => {
                let i_al = Complex64::new(0.0, alpha * l);
                for j in 0..3 {
                    dy[j] = i_al * y[3 + j] - y[j] * visc;
                    dy[3 + j] = i_al * y[j] - y[3 + j] * visc;
                }
                dy[0] -= y[1];
                dy[3] += y[4];
            }
        }
    }

    pub fn ode_options(&self, tight: bool) -> OdeOptions {
        OdeOptions {
            atol: if tight { 1e-13 } else { 1e-11 },
            rtol: if tight { 1e-12 } else { 1e-9 },
            h_max: self.oscillation_step(),
            ..OdeOptions::default()
        }
    }

    /// Integrates on `[0, t_final]` with the given options.
    pub fn integrate_with(&self, t_final: f64, opts: &OdeOptions) -> Result<LinearModeSolution> {
        let sol = dopri45(|t, y, dy| self.rhs(t, y, dy), 0.0, &self.initial, t_final, opts)?;
        Ok(LinearModeSolution::from_states(sol.times, sol.states))
    }

    /// Integrates on `[0, t_final]`, refining the sampling until the envelope
    /// peak changes by less than 0.1%.
    pub fn integrate(&self, t_final: f64) -> Result<LinearModeSolution> {
        let mut opts = self.ode_options(false);
        opts.h_max = opts.h_max.min(t_final / 200.0);
        let mut sol = self.integrate_with(t_final, &opts)?;
        for _ in 0..10 {
            opts.h_max *= 0.5;
            let finer = self.integrate_with(t_final, &opts)?;
            let change = (finer.peak.1 - sol.peak.1).abs() / sol.peak.1.max(1e-300);
            sol = finer;
            if change < 1e-3 {
                break;
            }
        }
        Ok(sol)
    }
}

/// Time series of one per-mode integration.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModeSolution {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<Complex64>>,
    /// `|y(t)| / |y(0)|` in the Euclidean norm of the state vector.
    pub amplification: Vec<f64>,
    pub peak: (f64, f64),
}

fn vnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

impl LinearModeSolution {
    pub fn from_states(times: Vec<f64>, amplitudes: Vec<Vec<Complex64>>) -> Self {
        let n0 = vnorm(&amplitudes[0]);
        let amplification: Vec<f64> = amplitudes
            .iter()
            .map(|a| if n0 > 0.0 { vnorm(a) / n0 } else { 0.0 })
            .collect();
        let peak = peak_of(&times, &amplification);
        Self {
            times,
            amplitudes,
            amplification,
            peak,
        }
    }

    /// `|y_i(t)| / |y(0)|` for one component.
    pub fn component_envelope(&self, i: usize) -> Vec<f64> {
        let n0 = vnorm(&self.amplitudes[0]);
        self.amplitudes
            .iter()
            .map(|a| if n0 > 0.0 { a[i].norm() / n0 } else { 0.0 })
            .collect()
    }

    pub fn component_peak(&self, i: usize) -> (f64, f64) {
        peak_of(&self.times, &self.component_envelope(i))
    }

    /// Envelope peak of the sum of the listed components' moduli squared.
    pub fn group_peak(&self, idx: &[usize]) -> (f64, f64) {
        let n0 = vnorm(&self.amplitudes[0]);
        let env: Vec<f64> = self
            .amplitudes
            .iter()
            .map(|a| {
                if n0 > 0.0 {
                    idx.iter().map(|&i| a[i].norm_sqr()).sum::<f64>().sqrt() / n0
                } else {
                    0.0
                }
            })
            .collect();
        peak_of(&self.times, &env)
    }
}

fn peak_of(times: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (times[0], values[0]);
    for (t, v) in times.iter().zip(values) {
        if *v > best.1 {
            best = (*t, *v);
        }
    }
    best
}

/// `int_0^t p` for a homogeneous mode, the viscous exponent over `nu`.
pub fn viscous_integral(fr: Frequency, t: f64) -> f64 {
    fr.p_integral(0.0, t)
}

fn require_homogeneous(system: &'static str, fr: Frequency, sigma: RationalShearAngle) -> Result<()> {
    if ModeClass::of(fr.k, fr.l, sigma) != ModeClass::Homogeneous {
        return Err(Error::WrongModeClass {
            system,
            detail: format!("mode (k={}, l={}) needs k != 0 and sigma k + l = 0", fr.k, fr.l),
        });
    }
    Ok(())
}

/// Exact solution factor of `d_t Q^2 = -nu p Q^2`.
pub fn homogeneous_q2_exact(fr: Frequency, params: &PhysParams, t: f64) -> Result<f64> {
    require_homogeneous("homogeneous_q2_exact", fr, params.sigma)?;
    Ok((-params.nu * viscous_integral(fr, t)).exp())
}

/// Exact solution factor of `d_t G^2 = -(2 c + nu p) G^2`.
pub fn homogeneous_g2_exact(fr: Frequency, params: &PhysParams, t: f64) -> Result<f64> {
    require_homogeneous("homogeneous_g2_exact", fr, params.sigma)?;
    Ok(fr.p(t) / fr.p(0.0) * (-params.nu * viscous_integral(fr, t)).exp())
}

/// `|U^2(t)| / |U^2(0)|` for the homogeneous exact solution `U^2 = Delta_L^{-1} Q^2`.
pub fn inviscid_damping_curve(fr: Frequency, params: &PhysParams, times: &[f64]) -> Result<Vec<f64>> {
    require_homogeneous("inviscid_damping_curve", fr, params.sigma)?;
    let p0 = fr.p(0.0);
    Ok(times
        .iter()
        .map(|&t| p0 / fr.p(t) * (-params.nu * viscous_integral(fr, t)).exp())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomogeneousQuantity {
    Q2,
    G2,
}

/// Maximizes a smooth envelope on `[0, t_max]`: dense scan plus golden section.
pub fn maximize_on(f: impl Fn(f64) -> f64, t_max: f64, samples: usize) -> (f64, f64) {
    let n = samples.max(8);
    let dt = t_max / n as f64;
    let mut best_i = 0;
    let mut best = f(0.0);
    for i in 1..=n {
        let v = f(i as f64 * dt);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut a = (best_i as f64 - 1.0).max(0.0) * dt;
    let mut b = ((best_i + 1) as f64 * dt).min(t_max);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if f(x1) >= f(x2) {
            b = x2;
        } else {
            a = x1;
        }
        if b - a < 1e-12 * t_max.max(1.0) {
            break;
        }
    }
    let tm = 0.5 * (a + b);
    let vm = f(tm);
    if vm >= best {
        (tm, vm)
    } else {
        (best_i as f64 * dt, best)
    }
}

/// Peak amplification of a homogeneous exact factor over `t >= 0`.
pub fn homogeneous_peak(q: HomogeneousQuantity, fr: Frequency, nu: f64) -> (f64, f64) {
    let p0 = fr.p(0.0);
    let f = |t: f64| {
        let v = (-nu * viscous_integral(fr, t)).exp();
        match q {
            HomogeneousQuantity::Q2 => v,
            HomogeneousQuantity::G2 => fr.p(t) / p0 * v,
        }
    };
    let k = fr.k.unsigned_abs().max(1) as f64;
    // beyond this horizon the cubic viscous decay dominates
    let t_max = 2.0 * fr.eta.abs() / k + 20.0 * nu.max(1e-300).cbrt().recip() / k.powf(2.0 / 3.0);
    maximize_on(f, t_max, 20_000)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub nus: Vec<f64>,
    pub peaks: Vec<f64>,
    pub t_peaks: Vec<f64>,
    pub etas: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(log x, log y)`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Peak-amplification scaling in `nu` for a fixed homogeneous `(k, l)`.
///
/// For each `nu` the peak is maximized over the lattice `eta = j / m`,
/// `|eta| <= eta_max`.
pub fn fit_homogeneous_scaling(
    q: HomogeneousQuantity,
    k: i64,
    l: i64,
    sigma: RationalShearAngle,
    nus: &[f64],
    m: usize,
    eta_max: f64,
) -> Result<ScalingFit> {
    if ModeClass::of(k, l, sigma) != ModeClass::Homogeneous {
        return Err(Error::WrongModeClass {
            system: "fit_homogeneous_scaling",
            detail: format!("(k={k}, l={l}) is not homogeneous"),
        });
    }
    if nus.len() < 3 {
        return Err(Error::InsufficientSamples(format!(
            "need at least 3 viscosities, got {}",
            nus.len()
        )));
    }
    let lo = nus.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = nus.iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) || (hi / lo).log10() < 2.0 - 1e-9 {
        return Err(Error::InsufficientSamples(
            "viscosities must span at least two decades".into(),
        ));
    }
    let jmax = (eta_max * m as f64).round() as i64;
    let rows: Vec<(f64, f64, f64)> = nus
        .par_iter()
        .map(|&nu| {
            (-jmax..=jmax)
                .map(|j| {
                    let eta = j as f64 / m as f64;
                    let (t, v) = homogeneous_peak(q, Frequency::new(k, eta, l), nu);
                    (v, t, eta)
                })
                .fold((f64::NEG_INFINITY, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
        })
        .collect();
    let peaks: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (slope, intercept, r_squared) = loglog_fit(nus, &peaks);
    Ok(ScalingFit {
        nus: nus.to_vec(),
        peaks,
        t_peaks: rows.iter().map(|r| r.1).collect(),
        etas: rows.iter().map(|r| r.2).collect(),
        slope,
        intercept,
        r_squared,
    })
}

pub fn fit_g2_scaling(k: i64, l: i64, sigma: RationalShearAngle, nus: &[f64]) -> Result<ScalingFit> {
    fit_homogeneous_scaling(HomogeneousQuantity::G2, k, l, sigma, nus, 8, 8.0)
}

pub fn integrate_nonhomogeneous_f2(
    fr: Frequency,
    params: &PhysParams,
    initial: [Complex64; 2],
    t_final: f64,
) -> Result<LinearModeSolution> {
    LinearModeSystem::new(SystemKind::NonhomogeneousF2, fr, *params, initial.to_vec())?.integrate(t_final)
}

pub fn integrate_sym_v2(
    fr: Frequency,
    params: &PhysParams,
    initial: [Complex64; 2],
    t_final: f64,
) -> Result<LinearModeSolution> {
    LinearModeSystem::new(SystemKind::NonhomogeneousSymV2, fr, *params, initial.to_vec())?.integrate(t_final)
}

pub fn integrate_nonhomogeneous_full(
    fr: Frequency,
    params: &PhysParams,
    initial: [Complex64; 6],
    t_final: f64,
) -> Result<LinearModeSolution> {
    LinearModeSystem::new(SystemKind::NonhomogeneousFull, fr, *params, initial.to_vec())?.integrate(t_final)
}

/// Zero-mode lift-up system; the envelope of interest is `component_peak(0)`.
pub fn zero_mode_liftup(
    fr: Frequency,
    params: &PhysParams,
    initial: [Complex64; 6],
    t_final: f64,
) -> Result<LinearModeSolution> {
    LinearModeSystem::new(SystemKind::ZeroModeLiftup, fr, *params, initial.to_vec())?.integrate(t_final)
}

/// Closed-form peak of the `alpha = 0` symmetrized system started from
/// `(1, -1)`: the difference mode grows like `sqrt(p / p0) e^{-nu int p}`.
pub fn sym_v2_free_peak(fr: Frequency, nu: f64) -> (f64, f64) {
    let p0 = fr.p(0.0);
    let f = |t: f64| (fr.p(t) / p0).sqrt() * (-nu * fr.p_integral(0.0, t)).exp();
    let k = fr.k.unsigned_abs().max(1) as f64;
    let t_max = 2.0 * fr.eta.abs() / k + 20.0 * nu.cbrt().recip() / k.powf(2.0 / 3.0);
    maximize_on(f, t_max, 20_000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(nu: f64, alpha: f64) -> PhysParams {
        PhysParams::new(nu, alpha, RationalShearAngle::integer(1)).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn q2_examples() {
        let fr = Frequency::new(1, 0.0, -1);
        assert_eq!(homogeneous_q2_exact(fr, &params(0.0, 10.0), 5.0).unwrap(), 1.0);
        let v = homogeneous_q2_exact(fr, &params(1e-3, 10.0), 10.0).unwrap();
        assert_relative_eq!(v, (-0.001f64 * (20.0 + 1000.0 / 3.0)).exp(), max_relative = 1e-14);
        assert_relative_eq!(v, 0.702340, epsilon = 1e-5);
        assert!(homogeneous_q2_exact(Frequency::new(1, 0.0, 0), &params(1e-3, 10.0), 1.0).is_err());
    }

    #[test]
    fn g2_examples() {
        let fr = Frequency::new(1, 0.0, -1);
        assert_relative_eq!(
            homogeneous_g2_exact(fr, &params(0.0, 10.0), 10.0).unwrap(),
            51.0,
            epsilon = 1e-12
        );
        assert_eq!(homogeneous_g2_exact(fr, &params(1e-3, 10.0), 0.0).unwrap(), 1.0);
        let (t, v) = homogeneous_peak(HomogeneousQuantity::G2, fr, 1e-3);
        assert!((v - 40.2).abs() < 0.1, "{v}");
        assert!((t - 12.5).abs() < 0.05, "{t}");
    }

    #[test]
    fn closed_forms_match_integrator() {
        let p = params(3e-3, 10.0);
        let fr = Frequency::new(2, 1.5, -2);
        let sys = LinearModeSystem::new(SystemKind::HomogeneousQG, fr, p, vec![c(1.0), c(1.0)]).unwrap();
        let sol = sys.integrate_with(15.0, &sys.ode_options(true)).unwrap();
        let last = sol.amplitudes.last().unwrap();
        let q = homogeneous_q2_exact(fr, &p, 15.0).unwrap();
        let g = homogeneous_g2_exact(fr, &p, 15.0).unwrap();
        assert!((last[0].re - q).abs() < 1e-10 * q);
        assert!((last[1].re - g).abs() < 1e-10 * g);
    }

    #[test]
    fn inviscid_damping_examples() {
        let fr = Frequency::new(1, 0.0, -1);
        let p = params(0.0, 10.0);
        let r = inviscid_damping_curve(fr, &p, &[0.0, 10.0, 20.0, 40.0]).unwrap();
        assert_eq!(r[0], 1.0);
        assert_relative_eq!(r[1], 2.0 / 102.0, epsilon = 1e-15);
        assert!((r[2] / r[3] - 4.0).abs() / 4.0 < 0.05);
    }

    #[test]
    fn scaling_fit_validates_input() {
        let s = RationalShearAngle::integer(1);
        assert!(matches!(
            fit_g2_scaling(1, -1, s, &[1e-2, 1e-3]),
            Err(Error::InsufficientSamples(_))
        ));
        assert!(matches!(
            fit_g2_scaling(1, -1, s, &[1e-2, 2e-2, 5e-2]),
            Err(Error::InsufficientSamples(_))
        ));
        assert!(matches!(
            fit_g2_scaling(1, 0, s, &[1e-2, 1e-3, 1e-4]),
            Err(Error::WrongModeClass { .. })
        ));
    }

    #[test]
    fn g2_and_q2_scaling() {
        let s = RationalShearAngle::integer(1);
        let nus = [1e-2, 1e-3, 1e-4, 1e-5];
        let g = fit_g2_scaling(1, -1, s, &nus).unwrap();
        assert!((g.slope + 2.0 / 3.0).abs() < 0.07, "{}", g.slope);
        let ratio = g.peaks[2] / g.peaks[1];
        assert!((ratio / 10f64.powf(2.0 / 3.0) - 1.0).abs() < 0.15);
        let q = fit_homogeneous_scaling(HomogeneousQuantity::Q2, 1, -1, s, &nus, 8, 8.0).unwrap();
        assert!(q.slope.abs() < 0.05);
    }

    #[test]
    fn class_guards() {
        let s = RationalShearAngle::new(1, 2).unwrap();
        let p = PhysParams::new(1e-3, 20.0, s).unwrap();
        for k in -3i64..=3 {
            for l in -3i64..=3 {
                let fr = Frequency::new(k, 0.5, l);
                let class = ModeClass::of(k, l, s);
                for kind in [
                    SystemKind::HomogeneousQG,
                    SystemKind::NonhomogeneousF2,
                    SystemKind::NonhomogeneousSymV2,
                    SystemKind::NonhomogeneousFull,
                ] {
                    let init = vec![ZERO; kind.dimension()];
                    let ok = LinearModeSystem::new(kind, fr, p, init).is_ok();
                    assert_eq!(ok, class == kind.required_class(), "{kind:?} {k} {l}");
                }
                let ok = LinearModeSystem::new(SystemKind::ZeroModeLiftup, fr, p, vec![ZERO; 6]).is_ok();
                assert_eq!(ok, k == 0);
            }
        }
        assert!(
            LinearModeSystem::new(SystemKind::ZeroModeLiftup, Frequency::new(0, 0.0, 0), p, vec![ZERO; 6]).is_err()
        );
    }

    #[test]
    fn zero_initial_stays_zero() {
        let p = params(1e-3, 10.0);
        let fr = Frequency::new(1, 0.0, 1);
        let s = integrate_sym_v2(fr, &p, [ZERO; 2], 10.0).unwrap();
        assert!(s.amplitudes.iter().all(|a| a.iter().all(|v| *v == ZERO)));
        let f = integrate_nonhomogeneous_f2(fr, &p, [ZERO; 2], 10.0).unwrap();
        assert!(f.amplification.iter().all(|v| *v == 0.0));
        let z = zero_mode_liftup(Frequency::new(0, 0.0, 1), &p, [ZERO; 6], 10.0).unwrap();
        assert!(z.amplification.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sym_v2_alpha_stabilization() {
        let fr = Frequency::new(1, 0.0, 1);
        let nu: f64 = 1e-3;
        let t_final = 10.0 / nu.cbrt();
        let init = [c(1.0), c(-1.0)];
        let free = integrate_sym_v2(fr, &params(nu, 0.0), init, t_final).unwrap();
        let (_, closed) = sym_v2_free_peak(fr, nu);
        assert!((free.peak.1 / closed - 1.0).abs() < 1e-3, "{} {}", free.peak.1, closed);
        let osc = integrate_sym_v2(fr, &params(nu, 10.0), init, t_final).unwrap();
        assert!(osc.peak.1 <= 3.0);
        // the (1, 1) mode gives a ratio just under 5; (1, 0) is the stronger case
        let fr0 = Frequency::new(1, 0.0, 0);
        let free0 = integrate_sym_v2(fr0, &params(nu, 0.0), init, t_final).unwrap();
        let osc0 = integrate_sym_v2(fr0, &params(nu, 10.0), init, t_final).unwrap();
        assert!(free0.peak.1 / osc0.peak.1 >= 5.0);
    }

    #[test]
    fn f2_euler_growth_is_monotone() {
        let fr = Frequency::new(1, 0.0, 1);
        let sol = integrate_nonhomogeneous_f2(fr, &params(0.0, 0.0), [c(1.0), c(0.0)], 50.0).unwrap();
        let env = &sol.amplification;
        assert!(env.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!(*env.last().unwrap() > 10.0);
    }

    #[test]
    fn f2_large_alpha_approaches_decoupled() {
        let nu: f64 = 1e-3;
        let fr = Frequency::new(1, 0.0, 1);
        let p = params(nu, 1e3);
        let t_final = 2.0 / nu.cbrt();
        let sys = LinearModeSystem::new(SystemKind::NonhomogeneousF2, fr, p, vec![c(1.0), c(0.5)]).unwrap();
        let coupled = sys.clone().integrate(t_final).unwrap();
        let free = sys.decoupled().integrate(t_final).unwrap();
        assert!((coupled.peak.1 / free.peak.1 - 1.0).abs() < 0.1);
    }

    #[test]
    fn liftup_examples() {
        let nu: f64 = 1e-3;
        let fr = Frequency::new(0, 0.0, 1);
        let mut init = [ZERO; 6];
        init[1] = c(1.0);
        let free = zero_mode_liftup(fr, &params(nu, 0.0), init, 3000.0).unwrap();
        let (_, v) = free.component_peak(0);
        assert!((v - 1.0 / (std::f64::consts::E * nu)).abs() / v < 1e-3, "{v}");
        let osc = zero_mode_liftup(fr, &params(nu, 10.0), init, 3000.0).unwrap();
        assert!(osc.component_peak(0).1 <= 5.0);
    }

    #[test]
    fn liftup_rejects_non_solenoidal_data() {
        let mut init = [ZERO; 6];
        init[1] = c(1.0);
        let r = LinearModeSystem::new(
            SystemKind::ZeroModeLiftup,
            Frequency::new(0, 1.0, 0),
            params(1e-3, 10.0),
            init.to_vec(),
        );
        assert!(matches!(r, Err(Error::NotDivergenceFree { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn amplification_starts_at_one(re in -1.0f64..1.0, im in -1.0f64..1.0, eta in -3.0f64..3.0) {
            prop_assume!(re.abs() + im.abs() > 1e-3);
            let fr = Frequency::new(1, eta, 2);
            let sol = LinearModeSystem::new(SystemKind::NonhomogeneousFull, fr, params(1e-2, 10.0),
                vec![Complex64::new(re, im); 6]).unwrap().integrate_with(1.0, &OdeOptions::default()).unwrap();
            prop_assert!((sol.amplification[0] - 1.0).abs() < 1e-15);
        }
    }
}
