//! Lattice, parameter and mode-index types shared by every other module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Rational tilt `sigma = q / p` of the background field `alpha (sigma, 0, 1)`.
///
/// Always stored in lowest terms with `p >= 1`, so `sigma k + l` is either
/// exactly zero or at least `1/p` in magnitude for integer `(k, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct RationalShearAngle {
    q: i64,
    p: i64,
}

impl RationalShearAngle {
    pub fn new(q: i64, p: i64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("sigma denominator must be nonzero".into()));
        }
        let sign = if p < 0 { -1 } else { 1 };
        let g = gcd(q, p).max(1);
        Ok(Self {
            q: sign * q / g,
            p: sign * p / g,
        })
    }

    pub fn integer(q: i64) -> Self {
        Self { q, p: 1 }
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn value(&self) -> f64 {
        self.q as f64 / self.p as f64
    }

    /// Integer numerator of `sigma k + l` over the common denominator `p`.
    #[inline]
    pub fn numerator(&self, k: i64, l: i64) -> i64 {
        self.q * k + self.p * l
    }

    /// `sigma k + l` as a float, computed from the exact integer numerator.
    #[inline]
    pub fn symbol(&self, k: i64, l: i64) -> f64 {
        self.numerator(k, l) as f64 / self.p as f64
    }

    pub fn is_resonant(&self, k: i64, l: i64) -> bool {
        self.numerator(k, l) == 0
    }
}

impl TryFrom<(i64, i64)> for RationalShearAngle {
    type Error = Error;
    fn try_from((q, p): (i64, i64)) -> Result<Self> {
        Self::new(q, p)
    }
}

impl From<RationalShearAngle> for (i64, i64) {
    fn from(s: RationalShearAngle) -> Self {
        (s.q, s.p)
    }
}

/// Physical parameters. Viscosity and resistivity are equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub nu: f64,
    pub alpha: f64,
    pub sigma: RationalShearAngle,
    pub delta0: f64,
}

impl PhysParams {
    /// Parameters with the default `delta0 = 1/(100 alpha)` (0 when `alpha = 0`).
    pub fn new(nu: f64, alpha: f64, sigma: RationalShearAngle) -> Result<Self> {
        let params = Self {
            nu,
            alpha,
            sigma,
            delta0: if alpha == 0.0 { 0.0 } else { 1.0 / (100.0 * alpha.abs()) },
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks positivity only. The `alpha > 8p` hypothesis is reported by
    /// [`PhysParams::within_theorem`] and left to the caller to enforce.
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be >= 0, got {}", self.nu)));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) && self.alpha > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta0 must be > 0, got {}",
                self.delta0
            )));
        }
        Ok(())
    }

    pub fn within_theorem(&self) -> bool {
        self.alpha.abs() > 8.0 * self.sigma.p() as f64
    }

    pub fn nu_third(&self) -> f64 {
        self.nu.cbrt()
    }
}

/// Truncated Fourier lattice on `T x T_{2 pi m} x T`.
///
/// `nx, ny, nz` are the numbers of stored modes per direction (FFT ordering),
/// the `Y` torus has length `2 pi m`, so `eta = j / m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub m: usize,
    pub dealias_fraction: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, nz: usize, m: usize) -> Result<Self> {
        let g = Self {
            nx,
            ny,
            nz,
            m,
            dealias_fraction: 2.0 / 3.0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny), ("nz", self.nz)] {
            if n == 0 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("{name} must be even and positive, got {n}")));
            }
        }
        if self.m == 0 {
            return Err(Error::InvalidGrid("m must be positive".into()));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn y_length(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.m as f64
    }

    /// Linear storage index; `z` is the fastest axis.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.ny + iy) * self.nz + iz
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let iz = idx % self.nz;
        let rest = idx / self.nz;
        (rest / self.ny, rest % self.ny, iz)
    }

    /// Signed wavenumber of an FFT slot; the Nyquist slot maps to `-n/2`.
    #[inline]
    pub fn wavenumber(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    #[inline]
    pub fn slot(w: i64, n: usize) -> Option<usize> {
        let half = (n / 2) as i64;
        if w >= -half && w < half {
            Some(w.rem_euclid(n as i64) as usize)
        } else {
            None
        }
    }

    #[inline]
    pub fn mode_at(&self, idx: usize) -> ModeIndex {
        let (ix, iy, iz) = self.unravel(idx);
        ModeIndex {
            k: Self::wavenumber(ix, self.nx),
            j: Self::wavenumber(iy, self.ny),
            l: Self::wavenumber(iz, self.nz),
        }
    }

    pub fn index_of(&self, mode: ModeIndex) -> Option<usize> {
        Some(self.index(
            Self::slot(mode.k, self.nx)?,
            Self::slot(mode.j, self.ny)?,
            Self::slot(mode.l, self.nz)?,
        ))
    }

    /// Storage index of the Hermitian partner `(-k, -j, -l)`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (ix, iy, iz) = self.unravel(idx);
        self.index(
            (self.nx - ix) % self.nx,
            (self.ny - iy) % self.ny,
            (self.nz - iz) % self.nz,
        )
    }

    /// Largest retained wavenumber per direction under the dealiasing rule.
    pub fn dealias_limits(&self) -> (i64, i64, i64) {
        let lim = |n: usize| -> i64 {
            let raw = self.dealias_fraction * (n / 2) as f64;
            // sharp cutoff, and the Nyquist slot is never retained
            (raw + 1e-12).floor().min((n / 2) as f64 - 1.0) as i64
        };
        (lim(self.nx), lim(self.ny), lim(self.nz))
    }

    pub fn is_retained(&self, mode: ModeIndex) -> bool {
        let (kx, jy, lz) = self.dealias_limits();
        mode.k.abs() <= kx && mode.j.abs() <= jy && mode.l.abs() <= lz
    }
}

/// One `(k, eta = j/m, l)` lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub k: i64,
    pub j: i64,
    pub l: i64,
}

impl ModeIndex {
    pub fn new(k: i64, j: i64, l: i64) -> Self {
        Self { k, j, l }
    }

    pub fn eta(&self, m: usize) -> f64 {
        self.j as f64 / m as f64
    }

    pub fn class(&self, sigma: RationalShearAngle) -> ModeClass {
        ModeClass::of(self.k, self.l, sigma)
    }
}

/// Decomposition of frequencies by `k` and `sigma k + l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeClass {
    /// `k = 0`.
    Zero,
    /// `k != 0`, `sigma k + l = 0`.
    Homogeneous,
    /// `k != 0`, `sigma k + l != 0`.
    Nonhomogeneous,
}

impl ModeClass {
    #[inline]
    pub fn of(k: i64, l: i64, sigma: RationalShearAngle) -> Self {
        if k == 0 {
            ModeClass::Zero
        } else if sigma.is_resonant(k, l) {
            ModeClass::Homogeneous
        } else {
            ModeClass::Nonhomogeneous
        }
    }
}

/// Continuous frequency triple `(k, eta, l)` used by multipliers and symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub k: i64,
    pub eta: f64,
    pub l: i64,
}

impl Frequency {
    pub fn new(k: i64, eta: f64, l: i64) -> Self {
        Self { k, eta, l }
    }

    /// `eta - k t`
    #[inline]
    pub fn sheared(&self, t: f64) -> f64 {
        self.eta - self.k as f64 * t
    }

    /// `p(t) = k^2 + (eta - k t)^2 + l^2`, the symbol of `-Delta_L`.
    #[inline]
    pub fn p(&self, t: f64) -> f64 {
        let k = self.k as f64;
        let l = self.l as f64;
        let s = self.sheared(t);
        k * k + s * s + l * l
    }

    /// `int_{t0}^{t1} p(tau) d tau` in closed form.
    pub fn p_integral(&self, t0: f64, t1: f64) -> f64 {
        let k = self.k as f64;
        let l = self.l as f64;
        let dt = t1 - t0;
        if self.k == 0 {
            return (self.eta * self.eta + l * l) * dt;
        }
        let a = self.sheared(t0);
        let b = self.sheared(t1);
        // (a^3 - b^3) / (3k) factored to stay accurate for small dt
        (k * k + l * l) * dt + dt * (a * a + a * b + b * b) / 3.0
    }

    /// Japanese bracket `<k, eta, l> = sqrt(1 + k^2 + eta^2 + l^2)`.
    #[inline]
    pub fn bracket(&self) -> f64 {
        let k = self.k as f64;
        let l = self.l as f64;
        (1.0 + k * k + self.eta * self.eta + l * l).sqrt()
    }
}
