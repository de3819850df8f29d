//! Spectral carriers for scalar and vector fields in the shearing frame.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Frequency, GridSpec, ModeIndex, PhysParams};

/// Complex Fourier coefficients on the truncated `(k, j, l)` lattice.
///
/// `t_frame` is the shearing-frame time the coefficients refer to. The
/// stored `j` index maps to the frame frequency
/// `eta = (j + k * shear_shift) / m`; `shear_shift` is zero unless the field
/// has been remapped.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalarField {
    pub grid: GridSpec,
    pub t_frame: f64,
    pub shear_shift: i64,
    pub coeffs: Vec<Complex64>,
}

impl SpectralScalarField {
    pub fn zeros(grid: GridSpec, t_frame: f64) -> Self {
        Self {
            grid,
            t_frame,
            shear_shift: 0,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, t_frame: f64, mut f: impl FnMut(ModeIndex) -> Complex64) -> Self {
        let coeffs = (0..grid.len()).map(|i| f(grid.mode_at(i))).collect();
        Self {
            grid,
            t_frame,
            shear_shift: 0,
            coeffs,
        }
    }

    /// Frame frequency `(k, eta, l)` of storage slot `idx`.
    #[inline]
    pub fn frequency(&self, idx: usize) -> Frequency {
        let mode = self.grid.mode_at(idx);
        Frequency::new(mode.k, self.eta_of(mode), mode.l)
    }

    #[inline]
    pub fn eta_of(&self, mode: ModeIndex) -> f64 {
        (mode.j + mode.k * self.shear_shift) as f64 / self.grid.m as f64
    }

    pub fn get(&self, mode: ModeIndex) -> Option<Complex64> {
        self.grid.index_of(mode).map(|i| self.coeffs[i])
    }

    /// Sets a coefficient and its Hermitian partner.
    pub fn set_hermitian(&mut self, mode: ModeIndex, value: Complex64) -> Result<()> {
        let idx = self
            .grid
            .index_of(mode)
            .ok_or_else(|| Error::InvalidGrid(format!("mode {mode:?} outside the lattice")))?;
        let c = self.grid.conjugate_index(idx);
        if c == idx {
            self.coeffs[idx] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[idx] = value;
            self.coeffs[c] = value.conj();
        }
        Ok(())
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.grid == other.grid && self.shear_shift == other.shear_shift
    }

    pub fn check_layout(&self, other: &Self) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?}/shift {} vs {:?}/shift {}",
                self.grid, self.shear_shift, other.grid, other.shear_shift
            )))
        }
    }

    /// New field with each coefficient multiplied by `symbol(frequency)`.
    pub fn map_symbol(&self, symbol: impl Fn(Frequency) -> Complex64 + Sync) -> Self {
        let coeffs = self
            .coeffs
            .par_iter()
            .enumerate()
            .map(|(i, c)| c * symbol(self.frequency(i)))
            .collect();
        Self {
            coeffs,
            ..self.clone_meta()
        }
    }

    pub fn map_symbol_in_place(&mut self, symbol: impl Fn(Frequency) -> Complex64 + Sync) {
        let grid = self.grid;
        let shift = self.shear_shift;
        self.coeffs.par_iter_mut().enumerate().for_each(|(i, c)| {
            let mode = grid.mode_at(i);
            let eta = (mode.j + mode.k * shift) as f64 / grid.m as f64;
            *c *= symbol(Frequency::new(mode.k, eta, mode.l));
        });
    }

    pub(crate) fn clone_meta(&self) -> Self {
        Self {
            grid: self.grid,
            t_frame: self.t_frame,
            shear_shift: self.shear_shift,
            coeffs: Vec::new(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64 + Sync) -> Self {
        debug_assert!(self.same_layout(other));
        let coeffs = self
            .coeffs
            .par_iter()
            .zip(other.coeffs.par_iter())
            .map(|(a, b)| f(*a, *b))
            .collect();
        Self {
            coeffs,
            ..self.clone_meta()
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            ..self.clone_meta()
        }
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (y, xv) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += xv * a;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Coefficient-space inner product `sum Re(a conj(b))`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest violation of `f(-k) = conj(f(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| {
                let c = self.grid.conjugate_index(i);
                (self.coeffs[i] - self.coeffs[c].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Replaces every pair by its Hermitian average, making the symmetry exact.
    pub fn enforce_hermitian(&mut self) {
        for i in 0..self.coeffs.len() {
            let c = self.grid.conjugate_index(i);
            if c < i {
                continue;
            }
            if c == i {
                self.coeffs[i].im = 0.0;
            } else {
                let avg = 0.5 * (self.coeffs[i] + self.coeffs[c].conj());
                self.coeffs[i] = avg;
                self.coeffs[c] = avg.conj();
            }
        }
    }

    /// Zeroes every coefficient outside the dealiased band.
    pub fn dealias(&mut self) {
        let grid = self.grid;
        self.coeffs.par_iter_mut().enumerate().for_each(|(i, c)| {
            if !grid.is_retained(grid.mode_at(i)) {
                *c = Complex64::new(0.0, 0.0);
            }
        });
    }

    pub fn is_dealiased(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| self.grid.is_retained(self.grid.mode_at(i)) || *c == Complex64::new(0.0, 0.0))
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn first_non_finite(&self) -> Option<ModeIndex> {
        self.coeffs
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
            .map(|i| self.grid.mode_at(i))
    }
}

/// Three components (X, Y, Z) of a spectral vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    pub comps: [SpectralScalarField; 3],
    pub div_free_moving_frame: bool,
}

impl SpectralVectorField {
    pub fn zeros(grid: GridSpec, t_frame: f64) -> Self {
        let z = SpectralScalarField::zeros(grid, t_frame);
        Self {
            comps: [z.clone(), z.clone(), z],
            div_free_moving_frame: true,
        }
    }

    pub fn new(comps: [SpectralScalarField; 3]) -> Self {
        Self {
            comps,
            div_free_moving_frame: false,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.comps[0].grid
    }

    pub fn t_frame(&self) -> f64 {
        self.comps[0].t_frame
    }

    pub fn set_t_frame(&mut self, t: f64) {
        for c in &mut self.comps {
            c.t_frame = t;
        }
    }

    pub fn map(&self, f: impl Fn(&SpectralScalarField) -> SpectralScalarField) -> Self {
        Self {
            comps: [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])],
            div_free_moving_frame: false,
        }
    }

    pub fn zip(
        &self,
        other: &Self,
        f: impl Fn(&SpectralScalarField, &SpectralScalarField) -> SpectralScalarField,
    ) -> Self {
        Self {
            comps: [
                f(&self.comps[0], &other.comps[0]),
                f(&self.comps[1], &other.comps[1]),
                f(&self.comps[2], &other.comps[2]),
            ],
            div_free_moving_frame: false,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.zip(other, |a, b| a.add(b));
        out.div_free_moving_frame = self.div_free_moving_frame && other.div_free_moving_frame;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.zip(other, |a, b| a.sub(b));
        out.div_free_moving_frame = self.div_free_moving_frame && other.div_free_moving_frame;
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.map(|c| c.scale(s));
        out.div_free_moving_frame = self.div_free_moving_frame;
        out
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.comps.iter().zip(&other.comps).map(|(a, b)| a.inner(b)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.comps.iter().map(|c| c.norm_sq()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn enforce_hermitian(&mut self) {
        for c in &mut self.comps {
            c.enforce_hermitian();
        }
    }

    pub fn dealias(&mut self) {
        for c in &mut self.comps {
            c.dealias();
        }
    }
}

/// Velocity and magnetic perturbations in the shearing frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MhdState {
    pub u: SpectralVectorField,
    pub b: SpectralVectorField,
    pub t: f64,
    pub params: PhysParams,
}

impl MhdState {
    pub fn zeros(grid: GridSpec, params: PhysParams) -> Self {
        Self {
            u: SpectralVectorField::zeros(grid, 0.0),
            b: SpectralVectorField::zeros(grid, 0.0),
            t: 0.0,
            params,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.u.grid()
    }

    /// Kinetic plus magnetic energy `(|U|^2 + |B|^2) / 2` in coefficient norm.
    pub fn energy(&self) -> f64 {
        0.5 * (self.u.norm_sq() + self.b.norm_sq())
    }

    pub fn check_finite(&self) -> Result<()> {
        let names = ["u1", "u2", "u3", "b1", "b2", "b3"];
        for (i, c) in self.u.comps.iter().chain(self.b.comps.iter()).enumerate() {
            if let Some(mode) = c.first_non_finite() {
                return Err(Error::NonFinite {
                    component: names[i],
                    mode,
                    t: self.t,
                });
            }
        }
        Ok(())
    }
}
