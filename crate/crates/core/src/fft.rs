//! 3D transforms between physical samples and spectral coefficients.
//!
//! Coefficient convention: `f(X, Y, Z) = sum f_hat e^{i (k X + (j/m) Y + l Z)}`,
//! so the forward transform carries the `1/N` factor and a constant field maps
//! to a single `(0, 0, 0)` coefficient equal to its value.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::field::SpectralScalarField;
use crate::grid::GridSpec;

/// Real samples on the `nx * ny * nz` physical grid, same layout as spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl PhysicalField {
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let (dx, dy, dz) = Self::spacing(&grid);
        let values = (0..grid.len())
            .map(|i| {
                let (ix, iy, iz) = grid.unravel(i);
                f(ix as f64 * dx, iy as f64 * dy, iz as f64 * dz)
            })
            .collect();
        Self { grid, values }
    }

    pub fn spacing(grid: &GridSpec) -> (f64, f64, f64) {
        let two_pi = 2.0 * std::f64::consts::PI;
        (
            two_pi / grid.nx as f64,
            grid.y_length() / grid.ny as f64,
            two_pi / grid.nz as f64,
        )
    }
}

struct AxisPlans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Cached plans for one grid shape.
pub struct Fft3 {
    grid: GridSpec,
    x: AxisPlans,
    y: AxisPlans,
    z: AxisPlans,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("grid", &self.grid).finish()
    }
}

impl Fft3 {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let mut plans = |n| AxisPlans {
            fwd: planner.plan_fft(n, FftDirection::Forward),
            inv: planner.plan_fft(n, FftDirection::Inverse),
        };
        Self {
            grid,
            x: plans(grid.nx),
            y: plans(grid.ny),
            z: plans(grid.nz),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let g = self.grid;
        let pick = |a: &AxisPlans| if forward { a.fwd.clone() } else { a.inv.clone() };
        // z lines are contiguous
        let pz = pick(&self.z);
        data.par_chunks_mut(g.nz).for_each(|line| pz.process(line));
        // y lines: stride nz inside each x slab
        let py = pick(&self.y);
        data.par_chunks_mut(g.ny * g.nz).for_each(|slab| {
            let mut buf = vec![Complex64::new(0.0, 0.0); g.ny];
            for iz in 0..g.nz {
                for iy in 0..g.ny {
                    buf[iy] = slab[iy * g.nz + iz];
                }
                py.process(&mut buf);
                for iy in 0..g.ny {
                    slab[iy * g.nz + iz] = buf[iy];
                }
            }
        });
        // x lines: stride ny * nz; gather per (y, z) column
        let px = pick(&self.x);
        let plane = g.ny * g.nz;
        let columns: Vec<Vec<Complex64>> = (0..plane)
            .into_par_iter()
            .map(|c| {
                let mut buf: Vec<Complex64> = (0..g.nx).map(|ix| data[ix * plane + c]).collect();
                px.process(&mut buf);
                buf
            })
            .collect();
        for (c, col) in columns.into_iter().enumerate() {
            for (ix, v) in col.into_iter().enumerate() {
                data[ix * plane + c] = v;
            }
        }
    }

    /// Physical complex samples to coefficients (divides by `N`).
    pub fn forward_complex(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let s = 1.0 / self.grid.len() as f64;
        data.par_iter_mut().for_each(|v| *v *= s);
    }

    /// Coefficients to physical complex samples (no scaling).
    pub fn inverse_complex(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    pub fn forward(&self, phys: &PhysicalField) -> Result<SpectralScalarField> {
        if phys.grid != self.grid {
            return Err(Error::GridMismatch(format!("{:?} vs plan {:?}", phys.grid, self.grid)));
        }
        let mut data: Vec<Complex64> = phys.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_complex(&mut data);
        Ok(SpectralScalarField {
            grid: self.grid,
            t_frame: 0.0,
            shear_shift: 0,
            coeffs: data,
        })
    }

    /// Real part of the inverse transform; exact for Hermitian input.
    pub fn inverse(&self, f: &SpectralScalarField) -> Result<PhysicalField> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch(format!("{:?} vs plan {:?}", f.grid, self.grid)));
        }
        let mut data = f.coeffs.clone();
        self.inverse_complex(&mut data);
        Ok(PhysicalField {
            grid: self.grid,
            values: data.into_iter().map(|c| c.re).collect(),
        })
    }
}

pub fn fft_forward(phys: &PhysicalField) -> Result<SpectralScalarField> {
    Fft3::new(phys.grid).forward(phys)
}

pub fn fft_inverse(f: &SpectralScalarField) -> Result<PhysicalField> {
    Fft3::new(f.grid).inverse(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ModeIndex;
    use proptest::prelude::*;

    #[test]
    fn constant_maps_to_mean_coefficient() {
        let g = GridSpec::new(8, 8, 4, 2).unwrap();
        let f = fft_forward(&PhysicalField::from_fn(g, |_, _, _| 3.5)).unwrap();
        assert!((f.coeffs[0].re - 3.5).abs() < 1e-14);
        assert!(f.coeffs.iter().skip(1).all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn single_harmonic() {
        let g = GridSpec::new(8, 8, 4, 2).unwrap();
        let plan = Fft3::new(g);
        let mut data: Vec<Complex64> = (0..g.len())
            .map(|i| {
                let (ix, _, _) = g.unravel(i);
                let x = ix as f64 * 2.0 * std::f64::consts::PI / g.nx as f64;
                Complex64::new(x.cos(), x.sin())
            })
            .collect();
        plan.forward_complex(&mut data);
        let idx = g.index_of(ModeIndex::new(1, 0, 0)).unwrap();
        for (i, c) in data.iter().enumerate() {
            let expect = if i == idx { 1.0 } else { 0.0 };
            assert!((c - Complex64::new(expect, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn eta_lattice_spacing_is_one_over_m() {
        let g = GridSpec::new(4, 16, 4, 4).unwrap();
        // cos(Y / 4) has eta = 1/4, i.e. j = 1
        let f = fft_forward(&PhysicalField::from_fn(g, |_, y, _| (y / 4.0).cos())).unwrap();
        let idx = g.index_of(ModeIndex::new(0, 1, 0)).unwrap();
        assert!((f.coeffs[idx].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn grid_mismatch_is_error() {
        let a = GridSpec::new(4, 4, 4, 1).unwrap();
        let b = GridSpec::new(8, 4, 4, 1).unwrap();
        let plan = Fft3::new(a);
        assert!(plan.forward(&PhysicalField::from_fn(b, |_, _, _| 0.0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip_random_real_field(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let g = GridSpec::new(8, 16, 6, 2).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let phys = PhysicalField { grid: g, values: (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect() };
            let plan = Fft3::new(g);
            let back = plan.inverse(&plan.forward(&phys).unwrap()).unwrap();
            let err = phys.values.iter().zip(&back.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-13);
        }
    }
}
