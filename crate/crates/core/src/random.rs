//! Seeded random spectral data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{SpectralScalarField, SpectralVectorField};
use crate::grid::{GridSpec, ModeIndex};

/// Uniform random coefficients on the dealiased band.
///
/// With `hermitian` the field represents a real function; the Nyquist planes
/// are always zero.
pub fn random_field(grid: GridSpec, seed: u64, hermitian: bool) -> SpectralScalarField {
    random_band_field(grid, seed, hermitian, |m| grid.is_retained(m))
}

/// Random coefficients on the modes selected by `keep`.
pub fn random_band_field(
    grid: GridSpec,
    seed: u64,
    hermitian: bool,
    keep: impl Fn(ModeIndex) -> bool,
) -> SpectralScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralScalarField::from_fn(grid, 0.0, |m| {
        let re = rng.gen_range(-1.0..1.0);
        let im = rng.gen_range(-1.0..1.0);
        if keep(m) {
            Complex64::new(re, im)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    if hermitian {
        f.enforce_hermitian();
    }
    f
}

pub fn random_vector(grid: GridSpec, seed: u64) -> SpectralVectorField {
    let base = seed.wrapping_mul(3);
    SpectralVectorField::new([
        random_field(grid, base, true),
        random_field(grid, base.wrapping_add(1), true),
        random_field(grid, base.wrapping_add(2), true),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_dealiased_and_deterministic() {
        let g = GridSpec::new(8, 16, 8, 2).unwrap();
        let f = random_field(g, 42, true);
        assert_eq!(f.hermitian_defect(), 0.0);
        assert!(f.is_dealiased());
        assert_eq!(f, random_field(g, 42, true));
        assert_ne!(f, random_field(g, 43, true));
    }
}
