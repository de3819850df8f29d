//! Shear-frame remapping: integer relabeling of the `eta` lattice.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{MhdState, SpectralScalarField, SpectralVectorField};
use crate::grid::ModeIndex;

/// Relabels `j -> j - k delta`, keeping the absolute frequency `eta` of every
/// retained coefficient. Returns the field and the dropped `|c|^2` sum.
pub fn shift_labels(f: &SpectralScalarField, delta: i64) -> (SpectralScalarField, f64) {
    let g = f.grid;
    let mut out = f.clone_meta();
    out.coeffs = vec![Complex64::new(0.0, 0.0); f.coeffs.len()];
    out.shear_shift = f.shear_shift + delta;
    let mut dropped = 0.0;
    for (i, c) in f.coeffs.iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let m = g.mode_at(i);
        let target = ModeIndex::new(m.k, m.j - m.k * delta, m.l);
        match g.index_of(target).filter(|_| g.is_retained(target)) {
            Some(j) => out.coeffs[j] = *c,
            None => dropped += c.norm_sqr(),
        }
    }
    (out, dropped)
}

fn shift_vector(v: &SpectralVectorField, delta: i64) -> (SpectralVectorField, f64) {
    let mut dropped = 0.0;
    let comps = [0, 1, 2].map(|c| {
        let (f, d) = shift_labels(&v.comps[c], delta);
        dropped += d;
        f
    });
    (
        SpectralVectorField {
            comps,
            div_free_moving_frame: v.div_free_moving_frame,
        },
        dropped,
    )
}

/// Relabels the state by `delta` lattice units; returns the dropped energy.
pub fn shift_state(state: &MhdState, delta: i64) -> (MhdState, f64) {
    let (u, du) = shift_vector(&state.u, delta);
    let (b, db) = shift_vector(&state.b, delta);
    (
        MhdState {
            u,
            b,
            t: state.t,
            params: state.params,
        },
        0.5 * (du + db),
    )
}

/// Remaps at a lattice time `t = n / m` so that stored labels equal
/// `m (eta - k t)`. Returns the remapped state and the dropped energy.
pub fn remap_shear_frame(state: &MhdState) -> Result<(MhdState, f64)> {
    let m = state.grid().m;
    let tm = state.t * m as f64;
    if (tm - tm.round()).abs() > 1e-9 * tm.abs().max(1.0) {
        return Err(Error::NonLatticeRemap { t: state.t, m });
    }
    let delta = tm.round() as i64 - state.u.comps[0].shear_shift;
    Ok(shift_state(state, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::random::random_field;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn shift_preserves_frequencies_of_kept_modes(seed in 0u64..1000, delta in -3i64..4) {
            let g = GridSpec::new(8, 16, 8, 2).unwrap();
            let f = random_field(g, seed, true);
            let (s, dropped) = shift_labels(&f, delta);
            let mut kept = 0.0;
            for (i, c) in s.coeffs.iter().enumerate() {
                if c.norm_sqr() > 0.0 {
                    let m = g.mode_at(i);
                    let orig = ModeIndex::new(m.k, m.j + m.k * delta, m.l);
                    prop_assert_eq!(s.eta_of(m), f.eta_of(orig));
                    prop_assert_eq!(*c, f.get(orig).unwrap());
                    kept += c.norm_sqr();
                }
            }
            prop_assert!((kept + dropped - f.norm_sq()).abs() <= 1e-12 * f.norm_sq());
            prop_assert_eq!(s.hermitian_defect(), 0.0);
        }
    }
}
