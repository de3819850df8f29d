//! Fields derived from a state: velocity, magnetic field, good unknowns and
//! their moving-frame Laplacians.

use serde::{Deserialize, Serialize};

use crate::field::{MhdState, SpectralScalarField};
use crate::spectral::{good_unknowns_forward, laplace_l};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    U,
    B,
    /// `W^{+-} = T^{-t}_{+-alpha}(U +- B)`, both signs.
    W,
    /// `F^{+-} = Delta_L W^{+-}`, both signs.
    F,
    /// `Q = Delta_L U`.
    Q,
    /// `G = Delta_L B`.
    G,
}

/// Components `comps` (0-based) of `field`; norms add their squares.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quantity {
    pub field: Field,
    pub comps: Vec<usize>,
}

impl Quantity {
    pub fn new(field: Field, comps: &[usize]) -> Self {
        Self {
            field,
            comps: comps.to_vec(),
        }
    }

    pub fn all(field: Field) -> Self {
        Self::new(field, &[0, 1, 2])
    }

    pub fn extract(&self, state: &MhdState) -> Vec<SpectralScalarField> {
        let t = state.t;
        let pick = |v: &crate::field::SpectralVectorField| -> Vec<SpectralScalarField> {
            self.comps.iter().map(|&c| v.comps[c].clone()).collect()
        };
        match self.field {
            Field::U => pick(&state.u),
            Field::B => pick(&state.b),
            Field::Q => self.comps.iter().map(|&c| laplace_l(&state.u.comps[c], t)).collect(),
            Field::G => self.comps.iter().map(|&c| laplace_l(&state.b.comps[c], t)).collect(),
            Field::W | Field::F => {
                let (wp, wm) = good_unknowns_forward(state);
                let mut out = pick(&wp);
                out.extend(pick(&wm));
                if self.field == Field::F {
                    out = out.iter().map(|f| laplace_l(f, t)).collect();
                }
                out
            }
        }
    }
}
