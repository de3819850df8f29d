//! Time series of norms and the composite space-time norms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{MhdState, SpectralScalarField};
use crate::grid::PhysParams;

use super::norms::{norm_parts, ClassSel, ModeWeights, NormParts, NormSpec};
use super::quantity::Quantity;

/// Trapezoid rule on a sampled grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregates {
    pub linf: f64,
    /// `(int v^2 dt)^{1/2}` by the trapezoid rule.
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSeries {
    pub spec: NormSpec,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub aggregates: Option<Aggregates>,
}

impl DiagnosticSeries {
    pub fn new(spec: NormSpec) -> Self {
        Self {
            spec,
            times: Vec::new(),
            values: Vec::new(),
            aggregates: None,
        }
    }

    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        if !(value >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "norm values must be >= 0, got {value}"
            )));
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidParameter(format!(
                    "times must increase: {t} after {last}"
                )));
            }
        }
        self.times.push(t);
        self.values.push(value);
        self.aggregates = None;
        Ok(())
    }

    pub fn finalize(&mut self) -> Result<Aggregates> {
        if self.values.is_empty() {
            return Err(Error::EmptySeries("cannot aggregate an empty series".into()));
        }
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        let a = Aggregates {
            linf: self.values.iter().cloned().fold(0.0, f64::max),
            l2: trapezoid(&self.times, &sq).sqrt(),
        };
        self.aggregates = Some(a);
        Ok(a)
    }

    /// Evaluates `spec` on one quantity along a sequence of states.
    pub fn from_states(states: &[MhdState], q: &Quantity, spec: NormSpec) -> Result<Self> {
        let mut s = Self::new(spec);
        for st in states {
            let fields = q.extract(st);
            let refs: Vec<&SpectralScalarField> = fields.iter().collect();
            let parts = norm_parts(&refs, &s.spec, st.t, &mut ModeWeights::new(st.t, st.params))?;
            s.push(st.t, parts.h.sqrt())?;
        }
        s.finalize()?;
        Ok(s)
    }
}

/// Sampled norm pieces of one quantity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartsSeries {
    pub times: Vec<f64>,
    pub parts: Vec<NormParts>,
}

impl PartsSeries {
    pub fn push(&mut self, t: f64, p: NormParts) {
        self.times.push(t);
        self.parts.push(p);
    }

    fn l2(&self, f: impl Fn(&NormParts) -> f64) -> f64 {
        let v: Vec<f64> = self.parts.iter().map(f).collect();
        trapezoid(&self.times, &v).max(0.0).sqrt()
    }

    fn sup(&self) -> f64 {
        self.parts.iter().map(|p| p.h.sqrt()).fold(0.0, f64::max)
    }

    fn check(&self) -> Result<()> {
        if self.parts.is_empty() {
            return Err(Error::EmptySeries("composite norm of an empty series".into()));
        }
        Ok(())
    }

    /// `|f|_{Linf H^N} + nu^{1/2} |grad_L f|_{L2 H^N} + |d_X |grad_L|^{-1} f|_{L2 H^N}
    /// + nu^{1/6} |f|_{L2 H^N}`.
    pub fn an_composite(&self, nu: f64) -> Result<f64> {
        self.check()?;
        Ok(self.sup() + nu.sqrt() * self.l2(|p| p.grad) + self.l2(|p| p.inv) + nu.powf(1.0 / 6.0) * self.l2(|p| p.h))
    }

    /// `|g|_{Linf H^N} + nu^{1/2} |grad_L g|_{L2 H^N} + |sqrt(Upsilon) g|_{L2 H^N}`.
    pub fn b_composite(&self, nu: f64) -> Result<f64> {
        self.check()?;
        Ok(self.sup() + nu.sqrt() * self.l2(|p| p.grad) + self.l2(|p| p.ups))
    }

    pub fn linf(&self) -> Result<f64> {
        self.check()?;
        Ok(self.sup())
    }

    pub fn l2_h(&self) -> Result<f64> {
        self.check()?;
        Ok(self.l2(|p| p.h))
    }
}

fn parts_series(states: &[MhdState], q: &Quantity, spec: &NormSpec) -> Result<PartsSeries> {
    if states.is_empty() {
        return Err(Error::EmptySeries("no states to measure".into()));
    }
    let mut out = PartsSeries::default();
    for st in states {
        let fields = q.extract(st);
        let refs: Vec<&SpectralScalarField> = fields.iter().collect();
        out.push(
            st.t,
            norm_parts(&refs, spec, st.t, &mut ModeWeights::new(st.t, st.params))?,
        );
    }
    Ok(out)
}

/// The `A^N` composite of a quantity along sampled states.
pub fn an_norm(states: &[MhdState], q: &Quantity, spec: &NormSpec, params: &PhysParams) -> Result<f64> {
    parts_series(states, q, spec)?.an_composite(params.nu)
}

/// The `B` composite; defined for the `k = 0` class only.
pub fn b_norm(states: &[MhdState], q: &Quantity, spec: &NormSpec, params: &PhysParams) -> Result<f64> {
    if spec.class != ClassSel::Zero {
        return Err(Error::ClassRestriction(
            "the B norm is defined on k = 0 modes only".into(),
        ));
    }
    parts_series(states, q, spec)?.b_composite(params.nu)
}
