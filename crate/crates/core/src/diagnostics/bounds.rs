//! Bootstrap-hypothesis panel and stability-estimate check.
//!
//! Every row is a combination of composite norms of derived quantities,
//! compared with a right-hand side `factor nu^a eps`. The free constant `C_0`
//! of the bootstrap rows is not included in `rhs_scale`; `c0_power` records
//! which power of it the row allows.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{MhdState, SpectralScalarField};
use crate::grid::PhysParams;

use super::norms::{norm_parts, ClassSel, ModeWeights, NormParts, NormSpec, Prefix, TimeAggregate, Weight};
use super::quantity::{Field, Quantity};
use super::series::PartsSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composite {
    An,
    B,
    Linf,
    L2,
}

/// `nu^{nu_power} composite(spec; quantities)`; the quantities' squares add.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub nu_power: f64,
    pub quantities: Vec<Quantity>,
    pub spec: NormSpec,
    pub composite: Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Sum,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundDef {
    pub id: &'static str,
    pub inequality: &'static str,
    pub class: ClassSel,
    pub n_used: f64,
    pub terms: Vec<Term>,
    pub combine: Combine,
    pub rhs_factor: f64,
    pub rhs_nu_power: f64,
    pub c0_power: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub bound_id: String,
    pub inequality: String,
    pub lhs: f64,
    pub rhs_scale: f64,
    pub measured_constant: f64,
    pub class: String,
    #[serde(rename = "N_used")]
    pub n_used: f64,
    pub c0_power: u32,
}

impl BoundRow {
    /// `C_0` implied by the row, for rows that allow a power of it.
    pub fn implied_c0(&self) -> Option<f64> {
        (self.c0_power > 0).then(|| self.measured_constant.max(0.0).powf(1.0 / self.c0_power as f64))
    }
}

fn term(nu_power: f64, q: Vec<Quantity>, spec: NormSpec, composite: Composite) -> Term {
    let agg = match composite {
        Composite::Linf => TimeAggregate::Linf,
        Composite::L2 => TimeAggregate::L2,
        _ => TimeAggregate::Pointwise,
    };
    Term {
        nu_power,
        quantities: q,
        spec: spec.aggregate(agg),
        composite,
    }
}

fn m_spec(n: f64, class: ClassSel, prefixes: &[Prefix]) -> NormSpec {
    let mut s = NormSpec::new(n, class).weight(Weight::M);
    for p in prefixes {
        s = s.prefix(*p);
    }
    s
}

fn q(field: Field, comps: &[usize]) -> Vec<Quantity> {
    vec![Quantity::new(field, comps)]
}

/// The fourteen bootstrap hypotheses at Sobolev index `n`.
pub fn bootstrap_defs(n: f64) -> Vec<BoundDef> {
    use ClassSel::{Homogeneous as H, Nonhomogeneous as NH, Zero as Z};
    use Composite::An;
    use Field::*;
    use Prefix::*;
    let row = |id, inequality, class, terms, rhs_nu_power, c0_power| BoundDef {
        id,
        inequality,
        class,
        n_used: n,
        terms,
        combine: Combine::Sum,
        rhs_factor: 8.0,
        rhs_nu_power,
        c0_power,
    };
    let mut rows = vec![
        row(
            "sym_w2_nh",
            "|(dX,dZ)|grad_L| M W^2_NH|_{A^N} <= 8 eps",
            NH,
            vec![term(0.0, q(W, &[1]), m_spec(n, NH, &[DxDz, AbsGradL]), An)],
            0.0,
            0,
        ),
        row(
            "f2_nh",
            "|M F^2_NH|_{A^N} <= 8 C0 nu^{-1/3} eps",
            NH,
            vec![term(0.0, q(F, &[1]), m_spec(n, NH, &[]), An)],
            -1.0 / 3.0,
            1,
        ),
        row(
            "w3_nh",
            "|(dX,dZ)^2 M W^3_NH|_{A^N} <= 8 C0 eps",
            NH,
            vec![term(0.0, q(W, &[2]), m_spec(n, NH, &[DxDz, DxDz]), An)],
            0.0,
            1,
        ),
        row(
            "f3_nh",
            "|M F^3_NH|_{A^N} <= 8 C0^2 nu^{-2/3} eps",
            NH,
            vec![term(0.0, q(F, &[2]), m_spec(n, NH, &[]), An)],
            -2.0 / 3.0,
            2,
        ),
        row(
            "q2_h",
            "|M Q^2_H|_{A^N} <= 8 nu^{-1/3} eps",
            H,
            vec![term(0.0, q(Q, &[1]), m_spec(n, H, &[]), An)],
            -1.0 / 3.0,
            0,
        ),
        row(
            "q2_h_low",
            "|<t>^{-1} M Q^2_H|_{A^{N-1}} <= 8 eps",
            H,
            vec![term(0.0, q(Q, &[1]), m_spec(n - 1.0, H, &[]).time_power(-1), An)],
            0.0,
            0,
        ),
        row(
            "u3_h",
            "nu^{1/3} |dXX M U^3_H|_{A^N} + |dXX M U^3_H|_{A^{N-2}} <= 8 C0 eps",
            H,
            vec![
                term(1.0 / 3.0, q(U, &[2]), m_spec(n, H, &[Dx, Dx]), An),
                term(0.0, q(U, &[2]), m_spec(n - 2.0, H, &[Dx, Dx]), An),
            ],
            0.0,
            1,
        ),
        row(
            "q3_h",
            "nu^{1/3} |M Q^3_H|_{A^N} + |M Q^3_H|_{A^{N-2}} <= 8 C0^2 nu^{-2/3} eps",
            H,
            vec![
                term(1.0 / 3.0, q(Q, &[2]), m_spec(n, H, &[]), An),
                term(0.0, q(Q, &[2]), m_spec(n - 2.0, H, &[]), An),
            ],
            -2.0 / 3.0,
            2,
        ),
        row(
            "b2_h",
            "|dX M B^2_H|_{A^N} + nu^{1/6} |dXX M B^2_H|_{A^N} <= 8 eps",
            H,
            vec![
                term(0.0, q(B, &[1]), m_spec(n, H, &[Dx]), An),
                term(1.0 / 6.0, q(B, &[1]), m_spec(n, H, &[Dx, Dx]), An),
            ],
            0.0,
            0,
        ),
        row(
            "g2_h",
            "nu^{1/3} |dY^L M B^2_H|_{A^N} + nu^{1/2} |dXY^L M B^2_H|_{A^N} + nu^{2/3} |M G^2_H|_{A^N} <= 8 C0 eps",
            H,
            vec![
                term(1.0 / 3.0, q(B, &[1]), m_spec(n, H, &[DyL]), An),
                term(0.5, q(B, &[1]), m_spec(n, H, &[Dx, DyL]), An),
                term(2.0 / 3.0, q(G, &[1]), m_spec(n, H, &[]), An),
            ],
            0.0,
            1,
        ),
        row(
            "b3_h",
            "nu^{1/3} |dXX M B^3_H|_{A^N} + |dX M B^3_H|_{A^N} <= 8 C0 eps",
            H,
            vec![
                term(1.0 / 3.0, q(B, &[2]), m_spec(n, H, &[Dx, Dx]), An),
                term(0.0, q(B, &[2]), m_spec(n, H, &[Dx]), An),
            ],
            0.0,
            1,
        ),
        row(
            "g3_h",
            "nu^{1/3} |M G^3_H|_{A^N} + |M G^3_H|_{A^{N-2}} <= 8 C0^2 nu^{-2/3} eps",
            H,
            vec![
                term(1.0 / 3.0, q(G, &[2]), m_spec(n, H, &[]), An),
                term(0.0, q(G, &[2]), m_spec(n - 2.0, H, &[]), An),
            ],
            -2.0 / 3.0,
            2,
        ),
    ];
    let mut f0 = row(
        "f_zero",
        "max(nu^{2/3} |M F^1_0|_B, nu^{1/3} |M F^2_0|_B, nu^{2/3} |M F^3_0|_B) <= 8 eps",
        Z,
        vec![
            term(2.0 / 3.0, q(F, &[0]), m_spec(n, Z, &[]), Composite::B),
            term(1.0 / 3.0, q(F, &[1]), m_spec(n, Z, &[]), Composite::B),
            term(2.0 / 3.0, q(F, &[2]), m_spec(n, Z, &[]), Composite::B),
        ],
        0.0,
        0,
    );
    f0.combine = Combine::Max;
    rows.push(f0);
    rows.push(row(
        "w_zero",
        "|(1,dZ)^2 M W_0|_B <= 8 eps",
        Z,
        vec![term(
            0.0,
            vec![Quantity::all(W)],
            m_spec(n, Z, &[OneDzSq]),
            Composite::B,
        )],
        0.0,
        0,
    ));
    rows
}

fn ed_spec(n: f64, class: ClassSel, prefixes: &[Prefix], weighted: bool) -> NormSpec {
    let mut s = NormSpec::new(n, class);
    if weighted {
        s = s.weight(Weight::ExpEd);
    }
    for p in prefixes {
        s = s.prefix(*p);
    }
    s
}

/// The six stability estimates at Sobolev index `n`.
pub fn theorem_defs(n: f64) -> Vec<BoundDef> {
    use ClassSel::{AllNonzero as NZ, Zero as Z};
    use Composite::{Linf, L2};
    use Field::*;
    use Prefix::*;
    let row = |id, inequality, class, n_used, terms, rhs_nu_power| BoundDef {
        id,
        inequality,
        class,
        n_used,
        terms,
        combine: Combine::Sum,
        rhs_factor: 1.0,
        rhs_nu_power,
        c0_power: 0,
    };
    let m = n - 2.0;
    vec![
        row(
            "u1_nonzero",
            "|e^{d0 nu^{1/3} t}(dX,dZ)dX U^1_ne|_{Linf H^{N-2}} + nu^{1/6} |(dX,dZ)dX U^1_ne|_{L2 H^{N-2}} <~ eps",
            NZ,
            m,
            vec![
                term(0.0, q(U, &[0]), ed_spec(m, NZ, &[DxDz, Dx], true), Linf),
                term(1.0 / 6.0, q(U, &[0]), ed_spec(m, NZ, &[DxDz, Dx], false), L2),
            ],
            0.0,
        ),
        row(
            "u2_nonzero",
            "|e^{d0 nu^{1/3} t}(dX,dZ)grad_L U^2_ne|_{Linf H^{N-2}} + |U^2_ne|_{L2 H^{N-2}} + nu^{1/6} |(dX,dZ)grad_L U^2_ne|_{L2 H^{N-2}} <~ eps",
            NZ,
            m,
            vec![
                term(0.0, q(U, &[1]), ed_spec(m, NZ, &[DxDz, GradL], true), Linf),
                term(0.0, q(U, &[1]), ed_spec(m, NZ, &[], false), L2),
                term(1.0 / 6.0, q(U, &[1]), ed_spec(m, NZ, &[DxDz, GradL], false), L2),
            ],
            0.0,
        ),
        row(
            "u3_nonzero",
            "|e^{d0 nu^{1/3} t}(dX,dZ)^2 U^3_ne|_{Linf H^{N-2}} + nu^{1/6} |(dX,dZ)^2 U^3_ne|_{L2 H^{N-2}} <~ eps",
            NZ,
            m,
            vec![
                term(0.0, q(U, &[2]), ed_spec(m, NZ, &[DxDz, DxDz], true), Linf),
                term(1.0 / 6.0, q(U, &[2]), ed_spec(m, NZ, &[DxDz, DxDz], false), L2),
            ],
            0.0,
        ),
        row(
            "b1_nonzero",
            "|e^{d0 nu^{1/3} t} dX B^1_ne|_{Linf H^N} + nu^{1/6} |(dX,dZ)dX B^1_ne|_{L2 H^N} <~ nu^{-1/3} eps",
            NZ,
            n,
            vec![
                term(0.0, q(B, &[0]), ed_spec(n, NZ, &[Dx], true), Linf),
                term(1.0 / 6.0, q(B, &[0]), ed_spec(n, NZ, &[DxDz, Dx], false), L2),
            ],
            -1.0 / 3.0,
        ),
        row(
            "b23_nonzero",
            "|e^{d0 nu^{1/3} t}(dX,dZ)(B^2_ne,B^3_ne)|_{Linf H^N} + nu^{1/6} |(dX,dZ)(B^2_ne,B^3_ne)|_{L2 H^N} <~ eps",
            NZ,
            n,
            vec![
                term(0.0, q(B, &[1, 2]), ed_spec(n, NZ, &[DxDz], true), Linf),
                term(1.0 / 6.0, q(B, &[1, 2]), ed_spec(n, NZ, &[DxDz], false), L2),
            ],
            0.0,
        ),
        row(
            "zero_mode",
            "|(1,dZ)^2 (U_0,B_0)|_{Linf H^N} <~ eps",
            Z,
            n,
            vec![term(
                0.0,
                vec![Quantity::all(U), Quantity::all(B)],
                ed_spec(n, Z, &[OneDzSq], false),
                Linf,
            )],
            0.0,
        ),
    ]
}

/// Streaming evaluator of a set of bound rows.
#[derive(Debug, Clone)]
pub struct BoundAccumulator {
    pub defs: Vec<BoundDef>,
    pub params: PhysParams,
    pub epsilon: f64,
    series: Vec<Vec<PartsSeries>>,
}

impl BoundAccumulator {
    pub fn new(defs: Vec<BoundDef>, params: PhysParams, epsilon: f64) -> Self {
        let series = defs
            .iter()
            .map(|d| vec![PartsSeries::default(); d.terms.len()])
            .collect();
        Self {
            defs,
            params,
            epsilon,
            series,
        }
    }

    pub fn bootstrap(params: PhysParams, epsilon: f64, n: f64) -> Self {
        Self::new(bootstrap_defs(n), params, epsilon)
    }

    pub fn theorem(params: PhysParams, epsilon: f64, n: f64) -> Self {
        Self::new(theorem_defs(n), params, epsilon)
    }

    pub fn samples(&self) -> usize {
        self.series.first().and_then(|s| s.first()).map_or(0, |s| s.times.len())
    }

    pub fn push(&mut self, state: &MhdState) -> Result<()> {
        if let Some(&last) = self.series.first().and_then(|s| s.first()).and_then(|s| s.times.last()) {
            if state.t <= last {
                return Err(Error::InvalidParameter(format!(
                    "sample times must increase: {} after {last}",
                    state.t
                )));
            }
        }
        let mut weights = ModeWeights::new(state.t, self.params);
        let mut cache: HashMap<Quantity, Vec<SpectralScalarField>> = HashMap::new();
        for (d, series) in self.defs.iter().zip(self.series.iter_mut()) {
            for (term, s) in d.terms.iter().zip(series.iter_mut()) {
                let mut total = NormParts::default();
                for qt in &term.quantities {
                    let fields = cache.entry(qt.clone()).or_insert_with(|| qt.extract(state));
                    let refs: Vec<&SpectralScalarField> = fields.iter().collect();
                    total = total.add(&norm_parts(&refs, &term.spec, state.t, &mut weights)?);
                }
                s.push(state.t, total);
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<Vec<BoundRow>> {
        if self.samples() == 0 {
            return Err(Error::InsufficientSamples(
                "bound check needs at least one snapshot".into(),
            ));
        }
        let nu = self.params.nu;
        let mut rows = Vec::with_capacity(self.defs.len());
        for (d, series) in self.defs.iter().zip(&self.series) {
            let mut values = Vec::with_capacity(d.terms.len());
            for (term, s) in d.terms.iter().zip(series) {
                let v = match term.composite {
                    Composite::An => s.an_composite(nu)?,
                    Composite::B => s.b_composite(nu)?,
                    Composite::Linf => s.linf()?,
                    Composite::L2 => s.l2_h()?,
                };
                values.push(nu_pow(nu, term.nu_power) * v);
            }
            let lhs = match d.combine {
                Combine::Sum => values.iter().sum(),
                Combine::Max => values.iter().cloned().fold(0.0, f64::max),
            };
            let rhs_scale = d.rhs_factor * nu_pow(nu, d.rhs_nu_power) * self.epsilon;
            let measured_constant = if lhs == 0.0 { 0.0 } else { lhs / rhs_scale };
            rows.push(BoundRow {
                bound_id: d.id.to_string(),
                inequality: d.inequality.to_string(),
                lhs,
                rhs_scale,
                measured_constant,
                class: d.class.as_str().to_string(),
                n_used: d.n_used,
                c0_power: d.c0_power,
            });
        }
        Ok(rows)
    }
}

fn nu_pow(nu: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        nu.powf(p)
    }
}

fn accumulate(mut acc: BoundAccumulator, states: &[MhdState]) -> Result<Vec<BoundRow>> {
    if states.is_empty() {
        return Err(Error::InsufficientSamples(
            "bound check needs at least one snapshot".into(),
        ));
    }
    for s in states {
        acc.push(s)?;
    }
    acc.finish()
}

/// Measured constants of the bootstrap hypotheses along `states`.
pub fn bootstrap_panel(states: &[MhdState], params: PhysParams, epsilon: f64, n: f64) -> Result<Vec<BoundRow>> {
    accumulate(BoundAccumulator::bootstrap(params, epsilon, n), states)
}

/// Measured constants of the stability estimates along `states`.
pub fn theorem_bound_check(states: &[MhdState], params: PhysParams, epsilon: f64, n: f64) -> Result<Vec<BoundRow>> {
    accumulate(BoundAccumulator::theorem(params, epsilon, n), states)
}

/// Rows whose measured constant grows by more than `factor` from a coarse to
/// a refined run (finer grid, smaller time step or longer horizon).
pub fn growth_flags(coarse: &[BoundRow], refined: &[BoundRow], factor: f64) -> Vec<(String, bool)> {
    coarse
        .iter()
        .zip(refined)
        .map(|(a, b)| {
            let grows = b.measured_constant > factor * a.measured_constant && b.measured_constant > 0.0;
            (a.bound_id.clone(), grows)
        })
        .collect()
}

pub const BOUND_CSV_HEADER: [&str; 8] = [
    "bound_id",
    "inequality",
    "lhs",
    "rhs_scale",
    "measured_constant",
    "class",
    "N_used",
    "c0_power",
];

/// Header row first, so an empty panel still yields a valid file.
pub fn write_rows_csv(w: impl Write, rows: &[BoundRow]) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(BOUND_CSV_HEADER)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    for r in rows {
        wr.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    wr.flush()?;
    Ok(())
}
