//! Weighted Sobolev norms built from per-mode symbol products.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralScalarField;
use crate::grid::{Frequency, GridSpec, ModeClass, PhysParams};
use crate::multipliers::{m1_exponent, m2_exponent, m3_closed_form, upsilon, UPSILON_DEFAULT_KMAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    None,
    /// The main multiplier: `e^{delta0 nu^{1/3} t} M1 M2` off `k = 0`, `M3` on it.
    M,
    /// `sqrt(Upsilon)`.
    SqrtUpsilon,
    /// `e^{delta0 nu^{1/3} t}`.
    ExpEd,
}

/// Derivative prefixes; only their per-mode moduli enter a norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prefix {
    Dx,
    Dz,
    DyL,
    AbsGradL,
    /// `|grad_L|^{-1} d_X`.
    InvGradDx,
    GradL,
    /// The pair `(d_X, d_Z)`.
    DxDz,
    /// The pair `(1, d_Z)`.
    OneDz,
    /// `(1, d_Z)^2`, read as the operator set `{1, d_Z, d_Z^2}`.
    OneDzSq,
}

impl Prefix {
    pub fn modulus(self, fr: Frequency, t: f64) -> f64 {
        let k = fr.k as f64;
        let l = fr.l as f64;
        match self {
            Prefix::Dx => k.abs(),
            Prefix::Dz => l.abs(),
            Prefix::DyL => fr.sheared(t).abs(),
            Prefix::AbsGradL | Prefix::GradL => fr.p(t).sqrt(),
            Prefix::InvGradDx => {
                if fr.k == 0 {
                    0.0
                } else {
                    k.abs() / fr.p(t).sqrt()
                }
            }
            Prefix::DxDz => (k * k + l * l).sqrt(),
            Prefix::OneDz => (1.0 + l * l).sqrt(),
            Prefix::OneDzSq => (1.0 + l * l + l * l * l * l).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSel {
    Zero,
    Homogeneous,
    Nonhomogeneous,
    AllNonzero,
    All,
}

impl ClassSel {
    pub fn contains(self, class: ModeClass) -> bool {
        match self {
            ClassSel::Zero => class == ModeClass::Zero,
            ClassSel::Homogeneous => class == ModeClass::Homogeneous,
            ClassSel::Nonhomogeneous => class == ModeClass::Nonhomogeneous,
            ClassSel::AllNonzero => class != ModeClass::Zero,
            ClassSel::All => true,
        }
    }

    pub fn includes_zero(self) -> bool {
        matches!(self, ClassSel::Zero | ClassSel::All)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassSel::Zero => "zero",
            ClassSel::Homogeneous => "homogeneous",
            ClassSel::Nonhomogeneous => "nonhomogeneous",
            ClassSel::AllNonzero => "all_nonzero",
            ClassSel::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeAggregate {
    Linf,
    L2,
    Pointwise,
}

/// `|| <t>^{time_power} weight prefixes P_class f ||_{H^n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub n: f64,
    pub weight: Weight,
    pub prefixes: Vec<Prefix>,
    pub class: ClassSel,
    pub time_aggregate: TimeAggregate,
    /// Power of `<t> = sqrt(1 + t^2)` multiplying the field.
    pub time_power: i32,
}

impl NormSpec {
    pub fn new(n: f64, class: ClassSel) -> Self {
        Self {
            n,
            weight: Weight::None,
            prefixes: Vec::new(),
            class,
            time_aggregate: TimeAggregate::Pointwise,
            time_power: 0,
        }
    }

    pub fn weight(mut self, w: Weight) -> Self {
        self.weight = w;
        self
    }

    pub fn prefix(mut self, p: Prefix) -> Self {
        self.prefixes.push(p);
        self
    }

    pub fn aggregate(mut self, a: TimeAggregate) -> Self {
        self.time_aggregate = a;
        self
    }

    pub fn time_power(mut self, p: i32) -> Self {
        self.time_power = p;
        self
    }

    pub fn with_n(&self, n: f64) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n >= 0.0 && self.n.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Sobolev index must be >= 0, got {}",
                self.n
            )));
        }
        if self.prefixes.contains(&Prefix::InvGradDx) && self.class.includes_zero() {
            return Err(Error::ClassRestriction(
                "|grad_L|^{-1} d_X needs a class without k = 0".into(),
            ));
        }
        if self.weight == Weight::SqrtUpsilon && self.class != ClassSel::Zero {
            return Err(Error::ClassRestriction(
                "the sqrt(Upsilon) weight is defined on k = 0 only".into(),
            ));
        }
        Ok(())
    }

    /// Per-mode multiplier excluding the field weight.
    pub fn symbol(&self, fr: Frequency, t: f64) -> f64 {
        let mut s = fr.bracket().powf(self.n);
        for p in &self.prefixes {
            s *= p.modulus(fr, t);
        }
        if self.time_power != 0 {
            s *= (1.0 + t * t).sqrt().powi(self.time_power);
        }
        s
    }
}

/// Multiplier values at one time, cached per frequency.
#[derive(Debug, Clone)]
pub struct ModeWeights {
    pub t: f64,
    pub params: PhysParams,
    pub k_max: i64,
    zero_mode: HashMap<u64, (f64, f64)>,
}

impl ModeWeights {
    pub fn new(t: f64, params: PhysParams) -> Self {
        Self {
            t,
            params,
            k_max: UPSILON_DEFAULT_KMAX,
            zero_mode: HashMap::new(),
        }
    }

    pub fn exp_ed(&self) -> f64 {
        (self.params.delta0 * self.params.nu_third() * self.t).exp()
    }

    /// `(M3, Upsilon)` at `k = 0`; both are independent of `l`.
    fn zero_mode(&mut self, eta: f64) -> (f64, f64) {
        let t = self.t;
        let k_max = self.k_max;
        *self.zero_mode.entry(eta.to_bits()).or_insert_with(|| {
            let fr = Frequency::new(0, eta, 0);
            (m3_closed_form(t, fr, k_max).value, upsilon(t, fr, k_max).value)
        })
    }

    pub fn value(&mut self, w: Weight, fr: Frequency) -> f64 {
        match w {
            Weight::None => 1.0,
            Weight::ExpEd => self.exp_ed(),
            Weight::SqrtUpsilon => {
                if fr.k == 0 {
                    self.zero_mode(fr.eta).1.sqrt()
                } else {
                    0.0
                }
            }
            Weight::M => {
                if fr.k == 0 {
                    self.zero_mode(fr.eta).0
                } else {
                    let p = &self.params;
                    (p.delta0 * p.nu_third() * self.t
                        - m1_exponent(fr, 0.0, self.t)
                        - m2_exponent(fr, p.nu, 0.0, self.t))
                    .exp()
                }
            }
        }
    }
}

/// Squared per-sample pieces of the composite norms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NormParts {
    /// `|f|_{H^N}^2`.
    pub h: f64,
    /// `|grad_L f|_{H^N}^2`.
    pub grad: f64,
    /// `|d_X |grad_L|^{-1} f|_{H^N}^2`.
    pub inv: f64,
    /// `|sqrt(Upsilon) f|_{H^N}^2`, filled on `k = 0` only.
    pub ups: f64,
}

impl NormParts {
    pub fn add(&self, o: &Self) -> Self {
        Self {
            h: self.h + o.h,
            grad: self.grad + o.grad,
            inv: self.inv + o.inv,
            ups: self.ups + o.ups,
        }
    }
}

fn check_grid(fields: &[&SpectralScalarField]) -> Result<GridSpec> {
    let g = fields
        .first()
        .ok_or_else(|| Error::EmptySeries("no fields to measure".into()))?
        .grid;
    if fields.iter().any(|f| f.grid != g) {
        return Err(Error::GridMismatch("fields measured together must share a grid".into()));
    }
    Ok(g)
}

/// Norm pieces of `sum_i |f_i|^2` (a vector quantity) at time `t`.
pub fn norm_parts(
    fields: &[&SpectralScalarField],
    spec: &NormSpec,
    t: f64,
    weights: &mut ModeWeights,
) -> Result<NormParts> {
    spec.validate()?;
    let g = check_grid(fields)?;
    let sigma = weights.params.sigma;
    let mut out = NormParts::default();
    for idx in 0..g.len() {
        let amp: f64 = fields.iter().map(|f| f.coeffs[idx].norm_sqr()).sum();
        if amp == 0.0 {
            continue;
        }
        let fr = fields[0].frequency(idx);
        let class = ModeClass::of(fr.k, fr.l, sigma);
        if !spec.class.contains(class) {
            continue;
        }
        let w = weights.value(spec.weight, fr) * spec.symbol(fr, t);
        let base = w * w * amp;
        let p = fr.p(t);
        out.h += base;
        out.grad += base * p;
        if fr.k != 0 {
            out.inv += base * (fr.k * fr.k) as f64 / p;
        } else {
            let (_, ups) = weights.zero_mode(fr.eta);
            out.ups += base * ups;
        }
    }
    let m = g.m as f64;
    out.h /= m;
    out.grad /= m;
    out.inv /= m;
    out.ups /= m;
    Ok(out)
}

/// Pointwise weighted `H^N` norm of a vector quantity.
pub fn weighted_norm(fields: &[&SpectralScalarField], spec: &NormSpec, t: f64, params: PhysParams) -> Result<f64> {
    Ok(norm_parts(fields, spec, t, &mut ModeWeights::new(t, params))?.h.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ModeIndex, RationalShearAngle};
    use crate::multipliers::{m1_value, m2_value};
    use crate::random::random_field;
    use crate::spectral::project_modes;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn params() -> PhysParams {
        PhysParams::new(1e-2, 10.0, RationalShearAngle::integer(1)).unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec::new(8, 16, 8, 2).unwrap()
    }

    fn norm(f: &SpectralScalarField, spec: &NormSpec, t: f64) -> f64 {
        weighted_norm(&[f], spec, t, params()).unwrap()
    }

    #[test]
    fn restrictions_are_enforced() {
        let f = random_field(grid(), 1, true);
        let bad = NormSpec::new(2.0, ClassSel::All).prefix(Prefix::InvGradDx);
        assert!(matches!(
            weighted_norm(&[&f], &bad, 0.0, params()),
            Err(Error::ClassRestriction(_))
        ));
        let bad = NormSpec::new(2.0, ClassSel::AllNonzero).weight(Weight::SqrtUpsilon);
        assert!(weighted_norm(&[&f], &bad, 0.0, params()).is_err());
        assert!(weighted_norm(&[], &NormSpec::new(1.0, ClassSel::All), 0.0, params()).is_err());
    }

    #[test]
    fn unweighted_all_class_matches_sobolev_norm() {
        let f = random_field(grid(), 2, true);
        let spec = NormSpec::new(3.0, ClassSel::All);
        let expect = crate::spectral::sobolev_norm(&f, 3.0);
        assert!((norm(&f, &spec, 0.7) - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn weights_are_bounded_by_the_exponential_factor() {
        let f = random_field(grid(), 3, true);
        let p = params();
        for t in [0.0, 1.5, 6.0] {
            let plain = norm(&f, &NormSpec::new(2.0, ClassSel::AllNonzero), t);
            let weighted = norm(&f, &NormSpec::new(2.0, ClassSel::AllNonzero).weight(Weight::M), t);
            let ed = (p.delta0 * p.nu_third() * t).exp();
            let g = grid();
            let c = (0..g.len())
                .map(|i| f.frequency(i))
                .filter(|fr| fr.k != 0)
                .map(|fr| m1_value(t, fr) * m2_value(t, fr, p.nu))
                .fold(1.0, f64::min);
            assert!(weighted <= ed * plain * (1.0 + 1e-12));
            assert!(weighted >= c * plain * (1.0 - 1e-12));
        }
    }

    #[test]
    fn m_weight_is_one_at_time_zero() {
        let f = random_field(grid(), 4, true);
        let a = norm(&f, &NormSpec::new(1.0, ClassSel::All), 0.0);
        let b = norm(&f, &NormSpec::new(1.0, ClassSel::All).weight(Weight::M), 0.0);
        assert!((a - b).abs() <= 1e-14 * a);
    }

    #[test]
    fn zero_mode_upsilon_part_uses_the_multiplier_sum() {
        let g = grid();
        let mut prev = f64::INFINITY;
        for j in [0, 1, 2, 4, 7] {
            let mut f = SpectralScalarField::zeros(g, 0.0);
            f.set_hermitian(ModeIndex::new(0, j, 1), Complex64::new(1.0, 0.0))
                .unwrap();
            let spec = NormSpec::new(0.0, ClassSel::Zero);
            let parts = norm_parts(&[&f], &spec, 0.0, &mut ModeWeights::new(0.0, params())).unwrap();
            let ratio = parts.ups / parts.h;
            let fr = Frequency::new(0, j as f64 / g.m as f64, 1);
            assert!((ratio - upsilon(0.0, fr, UPSILON_DEFAULT_KMAX).value).abs() < 1e-14);
            if j == 0 {
                assert!((ratio - 1.227411).abs() < 5e-4);
                assert!((ratio.sqrt() - 1.107886).abs() < 3e-4);
            }
            assert!(ratio < prev);
            prev = ratio;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn class_restriction_equals_projection(seed in 0u64..500, t in 0.0f64..5.0) {
            let f = random_field(grid(), seed, true);
            let sigma = params().sigma;
            for (sel, class) in [
                (ClassSel::Zero, ModeClass::Zero),
                (ClassSel::Homogeneous, ModeClass::Homogeneous),
                (ClassSel::Nonhomogeneous, ModeClass::Nonhomogeneous),
            ] {
                let spec = NormSpec::new(2.0, sel).weight(Weight::M).prefix(Prefix::DyL);
                let all = NormSpec { class: ClassSel::All, ..spec.clone() };
                let a = norm(&f, &spec, t);
                let b = norm(&project_modes(&f, class, sigma), &all, t);
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
            }
        }

        #[test]
        fn adding_a_disjoint_mode_never_decreases(seed in 0u64..500, k in -2i64..3, j in -4i64..5, l in -2i64..3) {
            let g = grid();
            let mode = ModeIndex::new(k, j, l);
            let mut f = random_field(g, seed, true);
            f.set_hermitian(mode, Complex64::new(0.0, 0.0)).unwrap();
            let mut h = f.clone();
            h.set_hermitian(mode, Complex64::new(0.3, -0.2)).unwrap();
            for spec in [
                NormSpec::new(1.5, ClassSel::All).weight(Weight::M),
                NormSpec::new(0.0, ClassSel::AllNonzero).prefix(Prefix::InvGradDx),
                NormSpec::new(2.0, ClassSel::Zero).weight(Weight::SqrtUpsilon),
            ] {
                prop_assert!(norm(&h, &spec, 1.0) >= norm(&f, &spec, 1.0));
            }
        }
    }
}
