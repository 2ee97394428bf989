//! The curved Casimir `C(s) = β s − 2 φ^ℓ • (∇_ℓ s − P_ℓ • s)` on sections in
//! vector notation, and polynomials in it.

use crate::bundles::{
    composition_series, pplus_action_table, CompositionSeries, PPlusActionTable, Section, TractorFamily,
};
use crate::coeff::Coeff;
use crate::error::Result;
use crate::weights::Dim;

use super::tensor::{free, Ctx, Idx, Regime};

/// Label of the frame index `ℓ` while it is open.
const ELL: Idx = free(20);

/// Casimir operator of one family at fixed `(w, n)`.
#[derive(Clone, Debug)]
pub struct CasimirOp {
    pub series: CompositionSeries,
    pub table: PPlusActionTable,
    pub ctx: Ctx,
    /// Sign in front of `P_ℓ •` in the twisted derivative; `+1` is the
    /// Schouten convention, `-1` the flipped control.
    pub p_sign: i64,
    /// Slots at levels deeper than this are dropped after every step.
    pub max_level: usize,
}

impl CasimirOp {
    pub fn new(family: TractorFamily, w: &Coeff, dim: Dim, regime: Regime) -> Result<CasimirOp> {
        let series = composition_series(family, w, dim)?;
        Ok(CasimirOp {
            table: pplus_action_table(family, dim),
            ctx: Ctx::new(dim.as_coeff(), regime),
            series,
            p_sign: 1,
            max_level: family.num_levels() - 1,
        })
    }

    pub fn family(&self) -> TractorFamily {
        self.series.family
    }

    pub fn with_p_sign(mut self, sign: i64) -> Self {
        self.p_sign = sign;
        self
    }

    pub fn with_max_level(mut self, level: usize) -> Self {
        self.max_level = level;
        self
    }

    fn truncate(&self, s: &mut Section) {
        let layout = self.family().layout();
        for (k, d) in layout.iter().enumerate() {
            if d.level > self.max_level {
                s.slots[k] = None;
            }
        }
    }

    /// `∇_ℓ s − p·P_ℓ • s`, with `ℓ` left open.
    pub fn twisted_derivative(&self, s: &Section) -> Section {
        let ctx = &self.ctx;
        let mut d = Section::zero(self.family());
        for (k, slot) in s.slots.iter().enumerate() {
            if let Some(x) = slot {
                d.add_to(ctx, k, &ctx.nabla(x, ELL));
            }
        }
        if ctx.regime == Regime::Curved {
            let p = |j: Idx| ctx.schouten(ELL, j);
            let ps = self.table.act(ctx, s, &p);
            let c = Coeff::int(-self.p_sign);
            for (k, slot) in ps.slots.iter().enumerate() {
                if let Some(x) = slot {
                    d.add_to(ctx, k, &ctx.scale(x, &c));
                }
            }
        }
        self.truncate(&mut d);
        d
    }

    pub fn apply(&self, s: &Section) -> Section {
        let ctx = &self.ctx;
        let d = self.twisted_derivative(s);
        let g = |j: Idx| ctx.metric(ELL, j);
        let act = self.table.act(ctx, &d, &g);
        let mut out = Section::zero(self.family());
        for (k, slot) in s.slots.iter().enumerate() {
            if let Some(x) = slot {
                out.add_to(ctx, k, &ctx.scale(x, self.series.beta(k)));
            }
        }
        for (k, slot) in act.slots.iter().enumerate() {
            if let Some(x) = slot {
                out.add_to(ctx, k, &ctx.scale(x, &Coeff::int(-2)));
            }
        }
        self.truncate(&mut out);
        out
    }

    /// `(C − β) s`.
    pub fn shifted_apply(&self, beta: &Coeff, s: &Section) -> Section {
        let ctx = &self.ctx;
        let mut out = self.apply(s);
        let minus = -beta;
        for (k, slot) in s.slots.iter().enumerate() {
            if let Some(x) = slot {
                out.add_to(ctx, k, &ctx.scale(x, &minus));
            }
        }
        out
    }

    /// `(C − β_1) ∘ … ∘ (C − β_r) s`; the last factor is applied first.
    pub fn compose(&self, factors: &[Coeff], s: &Section) -> Section {
        factors
            .iter()
            .rev()
            .fold(s.clone(), |acc, b| self.shifted_apply(b, &acc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::parse;
    use crate::symop::tensor::{Expr, Var};

    fn c(s: &str) -> Coeff {
        parse(s).unwrap()
    }

    fn op(f: TractorFamily) -> CasimirOp {
        CasimirOp::new(f, &Coeff::w(), Dim::Symbolic, Regime::Curved).unwrap()
    }

    #[test]
    fn bottom_only_section_is_eigen() {
        for f in TractorFamily::ALL {
            let o = op(f);
            let b = f.bottom();
            let d = f.layout()[b];
            let mut s = Section::zero(f);
            s.slots[b] = Some(o.ctx.var(&d.var(), &d.labels()).unwrap());
            let got = o.apply(&s);
            let mut want = Section::zero(f);
            want.slots[b] = Some(o.ctx.scale(s.get(b).unwrap(), o.series.beta(b)));
            assert_eq!(got, want);
        }
    }

    #[test]
    fn zero_shift_is_plain_casimir() {
        let o = op(TractorFamily::SymSq0);
        let s = Section::generic(&o.ctx, TractorFamily::SymSq0);
        assert_eq!(o.shifted_apply(&Coeff::zero(), &s), o.apply(&s));
    }

    #[test]
    fn shifted_factors_commute() {
        for f in TractorFamily::ALL {
            let o = op(f);
            let s = Section::generic(&o.ctx, f);
            let (b1, b2) = (c("w+1"), c("n-3"));
            assert_eq!(
                o.compose(&[b1.clone(), b2.clone()], &s),
                o.compose(&[b2, b1], &s),
                "{f}"
            );
        }
    }

    #[test]
    fn filtration_shift() {
        // the product over one level's eigenvalues pushes T^i into T^{i+1}
        for f in TractorFamily::ALL {
            let o = op(f);
            let layout = f.layout();
            for level in 0..f.num_levels() {
                let s = Section::generic_from(&o.ctx, f, level);
                let out = o.compose(&o.series.level_betas(level), &s);
                for (k, d) in layout.iter().enumerate() {
                    if d.level <= level {
                        assert!(out.is_zero_slot(k), "{f} level {level} slot {}", d.name);
                    }
                }
            }
        }
    }

    #[test]
    fn oneform_top_only_shift() {
        // (C − β0) on a top-only section: 2∇_(aσ_b)0, 2∇^iσ_i and −2∇_[aσ_b]
        let o = op(TractorFamily::OneFormStd);
        let ctx = &o.ctx;
        let mut s = Section::zero(TractorFamily::OneFormStd);
        let sigma = Var::new("sigma", 1, crate::symop::tensor::Symmetry::None);
        let (a, b) = (free(0), free(1));
        s.slots[0] = Some(ctx.var(&sigma, &[a]).unwrap());
        let out = o.shifted_apply(o.series.beta(0), &s);
        let grad: Expr = ctx.nabla(&ctx.var(&sigma, &[b]).unwrap(), a);
        assert!(out.is_zero_slot(0));
        assert_eq!(
            out.slots[1].as_ref().unwrap(),
            &ctx.scale(&ctx.sym_tf(&grad, &[a, b]), &c("2"))
        );
        assert_eq!(
            out.slots[2].as_ref().unwrap(),
            &ctx.scale(&ctx.contract(&grad, a, b), &c("2"))
        );
        assert_eq!(
            out.slots[3].as_ref().unwrap(),
            &ctx.scale(&ctx.alt(&grad, &[a, b]), &c("-2"))
        );
    }
}
