//! Operators induced by polynomials in the curved Casimir.

use serde::Serialize;
use serde_json::json;

use crate::bundles::{Section, TractorFamily};
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::weights::{Dim, IrreducibleBundleSpec};

use super::casimir::CasimirOp;
use super::tensor::{free, Base, Ctx, Expr, Factor, Idx, Notation, Regime, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Splitting,
    Invariant,
    Zero,
}

#[derive(Clone, Debug)]
pub struct SlotRef {
    pub index: usize,
    pub name: &'static str,
    pub spec: IrreducibleBundleSpec,
}

impl SlotRef {
    fn of(op: &CasimirOp, index: usize) -> SlotRef {
        let e = &op.series.slots[index];
        SlotRef {
            index,
            name: e.slot.name,
            spec: e.slot.spec.clone(),
        }
    }
}

/// A canonical operator between two irreducible slots, written in the
/// source slot's variable.
#[derive(Clone, Debug)]
pub struct OperatorFormula {
    pub family: TractorFamily,
    pub dim: Dim,
    pub w: Coeff,
    pub regime: Regime,
    pub source: SlotRef,
    pub target: SlotRef,
    pub body: Expr,
    pub factors: Vec<Coeff>,
    pub order: usize,
    pub classification: Classification,
}

impl OperatorFormula {
    pub fn source_var(&self) -> Var {
        self.family.layout()[self.source.index].var()
    }

    pub fn source_labels(&self) -> Vec<Idx> {
        self.family.layout()[self.source.index].labels()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "family": self.family.tag(),
            "n": self.dim.to_string(),
            "w": self.w.to_string(),
            "regime": self.regime,
            "source": {"slot": self.source.name, "bundle": self.source.spec.label()},
            "target": {"slot": self.target.name, "bundle": self.target.spec.label()},
            "factors": self.factors.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "order": self.order,
            "classification": self.classification,
            "formula": self.body.render(Notation::Plain),
            "latex": self.body.render(Notation::Latex),
            "terms": self.body.to_json(),
        })
    }
}

/// Factors for an operator from `source` to `target`: the source eigenvalue
/// followed by the distinct eigenvalues of every level strictly between,
/// deepest level first.
pub fn default_factors(op: &CasimirOp, source: usize, target: usize) -> Vec<Coeff> {
    let layout = op.family().layout();
    let (i, j) = (layout[source].level, layout[target].level);
    let mut out = Vec::new();
    for level in (i + 1..j).rev() {
        out.extend(op.series.level_betas(level));
    }
    out.push(op.series.beta(source).clone());
    out
}

/// Section with the source slot generic, its level siblings zero and every
/// deeper slot down to `max_level` generic.
fn probe_section(op: &CasimirOp, source: usize, max_level: usize) -> Section {
    let family = op.family();
    let layout = family.layout();
    let level = layout[source].level;
    let mut s = Section::zero(family);
    for (k, d) in layout.iter().enumerate() {
        if k == source || (d.level > level && d.level <= max_level) {
            s.slots[k] = Some(op.ctx.var(&d.var(), &d.labels()).expect("slot var"));
        }
    }
    s
}

pub fn induced_operator(
    op: &CasimirOp,
    source: usize,
    target: usize,
    factors: Option<&[Coeff]>,
) -> Result<OperatorFormula> {
    let layout = op.family().layout();
    let (si, ti) = (layout[source].level, layout[target].level);
    if ti <= si {
        return Err(Error::Config(format!(
            "target {} must lie strictly below source {}",
            layout[target].name, layout[source].name
        )));
    }
    let factors = match factors {
        Some(f) => f.to_vec(),
        None => default_factors(op, source, target),
    };
    let op_t = op.clone().with_max_level(ti);
    let s = probe_section(&op_t, source, ti);
    let out = op_t.compose(&factors, &s);
    let mut residual = Vec::new();
    for (k, d) in layout.iter().enumerate() {
        if d.level < ti && !out.is_zero_slot(k) {
            residual.push(d.name.to_string());
        }
    }
    let body = out.slots[target]
        .clone()
        .unwrap_or_else(|| Expr::zero(&layout[target].labels()));
    let src = layout[source].name;
    let foreign: Vec<String> = body.var_names().into_iter().filter(|v| v != src).collect();
    if !foreign.is_empty() {
        residual.push(format!("{} depends on {}", layout[target].name, foreign.join(", ")));
    }
    if !residual.is_empty() {
        return Err(Error::NotWellDefined { residual });
    }
    Ok(OperatorFormula {
        family: op.family(),
        dim: op.series.dim,
        w: op.series.w.clone(),
        regime: op.ctx.regime,
        source: SlotRef::of(op, source),
        target: SlotRef::of(op, target),
        order: body.order(),
        classification: if body.is_zero() {
            Classification::Zero
        } else {
            Classification::Invariant
        },
        body,
        factors,
    })
}

/// A splitting operator: the full section produced from one component.
#[derive(Clone, Debug)]
pub struct SplittingFormula {
    pub source: SlotRef,
    pub factors: Vec<Coeff>,
    /// `(slot name, value)` for every nonzero slot.
    pub slots: Vec<(&'static str, Expr)>,
    pub classification: Classification,
}

impl SplittingFormula {
    pub fn slot(&self, name: &str) -> Option<&Expr> {
        self.slots.iter().find(|(n, _)| *n == name).map(|(_, e)| e)
    }
}

pub fn splitting_operator(op: &CasimirOp, component: usize) -> Result<SplittingFormula> {
    let family = op.family();
    let layout = family.layout();
    let level = layout[component].level;
    let beta = op.series.beta(component);
    let mut factors = Vec::new();
    for l in (level + 1..family.num_levels()).rev() {
        for b in op.series.level_betas(l) {
            if &b == beta {
                let with = layout
                    .iter()
                    .enumerate()
                    .find(|(k, d)| d.level == l && op.series.beta(*k) == beta)
                    .map(|(_, d)| d.name)
                    .unwrap_or("?");
                return Err(Error::Coincidence {
                    slot: layout[component].name.to_string(),
                    with: with.to_string(),
                });
            }
            factors.push(b);
        }
    }
    let s = probe_section(op, component, family.num_levels() - 1);
    let out = op.compose(&factors, &s);
    let src = layout[component].name;
    let mut slots = Vec::new();
    let mut residual = Vec::new();
    for (k, d) in layout.iter().enumerate() {
        if let Some(e) = out.get(k).filter(|e| !e.is_zero()) {
            if d.level < level || (d.level == level && k != component) {
                residual.push(d.name.to_string());
            }
            if e.var_names().iter().any(|v| v != src) {
                residual.push(format!("{} depends on the extension", d.name));
            }
            slots.push((d.name, e.clone()));
        }
    }
    if !residual.is_empty() {
        return Err(Error::NotWellDefined { residual });
    }
    Ok(SplittingFormula {
        source: SlotRef::of(op, component),
        factors,
        slots,
        classification: Classification::Splitting,
    })
}

/// Leading part in flat calculus: `P ≡ 0`, derivatives commute, only terms
/// of maximal order kept.
pub fn principal_part(f: &OperatorFormula) -> Expr {
    let ctx = Ctx::new(f.dim.as_coeff(), Regime::Flat);
    leading_terms(&ctx.normalize(&f.body))
}

pub fn leading_terms(e: &Expr) -> Expr {
    let top = e.order();
    e.filter_terms(|t| t.order() == top)
}

/// `Δ^k x` for a slot expression (derivative labels are temporary).
pub fn laplacian_power(ctx: &Ctx, x: &Expr, k: usize) -> Expr {
    let (p, q) = (free(30), free(31));
    (0..k).fold(x.clone(), |acc, _| {
        ctx.contract(&ctx.nabla(&ctx.nabla(&acc, q), p), p, q)
    })
}

// ---------------------------------------------------------------------------
// dimension-specific constructions

fn fixed(n: u32) -> Dim {
    Dim::fixed(n).expect("valid dimension")
}

fn op_at(family: TractorFamily, n: u32, w: i64, regime: Regime) -> Result<CasimirOp> {
    CasimirOp::new(family, &Coeff::int(w), fixed(n), regime)
}

/// Top-to-bottom operator of a family at `w = −n/2`, with the default factors.
pub fn top_to_bottom(family: TractorFamily, dim: Dim, regime: Regime) -> Result<OperatorFormula> {
    let w = Coeff::frac(-1, 2) * dim.as_coeff();
    let op = CasimirOp::new(family, &w, dim, regime)?;
    induced_operator(&op, family.top(), family.bottom(), None)
}

#[derive(Clone, Debug)]
pub struct MaxwellReduction {
    pub raw: OperatorFormula,
    /// Raw formula after commuting `∇_a ∇^c μ_c` into `∇^c ∇_a μ_c`.
    pub rewritten: Expr,
    /// `∇^c ∇_[a μ_c]`.
    pub maxwell: Expr,
    /// `rewritten = scale · maxwell`, if proportional.
    pub scale: Option<Coeff>,
}

/// Applies `∇_x ∇^d v_d → ∇^d ∇_x v_d − 2 P_x^d v_d − P v_x` to every
/// occurrence in `e` (first-order variable `var`).
pub fn commute_divergence(ctx: &Ctx, e: &Expr, var: &str) -> Expr {
    let mut terms = Vec::new();
    for t in e.terms() {
        let hit = t.factors.iter().position(|f| {
            matches!(&f.base, Base::Var(v) if &*v.name == var)
                && f.deriv.len() == 2
                && f.idx.len() == 1
                && !f.deriv[0].is_dummy()
                && f.deriv[1].is_dummy()
                && f.deriv[1] == f.idx[0]
        });
        let Some(k) = hit else {
            terms.push(t.clone());
            continue;
        };
        let f = &t.factors[k];
        let (x, d) = (f.deriv[0], f.deriv[1]);
        let fresh = t
            .factors
            .iter()
            .flat_map(|f| f.deriv.iter().chain(f.idx.iter()))
            .filter_map(|i| match i {
                Idx::Dummy(v) => Some(*v),
                _ => None,
            })
            .max()
            .map_or(0, |m| m + 1);
        let mut swapped = t.clone();
        swapped.factors[k].deriv = vec![d, x];
        terms.push(swapped);
        let plain = Factor {
            base: f.base.clone(),
            deriv: vec![],
            idx: vec![d],
        };
        let mut ric = t.clone();
        ric.coeff = &t.coeff * &Coeff::int(-2);
        ric.factors[k] = plain.clone();
        ric.factors.push(Factor {
            base: Base::Schouten,
            deriv: vec![],
            idx: vec![x, d],
        });
        terms.push(ric);
        let tr = Idx::Dummy(fresh);
        let mut trace = t.clone();
        trace.coeff = -&t.coeff;
        trace.factors[k] = Factor {
            base: f.base.clone(),
            deriv: vec![],
            idx: vec![x],
        };
        trace.factors.push(Factor {
            base: Base::Schouten,
            deriv: vec![],
            idx: vec![tr, tr],
        });
        terms.push(trace);
    }
    ctx.from_terms(e.free().to_vec(), terms)
}

/// The operator `μ ↦ T(μ)` of `E^(AB)0[−2]` in dimension four, induced by
/// `(C−β₁)∘(C−β₂¹)∘(C−β₂²)` from level 1 to level 3.
pub fn maxwell_reduction(dim: Dim) -> Result<MaxwellReduction> {
    if !dim.is_four() {
        return Err(Error::Config(format!("Maxwell reduction needs n = 4, got n = {dim}")));
    }
    let op = op_at(TractorFamily::SymSq0, 4, -2, Regime::Curved)?;
    let f = TractorFamily::SymSq0;
    let raw = induced_operator(&op, f.slot_index("mu")?, f.slot_index("nu")?, None)?;
    let ctx = &op.ctx;
    let rewritten = commute_divergence(ctx, &raw.body, "mu");
    let maxwell = maxwell_form(ctx, &raw.source_var());
    let scale = super::tensor::ratio(&rewritten, &maxwell);
    Ok(MaxwellReduction {
        raw,
        rewritten,
        maxwell,
        scale,
    })
}

/// `∇^c ∇_[a v_c]` for a one-form variable.
pub fn maxwell_form(ctx: &Ctx, v: &Var) -> Expr {
    let (a, c, e) = (free(0), free(2), free(4));
    let inner = ctx.nabla(&ctx.nabla(&ctx.var(v, &[e]).expect("one-form"), a), c);
    ctx.contract(&ctx.alt(&inner, &[a, e]), c, e)
}

#[derive(Clone, Debug)]
pub struct Dim10Operators {
    /// `E[−2] → E_a[−4]`.
    pub first: OperatorFormula,
    /// `E_a[−4] → E[−8]`.
    pub second: OperatorFormula,
}

pub fn dim10_intermediate_operators(regime: Regime) -> Result<Dim10Operators> {
    dim_intermediate_operators(10, regime)
}

/// The two intermediate operators of the cube family at `w = −n/2`
/// (well-defined only when `β₃² = β₀`, that is `n = 10`).
pub fn dim_intermediate_operators(n: u32, regime: Regime) -> Result<Dim10Operators> {
    let f = TractorFamily::SymCube0;
    let op = op_at(f, n, -(n as i64) / 2, regime)?;
    let nu = f.slot_index("nu")?;
    Ok(Dim10Operators {
        first: induced_operator(&op, f.top(), nu, None)?,
        second: induced_operator(&op, nu, f.bottom(), None)?,
    })
}

/// The sixth-order operator in dimension 10 obtained from the cube
/// composition with one factor `(C − β₀)` left out.
pub fn dim10_cube(regime: Regime) -> Result<OperatorFormula> {
    let f = TractorFamily::SymCube0;
    let op = op_at(f, 10, -5, regime)?;
    let mut factors = default_factors(&op, f.top(), f.bottom());
    let b0 = op.series.beta(0).clone();
    let pos = factors.iter().position(|b| *b == b0).expect("β₀ among factors");
    factors.remove(pos);
    induced_operator(&op, f.top(), f.bottom(), Some(&factors))
}

#[derive(Clone, Debug)]
pub struct Dim4CubeProbe {
    /// `E_(ab)0[1] → E_(ab)0[−1]`.
    pub phi: OperatorFormula,
    /// `E[1] → E_(ab)0[1]`.
    pub psi1: OperatorFormula,
    /// `E_(ab)0[−1] → E[−5]`.
    pub psi2: OperatorFormula,
    pub phi_psi1: Expr,
    pub psi2_phi: Expr,
}

/// Compose `outer ∘ inner` by substituting the inner body for the outer
/// source variable.
pub fn compose(ctx: &Ctx, outer: &OperatorFormula, inner: &OperatorFormula) -> Result<Expr> {
    ctx.substitute(
        &outer.body,
        &outer.source_var().name,
        &inner.body,
        &outer.source_labels(),
    )
}

pub fn dim4_cube_obstruction_probe(regime: Regime) -> Result<Dim4CubeProbe> {
    let f = TractorFamily::SymCube0;
    let op = op_at(f, 4, -2, regime)?;
    let (a, b) = (f.slot_index("A")?, f.slot_index("B")?);
    let phi = induced_operator(&op, a, b, None)?;
    let psi1 = induced_operator(&op, f.top(), a, None)?;
    let psi2 = induced_operator(&op, b, f.bottom(), None)?;
    let phi_psi1 = compose(&op.ctx, &phi, &psi1)?;
    let psi2_phi = compose(&op.ctx, &psi2, &phi)?;
    Ok(Dim4CubeProbe {
        phi,
        psi1,
        psi2,
        phi_psi1,
        psi2_phi,
    })
}

#[derive(Clone, Debug)]
pub struct Dim6Operators {
    /// Fourth-order `E_a → E_a[−4]` from level 1 to level 5.
    pub t: OperatorFormula,
    /// Exterior derivative `E[0] → E_a` (top to level 1).
    pub d: OperatorFormula,
    /// Divergence `E_a[−4] → E[−6]` (level 5 to bottom).
    pub delta: OperatorFormula,
}

pub fn dim6_t_operator(regime: Regime) -> Result<Dim6Operators> {
    let f = TractorFamily::SymCube0;
    let op = op_at(f, 6, -3, regime)?;
    let (mu, tau) = (f.slot_index("mu")?, f.slot_index("tau")?);
    Ok(Dim6Operators {
        t: induced_operator(&op, mu, tau, None)?,
        d: induced_operator(&op, f.top(), mu, None)?,
        delta: induced_operator(&op, tau, f.bottom(), None)?,
    })
}

/// Dimension-4 square: `T`, `d` (top to level 1) and `δ` (level 3 to bottom).
pub fn dim4_square_pieces(regime: Regime) -> Result<(OperatorFormula, OperatorFormula, OperatorFormula)> {
    let f = TractorFamily::SymSq0;
    let op = op_at(f, 4, -2, regime)?;
    let (mu, nu) = (f.slot_index("mu")?, f.slot_index("nu")?);
    Ok((
        induced_operator(&op, mu, nu, None)?,
        induced_operator(&op, f.top(), mu, None)?,
        induced_operator(&op, nu, f.bottom(), None)?,
    ))
}
