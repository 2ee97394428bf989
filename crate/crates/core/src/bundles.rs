//! Composition series, Casimir tables and `p+`-action tables for the three
//! tractor-product families `E_a[w] ⊗ E^A`, `E^(AB)0[w]` and `S^3_0 E^A[w]`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::symop::tensor::{free, Ctx, Expr, Idx, Regime, Symmetry, Var};
use crate::weights::{bundle_casimir, BundleKind, Dim, IrreducibleBundleSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TractorFamily {
    #[serde(rename = "oneform")]
    OneFormStd,
    #[serde(rename = "symsq0")]
    SymSq0,
    #[serde(rename = "cube")]
    SymCube0,
}

impl TractorFamily {
    pub const ALL: [TractorFamily; 3] = [Self::OneFormStd, Self::SymSq0, Self::SymCube0];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::OneFormStd => "oneform",
            Self::SymSq0 => "symsq0",
            Self::SymCube0 => "cube",
        }
    }

    /// Bundle notation of the family.
    pub fn notation(&self) -> &'static str {
        match self {
            Self::OneFormStd => "E_a[w] (x) E^A",
            Self::SymSq0 => "E^(AB)0[w]",
            Self::SymCube0 => "S^3_0 E^A[w]",
        }
    }

    pub fn num_levels(&self) -> usize {
        match self {
            Self::OneFormStd => 3,
            Self::SymSq0 => 5,
            Self::SymCube0 => 7,
        }
    }

    pub fn layout(&self) -> &'static [SlotDef] {
        match self {
            Self::OneFormStd => ONEFORM,
            Self::SymSq0 => SYMSQ,
            Self::SymCube0 => CUBE,
        }
    }

    /// Position of a slot in [`layout`](Self::layout) by name.
    pub fn slot_index(&self, name: &str) -> Result<usize> {
        self.layout()
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| Error::UnknownSlot(format!("{name} (family {})", self.tag())))
    }

    pub fn top(&self) -> usize {
        0
    }

    pub fn bottom(&self) -> usize {
        self.layout().len() - 1
    }
}

impl fmt::Display for TractorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TractorFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oneform" | "oneformstd" => Ok(Self::OneFormStd),
            "symsq0" | "square" => Ok(Self::SymSq0),
            "cube" | "symcube0" => Ok(Self::SymCube0),
            other => Err(Error::Config(format!(
                "unknown family `{other}` (expected oneform, symsq0 or cube)"
            ))),
        }
    }
}

/// Static description of one slot: name of its section variable, position in
/// the filtration, bundle type and weight offset from `w`.
#[derive(Clone, Copy, Debug)]
pub struct SlotDef {
    pub name: &'static str,
    pub level: usize,
    pub component: usize,
    pub kind: BundleKind,
    pub shift: i64,
}

const fn slot(name: &'static str, level: usize, component: usize, kind: BundleKind, shift: i64) -> SlotDef {
    SlotDef {
        name,
        level,
        component,
        kind,
        shift,
    }
}

use BundleKind::{Density, SymTracefree, TwoForm};

const ONEFORM: &[SlotDef] = &[
    slot("sigma", 0, 0, SymTracefree(1), 1),
    slot("A", 1, 0, SymTracefree(2), 1),
    slot("alpha", 1, 1, Density, -1),
    slot("B", 1, 2, TwoForm, 1),
    slot("rho", 2, 0, SymTracefree(1), -1),
];

const SYMSQ: &[SlotDef] = &[
    slot("sigma", 0, 0, Density, 2),
    slot("mu", 1, 0, SymTracefree(1), 2),
    slot("A", 2, 0, SymTracefree(2), 2),
    slot("alpha", 2, 1, Density, 0),
    slot("nu", 3, 0, SymTracefree(1), 0),
    slot("rho", 4, 0, Density, -2),
];

const CUBE: &[SlotDef] = &[
    slot("sigma", 0, 0, Density, 3),
    slot("mu", 1, 0, SymTracefree(1), 3),
    slot("A", 2, 0, SymTracefree(2), 3),
    slot("alpha", 2, 1, Density, 1),
    slot("Phi", 3, 0, SymTracefree(3), 3),
    slot("nu", 3, 1, SymTracefree(1), 1),
    slot("B", 4, 0, SymTracefree(2), 1),
    slot("beta", 4, 1, Density, -1),
    slot("tau", 5, 0, SymTracefree(1), -1),
    slot("rho", 6, 0, Density, -3),
];

impl SlotDef {
    pub fn rank(&self) -> usize {
        self.kind.rank()
    }

    /// Symbolic section variable for this slot.
    pub fn var(&self) -> Var {
        self.var_named(self.name)
    }

    pub fn var_named(&self, name: &str) -> Var {
        let sym = match self.kind {
            TwoForm => Symmetry::Alternating,
            _ => Symmetry::SymTracefree,
        };
        Var::new(name, self.rank() as u8, sym)
    }

    /// The slot's free labels `a, b, c, …`.
    pub fn labels(&self) -> Vec<Idx> {
        (0..self.rank() as u8).map(free).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotId {
    pub level: usize,
    pub component_index: usize,
    pub name: &'static str,
    pub spec: IrreducibleBundleSpec,
}

#[derive(Clone, Debug)]
pub struct SeriesEntry {
    pub slot: SlotId,
    pub beta: Coeff,
}

/// A filtration with its irreducible components and Casimir scalars.
#[derive(Clone, Debug)]
pub struct CompositionSeries {
    pub family: TractorFamily,
    pub dim: Dim,
    pub w: Coeff,
    pub slots: Vec<SeriesEntry>,
}

pub fn composition_series(family: TractorFamily, w: &Coeff, dim: Dim) -> Result<CompositionSeries> {
    let w = dim.specialize(w);
    let mut slots = Vec::new();
    for d in family.layout() {
        let spec = IrreducibleBundleSpec::new(d.kind, &w + &Coeff::int(d.shift));
        let beta = bundle_casimir(&spec, dim)?;
        slots.push(SeriesEntry {
            slot: SlotId {
                level: d.level,
                component_index: d.component,
                name: d.name,
                spec,
            },
            beta,
        });
    }
    Ok(CompositionSeries { family, dim, w, slots })
}

impl CompositionSeries {
    pub fn levels(&self) -> Vec<Vec<&SeriesEntry>> {
        let mut out: Vec<Vec<&SeriesEntry>> = vec![Vec::new(); self.family.num_levels()];
        for e in &self.slots {
            out[e.slot.level].push(e);
        }
        out
    }

    pub fn beta(&self, slot: usize) -> &Coeff {
        &self.slots[slot].beta
    }

    pub fn betas(&self) -> Vec<Coeff> {
        self.slots.iter().map(|e| e.beta.clone()).collect()
    }

    /// Eigenvalues of the slots at one level, without repetition.
    pub fn level_betas(&self, level: usize) -> Vec<Coeff> {
        let mut out: Vec<Coeff> = Vec::new();
        for e in self.slots.iter().filter(|e| e.slot.level == level) {
            if !out.contains(&e.beta) {
                out.push(e.beta.clone());
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let diffs = eigenvalue_differences(self);
        let levels: Vec<serde_json::Value> = self
            .levels()
            .iter()
            .enumerate()
            .map(|(k, lv)| {
                json!({
                    "level": k,
                    "slots": lv.iter().map(|e| json!({
                        "name": e.slot.name,
                        "component": e.slot.component_index,
                        "bundle": e.slot.spec.label(),
                        "weight": e.slot.spec.weight.to_string(),
                        "beta": e.beta.to_string(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "family": self.family.tag(),
            "n": self.dim.to_string(),
            "w": self.w.to_string(),
            "levels": levels,
            "differences": diffs.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// `β₀ − β` for every slot, in layout order.
pub fn eigenvalue_differences(series: &CompositionSeries) -> Vec<Coeff> {
    let b0 = series.beta(0);
    series.slots.iter().map(|e| b0 - &e.beta).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalWeight {
    /// The weight, as an exact expression in `n`.
    pub w: String,
    #[serde(skip)]
    pub value: Coeff,
    /// Slots whose eigenvalue equals the top eigenvalue at this weight.
    pub slots: Vec<&'static str>,
}

/// All `w` at which the top eigenvalue coincides with a lower one.
pub fn critical_weights(family: TractorFamily, dim: Dim) -> Result<Vec<CriticalWeight>> {
    let series = composition_series(family, &Coeff::w(), dim)?;
    let diffs = eigenvalue_differences(&series);
    let mut out: Vec<CriticalWeight> = Vec::new();
    for (k, d) in diffs.iter().enumerate().skip(1) {
        let cs = d.w_coeffs();
        if d.degree_w() != Some(1) {
            // constant differences never vanish for the families in scope
            continue;
        }
        let root = Coeff::from_ratfn(cs[0].clone())
            .checked_div(&Coeff::from_ratfn(cs[1].clone()))
            .expect("nonzero leading coefficient");
        let root = -root;
        let name = series.slots[k].slot.name;
        match out.iter_mut().find(|c| c.value == root) {
            Some(c) => c.slots.push(name),
            None => out.push(CriticalWeight {
                w: root.to_string(),
                value: root,
                slots: vec![name],
            }),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoincidenceGroup {
    pub beta: String,
    pub slots: Vec<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoincidenceReport {
    pub family: TractorFamily,
    pub n: String,
    pub w: String,
    pub groups: Vec<CoincidenceGroup>,
    /// `true` iff the top eigenvalue differs from every other one.
    pub regular: bool,
    /// Slots sharing the top eigenvalue (the top slot included).
    pub top_group: Vec<&'static str>,
    /// More than the two end slots share the top eigenvalue.
    pub extra_coincidence: bool,
}

pub fn coincidence_report(family: TractorFamily, w: &Coeff, dim: Dim) -> Result<CoincidenceReport> {
    let series = composition_series(family, w, dim)?;
    let mut groups: Vec<(Coeff, Vec<&'static str>)> = Vec::new();
    for e in &series.slots {
        match groups.iter_mut().find(|(b, _)| *b == e.beta) {
            Some((_, v)) => v.push(e.slot.name),
            None => groups.push((e.beta.clone(), vec![e.slot.name])),
        }
    }
    let top_group = groups[0].1.clone();
    Ok(CoincidenceReport {
        family,
        n: dim.to_string(),
        w: series.w.to_string(),
        regular: top_group.len() == 1,
        extra_coincidence: top_group.len() > 2,
        top_group,
        groups: groups
            .into_iter()
            .map(|(b, slots)| CoincidenceGroup {
                beta: b.to_string(),
                slots,
            })
            .collect(),
    })
}

// ---------------------------------------------------------------------------
// p+ action

/// Builds the one-form `φ` with a given free label.
pub type PhiFn<'a> = &'a dyn Fn(Idx) -> Expr;

type Builder = fn(&Ctx, &Expr, PhiFn) -> Expr;

/// One nonzero block of the action `φ· : slot(source) → slot(target)`.
#[derive(Clone, Copy)]
pub struct ActionEntry {
    pub source: usize,
    pub target: usize,
    build: Builder,
}

impl fmt::Debug for ActionEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActionEntry({} -> {})", self.source, self.target)
    }
}

impl ActionEntry {
    /// `φ·x` projected to the target slot; `x` carries the source slot's
    /// labels `a, b, …` and the result carries the target slot's labels.
    pub fn apply(&self, ctx: &Ctx, x: &Expr, phi: PhiFn) -> Expr {
        (self.build)(ctx, x, phi)
    }
}

#[derive(Clone, Debug)]
pub struct PPlusActionTable {
    pub family: TractorFamily,
    pub dim: Dim,
    pub entries: Vec<ActionEntry>,
}

const A: Idx = free(0);
const B: Idx = free(1);
const T: Idx = free(10);

fn relabel(ctx: &Ctx, x: &Expr, to: &[Idx]) -> Expr {
    let map: Vec<(Idx, Idx)> = to.iter().enumerate().map(|(k, t)| (free(k as u8), *t)).collect();
    ctx.rename(x, &map)
}

fn frac_n(ctx: &Ctx, num_shift: i64, den_shift: i64, factor: i64) -> Coeff {
    let num = &ctx.n + &Coeff::int(num_shift);
    let den = &ctx.n + &Coeff::int(den_shift);
    (&num * &Coeff::int(factor))
        .checked_div(&den)
        .expect("denominator nonzero for n >= 4")
}

fn scaled(ctx: &Ctx, e: &Expr, k: i64) -> Expr {
    ctx.scale(e, &Coeff::int(k))
}

/// Rank of the slot part of `x`, ignoring auxiliary labels (`>= 10`).
fn slot_rank(x: &Expr) -> usize {
    x.free().iter().filter(|i| matches!(i, Idx::Free(k) if *k < 10)).count()
}

// entries shared between families
fn x_phi_a(ctx: &Ctx, x: &Expr, phi: PhiFn) -> Expr {
    ctx.mul(x, &phi(A))
}
fn contract_first(ctx: &Ctx, x: &Expr, phi: PhiFn) -> Expr {
    // φ^i x_{i…}
    let r = slot_rank(x);
    let mut to = vec![T];
    to.extend((0..r.saturating_sub(1)).map(|k| free(k as u8)));
    ctx.mul(&phi(T), &relabel(ctx, x, &to))
}
fn phi_sym_tf(ctx: &Ctx, x: &Expr, phi: PhiFn) -> Expr {
    // φ_(a x_b…)0
    let r = slot_rank(x);
    let to: Vec<Idx> = (1..=r).map(|k| free(k as u8)).collect();
    let labels: Vec<Idx> = (0..=r).map(|k| free(k as u8)).collect();
    ctx.sym_tf(&ctx.mul(&phi(A), &relabel(ctx, x, &to)), &labels)
}

const ONEFORM_ACTION: &[(&str, &str, Builder)] = &[
    ("sigma", "A", |c, x, p| {
        scaled(c, &c.sym_tf(&c.mul(x, &p(B)), &[A, B]), -1)
    }),
    ("sigma", "alpha", |c, x, p| scaled(c, &x_phi_a(c, x, p), -1)),
    ("sigma", "B", |c, x, p| scaled(c, &c.alt(&c.mul(x, &p(B)), &[A, B]), -1)),
    ("A", "rho", |c, x, p| c.mul(x, &p(B))),
    ("alpha", "rho", |c, x, p| {
        let inv = Coeff::one().checked_div(&c.n).expect("n nonzero");
        c.scale(&x_phi_a(c, x, p), &inv)
    }),
    ("B", "rho", |c, x, p| c.mul(x, &p(B))),
];

const SYMSQ_ACTION: &[(&str, &str, Builder)] = &[
    ("sigma", "mu", |c, x, p| scaled(c, &x_phi_a(c, x, p), -2)),
    ("mu", "A", |c, x, p| scaled(c, &phi_sym_tf(c, x, p), -1)),
    ("mu", "alpha", contract_first),
    ("A", "nu", |c, x, p| scaled(c, &contract_first(c, x, p), 2)),
    ("alpha", "nu", |c, x, p| {
        c.scale(&x_phi_a(c, x, p), &-frac_n(c, 2, 0, 1))
    }),
    ("nu", "rho", contract_first),
];

const CUBE_ACTION: &[(&str, &str, Builder)] = &[
    ("sigma", "mu", |c, x, p| scaled(c, &x_phi_a(c, x, p), -3)),
    ("mu", "A", |c, x, p| scaled(c, &phi_sym_tf(c, x, p), -2)),
    ("mu", "alpha", contract_first),
    ("A", "Phi", |c, x, p| scaled(c, &phi_sym_tf(c, x, p), -1)),
    ("alpha", "nu", |c, x, p| {
        c.scale(&x_phi_a(c, x, p), &-frac_n(c, 2, 0, 2))
    }),
    ("A", "nu", |c, x, p| scaled(c, &contract_first(c, x, p), 2)),
    ("nu", "B", |c, x, p| c.scale(&phi_sym_tf(c, x, p), &-frac_n(c, 4, 2, 1))),
    ("Phi", "B", |c, x, p| scaled(c, &contract_first(c, x, p), 3)),
    ("nu", "beta", contract_first),
    ("beta", "tau", |c, x, p| {
        c.scale(&x_phi_a(c, x, p), &-frac_n(c, 4, 0, 1))
    }),
    ("B", "tau", |c, x, p| scaled(c, &contract_first(c, x, p), 2)),
    ("tau", "rho", contract_first),
];

pub fn pplus_action_table(family: TractorFamily, dim: Dim) -> PPlusActionTable {
    let raw = match family {
        TractorFamily::OneFormStd => ONEFORM_ACTION,
        TractorFamily::SymSq0 => SYMSQ_ACTION,
        TractorFamily::SymCube0 => CUBE_ACTION,
    };
    let entries = raw
        .iter()
        .map(|(s, t, build)| ActionEntry {
            source: family.slot_index(s).expect("table slot"),
            target: family.slot_index(t).expect("table slot"),
            build: *build,
        })
        .collect();
    PPlusActionTable { family, dim, entries }
}

/// A section in vector notation: one expression per slot, `None` for a slot
/// that is identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub family: TractorFamily,
    pub slots: Vec<Option<Expr>>,
}

impl Section {
    pub fn zero(family: TractorFamily) -> Section {
        Section {
            family,
            slots: vec![None; family.layout().len()],
        }
    }

    /// Every slot filled by its own generic variable.
    pub fn generic(ctx: &Ctx, family: TractorFamily) -> Section {
        Self::generic_from(ctx, family, 0)
    }

    /// Slots at levels `>= level` generic, the rest zero.
    pub fn generic_from(ctx: &Ctx, family: TractorFamily, level: usize) -> Section {
        let slots = family
            .layout()
            .iter()
            .map(|d| (d.level >= level).then(|| ctx.var(&d.var(), &d.labels()).expect("slot var")))
            .collect();
        Section { family, slots }
    }

    pub fn get(&self, k: usize) -> Option<&Expr> {
        self.slots[k].as_ref()
    }

    pub fn is_zero_slot(&self, k: usize) -> bool {
        self.slots[k].as_ref().is_none_or(|e| e.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        (0..self.slots.len()).all(|k| self.is_zero_slot(k))
    }

    /// Re-normalize every slot in another context.
    pub fn normalized(&self, ctx: &Ctx) -> Section {
        Section {
            family: self.family,
            slots: self
                .slots
                .iter()
                .map(|s| s.as_ref().map(|e| ctx.normalize(e)).filter(|e| !e.is_zero()))
                .collect(),
        }
    }

    pub fn add_to(&mut self, ctx: &Ctx, k: usize, e: &Expr) {
        let next = match &self.slots[k] {
            Some(cur) => ctx.add(cur, e),
            None => e.clone(),
        };
        self.slots[k] = (!next.is_zero()).then_some(next);
    }

    /// Lowest level (smallest index) carrying a nonzero slot.
    pub fn top_level(&self) -> Option<usize> {
        let layout = self.family.layout();
        (0..self.slots.len())
            .filter(|k| !self.is_zero_slot(*k))
            .map(|k| layout[k].level)
            .min()
    }
}

impl PPlusActionTable {
    /// `φ·s` slot by slot.
    pub fn act(&self, ctx: &Ctx, s: &Section, phi: PhiFn) -> Section {
        let mut out = Section::zero(self.family);
        for e in &self.entries {
            if let Some(x) = s.get(e.source) {
                if x.is_zero() {
                    continue;
                }
                let v = e.apply(ctx, x, phi);
                out.add_to(ctx, e.target, &v);
            }
        }
        out
    }

    /// Table entries rendered with a generic source and one-form `phi`.
    pub fn rendered(&self, notation: crate::symop::tensor::Notation) -> Vec<(String, String, String)> {
        let ctx = Ctx::new(self.dim.as_coeff(), Regime::Curved);
        let layout = self.family.layout();
        let phi_var = Var::new("phi", 1, Symmetry::None);
        let phi = |i: Idx| ctx.var(&phi_var, &[i]).expect("phi");
        self.entries
            .iter()
            .map(|e| {
                let d = &layout[e.source];
                let x = ctx.var(&d.var(), &d.labels()).expect("slot var");
                (
                    d.name.to_string(),
                    layout[e.target].name.to_string(),
                    e.apply(&ctx, &x, &phi).render(notation),
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .rendered(crate::symop::tensor::Notation::Plain)
            .into_iter()
            .map(|(s, t, e)| json!({"source": s, "target": t, "expression": e}))
            .collect();
        json!({
            "family": self.family.tag(),
            "n": self.dim.to_string(),
            "entries": entries,
        })
    }
}
