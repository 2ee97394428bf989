//! Slot-structured sections on grids and the numeric Casimir.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundles::{Section, TractorFamily};
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::symop::casimir::CasimirOp;
use crate::symop::tensor::Expr;
use crate::weights::BundleKind;

use super::eval::{Bindings, Evaluator};
use super::field::{Tensor, Trig};
use super::geometry::Geometry;

fn permutations(r: usize) -> Vec<(Vec<usize>, f64)> {
    fn go(prefix: &mut Vec<usize>, r: usize, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if prefix.len() == r {
            out.push((prefix.clone(), sign));
            return;
        }
        let mut s = sign;
        for k in (0..r).rev() {
            if !prefix.contains(&k) {
                prefix.push(k);
                go(prefix, r, s, out);
                prefix.pop();
                s = -s;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), r, 1.0, &mut out);
    // recompute signs by inversion count; the recursive toggle is only a hint
    for (p, s) in out.iter_mut() {
        let inv = (0..r)
            .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        *s = if inv % 2 == 0 { 1.0 } else { -1.0 };
    }
    out
}

/// Average over index permutations, weighted by sign when `alternating`.
fn symmetrize(t: &Tensor, alternating: bool) -> Tensor {
    let perms = permutations(t.rank);
    let norm = 1.0 / perms.len() as f64;
    let mut out = Tensor::zeros(t.n, t.rank, t.npts);
    for c in 0..t.comps() {
        let idx = t.multi_index(c);
        for (p, s) in &perms {
            let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
            let src = t.flat_index(&permuted);
            let f = if alternating { s * norm } else { norm };
            out.comp_mut(c)
                .iter_mut()
                .zip(t.comp(src))
                .for_each(|(o, v)| *o += f * v);
        }
    }
    out
}

/// Projects a tensor onto the slot type: symmetric trace-free (rank ≤ 3),
/// alternating or scalar.
pub fn project(geo: &Geometry, kind: BundleKind, t: &Tensor) -> Result<Tensor> {
    let n = geo.n();
    let nf = n as f64;
    match kind {
        BundleKind::Density | BundleKind::SymTracefree(0) | BundleKind::SymTracefree(1) => Ok(t.clone()),
        BundleKind::SymTracefree(2) => {
            let s = symmetrize(t, false);
            let tr = geo.contract(&s, 0, 1);
            let mut out = s;
            for ab in 0..n * n {
                let g = geo.g.comp(ab);
                out.comp_mut(ab)
                    .iter_mut()
                    .zip(g)
                    .zip(tr.comp(0))
                    .for_each(|((o, g), t)| *o -= g * t / nf);
            }
            Ok(out)
        }
        BundleKind::SymTracefree(3) => {
            let s = symmetrize(t, false);
            let tr = geo.contract(&s, 0, 1); // t_c
            let mut gt = Tensor::zeros(n, 3, t.npts);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let o = gt.comp_mut((a * n + b) * n + c);
                        for (x, y) in [(a, b), (a, c), (b, c)] {
                            let z = a + b + c - x - y;
                            let (g, tz) = (geo.g.comp(x * n + y), tr.comp(z));
                            o.iter_mut().zip(g).zip(tz).for_each(|((o, g), t)| *o += g * t / 3.0);
                        }
                    }
                }
            }
            let mut out = s;
            out.axpy(-3.0 / (nf + 2.0), &gt);
            Ok(out)
        }
        BundleKind::TwoForm => Ok(symmetrize(t, true)),
        other => Err(Error::ShapeMismatch(format!("no numeric projection for {other:?}"))),
    }
}

/// Random smooth field of the given slot type, varying on the active axes.
pub fn random_field(rng: &mut impl Rng, geo: &Geometry, kind: BundleKind) -> Result<Tensor> {
    let d = geo.domain;
    let mut t = Tensor::zeros(d.n, kind.rank(), d.npts());
    for c in 0..t.comps() {
        let f = Trig::random(rng, d.active, 2, 3);
        t.comp_mut(c).copy_from_slice(&f.sample(&d));
    }
    project(geo, kind, &t)
}

/// Random section with every slot at level `from_level` or deeper filled.
pub fn random_section(geo: &Geometry, family: TractorFamily, from_level: usize, seed: u64) -> Result<GridSection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = GridSection::zero(family);
    for (k, d) in family.layout().iter().enumerate() {
        if d.level >= from_level {
            s.slots[k] = Some(random_field(&mut rng, geo, d.kind)?);
        }
    }
    Ok(s)
}

/// Largest deviation from the slot-type constraints.
pub fn constraint_defect(geo: &Geometry, kind: BundleKind, t: &Tensor) -> Result<f64> {
    Ok(project(geo, kind, t)?.sub(t).max_abs())
}

/// A section of a tractor family on a grid; `None` slots are zero.
#[derive(Clone, Debug)]
pub struct GridSection {
    pub family: TractorFamily,
    pub slots: Vec<Option<Tensor>>,
}

impl GridSection {
    pub fn zero(family: TractorFamily) -> GridSection {
        GridSection {
            family,
            slots: vec![None; family.layout().len()],
        }
    }

    pub fn with_slot(mut self, k: usize, t: Tensor) -> Self {
        self.slots[k] = Some(t);
        self
    }

    fn check(&self, geo: &Geometry) -> Result<()> {
        let layout = self.family.layout();
        if self.slots.len() != layout.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} slots for family {}",
                self.slots.len(),
                self.family
            )));
        }
        for (t, d) in self.slots.iter().zip(layout) {
            if let Some(t) = t {
                if t.rank != d.rank() || t.n != geo.n() || t.npts != geo.npts() {
                    return Err(Error::ShapeMismatch(format!(
                        "slot {} expects rank {} on {} points, got rank {} on {} points",
                        d.name,
                        d.rank(),
                        geo.npts(),
                        t.rank,
                        t.npts
                    )));
                }
            }
        }
        Ok(())
    }

    fn add_scaled(&mut self, k: usize, a: f64, t: &Tensor) {
        match &mut self.slots[k] {
            Some(x) => x.axpy(a, t),
            None => self.slots[k] = Some(t.scaled(a)),
        }
    }
}

/// The Casimir on grid sections: the symbolic action on a generic section,
/// evaluated slot by slot.
#[derive(Clone, Debug)]
pub struct NumericCasimir {
    pub op: CasimirOp,
    exprs: Vec<Option<Expr>>,
    n: f64,
    w: f64,
}

fn concrete(c: &Coeff, what: &str) -> Result<f64> {
    c.as_rational()
        .map(|_| c.eval_f64(0.0, 0.0))
        .ok_or_else(|| Error::Config(format!("numeric evaluation needs a concrete {what}, got {c}")))
}

impl NumericCasimir {
    pub fn new(op: CasimirOp) -> Result<NumericCasimir> {
        let n = op
            .series
            .dim
            .value()
            .ok_or_else(|| Error::Config("numeric evaluation needs a concrete n".into()))? as f64;
        let w = concrete(&op.series.w, "w")?;
        let generic = Section::generic(&op.ctx, op.family());
        let exprs = op.apply(&generic).slots;
        Ok(NumericCasimir { op, exprs, n, w })
    }

    pub fn beta(&self, k: usize) -> Result<f64> {
        concrete(self.op.series.beta(k), "eigenvalue")
    }

    pub fn apply(&self, geo: &Geometry, s: &GridSection) -> Result<GridSection> {
        s.check(geo)?;
        let layout = self.op.family().layout();
        let ev = Evaluator::new(geo, self.n, self.w);
        let mut vars = Bindings::new();
        for (t, d) in s.slots.iter().zip(layout) {
            if let Some(t) = t {
                vars.insert(d.name, t);
            }
        }
        let mut out = GridSection::zero(s.family);
        for (k, e) in self.exprs.iter().enumerate() {
            if let Some(e) = e {
                let v = ev.evaluate(e, &vars)?.value;
                if v.max_abs() > 0.0 {
                    out.slots[k] = Some(v);
                }
            }
        }
        Ok(out)
    }

    /// `(C − β) s`.
    pub fn shifted_apply(&self, beta: &Coeff, geo: &Geometry, s: &GridSection) -> Result<GridSection> {
        let b = concrete(beta, "shift")?;
        let mut out = self.apply(geo, s)?;
        for (k, t) in s.slots.iter().enumerate() {
            if let Some(t) = t {
                out.add_scaled(k, -b, t);
            }
        }
        Ok(out)
    }

    /// Applies the product over the eigenvalues of `level` to a random
    /// section starting at that level and returns what is left at levels
    /// `≤ level`, relative to the input size.
    pub fn filtration_residual(&self, geo: &Geometry, level: usize, seed: u64) -> Result<f64> {
        let family = self.op.family();
        let s = random_section(geo, family, level, seed)?;
        let out = self.compose(&self.op.series.level_betas(level), geo, &s)?;
        let size = s.slots.iter().flatten().fold(0.0_f64, |m, t| m.max(t.max_abs()));
        let left = family
            .layout()
            .iter()
            .zip(&out.slots)
            .filter(|(d, _)| d.level <= level)
            .filter_map(|(_, t)| t.as_ref())
            .fold(0.0_f64, |m, t| m.max(t.max_abs()));
        Ok(left / size)
    }

    /// `(C − β_1) ∘ … ∘ (C − β_r) s`; the last factor is applied first.
    pub fn compose(&self, factors: &[Coeff], geo: &Geometry, s: &GridSection) -> Result<GridSection> {
        let mut acc = s.clone();
        for b in factors.iter().rev() {
            acc = self.shifted_apply(b, geo, &acc)?;
        }
        Ok(acc)
    }
}
