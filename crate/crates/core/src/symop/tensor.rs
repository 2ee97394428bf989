//! Abstract-index tensor expressions with exact coefficients.
//!
//! An expression is a sum of terms; each term is a coefficient times a
//! product of factors `∇_{i1}…∇_{ir} B_{j1…jk}` where the base `B` is a slot
//! variable, the Schouten tensor `P` or the metric `g`. Repeated labels are
//! contractions with the metric. All indices are stored in lower position.
//!
//! Expressions are kept in canonical form: projectors are expanded by the
//! builders, metrics are contracted away, dummy labels are renamed
//! deterministically and like terms are merged.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::coeff::Coeff;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Idx {
    Free(u8),
    Dummy(u16),
}

impl Idx {
    pub fn is_dummy(&self) -> bool {
        matches!(self, Idx::Dummy(_))
    }
}

/// Free labels `a, b, c, …` by position.
pub const fn free(k: u8) -> Idx {
    Idx::Free(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// No index symmetry (rank 0/1 fields and generic placeholders).
    None,
    SymTracefree,
    Alternating,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub rank: u8,
    pub sym: Symmetry,
}

impl Var {
    pub fn new(name: &str, rank: u8, sym: Symmetry) -> Var {
        let sym = if rank <= 1 { Symmetry::None } else { sym };
        Var {
            name: Arc::from(name),
            rank,
            sym,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Var(Var),
    Schouten,
    Metric,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub base: Base,
    /// Derivative indices, outermost first.
    pub deriv: Vec<Idx>,
    pub idx: Vec<Idx>,
}

impl Factor {
    fn indices(&self) -> impl Iterator<Item = &Idx> {
        self.deriv.iter().chain(self.idx.iter())
    }

    fn indices_mut(&mut self) -> impl Iterator<Item = &mut Idx> {
        self.deriv.iter_mut().chain(self.idx.iter_mut())
    }

    pub fn order(&self) -> usize {
        self.deriv.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Coeff,
    pub factors: Vec<Factor>,
}

impl Term {
    fn indices(&self) -> impl Iterator<Item = &Idx> {
        self.factors.iter().flat_map(|f| f.indices())
    }

    fn max_dummy(&self) -> Option<u16> {
        self.indices()
            .filter_map(|i| match i {
                Idx::Dummy(d) => Some(*d),
                _ => None,
            })
            .max()
    }

    fn relabel(&mut self, map: &dyn Fn(Idx) -> Idx) {
        for f in &mut self.factors {
            for i in f.indices_mut() {
                *i = map(*i);
            }
        }
    }

    /// Total number of derivatives in the term.
    pub fn order(&self) -> usize {
        self.factors.iter().map(|f| f.order()).sum()
    }

    pub fn contains_var(&self, name: &str) -> bool {
        self.factors
            .iter()
            .any(|f| matches!(&f.base, Base::Var(v) if &*v.name == name))
    }

    pub fn contains_schouten(&self) -> bool {
        self.factors.iter().any(|f| f.base == Base::Schouten)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    free: Vec<Idx>,
    terms: Vec<Term>,
}

impl Expr {
    pub fn zero(free: &[Idx]) -> Expr {
        let mut free = free.to_vec();
        free.sort();
        Expr {
            free,
            terms: Vec::new(),
        }
    }

    pub fn free(&self) -> &[Idx] {
        &self.free
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximal derivative count over all terms.
    pub fn order(&self) -> usize {
        self.terms.iter().map(|t| t.order()).max().unwrap_or(0)
    }

    pub fn contains_var(&self, name: &str) -> bool {
        self.terms.iter().any(|t| t.contains_var(name))
    }

    /// Names of all slot variables occurring in the expression.
    pub fn var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.terms {
            for f in &t.factors {
                if let Base::Var(v) = &f.base {
                    out.insert(v.name.to_string());
                }
            }
        }
        out
    }

    /// Keeps only the terms selected by `keep`.
    pub fn filter_terms(&self, keep: impl Fn(&Term) -> bool) -> Expr {
        Expr {
            free: self.free.clone(),
            terms: self.terms.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Non-commuting covariant derivatives, `P` kept.
    Curved,
    /// `P ≡ 0` and derivatives commute.
    Flat,
}

/// Normalization context: the value of `g^i_i` and the rewrite regime.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub n: Coeff,
    pub regime: Regime,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum GroupKind {
    Single,
    Symmetric,
    Antisymmetric,
}

/// Location of an index occurrence: (factor, in base?, position).
type Loc = (usize, bool, usize);

impl Ctx {
    pub fn new(n: Coeff, regime: Regime) -> Ctx {
        Ctx { n, regime }
    }

    pub fn with_regime(&self, regime: Regime) -> Ctx {
        Ctx {
            n: self.n.clone(),
            regime,
        }
    }

    fn single(&self, coeff: Coeff, factor: Factor, free: &[Idx]) -> Expr {
        let e = Expr {
            free: {
                let mut f = free.to_vec();
                f.sort();
                f
            },
            terms: vec![Term {
                coeff,
                factors: vec![factor],
            }],
        };
        self.normalize(&e)
    }

    fn check_frees(labels: &[Idx]) -> Result<()> {
        let set: BTreeSet<_> = labels.iter().collect();
        if set.len() != labels.len() || labels.iter().any(|i| i.is_dummy()) {
            return Err(Error::IndexArity(format!(
                "expected distinct free labels, got {labels:?}"
            )));
        }
        Ok(())
    }

    pub fn var(&self, var: &Var, idx: &[Idx]) -> Result<Expr> {
        if idx.len() != var.rank as usize {
            return Err(Error::IndexArity(format!(
                "{} has rank {}, got {} indices",
                var.name,
                var.rank,
                idx.len()
            )));
        }
        Self::check_frees(idx)?;
        Ok(self.single(
            Coeff::one(),
            Factor {
                base: Base::Var(var.clone()),
                deriv: vec![],
                idx: idx.to_vec(),
            },
            idx,
        ))
    }

    pub fn schouten(&self, a: Idx, b: Idx) -> Expr {
        self.single(
            Coeff::one(),
            Factor {
                base: Base::Schouten,
                deriv: vec![],
                idx: vec![a, b],
            },
            &[a, b],
        )
    }

    /// The trace `P^i_i`.
    pub fn schouten_trace(&self) -> Expr {
        self.single(
            Coeff::one(),
            Factor {
                base: Base::Schouten,
                deriv: vec![],
                idx: vec![Idx::Dummy(0), Idx::Dummy(0)],
            },
            &[],
        )
    }

    pub fn metric(&self, a: Idx, b: Idx) -> Expr {
        self.single(
            Coeff::one(),
            Factor {
                base: Base::Metric,
                deriv: vec![],
                idx: vec![a, b],
            },
            &[a, b],
        )
    }

    pub fn constant(&self, c: Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero(&[]);
        }
        Expr {
            free: vec![],
            terms: vec![Term {
                coeff: c,
                factors: vec![],
            }],
        }
    }

    pub fn add(&self, a: &Expr, b: &Expr) -> Expr {
        assert_eq!(a.free, b.free, "adding expressions with different free indices");
        let mut terms = a.terms.clone();
        terms.extend(b.terms.iter().cloned());
        self.merge(a.free.clone(), terms)
    }

    pub fn sum<'a>(&self, free: &[Idx], items: impl IntoIterator<Item = &'a Expr>) -> Expr {
        let mut free_sorted = free.to_vec();
        free_sorted.sort();
        let mut terms = Vec::new();
        for e in items {
            assert_eq!(e.free, free_sorted, "summing expressions with different free indices");
            terms.extend(e.terms.iter().cloned());
        }
        self.merge(free_sorted, terms)
    }

    pub fn sub(&self, a: &Expr, b: &Expr) -> Expr {
        self.add(a, &self.scale(b, &Coeff::int(-1)))
    }

    pub fn scale(&self, a: &Expr, c: &Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero(&a.free);
        }
        Expr {
            free: a.free.clone(),
            terms: a
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff * c,
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }

    /// Tensor product; labels free in both operands are contracted.
    pub fn mul(&self, a: &Expr, b: &Expr) -> Expr {
        let shared: Vec<Idx> = a.free.iter().filter(|i| b.free.contains(i)).copied().collect();
        let mut free: Vec<Idx> = a
            .free
            .iter()
            .chain(b.free.iter())
            .filter(|i| !shared.contains(i))
            .copied()
            .collect();
        free.sort();
        let mut terms = Vec::with_capacity(a.terms.len() * b.terms.len());
        for ta in &a.terms {
            let off = ta.max_dummy().map_or(0, |d| d + 1);
            for tb in &b.terms {
                let offb = off + tb.max_dummy().map_or(0, |d| d + 1);
                let mut tb2 = tb.clone();
                tb2.relabel(&|i| match i {
                    Idx::Dummy(d) => Idx::Dummy(d + off),
                    other => other,
                });
                let mut factors = ta.factors.clone();
                factors.extend(tb2.factors);
                let mut t = Term {
                    coeff: &ta.coeff * &tb.coeff,
                    factors,
                };
                t.relabel(&|i| match shared.iter().position(|s| *s == i) {
                    Some(k) => Idx::Dummy(offb + k as u16),
                    None => i,
                });
                terms.push(t);
            }
        }
        self.merge(free, terms)
    }

    /// Covariant derivative `∇_i` of an expression, by the Leibniz rule.
    pub fn nabla(&self, a: &Expr, i: Idx) -> Expr {
        assert!(
            !i.is_dummy() && !a.free.contains(&i),
            "derivative label must be a new free label"
        );
        let mut free = a.free.clone();
        free.push(i);
        free.sort();
        let mut terms = Vec::new();
        for t in &a.terms {
            for (k, f) in t.factors.iter().enumerate() {
                if f.base == Base::Metric {
                    continue;
                }
                let mut factors = t.factors.clone();
                factors[k].deriv.insert(0, i);
                terms.push(Term {
                    coeff: t.coeff.clone(),
                    factors,
                });
            }
        }
        self.merge(free, terms)
    }

    /// Apply `∇_{i1} … ∇_{ir}` (outermost first).
    pub fn nabla_chain(&self, a: &Expr, chain: &[Idx]) -> Expr {
        chain.iter().rev().fold(a.clone(), |acc, i| self.nabla(&acc, *i))
    }

    /// Rename free labels; `map` lists `(from, to)` pairs applied simultaneously.
    pub fn rename(&self, a: &Expr, map: &[(Idx, Idx)]) -> Expr {
        let f = |i: Idx| map.iter().find(|(s, _)| *s == i).map_or(i, |(_, t)| *t);
        let mut free: Vec<Idx> = a.free.iter().map(|i| f(*i)).collect();
        free.sort();
        let before = free.len();
        free.dedup();
        assert_eq!(before, free.len(), "rename collides free labels");
        let terms = a
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.relabel(&f);
                t
            })
            .collect();
        self.merge(free, terms)
    }

    /// Contract two free labels of the same expression.
    pub fn contract(&self, a: &Expr, x: Idx, y: Idx) -> Expr {
        assert!(a.free.contains(&x) && a.free.contains(&y) && x != y);
        let free: Vec<Idx> = a.free.iter().filter(|i| **i != x && **i != y).copied().collect();
        let terms = a
            .terms
            .iter()
            .map(|t| {
                let d = Idx::Dummy(t.max_dummy().map_or(0, |d| d + 1));
                let mut t = t.clone();
                t.relabel(&|i| if i == x || i == y { d } else { i });
                t
            })
            .collect();
        self.merge(free, terms)
    }

    fn permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
        fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if rest.is_empty() {
                out.push(prefix.clone());
                return;
            }
            for i in 0..rest.len() {
                let x = rest.remove(i);
                prefix.push(x);
                rec(prefix, rest, out);
                prefix.pop();
                rest.insert(i, x);
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut (0..k).collect(), &mut out);
        out.into_iter()
            .map(|p| {
                let mut sign = 1;
                for i in 0..p.len() {
                    for j in i + 1..p.len() {
                        if p[i] > p[j] {
                            sign = -sign;
                        }
                    }
                }
                (p, sign)
            })
            .collect()
    }

    fn average_perms(&self, a: &Expr, labels: &[Idx], signed: bool) -> Expr {
        let k = labels.len();
        let perms = Self::permutations(k);
        let count = perms.len() as i64;
        let mut terms = Vec::new();
        for (p, sign) in perms {
            let map: Vec<(Idx, Idx)> = (0..k).map(|j| (labels[j], labels[p[j]])).collect();
            let r = self.rename(a, &map);
            let s = if signed { sign } else { 1 };
            for t in r.terms {
                terms.push(Term {
                    coeff: &t.coeff * &Coeff::frac(s, count),
                    factors: t.factors,
                });
            }
        }
        self.merge(a.free.clone(), terms)
    }

    /// Symmetrization over `labels` (unit weight).
    pub fn sym(&self, a: &Expr, labels: &[Idx]) -> Expr {
        if labels.len() <= 1 {
            return a.clone();
        }
        self.average_perms(a, labels, false)
    }

    /// Alternation over `labels` (unit weight).
    pub fn alt(&self, a: &Expr, labels: &[Idx]) -> Expr {
        if labels.len() <= 1 {
            return a.clone();
        }
        self.average_perms(a, labels, true)
    }

    /// Trace-free symmetric part over `labels` (at most three labels).
    pub fn sym_tf(&self, a: &Expr, labels: &[Idx]) -> Expr {
        let s = self.sym(a, labels);
        match labels.len() {
            0 | 1 => s,
            2 => {
                let tr = self.contract(&s, labels[0], labels[1]);
                let g = self.metric(labels[0], labels[1]);
                let inv_n = Coeff::one().checked_div(&self.n).expect("nonzero dimension");
                self.sub(&s, &self.scale(&self.mul(&g, &tr), &inv_n))
            }
            3 => {
                let inv = Coeff::one()
                    .checked_div(&(&self.n + &Coeff::int(2)))
                    .expect("nonzero n + 2");
                let mut acc = s.clone();
                for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                    let tr = self.contract(&s, labels[p], labels[q]);
                    let g = self.metric(labels[p], labels[q]);
                    acc = self.sub(&acc, &self.scale(&self.mul(&g, &tr), &inv));
                }
                acc
            }
            k => panic!("trace-free projection of rank {k} is not supported"),
        }
    }

    /// Replace every occurrence of the variable `name` by `repl`, whose free
    /// labels `slots` stand for the variable's indices (in order).
    pub fn substitute(&self, a: &Expr, name: &str, repl: &Expr, slots: &[Idx]) -> Result<Expr> {
        let mut slot_sorted = slots.to_vec();
        slot_sorted.sort();
        if repl.free != slot_sorted {
            return Err(Error::IndexArity(format!(
                "replacement for {name} has free labels {:?}, expected {:?}",
                repl.free, slots
            )));
        }
        let mut out = Expr::zero(&a.free);
        // temporaries above every label in use
        const TMP: u8 = 200;
        for t in &a.terms {
            let pos: Vec<usize> = t
                .factors
                .iter()
                .enumerate()
                .filter(|(_, f)| matches!(&f.base, Base::Var(v) if &*v.name == name))
                .map(|(k, _)| k)
                .collect();
            if pos.is_empty() {
                out = self.add(
                    &out,
                    &Expr {
                        free: a.free.clone(),
                        terms: vec![t.clone()],
                    },
                );
                continue;
            }
            if pos.len() > 1 {
                return Err(Error::IndexArity(format!(
                    "substitution of {name} into a term that is not linear in it"
                )));
            }
            let target = t.factors[pos[0]].clone();
            // give every dummy that touches the factor a temporary free label;
            // pairs internal to the factor get two labels and are contracted again
            let mut rest = t.clone();
            rest.factors.remove(pos[0]);
            let mut next = TMP;
            let mut fresh = |_: ()| {
                let l = Idx::Free(next);
                next += 1;
                l
            };
            let mut target_labels = Vec::new();
            let mut internal = Vec::new();
            let mut rest_map: Vec<(Idx, Idx)> = Vec::new();
            for i in target.indices() {
                if i.is_dummy() {
                    let l = fresh(());
                    let in_rest = rest.indices().any(|r| r == i);
                    if in_rest {
                        rest_map.push((*i, l));
                    } else if let Some((_, first)) = internal.iter().find(|(d, _): &&(Idx, Idx)| d == i) {
                        let first: Idx = *first;
                        target_labels.push(l);
                        internal.push((Idx::Dummy(u16::MAX), first));
                        internal.push((Idx::Dummy(u16::MAX - 1), l));
                        continue;
                    } else {
                        internal.push((*i, l));
                    }
                    target_labels.push(l);
                } else {
                    target_labels.push(*i);
                }
            }
            rest.relabel(&|i| rest_map.iter().find(|(d, _)| *d == i).map_or(i, |(_, l)| *l));
            let mut rest_free: Vec<Idx> = a
                .free
                .iter()
                .filter(|f| rest.indices().any(|r| r == *f))
                .copied()
                .collect();
            rest_free.extend(rest_map.iter().map(|(_, l)| *l));
            rest_free.sort();
            let rest_expr = self.merge(rest_free, vec![rest]);
            // build the substituted factor
            let nd = target.deriv.len();
            let base_labels = &target_labels[nd..];
            let map: Vec<(Idx, Idx)> = slots.iter().copied().zip(base_labels.iter().copied()).collect();
            let mut sub = self.rename(repl, &map);
            sub = self.nabla_chain(&sub, &target_labels[..nd]);
            // contract internal pairs
            let mut pairs: BTreeMap<Idx, Vec<Idx>> = BTreeMap::new();
            for i in target.indices() {
                if i.is_dummy() && !rest_map.iter().any(|(d, _)| d == i) {
                    pairs.entry(*i).or_default();
                }
            }
            let mut it = target_labels.iter();
            for i in target.indices() {
                let l = *it.next().unwrap();
                if let Some(v) = pairs.get_mut(i) {
                    v.push(l);
                }
            }
            for (_, ls) in pairs {
                if ls.len() == 2 {
                    sub = self.contract(&sub, ls[0], ls[1]);
                }
            }
            // the coefficient travels with `rest`
            let prod = self.mul(&rest_expr, &sub);
            out = self.add(&out, &prod);
        }
        Ok(out)
    }

    /// Expression from raw terms.
    pub fn from_terms(&self, mut free: Vec<Idx>, terms: Vec<Term>) -> Expr {
        free.sort();
        self.merge(free, terms)
    }

    /// Re-normalize (for instance after switching regime).
    pub fn normalize(&self, a: &Expr) -> Expr {
        self.merge(a.free.clone(), a.terms.clone())
    }

    fn merge(&self, free: Vec<Idx>, terms: Vec<Term>) -> Expr {
        let mut acc: BTreeMap<Vec<Factor>, Coeff> = BTreeMap::new();
        for t in terms {
            if t.coeff.is_zero() {
                continue;
            }
            if let Some((c, factors)) = self.canon_term(t.coeff, t.factors) {
                match acc.get_mut(&factors) {
                    Some(v) => *v = &*v + &c,
                    None => {
                        acc.insert(factors, c);
                    }
                }
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(factors, coeff)| Term { coeff, factors })
            .collect();
        Expr { free, terms }
    }

    /// Canonical form of one term, or `None` if it vanishes identically.
    fn canon_term(&self, mut coeff: Coeff, mut factors: Vec<Factor>) -> Option<(Coeff, Vec<Factor>)> {
        // contract away metrics that carry a dummy
        while let Some(k) = factors
            .iter()
            .position(|f| f.base == Base::Metric && f.idx.iter().any(|i| i.is_dummy()))
        {
            let g = factors.remove(k);
            let (x, y) = (g.idx[0], g.idx[1]);
            if x == y {
                coeff = &coeff * &self.n;
                continue;
            }
            let (from, to) = if x.is_dummy() { (x, y) } else { (y, x) };
            for f in &mut factors {
                for i in f.indices_mut() {
                    if *i == from {
                        *i = to;
                    }
                }
            }
        }
        if self.regime == Regime::Flat && factors.iter().any(|f| f.base == Base::Schouten) {
            return None;
        }
        for f in &mut factors {
            if let Base::Var(v) = &f.base {
                if v.sym != Symmetry::None {
                    let mut seen = BTreeSet::new();
                    if f.idx.iter().any(|i| i.is_dummy() && !seen.insert(*i)) {
                        return None;
                    }
                }
            }
            if f.base == Base::Metric {
                f.idx.sort();
            }
        }
        // coarse order of factors; ties are resolved by trying permutations
        let coarse = |f: &Factor| {
            let mut cf: Vec<Idx> = f.deriv.iter().filter(|i| !i.is_dummy()).copied().collect();
            cf.sort();
            let mut bf: Vec<Idx> = f.idx.iter().filter(|i| !i.is_dummy()).copied().collect();
            bf.sort();
            (f.base.clone(), f.deriv.len(), f.idx.len(), cf, bf)
        };
        factors.sort_by_key(coarse);
        let mut tie_groups: Vec<(usize, usize)> = Vec::new();
        let mut s = 0;
        while s < factors.len() {
            let mut e = s + 1;
            while e < factors.len() && coarse(&factors[e]) == coarse(&factors[s]) {
                e += 1;
            }
            if e - s > 1 {
                tie_groups.push((s, e));
            }
            s = e;
        }
        let mut orders: Vec<Vec<usize>> = vec![(0..factors.len()).collect()];
        for (s, e) in tie_groups {
            let perms = Self::permutations(e - s);
            let mut next = Vec::new();
            for o in &orders {
                for (p, _) in &perms {
                    let mut o2 = o.clone();
                    for j in 0..(e - s) {
                        o2[s + j] = o[s + p[j]];
                    }
                    next.push(o2);
                }
            }
            orders = next;
        }
        let mut best: Option<(Vec<Factor>, i64)> = None;
        let mut conflict = false;
        for o in orders {
            let ordered: Vec<Factor> = o.iter().map(|&k| factors[k].clone()).collect();
            let (cand, sign) = self.label_canonically(ordered)?;
            match &best {
                None => best = Some((cand, sign)),
                Some((b, bs)) => {
                    if cand < *b {
                        best = Some((cand, sign));
                    } else if cand == *b && sign != *bs {
                        conflict = true;
                    }
                }
            }
        }
        if conflict {
            return None;
        }
        let (f, sign) = best?;
        if sign < 0 {
            coeff = -coeff;
        }
        Some((coeff, f))
    }

    /// Sort within symmetry groups and relabel dummies by first appearance,
    /// for a fixed factor order. Returns `None` if the term vanishes by
    /// symmetry.
    fn label_canonically(&self, mut factors: Vec<Factor>) -> Option<(Vec<Factor>, i64)> {
        let flat = self.regime == Regime::Flat;
        // groups: list of locations with a kind
        let mut groups: Vec<(GroupKind, Vec<Loc>)> = Vec::new();
        for (fi, f) in factors.iter().enumerate() {
            if flat && !f.deriv.is_empty() {
                groups.push((
                    GroupKind::Symmetric,
                    (0..f.deriv.len()).map(|p| (fi, false, p)).collect(),
                ));
            } else {
                for p in 0..f.deriv.len() {
                    groups.push((GroupKind::Single, vec![(fi, false, p)]));
                }
            }
            let kind = match &f.base {
                Base::Var(v) => match v.sym {
                    Symmetry::None => GroupKind::Single,
                    Symmetry::SymTracefree => GroupKind::Symmetric,
                    Symmetry::Alternating => GroupKind::Antisymmetric,
                },
                Base::Schouten | Base::Metric => GroupKind::Symmetric,
            };
            if kind == GroupKind::Single {
                for p in 0..f.idx.len() {
                    groups.push((GroupKind::Single, vec![(fi, true, p)]));
                }
            } else if !f.idx.is_empty() {
                groups.push((kind, (0..f.idx.len()).map(|p| (fi, true, p)).collect()));
            }
        }
        let mut group_of: BTreeMap<Loc, usize> = BTreeMap::new();
        for (g, (_, locs)) in groups.iter().enumerate() {
            for l in locs {
                group_of.insert(*l, g);
            }
        }
        let get = |fs: &Vec<Factor>, l: Loc| -> Idx {
            if l.1 {
                fs[l.0].idx[l.2]
            } else {
                fs[l.0].deriv[l.2]
            }
        };
        let mut sign = 1i64;
        // partner group of each dummy occurrence
        let partner_group = |fs: &Vec<Factor>, l: Loc| -> usize {
            let i = get(fs, l);
            for (&l2, &g2) in &group_of {
                if l2 != l && get(fs, l2) == i {
                    return g2;
                }
            }
            usize::MAX
        };
        let mut rank: BTreeMap<Idx, usize> = BTreeMap::new();
        for iter in 0..6 {
            let mut changed = false;
            for (g, (kind, locs)) in groups.iter().enumerate() {
                if *kind == GroupKind::Single {
                    continue;
                }
                let vals: Vec<Idx> = locs.iter().map(|l| get(&factors, *l)).collect();
                let keys: Vec<(u8, usize, usize)> = locs
                    .iter()
                    .zip(&vals)
                    .map(|(l, v)| match v {
                        Idx::Free(f) => (0u8, *f as usize, 0usize),
                        Idx::Dummy(d) => (1u8, partner_group(&factors, *l), *rank.get(v).unwrap_or(&(*d as usize))),
                    })
                    .collect();
                if *kind == GroupKind::Antisymmetric {
                    for a in 0..keys.len() {
                        for b in a + 1..keys.len() {
                            if keys[a].0 == 1 && keys[b].0 == 1 && keys[a].1 == keys[b].1 {
                                let pg = keys[a].1;
                                if pg == g || groups[pg].0 == GroupKind::Symmetric {
                                    return None;
                                }
                            }
                        }
                    }
                }
                let mut order: Vec<usize> = (0..vals.len()).collect();
                order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(vals[a].cmp(&vals[b])));
                if order.iter().enumerate().any(|(i, &o)| i != o) {
                    changed = true;
                    if *kind == GroupKind::Antisymmetric {
                        for i in 0..order.len() {
                            for j in i + 1..order.len() {
                                if order[i] > order[j] {
                                    sign = -sign;
                                }
                            }
                        }
                    }
                    for (slot, &src) in order.iter().enumerate() {
                        let l = locs[slot];
                        let v = vals[src];
                        if l.1 {
                            factors[l.0].idx[l.2] = v;
                        } else {
                            factors[l.0].deriv[l.2] = v;
                        }
                    }
                }
            }
            // relabel by first appearance
            let mut map: BTreeMap<Idx, Idx> = BTreeMap::new();
            let mut next = 0u16;
            for f in &factors {
                for i in f.indices() {
                    if i.is_dummy() && !map.contains_key(i) {
                        map.insert(*i, Idx::Dummy(next));
                        next += 1;
                    }
                }
            }
            for f in &mut factors {
                for i in f.indices_mut() {
                    if let Some(m) = map.get(i) {
                        if *m != *i {
                            changed = true;
                        }
                        *i = *m;
                    }
                }
            }
            rank = map
                .values()
                .map(|v| (*v, if let Idx::Dummy(d) = v { *d as usize } else { 0 }))
                .collect();
            if !changed && iter > 0 {
                break;
            }
        }
        Some((factors, sign))
    }
}

// ---------------------------------------------------------------------------
// rendering

fn free_letter(k: u8) -> String {
    if k < 26 {
        ((b'a' + k) as char).to_string()
    } else {
        format!("x{k}")
    }
}

const DUMMY_POOL: [char; 14] = ['i', 'j', 'k', 'l', 'm', 'p', 'q', 'r', 's', 't', 'u', 'v', 'x', 'y'];

fn dummy_names(t: &Term) -> BTreeMap<u16, String> {
    let used: BTreeSet<String> = t
        .indices()
        .filter_map(|i| match i {
            Idx::Free(f) => Some(free_letter(*f)),
            _ => None,
        })
        .collect();
    let mut pool = DUMMY_POOL.iter().map(|c| c.to_string()).filter(|c| !used.contains(c));
    let mut out = BTreeMap::new();
    let mut extra = 0;
    for i in t.indices() {
        if let Idx::Dummy(d) = i {
            if !out.contains_key(d) {
                let name = pool.next().unwrap_or_else(|| {
                    extra += 1;
                    format!("z{extra}")
                });
                out.insert(*d, name);
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Notation {
    Plain,
    Latex,
}

fn var_symbol(name: &str, notation: Notation) -> String {
    match notation {
        Notation::Plain => name.to_string(),
        Notation::Latex => match name {
            "sigma" | "mu" | "alpha" | "beta" | "rho" | "nu" | "tau" | "Phi" | "phi" | "Psi" => {
                format!("\\{name}")
            }
            other => other.to_string(),
        },
    }
}

/// Renders a single term (without its coefficient).
fn render_monomial(t: &Term, notation: Notation) -> String {
    let names = dummy_names(t);
    let mut seen: BTreeSet<u16> = BTreeSet::new();
    let mut label = |i: &Idx| -> (bool, String) {
        match i {
            Idx::Free(f) => (false, free_letter(*f)),
            Idx::Dummy(d) => {
                let upper = seen.insert(*d);
                (upper, names[d].clone())
            }
        }
    };
    let mut out = Vec::new();
    for f in &t.factors {
        let mut s = String::new();
        for i in &f.deriv {
            let (up, l) = label(i);
            match notation {
                Notation::Plain => {
                    let _ = write!(s, "D{}{} ", if up { "^" } else { "_" }, l);
                }
                Notation::Latex => {
                    let _ = write!(s, "\\nabla{}{{{}}}", if up { "^" } else { "_" }, l);
                }
            }
        }
        let base = match &f.base {
            Base::Var(v) => var_symbol(&v.name, notation),
            Base::Schouten => match notation {
                Notation::Plain => "P".into(),
                Notation::Latex => "\\mathsf{P}".into(),
            },
            Base::Metric => "g".into(),
        };
        s.push_str(&base);
        let labels: Vec<(bool, String)> = f.idx.iter().map(&mut label).collect();
        match notation {
            Notation::Plain => {
                let mut prev: Option<bool> = None;
                for (up, l) in labels {
                    if prev != Some(up) {
                        s.push(if up { '^' } else { '_' });
                    }
                    s.push_str(&l);
                    prev = Some(up);
                }
            }
            Notation::Latex => {
                let mut prev: Option<bool> = None;
                let mut open = false;
                for (up, l) in labels {
                    if prev != Some(up) {
                        if open {
                            s.push('}');
                            if prev.is_some() {
                                s.push_str("{}");
                            }
                        }
                        s.push_str(if up { "^{" } else { "_{" });
                        open = true;
                    }
                    s.push_str(&l);
                    prev = Some(up);
                }
                if open {
                    s.push('}');
                }
            }
        }
        out.push(s);
    }
    out.join(match notation {
        Notation::Plain => " ",
        Notation::Latex => "\\,",
    })
}

fn render_coeff(c: &Coeff, notation: Notation) -> (bool, String) {
    let text = c.to_string();
    if let Some(r) = c.as_rational() {
        let neg = r < num_traits::Zero::zero();
        let a = if neg { -r } else { r };
        let s = if a.is_integer() {
            a.numer().to_string()
        } else {
            match notation {
                Notation::Plain => format!("{}/{}", a.numer(), a.denom()),
                Notation::Latex => format!("\\tfrac{{{}}}{{{}}}", a.numer(), a.denom()),
            }
        };
        return (neg, s);
    }
    let neg = text.starts_with('-');
    let body = if neg { (-c).to_string() } else { text };
    (neg, format!("({body})"))
}

impl Expr {
    pub fn render(&self, notation: Notation) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, t) in self.terms.iter().enumerate() {
            let (neg, c) = render_coeff(&t.coeff, notation);
            let mono = render_monomial(t, notation);
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let unit = c == "1";
            match (unit, mono.is_empty()) {
                (true, true) => s.push('1'),
                (true, false) => s.push_str(&mono),
                (false, true) => s.push_str(&c),
                (false, false) => {
                    s.push_str(&c);
                    s.push_str(if notation == Notation::Plain { "*" } else { "\\," });
                    s.push_str(&mono);
                }
            }
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                let names = dummy_names(t);
                let lab = |i: &Idx| match i {
                    Idx::Free(f) => free_letter(*f),
                    Idx::Dummy(d) => names[d].clone(),
                };
                let factors: Vec<serde_json::Value> = t
                    .factors
                    .iter()
                    .map(|f| {
                        let base = match &f.base {
                            Base::Var(v) => v.name.to_string(),
                            Base::Schouten => "P".into(),
                            Base::Metric => "g".into(),
                        };
                        serde_json::json!({
                            "base": base,
                            "derivatives": f.deriv.iter().map(lab).collect::<Vec<_>>(),
                            "indices": f.idx.iter().map(lab).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                serde_json::json!({
                    "coefficient": t.coeff.to_string(),
                    "factors": factors,
                })
            })
            .collect();
        serde_json::json!({
            "free": self.free.iter().map(|i| match i { Idx::Free(f) => free_letter(*f), Idx::Dummy(_) => "?".into() }).collect::<Vec<_>>(),
            "terms": terms,
        })
    }
}

/// If `a = c·b` for a single coefficient `c`, returns `c`.
pub fn ratio(a: &Expr, b: &Expr) -> Option<Coeff> {
    if a.free != b.free || a.terms.len() != b.terms.len() || b.terms.is_empty() {
        return None;
    }
    let c = a.terms[0].coeff.checked_div(&b.terms[0].coeff)?;
    for (ta, tb) in a.terms.iter().zip(&b.terms) {
        if ta.factors != tb.factors || ta.coeff != &tb.coeff * &c {
            return None;
        }
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::parse;

    const A: Idx = free(0);
    const B: Idx = free(1);
    const C: Idx = free(2);
    const I: Idx = free(8);
    const J: Idx = free(9);

    fn ctx() -> Ctx {
        Ctx::new(Coeff::n(), Regime::Curved)
    }

    fn sigma1() -> Var {
        Var::new("sigma", 1, Symmetry::None)
    }

    #[test]
    fn sym_tf_expansion() {
        let c = ctx();
        let phi = Var::new("phi", 1, Symmetry::None);
        let e = c.mul(&c.var(&sigma1(), &[A]).unwrap(), &c.var(&phi, &[B]).unwrap());
        let got = c.sym_tf(&e, &[A, B]);
        // ½(σ_aφ_b+σ_bφ_a) − (1/n) σ^iφ_i g_ab
        let s_ab = e.clone();
        let s_ba = c.rename(&e, &[(A, B), (B, A)]);
        let half = c.scale(&c.add(&s_ab, &s_ba), &Coeff::frac(1, 2));
        let tr = c.mul(
            &c.mul(&c.var(&sigma1(), &[I]).unwrap(), &c.var(&phi, &[I]).unwrap()),
            &c.metric(A, B),
        );
        let want = c.sub(&half, &c.scale(&tr, &parse("1/n").unwrap()));
        assert_eq!(got, want);
        // trace-free
        assert!(c.contract(&got, A, B).is_zero());
    }

    #[test]
    fn cancellation() {
        let c = ctx();
        let e = c.nabla(&c.var(&sigma1(), &[A]).unwrap(), B);
        assert!(c.sub(&e, &e).is_zero());
    }

    #[test]
    fn dummy_relabeling_is_canonical() {
        let c = ctx();
        // ∇_a∇^iσ_i built two ways with different dummy labels
        let e1 = c.contract(&c.nabla(&c.nabla(&c.var(&sigma1(), &[B]).unwrap(), C), A), B, C);
        let e2 = c.contract(&c.nabla(&c.nabla(&c.var(&sigma1(), &[C]).unwrap(), B), A), C, B);
        assert_eq!(e1, e2);
    }

    #[test]
    fn curved_derivatives_do_not_commute_flat_do() {
        let c = ctx();
        let s = c.var(&Var::new("sigma", 0, Symmetry::None), &[]).unwrap();
        let ab = c.nabla(&c.nabla(&s, B), A);
        let ba = c.nabla(&c.nabla(&s, A), B);
        assert_ne!(ab, ba);
        let f = c.with_regime(Regime::Flat);
        assert_eq!(f.normalize(&ab), f.normalize(&ba));
    }

    #[test]
    fn alternating_contraction_vanishes_flat() {
        let c = ctx().with_regime(Regime::Flat);
        let b = Var::new("B", 2, Symmetry::Alternating);
        let e = c.nabla(&c.nabla(&c.var(&b, &[A, B]).unwrap(), C), free(3));
        let e = c.contract(&c.contract(&e, free(3), A), C, B);
        assert!(e.is_zero());
        let curved = ctx();
        let e = curved.nabla(&curved.nabla(&curved.var(&b, &[A, B]).unwrap(), C), free(3));
        let e = curved.contract(&curved.contract(&e, free(3), A), C, B);
        assert!(!e.is_zero());
    }

    #[test]
    fn alternation_sign_canonical() {
        let c = ctx();
        let b = Var::new("B", 2, Symmetry::Alternating);
        let bab = c.var(&b, &[A, B]).unwrap();
        let bba = c.var(&b, &[B, A]).unwrap();
        assert!(c.add(&bab, &bba).is_zero());
    }

    #[test]
    fn metric_trace_gives_n() {
        let c = ctx();
        let g = c.metric(A, B);
        let tr = c.contract(&g, A, B);
        assert_eq!(tr, c.constant(Coeff::n()));
    }

    #[test]
    fn tracefree_var_trace_vanishes() {
        let c = ctx();
        let a = Var::new("A", 2, Symmetry::SymTracefree);
        let e = c.var(&a, &[A, B]).unwrap();
        assert!(c.contract(&e, A, B).is_zero());
        assert_eq!(c.var(&a, &[B, A]).unwrap(), e);
    }

    #[test]
    fn substitution_applies_leibniz() {
        let c = ctx();
        let x = Var::new("X", 1, Symmetry::None);
        // ∇^i X_i with X_a := P_a^j σ_j
        let div = c.scale(
            &c.contract(&c.nabla(&c.var(&x, &[A]).unwrap(), B), A, B),
            &Coeff::int(3),
        );
        let repl = c.mul(&c.schouten(A, J), &c.var(&sigma1(), &[J]).unwrap());
        let got = c.substitute(&div, "X", &repl, &[A]).unwrap();
        let want = c.scale(&c.contract(&c.nabla(&repl, B), A, B), &Coeff::int(3));
        assert_eq!(got, want);
        assert_eq!(got.terms().len(), 2);
    }

    #[test]
    fn ratio_detects_scalar_multiple() {
        let c = ctx();
        let s = c.var(&sigma1(), &[A]).unwrap();
        let e = c.nabla(&s, B);
        assert_eq!(ratio(&c.scale(&e, &Coeff::n()), &e), Some(Coeff::n()));
        assert_eq!(ratio(&e, &c.nabla(&c.var(&sigma1(), &[B]).unwrap(), A)), None);
    }

    #[test]
    fn render_plain() {
        let c = ctx();
        let s = c.var(&sigma1(), &[B]).unwrap();
        let e = c.contract(&c.nabla(&c.nabla(&s, C), A), B, C);
        assert_eq!(e.render(Notation::Plain), "D_a D^i sigma_i");
        let p = c.scale(
            &c.mul(&c.schouten(A, I), &c.var(&sigma1(), &[I]).unwrap()),
            &Coeff::frac(-2, 3),
        );
        assert_eq!(p.render(Notation::Plain), "-2/3*sigma^i P_ai");
        assert_eq!(
            p.render(Notation::Latex),
            "-\\tfrac{2}{3}\\,\\sigma^{i}\\,\\mathsf{P}_{ai}"
        );
    }
}
