//! Grid evaluation of canonical tensor expressions.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::symop::tensor::{Base, Expr, Factor, Idx, Term};

use super::field::Tensor;
use super::geometry::Geometry;

/// Value of an expression together with the largest single-term magnitude,
/// the natural scale for cancellation residuals.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub value: Tensor,
    pub term_scale: f64,
}

/// Numeric values for the section variables of an expression. Absent
/// variables are zero.
#[derive(Clone, Debug, Default)]
pub struct Bindings<'a> {
    vars: BTreeMap<String, &'a Tensor>,
}

impl<'a> Bindings<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, t: &'a Tensor) -> Self {
        self.vars.insert(name.to_string(), t);
        self
    }

    pub fn insert(&mut self, name: &str, t: &'a Tensor) {
        self.vars.insert(name.to_string(), t);
    }

    fn get(&self, name: &str) -> Option<&'a Tensor> {
        self.vars.get(name).copied()
    }
}

type CacheKey = (String, Vec<u8>);

/// Evaluates expressions against one geometry, sharing derivative chains
/// between terms.
pub struct Evaluator<'g> {
    geo: &'g Geometry,
    n: f64,
    w: f64,
    cache: RefCell<HashMap<CacheKey, Rc<Tensor>>>,
}

/// Ordinal of each label by first appearance.
fn pattern(labels: &[Idx]) -> Vec<u8> {
    let mut seen: Vec<Idx> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|s| s == l) {
            Some(k) => k as u8,
            None => {
                seen.push(*l);
                (seen.len() - 1) as u8
            }
        })
        .collect()
}

fn open_labels(labels: &[Idx]) -> Vec<Idx> {
    labels
        .iter()
        .filter(|l| labels.iter().filter(|m| m == l).count() == 1)
        .copied()
        .collect()
}

impl<'g> Evaluator<'g> {
    /// `n` and `w` are the values substituted into coefficients.
    pub fn new(geo: &'g Geometry, n: f64, w: f64) -> Self {
        Evaluator {
            geo,
            n,
            w,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn geometry(&self) -> &Geometry {
        self.geo
    }

    fn base_tensor(&self, base: &Base, vars: &Bindings) -> Option<(String, Tensor)> {
        match base {
            Base::Var(v) => {
                let t = vars.get(&v.name)?;
                Some((format!("v:{}:{:p}", v.name, t as *const Tensor), t.clone()))
            }
            Base::Schouten => Some(("P".into(), self.geo.schouten.clone())),
            Base::Metric => Some(("g".into(), self.geo.g.clone())),
        }
    }

    fn contract_repeats(&self, mut t: Tensor, labels: &mut Vec<Idx>) -> Tensor {
        loop {
            let pair =
                (0..labels.len()).find_map(|x| (x + 1..labels.len()).find(|&y| labels[y] == labels[x]).map(|y| (x, y)));
            match pair {
                Some((x, y)) => {
                    t = self.geo.contract(&t, x, y);
                    labels.remove(y);
                    labels.remove(x);
                }
                None => return t,
            }
        }
    }

    /// The factor as a tensor over its open labels, or `None` if it involves
    /// an unbound variable.
    fn factor(&self, f: &Factor, vars: &Bindings) -> Option<(Rc<Tensor>, Vec<Idx>)> {
        let full: Vec<Idx> = f.deriv.iter().chain(&f.idx).copied().collect();
        let d = f.deriv.len();
        let base_key = match &f.base {
            Base::Var(v) => format!("v:{}:{:p}", v.name, vars.get(&v.name)? as *const Tensor),
            Base::Schouten => "P".into(),
            Base::Metric => "g".into(),
        };
        let key = |j: usize| (base_key.clone(), pattern(&full[j..]));
        let start = (0..=d).find(|&j| self.cache.borrow().contains_key(&key(j)));
        let (mut t, mut j) = match start {
            Some(j) => (self.cache.borrow()[&key(j)].clone(), j),
            None => {
                let (_, base) = self.base_tensor(&f.base, vars)?;
                let mut labels = f.idx.clone();
                let t = Rc::new(self.contract_repeats(base, &mut labels));
                self.cache.borrow_mut().insert(key(d), t.clone());
                (t, d)
            }
        };
        while j > 0 {
            j -= 1;
            let inner_open = open_labels(&full[j + 1..]);
            let mut next = self.geo.covd(&t);
            if let Some(pos) = inner_open.iter().position(|l| *l == full[j]) {
                next = self.geo.contract(&next, 0, pos + 1);
            }
            t = Rc::new(next);
            self.cache.borrow_mut().insert(key(j), t.clone());
        }
        Some((t, open_labels(&full)))
    }

    fn term(&self, term: &Term, free: &[Idx], vars: &Bindings) -> Result<Option<Tensor>> {
        let geo = self.geo;
        let (n, npts) = (geo.n(), geo.npts());
        let coeff = term.coeff.eval_f64(self.n, self.w);
        if !coeff.is_finite() {
            return Err(Error::Numeric(format!(
                "coefficient {} is singular at n = {}",
                term.coeff, self.n
            )));
        }
        let mut parts: Vec<(Rc<Tensor>, Vec<Idx>)> = Vec::new();
        for f in &term.factors {
            match self.factor(f, vars) {
                Some(p) => parts.push(p),
                None => return Ok(None),
            }
        }
        // cross-factor dummies: raise at the second occurrence
        let mut seen: Vec<Idx> = Vec::new();
        let mut dummies: Vec<Idx> = Vec::new();
        for (t, labels) in parts.iter_mut() {
            for (pos, l) in labels.iter().enumerate() {
                if free.contains(l) {
                    continue;
                }
                if seen.contains(l) {
                    *t = Rc::new(geo.raise(t, pos));
                    dummies.push(*l);
                } else {
                    seen.push(*l);
                }
            }
        }
        let vars_order: Vec<Idx> = free.iter().chain(&dummies).copied().collect();
        let nv = vars_order.len();
        let slots: Vec<Vec<usize>> = parts
            .iter()
            .map(|(_, labels)| {
                labels
                    .iter()
                    .map(|l| vars_order.iter().position(|v| v == l).expect("label bound"))
                    .collect()
            })
            .collect();
        let supports: Vec<Vec<bool>> = parts.iter().map(|(t, _)| t.support()).collect();
        let mut out = Tensor::zeros(n, free.len(), npts);
        let mut assign = vec![0usize; nv];
        let mut prod = vec![0.0; npts];
        'outer: for combo in 0..n.pow(nv as u32) {
            let mut c = combo;
            for a in assign.iter_mut().rev() {
                *a = c % n;
                c /= n;
            }
            let mut comps = Vec::with_capacity(parts.len());
            for (k, s) in slots.iter().enumerate() {
                let ci = s.iter().fold(0, |acc, &v| acc * n + assign[v]);
                if !supports[k][ci] {
                    continue 'outer;
                }
                comps.push(ci);
            }
            prod.fill(coeff);
            for ((t, _), ci) in parts.iter().zip(&comps) {
                prod.iter_mut().zip(t.comp(*ci)).for_each(|(p, v)| *p *= v);
            }
            let oc = assign[..free.len()].iter().fold(0, |acc, a| acc * n + a);
            out.comp_mut(oc).iter_mut().zip(&prod).for_each(|(o, p)| *o += p);
        }
        Ok(Some(out))
    }

    pub fn evaluate(&self, expr: &Expr, vars: &Bindings) -> Result<Evaluated> {
        let geo = self.geo;
        geo.domain.check_stencil(expr.order(), geo.fd)?;
        let free = expr.free();
        let mut value = Tensor::zeros(geo.n(), free.len(), geo.npts());
        let mut term_scale: f64 = 0.0;
        for term in expr.terms() {
            if let Some(t) = self.term(term, free, vars)? {
                term_scale = term_scale.max(t.max_abs());
                value.axpy(1.0, &t);
            }
        }
        Ok(Evaluated { value, term_scale })
    }

    /// Drops cached derivative chains (needed when bound tensors change in place).
    pub fn clear_cache(&self) {
        self.cache.borrow_mut().clear();
    }
}

/// One-shot evaluation.
pub fn evaluate_expr(expr: &Expr, geo: &Geometry, vars: &Bindings, n: f64, w: f64) -> Result<Evaluated> {
    Evaluator::new(geo, n, w).evaluate(expr, vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;
    use crate::numeric::field::Trig;
    use crate::numeric::geometry::{curvature_pipeline, MetricField};
    use crate::numeric::grid::{FdOrder, GridDomain};
    use crate::symop::tensor::{free, Ctx, Regime, Symmetry, Var};

    fn setup(n: usize, res: usize, metric: impl Fn(GridDomain) -> MetricField) -> (GridDomain, Geometry) {
        let d = GridDomain::new(n, 2, res).unwrap();
        let geo = curvature_pipeline(&metric(d), FdOrder::Six).unwrap();
        (d, geo)
    }

    #[test]
    fn identity_returns_input() {
        let (d, geo) = setup(4, 16, MetricField::flat);
        let ctx = Ctx::new(Coeff::int(4), Regime::Curved);
        let s = Var::new("s", 0, Symmetry::None);
        let e = ctx.var(&s, &[]).unwrap();
        let x = Tensor::scalar(Trig::sin_cos(1.0, 0, 1).sample(&d), 4);
        let got = evaluate_expr(&e, &geo, &Bindings::new().with("s", &x), 4.0, 0.0).unwrap();
        assert_eq!(got.value, x);
    }

    #[test]
    fn flat_laplacian_matches_analytic() {
        let (d, geo) = setup(4, 64, MetricField::flat);
        let ctx = Ctx::new(Coeff::int(4), Regime::Curved);
        let s = Var::new("s", 0, Symmetry::None);
        let x = ctx.var(&s, &[]).unwrap();
        let lap = ctx.contract(&ctx.nabla(&ctx.nabla(&x, free(0)), free(1)), free(0), free(1));
        let f = Trig::sin_cos(1.0, 0, 1);
        let v = Tensor::scalar(f.sample(&d), 4);
        let got = evaluate_expr(&lap, &geo, &Bindings::new().with("s", &v), 4.0, 0.0).unwrap();
        let want = Tensor::scalar(f.laplacian().sample(&d), 4);
        assert!(got.value.sub(&want).max_abs() < 1e-6);
    }

    #[test]
    fn schouten_trace_term() {
        let phi = Trig::sin_cos(0.1, 0, 1);
        let (_, geo) = setup(6, 32, |d| MetricField::conformally_flat(d, &phi));
        let ctx = Ctx::new(Coeff::int(6), Regime::Curved);
        let e = ctx.schouten_trace();
        let got = evaluate_expr(&e, &geo, &Bindings::new(), 6.0, 0.0).unwrap();
        let want = Tensor::scalar(geo.schouten_trace.clone(), 6);
        assert!(got.value.sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn unbound_variable_is_zero() {
        let (_, geo) = setup(4, 16, MetricField::flat);
        let ctx = Ctx::new(Coeff::int(4), Regime::Curved);
        let v = Var::new("v", 1, Symmetry::None);
        let e = ctx.nabla(&ctx.var(&v, &[free(0)]).unwrap(), free(1));
        let got = evaluate_expr(&e, &geo, &Bindings::new(), 4.0, 0.0).unwrap();
        assert_eq!(got.value.max_abs(), 0.0);
        assert_eq!(got.value.rank, 2);
    }
}
