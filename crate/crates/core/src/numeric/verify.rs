//! Convergence studies for invariance, vanishing and oracle checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::symop::derive::OperatorFormula;
use crate::symop::tensor::Expr;
use crate::weights::BundleKind;

use super::eval::{Bindings, Evaluated, Evaluator};
use super::field::{Tensor, Trig};
use super::geometry::{curvature_pipeline, Geometry, MetricField};
use super::grid::{FdOrder, GridDomain};
use super::section::{random_field, GridSection, NumericCasimir};
use crate::symop::casimir::CasimirOp;

/// Residuals at which a study counts as converged regardless of slope.
pub const ABSOLUTE_FLOOR: f64 = 1e-6;

pub const DEFAULT_RESOLUTIONS: [usize; 3] = [32, 48, 64];

fn to_f64(c: &Coeff, what: &str) -> Result<f64> {
    c.as_rational()
        .map(|_| c.eval_f64(0.0, 0.0))
        .ok_or_else(|| Error::Config(format!("{what} must be concrete, got {c}")))
}

/// An expression acting on one irreducible source field, with the weight
/// bookkeeping needed for invariance checks.
#[derive(Clone, Debug)]
pub struct NumericOperator {
    pub label: String,
    pub expr: Expr,
    pub source: String,
    pub source_kind: BundleKind,
    pub w_in: f64,
    pub w_out: f64,
    pub n: f64,
    pub w: f64,
}

impl NumericOperator {
    pub fn from_formula(label: &str, f: &OperatorFormula) -> Result<NumericOperator> {
        Self::composed(label, f, f, f.body.clone())
    }

    /// `expr` built from `outer ∘ inner`; weights run from the inner source
    /// to the outer target.
    pub fn composed(
        label: &str,
        outer: &OperatorFormula,
        inner: &OperatorFormula,
        expr: Expr,
    ) -> Result<NumericOperator> {
        let n = outer
            .dim
            .value()
            .ok_or_else(|| Error::Config("numeric checks need a concrete n".into()))? as f64;
        Ok(NumericOperator {
            label: label.to_string(),
            expr,
            source: inner.source.name.to_string(),
            source_kind: inner.source.spec.kind,
            w_in: to_f64(&inner.source.spec.weight, "source weight")?,
            w_out: to_f64(&outer.target.spec.weight, "target weight")?,
            n,
            w: to_f64(&outer.w, "w")?,
        })
    }

    pub fn with_expr(&self, label: &str, expr: Expr) -> NumericOperator {
        NumericOperator {
            label: label.to_string(),
            expr,
            ..self.clone()
        }
    }

    pub fn apply(&self, geo: &Geometry, field: &Tensor) -> Result<Evaluated> {
        Evaluator::new(geo, self.n, self.w).evaluate(&self.expr, &Bindings::new().with(&self.source, field))
    }

    pub fn random_source(&self, geo: &Geometry, seed: u64) -> Result<Tensor> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_field(&mut rng, geo, self.source_kind)
    }
}

/// Residuals over a sequence of resolutions and the fitted order.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub resolutions: Vec<usize>,
    pub spacings: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted_order: f64,
}

impl ConvergenceStudy {
    pub fn run(resolutions: &[usize], mut residual: impl FnMut(usize) -> Result<f64>) -> Result<ConvergenceStudy> {
        let mut residuals = Vec::new();
        for &r in resolutions {
            residuals.push(residual(r)?);
        }
        let spacings: Vec<f64> = resolutions.iter().map(|r| std::f64::consts::TAU / *r as f64).collect();
        Ok(ConvergenceStudy {
            fitted_order: fitted_slope(&spacings, &residuals),
            resolutions: resolutions.to_vec(),
            spacings,
            residuals,
        })
    }

    pub fn finest(&self) -> f64 {
        *self.residuals.last().expect("nonempty study")
    }

    /// Converged: at the absolute floor, or decaying at order ≥ `p − 0.5`.
    pub fn converges(&self, fd: FdOrder) -> bool {
        let max = self.residuals.iter().fold(0.0_f64, |m, r| m.max(*r));
        max <= ABSOLUTE_FLOOR || self.fitted_order >= fd.order() as f64 - 0.5
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("resolution,h,residual\n");
        for ((r, h), e) in self.resolutions.iter().zip(&self.spacings).zip(&self.residuals) {
            out.push_str(&format!("{r},{h:.6e},{e:.6e}\n"));
        }
        out
    }
}

/// Least-squares slope of `log r` against `log h`.
pub fn fitted_slope(h: &[f64], r: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(r)
        .map(|(h, r)| (h.ln(), r.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let k = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Metric constructor parameterized by the grid.
pub type MetricFamily<'a> = &'a dyn Fn(GridDomain) -> MetricField;

/// `‖E(e^{2φ}g, e^{w_in φ}σ) − e^{w_out' φ} E(g, σ)‖∞ / ‖e^{w_out' φ} E(g, σ)‖∞`
/// with `w_out' = w_out + weight_offset`.
pub fn invariance_residual(
    op: &NumericOperator,
    base: &MetricField,
    phi: &Trig,
    fd: FdOrder,
    seed: u64,
    weight_offset: f64,
) -> Result<f64> {
    let d = base.domain;
    let geo = curvature_pipeline(base, fd)?;
    let hat = curvature_pipeline(&base.rescaled(phi), fd)?;
    let sigma = op.random_source(&geo, seed)?;
    let phis = phi.sample(&d);
    let scale_in: Vec<f64> = phis.iter().map(|p| (op.w_in * p).exp()).collect();
    let scale_out: Vec<f64> = phis.iter().map(|p| ((op.w_out + weight_offset) * p).exp()).collect();
    let lhs = op.apply(&hat, &sigma.times_scalar(&scale_in))?.value;
    let rhs = op.apply(&geo, &sigma)?.value.times_scalar(&scale_out);
    let norm = rhs.max_abs();
    if norm == 0.0 {
        return Err(Error::Numeric(format!(
            "{}: operator vanishes on the sample section",
            op.label
        )));
    }
    Ok(lhs.sub(&rhs).max_abs() / norm)
}

/// `‖E(g, σ)‖∞` relative to the largest single term.
pub fn vanishing_residual(op: &NumericOperator, metric: &MetricField, fd: FdOrder, seed: u64) -> Result<f64> {
    let geo = curvature_pipeline(metric, fd)?;
    let sigma = op.random_source(&geo, seed)?;
    let e = op.apply(&geo, &sigma)?;
    if e.term_scale == 0.0 {
        return Ok(0.0);
    }
    Ok(e.value.max_abs() / e.term_scale)
}

/// Largest vanishing residual over several sample sections.
pub fn vanishing_probe(op: &NumericOperator, metric: &MetricField, fd: FdOrder, seeds: &[u64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &s in seeds {
        worst = worst.max(vanishing_residual(op, metric, fd, s)?);
    }
    Ok(worst)
}

#[allow(clippy::too_many_arguments)]
pub fn invariance_study(
    op: &NumericOperator,
    metric: MetricFamily,
    active: usize,
    phi: &Trig,
    fd: FdOrder,
    resolutions: &[usize],
    seed: u64,
    weight_offset: f64,
) -> Result<ConvergenceStudy> {
    let n = op.n as usize;
    ConvergenceStudy::run(resolutions, |r| {
        let d = GridDomain::new(n, active, r)?;
        invariance_residual(op, &metric(d), phi, fd, seed, weight_offset)
    })
}

pub fn vanishing_study(
    op: &NumericOperator,
    metric: MetricFamily,
    active: usize,
    fd: FdOrder,
    resolutions: &[usize],
    seeds: &[u64],
) -> Result<ConvergenceStudy> {
    let n = op.n as usize;
    ConvergenceStudy::run(resolutions, |r| {
        let d = GridDomain::new(n, active, r)?;
        vanishing_probe(op, &metric(d), fd, seeds)
    })
}

/// Scalar source `σ` and the flat `Δ^k σ`, both analytic.
pub fn flat_power_check(
    op: &NumericOperator,
    coeff: f64,
    k: usize,
    res: usize,
    fd: FdOrder,
    sigma: &Trig,
) -> Result<f64> {
    if op.source_kind != BundleKind::Density {
        return Err(Error::ShapeMismatch(format!("{} does not act on densities", op.label)));
    }
    let n = op.n as usize;
    let d = GridDomain::new(n, 2, res)?;
    let geo = curvature_pipeline(&MetricField::flat(d), fd)?;
    let src = Tensor::scalar(sigma.sample(&d), n);
    let got = op.apply(&geo, &src)?.value;
    let mut lap = sigma.clone();
    for _ in 0..k {
        lap = lap.laplacian();
    }
    let want = Tensor::scalar(lap.sample(&d), n).scaled(coeff);
    Ok(got.sub(&want).max_abs() / want.max_abs())
}

/// Largest relative gap, over sample sections on a flat grid, between the
/// repeated numeric Casimir and the evaluated formula of `f`.
pub fn oracle_equivalence(op: &CasimirOp, f: &OperatorFormula, res: usize, fd: FdOrder, seeds: &[u64]) -> Result<f64> {
    let family = op.family();
    let layout = family.layout();
    let target_level = layout[f.target.index].level;
    let num = NumericCasimir::new(op.clone().with_max_level(target_level))?;
    let nop = NumericOperator::from_formula("oracle", f)?;
    let d = GridDomain::new(nop.n as usize, 2, res)?;
    let geo = curvature_pipeline(&MetricField::flat(d), fd)?;
    let mut worst: f64 = 0.0;
    for &seed in seeds {
        let src = nop.random_source(&geo, seed)?;
        let s = GridSection::zero(family).with_slot(f.source.index, src.clone());
        let out = num.compose(&f.factors, &geo, &s)?;
        let want = nop.apply(&geo, &src)?.value;
        let got = out.slots[f.target.index]
            .clone()
            .unwrap_or_else(|| Tensor::zeros(want.n, want.rank, want.npts));
        let norm = want.max_abs();
        if norm == 0.0 {
            return Err(Error::Numeric("formula vanishes on the sample section".into()));
        }
        worst = worst.max(got.sub(&want).max_abs() / norm);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::TractorFamily;
    use crate::symop::casimir::CasimirOp;
    use crate::symop::derive::induced_operator;
    use crate::symop::tensor::Regime;
    use crate::weights::Dim;

    fn killing(n: u32) -> NumericOperator {
        let op = CasimirOp::new(
            TractorFamily::OneFormStd,
            &Coeff::int(1),
            Dim::fixed(n).unwrap(),
            Regime::Curved,
        )
        .unwrap();
        let f = induced_operator(&op, 0, 1, None).unwrap();
        NumericOperator::from_formula("killing", &f).unwrap()
    }

    #[test]
    fn killing_weights() {
        let k = killing(4);
        assert_eq!((k.w_in, k.w_out), (2.0, 2.0));
    }

    #[test]
    fn slope_fit() {
        let h = [0.4, 0.2, 0.1];
        let r: Vec<f64> = h.iter().map(|h: &f64| 3.0 * h.powi(4)).collect();
        assert!((fitted_slope(&h, &r) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_conformal_factor_gives_zero_residual() {
        let k = killing(4);
        let d = GridDomain::new(4, 2, 16).unwrap();
        let r = invariance_residual(
            &k,
            &MetricField::perturbed(d, 0.1),
            &Trig::zero(),
            FdOrder::Four,
            1,
            0.0,
        )
        .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn killing_invariance_converges_and_control_fails() {
        let k = killing(4);
        let phi = Trig::sin(0.1, [1, 0, 0]);
        let metric = |d| MetricField::perturbed(d, 0.1);
        let good = invariance_study(&k, &metric, 2, &phi, FdOrder::Four, &[16, 24, 32], 5, 0.0).unwrap();
        assert!(good.converges(FdOrder::Four), "{good:?}");
        let bad = invariance_study(&k, &metric, 2, &phi, FdOrder::Four, &[16, 24, 32], 5, 1.0).unwrap();
        assert!(!bad.converges(FdOrder::Four), "{bad:?}");
    }
}
