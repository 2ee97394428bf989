//! Verification suites and dimension probes on finite-difference grids.

use casimir_core::bundles::TractorFamily;
use casimir_core::numeric::field::Trig;
use casimir_core::numeric::geometry::{conformally_flat_schouten, curvature_pipeline, MetricField};
use casimir_core::numeric::grid::{FdOrder, GridDomain};
use casimir_core::numeric::section::NumericCasimir;
use casimir_core::numeric::verify::{
    invariance_study, vanishing_probe, vanishing_study, ConvergenceStudy, NumericOperator,
};
use casimir_core::symop::casimir::CasimirOp;
use casimir_core::symop::derive::{
    compose, dim10_intermediate_operators, dim4_cube_obstruction_probe, dim4_square_pieces, dim6_t_operator,
    maxwell_reduction, OperatorFormula,
};
use casimir_core::symop::tensor::{Ctx, Expr, Regime};
use casimir_core::weights::Dim;
use serde_json::{json, Value};

use crate::args::{ConvergenceArgs, EigenvalueArgs, InvarianceArgs, NumericArgs, ProbeArgs, VanishingArgs};
use crate::config::{self, config_err, Failure, NumericConfig, Outcome};
use crate::report::{Claim, Report};

use super::symbolic::resolve_operator;

/// Conformal factor of the invariance suite.
fn rescaling() -> Trig {
    Trig::sin(0.1, [1, 0, 0])
}

/// `e^{2φ}δ` with `φ = ε sin x₁ cos x₂`.
fn conformally_flat(eps: f64) -> impl Fn(GridDomain) -> MetricField {
    let phi = Trig::sin_cos(eps, 0, 1);
    move |d| MetricField::conformally_flat(d, &phi)
}

fn summary(st: &ConvergenceStudy) -> String {
    let rs: Vec<String> = st
        .resolutions
        .iter()
        .zip(&st.residuals)
        .map(|(r, e)| format!("{r}: {e:.3e}"))
        .collect();
    format!("{}; fitted order {:.2}", rs.join(", "), st.fitted_order)
}

/// Collects studies for the text body, the JSON data and the CSV export.
struct Studies {
    items: Vec<(String, ConvergenceStudy)>,
}

impl Studies {
    fn new() -> Self {
        Studies { items: Vec::new() }
    }

    fn push(&mut self, r: &mut Report, label: &str, st: ConvergenceStudy) -> ConvergenceStudy {
        r.line(format!("{label}: {}", summary(&st)));
        self.items.push((label.to_string(), st.clone()));
        st
    }

    fn finish(self, r: &mut Report, args: &NumericArgs) -> Outcome<()> {
        let mut data = serde_json::Map::new();
        let mut csv = String::new();
        for (label, st) in &self.items {
            data.insert(label.clone(), serde_json::to_value(st).expect("study serializes"));
            csv.push_str(&format!("# {label}\n{}", st.csv()));
        }
        match &mut r.data {
            Value::Object(m) => {
                m.insert("studies".into(), Value::Object(data));
            }
            other => *other = json!({ "studies": data }),
        }
        if let Some(p) = &args.csv {
            std::fs::write(p, csv).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))?;
        }
        Ok(())
    }
}

fn composed(label: &str, ctx: &Ctx, outer: &OperatorFormula, inner: &OperatorFormula) -> Outcome<NumericOperator> {
    let e: Expr = compose(ctx, outer, inner)?;
    Ok(NumericOperator::composed(label, outer, inner, e)?)
}

fn numeric_report(command: &str, op: Value, cfg: &NumericConfig) -> Report {
    let mut r = Report::new(command, json!({ "operator": op, "numeric": cfg }));
    r.seed = cfg.seed;
    r
}

pub fn invariance(args: &InvarianceArgs, seed: u64) -> Outcome<Report> {
    let mut cfg = config::operator(&args.op)?;
    if cfg.regime != Regime::Curved {
        return config_err("numeric checks use the curved regime");
    }
    cfg.dim = config::concrete_dim(&args.op.family.n)?;
    let num = config::numeric(&args.numeric, seed, FdOrder::Four, 0.1)?;
    let f = resolve_operator(&cfg)?;
    let op = NumericOperator::from_formula(&format!("{} -> {}", f.source.name, f.target.name), &f)?;
    let offset = if args.wrong_weight { 1.0 } else { 0.0 };

    let mut r = numeric_report(
        "verify invariance",
        json!({"derive": cfg, "wrong_weight": args.wrong_weight}),
        &num,
    );
    r.line(format!(
        "{} on {} at n = {}, w = {}; weights {} -> {}{}",
        op.label,
        f.family,
        f.dim,
        f.w,
        op.w_in,
        op.w_out + offset,
        if args.wrong_weight {
            " (shifted output weight)"
        } else {
            ""
        }
    ));
    r.line(format!(
        "base metric: δ + ε h, ε = {}; rescaling φ = 0.1 sin x1",
        num.eps
    ));
    let base = move |d| MetricField::perturbed(d, num.eps);
    let mut studies = Studies::new();
    let st = invariance_study(
        &op,
        &base,
        num.active_axes,
        &rescaling(),
        num.fd_order,
        &num.resolutions,
        seed,
        offset,
    )?;
    let st = studies.push(&mut r, "residual", st);
    r.claims.push(Claim::check(
        "conformal-invariance",
        "the induced operator is conformally invariant between its density weights",
        st.converges(num.fd_order),
        summary(&st),
    ));
    r.data = json!({ "operator": f.to_json() });
    studies.finish(&mut r, &args.numeric)?;
    Ok(r)
}

pub fn vanishing(args: &VanishingArgs, seed: u64) -> Outcome<Report> {
    let fc = config::family_config(&args.family)?;
    let num = config::numeric(&args.numeric, seed, FdOrder::Four, 0.05)?;
    let metric = conformally_flat(num.eps);
    let seeds = [seed, seed + 1];
    let mut r = numeric_report("verify vanishing", serde_json::to_value(&fc).unwrap(), &num);
    r.line(format!(
        "conformally flat metric e^(2φ)δ, φ = {} sin x1 cos x2",
        num.eps
    ));

    let ctx = |n: u32| Ctx::new(casimir_core::coeff::Coeff::int(n as i64), Regime::Curved);
    let cases: Vec<(&str, NumericOperator, bool)> = match (fc.family, fc.dim.value()) {
        (TractorFamily::SymCube0, Some(10)) => {
            let ops = dim10_intermediate_operators(Regime::Curved)?;
            vec![
                (
                    "dim10-first-intermediate",
                    NumericOperator::from_formula("sigma -> nu", &ops.first)?,
                    true,
                ),
                (
                    "dim10-second-intermediate",
                    NumericOperator::from_formula("nu -> rho", &ops.second)?,
                    true,
                ),
            ]
        }
        (TractorFamily::SymCube0, Some(4)) => {
            let p = dim4_cube_obstruction_probe(Regime::Curved)?;
            vec![
                (
                    "dim4-cube-phi-psi1",
                    NumericOperator::composed("Φ∘Ψ1", &p.phi, &p.psi1, p.phi_psi1.clone())?,
                    true,
                ),
                (
                    "dim4-cube-psi2-phi",
                    NumericOperator::composed("Ψ2∘Φ", &p.psi2, &p.phi, p.psi2_phi.clone())?,
                    true,
                ),
            ]
        }
        (TractorFamily::SymSq0, Some(4)) => {
            let (t, d, delta) = dim4_square_pieces(Regime::Curved)?;
            vec![
                ("dim4-square-t-d", composed("T∘d", &ctx(4), &t, &d)?, true),
                ("dim4-square-delta-t", composed("δ∘T", &ctx(4), &delta, &t)?, true),
            ]
        }
        (TractorFamily::SymCube0, Some(6)) => {
            let o = dim6_t_operator(Regime::Curved)?;
            vec![
                ("dim6-t-d", composed("T∘d", &ctx(6), &o.t, &o.d)?, false),
                ("dim6-delta-t", composed("δ∘T", &ctx(6), &o.delta, &o.t)?, false),
            ]
        }
        _ => return config_err("vanishing suites exist for cube at n = 4, 6, 10 and symsq0 at n = 4"),
    };
    let mut studies = Studies::new();
    for (label, op, asserted) in cases {
        let st = vanishing_study(&op, &metric, num.active_axes, num.fd_order, &num.resolutions, &seeds)?;
        let st = studies.push(&mut r, &format!("{label} ({})", op.label), st);
        let statement = format!("{} vanishes on conformally flat metrics", op.label);
        r.claims.push(if asserted {
            Claim::check(label, &statement, st.converges(num.fd_order), summary(&st))
        } else {
            Claim::report(label, &statement, summary(&st))
        });
    }
    studies.finish(&mut r, &args.numeric)?;
    Ok(r)
}

pub fn eigenvalue(args: &EigenvalueArgs, seed: u64) -> Outcome<Report> {
    let fc = config::family_config(&args.family)?;
    let dim = config::concrete_dim(&args.family.n)?;
    let w = config::weight(&args.w, dim)?;
    let num = config::numeric(&args.numeric, seed, FdOrder::Four, 0.1)?;
    let op = CasimirOp::new(fc.family, &w, dim, Regime::Curved)?;
    let nc = NumericCasimir::new(op)?;
    let res = num.resolutions[0];
    let n = dim.value().expect("concrete") as usize;
    let geo = curvature_pipeline(
        &MetricField::perturbed(GridDomain::new(n, num.active_axes, res)?, num.eps),
        num.fd_order,
    )?;

    let mut r = numeric_report(
        "verify eigenvalue",
        json!({"family": fc.family, "n": fc.n, "w": w.to_string()}),
        &num,
    );
    r.line(format!("perturbed metric ε = {}, resolution {res}", num.eps));
    let mut levels = Vec::new();
    for level in 0..fc.family.num_levels() {
        let betas = nc.op.series.level_betas(level);
        let resid = nc.filtration_residual(&geo, level, seed + level as u64)?;
        let b: Vec<String> = betas.iter().map(|c| c.to_string()).collect();
        r.line(format!("level {level}: β = {{{}}}, residual {resid:.3e}", b.join(", ")));
        r.claims.push(Claim::check(
            &format!("graded-eigenvalue-level-{level}"),
            "the product over the level's eigenvalues maps the filtration one step down",
            resid <= 1e-10,
            format!("relative residual {resid:.3e}"),
        ));
        levels.push(json!({"level": level, "betas": b, "residual": resid}));
    }
    r.data = json!({ "levels": levels });
    Ok(r)
}

pub fn convergence(args: &ConvergenceArgs, seed: u64) -> Outcome<Report> {
    let dim = config::concrete_dim(&args.n)?;
    let num = config::numeric(&args.numeric, seed, FdOrder::Four, 0.1)?;
    let n = dim.value().expect("concrete") as usize;
    let phi = Trig::sin_cos(num.eps, 0, 1);
    let mut r = numeric_report("verify convergence", json!({"n": dim.to_string()}), &num);
    r.line(format!(
        "Schouten tensor of e^(2φ)δ, φ = {} sin x1 cos x2, against the closed form",
        num.eps
    ));
    let st = ConvergenceStudy::run(&num.resolutions, |res| {
        let d = GridDomain::new(n, num.active_axes, res)?;
        let geo = curvature_pipeline(&MetricField::conformally_flat(d, &phi), num.fd_order)?;
        let exact = conformally_flat_schouten(&d, &phi);
        Ok(geo.schouten.sub(&exact).max_abs() / exact.max_abs())
    })?;
    let mut studies = Studies::new();
    let st = studies.push(&mut r, "schouten", st);
    r.claims.push(Claim::check(
        "curvature-pipeline-order",
        "discrete Schouten tensor converges at the finite-difference order",
        st.converges(num.fd_order),
        summary(&st),
    ));
    studies.finish(&mut r, &args.numeric)?;
    Ok(r)
}

pub fn probe_dim4(args: &ProbeArgs, seed: u64) -> Outcome<Report> {
    let family = config::family(&args.family)?;
    match family {
        TractorFamily::SymCube0 => probe_dim4_cube(args, seed),
        TractorFamily::SymSq0 => probe_dim4_square(args, seed),
        _ => config_err("probe-dim4 supports --family cube or symsq0"),
    }
}

fn probe_dim4_cube(args: &ProbeArgs, seed: u64) -> Outcome<Report> {
    let num = config::numeric(&args.numeric, seed, FdOrder::Six, 0.05)?;
    let p = dim4_cube_obstruction_probe(Regime::Curved)?;
    let seeds = [seed, seed + 1];
    let mut r = numeric_report("probe-dim4", json!({"family": "cube", "n": "4", "w": "-2"}), &num);
    r.line(format!(
        "Φ: A -> B ({} terms), Ψ1: sigma -> A ({} terms), Ψ2: B -> rho ({} terms)",
        p.phi.body.terms().len(),
        p.psi1.body.terms().len(),
        p.psi2.body.terms().len()
    ));
    r.line(format!(
        "conformally flat: φ = {} sin x1 cos x2; generic: δ + ε h with ε = {}",
        num.eps, num.eps
    ));
    let cf = conformally_flat(num.eps);
    let finest = *num.resolutions.last().expect("nonempty");
    let mut studies = Studies::new();
    for (label, op) in [
        (
            "phi-psi1",
            NumericOperator::composed("Φ∘Ψ1", &p.phi, &p.psi1, p.phi_psi1.clone())?,
        ),
        (
            "psi2-phi",
            NumericOperator::composed("Ψ2∘Φ", &p.psi2, &p.phi, p.psi2_phi.clone())?,
        ),
    ] {
        let st = vanishing_study(&op, &cf, num.active_axes, num.fd_order, &num.resolutions, &seeds)?;
        let st = studies.push(&mut r, &format!("{label} conformally flat"), st);
        let generic = MetricField::perturbed(GridDomain::new(4, num.active_axes, finest)?, num.eps);
        let g = vanishing_probe(&op, &generic, num.fd_order, &seeds)?;
        let ratio = g / st.finest();
        r.line(format!("{label} generic at {finest}: {g:.3e} (ratio {ratio:.2e})"));
        r.claims.push(Claim::check(
            &format!("dim4-cube-{label}-conformally-flat"),
            &format!("{} vanishes on conformally flat metrics", op.label),
            st.converges(num.fd_order),
            summary(&st),
        ));
        r.claims.push(Claim::check(
            &format!("dim4-cube-{label}-obstruction"),
            &format!(
                "{} stays ≥ 10^3 × the conformally flat residual on a generic metric",
                op.label
            ),
            ratio >= 1e3,
            format!("generic {g:.3e}, ratio {ratio:.2e}"),
        ));
    }
    studies.finish(&mut r, &args.numeric)?;
    Ok(r)
}

fn probe_dim4_square(args: &ProbeArgs, seed: u64) -> Outcome<Report> {
    let num = config::numeric(&args.numeric, seed, FdOrder::Four, 0.05)?;
    let m = maxwell_reduction(Dim::fixed(4)?)?;
    let mut r = numeric_report("probe-dim4", json!({"family": "symsq0", "n": "4", "w": "-2"}), &num);
    let scale = m.scale.as_ref().map(|c| c.to_string());
    r.line(format!(
        "T: mu -> nu, {} terms before the commutation rewrite",
        m.raw.body.terms().len()
    ));
    r.line(format!(
        "rewritten T = {} × ∇^c∇_[a mu_c] (unit-weight bracket)",
        scale.clone().unwrap_or_else(|| "(not proportional)".into())
    ));
    r.claims.push(Claim::check(
        "dim4-square-maxwell",
        "T is a multiple of the Maxwell operator on one-forms",
        scale.is_some(),
        format!("scale {}", scale.unwrap_or_else(|| "-".into())),
    ));
    let flat = Ctx::new(casimir_core::coeff::Coeff::int(4), Regime::Flat);
    let (t, d, delta) = dim4_square_pieces(Regime::Flat)?;
    let td = compose(&flat, &t, &d)?;
    let dt = compose(&flat, &delta, &t)?;
    r.claims.push(Claim::check(
        "dim4-square-flat-compositions",
        "T∘d and δ∘T vanish identically in flat calculus",
        td.is_zero() && dt.is_zero(),
        format!("{} and {} residual terms", td.terms().len(), dt.terms().len()),
    ));

    let (t, d, delta) = dim4_square_pieces(Regime::Curved)?;
    let ctx = Ctx::new(casimir_core::coeff::Coeff::int(4), Regime::Curved);
    let cf = conformally_flat(num.eps);
    let seeds = [seed, seed + 1];
    let mut studies = Studies::new();
    for (label, op) in [
        ("t-d", composed("T∘d", &ctx, &t, &d)?),
        ("delta-t", composed("δ∘T", &ctx, &delta, &t)?),
    ] {
        let st = vanishing_study(&op, &cf, num.active_axes, num.fd_order, &num.resolutions, &seeds)?;
        let st = studies.push(&mut r, &format!("{label} conformally flat"), st);
        r.claims.push(Claim::check(
            &format!("dim4-square-{label}-conformally-flat"),
            &format!("{} vanishes on conformally flat metrics", op.label),
            st.converges(num.fd_order),
            summary(&st),
        ));
    }
    studies.finish(&mut r, &args.numeric)?;
    Ok(r)
}

pub fn probe_dim6(args: &NumericArgs, seed: u64) -> Outcome<Report> {
    let num = config::numeric(args, seed, FdOrder::Four, 0.05)?;
    let o = dim6_t_operator(Regime::Curved)?;
    let flat = dim6_t_operator(Regime::Flat)?;
    let fctx = Ctx::new(casimir_core::coeff::Coeff::int(6), Regime::Flat);
    let ctx = Ctx::new(casimir_core::coeff::Coeff::int(6), Regime::Curved);
    let mut r = numeric_report("probe-dim6", json!({"family": "cube", "n": "6", "w": "-3"}), &num);
    r.line(format!(
        "T: mu -> tau, order {}, {} terms",
        o.t.order,
        o.t.body.terms().len()
    ));
    let cf = conformally_flat(num.eps);
    let generic = move |d| MetricField::perturbed(d, num.eps);
    let seeds = [seed, seed + 1];
    let mut studies = Studies::new();
    for (label, outer, inner, fo, fi) in [
        ("t-d", &o.t, &o.d, &flat.t, &flat.d),
        ("delta-t", &o.delta, &o.t, &flat.delta, &flat.t),
    ] {
        let fl = compose(&fctx, fo, fi)?;
        let op = composed(label, &ctx, outer, inner)?;
        let a = vanishing_study(&op, &cf, num.active_axes, num.fd_order, &num.resolutions, &seeds)?;
        let a = studies.push(&mut r, &format!("{label} conformally flat"), a);
        let b = vanishing_study(&op, &generic, num.active_axes, num.fd_order, &num.resolutions, &seeds)?;
        let b = studies.push(&mut r, &format!("{label} generic"), b);
        r.claims.push(Claim::report(
            &format!("dim6-{label}"),
            "composition of T with d or δ (reported, not asserted)",
            format!(
                "flat calculus: {} terms; conformally flat: {}; generic: {}",
                fl.terms().len(),
                summary(&a),
                summary(&b)
            ),
        ));
    }
    studies.finish(&mut r, args)?;
    Ok(r)
}
