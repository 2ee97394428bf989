//! Tables, critical weights, derivations and principal parts.

use std::fmt::Write as _;

use casimir_core::bundles::{
    coincidence_report, composition_series, critical_weights, eigenvalue_differences, TractorFamily,
};
use casimir_core::coeff::{Coeff, Poly};
use casimir_core::symop::casimir::CasimirOp;
use casimir_core::symop::derive::{induced_operator, laplacian_power, principal_part, Classification, OperatorFormula};
use casimir_core::symop::tensor::{ratio, Ctx, Notation, Regime};
use casimir_core::weights::Dim;
use serde_json::json;

use crate::args::{DeriveArgs, FamilyArgs, TableArgs};
use crate::config::{self, config_err, OperatorConfig, Outcome};
use crate::report::{coeff_latex, slot_latex, Claim, Report};

pub fn table(args: &TableArgs) -> Outcome<Report> {
    let fc = config::family_config(&args.family)?;
    let w = config::weight(&args.w, fc.dim)?;
    let series = composition_series(fc.family, &w, fc.dim)?;
    let diffs = eigenvalue_differences(&series);
    let groups = coincidence_report(fc.family, &w, fc.dim)?;

    let mut r = Report::new("table", json!({"family": fc.family, "n": fc.n, "w": w.to_string()}));
    r.line(format!("{} at n = {}, w = {}", fc.family.notation(), fc.dim, w));
    r.line(format!(
        "{:<6} {:<6} {:<18} {:<28} {}",
        "level", "slot", "bundle", "beta", "beta0 - beta"
    ));
    for (e, d) in series.slots.iter().zip(&diffs) {
        r.line(format!(
            "{:<6} {:<6} {:<18} {:<28} {}",
            e.slot.level,
            e.slot.name,
            e.slot.spec.label(),
            e.beta.to_string(),
            d
        ));
    }
    r.line("");
    r.line("eigenvalue groups:");
    for g in &groups.groups {
        r.line(format!("  {}: {}", g.beta, g.slots.join(", ")));
    }
    r.line(format!("top group: {}", groups.top_group.join(", ")));

    let mut tex = String::from("\\begin{tabular}{llll}\nlevel & slot & $\\beta$ & $\\beta_0-\\beta$ \\\\\n\\hline\n");
    for (e, d) in series.slots.iter().zip(&diffs) {
        let _ = writeln!(
            tex,
            "{} & ${}$ & ${}$ & ${}$ \\\\",
            e.slot.level,
            slot_latex(e.slot.name),
            coeff_latex(&e.beta.to_string()),
            coeff_latex(&d.to_string())
        );
    }
    tex.push_str("\\end{tabular}\n");
    r.latex = Some(tex);

    r.claims.push(Claim::report(
        "casimir-eigenvalue-table",
        "eigenvalue of the Casimir on each composition factor",
        format!(
            "{} slots, {} distinct eigenvalues",
            series.slots.len(),
            groups.groups.len()
        ),
    ));
    r.data = json!({"series": series.to_json(), "coincidences": groups});
    Ok(r)
}

pub fn critical(args: &FamilyArgs) -> Outcome<Report> {
    let fc = config::family_config(args)?;
    let crit = critical_weights(fc.family, fc.dim)?;
    let mut r = Report::new("critical", &fc);
    r.line(format!(
        "{} at n = {}: weights where the top eigenvalue meets a lower one",
        fc.family.notation(),
        fc.dim
    ));
    let mut tex = String::from("\\begin{tabular}{ll}\n$w$ & slots \\\\\n\\hline\n");
    for c in &crit {
        r.line(format!("  w = {:<14} {}", c.w, c.slots.join(", ")));
        let slots: Vec<String> = c.slots.iter().map(|s| format!("${}$", slot_latex(s))).collect();
        let _ = writeln!(tex, "${}$ & {} \\\\", coeff_latex(&c.w), slots.join(", "));
    }
    tex.push_str("\\end{tabular}\n");
    r.latex = Some(tex);
    r.claims.push(Claim::report(
        "critical-weights",
        "roots in w of the eigenvalue differences",
        format!("{} critical weights", crit.len()),
    ));
    r.data = json!({ "critical": crit });
    Ok(r)
}

/// Deepest slot below `source` sharing its eigenvalue.
fn coincident_target(op: &CasimirOp, source: usize) -> Option<usize> {
    let layout = op.family().layout();
    let beta = op.series.beta(source);
    (0..layout.len())
        .rev()
        .find(|&k| layout[k].level > layout[source].level && op.series.beta(k) == beta)
}

pub fn resolve_operator(cfg: &OperatorConfig) -> Outcome<OperatorFormula> {
    let f = cfg.family;
    let op = CasimirOp::new(f, &cfg.weight, cfg.dim, cfg.regime)?;
    let source = match &cfg.source {
        Some(s) => config::slot(f, s)?,
        None => f.top(),
    };
    let target = match (&cfg.target, &cfg.variant) {
        (Some(t), _) => config::slot(f, t)?,
        (None, Some(_)) => f.bottom(),
        (None, None) => match coincident_target(&op, source) {
            Some(t) => t,
            None => {
                return config_err(format!(
                    "no slot below {} shares its eigenvalue at w = {}; pass --target",
                    f.layout()[source].name,
                    cfg.weight
                ))
            }
        },
    };
    Ok(induced_operator(&op, source, target, cfg.factor_coeffs.as_deref())?)
}

/// Number of filtration levels crossed, the generic order.
fn expected_order(f: &OperatorFormula) -> usize {
    let layout = f.family.layout();
    layout[f.target.index].level - layout[f.source.index].level
}

pub fn classify(f: &OperatorFormula) -> String {
    match f.classification {
        Classification::Zero => "zero operator".into(),
        Classification::Splitting => "splitting operator".into(),
        Classification::Invariant => {
            let pp = principal_part(f);
            let k = expected_order(f);
            if pp.is_zero() || pp.order() < k {
                let mut s = String::from("zero leading coefficient");
                match (f.family, f.dim.value()) {
                    (TractorFamily::SymCube0, Some(4)) => s += "; obstruction probe available (probe-dim4)",
                    (TractorFamily::SymCube0, Some(6)) => s += "; see probe-dim6",
                    _ => {}
                }
                s
            } else {
                format!("invariant operator of order {k}")
            }
        }
    }
}

pub fn derive(args: &DeriveArgs) -> Outcome<Report> {
    let cfg = config::operator(args)?;
    let f = resolve_operator(&cfg)?;
    let class = classify(&f);
    let mut r = Report::new("derive", &cfg);
    r.line(format!(
        "{} -> {} ({} -> {}), n = {}, w = {}",
        f.source.name,
        f.target.name,
        f.source.spec.label(),
        f.target.spec.label(),
        f.dim,
        f.w
    ));
    r.line(format!(
        "factors: {}",
        f.factors
            .iter()
            .map(|c| format!("(C - ({c}))"))
            .collect::<Vec<_>>()
            .join(" ")
    ));
    r.line(format!("order: {}", f.order));
    r.line(format!("classification: {class}"));
    r.line(format!("terms: {}", f.body.terms().len()));
    if cfg.variant.is_some() && cfg.regime == Regime::Flat {
        r.line("note: on curved metrics the middle compositions T∘d and δ∘T vanish only after curvature");
        r.line("      commutation; `probe-dim4 --family symsq0` checks them numerically");
    }
    r.line("");
    r.line(f.body.render(Notation::Plain));
    r.latex = Some(format!("{}\n", f.body.render(Notation::Latex)));
    r.claims.push(Claim::report(
        "induced-operator",
        "operator induced by a product of shifted Casimirs",
        class,
    ));
    r.data = f.to_json();
    Ok(r)
}

/// Common factor of a set of polynomials in `n`.
fn content(ps: impl Iterator<Item = Poly>) -> Poly {
    ps.fold(Poly::zero(), |g, p| if g.is_zero() { p.monic() } else { g.gcd(&p) })
}

pub fn principal(args: &DeriveArgs) -> Outcome<Report> {
    let mut cfg = config::operator(args)?;
    cfg.regime = Regime::Flat;
    let f = resolve_operator(&cfg)?;
    let pp = principal_part(&f);
    let mut r = Report::new("principal", &cfg);
    r.line(format!(
        "flat principal part of {} -> {} at n = {}, w = {}:",
        f.source.name, f.target.name, f.dim, f.w
    ));
    r.line(format!("  {}", pp.render(Notation::Plain)));

    let flat = Ctx::new(f.dim.as_coeff(), Regime::Flat);
    let k = expected_order(&f);
    let mut data = json!({
        "operator": f.to_json(),
        "principal_part": pp.render(Notation::Plain),
        "principal_part_latex": pp.render(Notation::Latex),
        "order": pp.order(),
    });
    let mut detail = Vec::new();
    if f.source.spec.kind.rank() == 0 && k.is_multiple_of(2) && !pp.is_zero() {
        let x = flat.var(&f.source_var(), &[])?;
        if let Some(c) = ratio(&pp, &flat.normalize(&laplacian_power(&flat, &x, k / 2))) {
            r.line(format!("  = ({c}) Δ^{} {}", k / 2, f.source.name));
            detail.push(format!("({c})·Δ^{}", k / 2));
            data["laplacian_power"] = json!({"power": k / 2, "coefficient": c.to_string()});
        }
    }
    if f.dim == Dim::Symbolic && !pp.is_zero() {
        let polys: Option<Vec<Poly>> = pp
            .terms()
            .iter()
            .map(|t| t.coeff.as_ratfn().map(|q| q.num().clone()))
            .collect();
        if let Some(polys) = polys {
            let g = content(polys.into_iter());
            let roots: Vec<String> = g.rational_roots().iter().map(|x| x.to_string()).collect();
            r.line(format!(
                "  common factor {}; vanishes at n ∈ {{{}}}",
                Coeff::from_poly_n(g.clone()),
                roots.join(", ")
            ));
            detail.push(format!(
                "common factor {}, degenerate at n ∈ {{{}}}",
                Coeff::from_poly_n(g),
                roots.join(", ")
            ));
            data["degenerate_dimensions"] = json!(roots);
        }
    }
    if pp.is_zero() || pp.order() < k {
        detail.push("leading coefficient vanishes".into());
    }
    r.latex = Some(format!("{}\n", pp.render(Notation::Latex)));
    r.claims.push(Claim::report(
        "principal-part",
        "leading symbol in flat calculus",
        detail.join("; "),
    ));
    r.data = data;
    Ok(r)
}
