//! Resolution of command-line arguments into validated, echoable settings.

use casimir_core::bundles::{critical_weights, TractorFamily};
use casimir_core::coeff::{parse, Coeff};
use casimir_core::error::Error as CoreError;
use casimir_core::numeric::grid::{FdOrder, MAX_ACTIVE_AXES, MIN_RESOLUTION};
use casimir_core::symop::tensor::Regime;
use casimir_core::weights::Dim;
use serde::Serialize;

use crate::args::{DeriveArgs, FamilyArgs, NumericArgs, RegimeArg, Variant};

/// Why a run stopped before producing a verdict.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or values (exit 2).
    Config(String),
    /// The symbolic or numeric machinery refused (exit 3).
    Derivation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Derivation(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Derivation(m) => m,
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_)
            | CoreError::InvalidDimension(_)
            | CoreError::InvalidBundle(_)
            | CoreError::UnknownSlot(_) => Failure::Config(e.to_string()),
            _ => Failure::Derivation(e.to_string()),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

pub fn config_err<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Config(msg.into()))
}

pub fn family(s: &str) -> Outcome<TractorFamily> {
    Ok(s.parse::<TractorFamily>()?)
}

pub fn dim(s: &str) -> Outcome<Dim> {
    if s == "sym" {
        return Ok(Dim::Symbolic);
    }
    let n: u32 = s
        .parse()
        .map_err(|_| Failure::Config(format!("--n must be an integer or `sym`, got `{s}`")))?;
    Ok(Dim::fixed(n)?)
}

pub fn concrete_dim(s: &str) -> Outcome<Dim> {
    let d = dim(s)?;
    if d.value().is_none() {
        return config_err("numeric checks need a concrete --n");
    }
    Ok(d)
}

/// `sym` or an expression in `n`, specialized to the dimension.
pub fn weight(s: &str, dim: Dim) -> Outcome<Coeff> {
    if s == "sym" {
        return Ok(Coeff::w());
    }
    let c = parse(s).map_err(|e| Failure::Config(format!("cannot parse weight `{s}`: {e}")))?;
    if !c.is_w_free() {
        return config_err(format!("weight `{s}` may depend on n only"));
    }
    let c = dim.specialize(&c);
    if !c.is_w_free() || (dim.value().is_some() && c.as_rational().is_none()) {
        return config_err(format!("weight `{s}` is not a number at n = {dim}"));
    }
    Ok(c)
}

pub fn coeff(s: &str, dim: Dim) -> Outcome<Coeff> {
    let c = parse(s).map_err(|e| Failure::Config(format!("cannot parse `{s}`: {e}")))?;
    Ok(dim.specialize(&c))
}

pub fn slot(f: TractorFamily, name: &str) -> Outcome<usize> {
    match name {
        "top" => Ok(f.top()),
        "bottom" => Ok(f.bottom()),
        _ => Ok(f.slot_index(name)?),
    }
}

/// Settings of one operator derivation, echoed into reports.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorConfig {
    pub family: TractorFamily,
    pub n: String,
    pub w: String,
    pub source: Option<String>,
    pub target: Option<String>,
    pub variant: Option<String>,
    pub factors: Option<Vec<String>>,
    pub regime: Regime,
    #[serde(skip)]
    pub dim: Dim,
    #[serde(skip)]
    pub weight: Coeff,
    #[serde(skip)]
    pub factor_coeffs: Option<Vec<Coeff>>,
}

fn regime(r: RegimeArg) -> Regime {
    match r {
        RegimeArg::Curved => Regime::Curved,
        RegimeArg::Flat => Regime::Flat,
    }
}

/// The weight at which the top eigenvalue meets the bottom one, if any.
fn bottom_critical_weight(f: TractorFamily, dim: Dim) -> Outcome<Coeff> {
    let bottom = f.layout()[f.bottom()].name;
    critical_weights(f, dim)?
        .into_iter()
        .find(|c| c.slots.contains(&bottom))
        .map(|c| c.value)
        .ok_or_else(|| Failure::Config(format!("{f} has no weight with a top/bottom coincidence; pass --w")))
}

pub fn operator(args: &DeriveArgs) -> Outcome<OperatorConfig> {
    let family = family(&args.family.family)?;
    let dim = dim(&args.family.n)?;
    let weight = match (&args.weight.w, &args.weight.w_top) {
        (Some(w), _) => weight(w, dim)?,
        (None, Some(top)) => {
            let shift = Coeff::int(family.layout()[family.top()].shift);
            &weight(top, dim)? - &shift
        }
        (None, None) => bottom_critical_weight(family, dim)?,
    };
    let mut factors = match &args.factors {
        Some(fs) => Some(fs.iter().map(|s| coeff(s, dim)).collect::<Outcome<Vec<_>>>()?),
        None => None,
    };
    if let Some(Variant::Dim4) = args.variant {
        if family != TractorFamily::SymSq0 || dim.value() != Some(4) {
            return config_err("--variant dim4 needs --family symsq0 --n 4");
        }
        if factors.is_some() {
            return config_err("--variant and --factors are exclusive");
        }
        let series = casimir_core::bundles::composition_series(family, &weight, dim)?;
        let b = |name: &str| -> Outcome<Coeff> { Ok(series.beta(family.slot_index(name)?).clone()) };
        factors = Some(vec![b("rho")?, b("rho")?, b("A")?, b("alpha")?]);
    }
    Ok(OperatorConfig {
        family,
        n: dim.to_string(),
        w: weight.to_string(),
        source: args.source.clone(),
        target: args.target.clone(),
        variant: args.variant.map(|_| "dim4".to_string()),
        factors: factors.as_ref().map(|v| v.iter().map(|c| c.to_string()).collect()),
        regime: match (args.regime, args.variant) {
            (Some(r), _) => regime(r),
            (None, Some(Variant::Dim4)) => Regime::Flat,
            (None, None) => Regime::Curved,
        },
        dim,
        weight,
        factor_coeffs: factors,
    })
}

/// Numeric settings, echoed into reports.
#[derive(Clone, Debug, Serialize)]
pub struct NumericConfig {
    pub resolutions: Vec<usize>,
    pub fd_order: FdOrder,
    pub eps: f64,
    pub active_axes: usize,
    pub seed: u64,
}

pub fn numeric(args: &NumericArgs, seed: u64, default_fd: FdOrder, default_eps: f64) -> Outcome<NumericConfig> {
    let fd = match &args.fd_order {
        Some(s) => s.parse::<FdOrder>()?,
        None => default_fd,
    };
    if args.resolutions.len() < 2 {
        return config_err("a convergence study needs at least two resolutions");
    }
    if let Some(r) = args.resolutions.iter().find(|r| **r < MIN_RESOLUTION) {
        return config_err(format!("resolution {r} is below the minimum {MIN_RESOLUTION}"));
    }
    if args.resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return config_err("resolutions must be strictly increasing");
    }
    if !(1..=MAX_ACTIVE_AXES).contains(&args.active_axes) {
        return config_err(format!("--active-axes must lie in 1..={MAX_ACTIVE_AXES}"));
    }
    let eps = args.eps.unwrap_or(default_eps);
    if !eps.is_finite() || eps < 0.0 {
        return config_err("--eps must be a finite nonnegative number");
    }
    Ok(NumericConfig {
        resolutions: args.resolutions.clone(),
        fd_order: fd,
        eps,
        active_axes: args.active_axes,
        seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyConfig {
    pub family: TractorFamily,
    pub n: String,
    #[serde(skip)]
    pub dim: Dim,
}

pub fn family_config(args: &FamilyArgs) -> Outcome<FamilyConfig> {
    let f = family(&args.family)?;
    let d = dim(&args.n)?;
    Ok(FamilyConfig {
        family: f,
        n: d.to_string(),
        dim: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_parse_and_specialize() {
        let d = Dim::fixed(6).unwrap();
        assert_eq!(weight("1-n/2", d).unwrap(), Coeff::int(-2));
        assert_eq!(weight("sym", Dim::Symbolic).unwrap(), Coeff::w());
        assert!(matches!(weight("w+1", d), Err(Failure::Config(_))));
        assert!(matches!(weight("1+", d), Err(Failure::Config(_))));
    }

    #[test]
    fn dims() {
        assert_eq!(dim("sym").unwrap(), Dim::Symbolic);
        assert_eq!(dim("10").unwrap().value(), Some(10));
        assert!(matches!(dim("five"), Err(Failure::Config(_))));
        assert!(matches!(concrete_dim("sym"), Err(Failure::Config(_))));
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        let c: Failure = CoreError::UnknownSlot("x".into()).into();
        assert_eq!(c.exit_code(), 2);
        let d: Failure = CoreError::NotWellDefined {
            residual: vec!["A".into()],
        }
        .into();
        assert_eq!(d.exit_code(), 3);
    }

    #[test]
    fn critical_default_weight() {
        let w = bottom_critical_weight(TractorFamily::OneFormStd, Dim::Symbolic).unwrap();
        assert_eq!(w, parse("1-n/2").unwrap());
        let w = bottom_critical_weight(TractorFamily::SymCube0, Dim::fixed(6).unwrap()).unwrap();
        assert_eq!(w, Coeff::int(-3));
    }
}
