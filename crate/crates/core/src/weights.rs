//! Weights of `so(2m+2, C)` in the `(a1 | a2, ..., a_{m+1})` notation and the
//! Casimir scalars `<λ, λ + 2ρ>` of irreducible conformal bundles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeff::Coeff;
use crate::error::{Error, Result};

/// Largest even dimension accepted.
pub const MAX_DIM: u32 = 64;

/// The dimension `n = 2m`, either a fixed even integer or the symbol `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    Fixed(u32),
    Symbolic,
}

impl Dim {
    pub fn fixed(n: u32) -> Result<Dim> {
        if n < 4 || !n.is_multiple_of(2) || n > MAX_DIM {
            return Err(Error::InvalidDimension(format!(
                "n = {n}; expected an even integer with 4 <= n <= {MAX_DIM}"
            )));
        }
        Ok(Dim::Fixed(n))
    }

    pub fn as_coeff(&self) -> Coeff {
        match self {
            Dim::Fixed(n) => Coeff::int(*n as i64),
            Dim::Symbolic => Coeff::n(),
        }
    }

    pub fn value(&self) -> Option<u32> {
        match self {
            Dim::Fixed(n) => Some(*n),
            Dim::Symbolic => None,
        }
    }

    pub fn is_four(&self) -> bool {
        *self == Dim::Fixed(4)
    }

    /// Substitutes the dimension into a coefficient when it is fixed.
    pub fn specialize(&self, c: &Coeff) -> Coeff {
        match self {
            Dim::Fixed(n) => c
                .subs_n(&crate::coeff::int(*n as i64))
                .expect("coefficients in scope have no pole at an even n >= 4"),
            Dim::Symbolic => c.clone(),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Fixed(n) => write!(f, "{n}"),
            Dim::Symbolic => f.write_str("n"),
        }
    }
}

/// A weight `(a1 | a2, ..., a_{m+1})`.
///
/// For a fixed dimension all `m + 1` entries are stored. For the symbolic
/// dimension only a leading block is stored and the remaining entries are
/// zero; every bundle in scope has at most three nonzero entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    entries: Vec<Coeff>,
    dim: Dim,
}

impl Weight {
    pub fn new(entries: Vec<Coeff>, dim: Dim) -> Result<Weight> {
        if let Dim::Fixed(n) = dim {
            let len = (n / 2 + 1) as usize;
            if entries.len() != len {
                return Err(Error::LengthMismatch {
                    left: entries.len(),
                    right: len,
                });
            }
        }
        Ok(Weight { entries, dim })
    }

    fn padded(entries: Vec<Coeff>, dim: Dim) -> Weight {
        let mut entries = entries;
        if let Dim::Fixed(n) = dim {
            entries.resize((n / 2 + 1) as usize, Coeff::zero());
        }
        Weight { entries, dim }
    }

    pub fn entries(&self) -> &[Coeff] {
        &self.entries
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    fn entry(&self, i: usize) -> Coeff {
        self.entries.get(i).cloned().unwrap_or_default()
    }

    /// Entry `i` of `ρ` (0-based), i.e. `m - i`.
    fn rho_entry(dim: Dim, i: usize) -> Coeff {
        let m = &dim.as_coeff() * &Coeff::frac(1, 2);
        &m - &Coeff::int(i as i64)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}|", self.entry(0))?;
        let rest: Vec<String> = self.entries.iter().skip(1).map(|e| e.to_string()).collect();
        f.write_str(&rest.join(","))?;
        if self.dim == Dim::Symbolic {
            f.write_str(",0,…")?;
        }
        f.write_str(")")
    }
}

/// Half the sum of the positive roots, `(m, m-1, ..., 1, 0)`.
pub fn rho(m: u32) -> Result<Weight> {
    if m < 2 {
        return Err(Error::InvalidDimension(format!(
            "m = {m}; dimensions below four are not supported"
        )));
    }
    let dim = Dim::fixed(2 * m)?;
    let entries = (0..=m).rev().map(|k| Coeff::int(k as i64)).collect();
    Weight::new(entries, dim)
}

/// Standard dot product of two weights.
pub fn inner(lhs: &Weight, rhs: &Weight) -> Result<Coeff> {
    if lhs.dim != rhs.dim || (lhs.dim != Dim::Symbolic && lhs.entries.len() != rhs.entries.len()) {
        return Err(Error::LengthMismatch {
            left: lhs.entries.len(),
            right: rhs.entries.len(),
        });
    }
    let len = lhs.entries.len().max(rhs.entries.len());
    let mut acc = Coeff::zero();
    for i in 0..len {
        acc = &acc + &(&lhs.entry(i) * &rhs.entry(i));
    }
    Ok(acc)
}

/// `<λ, λ + 2ρ>` with `ρ` for the dimension carried by `lambda`.
pub fn casimir_eigenvalue(lambda: &Weight) -> Coeff {
    let mut acc = Coeff::zero();
    for (i, a) in lambda.entries.iter().enumerate() {
        let r = Weight::rho_entry(lambda.dim, i);
        let shifted = a + &(&Coeff::int(2) * &r);
        acc = &acc + &(a * &shifted);
    }
    acc
}

/// Casimir eigenvalue with an explicit `m`, checking the length of `lambda`.
pub fn casimir_eigenvalue_m(lambda: &Weight, m: u32) -> Result<Coeff> {
    let expected = (m + 1) as usize;
    if lambda.entries.len() != expected || lambda.dim != Dim::Fixed(2 * m) {
        return Err(Error::LengthMismatch {
            left: lambda.entries.len(),
            right: expected,
        });
    }
    let r = rho(m)?;
    let two_rho: Vec<Coeff> = r.entries.iter().map(|e| e * &Coeff::int(2)).collect();
    let shifted = Weight::new(
        lambda.entries.iter().zip(&two_rho).map(|(a, b)| a + b).collect(),
        lambda.dim,
    )?;
    inner(lambda, &shifted)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleKind {
    Density,
    SymTracefree(u8),
    TwoForm,
    TwoFormSelfDual,
    TwoFormAntiSelfDual,
}

impl BundleKind {
    /// Tensor rank of the bundle (number of abstract indices).
    pub fn rank(&self) -> usize {
        match self {
            BundleKind::Density => 0,
            BundleKind::SymTracefree(k) => *k as usize,
            _ => 2,
        }
    }
}

/// An irreducible bundle together with its total conformal weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IrreducibleBundleSpec {
    pub kind: BundleKind,
    pub weight: Coeff,
}

impl IrreducibleBundleSpec {
    pub fn new(kind: BundleKind, weight: Coeff) -> Self {
        IrreducibleBundleSpec { kind, weight }
    }

    pub fn density(weight: Coeff) -> Self {
        Self::new(BundleKind::Density, weight)
    }

    pub fn sym(k: u8, weight: Coeff) -> Self {
        Self::new(BundleKind::SymTracefree(k), weight)
    }

    pub fn two_form(weight: Coeff) -> Self {
        Self::new(BundleKind::TwoForm, weight)
    }

    pub fn validate(&self, dim: Dim) -> Result<()> {
        match self.kind {
            BundleKind::SymTracefree(k) if !(1..=3).contains(&k) => {
                Err(Error::InvalidBundle(format!("symmetric rank {k} outside 1..=3")))
            }
            BundleKind::TwoFormSelfDual | BundleKind::TwoFormAntiSelfDual if !dim.is_four() => {
                Err(Error::InvalidBundle(format!(
                    "(anti-)self-dual two-forms exist only in dimension 4, not {dim}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Bundle notation such as `E_{(ab)0}[w+1]`.
    pub fn label(&self) -> String {
        let base = match self.kind {
            BundleKind::Density => "E".to_string(),
            BundleKind::SymTracefree(1) => "E_a".to_string(),
            BundleKind::SymTracefree(2) => "E_(ab)0".to_string(),
            BundleKind::SymTracefree(k) => format!("E_(abc)0{}", if k == 3 { "" } else { "?" }),
            BundleKind::TwoForm => "E_[ab]".to_string(),
            BundleKind::TwoFormSelfDual => "E_[ab]+".to_string(),
            BundleKind::TwoFormAntiSelfDual => "E_[ab]-".to_string(),
        };
        format!("{base}[{}]", self.weight)
    }
}

/// The lowest weight attached to an irreducible bundle.
pub fn bundle_to_weight(spec: &IrreducibleBundleSpec, dim: Dim) -> Result<Weight> {
    spec.validate(dim)?;
    let w = spec.weight.clone();
    let entries = match spec.kind {
        BundleKind::Density => vec![w],
        BundleKind::SymTracefree(k) => {
            let k = Coeff::int(k as i64);
            vec![&w - &k, k]
        }
        BundleKind::TwoForm | BundleKind::TwoFormSelfDual => {
            vec![&w - &Coeff::int(2), Coeff::one(), Coeff::one()]
        }
        BundleKind::TwoFormAntiSelfDual => vec![&w - &Coeff::int(2), Coeff::one(), Coeff::int(-1)],
    };
    Ok(Weight::padded(entries, dim))
}

/// `β_W` for an irreducible bundle.
pub fn bundle_casimir(spec: &IrreducibleBundleSpec, dim: Dim) -> Result<Coeff> {
    Ok(casimir_eigenvalue(&bundle_to_weight(spec, dim)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::parse;

    fn c(s: &str) -> Coeff {
        parse(s).unwrap()
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho(3).unwrap().to_string(), "(3|2,1,0)");
        assert_eq!(rho(2).unwrap().to_string(), "(2|1,0)");
        assert_eq!(rho(5).unwrap().to_string(), "(5|4,3,2,1,0)");
        assert!(rho(1).is_err());
    }

    #[test]
    fn inner_products() {
        let d4 = Dim::fixed(4).unwrap();
        let z = Weight::new(vec![Coeff::zero(); 3], d4).unwrap();
        assert_eq!(inner(&z, &z).unwrap(), Coeff::zero());
        let d6 = Dim::fixed(6).unwrap();
        let e1 = Weight::new(vec![c("1"), c("0"), c("0"), c("0")], d6).unwrap();
        assert_eq!(inner(&e1, &rho(3).unwrap()).unwrap(), c("3"));
        assert!(inner(&z, &e1).is_err());
    }

    #[test]
    fn sym_tracefree_formula_symbolic() {
        // (w-k)(w+2m-k)+k(2m+k-2) with 2m = n
        for k in 1..=3i64 {
            let spec = IrreducibleBundleSpec::sym(k as u8, Coeff::w());
            let got = bundle_casimir(&spec, Dim::Symbolic).unwrap();
            let kk = Coeff::int(k);
            let w = Coeff::w();
            let n = Coeff::n();
            let want = &(&(&w - &kk) * &(&(&w + &n) - &kk)) + &(&kk * &(&(&n + &kk) - &Coeff::int(2)));
            assert_eq!(got, want, "k = {k}");
        }
    }

    #[test]
    fn named_examples() {
        let n = Dim::Symbolic;
        let e = IrreducibleBundleSpec::density(Coeff::w());
        assert_eq!(bundle_casimir(&e, n).unwrap(), c("w*(w+n)"));
        let ea = IrreducibleBundleSpec::sym(1, Coeff::zero());
        assert_eq!(bundle_to_weight(&ea, n).unwrap().entries(), &[c("-1"), c("1")]);
        let two = IrreducibleBundleSpec::two_form(c("w+1"));
        assert_eq!(bundle_casimir(&two, n).unwrap(), c("w*(w+n) - 2w + n - 3"));
        let cube = IrreducibleBundleSpec::sym(3, Coeff::w());
        assert_eq!(bundle_casimir(&cube, n).unwrap(), c("(w-3)*(w+n-3) + 3*(n+1)"));
        assert_eq!(
            bundle_casimir(&IrreducibleBundleSpec::density(Coeff::zero()), Dim::fixed(6).unwrap()).unwrap(),
            Coeff::zero()
        );
    }

    #[test]
    fn selfdual_only_in_four() {
        let sd = IrreducibleBundleSpec::new(BundleKind::TwoFormSelfDual, Coeff::w());
        assert!(bundle_to_weight(&sd, Dim::fixed(6).unwrap()).is_err());
        assert!(bundle_to_weight(&sd, Dim::Symbolic).is_err());
        let d4 = Dim::fixed(4).unwrap();
        let asd = IrreducibleBundleSpec::new(BundleKind::TwoFormAntiSelfDual, Coeff::w());
        let tf = IrreducibleBundleSpec::two_form(Coeff::w());
        let b = bundle_casimir(&sd, d4).unwrap();
        assert_eq!(b, bundle_casimir(&asd, d4).unwrap());
        assert_eq!(b, bundle_casimir(&tf, d4).unwrap());
    }

    #[test]
    fn dimension_guard() {
        assert!(Dim::fixed(5).is_err());
        assert!(Dim::fixed(2).is_err());
        assert!(Dim::fixed(66).is_err());
        assert!(Dim::fixed(64).is_ok());
    }

    #[test]
    fn explicit_m_matches_dense_route() {
        for m in 2..=6u32 {
            let d = Dim::fixed(2 * m).unwrap();
            let spec = IrreducibleBundleSpec::sym(2, c("w+3"));
            let lam = bundle_to_weight(&spec, d).unwrap();
            assert_eq!(casimir_eigenvalue_m(&lam, m).unwrap(), casimir_eigenvalue(&lam));
            assert!(casimir_eigenvalue_m(&lam, m + 1).is_err());
        }
    }
}
