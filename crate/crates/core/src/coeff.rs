//! Exact coefficients: polynomials in the weight `w` whose coefficients are
//! rational functions of the dimension `n`, i.e. elements of `Q(n)[w]`.
//!
//! Every coefficient that shows up in an eigenvalue table, an action table or
//! a derived operator formula lives in this ring, so equality of formulas is
//! decided exactly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Univariate polynomial in `n` with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn constant(v: Rational) -> Self {
        let mut p = Poly { c: vec![v] };
        p.trim();
        p
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The indeterminate `n`.
    pub fn var() -> Self {
        Poly {
            c: vec![Rational::zero(), Rational::one()],
        }
    }

    pub fn from_coeffs(c: Vec<Rational>) -> Self {
        let mut p = Poly { c };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.c.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.c.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.c[0].clone()),
            _ => None,
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for coef in self.c.iter().rev() {
            acc = acc * x + coef;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for coef in self.c.iter().rev() {
            acc = acc * x + coef.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    /// Polynomial division; panics on a zero divisor.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.c.len() - 1;
        let lead_inv = d.lead().recip();
        let mut rem = self.c.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let f = &rem[k + dd] * &lead_inv;
            if !f.is_zero() {
                for (j, dc) in d.c.iter().enumerate() {
                    rem[k + j] -= &f * dc;
                }
            }
            quot[k] = f;
        }
        rem.truncate(dd);
        (Poly::from_coeffs(quot), Poly::from_coeffs(rem))
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.lead().recip())
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Rational roots, found by the rational root test on the integer-scaled
    /// polynomial. Multiplicities are not reported.
    pub fn rational_roots(&self) -> Vec<Rational> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        // clear denominators
        let l = self.c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = self.c.iter().map(|x| (x * &l).to_integer()).collect();
        let mut roots = Vec::new();
        let mut lowest = 0;
        while ints[lowest].is_zero() {
            lowest += 1;
        }
        if lowest > 0 {
            roots.push(Rational::zero());
        }
        let a0 = ints[lowest].abs();
        let an = ints.last().unwrap().abs();
        let divisors = |v: &BigInt| -> Vec<BigInt> {
            let v = v.to_u64().unwrap_or(0);
            (1..=v.min(1_000_000))
                .filter(|d| v.is_multiple_of(*d))
                .map(BigInt::from)
                .collect()
        };
        for p in divisors(&a0) {
            for q in divisors(&an) {
                for s in [1i64, -1] {
                    let r = Rational::new(&p * BigInt::from(s), q.clone());
                    if self.eval(&r).is_zero() && !roots.contains(&r) {
                        roots.push(r);
                    }
                }
            }
        }
        roots.sort();
        roots
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let len = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(len);
        for i in 0..len {
            let mut v = Rational::zero();
            if let Some(x) = self.c.get(i) {
                v += x;
            }
            if let Some(x) = o.c.get(i) {
                v += x;
            }
            c.push(v);
        }
        Poly::from_coeffs(c)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            c: self.c.iter().map(|x| -x).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Rational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::from_coeffs(c)
    }
}

/// Reduced rational function `num/den` in `n`, with a monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn zero() -> Self {
        RatFn {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFn {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFn {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn constant(v: Rational) -> Self {
        Self::from_poly(Poly::constant(v))
    }

    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        if den.degree() == Some(0) {
            let s = den.lead().recip();
            return RatFn {
                num: num.scale(&s),
                den: Poly::one(),
            };
        }
        let g = num.gcd(&den);
        let (num, _) = num.divrem(&g);
        let (den, _) = den.divrem(&g);
        let s = den.lead().recip();
        RatFn {
            num: num.scale(&s),
            den: den.scale(&s),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn inv(&self) -> Option<RatFn> {
        if self.is_zero() {
            None
        } else {
            Some(RatFn::new(self.den.clone(), self.num.clone()))
        }
    }

    pub fn eval(&self, n: &Rational) -> Option<Rational> {
        let d = self.den.eval(n);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(n) / d)
        }
    }

    fn add_ref(&self, o: &RatFn) -> RatFn {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            if self.den.is_one() {
                return RatFn::from_poly(&self.num + &o.num);
            }
            return RatFn::new(&self.num + &o.num, self.den.clone());
        }
        RatFn::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }

    fn mul_ref(&self, o: &RatFn) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFn::from_poly(&self.num * &o.num);
        }
        RatFn::new(&self.num * &o.num, &self.den * &o.den)
    }

    fn neg_ref(&self) -> RatFn {
        RatFn {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

/// Element of `Q(n)[w]`, lowest power of `w` first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Coeff {
    c: Vec<RatFn>,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_ratfn(RatFn::one())
    }

    pub fn int(v: i64) -> Self {
        Self::rational(int(v))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Self::rational(rat(num, den))
    }

    pub fn rational(v: Rational) -> Self {
        Self::from_ratfn(RatFn::constant(v))
    }

    pub fn from_ratfn(r: RatFn) -> Self {
        let mut c = Coeff { c: vec![r] };
        c.trim();
        c
    }

    pub fn from_poly_n(p: Poly) -> Self {
        Self::from_ratfn(RatFn::from_poly(p))
    }

    /// The dimension symbol `n`.
    pub fn n() -> Self {
        Self::from_poly_n(Poly::var())
    }

    /// The weight symbol `w`.
    pub fn w() -> Self {
        Coeff {
            c: vec![RatFn::zero(), RatFn::one()],
        }
    }

    fn trim(&mut self) {
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0] == RatFn::one()
    }

    pub fn degree_w(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn w_coeffs(&self) -> &[RatFn] {
        &self.c
    }

    pub fn is_w_free(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn as_ratfn(&self) -> Option<RatFn> {
        match self.c.len() {
            0 => Some(RatFn::zero()),
            1 => Some(self.c[0].clone()),
            _ => None,
        }
    }

    /// The value if this coefficient is a plain rational number.
    pub fn as_rational(&self) -> Option<Rational> {
        self.as_ratfn().and_then(|r| r.as_constant())
    }

    pub fn is_constant(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn depends_on_n(&self) -> bool {
        self.c
            .iter()
            .any(|r| r.num.degree().unwrap_or(0) > 0 || r.den.degree().unwrap_or(0) > 0)
    }

    pub fn pow(&self, k: u32) -> Coeff {
        let mut acc = Coeff::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `w := value`.
    pub fn subs_w(&self, value: &Coeff) -> Coeff {
        let mut acc = Coeff::zero();
        for r in self.c.iter().rev() {
            acc = &(&acc * value) + &Coeff::from_ratfn(r.clone());
        }
        acc
    }

    /// Substitute `n := value`; `None` if a denominator vanishes.
    pub fn subs_n(&self, value: &Rational) -> Option<Coeff> {
        let mut c = Vec::with_capacity(self.c.len());
        for r in &self.c {
            c.push(RatFn::constant(r.eval(value)?));
        }
        let mut out = Coeff { c };
        out.trim();
        Some(out)
    }

    pub fn eval(&self, n: &Rational, w: &Rational) -> Option<Rational> {
        let mut acc = Rational::zero();
        for r in self.c.iter().rev() {
            acc = acc * w + r.eval(n)?;
        }
        Some(acc)
    }

    pub fn eval_f64(&self, n: f64, w: f64) -> f64 {
        let mut acc = 0.0;
        for r in self.c.iter().rev() {
            acc = acc * w + r.num.eval_f64(n) / r.den.eval_f64(n);
        }
        acc
    }

    /// Exact division. Succeeds when the divisor is free of `w` and nonzero,
    /// or when the division in `Q(n)[w]` leaves no remainder.
    pub fn checked_div(&self, d: &Coeff) -> Option<Coeff> {
        if d.is_zero() {
            return None;
        }
        if let Some(r) = d.as_ratfn() {
            let inv = r.inv()?;
            return Some(self * &Coeff::from_ratfn(inv));
        }
        let dd = d.c.len() - 1;
        if self.c.len() <= dd {
            return if self.is_zero() { Some(Coeff::zero()) } else { None };
        }
        let lead_inv = d.c[dd].inv()?;
        let mut rem = self.c.clone();
        let mut quot = vec![RatFn::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let f = rem[k + dd].mul_ref(&lead_inv);
            if !f.is_zero() {
                for (j, dc) in d.c.iter().enumerate() {
                    rem[k + j] = rem[k + j].add_ref(&f.mul_ref(dc).neg_ref());
                }
            }
            quot[k] = f;
        }
        if rem.iter().take(dd).any(|r| !r.is_zero()) {
            return None;
        }
        let mut q = Coeff { c: quot };
        q.trim();
        Some(q)
    }

    /// Common denominator in `n` and the numerator as a bivariate polynomial,
    /// given as `num[k]` = coefficient polynomial (in `n`) of `w^k`.
    fn split_common_denominator(&self) -> (Vec<Poly>, Poly) {
        let mut den = Poly::one();
        for r in &self.c {
            if !r.den.is_one() {
                let g = den.gcd(&r.den);
                let (q, _) = r.den.divrem(&g);
                den = &den * &q;
            }
        }
        let num = self
            .c
            .iter()
            .map(|r| {
                let (q, _) = den.divrem(&r.den);
                &r.num * &q
            })
            .collect();
        (num, den)
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Writes a bivariate polynomial given as `Σ_k num[k](n) w^k`; highest powers
/// of `w` first, then highest powers of `n`.
fn fmt_bivariate(num: &[Poly]) -> String {
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (kw, p) in num.iter().enumerate().rev() {
        for (kn, c) in p.coeffs().iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mut mono = Vec::new();
            if kn == 1 {
                mono.push("n".to_string());
            } else if kn > 1 {
                mono.push(format!("n^{kn}"));
            }
            if kw == 1 {
                mono.push("w".to_string());
            } else if kw > 1 {
                mono.push(format!("w^{kw}"));
            }
            let a = c.abs();
            let body = if mono.is_empty() {
                fmt_rational(&a)
            } else if a.is_one() {
                mono.join("*")
            } else {
                format!("{}*{}", fmt_rational(&a), mono.join("*"))
            };
            parts.push((c.is_negative(), body));
        }
    }
    if parts.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (neg, body)) in parts.into_iter().enumerate() {
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&body);
    }
    s
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (mut num, mut den) = self.split_common_denominator();
        if den.is_one() {
            return f.write_str(&fmt_bivariate(&num));
        }
        // clear rational coefficients so both sides have integer coefficients
        let mut l = num_bigint::BigInt::one();
        for p in num.iter().chain(std::iter::once(&den)) {
            for c in p.coeffs() {
                l = l.lcm(c.denom());
            }
        }
        if !l.is_one() {
            let s = Rational::from_integer(l);
            num = num.iter().map(|p| p.scale(&s)).collect();
            den = den.scale(&s);
        }
        let ns = fmt_bivariate(&num);
        let ds = fmt_bivariate(&[den.clone()]);
        let nterms = num
            .iter()
            .map(|p| p.coeffs().iter().filter(|c| !c.is_zero()).count())
            .sum::<usize>();
        let nwrap = if nterms > 1 { format!("({ns})") } else { ns };
        let dterms = den.coeffs().iter().filter(|c| !c.is_zero()).count();
        let dwrap = if dterms > 1 || (den.degree() > Some(0) && !den.lead().is_one()) {
            format!("({ds})")
        } else {
            ds
        };
        write!(f, "{nwrap}/{dwrap}")
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, o: &Coeff) -> Coeff {
        let len = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(len);
        for i in 0..len {
            let v = match (self.c.get(i), o.c.get(i)) {
                (Some(a), Some(b)) => a.add_ref(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => RatFn::zero(),
            };
            c.push(v);
        }
        let mut out = Coeff { c };
        out.trim();
        out
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, o: &Coeff) -> Coeff {
        self + &(-o)
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            c: self.c.iter().map(|r| r.neg_ref()).collect(),
        }
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, o: &Coeff) -> Coeff {
        if self.is_zero() || o.is_zero() {
            return Coeff::zero();
        }
        if self.c.len() == 1 && o.c.len() == 1 {
            return Coeff::from_ratfn(self.c[0].mul_ref(&o.c[0]));
        }
        let mut c = vec![RatFn::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j].add_ref(&a.mul_ref(b));
            }
        }
        let mut out = Coeff { c };
        out.trim();
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Coeff {
            type Output = Coeff;
            fn $m(self, o: Coeff) -> Coeff {
                (&self).$m(&o)
            }
        }
        impl $tr<&Coeff> for Coeff {
            type Output = Coeff;
            fn $m(self, o: &Coeff) -> Coeff {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

impl From<i64> for Coeff {
    fn from(v: i64) -> Self {
        Coeff::int(v)
    }
}

/// Error from [`parse`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse expression `{input}`: {reason}")]
pub struct ParseError {
    pub input: String,
    pub reason: String,
}

/// Parses a small arithmetic grammar over integers, `n` and `w`:
/// `expr := term (('+'|'-') term)*`, `term := unary (('*'|'/') unary)*`,
/// `unary := '-' unary | power`, `power := atom ('^' int)?`,
/// `atom := int | n | w | '(' expr ')'`.
/// Implicit multiplication such as `2n` is accepted.
pub fn parse(input: &str) -> Result<Coeff, ParseError> {
    let tokens: Vec<char> = input.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = Parser {
        s: &tokens,
        pos: 0,
        input,
    };
    let v = p.expr()?;
    if p.pos != tokens.len() {
        return Err(p.err("trailing characters"));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [char],
    pos: usize,
    input: &'a str,
}

impl Parser<'_> {
    fn err(&self, reason: &str) -> ParseError {
        ParseError {
            input: self.input.to_string(),
            reason: format!("{reason} at position {}", self.pos),
        }
    }

    fn peek(&self) -> Option<char> {
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Coeff, ParseError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                '-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Coeff, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some('/') => {
                    self.pos += 1;
                    let d = self.unary()?;
                    acc = acc
                        .checked_div(&d)
                        .ok_or_else(|| self.err("division is not exact in Q(n)[w]"))?;
                }
                Some(c) if c == 'n' || c == 'w' || c == '(' => {
                    acc = &acc * &self.unary()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Coeff, ParseError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.peek() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Coeff, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.s[start..self.pos].iter().collect();
        let k: u32 = digits.parse().map_err(|_| self.err("expected a small exponent"))?;
        Ok(base.pow(k))
    }

    fn atom(&mut self) -> Result<Coeff, ParseError> {
        match self.peek() {
            Some('n') => {
                self.pos += 1;
                Ok(Coeff::n())
            }
            Some('w') => {
                self.pos += 1;
                Ok(Coeff::w())
            }
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.s[start..self.pos].iter().collect();
                let v: BigInt = digits.parse().map_err(|_| self.err("bad integer"))?;
                Ok(Coeff::rational(Rational::from_integer(v)))
            }
            _ => Err(self.err("expected a number, `n`, `w` or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratfn_reduces() {
        let n = Poly::var();
        let np2 = &n + &Poly::constant(int(2));
        let r = RatFn::new(&n * &np2, &np2 * &np2);
        assert_eq!(r.num(), &n);
        assert_eq!(r.den(), &np2);
    }

    #[test]
    fn arithmetic_and_display() {
        let n = Coeff::n();
        let w = Coeff::w();
        let a0 = &w * &(&w + &n);
        assert_eq!(a0.to_string(), "w^2 + n*w");
        let c = parse("(n+2)/n").unwrap();
        assert_eq!(c.to_string(), "(n + 2)/n");
        let s = &c + &Coeff::frac(1, 2);
        assert_eq!(s.to_string(), "(3*n + 4)/(2*n)");
        assert_eq!(parse("1-n/2").unwrap().to_string(), "-1/2*n + 1");
        assert_eq!((&c - &c).to_string(), "0");
    }

    #[test]
    fn substitution_and_division() {
        let e = parse("4w + 2n + 4").unwrap();
        let z = e.subs_w(&parse("-n/2").unwrap());
        assert_eq!(z, parse("4").unwrap());
        let q = parse("w*w - 1").unwrap();
        let d = parse("w - 1").unwrap();
        assert_eq!(q.checked_div(&d).unwrap(), parse("w + 1").unwrap());
        assert!(parse("w").unwrap().checked_div(&d).is_none());
        assert_eq!(parse("(n-4)*(n-6)").unwrap().subs_n(&int(6)).unwrap(), Coeff::zero());
    }

    #[test]
    fn parser_rejects_garbage() {
        assert!(parse("n +").is_err());
        assert!(parse("x").is_err());
        assert!(parse("1/0").is_err());
        assert!(parse("n^").is_err());
        assert!(parse("n^-1").is_err());
    }

    #[test]
    fn powers_parse() {
        assert_eq!(parse("-n^2").unwrap(), -&Coeff::n().pow(2));
        assert_eq!(parse("2(n+w)^2").unwrap(), parse("2*(n+w)*(n+w)").unwrap());
        let c = parse("-1/4*n^2 + 3*n*w^2").unwrap();
        assert_eq!(parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn rational_roots_found() {
        let p = parse("(n-4)*(n-6)*(2n-3)").unwrap().as_ratfn().unwrap();
        assert_eq!(p.num().rational_roots(), vec![rat(3, 2), int(4), int(6)]);
    }
}
