//! Sparse multivariate Laurent polynomials with integer coefficients.
//!
//! The variable universe is open: `s_k`, `s_{p,q}` and `s_{p,q,k}` are minted
//! on demand. Coefficients are arbitrary precision.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("negative power {0} of a polynomial")]
    NegativePower(i64),
    #[error("substitution needs {var}^{exp} but the replacement is not a unit monomial")]
    NonUnitInverse { var: String, exp: i64 },
    #[error("H present in a polynomial rendered in t")]
    HPresent,
    #[error("variable {0} is not allowed here")]
    UnexpectedVariable(String),
}

/// Canonicalizes a torus class: gcd 1 is not checked here, only the sign.
/// `q > 0`, or `q == 0` with `p > 0`.
pub fn canonical_pq(p: i64, q: i64) -> (i64, i64) {
    if q < 0 || (q == 0 && p < 0) {
        (-p, -q)
    } else {
        (p, q)
    }
}

pub fn is_canonical_pq(p: i64, q: i64) -> bool {
    p.gcd(&q) == 1 && canonical_pq(p, q) == (p, q)
}

/// Variables, declared in rendering order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    A,
    V,
    H,
    S,
    X,
    Y,
    /// Universal annular variable, one per multiplicity.
    Sk(u32),
    /// Torus class variable, `(p,q)` canonical.
    Spq(i64, i64),
    /// Universal torus variable.
    Spqk(i64, i64, u32),
}

impl Var {
    /// Variables whose exponents may be negative.
    pub fn is_laurent(&self) -> bool {
        matches!(self, Var::A | Var::X)
    }

    /// Builds `s_{p,q}` after canonicalizing the sign of `(p,q)`.
    pub fn spq(p: i64, q: i64) -> Var {
        let (p, q) = canonical_pq(p, q);
        Var::Spq(p, q)
    }

    pub fn spqk(p: i64, q: i64, k: u32) -> Var {
        let (p, q) = canonical_pq(p, q);
        Var::Spqk(p, q, k)
    }

    fn json(&self, exp: i64) -> Value {
        match *self {
            Var::A => json!({"name": "A", "exp": exp}),
            Var::V => json!({"name": "V", "exp": exp}),
            Var::H => json!({"name": "H", "exp": exp}),
            Var::S => json!({"name": "s", "exp": exp}),
            Var::X => json!({"name": "x", "exp": exp}),
            Var::Y => json!({"name": "y", "exp": exp}),
            Var::Sk(k) => json!({"name": "s_k", "k": k, "exp": exp}),
            Var::Spq(p, q) => json!({"name": "s_pq", "p": p, "q": q, "exp": exp}),
            Var::Spqk(p, q, k) => json!({"name": "s_pqk", "p": p, "q": q, "k": k, "exp": exp}),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::A => write!(f, "A"),
            Var::V => write!(f, "V"),
            Var::H => write!(f, "H"),
            Var::S => write!(f, "s"),
            Var::X => write!(f, "x"),
            Var::Y => write!(f, "y"),
            Var::Sk(k) => write!(f, "s_{{{k}}}"),
            Var::Spq(p, q) => write!(f, "s_{{{p},{q}}}"),
            Var::Spqk(p, q, k) => write!(f, "s_{{{p},{q},{k}}}"),
        }
    }
}

/// A product of variable powers. Zero exponents are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Monomial(BTreeMap<Var, i64>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: Var, exp: i64) -> Self {
        let mut m = Self::default();
        m.set(v, exp);
        m
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, i64)>>(pairs: I) -> Self {
        let mut m = Self::default();
        for (v, e) in pairs {
            let cur = m.exp(v);
            m.set(v, cur + e);
        }
        m
    }

    pub fn exp(&self, v: Var) -> i64 {
        self.0.get(&v).copied().unwrap_or(0)
    }

    fn set(&mut self, v: Var, exp: i64) {
        if exp == 0 {
            self.0.remove(&v);
        } else {
            self.0.insert(v, exp);
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = (Var, i64)> + '_ {
        self.0.iter().map(|(v, e)| (*v, *e))
    }

    pub fn without(&self, v: Var) -> Monomial {
        let mut m = self.clone();
        m.0.remove(&v);
        m
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.clone();
        for (v, e) in other.vars() {
            let cur = m.exp(v);
            m.set(v, cur + e);
        }
        m
    }
}

/// Lexicographic on exponent vectors under the variable order, absent = 0.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut keys: Vec<&Var> = self.0.keys().chain(other.0.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|v| self.exp(*v).cmp(&other.exp(*v)))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Integer Laurent polynomial; no zero coefficients are stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Poly(BTreeMap<Monomial, BigInt>);

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant<C: Into<BigInt>>(c: C) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term<C: Into<BigInt>>(c: C, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(c.into(), m);
        p
    }

    pub fn var(v: Var) -> Self {
        Self::term(1, Monomial::var(v, 1))
    }

    /// `A^e`.
    pub fn a_pow(e: i64) -> Self {
        Self::term(1, Monomial::var(Var::A, e))
    }

    /// The loop value `d = -A^2 - A^-2`.
    pub fn d() -> Self {
        let mut p = Self::zero();
        p.add_term(BigInt::from(-1), Monomial::var(Var::A, 2));
        p.add_term(BigInt::from(-1), Monomial::var(Var::A, -2));
        p
    }

    /// `d^n` for `n >= 0`.
    pub fn d_pow(n: u32) -> Self {
        Self::d().pow(n)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.0.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigInt {
        self.0.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, c: BigInt, m: Monomial) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.0.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, k)| (m.clone(), k * c)).collect())
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly(self.0.iter().map(|(n, k)| (n.mul(m), k.clone())).collect())
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Power with a signed exponent; negative exponents are rejected.
    pub fn checked_pow(&self, n: i64) -> Result<Poly, PolyError> {
        if n < 0 {
            return Err(PolyError::NegativePower(n));
        }
        Ok(self.pow(n as u32))
    }

    /// Single term with coefficient ±1.
    fn as_unit_monomial(&self) -> Option<(BigInt, &Monomial)> {
        if self.0.len() != 1 {
            return None;
        }
        let (m, c) = self.0.iter().next()?;
        if c.abs().is_one() {
            Some((c.clone(), m))
        } else {
            None
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.0.keys().any(|m| m.exp(v) != 0)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = self.0.keys().flat_map(|m| m.vars().map(|(v, _)| v)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Replaces every `v^e` by `r^e` and expands.
    pub fn substitute(&self, v: Var, r: &Poly) -> Result<Poly, PolyError> {
        self.map_monomials(|m| {
            let e = m.exp(v);
            let rest = Poly::term(1, m.without(v));
            let factor = if e >= 0 {
                r.pow(e as u32)
            } else {
                let (c, mono) = r.as_unit_monomial().ok_or_else(|| PolyError::NonUnitInverse {
                    var: v.to_string(),
                    exp: e,
                })?;
                let inv = Monomial::from_pairs(mono.vars().map(|(w, x)| (w, -x)));
                Poly::term(c, inv).pow((-e) as u32)
            };
            Ok(&rest * &factor)
        })
    }

    /// Rewrites each monomial (with coefficient one) through `f` and sums.
    pub fn map_monomials<F>(&self, mut f: F) -> Result<Poly, PolyError>
    where
        F: FnMut(&Monomial) -> Result<Poly, PolyError>,
    {
        let mut out = Poly::zero();
        for (m, c) in self.terms() {
            out += f(m)?.scale(c);
        }
        Ok(out)
    }

    /// Deterministic text form, terms in descending monomial order.
    pub fn render_canonical(&self) -> String {
        self.render_with(|m| {
            m.vars()
                .map(|(v, e)| if e == 1 { v.to_string() } else { format!("{v}^{e}") })
                .collect()
        }, false)
    }

    /// As [`Poly::render_canonical`] with `A^e` shown as `t^(-e/4)`.
    pub fn render_jones(&self) -> Result<String, PolyError> {
        if self.contains_var(Var::H) {
            return Err(PolyError::HPresent);
        }
        Ok(self.render_with(|m| {
            m.vars()
                .map(|(v, e)| match v {
                    Var::A => format!("t^{}", quarter(-e)),
                    _ if e == 1 => v.to_string(),
                    _ => format!("{v}^{e}"),
                })
                .collect()
        }, true))
    }

    fn render_with<F>(&self, factors: F, elide_unit: bool) -> String
    where
        F: Fn(&Monomial) -> Vec<String>,
    {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.0.iter().rev().enumerate() {
            let fs = factors(m);
            let neg = c.is_negative();
            let mag = c.abs();
            let body = if fs.is_empty() {
                mag.to_string()
            } else if elide_unit && mag.is_one() {
                fs.join("*")
            } else {
                format!("{}*{}", mag, fs.join("*"))
            };
            match (i, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        out
    }

    /// JSON array of `{coeff, vars}` in canonical order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.0
                .iter()
                .rev()
                .map(|(m, c)| {
                    let coeff = match c.to_i64() {
                        Some(x) => json!(x),
                        None => json!(c.to_string()),
                    };
                    json!({
                        "coeff": coeff,
                        "vars": m.vars().map(|(v, e)| v.json(e)).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }
}

fn quarter(e: i64) -> String {
    let g = e.gcd(&4);
    let (num, den) = (e / g, 4 / g);
    if den == 1 {
        num.to_string()
    } else {
        format!("{num}/{den}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_canonical())
    }
}

impl AddAssign<Poly> for Poly {
    fn add_assign(&mut self, rhs: Poly) {
        for (m, c) in rhs.0 {
            self.add_term(c, m);
        }
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in rhs.0.iter() {
            self.add_term(c.clone(), m.clone());
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += rhs;
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut acc: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (ma, ca) in self.0.iter() {
            for (mb, cb) in rhs.0.iter() {
                *acc.entry(ma.mul(mb)).or_default() += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Poly(acc)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl std::iter::Sum for Poly {
    fn sum<I: Iterator<Item = Poly>>(iter: I) -> Poly {
        let mut out = Poly::zero();
        for p in iter {
            out += p;
        }
        out
    }
}

/// Shorthand for building test and fixture polynomials: `coeff * Π var^exp`.
pub fn mono(c: i64, pairs: &[(Var, i64)]) -> Poly {
    Poly::term(c, Monomial::from_pairs(pairs.iter().copied()))
}
