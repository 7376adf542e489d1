//! Laurent polynomials over the rationals and their canonical text form.
//!
//! Canonical form: terms in descending lexicographic order of exponent
//! vectors, coefficients as `p` or `p/q`, variables `x1..xn` (or the names
//! supplied by the caller), `^` for powers and an explicit `*` between
//! factors, e.g. `1/2*x1^2*x2^-1 - 3`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::{Poly, Rational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<i64>, Rational>,
}

impl LaurentPolynomial {
    pub fn zero(nvars: usize) -> Self {
        LaurentPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn monomial(nvars: usize, exps: Vec<i64>, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(exps, c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, Rational::one())
    }

    /// The binomial `x^{m+} - c * x^{m-}` expressing `x^m = c`.
    pub fn binomial(m: &[i64], c: &Rational) -> Self {
        let n = m.len();
        let plus: Vec<i64> = m.iter().map(|&v| v.max(0)).collect();
        let minus: Vec<i64> = m.iter().map(|&v| (-v).max(0)).collect();
        let mut p = Self::monomial(n, plus, Rational::one());
        p.add_term(minus, -c.clone());
        p
    }

    pub fn add_term(&mut self, exps: Vec<i64>, c: Rational) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Rational)> {
        self.terms.iter()
    }

    fn single_term(&self) -> Option<(&Vec<i64>, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                r.add_term(a.iter().zip(b).map(|(u, v)| u + v).collect(), x * y);
            }
        }
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        LaurentPolynomial { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            let (e, c) = self
                .single_term()
                .ok_or_else(|| Error::pre("negative power of a non-monomial"))?;
            return Ok(Self::monomial(self.nvars, e.iter().map(|v| v * k).collect(), num_traits::pow(c.recip(), (-k) as usize)));
        }
        let mut acc = Self::constant(self.nvars, Rational::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// Multiplies by the monomial that makes every exponent non-negative with
    /// each variable's minimum exponent equal to zero. In the torus this
    /// defines the same hypersurface.
    pub fn to_polynomial(&self) -> Poly {
        if self.terms.is_empty() {
            return Poly::zero(self.nvars);
        }
        let mins: Vec<i64> = (0..self.nvars).map(|i| self.terms.keys().map(|e| e[i]).min().unwrap()).collect();
        Poly::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.iter().zip(&mins).map(|(a, m)| (a - m) as u32).collect(), c.clone())),
        )
    }

    /// Like [`to_polynomial`](Self::to_polynomial) but only clears negative
    /// exponents (affine semantics: no coordinate factors are removed).
    pub fn to_affine_polynomial(&self) -> Poly {
        if self.terms.is_empty() {
            return Poly::zero(self.nvars);
        }
        let mins: Vec<i64> = (0..self.nvars).map(|i| self.terms.keys().map(|e| e[i]).min().unwrap().min(0)).collect();
        Poly::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.iter().zip(&mins).map(|(a, m)| (a - m) as u32).collect(), c.clone())),
        )
    }

    pub fn from_polynomial(p: &Poly) -> Self {
        let mut r = Self::zero(p.nvars());
        for (e, c) in p.terms() {
            r.add_term(e.iter().map(|&v| v as i64).collect(), c.clone());
        }
        r
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.terms.keys().any(|e| e.iter().any(|&v| v < 0))
    }

    /// Canonical text with the given variable names.
    pub fn to_string_with(&self, names: &[String]) -> String {
        let mut out = String::new();
        if self.terms.is_empty() {
            return "0".into();
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let constant = e.iter().all(|&v| v == 0);
            let mut parts: Vec<String> = Vec::new();
            if constant || !a.is_one() {
                parts.push(if a.is_integer() { a.numer().to_string() } else { format!("{}/{}", a.numer(), a.denom()) });
            }
            for (i, &v) in e.iter().enumerate() {
                match v {
                    0 => {}
                    1 => parts.push(names[i].clone()),
                    _ => parts.push(format!("{}^{}", names[i], v)),
                }
            }
            out.push_str(&parts.join("*"));
        }
        out
    }

    /// Parses the text form over the variables `names`.
    pub fn parse_with(text: &str, names: &[String]) -> Result<Self> {
        let mut p = Parser { src: text.as_bytes(), pos: 0, names };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::parse(p.pos, "unexpected trailing input"));
        }
        Ok(v)
    }

    pub fn parse(text: &str, nvars: usize) -> Result<Self> {
        Self::parse_with(text, &default_names(nvars))
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(&default_names(self.nvars)))
    }
}

impl fmt::Debug for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn n(&self) -> usize {
        self.names.len()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<LaurentPolynomial> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<LaurentPolynomial> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                b'/' => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    let inv = d.pow(-1).map_err(|_| Error::parse(at, "divisor must be a single nonzero term"))?;
                    acc = acc.mul(&inv);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<LaurentPolynomial> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if self.peek() == Some(b'+') {
            self.pos += 1;
            return self.unary();
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let k = self.exponent()?;
            return base.pow(k).map_err(|_| Error::parse(at, "negative power of a non-monomial"));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64> {
        let paren = self.peek() == Some(b'(');
        if paren {
            self.pos += 1;
        }
        let neg = self.peek() == Some(b'-');
        if neg {
            self.pos += 1;
        }
        self.skip_ws();
        let start = self.pos;
        let digits = self.digits();
        let v: i64 = digits.parse().map_err(|_| Error::parse(start, "expected integer exponent"))?;
        if paren {
            if self.peek() != Some(b')') {
                return Err(Error::parse(self.pos, "expected ')'"));
            }
            self.pos += 1;
        }
        Ok(if neg { -v } else { v })
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<LaurentPolynomial> {
        let n = self.n();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::parse(self.pos, "expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let d = self.digits();
                let v: crate::Integer = d.parse().map_err(|_| Error::parse(start, "bad integer"))?;
                Ok(LaurentPolynomial::constant(n, Rational::from_integer(v)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.names.iter().position(|v| v == name) {
                    Some(i) => Ok(LaurentPolynomial::var(n, i)),
                    None => Err(Error::parse(start, format!("unknown variable `{name}`"))),
                }
            }
            Some(_) => Err(Error::parse(self.pos, "unexpected character")),
            None => Err(Error::parse(self.pos, "unexpected end of input")),
        }
    }
}

/// Convenience for tests and examples: parses over `x1..xn`, panicking on error.
pub fn lp(text: &str, n: usize) -> LaurentPolynomial {
    LaurentPolynomial::parse(text, n).unwrap_or_else(|e| panic!("{text}: {e}"))
}

impl LaurentPolynomial {
    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k < 0 && x.is_zero() {
                    return Err(Error::pre("negative power of zero"));
                }
                t *= num_traits::pow::Pow::pow(x, k as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn from_i64_terms(nvars: usize, terms: &[(&[i64], i64)]) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e.to_vec(), Rational::from_i64(*c));
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(lp("x1 - 2*x2", 2).to_string(), "x1 - 2*x2");
        assert_eq!(lp("-x2*2 + x1", 2).to_string(), "x1 - 2*x2");
        assert_eq!(lp("x1/x2 - 1/2", 2).to_string(), "x1*x2^-1 - 1/2");
        assert_eq!(lp("(x1+1)^2", 1).to_string(), "x1^2 + 2*x1 + 1");
        assert_eq!(lp("x1^(-2)*3", 1).to_string(), "3*x1^-2");
        assert_eq!(lp("0", 2).to_string(), "0");
    }

    #[test]
    fn parse_errors_carry_positions() {
        match LaurentPolynomial::parse("x1 + x3", 2) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(LaurentPolynomial::parse("(x1+x2)^-1", 2).is_err());
        assert!(LaurentPolynomial::parse("x1 / (x1 + 1)", 1).is_err());
        assert!(LaurentPolynomial::parse("x1 +", 1).is_err());
    }

    #[test]
    fn clearing_denominators() {
        let p = lp("x1*x2^-1 - 2", 2).to_polynomial();
        assert_eq!(LaurentPolynomial::from_polynomial(&p).to_string(), "x1 - 2*x2");
        let q = lp("x1^2*x2 + x1*x2", 2).to_polynomial();
        assert_eq!(LaurentPolynomial::from_polynomial(&q).to_string(), "x1 + 1");
        let a = lp("x1^2*x2 + x1*x2", 2).to_affine_polynomial();
        assert_eq!(LaurentPolynomial::from_polynomial(&a).to_string(), "x1^2*x2 + x1*x2");
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPolynomial> {
        prop::collection::vec((prop::collection::vec(-3i64..4, 3), -20i64..20, 1i64..6), 0..6).prop_map(|ts| {
            let mut p = LaurentPolynomial::zero(3);
            for (e, n, d) in ts {
                p.add_term(e, Rational::new(n.into(), d.into()));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(p in arb_poly()) {
            let s = p.to_string();
            let back = LaurentPolynomial::parse(&s, 3).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(back.to_string(), s);
        }
    }
}
