//! Multivariate polynomials with rational coefficients in `u1..up` and
//! `lambda`, a small expression parser and symbolic differentiation.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Polynomial over `p + 1` variables; index `p` is `lambda`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational64::one());
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Rational64) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps.clone()).or_insert_with(Rational64::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational64> {
        match self.terms.len() {
            0 => Some(Rational64::zero()),
            1 => self.terms.get(&vec![0; self.nvars]).copied(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-Rational64::one())
    }

    pub fn scale(&self, k: Rational64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), *c * k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, *c1 * *c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(self.nvars, Rational64::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e.clone();
                e2[var] -= 1;
                out.add_term(e2, *c * Rational64::from_integer(e[var] as i64));
            }
        }
        out
    }

    /// Substitute `x_var -> c · x_var`.
    pub fn scale_variable(&self, var: usize, c: Rational64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, k) in &self.terms {
            let mut f = *k;
            for _ in 0..e[var] {
                f *= c;
            }
            out.add_term(e.clone(), f);
        }
        out
    }

    /// Total degree in the first `p` variables (ignoring `lambda`).
    pub fn degree_in_u(&self) -> u32 {
        let p = self.nvars - 1;
        self.terms.keys().map(|e| e[..p].iter().sum()).max().unwrap_or(0)
    }

    pub fn compile(&self) -> CompiledPolynomial {
        CompiledPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (c.to_f64().unwrap_or(f64::NAN), e.clone()))
                .collect(),
        }
    }

    /// Parse an expression in `u1..u{p}` and `lambda`.
    pub fn parse(src: &str, p: usize) -> Result<Self> {
        let mut parser = Parser { src: src.as_bytes(), pos: 0, p };
        let poly = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(poly)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let p = self.nvars - 1;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -*c) } else { ("+", *c) };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mut factors = Vec::new();
            if !mag.is_one() || e.iter().all(|&x| x == 0) {
                factors.push(format!("{mag}"));
            }
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = if v == p { "lambda".to_string() } else { format!("u{}", v + 1) };
                factors.push(if k == 1 { name } else { format!("{name}^{k}") });
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Floating-point evaluation form of a [`Polynomial`].
#[derive(Debug, Clone)]
pub struct CompiledPolynomial {
    terms: Vec<(f64, Vec<u32>)>,
}

impl CompiledPolynomial {
    /// Evaluate at `u` (length `p`) and `lambda`.
    pub fn eval(&self, u: &[f64], lambda: f64) -> f64 {
        let mut s = 0.0;
        for (c, e) in &self.terms {
            let mut t = *c;
            for (x, &k) in u.iter().chain(std::iter::once(&lambda)).zip(e) {
                if k > 0 {
                    t *= x.powi(k as i32);
                }
            }
            s += t;
        }
        s
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    p: usize,
}

impl Parser<'_> {
    fn nvars(&self) -> usize {
        self.p + 1
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
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
                    let k = d
                        .as_constant()
                        .filter(|k| !k.is_zero())
                        .ok_or(Error::Parse { pos: at, msg: "division only by a nonzero constant".into() })?;
                    acc = acc.scale(k.recip());
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected a nonnegative integer exponent"));
            }
            let n: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.error("exponent too large"))?;
            if n > 64 {
                return Err(self.error("exponent too large"));
            }
            return Ok(base.pow(n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Polynomial> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        if frac.contains('.') || (int.is_empty() && frac.is_empty()) || frac.len() > 15 {
            return Err(Error::Parse { pos: start, msg: format!("bad number {text:?}") });
        }
        let digits = format!("{int}{frac}");
        let num: i64 = digits
            .parse()
            .map_err(|_| Error::Parse { pos: start, msg: format!("bad number {text:?}") })?;
        let den = 10i64.pow(frac.len() as u32);
        Ok(Polynomial::constant(self.nvars(), Rational64::new(num, den)))
    }

    fn identifier(&mut self) -> Result<Polynomial> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if name == "lambda" {
            return Ok(Polynomial::variable(self.nvars(), self.p));
        }
        if let Some(idx) = name.strip_prefix('u').and_then(|s| s.parse::<usize>().ok()) {
            if (1..=self.p).contains(&idx) {
                return Ok(Polynomial::variable(self.nvars(), idx - 1));
            }
        }
        Err(Error::Parse { pos: start, msg: format!("unknown variable {name:?} (expected u1..u{} or lambda)", self.p) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_differentiates_pitchfork() {
        let f = Polynomial::parse("lambda*u1^2/2 - u1^4/4", 1).unwrap();
        let g = f.derivative(0);
        assert_eq!(g, Polynomial::parse("lambda*u1 - u1^3", 1).unwrap());
        let h = g.derivative(0);
        assert_eq!(h, Polynomial::parse("lambda - 3*u1^2", 1).unwrap());
        assert_eq!(h.compile().eval(&[0.0], 2.5), 2.5);
    }

    #[test]
    fn expands_powers_of_sums() {
        let f = Polynomial::parse("(u1^2 + u2^2 - 1)^2", 2).unwrap();
        let direct = Polynomial::parse("u1^4 + 2*u1^2*u2^2 + u2^4 - 2*u1^2 - 2*u2^2 + 1", 2).unwrap();
        assert_eq!(f, direct);
    }

    #[test]
    fn decimal_and_rational_coefficients() {
        let a = Polynomial::parse("0.5*u1", 1).unwrap();
        let b = Polynomial::parse("u1/2", 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(Polynomial::parse("1/3*u1 + 2/3*u1", 1).unwrap(), Polynomial::parse("u1", 1).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Polynomial::parse("u3", 2).is_err());
        assert!(Polynomial::parse("u1/u1", 1).is_err());
        assert!(Polynomial::parse("u1^-2", 1).is_err());
        assert!(Polynomial::parse("(u1", 1).is_err());
        assert!(Polynomial::parse("u1 u1", 1).is_err());
        assert!(Polynomial::parse("x", 1).is_err());
        assert!(Polynomial::parse("u1/0", 1).is_err());
    }

    #[test]
    fn display_round_trips() {
        let f = Polynomial::parse("lambda*(u1^2+u2^2-1)^2/8 - 3*u2", 2).unwrap();
        let again = Polynomial::parse(&f.to_string(), 2).unwrap();
        assert_eq!(f, again);
    }
}
