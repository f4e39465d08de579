//! Exact multivariate polynomials with rational coefficients.
//!
//! Text grammar (whitespace ignored):
//!
//! ```text
//! expr     := sign? term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := base ('^' uint)?
//! base     := rational | var | '(' expr ')'
//! var      := 'x' uint            (1-based, at most n)
//! rational := uint ('/' uint)?
//! ```
//!
//! Exponents and per-variable degrees are capped at [`MAX_EXPONENT`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::scalar::{factorial, Rational};

pub const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable index out of range: x{index} with n = {n} (byte {offset})")]
    VariableOutOfRange {
        index: usize,
        n: usize,
        offset: usize,
    },
    #[error("exponent overflow at byte {offset}: cap is {MAX_EXPONENT}")]
    ExponentOverflow { offset: usize },
    #[error("arity mismatch: expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("variable index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
}

/// Polynomial in `n` variables: exponent tuple → nonzero coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyExpr {
    n: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl PolyExpr {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rational::one())
    }

    /// The coordinate function `x_i` (1-based).
    pub fn var(n: usize, i: usize) -> Result<Self, PolyError> {
        if i == 0 || i > n {
            return Err(PolyError::IndexOutOfRange { index: i, n });
        }
        let mut e = vec![0; n];
        e[i - 1] = 1;
        let mut p = Self::zero(n);
        p.add_term(e, Rational::one());
        Ok(p)
    }

    /// Builds from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            assert_eq!(e.len(), n, "exponent tuple length must equal n");
            p.add_term(e, c);
        }
        p
    }

    pub fn parse(text: &str, n: usize) -> Result<Self, PolyError> {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            n,
        }
        .parse_all()
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&vec![0; self.n]).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.n);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.n, other.n,
            "polynomials over different variable counts"
        );
    }

    /// Product; `None` if some variable degree exceeds [`MAX_EXPONENT`].
    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        self.check_same(other);
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = Vec::with_capacity(self.n);
                for (a, b) in ea.iter().zip(eb) {
                    let s = a + b;
                    if s > MAX_EXPONENT {
                        return None;
                    }
                    e.push(s);
                }
                out.add_term(e, ca * cb);
            }
        }
        Some(out)
    }

    pub fn checked_pow(&self, k: u32) -> Option<Self> {
        let mut acc = Self::one(self.n);
        for _ in 0..k {
            acc = acc.checked_mul(self)?;
        }
        Some(acc)
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational, PolyError> {
        self.check_arity(x.len())?;
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &a) in x.iter().zip(e) {
                if a > 0 {
                    t *= num_traits::pow(xi.clone(), a as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64, PolyError> {
        self.check_arity(x.len())?;
        Ok(self.eval_f64_unchecked(x))
    }

    pub(crate) fn eval_f64_unchecked(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = crate::scalar::Scalar::to_f64(c);
            for (xi, &a) in x.iter().zip(e) {
                if a > 0 {
                    t *= xi.powi(a as i32);
                }
            }
            acc += t;
        }
        acc
    }

    fn check_arity(&self, got: usize) -> Result<(), PolyError> {
        if got != self.n {
            return Err(PolyError::Arity {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }

    /// Formal partial derivative `∂/∂x_i` (1-based).
    pub fn diff(&self, i: usize) -> Result<Self, PolyError> {
        if i == 0 || i > self.n {
            return Err(PolyError::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            let a = e[i - 1];
            if a == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i - 1] -= 1;
            out.add_term(e2, c * BigRational::from_integer(BigInt::from(a)));
        }
        Ok(out)
    }

    /// Upper bound of `|p|` over the box `|x_i − c_i| ≤ h`.
    pub fn abs_bound(&self, center: &[f64], half_width: f64) -> f64 {
        let reach: Vec<f64> = center.iter().map(|c| c.abs() + half_width).collect();
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = crate::scalar::Scalar::to_f64(c).abs();
                for (r, &a) in reach.iter().zip(e) {
                    t *= r.powi(a as i32);
                }
                t
            })
            .sum()
    }

    /// Pullback under the affine map `u ↦ origin + Σ_j u_j edges[j]`,
    /// giving a polynomial in `edges.len()` variables.
    pub fn compose_affine(&self, origin: &[Rational], edges: &[Vec<Rational>]) -> Self {
        let k = edges.len();
        assert_eq!(origin.len(), self.n);
        // x_i as a polynomial in u
        let coords: Vec<PolyExpr> = (0..self.n)
            .map(|i| {
                let mut p = Self::constant(k, origin[i].clone());
                for (j, edge) in edges.iter().enumerate() {
                    let mut e = vec![0; k];
                    e[j] = 1;
                    p.add_term(e, edge[i].clone());
                }
                p
            })
            .collect();
        let mut powers: Vec<Vec<PolyExpr>> = coords
            .iter()
            .map(|c| vec![Self::one(k), c.clone()])
            .collect();
        let mut out = Self::zero(k);
        for (e, c) in &self.terms {
            let mut t = Self::constant(k, c.clone());
            for (i, &a) in e.iter().enumerate() {
                let a = a as usize;
                while powers[i].len() <= a {
                    let next = powers[i].last().unwrap().mul_unbounded(&coords[i]);
                    powers[i].push(next);
                }
                if a > 0 {
                    t = t.mul_unbounded(&powers[i][a]);
                }
            }
            out = &out + &t;
        }
        out
    }

    fn mul_unbounded(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `∫ p du` over the standard simplex `{u ≥ 0, Σu ≤ 1}` in ℝᵏ, using
    /// `∫ u^a du = (∏ a_i!) / (k + |a|)!`.
    pub fn integrate_standard_simplex(&self) -> Rational {
        let k = self.n;
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut num = Rational::one();
            for &a in e {
                num *= factorial(a as usize);
            }
            let total: usize = e.iter().map(|&a| a as usize).sum();
            acc += c * num / factorial(k + total);
        }
        acc
    }
}

impl Add for &PolyExpr {
    type Output = PolyExpr;
    fn add(self, rhs: &PolyExpr) -> PolyExpr {
        self.check_same(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &PolyExpr {
    type Output = PolyExpr;
    fn sub(self, rhs: &PolyExpr) -> PolyExpr {
        self + &(-rhs)
    }
}

impl Neg for &PolyExpr {
    type Output = PolyExpr;
    fn neg(self) -> PolyExpr {
        self.scale(&-Rational::one())
    }
}

impl Mul for &PolyExpr {
    type Output = PolyExpr;
    /// Panics if a variable degree exceeds [`MAX_EXPONENT`]; use
    /// [`PolyExpr::checked_mul`] for untrusted input.
    fn mul(self, rhs: &PolyExpr) -> PolyExpr {
        self.checked_mul(rhs).expect("polynomial degree overflow")
    }
}

impl fmt::Debug for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyExpr[{}]({self})", self.n)
    }
}

/// Canonical text: terms by descending total degree, then descending
/// exponent tuple; parses back to the same polynomial.
impl fmt::Display for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut order: Vec<(&Vec<u32>, &Rational)> = self.terms.iter().collect();
        order.sort_by(|(a, _), (b, _)| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (k, (e, c)) in order.into_iter().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            let monomial = e.iter().any(|&a| a > 0);
            if !mag.is_one() || !monomial {
                factors.push(mag.to_string());
            }
            for (i, &a) in e.iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, a)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn parse_all(mut self) -> Result<PolyExpr, PolyError> {
        let e = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.syntax(format!("unexpected '{}'", self.src[self.pos] as char)));
        }
        Ok(e)
    }

    fn syntax(&self, message: impl Into<String>) -> PolyError {
        PolyError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
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

    fn expr(&mut self) -> Result<PolyExpr, PolyError> {
        let negate = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let first = self.term()?;
        let mut acc = if negate { -&first } else { first };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolyExpr, PolyError> {
        let start = self.pos;
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = acc
                .checked_mul(&rhs)
                .ok_or(PolyError::ExponentOverflow { offset: start })?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<PolyExpr, PolyError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let k = self.uint()?;
            if k > BigInt::from(MAX_EXPONENT) {
                return Err(PolyError::ExponentOverflow { offset: at });
            }
            let k: u32 = k.try_into().expect("bounded by cap");
            return base
                .checked_pow(k)
                .ok_or(PolyError::ExponentOverflow { offset: at });
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<PolyExpr, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'x') => {
                let at = self.pos;
                self.pos += 1;
                if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    return Err(self.syntax("expected variable index after 'x'"));
                }
                let idx = self.uint()?;
                let n = self.n;
                let out_of_range = || PolyError::VariableOutOfRange {
                    index: usize::try_from(&idx).unwrap_or(usize::MAX),
                    n,
                    offset: at,
                };
                let i = usize::try_from(&idx).map_err(|_| out_of_range())?;
                if i == 0 || i > n {
                    return Err(out_of_range());
                }
                Ok(PolyExpr::var(n, i).expect("checked range"))
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()?;
                let mut value = BigRational::from_integer(num);
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let den = self.uint()?;
                    if den.is_zero() {
                        return Err(self.syntax("zero denominator"));
                    }
                    value /= BigRational::from_integer(den);
                }
                Ok(PolyExpr::constant(self.n, value))
            }
            Some(c) => Err(self.syntax(format!("unexpected '{}'", c as char))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn uint(&mut self) -> Result<BigInt, PolyError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected digits"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("ascii digits parse"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn p(s: &str, n: usize) -> PolyExpr {
        PolyExpr::parse(s, n).unwrap()
    }

    fn q(v: i64) -> Rational {
        ratio(v, 1)
    }

    #[test]
    fn parse_basic() {
        let e = p("x3 - x2*x1", 3);
        let expected = &PolyExpr::var(3, 3).unwrap()
            - &(&PolyExpr::var(3, 2).unwrap() * &PolyExpr::var(3, 1).unwrap());
        assert_eq!(e, expected);
        assert_eq!(e.to_string(), "-x1*x2 + x3");
    }

    #[test]
    fn parse_square_matches_repeated_multiplication() {
        let s = &PolyExpr::var(2, 1).unwrap() + &PolyExpr::var(2, 2).unwrap();
        let oracle = &s * &s;
        assert_eq!(p("(x1+x2)^2", 2), oracle);
        assert_eq!(p("(x1+x2)^2", 2), p("x1^2 + 2*x1*x2 + x2^2", 2));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            PolyExpr::parse("x4", 3),
            Err(PolyError::VariableOutOfRange {
                index: 4,
                n: 3,
                offset: 0
            })
        ));
        assert!(matches!(
            PolyExpr::parse("x0", 3),
            Err(PolyError::VariableOutOfRange { .. })
        ));
        assert!(matches!(
            PolyExpr::parse("x1 + ", 3),
            Err(PolyError::Syntax { offset: 5, .. })
        ));
        assert!(matches!(
            PolyExpr::parse("x1 $ 2", 3),
            Err(PolyError::Syntax { offset: 3, .. })
        ));
        assert!(matches!(
            PolyExpr::parse("(x1", 3),
            Err(PolyError::Syntax { .. })
        ));
        assert!(matches!(
            PolyExpr::parse("x1^65", 3),
            Err(PolyError::ExponentOverflow { offset: 3 })
        ));
        assert!(matches!(
            PolyExpr::parse("(x1^40)*x1^40", 3),
            Err(PolyError::ExponentOverflow { .. })
        ));
        assert!(matches!(
            PolyExpr::parse("1/0", 3),
            Err(PolyError::Syntax { .. })
        ));
        assert!(PolyExpr::parse("x1^64", 1).is_ok());
    }

    #[test]
    fn parse_rationals_and_whitespace() {
        let e = p(" 3/4 * x1 ^ 2 - 1/2 ", 1);
        assert_eq!(e.eval(&[q(2)]).unwrap(), ratio(5, 2));
        assert_eq!(e.to_string(), "3/4*x1^2 - 1/2");
        assert_eq!(p("0", 2).to_string(), "0");
        assert_eq!(p("-(x1 - x1)", 2), PolyExpr::zero(2));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("x1*x2", 2).eval(&[q(2), q(3)]).unwrap(), q(6));
        assert_eq!(p("5", 3).eval(&[q(7), q(-1), ratio(1, 3)]).unwrap(), q(5));
        assert_eq!(p("(x1+x2)^2", 2).eval(&[q(1), q(1)]).unwrap(), q(4));
        assert_eq!(p("(x1+x2)^2", 2).eval_f64(&[1.0, 1.0]).unwrap(), 4.0);
        assert!(matches!(
            p("x1", 2).eval(&[q(1)]),
            Err(PolyError::Arity {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn diff_examples() {
        let e = p("x1^2*x2", 3);
        assert_eq!(e.diff(1).unwrap(), p("2*x1*x2", 3));
        assert!(e.diff(3).unwrap().is_zero());
        assert_eq!(p("(x1+x2)^3", 2).diff(2).unwrap(), p("3*(x1+x2)^2", 2));
        assert!(matches!(
            e.diff(4),
            Err(PolyError::IndexOutOfRange { index: 4, n: 3 })
        ));
    }

    #[test]
    fn diff_agrees_with_central_differences() {
        let e = p("(x1+x2)^3 - 2*x1*x2^2 + 1/3*x2", 2);
        let d = e.diff(2).unwrap();
        for x in [[0.3, -0.7], [1.1, 0.4], [-0.5, -0.2]] {
            let h = 1e-5;
            let fd = (e.eval_f64(&[x[0], x[1] + h]).unwrap()
                - e.eval_f64(&[x[0], x[1] - h]).unwrap())
                / (2.0 * h);
            let exact = d.eval_f64(&x).unwrap();
            assert!(
                (fd - exact).abs() <= 1e-7 * exact.abs().max(1.0),
                "{fd} vs {exact}"
            );
        }
    }

    #[test]
    fn standard_simplex_monomials() {
        // ∫_{Δ²} u1 = 1/6, ∫_{Δ²} 1 = 1/2, ∫_{Δ³} u1 u2 u3 = 1/720
        assert_eq!(p("x1", 2).integrate_standard_simplex(), ratio(1, 6));
        assert_eq!(p("1", 2).integrate_standard_simplex(), ratio(1, 2));
        assert_eq!(p("x1*x2*x3", 3).integrate_standard_simplex(), ratio(1, 720));
        assert_eq!(
            PolyExpr::constant(0, q(3)).integrate_standard_simplex(),
            q(3)
        );
    }

    #[test]
    fn affine_pullback() {
        // x1*x2 on the segment (0,0) + u (2,3)  →  6 u²
        let e = p("x1*x2", 2);
        let pulled = e.compose_affine(&[q(0), q(0)], &[vec![q(2), q(3)]]);
        assert_eq!(pulled, p("6*x1^2", 1));
        let pulled = e.compose_affine(&[q(1), q(1)], &[]);
        assert_eq!(pulled.as_constant(), Some(q(1)));
    }

    #[test]
    fn abs_bound_dominates_values() {
        let e = p("x1^2 - 3*x1*x2 + 2", 2);
        let b = e.abs_bound(&[0.5, -0.5], 0.25);
        for x in [[0.25, -0.25], [0.75, -0.75], [0.5, -0.5], [0.25, -0.75]] {
            assert!(e.eval_f64(&x).unwrap().abs() <= b);
        }
    }
}
