//! Sparse multivariate polynomials over exact rationals.
//!
//! Variables are the patch coordinates `x1..x14` plus the two homotopy
//! parameters `t` and `s`. A monomial packs one 8-bit exponent per variable
//! into a `u128`, with `x1` in the most significant byte, so integer order on
//! the packed word is lexicographic order on exponent vectors.
//!
//! A polynomial may carry a jet order `k`: it is then only known modulo
//! monomials of total coordinate degree `> k`. Products keep the smaller
//! order, coordinate derivatives lower it by one, and evaluation at the
//! origin requires a non-negative order. Exact polynomials have no order.

use std::fmt;
use std::str::FromStr;

use crate::scalar::Scalar;

pub const MAX_COORDS: usize = 14;
pub const NUM_VARS: usize = 16;

/// A polynomial variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Patch coordinate, zero-based (`X(0)` is printed `x1`).
    X(usize),
    T,
    S,
}

impl Var {
    fn slot(self) -> usize {
        match self {
            Var::X(i) => {
                assert!(i < MAX_COORDS, "coordinate index {i} out of range");
                i
            }
            Var::T => 14,
            Var::S => 15,
        }
    }

    fn shift(self) -> u32 {
        ((NUM_VARS - 1 - self.slot()) * 8) as u32
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::T => write!(f, "t"),
            Var::S => write!(f, "s"),
        }
    }
}

pub type Mono = u128;

const HIGH_BITS: u128 = 0x8080_8080_8080_8080_8080_8080_8080_8080;

#[inline]
pub fn exponent(m: Mono, v: Var) -> u32 {
    ((m >> v.shift()) & 0xff) as u32
}

#[inline]
fn unit(v: Var) -> Mono {
    1u128 << v.shift()
}

/// Total degree in the coordinates only.
#[inline]
pub fn coord_degree(m: Mono) -> u32 {
    (m >> 16).to_le_bytes().iter().map(|&b| b as u32).sum()
}

#[derive(Clone, Default)]
pub struct Poly {
    terms: Vec<(Mono, Scalar)>,
    order: Option<i16>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Poly {}

fn min_order(a: Option<i16>, b: Option<i16>) -> Option<i16> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Scalar) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(0, c)], order: None }
        }
    }

    pub fn int(c: i64) -> Poly {
        Poly::constant(Scalar::from_int(c))
    }

    pub fn var(v: Var) -> Poly {
        Poly { terms: vec![(unit(v), Scalar::one())], order: None }
    }

    /// `c * Π v^e` over the listed variables.
    pub fn monomial(c: Scalar, powers: &[(Var, u32)]) -> Poly {
        let mut m: Mono = 0;
        for &(v, e) in powers {
            assert!(e < 128, "exponent too large");
            m += unit(v) * e as u128;
        }
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)], order: None }
        }
    }

    fn from_sorted(terms: Vec<(Mono, Scalar)>, order: Option<i16>) -> Poly {
        let mut p = Poly { terms, order };
        p.truncate();
        p
    }

    /// Builds from unsorted, possibly repeated terms.
    pub fn from_terms(mut terms: Vec<(Mono, Scalar)>, order: Option<i16>) -> Poly {
        terms.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(Mono, Scalar)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 += &c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|t| !t.1.is_zero());
        Poly::from_sorted(out, order)
    }

    fn truncate(&mut self) {
        if let Some(k) = self.order {
            if k < 0 {
                self.terms.clear();
            } else {
                self.terms.retain(|(m, _)| coord_degree(*m) as i16 <= k);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Mono, Scalar)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn order(&self) -> Option<i16> {
        self.order
    }

    /// Marks the polynomial as a jet of the given order, dropping higher terms.
    pub fn with_order(mut self, order: Option<i16>) -> Poly {
        self.order = min_order(self.order, order);
        self.truncate();
        self
    }

    pub fn constant_term(&self) -> Scalar {
        match self.terms.first() {
            Some((0, c)) => c.clone(),
            _ => Scalar::zero(),
        }
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.iter().map(|(m, _)| exponent(*m, v)).max().unwrap_or(0)
    }

    pub fn coord_total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| coord_degree(*m)).max().unwrap_or(0)
    }

    pub fn involves(&self, v: Var) -> bool {
        self.terms.iter().any(|(m, _)| exponent(*m, v) > 0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let order = min_order(self.order, other.order);
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly::from_sorted(out, order)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
            order: self.order,
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly { terms: vec![], order: self.order };
        }
        Poly {
            terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect(),
            order: self.order,
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let order = min_order(self.order, other.order);
        if self.is_zero() || other.is_zero() {
            return Poly { terms: vec![], order };
        }
        if self.terms.len() == 1 && self.terms[0].0 == 0 {
            return other.scale(&self.terms[0].1).with_order(order);
        }
        if other.terms.len() == 1 && other.terms[0].0 == 0 {
            return self.scale(&other.terms[0].1).with_order(order);
        }
        let limit = order.map(|k| k.max(-1));
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                assert!((ma | mb) & HIGH_BITS == 0, "exponent overflow");
                let m = ma + mb;
                if let Some(k) = limit {
                    if coord_degree(m) as i16 > k {
                        continue;
                    }
                }
                prods.push((m, ca * cb));
            }
        }
        Poly::from_terms(prods, order)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::int(1).with_order(self.order);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative. Coordinate derivatives lower the jet order.
    pub fn deriv(&self, v: Var) -> Poly {
        let u = unit(v);
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let e = exponent(*m, v);
            if e > 0 {
                out.push((m - u, c * &Scalar::from_int(e as i64)));
            }
        }
        let order = match v {
            Var::X(_) => self.order.map(|k| k - 1),
            _ => self.order,
        };
        Poly::from_terms(out, order)
    }

    /// `∫₀¹ p dv`, eliminating `v`.
    pub fn integrate_unit(&self, v: Var) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let e = exponent(*m, v);
            let rest = m - unit(v) * e as u128;
            out.push((rest, c * &Scalar::new(1, e as i64 + 1)));
        }
        Poly::from_terms(out, self.order)
    }

    /// Substitutes a rational value for one variable.
    pub fn substitute(&self, v: Var, value: &Scalar) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let e = exponent(*m, v);
            let rest = m - unit(v) * e as u128;
            out.push((rest, c * &value.pow(e)));
        }
        Poly::from_terms(out, self.order)
    }

    /// Evaluates every coordinate at `point`; `t` and `s` must be absent.
    /// Jets are evaluated at the origin of their own coordinates, so the
    /// point must be zero for them (use [`Poly::shift_coords`] first).
    pub fn eval_coords(&self, point: &[Scalar]) -> Scalar {
        assert!(
            !self.involves(Var::T) && !self.involves(Var::S),
            "evaluation with unresolved homotopy parameters"
        );
        if let Some(k) = self.order {
            assert!(k >= 0, "jet order exhausted (order {k}); raise the spot-check jet order");
        }
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, x) in point.iter().enumerate() {
                let e = exponent(*m, Var::X(i));
                if e > 0 {
                    term *= &x.pow(e);
                }
            }
            for i in point.len()..MAX_COORDS {
                assert!(exponent(*m, Var::X(i)) == 0, "point has too few coordinates");
            }
            acc += &term;
        }
        acc
    }

    /// Re-expands around `point` (`x = point + y`) and truncates to a jet
    /// of the given order in the new coordinates `y`.
    pub fn shift_coords(&self, point: &[Scalar], order: i16) -> Poly {
        let mut acc = Poly::zero().with_order(Some(order));
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone()).with_order(Some(order));
            let mut params: Mono = 0;
            for v in [Var::T, Var::S] {
                params += unit(v) * exponent(*m, v) as u128;
            }
            term = term.mul(&Poly { terms: vec![(params, Scalar::one())], order: None });
            for (i, p) in point.iter().enumerate() {
                let e = exponent(*m, Var::X(i));
                if e > 0 {
                    let lin = Poly::var(Var::X(i)).add(&Poly::constant(p.clone()));
                    term = term.mul(&lin.with_order(Some(order)).pow(e));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mut factors = Vec::new();
            for slot in 0..NUM_VARS {
                let v = match slot {
                    14 => Var::T,
                    15 => Var::S,
                    i => Var::X(i),
                };
                match exponent(*m, v) {
                    0 => {}
                    1 => factors.push(v.to_string()),
                    e => factors.push(format!("{v}^{e}")),
                }
            }
            let neg = c.signum() < 0;
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse polynomial `{input}`: {reason}")]
pub struct ParsePolyError {
    pub input: String,
    pub reason: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly, String> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, String> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.integer()?;
                    if d == 0 {
                        return Err("division by zero".into());
                    }
                    acc = acc.scale(&Scalar::new(1, d));
                }
                Some(c) if c.is_ascii_alphanumeric() || c == b'(' => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Poly, String> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.integer()?;
            if !(0..128).contains(&e) {
                return Err(format!("bad exponent {e}"));
            }
            return Ok(base.pow(e as u32));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64, String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| format!("expected integer at offset {start}"))
    }

    fn atom(&mut self) -> Result<Poly, String> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err("unbalanced parenthesis".into());
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Poly::int(self.integer()?)),
            Some(b'x') => {
                self.pos += 1;
                let i = self.integer()?;
                if i < 1 || i as usize > MAX_COORDS {
                    return Err(format!("coordinate x{i} out of range"));
                }
                Ok(Poly::var(Var::X(i as usize - 1)))
            }
            Some(b't') => {
                self.pos += 1;
                Ok(Poly::var(Var::T))
            }
            Some(b's') => {
                self.pos += 1;
                Ok(Poly::var(Var::S))
            }
            Some(c) => Err(format!("unexpected `{}` at offset {}", c as char, self.pos)),
            None => Err("unexpected end of input".into()),
        }
    }
}

impl FromStr for Poly {
    type Err = ParsePolyError;

    /// Infix grammar: `+ - * / ^`, parentheses, integer literals, variables
    /// `x1..x14`, `t`, `s`. Division is by integer literals only.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let out = p.expr().and_then(|e| {
            if p.peek().is_some() {
                Err(format!("trailing input at offset {}", p.pos))
            } else {
                Ok(e)
            }
        });
        out.map_err(|reason| ParsePolyError { input: s.to_string(), reason })
    }
}
