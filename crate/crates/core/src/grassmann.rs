//! Supercommutative polynomials in `x` and odd `θ_1..θ_n` with exact rational coefficients.
//!
//! Odd derivations act from the left: `∂_i(θ_S) = (-1)^{#{j∈S : j<i}} θ_{S∖i}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// Largest supported number of odd variables (masks are `u32`).
pub const MAX_ODD: usize = 16;

/// `x^xdeg · θ_mask` with the θ factors in ascending index order. Bit `i-1` of `mask` is `θ_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub xdeg: u32,
    pub mask: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { xdeg: 0, mask: 0 };

    pub fn new(xdeg: u32, mask: u32) -> Self {
        Monomial { xdeg, mask }
    }

    pub fn odd(&self) -> bool {
        self.mask.count_ones() % 2 == 1
    }

    /// Indices `1..=n` present in the mask, ascending.
    pub fn indices(&self) -> Vec<usize> {
        mask_indices(self.mask)
    }
}

pub fn bit(i: usize) -> u32 {
    1u32 << (i - 1)
}

pub fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &i| m | bit(i))
}

pub fn mask_indices(mask: u32) -> Vec<usize> {
    (1..=32).filter(|&i| mask & (1u32 << (i - 1)) != 0).collect()
}

/// Sign of `θ_S · θ_T` relative to `θ_{S∪T}`: `Some(true)` for `-1`, `None` if `S∩T ≠ ∅`.
pub fn merge_sign(s: u32, t: u32) -> Option<bool> {
    if s & t != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = t;
    while rest != 0 {
        let low = rest.trailing_zeros();
        swaps += (s >> low).count_ones();
        rest &= rest - 1;
    }
    Some(swaps % 2 == 1)
}

/// Number of elements of `mask` strictly below index `i`.
pub fn below(mask: u32, i: usize) -> u32 {
    (mask & (bit(i) - 1)).count_ones()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn from_odd(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// The derivations of `ℝ[x,θ]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deriv {
    Dx,
    Partial(usize),
    Eta(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SuperPoly {
    pub n: usize,
    pub terms: BTreeMap<Monomial, Rat>,
}

impl SuperPoly {
    pub fn zero(n: usize) -> Self {
        SuperPoly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        Self::term(n, Monomial::ONE, c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rat::one())
    }

    pub fn term(n: usize, m: Monomial, c: Rat) -> Self {
        let mut p = Self::zero(n);
        p.add_term(m, c);
        p
    }

    pub fn monomial(n: usize, m: Monomial) -> Self {
        Self::term(n, m, Rat::one())
    }

    pub fn x(n: usize) -> Self {
        Self::monomial(n, Monomial::new(1, 0))
    }

    pub fn theta(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= n, "θ index {i} out of range 1..={n}");
        Self::monomial(n, Monomial::new(0, bit(i)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Accumulate `c·m`, dropping the entry if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &SuperPoly, c: &Rat) {
        debug_assert_eq!(self.n, other.n);
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(*m, v * c);
        }
    }

    pub fn scale(&self, c: &Rat) -> SuperPoly {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        SuperPoly {
            n: self.n,
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    /// Same coefficients over a larger (or equal) number of odd variables.
    pub fn embed(&self, n: usize) -> SuperPoly {
        assert!(self.max_index() <= n, "cannot embed into fewer odd variables");
        SuperPoly { n, terms: self.terms.clone() }
    }

    fn max_index(&self) -> usize {
        self.terms.keys().map(|m| 32 - m.mask.leading_zeros() as usize).max().unwrap_or(0)
    }

    pub fn parity(&self) -> Parity {
        let mut seen = (false, false);
        for m in self.terms.keys() {
            if m.odd() {
                seen.1 = true;
            } else {
                seen.0 = true;
            }
        }
        match seen {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    /// Parity of a homogeneous polynomial; error on mixed.
    pub fn homogeneous_parity(&self) -> Result<bool> {
        match self.parity() {
            Parity::Even => Ok(false),
            Parity::Odd => Ok(true),
            Parity::Mixed => Err(Error::MixedParity(format!("polynomial {self}"))),
        }
    }

    /// Split into (even part, odd part).
    pub fn split_parity(&self) -> (SuperPoly, SuperPoly) {
        let mut even = Self::zero(self.n);
        let mut odd = Self::zero(self.n);
        for (m, c) in &self.terms {
            if m.odd() {
                odd.terms.insert(*m, c.clone());
            } else {
                even.terms.insert(*m, c.clone());
            }
        }
        (even, odd)
    }

    pub fn max_xdeg(&self) -> u32 {
        self.terms.keys().map(|m| m.xdeg).max().unwrap_or(0)
    }

    /// Unchecked product; both operands must share `n`.
    pub fn mul_raw(&self, other: &SuperPoly) -> SuperPoly {
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(neg) = merge_sign(a.mask, b.mask) {
                    let c = ca * cb;
                    out.add_term(
                        Monomial::new(a.xdeg + b.xdeg, a.mask | b.mask),
                        if neg { -c } else { c },
                    );
                }
            }
        }
        out
    }

    /// Product with a single monomial on the left: `c·m · self`.
    pub fn lmul_monomial(&self, m: Monomial, c: &Rat) -> SuperPoly {
        let mut out = Self::zero(self.n);
        for (b, cb) in &self.terms {
            if let Some(neg) = merge_sign(m.mask, b.mask) {
                let v = c * cb;
                out.add_term(Monomial::new(m.xdeg + b.xdeg, m.mask | b.mask), if neg { -v } else { v });
            }
        }
        out
    }

    pub fn dx(&self) -> SuperPoly {
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            if m.xdeg > 0 {
                out.add_term(Monomial::new(m.xdeg - 1, m.mask), c * rat::int(m.xdeg as i64));
            }
        }
        out
    }

    pub fn dx_k(&self, k: u32) -> SuperPoly {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.dx();
        }
        p
    }

    /// Left derivative `∂/∂θ_i`.
    pub fn partial(&self, i: usize) -> SuperPoly {
        let b = bit(i);
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            if m.mask & b != 0 {
                let v = if below(m.mask, i) % 2 == 1 { -c.clone() } else { c.clone() };
                out.add_term(Monomial::new(m.xdeg, m.mask & !b), v);
            }
        }
        out
    }

    /// `η_i = ∂_i − θ_i ∂_x`.
    pub fn eta(&self, i: usize) -> SuperPoly {
        let b = bit(i);
        let mut out = self.partial(i);
        for (m, c) in &self.terms {
            if m.xdeg > 0 && m.mask & b == 0 {
                // θ_i · x^k θ_S = (-1)^{#{j∈S: j<i}} x^k θ_{S∪i}
                let mut v = c * rat::int(m.xdeg as i64);
                if below(m.mask, i) % 2 == 0 {
                    v = -v;
                }
                out.add_term(Monomial::new(m.xdeg - 1, m.mask | b), v);
            }
        }
        out
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            Err(Error::Index { index: i, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Sum of `σ` applied: `(-1)^{|m|}` on each monomial.
    pub fn sigma(&self) -> SuperPoly {
        SuperPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, if m.odd() { -c.clone() } else { c.clone() }))
                .collect(),
        }
    }
}

/// Supercommutative product; errors on arity mismatch.
pub fn mul(p: &SuperPoly, q: &SuperPoly) -> Result<SuperPoly> {
    if p.n != q.n {
        return Err(Error::Arity { left: p.n, right: q.n });
    }
    Ok(p.mul_raw(q))
}

pub fn derive(kind: Deriv, p: &SuperPoly) -> Result<SuperPoly> {
    match kind {
        Deriv::Dx => Ok(p.dx()),
        Deriv::Partial(i) => {
            p.check_index(i)?;
            Ok(p.partial(i))
        }
        Deriv::Eta(i) => {
            p.check_index(i)?;
            Ok(p.eta(i))
        }
    }
}

pub fn parity(p: &SuperPoly) -> Parity {
    p.parity()
}

impl Add for &SuperPoly {
    type Output = SuperPoly;
    fn add(self, rhs: &SuperPoly) -> SuperPoly {
        assert_eq!(self.n, rhs.n, "arity mismatch");
        let mut out = self.clone();
        out.add_scaled(rhs, &Rat::one());
        out
    }
}

impl Sub for &SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: &SuperPoly) -> SuperPoly {
        assert_eq!(self.n, rhs.n, "arity mismatch");
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rat::one());
        out
    }
}

impl Neg for &SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        self.scale(&-Rat::one())
    }
}

impl Mul for &SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: &SuperPoly) -> SuperPoly {
        assert_eq!(self.n, rhs.n, "arity mismatch");
        self.mul_raw(rhs)
    }
}

// ---------------------------------------------------------------------------
// Text form

fn monomial_factors(m: &Monomial) -> Vec<String> {
    let mut f = Vec::new();
    match m.xdeg {
        0 => {}
        1 => f.push("x".to_string()),
        k => f.push(format!("x^{k}")),
    }
    for i in m.indices() {
        f.push(format!("t{i}"));
    }
    f
}

/// Canonical text: terms by `(xdeg, mask)` descending, reduced fractions, `0` for zero.
pub fn format_poly(p: &SuperPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (m, c)) in p.terms.iter().rev().enumerate() {
        let negative = c < &Rat::zero();
        let mag = if negative { -c.clone() } else { c.clone() };
        if idx == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let factors = monomial_factors(m);
        if factors.is_empty() {
            out.push_str(&rat::fmt_rat(&mag));
        } else {
            if !mag.is_one() {
                out.push_str(&rat::fmt_rat(&mag));
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: &str) -> Result<T> {
        Err(Error::Parse { offset: self.pos, message: message.to_string() })
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

    fn uint(&mut self) -> Result<num_bigint::BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected unsigned integer");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn small_uint(&mut self) -> Result<u32> {
        let at = self.pos;
        let v = self.uint()?;
        u32::try_from(v).map_err(|_| Error::Parse { offset: at, message: "exponent too large".into() })
    }

    fn coef(&mut self) -> Result<Rat> {
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let num = self.uint()?;
        let den = if self.peek() == Some(b'/') {
            self.pos += 1;
            let at = self.pos;
            let d = self.uint()?;
            if d.is_zero() {
                return Err(Error::Parse { offset: at, message: "zero denominator".into() });
            }
            d
        } else {
            num_bigint::BigInt::one()
        };
        let r = Rat::new(num, den);
        Ok(if negative { -r } else { r })
    }

    fn factor(&mut self) -> Result<SuperPoly> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let k = if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.small_uint()?
                } else {
                    1
                };
                Ok(SuperPoly::monomial(self.n, Monomial::new(k, 0)))
            }
            Some(b't') => {
                self.pos += 1;
                let at = {
                    self.skip_ws();
                    self.pos
                };
                let i = self.small_uint()? as usize;
                if i == 0 || i > self.n || i > MAX_ODD {
                    return Err(Error::Parse {
                        offset: at,
                        message: format!("θ index {i} out of range 1..={}", self.n),
                    });
                }
                Ok(SuperPoly::theta(self.n, i))
            }
            _ => self.err("expected factor `x` or `t<i>`"),
        }
    }

    fn factors(&mut self, mut acc: SuperPoly) -> Result<SuperPoly> {
        acc = acc.mul_raw(&self.factor()?);
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul_raw(&self.factor()?);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<SuperPoly> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => self.coef_term(),
            Some(b'-') => {
                // `-t1` is accepted because the canonical printer emits it.
                let save = self.pos;
                self.pos += 1;
                if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos = save;
                    self.coef_term()
                } else {
                    let p = self.factors(SuperPoly::one(self.n))?;
                    Ok(-&p)
                }
            }
            Some(b'x') | Some(b't') => self.factors(SuperPoly::one(self.n)),
            _ => self.err("expected term"),
        }
    }

    fn coef_term(&mut self) -> Result<SuperPoly> {
        let c = self.coef()?;
        let base = SuperPoly::constant(self.n, c);
        if self.peek() == Some(b'*') {
            self.pos += 1;
            self.factors(base)
        } else {
            Ok(base)
        }
    }

    fn expr(&mut self) -> Result<SuperPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                None => return Ok(acc),
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc.add_scaled(&t, &Rat::one());
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc.add_scaled(&t, &-Rat::one());
                }
                Some(_) => return self.err("expected `+`, `-` or end of input"),
            }
        }
    }
}

/// Parse the ASCII grammar `expr := term (('+'|'-') term)*`; `t3` is `θ_3`.
pub fn parse_poly(text: &str, n: usize) -> Result<SuperPoly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, n };
    p.expr()
}
