//! Differential operators between density modules in η-normal form.
//!
//! A unary term `a·∂_x^k η_{i1}…η_{im}` (ascending indices) stores `a` on the left. A binary
//! term acts as `(F, G) ↦ a·D₁(F)·D₂(G)`. Because `η_i² = −∂_x` and distinct `η`s
//! anticommute, this form is unique, so operator equality is structural. Parity signs such as
//! `(−1)^{|F|}` are realised by `σ = Π_i (1 − 2θ_iη_i)` and expanded into normal form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::grassmann::{below, bit, mask_indices, Monomial, Parity, SuperPoly};
use crate::rat::{self, Rat};

/// `∂_x^xorder ∘ η_{i1} ∘ … ∘ η_{im}` with `i1 < … < im`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpMonomial {
    pub xorder: u32,
    pub etas: u32,
}

impl OpMonomial {
    pub const ID: OpMonomial = OpMonomial { xorder: 0, etas: 0 };

    pub fn new(xorder: u32, etas: u32) -> Self {
        OpMonomial { xorder, etas }
    }

    pub fn odd(&self) -> bool {
        self.etas.count_ones() % 2 == 1
    }

    /// Order counted in halves: `∂_x` is 2, each `η` is 1.
    pub fn half_order(&self) -> u32 {
        2 * self.xorder + self.etas.count_ones()
    }

    /// `η_i ∘ self` as (negative?, monomial).
    pub fn eta_left(&self, i: usize) -> (bool, OpMonomial) {
        let b = bit(i);
        let p = below(self.etas, i) % 2 == 1;
        if self.etas & b == 0 {
            (p, OpMonomial::new(self.xorder, self.etas | b))
        } else {
            // η_i η_i = −∂_x
            (!p, OpMonomial::new(self.xorder + 1, self.etas & !b))
        }
    }

    /// Apply to a polynomial: innermost (largest index) `η` first.
    pub fn apply(&self, f: &SuperPoly) -> SuperPoly {
        let mut g = f.clone();
        for i in mask_indices(self.etas).into_iter().rev() {
            g = g.eta(i);
        }
        g.dx_k(self.xorder)
    }
}

type UnaryTerms = BTreeMap<OpMonomial, SuperPoly>;
type BinaryTerms = BTreeMap<(OpMonomial, OpMonomial), SuperPoly>;

fn add_unary(terms: &mut UnaryTerms, n: usize, q: OpMonomial, m: Monomial, c: Rat) {
    if c.is_zero() {
        return;
    }
    let e = terms.entry(q).or_insert_with(|| SuperPoly::zero(n));
    e.add_term(m, c);
    if e.is_zero() {
        terms.remove(&q);
    }
}

fn add_unary_poly(terms: &mut UnaryTerms, q: OpMonomial, p: &SuperPoly, c: &Rat) {
    if p.is_zero() || c.is_zero() {
        return;
    }
    let e = terms.entry(q).or_insert_with(|| SuperPoly::zero(p.n));
    e.add_scaled(p, c);
    if e.is_zero() {
        terms.remove(&q);
    }
}

fn add_binary(terms: &mut BinaryTerms, key: (OpMonomial, OpMonomial), p: &SuperPoly, c: &Rat) {
    if p.is_zero() || c.is_zero() {
        return;
    }
    let e = terms.entry(key).or_insert_with(|| SuperPoly::zero(p.n));
    e.add_scaled(p, c);
    if e.is_zero() {
        terms.remove(&key);
    }
}

fn parity_of(odd_flags: impl Iterator<Item = bool>) -> Parity {
    let mut seen = (false, false);
    for o in odd_flags {
        if o {
            seen.1 = true
        } else {
            seen.0 = true
        }
    }
    match seen {
        (_, false) => Parity::Even,
        (false, true) => Parity::Odd,
        (true, true) => Parity::Mixed,
    }
}

// ---------------------------------------------------------------------------
// Unary operators

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    pub n: usize,
    pub source_weight: Rat,
    pub target_weight: Rat,
    pub terms: UnaryTerms,
}

impl DiffOp {
    pub fn zero(n: usize, source: Rat, target: Rat) -> Self {
        DiffOp { n, source_weight: source, target_weight: target, terms: BTreeMap::new() }
    }

    /// Weightless helper operator (weights 0 → 0); used inside compositions.
    pub fn raw(n: usize) -> Self {
        Self::zero(n, Rat::zero(), Rat::zero())
    }

    pub fn with_weights(mut self, source: Rat, target: Rat) -> Self {
        self.source_weight = source;
        self.target_weight = target;
        self
    }

    pub fn monomial(n: usize, q: OpMonomial, coeff: SuperPoly) -> Self {
        let mut op = Self::raw(n);
        add_unary_poly(&mut op.terms, q, &coeff, &Rat::one());
        op
    }

    pub fn identity(n: usize) -> Self {
        Self::monomial(n, OpMonomial::ID, SuperPoly::one(n))
    }

    pub fn multiplication(a: &SuperPoly) -> Self {
        Self::monomial(a.n, OpMonomial::ID, a.clone())
    }

    pub fn dx(n: usize) -> Self {
        Self::monomial(n, OpMonomial::new(1, 0), SuperPoly::one(n))
    }

    pub fn eta(n: usize, i: usize) -> Self {
        Self::monomial(n, OpMonomial::new(0, bit(i)), SuperPoly::one(n))
    }

    /// `∂_i = η_i + θ_i ∂_x`.
    pub fn partial(n: usize, i: usize) -> Self {
        let mut op = Self::eta(n, i);
        add_unary_poly(&mut op.terms, OpMonomial::new(1, 0), &SuperPoly::theta(n, i), &Rat::one());
        op
    }

    /// `σ(F) = (−1)^{|F|} F`, i.e. `Π_i (1 − 2θ_iη_i)`.
    pub fn sigma(n: usize) -> Self {
        let mut s = Self::identity(n);
        for i in 1..=n {
            let mut f = Self::identity(n);
            add_unary_poly(&mut f.terms, OpMonomial::new(0, bit(i)), &SuperPoly::theta(n, i), &rat::int(-2));
            s = s.compose_raw(&f);
        }
        s
    }

    /// `1 − θ_iη_i`: keeps exactly the monomials without `θ_i` (projection onto `ker ∂_i`).
    pub fn drop_theta(n: usize, i: usize) -> Self {
        let mut p = Self::identity(n);
        add_unary_poly(&mut p.terms, OpMonomial::new(0, bit(i)), &SuperPoly::theta(n, i), &-Rat::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn parity(&self) -> Parity {
        parity_of(self.terms.iter().flat_map(|(q, a)| a.terms.keys().map(move |m| q.odd() ^ m.odd())))
    }

    pub fn homogeneous_parity(&self) -> Result<bool> {
        match self.parity() {
            Parity::Even => Ok(false),
            Parity::Odd => Ok(true),
            Parity::Mixed => Err(Error::MixedParity(format!("operator {self}"))),
        }
    }

    /// Highest order, in halves.
    pub fn half_order(&self) -> u32 {
        self.terms.keys().map(|q| q.half_order()).max().unwrap_or(0)
    }

    pub fn max_coeff_xdeg(&self) -> u32 {
        self.terms.values().map(|a| a.max_xdeg()).max().unwrap_or(0)
    }

    pub fn add_scaled(&mut self, other: &DiffOp, c: &Rat) {
        for (q, a) in &other.terms {
            add_unary_poly(&mut self.terms, *q, a, c);
        }
    }

    pub fn scale(&self, c: &Rat) -> DiffOp {
        let mut out = DiffOp { terms: BTreeMap::new(), ..self.clone() };
        out.add_scaled(self, c);
        out
    }

    pub fn plus(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        out.add_scaled(other, &Rat::one());
        out
    }

    pub fn minus(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        out.add_scaled(other, &-Rat::one());
        out
    }

    /// `b · self`.
    pub fn left_mul(&self, b: &SuperPoly) -> DiffOp {
        let mut out = DiffOp { terms: BTreeMap::new(), ..self.clone() };
        for (q, a) in &self.terms {
            add_unary_poly(&mut out.terms, *q, &b.mul_raw(a), &Rat::one());
        }
        out
    }

    /// `η_i ∘ self`, using `η_i∘(a·) = (η_i a)· + (−1)^{|a|} (a·)∘η_i`.
    pub fn left_eta(&self, i: usize) -> DiffOp {
        let mut out = DiffOp { terms: BTreeMap::new(), ..self.clone() };
        for (q, a) in &self.terms {
            add_unary_poly(&mut out.terms, *q, &a.eta(i), &Rat::one());
            let (neg, q2) = q.eta_left(i);
            for (m, c) in &a.terms {
                let v = if neg ^ m.odd() { -c.clone() } else { c.clone() };
                add_unary(&mut out.terms, self.n, q2, *m, v);
            }
        }
        out
    }

    /// `∂_x ∘ self`.
    pub fn left_dx(&self) -> DiffOp {
        let mut out = DiffOp { terms: BTreeMap::new(), ..self.clone() };
        for (q, a) in &self.terms {
            add_unary_poly(&mut out.terms, *q, &a.dx(), &Rat::one());
            add_unary_poly(&mut out.terms, OpMonomial::new(q.xorder + 1, q.etas), a, &Rat::one());
        }
        out
    }

    /// `q ∘ self` for a bare operator monomial.
    pub fn left_monomial(&self, q: OpMonomial) -> DiffOp {
        let mut out = self.clone();
        for i in mask_indices(q.etas).into_iter().rev() {
            out = out.left_eta(i);
        }
        for _ in 0..q.xorder {
            out = out.left_dx();
        }
        out
    }

    /// `self ∘ other` in normal form; weights are taken as (other.source, self.target).
    pub fn compose_raw(&self, other: &DiffOp) -> DiffOp {
        let mut out = DiffOp::zero(self.n, other.source_weight.clone(), self.target_weight.clone());
        for (q, a) in &self.terms {
            let inner = other.left_monomial(*q);
            for (q2, b) in &inner.terms {
                add_unary_poly(&mut out.terms, *q2, &a.mul_raw(b), &Rat::one());
            }
        }
        out
    }

    pub fn apply_poly(&self, f: &SuperPoly) -> SuperPoly {
        let mut out = SuperPoly::zero(self.n);
        for (q, a) in &self.terms {
            let v = q.apply(f);
            if !v.is_zero() {
                out.add_scaled(&a.mul_raw(&v), &Rat::one());
            }
        }
        out
    }

    /// Same operator over more odd variables.
    pub fn embed(&self, n: usize) -> DiffOp {
        DiffOp {
            n,
            source_weight: self.source_weight.clone(),
            target_weight: self.target_weight.clone(),
            terms: self.terms.iter().map(|(q, a)| (*q, a.embed(n))).collect(),
        }
    }

    /// Flat coordinates `(D, coefficient monomial) ↦ scalar`.
    pub fn coordinates(&self) -> BTreeMap<(OpMonomial, Monomial), Rat> {
        self.terms.iter().flat_map(|(q, a)| a.terms.iter().map(move |(m, c)| ((*q, *m), c.clone()))).collect()
    }

    /// `Σ c_j ops[j]`, with weights of the first operator (`raw` if the list is empty).
    pub fn combination(n: usize, ops: &[DiffOp], coeffs: &[Rat]) -> DiffOp {
        let mut out = ops.first().map(|o| DiffOp { terms: BTreeMap::new(), ..o.clone() }).unwrap_or_else(|| DiffOp::raw(n));
        for (o, c) in ops.iter().zip(coeffs) {
            out.add_scaled(o, c);
        }
        out
    }

    fn weights_chain(&self, other: &DiffOp) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Arity { left: self.n, right: other.n });
        }
        if self.source_weight != other.target_weight {
            return Err(Error::Weight(format!(
                "composition needs source {} = target {}",
                rat::fmt_rat(&self.source_weight),
                rat::fmt_rat(&other.target_weight)
            )));
        }
        Ok(())
    }
}

/// `A ∘ B`, renormalized; requires `A.source_weight = B.target_weight`.
pub fn normal_compose(a: &DiffOp, b: &DiffOp) -> Result<DiffOp> {
    a.weights_chain(b)?;
    Ok(a.compose_raw(b))
}

/// `Q ∘ σ` for a bare monomial, memoized per `(n, Q)`.
pub fn monomial_after_sigma(n: usize, q: OpMonomial) -> DiffOp {
    static CACHE: OnceLock<Mutex<HashMap<(usize, OpMonomial), DiffOp>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(op) = cache.lock().expect("sigma cache").get(&(n, q)) {
        return op.clone();
    }
    let op = DiffOp::sigma(n).left_monomial(q);
    cache.lock().expect("sigma cache").insert((n, q), op.clone());
    op
}

// ---------------------------------------------------------------------------
// Densities as operands

/// `F·α^λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    pub coeff: SuperPoly,
    pub weight: Rat,
}

impl Density {
    pub fn new(coeff: SuperPoly, weight: Rat) -> Self {
        Density { coeff, weight }
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.coeff, rat::fmt_rat(&self.weight))
    }
}

/// Evaluate `A` on a density of weight `A.source_weight`.
pub fn apply(a: &DiffOp, d: &Density) -> Result<Density> {
    if d.coeff.n != a.n {
        return Err(Error::Arity { left: a.n, right: d.coeff.n });
    }
    if d.weight != a.source_weight {
        return Err(Error::Weight(format!(
            "density weight {} vs operator source {}",
            rat::fmt_rat(&d.weight),
            rat::fmt_rat(&a.source_weight)
        )));
    }
    Ok(Density::new(a.apply_poly(&d.coeff), a.target_weight.clone()))
}

// ---------------------------------------------------------------------------
// Binary operators

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryDiffOp {
    pub n: usize,
    pub lambda: Rat,
    pub mu: Rat,
    pub nu: Rat,
    pub terms: BinaryTerms,
}

impl BinaryDiffOp {
    pub fn zero(n: usize, lambda: Rat, mu: Rat, nu: Rat) -> Self {
        BinaryDiffOp { n, lambda, mu, nu, terms: BTreeMap::new() }
    }

    pub fn raw(n: usize) -> Self {
        Self::zero(n, Rat::zero(), Rat::zero(), Rat::zero())
    }

    pub fn with_weights(mut self, lambda: Rat, mu: Rat, nu: Rat) -> Self {
        self.lambda = lambda;
        self.mu = mu;
        self.nu = nu;
        self
    }

    fn empty_like(&self) -> Self {
        BinaryDiffOp { terms: BTreeMap::new(), ..self.clone() }
    }

    pub fn monomial(n: usize, q1: OpMonomial, q2: OpMonomial, coeff: SuperPoly) -> Self {
        let mut t = Self::raw(n);
        add_binary(&mut t.terms, (q1, q2), &coeff, &Rat::one());
        t
    }

    /// `(F, G) ↦ F·G`.
    pub fn product(n: usize) -> Self {
        Self::monomial(n, OpMonomial::ID, OpMonomial::ID, SuperPoly::one(n))
    }

    /// `(F, G) ↦ coeff · U₁(F) · U₂(G)` with all Koszul signs resolved.
    pub fn from_slots(coeff: &SuperPoly, u1: &DiffOp, u2: &DiffOp) -> Self {
        let base = Self::monomial(coeff.n, OpMonomial::ID, OpMonomial::ID, coeff.clone());
        base.compose_slot1(u1).compose_slot2(u2)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn parity(&self) -> Parity {
        parity_of(
            self.terms
                .iter()
                .flat_map(|((q1, q2), a)| a.terms.keys().map(move |m| q1.odd() ^ q2.odd() ^ m.odd())),
        )
    }

    pub fn homogeneous_parity(&self) -> Result<bool> {
        match self.parity() {
            Parity::Even => Ok(false),
            Parity::Odd => Ok(true),
            Parity::Mixed => Err(Error::MixedParity(format!("binary operator {self}"))),
        }
    }

    pub fn add_scaled(&mut self, other: &BinaryDiffOp, c: &Rat) {
        for (k, a) in &other.terms {
            add_binary(&mut self.terms, *k, a, c);
        }
    }

    pub fn scale(&self, c: &Rat) -> BinaryDiffOp {
        let mut out = self.empty_like();
        out.add_scaled(self, c);
        out
    }

    pub fn plus(&self, other: &BinaryDiffOp) -> BinaryDiffOp {
        let mut out = self.clone();
        out.add_scaled(other, &Rat::one());
        out
    }

    pub fn minus(&self, other: &BinaryDiffOp) -> BinaryDiffOp {
        let mut out = self.clone();
        out.add_scaled(other, &-Rat::one());
        out
    }

    /// Flat coordinates `(D₁, D₂, coefficient monomial) ↦ scalar`.
    pub fn coordinates(&self) -> BTreeMap<(OpMonomial, OpMonomial, Monomial), Rat> {
        self.terms
            .iter()
            .flat_map(|((q1, q2), a)| a.terms.iter().map(move |(m, c)| ((*q1, *q2, *m), c.clone())))
            .collect()
    }

    /// `Σ c_j ops[j]`, with weights of the first operator.
    pub fn combination(n: usize, ops: &[BinaryDiffOp], coeffs: &[Rat]) -> BinaryDiffOp {
        let mut out = ops.first().map(|o| o.empty_like()).unwrap_or_else(|| BinaryDiffOp::raw(n));
        for (o, c) in ops.iter().zip(coeffs) {
            out.add_scaled(o, c);
        }
        out
    }

    /// Total order in halves, per term maximum of `ord(D₁) + ord(D₂)`.
    pub fn half_order(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a.half_order() + b.half_order()).max().unwrap_or(0)
    }

    pub fn max_coeff_xdeg(&self) -> u32 {
        self.terms.values().map(|a| a.max_xdeg()).max().unwrap_or(0)
    }

    pub fn apply_polys(&self, f: &SuperPoly, g: &SuperPoly) -> SuperPoly {
        let mut out = SuperPoly::zero(self.n);
        let mut cache1: HashMap<OpMonomial, SuperPoly> = HashMap::new();
        let mut cache2: HashMap<OpMonomial, SuperPoly> = HashMap::new();
        for ((q1, q2), a) in &self.terms {
            let v1 = cache1.entry(*q1).or_insert_with(|| q1.apply(f)).clone();
            if v1.is_zero() {
                continue;
            }
            let v2 = cache2.entry(*q2).or_insert_with(|| q2.apply(g)).clone();
            if v2.is_zero() {
                continue;
            }
            out.add_scaled(&a.mul_raw(&v1).mul_raw(&v2), &Rat::one());
        }
        out
    }

    /// Evaluate on densities of weights `(λ, μ)`; the result has weight `ν`.
    pub fn apply(&self, f: &Density, g: &Density) -> Result<Density> {
        if f.weight != self.lambda || g.weight != self.mu {
            return Err(Error::Weight("binary operator input weights".into()));
        }
        Ok(Density::new(self.apply_polys(&f.coeff, &g.coeff), self.nu.clone()))
    }

    /// `b · self`.
    pub fn left_mul(&self, b: &SuperPoly) -> BinaryDiffOp {
        let mut out = self.empty_like();
        for (k, a) in &self.terms {
            add_binary(&mut out.terms, *k, &b.mul_raw(a), &Rat::one());
        }
        out
    }

    /// `η_i ∘ self` by the super-Leibniz rule; `(−1)^{|F|}` becomes `σ` in slot 1.
    pub fn left_eta(&self, i: usize) -> BinaryDiffOp {
        let n = self.n;
        let mut out = self.empty_like();
        for ((q1, q2), a) in &self.terms {
            add_binary(&mut out.terms, (*q1, *q2), &a.eta(i), &Rat::one());
            let (neg1, e1) = q1.eta_left(i);
            let (neg2, e2) = q2.eta_left(i);
            let q1s = monomial_after_sigma(n, *q1);
            for (m, c) in &a.terms {
                let s1 = neg1 ^ m.odd();
                add_binary(&mut out.terms, (e1, *q2), &SuperPoly::monomial(n, *m), &(rat::sign(s1) * c));
                let s2 = neg2 ^ m.odd() ^ q1.odd();
                let coef = rat::sign(s2) * c;
                for (q1b, cb) in &q1s.terms {
                    add_binary(&mut out.terms, (*q1b, e2), &cb.lmul_monomial(*m, &Rat::one()), &coef);
                }
            }
        }
        out
    }

    /// `∂_x ∘ self`.
    pub fn left_dx(&self) -> BinaryDiffOp {
        let mut out = self.empty_like();
        for ((q1, q2), a) in &self.terms {
            add_binary(&mut out.terms, (*q1, *q2), &a.dx(), &Rat::one());
            add_binary(&mut out.terms, (OpMonomial::new(q1.xorder + 1, q1.etas), *q2), a, &Rat::one());
            add_binary(&mut out.terms, (*q1, OpMonomial::new(q2.xorder + 1, q2.etas)), a, &Rat::one());
        }
        out
    }

    pub fn left_monomial(&self, q: OpMonomial) -> BinaryDiffOp {
        let mut out = self.clone();
        for i in mask_indices(q.etas).into_iter().rev() {
            out = out.left_eta(i);
        }
        for _ in 0..q.xorder {
            out = out.left_dx();
        }
        out
    }

    /// `U ∘ self` (U acts on the output).
    pub fn left_compose(&self, u: &DiffOp) -> BinaryDiffOp {
        let mut out = self.empty_like();
        for (q, a) in &u.terms {
            let inner = self.left_monomial(*q);
            for (k, b) in &inner.terms {
                add_binary(&mut out.terms, *k, &a.mul_raw(b), &Rat::one());
            }
        }
        out
    }

    /// `(F, G) ↦ self(U F, G)`.
    pub fn compose_slot1(&self, u: &DiffOp) -> BinaryDiffOp {
        let mut out = self.empty_like();
        let mut memo: HashMap<OpMonomial, DiffOp> = HashMap::new();
        for ((q1, q2), a) in &self.terms {
            let qu = memo.entry(*q1).or_insert_with(|| u.left_monomial(*q1));
            for (q1b, c) in &qu.terms {
                add_binary(&mut out.terms, (*q1b, *q2), &a.mul_raw(c), &Rat::one());
            }
        }
        out
    }

    /// `(F, G) ↦ self(F, U G)`; an odd coefficient of `R∘U` crossing `D₁(F)` brings `σ` into slot 1.
    pub fn compose_slot2(&self, u: &DiffOp) -> BinaryDiffOp {
        let n = self.n;
        let mut out = self.empty_like();
        let mut memo: HashMap<OpMonomial, DiffOp> = HashMap::new();
        for ((q1, q2), a) in &self.terms {
            let ru = memo.entry(*q2).or_insert_with(|| u.left_monomial(*q2)).clone();
            let q1s = if ru.terms.values().any(|d| d.terms.keys().any(|m| m.odd())) {
                Some(monomial_after_sigma(n, *q1))
            } else {
                None
            };
            for (q2b, d) in &ru.terms {
                for (m, c) in &d.terms {
                    let am = a.lmul_monomial(Monomial::ONE, &Rat::one()).mul_raw(&SuperPoly::term(n, *m, c.clone()));
                    if !m.odd() {
                        add_binary(&mut out.terms, (*q1, *q2b), &am, &Rat::one());
                    } else {
                        let s = rat::sign(q1.odd());
                        for (q1b, cb) in &q1s.as_ref().expect("sigma table").terms {
                            add_binary(&mut out.terms, (*q1b, *q2b), &am.mul_raw(cb), &s);
                        }
                    }
                }
            }
        }
        out
    }

    /// `self ∘ (U₁ ⊗ U₂)`.
    pub fn compose_slots(&self, u1: &DiffOp, u2: &DiffOp) -> BinaryDiffOp {
        self.compose_slot1(u1).compose_slot2(u2)
    }

    /// Multiply by a sign depending on the input parities: `s[p][q]` for `|F| = p`, `|G| = q`.
    pub fn parity_twist(&self, s: [[i64; 2]; 2]) -> BinaryDiffOp {
        let sig = DiffOp::sigma(self.n);
        let id = DiffOp::identity(self.n);
        let mut out = self.empty_like();
        for a in 0..2 {
            for b in 0..2 {
                // Fourier coefficient on Z2 × Z2.
                let mut c = 0i64;
                for p in 0..2 {
                    for q in 0..2 {
                        let ch = if (a * p + b * q) % 2 == 1 { -1 } else { 1 };
                        c += s[p][q] * ch;
                    }
                }
                if c == 0 {
                    continue;
                }
                let u1 = if a == 1 { &sig } else { &id };
                let u2 = if b == 1 { &sig } else { &id };
                out.add_scaled(&self.compose_slots(u1, u2), &rat::frac(c, 4));
            }
        }
        out
    }

    pub fn embed(&self, n: usize) -> BinaryDiffOp {
        BinaryDiffOp {
            n,
            lambda: self.lambda.clone(),
            mu: self.mu.clone(),
            nu: self.nu.clone(),
            terms: self.terms.iter().map(|(k, a)| (*k, a.embed(n))).collect(),
        }
    }

    /// Plug a fixed first argument: the unary operator `G ↦ self(F, G)`.
    pub fn partial_apply(&self, f: &SuperPoly) -> DiffOp {
        let mut out = DiffOp::raw(self.n);
        let mut cache: HashMap<OpMonomial, SuperPoly> = HashMap::new();
        for ((q1, q2), a) in &self.terms {
            let v = cache.entry(*q1).or_insert_with(|| q1.apply(f)).clone();
            if v.is_zero() {
                continue;
            }
            add_unary_poly(&mut out.terms, *q2, &a.mul_raw(&v), &Rat::one());
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Text form

fn op_factors(q: &OpMonomial) -> Vec<String> {
    let mut f = Vec::new();
    match q.xorder {
        0 => {}
        1 => f.push("dx".to_string()),
        k => f.push(format!("dx^{k}")),
    }
    for i in mask_indices(q.etas) {
        f.push(format!("e{i}"));
    }
    f
}

fn coeff_parts(m: &Monomial) -> Vec<String> {
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

fn write_terms(out: &mut String, first: &mut bool, c: &Rat, mut factors: Vec<String>) {
    let negative = c < &Rat::zero();
    let mag = if negative { -c.clone() } else { c.clone() };
    if *first {
        if negative {
            out.push('-');
        }
    } else {
        out.push_str(if negative { " - " } else { " + " });
    }
    *first = false;
    if !mag.is_one() || factors.is_empty() {
        factors.insert(0, rat::fmt_rat(&mag));
    }
    out.push_str(&factors.join(" * "));
}

/// Canonical operator text, e.g. `-1/2 * t1 * dx * e2`.
pub fn format_op(a: &DiffOp) -> String {
    let mut out = String::new();
    let mut first = true;
    for (q, p) in a.terms.iter().rev() {
        for (m, c) in p.terms.iter().rev() {
            let mut f = coeff_parts(m);
            f.extend(op_factors(q));
            write_terms(&mut out, &mut first, c, f);
        }
    }
    if first {
        out.push('0');
    }
    out
}

fn slot_text(q: &OpMonomial) -> String {
    let f = op_factors(q);
    if f.is_empty() {
        "1".to_string()
    } else {
        f.join("*")
    }
}

/// Canonical binary operator text, e.g. `-1/2 * [e1 | e1] + mu * [dx | 1]`.
pub fn format_binary(t: &BinaryDiffOp) -> String {
    let mut out = String::new();
    let mut first = true;
    for ((q1, q2), p) in t.terms.iter().rev() {
        for (m, c) in p.terms.iter().rev() {
            let mut f = coeff_parts(m);
            f.push(format!("[{} | {}]", slot_text(q1), slot_text(q2)));
            write_terms(&mut out, &mut first, c, f);
        }
    }
    if first {
        out.push('0');
    }
    out
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_op(self))
    }
}

impl fmt::Display for BinaryDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_binary(self))
    }
}

/// Parse a unary operator literal: terms of `*`-separated factors, coefficient factors
/// (`3/2`, `x^2`, `t1`) before operator factors (`dx^k`, `e<i>`).
pub fn parse_op(text: &str, n: usize) -> Result<DiffOp> {
    let bytes = text.as_bytes();
    let mut out = DiffOp::raw(n);
    let mut pos = 0usize;
    let mut sign = Rat::one();
    let err = |offset: usize, message: &str| Error::Parse { offset, message: message.to_string() };
    let skip = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let read_uint = |pos: &mut usize| -> Option<u64> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        std::str::from_utf8(&bytes[start..*pos]).ok()?.parse().ok()
    };
    skip(&mut pos);
    if pos < bytes.len() && bytes[pos] == b'-' {
        sign = -sign;
        pos += 1;
    }
    loop {
        let mut coeff = SuperPoly::constant(n, sign.clone());
        let mut op = OpMonomial::ID;
        let mut op_neg = false;
        let mut in_ops = false;
        loop {
            skip(&mut pos);
            let at = pos;
            match bytes.get(pos) {
                Some(c) if c.is_ascii_digit() => {
                    if in_ops {
                        return Err(err(at, "coefficient after operator factor"));
                    }
                    let num = read_uint(&mut pos).ok_or_else(|| err(at, "bad integer"))?;
                    let mut r = rat::int(num as i64);
                    if bytes.get(pos) == Some(&b'/') {
                        pos += 1;
                        let d = read_uint(&mut pos).ok_or_else(|| err(pos, "expected denominator"))?;
                        if d == 0 {
                            return Err(err(pos, "zero denominator"));
                        }
                        r /= rat::int(d as i64);
                    }
                    coeff = coeff.scale(&r);
                }
                Some(b'x') | Some(b't') => {
                    if in_ops {
                        return Err(err(at, "coefficient after operator factor"));
                    }
                    let mut end = pos + 1;
                    while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'^') {
                        end += 1;
                    }
                    let piece = std::str::from_utf8(&bytes[pos..end]).expect("ascii");
                    let f = crate::grassmann::parse_poly(piece, n).map_err(|e| match e {
                        Error::Parse { offset, message } => err(at + offset, &message),
                        other => other,
                    })?;
                    coeff = coeff.mul_raw(&f);
                    pos = end;
                }
                Some(b'd') if bytes.get(pos + 1) == Some(&b'x') => {
                    in_ops = true;
                    pos += 2;
                    let k = if bytes.get(pos) == Some(&b'^') {
                        pos += 1;
                        read_uint(&mut pos).ok_or_else(|| err(pos, "expected exponent"))? as u32
                    } else {
                        1
                    };
                    op.xorder += k;
                }
                Some(b'e') => {
                    in_ops = true;
                    pos += 1;
                    let i = read_uint(&mut pos).ok_or_else(|| err(pos, "expected η index"))? as usize;
                    if i == 0 || i > n {
                        return Err(err(at + 1, &format!("η index {i} out of range 1..={n}")));
                    }
                    // Right multiplication by η_i: move it left past the larger indices.
                    let b = bit(i);
                    let larger = (op.etas >> i).count_ones();
                    if op.etas & b == 0 {
                        op_neg ^= larger % 2 == 1;
                        op.etas |= b;
                    } else {
                        op_neg ^= larger % 2 == 0;
                        op.etas &= !b;
                        op.xorder += 1;
                    }
                }
                _ => return Err(err(at, "expected factor")),
            }
            skip(&mut pos);
            if bytes.get(pos) == Some(&b'*') {
                pos += 1;
                continue;
            }
            break;
        }
        add_unary_poly(&mut out.terms, op, &coeff, &rat::sign(op_neg));
        skip(&mut pos);
        match bytes.get(pos) {
            None => return Ok(out),
            Some(b'+') => sign = Rat::one(),
            Some(b'-') => sign = -Rat::one(),
            Some(_) => return Err(err(pos, "expected `+`, `-` or end of input")),
        }
        pos += 1;
    }
}

// ---------------------------------------------------------------------------
// Module actions

/// `L^λ_{X_F} = F∂_x − ½(−1)^{|F|} Σ η_i(F) η_i + λF′` as a weightless operator.
pub fn lie_operator(f: &SuperPoly, lambda: &Rat) -> Result<DiffOp> {
    let odd = f.homogeneous_parity()?;
    let n = f.n;
    let mut op = DiffOp::raw(n);
    add_unary_poly(&mut op.terms, OpMonomial::new(1, 0), f, &Rat::one());
    let c = if odd { rat::half() } else { -rat::half() };
    for i in 1..=n {
        add_unary_poly(&mut op.terms, OpMonomial::new(0, bit(i)), &f.eta(i), &c);
    }
    add_unary_poly(&mut op.terms, OpMonomial::ID, &f.dx(), lambda);
    Ok(op.with_weights(lambda.clone(), lambda.clone()))
}

/// `X_F · A` for `A` of effective parity `parity` (the true parity, or flipped for `Π(A)`).
pub fn module_action_with_parity(f: &SuperPoly, a: &DiffOp, parity: bool) -> Result<DiffOp> {
    let fodd = f.homogeneous_parity()?;
    let lmu = lie_operator(f, &a.target_weight)?;
    let llam = lie_operator(f, &a.source_weight)?;
    let left = lmu.compose_raw(a);
    let right = a.compose_raw(&llam);
    let s = rat::sign(parity && fodd);
    let mut out = left;
    out.add_scaled(&right, &-s);
    Ok(out.with_weights(a.source_weight.clone(), a.target_weight.clone()))
}

/// `X_F · A = L^μ∘A − (−1)^{|A||F|} A∘L^λ`.
pub fn module_action(x: &crate::contact::ContactField, a: &DiffOp) -> Result<DiffOp> {
    if x.n != a.n {
        return Err(Error::Arity { left: x.n, right: a.n });
    }
    let p = a.homogeneous_parity()?;
    module_action_with_parity(&x.generator, a, p)
}

/// Binary analogue with effective parity `parity`.
pub fn binary_module_action_with_parity(f: &SuperPoly, t: &BinaryDiffOp, parity: bool) -> Result<BinaryDiffOp> {
    let fodd = f.homogeneous_parity()?;
    let lnu = lie_operator(f, &t.nu)?;
    let llam = lie_operator(f, &t.lambda)?;
    let lmu = lie_operator(f, &t.mu)?;
    let mut out = t.left_compose(&lnu);
    // T ∘ L^{λ,μ}: (F,G) ↦ T(L^λF, G) + (−1)^{|X||F|} T(F, L^μG)
    let mut right = t.compose_slot1(&llam);
    let second = if fodd {
        t.compose_slots(&DiffOp::sigma(t.n), &lmu)
    } else {
        t.compose_slot2(&lmu)
    };
    right.add_scaled(&second, &Rat::one());
    out.add_scaled(&right, &-rat::sign(parity && fodd));
    Ok(out)
}

/// `X_F · T = L^ν∘T − (−1)^{|T||F|} T∘L^{λ,μ}`.
pub fn binary_module_action(x: &crate::contact::ContactField, t: &BinaryDiffOp) -> Result<BinaryDiffOp> {
    if x.n != t.n {
        return Err(Error::Arity { left: x.n, right: t.n });
    }
    let p = t.homogeneous_parity()?;
    binary_module_action_with_parity(&x.generator, t, p)
}

// ---------------------------------------------------------------------------
// Π bookkeeping and the splitting lifts

/// Parity-change twists: bit per input slot and one for the output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct PiTag {
    pub inputs: [bool; 2],
    pub output: bool,
}

impl PiTag {
    /// Composing two twists on a slot cancels.
    pub fn compose(self, other: PiTag) -> PiTag {
        PiTag {
            inputs: [self.inputs[0] ^ other.inputs[0], self.inputs[1] ^ other.inputs[1]],
            output: self.output ^ other.output,
        }
    }

    /// The whole module is `Π`-twisted iff an odd number of slots are.
    pub fn module_pi(&self) -> bool {
        (self.inputs[0] as u8 + self.inputs[1] as u8 + self.output as u8) % 2 == 1
    }
}

/// `F ↦ F₁` where `F = F₁ + F₂θ_n`.
fn first_part(n: usize) -> DiffOp {
    DiffOp::drop_theta(n, n)
}

/// `F ↦ F₂`: `∂_n F = (−1)^{|F₂|} F₂`, so `F₂ = σ∂_n F`.
fn second_part(n: usize) -> DiffOp {
    DiffOp::sigma(n).compose_raw(&DiffOp::partial(n, n))
}

/// `K ↦ Kθ_n = θ_n σ(K)`.
fn times_theta(n: usize) -> DiffOp {
    DiffOp::sigma(n).left_mul(&SuperPoly::theta(n, n))
}

/// Slot of the four-term splitting of `𝔻ⁿ_{λ,μ}` as `K(n−1)`-module.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiSlot {
    /// `𝔻_{λ,μ}`
    Plain,
    /// `𝔻_{λ+½,μ+½}`, identified by `A ↦ Π∘A∘Π`
    Shifted,
    /// `Π(𝔻_{λ,μ+½})`, identified by `Π(A) ↦ Π∘A`
    PiTarget,
    /// `Π(𝔻_{λ+½,μ})`, identified by `Π(A) ↦ A∘Π`
    PiSource,
}

impl PhiSlot {
    pub const ALL: [PhiSlot; 4] = [PhiSlot::Plain, PhiSlot::Shifted, PhiSlot::PiTarget, PhiSlot::PiSource];

    /// Weight shifts (source, target) in halves and the Π tag.
    pub fn shifts(&self) -> (i64, i64, PiTag) {
        match self {
            PhiSlot::Plain => (0, 0, PiTag::default()),
            PhiSlot::Shifted => (1, 1, PiTag { inputs: [true, false], output: true }),
            PhiSlot::PiTarget => (0, 1, PiTag { inputs: [false, false], output: true }),
            PhiSlot::PiSource => (1, 0, PiTag { inputs: [true, false], output: false }),
        }
    }

    /// Slot for `(j, ℓ)` in the Θ-lift notation: source `λ + j/2`, target shift `ℓ`.
    pub fn from_bits(j: bool, l: bool) -> PhiSlot {
        match (j, l) {
            (false, false) => PhiSlot::Plain,
            (true, true) => PhiSlot::Shifted,
            (false, true) => PhiSlot::PiTarget,
            (true, false) => PhiSlot::PiSource,
        }
    }
}

/// The `n`-variable operator realising one slot of `φ_μ^{-1} ∘ A ∘ φ_λ`, for `A` over `n−1`
/// variables already embedded in `n`.
pub fn phi_slot_operator(slot: PhiSlot, a: &DiffOp) -> DiffOp {
    let n = a.n;
    let (input, output) = match slot {
        PhiSlot::Plain => (first_part(n), None),
        PhiSlot::Shifted => (second_part(n), Some(times_theta(n))),
        PhiSlot::PiTarget => (first_part(n), Some(times_theta(n))),
        PhiSlot::PiSource => (second_part(n), None),
    };
    let inner = a.compose_raw(&input);
    match output {
        Some(o) => o.compose_raw(&inner),
        None => inner,
    }
}

/// [`phi_slot_operator`] applied to the output of a binary operator, i.e. to `G ↦ T(F, G)` for
/// every fixed `F`.
pub fn phi_slot_binary(slot: PhiSlot, t: &BinaryDiffOp) -> BinaryDiffOp {
    let n = t.n;
    let (input, output) = match slot {
        PhiSlot::Plain => (first_part(n), None),
        PhiSlot::Shifted => (second_part(n), Some(times_theta(n))),
        PhiSlot::PiTarget => (first_part(n), Some(times_theta(n))),
        PhiSlot::PiSource => (second_part(n), None),
    };
    let inner = t.compose_slot2(&input);
    match output {
        Some(o) => inner.left_compose(&o),
        None => inner,
    }
}

/// `Φ_{λ,μ}`: parts in slot order Plain, Shifted, PiTarget, PiSource, each over `n−1` variables.
pub fn phi_lift(n: usize, lambda: &Rat, mu: &Rat, parts: &[DiffOp; 4]) -> Result<DiffOp> {
    let h = rat::half();
    let mut out = DiffOp::zero(n, lambda.clone(), mu.clone());
    for (slot, part) in PhiSlot::ALL.iter().zip(parts.iter()) {
        let (s, t, _) = slot.shifts();
        let want_s = lambda + &h * rat::int(s);
        let want_t = mu + &h * rat::int(t);
        if part.is_zero() {
            continue;
        }
        if part.n + 1 != n {
            return Err(Error::Signature(format!("{slot:?} part has n = {}, expected {}", part.n, n - 1)));
        }
        if part.source_weight != want_s || part.target_weight != want_t {
            return Err(Error::Signature(format!(
                "{slot:?} part has weights ({}, {}), expected ({}, {})",
                rat::fmt_rat(&part.source_weight),
                rat::fmt_rat(&part.target_weight),
                rat::fmt_rat(&want_s),
                rat::fmt_rat(&want_t)
            )));
        }
        let lifted = phi_slot_operator(*slot, &part.embed(n));
        out.add_scaled(&lifted, &Rat::one());
    }
    Ok(out)
}

/// Slot `(j, ℓ, k)` of the eight-term splitting of `𝔻ⁿ_{λ,μ;ν}`: weights shifted by halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PsiSlot {
    pub j: bool,
    pub l: bool,
    pub k: bool,
}

impl PsiSlot {
    pub fn all() -> [PsiSlot; 8] {
        let mut out = [PsiSlot { j: false, l: false, k: false }; 8];
        for (idx, slot) in out.iter_mut().enumerate() {
            *slot = PsiSlot { j: idx & 4 != 0, l: idx & 2 != 0, k: idx & 1 != 0 };
        }
        out
    }

    /// Summands with an odd number of shifted weights are `Π`-twisted.
    pub fn is_pi(&self) -> bool {
        (self.j as u8 + self.l as u8 + self.k as u8) % 2 == 1
    }

    pub fn tag(&self) -> PiTag {
        PiTag { inputs: [self.j, self.l], output: self.k }
    }
}

/// The concrete `n`-variable binary operator of one Ψ slot, following the identification table:
/// inputs are split as `F₁ + F₂θ_n`, a `Π`-output is multiplied by `θ_n` on the right. The
/// part transforms with effective parity `|A| + j + ℓ + k`.
pub fn psi_slot_operator(slot: PsiSlot, a: &BinaryDiffOp) -> BinaryDiffOp {
    let n = a.n;
    let sig = DiffOp::sigma(n);
    let p1 = first_part(n);
    let p2 = second_part(n);
    // T(F, G) = A(u(F), σ^j w(G)): passing X over a split-off θ_n in F costs (−1)^{|X|},
    // which σ on the second input absorbs.
    let u1 = if slot.j { p2.clone() } else { p1.clone() };
    let w = if slot.l { p2 } else { p1 };
    let u2 = if slot.j { sig.compose_raw(&w) } else { w };
    let inner = a.compose_slots(&u1, &u2);
    if slot.k {
        inner.left_compose(&times_theta(n))
    } else {
        inner
    }
}

/// `Ψ_{λ,μ,ν}`: parts ordered as `PsiSlot::all()`, each over `n−1` variables with weights
/// `(λ + j/2, μ + ℓ/2, ν + k/2)`.
pub fn psi_lift(n: usize, lambda: &Rat, mu: &Rat, nu: &Rat, parts: &[BinaryDiffOp; 8]) -> Result<BinaryDiffOp> {
    let h = rat::half();
    let mut out = BinaryDiffOp::zero(n, lambda.clone(), mu.clone(), nu.clone());
    for (slot, part) in PsiSlot::all().iter().zip(parts.iter()) {
        if part.is_zero() {
            continue;
        }
        let want = (
            lambda + &h * rat::int(slot.j as i64),
            mu + &h * rat::int(slot.l as i64),
            nu + &h * rat::int(slot.k as i64),
        );
        if part.n + 1 != n {
            return Err(Error::Signature(format!("{slot:?} part has n = {}, expected {}", part.n, n - 1)));
        }
        if (part.lambda.clone(), part.mu.clone(), part.nu.clone()) != want {
            return Err(Error::Signature(format!("{slot:?} part carries the wrong weights")));
        }
        out.add_scaled(&psi_slot_operator(*slot, &part.embed(n)), &Rat::one());
    }
    Ok(out)
}

/// `A ↦ Π(A∘(σ⊗σ))`, the parity flip used for the `K(1)` list.
pub fn od_map(a: &BinaryDiffOp) -> BinaryDiffOp {
    let s = DiffOp::sigma(a.n);
    a.compose_slots(&s, &s)
}

/// `χ(A) = Π(σ∘A)`; the returned operator is the underlying `σ∘A`.
pub fn chi(a: &DiffOp) -> DiffOp {
    DiffOp::sigma(a.n).compose_raw(a).with_weights(a.source_weight.clone(), a.target_weight.clone())
}

/// `B ↦ Π(B∘σ)`; the returned operator is the underlying `B∘σ`.
pub fn pi_after_sigma(b: &DiffOp) -> DiffOp {
    b.compose_raw(&DiffOp::sigma(b.n)).with_weights(b.source_weight.clone(), b.target_weight.clone())
}
