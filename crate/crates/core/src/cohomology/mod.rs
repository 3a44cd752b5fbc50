//! First cohomology of `K(n)` with coefficients in `𝔻_{λ,μ}`.
//!
//! A 1-cochain is stored as the binary operator `β(G, H) = Υ(X_G)(H)`, with `G` the generator of
//! weight −1. All cocycle identities are then identities of binary operators in `(G, H)` for a
//! fixed field `X_F`, which evaluation completeness turns into structural equality.

pub mod catalog;
pub mod search;

use std::fmt;

use num_traits::One;
use rayon::prelude::*;

use crate::contact::{generators, ContactField};
use crate::diffops::{lie_operator, module_action_with_parity, BinaryDiffOp, DiffOp, OpMonomial};
use crate::error::{Error, Result};
use crate::exactla::column_solve;
use crate::grassmann::SuperPoly;
use crate::invariants::nonzero_value;
use crate::rat::{self, Rat};

pub use catalog::{coboundary_catalog_k2, cocycle_by_name, cocycle_catalog, cocycle_names, identity_ni_residual, theta_lift, vanishes_on_k1, verify_identity_ni, verify_restriction_claims, CocycleEntry};
pub use search::{h1_dim, relative_h1_dim, H1Report};

/// `X_G ↦ Υ(X_G) ∈ 𝔻_{λ,μ}` (or `Π(𝔻_{λ,μ})` when `pi` is set).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain1 {
    pub n: usize,
    pub lambda: Rat,
    pub mu: Rat,
    pub pi: bool,
    /// `(G, H) ↦ Υ(X_G)(H)`, weights `(−1, λ, μ)`.
    pub op: BinaryDiffOp,
}

impl Cochain1 {
    pub fn new(lambda: &Rat, mu: &Rat, op: BinaryDiffOp) -> Self {
        let op = op.with_weights(-Rat::one(), lambda.clone(), mu.clone());
        Cochain1 { n: op.n, lambda: lambda.clone(), mu: mu.clone(), pi: false, op }
    }

    pub fn zero(n: usize, lambda: &Rat, mu: &Rat) -> Self {
        Self::new(lambda, mu, BinaryDiffOp::raw(n))
    }

    pub fn with_pi(mut self, pi: bool) -> Self {
        self.pi = pi;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.op.is_zero()
    }

    /// Parity of `Υ`, including a `Π` twist.
    pub fn parity(&self) -> Result<bool> {
        if self.op.is_zero() {
            return Ok(self.pi);
        }
        Ok(self.op.homogeneous_parity()? ^ self.pi)
    }

    /// `Υ(X_G)` as a concrete operator.
    pub fn eval(&self, g: &SuperPoly) -> DiffOp {
        self.op.partial_apply(g).with_weights(self.lambda.clone(), self.mu.clone())
    }

    /// Order in halves: `ord(D₁) + ord(D₂)` maximized over terms.
    pub fn half_order(&self) -> u32 {
        self.op.half_order()
    }

    pub fn x_independent(&self) -> bool {
        self.op.max_coeff_xdeg() == 0
    }

    pub fn plus(&self, other: &Cochain1) -> Cochain1 {
        Cochain1 { op: self.op.plus(&other.op), ..self.clone() }
    }

    pub fn minus(&self, other: &Cochain1) -> Cochain1 {
        Cochain1 { op: self.op.minus(&other.op), ..self.clone() }
    }

    pub fn scale(&self, c: &Rat) -> Cochain1 {
        Cochain1 { op: self.op.scale(c), ..self.clone() }
    }

    /// Restriction to `K(n−1)^i`: only the `θ_i`-free part of `G` is fed in.
    pub fn restrict_avoiding(&self, i: usize) -> Cochain1 {
        Cochain1 { op: self.op.compose_slot1(&DiffOp::drop_theta(self.n, i)), ..self.clone() }
    }
}

impl fmt::Display for Cochain1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pi {
            write!(f, "Pi({})", self.op)
        } else {
            write!(f, "{}", self.op)
        }
    }
}

/// `(G, K) ↦ L^μ_{X_G} K` as a binary operator.
pub fn lie_binary(n: usize, mu: &Rat) -> BinaryDiffOp {
    let mut t = BinaryDiffOp::monomial(n, OpMonomial::ID, OpMonomial::new(1, 0), SuperPoly::one(n));
    let sig = DiffOp::sigma(n);
    for i in 1..=n {
        let e = OpMonomial::new(0, 1 << (i - 1));
        let term = BinaryDiffOp::monomial(n, e, e, SuperPoly::one(n)).compose_slot1(&sig);
        t.add_scaled(&term, &-rat::half());
    }
    t.add_scaled(&BinaryDiffOp::monomial(n, OpMonomial::new(1, 0), OpMonomial::ID, SuperPoly::one(n)), mu);
    t
}

fn sigma_pow(n: usize, odd: bool) -> DiffOp {
    if odd {
        DiffOp::sigma(n)
    } else {
        DiffOp::identity(n)
    }
}

/// `δA: X_G ↦ (−1)^{|G||A|} X_G·A`, with `pi` marking `A ∈ Π(𝔻_{λ,μ})`.
pub fn delta0_with(a: &DiffOp, pi: bool) -> Result<Cochain1> {
    let n = a.n;
    let p = if a.is_zero() { false } else { a.homogeneous_parity()? } ^ pi;
    // L^μ_G ∘ A, with (−1)^{|G||A|} absorbed by σ^{|A|} on G.
    let left = lie_binary(n, &a.target_weight).compose_slot2(a).compose_slot1(&sigma_pow(n, p));
    // A ∘ L^λ_G: the signs cancel.
    let right = lie_binary(n, &a.source_weight).left_compose(a);
    Ok(Cochain1::new(&a.source_weight, &a.target_weight, left.minus(&right)).with_pi(pi))
}

/// [`delta0_with`] for an untwisted operator.
pub fn delta0(a: &DiffOp) -> Result<Cochain1> {
    delta0_with(a, false)
}

/// `δΥ(X_F, X_G)(H)` as a binary operator in `(G, H)`, for fixed homogeneous `F`.
pub fn cocycle_defect(y: &Cochain1, f: &SuperPoly) -> Result<BinaryDiffOp> {
    let n = y.n;
    if f.n != n {
        return Err(Error::Arity { left: n, right: f.n });
    }
    let fodd = f.homogeneous_parity()?;
    let p = y.parity()?;
    let beta = &y.op;
    let lmu = lie_operator(f, &y.mu)?;
    let llam = lie_operator(f, &y.lambda)?;
    // (−1)^{|F||Υ|} X_F·Υ(X_G)
    let mut out = beta.left_compose(&lmu).scale(&rat::sign(fodd && p));
    out.add_scaled(&beta.compose_slots(&sigma_pow(n, fodd), &llam), &-Rat::one());
    // −(−1)^{|G|(|F|+|Υ|)} X_G·Υ(X_F)
    let a_f = beta.partial_apply(f);
    let af_odd = fodd ^ p;
    let t = lie_binary(n, &y.mu).compose_slot2(&a_f).compose_slot1(&sigma_pow(n, af_odd));
    out.add_scaled(&t, &-Rat::one());
    out.add_scaled(&lie_binary(n, &y.lambda).left_compose(&a_f), &Rat::one());
    // −Υ([X_F, X_G]), with {F, G} = L^{−1}_{X_F} G
    let u_f = lie_operator(f, &-Rat::one())?;
    out.add_scaled(&beta.compose_slot1(&u_f), &-Rat::one());
    Ok(out)
}

/// `δΥ(X_F, X_G) = (−1)^{|F||Υ|}X_F·Υ(X_G) − (−1)^{|G|(|F|+|Υ|)}X_G·Υ(X_F) − Υ([X_F, X_G])`.
pub fn delta1_defect(y: &Cochain1, xf: &ContactField, xg: &ContactField) -> Result<DiffOp> {
    let (f, g) = (&xf.generator, &xg.generator);
    let (fodd, godd) = (f.homogeneous_parity()?, g.homogeneous_parity()?);
    let p = y.parity()?;
    let yg = y.eval(g);
    let yf = y.eval(f);
    let t1 = module_action_with_parity(f, &yg, p ^ godd)?;
    let t2 = module_action_with_parity(g, &yf, p ^ fodd)?;
    let b = crate::contact::contact_bracket(f, g)?;
    let mut out = t1.scale(&rat::sign(fodd && p));
    out.add_scaled(&t2, &-rat::sign(godd && (fodd ^ p)));
    if !b.is_zero() {
        out.add_scaled(&y.eval(&b), &-Rat::one());
    }
    Ok(out.with_weights(y.lambda.clone(), y.mu.clone()))
}

/// A field pair with a nonzero cocycle defect, and where it shows.
#[derive(Clone, Debug)]
pub struct CocycleWitness {
    pub f: ContactField,
    pub g: SuperPoly,
    pub h: SuperPoly,
    pub value: SuperPoly,
}

impl fmt::Display for CocycleWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dY(X[{}], X[{}])({}) = {}", self.f.generator, self.g, self.h, self.value)
    }
}

fn first_defect(y: &Cochain1, fields: &[ContactField], restrict: Option<usize>) -> Result<Option<CocycleWitness>> {
    let defects: Vec<Result<BinaryDiffOp>> = fields
        .par_iter()
        .map(|x| {
            let d = cocycle_defect(y, &x.generator)?;
            Ok(match restrict {
                Some(i) => d.compose_slot1(&DiffOp::drop_theta(y.n, i)),
                None => d,
            })
        })
        .collect();
    for (x, d) in fields.iter().zip(defects) {
        let d = d?;
        if !d.is_zero() {
            let (g, h, value) = nonzero_value(&d).expect("nonzero operator has a nonzero value");
            return Ok(Some(CocycleWitness { f: x.clone(), g, h, value }));
        }
    }
    Ok(None)
}

/// `δΥ(X_F, ·) = 0` for all `X_F` in `generators(n, dmax)`, symbolically in the second field.
///
/// The fields annihilating `δΥ(X_F, ·)` form a subalgebra, so a generating family suffices.
pub fn is_cocycle(y: &Cochain1, dmax: u32) -> Result<Option<CocycleWitness>> {
    first_defect(y, &generators(y.n, dmax), None)
}

/// Cocycle condition restricted to `K(n−1)^i`.
pub fn is_cocycle_on(y: &Cochain1, i: usize, dmax: u32) -> Result<Option<CocycleWitness>> {
    let fields = crate::contact::subalgebra_generators(y.n, i, dmax);
    first_defect(y, &fields, Some(i))
}

/// Operator ansatz `θ_U x^d ∂_x^k η_S` of a fixed parity with `ord − d − |U|/2 = μ − λ`.
pub fn operator_ansatz(n: usize, lambda: &Rat, mu: &Rat, max_half_order: u32, max_xdeg: u32, odd: bool) -> Vec<DiffOp> {
    let grade2 = (mu - lambda) * rat::int(2);
    let mut out = Vec::new();
    if !grade2.is_integer() {
        return out;
    }
    let grade2: i64 = grade2.to_integer().try_into().unwrap_or(i64::MAX);
    let full = 1u32 << n;
    for s in 0..full {
        for u in 0..full {
            if ((s.count_ones() + u.count_ones()) % 2 == 1) != odd {
                continue;
            }
            for d in 0..=max_xdeg {
                // 2k + |S| − 2d − |U| = 2(μ − λ)
                let twice_k = grade2 + 2 * d as i64 + u.count_ones() as i64 - s.count_ones() as i64;
                if twice_k < 0 || twice_k % 2 != 0 {
                    continue;
                }
                let k = (twice_k / 2) as u32;
                if 2 * k + s.count_ones() > max_half_order {
                    continue;
                }
                let coeff = SuperPoly::monomial(n, crate::grassmann::Monomial::new(d, u));
                out.push(DiffOp::monomial(n, OpMonomial::new(k, s), coeff).with_weights(lambda.clone(), mu.clone()));
            }
        }
    }
    out
}

/// Solve `δA = Υ` over operators of order ≤ `max_order` with coefficients of x-degree ≤ 1.
pub fn is_coboundary(y: &Cochain1, max_order: u32) -> Result<Option<DiffOp>> {
    if y.is_zero() {
        return Ok(Some(DiffOp::zero(y.n, y.lambda.clone(), y.mu.clone())));
    }
    let p = y.parity()?;
    let cands = operator_ansatz(y.n, &y.lambda, &y.mu, 2 * max_order, 1, p ^ y.pi);
    let images: Vec<Result<Cochain1>> = cands.par_iter().map(|a| delta0_with(a, y.pi)).collect();
    let mut cols = Vec::with_capacity(images.len());
    for im in images {
        cols.push(im?.op.coordinates());
    }
    Ok(column_solve(&cols, &y.op.coordinates()).map(|x| {
        DiffOp::combination(y.n, &cands, &x).with_weights(y.lambda.clone(), y.mu.clone())
    }))
}

/// `χ(Υ) = Π(σ∘Υ)`: a cochain with values in the parity-flipped module.
pub fn chi_transport(y: &Cochain1) -> Cochain1 {
    Cochain1 { op: y.op.left_compose(&DiffOp::sigma(y.n)), pi: !y.pi, ..y.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::generators;
    use crate::rat::{frac, int};

    fn dprime(n: usize, lam: &Rat) -> Cochain1 {
        Cochain1::new(lam, lam, BinaryDiffOp::monomial(n, OpMonomial::new(1, 0), OpMonomial::ID, SuperPoly::one(n)))
    }

    #[test]
    fn symbolic_defect_matches_concrete() {
        let n = 2;
        let lam = frac(1, 3);
        let mut op = dprime(n, &lam).op;
        op.add_scaled(&BinaryDiffOp::monomial(n, OpMonomial::new(0, 3), OpMonomial::new(0, 1), SuperPoly::theta(n, 2)), &int(3));
        let y = Cochain1::new(&lam, &(&lam + frac(1, 2)), op);
        let gens = generators(n, 2);
        for xf in &gens {
            let sym = cocycle_defect(&y, &xf.generator).unwrap();
            for xg in &gens {
                let conc = delta1_defect(&y, xf, xg).unwrap();
                assert_eq!(sym.partial_apply(&xg.generator).terms, conc.terms, "F = {}, G = {}", xf.generator, xg.generator);
            }
        }
    }

    #[test]
    fn delta_squared_vanishes() {
        let n = 2;
        for (l, m) in [(frac(1, 3), frac(1, 3)), (frac(1, 3), frac(5, 6)), (int(0), int(1))] {
            for odd in [false, true] {
                for a in operator_ansatz(n, &l, &m, 4, 1, odd) {
                    let y = delta0(&a).unwrap();
                    assert!(is_cocycle(&y, 3).unwrap().is_none(), "A = {a}");
                }
            }
        }
    }

    #[test]
    fn delta0_examples() {
        let lam = frac(2, 5);
        let id = DiffOp::identity(2).with_weights(lam.clone(), lam.clone());
        assert!(delta0(&id).unwrap().is_zero());
        let mu = frac(-1, 5);
        let id = DiffOp::identity(2).with_weights(lam.clone(), mu.clone());
        let expect = BinaryDiffOp::monomial(2, OpMonomial::new(1, 0), OpMonomial::ID, SuperPoly::constant(2, &mu - &lam));
        assert_eq!(delta0(&id).unwrap().op.terms, expect.terms);
    }

    #[test]
    fn defect_examples() {
        let lam = frac(1, 4);
        let y = dprime(2, &lam);
        assert!(is_cocycle(&y, 3).unwrap().is_none());
        let g2 = Cochain1::new(&lam, &lam, BinaryDiffOp::monomial(2, OpMonomial::new(2, 0), OpMonomial::ID, SuperPoly::one(2)));
        let x = ContactField::new(SuperPoly::x(2)).unwrap();
        let x2 = ContactField::new(SuperPoly::x(2).mul_raw(&SuperPoly::x(2))).unwrap();
        assert!(!delta1_defect(&g2, &x, &x2).unwrap().is_zero());
        assert!(is_cocycle(&g2, 3).unwrap().is_some());
    }

    #[test]
    fn g_prime_is_not_a_coboundary() {
        let lam = frac(1, 4);
        assert!(is_coboundary(&dprime(2, &lam), 3).unwrap().is_none());
        let a = DiffOp::partial(2, 1).with_weights(lam.clone(), &lam + frac(1, 2));
        let y = delta0(&a).unwrap();
        let w = is_coboundary(&y, 2).unwrap().expect("coboundary");
        assert_eq!(delta0(&w).unwrap(), y);
    }

    #[test]
    fn chi_preserves_cocycles() {
        let lam = frac(1, 4);
        let y = dprime(2, &lam);
        let c = chi_transport(&y);
        assert!(c.pi);
        assert!(is_cocycle(&c, 3).unwrap().is_none());
        assert!(is_coboundary(&c, 3).unwrap().is_none());
        let a = DiffOp::partial(2, 1).with_weights(lam.clone(), &lam + frac(1, 2));
        let c = chi_transport(&delta0(&a).unwrap());
        assert!(is_cocycle(&c, 3).unwrap().is_none());
        assert!(is_coboundary(&c, 2).unwrap().is_some());
    }
}
