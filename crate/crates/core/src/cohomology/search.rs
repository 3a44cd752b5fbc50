//! Bounded-order `H¹` computation: cochain ansatz, cocycle kernel, coboundary image, quotient.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::One;
use rayon::prelude::*;

use super::catalog::cocycle_catalog;
use super::{cocycle_defect, delta0, operator_ansatz, Cochain1};
use crate::contact::generators;
use crate::diffops::{BinaryDiffOp, DiffOp, OpMonomial};
use crate::exactla::{refine_kernel, Echelon, SparseVec};
use crate::grassmann::{Monomial, SuperPoly};
use crate::rat::{self, Rat};

/// Generator degree used for the cocycle constraints.
pub const CONSTRAINT_DMAX: u32 = 3;

/// Outcome of [`h1_dim`] or [`relative_h1_dim`].
#[derive(Clone, Debug)]
pub struct H1Report {
    pub n: usize,
    pub lambda: Rat,
    pub mu: Rat,
    /// `Some(i)` for cohomology relative to `K(n−1)^i`.
    pub relative: Option<usize>,
    pub z_dim: usize,
    pub b_dim: usize,
    pub h1_dim: usize,
    /// Cocycles completing a basis of `B` to one of `Z`.
    pub representatives: Vec<Cochain1>,
    /// Catalog cocycles whose class is nonzero in the computed quotient.
    pub matched: Vec<String>,
    pub max_order: u32,
    pub generator_dmax: u32,
    /// Unknowns after symmetry reduction.
    pub ansatz_size: usize,
    /// Every representative passed `is_cocycle` independently.
    pub verified: bool,
}

impl fmt::Display for H1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} lambda={} mu={}{}: dim Z={} dim B={} dim H1={} (order <= {}, generators x-degree <= {})",
            self.n,
            rat::fmt_rat(&self.lambda),
            rat::fmt_rat(&self.mu),
            self.relative.map(|i| format!(" relative to K(n-1)^{i}")).unwrap_or_default(),
            self.z_dim,
            self.b_dim,
            self.h1_dim,
            self.max_order,
            self.generator_dmax
        )
    }
}

/// Graded cochain monomials `θ_U (∂_x^{k₁}η_S G)(∂_x^{k₂}η_T H)` of total order ≤ `max_order`.
///
/// Equivariance under `X_x` fixes `2(k₁+k₂) + |S| + |T| − |U| = 2(μ−λ+1)`; cohomology lives in
/// this weight space, so nothing is lost by the filter.
pub fn cochain_ansatz(n: usize, lambda: &Rat, mu: &Rat, max_order: u32) -> Vec<BinaryDiffOp> {
    let d2 = (mu - lambda + Rat::one()) * rat::int(2);
    let mut out = Vec::new();
    if !d2.is_integer() {
        return out;
    }
    let d2: i64 = d2.to_integer().try_into().unwrap_or(i64::MAX);
    let full = 1u32 << n;
    for u in 0..full {
        for s in 0..full {
            for t in 0..full {
                let eta = (s.count_ones() + t.count_ones()) as i64;
                let tk = d2 + u.count_ones() as i64 - eta;
                if tk < 0 || tk % 2 != 0 || tk + eta > 2 * max_order as i64 {
                    continue;
                }
                let k = (tk / 2) as u32;
                for k1 in 0..=k {
                    let c = SuperPoly::monomial(n, Monomial::new(0, u));
                    out.push(BinaryDiffOp::monomial(n, OpMonomial::new(k1, s), OpMonomial::new(k - k1, t), c));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Symmetry reduction

/// A signed permutation `θ_i ↦ ±θ_{π(i)}`: `images[i−1] = (π(i), negative)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedPerm {
    pub images: Vec<(usize, bool)>,
}

impl SignedPerm {
    /// Image of `θ_S` (ascending product): the sign and the new mask.
    pub fn act_mask(&self, mask: u32) -> (bool, u32) {
        let mut neg = false;
        let mut seq = Vec::new();
        for (i, &(j, s)) in self.images.iter().enumerate() {
            if mask & (1 << i) != 0 {
                neg ^= s;
                seq.push(j);
            }
        }
        for a in 0..seq.len() {
            for b in a + 1..seq.len() {
                if seq[a] > seq[b] {
                    neg = !neg;
                }
            }
        }
        (neg, seq.iter().fold(0, |m, j| m | (1 << (j - 1))))
    }

    fn act_op(&self, q: OpMonomial) -> (bool, OpMonomial) {
        let (s, m) = self.act_mask(q.etas);
        (s, OpMonomial::new(q.xorder, m))
    }

    fn act_poly(&self, p: &SuperPoly) -> SuperPoly {
        let mut out = SuperPoly::zero(p.n);
        for (m, c) in &p.terms {
            let (s, mask) = self.act_mask(m.mask);
            out.add_term(Monomial::new(m.xdeg, mask), if s { -c.clone() } else { c.clone() });
        }
        out
    }

    /// The substitution applied to every symbol of a binary operator.
    pub fn act_binary(&self, t: &BinaryDiffOp) -> BinaryDiffOp {
        let mut out = BinaryDiffOp { terms: BTreeMap::new(), ..t.clone() };
        for ((q1, q2), a) in &t.terms {
            let (s1, r1) = self.act_op(*q1);
            let (s2, r2) = self.act_op(*q2);
            let c = self.act_poly(a);
            let part = BinaryDiffOp::monomial(t.n, r1, r2, c);
            out.add_scaled(&part, &rat::sign(s1 ^ s2));
        }
        out
    }

    pub fn act_op_full(&self, a: &DiffOp) -> DiffOp {
        let mut out = DiffOp { terms: BTreeMap::new(), ..a.clone() };
        for (q, c) in &a.terms {
            let (s, r) = self.act_op(*q);
            out.add_scaled(&DiffOp::monomial(a.n, r, self.act_poly(c)), &rat::sign(s));
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n);
            out.push(q);
        }
    }
    out
}

/// Signed permutations of determinant +1. They lie in the connected group `SO(n)`, whose action
/// on `K(n)` is inner, so they act trivially on cohomology.
pub fn rotation_group(n: usize) -> Vec<SignedPerm> {
    let mut out = Vec::new();
    for p in permutations(n) {
        let mut inv = 0;
        for a in 0..n {
            for b in a + 1..n {
                if p[a] > p[b] {
                    inv += 1;
                }
            }
        }
        for signs in 0..(1u32 << n) {
            if (inv + signs.count_ones()) % 2 != 0 {
                continue;
            }
            out.push(SignedPerm { images: (0..n).map(|i| (p[i], signs & (1 << i) != 0)).collect() });
        }
    }
    out
}

/// Nonzero orbit sums of a monomial basis; they span the invariant part of its span.
fn orbit_sums<T, K, F, C>(basis: Vec<T>, group: &[SignedPerm], act: F, coords: C) -> Vec<T>
where
    T: Send + Sync + Clone,
    K: Ord + Clone,
    F: Fn(&SignedPerm, &T) -> T + Sync,
    C: Fn(&T) -> BTreeMap<K, Rat>,
    T: Summable,
{
    let mut seen: BTreeSet<K> = BTreeSet::new();
    let mut out = Vec::new();
    for e in basis {
        let key = coords(&e).into_keys().next().expect("monomial basis");
        if seen.contains(&key) {
            continue;
        }
        let images: Vec<T> = group.par_iter().map(|g| act(g, &e)).collect();
        let mut total = e.empty();
        for im in &images {
            seen.extend(coords(im).into_keys());
            total.accumulate(im);
        }
        if !total.is_empty_sum() {
            out.push(total);
        }
    }
    out
}

trait Summable {
    fn empty(&self) -> Self;
    fn accumulate(&mut self, other: &Self);
    fn is_empty_sum(&self) -> bool;
}

impl Summable for BinaryDiffOp {
    fn empty(&self) -> Self {
        BinaryDiffOp { terms: BTreeMap::new(), ..self.clone() }
    }
    fn accumulate(&mut self, other: &Self) {
        self.add_scaled(other, &Rat::one());
    }
    fn is_empty_sum(&self) -> bool {
        self.is_zero()
    }
}

impl Summable for DiffOp {
    fn empty(&self) -> Self {
        DiffOp { terms: BTreeMap::new(), ..self.clone() }
    }
    fn accumulate(&mut self, other: &Self) {
        self.add_scaled(other, &Rat::one());
    }
    fn is_empty_sum(&self) -> bool {
        self.is_zero()
    }
}

/// Reynolds average of a cochain over [`rotation_group`].
pub fn symmetrize(y: &Cochain1) -> Cochain1 {
    let group = rotation_group(y.n);
    let mut op = BinaryDiffOp { terms: BTreeMap::new(), ..y.op.clone() };
    for g in &group {
        op.add_scaled(&g.act_binary(&y.op), &rat::frac(1, group.len() as i64));
    }
    Cochain1 { op, ..y.clone() }
}

// ---------------------------------------------------------------------------
// Pipeline

enum Constraint {
    /// `β ∘ (P_i ⊗ 1) = 0`: vanishing on `K(n−1)^i`.
    Vanish(usize),
    Field(SuperPoly),
}

fn constraints(n: usize, relative: Option<usize>) -> Vec<Constraint> {
    let mut out: Vec<Constraint> = relative.into_iter().map(Constraint::Vanish).collect();
    // X_{θ_i} and X_{x²} generate; they cut the space fastest. The rest certify.
    let mut fields: Vec<SuperPoly> = (1..=n).map(|i| SuperPoly::theta(n, i)).collect();
    fields.push(SuperPoly::monomial(n, Monomial::new(2, 0)));
    for x in generators(n, CONSTRAINT_DMAX) {
        if !fields.contains(&x.generator) {
            fields.push(x.generator);
        }
    }
    out.extend(fields.into_iter().map(Constraint::Field));
    out
}

type Key = (OpMonomial, OpMonomial, Monomial);

fn index_keys(ops: &[BinaryDiffOp], index: &mut BTreeMap<Key, usize>) -> Vec<SparseVec> {
    ops.iter()
        .map(|o| {
            o.coordinates()
                .into_iter()
                .map(|(k, v)| {
                    let next = index.len();
                    (*index.entry(k).or_insert(next), v)
                })
                .collect()
        })
        .collect()
}

fn pipeline(n: usize, lambda: &Rat, mu: &Rat, max_order: u32, relative: Option<usize>) -> H1Report {
    let weights = |t: BinaryDiffOp| t.with_weights(-Rat::one(), lambda.clone(), mu.clone());
    let raw: Vec<BinaryDiffOp> = cochain_ansatz(n, lambda, mu, max_order).into_iter().map(weights).collect();
    let allowed: BTreeSet<Key> = raw.iter().flat_map(|t| t.coordinates().into_keys()).collect();
    let group = if relative.is_none() && n >= 2 { rotation_group(n) } else { vec![] };
    let cochains = if group.is_empty() {
        raw
    } else {
        orbit_sums(raw, &group, |g, t| g.act_binary(t), |t| t.coordinates())
    };
    let ansatz_size = cochains.len();

    // Cocycles.
    let cons = constraints(n, relative);
    let apply = |c: &Constraint, t: &BinaryDiffOp| match c {
        Constraint::Vanish(i) => t.compose_slot1(&DiffOp::drop_theta(n, *i)).coordinates(),
        Constraint::Field(f) => {
            let y = Cochain1::new(lambda, mu, t.clone());
            cocycle_defect(&y, f).expect("homogeneous").coordinates()
        }
    };
    let (_, z) = refine_kernel(cochains, &cons, apply, |ops, c| BinaryDiffOp::combination(n, ops, c));

    // Coboundaries: δA landing in the cochain ansatz (and vanishing on the subalgebra if relative).
    let mut pots = Vec::new();
    let max_xdeg = if relative.is_some() { 0 } else { 1 };
    for odd in [false, true] {
        pots.extend(operator_ansatz(n, lambda, mu, 2 * max_order, max_xdeg, odd));
    }
    if !group.is_empty() {
        pots = orbit_sums(pots, &group, |g, a| g.act_op_full(a), |a| a.coordinates());
    }
    let images: Vec<BinaryDiffOp> = pots.par_iter().map(|a| delta0(a).expect("homogeneous").op).collect();
    let outside = |t: &BinaryDiffOp| -> BTreeMap<Key, Rat> {
        let mut c = t.coordinates();
        c.retain(|k, _| !allowed.contains(k));
        if let Some(i) = relative {
            for (k, v) in t.compose_slot1(&DiffOp::drop_theta(n, i)).coordinates() {
                // Tag the key so it cannot collide with a cochain coordinate.
                c.insert((OpMonomial::new(u32::MAX, k.0.etas), k.1, k.2), v);
            }
        }
        c
    };
    let (_, b) = refine_kernel(images, &[()], |_, t| outside(t), |ops, c| BinaryDiffOp::combination(n, ops, c));

    // Quotient in raw coordinates.
    let mut index = BTreeMap::new();
    let zv = index_keys(&z, &mut index);
    let bv = index_keys(&b, &mut index);
    let mut zech = Echelon::new(usize::MAX);
    for v in &zv {
        zech.push(v);
    }
    let mut bech = Echelon::new(usize::MAX);
    for v in &bv {
        assert!(zech.contains(v), "coboundary outside the cocycle space");
        bech.push(v);
    }
    let mut reps = Vec::new();
    let mut ext = bech.clone();
    for (v, t) in zv.iter().zip(&z) {
        if ext.push(v) {
            reps.push(Cochain1::new(lambda, mu, t.clone()));
        }
    }
    let (z_dim, b_dim) = (zech.rank(), bech.rank());

    let mut matched = Vec::new();
    for entry in cocycle_catalog(n, lambda, mu) {
        let c = if group.is_empty() { entry.cochain.clone() } else { symmetrize(&entry.cochain) };
        let mut idx = index.clone();
        let v = &index_keys(std::slice::from_ref(&c.op), &mut idx)[0];
        if idx.len() == index.len() && zech.contains(v) && !bech.contains(v) {
            matched.push(entry.name.clone());
        }
    }
    let verified = reps.par_iter().all(|r| matches!(super::is_cocycle(r, CONSTRAINT_DMAX), Ok(None)));
    H1Report {
        n,
        lambda: lambda.clone(),
        mu: mu.clone(),
        relative,
        z_dim,
        b_dim,
        h1_dim: z_dim - b_dim,
        representatives: reps,
        matched,
        max_order,
        generator_dmax: CONSTRAINT_DMAX,
        ansatz_size,
        verified,
    }
}

/// `dim H¹(K(n); 𝔻_{λ,μ})` truncated at cochain order `max_order`.
pub fn h1_dim(n: usize, lambda: &Rat, mu: &Rat, max_order: u32) -> H1Report {
    pipeline(n, lambda, mu, max_order, None)
}

/// `dim H¹(K(n), K(n−1)^i; 𝔻_{λ,μ})` truncated at cochain order `max_order`.
pub fn relative_h1_dim(n: usize, i: usize, lambda: &Rat, mu: &Rat, max_order: u32) -> H1Report {
    pipeline(n, lambda, mu, max_order, Some(i))
}
