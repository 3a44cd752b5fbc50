//! Invariant binary operators `𝔽_λ ⊗ 𝔽_μ → 𝔽_ν`: the known list, an exact invariance test,
//! the ansatz search, and the Poisson bracket on densities.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::contact::{generators, lie_generating_set, ContactField};
use crate::diffops::{binary_module_action, BinaryDiffOp, Density, DiffOp, OpMonomial};
use crate::error::{Error, Result};
use crate::exactla::{refine_kernel, Subspace};
use crate::grassmann::{Monomial, SuperPoly};
use crate::rat::{self, Rat};

const ID: OpMonomial = OpMonomial { xorder: 0, etas: 0 };
const DX: OpMonomial = OpMonomial { xorder: 1, etas: 0 };
const DX2: OpMonomial = OpMonomial { xorder: 2, etas: 0 };
const E1: OpMonomial = OpMonomial { xorder: 0, etas: 1 };
const E2: OpMonomial = OpMonomial { xorder: 0, etas: 2 };
const E1DX: OpMonomial = OpMonomial { xorder: 1, etas: 1 };
const E12: OpMonomial = OpMonomial { xorder: 0, etas: 3 };

/// `c · (−1)^{s|F|} D₁(F) · D₂(G)`.
fn term(n: usize, c: Rat, sigma_f: bool, d1: OpMonomial, d2: OpMonomial) -> BinaryDiffOp {
    let t = BinaryDiffOp::monomial(n, d1, d2, SuperPoly::constant(n, c));
    if sigma_f {
        t.compose_slot1(&DiffOp::sigma(n))
    } else {
        t
    }
}

fn sum(n: usize, parts: Vec<BinaryDiffOp>) -> BinaryDiffOp {
    let mut out = BinaryDiffOp::raw(n);
    for p in parts {
        out.add_scaled(&p, &Rat::one());
    }
    out
}

/// `η₁(F)G′ + (−1)^{|F|}F′η₁(G)`.
fn s_form(n: usize) -> BinaryDiffOp {
    sum(n, vec![term(n, rat::one(), false, E1, DX), term(n, rat::one(), true, DX, E1)])
}

/// `2η₁(F)η₁(G′) + η₁(F′)η₁(G)`.
fn m_form(n: usize) -> BinaryDiffOp {
    sum(n, vec![term(n, rat::int(2), false, E1, E1DX), term(n, rat::one(), false, E1DX, E1)])
}

/// `(−1)^{|F|}(η₁(F)η₂(G) − η₂(F)η₁(G))`.
fn cross_form(n: usize) -> BinaryDiffOp {
    sum(n, vec![term(n, rat::one(), true, E1, E2), term(n, -rat::one(), true, E2, E1)])
}

/// `𝔞(F, G) = FG`.
pub fn frak_a(n: usize) -> BinaryDiffOp {
    BinaryDiffOp::product(n)
}

/// `𝔟(F, G) = μF′G − λFG′ − ½(−1)^{|F|} Σ η_i(F)η_i(G)`.
pub fn frak_b(n: usize, lambda: &Rat, mu: &Rat) -> BinaryDiffOp {
    let mut parts = vec![term(n, mu.clone(), false, DX, ID), term(n, -lambda.clone(), false, ID, DX)];
    for i in 1..=n {
        let e = OpMonomial::new(0, 1 << (i - 1));
        parts.push(term(n, -rat::half(), true, e, e));
    }
    sum(n, parts)
}

/// `𝔠`, for `λ = 0`: `(−1)^{|F|}(η₁Fη₂G − η₂Fη₁G) + 2μ η₂(η₁(F))G`.
pub fn frak_c(n: usize, mu: &Rat) -> BinaryDiffOp {
    // η₂∘η₁ = −η₁η₂ in normal form.
    let mut t = cross_form(n);
    t.add_scaled(&term(n, -(mu * rat::int(2)), false, E12, ID), &Rat::one());
    t
}

/// `𝔡`, for `μ = 0`: `(−1)^{|F|}(η₁Fη₂G − η₂Fη₁G) + 2λ F η₂η₁(G)`.
pub fn frak_d(n: usize, lambda: &Rat) -> BinaryDiffOp {
    let mut t = cross_form(n);
    t.add_scaled(&term(n, -(lambda * rat::int(2)), false, ID, E12), &Rat::one());
    t
}

/// `𝔢`, for `ν = 0`: `(λ+½)(−1)^{|F|}(η₁Fη₂G − η₂Fη₁G) + λFη₁η₂(G) + (λ+1)η₁(η₂(F))G`.
pub fn frak_e(n: usize, lambda: &Rat) -> BinaryDiffOp {
    let mut t = cross_form(n).scale(&(lambda + rat::half()));
    t.add_scaled(&term(n, lambda.clone(), false, ID, E12), &Rat::one());
    t.add_scaled(&term(n, lambda + Rat::one(), false, E12, ID), &Rat::one());
    t
}

/// One named member of the known list, instantiated at concrete weights.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub n: usize,
    pub lambda: Rat,
    pub mu: Rat,
    pub nu: Rat,
    /// Spanning operators; two for the two-parameter family, one otherwise.
    pub basis: Vec<BinaryDiffOp>,
    /// How the printed formula was read, where a reading was needed.
    pub note: String,
}

impl CatalogEntry {
    fn new(name: &str, n: usize, w: (&Rat, &Rat, &Rat), basis: Vec<BinaryDiffOp>, note: &str) -> Self {
        let basis = basis.into_iter().map(|b| b.with_weights(w.0.clone(), w.1.clone(), w.2.clone())).collect();
        CatalogEntry {
            name: name.to_string(),
            n,
            lambda: w.0.clone(),
            mu: w.1.clone(),
            nu: w.2.clone(),
            basis,
            note: note.to_string(),
        }
    }
}

fn k1_list(lambda: &Rat, mu: &Rat, nu: &Rat) -> Vec<CatalogEntry> {
    let n = 1;
    let w = (lambda, mu, nu);
    let g = nu - lambda - mu;
    let h = rat::half();
    let mut out = Vec::new();
    if g.is_zero() {
        out.push(CatalogEntry::new("T_nu0", n, w, vec![frak_a(n)], ""));
    }
    if g == h {
        if lambda.is_zero() && mu.is_zero() {
            let basis = vec![term(n, rat::one(), true, ID, E1), term(n, rat::one(), false, E1, ID)];
            out.push(CatalogEntry::new("T^{a,b}_{0,0,1/2}", n, w, basis, "basis a = 1, b = 0 and a = 0, b = 1"));
        } else {
            let t = sum(n, vec![term(n, mu.clone(), false, E1, ID), term(n, -lambda.clone(), true, ID, E1)]);
            out.push(CatalogEntry::new("T_nu1", n, w, vec![t], ""));
        }
    }
    if g.is_one() {
        out.push(CatalogEntry::new("T_nu2", n, w, vec![frak_b(n, lambda, mu)], ""));
    }
    if g == rat::frac(3, 2) {
        if lambda.is_zero() {
            let mut t = s_form(n);
            t.add_scaled(&term(n, -(mu * rat::int(2)), false, E1DX, ID), &Rat::one());
            out.push(CatalogEntry::new("T_{0,mu,nu3}", n, w, vec![t], ""));
        }
        if mu.is_zero() && !lambda.is_zero() {
            let mut t = s_form(n);
            t.add_scaled(&term(n, -(lambda * rat::int(2)), true, ID, E1DX), &Rat::one());
            out.push(CatalogEntry::new(
                "T_{lambda,0,nu3}",
                n,
                w,
                vec![t],
                "unbalanced trailing fragment read as (-1)^|F| F eta1(G')",
            ));
        }
        if *nu == h && !lambda.is_zero() && !mu.is_zero() {
            let mut t = s_form(n).scale(&(lambda + &h));
            t.add_scaled(&term(n, lambda.clone(), true, ID, E1DX), &Rat::one());
            t.add_scaled(&term(n, lambda + Rat::one(), false, E1DX, ID), &Rat::one());
            out.push(CatalogEntry::new("T_{lambda,-lambda-1,1/2}", n, w, vec![t], ""));
        }
    }
    if lambda.is_zero() && mu.is_zero() && *nu == rat::int(2) {
        let t = sum(
            n,
            vec![
                term(n, rat::one(), false, DX, DX),
                term(n, rat::one(), true, E1DX, E1),
                term(n, -rat::one(), true, E1, E1DX),
            ],
        );
        out.push(CatalogEntry::new("T_{0,0,2}", n, w, vec![t], ""));
    }
    if *lambda == rat::frac(-3, 2) && mu.is_zero() && *nu == h {
        let mut t = sum(n, vec![term(n, rat::int(3), false, ID, DX2), term(n, rat::int(2), false, DX, DX)]);
        t.add_scaled(&m_form(n).compose_slot1(&DiffOp::sigma(n)), &-Rat::one());
        out.push(CatalogEntry::new("T_{-3/2,0,1/2}", n, w, vec![t], ""));
    }
    if lambda.is_zero() && *mu == rat::frac(-3, 2) && *nu == h {
        // (−1)^{|F|} M(G, F) with the factors reordered to F-first: a sign in both parities.
        let swapped = sum(n, vec![term(n, rat::int(2), false, E1DX, E1), term(n, rat::one(), false, E1, E1DX)])
            .parity_twist([[-1, 1], [-1, -1]]);
        let mut t = sum(n, vec![term(n, rat::int(3), false, DX2, ID), term(n, rat::int(2), false, DX, DX)]);
        t.add_scaled(&swapped, &Rat::one());
        out.push(CatalogEntry::new("T_{0,-3/2,1/2}", n, w, vec![t], ""));
    }
    out
}

/// Applicable list members at `(n, λ, μ, ν)`; empty when none apply.
pub fn catalog(n: usize, lambda: &Rat, mu: &Rat, nu: &Rat) -> Vec<CatalogEntry> {
    if n == 1 {
        return k1_list(lambda, mu, nu);
    }
    let w = (lambda, mu, nu);
    let g = nu - lambda - mu;
    let mut out = Vec::new();
    if g.is_zero() {
        out.push(CatalogEntry::new("a", n, w, vec![frak_a(n)], ""));
    }
    if g.is_one() {
        out.push(CatalogEntry::new("b", n, w, vec![frak_b(n, lambda, mu)], ""));
        if n == 2 {
            if lambda.is_zero() {
                out.push(CatalogEntry::new("c", n, w, vec![frak_c(n, mu)], "trailing parenthesis dropped"));
            }
            if mu.is_zero() {
                out.push(CatalogEntry::new("d", n, w, vec![frak_d(n, lambda)], "trailing parenthesis dropped"));
            }
            if nu.is_zero() {
                out.push(CatalogEntry::new("e", n, w, vec![frak_e(n, lambda)], ""));
            }
        }
    }
    out
}

/// Every named family of the list with its weight constraint, for enumeration.
pub fn catalog_names(n: usize) -> Vec<(&'static str, &'static str)> {
    if n == 1 {
        vec![
            ("T_nu0", "nu = lambda + mu"),
            ("T^{a,b}_{0,0,1/2}", "(0, 0, 1/2)"),
            ("T_nu1", "nu = lambda + mu + 1/2"),
            ("T_nu2", "nu = lambda + mu + 1"),
            ("T_{0,mu,nu3}", "lambda = 0, nu = mu + 3/2"),
            ("T_{lambda,0,nu3}", "mu = 0, nu = lambda + 3/2"),
            ("T_{0,0,2}", "(0, 0, 2)"),
            ("T_{-3/2,0,1/2}", "(-3/2, 0, 1/2)"),
            ("T_{0,-3/2,1/2}", "(0, -3/2, 1/2)"),
            ("T_{lambda,-lambda-1,1/2}", "mu = -lambda - 1, nu = 1/2"),
        ]
    } else {
        let mut v = vec![("a", "nu = lambda + mu"), ("b", "nu = lambda + mu + 1")];
        if n == 2 {
            v.push(("c", "lambda = 0, nu = mu + 1"));
            v.push(("d", "mu = 0, nu = lambda + 1"));
            v.push(("e", "nu = 0, mu = -lambda - 1"));
        }
        v
    }
}

/// First generator with a nonzero defect, and a monomial pair where the defect is nonzero.
#[derive(Clone, Debug)]
pub struct InvarianceWitness {
    pub field: ContactField,
    pub defect: BinaryDiffOp,
    pub inputs: (SuperPoly, SuperPoly),
    pub value: SuperPoly,
}

#[derive(Clone, Debug)]
pub struct InvarianceCheck {
    pub invariant: bool,
    pub witness: Option<InvarianceWitness>,
}

/// Monomials `x^m θ_S` with `m ≤ maxx`.
pub fn monomial_family(n: usize, maxx: u32) -> Vec<SuperPoly> {
    let mut out = Vec::new();
    for m in 0..=maxx {
        for mask in 0..(1u32 << n) {
            out.push(SuperPoly::monomial(n, Monomial::new(m, mask)));
        }
    }
    out
}

/// A monomial pair on which a nonzero operator takes a nonzero value. Such a pair always exists
/// among `x^m θ_S` with `m` up to the operator's `∂_x` order (evaluation completeness).
pub fn nonzero_value(t: &BinaryDiffOp) -> Option<(SuperPoly, SuperPoly, SuperPoly)> {
    let k1 = t.terms.keys().map(|(a, _)| a.xorder).max()?;
    let k2 = t.terms.keys().map(|(_, b)| b.xorder).max()?;
    // η_S on θ_S x^m needs |S| more powers of x in the worst case through η² = −∂_x.
    let fam1 = monomial_family(t.n, k1 + t.n as u32);
    let fam2 = monomial_family(t.n, k2 + t.n as u32);
    for f in &fam1 {
        for g in &fam2 {
            let v = t.apply_polys(f, g);
            if !v.is_zero() {
                return Some((f.clone(), g.clone(), v));
            }
        }
    }
    None
}

/// `X·T = 0` for every `X` in `generators(n, dmax)`.
pub fn is_invariant(t: &BinaryDiffOp, dmax: u32) -> Result<InvarianceCheck> {
    t.homogeneous_parity()?;
    let gens = generators(t.n, dmax);
    let defects: Vec<Result<BinaryDiffOp>> = gens.par_iter().map(|x| binary_module_action(x, t)).collect();
    for (x, d) in gens.into_iter().zip(defects) {
        let d = d?;
        if !d.is_zero() {
            let (f, g, v) = nonzero_value(&d).expect("nonzero operator has a nonzero value");
            return Ok(InvarianceCheck {
                invariant: false,
                witness: Some(InvarianceWitness { field: x, defect: d, inputs: (f, g), value: v }),
            });
        }
    }
    Ok(InvarianceCheck { invariant: true, witness: None })
}

/// Candidate terms `θ_U · ∂_x^{k₁}η_S(F) · ∂_x^{k₂}η_T(G)` with x-independent coefficients.
#[derive(Clone, Debug)]
pub struct AnsatzSpace {
    pub n: usize,
    pub terms: Vec<BinaryDiffOp>,
}

impl AnsatzSpace {
    /// Terms of total order (η counted as ½) at most `max_order`. With `graded`, only terms of
    /// Euler degree `ord₁ + ord₂ − |U|/2 = ν − λ − μ` are kept; `parity` filters by parity.
    pub fn build(n: usize, grade: &Rat, max_order: &Rat, graded: bool, parity: Option<bool>) -> AnsatzSpace {
        let two = rat::int(2);
        let grade2 = grade * &two;
        let cap2 = max_order * &two;
        let mut terms = Vec::new();
        if graded && !grade2.is_integer() {
            return AnsatzSpace { n, terms };
        }
        let cap: i64 = if cap2 < Rat::zero() { -1 } else { cap2.floor().to_integer().try_into().unwrap_or(i64::MAX) };
        let full = 1u32 << n;
        for s in 0..full {
            for t in 0..full {
                let eta = (s.count_ones() + t.count_ones()) as i64;
                let mut k = 0i64;
                while 2 * k + eta <= cap {
                    for u in 0..full {
                        if graded && Rat::from_integer((2 * k + eta - u.count_ones() as i64).into()) != grade2 {
                            continue;
                        }
                        let odd = (s.count_ones() + t.count_ones() + u.count_ones()) % 2 == 1;
                        if parity.is_some_and(|p| p != odd) {
                            continue;
                        }
                        for k1 in 0..=k {
                            let c = SuperPoly::monomial(n, Monomial::new(0, u));
                            let q1 = OpMonomial::new(k1 as u32, s);
                            let q2 = OpMonomial::new((k - k1) as u32, t);
                            terms.push(BinaryDiffOp::monomial(n, q1, q2, c));
                        }
                    }
                    k += 1;
                }
            }
        }
        AnsatzSpace { n, terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Outcome of [`search_invariant`].
#[derive(Clone, Debug)]
pub struct InvariantSearch {
    pub ansatz_size: usize,
    /// Coordinates over the (even then odd) ansatz terms.
    pub subspace: Subspace,
    pub basis: Vec<BinaryDiffOp>,
    /// Every basis element passed `is_invariant` with `dmax = 5`.
    pub verified: bool,
}

impl InvariantSearch {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Constraint order: a Lie generating set first (it alone cuts the space to the answer), then the
/// remaining generators of x-degree ≤ 3 as the stated check.
fn constraint_fields(n: usize) -> Vec<ContactField> {
    let mut out = lie_generating_set(n);
    for x in generators(n, 3) {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    // X_1 = ∂_x annihilates x-independent operators.
    out.retain(|x| !(x.generator == SuperPoly::one(n)));
    out
}

fn invariant_kernel(n: usize, w: (&Rat, &Rat, &Rat), terms: Vec<BinaryDiffOp>) -> (Vec<Vec<Rat>>, Vec<BinaryDiffOp>) {
    let terms: Vec<BinaryDiffOp> = terms.into_iter().map(|t| t.with_weights(w.0.clone(), w.1.clone(), w.2.clone())).collect();
    let gens = constraint_fields(n);
    refine_kernel(
        terms,
        &gens,
        |x, t| binary_module_action(x, t).expect("homogeneous").coordinates(),
        |ops, c| BinaryDiffOp::combination(n, ops, c),
    )
}

/// Basis of the invariant operators of total order ≤ `max_order` at `(λ, μ, ν)`.
pub fn search_invariant(n: usize, lambda: &Rat, mu: &Rat, nu: &Rat, max_order: &Rat) -> InvariantSearch {
    search_invariant_with(n, lambda, mu, nu, max_order, true)
}

/// As [`search_invariant`], optionally without the Euler-degree filter.
pub fn search_invariant_with(n: usize, lambda: &Rat, mu: &Rat, nu: &Rat, max_order: &Rat, graded: bool) -> InvariantSearch {
    let grade = nu - lambda - mu;
    let even = AnsatzSpace::build(n, &grade, max_order, graded, Some(false));
    let odd = AnsatzSpace::build(n, &grade, max_order, graded, Some(true));
    let (ne, total) = (even.len(), even.len() + odd.len());
    let (ce, be) = invariant_kernel(n, (lambda, mu, nu), even.terms);
    let (co, bo) = invariant_kernel(n, (lambda, mu, nu), odd.terms);
    let mut vectors = Vec::new();
    for mut v in ce {
        v.resize(total, Rat::zero());
        vectors.push(v);
    }
    for v in co {
        let mut w = vec![Rat::zero(); ne];
        w.extend(v);
        vectors.push(w);
    }
    let basis: Vec<BinaryDiffOp> = be.into_iter().chain(bo).collect();
    let verified = basis.par_iter().all(|t| is_invariant(t, 5).map(|c| c.invariant).unwrap_or(false));
    InvariantSearch { ansatz_size: total, subspace: Subspace { ambient_dim: total, basis: vectors }, basis, verified }
}

/// Whether every operator of `ops` lies in the span of `span`.
pub fn in_span(ops: &[BinaryDiffOp], span: &[BinaryDiffOp]) -> bool {
    let cols: Vec<_> = span.iter().map(|s| s.coordinates()).collect();
    ops.iter().all(|o| crate::exactla::column_solve(&cols, &o.coordinates()).is_some())
}

// ---------------------------------------------------------------------------
// Poisson superalgebra on densities

/// `{F α^λ, G α^μ} = (μF′G − λFG′ − ½(−1)^{|F|} Σ η_i(F)η_i(G)) α^{λ+μ+1}`.
pub fn poisson(d1: &Density, d2: &Density) -> Result<Density> {
    poisson_signed(d1, d2, false)
}

/// The bracket with the sign of the η-term optionally flipped (negative control).
pub fn poisson_signed(d1: &Density, d2: &Density, flip: bool) -> Result<Density> {
    let (f, g) = (&d1.coeff, &d2.coeff);
    if f.n != g.n {
        return Err(Error::Arity { left: f.n, right: g.n });
    }
    let fodd = f.homogeneous_parity()?;
    g.homogeneous_parity()?;
    let mut out = f.dx().mul_raw(g).scale(&d2.weight);
    out.add_scaled(&f.mul_raw(&g.dx()), &-d1.weight.clone());
    let c = if fodd ^ flip { rat::half() } else { -rat::half() };
    for i in 1..=f.n {
        out.add_scaled(&f.eta(i).mul_raw(&g.eta(i)), &c);
    }
    Ok(Density::new(out, &d1.weight + &d2.weight + Rat::one()))
}

/// Result of [`verify_poisson_laws`].
#[derive(Clone, Debug)]
pub struct PoissonReport {
    pub triples_checked: usize,
    pub failure: Option<String>,
}

impl PoissonReport {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Super-Jacobi and Leibniz identities of `bracket` on monomial densities of x-degree ≤ `dmax`.
pub fn verify_poisson_laws_with<B>(n: usize, weights: &[Rat], dmax: u32, bracket: B) -> PoissonReport
where
    B: Fn(&Density, &Density) -> Result<Density> + Sync,
{
    let mut elems = Vec::new();
    for w in weights {
        for p in monomial_family(n, dmax) {
            elems.push(Density::new(p, w.clone()));
        }
    }
    let odd = |d: &Density| d.coeff.homogeneous_parity().unwrap_or(false);
    let product = |a: &Density, b: &Density| Density::new(a.coeff.mul_raw(&b.coeff), &a.weight + &b.weight);
    let check = |a: &Density, b: &Density, c: &Density| -> Option<String> {
        let s = rat::sign(odd(a) && odd(b));
        let br = |x: &Density, y: &Density| bracket(x, y).expect("homogeneous monomials");
        let ab = br(a, b);
        let ac = br(a, c);
        let lhs = br(a, &br(b, c));
        let mut rhs = br(&ab, c).coeff;
        rhs.add_scaled(&br(b, &ac).coeff, &s);
        if lhs.coeff != rhs {
            return Some(format!("Jacobi fails on ({a}, {b}, {c})"));
        }
        let lhs = br(a, &product(b, c)).coeff;
        let mut rhs = product(&ab, c).coeff;
        rhs.add_scaled(&product(b, &ac).coeff, &s);
        if lhs != rhs {
            return Some(format!("Leibniz fails on ({a}, {b}, {c})"));
        }
        None
    };
    let failures: Vec<(usize, String)> = (0..elems.len())
        .into_par_iter()
        .filter_map(|i| {
            for b in &elems {
                for c in &elems {
                    if let Some(msg) = check(&elems[i], b, c) {
                        return Some((i, msg));
                    }
                }
            }
            None
        })
        .collect();
    let failure = failures.into_iter().min_by_key(|(i, _)| *i).map(|(_, m)| m);
    PoissonReport { triples_checked: elems.len().pow(3), failure }
}

/// [`verify_poisson_laws_with`] for [`poisson`].
pub fn verify_poisson_laws(n: usize, weights: &[Rat], dmax: u32) -> PoissonReport {
    verify_poisson_laws_with(n, weights, dmax, poisson)
}
