//! Explicit 1-cocycles and the coboundaries used to compare restrictions.
//!
//! A formula `Υ(X_G) = Σ a·D₁(G)·D₂` is written as `slot(a, D₁, D₂)`. A sign `(−1)^{|K|}` on a
//! derived argument `K = κ(G)` becomes `σ∘κ` in the first slot.

use num_traits::{One, Zero};

use super::{delta0, Cochain1};
use crate::diffops::{phi_slot_binary, BinaryDiffOp, DiffOp, PhiSlot};
use crate::grassmann::SuperPoly;
use crate::rat::{self, frac, int, Rat};

fn e(n: usize, i: usize) -> DiffOp {
    DiffOp::eta(n, i)
}

fn th(n: usize, i: usize) -> DiffOp {
    DiffOp::multiplication(&SuperPoly::theta(n, i))
}

/// `a₁ ∘ a₂ ∘ …`
fn chain(ops: &[DiffOp]) -> DiffOp {
    let mut out = DiffOp::identity(ops[0].n);
    for a in ops {
        out = out.compose_raw(a);
    }
    out
}

fn etas(n: usize, idx: &[usize]) -> DiffOp {
    chain(&idx.iter().map(|&i| e(n, i)).collect::<Vec<_>>())
}

fn dxk(n: usize, k: u32) -> DiffOp {
    chain(&vec![DiffOp::dx(n); k as usize].into_iter().chain([DiffOp::identity(n)]).collect::<Vec<_>>())
}

fn slot(c: Rat, u1: &DiffOp, u2: &DiffOp) -> BinaryDiffOp {
    BinaryDiffOp::from_slots(&SuperPoly::constant(u1.n, c), u1, u2)
}

fn sum(n: usize, parts: Vec<BinaryDiffOp>) -> BinaryDiffOp {
    let mut out = BinaryDiffOp::raw(n);
    for p in parts {
        out.add_scaled(&p, &Rat::one());
    }
    out
}

/// `ζ_i = 1 − θ_{7−i}η_{7−i}`.
fn zeta(n: usize, i: usize) -> DiffOp {
    DiffOp::identity(n).minus(&th(n, 7 - i).compose_raw(&e(n, 7 - i)))
}

/// `K ↦ M_K = (−1)^{|K|} Σ_{i=1,2} (−1)^i η_{3−i}(K) η_i` with `K = κ(G)`.
fn m_form(kappa: &DiffOp) -> BinaryDiffOp {
    let n = kappa.n;
    let sk = DiffOp::sigma(n).compose_raw(kappa);
    sum(n, (1..=2).map(|i| slot(rat::sign(i % 2 == 1), &e(n, 3 - i).compose_raw(&sk), &e(n, i))).collect())
}

/// `Ξ_K = (−1)^{|K|} Σ_{i<j≤3} (−1)^{i+j} η_jη_i(K) η_{6−i−j}`.
fn xi_form(kappa: &DiffOp) -> BinaryDiffOp {
    let n = kappa.n;
    let sk = DiffOp::sigma(n).compose_raw(kappa);
    let mut parts = Vec::new();
    for i in 1..=3 {
        for j in i + 1..=3 {
            parts.push(slot(rat::sign((i + j) % 2 == 1), &etas(n, &[j, i]).compose_raw(&sk), &e(n, 6 - i - j)));
        }
    }
    sum(n, parts)
}

/// `Q_K = (−1)^{|K|} Σ_{i<j<k≤4} (−1)^{i+j+k} η_kη_jη_i(K) η_{10−i−j−k}`.
fn q_form(kappa: &DiffOp) -> BinaryDiffOp {
    let n = kappa.n;
    let sk = DiffOp::sigma(n).compose_raw(kappa);
    let mut parts = Vec::new();
    for i in 1..=4 {
        for j in i + 1..=4 {
            for k in j + 1..=4 {
                let c = rat::sign((i + j + k) % 2 == 1);
                parts.push(slot(c, &etas(n, &[k, j, i]).compose_raw(&sk), &e(n, 10 - i - j - k)));
            }
        }
    }
    sum(n, parts)
}

/// `H_K = (−1)^{|K|} Σ_{i=1,2} η_i(K) η_i`.
fn h_form(kappa: &DiffOp) -> BinaryDiffOp {
    let n = kappa.n;
    let sk = DiffOp::sigma(n).compose_raw(kappa);
    sum(n, (1..=2).map(|i| slot(Rat::one(), &e(n, i).compose_raw(&sk), &e(n, i))).collect())
}

/// `A_G = (−1)^{|G|} Σ_{i=3,4} (−1)^i (η₁η₂(∂_iζ_i G) ζ_{7−i} − ∂_iζ_i(G) η₁η₂) ∂_{7−i}`.
fn a_form(n: usize) -> BinaryDiffOp {
    let sig = DiffOp::sigma(n);
    let mut parts = Vec::new();
    for i in 3..=4 {
        let c = rat::sign(i % 2 == 1);
        let dz = chain(&[DiffOp::partial(n, i), zeta(n, i), sig.clone()]);
        let d_other = DiffOp::partial(n, 7 - i);
        parts.push(slot(c.clone(), &etas(n, &[1, 2]).compose_raw(&dz), &zeta(n, 7 - i).compose_raw(&d_other)));
        parts.push(slot(-c, &dz, &etas(n, &[1, 2]).compose_raw(&d_other)));
    }
    sum(n, parts)
}

fn id(n: usize) -> DiffOp {
    DiffOp::identity(n)
}

// ---------------------------------------------------------------------------
// Cocycles

/// `Υⁿ_{λ,λ}(X_G) = G′`.
fn y_ll(n: usize, _lambda: &Rat) -> BinaryDiffOp {
    slot(Rat::one(), &DiffOp::dx(n), &id(n))
}

fn yt2_ll(lambda: &Rat) -> BinaryDiffOp {
    let n = 2;
    if lambda.is_zero() {
        return slot(Rat::one(), &etas(n, &[1, 2]), &id(n));
    }
    let tp = th(n, 2).compose_raw(&DiffOp::partial(n, 2));
    let mut out = slot(int(2) * lambda, &etas(n, &[1, 2]).compose_raw(&tp), &id(n));
    for i in 1..=2 {
        out.add_scaled(&slot(Rat::one(), &chain(&[e(n, i), tp.clone(), DiffOp::sigma(n)]), &e(n, 3 - i)), &-Rat::one());
    }
    out
}

fn y2_l1(lambda: &Rat) -> BinaryDiffOp {
    let n = 2;
    let mut out = slot(Rat::one(), &etas(n, &[1, 2]).compose_raw(&DiffOp::dx(n)), &id(n));
    if *lambda == frac(-1, 2) {
        out.add_scaled(&m_form(&DiffOp::dx(n)), &Rat::one());
    }
    out
}

fn y2_l2(lambda: &Rat) -> BinaryDiffOp {
    let n = 2;
    let mut inner = slot(int(2) * lambda / int(3), &dxk(n, 3), &id(n));
    inner.add_scaled(&h_form(&dxk(n, 2)), &-Rat::one());
    let mut out = inner.scale(&(int(2) * lambda + Rat::one()));
    out.add_scaled(&slot(Rat::one(), &etas(n, &[2, 1]).compose_raw(&DiffOp::dx(n)), &etas(n, &[2, 1])), &int(-2));
    out
}

fn yt2_l2(lambda: &Rat) -> BinaryDiffOp {
    let n = 2;
    let (dx, dx2, e21) = (DiffOp::dx(n), dxk(n, 2), etas(n, &[2, 1]));
    if *lambda == int(-1) {
        sum(
            n,
            vec![
                m_form(&dx).compose_slot2(&dx),
                slot(-Rat::one(), &e21.compose_raw(&dx), &dx),
                m_form(&dx2),
                slot(-Rat::one(), &dx2, &e21),
            ],
        )
    } else {
        sum(
            n,
            vec![
                m_form(&dx2),
                slot(int(2) * lambda, &e21.compose_raw(&dx2), &id(n)),
                slot(int(-2), &e21.compose_raw(&dx), &dx),
            ],
        )
    }
}

/// Which factor follows `η₁η₂(∂₃G)` in the `λ = −½` branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpFactor {
    /// `ζ₄ = 1 − θ₃η₃`
    Zeta4,
    /// `1 − θ₃∂₃`
    ThetaPartial,
}

/// `Υ³_{−½,0}(X_G) = ∂₃(G)η₁η₂ − η₁η₂(∂₃G)·f − (−1)^{|G|}θ₃M_{η₃(G)}η₃`.
pub fn y3_exp(factor: ExpFactor) -> BinaryDiffOp {
    let n = 3;
    let d3 = DiffOp::partial(n, 3);
    let f = match factor {
        ExpFactor::Zeta4 => zeta(n, 4),
        ExpFactor::ThetaPartial => id(n).minus(&th(n, 3).compose_raw(&d3)),
    };
    let last = m_form(&e(n, 3)).compose_slot2(&e(n, 3)).left_mul(&SuperPoly::theta(n, 3)).compose_slot1(&DiffOp::sigma(n));
    sum(
        n,
        vec![
            slot(Rat::one(), &d3, &etas(n, &[1, 2])),
            slot(-Rat::one(), &etas(n, &[1, 2]).compose_raw(&d3), &f),
            last.scale(&-Rat::one()),
        ],
    )
}

fn y3_half(lambda: &Rat) -> BinaryDiffOp {
    if *lambda == frac(-1, 2) {
        y3_exp(ExpFactor::Zeta4)
    } else {
        slot(Rat::one(), &etas(3, &[3, 2, 1]), &id(3))
    }
}

fn y3_3half(lambda: &Rat) -> BinaryDiffOp {
    let n = 3;
    let dx = DiffOp::dx(n);
    let mut out = xi_form(&dx);
    if *lambda == int(-1) {
        for i in 1..=3 {
            for j in i + 1..=3 {
                out.add_scaled(&slot(Rat::one(), &e(n, 6 - i - j).compose_raw(&dx), &etas(n, &[j, i])), &rat::sign((i + j) % 2 == 1));
            }
        }
    } else {
        let e321 = etas(n, &[3, 2, 1]);
        out.add_scaled(&slot(Rat::one(), &e321.compose_raw(&dx), &id(n)), &(int(2) * lambda));
        out.add_scaled(&slot(Rat::one(), &e321, &etas(n, &[1, 1])), &Rat::one());
    }
    out
}

fn y4_1(lambda: &Rat) -> BinaryDiffOp {
    let n = 4;
    if *lambda != int(-1) {
        let mut out = q_form(&id(n));
        out.add_scaled(&slot(Rat::one(), &etas(n, &[4, 3, 2, 1]), &id(n)), &(int(2) * lambda));
        return out;
    }
    let mut out = a_form(n);
    for i in 3..=4 {
        let kappa = e(n, i).compose_raw(&zeta(n, i));
        let t = m_form(&kappa).compose_slot2(&e(n, i).compose_raw(&DiffOp::partial(n, 7 - i))).left_mul(&SuperPoly::theta(n, i));
        out.add_scaled(&t, &rat::sign(i % 2 == 1));
    }
    let d43 = DiffOp::partial(n, 4).compose_raw(&DiffOp::partial(n, 3));
    out.add_scaled(&slot(int(2), &etas(n, &[1, 2]).compose_raw(&d43), &zeta(n, 4).compose_raw(&zeta(n, 3))), &Rat::one());
    let tail = zeta(n, 3).compose_raw(&zeta(n, 4)).plus(&chain(&[th(n, 3), th(n, 4), e(n, 4), e(n, 3)]));
    out.add_scaled(&m_form(&d43).compose_slot2(&tail), &Rat::one());
    out
}

/// `Υ^{3,i}_{−½,0}(X_G) = ∂_i(G)η_ℓη_k − η_ℓη_k(∂_iG)(1−θ_i∂_i) + θ_i(η_ℓη_i(G)η_k − η_kη_i(G)η_ℓ)η_i`
/// with `{ℓ < k} = {1,2,3} ∖ {i}`.
pub fn y3i(i: usize) -> BinaryDiffOp {
    let n = 3;
    let others: Vec<usize> = (1..=3).filter(|&j| j != i).collect();
    let (l, k) = (others[0], others[1]);
    let di = DiffOp::partial(n, i);
    let f = id(n).minus(&th(n, i).compose_raw(&di));
    let inner = sum(
        n,
        vec![
            slot(Rat::one(), &etas(n, &[l, i]), &etas(n, &[k, i])),
            slot(-Rat::one(), &etas(n, &[k, i]), &etas(n, &[l, i])),
        ],
    );
    sum(
        n,
        vec![
            slot(Rat::one(), &di, &etas(n, &[l, k])),
            slot(-Rat::one(), &etas(n, &[l, k]).compose_raw(&di), &f),
            inner.left_mul(&SuperPoly::theta(n, i)),
        ],
    )
}

/// A named cocycle at concrete weights.
#[derive(Clone, Debug)]
pub struct CocycleEntry {
    pub name: String,
    pub cochain: Cochain1,
    /// Weight constraint in words.
    pub applicability: String,
    pub note: &'static str,
}

struct Family {
    name: String,
    n: usize,
    /// `μ − λ`.
    shift: Rat,
    /// Only this `λ`, if set.
    fixed: Option<Rat>,
    build: Box<dyn Fn(&Rat) -> BinaryDiffOp + Send + Sync>,
    note: &'static str,
}

fn families() -> Vec<Family> {
    let mut out = Vec::new();
    for n in 1..=5 {
        out.push(Family {
            name: format!("Y^{n}_{{l,l}}"),
            n,
            shift: Rat::zero(),
            fixed: None,
            build: Box::new(move |l| y_ll(n, l)),
            note: "G'",
        });
    }
    let f = |name: &str, n, shift: Rat, fixed: Option<Rat>, build: Box<dyn Fn(&Rat) -> BinaryDiffOp + Send + Sync>, note| Family {
        name: name.to_string(),
        n,
        shift,
        fixed,
        build,
        note,
    };
    out.push(f("Y~^2_{l,l}", 2, Rat::zero(), None, Box::new(yt2_ll), "branch l = 0 separate"));
    out.push(f("Y^2_{l,l+1}", 2, int(1), None, Box::new(y2_l1), "branch l = -1/2 adds M_{G'}"));
    out.push(f("Y^2_{l,l+2}", 2, int(2), None, Box::new(y2_l2), ""));
    out.push(f("Y~^2_{l,l+2}", 2, int(2), None, Box::new(yt2_l2), "branch l = -1 separate"));
    out.push(f("Y^3_{l,l+1/2}", 3, frac(1, 2), None, Box::new(y3_half), "branch l = -1/2 uses zeta_4"));
    out.push(f("Y^3_{l,l+3/2}", 3, frac(3, 2), None, Box::new(y3_3half), "branch l = -1 separate"));
    out.push(f("Y^4_{l,l+1}", 4, int(1), None, Box::new(y4_1), "branch l = -1 separate"));
    out.push(f(
        "Y^3_{-1/2,0}",
        3,
        frac(1, 2),
        Some(frac(-1, 2)),
        Box::new(|_| y3_exp(ExpFactor::ThetaPartial)),
        "odd; 1 - t3*d3 coincides with zeta_4 since t3*t3 = 0",
    ));
    for i in 1..=3 {
        out.push(f(
            &format!("Y^{{3,{i}}}_{{-1/2,0}}"),
            3,
            frac(1, 2),
            Some(frac(-1, 2)),
            Box::new(move |_| y3i(i)),
            "cohomologous to Y^3_{-1/2,0}",
        ));
    }
    out
}

fn instantiate(fam: &Family, lambda: &Rat) -> CocycleEntry {
    let lambda = fam.fixed.clone().unwrap_or_else(|| lambda.clone());
    let mu = &lambda + &fam.shift;
    let applicability = match &fam.fixed {
        Some(l) => format!("n = {}, (lambda, mu) = ({}, {})", fam.n, rat::fmt_rat(l), rat::fmt_rat(&mu)),
        None => format!("n = {}, mu = lambda + {}", fam.n, rat::fmt_rat(&fam.shift)),
    };
    CocycleEntry {
        name: fam.name.clone(),
        cochain: Cochain1::new(&lambda, &mu, (fam.build)(&lambda)),
        applicability,
        note: fam.note,
    }
}

/// Names and weight constraints of every cocycle family.
pub fn cocycle_names() -> Vec<(String, String)> {
    families().iter().map(|f| (f.name.clone(), instantiate(f, &Rat::zero()).applicability)).collect()
}

/// The named cocycle at `λ` (ignored for fixed-weight entries).
pub fn cocycle_by_name(name: &str, lambda: &Rat) -> Option<CocycleEntry> {
    families().iter().find(|f| f.name == name).map(|f| instantiate(f, lambda))
}

/// Every cocycle of the list applicable at `(n, λ, μ)`.
pub fn cocycle_catalog(n: usize, lambda: &Rat, mu: &Rat) -> Vec<CocycleEntry> {
    families()
        .iter()
        .filter(|f| f.n == n && mu - lambda == f.shift && f.fixed.as_ref().is_none_or(|l| l == lambda))
        .map(|f| instantiate(f, lambda))
        .collect()
}

/// `Θ^{3,j,ℓ}`: the `K(2)` cocycle `y` placed in slot `(j, ℓ)` of `𝔻³` after `σ^{j+ℓ}`.
/// The result lives at `(λ − j/2, μ − ℓ/2)` and is a cocycle on `K(2) ⊂ K(3)`.
pub fn theta_lift(y: &Cochain1, j: bool, l: bool) -> Cochain1 {
    let h = rat::half();
    let lam = &y.lambda - if j { h.clone() } else { Rat::zero() };
    let mu = &y.mu - if l { h } else { Rat::zero() };
    let mut part = y.op.clone();
    if j ^ l {
        part = part.left_compose(&DiffOp::sigma(y.n));
    }
    let lifted = phi_slot_binary(PhiSlot::from_bits(j, l), &part.embed(y.n + 1));
    Cochain1::new(&lam, &mu, lifted)
}

// ---------------------------------------------------------------------------
// Coboundaries

/// Potentials `A` over `K(2)^i` whose coboundaries vanish on `K(1)^{m}`, listed per weight case.
///
/// The two odd variables `m` and `6−i−m` are relabelled to `1, 2` in increasing order; the
/// operators live over two odd variables.
pub fn coboundary_catalog_k2(i: usize, m: usize, lambda: &Rat, mu: &Rat) -> Vec<DiffOp> {
    if i == m || !(1..=3).contains(&i) || !(1..=3).contains(&m) {
        return vec![];
    }
    let o = 6 - i - m;
    let (mm, oo) = if m < o { (1, 2) } else { (2, 1) };
    let n = 2;
    let h = rat::half();
    let dm = DiffOp::partial(n, mm);
    let tm = th(n, mm);
    let (em, eo) = (e(n, mm), e(n, oo));
    let list: Vec<DiffOp> = if lambda.is_zero() && *mu == h {
        vec![dm, eo.compose_raw(&tm.compose_raw(&em).minus(&id(n)))]
    } else if *lambda == -h.clone() && mu.is_zero() {
        vec![dm, chain(&[tm, eo, em])]
    } else if lambda.is_zero() && mu.is_zero() {
        vec![tm.compose_raw(&eo), tm.compose_raw(&em)]
    } else if *lambda == -h.clone() && *mu == h {
        vec![dm.compose_raw(&eo)]
    } else if lambda == mu {
        vec![tm.compose_raw(&em)]
    } else if *mu == lambda + &h {
        vec![dm]
    } else if *mu == lambda - &h {
        vec![tm]
    } else {
        vec![]
    };
    list.into_iter().map(|a| a.with_weights(lambda.clone(), mu.clone())).collect()
}

/// Whether `δA` vanishes on the fields of `K(2)` free of `θ_m`, in relabelled coordinates.
pub fn vanishes_on_k1(a: &DiffOp, i: usize, m: usize) -> bool {
    let o = 6 - i - m;
    let mm = if m < o { 1 } else { 2 };
    delta0(a).map(|y| y.restrict_avoiding(mm).is_zero()).unwrap_or(false)
}

/// `Υ³_{−½,0} + (−1)^j Υ^{3,j}_{−½,0} − 2(−1)^j δ((θ₃η_j + θ_jη₃)η_{3−j})`.
pub fn identity_ni_residual(j: usize, rhs_sign: i64) -> Cochain1 {
    let n = 3;
    let (l, m) = (frac(-1, 2), Rat::zero());
    let sj = rat::sign(j % 2 == 1);
    let lhs = y3_exp(ExpFactor::ThetaPartial).plus(&y3i(j).scale(&sj));
    let pot = th(n, 3).compose_raw(&e(n, j)).plus(&th(n, j).compose_raw(&e(n, 3))).compose_raw(&e(n, 3 - j));
    let rhs = delta0(&pot.with_weights(l.clone(), m.clone())).expect("homogeneous").op;
    let c = int(2) * sj * int(rhs_sign);
    Cochain1::new(&l, &m, lhs.minus(&rhs.scale(&c)))
}

/// The identity relating `Υ³_{−½,0}` and `Υ^{3,j}_{−½,0}` up to an explicit coboundary.
pub fn verify_identity_ni(j: usize) -> bool {
    (1..=2).contains(&j) && identity_ni_residual(j, 1).is_zero()
}

/// `Υ³_{−½,0}` vanishes on `K(2)` and agrees on `K(2)^j`, `j = 1, 2`, with the coboundary of
/// `2(−1)^j (θ₃η_j + θ_jη₃)η_{3−j}`, while being nonzero there. Returns the first failed claim.
pub fn verify_restriction_claims() -> Result<(), String> {
    let y = Cochain1::new(&frac(-1, 2), &Rat::zero(), y3_exp(ExpFactor::ThetaPartial));
    if !y.restrict_avoiding(3).is_zero() {
        return Err("restriction to K(2) is not zero".into());
    }
    for j in 1..=2 {
        let sj = rat::sign(j % 2 == 1);
        let pot = th(3, 3).compose_raw(&e(3, j)).plus(&th(3, j).compose_raw(&e(3, 3))).compose_raw(&e(3, 3 - j));
        let cob = delta0(&pot.with_weights(frac(-1, 2), Rat::zero())).expect("homogeneous").scale(&(int(2) * sj));
        if !y.minus(&cob).restrict_avoiding(j).is_zero() {
            return Err(format!("restriction to K(2)^{j} differs from the coboundary"));
        }
        if y.restrict_avoiding(j).is_zero() {
            return Err(format!("restriction to K(2)^{j} is already zero"));
        }
    }
    Ok(())
}
