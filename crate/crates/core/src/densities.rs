//! Weighted densities `F·α^λ`, the action `L^λ_{X_F}` and the splitting `F = F₁ + F₂θ_n`.

use std::fmt;

use num_traits::One;

use crate::contact::{contact_bracket, generators, ContactField, LawReport};
pub use crate::diffops::Density;
use crate::diffops::lie_operator;
use crate::error::{Error, Result};
use crate::grassmann::{bit, parse_poly, Monomial, SuperPoly};
use crate::rat::{self, Rat};

/// `(F₁·α^λ, Π(F₂·α^{λ+½}))` over `n−1` odd variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitDensity {
    pub even_part: Density,
    /// Carries a Π twist: its effective parity is the opposite of its coefficient's.
    pub pi_part: Density,
}

impl fmt::Display for SplitDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, Pi({}))", self.even_part, self.pi_part)
    }
}

/// `L^λ_{X_F} d`.
pub fn act_density(x: &ContactField, d: &Density) -> Result<Density> {
    if x.n != d.coeff.n {
        return Err(Error::Arity { left: x.n, right: d.coeff.n });
    }
    let op = lie_operator(&x.generator, &d.weight)?;
    Ok(Density::new(op.apply_poly(&d.coeff), d.weight.clone()))
}

/// Restrict a polynomial without `θ_n` to `n−1` odd variables.
fn drop_last(p: &SuperPoly) -> SuperPoly {
    let mut out = SuperPoly::zero(p.n - 1);
    for (m, c) in &p.terms {
        out.add_term(*m, c.clone());
    }
    out
}

/// `F = F₁ + F₂θ_n ↦ (F₁ at λ, Π(F₂ at λ+½))`.
pub fn split_phi(d: &Density) -> Result<SplitDensity> {
    let n = d.coeff.n;
    if n == 0 {
        return Err(Error::Index { index: 0, n });
    }
    let b = bit(n);
    let mut f1 = SuperPoly::zero(n);
    let mut f2 = SuperPoly::zero(n);
    for (m, c) in &d.coeff.terms {
        if m.mask & b == 0 {
            f1.add_term(*m, c.clone());
        } else {
            // θ_n is the largest index, so x^kθ_Sθ_n carries no reordering sign.
            f2.add_term(Monomial::new(m.xdeg, m.mask & !b), c.clone());
        }
    }
    Ok(SplitDensity {
        even_part: Density::new(drop_last(&f1), d.weight.clone()),
        pi_part: Density::new(drop_last(&f2), &d.weight + rat::half()),
    })
}

/// Inverse of [`split_phi`].
pub fn unsplit_phi(s: &SplitDensity) -> Result<Density> {
    let (a, b) = (&s.even_part, &s.pi_part);
    if a.coeff.n != b.coeff.n {
        return Err(Error::Arity { left: a.coeff.n, right: b.coeff.n });
    }
    if b.weight != &a.weight + rat::half() {
        return Err(Error::Weight(format!(
            "split parts at {} and {} do not differ by 1/2",
            rat::fmt_rat(&a.weight),
            rat::fmt_rat(&b.weight)
        )));
    }
    let n = a.coeff.n + 1;
    let mut out = a.coeff.embed(n);
    for (m, c) in &b.coeff.terms {
        out.add_term(Monomial::new(m.xdeg, m.mask | bit(n)), c.clone());
    }
    Ok(Density::new(out, a.weight.clone()))
}

/// Parse `"poly @ lambda"`.
pub fn parse_density(text: &str, n: usize) -> Result<Density> {
    let (p, w) = text.rsplit_once('@').ok_or(Error::Parse { offset: text.len(), message: "expected `@ weight`".into() })?;
    let coeff = parse_poly(p.trim_end(), n)?;
    let weight = rat::parse_rat(w).map_err(|message| Error::Parse { offset: p.len() + 1, message })?;
    Ok(Density::new(coeff, weight))
}

/// `λ` samples used to certify "for all λ" claims: identities here are polynomial of degree ≤ 2
/// in the weights, so any three samples determine them; six are used.
pub fn weight_samples() -> Vec<Rat> {
    vec![rat::int(-1), rat::frac(-1, 2), rat::int(0), rat::frac(1, 2), rat::int(1), rat::frac(3, 2)]
}

/// `{F, G}` read as the adjoint action on `𝔽_{−1}`: `L^{−1}_{X_F}(G) = {F, G}`.
pub fn adjoint_density(x: &ContactField, g: &SuperPoly) -> Result<SuperPoly> {
    Ok(act_density(x, &Density::new(g.clone(), -Rat::one()))?.coeff)
}

/// `L^λ_{X_{F,G}} = [L^λ_{X_F}, L^λ_{X_G}]` on generator pairs at every given weight.
pub fn verify_module_law(n: usize, weights: &[Rat], dmax: u32) -> LawReport {
    let gens: Vec<SuperPoly> = generators(n, dmax).into_iter().map(|x| x.generator).collect();
    let mut rep = LawReport::default();
    for lam in weights {
        let ops: Vec<_> = gens.iter().map(|f| lie_operator(f, lam).expect("monomial")).collect();
        for (f, lf) in gens.iter().zip(&ops) {
            for (g, lg) in gens.iter().zip(&ops) {
                let odd = f.homogeneous_parity().unwrap() && g.homogeneous_parity().unwrap();
                let mut comm = lf.compose_raw(lg);
                comm.add_scaled(&lg.compose_raw(lf), &-rat::sign(odd));
                let want = lie_operator(&contact_bracket(f, g).expect("homogeneous"), lam).expect("homogeneous");
                rep.checked += 1;
                if comm.terms != want.terms {
                    rep.failure = Some(format!("module law fails at lambda = {} for ({f}, {g})", rat::fmt_rat(lam)));
                    return rep;
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn p(s: &str, n: usize) -> SuperPoly {
        parse_poly(s, n).unwrap()
    }

    #[test]
    fn action_examples() {
        let lam = frac(2, 7);
        let x1 = ContactField::new(p("1", 1)).unwrap();
        let xx = ContactField::new(p("x", 1)).unwrap();
        let d = act_density(&x1, &Density::new(p("x", 1), lam.clone())).unwrap();
        assert_eq!(d, Density::new(p("1", 1), lam.clone()));
        let d = act_density(&xx, &Density::new(p("1", 1), lam.clone())).unwrap();
        assert_eq!(d, Density::new(SuperPoly::constant(1, lam.clone()), lam));
        let d = act_density(&x1, &Density::new(p("1", 1), int(0))).unwrap();
        assert!(d.coeff.is_zero());
    }

    #[test]
    fn split_examples() {
        let lam = frac(1, 3);
        let s = split_phi(&Density::new(p("t2", 2), lam.clone())).unwrap();
        assert!(s.even_part.coeff.is_zero());
        assert_eq!(s.pi_part, Density::new(p("1", 1), &lam + rat::half()));
        let d = Density::new(p("x + x*t2", 2), lam.clone());
        let s = split_phi(&d).unwrap();
        assert_eq!(s.even_part.coeff, p("x", 1));
        assert_eq!(s.pi_part.coeff, p("x", 1));
        assert_eq!(unsplit_phi(&s).unwrap(), d);
        let bad = SplitDensity { even_part: Density::new(p("1", 1), int(0)), pi_part: Density::new(p("1", 1), int(0)) };
        assert!(unsplit_phi(&bad).is_err());
    }

    #[test]
    fn adjoint_is_bracket() {
        for x in generators(2, 2) {
            for y in generators(2, 2) {
                assert_eq!(adjoint_density(&x, &y.generator).unwrap(), contact_bracket(&x.generator, &y.generator).unwrap());
            }
        }
    }

    #[test]
    fn module_law_small() {
        assert!(verify_module_law(2, &weight_samples(), 1).ok());
    }

    #[test]
    fn density_literal() {
        let d = parse_density("x*t1 @ -1/2", 1).unwrap();
        assert_eq!(d, Density::new(p("x*t1", 1), frac(-1, 2)));
        assert!(parse_density("x*t1", 1).is_err());
    }
}
