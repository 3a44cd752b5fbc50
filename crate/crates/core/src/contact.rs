//! The contact Lie superalgebra `K(n)`: fields `X_F` indexed by their generating function.

use std::fmt;

use num_traits::{One, Zero};

use crate::diffops::{lie_operator, DiffOp};
use crate::error::{Error, Result};
use crate::grassmann::{Monomial, SuperPoly};
use crate::rat::{self, Rat};

/// `X_F` for a parity-homogeneous `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContactField {
    pub n: usize,
    pub generator: SuperPoly,
}

impl ContactField {
    pub fn new(generator: SuperPoly) -> Result<Self> {
        generator.homogeneous_parity()?;
        Ok(ContactField { n: generator.n, generator })
    }

    pub fn odd(&self) -> bool {
        self.generator.homogeneous_parity().expect("homogeneous by construction")
    }

    /// Lies in `K(n−1)^i`, the subalgebra of fields whose generator does not involve `θ_i`.
    pub fn avoids(&self, i: usize) -> bool {
        let b = crate::grassmann::bit(i);
        self.generator.terms.keys().all(|m| m.mask & b == 0)
    }
}

impl fmt::Display for ContactField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X[{}]", self.generator)
    }
}

/// `{F, G} = FG′ − F′G − ½(−1)^{|F|} Σ η_i(F)·η_i(G)`.
pub fn contact_bracket(f: &SuperPoly, g: &SuperPoly) -> Result<SuperPoly> {
    if f.n != g.n {
        return Err(Error::Arity { left: f.n, right: g.n });
    }
    let fodd = f.homogeneous_parity()?;
    g.homogeneous_parity()?;
    let mut out = f.mul_raw(&g.dx());
    out.add_scaled(&f.dx().mul_raw(g), &-Rat::one());
    let c = if fodd { rat::half() } else { -rat::half() };
    for i in 1..=f.n {
        out.add_scaled(&f.eta(i).mul_raw(&g.eta(i)), &c);
    }
    Ok(out)
}

/// `X_F` as a weight-0 operator on functions.
pub fn vector_field_of(x: &ContactField) -> DiffOp {
    lie_operator(&x.generator, &Rat::zero()).expect("homogeneous by construction")
}

/// `[X_F, X_G] = X_{F,G}`.
pub fn bracket_as_fields(x: &ContactField, y: &ContactField) -> Result<ContactField> {
    Ok(ContactField { n: x.n, generator: contact_bracket(&x.generator, &y.generator)? })
}

/// All `X_F` with `F = x^m θ_S`, `m ≤ dmax`, `S ⊊ {1..n}`. For `n = 1` the full mask is kept:
/// fields free of `θ₁` only span an even subalgebra there.
pub fn generators(n: usize, dmax: u32) -> Vec<ContactField> {
    let full = (1u32 << n) - 1;
    let mut out = Vec::new();
    for m in 0..=dmax {
        for mask in 0..=full {
            if mask == full && n > 1 {
                continue;
            }
            out.push(ContactField { n, generator: SuperPoly::monomial(n, Monomial::new(m, mask)) });
        }
    }
    out
}

/// Generators `x^m θ_S` of `K(n)` that avoid `θ_i`: the subalgebra `K(n−1)^i`.
pub fn subalgebra_generators(n: usize, i: usize, dmax: u32) -> Vec<ContactField> {
    generators(n, dmax).into_iter().filter(|x| x.avoids(i)).collect()
}

/// Small Lie generating set of `K(n)`: `X_{θ_i}` and `X_{x²}`.
pub fn lie_generating_set(n: usize) -> Vec<ContactField> {
    let mut out: Vec<ContactField> = (1..=n).map(|i| ContactField { n, generator: SuperPoly::theta(n, i) }).collect();
    out.push(ContactField { n, generator: SuperPoly::monomial(n, Monomial::new(2, 0)) });
    out
}

/// Outcome of an exhaustive identity check over a finite family.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LawReport {
    pub checked: usize,
    /// First violated instance, rendered.
    pub failure: Option<String>,
}

impl LawReport {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Super-antisymmetry and super-Jacobi of the bracket on monomial triples from
/// `generators(n, dmax)`, and `[X_F, X_G] = X_{F,G}` as operators on pairs.
pub fn verify_bracket_laws(n: usize, dmax: u32) -> LawReport {
    let gens: Vec<SuperPoly> = generators(n, dmax).into_iter().map(|x| x.generator).collect();
    let sgn = |a: bool, b: bool| rat::sign(a && b);
    let mut rep = LawReport::default();
    for f in &gens {
        let fo = f.homogeneous_parity().expect("monomial");
        for g in &gens {
            let go = g.homogeneous_parity().expect("monomial");
            let fg = contact_bracket(f, g).expect("homogeneous");
            let gf = contact_bracket(g, f).expect("homogeneous");
            rep.checked += 1;
            if fg != gf.scale(&-sgn(fo, go)) {
                rep.failure = Some(format!("antisymmetry fails for ({f}, {g})"));
                return rep;
            }
            let (xf, xg) = (vector_field_of(&ContactField { n, generator: f.clone() }), vector_field_of(&ContactField { n, generator: g.clone() }));
            let mut comm = xf.compose_raw(&xg);
            comm.add_scaled(&xg.compose_raw(&xf), &-sgn(fo, go));
            let want = lie_operator(&fg, &Rat::zero()).expect("homogeneous");
            if comm.terms != want.terms {
                rep.failure = Some(format!("[X_F, X_G] != X_(F,G) for ({f}, {g})"));
                return rep;
            }
            for h in &gens {
                let ho = h.homogeneous_parity().expect("monomial");
                let lhs = contact_bracket(f, &contact_bracket(g, h).unwrap()).unwrap();
                let mut rhs = contact_bracket(&fg, h).unwrap();
                rhs.add_scaled(&contact_bracket(g, &contact_bracket(f, h).unwrap()).unwrap(), &sgn(fo, go));
                rep.checked += 1;
                if lhs != rhs {
                    rep.failure = Some(format!("Jacobi fails for ({f}, {g}, {h}) with parities ({fo}, {go}, {ho})"));
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
    use crate::diffops::parse_op;
    use crate::grassmann::parse_poly;
    use crate::rat::frac;

    fn p(s: &str, n: usize) -> SuperPoly {
        parse_poly(s, n).unwrap()
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(contact_bracket(&p("1", 1), &p("x", 1)).unwrap(), p("1", 1));
        assert_eq!(contact_bracket(&p("t1", 1), &p("t1", 1)).unwrap(), p("1/2", 1));
        assert_eq!(contact_bracket(&p("x", 1), &p("t1", 1)).unwrap(), p("-1/2*t1", 1));
        assert!(contact_bracket(&p("x + t1", 1), &p("x", 1)).is_err());
    }

    #[test]
    fn field_examples() {
        let f = |s: &str, n| vector_field_of(&ContactField::new(p(s, n)).unwrap());
        assert_eq!(f("1", 2), DiffOp::dx(2));
        // x∂_x + ½Σθ_i∂_i, with θ_i∂_i = θ_iη_i
        assert_eq!(f("x", 2), parse_op("x * dx + 1/2 * t1 * e1 + 1/2 * t2 * e2", 2).unwrap());
        assert_eq!(f("t1", 1), parse_op("t1 * dx + 1/2 * e1", 1).unwrap());
    }

    #[test]
    fn field_bracket_examples() {
        let x1 = ContactField::new(p("1", 1)).unwrap();
        let xx = ContactField::new(p("x", 1)).unwrap();
        assert_eq!(bracket_as_fields(&x1, &xx).unwrap(), x1);
        let t = ContactField::new(p("t1", 1)).unwrap();
        assert_eq!(bracket_as_fields(&t, &t).unwrap().generator, SuperPoly::constant(1, frac(1, 2)));
    }

    #[test]
    fn bracket_laws_small() {
        let r = verify_bracket_laws(2, 1);
        assert!(r.ok(), "{:?}", r.failure);
        assert!(r.checked > 0);
    }

    #[test]
    fn generator_counts() {
        assert_eq!(generators(1, 2).len(), 6);
        assert_eq!(generators(2, 0).len(), 3);
        assert_eq!(generators(2, 2).len(), 9);
        assert_eq!(subalgebra_generators(3, 3, 1).len(), 8);
    }
}
