//! Randomized algebraic identities over small supercommutative polynomials.

use proptest::prelude::*;

use superk::cohomology::{chi_transport, delta0_with, is_cocycle};
use superk::contact::{contact_bracket, vector_field_of, ContactField};
use superk::diffops::{chi, lie_operator, DiffOp, OpMonomial};
use superk::grassmann::{format_poly, parse_poly, Monomial, SuperPoly};
use superk::rat::{self, Rat};

const N: usize = 3;

fn coeff() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat::frac(p, q))
}

fn poly_with(odd: Option<bool>) -> impl Strategy<Value = SuperPoly> {
    prop::collection::vec((0u32..=2, 0u32..(1 << N), coeff()), 0..4).prop_map(move |terms| {
        let mut p = SuperPoly::zero(N);
        for (xdeg, mask, c) in terms {
            let mask = match odd {
                Some(o) if (mask.count_ones() % 2 == 1) != o => mask ^ 1,
                _ => mask,
            };
            p.add_term(Monomial::new(xdeg, mask), c);
        }
        p
    })
}

fn poly() -> impl Strategy<Value = SuperPoly> {
    poly_with(None)
}

fn homogeneous() -> impl Strategy<Value = (SuperPoly, bool)> {
    any::<bool>().prop_flat_map(|o| (poly_with(Some(o)), Just(o)))
}

fn op() -> impl Strategy<Value = DiffOp> {
    prop::collection::vec((0u32..=2, 0u32..(1 << N), poly()), 0..3).prop_map(|terms| {
        let mut a = DiffOp::raw(N);
        for (k, etas, c) in terms {
            a.add_scaled(&DiffOp::monomial(N, OpMonomial::new(k, etas), c), &rat::one());
        }
        a
    })
}

fn sign(odd: bool) -> Rat {
    rat::sign(odd)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn product_is_associative(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn product_distributes(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn product_is_supercommutative((a, ao) in homogeneous(), (b, bo) in homogeneous()) {
        prop_assert_eq!(&a * &b, (&b * &a).scale(&sign(ao && bo)));
    }

    #[test]
    fn odd_derivations_obey_super_leibniz((a, ao) in homogeneous(), b in poly(), i in 1usize..=N) {
        let ab = &a * &b;
        prop_assert_eq!(ab.eta(i), &(&a.eta(i) * &b) + &(&a * &b.eta(i)).scale(&sign(ao)));
        prop_assert_eq!(ab.partial(i), &(&a.partial(i) * &b) + &(&a * &b.partial(i)).scale(&sign(ao)));
        prop_assert_eq!(ab.dx(), &(&a.dx() * &b) + &(&a * &b.dx()));
    }

    #[test]
    fn eta_anticommutator(a in poly(), i in 1usize..=N, j in 1usize..=N) {
        let anti = &a.eta(j).eta(i) + &a.eta(i).eta(j);
        let want = if i == j { a.dx().scale(&rat::int(-2)) } else { SuperPoly::zero(N) };
        prop_assert_eq!(anti, want);
    }

    #[test]
    fn sigma_is_a_multiplicative_involution(a in poly(), b in poly()) {
        prop_assert_eq!(a.sigma().sigma(), a.clone());
        prop_assert_eq!((&a * &b).sigma(), &a.sigma() * &b.sigma());
    }

    #[test]
    fn poly_text_round_trips(a in poly()) {
        prop_assert_eq!(parse_poly(&format_poly(&a), N).unwrap(), a);
    }

    #[test]
    fn rational_text_round_trips(p in -1000i64..1000, q in 1i64..1000) {
        let r = rat::frac(p, q);
        prop_assert_eq!(rat::parse_rat(&rat::fmt_rat(&r)).unwrap(), r);
    }

    #[test]
    fn composition_acts_as_composition(a in op(), b in op(), f in poly()) {
        prop_assert_eq!(a.compose_raw(&b).apply_poly(&f), a.apply_poly(&b.apply_poly(&f)));
    }

    #[test]
    fn composition_is_associative(a in op(), b in op(), c in op()) {
        prop_assert_eq!(a.compose_raw(&b).compose_raw(&c).terms, a.compose_raw(&b.compose_raw(&c)).terms);
    }

    #[test]
    fn chi_is_sigma_after(a in op(), f in poly()) {
        prop_assert_eq!(chi(&a).apply_poly(&f), a.apply_poly(&f).sigma());
        prop_assert_eq!(chi(&chi(&a)).terms, a.terms);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_super_antisymmetric((f, fo) in homogeneous(), (g, go) in homogeneous()) {
        let fg = contact_bracket(&f, &g).unwrap();
        let gf = contact_bracket(&g, &f).unwrap();
        prop_assert_eq!(fg, gf.scale(&-sign(fo && go)));
    }

    #[test]
    fn bracket_satisfies_super_jacobi((f, fo) in homogeneous(), (g, go) in homogeneous(), (h, _) in homogeneous()) {
        let br = |a: &SuperPoly, b: &SuperPoly| contact_bracket(a, b).unwrap();
        let lhs = br(&f, &br(&g, &h));
        let rhs = &br(&br(&f, &g), &h) + &br(&g, &br(&f, &h)).scale(&sign(fo && go));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fields_represent_the_bracket((f, fo) in homogeneous(), (g, go) in homogeneous(), u in poly()) {
        let xf = vector_field_of(&ContactField::new(f.clone()).unwrap());
        let xg = vector_field_of(&ContactField::new(g.clone()).unwrap());
        let xfg = vector_field_of(&ContactField::new(contact_bracket(&f, &g).unwrap()).unwrap());
        let comm = &xf.apply_poly(&xg.apply_poly(&u)) - &xg.apply_poly(&xf.apply_poly(&u)).scale(&sign(fo && go));
        prop_assert_eq!(comm, xfg.apply_poly(&u));
    }

    #[test]
    fn density_action_is_a_representation(
        (f, fo) in homogeneous(),
        (g, go) in homogeneous(),
        u in poly(),
        p in -4i64..=4,
        q in 1i64..=3,
    ) {
        let lam = rat::frac(p, q);
        let lf = lie_operator(&f, &lam).unwrap();
        let lg = lie_operator(&g, &lam).unwrap();
        let lfg = lie_operator(&contact_bracket(&f, &g).unwrap(), &lam).unwrap();
        let comm = &lf.apply_poly(&lg.apply_poly(&u)) - &lg.apply_poly(&lf.apply_poly(&u)).scale(&sign(fo && go));
        prop_assert_eq!(comm, lfg.apply_poly(&u));
    }
}

fn homogeneous_op(n: usize) -> impl Strategy<Value = (DiffOp, bool)> {
    let term = (0u32..=1, 0u32..(1 << n), 0u32..=1, 0u32..(1 << n), coeff());
    (any::<bool>(), prop::collection::vec(term, 1..4)).prop_map(move |(odd, terms)| {
        let mut a = DiffOp::raw(n);
        for (xdeg, mask, k, etas, c) in terms {
            let mask = if ((mask ^ etas).count_ones() % 2 == 1) != odd { mask ^ 1 } else { mask };
            let coeff = SuperPoly::term(n, Monomial::new(xdeg, mask), c);
            a.add_scaled(&DiffOp::monomial(n, OpMonomial::new(k, etas), coeff), &rat::one());
        }
        (a, odd)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coboundaries_are_cocycles((a, _) in homogeneous_op(2), p in -3i64..=3, q in 1i64..=3, pi in any::<bool>()) {
        let lam = rat::frac(p, q);
        let mu = &lam + rat::half();
        let a = a.with_weights(lam, mu);
        let y = delta0_with(&a, pi).unwrap();
        prop_assert!(is_cocycle(&y, 2).unwrap().is_none());
    }

    #[test]
    fn chi_transports_coboundaries((a, _) in homogeneous_op(2), p in -3i64..=3) {
        let lam = rat::int(p);
        let a = a.with_weights(lam.clone(), lam + rat::one());
        let lhs = chi_transport(&delta0_with(&a, false).unwrap());
        let rhs = delta0_with(&chi(&a), true).unwrap();
        prop_assert_eq!(lhs.op.terms, rhs.op.terms);
        prop_assert_eq!(lhs.pi, rhs.pi);
    }
}
