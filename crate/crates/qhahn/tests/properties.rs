//! Property tests of the exact calculus.

use num_traits::{One, Zero};
use proptest::prelude::*;

use qhahn::exactq::{qbracket, qfactorial, rat, Lattice, Rational};
use qhahn::families::moments_from_polys;
use qhahn::functional::{
    apply_delta, check_pearson, delta_of_product, divide_linear, hankel_check, multiply,
    pearson_free_indices, pearson_moments, smop_from_moments, MomentFunctional, OrthoSequence,
    PearsonPair,
};
use qhahn::Poly;

fn small_rat() -> impl Strategy<Value = Rational> {
    (-7i64..=7, 1i64..=5).prop_map(|(n, d)| rat(n, d))
}

fn nonzero_rat() -> impl Strategy<Value = Rational> {
    small_rat().prop_filter("nonzero", |r| !r.is_zero())
}

fn lattice() -> impl Strategy<Value = Lattice> {
    let q = prop_oneof![
        Just(rat(1, 2)),
        Just(rat(2, 3)),
        Just(rat(3, 2)),
        Just(rat(2, 1)),
        Just(rat(-1, 3)),
    ];
    let w = prop_oneof![
        Just(rat(0, 1)),
        Just(rat(1, 3)),
        Just(rat(1, 1)),
        Just(rat(-2, 1))
    ];
    prop_oneof![
        4 => (q, w).prop_map(|(q, w)| Lattice::new(q, w).unwrap()),
        1 => Just(Lattice::uniform()),
    ]
}

fn q_lattice() -> impl Strategy<Value = Lattice> {
    prop_oneof![
        Just(rat(1, 2)),
        Just(rat(2, 3)),
        Just(rat(3, 2)),
        Just(rat(3, 1))
    ]
    .prop_map(|q| Lattice::new(q, Rational::zero()).unwrap())
}

fn poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(small_rat(), 0..=max_deg + 1).prop_map(Poly::new)
}

fn functional(len: usize) -> impl Strategy<Value = (Vec<Rational>, Lattice)> {
    (
        nonzero_rat(),
        prop::collection::vec(small_rat(), len - 1),
        lattice(),
    )
        .prop_map(|(m0, rest, lat)| {
            let mut m = vec![m0];
            m.extend(rest);
            (m, lat)
        })
}

/// β_n arbitrary, γ_n nonzero: a quasi-definite recurrence of length n.
fn recurrence(n: usize) -> impl Strategy<Value = (Vec<Rational>, Vec<Rational>)> {
    (
        prop::collection::vec(small_rat(), n),
        prop::collection::vec(nonzero_rat(), n - 1),
    )
        .prop_map(|(beta, g)| {
            let mut gamma = vec![Rational::zero()];
            gamma.extend(g);
            (beta, gamma)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_rule_two_paths_agree(g in poly(4), (m, lat) in functional(14)) {
        let u = MomentFunctional::new(m, lat).unwrap();
        let a = apply_delta(&multiply(&u, &g).unwrap()).unwrap();
        let b = delta_of_product(&g, &u).unwrap();
        prop_assert_eq!(a.moments(), b.moments());
    }

    #[test]
    fn hahn_quotient_is_exact(f in poly(6), lat in lattice()) {
        let num = &f.lattice_shift(1, &lat) - &f;
        let den = Poly::linear(lat.q() - Rational::one(), lat.omega().clone());
        let d = f.hahn_apply(&lat).unwrap();
        prop_assert_eq!(num.exact_divide(&den).unwrap(), d);
    }

    #[test]
    fn shift_inverts(f in poly(5), lat in lattice(), k in -3i64..=3) {
        prop_assert_eq!(f.lattice_shift(k, &lat).lattice_shift(-k, &lat), f);
    }

    #[test]
    fn bracket_recurrence(lat in lattice(), n in 0usize..20) {
        prop_assert_eq!(qbracket(n + 1, &lat), Rational::one() + lat.q() * qbracket(n, &lat));
        prop_assert_eq!(qfactorial(n + 1, &lat), qfactorial(n, &lat) * qbracket(n + 1, &lat));
    }

    #[test]
    fn monomials_map_to_brackets(lat in q_lattice(), n in 0usize..10) {
        let d = Poly::monomial(n).hahn_apply(&lat).unwrap();
        let expect = if n == 0 {
            Poly::zero()
        } else {
            Poly::monomial(n - 1).scale(&qbracket(n, &lat))
        };
        prop_assert_eq!(d, expect);
    }

    #[test]
    fn product_rule_at_zero_omega(f in poly(4), g in poly(4), lat in q_lattice()) {
        let lhs = (&f * &g).hahn_apply(&lat).unwrap();
        let rhs = &(&f.lattice_shift(1, &lat) * &g.hahn_apply(&lat).unwrap())
            + &(&g * &f.hahn_apply(&lat).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn divide_then_multiply(c in small_rat(), (m, lat) in functional(10)) {
        let u = MomentFunctional::new(m, lat).unwrap();
        let v = divide_linear(&u, &c).unwrap();
        let back = multiply(&v, &Poly::linear(Rational::one(), -c)).unwrap();
        let n = back.moments().len().min(u.moments().len());
        prop_assert_eq!(&back.moments()[..n], &u.moments()[..n]);
    }

    #[test]
    fn favard_round_trip((beta, gamma) in recurrence(13), lat in lattice()) {
        let polys = OrthoSequence::from_recurrence(&beta, &gamma);
        let u = moments_from_polys(&polys, &lat).unwrap();
        let seq = smop_from_moments(&u, 6).unwrap();
        prop_assert_eq!(seq.polys(), &polys[..7]);
        prop_assert_eq!(seq.beta(), &beta[..6]);
        prop_assert_eq!(&seq.gamma()[..6], &gamma[..6]);
    }

    #[test]
    fn hankel_ratio_gives_gamma((beta, gamma) in recurrence(17), lat in lattice()) {
        let polys = OrthoSequence::from_recurrence(&beta, &gamma);
        let u = moments_from_polys(&polys, &lat).unwrap();
        let seq = smop_from_moments(&u, 8).unwrap();
        let h = hankel_check(&u, 8).unwrap();
        for n in 1..=8 {
            let prev2 = if n >= 2 { h[n - 2].clone() } else { Rational::one() };
            prop_assert_eq!(seq.gamma()[n].clone(), &h[n] * prev2 / (&h[n - 1] * &h[n - 1]));
        }
    }

    #[test]
    fn norms_match_pairings((beta, gamma) in recurrence(11), lat in lattice()) {
        let polys = OrthoSequence::from_recurrence(&beta, &gamma);
        let u = moments_from_polys(&polys, &lat).unwrap();
        let seq = smop_from_moments(&u, 5).unwrap();
        for n in 1..=5 {
            prop_assert_eq!(&seq.norms()[n], &(&seq.norms()[n - 1] * &seq.gamma()[n]));
        }
    }

    #[test]
    fn pearson_moments_satisfy_pearson(
        psi_rest in prop::collection::vec(small_rat(), 1..=3),
        lead in nonzero_rat(),
        lat in q_lattice(),
        seed in prop::collection::vec(small_rat(), 4),
    ) {
        let mut c = psi_rest;
        c.push(lead);
        let pp = PearsonPair::new(Poly::one(), Poly::new(c)).unwrap();
        let free: Vec<Rational> = seed.into_iter().take(pearson_free_indices(&pp).len()).collect();
        prop_assume!(free.len() == pearson_free_indices(&pp).len());
        let u = pearson_moments(&pp, &lat, &free, 12).unwrap();
        prop_assert!(check_pearson(&pp, &u).is_ok());
    }
}
