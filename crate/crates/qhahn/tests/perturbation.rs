//! Wrong inputs must be caught: perturbed coefficients, wrong band widths,
//! mismatched family data and broken Pearson pairs.

use qhahn::exactq::{rat, Lattice, Rational};
use qhahn::families::{table1_family, FamilyParams, FamilyTag, Table1Row};
use qhahn::functional::PearsonPair;
use qhahn::relations::{
    characterization, verify_classical_trio, verify_diagonal, verify_second_structure_classical,
};
use qhahn::{Error, Poly};

fn family(tag: FamilyTag, q: Rational, n: usize) -> qhahn::families::Family {
    let lat = Lattice::new(q, Rational::from_integer(0.into())).unwrap();
    table1_family(tag, &FamilyParams::documented(tag), &lat, n).unwrap()
}

#[test]
fn every_referenced_entry_is_load_bearing() {
    for tag in FamilyTag::ALL {
        let f = family(tag, rat(2, 3), 8);
        for r in characterization(&f.seq, &f.pearson).unwrap() {
            assert!(r.pass, "{tag} {}", r.relation);
            assert!(r.recheck().is_none());
            assert!(r.perturbation_sensitive(), "{tag} {}", r.relation);
        }
    }
}

#[test]
fn trio_rejects_other_parameters() {
    let f = family(FamilyTag::BigQJacobi, rat(1, 2), 8);
    let mut p = FamilyParams::documented(FamilyTag::BigQJacobi);
    p.a = Some(rat(1, 4));
    let wrong = Table1Row::new(FamilyTag::BigQJacobi, &p, &f.row.lat).unwrap();
    let r = verify_classical_trio(&f.seq, &wrong).unwrap();
    assert!(!r.pass);
    let w = r.witness.unwrap();
    assert!(w.n >= 2);
}

#[test]
fn trio_rejects_other_family() {
    let f = family(FamilyTag::QLaguerre, rat(3, 2), 8);
    let other = Table1Row::new(
        FamilyTag::QCharlier,
        &FamilyParams::documented(FamilyTag::QCharlier),
        &f.row.lat,
    )
    .unwrap();
    assert!(!verify_classical_trio(&f.seq, &other).unwrap().pass);
}

#[test]
fn narrower_band_fails() {
    let f = family(FamilyTag::QCharlier, rat(1, 2), 10);
    assert!(verify_diagonal(&f.seq, &Poly::one(), 2).unwrap().pass);
    assert!(!verify_diagonal(&f.seq, &Poly::one(), 1).unwrap().pass);
    assert!(!verify_diagonal(&f.seq, &Poly::x(), 2).unwrap().pass);
}

#[test]
fn second_structure_needs_the_right_degree() {
    let f = family(FamilyTag::BigQJacobi, rat(2, 3), 9);
    assert!(verify_second_structure_classical(&f.seq, 2).unwrap().pass);
    // the Big q-Jacobi φ has degree 2, so a first-degree band is too narrow
    assert!(!verify_second_structure_classical(&f.seq, 1).unwrap().pass);
}

#[test]
fn wrong_pearson_pair_is_an_error() {
    let f = family(FamilyTag::QLaguerre, rat(1, 2), 8);
    let bad = PearsonPair::new(f.pearson.phi.clone(), &f.pearson.psi + &Poly::one()).unwrap();
    let err = characterization(&f.seq, &bad).unwrap_err();
    assert!(matches!(err, Error::PearsonViolated { .. }), "{err:?}");
}
