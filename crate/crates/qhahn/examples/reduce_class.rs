//! Inflating a classical Pearson pair by a linear factor and reducing it back.

use qhahn::families::{table1_family, FamilyParams, FamilyTag};
use qhahn::functional::{check_pearson, psi_from_phi, reduce_pair, PearsonPair};
use qhahn::{int, rat, Lattice, Poly};

fn main() -> qhahn::Result<()> {
    let lat = Lattice::new(rat(1, 2), int(0))?;
    let tag = FamilyTag::BigQJacobi;
    let f = table1_family(tag, &FamilyParams::documented(tag), &lat, 10)?;
    println!(
        "classical pair: Phi = {}, Psi = {}",
        f.pearson.phi, f.pearson.psi
    );

    let phi = &f.pearson.phi * &Poly::linear(int(1), rat(-2, 7));
    let psi = psi_from_phi(&f.seq, &phi, 2)?;
    let inflated = PearsonPair::new(phi, psi)?;
    check_pearson(&inflated, f.seq.functional())?;
    println!(
        "inflated pair:  Phi = {}, Psi = {}, sigma = {}",
        inflated.phi,
        inflated.psi,
        inflated.sigma()
    );

    let (min, class) = reduce_pair(&inflated, f.seq.functional(), 16)?;
    println!(
        "reduced pair:   Phi = {}, Psi = {}, class {class}",
        min.phi, min.psi
    );
    assert_eq!(min, f.pearson);
    Ok(())
}
