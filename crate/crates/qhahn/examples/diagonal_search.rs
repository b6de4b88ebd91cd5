//! Searching for (φ, σ) with φB_n = Σ_{ν ≥ n−σ} θ_{n,ν}B^{[1]}_ν.

use qhahn::families::{table1_family, FamilyParams, FamilyTag};
use qhahn::relations::{diagonal_search, verify_diagonal};
use qhahn::{int, rat, Lattice, Poly};

fn main() -> qhahn::Result<()> {
    let lat = Lattice::new(rat(1, 2), int(0))?;
    for tag in [FamilyTag::QCharlier, FamilyTag::AlSalamCarlitzI] {
        let f = table1_family(tag, &FamilyParams::documented(tag), &lat, 12)?;
        println!("{tag}");
        let found = diagonal_search(&f.seq, 3, 5)?;
        for c in &found {
            println!(
                "  phi = {}, sigma = {}, free directions {}",
                c.phi, c.sigma, c.dim
            );
        }
        let best = &found[0];
        let r = verify_diagonal(&f.seq, &best.phi, best.sigma)?;
        println!("  phi = {}, sigma = {}: {}", best.phi, best.sigma, r.pass);
        for note in &r.notes {
            println!("  note: {note}");
        }
        // one step narrower must fail
        if best.sigma > 0 {
            println!(
                "  sigma = {}: {}",
                best.sigma - 1,
                verify_diagonal(&f.seq, &Poly::one(), best.sigma - 1)?.pass
            );
        }
    }
    Ok(())
}
