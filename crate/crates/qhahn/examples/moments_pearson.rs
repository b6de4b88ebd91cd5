//! Moments from a Pearson equation, then Hankel determinants and the SMOP.

use qhahn::functional::{
    check_pearson, hankel_check, pearson_free_indices, pearson_moments, smop_from_moments,
    PearsonPair,
};
use qhahn::{int, rat, Lattice, Poly};

fn main() -> qhahn::Result<()> {
    let lat = Lattice::new(rat(2, 3), int(0))?;
    // Φ = 1, Ψ = 3x² + 2x + 1: one free moment
    let pp = PearsonPair::new(Poly::one(), Poly::from_ints(&[1, 2, 3]))?;
    println!("t = {}, p = {}, class bound {}", pp.t(), pp.p(), pp.sigma());
    println!("free indices {:?}", pearson_free_indices(&pp));

    let u = pearson_moments(&pp, &lat, &[rat(1, 5)], 12)?;
    check_pearson(&pp, &u)?;
    println!("origin {}", u.origin());
    for (n, m) in u.moments().iter().enumerate().take(7) {
        println!("  (u)_{n} = {m}");
    }

    let h = hankel_check(&u, 5)?;
    println!(
        "Hankel determinants {:?}",
        h.iter().map(|d| d.to_string()).collect::<Vec<_>>()
    );

    let seq = smop_from_moments(&u, 5)?;
    for n in 0..=5 {
        println!("B_{n} = {}", seq.poly(n));
    }
    for n in 1..5 {
        println!(
            "beta_{n} = {}, gamma_{n} = {}",
            seq.beta()[n],
            seq.gamma()[n]
        );
    }
    Ok(())
}
