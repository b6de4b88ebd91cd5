//! The Hahn operator on a few lattices: brackets, shifts, the dual operator.

use qhahn::{int, qbracket, qfactorial, qpochhammer, rat, Lattice, Poly};

fn main() -> qhahn::Result<()> {
    let lat = Lattice::new(rat(1, 2), int(1))?;
    println!("lattice {lat}, dual {}", lat.dual());

    for n in 0..5 {
        print!("[{n}] = {}  ", qbracket(n, &lat));
    }
    println!(
        "\n[4]! = {}, (1/3; q)_3 = {}",
        qfactorial(4, &lat),
        qpochhammer(&rat(1, 3), &lat, 3)
    );

    let f = Poly::from_ints(&[1, -3, 0, 2]);
    println!("f        = {f}");
    println!("f(s+1)   = {}", f.lattice_shift(1, &lat));
    println!("f(s-1)   = {}", f.lattice_shift(-1, &lat));
    println!("D f      = {}", f.hahn_apply(&lat)?);
    println!("D' f     = {}", f.hahn_apply_dual(&lat)?);
    println!("D^3 f    = {}", f.iterated_hahn(3, &lat)?);

    // x(s) = s: forward differences and [n] = n
    let u = Lattice::uniform();
    println!(
        "uniform: D x^3 = {}, [5] = {}",
        Poly::monomial(3).hahn_apply(&u)?,
        qbracket(5, &u)
    );
    Ok(())
}
