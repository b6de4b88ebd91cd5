//! A class-one functional with Φ = 1 and deg Ψ = 2: its structure relation
//! and the fact that it is not diagonal.

use qhahn::families::class1_example;
use qhahn::functional::reduce_pair;
use qhahn::relations::{diagonal_search, verify_class1};
use qhahn::{int, rat, Lattice, Poly};

fn main() -> qhahn::Result<()> {
    let lat = Lattice::new(rat(1, 2), int(0))?;
    let psi = Poly::from_ints(&[1, 2, 3]);
    let d = class1_example(&psi, &rat(1, 5), &lat, 10)?;
    println!("C = {}", d.c);
    for n in 0..4 {
        println!(
            "rho_{n} = {}, v_{n},0 = {}, lambda_{n},{} = {}",
            d.rho[n],
            d.v0[n],
            n as i64 - 1,
            d.lam[n]
        );
    }
    let r = verify_class1(&d)?;
    println!("{} pass={} range={:?}", r.relation, r.pass, r.range);
    println!(
        "Psi expansion: {:?}",
        r.table("psi_expansion").map(|t| t.len())
    );

    let (_, class) = reduce_pair(&d.pearson(), d.seq.functional(), 20)?;
    println!("class {class}");

    let wide = class1_example(&psi, &rat(1, 5), &lat, 12)?;
    let found = diagonal_search(&wide.seq, 3, 5)?;
    println!(
        "diagonal candidates with t <= 3, sigma <= 5: {}",
        found.len()
    );
    Ok(())
}
