//! The q-Freud sequence: the non-linear recurrence, the symmetric moments,
//! the λ table and the semiclassical structure relation.

use qhahn::families::{qfreud, qfreud_monomial_coeffs};
use qhahn::functional::reduce_pair;
use qhahn::rat;
use qhahn::relations::verify_qfreud_second;

fn main() -> qhahn::Result<()> {
    let d = qfreud(&rat(1, 2), &rat(1, 3), &rat(4, 1), &rat(1, 2), 12)?;
    for n in 1..=6 {
        println!("c_{n} = {}   a_{n} = {}", d.c[n], d.a[n]);
    }
    println!("Psi = {}", d.psi);
    println!("symmetric: {}", d.symmetric());
    println!(
        "moment relation holds: {} (needs K = q^3)",
        d.moment_relation_holds()
    );

    let lam = qfreud_monomial_coeffs(&d, 6)?;
    for (n, row) in lam.iter().enumerate() {
        let s: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        println!("  P_{n}: [{}]", s.join(", "));
    }

    let r = verify_qfreud_second(&d)?;
    println!("{} pass={} range={:?}", r.relation, r.pass, r.range);
    let (pair, class) = reduce_pair(&d.pearson(), d.seq.functional(), 16)?;
    println!(
        "minimal pair Phi = {}, Psi = {}, class {class}",
        pair.phi, pair.psi
    );
    Ok(())
}
