//! The same relations on x(s) = s, where [n] = n and Δ is the forward difference.

use qhahn::families::discrete_freud;
use qhahn::relations::verify_uniform;

fn main() -> qhahn::Result<()> {
    let (seq, pp) = discrete_freud(10)?;
    println!(
        "Phi = {}, Psi = {}, lattice {}",
        pp.phi,
        pp.psi,
        seq.lattice()
    );
    for n in 0..4 {
        println!("B_{n} = {}", seq.poly(n));
    }
    for r in verify_uniform(&seq, &pp)? {
        println!("{:<12} {:?} {}", r.relation.to_string(), r.range, r.pass);
    }
    Ok(())
}
