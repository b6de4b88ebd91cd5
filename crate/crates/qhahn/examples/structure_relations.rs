//! First and second structure relations of a q-classical family, with the
//! coefficient tables.

use qhahn::families::{table1_family, FamilyParams, FamilyTag};
use qhahn::relations::{verify_first_structure, verify_second_structure_classical};
use qhahn::{int, rat, Lattice};

fn main() -> qhahn::Result<()> {
    let lat = Lattice::new(rat(3, 2), int(0))?;
    let tag = FamilyTag::BigQJacobi;
    let f = table1_family(tag, &FamilyParams::documented(tag), &lat, 8)?;

    let first = verify_first_structure(&f.seq, &f.row.phi, 0)?;
    println!(
        "{} pass={} range={:?}",
        first.relation, first.pass, first.range
    );
    for n in 2..5 {
        let row: Vec<String> = (n - 1..=n + 2)
            .map(|nu| first.coef("lambda", n, nu).to_string())
            .collect();
        println!("  lambda_{n},{}..{} = {}", n - 1, n + 2, row.join(", "));
    }

    let second = verify_second_structure_classical(&f.seq, f.pearson.t())?;
    println!(
        "{} pass={} range={:?}",
        second.relation, second.pass, second.range
    );
    for n in 3..6 {
        let row: Vec<String> = (n - 2..=n)
            .map(|nu| second.coef("theta", n, nu).to_string())
            .collect();
        println!("  theta_{n},{}..{n} = {}", n - 2, row.join(", "));
    }
    Ok(())
}
