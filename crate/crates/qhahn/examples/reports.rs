//! Relation reports as JSON and CSV, and what a unit perturbation does.

use qhahn::cli::emit_report;
use qhahn::families::{table1_family, FamilyParams, FamilyTag};
use qhahn::relations::verify_second_structure_classical;
use qhahn::{int, rat, Lattice};

fn main() -> qhahn::Result<()> {
    let lat = Lattice::new(rat(1, 2), int(0))?;
    let tag = FamilyTag::AlSalamCarlitzI;
    let f = table1_family(tag, &FamilyParams::documented(tag), &lat, 5)?;
    let r = verify_second_structure_classical(&f.seq, f.pearson.t())?;

    let json = emit_report(std::slice::from_ref(&r), false)?;
    println!("{}", json.lines().take(20).collect::<Vec<_>>().join("\n"));
    println!("...");
    print!("{}", emit_report(std::slice::from_ref(&r), true)?);

    println!(
        "entries used by the identities: {}",
        r.referenced_entries().len()
    );
    println!(
        "theta_3,2 + 1 breaks the relation: {}",
        r.perturbed_fails("theta", 3, 2)
    );
    println!(
        "every entry is load-bearing: {}",
        r.perturbation_sensitive()
    );
    Ok(())
}
