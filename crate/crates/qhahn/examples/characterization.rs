//! The characterization relations on a q-classical family and on q-Freud.

use qhahn::families::{qfreud, table1_family, FamilyParams, FamilyTag};
use qhahn::relations::{characterization, RelationReport};
use qhahn::{int, rat, Lattice};

fn show(label: &str, reports: &[RelationReport]) {
    println!("{label}");
    for r in reports {
        let w = r
            .witness
            .as_ref()
            .map(|w| format!("  first failure at n={} nu={}: {}", w.n, w.nu, w.check))
            .unwrap_or_default();
        println!(
            "  {:<12} {:?} {}{w}",
            r.relation.to_string(),
            r.range,
            if r.pass { "ok" } else { "FAIL" }
        );
    }
}

fn main() -> qhahn::Result<()> {
    let lat = Lattice::new(rat(2, 3), int(0))?;
    let tag = FamilyTag::QLaguerre;
    let f = table1_family(tag, &FamilyParams::documented(tag), &lat, 9)?;
    show(
        "q-Laguerre, q = 2/3",
        &characterization(&f.seq, &f.pearson)?,
    );

    let d = qfreud(&rat(1, 2), &rat(1, 3), &int(4), &rat(1, 2), 12)?;
    let rs = characterization(&d.seq, &d.pearson())?;
    show("q-Freud, q = 1/2", &rs);
    let thm34 = &rs[4];
    println!(
        "  xi_5,6 = {}, varsigma_5,4 = {}",
        thm34.coef("xi", 5, 6),
        thm34.coef("varsigma", 5, 4)
    );
    Ok(())
}
