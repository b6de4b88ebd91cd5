//! The four q-classical families: polynomials, table coefficients, the
//! boxed trio and the q-difference images.

use qhahn::families::{predicted_image, table1_family, FamilyParams, FamilyTag};
use qhahn::relations::{diff_sequence, verify_classical_trio};
use qhahn::{int, rat, Lattice};

fn main() -> qhahn::Result<()> {
    let lat = Lattice::new(rat(1, 2), int(0))?;
    for tag in FamilyTag::ALL {
        let params = FamilyParams::documented(tag);
        let f = table1_family(tag, &params, &lat, 8)?;
        println!("{tag}: phi = {}, sigma = {}", f.row.phi, f.row.sigma_poly);
        println!("  B_3 = {}", f.seq.poly(3));
        println!(
            "  n=3: alpha^ {} beta^ {} gamma^ {} | gamma~ {} delta {} epsilon {}",
            f.row.alpha_hat(3)?,
            f.row.beta_hat(3)?,
            f.row.gamma_hat(3)?,
            f.row.gamma_tilde(3)?,
            f.row.delta(3)?,
            f.row.epsilon(3)?
        );

        let trio = verify_classical_trio(&f.seq, &f.row)?;
        println!(
            "  trio over n in {:?}: {}",
            trio.range,
            if trio.pass { "holds" } else { "FAILS" }
        );
        for note in &trio.notes {
            println!("  note: {note}");
        }

        let d = diff_sequence(&f.seq)?;
        let same = (0..=6).all(|n| {
            predicted_image(&f.row, n)
                .map(|p| p == d[n])
                .unwrap_or(false)
        });
        println!("  monic q-differences match the identification: {same}");
    }
    Ok(())
}
