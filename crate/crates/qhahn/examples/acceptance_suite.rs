//! Runs the full acceptance matrix and prints one line per criterion.

fn main() -> qhahn::Result<()> {
    for c in qhahn::suite::run_all()? {
        println!("{}", c.line());
        for d in &c.details {
            println!("    {d}");
        }
    }
    Ok(())
}
