//! Zipper-admissible configurations, their energies and counts.

use kittel_zipper::model::{self, Coupling, ModelParams};

fn main() -> kittel_zipper::Result<()> {
    let (k, q, n) = (2, 1, 2);
    let p = ModelParams::new(k, q, 1.0, Coupling::Finite(0.5), 1.0)?;
    for c in model::enumerate_admissible(k, q, n)? {
        let spins: Vec<String> = c.values().iter().map(ToString::to_string).collect();
        println!("{}  H = {}", spins.join(""), model::hamiltonian(&c, &p)?);
    }
    for (k, q, n) in [(1, 2, 6), (2, 2, 3), (3, 8, 2), (3, 8, 4)] {
        println!("|Omega_{n}| for k = {k}, q = {q}: {}", model::admissible_count(k, q, n));
    }
    Ok(())
}
