//! Consistency of μ_{n-1} and μ_n for solutions and for a perturbed law.

use kittel_zipper::boundary_law::{self, BoundaryLaw, DEFAULT_TOL};
use kittel_zipper::gibbs;
use kittel_zipper::model::TransferParams;

fn main() -> kittel_zipper::Result<()> {
    let w = TransferParams::new(2, 2, 0.5, 0.25)?;
    let s = boundary_law::solve_constant(&w, DEFAULT_TOL)?;
    for &z in &s.roots {
        let law = BoundaryLaw::constant(z)?;
        for n in 2..=5 {
            let r = gibbs::compatibility_error(&w, &law, n)?;
            println!("z = {z:.6} n = {n}: max |Δ| = {:.2e} ({}), Z recursion {:.2e}", r.max_abs, r.method, gibbs::z_recursion_error(&w, &law, n)?);
        }
    }
    let bad = BoundaryLaw::constant(s.roots[1])?.scale_generation(2, 4, 1.001)?;
    let r = gibbs::compatibility_error(&w, &bad, 4)?;
    println!("perturbed law: max |Δ| = {:.2e}, residual {:.2e}", r.max_abs, boundary_law::max_residual(&bad, &w, 4)?);
    Ok(())
}
