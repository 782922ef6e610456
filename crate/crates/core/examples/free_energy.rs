//! Free energy of boundary-law states against (1/|V_n|) ln Z_n.

use kittel_zipper::boundary_law::{self, BoundaryLaw, DEFAULT_TOL};
use kittel_zipper::model::TransferParams;
use kittel_zipper::thermo;

fn main() -> kittel_zipper::Result<()> {
    let w = TransferParams::new(3, 2, 0.5, 0.05)?;
    for z in boundary_law::solve_constant(&w, DEFAULT_TOL)?.roots {
        let law = BoundaryLaw::constant(z)?;
        println!("z = {z:.6}, f = b(z) = {:.12}", thermo::free_energy_constant(&w, z));
        for n in [2, 4, 6, 8, 10] {
            let r = thermo::free_energy_finite_volume(&w, &law, n)?;
            println!("  n = {n:>2}: ln Z/|V| = {:.12}, correction {:.6}, identity error {:.1e}", r.reduced, r.boundary_correction, r.identity_error);
        }
    }
    for theta in [0.5, 1.0, 2.0] {
        let r = thermo::zero_coupling_free_energies(2, 2, theta, 12)?;
        println!("eta = 0, theta = {theta}: boundary-law f = {:.6}, zero-field f_n = {:.6}, limit {:.6}", r.boundary_law, r.zero_field_finite, r.zero_field_limit);
    }
    Ok(())
}
