//! Constant boundary laws z = (θz + η)^k and their classification.

use kittel_zipper::boundary_law::{self, DEFAULT_TOL};
use kittel_zipper::model::TransferParams;
use kittel_zipper::thermo;

fn main() -> kittel_zipper::Result<()> {
    let (k, theta) = (4, 2.0);
    let eta_c = boundary_law::eta_critical(k, theta)?;
    println!("k = {k}, theta = {theta}: eta_c = {eta_c} (numeric {})", boundary_law::eta_critical_numeric(k, theta)?);
    for eta in [0.2, eta_c, 0.5] {
        let w = TransferParams::new(k, 2, theta, eta)?;
        let s = boundary_law::solve_constant(&w, DEFAULT_TOL)?;
        println!("eta = {eta:.6}: {:?}, roots {:?}", s.regime, s.roots);
    }
    let (theta, eta) = (0.5, 0.25);
    let (zm, zp) = boundary_law::k2_explicit_roots(theta, eta).expect("4θη < 1");
    for z in [zm, zp] {
        println!("k = 2 root {z}: b = {}, -ln(θ⁴z)/4 = {}", thermo::b_of(z, theta, eta), thermo::free_energy_k2(theta, z));
    }
    Ok(())
}
