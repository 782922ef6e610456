//! Hard-constraint (J = +∞) boundary laws: the level family and the 1D family.

use kittel_zipper::boundary_law;
use kittel_zipper::model::TransferParams;
use kittel_zipper::thermo;

fn main() -> kittel_zipper::Result<()> {
    let w = TransferParams::new(2, 2, 0.5, 0.0)?;
    println!("fixed point z* = {}", boundary_law::j_infinite_fixed_point(2, 0.5)?);
    for seed in [-5.0, 0.0, 5.0] {
        let exps = boundary_law::level_exponents(2, seed, 8);
        let law = boundary_law::j_infinite_level_family(&w, seed, 12)?;
        println!(
            "seed {seed:>4}: exponents {:?}, max residual {:.1e}, b profile {:?}",
            exps.iter().map(|a| (a * 1e4).round() / 1e4).collect::<Vec<_>>(),
            boundary_law::max_residual(&law, &w, 10)?,
            thermo::b_profile(&w, &law, 3)?
        );
    }
    let law = boundary_law::j_infinite_1d_family(0.8, 1.0, 6)?;
    let w1 = TransferParams::new(1, 2, 0.8, 0.0)?;
    println!("k = 1 family residual {:.1e}", boundary_law::max_residual(&law, &w1, 5)?);
    Ok(())
}
