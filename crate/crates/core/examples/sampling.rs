//! Exact sampling from μ_n and a Monte-Carlo check against the exact marginal.

use kittel_zipper::boundary_law::{self, BoundaryLaw, DEFAULT_TOL};
use kittel_zipper::gibbs;
use kittel_zipper::model::TransferParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kittel_zipper::Result<()> {
    let w = TransferParams::new(2, 3, 0.5, 0.25)?;
    let z = boundary_law::solve_constant(&w, DEFAULT_TOL)?.roots[1];
    let law = BoundaryLaw::constant(z)?;
    let n = 4;
    let sampler = gibbs::Sampler::new(&w, &law, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws = 50_000;
    let mut open = 0usize;
    for _ in 0..draws {
        let c = sampler.sample(&mut rng);
        open += c.open_counts()[1] as usize;
    }
    let freq = open as f64 / (draws * w.k) as f64;
    let exact = gibbs::level_one_open_probability(&w, &law, n)?;
    println!("P(depth-1 vertex open): sampled {freq:.5}, exact {exact:.5}, 1/(θz+1) = {:.5}", 1.0 / (w.theta * z + 1.0));
    println!("one draw (level order): {:?}", gibbs::sample(&w, &law, 2, 1)?.values());
    Ok(())
}
