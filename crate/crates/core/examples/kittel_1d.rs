//! Kittel's chain against the k = 1 tree in both orientations.

use kittel_zipper::{oracle, thermo};

fn main() -> kittel_zipper::Result<()> {
    let (q, beta, epsilon) = (2, 1.0, 4f64.ln());
    for n in [2, 3, 5, 10, 20] {
        let r = oracle::align_1d(q, beta, epsilon, n)?;
        println!(
            "N = {n:>2}: Kittel {:.10}, literal tree {:.10} ({}), reversed tree {:.10} ({})",
            r.kittel,
            r.tree_literal,
            if r.literal_matches { "match" } else { "differs" },
            r.tree_reversed,
            if r.reversed_matches { "match" } else { "differs" }
        );
    }
    for (q, eps) in [(2, 1.0), (3, 0.5)] {
        let limit = thermo::kittel_1d_free_energy_limit(q, 1.0, eps);
        for n in [10, 100, 1000] {
            let f = thermo::kittel_1d_free_energy(q, 1.0, eps, n)?;
            println!("q = {q}, βε = {eps}: N = {n:>4}, ln Z/N = {f:.6}, limit {limit:.6}");
        }
    }
    Ok(())
}
