//! The verification battery with and without a perturbed law.

use kittel_zipper::{cli, oracle};

fn main() {
    let cases: Vec<_> = oracle::default_battery().into_iter().filter(|c| c.n <= 3).collect();
    let clean = oracle::verify_all(&cases, &oracle::VerifyOptions::default());
    print!("{}", cli::verify_table(&clean));
    let opts = oracle::VerifyOptions { perturb: Some(1e-3), exhaustive: false, ..Default::default() };
    let perturbed = oracle::verify_all(&cases, &opts);
    let flagged = perturbed.iter().filter(|r| !r.passed).count();
    println!("perturbed battery: {flagged}/{} cases flagged", perturbed.len());
    for (k, q) in [(2, 2.0), (4, 2.0)] {
        let v = oracle::eta_critical_verdict(k, q, 1e-8).expect("verdict");
        println!("eta_c at (k, theta) = ({k}, {q}): numeric {}, matching {:?}", v.numeric, v.matching);
    }
}
