use kittel_zipper::boundary_law::{self, BoundaryLaw, DEFAULT_TOL};
use kittel_zipper::gibbs;
use kittel_zipper::model::{Configuration, TransferParams};
use kittel_zipper::oracle;
use kittel_zipper::thermo;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn solutions_give_consistent_measures() {
    for (k, q, theta, eta) in [(2, 2, 0.5, 0.25), (3, 1, 0.5, 0.05), (2, 3, 2.0, 0.1)] {
        let w = TransferParams::new(k, q, theta, eta).unwrap();
        for z in boundary_law::solve_constant(&w, DEFAULT_TOL).unwrap().roots {
            let law = BoundaryLaw::constant(z).unwrap();
            for n in (2..=4).filter(|&n| kittel_zipper::model::admissible_count(k, q, n) <= 200_000) {
                let dp = gibbs::compatibility_error(&w, &law, n).unwrap();
                let ex = gibbs::compatibility_error_exhaustive(&w, &law, n).unwrap();
                assert!(dp.max_abs <= 1e-10 && ex.max_abs <= 1e-10, "z = {z}, n = {n}");
                assert!((dp.total_variation - ex.total_variation).abs() <= 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A constant law off the solution set breaks consistency.
    #[test]
    fn non_solutions_are_inconsistent(theta in 0.2f64..2.0, eta in 0.05f64..1.0, z in 0.01f64..20.0, n in 2usize..=3) {
        let w = TransferParams::new(2, 2, theta, eta).unwrap();
        let law = BoundaryLaw::constant(z).unwrap();
        let residual = boundary_law::max_residual(&law, &w, n).unwrap();
        prop_assume!(residual > 1e-3);
        let r = gibbs::compatibility_error_exhaustive(&w, &law, n).unwrap();
        prop_assert!(r.max_rel > 1e-9, "residual {} but max_rel {}", residual, r.max_rel);
    }
}

#[test]
fn count_dp_agrees_with_enumeration_on_perturbed_laws() {
    let w = TransferParams::new(2, 2, 0.5, 0.25).unwrap();
    let z = boundary_law::solve_constant(&w, DEFAULT_TOL).unwrap().roots[1];
    let law = oracle::perturb_law(&BoundaryLaw::constant(z).unwrap(), 2, 3, 1e-2).unwrap();
    let dp = gibbs::compatibility_error(&w, &law, 3).unwrap();
    let ex = gibbs::compatibility_error_exhaustive(&w, &law, 3).unwrap();
    assert!((dp.max_abs - ex.max_abs).abs() <= 1e-12);
    assert!((dp.total_variation - ex.total_variation).abs() <= 1e-12);
    assert!(dp.max_abs > 1e-6);
}

#[test]
fn partition_function_recursion_holds_for_level_families() {
    for k in [2, 3] {
        let w = TransferParams::new(k, 3, 2.0, 0.0).unwrap();
        for seed in [-5.0, 0.0, 5.0] {
            let law = boundary_law::j_infinite_level_family(&w, seed, 8).unwrap();
            for n in 2..=5 {
                assert!(gibbs::z_recursion_error(&w, &law, n).unwrap() <= 1e-10);
            }
        }
    }
}

#[test]
fn level_family_members_give_distinct_first_generation_measures() {
    for theta in [0.5, 2.0] {
        let w = TransferParams::new(2, 2, theta, 0.0).unwrap();
        let a = boundary_law::j_infinite_level_family(&w, -5.0, 6).unwrap();
        let b = boundary_law::j_infinite_level_family(&w, 5.0, 6).unwrap();
        assert!(oracle::mu1_total_variation(&w, &a, &b).unwrap() > 1e-3);
    }
}

#[test]
fn finite_volume_free_energy_approaches_b() {
    let w = TransferParams::new(2, 2, 0.5, 0.25).unwrap();
    for z in boundary_law::solve_constant(&w, DEFAULT_TOL).unwrap().roots {
        let law = BoundaryLaw::constant(z).unwrap();
        let f = thermo::free_energy_constant(&w, z);
        let mut previous = f64::INFINITY;
        for n in [3, 6, 9, 12] {
            let r = thermo::free_energy_finite_volume(&w, &law, n).unwrap();
            assert!(r.identity_error.abs() <= 1e-9);
            let gap = (r.reduced - f).abs();
            assert!(gap < previous);
            previous = gap;
        }
    }
}

#[test]
fn all_closed_frequency_matches_mu_n() {
    let w = TransferParams::new(2, 2, 0.2, 0.5).unwrap();
    let z = boundary_law::solve_constant(&w, DEFAULT_TOL).unwrap().roots[1];
    let law = BoundaryLaw::constant(z).unwrap();
    let n = 3;
    let fields = gibbs::fields_from_law(&law, 2, n).unwrap();
    let expected = gibbs::mu_n(&w, &fields, n, &Configuration::all_closed(2, 2, n)).unwrap();
    let sampler = gibbs::Sampler::new(&w, &law, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 100_000;
    let hits = (0..draws).filter(|_| sampler.sample(&mut rng).values().iter().all(|&s| s == 0)).count();
    let observed = hits as f64 / draws as f64;
    let se = (expected * (1.0 - expected) / draws as f64).sqrt();
    assert!(expected > 0.01 && expected < 0.99, "uninformative check: {expected}");
    assert!((observed - expected).abs() <= 4.0 * se, "{observed} vs {expected} (se {se})");
}

#[test]
fn samples_are_admissible_and_reproducible() {
    let w = TransferParams::new(3, 8, 0.5, 0.05).unwrap();
    let law = BoundaryLaw::constant(1.0).unwrap();
    let a = gibbs::sample(&w, &law, 4, 99).unwrap();
    assert_eq!(a, gibbs::sample(&w, &law, 4, 99).unwrap());
    assert!(kittel_zipper::model::is_admissible(&a));
}
