use std::collections::BTreeMap;

use kittel_zipper::boundary_law;
use kittel_zipper::gibbs::{self, BoundaryFields};
use kittel_zipper::model::{self, Configuration, Coupling, ModelParams, TransferParams};
use kittel_zipper::oracle;
use kittel_zipper::thermo;
use kittel_zipper::tree::{self, VertexId};
use proptest::prelude::*;

/// (k, q, n) with |Ω_n| small enough to enumerate quickly.
fn small_shape() -> impl Strategy<Value = (usize, u32, usize)> {
    (1usize..=3, 1u32..=3, 1usize..=3).prop_filter("small", |&(k, q, n)| model::admissible_count(k, q, n) <= 5_000)
}

fn per_vertex_fields(k: usize, n: usize, raw: &[(f64, f64)]) -> BoundaryFields {
    let values: BTreeMap<VertexId, (f64, f64)> = tree::generation(k, n).zip(raw.iter().cycle().copied()).collect();
    BoundaryFields::per_vertex(k, n, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vertex_round_trip(k in 1usize..=4, index in 0u64..5000) {
        let x = VertexId::from_level_index(k, index);
        prop_assert_eq!(x.level_index(k), index);
        prop_assert!(x.is_valid_for(k));
        if !x.is_root() {
            prop_assert!(x.parent().unwrap().children(k).unwrap().contains(&x));
        }
    }

    #[test]
    fn configuration_map_round_trip((k, q, n) in small_shape(), pick in any::<prop::sample::Index>()) {
        let all: Vec<Configuration> = model::enumerate_admissible(k, q, n).unwrap().collect();
        let c = &all[pick.index(all.len())];
        let back = Configuration::from_map(k, q, n, &c.to_map()).unwrap();
        prop_assert_eq!(&back, c);
        prop_assert!(model::is_admissible(&c.restrict(n - 1)));
    }

    #[test]
    fn dp_matches_enumeration(
        (k, q, n) in small_shape(),
        theta in 0.05f64..5.0,
        eta in 0.0f64..2.0,
        raw in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..8),
    ) {
        let w = TransferParams::new(k, q, theta, eta).unwrap();
        for fields in [BoundaryFields::zero(n), BoundaryFields::uniform(n, raw[0].0, raw[0].1), per_vertex_fields(k, n, &raw)] {
            let dp = gibbs::ln_partition_function(&w, &fields, n).unwrap();
            let ex = oracle::ln_z_exhaustive(&w, &fields, n).unwrap();
            prop_assert!((dp - ex).abs() <= 1e-12 * ex.abs().max(1.0), "{} vs {}", dp, ex);
        }
    }

    #[test]
    fn mu_n_is_normalized((k, q, n) in small_shape(), theta in 0.05f64..5.0, eta in 0.0f64..2.0, h in (-2.0f64..2.0, -2.0f64..2.0)) {
        let w = TransferParams::new(k, q, theta, eta).unwrap();
        let fields = BoundaryFields::uniform(n, h.0, h.1);
        let total: f64 = model::enumerate_admissible(k, q, n).unwrap().map(|c| gibbs::mu_n(&w, &fields, n, &c).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn open_state_relabeling_preserves_weight((k, q, n) in small_shape(), shift in 1u32..3, theta in 0.1f64..3.0, eta in 0.0f64..1.5) {
        let w = TransferParams::new(k, q, theta, eta).unwrap();
        for c in model::enumerate_admissible(k, q, n).unwrap() {
            let relabeled: Vec<u32> = c.values().iter().map(|&s| if s == 0 { 0 } else { (s - 1 + shift) % q + 1 }).collect();
            let d = Configuration::new(k, q, n, relabeled).unwrap();
            prop_assert_eq!(model::log_weight(&c, &w).unwrap(), model::log_weight(&d, &w).unwrap());
        }
    }

    #[test]
    fn energy_is_epsilon_per_open_vertex_plus_walls(
        (k, q, n) in small_shape(),
        epsilon in -3.0f64..3.0,
        j in -2.0f64..2.0,
        beta in 0.1f64..3.0,
    ) {
        let p = ModelParams::new(k, q, epsilon, Coupling::Finite(j), beta).unwrap();
        let free = ModelParams::new(k, q, epsilon, Coupling::Finite(0.0), beta).unwrap();
        for c in model::enumerate_admissible(k, q, n).unwrap() {
            let open: u64 = c.open_counts().iter().sum();
            let h = model::hamiltonian(&c, &p).unwrap();
            prop_assert!((model::hamiltonian(&c, &free).unwrap() - epsilon * open as f64).abs() <= 1e-12);
            prop_assert!((model::log_weight(&c, &p.transfer()).unwrap() + beta * h).abs() <= 1e-10 * (1.0 + (beta * h).abs()));
        }
    }

    #[test]
    fn n_tigm_non_increasing_in_eta(k in 2usize..=5, theta in 0.05f64..10.0, mut etas in prop::collection::vec(1e-4f64..3.0, 2..20)) {
        etas.sort_by(f64::total_cmp);
        let counts: Vec<usize> = etas.iter().map(|&e| thermo::n_tigm(k, theta, e).unwrap()).collect();
        prop_assert!(counts.windows(2).all(|p| p[0] >= p[1]), "{:?}", counts);
    }

    #[test]
    fn constant_roots_solve_the_equation(k in 2usize..=5, theta in 0.05f64..10.0, frac in 0.01f64..0.99) {
        let eta = frac * boundary_law::eta_critical(k, theta).unwrap();
        let w = TransferParams::new(k, 2, theta, eta).unwrap();
        let s = boundary_law::solve_constant(&w, boundary_law::DEFAULT_TOL).unwrap();
        prop_assert_eq!(s.count, 2);
        for z in s.roots {
            prop_assert!(((theta * z + eta).powi(k as i32) - z).abs() <= 1e-10 * z.max(1e-300).max(1.0));
        }
    }

    #[test]
    fn level_exponents_follow_the_closed_form(k in 2usize..=4, seed in -10.0f64..10.0) {
        let alphas = boundary_law::level_exponents(k, seed, 15);
        for (i, a) in alphas.iter().enumerate() {
            let closed = boundary_law::level_exponent_closed_form(k, seed, i + 1);
            prop_assert!((a - closed).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
