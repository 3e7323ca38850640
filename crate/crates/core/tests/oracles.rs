mod common;

use common::{brute_force_tight_sets, dot, enumerate_grid_paths, enumerate_tours, tour_cost};
use conealign::cone::cone_contains;
use conealign::problems::{GridSpProblem, TspProblem};
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn grid_dp_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (h, w) in [(2, 3), (3, 3), (4, 4), (5, 5)] {
        let p = GridSpProblem::new(h, w).unwrap();
        let paths = enumerate_grid_paths(&p);
        for _ in 0..40 {
            let c: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-1.0..2.0)).collect();
            let best = paths.iter().map(|x| dot(&c, x)).fold(f64::INFINITY, f64::min);
            let w_star = p.solve(&c).unwrap();
            assert!(paths.contains(&w_star));
            assert!((dot(&c, &w_star) - best).abs() < 1e-12);
        }
    }
}

#[test]
fn held_karp_matches_tour_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 4..=8 {
        let p = TspProblem::new(n).unwrap();
        let tours = enumerate_tours(&p);
        for _ in 0..20 {
            let c: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(0.0..1.0)).collect();
            let best = tours.iter().map(|t| tour_cost(&p, &c, t)).fold(f64::INFINITY, f64::min);
            let w = p.solve(&c).unwrap();
            assert!((dot(&c, &w) - best).abs() < 1e-12, "n={n}");
            assert!(p.solution_to_tour(&w).is_ok());
        }
    }
}

#[test]
fn binding_segments_equal_brute_force_tight_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = TspProblem::new(8).unwrap();
    for _ in 0..20 {
        let mut order: Vec<usize> = (1..8).collect();
        order.shuffle(&mut rng);
        order.insert(0, 0);
        let mut fast = p.binding_subtour_sets(&order);
        let mut slow = brute_force_tight_sets(&p, &order);
        fast.sort();
        slow.sort();
        assert_eq!(fast, slow);
        assert_eq!(fast.len(), 48);
    }
}

fn sample_member<R: Rng>(rng: &mut R, gen: &conealign::cone::SubconeGenerators) -> Vec<f64> {
    let sparse = rng.random_bool(0.5);
    let lambda: Vec<f64> = (0..gen.len())
        .map(|_| if sparse && rng.random_bool(0.7) { 0.0 } else { rng.random_range(0.0..1.0) })
        .collect();
    gen.combine(&lambda)
}

#[test]
fn grid_cone_members_keep_the_solution_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let p = GridSpProblem::new(5, 5).unwrap();
    let paths = enumerate_grid_paths(&p);
    for _ in 0..10 {
        let w = paths.choose(&mut rng).unwrap();
        let gen = p.subcone(w).unwrap();
        for _ in 0..50 {
            let c = sample_member(&mut rng, &gen);
            let z = dot(&c, w);
            let best = p.solve(&c).unwrap();
            assert!(dot(&c, &best) >= z - 1e-8 * (1.0 + z.abs()));
            assert!(cone_contains(&gen, &c, 1e-6).unwrap().inside);
        }
    }
}

#[test]
fn tsp_cone_members_keep_the_tour_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = TspProblem::new(7).unwrap();
    let tours = enumerate_tours(&p);
    for _ in 0..5 {
        let t = tours.choose(&mut rng).unwrap();
        let w = p.tour_to_solution(t);
        let gen = p.subcone(&w).unwrap();
        for _ in 0..30 {
            let c = sample_member(&mut rng, &gen);
            let z = dot(&c, &w);
            let best = tours.iter().map(|u| tour_cost(&p, &c, u)).fold(f64::INFINITY, f64::min);
            assert!(best >= z - 1e-8 * (1.0 + z.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn membership_ignores_positive_scaling(seed in any::<u64>(), alpha in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = GridSpProblem::new(3, 3).unwrap();
        let c: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(0.1..2.0)).collect();
        let w = p.solve(&c).unwrap();
        let gen = p.subcone(&w).unwrap();
        let probe: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scaled: Vec<f64> = probe.iter().map(|v| alpha * v).collect();
        let a = cone_contains(&gen, &probe, 1e-6).unwrap();
        let b = cone_contains(&gen, &scaled, 1e-6).unwrap();
        prop_assert_eq!(a.inside, b.inside);
        prop_assert!(cone_contains(&gen, &c, 1e-6).unwrap().inside);
    }

    #[test]
    fn oracle_solution_is_scale_invariant(seed in any::<u64>(), alpha in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = TspProblem::new(6).unwrap();
        let c: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(0.0..1.0)).collect();
        let scaled: Vec<f64> = c.iter().map(|v| alpha * v).collect();
        let a = p.solve(&c).unwrap();
        let b = p.solve(&scaled).unwrap();
        prop_assert!((dot(&c, &a) - dot(&c, &b)).abs() < 1e-9);
    }
}
