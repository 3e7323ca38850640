mod common;

use common::{dot, finite_diff, norm, random_generators, random_vec, rel_err};
use conealign::losses::{cave_loss, mse_loss, spo_plus_grad, CaveKind, CaveVariant};
use conealign::problems::GridSpProblem;
use conealign::projection::{project_exact, project_heuristic, project_inner, QpSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn neg_cos(a: &[f64], b: &[f64]) -> f64 {
    -dot(a, b) / (norm(a) * norm(b))
}

#[test]
fn cave_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for kind in [CaveKind::Exact, CaveKind::Plus, CaveKind::Hybrid] {
        let variant = CaveVariant::new(kind);
        let mut checked = 0;
        while checked < 100 {
            let m = rng.random_range(2..12);
            let d = rng.random_range(2..10);
            let gen = random_generators(&mut rng, m, d);
            let c_hat = random_vec(&mut rng, d, 1.0);
            let loss_seed: u64 = rng.random();

            // Reproduce the projection the loss will use, then hold it fixed.
            let mut coin = ChaCha8Rng::seed_from_u64(loss_seed);
            let p = match kind {
                CaveKind::Exact => project_exact(&gen, &c_hat, &QpSettings::exact()).unwrap().p,
                CaveKind::Plus => project_inner(&gen, &c_hat, &QpSettings::inner(3)).unwrap().p,
                CaveKind::Hybrid => {
                    if coin.random::<f64>() < variant.beta {
                        project_inner(&gen, &c_hat, &QpSettings::inner(3)).unwrap().p
                    } else {
                        project_heuristic(&gen, &c_hat, variant.gamma).unwrap().p
                    }
                }
            };
            if norm(&p) < 1e-6 {
                continue;
            }
            let out = cave_loss(&c_hat, &gen, &variant, &mut ChaCha8Rng::seed_from_u64(loss_seed)).unwrap();
            assert!((out.value - neg_cos(&c_hat, &p)).abs() < 1e-12);
            let fd = finite_diff(|x| neg_cos(x, &p), &c_hat, 1e-6);
            if 1.0 + out.value < 1e-9 {
                // ĉ already aligned with p: the gradient vanishes.
                let diff: Vec<f64> = out.grad_c_hat.iter().zip(&fd).map(|(a, b)| a - b).collect();
                assert!(norm(&diff) < 1e-8, "{} {} {}", norm(&out.grad_c_hat), norm(&fd), norm(&diff));
            } else {
                let err = rel_err(&out.grad_c_hat, &fd);
                assert!(err < 1e-5, "{kind:?}: relative error {err}");
            }
            checked += 1;
        }
    }
}

#[test]
fn mse_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let d = rng.random_range(1..50);
        let c = random_vec(&mut rng, d, 3.0);
        let c_hat = random_vec(&mut rng, d, 3.0);
        let out = mse_loss(&c_hat, &c).unwrap();
        let fd = finite_diff(|x| mse_loss(x, &c).unwrap().value, &c_hat, 1e-5);
        assert!(rel_err(&out.grad_c_hat, &fd) < 1e-5);
    }
}

#[test]
fn spo_plus_gradient_matches_finite_differences_away_from_kinks() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let sp = GridSpProblem::new(3, 3).unwrap();
    for _ in 0..100 {
        let c: Vec<f64> = (0..sp.dim()).map(|_| rng.random_range(0.5..2.0)).collect();
        let w = sp.solve(&c).unwrap();
        let c_hat: Vec<f64> = (0..sp.dim()).map(|_| rng.random_range(-1.0..2.0)).collect();
        let out = spo_plus_grad(&c_hat, &c, &w, &sp).unwrap();
        let fd = finite_diff(|x| spo_plus_grad(x, &c, &w, &sp).unwrap().value, &c_hat, 1e-7);
        for (a, b) in out.grad_c_hat.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(out.value >= -1e-12);
    }
}

fn orthant(d: usize) -> conealign::cone::SubconeGenerators {
    use conealign::cone::{extract_generators, ConstraintSystem};
    extract_generators(&ConstraintSystem::new(d), &vec![0.0; d], 1e-6).unwrap()
}

#[test]
fn apex_collapse_on_single_ray() {
    use conealign::cone::{Provenance, SubconeGenerators};
    let gen = SubconeGenerators::new(
        nalgebra::DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        vec![Provenance::LowerBound(0)],
    )
    .unwrap();
    let out = cave_loss(&[0.0, 1.0], &gen, &CaveVariant::new(CaveKind::Exact), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(out.value, 0.0);
    assert_eq!(out.grad_c_hat, vec![0.0, 0.0]);
}

#[test]
fn exact_value_is_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let v = CaveVariant::new(CaveKind::Exact);
    for _ in 0..50 {
        let gen = random_generators(&mut rng, 6, 5);
        let c_hat = random_vec(&mut rng, 5, 1.0);
        let base = cave_loss(&c_hat, &gen, &v, &mut rng).unwrap().value;
        for alpha in [0.1, 7.0] {
            let scaled: Vec<f64> = c_hat.iter().map(|x| alpha * x).collect();
            let val = cave_loss(&scaled, &gen, &v, &mut rng).unwrap().value;
            assert!((val - base).abs() < 1e-7);
        }
    }
}

#[test]
fn exact_gradient_fades_near_a_facet() {
    // ĉ = (cos θ, −sin θ) rotates toward the facet {c₂ = 0} of the orthant.
    let gen = orthant(2);
    let v = CaveVariant::new(CaveKind::Exact);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let norms: Vec<f64> = [45.0f64, 30.0, 20.0, 10.0, 5.0, 1.0]
        .iter()
        .map(|deg| {
            let t = deg.to_radians();
            norm(&cave_loss(&[t.cos(), -t.sin()], &gen, &v, &mut rng).unwrap().grad_c_hat)
        })
        .collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    assert!((norms[0] - 45f64.to_radians().sin()).abs() < 1e-7);
}

#[test]
fn pfyl_monte_carlo_direction() {
    use conealign::losses::pfyl_grad;
    use conealign::problems::Oracle;

    struct UnitBox;
    impl Oracle for UnitBox {
        fn dim(&self) -> usize {
            1
        }
        fn solve(&self, c: &[f64]) -> conealign::Result<Vec<f64>> {
            Ok(vec![if c[0] < 0.0 { 1.0 } else { 0.0 }])
        }
        fn subcone(&self, w: &[f64]) -> conealign::Result<conealign::cone::SubconeGenerators> {
            conealign::cone::extract_generators(&conealign::cone::ConstraintSystem::new(1), w, 1e-6)
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let draws = 100_000;
    let mean = (0..draws)
        .map(|_| pfyl_grad(&[-5.0], &[0.0], &UnitBox, 0.1, 1, &mut rng).unwrap().grad_c_hat[0])
        .sum::<f64>()
        / draws as f64;
    assert!((mean + 1.0).abs() < 1e-9);
}

#[test]
fn counters_follow_table_of_solver_calls() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let gen = random_generators(&mut rng, 6, 4);
    let n = 2000;
    let mut partial = 0;
    for _ in 0..n {
        let c_hat = random_vec(&mut rng, 4, 1.0);
        let out = cave_loss(&c_hat, &gen, &CaveVariant::new(CaveKind::Hybrid), &mut rng).unwrap();
        assert_eq!((out.solver_calls.qp_full, out.solver_calls.blp), (0, 0));
        partial += out.solver_calls.qp_partial;
    }
    let sd = (n as f64 * 0.3 * 0.7).sqrt();
    assert!((partial as f64 - 0.3 * n as f64).abs() <= 5.0 * sd);
}
