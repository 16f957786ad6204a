use laxpi::curvegroup::{inverse, star};
use laxpi::curves::{random_smooth_curve, reverse, CoeffFn, Term};
use laxpi::lax::propagator_sweep;
use laxpi::prodint::ode_evolve;
use laxpi::{AlgebraDescriptor, Curve, Sign};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type A = AlgebraDescriptor<f64>;

fn pair(seed: u64, alg: &laxpi::Algebra64, bound: f64) -> (Curve, Curve) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = random_smooth_curve(alg, 0.0, 1.0, 128, bound, &mut rng).unwrap();
    let psi = random_smooth_curve(alg, 0.0, 1.0, 128, bound, &mut rng).unwrap();
    (phi, psi)
}

#[test]
fn propagator_of_a_star_product_factors() {
    for alg in [A::so3(), A::sl2(), A::upper_triangular(4)] {
        let (phi, psi) = pair(3, &alg, 1.0);
        let joint = propagator_sweep(&star(&phi, &psi).unwrap(), Sign::Plus, 1e-13).unwrap();
        let a = propagator_sweep(&phi, Sign::Plus, 1e-13).unwrap();
        let b = propagator_sweep(&psi, Sign::Plus, 1e-13).unwrap();
        for j in (0..=128).step_by(16) {
            let dev = joint.matrix(j).distance(&(a.matrix(j) * b.matrix(j)));
            assert!(dev < 1e-9, "{} j={j} {dev:e}", alg.name());
        }
    }
}

#[test]
fn propagator_of_the_group_inverse_is_the_minus_propagator() {
    for alg in [A::so3(), A::heisenberg()] {
        let (psi, _) = pair(4, &alg, 1.0);
        let inv = propagator_sweep(&inverse(&psi).unwrap(), Sign::Plus, 1e-13).unwrap();
        let minus = propagator_sweep(&psi, Sign::Minus, 1e-13).unwrap();
        for j in 0..=128 {
            assert!(inv.matrix(j).distance(minus.matrix(j)) < 1e-9);
        }
    }
}

#[test]
fn minus_propagator_is_the_adjoint_of_the_inverse_product_integral() {
    let so3 = A::so3();
    let (psi, _) = pair(5, &so3, 1.0);
    let minus = propagator_sweep(&psi, Sign::Minus, 1e-13).unwrap();
    let traj = ode_evolve(&psi, 1024).unwrap();
    for j in [32usize, 64, 128] {
        let g = &traj.points[8 * j];
        assert!(minus.matrix(j).distance(&g.inverse().adjoint()) < 1e-10);
    }
}

#[test]
fn reversal_swaps_the_end_propagators() {
    // Λ⁺ of φ̌ at b undoes Λ⁺ of φ at b
    let sl2 = A::sl2();
    let (phi, _) = pair(6, &sl2, 0.8);
    let fwd = propagator_sweep(&phi, Sign::Plus, 1e-13).unwrap();
    let back = propagator_sweep(&reverse(&phi), Sign::Plus, 1e-13).unwrap();
    let id = laxpi::Matrix::identity(3);
    assert!((back.last() * fwd.last()).distance(&id) < 1e-10);
}

#[test]
fn f32_instantiation_runs_end_to_end() {
    let so3 = AlgebraDescriptor::<f32>::so3();
    let phi: laxpi::Curve32 = Curve::from_terms(
        so3,
        0.0,
        1.0,
        64,
        vec![Term { basis: 0, coeff: CoeffFn::<f32> { sin: vec![(0.2, 1.0)], ..Default::default() } }],
    )
    .unwrap();
    let rk4 = ode_evolve(&phi, 64).unwrap();
    let log = laxpi::bcdh_log(&phi, 1e-5).unwrap();
    let dev = laxpi::exp_matrix(&log.last()).distance(rk4.last());
    assert!(dev < 1e-5, "{dev:e}");
    let sweep = propagator_sweep(&phi, Sign::Plus, 1e-5).unwrap();
    assert!(sweep.depth() > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn so3_propagators_are_rotations(seed in any::<u64>(), bound in 0.1f64..2.0) {
        let so3 = A::so3();
        let (psi, _) = pair(seed, &so3, bound);
        let sweep = propagator_sweep(&psi, Sign::Plus, 1e-13).unwrap();
        // for so(3) the adjoint image is SO(3): orthogonal with unit determinant
        let m = sweep.last();
        let id = laxpi::Matrix::identity(3);
        prop_assert!((&m.transpose() * m).distance(&id) < 1e-10);
        prop_assert!((m.determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn star_product_is_associative(seed in any::<u64>()) {
        let heis = A::heisenberg();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || random_smooth_curve(&heis, -1.0, 1.0, 64, 1.5, &mut rng).unwrap();
        let (a, b, c) = (draw(), draw(), draw());
        let left = star(&star(&a, &b).unwrap(), &c).unwrap();
        let right = star(&a, &star(&b, &c).unwrap()).unwrap();
        prop_assert!(laxpi::curvegroup::sup_distance(&left, &right).unwrap() < 1e-10);
    }

    #[test]
    fn reversal_is_an_involution(seed in any::<u64>()) {
        let sl2 = A::sl2();
        let (phi, _) = pair(seed, &sl2, 1.0);
        let twice = reverse(&reverse(&phi));
        prop_assert_eq!(twice.samples(), phi.samples());
    }
}
