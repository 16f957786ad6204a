use laxpi::curvegroup::{inverse, star, sup_distance};
use laxpi::curves::{random_smooth_curve, reparametrize, reverse, CoeffFn};
use laxpi::lax::propagator_sweep;
use laxpi::transform::{transform_t, DEFAULT_T_GRID};
use laxpi::{AlgebraDescriptor, Curve, Sign};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn curves(seed: u64) -> Vec<Curve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [AlgebraDescriptor::so3(), AlgebraDescriptor::heisenberg(), AlgebraDescriptor::sl2()]
        .iter()
        .map(|alg| random_smooth_curve(alg, 0.0, 1.0, 256, 1.0, &mut rng).unwrap())
        .collect()
}

#[test]
fn splitting_law() {
    for psi in curves(11) {
        let c = psi.node(96);
        let whole = transform_t(&psi, DEFAULT_T_GRID).unwrap();
        let left = transform_t(&psi.restrict(0.0, c).unwrap(), DEFAULT_T_GRID).unwrap();
        let right = transform_t(&psi.restrict(c, 1.0).unwrap(), DEFAULT_T_GRID).unwrap();
        let composed = star(&right, &left).unwrap();
        let dev = sup_distance(&whole, &composed).unwrap();
        assert!(dev < 1e-7, "{} {dev:e}", psi.algebra().name());
    }
}

#[test]
fn inverse_law() {
    for psi in curves(12) {
        let t = transform_t(&psi, DEFAULT_T_GRID).unwrap();
        let lhs = inverse(&t).unwrap();
        let rhs = transform_t(&reverse(&psi), DEFAULT_T_GRID).unwrap();
        let dev = sup_distance(&lhs, &rhs).unwrap();
        assert!(dev < 1e-7, "{} {dev:e}", psi.algebra().name());
    }
}

#[test]
fn reparametrization_law() {
    // affine ρ: [2, 4] → [0, 1], and a monotone quadratic [0, 1] → [0, 1]
    let maps = [(CoeffFn::affine(-1.0, 0.5), 2.0, 4.0), (CoeffFn::polynomial(vec![0.0, 0.4, 0.6]), 0.0, 1.0)];
    for psi in curves(13) {
        let t = transform_t(&psi, DEFAULT_T_GRID).unwrap();
        for (rho, a, b) in &maps {
            let re = reparametrize(&psi, rho, *a, *b).unwrap();
            let dev = sup_distance(&t, &transform_t(&re, DEFAULT_T_GRID).unwrap()).unwrap();
            assert!(dev < 1e-7, "{} {dev:e}", psi.algebra().name());
        }
    }
}

#[test]
fn propagator_transport() {
    for psi in curves(14) {
        let t = transform_t(&psi, DEFAULT_T_GRID).unwrap();
        let along = propagator_sweep(&t, Sign::Plus, 1e-13).unwrap();
        for j in [16usize, 32, 64] {
            let tau = t.node(j);
            let direct = propagator_sweep(&psi.scaled(tau), Sign::Plus, 1e-13).unwrap();
            let dev = along.matrix(j).distance(direct.last());
            assert!(dev < 1e-8, "{} t={tau} {dev:e}", psi.algebra().name());
        }
    }
}
