//! Group structure on curves: `φ⋆ψ = φ + Λ⁺φ[·]ψ`, `ψ⁻¹ = −Λ⁻ψ[·]ψ`, and the
//! curve bracket. Results are sampled curves on the shared grid.

use crate::curves::{Curve, Sign};
use crate::error::Result;
use crate::lax::{default_tol, propagator_sweep};
use crate::scalar::Real;

/// `(φ⋆ψ)(t_j) = φ(t_j) + Λ⁺φ[t_j](ψ(t_j))`.
pub fn star<T: Real>(phi: &Curve<T>, psi: &Curve<T>) -> Result<Curve<T>> {
    phi.ensure_same_grid(psi)?;
    let sweep = propagator_sweep(phi, Sign::Plus, default_tol())?;
    let values = (0..=phi.grid_n())
        .flat_map(|j| {
            let moved = sweep.matrix(j).mul_vec(psi.sample(j));
            phi.sample(j).iter().zip(moved).map(|(&x, y)| x + y).collect::<Vec<_>>()
        })
        .collect();
    Curve::from_samples(phi.algebra().clone(), phi.a(), phi.b(), values)
}

/// `ψ⁻¹(t_j) = −Λ⁻ψ[t_j](ψ(t_j))`.
pub fn inverse<T: Real>(psi: &Curve<T>) -> Result<Curve<T>> {
    let sweep = propagator_sweep(psi, Sign::Minus, default_tol())?;
    let values = (0..=psi.grid_n())
        .flat_map(|j| sweep.matrix(j).mul_vec(psi.sample(j)).into_iter().map(|x| -x))
        .collect();
    Curve::from_samples(psi.algebra().clone(), psi.a(), psi.b(), values)
}

/// `[∫ₐᵗφ, ψ(t)] + [φ(t), ∫ₐᵗψ]` at every node.
pub fn curve_bracket<T: Real>(phi: &Curve<T>, psi: &Curve<T>) -> Result<Curve<T>> {
    phi.ensure_same_grid(psi)?;
    let alg = phi.algebra();
    let d = alg.dim();
    let cphi = phi.cumulative_integral();
    let cpsi = psi.cumulative_integral();
    let mut values = vec![T::zero(); (phi.grid_n() + 1) * d];
    let mut tmp = vec![T::zero(); d];
    for j in 0..=phi.grid_n() {
        let r = j * d..(j + 1) * d;
        let out = &mut values[r.clone()];
        alg.bracket_into(&cphi[r.clone()], psi.sample(j), out);
        alg.bracket_into(phi.sample(j), &cpsi[r], &mut tmp);
        out.iter_mut().zip(&tmp).for_each(|(o, &x)| *o = *o + x);
    }
    Curve::from_samples(alg.clone(), phi.a(), phi.b(), values)
}

/// `max_j ‖φ(t_j) − ψ(t_j)‖` over a shared grid.
pub fn sup_distance<T: Real>(phi: &Curve<T>, psi: &Curve<T>) -> Result<T> {
    phi.ensure_same_grid(psi)?;
    let alg = phi.algebra();
    let mut diff = vec![T::zero(); alg.dim()];
    let mut worst = T::zero();
    for j in 0..=phi.grid_n() {
        for (k, o) in diff.iter_mut().enumerate() {
            *o = phi.sample(j)[k] - psi.sample(j)[k];
        }
        worst = worst.max(alg.norm_coords(&diff));
    }
    Ok(worst)
}
