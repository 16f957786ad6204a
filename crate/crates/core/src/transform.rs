//! The integral transformation `𝔗(φ)(t) = ∫ₐᵇ Λ⁺_{t·φ}[b]·Λ⁻_{t·φ}[s](φ(s)) ds`,
//! a curve on `[0, 1]` with `∫ₐᵇ t·φ = ∫₀ᵗ 𝔗(φ)`.
//!
//! On nilpotent algebras the output is a polynomial in `t` of degree at most
//! `q − 2` whose coefficients come straight from the Picard operator levels, so
//! iterating the transform composes polynomials without sampling error in `t`.

use crate::algebra::{AlgebraRef, Element};
use crate::curves::{operator_levels, Curve, Sign};
use crate::error::{Error, Result};
use crate::lax::{default_tol, propagator_sweep};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Default number of `t` cells for the output curve.
pub const DEFAULT_T_GRID: usize = 64;

/// Largest `t`-variation accepted by [`nilpotent_collapse`].
pub const CONSTANCY_TOL: f64 = 1e-6;

/// `t ↦ Σ_p tᵖ·A_p` on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct PolyCurve<T: Real = f64> {
    pub algebra: AlgebraRef<T>,
    pub coeffs: Vec<Element<T>>,
}

impl<T: Real> PolyCurve<T> {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn value(&self, t: T) -> Element<T> {
        let mut acc = vec![T::zero(); self.algebra.dim()];
        for a in self.coeffs.iter().rev() {
            acc.iter_mut().zip(a.coords()).for_each(|(o, &c)| *o = *o * t + c);
        }
        Element::from_raw(self.algebra.clone(), acc)
    }

    /// The polynomial as a closed-form curve on `[0, 1]`.
    pub fn to_curve(&self, grid_n: usize) -> Result<Curve<T>> {
        if grid_n < 2 || !grid_n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("grid_n = {grid_n} must be even and ≥ 2")));
        }
        let coeffs = self.coeffs.iter().map(|a| a.coords().to_vec()).collect();
        Ok(Curve::from_poly_coeffs(self.algebra.clone(), T::zero(), T::one(), grid_n, coeffs))
    }
}

/// `A_p = Σ_{ℓ+m=p} V_ℓ(b)·∫ₐᵇ U_m(s)φ(s) ds` for `p ≤ q − 2`, where `V`, `U`
/// are the plus and minus operator levels of `φ`.
pub fn transform_poly<T: Real>(phi: &Curve<T>) -> Result<PolyCurve<T>> {
    let alg = phi.algebra();
    let q = alg.nil_order().ok_or_else(|| Error::NotNilpotent(alg.name().to_string()))?;
    let depth = q - 2;
    let d = alg.dim();
    let n = phi.grid_n();
    let rule = phi.cumulative_rule();

    let mut v_end: Vec<Matrix<T>> = Vec::with_capacity(depth + 1);
    operator_levels(phi, Sign::Plus, depth, |_, mats| v_end.push(mats[n].clone()));

    let mut w: Vec<Vec<T>> = Vec::with_capacity(depth + 1);
    operator_levels(phi, Sign::Minus, depth, |_, mats| {
        let integrand: Vec<T> = (0..=n).flat_map(|j| mats[j].mul_vec(phi.sample(j))).collect();
        w.push(rule.total(&integrand, d));
    });

    let coeffs = (0..=depth)
        .map(|p| {
            let mut acc = vec![T::zero(); d];
            for l in 0..=p {
                let term = v_end[l].mul_vec(&w[p - l]);
                acc.iter_mut().zip(term).for_each(|(o, x)| *o = *o + x);
            }
            Element::from_raw(alg.clone(), acc)
        })
        .collect();
    Ok(PolyCurve { algebra: alg.clone(), coeffs })
}

/// `𝔗(φ)` on `[0, 1]` with `m` output cells: the exact polynomial on nilpotent
/// algebras, otherwise one pair of propagator sweeps per output node.
pub fn transform_t<T: Real>(phi: &Curve<T>, m: usize) -> Result<Curve<T>> {
    if phi.algebra().is_nilpotent() {
        return transform_poly(phi)?.to_curve(m);
    }
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("m = {m} must be even and ≥ 2")));
    }
    let alg = phi.algebra();
    let d = alg.dim();
    let n = phi.grid_n();
    let rule = phi.cumulative_rule();
    let tol = default_tol();
    let mut values = Vec::with_capacity((m + 1) * d);
    for i in 0..=m {
        let t = crate::curves::node_time(T::zero(), T::one(), m, i);
        if t == T::zero() {
            values.extend(rule.total(phi.samples(), d));
            continue;
        }
        let scaled = phi.scaled(t);
        let plus = propagator_sweep(&scaled, Sign::Plus, tol)?;
        let minus = propagator_sweep(&scaled, Sign::Minus, tol)?;
        let integrand: Vec<T> = (0..=n).flat_map(|j| minus.matrix(j).mul_vec(phi.sample(j))).collect();
        values.extend(plus.last().mul_vec(&rule.total(&integrand, d)));
    }
    Curve::from_samples(alg.clone(), T::zero(), T::one(), values)
}

/// `𝔗ᵏ(φ)`.
pub fn iterate_t<T: Real>(phi: &Curve<T>, k: usize, m: usize) -> Result<Curve<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    let mut current = transform_t(phi, m)?;
    for _ in 1..k {
        current = transform_t(&current, m)?;
    }
    Ok(current)
}

/// `max_j ‖c(t_j) − c(t_0)‖`.
pub fn constancy_deviation<T: Real>(c: &Curve<T>) -> T {
    let alg = c.algebra();
    let first = c.sample(0);
    (0..=c.grid_n())
        .map(|j| {
            let diff: Vec<T> = c.sample(j).iter().zip(first).map(|(&x, &y)| x - y).collect();
            alg.norm_coords(&diff)
        })
        .fold(T::zero(), T::max)
}

/// The constant value of `𝔗^{q−1}(φ|[a, τ])`, i.e. the exponential coordinates
/// of `∫ₐ^τ φ` on a nilpotent algebra of nil order `q`.
pub fn nilpotent_collapse<T: Real>(phi: &Curve<T>, tau: T) -> Result<Element<T>> {
    let alg = phi.algebra();
    let q = alg.nil_order().ok_or_else(|| Error::NotNilpotent(alg.name().to_string()))?;
    phi.check_time(tau)?;
    if tau <= phi.a() {
        return Err(Error::InvalidArgument("τ must lie in (a, b]".into()));
    }
    let part = match phi.node_index(tau) {
        Some(j) if j == phi.grid_n() => phi.clone(),
        Some(j) if j % 2 == 0 => phi.restrict_with_grid(phi.a(), phi.node(j), j)?,
        _ => phi.restrict(phi.a(), tau)?,
    };
    let iterated = iterate_t(&part, q - 1, DEFAULT_T_GRID)?;
    let variation = constancy_deviation(&iterated);
    if variation > T::lit(CONSTANCY_TOL) {
        return Err(Error::ConstancyViolation { variation: variation.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(iterated.sample_element(0))
}
