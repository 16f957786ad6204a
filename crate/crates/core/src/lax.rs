//! Lax propagators `Λ±ψ[t] = Ad_{(∫ₐᵗψ)^{±1}}` as truncated Picard series.
//!
//! The truncation depth is chosen a priori from the factorial bound
//! `Σ_{ℓ>L} Mˡ/ℓ!` with `M = (b − a)·‖ψ‖_∞`. On nilpotent algebras of nil
//! order `q` the series is finite and stops at `ℓ = q − 2`.

use crate::algebra::{ensure_same, AlgebraRef, Element};
use crate::curves::{operator_levels, picard_terms, plus_levels, Curve, Sign};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Largest Picard depth tried before giving up.
pub const MAX_DEPTH: usize = 64;

/// Default series tolerance: `1e-13`, or a small multiple of the machine epsilon
/// for low-precision scalars.
pub fn default_tol<T: Real>() -> T {
    T::lit(1e-13).max(T::eps() * T::lit(64.0))
}

/// `Σ_{ℓ>L} Mˡ/ℓ!`, bounded by its first term times a geometric factor.
pub fn factorial_tail<T: Real>(m: T, depth: usize) -> T {
    if m == T::zero() {
        return T::zero();
    }
    let next = T::of_usize(depth + 2);
    if m >= next {
        return T::infinity();
    }
    let first = (1..=depth + 1).fold(T::one(), |acc, k| acc * m / T::of_usize(k));
    first / (T::one() - m / next)
}

/// Smallest depth whose tail `scale·Σ_{ℓ>L} Mˡ/ℓ!` is below `tol`; exact depth
/// `q − 2` on nilpotent algebras.
pub fn certified_depth<T: Real>(algebra: &AlgebraRef<T>, m: T, scale: T, tol: T) -> Result<(usize, T)> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    if let Some(q) = algebra.nil_order() {
        return Ok((q.saturating_sub(2), T::zero()));
    }
    for depth in 0..=MAX_DEPTH {
        let tail = scale * factorial_tail(m, depth);
        if tail < tol {
            return Ok((depth, tail));
        }
    }
    Err(Error::TruncationFailure { depth: MAX_DEPTH, tol: tol.to_f64().unwrap_or(f64::NAN) })
}

/// `M = (b − a)·‖ψ‖_∞`.
fn series_radius<T: Real>(psi: &Curve<T>) -> T {
    (psi.b() - psi.a()) * psi.sup_norm()
}

/// `Λ±ψ[t]` acting on coordinates.
#[derive(Clone, Debug)]
pub struct Propagator<T: Real = f64> {
    algebra: AlgebraRef<T>,
    time: T,
    sign: Sign,
    matrix: Matrix<T>,
    truncation_depth: usize,
    tail_bound: T,
}

impl<T: Real> Propagator<T> {
    pub fn identity(algebra: &AlgebraRef<T>, time: T, sign: Sign) -> Self {
        Self {
            algebra: algebra.clone(),
            time,
            sign,
            matrix: Matrix::identity(algebra.dim()),
            truncation_depth: 0,
            tail_bound: T::zero(),
        }
    }

    pub fn algebra(&self) -> &AlgebraRef<T> {
        &self.algebra
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn truncation_depth(&self) -> usize {
        self.truncation_depth
    }

    /// Operator-norm bound on the discarded series tail.
    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    pub fn apply(&self, x: &Element<T>) -> Result<Element<T>> {
        ensure_same(&self.algebra, x.algebra())?;
        Ok(Element::from_raw(self.algebra.clone(), self.matrix.mul_vec(x.coords())))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Matrix<T>> {
        ensure_same(&self.algebra, &other.algebra)?;
        Ok(&self.matrix * &other.matrix)
    }
}

/// `Λ±ψ[t_j]` at every grid node of `ψ`.
#[derive(Clone, Debug)]
pub struct PropagatorSweep<T: Real = f64> {
    algebra: AlgebraRef<T>,
    nodes: Vec<T>,
    sign: Sign,
    depth: usize,
    tail_bound: T,
    matrices: Vec<Matrix<T>>,
}

impl<T: Real> PropagatorSweep<T> {
    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrix(&self, j: usize) -> &Matrix<T> {
        &self.matrices[j]
    }

    pub fn matrices(&self) -> &[Matrix<T>] {
        &self.matrices
    }

    pub fn last(&self) -> &Matrix<T> {
        self.matrices.last().expect("sweep has at least two nodes")
    }

    pub fn propagator(&self, j: usize) -> Propagator<T> {
        Propagator {
            algebra: self.algebra.clone(),
            time: self.nodes[j],
            sign: self.sign,
            matrix: self.matrices[j].clone(),
            truncation_depth: self.depth,
            tail_bound: self.tail_bound,
        }
    }
}

/// Propagator matrices at every node from one operator-level Picard sweep.
pub fn propagator_sweep<T: Real>(psi: &Curve<T>, sign: Sign, tol: T) -> Result<PropagatorSweep<T>> {
    let (depth, tail_bound) = certified_depth(psi.algebra(), series_radius(psi), T::one(), tol)?;
    let d = psi.dim();
    let mut sums: Vec<Matrix<T>> = Vec::new();
    operator_levels(psi, sign, depth, |level, mats| {
        if level == 0 {
            sums = mats.to_vec();
        } else {
            for (s, m) in sums.iter_mut().zip(mats) {
                s.axpy(T::one(), m);
            }
        }
    });
    debug_assert!(sums.iter().all(|m| m.rows() == d));
    Ok(PropagatorSweep { algebra: psi.algebra().clone(), nodes: psi.nodes(), sign, depth, tail_bound, matrices: sums })
}

/// Values of `Λ±ψ[X]` on the grid of `ψ`, with the certificate used.
#[derive(Clone, Debug)]
pub struct LaxFlow<T: Real = f64> {
    pub values: Curve<T>,
    pub depth: usize,
    pub tail_bound: T,
}

/// `α(t_j) = Σ_{ℓ ≤ L} T±_ℓ[X](t_j)` with `‖X‖·Σ_{ℓ>L} Mˡ/ℓ! < tol`.
pub fn lax_propagate<T: Real>(psi: &Curve<T>, x: &Element<T>, sign: Sign, tol: T) -> Result<LaxFlow<T>> {
    ensure_same(psi.algebra(), x.algebra())?;
    let (depth, tail_bound) = certified_depth(psi.algebra(), series_radius(psi), x.norm(), tol)?;
    let values = match sign {
        Sign::Plus => {
            let levels = plus_levels(psi, x.coords(), depth);
            let mut acc = levels[0].clone();
            for lvl in &levels[1..] {
                acc.iter_mut().zip(lvl).for_each(|(a, &v)| *a = *a + v);
            }
            acc
        }
        Sign::Minus => picard_terms(psi, x, Sign::Minus, depth)?.partial_sums(depth),
    };
    let values = Curve::from_samples(psi.algebra().clone(), psi.a(), psi.b(), values)?;
    Ok(LaxFlow { values, depth, tail_bound })
}

/// `Λ±ψ[t]` for `t ∈ [a, b]`.
pub fn propagator_matrix<T: Real>(psi: &Curve<T>, t: T, sign: Sign, tol: T) -> Result<Propagator<T>> {
    psi.check_time(t)?;
    if t <= psi.a() {
        return Ok(Propagator::identity(psi.algebra(), psi.a(), sign));
    }
    let sub = match psi.node_index(t) {
        Some(j) if j % 2 == 0 && j >= 2 => psi.restrict_with_grid(psi.a(), psi.node(j), j)?,
        _ => psi.restrict(psi.a(), t.min(psi.b()))?,
    };
    let sweep = propagator_sweep(&sub, sign, tol)?;
    Ok(sweep.propagator(sweep.len() - 1).with_time(t))
}

impl<T: Real> Propagator<T> {
    fn with_time(mut self, t: T) -> Self {
        self.time = t;
        self
    }
}

/// `R±_{n+1}(t_j) = Λ±ψ[X](t_j) − Σ_{ℓ ≤ n} T±_ℓ[X](t_j)`, summed directly from
/// the certified higher levels.
pub fn picard_remainder<T: Real>(psi: &Curve<T>, x: &Element<T>, sign: Sign, n: usize) -> Result<Curve<T>> {
    ensure_same(psi.algebra(), x.algebra())?;
    let (depth, _) = certified_depth(psi.algebra(), series_radius(psi), x.norm(), default_tol())?;
    let d = psi.dim();
    let mut acc = vec![T::zero(); (psi.grid_n() + 1) * d];
    if depth > n {
        let table = picard_terms(psi, x, sign, depth)?;
        for lvl in n + 1..=depth {
            acc.iter_mut().zip(table.level(lvl)).for_each(|(a, &v)| *a = *a + v);
        }
    }
    Curve::from_samples(psi.algebra().clone(), psi.a(), psi.b(), acc)
}

/// `max_j ‖Dα(t_j) − [ψ(t_j), α(t_j)]‖` over interior nodes, with `Dα` the
/// central difference of `α = Λ⁺ψ[X]`.
pub fn lax_residual<T: Real>(psi: &Curve<T>, x: &Element<T>) -> Result<T> {
    let flow = lax_propagate(psi, x, Sign::Plus, default_tol())?;
    let alg = psi.algebra();
    let d = alg.dim();
    let two_h = psi.step() + psi.step();
    let mut br = vec![T::zero(); d];
    let mut diff = vec![T::zero(); d];
    let mut worst = T::zero();
    for j in 1..psi.grid_n() {
        let (prev, here, next) = (flow.values.sample(j - 1), flow.values.sample(j), flow.values.sample(j + 1));
        alg.bracket_into(psi.sample(j), here, &mut br);
        for k in 0..d {
            diff[k] = (next[k] - prev[k]) / two_h - br[k];
        }
        worst = worst.max(alg.norm_coords(&diff));
    }
    Ok(worst)
}
