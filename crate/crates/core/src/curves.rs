//! Lie-algebra-valued curves on compact intervals.
//!
//! A [`Curve`] couples an evaluable source (closed-form term list, sampled
//! values with local interpolation, polynomial in `t`, or a derived curve such
//! as a reversal or reparametrisation) with cached samples on a uniform grid
//! of `grid_n` cells. Derived curves keep the closed form of their parent, so
//! refinement re-samples instead of interpolating.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{ensure_same, AlgebraDescriptor, AlgebraRef, Element};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::quad::{interpolate, simpson, simpson_scalar, CumulativeRule};
use crate::scalar::Real;

/// Default number of grid cells.
pub const DEFAULT_GRID_N: usize = 256;

/// Highest polynomial degree allowed in a coefficient function.
pub const MAX_POLY_DEGREE: usize = 8;

/// Direction of a Lax propagator or Picard series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Scalar coefficient function `Σ cₖtᵏ + Σ c·sin(ωt) + Σ c·cos(ωt)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoeffFn<T> {
    pub poly: Vec<T>,
    pub sin: Vec<(T, T)>,
    pub cos: Vec<(T, T)>,
}

impl<T: Real> CoeffFn<T> {
    pub fn constant(c: T) -> Self {
        Self { poly: vec![c], ..Default::default() }
    }

    pub fn polynomial(coeffs: Vec<T>) -> Self {
        Self { poly: coeffs, ..Default::default() }
    }

    /// `t ↦ c0 + c1·t`.
    pub fn affine(c0: T, c1: T) -> Self {
        Self::polynomial(vec![c0, c1])
    }

    pub fn eval(&self, t: T) -> T {
        let p = self.poly.iter().rev().fold(T::zero(), |acc, &c| acc * t + c);
        let s = self.sin.iter().fold(T::zero(), |acc, &(c, w)| acc + c * (w * t).sin());
        let k = self.cos.iter().fold(T::zero(), |acc, &(c, w)| acc + c * (w * t).cos());
        p + s + k
    }

    pub fn derivative(&self) -> Self {
        let poly = self.poly.iter().enumerate().skip(1).map(|(k, &c)| c * T::of_usize(k)).collect();
        let mut sin = Vec::new();
        let mut cos = Vec::new();
        for &(c, w) in &self.sin {
            cos.push((c * w, w));
        }
        for &(c, w) in &self.cos {
            sin.push((-c * w, w));
        }
        Self { poly, sin, cos }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            poly: self.poly.iter().map(|&c| c * s).collect(),
            sin: self.sin.iter().map(|&(c, w)| (c * s, w)).collect(),
            cos: self.cos.iter().map(|&(c, w)| (c * s, w)).collect(),
        }
    }

    fn is_zero(&self) -> bool {
        self.poly.iter().all(|&c| c == T::zero())
            && self.sin.iter().all(|&(c, _)| c == T::zero())
            && self.cos.iter().all(|&(c, _)| c == T::zero())
    }
}

/// One basis direction with its coefficient function.
#[derive(Clone, Debug, PartialEq)]
pub struct Term<T> {
    pub basis: usize,
    pub coeff: CoeffFn<T>,
}

/// Grid samples with local Lagrange interpolation between nodes.
#[derive(Debug)]
struct Sampled<T> {
    a: T,
    b: T,
    n: usize,
    values: Vec<T>,
}

#[derive(Debug)]
enum Source<T: Real> {
    Terms(Vec<Term<T>>),
    Sampled(Sampled<T>),
    /// `Σ tᵖ·A_p`
    Poly(Vec<Vec<T>>),
    /// `t ↦ −base(pivot − t)`
    Reversed { base: Arc<Source<T>>, pivot: T },
    Scaled { base: Arc<Source<T>>, factor: T },
    Sum(Arc<Source<T>>, Arc<Source<T>>),
    /// `t ↦ ρ̇(t)·base(ρ(t))`
    Reparam { base: Arc<Source<T>>, rho: CoeffFn<T>, rho_dot: CoeffFn<T> },
}

impl<T: Real> Source<T> {
    fn eval(&self, t: T, out: &mut [T]) {
        match self {
            Source::Terms(terms) => {
                out.iter_mut().for_each(|o| *o = T::zero());
                for term in terms {
                    out[term.basis] = out[term.basis] + term.coeff.eval(t);
                }
            }
            Source::Sampled(s) => interpolate(s.a, s.b, s.n, &s.values, out.len(), t, out),
            Source::Poly(coeffs) => {
                out.iter_mut().for_each(|o| *o = T::zero());
                for a in coeffs.iter().rev() {
                    for (o, &c) in out.iter_mut().zip(a) {
                        *o = *o * t + c;
                    }
                }
            }
            Source::Reversed { base, pivot } => {
                base.eval(*pivot - t, out);
                out.iter_mut().for_each(|o| *o = -*o);
            }
            Source::Scaled { base, factor } => {
                base.eval(t, out);
                out.iter_mut().for_each(|o| *o = *o * *factor);
            }
            Source::Sum(x, y) => {
                let mut tmp = vec![T::zero(); out.len()];
                x.eval(t, out);
                y.eval(t, &mut tmp);
                out.iter_mut().zip(&tmp).for_each(|(o, &v)| *o = *o + v);
            }
            Source::Reparam { base, rho, rho_dot } => {
                base.eval(rho.eval(t), out);
                let d = rho_dot.eval(t);
                out.iter_mut().for_each(|o| *o = *o * d);
            }
        }
    }
}

/// Lie-algebra-valued curve on `[a, b]` with cached uniform-grid samples.
#[derive(Clone)]
pub struct Curve<T: Real = f64> {
    algebra: AlgebraRef<T>,
    a: T,
    b: T,
    grid_n: usize,
    source: Arc<Source<T>>,
    samples: Arc<Vec<T>>,
}

impl<T: Real> fmt::Debug for Curve<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Curve")
            .field("algebra", &self.algebra.name())
            .field("interval", &(self.a, self.b))
            .field("grid_n", &self.grid_n)
            .finish_non_exhaustive()
    }
}

fn check_interval<T: Real>(a: T, b: T) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("interval [{a}, {b}] must satisfy a < b")));
    }
    Ok(())
}

fn check_grid(grid_n: usize) -> Result<()> {
    if grid_n < 2 || !grid_n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("grid_n = {grid_n} must be even and ≥ 2")));
    }
    Ok(())
}

/// Even cell count closest to `n·fraction`, at least 2.
fn scaled_grid<T: Real>(n: usize, fraction: T) -> usize {
    let m = (T::of_usize(n) * fraction).round().to_usize().unwrap_or(2).max(2);
    m + m % 2
}

impl<T: Real> Curve<T> {
    fn build(algebra: AlgebraRef<T>, a: T, b: T, grid_n: usize, source: Arc<Source<T>>) -> Self {
        let dim = algebra.dim();
        let mut samples = vec![T::zero(); (grid_n + 1) * dim];
        for j in 0..=grid_n {
            let t = node_time(a, b, grid_n, j);
            source.eval(t, &mut samples[j * dim..(j + 1) * dim]);
        }
        Self { algebra, a, b, grid_n, source, samples: Arc::new(samples) }
    }

    /// Closed-form curve from a term list.
    pub fn from_terms(algebra: AlgebraRef<T>, a: T, b: T, grid_n: usize, terms: Vec<Term<T>>) -> Result<Self> {
        check_interval(a, b)?;
        check_grid(grid_n)?;
        for term in &terms {
            if term.basis >= algebra.dim() {
                return Err(Error::InvalidArgument(format!(
                    "basis index {} out of range for {}",
                    term.basis,
                    algebra.name()
                )));
            }
            if term.coeff.poly.len() > MAX_POLY_DEGREE + 1 {
                return Err(Error::InvalidArgument(format!("polynomial degree exceeds {MAX_POLY_DEGREE}")));
            }
            let finite = term.coeff.poly.iter().all(|c| c.is_finite())
                && term.coeff.sin.iter().chain(&term.coeff.cos).all(|(c, w)| c.is_finite() && w.is_finite());
            if !finite {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
        }
        Ok(Self::build(algebra, a, b, grid_n, Arc::new(Source::Terms(terms))))
    }

    pub fn zero(algebra: &AlgebraRef<T>, a: T, b: T, grid_n: usize) -> Result<Self> {
        Self::from_terms(algebra.clone(), a, b, grid_n, Vec::new())
    }

    /// The constant curve `t ↦ X`.
    pub fn constant(x: &Element<T>, a: T, b: T, grid_n: usize) -> Result<Self> {
        let terms = x
            .coords()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != T::zero())
            .map(|(k, &c)| Term { basis: k, coeff: CoeffFn::constant(c) })
            .collect();
        Self::from_terms(x.algebra().clone(), a, b, grid_n, terms)
    }

    /// Curve given by node values on a uniform grid (`(grid_n+1)·dim`, node-major);
    /// off-grid evaluation interpolates locally.
    pub fn from_samples(algebra: AlgebraRef<T>, a: T, b: T, values: Vec<T>) -> Result<Self> {
        check_interval(a, b)?;
        let dim = algebra.dim();
        if values.is_empty() || !values.len().is_multiple_of(dim) || values.len() / dim < 3 {
            return Err(Error::InvalidArgument("need at least three nodes of samples".into()));
        }
        let grid_n = values.len() / dim - 1;
        let samples = Arc::new(values.clone());
        let source = Arc::new(Source::Sampled(Sampled { a, b, n: grid_n, values }));
        Ok(Self { algebra, a, b, grid_n, source, samples })
    }

    /// Curve `t ↦ Σ tᵖ·A_p` on `[a, b]`.
    pub(crate) fn from_poly_coeffs(algebra: AlgebraRef<T>, a: T, b: T, grid_n: usize, coeffs: Vec<Vec<T>>) -> Self {
        Self::build(algebra, a, b, grid_n, Arc::new(Source::Poly(coeffs)))
    }

    pub fn algebra(&self) -> &AlgebraRef<T> {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn interval(&self) -> (T, T) {
        (self.a, self.b)
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    /// Grid spacing `h = (b − a)/grid_n`.
    pub fn step(&self) -> T {
        (self.b - self.a) / T::of_usize(self.grid_n)
    }

    /// Time of grid node `j`.
    pub fn node(&self, j: usize) -> T {
        node_time(self.a, self.b, self.grid_n, j)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..=self.grid_n).map(|j| self.node(j)).collect()
    }

    /// Coordinates at grid node `j`.
    pub fn sample(&self, j: usize) -> &[T] {
        let d = self.dim();
        &self.samples[j * d..(j + 1) * d]
    }

    /// All samples, node-major.
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_element(&self, j: usize) -> Element<T> {
        Element::from_raw(self.algebra.clone(), self.sample(j).to_vec())
    }

    /// Coordinates at an arbitrary time (closed form where available).
    pub fn eval_into(&self, t: T, out: &mut [T]) {
        self.source.eval(t, out)
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.eval_into(t, &mut out);
        out
    }

    pub fn value(&self, t: T) -> Element<T> {
        Element::from_raw(self.algebra.clone(), self.eval(t))
    }

    /// `‖φ‖_∞` over the grid samples.
    pub fn sup_norm(&self) -> T {
        (0..=self.grid_n).map(|j| self.algebra.norm_coords(self.sample(j))).fold(T::zero(), T::max)
    }

    /// `∫ₐᵇ ‖φ(s)‖ ds` by composite Simpson on the doubled grid.
    pub fn norm_integral(&self) -> T {
        let mut buf = vec![T::zero(); self.dim()];
        simpson_scalar(self.a, self.b, 2 * self.grid_n, |t| {
            self.eval_into(t, &mut buf);
            self.algebra.norm_coords(&buf)
        })
    }

    /// Whether every sample is exactly zero.
    pub fn is_zero_sampled(&self) -> bool {
        self.samples.iter().all(|&x| x == T::zero())
    }

    /// Whether the source is a closed-form term list that vanishes identically.
    pub fn is_identically_zero(&self) -> bool {
        match self.source.as_ref() {
            Source::Terms(terms) => terms.iter().all(|t| t.coeff.is_zero()),
            _ => false,
        }
    }

    /// Same interval, algebra and grid.
    pub fn same_grid(&self, other: &Self) -> bool {
        self.algebra.same_as(&other.algebra) && self.a == other.a && self.b == other.b && self.grid_n == other.grid_n
    }

    pub(crate) fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        ensure_same(&self.algebra, &other.algebra)?;
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// The same curve re-sampled on a grid of `grid_n` cells.
    pub fn with_grid(&self, grid_n: usize) -> Result<Self> {
        check_grid(grid_n)?;
        Ok(Self::build(self.algebra.clone(), self.a, self.b, grid_n, self.source.clone()))
    }

    /// `s·φ` for a scalar `s`.
    pub fn scaled(&self, s: T) -> Self {
        if s == T::one() {
            return self.clone();
        }
        let source = Arc::new(Source::Scaled { base: self.source.clone(), factor: s });
        let samples = self.samples.iter().map(|&x| x * s).collect();
        Self { source, samples: Arc::new(samples), ..self.clone() }
    }

    /// Pointwise sum; both curves must share algebra and interval.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let source = Arc::new(Source::Sum(self.source.clone(), other.source.clone()));
        let samples = self.samples.iter().zip(other.samples.iter()).map(|(&x, &y)| x + y).collect();
        Ok(Self { source, samples: Arc::new(samples), ..self.clone() })
    }

    /// `φ|_{[c, d]}`, keeping the grid spacing as close as possible.
    pub fn restrict(&self, c: T, d: T) -> Result<Self> {
        check_interval(c, d)?;
        self.check_time(c)?;
        self.check_time(d)?;
        if c == self.a && d == self.b {
            return Ok(self.clone());
        }
        let n = scaled_grid(self.grid_n, (d - c) / (self.b - self.a));
        Ok(Self::build(self.algebra.clone(), c, d, n, self.source.clone()))
    }

    /// `φ|_{[c, d]}` on an explicit grid.
    pub fn restrict_with_grid(&self, c: T, d: T, grid_n: usize) -> Result<Self> {
        check_interval(c, d)?;
        check_grid(grid_n)?;
        self.check_time(c)?;
        self.check_time(d)?;
        Ok(Self::build(self.algebra.clone(), c, d, grid_n, self.source.clone()))
    }

    /// `φ̌: t ↦ −φ(a + b − t)`.
    pub fn reversed(&self) -> Self {
        let pivot = self.a + self.b;
        let source = match self.source.as_ref() {
            Source::Reversed { base, pivot: p } if *p == pivot => base.clone(),
            _ => Arc::new(Source::Reversed { base: self.source.clone(), pivot }),
        };
        Self::build(self.algebra.clone(), self.a, self.b, self.grid_n, source)
    }

    pub(crate) fn check_time(&self, t: T) -> Result<()> {
        let slack = T::lit(1e-12) * (self.b - self.a).max(self.a.abs()).max(self.b.abs());
        if t < self.a - slack || t > self.b + slack || !t.is_finite() {
            return Err(Error::OutOfInterval {
                t: t.to_f64().unwrap_or(f64::NAN),
                a: self.a.to_f64().unwrap_or(f64::NAN),
                b: self.b.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// Grid index of `t` when `t` is (up to roundoff) a grid node.
    pub fn node_index(&self, t: T) -> Option<usize> {
        let x = (t - self.a) / self.step();
        let j = x.round();
        ((x - j).abs() <= T::lit(1e-9) && j >= T::zero() && j <= T::of_usize(self.grid_n))
            .then(|| j.to_usize().unwrap_or(0))
    }

    /// `ad φ(t_j)` at every node.
    pub(crate) fn ad_samples(&self) -> Vec<Matrix<T>> {
        (0..=self.grid_n).map(|j| self.algebra.ad_matrix(self.sample(j))).collect()
    }

    pub(crate) fn cumulative_rule(&self) -> CumulativeRule<T> {
        CumulativeRule::new(self.grid_n, self.step())
    }

    /// Cumulative integrals `∫ₐ^{t_j} φ` at every node.
    pub fn cumulative_integral(&self) -> Vec<T> {
        self.cumulative_rule().cumulative(&self.samples, self.dim())
    }
}

pub(crate) fn node_time<T: Real>(a: T, b: T, n: usize, j: usize) -> T {
    if j == n {
        b
    } else {
        a + (b - a) * (T::of_usize(j) / T::of_usize(n))
    }
}

/// `∫ₛᵗ φ` by composite Simpson, two panels per grid cell.
pub fn integrate<T: Real>(phi: &Curve<T>, s: T, t: T) -> Result<Element<T>> {
    phi.check_time(s)?;
    phi.check_time(t)?;
    if s == t {
        return Ok(Element::zero(phi.algebra()));
    }
    if s > t {
        return integrate(phi, t, s).map(|e| e.scale(-T::one()));
    }
    let cells = (T::of_usize(phi.grid_n) * (t - s) / (phi.b - phi.a) - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let coords = simpson(s, t, 2 * cells, phi.dim(), |x, out| phi.eval_into(x, out));
    Ok(Element::from_raw(phi.algebra().clone(), coords))
}

/// `φ̌: t ↦ −φ(a + b − t)` on the same interval.
pub fn reverse<T: Real>(phi: &Curve<T>) -> Curve<T> {
    phi.reversed()
}

/// `ρ̇·(φ∘ρ)` on `[a′, b′]` for a `C¹` map `ρ` into the interval of `φ`.
pub fn reparametrize<T: Real>(phi: &Curve<T>, rho: &CoeffFn<T>, a_new: T, b_new: T) -> Result<Curve<T>> {
    check_interval(a_new, b_new)?;
    let probes = 4 * phi.grid_n;
    for i in 0..=probes {
        let t = node_time(a_new, b_new, probes, i);
        phi.check_time(rho.eval(t))?;
    }
    let source = Arc::new(Source::Reparam { base: phi.source.clone(), rho: rho.clone(), rho_dot: rho.derivative() });
    Ok(Curve::build(phi.algebra.clone(), a_new, b_new, phi.grid_n, source))
}

/// Table of Picard terms `T±_ℓ[X](t_j)` for `ℓ = 0..=depth` on the grid of `ψ`.
#[derive(Clone, Debug)]
pub struct PicardTermTable<T: Real = f64> {
    base: Curve<T>,
    seed: Element<T>,
    sign: Sign,
    values: Vec<Vec<T>>,
}

impl<T: Real> PicardTermTable<T> {
    pub fn base(&self) -> &Curve<T> {
        &self.base
    }

    pub fn seed(&self) -> &Element<T> {
        &self.seed
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn depth(&self) -> usize {
        self.values.len() - 1
    }

    /// Coordinates of `T±_ℓ[X](t_j)`.
    pub fn value(&self, level: usize, j: usize) -> &[T] {
        let d = self.base.dim();
        &self.values[level][j * d..(j + 1) * d]
    }

    pub fn element(&self, level: usize, j: usize) -> Element<T> {
        Element::from_raw(self.base.algebra().clone(), self.value(level, j).to_vec())
    }

    /// Node-major values of level `ℓ`.
    pub fn level(&self, level: usize) -> &[T] {
        &self.values[level]
    }

    /// `Σ_{ℓ ≤ upto} T±_ℓ[X](t_j)` at every node.
    pub fn partial_sums(&self, upto: usize) -> Vec<T> {
        let mut acc = self.values[0].clone();
        for lvl in &self.values[1..=upto.min(self.depth())] {
            acc.iter_mut().zip(lvl).for_each(|(a, &v)| *a = *a + v);
        }
        acc
    }
}

/// Nested-commutator Picard terms of the Lax equation.
///
/// `T⁺_ℓ(t) = ∫ₐᵗ [ψ(s), T⁺_{ℓ−1}(s)] ds` is a vector recursion in the seed.
/// The minus series brackets `ψ` innermost, so it runs as an operator
/// recursion `U_ℓ(t) = −∫ₐᵗ U_{ℓ−1}(s)·ad ψ(s) ds` and is applied to `X` at the end.
pub fn picard_terms<T: Real>(psi: &Curve<T>, x: &Element<T>, sign: Sign, depth: usize) -> Result<PicardTermTable<T>> {
    ensure_same(psi.algebra(), x.algebra())?;
    let values = match sign {
        Sign::Plus => plus_levels(psi, x.coords(), depth),
        Sign::Minus => {
            let mut values = Vec::with_capacity(depth + 1);
            operator_levels(psi, Sign::Minus, depth, |_, level| {
                values.push(level.iter().flat_map(|u| u.mul_vec(x.coords())).collect());
            });
            values
        }
    };
    Ok(PicardTermTable { base: psi.clone(), seed: x.clone(), sign, values })
}

/// Levels `T⁺_0..=T⁺_depth` for one seed, node-major.
pub(crate) fn plus_levels<T: Real>(psi: &Curve<T>, seed: &[T], depth: usize) -> Vec<Vec<T>> {
    let alg = psi.algebra();
    let d = alg.dim();
    let n = psi.grid_n;
    let rule = psi.cumulative_rule();
    let mut levels = Vec::with_capacity(depth + 1);
    levels.push(seed.iter().copied().cycle().take((n + 1) * d).collect::<Vec<T>>());
    let mut integrand = vec![T::zero(); (n + 1) * d];
    for _ in 0..depth {
        let prev = levels.last().expect("level 0 present");
        for j in 0..=n {
            alg.bracket_into(psi.sample(j), &prev[j * d..(j + 1) * d], &mut integrand[j * d..(j + 1) * d]);
        }
        levels.push(rule.cumulative(&integrand, d));
    }
    levels
}

/// Streams the operator levels of the Picard series at every node.
///
/// Plus: `V_ℓ(t) = ∫ₐᵗ ad ψ(s)·V_{ℓ−1}(s) ds`; minus: `U_ℓ(t) = −∫ₐᵗ U_{ℓ−1}(s)·ad ψ(s) ds`;
/// both start from the identity. Only the previous level is kept.
pub(crate) fn operator_levels<T: Real>(
    psi: &Curve<T>,
    sign: Sign,
    depth: usize,
    mut visit: impl FnMut(usize, &[Matrix<T>]),
) {
    let d = psi.dim();
    let n = psi.grid_n;
    let mut prev: Vec<Matrix<T>> = vec![Matrix::identity(d); n + 1];
    visit(0, &prev);
    if depth == 0 {
        return;
    }
    let ads = psi.ad_samples();
    let rule = psi.cumulative_rule();
    let mut flat = Vec::with_capacity((n + 1) * d * d);
    for level in 1..=depth {
        flat.clear();
        for j in 0..=n {
            let m = match sign {
                Sign::Plus => &ads[j] * &prev[j],
                Sign::Minus => (&prev[j] * &ads[j]).scale(-T::one()),
            };
            flat.extend_from_slice(m.as_slice());
        }
        let cum = rule.cumulative(&flat, d * d);
        prev = (0..=n).map(|j| Matrix::from_vec(d, d, cum[j * d * d..(j + 1) * d * d].to_vec())).collect();
        visit(level, &prev);
    }
}

/// JSON description of a closed-form curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub algebra: String,
    pub interval: [f64; 2],
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
}

fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub basis: usize,
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<[f64; 2]>,
    #[serde(default)]
    pub cos: Vec<[f64; 2]>,
}

impl CurveSpec {
    /// Builds the curve with an optional grid override.
    pub fn build<T: Real>(&self, grid_override: Option<usize>) -> Result<Curve<T>> {
        let algebra = AlgebraDescriptor::<T>::from_id(&self.algebra)?;
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                basis: t.basis,
                coeff: CoeffFn {
                    poly: t.poly.iter().map(|&c| T::lit(c)).collect(),
                    sin: t.sin.iter().map(|&[c, w]| (T::lit(c), T::lit(w))).collect(),
                    cos: t.cos.iter().map(|&[c, w]| (T::lit(c), T::lit(w))).collect(),
                },
            })
            .collect();
        Curve::from_terms(
            algebra,
            T::lit(self.interval[0]),
            T::lit(self.interval[1]),
            grid_override.unwrap_or(self.grid_n),
            terms,
        )
    }
}

/// Random smooth closed-form curve with `‖φ‖_∞ ≤ sup_bound` on the grid.
///
/// Each basis direction gets a quadratic plus one sine and one cosine mode.
pub fn random_smooth_curve<T: Real, R: Rng + ?Sized>(
    algebra: &AlgebraRef<T>,
    a: T,
    b: T,
    grid_n: usize,
    sup_bound: T,
    rng: &mut R,
) -> Result<Curve<T>> {
    let mut u = |lo: f64, hi: f64| T::lit(rng.gen_range(lo..hi));
    let terms: Vec<Term<T>> = (0..algebra.dim())
        .map(|k| Term {
            basis: k,
            coeff: CoeffFn {
                poly: vec![u(-1.0, 1.0), u(-1.0, 1.0), u(-1.0, 1.0)],
                sin: vec![(u(-1.0, 1.0), u(0.5, 3.0))],
                cos: vec![(u(-1.0, 1.0), u(0.5, 3.0))],
            },
        })
        .collect();
    let raw = Curve::from_terms(algebra.clone(), a, b, grid_n, terms.clone())?;
    let sup = raw.sup_norm();
    let factor = if sup > T::zero() { sup_bound * T::lit(0.95) / sup } else { T::one() };
    let terms = terms.into_iter().map(|t| Term { basis: t.basis, coeff: t.coeff.scale(factor) }).collect();
    Curve::from_terms(algebra.clone(), a, b, grid_n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    type A = AlgebraDescriptor<f64>;

    fn linear_l1(n: usize) -> Curve {
        let so3 = A::so3();
        Curve::from_terms(so3, 0.0, 1.0, n, vec![Term { basis: 0, coeff: CoeffFn::affine(0.0, 1.0) }]).unwrap()
    }

    #[test]
    fn integrate_basics() {
        let phi = linear_l1(256);
        assert!(integrate(&phi, 0.3, 0.3).unwrap().is_zero());
        let v = integrate(&phi, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(v.coords()[0], 0.5, epsilon = 1e-15);
        let back = integrate(&phi, 1.0, 0.0).unwrap();
        assert_eq!(back.coords()[0], -v.coords()[0]);
        let rev = integrate(&reverse(&phi), 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(rev.coords()[0], -0.5, epsilon = 1e-15);
        assert!(matches!(integrate(&phi, -0.1, 0.5), Err(Error::OutOfInterval { .. })));
    }

    #[test]
    fn simpson_exact_for_cubic_coefficients() {
        let so3 = A::so3();
        let phi = Curve::from_terms(
            so3,
            -1.0,
            2.0,
            16,
            vec![
                Term { basis: 0, coeff: CoeffFn::polynomial(vec![1.0, -2.0, 0.5, 3.0]) },
                Term { basis: 2, coeff: CoeffFn::polynomial(vec![0.0, 0.0, 0.0, -1.0]) },
            ],
        )
        .unwrap();
        let v = integrate(&phi, -1.0, 2.0).unwrap();
        let anti0 = |t: f64| t - t * t + t.powi(3) / 6.0 + 0.75 * t.powi(4);
        let anti2 = |t: f64| -t.powi(4) / 4.0;
        assert_abs_diff_eq!(v.coords()[0], anti0(2.0) - anti0(-1.0), epsilon = 1e-13);
        assert_abs_diff_eq!(v.coords()[2], anti2(2.0) - anti2(-1.0), epsilon = 1e-13);
    }

    #[test]
    fn additivity_over_grid_aligned_points() {
        let so3 = A::so3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let phi = random_smooth_curve(&so3, 0.0, 2.0, 64, 1.0, &mut rng).unwrap();
        for m_idx in [1usize, 17, 32, 63] {
            let m = phi.node(m_idx);
            let whole = integrate(&phi, 0.0, 2.0).unwrap();
            let split = integrate(&phi, 0.0, m).unwrap().add(&integrate(&phi, m, 2.0).unwrap()).unwrap();
            assert!(whole.max_coord_diff(&split) < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn reverse_definitions() {
        let so3 = A::so3();
        let zero = Curve::zero(&so3, 0.0, 1.0, 8).unwrap();
        assert!(reverse(&zero).is_zero_sampled());

        let z = Element::new(so3.clone(), vec![0.1, -0.2, 0.3]).unwrap();
        let c = Curve::constant(&z, 0.0, 1.0, 8).unwrap();
        let cr = reverse(&c);
        for j in 0..=8 {
            assert_eq!(cr.sample(j), z.scale(-1.0).coords());
        }

        let phi = linear_l1(8);
        let r = reverse(&phi);
        for j in 0..=8 {
            let t = phi.node(j);
            assert_abs_diff_eq!(r.sample(j)[0], -(1.0 - t), epsilon = 1e-15);
        }
    }

    #[test]
    fn reverse_is_an_exact_involution() {
        let so3 = A::so3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let phi = random_smooth_curve(&so3, -0.5, 1.5, 32, 1.0, &mut rng).unwrap();
            let rr = reverse(&reverse(&phi));
            assert_eq!(rr.samples(), phi.samples());
        }
    }

    #[test]
    fn reparametrizations() {
        let so3 = A::so3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let phi = random_smooth_curve(&so3, 1.0, 3.0, 64, 1.0, &mut rng).unwrap();
        let same = reparametrize(&phi, &CoeffFn::affine(0.0, 1.0), 1.0, 3.0).unwrap();
        assert_eq!(same.samples(), phi.samples());

        // ρ(t) = a + (b − a)t on [0, 1]
        let affine = reparametrize(&phi, &CoeffFn::affine(1.0, 2.0), 0.0, 1.0).unwrap();
        let lhs = integrate(&affine, 0.0, 1.0).unwrap();
        let rhs = integrate(&phi, 1.0, 3.0).unwrap();
        assert!(lhs.max_coord_diff(&rhs) < 1e-11);

        let z = Element::new(so3.clone(), vec![0.0, 1.0, 0.0]).unwrap();
        let cz = Curve::constant(&z, 0.0, 1.0, 16).unwrap();
        let sq = reparametrize(&cz, &CoeffFn::polynomial(vec![0.0, 0.0, 1.0]), 0.0, 1.0).unwrap();
        for j in 0..=16 {
            assert_abs_diff_eq!(sq.sample(j)[1], 2.0 * sq.node(j), epsilon = 1e-15);
        }
        assert!(matches!(
            reparametrize(&cz, &CoeffFn::affine(0.0, 2.0), 0.0, 1.0),
            Err(Error::OutOfInterval { .. })
        ));
    }

    #[test]
    fn picard_constant_generator_matches_closed_form() {
        let so3 = A::so3();
        let l1 = Element::basis(&so3, 0);
        let l3 = Element::basis(&so3, 2);
        let psi = Curve::constant(&l3, 0.0, 1.0, 256).unwrap();
        let table = picard_terms(&psi, &l1, Sign::Plus, 6).unwrap();
        for j in [0usize, 64, 256] {
            assert_eq!(table.value(0, j), l1.coords());
        }
        // T⁺_ℓ(t) = ((t − a)^ℓ / ℓ!)·ad_Z^ℓ(X)
        assert!(table.element(1, 256).max_coord_diff(&Element::basis(&so3, 1)) < 1e-14);
        assert!(table.element(2, 256).max_coord_diff(&l1.scale(-0.5)) < 1e-14);
        for lvl in 1..=6 {
            assert!(table.value(lvl, 0).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn picard_minus_on_constant_curve() {
        // for constant ψ = Z the minus series is e^{−t·ad Z}
        let so3 = A::so3();
        let l1 = Element::basis(&so3, 0);
        let l3 = Element::basis(&so3, 2);
        let psi = Curve::constant(&l3, 0.0, 1.0, 64).unwrap();
        let table = picard_terms(&psi, &l1, Sign::Minus, 3).unwrap();
        assert!(table.element(1, 64).max_coord_diff(&Element::basis(&so3, 1).scale(-1.0)) < 1e-14);
        assert!(table.element(2, 64).max_coord_diff(&l1.scale(-0.5)) < 1e-14);
    }

    #[test]
    fn picard_terms_respect_factorial_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for alg in [A::so3(), A::sl2(), A::heisenberg()] {
            let psi = random_smooth_curve(&alg, 0.0, 1.5, 128, 1.0, &mut rng).unwrap();
            let x = Element::new(alg.clone(), vec![0.3, -0.7, 0.2]).unwrap();
            let sup = psi.sup_norm();
            for sign in [Sign::Plus, Sign::Minus] {
                let table = picard_terms(&psi, &x, sign, 10).unwrap();
                for lvl in 0..=10 {
                    for j in 0..=psi.grid_n() {
                        let t = psi.node(j) - psi.a();
                        let bound = x.norm() * (t * sup).powi(lvl as i32) / crate::scalar::factorial::<f64>(lvl);
                        let got = alg.norm_coords(table.value(lvl, j));
                        assert!(got <= 1.01 * bound + 1e-15, "{} {sign} ℓ={lvl} j={j}: {got} > {bound}", alg.name());
                    }
                }
            }
        }
    }

    #[test]
    fn spec_round_trip_through_json() {
        let json = r#"{"algebra":"so3","interval":[0,1],"grid_n":64,
            "terms":[{"basis":0,"sin":[[0.2,1.0]]},{"basis":2,"cos":[[0.2,2.0]]}]}"#;
        let spec: CurveSpec = serde_json::from_str(json).unwrap();
        let phi: Curve = spec.build(None).unwrap();
        assert_eq!(phi.grid_n(), 64);
        let v = phi.eval(0.5);
        assert_abs_diff_eq!(v[0], 0.2 * 0.5f64.sin(), epsilon = 1e-16);
        assert_abs_diff_eq!(v[2], 0.2 * 1.0f64.cos(), epsilon = 1e-16);
        let again: CurveSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn invalid_curves_are_rejected() {
        let so3 = A::so3();
        assert!(Curve::zero(&so3, 1.0, 1.0, 8).is_err());
        assert!(Curve::zero(&so3, 0.0, 1.0, 7).is_err());
        let bad = vec![Term { basis: 5, coeff: CoeffFn::constant(1.0) }];
        assert!(Curve::from_terms(so3.clone(), 0.0, 1.0, 8, bad).is_err());
        let deg9 = vec![Term { basis: 0, coeff: CoeffFn::polynomial(vec![1.0; 10]) }];
        assert!(Curve::from_terms(so3, 0.0, 1.0, 8, deg9).is_err());
    }

    #[test]
    fn sampled_curves_interpolate_smoothly() {
        let so3 = A::so3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let phi = random_smooth_curve(&so3, 0.0, 1.0, 64, 1.0, &mut rng).unwrap();
        let sampled = Curve::from_samples(so3, 0.0, 1.0, phi.samples().to_vec()).unwrap();
        for &t in &[0.0, 0.013, 0.5, 0.77, 1.0] {
            let (x, y) = (phi.eval(t), sampled.eval(t));
            for k in 0..3 {
                assert_abs_diff_eq!(x[k], y[k], epsilon = 1e-12);
            }
        }
    }
}
