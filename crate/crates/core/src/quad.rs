//! Quadrature on uniform grids.
//!
//! Endpoint integrals use composite Simpson. Cumulative integrals, needed at
//! every node by the Picard recursion, integrate the local degree-7 Lagrange
//! interpolant over each cell (degree `n` when the grid has fewer cells).

use crate::scalar::Real;

/// Composite Simpson over `[s, t]` with `panels` (even) panels of a vector-valued
/// integrand of length `dim`.
pub fn simpson<T: Real>(s: T, t: T, panels: usize, dim: usize, mut f: impl FnMut(T, &mut [T])) -> Vec<T> {
    assert!(panels >= 2 && panels.is_multiple_of(2), "Simpson needs an even panel count");
    let mut acc = vec![T::zero(); dim];
    let mut buf = vec![T::zero(); dim];
    if s == t {
        return acc;
    }
    let h = (t - s) / T::of_usize(panels);
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    for i in 0..=panels {
        let x = if i == panels { t } else { s + h * T::of_usize(i) };
        f(x, &mut buf);
        let w = if i == 0 || i == panels {
            T::one()
        } else if i % 2 == 1 {
            four
        } else {
            two
        };
        for (a, &v) in acc.iter_mut().zip(&buf) {
            *a = *a + w * v;
        }
    }
    let third = h / T::lit(3.0);
    acc.iter_mut().for_each(|a| *a = *a * third);
    acc
}

/// Scalar composite Simpson.
pub fn simpson_scalar<T: Real>(s: T, t: T, panels: usize, mut f: impl FnMut(T) -> T) -> T {
    simpson(s, t, panels, 1, |x, out| out[0] = f(x))[0]
}

/// Maximal stencil degree of the cumulative rule.
const STENCIL_DEGREE: usize = 7;

/// Cumulative integration weights for a uniform grid of `n` cells.
#[derive(Clone, Debug)]
pub struct CumulativeRule<T> {
    n: usize,
    degree: usize,
    h: T,
    /// `weights[k][i]`: integral over local cell `[k, k+1]` of the `i`-th
    /// Lagrange basis polynomial on nodes `0..=degree`, in units of `h`.
    weights: Vec<Vec<T>>,
}

impl<T: Real> CumulativeRule<T> {
    pub fn new(n: usize, h: T) -> Self {
        assert!(n >= 1);
        let degree = STENCIL_DEGREE.min(n);
        let weights = (0..degree)
            .map(|k| (0..=degree).map(|i| T::lit(lagrange_cell_integral(degree, i, k))).collect())
            .collect();
        Self { n, degree, h, weights }
    }

    fn stencil(&self, cell: usize) -> (usize, usize) {
        let half = (self.degree - 1) / 2;
        let start = cell.saturating_sub(half).min(self.n - self.degree);
        (start, cell - start)
    }

    /// Integral of the interpolant over cell `j`, accumulated into `out`.
    fn cell_integral(&self, values: &[T], dim: usize, cell: usize, out: &mut [T]) {
        let (start, k) = self.stencil(cell);
        out.iter_mut().for_each(|o| *o = T::zero());
        for (i, &w) in self.weights[k].iter().enumerate() {
            let row = &values[(start + i) * dim..(start + i + 1) * dim];
            for (o, &v) in out.iter_mut().zip(row) {
                *o = *o + w * v;
            }
        }
        out.iter_mut().for_each(|o| *o = *o * self.h);
    }

    /// `out[j] = ∫ₐ^{t_j} f` for node values `values` (flat, `(n+1)·dim`).
    pub fn cumulative(&self, values: &[T], dim: usize) -> Vec<T> {
        assert_eq!(values.len(), (self.n + 1) * dim);
        let mut out = vec![T::zero(); (self.n + 1) * dim];
        let mut cell = vec![T::zero(); dim];
        for j in 0..self.n {
            self.cell_integral(values, dim, j, &mut cell);
            for d in 0..dim {
                out[(j + 1) * dim + d] = out[j * dim + d] + cell[d];
            }
        }
        out
    }

    /// `∫ₐᵇ f` over the whole grid.
    pub fn total(&self, values: &[T], dim: usize) -> Vec<T> {
        assert_eq!(values.len(), (self.n + 1) * dim);
        let mut acc = vec![T::zero(); dim];
        let mut cell = vec![T::zero(); dim];
        for j in 0..self.n {
            self.cell_integral(values, dim, j, &mut cell);
            for (a, &c) in acc.iter_mut().zip(&cell) {
                *a = *a + c;
            }
        }
        acc
    }
}

/// `∫_k^{k+1} ℓ_i(x) dx` for the Lagrange basis on nodes `0..=degree`,
/// evaluated in exact integer arithmetic and rounded once.
fn lagrange_cell_integral(degree: usize, i: usize, k: usize) -> f64 {
    // ∏_{m≠i} (x − m) in the monomial basis, lowest first
    let mut coeffs = vec![1i128];
    let mut denom = 1i128;
    for m in (0..=degree).filter(|&m| m != i) {
        denom *= i as i128 - m as i128;
        let mut next = vec![0i128; coeffs.len() + 1];
        for (p, &c) in coeffs.iter().enumerate() {
            next[p + 1] += c;
            next[p] -= c * m as i128;
        }
        coeffs = next;
    }
    let lcm: i128 = (1..=coeffs.len() as i128).fold(1, |l, d| l / gcd(l, d) * d);
    let (lo, hi) = (k as i128, k as i128 + 1);
    let num: i128 = coeffs
        .iter()
        .enumerate()
        .map(|(p, &c)| c * (lcm / (p as i128 + 1)) * (hi.pow(p as u32 + 1) - lo.pow(p as u32 + 1)))
        .sum();
    num as f64 / (lcm * denom) as f64
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// Value at `t` of the local Lagrange interpolant through uniform samples on
/// `[a, b]` with `n` cells.
pub fn interpolate<T: Real>(a: T, b: T, n: usize, values: &[T], dim: usize, t: T, out: &mut [T]) {
    let h = (b - a) / T::of_usize(n);
    let x = (t - a) / h;
    let degree = STENCIL_DEGREE.min(n);
    let nearest = x.round();
    if (x - nearest).abs() <= T::eps() * T::lit(4.0) * x.abs().max(T::one()) {
        let j = nearest.to_usize().unwrap_or(0).min(n);
        out.copy_from_slice(&values[j * dim..(j + 1) * dim]);
        return;
    }
    let cell = x.floor().max(T::zero()).to_usize().unwrap_or(0).min(n - 1);
    let half = (degree - 1) / 2;
    let start = cell.saturating_sub(half).min(n - degree);
    out.iter_mut().for_each(|o| *o = T::zero());
    for i in 0..=degree {
        let xi = T::of_usize(start + i);
        let mut w = T::one();
        for m in (0..=degree).filter(|&m| m != i) {
            let xm = T::of_usize(start + m);
            w = w * (x - xm) / (xi - xm);
        }
        let row = &values[(start + i) * dim..(start + i + 1) * dim];
        for (o, &v) in out.iter_mut().zip(row) {
            *o = *o + w * v;
        }
    }
}
