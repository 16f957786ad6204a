//! Small dense row-major matrices.
//!
//! The arithmetic (`+`, `-`, `*`, commutator) only needs a ring, so it also works
//! for exact rationals; norms, inverses and the matrix exponential/logarithm
//! require a [`Real`] scalar.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::{Num, Zero};

use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Num> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; all rows must have the same length.
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: T, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x = *x + s * y;
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Sum of entrywise products, `tr(selfᵀ other)`.
    pub fn frobenius_dot(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Whether `self^k` vanishes exactly for some `k ≤ rows`.
    pub fn is_nilpotent(&self) -> bool {
        self.nilpotency_index().is_some()
    }

    /// Smallest `k` with `self^k = 0`, checked exactly.
    pub fn nilpotency_index(&self) -> Option<usize> {
        assert!(self.is_square());
        let mut p = self.clone();
        for k in 1..=self.rows {
            if p.is_zero() {
                return Some(k);
            }
            p = &p * self;
        }
        p.is_zero().then_some(self.rows + 1)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Copy + Num> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Copy + Num> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Copy + Num> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }
}

impl<T: Copy + Num + Neg<Output = T>> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| -x).collect() }
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl<T: Copy + Num> $tr for Matrix<T> {
            type Output = Matrix<T>;
            fn $method(self, rhs: Matrix<T>) -> Matrix<T> {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl<T: Real> Matrix<T> {
    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn distance(&self, other: &Self) -> T {
        (self - other).frobenius_norm()
    }

    /// LU factorisation with partial pivoting; `None` when a pivot vanishes.
    fn lu(&self) -> Option<(Matrix<T>, Vec<usize>, T)> {
        assert!(self.is_square());
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, T::zero()), |best, c| if c.1 > best.1 { c } else { best });
            if pmax == T::zero() || !pmax.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] = lu[(i, j)] - f * u;
                    }
                }
            }
        }
        Some((lu, perm, sign))
    }

    pub fn determinant(&self) -> T {
        match self.lu() {
            Some((lu, _, sign)) => (0..self.rows).fold(sign, |acc, i| acc * lu[(i, i)]),
            None => T::zero(),
        }
    }

    /// Solves `self · X = rhs` for a square, non-singular `self`.
    pub fn solve(&self, rhs: &Matrix<T>) -> Option<Matrix<T>> {
        let n = self.rows;
        assert_eq!(rhs.rows, n);
        let (lu, perm, _) = self.lu()?;
        let mut x = Matrix::from_fn(n, rhs.cols, |i, j| rhs[(perm[i], j)]);
        for c in 0..rhs.cols {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s = s - lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s = s - lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / lu[(i, i)];
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix<T>> {
        self.solve(&Matrix::identity(self.rows))
    }

    /// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
    pub fn cholesky(&self) -> Option<Matrix<T>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if d <= T::zero() {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(l)
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    ///
    /// Returns the eigenvalues and a matrix whose columns are the matching
    /// orthonormal eigenvectors.
    pub fn symmetric_eigen(&self) -> (Vec<T>, Matrix<T>) {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut v = Matrix::identity(n);
        let two = T::lit(2.0);
        for _sweep in 0..64 {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .fold(T::zero(), |acc, (i, j)| acc + a[(i, j)] * a[(i, j)]);
            if off <= T::eps() * T::eps() * a.frobenius_norm().powi(2) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        ((0..n).map(|i| a[(i, i)]).collect(), v)
    }

    /// Largest singular value together with the matching right singular vector.
    pub fn top_singular(&self) -> (T, Vec<T>) {
        let ata = &self.transpose() * self;
        let (vals, vecs) = ata.symmetric_eigen();
        let (k, &lmax) = vals
            .iter()
            .enumerate()
            .fold((0, &T::neg_infinity()), |best, c| if *c.1 > *best.1 { c } else { best });
        (lmax.max(T::zero()).sqrt(), vecs.column(k))
    }

    /// Spectral norm `‖A‖₂`.
    pub fn spectral_norm(&self) -> T {
        self.top_singular().0
    }

    /// Matrix exponential.
    ///
    /// Nilpotent inputs use the terminating Taylor sum. Everything else goes
    /// through scaling and squaring with a degree-16 Taylor polynomial, the
    /// scaling chosen so the scaled Frobenius norm is at most 1/2.
    pub fn expm(&self) -> Matrix<T> {
        assert!(self.is_square());
        let n = self.rows;
        if let Some(k) = self.nilpotency_index() {
            return taylor_sum(self, k.saturating_sub(1));
        }
        let norm = self.frobenius_norm();
        let half = T::lit(0.5);
        let mut squarings = 0usize;
        let mut scale = T::one();
        while norm * scale > half && squarings < 1074 {
            scale = scale * half;
            squarings += 1;
        }
        let mut e = taylor_sum(&self.scale(scale), 16);
        for _ in 0..squarings {
            e = &e * &e;
        }
        debug_assert_eq!(e.rows(), n);
        e
    }

    /// Principal square root by the Denman–Beavers iteration.
    pub fn sqrtm(&self) -> Option<Matrix<T>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut y = self.clone();
        let mut z = Matrix::identity(n);
        let tol = T::eps() * T::lit(16.0);
        let half = T::lit(0.5);
        for _ in 0..100 {
            let yi = y.inverse()?;
            let zi = z.inverse()?;
            let y_next = (&y + &zi).scale(half);
            let z_next = (&z + &yi).scale(half);
            let change = y_next.distance(&y);
            let size = y_next.frobenius_norm();
            y = y_next;
            z = z_next;
            if !y.is_finite() {
                return None;
            }
            if change <= tol * size {
                return Some(y);
            }
        }
        let residual = (&(&y * &y) - self).frobenius_norm();
        (residual <= T::lit(1e3) * T::eps() * self.frobenius_norm().max(T::one())).then_some(y)
    }

    /// Principal logarithm by inverse scaling and squaring.
    ///
    /// Unipotent inputs use the terminating Mercator series. Otherwise up to
    /// `max_roots` square roots are taken until `‖G − I‖_F < 1/4`; the Mercator
    /// series (degree 24, extended while terms stay above roundoff) is then
    /// applied. Returns `None` when `‖G − I‖_F ≥ 1` after the root budget or the
    /// square root iteration breaks down.
    pub fn logm(&self, max_roots: usize) -> Option<Matrix<T>> {
        assert!(self.is_square());
        let n = self.rows;
        let id = Matrix::identity(n);
        let e = self - &id;
        if let Some(k) = e.nilpotency_index() {
            return Some(mercator(&e, k.saturating_sub(1)));
        }
        let mut g = self.clone();
        let mut roots = 0usize;
        let quarter = T::lit(0.25);
        while (&g - &id).frobenius_norm() >= quarter && roots < max_roots {
            g = g.sqrtm()?;
            roots += 1;
        }
        let e = &g - &id;
        let r = e.frobenius_norm();
        if !(r < T::one()) {
            return None;
        }
        let mut degree = 24usize;
        while degree < 2000 && r.powi(degree as i32 + 1) / T::of_usize(degree + 1) > T::eps() * T::lit(0.1) {
            degree += 8;
        }
        let l = mercator(&e, degree);
        Some(l.scale(T::lit(2.0).powi(roots as i32)))
    }
}

/// `Σ_{k=0}^{degree} A^k / k!`, evaluated by Horner's scheme.
fn taylor_sum<T: Real>(a: &Matrix<T>, degree: usize) -> Matrix<T> {
    let n = a.rows();
    let id = Matrix::identity(n);
    let mut acc = id.clone();
    for k in (1..=degree).rev() {
        acc = &id + &(a * &acc).scale(T::one() / T::of_usize(k));
    }
    acc
}

/// `Σ_{k=1}^{degree} (−1)^{k+1} E^k / k`.
fn mercator<T: Real>(e: &Matrix<T>, degree: usize) -> Matrix<T> {
    let n = e.rows();
    let mut acc = Matrix::zeros(n, n);
    let mut power = Matrix::identity(n);
    for k in 1..=degree {
        power = &power * e;
        let c = T::one() / T::of_usize(k);
        acc.axpy(if k % 2 == 1 { c } else { -c }, &power);
    }
    acc
}

impl<T: Copy + Num> Zero for Matrix<T> {
    /// A 0×0 matrix; only useful as an additive placeholder.
    fn zero() -> Self {
        Matrix::zeros(0, 0)
    }
    fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }
}
