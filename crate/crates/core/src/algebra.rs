//! Finite-dimensional matrix Lie algebras.
//!
//! An [`AlgebraDescriptor`] carries a basis of `n×n` real matrices, the
//! structure constants `c[k][i][j]` with `[eᵢ, eⱼ] = Σₖ c[k][i][j]·eₖ`, and a
//! scale `λ` making `‖X‖ := λ·‖mat(X)‖_F` submultiplicative for the bracket.
//! Elements are coordinate vectors in that basis; group points are invertible
//! representation matrices.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

pub type AlgebraRef<T = f64> = Arc<AlgebraDescriptor<T>>;

/// Default search depth of [`nil_order`].
pub const NIL_ORDER_CAP: usize = 12;

/// Square-root budget of [`log_matrix`].
pub const LOG_MAX_ROOTS: usize = 8;

#[derive(Clone, Debug)]
pub struct AlgebraDescriptor<T: Real = f64> {
    name: String,
    basis: Vec<Matrix<T>>,
    /// `c[k][i][j]` flattened as `k·dim² + i·dim + j`.
    structure: Vec<T>,
    gram: Matrix<T>,
    gram_chol: Matrix<T>,
    norm_scale: T,
    nil_order: Option<usize>,
}

impl<T: Real> AlgebraDescriptor<T> {
    /// Builds a descriptor from a linearly independent, bracket-closed basis.
    ///
    /// Structure constants come from projecting each commutator back onto the
    /// basis; the norm scale and nil-order are computed eagerly.
    pub fn from_basis(name: impl Into<String>, basis: Vec<Matrix<T>>) -> Result<Self> {
        let name = name.into();
        let dim = basis.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("empty basis".into()));
        }
        let n = basis[0].rows();
        if basis.iter().any(|b| b.rows() != n || b.cols() != n) {
            return Err(Error::InvalidArgument("basis matrices must all be n×n".into()));
        }
        let gram = Matrix::from_fn(dim, dim, |i, j| basis[i].frobenius_dot(&basis[j]));
        let gram_chol = gram
            .cholesky()
            .ok_or_else(|| Error::InvalidArgument("basis is linearly dependent".into()))?;
        let mut desc = Self {
            name,
            basis,
            structure: vec![T::zero(); dim * dim * dim],
            gram,
            gram_chol,
            norm_scale: T::one(),
            nil_order: None,
        };
        let mut worst = T::zero();
        for i in 0..dim {
            for j in 0..dim {
                let comm = desc.basis[i].commutator(&desc.basis[j]);
                let (coords, residual) = desc.project(&comm);
                worst = worst.max(residual / comm.frobenius_norm().max(T::one()));
                for (k, c) in coords.into_iter().enumerate() {
                    desc.structure[k * dim * dim + i * dim + j] = c;
                }
            }
        }
        if worst > T::lit(1e-10) {
            return Err(Error::NotClosed { residual: worst.to_f64().unwrap_or(f64::NAN) });
        }
        desc.norm_scale = bracket_norm_ratio(&desc);
        desc.nil_order = nil_order(&desc, NIL_ORDER_CAP);
        Ok(desc)
    }

    /// so(3) with `L1 = E₃₂ − E₂₃`, `L2 = E₁₃ − E₃₁`, `L3 = E₂₁ − E₁₂`, so `[L1, L2] = L3`.
    pub fn so3() -> AlgebraRef<T> {
        let (o, l) = (T::zero(), T::one());
        let basis = vec![
            Matrix::from_rows(&[&[o, o, o], &[o, o, -l], &[o, l, o]]),
            Matrix::from_rows(&[&[o, o, l], &[o, o, o], &[-l, o, o]]),
            Matrix::from_rows(&[&[o, -l, o], &[l, o, o], &[o, o, o]]),
        ];
        Arc::new(Self::from_basis("so3", basis).expect("so(3) basis"))
    }

    /// sl(2,ℝ) with basis `H, E, F`.
    pub fn sl2() -> AlgebraRef<T> {
        let (o, l) = (T::zero(), T::one());
        let basis = vec![
            Matrix::from_rows(&[&[l, o], &[o, -l]]),
            Matrix::from_rows(&[&[o, l], &[o, o]]),
            Matrix::from_rows(&[&[o, o], &[l, o]]),
        ];
        Arc::new(Self::from_basis("sl2", basis).expect("sl(2) basis"))
    }

    /// Heisenberg algebra with `P = E₁₂`, `Q = E₂₃`, `Z = E₁₃`; `[P, Q] = Z`.
    pub fn heisenberg() -> AlgebraRef<T> {
        let mut desc = upper_triangular_basis(3);
        desc.name = "heis3".into();
        Arc::new(desc)
    }

    /// Strictly upper triangular `n×n` matrices, ordered by superdiagonal.
    pub fn upper_triangular(n: usize) -> AlgebraRef<T> {
        assert!(n >= 2, "ut(n) needs n ≥ 2");
        Arc::new(upper_triangular_basis(n))
    }

    /// Diagonal `n×n` matrices (abelian).
    pub fn diagonal(n: usize) -> AlgebraRef<T> {
        assert!(n >= 1, "diag(n) needs n ≥ 1");
        let basis = (0..n)
            .map(|k| Matrix::from_fn(n, n, |i, j| if i == k && j == k { T::one() } else { T::zero() }))
            .collect();
        Arc::new(Self::from_basis(format!("diag({n})"), basis).expect("diagonal basis"))
    }

    /// Registry lookup: `so3`, `sl2`, `heis3`, `ut(n)`, `diag(n)`.
    pub fn from_id(id: &str) -> Result<AlgebraRef<T>> {
        let id = id.trim();
        let sized = |prefix: &str| -> Option<usize> {
            id.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?.trim().parse().ok()
        };
        match id {
            "so3" => Ok(Self::so3()),
            "sl2" => Ok(Self::sl2()),
            "heis3" => Ok(Self::heisenberg()),
            _ => {
                if let Some(n) = sized("ut").filter(|&n| (2..=8).contains(&n)) {
                    Ok(Self::upper_triangular(n))
                } else if let Some(n) = sized("diag").filter(|&n| (1..=8).contains(&n)) {
                    Ok(Self::diagonal(n))
                } else {
                    Err(Error::UnknownAlgebra(id.to_string()))
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    pub fn rep_size(&self) -> usize {
        self.basis[0].rows()
    }

    pub fn basis(&self) -> &[Matrix<T>] {
        &self.basis
    }

    pub fn norm_scale(&self) -> T {
        self.norm_scale
    }

    pub fn nil_order(&self) -> Option<usize> {
        self.nil_order
    }

    pub fn is_nilpotent(&self) -> bool {
        self.nil_order.is_some()
    }

    /// Whether every basis matrix is nilpotent, i.e. exp and log terminate.
    pub fn has_unipotent_exponential(&self) -> bool {
        self.basis.iter().all(|b| b.is_nilpotent()) && self.is_nilpotent()
    }

    /// Structure constant `c[k][i][j]`.
    #[inline]
    pub fn structure_constant(&self, k: usize, i: usize, j: usize) -> T {
        let d = self.dim();
        self.structure[k * d * d + i * d + j]
    }

    /// Bracket in coordinates.
    pub fn bracket_coords(&self, x: &[T], y: &[T]) -> Vec<T> {
        let d = self.dim();
        let mut out = vec![T::zero(); d];
        self.bracket_into(x, y, &mut out);
        out
    }

    /// Bracket in coordinates, written into `out`.
    pub fn bracket_into(&self, x: &[T], y: &[T], out: &mut [T]) {
        let d = self.dim();
        debug_assert!(x.len() == d && y.len() == d && out.len() == d);
        for (k, o) in out.iter_mut().enumerate() {
            let ck = &self.structure[k * d * d..(k + 1) * d * d];
            let mut s = T::zero();
            for i in 0..d {
                if x[i] == T::zero() {
                    continue;
                }
                let row = &ck[i * d..(i + 1) * d];
                let mut inner = T::zero();
                for j in 0..d {
                    inner = inner + row[j] * y[j];
                }
                s = s + x[i] * inner;
            }
            *o = s;
        }
    }

    /// Matrix of `ad_z = [z, ·]` acting on coordinates.
    pub fn ad_matrix(&self, z: &[T]) -> Matrix<T> {
        let d = self.dim();
        Matrix::from_fn(d, d, |k, j| {
            (0..d).fold(T::zero(), |acc, i| acc + z[i] * self.structure_constant(k, i, j))
        })
    }

    /// Representation matrix `Σ xₖ·Bₖ`.
    pub fn to_matrix(&self, x: &[T]) -> Matrix<T> {
        let n = self.rep_size();
        let mut m = Matrix::zeros(n, n);
        for (b, &c) in self.basis.iter().zip(x) {
            if c != T::zero() {
                m.axpy(c, b);
            }
        }
        m
    }

    /// Least-squares coordinates of `m` in the basis and the Frobenius residual.
    pub fn project(&self, m: &Matrix<T>) -> (Vec<T>, T) {
        let d = self.dim();
        let rhs = Matrix::from_fn(d, 1, |k, _| self.basis[k].frobenius_dot(m));
        let coords = self.gram.solve(&rhs).expect("Gram matrix is positive definite").column(0);
        let residual = (m - &self.to_matrix(&coords)).frobenius_norm();
        (coords, residual)
    }

    /// `‖x‖ = λ·‖mat(x)‖_F`.
    pub fn norm_coords(&self, x: &[T]) -> T {
        let g = self.gram_chol.transpose().mul_vec(x);
        self.norm_scale * g.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
    }

    /// Operator norm of a coordinate endomorphism, induced by the algebra norm.
    pub fn operator_norm(&self, op: &Matrix<T>) -> T {
        let lt = self.gram_chol.transpose();
        let lt_inv = lt.inverse().expect("Cholesky factor is invertible");
        (&(&lt * op) * &lt_inv).spectral_norm()
    }

    /// `Ad_g` acting on coordinates: column `j` holds the coordinates of `g·Bⱼ·g⁻¹`.
    pub fn adjoint_action(&self, g: &Matrix<T>) -> Matrix<T> {
        let g_inv = g.inverse().expect("group point is invertible");
        let cols: Vec<Vec<T>> =
            self.basis.iter().map(|b| self.project(&(&(g * b) * &g_inv)).0).collect();
        Matrix::from_columns(&cols)
    }

    /// Maximal `|c[k][i][j] + c[k][j][i]|`.
    pub fn antisymmetry_defect(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst
                        .max((self.structure_constant(k, i, j) + self.structure_constant(k, j, i)).abs());
                }
            }
        }
        worst
    }

    /// Maximal violation of the Jacobi identity over basis triples.
    pub fn jacobi_defect(&self) -> T {
        let d = self.dim();
        let c = |k, i, j| self.structure_constant(k, i, j);
        let mut worst = T::zero();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let s = (0..d).fold(T::zero(), |acc, m| {
                            acc + c(m, i, j) * c(l, m, k) + c(m, j, k) * c(l, m, i) + c(m, k, i) * c(l, m, j)
                        });
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Maximal Frobenius deviation between matrix commutators and the structure constants.
    pub fn faithfulness_defect(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for i in 0..d {
            for j in 0..d {
                let comm = self.basis[i].commutator(&self.basis[j]);
                let coords: Vec<T> = (0..d).map(|k| self.structure_constant(k, i, j)).collect();
                worst = worst.max((&comm - &self.to_matrix(&coords)).frobenius_norm());
            }
        }
        worst
    }

    pub(crate) fn same_as(&self, other: &Self) -> bool {
        std::ptr::eq(self, other) || (self.name == other.name && self.dim() == other.dim())
    }
}

fn upper_triangular_basis<T: Real>(n: usize) -> AlgebraDescriptor<T> {
    let mut basis = Vec::new();
    for offset in 1..n {
        for i in 0..n - offset {
            let j = i + offset;
            basis.push(Matrix::from_fn(n, n, |r, c| if r == i && c == j { T::one() } else { T::zero() }));
        }
    }
    AlgebraDescriptor::from_basis(format!("ut({n})"), basis).expect("upper triangular basis")
}

pub(crate) fn ensure_same<T: Real>(a: &AlgebraDescriptor<T>, b: &AlgebraDescriptor<T>) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::DescriptorMismatch { left: a.name.clone(), right: b.name.clone() })
    }
}

/// `sup ‖[X,Y]‖_F / (‖X‖_F·‖Y‖_F)`, starting from the best basis pair and
/// refined by alternating maximisation over each argument.
fn bracket_norm_ratio<T: Real>(desc: &AlgebraDescriptor<T>) -> T {
    let d = desc.dim();
    let mut best = T::zero();
    let mut best_pair = (0, 0);
    for i in 0..d {
        for j in 0..d {
            let comm = desc.basis[i].commutator(&desc.basis[j]);
            let r = comm.frobenius_norm() / (desc.basis[i].frobenius_norm() * desc.basis[j].frobenius_norm());
            if r > best {
                best = r;
                best_pair = (i, j);
            }
        }
    }
    if best == T::zero() {
        return T::one();
    }
    // In Frobenius-orthonormal coordinates u = Lᵀx the bracket map y ↦ [x, y]
    // is Lᵀ·ad_x·L⁻ᵀ; its top right singular vector maximises over y.
    let lt = desc.gram_chol.transpose();
    let lt_inv = lt.inverse().expect("Cholesky factor is invertible");
    let frob = |x: &[T]| desc.norm_coords(x) / desc.norm_scale;
    let mut x = unit(d, best_pair.0);
    let mut refined = best;
    for _ in 0..32 {
        let ad_x = &(&lt * &desc.ad_matrix(&x)) * &lt_inv;
        let (s, u) = ad_x.top_singular();
        let y = lt_inv.mul_vec(&u);
        let ratio = s / frob(&x);
        // [x, y] = −[y, x]: maximise over x with y fixed.
        let ad_y = &(&lt * &desc.ad_matrix(&y)) * &lt_inv;
        let (s2, u2) = ad_y.top_singular();
        x = lt_inv.mul_vec(&u2);
        let ratio2 = s2 / frob(&y);
        let r = ratio.max(ratio2);
        if r <= refined * (T::one() + T::lit(1e-14)) {
            refined = refined.max(r);
            break;
        }
        refined = r;
    }
    if refined > best * (T::one() + T::lit(1e-12)) {
        refined * (T::one() + T::lit(1e-12))
    } else {
        best
    }
}

fn unit<T: Real>(d: usize, k: usize) -> Vec<T> {
    (0..d).map(|i| if i == k { T::one() } else { T::zero() }).collect()
}

/// Returns a copy of `desc` whose norm scale `λ` makes `‖[X,Y]‖ ≤ ‖X‖·‖Y‖`.
///
/// `λ` is the largest bracket-to-norm ratio over basis pairs (1 for abelian
/// algebras), raised only if an alternating search finds a larger ratio off
/// the basis. Independent of the incoming scale, hence idempotent.
pub fn normalize_norm<T: Real>(desc: &AlgebraDescriptor<T>) -> AlgebraDescriptor<T> {
    let mut out = desc.clone();
    out.norm_scale = bracket_norm_ratio(desc);
    out
}

/// Smallest `q ≤ cap` such that every `q`-fold nested bracket of basis
/// elements vanishes.
///
/// Spans of the nested-bracket levels are tracked through an orthogonalised
/// spanning set, so the search is polynomial in the dimension.
pub fn nil_order<T: Real>(desc: &AlgebraDescriptor<T>, cap: usize) -> Option<usize> {
    let d = desc.dim();
    let scale = (0..d * d * d)
        .map(|k| desc.structure[k].abs())
        .fold(T::one(), |a, b| a.max(b));
    let tol = T::lit(1e-12) * scale;
    let mut level: Vec<Vec<T>> = (0..d).map(|k| unit(d, k)).collect();
    for q in 2..=cap {
        let mut next: Vec<Vec<T>> = Vec::new();
        for i in 0..d {
            for v in &level {
                let mut w = desc.bracket_coords(&unit(d, i), v);
                for u in &next {
                    let p = dot(&w, u);
                    for (wk, &uk) in w.iter_mut().zip(u) {
                        *wk = *wk - p * uk;
                    }
                }
                let n = dot(&w, &w).sqrt();
                if n > tol {
                    w.iter_mut().for_each(|x| *x = *x / n);
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return Some(q);
        }
        level = next;
    }
    None
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Lie algebra element in coordinates.
#[derive(Clone)]
pub struct Element<T: Real = f64> {
    algebra: AlgebraRef<T>,
    coords: Vec<T>,
}

impl<T: Real> fmt::Debug for Element<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element<{}>{:?}", self.algebra.name, self.coords)
    }
}

impl<T: Real> PartialEq for Element<T> {
    fn eq(&self, other: &Self) -> bool {
        self.algebra.same_as(&other.algebra) && self.coords == other.coords
    }
}

impl<T: Real> Element<T> {
    pub fn new(algebra: AlgebraRef<T>, coords: Vec<T>) -> Result<Self> {
        if coords.len() != algebra.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                algebra.dim(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { algebra, coords })
    }

    pub(crate) fn from_raw(algebra: AlgebraRef<T>, coords: Vec<T>) -> Self {
        debug_assert_eq!(coords.len(), algebra.dim());
        Self { algebra, coords }
    }

    pub fn zero(algebra: &AlgebraRef<T>) -> Self {
        Self { coords: vec![T::zero(); algebra.dim()], algebra: algebra.clone() }
    }

    /// The `k`-th basis element.
    pub fn basis(algebra: &AlgebraRef<T>, k: usize) -> Self {
        assert!(k < algebra.dim());
        Self { coords: unit(algebra.dim(), k), algebra: algebra.clone() }
    }

    pub fn algebra(&self) -> &AlgebraRef<T> {
        &self.algebra
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn to_matrix(&self) -> Matrix<T> {
        self.algebra.to_matrix(&self.coords)
    }

    pub fn norm(&self) -> T {
        self.algebra.norm_coords(&self.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == T::zero())
    }

    pub fn scale(&self, s: T) -> Self {
        Self { algebra: self.algebra.clone(), coords: self.coords.iter().map(|&c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_same(&self.algebra, &other.algebra)?;
        Ok(Self {
            algebra: self.algebra.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    /// Norm of the difference; both elements must share an algebra.
    pub fn distance(&self, other: &Self) -> T {
        self.algebra.norm_coords(
            &self.coords.iter().zip(&other.coords).map(|(&a, &b)| a - b).collect::<Vec<_>>(),
        )
    }

    /// Largest coordinate deviation.
    pub fn max_coord_diff(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }
}

/// `[X, Y] = Σ c[k][i][j]·Xᵢ·Yⱼ·eₖ`.
pub fn bracket<T: Real>(x: &Element<T>, y: &Element<T>) -> Result<Element<T>> {
    ensure_same(&x.algebra, &y.algebra)?;
    Ok(Element::from_raw(x.algebra.clone(), x.algebra.bracket_coords(&x.coords, &y.coords)))
}

/// `ad_Z^m (X) = [Z, [Z, …, [Z, X]]]`; `m = 0` returns `X`.
pub fn ad_power<T: Real>(z: &Element<T>, m: usize, x: &Element<T>) -> Result<Element<T>> {
    ensure_same(&z.algebra, &x.algebra)?;
    let mut v = x.coords.clone();
    for _ in 0..m {
        v = z.algebra.bracket_coords(&z.coords, &v);
    }
    Ok(Element::from_raw(x.algebra.clone(), v))
}

/// Matrix exponential of `mat(X)`.
pub fn exp_matrix<T: Real>(x: &Element<T>) -> GroupPoint<T> {
    GroupPoint { algebra: x.algebra.clone(), matrix: x.to_matrix().expm() }
}

/// Principal logarithm of a group point, expressed in the algebra basis.
pub fn log_matrix<T: Real>(g: &GroupPoint<T>) -> Result<Element<T>> {
    let l = g.matrix.logm(LOG_MAX_ROOTS).ok_or(Error::OutOfDomain)?;
    let (coords, residual) = g.algebra.project(&l);
    let limit = T::lit(1e-8).max(T::eps() * T::lit(1e4));
    if residual > limit * l.frobenius_norm().max(T::one()) {
        return Err(Error::NotInAlgebra { residual: residual.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(Element::from_raw(g.algebra.clone(), coords))
}

/// Invertible representation matrix of a group element.
#[derive(Clone)]
pub struct GroupPoint<T: Real = f64> {
    algebra: AlgebraRef<T>,
    matrix: Matrix<T>,
}

impl<T: Real> fmt::Debug for GroupPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupPoint<{}>{:?}", self.algebra.name, self.matrix)
    }
}

impl<T: Real> GroupPoint<T> {
    pub fn new(algebra: AlgebraRef<T>, matrix: Matrix<T>) -> Result<Self> {
        let n = algebra.rep_size();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::InvalidArgument(format!("group point must be {n}×{n}")));
        }
        if matrix.determinant() == T::zero() {
            return Err(Error::InvalidArgument("group point is singular".into()));
        }
        Ok(Self { algebra, matrix })
    }

    pub(crate) fn from_raw(algebra: AlgebraRef<T>, matrix: Matrix<T>) -> Self {
        Self { algebra, matrix }
    }

    pub fn identity(algebra: &AlgebraRef<T>) -> Self {
        Self { matrix: Matrix::identity(algebra.rep_size()), algebra: algebra.clone() }
    }

    pub fn algebra(&self) -> &AlgebraRef<T> {
        &self.algebra
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { algebra: self.algebra.clone(), matrix: &self.matrix * &other.matrix }
    }

    pub fn inverse(&self) -> Self {
        Self { algebra: self.algebra.clone(), matrix: self.matrix.inverse().expect("group point is invertible") }
    }

    pub fn determinant(&self) -> T {
        self.matrix.determinant()
    }

    /// `Ad_g` on algebra coordinates.
    pub fn adjoint(&self) -> Matrix<T> {
        self.algebra.adjoint_action(&self.matrix)
    }

    /// Frobenius distance between representation matrices.
    pub fn distance(&self, other: &Self) -> T {
        self.matrix.distance(&other.matrix)
    }
}
