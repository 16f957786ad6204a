//! Product integrals `∫ₐᵗφ`: solutions of `μ̇ = mat(φ)·μ`, `μ(a) = I`.
//!
//! Four evaluators are provided: Riemann products of exponentials, classical
//! RK4, and the logarithmic series (Banach and nilpotent regimes) followed by
//! one exponential per node.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{exp_matrix, AlgebraRef, Element, GroupPoint};
use crate::curves::{reparametrize, reverse, CoeffFn, Curve, Sign};
use crate::error::{Error, Result};
use crate::lax::{default_tol, propagator_sweep};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Hard cap on the number of outer log-series terms.
pub const MAX_OUTER_TERMS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Riemann,
    Rk4,
    BcdhLog,
    NilpotentLog,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Riemann, Method::Rk4, Method::BcdhLog, Method::NilpotentLog];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Riemann => "riemann",
            Method::Rk4 => "rk4",
            Method::BcdhLog => "bcdh-log",
            Method::NilpotentLog => "nilpotent-log",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub grid_n: usize,
    pub truncation_depth: Option<usize>,
    pub outer_terms: Option<usize>,
    pub radius_used: Option<f64>,
    pub max_log_norm: Option<f64>,
}

/// Product-integral values at the nodes of a uniform grid.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real = f64> {
    pub algebra: AlgebraRef<T>,
    pub interval: (T, T),
    pub nodes: Vec<T>,
    pub points: Vec<GroupPoint<T>>,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &GroupPoint<T> {
        self.points.last().expect("trajectory has at least two points")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn uniform_nodes<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    (0..=n).map(|j| crate::curves::node_time(a, b, n, j)).collect()
}

fn check_steps(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("step count must be positive".into()));
    }
    Ok(())
}

/// `P_j = exp(δ·φ(t_{j−1}))·…·exp(δ·φ(t₀))` with `δ = (b − a)/n`.
pub fn riemann_product<T: Real>(phi: &Curve<T>, n: usize) -> Result<Trajectory<T>> {
    check_steps(n)?;
    let alg = phi.algebra();
    let (a, b) = phi.interval();
    let nodes = uniform_nodes(a, b, n);
    let delta = (b - a) / T::of_usize(n);
    let mut points = Vec::with_capacity(n + 1);
    let mut current = GroupPoint::identity(alg);
    points.push(current.clone());
    let mut buf = vec![T::zero(); alg.dim()];
    for &t in &nodes[..n] {
        phi.eval_into(t, &mut buf);
        buf.iter_mut().for_each(|x| *x = *x * delta);
        let step = exp_matrix(&Element::from_raw(alg.clone(), buf.clone()));
        current = step.compose(&current);
        points.push(current.clone());
    }
    Ok(Trajectory {
        algebra: alg.clone(),
        interval: (a, b),
        nodes,
        points,
        method: Method::Riemann,
        diagnostics: Diagnostics { grid_n: n, ..Default::default() },
    })
}

/// Classical RK4 on `μ̇ = mat(φ(t))·μ`, `μ(a) = I`, with `n` steps.
pub fn ode_evolve<T: Real>(phi: &Curve<T>, n: usize) -> Result<Trajectory<T>> {
    check_steps(n)?;
    let alg = phi.algebra();
    let (a, b) = phi.interval();
    let nodes = uniform_nodes(a, b, n);
    let h = (b - a) / T::of_usize(n);
    let half = h / T::lit(2.0);
    let mut buf = vec![T::zero(); alg.dim()];
    let mut gen = |t: T| {
        phi.eval_into(t, &mut buf);
        alg.to_matrix(&buf)
    };
    let mut mu = Matrix::identity(alg.rep_size());
    let mut points = Vec::with_capacity(n + 1);
    points.push(GroupPoint::from_raw(alg.clone(), mu.clone()));
    let mut a_left = gen(a);
    for j in 0..n {
        let t = nodes[j];
        let a_mid = gen(t + half);
        let a_right = gen(nodes[j + 1]);
        let k1 = &a_left * &mu;
        let mut y = mu.clone();
        y.axpy(half, &k1);
        let k2 = &a_mid * &y;
        let mut y = mu.clone();
        y.axpy(half, &k2);
        let k3 = &a_mid * &y;
        let mut y = mu.clone();
        y.axpy(h, &k3);
        let k4 = &a_right * &y;
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        mu.axpy(sixth, &k1);
        mu.axpy(sixth * two, &k2);
        mu.axpy(sixth * two, &k3);
        mu.axpy(sixth, &k4);
        points.push(GroupPoint::from_raw(alg.clone(), mu.clone()));
        a_left = a_right;
    }
    Ok(Trajectory {
        algebra: alg.clone(),
        interval: (a, b),
        nodes,
        points,
        method: Method::Rk4,
        diagnostics: Diagnostics { grid_n: n, ..Default::default() },
    })
}

/// Exponential coordinates `𝔛(t_j)` with `exp(𝔛(t_j)) = ∫ₐ^{t_j}φ`.
#[derive(Clone, Debug)]
pub struct LogSeries<T: Real = f64> {
    pub values: Curve<T>,
    pub method: Method,
    pub inner_depth: usize,
    pub outer_terms: usize,
    /// `∫ₐᵇ‖φ‖` (Banach regime only).
    pub radius: Option<T>,
    /// Bound on the discarded outer terms (zero in the nilpotent regime).
    pub tail_bound: T,
    pub max_norm: T,
}

impl<T: Real> LogSeries<T> {
    pub fn last(&self) -> Element<T> {
        self.values.sample_element(self.values.grid_n())
    }

    pub fn trajectory(&self) -> Trajectory<T> {
        let v = &self.values;
        let points = (0..=v.grid_n()).map(|j| exp_matrix(&v.sample_element(j))).collect();
        Trajectory {
            algebra: v.algebra().clone(),
            interval: v.interval(),
            nodes: v.nodes(),
            points,
            method: self.method,
            diagnostics: Diagnostics {
                grid_n: v.grid_n(),
                truncation_depth: Some(self.inner_depth),
                outer_terms: Some(self.outer_terms),
                radius_used: self.radius.and_then(|r| r.to_f64()),
                max_log_norm: self.max_norm.to_f64(),
            },
        }
    }
}

/// `(−1)^{n−1}/n`.
pub(crate) fn log_coeff<T: Real>(n: usize) -> T {
    let c = T::one() / T::of_usize(n);
    if n % 2 == 1 {
        c
    } else {
        -c
    }
}

/// Cumulative `∫ₐ^{t_j} Σ_{n=1}^{N} ((−1)^{n−1}/n)·(ξ(s) − id)^{n−1}(φ(s)) ds` on the grid of `φ`.
pub(crate) fn log_series_integral<T: Real>(phi: &Curve<T>, xi: &[Matrix<T>], terms: usize) -> Vec<T> {
    let d = phi.dim();
    let n = phi.grid_n();
    let mut integrand = vec![T::zero(); (n + 1) * d];
    for j in 0..=n {
        let mut k = xi[j].clone();
        for i in 0..d {
            k[(i, i)] = k[(i, i)] - T::one();
        }
        let mut v = phi.sample(j).to_vec();
        let out = &mut integrand[j * d..(j + 1) * d];
        for m in 1..=terms {
            if m > 1 {
                v = k.mul_vec(&v);
            }
            let c: T = log_coeff(m);
            out.iter_mut().zip(&v).for_each(|(o, &x)| *o = *o + c * x);
        }
    }
    phi.cumulative_rule().cumulative(&integrand, d)
}

/// Smallest `N` with `κᴺ/((N+1)(1 − κ))·scale < tol`.
pub(crate) fn outer_terms<T: Real>(kappa: T, scale: T, tol: T) -> Result<(usize, T)> {
    if scale == T::zero() || kappa == T::zero() {
        return Ok((1, T::zero()));
    }
    let mut pow = kappa;
    for n in 1..=MAX_OUTER_TERMS {
        let tail = pow / (T::of_usize(n + 1) * (T::one() - kappa)) * scale;
        if tail < tol {
            return Ok((n, tail));
        }
        pow = pow * kappa;
    }
    Err(Error::TruncationFailure { depth: MAX_OUTER_TERMS, tol: tol.to_f64().unwrap_or(f64::NAN) })
}

fn max_node_norm<T: Real>(alg: &AlgebraRef<T>, values: &[T]) -> (T, usize) {
    let d = alg.dim();
    values
        .chunks(d)
        .enumerate()
        .map(|(j, x)| (alg.norm_coords(x), j))
        .fold((T::zero(), 0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

/// Logarithm of the product integral via the Banach-regime series, valid while
/// `∫ₐᵇ‖φ‖ < ln 2`.
pub fn bcdh_log<T: Real>(phi: &Curve<T>, tol: T) -> Result<LogSeries<T>> {
    let alg = phi.algebra();
    let radius = phi.norm_integral();
    if !(radius < T::LN_2()) {
        return Err(Error::RadiusExceeded { radius: radius.to_f64().unwrap_or(f64::NAN) });
    }
    let kappa = radius.exp_m1();
    let scale = phi.sup_norm() * (phi.b() - phi.a());
    let (terms, tail_bound) = outer_terms(kappa, scale, tol / T::lit(2.0))?;
    let sweep_tol = (tol * T::lit(0.01)).max(default_tol());
    let sweep = propagator_sweep(phi, Sign::Plus, sweep_tol)?;
    let values = log_series_integral(phi, sweep.matrices(), terms);
    let (max_norm, j) = max_node_norm(alg, &values);
    if !(max_norm < T::LN_2()) {
        return Err(Error::PosterioriGuardFailed {
            t: phi.node(j).to_f64().unwrap_or(f64::NAN),
            norm: max_norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(LogSeries {
        values: Curve::from_samples(alg.clone(), phi.a(), phi.b(), values)?,
        method: Method::BcdhLog,
        inner_depth: sweep.depth(),
        outer_terms: terms,
        radius: Some(radius),
        tail_bound,
        max_norm,
    })
}

/// Finite logarithm series on a nilpotent algebra of nil order `q`: `q − 1`
/// outer terms, Picard depth `q − 2`.
pub fn nilpotent_log<T: Real>(phi: &Curve<T>) -> Result<LogSeries<T>> {
    let alg = phi.algebra();
    let q = alg.nil_order().ok_or_else(|| Error::NotNilpotent(alg.name().to_string()))?;
    let sweep = propagator_sweep(phi, Sign::Plus, default_tol())?;
    let terms = q - 1;
    let values = log_series_integral(phi, sweep.matrices(), terms);
    let (max_norm, _) = max_node_norm(alg, &values);
    Ok(LogSeries {
        values: Curve::from_samples(alg.clone(), phi.a(), phi.b(), values)?,
        method: Method::NilpotentLog,
        inner_depth: sweep.depth(),
        outer_terms: terms,
        radius: None,
        tail_bound: T::zero(),
        max_norm,
    })
}

/// Runs one evaluator with `n` as the step count (Riemann, RK4) and `tol` for
/// the series methods.
pub fn evaluate<T: Real>(phi: &Curve<T>, method: Method, n: usize, tol: T) -> Result<Trajectory<T>> {
    match method {
        Method::Riemann => riemann_product(phi, n),
        Method::Rk4 => ode_evolve(phi, n),
        Method::BcdhLog => Ok(bcdh_log(phi, tol)?.trajectory()),
        Method::NilpotentLog => Ok(nilpotent_log(phi)?.trajectory()),
    }
}

/// Frobenius deviations of the product-integral identities, each side by RK4.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `∫φ·∫ψ = ∫(φ + Λ⁺φ ψ)`
    pub product: f64,
    /// `[∫φ]⁻¹·∫ψ = ∫Λ⁻φ(ψ − φ)`
    pub quotient: f64,
    /// `[∫ψ]⁻¹ = ∫(−Λ⁻ψ ψ)`
    pub inverse: f64,
    /// `∫ₐᵇφ = ∫_c^bφ·∫ₐ^cφ`
    pub splitting: f64,
    /// `∫_{a′}^{b′} ρ̇·(φ∘ρ) = ∫_{ρ(a′)}^{ρ(b′)} φ`, affine and quadratic `ρ`
    pub substitution: f64,
    /// `[∫φ]⁻¹ = ∫φ̌`
    pub reversal: f64,
    /// `det ∫φ = exp(∫ tr φ)`
    pub determinant: f64,
}

impl IdentityReport {
    pub fn entries(&self) -> [(&'static str, f64); 7] {
        [
            ("product", self.product),
            ("quotient", self.quotient),
            ("inverse", self.inverse),
            ("splitting", self.splitting),
            ("substitution", self.substitution),
            ("reversal", self.reversal),
            ("determinant", self.determinant),
        ]
    }

    pub fn max(&self) -> f64 {
        self.entries().iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Maps node values through a per-node operator: `out_j = M_j·v_j`.
fn map_nodes<T: Real>(curve: &Curve<T>, ops: &[Matrix<T>], v: impl Fn(usize) -> Vec<T>) -> Result<Curve<T>> {
    let values = (0..=curve.grid_n()).flat_map(|j| ops[j].mul_vec(&v(j))).collect();
    Curve::from_samples(curve.algebra().clone(), curve.a(), curve.b(), values)
}

/// Evaluates the identities of the product integral with `n` RK4 steps per unit
/// of grid length.
pub fn check_identities<T: Real>(phi: &Curve<T>, psi: &Curve<T>, n: usize) -> Result<IdentityReport> {
    phi.ensure_same_grid(psi)?;
    check_steps(n)?;
    let tol = default_tol();
    let (a, b) = phi.interval();
    let end = |c: &Curve<T>| -> Result<Matrix<T>> { Ok(ode_evolve(c, n)?.last().matrix().clone()) };
    let g_phi = end(phi)?;
    let g_psi = end(psi)?;
    let inv = |m: &Matrix<T>| m.inverse().ok_or(Error::InvalidArgument("singular product integral".into()));

    let plus_phi = propagator_sweep(phi, Sign::Plus, tol)?;
    let minus_phi = propagator_sweep(phi, Sign::Minus, tol)?;
    let minus_psi = propagator_sweep(psi, Sign::Minus, tol)?;

    let moved = map_nodes(phi, plus_phi.matrices(), |j| psi.sample(j).to_vec())?;
    let product = end(&phi.add(&moved)?)?.distance(&(&g_phi * &g_psi));

    let diff = map_nodes(phi, minus_phi.matrices(), |j| {
        psi.sample(j).iter().zip(phi.sample(j)).map(|(&y, &x)| y - x).collect()
    })?;
    let quotient = end(&diff)?.distance(&(&inv(&g_phi)? * &g_psi));

    let back = map_nodes(psi, minus_psi.matrices(), |j| psi.sample(j).iter().map(|&y| -y).collect())?;
    let inverse = end(&back)?.distance(&inv(&g_psi)?);

    let mid = phi.node(phi.grid_n() / 2);
    let half = (n / 2).max(1);
    let left = ode_evolve(&phi.restrict(a, mid)?, half)?;
    let right = ode_evolve(&phi.restrict(mid, b)?, half)?;
    let splitting = (right.last().matrix() * left.last().matrix()).distance(&g_phi);

    let affine = reparametrize(phi, &CoeffFn::affine(a, b - a), T::zero(), T::one())?;
    let quadratic = reparametrize(phi, &CoeffFn::polynomial(vec![a, T::zero(), b - a]), T::zero(), T::one())?;
    let substitution = end(&affine)?.distance(&g_phi).max(end(&quadratic)?.distance(&g_phi));

    let reversal = end(&reverse(phi))?.distance(&inv(&g_phi)?);

    let trace = phi.algebra().to_matrix(crate::curves::integrate(phi, a, b)?.coords()).trace();
    let determinant = (g_phi.determinant() - trace.exp()).abs();

    Ok(IdentityReport {
        product: to_f64(product),
        quotient: to_f64(quotient),
        inverse: to_f64(inverse),
        splitting: to_f64(splitting),
        substitution: to_f64(substitution),
        reversal: to_f64(reversal),
        determinant: to_f64(determinant),
    })
}
