//! Power series of endomorphisms and the Baker–Campbell–Dynkin–Hausdorff
//! expansions built from them.
//!
//! `Ψ(ξ) = Σ_{n≥1} ((−1)^{n−1}/n)(ξ − id)^{n−1}`,
//! `Ψ̃(ξ) = Σ_{n≥1} ((−1)^{n−1}/n) ξ∘(ξ − id)^{n−1}` and
//! `Φ(ζ) = Σ_{n≥0} ζⁿ/(n+1)!`.

use crate::algebra::{ensure_same, exp_matrix, AlgebraRef, Element, GroupPoint};
use crate::curves::{Curve, Sign};
use crate::error::{Error, Result};
use crate::lax::{default_tol, factorial_tail, propagator_sweep, MAX_DEPTH};
use crate::linalg::Matrix;
use crate::prodint::{bcdh_log, log_coeff, log_series_integral, nilpotent_log, ode_evolve, outer_terms};
use crate::quad::CumulativeRule;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    Psi,
    PsiTilde,
    Phi,
}

/// How a series is truncated: exactly after the nil order, or by a norm bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Nilpotent(usize),
    Banach,
}

impl Regime {
    pub fn of<T: Real>(algebra: &AlgebraRef<T>) -> Self {
        algebra.nil_order().map_or(Regime::Banach, Regime::Nilpotent)
    }
}

/// An endomorphism of the algebra in coordinates, with its truncation regime.
#[derive(Clone, Debug)]
pub struct EndoSeriesInput<T: Real = f64> {
    pub algebra: AlgebraRef<T>,
    pub operator: Matrix<T>,
    pub regime: Regime,
}

impl<T: Real> EndoSeriesInput<T> {
    pub fn new(algebra: AlgebraRef<T>, operator: Matrix<T>, regime: Regime) -> Result<Self> {
        let d = algebra.dim();
        if operator.rows() != d || operator.cols() != d {
            return Err(Error::InvalidArgument(format!("operator must be {d}×{d}")));
        }
        Ok(Self { algebra, operator, regime })
    }

    /// `e^{ad Z}` in the regime of the algebra of `Z`.
    pub fn exp_ad(z: &Element<T>) -> Self {
        let alg = z.algebra().clone();
        let op = alg.ad_matrix(z.coords()).expm();
        Self { regime: Regime::of(&alg), algebra: alg, operator: op }
    }

    /// `ad Z` in the regime of the algebra of `Z`.
    pub fn ad(z: &Element<T>) -> Self {
        let alg = z.algebra().clone();
        let op = alg.ad_matrix(z.coords());
        Self { regime: Regime::of(&alg), algebra: alg, operator: op }
    }
}

#[derive(Clone, Debug)]
pub struct SeriesValue<T: Real = f64> {
    pub value: Element<T>,
    pub terms: usize,
    pub tail_bound: T,
}

fn minus_identity<T: Real>(m: &Matrix<T>) -> Matrix<T> {
    let mut k = m.clone();
    for i in 0..k.rows() {
        k[(i, i)] = k[(i, i)] - T::one();
    }
    k
}

/// The `n`-th term of the series applied to `X` (`n ≥ 1` for `Ψ`, `Ψ̃`; `n ≥ 0` for `Φ`).
pub fn series_term<T: Real>(kind: SeriesKind, input: &EndoSeriesInput<T>, x: &Element<T>, n: usize) -> Result<Element<T>> {
    ensure_same(&input.algebra, x.algebra())?;
    let coords = match kind {
        SeriesKind::Psi | SeriesKind::PsiTilde => {
            if n == 0 {
                return Err(Error::InvalidArgument("Ψ-series terms start at n = 1".into()));
            }
            let k = minus_identity(&input.operator);
            let mut v = x.coords().to_vec();
            for _ in 1..n {
                v = k.mul_vec(&v);
            }
            if kind == SeriesKind::PsiTilde {
                v = input.operator.mul_vec(&v);
            }
            let c: T = log_coeff(n);
            v.into_iter().map(|e| e * c).collect()
        }
        SeriesKind::Phi => {
            let mut v = x.coords().to_vec();
            for _ in 0..n {
                v = input.operator.mul_vec(&v);
            }
            let f: T = crate::scalar::factorial(n + 1);
            v.into_iter().map(|e| e / f).collect()
        }
    };
    Ok(Element::from_raw(input.algebra.clone(), coords))
}

/// Number of terms and tail bound for a series.
fn truncation<T: Real>(kind: SeriesKind, input: &EndoSeriesInput<T>, scale: T, tol: T) -> Result<(usize, T)> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    if let Regime::Nilpotent(q) = input.regime {
        return Ok(match kind {
            SeriesKind::Psi | SeriesKind::PsiTilde => (q - 1, T::zero()),
            SeriesKind::Phi => (q - 1, T::zero()),
        });
    }
    match kind {
        SeriesKind::Psi | SeriesKind::PsiTilde => {
            let delta = input.algebra.operator_norm(&minus_identity(&input.operator));
            if !(delta < T::one()) {
                return Err(Error::DomainViolation { norm: delta.to_f64().unwrap_or(f64::NAN) });
            }
            let scale = if kind == SeriesKind::PsiTilde { scale * (T::one() + delta) } else { scale };
            outer_terms(delta, scale, tol)
        }
        SeriesKind::Phi => {
            let z = input.algebra.operator_norm(&input.operator);
            if z == T::zero() || scale == T::zero() {
                return Ok((1, T::zero()));
            }
            // Σ_{n>N} zⁿ/(n+1)! = (1/z)·Σ_{k>N+1} zᵏ/k!
            for n in 0..=MAX_DEPTH {
                let tail = scale * factorial_tail(z, n + 1) / z;
                if tail < tol {
                    return Ok((n + 1, tail));
                }
            }
            Err(Error::TruncationFailure { depth: MAX_DEPTH, tol: tol.to_f64().unwrap_or(f64::NAN) })
        }
    }
}

/// Truncated series applied to `X`. In the nilpotent regime the sum is exact
/// (`q − 1` terms); otherwise the tail is bounded geometrically (`Ψ`, `Ψ̃`, which
/// need `‖ξ − id‖ < 1`) or factorially (`Φ`).
pub fn series_apply<T: Real>(kind: SeriesKind, input: &EndoSeriesInput<T>, x: &Element<T>, tol: T) -> Result<SeriesValue<T>> {
    ensure_same(&input.algebra, x.algebra())?;
    let (terms, tail_bound) = truncation(kind, input, x.norm(), tol)?;
    let d = input.algebra.dim();
    let mut acc = vec![T::zero(); d];
    let mut v = x.coords().to_vec();
    match kind {
        SeriesKind::Psi | SeriesKind::PsiTilde => {
            let k = minus_identity(&input.operator);
            for n in 1..=terms {
                if n > 1 {
                    v = k.mul_vec(&v);
                }
                let c: T = log_coeff(n);
                if kind == SeriesKind::PsiTilde {
                    let w = input.operator.mul_vec(&v);
                    acc.iter_mut().zip(&w).for_each(|(a, &e)| *a = *a + c * e);
                } else {
                    acc.iter_mut().zip(&v).for_each(|(a, &e)| *a = *a + c * e);
                }
            }
        }
        SeriesKind::Phi => {
            let mut f = T::one();
            for n in 0..terms {
                if n > 0 {
                    v = input.operator.mul_vec(&v);
                }
                f = f / T::of_usize(n + 1);
                acc.iter_mut().zip(&v).for_each(|(a, &e)| *a = *a + f * e);
            }
        }
    }
    Ok(SeriesValue { value: Element::from_raw(input.algebra.clone(), acc), terms, tail_bound })
}

/// Result of the two-curve product formula `∫ₐᵗφ·∫ψ = exp(𝔛ψ + 𝔛φψ(t))`.
#[derive(Clone, Debug)]
pub struct PairLog<T: Real = f64> {
    pub x_psi: Element<T>,
    pub x_phi_psi: Curve<T>,
    pub regime: Regime,
    pub outer_terms: usize,
    /// `‖exp(𝔛ψ + 𝔛φψ(b)) − ∫φ·∫ψ‖_F` against RK4 at four times the grid.
    pub residual: T,
}

impl<T: Real> PairLog<T> {
    /// `𝔛ψ + 𝔛φψ(t_j)`.
    pub fn combined(&self, j: usize) -> Element<T> {
        let v = self.x_phi_psi.sample(j).iter().zip(self.x_psi.coords()).map(|(&a, &b)| a + b).collect();
        Element::from_raw(self.x_psi.algebra().clone(), v)
    }

    pub fn combined_last(&self) -> Element<T> {
        self.combined(self.x_phi_psi.grid_n())
    }
}

/// Logarithm of `∫ₐᵗφ·∫_{a′}^{b′}ψ` split as `𝔛ψ(b′) + 𝔛φψ(t)`.
pub fn bcdh_pair<T: Real>(phi: &Curve<T>, psi: &Curve<T>, tol: T) -> Result<PairLog<T>> {
    ensure_same(phi.algebra(), psi.algebra())?;
    let alg = phi.algebra();
    let regime = Regime::of(alg);
    let (x_psi, terms) = match regime {
        Regime::Nilpotent(q) => (nilpotent_log(psi)?.last(), q - 1),
        Regime::Banach => {
            let radius = phi.norm_integral() + psi.norm_integral();
            if !(radius < T::LN_2()) {
                return Err(Error::RadiusExceeded { radius: radius.to_f64().unwrap_or(f64::NAN) });
            }
            let scale = phi.sup_norm() * (phi.b() - phi.a());
            let (terms, _) = outer_terms(radius.exp_m1(), scale, tol / T::lit(2.0))?;
            (bcdh_log(psi, tol / T::lit(2.0))?.last(), terms)
        }
    };
    let sweep_tol = (tol * T::lit(0.01)).max(default_tol());
    let g = propagator_sweep(psi, Sign::Plus, sweep_tol)?.last().clone();
    let ops: Vec<Matrix<T>> = propagator_sweep(phi, Sign::Plus, sweep_tol)?.matrices().iter().map(|m| m * &g).collect();
    let values = log_series_integral(phi, &ops, terms);
    let x_phi_psi = Curve::from_samples(alg.clone(), phi.a(), phi.b(), values)?;

    let oracle = {
        let a = ode_evolve(phi, 4 * phi.grid_n())?;
        let b = ode_evolve(psi, 4 * psi.grid_n())?;
        a.last().compose(b.last())
    };
    let mut out = PairLog { x_psi, x_phi_psi, regime, outer_terms: terms, residual: T::zero() };
    out.residual = exp_matrix(&out.combined_last()).distance(&oracle);
    Ok(out)
}

/// `X + ∫₀ᵗ Ψ̃(Ad_{exp X}∘Ad_{exp sY})(Y) ds`, the logarithm of `exp(X)·exp(tY)`.
pub fn bcdh_classical<T: Real>(x: &Element<T>, y: &Element<T>, t: T) -> Result<Element<T>> {
    ensure_same(x.algebra(), y.algebra())?;
    if t == T::zero() {
        return Ok(x.clone());
    }
    let alg = x.algebra();
    let regime = Regime::of(alg);
    if regime == Regime::Banach {
        let radius = x.norm() + t.abs() * y.norm();
        if !(radius < T::LN_2()) {
            return Err(Error::RadiusExceeded { radius: radius.to_f64().unwrap_or(f64::NAN) });
        }
    }
    const CELLS: usize = 64;
    let ad_x = exp_matrix(x).adjoint();
    let d = alg.dim();
    let mut values = Vec::with_capacity((CELLS + 1) * d);
    for i in 0..=CELLS {
        let s = crate::curves::node_time(T::zero(), t, CELLS, i);
        let xi = &ad_x * &exp_matrix(&y.scale(s)).adjoint();
        let input = EndoSeriesInput { algebra: alg.clone(), operator: xi, regime };
        values.extend_from_slice(series_apply(SeriesKind::PsiTilde, &input, y, T::eps())?.value.coords());
    }
    let integral = CumulativeRule::new(CELLS, t / T::of_usize(CELLS)).total(&values, d);
    x.add(&Element::from_raw(alg.clone(), integral))
}

/// `𝔛(t) − 𝔛(a)` for `(∫ₐᵗφ)·g = exp(𝔛(t))`, computed three ways.
#[derive(Clone, Debug)]
pub struct BcdhForms<T: Real = f64> {
    /// `∫ₐᵗ Ψ(Ad_{∫ₐˢφ}∘Ad_g)(φ(s)) ds`
    pub psi_form: Curve<T>,
    /// `∫ₐᵗ Ψ̃(Ad_{g⁻¹}∘Ad_{[∫ₐˢφ]⁻¹})(φ(s)) ds`
    pub psi_tilde_form: Curve<T>,
    /// `Σ_{n ≤ N} ((−1)^{n−1}/n)·∫ₐᵗ (Ad_{∫ₐˢφ}∘Ad_g − id)^{n−1}(φ(s)) ds`
    pub explicit_form: Curve<T>,
    pub outer_terms: usize,
}

impl<T: Real> BcdhForms<T> {
    /// Largest pairwise nodewise coordinate deviation among the three forms.
    pub fn max_pairwise_deviation(&self) -> T {
        let forms = [&self.psi_form, &self.psi_tilde_form, &self.explicit_form];
        let mut worst = T::zero();
        for (i, a) in forms.iter().enumerate() {
            for b in &forms[i + 1..] {
                for (x, y) in a.samples().iter().zip(b.samples()) {
                    worst = worst.max((*x - *y).abs());
                }
            }
        }
        worst
    }
}

/// Evaluates the three equivalent integral forms of `𝔛 − 𝔛(a)`.
pub fn bcdh_forms<T: Real>(phi: &Curve<T>, g: &GroupPoint<T>, tol: T) -> Result<BcdhForms<T>> {
    ensure_same(phi.algebra(), g.algebra())?;
    let alg = phi.algebra();
    let regime = Regime::of(alg);
    let d = alg.dim();
    let n = phi.grid_n();
    let sweep_tol = (tol * T::lit(0.01)).max(default_tol());
    let ad_g = g.adjoint();
    let ad_g_inv = g.inverse().adjoint();
    let plus: Vec<Matrix<T>> = propagator_sweep(phi, Sign::Plus, sweep_tol)?.matrices().iter().map(|m| m * &ad_g).collect();
    let minus: Vec<Matrix<T>> = propagator_sweep(phi, Sign::Minus, sweep_tol)?.matrices().iter().map(|m| &ad_g_inv * m).collect();
    let rule = phi.cumulative_rule();

    let mut psi_vals = Vec::with_capacity((n + 1) * d);
    let mut tilde_vals = Vec::with_capacity((n + 1) * d);
    let mut delta = T::zero();
    for j in 0..=n {
        let x = phi.sample_element(j);
        let fwd = EndoSeriesInput { algebra: alg.clone(), operator: plus[j].clone(), regime };
        let bwd = EndoSeriesInput { algebra: alg.clone(), operator: minus[j].clone(), regime };
        psi_vals.extend_from_slice(series_apply(SeriesKind::Psi, &fwd, &x, tol)?.value.coords());
        tilde_vals.extend_from_slice(series_apply(SeriesKind::PsiTilde, &bwd, &x, tol)?.value.coords());
        if regime == Regime::Banach {
            delta = delta.max(alg.operator_norm(&minus_identity(&plus[j])));
        }
    }
    let terms = match regime {
        Regime::Nilpotent(q) => q - 1,
        Regime::Banach => outer_terms(delta, phi.sup_norm() * (phi.b() - phi.a()), tol)?.0,
    };
    let explicit = log_series_integral(phi, &plus, terms);
    let curve = |v: Vec<T>| Curve::from_samples(alg.clone(), phi.a(), phi.b(), v);
    Ok(BcdhForms {
        psi_form: curve(rule.cumulative(&psi_vals, d))?,
        psi_tilde_form: curve(rule.cumulative(&tilde_vals, d))?,
        explicit_form: curve(explicit)?,
        outer_terms: terms,
    })
}
