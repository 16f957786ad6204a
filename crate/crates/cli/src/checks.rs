//! Invariant suites behind `laxpi check`.

use std::fmt::Write;

use anyhow::Result;
use laxpi::algebra::AlgebraDescriptor;
use laxpi::bcdh::{bcdh_classical, bcdh_forms, bcdh_pair, series_apply, EndoSeriesInput, SeriesKind};
use laxpi::curvegroup::{inverse, star, sup_distance};
use laxpi::curves::{random_smooth_curve, reparametrize, reverse, CoeffFn};
use laxpi::lax::{factorial_tail, lax_residual, picard_remainder, propagator_sweep};
use laxpi::prodint::{check_identities, nilpotent_log, ode_evolve};
use laxpi::transform::{constancy_deviation, iterate_t, nilpotent_collapse, transform_t, DEFAULT_T_GRID};
use laxpi::{bracket, exp_matrix, Algebra64, Curve, Element, Matrix, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::output::{emit, fan_out, num, render};
use crate::{Common, Suite};

const DEFAULT_GRID: usize = 256;
const ORACLE_STEPS: usize = 1024;
const GROUP_TRIPLES: usize = 20;

#[derive(Clone, Debug, Serialize)]
struct Row {
    name: String,
    value: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    pass: bool,
}

impl Row {
    fn bounded(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let pass = value.is_finite() && lower.is_none_or(|l| value >= l) && upper.is_none_or(|u| value <= u);
        Row { name: name.into(), value, lower, upper, pass }
    }

    fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::bounded(name, value, None, Some(threshold))
    }

    fn info(name: impl Into<String>, value: f64) -> Self {
        Self::bounded(name, value, None, None)
    }
}

pub fn run(suite: Suite, common: &Common) -> Result<bool> {
    common.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let rows = match suite {
        Suite::Lax => lax(&subject(common, 1.0, &mut rng)?, &mut rng)?,
        Suite::Group => group(common, &mut rng)?,
        Suite::Transform => transform(&subject(common, 1.0, &mut rng)?)?,
        Suite::Identities => identities(&subject(common, 1.0, &mut rng)?, common, &mut rng)?,
        Suite::Bcdh => bcdh(&subject(common, 0.3, &mut rng)?, common.tol, &mut rng)?,
    };
    let pass = rows.iter().all(|r| r.pass);
    let name = format!("{suite:?}").to_lowercase();
    let json = json!({ "suite": name, "seed": common.seed, "checks": rows, "pass": pass });
    let text = render(common, &json, || {
        let opt = |x: Option<f64>| x.map_or(String::new(), num);
        let mut s = String::from("check,value,lower,upper,pass\n");
        for r in &rows {
            writeln!(s, "{},{},{},{},{}", r.name, num(r.value), opt(r.lower), opt(r.upper), r.pass).unwrap();
        }
        s
    });
    emit(common, &text)?;
    Ok(pass)
}

/// The `--spec` curve, or a random so(3) curve with `‖φ‖_∞ ≤ bound` on `[0, 1]`.
fn subject(common: &Common, bound: f64, rng: &mut ChaCha8Rng) -> Result<Curve> {
    match common.curve(common.n)? {
        Some(c) => Ok(c),
        None => {
            let grid = common.n.unwrap_or(DEFAULT_GRID);
            Ok(random_smooth_curve(&AlgebraDescriptor::so3(), 0.0, 1.0, grid, bound, rng)?)
        }
    }
}

fn unit_element(alg: &Algebra64, rng: &mut ChaCha8Rng) -> Element {
    let v: Vec<f64> = (0..alg.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let e = Element::new(alg.clone(), v).expect("dimension matches");
    e.scale(1.0 / e.norm())
}

fn lax(psi: &Curve, rng: &mut ChaCha8Rng) -> Result<Vec<Row>> {
    let alg = psi.algebra();
    let n = psi.grid_n();
    let x = unit_element(alg, rng);
    let y = unit_element(alg, rng);
    let plus = propagator_sweep(psi, Sign::Plus, 1e-12)?;
    let minus = propagator_sweep(psi, Sign::Minus, 1e-12)?;
    let id = Matrix::identity(alg.dim());
    let inv = (0..=n).map(|j| (minus.matrix(j) * plus.matrix(j)).distance(&id)).fold(0.0, f64::max);

    let xy = bracket(&x, &y)?;
    let mut auto: f64 = 0.0;
    for j in (0..=n).step_by((n / 8).max(1)) {
        let p = plus.propagator(j);
        let lhs = p.apply(&xy)?;
        let rhs = bracket(&p.apply(&x)?, &p.apply(&y)?)?;
        auto = auto.max(lhs.max_coord_diff(&rhs));
    }

    let c = psi.node(n / 2);
    let left = propagator_sweep(&psi.restrict(psi.a(), c)?, Sign::Plus, 1e-12)?;
    let right = propagator_sweep(&psi.restrict(c, psi.b())?, Sign::Plus, 1e-12)?;
    let split = (right.last() * left.last()).distance(plus.last());

    let mut rows = vec![
        Row::below("inverse", inv, 1e-9),
        Row::below("automorphism", auto, 1e-8),
        Row::below("splitting", split, 1e-8),
    ];

    let coarse = lax_residual(psi, &x)?;
    rows.push(Row::info("residual", coarse));
    if coarse > 1e-10 {
        let fine = lax_residual(&psi.with_grid(2 * n)?, &x)?;
        rows.push(Row::bounded("residual_order", coarse / fine, Some(3.5), Some(4.5)));
    }

    let m = psi.sup_norm();
    let mut worst: f64 = 0.0;
    for level in 0..4 {
        let rem = picard_remainder(psi, &x, Sign::Plus, level)?;
        for j in 0..=n {
            let r = alg.norm_coords(rem.sample(j));
            let bound = x.norm() * factorial_tail((psi.node(j) - psi.a()) * m, level);
            let ratio = if bound > 0.0 { r / bound } else if r == 0.0 { 0.0 } else { f64::INFINITY };
            worst = worst.max(ratio);
        }
    }
    rows.push(Row::below("remainder_bound_ratio", worst, 1.01));
    Ok(rows)
}

fn group(common: &Common, rng: &mut ChaCha8Rng) -> Result<Vec<Row>> {
    let setups: Vec<(Algebra64, f64, f64, usize)> = match common.curve(common.n)? {
        Some(c) => vec![(c.algebra().clone(), c.a(), c.b(), c.grid_n())],
        None => {
            let grid = common.n.unwrap_or(DEFAULT_GRID);
            vec![(AlgebraDescriptor::so3(), 0.0, 1.0, grid), (AlgebraDescriptor::heisenberg(), 0.0, 1.0, grid)]
        }
    };
    let mut rows = Vec::new();
    for (alg, a, b, grid) in setups {
        let triples: Vec<[Curve; 3]> = (0..GROUP_TRIPLES)
            .map(|_| -> Result<[Curve; 3]> {
                let mut draw = || random_smooth_curve(&alg, a, b, grid, 1.0, rng);
                Ok([draw()?, draw()?, draw()?])
            })
            .collect::<Result<_>>()?;
        let zero = Curve::zero(&alg, a, b, grid)?;
        let results = fan_out(triples.iter().enumerate().collect(), |(i, [phi, psi, chi])| -> Result<[f64; 4]> {
            let identity = sup_distance(&star(phi, &zero)?, phi)?.max(sup_distance(&star(&zero, phi)?, phi)?);
            let inv = inverse(phi)?;
            let inverse = sup_distance(&star(phi, &inv)?, &zero)?.max(sup_distance(&star(&inv, phi)?, &zero)?);
            let left = star(&star(phi, psi)?, chi)?;
            let right = star(phi, &star(psi, chi)?)?;
            let assoc = sup_distance(&left, &right)?;
            let homo = if i < 3 {
                let lhs = ode_evolve(&star(phi, psi)?, ORACLE_STEPS)?;
                let rhs = ode_evolve(phi, ORACLE_STEPS)?.last().compose(ode_evolve(psi, ORACLE_STEPS)?.last());
                lhs.last().distance(&rhs)
            } else {
                0.0
            };
            Ok([identity, inverse, assoc, homo])
        });
        let mut worst = [0.0f64; 4];
        for r in results {
            let r = r?;
            for k in 0..4 {
                worst[k] = worst[k].max(r[k]);
            }
        }
        let name = alg.name();
        rows.push(Row::below(format!("{name}/identity"), worst[0], 1e-7));
        rows.push(Row::below(format!("{name}/inverse"), worst[1], 1e-7));
        rows.push(Row::below(format!("{name}/associativity"), worst[2], 1e-7));
        rows.push(Row::below(format!("{name}/homomorphism"), worst[3], 1e-6));
    }
    Ok(rows)
}

fn transform(phi: &Curve) -> Result<Vec<Row>> {
    let (a, b) = phi.interval();
    let t_curve = transform_t(phi, DEFAULT_T_GRID)?;
    let mut rows = Vec::new();
    let sweep = propagator_sweep(&t_curve, Sign::Plus, 1e-13)?;
    let mut transport: f64 = 0.0;
    for (tau, j) in [(0.25, DEFAULT_T_GRID / 4), (0.5, DEFAULT_T_GRID / 2), (1.0, DEFAULT_T_GRID)] {
        let lhs = ode_evolve(&phi.scaled(tau), ORACLE_STEPS)?;
        let part = if j == DEFAULT_T_GRID { t_curve.clone() } else { t_curve.restrict(0.0, tau)? };
        let rhs = ode_evolve(&part, ORACLE_STEPS)?;
        rows.push(Row::below(format!("invariance_t={tau}"), lhs.last().distance(rhs.last()), 1e-6));
        let direct = propagator_sweep(&phi.scaled(tau), Sign::Plus, 1e-13)?;
        transport = transport.max(sweep.matrix(j).distance(direct.last()));
    }
    rows.push(Row::below("transport", transport, 1e-8));

    let c = phi.node(phi.grid_n() / 2);
    let left = transform_t(&phi.restrict(a, c)?, DEFAULT_T_GRID)?;
    let right = transform_t(&phi.restrict(c, b)?, DEFAULT_T_GRID)?;
    rows.push(Row::below("splitting", sup_distance(&t_curve, &star(&right, &left)?)?, 1e-7));

    let reversed = transform_t(&reverse(phi), DEFAULT_T_GRID)?;
    rows.push(Row::below("inverse", sup_distance(&inverse(&t_curve)?, &reversed)?, 1e-7));

    let len = b - a;
    let maps = [
        (CoeffFn::affine(a, len / 2.0), 0.0, 2.0),
        (CoeffFn::polynomial(vec![a, 0.4 * len, 0.6 * len]), 0.0, 1.0),
    ];
    let mut reparam: f64 = 0.0;
    for (rho, lo, hi) in &maps {
        let re = transform_t(&reparametrize(phi, rho, *lo, *hi)?, DEFAULT_T_GRID)?;
        reparam = reparam.max(sup_distance(&t_curve, &re)?);
    }
    rows.push(Row::below("reparametrization", reparam, 1e-7));

    if let Some(q) = phi.algebra().nil_order() {
        let iterated = iterate_t(phi, q - 1, DEFAULT_T_GRID)?;
        rows.push(Row::below("constancy", constancy_deviation(&iterated), 1e-9));
        let collapse = nilpotent_collapse(phi, b)?;
        let log = nilpotent_log(phi)?.last();
        rows.push(Row::below("collapse_vs_log", collapse.max_coord_diff(&log), 1e-8));
    }
    Ok(rows)
}

fn identities(phi: &Curve, common: &Common, rng: &mut ChaCha8Rng) -> Result<Vec<Row>> {
    let psi = random_smooth_curve(phi.algebra(), phi.a(), phi.b(), phi.grid_n(), 1.0, rng)?;
    let report = check_identities(phi, &psi, common.n.unwrap_or(ORACLE_STEPS))?;
    Ok(report.entries().iter().map(|&(name, v)| Row::below(name, v, 1e-7)).collect())
}

fn bcdh(phi: &Curve, tol: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Row>> {
    let alg = phi.algebra();
    let z = unit_element(alg, rng).scale(0.3);
    let (mut compose, mut tilde): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let y = unit_element(alg, rng);
        let phi_y = series_apply(SeriesKind::Phi, &EndoSeriesInput::ad(&z), &y, 1e-16)?.value;
        let back = series_apply(SeriesKind::Psi, &EndoSeriesInput::exp_ad(&z), &phi_y, 1e-16)?.value;
        compose = compose.max(back.max_coord_diff(&y));
        let lhs = series_apply(SeriesKind::PsiTilde, &EndoSeriesInput::exp_ad(&z.scale(-1.0)), &y, 1e-16)?.value;
        let rhs = series_apply(SeriesKind::Psi, &EndoSeriesInput::exp_ad(&z), &y, 1e-16)?.value;
        tilde = tilde.max(lhs.max_coord_diff(&rhs));
    }
    let h = AlgebraDescriptor::heisenberg();
    let classical = bcdh_classical(&Element::basis(&h, 0), &Element::basis(&h, 1), 1.0)?;
    let expected = Element::new(h, vec![1.0, 1.0, 0.5])?;

    let g = exp_matrix(&unit_element(alg, rng).scale(0.05));
    let forms = bcdh_forms(phi, &g, tol.min(1e-12))?;
    let psi = random_smooth_curve(alg, 0.0, 1.0, phi.grid_n(), 0.05, rng)?;
    let pair = bcdh_pair(phi, &psi, tol)?;
    Ok(vec![
        Row::below("psi_phi_composition", compose, 1e-10),
        Row::below("psi_tilde_reflection", tilde, 1e-10),
        Row::below("classical_heisenberg", classical.max_coord_diff(&expected), 1e-10),
        Row::below("three_forms", forms.max_pairwise_deviation(), 1e-8),
        Row::below("pair_reconstruction", pair.residual, 1e-6),
    ])
}
