use std::fmt::Write;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use laxpi::bcdh::bcdh_pair;
use laxpi::prodint::{bcdh_log, nilpotent_log, ode_evolve, riemann_product, Diagnostics, Method};
use laxpi::{exp_matrix, Curve, Element, GroupPoint};
use serde_json::{json, Value};

use crate::output::{emit, fan_out, num, render};
use crate::{build, Common};

const RIEMANN_STEPS: usize = 4096;
const RK4_STEPS: usize = 1024;
/// Largest accepted `‖exp(𝔛) − ∫φ‖_F` against the RK4 oracle.
const RECONSTRUCTION_TOL: f64 = 1e-6;

struct Run {
    method: Method,
    point: GroupPoint,
    log: Option<Element>,
    diagnostics: Diagnostics,
    wall_time_ms: f64,
}

fn default_method(phi: &Curve) -> Method {
    if phi.algebra().is_nilpotent() {
        Method::NilpotentLog
    } else {
        Method::Rk4
    }
}

/// Runs `method`; `n` is the step count for the oracles and the grid for the series.
fn run_method(spec: &laxpi::CurveSpec, method: Method, n: Option<usize>, tol: f64) -> Result<Run> {
    let start = Instant::now();
    let (point, log, diagnostics) = match method {
        Method::Riemann | Method::Rk4 => {
            let phi = build(spec, None)?;
            let steps = n.unwrap_or(if method == Method::Riemann { RIEMANN_STEPS } else { RK4_STEPS });
            let traj = if method == Method::Riemann { riemann_product(&phi, steps)? } else { ode_evolve(&phi, steps)? };
            (traj.last().clone(), None, traj.diagnostics)
        }
        Method::BcdhLog | Method::NilpotentLog => {
            let phi = build(spec, n)?;
            let series = if method == Method::BcdhLog { bcdh_log(&phi, tol)? } else { nilpotent_log(&phi)? };
            let traj = series.trajectory();
            (traj.last().clone(), Some(series.last()), traj.diagnostics)
        }
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Run { method, point, log, diagnostics, wall_time_ms })
}

fn matrix_json(g: &GroupPoint) -> Value {
    let m = g.matrix();
    Value::from((0..m.rows()).map(|i| m.row(i).to_vec()).collect::<Vec<_>>())
}

pub fn eval(method: Option<Method>, common: &Common) -> Result<bool> {
    common.validate()?;
    let specs = common.load_specs()?;
    let [spec] = specs.as_slice() else { bail!("eval takes exactly one --spec") };
    let method = match method {
        Some(m) => m,
        None => default_method(&build(spec, None)?),
    };
    let run = run_method(spec, method, common.n, common.tol).with_context(|| format!("method {method}"))?;
    let json = json!({
        "method": method.as_str(),
        "algebra": spec.algebra,
        "interval": spec.interval,
        "matrix": matrix_json(&run.point),
        "log": run.log.as_ref().map(|x| x.coords().to_vec()),
        "diagnostics": run.diagnostics,
    });
    let text = render(common, &json, || {
        let mut s = String::from("field,value\n");
        let d = &run.diagnostics;
        let opt_u = |x: Option<usize>| x.map_or(String::new(), |v| v.to_string());
        let opt_f = |x: Option<f64>| x.map_or(String::new(), num);
        writeln!(s, "method,{method}").unwrap();
        writeln!(s, "grid_n,{}", d.grid_n).unwrap();
        writeln!(s, "truncation_depth,{}", opt_u(d.truncation_depth)).unwrap();
        writeln!(s, "outer_terms,{}", opt_u(d.outer_terms)).unwrap();
        writeln!(s, "radius_used,{}", opt_f(d.radius_used)).unwrap();
        writeln!(s, "max_log_norm,{}", opt_f(d.max_log_norm)).unwrap();
        let m = run.point.matrix();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                writeln!(s, "m{}{},{}", i + 1, j + 1, num(m[(i, j)])).unwrap();
            }
        }
        if let Some(x) = &run.log {
            for (k, c) in x.coords().iter().enumerate() {
                writeln!(s, "x{},{}", k + 1, num(*c)).unwrap();
            }
        }
        s
    });
    emit(common, &text)?;
    Ok(true)
}

pub fn compare(common: &Common) -> Result<bool> {
    common.validate()?;
    let specs = common.load_specs()?;
    let [spec] = specs.as_slice() else { bail!("compare takes exactly one --spec") };
    let phi = build(spec, None)?;
    let mut methods = vec![Method::Riemann, Method::Rk4];
    if phi.algebra().is_nilpotent() {
        methods.push(Method::NilpotentLog);
    } else if phi.norm_integral() < std::f64::consts::LN_2 {
        methods.push(Method::BcdhLog);
    }
    let (riemann, rk4) = match common.n {
        Some(n) => (n, (n / 4).max(1)),
        None => (RIEMANN_STEPS, RK4_STEPS),
    };
    let runs: Vec<Run> = fan_out(methods, |m| {
        let n = match m {
            Method::Riemann => Some(riemann),
            Method::Rk4 => Some(rk4),
            _ => None,
        };
        run_method(spec, m, n, common.tol).with_context(|| format!("method {m}"))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    for (i, a) in runs.iter().enumerate() {
        for b in &runs[i + 1..] {
            pairs.push((a.method, b.method, a.point.distance(&b.point), a.wall_time_ms + b.wall_time_ms));
        }
    }
    let json = json!({
        "runs": runs.iter().map(|r| json!({
            "method": r.method.as_str(),
            "wall_time_ms": r.wall_time_ms,
            "diagnostics": r.diagnostics,
        })).collect::<Vec<_>>(),
        "pairs": pairs.iter().map(|(a, b, dev, ms)| json!({
            "method_a": a.as_str(),
            "method_b": b.as_str(),
            "frobenius_deviation": dev,
            "wall_time_ms": ms,
        })).collect::<Vec<_>>(),
    });
    let text = render(common, &json, || {
        let mut s = String::from("method_a,method_b,frobenius_deviation,wall_time_ms\n");
        for (a, b, dev, ms) in &pairs {
            writeln!(s, "{a},{b},{},{ms:.3}", num(*dev)).unwrap();
        }
        s
    });
    emit(common, &text)?;
    Ok(true)
}

pub fn bcdh(common: &Common) -> Result<bool> {
    common.validate()?;
    let specs = common.load_specs()?;
    let curves: Vec<Curve> = specs.iter().map(|s| build(s, common.n)).collect::<Result<_>>()?;
    let (fields, residual): (Vec<(&str, Vec<f64>)>, f64) = match curves.as_slice() {
        [phi] => {
            let series = if phi.algebra().is_nilpotent() { nilpotent_log(phi)? } else { bcdh_log(phi, common.tol)? };
            let x = series.last();
            let oracle = ode_evolve(phi, 4 * phi.grid_n())?;
            let residual = exp_matrix(&x).distance(oracle.last());
            (vec![("log", x.coords().to_vec())], residual)
        }
        [phi, psi] => {
            let pair = bcdh_pair(phi, psi, common.tol)?;
            let fields = vec![
                ("x_psi", pair.x_psi.coords().to_vec()),
                ("x_phi_psi", pair.x_phi_psi.sample(pair.x_phi_psi.grid_n()).to_vec()),
                ("log", pair.combined_last().coords().to_vec()),
            ];
            (fields, pair.residual)
        }
        _ => bail!("bcdh takes one or two --spec files"),
    };
    let pass = residual < RECONSTRUCTION_TOL;
    let mut json = json!({ "residual": residual, "threshold": RECONSTRUCTION_TOL, "pass": pass });
    for (k, v) in &fields {
        json[*k] = json!(v);
    }
    let text = render(common, &json, || {
        let mut s = String::from("field,value\n");
        for (k, v) in &fields {
            for (i, c) in v.iter().enumerate() {
                writeln!(s, "{k}{},{}", i + 1, num(*c)).unwrap();
            }
        }
        writeln!(s, "residual,{}", num(residual)).unwrap();
        writeln!(s, "pass,{pass}").unwrap();
        s
    });
    emit(common, &text)?;
    Ok(pass)
}
