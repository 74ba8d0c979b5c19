//! JSON-in, JSON-out bindings for the browser demo in `www/`.
//!
//! Each exported function has a plain Rust counterpart returning
//! `Result<String, String>` so the logic can be tested natively.

use std::sync::Arc;

use kirchhoff::audit::{check_potential_hypotheses, SampleSpec};
use kirchhoff::functionals::log_space;
use kirchhoff::projection::{lambda_margin, project_to_manifold};
use kirchhoff::shooting::{kirchhoff_rescaling, solve_scalar_field_shooting};
use kirchhoff::solver::{solve_ground_state, SolverOptions};
use kirchhoff::{FiberingScan, Nonlinearity, Potential, ProblemSpec, RadialFunction, RadialGrid};
use serde::Deserialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PotentialSpec {
    Constant { alpha: f64 },
    InversePoly { alpha: f64, beta: f64, sigma: f64 },
    SineDecay { alpha: f64, beta: f64 },
    ExpDecay { alpha: f64, beta: f64, sigma: f64 },
}

impl From<PotentialSpec> for Potential {
    fn from(p: PotentialSpec) -> Self {
        match p {
            PotentialSpec::Constant { alpha } => Potential::Constant { alpha },
            PotentialSpec::InversePoly { alpha, beta, sigma } => {
                Potential::InversePoly { alpha, beta, sigma }
            }
            PotentialSpec::SineDecay { alpha, beta } => Potential::SineDecay { alpha, beta },
            PotentialSpec::ExpDecay { alpha, beta, sigma } => {
                Potential::ExpDecay { alpha, beta, sigma }
            }
        }
    }
}

/// `{"a", "b", "p", "potential": {"kind", ...}}` with a pure-power nonlinearity.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemJson {
    a: f64,
    b: f64,
    p: f64,
    potential: PotentialSpec,
}

fn parse_problem(text: &str) -> Result<ProblemSpec, String> {
    let pj: ProblemJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if !(pj.p > 2.0 && pj.p.is_finite()) {
        return Err(format!("p must exceed 2, got {}", pj.p));
    }
    ProblemSpec::new(
        pj.a,
        pj.b,
        pj.potential.into(),
        Nonlinearity::pure_power(pj.p),
    )
    .map_err(|e| e.to_string())
}

fn grid(r_max: f64, n: usize) -> Result<Arc<RadialGrid>, String> {
    RadialGrid::uniform(r_max, n)
        .map(Arc::new)
        .map_err(|e| e.to_string())
}

/// Fibering map of `amplitude · exp(−(r/width)²)` on a log grid of `points` dilations.
pub fn fibering_curve_json(
    problem: &str,
    amplitude: f64,
    width: f64,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<String, String> {
    let ps = parse_problem(problem)?;
    if !(width > 0.0 && t_min > 0.0 && t_max > t_min && points >= 2) {
        return Err("need width > 0, 0 < t_min < t_max and points >= 2".into());
    }
    let g = grid(12.0 * width, 1201)?;
    let u = RadialFunction::from_fn(g, |r| amplitude * (-(r / width).powi(2)).exp())
        .map_err(|e| e.to_string())?;
    let ts = log_space(t_min, t_max, points);
    let scan = FiberingScan::new(&u, &ps, &ts).map_err(|e| e.to_string())?;
    let projection = project_to_manifold(&u, &ps).ok();
    Ok(json!({
        "t": scan.ts,
        "zeta": scan.zeta,
        "dzeta": scan.dzeta,
        "sign_changes": scan.sign_changes().len(),
        "lambda_margin": lambda_margin(&u, &ps, 1.0),
        "t_u": projection.map(|p| p.t_u),
        "reduced_energy": projection.map(|p| p.reduced_energy),
    })
    .to_string())
}

/// Ground state on `[0, r_max]` with `n` nodes, plus the shooting oracle
/// level for constant potentials.
pub fn ground_state_json(problem: &str, r_max: f64, n: usize) -> Result<String, String> {
    let ps = parse_problem(problem)?;
    let opts = SolverOptions::new(grid(r_max, n)?);
    let r = solve_ground_state(&ps, &opts).map_err(|e| e.to_string())?;
    let oracle = if ps.potential.is_constant() {
        solve_scalar_field_shooting(1.0, ps.v_inf(), &ps.nonlinearity)
            .and_then(|v| kirchhoff_rescaling(&v, ps.a, ps.b))
            .map(|k| k.energy)
            .ok()
    } else {
        None
    };
    Ok(json!({
        "r": r.u_hat.grid().nodes(),
        "u": r.u_hat.values(),
        "m": r.m,
        "m_oracle": oracle,
        "status": r.status,
        "iterations": r.iterations,
        "pohozaev_residual": r.pohozaev_residual,
        "energy_trace": r.trace.iter().map(|row| row.energy).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Hypothesis audit of a potential at gradient coefficient `a`, with `V`
/// sampled for plotting.
pub fn audit_potential_json(potential: &str, a: f64) -> Result<String, String> {
    let spec: PotentialSpec = serde_json::from_str(potential).map_err(|e| e.to_string())?;
    let v: Potential = spec.into();
    let samples = SampleSpec::default();
    let report = check_potential_hypotheses(&v, a, &samples);
    let rs = log_space(1e-2, 1e2, 400);
    let vs: Vec<f64> = rs.iter().map(|&r| v.value(r)).collect();
    Ok(json!({
        "report": report,
        "all_pass": report.all_pass(),
        "r": rs,
        "v": vs,
        "v_inf": v.v_inf(),
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fibering_curve(
    problem: &str,
    amplitude: f64,
    width: f64,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<String, JsError> {
    js(fibering_curve_json(
        problem, amplitude, width, t_min, t_max, points,
    ))
}

#[wasm_bindgen]
pub fn ground_state(problem: &str, r_max: f64, n: usize) -> Result<String, JsError> {
    js(ground_state_json(problem, r_max, n))
}

#[wasm_bindgen]
pub fn audit_potential(potential: &str, a: f64) -> Result<String, JsError> {
    js(audit_potential_json(potential, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const UNIT: &str =
        r#"{"a": 1, "b": 0.25, "p": 4, "potential": {"kind": "constant", "alpha": 1}}"#;

    #[test]
    fn fibering_curve_crosses_once() {
        let v: Value =
            serde_json::from_str(&fibering_curve_json(UNIT, 4.0, 1.0, 1e-3, 1e3, 200).unwrap())
                .unwrap();
        assert_eq!(v["sign_changes"], 1);
        assert!(v["t_u"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn ground_state_matches_oracle() {
        let v: Value =
            serde_json::from_str(&ground_state_json(UNIT, 430.0, 2001).unwrap()).unwrap();
        let (m, o) = (v["m"].as_f64().unwrap(), v["m_oracle"].as_f64().unwrap());
        assert!((m - o).abs() / o < 1e-3);
        assert_eq!(v["status"], "converged");
    }

    #[test]
    fn audit_flags_small_a() {
        let pot = r#"{"kind": "inverse_poly", "alpha": 2, "beta": 1, "sigma": 2}"#;
        let good: Value = serde_json::from_str(&audit_potential_json(pot, 20.0).unwrap()).unwrap();
        let bad: Value = serde_json::from_str(&audit_potential_json(pot, 1.0).unwrap()).unwrap();
        assert_eq!(good["all_pass"], true);
        assert_eq!(bad["all_pass"], false);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(ground_state_json(r#"{"a": 1}"#, 20.0, 801).is_err());
        assert!(fibering_curve_json(UNIT, 4.0, -1.0, 1e-2, 1e2, 10).is_err());
    }
}
