//! Λ-membership, projection onto the Pohozaev manifold along the dilation
//! orbit, and the reduced energy `u ↦ max_t I(u_t)` with its gradient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{check_lambda, log_space, sign_changes, Fibering, Functional};
use crate::grid::RadialFunction;
use crate::problem::ProblemSpec;

/// Margins within this distance of zero count as outside Λ.
pub const LAMBDA_MARGIN_TOL: f64 = 1e-10;

/// Relative tolerance on `P(u_{t_u})`.
pub const PROJECTION_RTOL: f64 = 1e-9;

/// Which functional and λ weight a projection or solve targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Objective {
    pub functional: Functional,
    pub lambda: f64,
}

impl Default for Objective {
    fn default() -> Self {
        Self {
            functional: Functional::Full,
            lambda: 1.0,
        }
    }
}

impl Objective {
    pub fn limit() -> Self {
        Self {
            functional: Functional::Limit,
            lambda: 1.0,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn fibering<'a>(&self, u: &'a RadialFunction, ps: &'a ProblemSpec) -> Result<Fibering<'a>> {
        Fibering::new(u, ps)
            .with_functional(self.functional)
            .with_lambda(self.lambda)
    }
}

/// `∫[½V_∞u² − λF(u)]`; negative inside Λ.
pub fn lambda_margin(u: &RadialFunction, ps: &ProblemSpec, lambda: f64) -> f64 {
    let (mass, _) = u.norms();
    0.5 * ps.v_inf() * mass - lambda * crate::functionals::nonlinear_integral(u, ps)
}

fn margin_of(fib: &Fibering<'_>) -> f64 {
    0.5 * fib.problem().v_inf() * fib.l2_norm_sq() - fib.lambda() * fib.nonlinear_integral()
}

fn is_member(margin: f64) -> bool {
    margin < -LAMBDA_MARGIN_TOL
}

/// `u ∈ Λ`: `u ≠ 0` and `∫[½V_∞u² − F(u)] < 0` by more than [`LAMBDA_MARGIN_TOL`].
pub fn in_lambda_set(u: &RadialFunction, ps: &ProblemSpec) -> bool {
    !u.is_zero() && is_member(lambda_margin(u, ps, 1.0))
}

/// `in_lambda_set` for the λ-weighted nonlinearity.
pub fn in_lambda_set_weighted(u: &RadialFunction, ps: &ProblemSpec, lambda: f64) -> Result<bool> {
    check_lambda(lambda)?;
    Ok(!u.is_zero() && is_member(lambda_margin(u, ps, lambda)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionOptions {
    pub t_min: f64,
    pub t_max: f64,
    pub n_scan: usize,
    pub max_iters: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            t_min: 1e-2,
            t_max: 1e2,
            n_scan: 64,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub t_u: f64,
    pub reduced_energy: f64,
    pub pohozaev_residual: f64,
    /// Largest term of `P(u_{t_u})`, the scale of the residual tolerance.
    pub pohozaev_scale: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

impl ProjectionResult {
    pub fn relative_residual(&self) -> f64 {
        self.pohozaev_residual / self.pohozaev_scale.max(1.0)
    }
}

/// Projects `u ∈ Λ` onto the manifold: the unique `t_u` with `P(u_{t_u}) = 0`.
pub fn project_to_manifold(u: &RadialFunction, ps: &ProblemSpec) -> Result<ProjectionResult> {
    project_with(u, ps, Objective::default(), &ProjectionOptions::default())
}

pub fn project_with(
    u: &RadialFunction,
    ps: &ProblemSpec,
    objective: Objective,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    project_fibering(&objective.fibering(u, ps)?, opts)
}

/// Full scan over `[t_min, t_max]`, then bracketed refinement.
pub fn project_fibering(fib: &Fibering<'_>, opts: &ProjectionOptions) -> Result<ProjectionResult> {
    let margin = margin_of(fib);
    if fib.function().is_zero() || !is_member(margin) {
        return Err(Error::NotInLambda { margin });
    }
    let ts = log_space(opts.t_min, opts.t_max, opts.n_scan);
    let ps_vals: Vec<f64> = ts.iter().map(|&t| fib.pohozaev(t)).collect();
    let changes = sign_changes(&ps_vals);
    match changes.len() {
        0 => Err(Error::BracketingFailed {
            t_min: opts.t_min,
            t_max: opts.t_max,
            scan: ts.iter().zip(&ps_vals).map(|(&t, &p)| (t, p / t)).collect(),
        }),
        1 => {
            let k = changes[0];
            refine(
                fib,
                ts[k],
                ts[k + 1],
                ps_vals[k],
                ps_vals[k + 1],
                opts.max_iters,
            )
        }
        _ => Err(Error::MultipleCrossings {
            crossings: changes
                .iter()
                .map(|&k| (ts[k] * ts[k + 1]).sqrt())
                .collect(),
        }),
    }
}

/// Projection from a guess `t0`, bracketing by geometric expansion.
///
/// Skips the full uniqueness scan; meant for iterates already close to the
/// manifold, where the crossing is known to be unique.
pub fn project_near(
    fib: &Fibering<'_>,
    t0: f64,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    let margin = margin_of(fib);
    if fib.function().is_zero() || !is_member(margin) {
        return Err(Error::NotInLambda { margin });
    }
    let p0 = fib.pohozaev(t0);
    if p0 == 0.0 {
        return Ok(finish(fib, t0, (t0, t0), 0));
    }
    // P(u_t) > 0 left of the root, < 0 right of it.
    let dir = if p0 > 0.0 { 1.02 } else { 1.0 / 1.02 };
    let mut factor = dir;
    let (mut t_prev, mut p_prev) = (t0, p0);
    loop {
        let t = t0 * factor;
        if t < opts.t_min || t > opts.t_max {
            return project_fibering(fib, opts);
        }
        let p = fib.pohozaev(t);
        if p.signum() != p0.signum() {
            let (lo, hi, plo, phi) = if t > t_prev {
                (t_prev, t, p_prev, p)
            } else {
                (t, t_prev, p, p_prev)
            };
            return refine(fib, lo, hi, plo, phi, opts.max_iters);
        }
        t_prev = t;
        p_prev = p;
        factor *= factor;
    }
}

// Illinois-modified regula falsi with bisection fallback, run until the
// bracket collapses to rounding level.
fn refine(
    fib: &Fibering<'_>,
    lo: f64,
    hi: f64,
    p_lo: f64,
    p_hi: f64,
    max_iters: usize,
) -> Result<ProjectionResult> {
    let bracket = (lo, hi);
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, p_lo, p_hi);
    let mut side = 0i8;
    let mut iterations = 0;
    let scale = fib.pohozaev_scale(lo).max(fib.pohozaev_scale(hi));
    if fa == 0.0 {
        return Ok(finish(fib, a, bracket, 0));
    }
    if fb == 0.0 {
        return Ok(finish(fib, b, bracket, 0));
    }
    while iterations < max_iters {
        iterations += 1;
        let width = b - a;
        let mut c = b - fb * width / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        if c <= a || c >= b {
            break;
        }
        let fc = fib.pohozaev(c);
        if fc.abs() <= 2.0 * f64::EPSILON * scale {
            return Ok(finish(fib, c, bracket, iterations));
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if b - a <= 4.0 * f64::EPSILON * b {
            break;
        }
    }
    // pick the endpoint with the smaller true residual
    let (ra, rb) = (fib.pohozaev(a).abs(), fib.pohozaev(b).abs());
    let t = if ra <= rb { a } else { b };
    Ok(finish(fib, t, bracket, iterations))
}

fn finish(fib: &Fibering<'_>, t: f64, bracket: (f64, f64), iterations: usize) -> ProjectionResult {
    ProjectionResult {
        t_u: t,
        reduced_energy: fib.value(t),
        pohozaev_residual: fib.pohozaev(t).abs(),
        pohozaev_scale: fib.pohozaev_scale(t),
        bracket,
        iterations,
    }
}

/// `max_{t>0} I(u_t) = I(u_{t_u})`.
pub fn reduced_energy(u: &RadialFunction, ps: &ProblemSpec) -> Result<f64> {
    Ok(project_to_manifold(u, ps)?.reduced_energy)
}

/// Gradient of `u ↦ I(u_{t_u(u)})` with respect to the nodal values.
///
/// Since `∂_t I(u_t)` vanishes at `t_u`, the envelope rule gives the partial
/// derivative at fixed `t_u`. The directional derivative along `φ` is
/// `Σ_i g_i φ_i`.
pub fn reduced_gradient(u: &RadialFunction, ps: &ProblemSpec) -> Result<RadialFunction> {
    let fib = Fibering::new(u, ps);
    let proj = project_fibering(&fib, &ProjectionOptions::default())?;
    u.with_values(fib.nodal_gradient(proj.t_u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{rescale, RadialGrid};
    use crate::problem::{Nonlinearity, Potential};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(20.0, 2001).unwrap())
    }

    fn gaussian(g: &Arc<RadialGrid>, amp: f64) -> RadialFunction {
        RadialFunction::from_fn(Arc::clone(g), |r| amp * (-r * r).exp()).unwrap()
    }

    fn unit_problem() -> ProblemSpec {
        ProblemSpec::new(
            1.0,
            1.0,
            Potential::Constant { alpha: 1.0 },
            Nonlinearity::pure_power(4.0),
        )
        .unwrap()
    }

    #[test]
    fn zero_and_small_are_outside() {
        let g = grid();
        let ps = unit_problem();
        assert!(!in_lambda_set(&RadialFunction::zeros(Arc::clone(&g)), &ps));
        assert!(!in_lambda_set(&gaussian(&g, 0.1), &ps));
        assert!(in_lambda_set(&gaussian(&g, 3.0), &ps));
        assert!(matches!(
            project_to_manifold(&gaussian(&g, 0.1), &ps),
            Err(Error::NotInLambda { .. })
        ));
    }

    #[test]
    fn projection_hits_manifold() {
        let g = grid();
        // small b keeps t_u near 2, so the dilated profile fits the grid
        let ps = ProblemSpec::new(
            1.0,
            0.01,
            Potential::Constant { alpha: 1.0 },
            Nonlinearity::pure_power(4.0),
        )
        .unwrap();
        let u = gaussian(&g, 3.0);
        let p = project_to_manifold(&u, &ps).unwrap();
        assert!(p.bracket.0 < p.t_u && p.t_u < p.bracket.1);
        assert!(p.relative_residual() <= PROJECTION_RTOL);
        let again = project_to_manifold(&rescale(&u, p.t_u).unwrap(), &ps).unwrap();
        assert_relative_eq!(again.t_u, 1.0, max_relative = 1e-3);
    }

    #[test]
    fn project_near_agrees_with_scan() {
        let g = grid();
        let ps = unit_problem();
        let u = gaussian(&g, 3.0);
        let fib = Fibering::new(&u, &ps);
        let full = project_fibering(&fib, &ProjectionOptions::default()).unwrap();
        for t0 in [0.3, 1.0, 5.0] {
            let near = project_near(&fib, t0, &ProjectionOptions::default()).unwrap();
            assert_relative_eq!(near.t_u, full.t_u, max_relative = 1e-12);
        }
    }

    #[test]
    fn reduced_gradient_matches_difference() {
        let g = Arc::new(RadialGrid::uniform(12.0, 601).unwrap());
        let ps = ProblemSpec::new(
            20.0,
            0.5,
            Potential::InversePoly {
                alpha: 2.0,
                beta: 1.0,
                sigma: 2.0,
            },
            Nonlinearity::pure_power(4.0),
        )
        .unwrap();
        let u = RadialFunction::from_fn(Arc::clone(&g), |r| 4.0 * (-r * r / 4.0).exp()).unwrap();
        let grad = reduced_gradient(&u, &ps).unwrap();
        let phi = u
            .with_values(
                g.nodes()
                    .iter()
                    .map(|r| (r * 0.7).cos() * (-r * r / 9.0).exp())
                    .collect(),
            )
            .unwrap();
        let eps = 1e-5;
        let e = |s: f64| reduced_energy(&u.axpy(s, &phi).unwrap(), &ps).unwrap();
        let fd = (e(eps) - e(-eps)) / (2.0 * eps);
        let an: f64 = grad
            .values()
            .iter()
            .zip(phi.values())
            .map(|(a, b)| a * b)
            .sum();
        assert_relative_eq!(an, fd, max_relative = 1e-6);
    }
}
