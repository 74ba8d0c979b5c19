//! Minimization of the reduced energy `u ↦ max_t I(u_t)` over Λ.
//!
//! The default optimizer is steepest descent in an `H¹`-type metric
//! `S = (a + b‖∇u‖²)K + V M` (tridiagonal stiffness plus lumped mass),
//! with Barzilai–Borwein trial steps and a nonmonotone Armijo test. The
//! metric makes the iteration count insensitive to the mesh width.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::audit::{check_potential_hypotheses, SampleSpec, Verdict};
use crate::error::{Error, Result};
use crate::functionals::{log_space, Functional};
use crate::grid::{rescale, GridScheme, RadialFunction, RadialGrid, FOUR_PI};
use crate::problem::ProblemSpec;
use crate::projection::{project_fibering, project_near, Objective, ProjectionOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Gradient,
    /// Derivative-free coordinate search over Gaussian-mixture amplitudes.
    GaussianMixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    Stalled,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub grid: Arc<RadialGrid>,
    pub objective: Objective,
    pub optimizer: Optimizer,
    pub max_iters: usize,
    /// Stop when the dual gradient norm is below `grad_rtol · max(1, m)`.
    pub grad_rtol: f64,
    pub stall_window: usize,
    /// Relative energy decrease over `stall_window` iterations below which
    /// the run is declared stalled.
    pub stall_rtol: f64,
    /// Starting profile; defaults to the plateau construction.
    pub initial: Option<RadialFunction>,
    /// Orders the coordinate sweeps of the Gaussian-mixture optimizer.
    pub seed: u64,
}

impl SolverOptions {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        Self {
            grid,
            objective: Objective::default(),
            optimizer: Optimizer::Gradient,
            max_iters: 500,
            grad_rtol: 1e-6,
            stall_window: 20,
            stall_rtol: 1e-12,
            initial: None,
            seed: 0,
        }
    }

    pub fn uniform(r_max: f64, n: usize) -> Result<Self> {
        Ok(Self::new(Arc::new(RadialGrid::new(
            r_max,
            n,
            GridScheme::Uniform,
        )?)))
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_initial(mut self, u: RadialFunction) -> Self {
        self.initial = Some(u);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub step: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub u_hat: RadialFunction,
    pub status: Status,
    pub functional: Functional,
    pub lambda: f64,
    /// `I(û)` for the targeted functional.
    pub m: f64,
    pub pohozaev_residual: f64,
    /// `pohozaev_residual` divided by the largest Pohozaev term.
    pub pohozaev_relative: f64,
    pub ode_residual: f64,
    /// `‖∇û‖₂`
    pub grad_norm: f64,
    /// Dual norm of the reduced gradient at the returned iterate.
    pub reduced_gradient_norm: f64,
    pub iterations: usize,
    /// Dilation applied by the last projection (≈ 1 at convergence).
    pub final_dilation: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl SolveResult {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,energy,step,grad_norm\n");
        for row in &self.trace {
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                row.iteration, row.energy, row.step, row.grad_norm
            ));
        }
        s
    }

    pub fn profile_csv(&self) -> String {
        profile_csv(&self.u_hat)
    }
}

/// Two-column `r,u` CSV with 17 significant digits.
pub fn profile_csv(u: &RadialFunction) -> String {
    let mut s = String::from("r,u\n");
    for (r, v) in u.grid().nodes().iter().zip(u.values()) {
        s.push_str(&format!("{r:.16e},{v:.16e}\n"));
    }
    s
}

/// First `s` on the default log scan with `λF(s) > ½V_∞s²`.
pub fn locate_s0(ps: &ProblemSpec, lambda: f64) -> Option<f64> {
    let v_inf = ps.v_inf();
    log_space(1e-2, 1e2, 200)
        .into_iter()
        .find(|&s| lambda * ps.nonlinearity.F(s) > 0.5 * v_inf * s * s)
}

fn lambda_margin_of(u: &RadialFunction, ps: &ProblemSpec, lambda: f64) -> f64 {
    crate::projection::lambda_margin(u, ps, lambda)
}

/// Plateau `s` on `[0, R]` with a linear cut to zero on `[R, R + w]`, with
/// `R` grown geometrically until the profile lies in Λ.
///
/// `w = 1` unless the grid is too coarse to resolve it, in which case the
/// cut spans four mean spacings.
pub fn plateau_initial(
    ps: &ProblemSpec,
    grid: Arc<RadialGrid>,
    lambda: f64,
) -> Result<RadialFunction> {
    let s0 = locate_s0(ps, lambda).ok_or(Error::NoS0)?;
    let v_inf = ps.v_inf();
    let boosted = 1.5 * s0;
    let s = if lambda * ps.nonlinearity.F(boosted) > 0.5 * v_inf * boosted * boosted {
        boosted
    } else {
        s0
    };
    let r_max = grid.r_max();
    let width = (4.0 * r_max / (grid.len() - 1) as f64).max(1.0);
    let mut radius = width;
    let mut margin = f64::NAN;
    while radius + width <= r_max {
        let u = RadialFunction::from_fn(Arc::clone(&grid), |r| {
            if r <= radius {
                s
            } else if r <= radius + width {
                s * (radius + width - r) / width
            } else {
                0.0
            }
        })?;
        margin = lambda_margin_of(&u, ps, lambda);
        if margin < -crate::projection::LAMBDA_MARGIN_TOL {
            return Ok(u);
        }
        radius *= 1.5;
    }
    Err(Error::InitialIterateNotInLambda { margin })
}

// Tridiagonal H¹ metric with the last node held at zero.
struct Metric {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Metric {
    fn new(grid: &RadialGrid, coeff: f64, mass_weight: impl Fn(f64) -> f64) -> Self {
        let nodes = grid.nodes();
        let n = nodes.len() - 1; // free nodes
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        for k in 0..n {
            let (r0, r1) = (nodes[k], nodes[k + 1]);
            let h = r1 - r0;
            let c = coeff * FOUR_PI * (r1.powi(3) - r0.powi(3)) / (3.0 * h * h);
            diag[k] += c;
            if k + 1 < n {
                diag[k + 1] += c;
                off[k] = -c;
            }
        }
        for (k, (w, &r)) in grid.norm_weights().iter().zip(nodes).take(n).enumerate() {
            diag[k] += FOUR_PI * w * r * r * mass_weight(r);
        }
        let lower = off.clone();
        Self {
            lower,
            diag,
            upper: off,
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y = vec![0.0; n + 1];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.upper[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// Thomas algorithm; the returned vector has a zero appended for the
    /// fixed last node.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = self.upper[0] / self.diag[0];
        d[0] = rhs[0] / self.diag[0];
        for i in 1..n {
            let m = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if i + 1 < n {
                c[i] = self.upper[i] / m;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n + 1];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const WIDE_SCAN: ProjectionOptions = ProjectionOptions {
    t_min: 1e-6,
    t_max: 1e6,
    n_scan: 256,
    max_iters: 200,
};

// Reduced energy, its projection and gradient at one iterate.
struct Point {
    u: RadialFunction,
    t: f64,
    energy: f64,
    grad: Vec<f64>,
}

fn evaluate(u: RadialFunction, ps: &ProblemSpec, obj: Objective, t0: Option<f64>) -> Result<Point> {
    let opts = ProjectionOptions::default();
    let fib = obj.fibering(&u, ps)?;
    let proj = match t0 {
        Some(t) => project_near(&fib, t, &opts)?,
        // a crude start may sit far from the manifold: widen the scan once
        None => project_fibering(&fib, &opts).or_else(|e| match e {
            Error::BracketingFailed { .. } => project_fibering(&fib, &WIDE_SCAN),
            e => Err(e),
        })?,
    };
    let grad = fib.nodal_gradient(proj.t_u);
    let (t, energy) = (proj.t_u, proj.reduced_energy);
    Ok(Point { u, t, energy, grad })
}

/// Dilation by `t` when it is far from one, so the profile stays resolved.
fn recenter(p: Point, ps: &ProblemSpec, obj: Objective) -> Result<Point> {
    if (p.t.ln()).abs() < 1.5f64.ln() {
        return Ok(p);
    }
    let u = rescale(&p.u, p.t)?;
    evaluate(u, ps, obj, Some(1.0))
}

fn metric_for(p: &Point, ps: &ProblemSpec, obj: Objective) -> Metric {
    let (_, g) = p.u.norms();
    let t = p.t;
    // Hessian scale of ζ(t; ·): (a t + b t² G) on the gradient part, t³ V(t r) on mass
    let coeff = ps.a * t + ps.b * t * t * g;
    let limit = obj.functional == Functional::Limit;
    let v_inf = ps.v_inf();
    Metric::new(p.u.grid(), coeff, |r| {
        let v = if limit {
            v_inf
        } else {
            ps.potential.value(t * r)
        };
        t * t * t * v.max(1e-3 * v_inf)
    })
}

/// Minimizes the reduced energy; the returned `û` lies on the manifold up
/// to rounding.
pub fn solve_ground_state(ps: &ProblemSpec, opts: &SolverOptions) -> Result<SolveResult> {
    let obj = opts.objective;
    crate::functionals::check_lambda(obj.lambda)?;
    if obj.functional == Functional::Full {
        let rep = check_potential_hypotheses(&ps.potential, ps.a, &SampleSpec::default());
        for name in ["V1", "V2"] {
            if rep.verdict(name) == Some(Verdict::Fail) {
                return Err(Error::Config(format!("potential fails ({name})")));
            }
        }
    }
    let initial = match &opts.initial {
        Some(u) => {
            if !Arc::ptr_eq(u.grid(), &opts.grid) && **u.grid() != *opts.grid {
                return Err(Error::Config(
                    "initial iterate lives on a different grid".into(),
                ));
            }
            u.clone()
        }
        None => plateau_initial(ps, Arc::clone(&opts.grid), obj.lambda)?,
    };
    let margin = lambda_margin_of(&initial, ps, obj.lambda);
    if initial.is_zero() || margin >= -crate::projection::LAMBDA_MARGIN_TOL {
        return Err(Error::InitialIterateNotInLambda { margin });
    }
    let start = evaluate(initial, ps, obj, None)
        .and_then(|p| recenter(p, ps, obj))
        .map_err(|e| attach(e, 0, None))?;

    let (best, status, iterations, trace) = match opts.optimizer {
        Optimizer::Gradient => descend(start, ps, obj, opts)?,
        Optimizer::GaussianMixture => mixture_search(start, ps, obj, opts)?,
    };
    finalize(best, ps, obj, status, iterations, trace)
}

fn attach(e: Error, iteration: usize, u: Option<&RadialFunction>) -> Error {
    match e {
        Error::NotInLambda { .. }
        | Error::BracketingFailed { .. }
        | Error::MultipleCrossings { .. } => Error::ProjectionAtIterate {
            iteration,
            source: Box::new(e),
            iterate: u.map(|u| u.values().to_vec()).unwrap_or_default(),
        },
        other => other,
    }
}

type Descent = (Point, Status, usize, Vec<TraceRow>);

fn dual_norm(p: &Point, metric: &Metric) -> (f64, Vec<f64>) {
    let dir = metric.solve(&p.grad);
    (dot(&p.grad, &dir).max(0.0).sqrt(), dir)
}

fn descend(
    start: Point,
    ps: &ProblemSpec,
    obj: Objective,
    opts: &SolverOptions,
) -> Result<Descent> {
    const ARMIJO: f64 = 1e-4;
    const MEMORY: usize = 5;
    let mut cur = start;
    let mut trace = Vec::new();
    let mut history: Vec<f64> = vec![cur.energy];
    let mut best_energies: Vec<f64> = vec![cur.energy];
    let mut alpha = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (u, grad)
    let mut metric = metric_for(&cur, ps, obj);

    for it in 0..opts.max_iters {
        let (gnorm, dir) = dual_norm(&cur, &metric);
        trace.push(TraceRow {
            iteration: it,
            energy: cur.energy,
            step: if it == 0 { 0.0 } else { alpha },
            grad_norm: gnorm,
        });
        if gnorm <= opts.grad_rtol * cur.energy.abs().max(1.0) {
            return Ok((cur, Status::Converged, it, trace));
        }
        if it >= opts.stall_window {
            let old = best_energies[it - opts.stall_window];
            let now = best_energies[it];
            if old - now < opts.stall_rtol * now.abs().max(1.0) {
                return Ok((cur, Status::Stalled, it, trace));
            }
        }

        // Barzilai–Borwein step in the metric S: sᵀSs / sᵀy.
        if let Some((u_prev, g_prev)) = &prev {
            let s: Vec<f64> = cur
                .u
                .values()
                .iter()
                .zip(u_prev)
                .map(|(a, b)| a - b)
                .collect();
            let y: Vec<f64> = cur.grad.iter().zip(g_prev).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            let ss = dot(&s, &metric.apply(&s));
            alpha = if sy > 0.0 {
                (ss / sy).clamp(1e-6, 1e6)
            } else {
                (alpha * 2.0).min(1e6)
            };
        }
        let slope = -gnorm * gnorm; // gᵀd with d = −S⁻¹g
        let reference = history
            .iter()
            .rev()
            .take(MEMORY)
            .fold(f64::NEG_INFINITY, |m, &e| m.max(e));

        let mut accepted = None;
        for _ in 0..60 {
            let vals: Vec<f64> = cur
                .u
                .values()
                .iter()
                .zip(&dir)
                .map(|(u, d)| u - alpha * d)
                .collect();
            let trial = cur.u.with_values(vals)?;
            match evaluate(trial, ps, obj, Some(cur.t)) {
                Ok(p) if p.energy <= reference + ARMIJO * alpha * slope => {
                    accepted = Some(p);
                    break;
                }
                // rejected: insufficient decrease or the step left Λ
                _ => alpha *= 0.5,
            }
        }
        let next = match accepted {
            Some(p) => recenter(p, ps, obj).map_err(|e| attach(e, it + 1, None))?,
            None => return Ok((cur, Status::Stalled, it, trace)),
        };
        prev = Some((cur.u.values().to_vec(), cur.grad.clone()));
        cur = next;
        metric = metric_for(&cur, ps, obj);
        history.push(cur.energy);
        let b = best_energies
            .last()
            .copied()
            .unwrap_or(f64::INFINITY)
            .min(cur.energy);
        best_energies.push(b);
    }
    let (gnorm, _) = dual_norm(&cur, &metric);
    trace.push(TraceRow {
        iteration: opts.max_iters,
        energy: cur.energy,
        step: alpha,
        grad_norm: gnorm,
    });
    let status = if gnorm <= opts.grad_rtol * cur.energy.abs().max(1.0) {
        Status::Converged
    } else {
        Status::MaxIters
    };
    Ok((cur, status, opts.max_iters, trace))
}

fn mixture_search(
    start: Point,
    ps: &ProblemSpec,
    obj: Objective,
    opts: &SolverOptions,
) -> Result<Descent> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let grid = Arc::clone(start.u.grid());
    let nodes = grid.nodes().to_vec();
    // widths from the grid spacing up to a quarter of the domain
    let k = 10;
    let w_lo = (4.0 * nodes[1]).max(grid.r_max() / 400.0);
    let w_hi = grid.r_max() / 4.0;
    let widths = log_space(w_lo, w_hi, k);
    let build = |c: &[f64]| -> Result<RadialFunction> {
        RadialFunction::from_fn(Arc::clone(&grid), |r| {
            c.iter()
                .zip(&widths)
                .map(|(ci, w)| ci * (-(r / w).powi(2)).exp())
                .sum()
        })
    };
    // seed: the best single Gaussian, amplitude raised from the start's peak
    // until it lies in Λ
    let mut peak = start.u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut c = vec![0.0; k];
    let mut best: Option<(Vec<f64>, Point)> = None;
    for _ in 0..8 {
        for j in 0..k {
            let mut trial = vec![0.0; k];
            trial[j] = peak;
            if let Ok(p) = build(&trial).and_then(|u| evaluate(u, ps, obj, None)) {
                if best.as_ref().is_none_or(|(_, b)| p.energy < b.energy) {
                    best = Some((trial, p));
                }
            }
        }
        if best.is_some() {
            break;
        }
        peak *= 1.5;
    }
    let (c0, mut cur) = match best {
        Some(b) => b,
        None => return Ok((start, Status::Stalled, 0, Vec::new())),
    };
    c.copy_from_slice(&c0);
    let mut delta = vec![0.25 * peak; k];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..k).collect();
    let mut trace = Vec::new();
    for it in 0..opts.max_iters {
        trace.push(TraceRow {
            iteration: it,
            energy: cur.energy,
            step: delta.iter().fold(0.0f64, |m, d| m.max(*d)),
            grad_norm: f64::NAN,
        });
        order.shuffle(&mut rng);
        for &j in &order {
            let mut improved = false;
            for sign in [1.0, -1.0] {
                let mut trial = c.clone();
                trial[j] += sign * delta[j];
                if let Ok(p) = build(&trial).and_then(|u| evaluate(u, ps, obj, Some(cur.t))) {
                    if p.energy < cur.energy {
                        c = trial;
                        cur = p;
                        improved = true;
                        break;
                    }
                }
            }
            if improved {
                delta[j] *= 1.5;
            } else {
                delta[j] *= 0.5;
            }
        }
        let scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if delta.iter().all(|d| *d < 1e-10 * scale) {
            return Ok((cur, Status::Converged, it + 1, trace));
        }
    }
    Ok((cur, Status::MaxIters, opts.max_iters, trace))
}

fn finalize(
    best: Point,
    ps: &ProblemSpec,
    obj: Objective,
    status: Status,
    iterations: usize,
    trace: Vec<TraceRow>,
) -> Result<SolveResult> {
    // Move onto the manifold; resampling perturbs P slightly, so repeat.
    let mut u = best.u;
    let mut t = best.t;
    let mut last_t = t;
    for _ in 0..6 {
        if t != 1.0 {
            u = rescale(&u, t)?;
        }
        let fib = obj.fibering(&u, ps)?;
        let proj = project_near(&fib, 1.0, &ProjectionOptions::default())?;
        last_t = proj.t_u;
        t = proj.t_u;
        if (t - 1.0).abs() <= 4.0 * f64::EPSILON {
            break;
        }
    }
    let fib = obj.fibering(&u, ps)?;
    let m = fib.value(1.0);
    let p = fib.pohozaev(1.0);
    let scale = fib.pohozaev_scale(1.0);
    let grad = fib.nodal_gradient(1.0);
    let point = Point {
        u: u.clone(),
        t: 1.0,
        energy: m,
        grad,
    };
    let metric = metric_for(&point, ps, obj);
    let (gnorm, _) = dual_norm(&point, &metric);
    let ode = ode_residual_with(&u, ps, obj);
    let (_, g) = u.norms();
    let status = match status {
        Status::Converged if p.abs() > 1e-6 => Status::MaxIters,
        s => s,
    };
    Ok(SolveResult {
        u_hat: u,
        status,
        functional: obj.functional,
        lambda: obj.lambda,
        m,
        pohozaev_residual: p.abs(),
        pohozaev_relative: p.abs() / scale.max(f64::MIN_POSITIVE),
        ode_residual: ode,
        grad_norm: g.sqrt(),
        reduced_gradient_norm: gnorm,
        iterations,
        final_dilation: last_t,
        trace,
    })
}

/// `(u'(r_i), u''(r_i))` by finite differences: sixth order at interior
/// nodes of a uniform grid (even reflection at the origin), lower order
/// next to `r_max`, three-point formulas on graded grids.
fn nodal_derivatives(u: &RadialFunction) -> (Vec<f64>, Vec<f64>) {
    let grid = u.grid();
    let r = grid.nodes();
    let v = u.values();
    let n = v.len();
    let at = |j: isize| v[j.unsigned_abs()];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    match grid.scheme() {
        GridScheme::Uniform => {
            let h = r[1] - r[0];
            for i in 0..n {
                let j = i as isize;
                if i + 3 < n {
                    d1[i] = (-at(j - 3) + 9.0 * at(j - 2) - 45.0 * at(j - 1) + 45.0 * at(j + 1)
                        - 9.0 * at(j + 2)
                        + at(j + 3))
                        / (60.0 * h);
                    d2[i] = (2.0 * at(j - 3) - 27.0 * at(j - 2) + 270.0 * at(j - 1)
                        - 490.0 * at(j)
                        + 270.0 * at(j + 1)
                        - 27.0 * at(j + 2)
                        + 2.0 * at(j + 3))
                        / (180.0 * h * h);
                } else if i + 2 < n {
                    d1[i] =
                        (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h);
                    d2[i] = (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1)
                        - at(j + 2))
                        / (12.0 * h * h);
                } else if i + 1 < n {
                    d1[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
                    d2[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
                }
            }
        }
        GridScheme::Graded => {
            for i in 1..n - 1 {
                let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
                d1[i] = (-hp / (hm * (hm + hp))) * v[i - 1]
                    + ((hp - hm) / (hm * hp)) * v[i]
                    + (hm / (hp * (hm + hp))) * v[i + 1];
                d2[i] = 2.0
                    * (v[i - 1] / (hm * (hm + hp)) - v[i] / (hm * hp)
                        + v[i + 1] / (hp * (hm + hp)));
            }
            let h = r[1];
            d2[0] = 2.0 * (v[1] - v[0]) / (h * h);
        }
    }
    (d1, d2)
}

fn ode_residual_with(u: &RadialFunction, ps: &ProblemSpec, obj: Objective) -> f64 {
    let grid = u.grid();
    let r = grid.nodes();
    let v = u.values();
    let n = v.len();
    let (_, g) = u.norms();
    let coeff = ps.a + ps.b * g;
    let (d1, d2) = nodal_derivatives(u);
    let limit = obj.functional == Functional::Limit;
    let w = grid.weights();
    let mut acc = 0.0;
    for i in 1..n - 1 {
        let lap = d2[i] + 2.0 * d1[i] / r[i];
        let pot = if limit {
            ps.v_inf()
        } else {
            ps.potential.value(r[i])
        };
        let res = -coeff * lap + pot * v[i] - obj.lambda * ps.nonlinearity.f(v[i]);
        acc += w[i] * res * res;
    }
    acc.sqrt()
}

/// Quadrature-weighted `L²(dr)` norm over interior nodes of
/// `−(a + b‖∇u‖²)(u'' + 2u'/r) + V u − f(u)`.
pub fn ode_residual(u: &RadialFunction, ps: &ProblemSpec) -> f64 {
    ode_residual_with(u, ps, Objective::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Nonlinearity, Potential};

    #[test]
    fn metric_solve_inverts_apply() {
        let g = RadialGrid::uniform(10.0, 101).unwrap();
        let m = Metric::new(&g, 2.0, |_| 1.0);
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = m.apply(&x);
        let back = m.solve(&y[..100]);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(back[100], 0.0);
    }

    #[test]
    fn residual_of_zero_and_gaussian() {
        let g = Arc::new(RadialGrid::uniform(20.0, 2001).unwrap());
        let ps = ProblemSpec::new(
            1.0,
            1.0,
            Potential::Constant { alpha: 1.0 },
            Nonlinearity::pure_power(4.0),
        )
        .unwrap();
        assert_eq!(
            ode_residual(&RadialFunction::zeros(Arc::clone(&g)), &ps),
            0.0
        );
        let u = RadialFunction::from_fn(g, |r| 2.0 * (-r * r).exp()).unwrap();
        assert!(ode_residual(&u, &ps) > 1e-2);
    }

    #[test]
    fn plateau_is_in_lambda() {
        let g = Arc::new(RadialGrid::uniform(40.0, 801).unwrap());
        let ps = ProblemSpec::new(
            1.0,
            1.0,
            Potential::Constant { alpha: 1.0 },
            Nonlinearity::pure_power(4.0),
        )
        .unwrap();
        let u = plateau_initial(&ps, g, 1.0).unwrap();
        assert!(crate::projection::in_lambda_set(&u, &ps));
    }
}
