//! λ-family diagnostics: limit ground-state levels `m_λ^∞` and upper bounds
//! on the mountain-pass level `c_λ` along dilation paths.

use serde::Serialize;

use crate::audit::golden_max;
use crate::error::{Error, Result};
use crate::functionals::{check_lambda, log_space, Fibering};
use crate::grid::RadialFunction;
use crate::problem::ProblemSpec;
use crate::projection::{in_lambda_set_weighted, Objective};
use crate::solver::{solve_ground_state, SolveResult, SolverOptions};

pub const T_START: f64 = 2.0;
pub const T_MAX: f64 = 64.0;

/// Maximum of `I_λ` along the path `t ↦ seed_{tT}`, `t ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathBound {
    pub lambda: f64,
    /// Endpoint dilation with `I_λ(seed_T) < 0`.
    pub t_end: f64,
    /// Dilation `s = tT` attaining the maximum.
    pub s_max: f64,
    pub bound: f64,
}

/// Upper bound on `c_λ` from the dilation path through `seed`.
pub fn mountain_pass_upper_bound(
    ps: &ProblemSpec,
    lambda: f64,
    seed: &RadialFunction,
) -> Result<f64> {
    Ok(dilation_path_bound(ps, lambda, seed)?.bound)
}

pub fn dilation_path_bound(
    ps: &ProblemSpec,
    lambda: f64,
    seed: &RadialFunction,
) -> Result<PathBound> {
    check_lambda(lambda)?;
    if !in_lambda_set_weighted(seed, ps, lambda)? {
        return Err(Error::NotInLambda {
            margin: crate::projection::lambda_margin(seed, ps, lambda),
        });
    }
    let fib = Fibering::new(seed, ps).with_lambda(lambda)?;
    let mut t_end = T_START;
    while fib.value(t_end) >= 0.0 {
        t_end *= 2.0;
        if t_end > T_MAX {
            return Err(Error::TNotFound { t_max: T_MAX });
        }
    }
    // scan s ∈ (0, T], then refine around the best sample
    let ss = log_space(1e-4 * t_end, t_end, 400);
    let vals: Vec<f64> = ss.iter().map(|&s| fib.value(s)).collect();
    let k = vals
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > vals[b] { i } else { b });
    let lo = ss[k.saturating_sub(1)];
    let hi = ss[(k + 1).min(ss.len() - 1)];
    let (s_max, bound) = golden_max(|s| fib.value(s), lo, hi);
    let (s_max, bound) = if vals[k] > bound {
        (ss[k], vals[k])
    } else {
        (s_max, bound)
    };
    Ok(PathBound {
        lambda,
        t_end,
        s_max,
        bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaSweep {
    pub lambdas: Vec<f64>,
    /// `m_λ^∞`; `None` where the solve failed.
    pub m_inf_values: Vec<Option<f64>>,
    /// Path bound on `c_λ` seeded with the λ's own limit ground state.
    pub c_upper_values: Vec<Option<f64>>,
    /// Path bound on `c_λ` seeded with the limit ground state at the
    /// largest λ, a single path shared by every entry.
    pub c_upper_shared_values: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
    #[serde(skip)]
    pub solutions: Vec<Option<SolveResult>>,
}

impl LambdaSweep {
    /// `m_λ^∞ − c_λ` upper-bound margins; positive means a strict gap.
    pub fn gaps(&self) -> Vec<Option<f64>> {
        self.m_inf_values
            .iter()
            .zip(&self.c_upper_values)
            .map(|(m, c)| Some((*m)? - (*c)?))
            .collect()
    }

    /// λ values where the strict gap is observed.
    pub fn gap_range(&self) -> Vec<f64> {
        self.lambdas
            .iter()
            .zip(self.gaps())
            .filter(|(_, g)| g.is_some_and(|g| g > 0.0))
            .map(|(l, _)| *l)
            .collect()
    }

    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        let vals: Vec<f64> = self.m_inf_values.iter().flatten().copied().collect();
        vals.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: &Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mut s = String::from("lambda,m_inf,c_upper,c_upper_shared,error\n");
        for i in 0..self.lambdas.len() {
            s.push_str(&format!(
                "{:.16e},{},{},{},{}\n",
                self.lambdas[i],
                cell(&self.m_inf_values[i]),
                cell(&self.c_upper_values[i]),
                cell(&self.c_upper_shared_values[i]),
                self.errors[i]
                    .as_deref()
                    .unwrap_or("")
                    .replace([',', '\n'], ";")
            ));
        }
        s
    }
}

/// `m_λ^∞` for increasing `lambdas`, each solve warm-started from the
/// previous λ's solution, with path bounds on `c_λ` for the full problem.
pub fn lambda_sweep(
    ps: &ProblemSpec,
    lambdas: &[f64],
    opts: &SolverOptions,
) -> Result<LambdaSweep> {
    if !lambdas.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Config("lambdas must be strictly increasing".into()));
    }
    lambdas.iter().try_for_each(|&l| check_lambda(l))?;

    let mut solutions: Vec<Option<SolveResult>> = Vec::with_capacity(lambdas.len());
    let mut errors = Vec::with_capacity(lambdas.len());
    let mut warm: Option<RadialFunction> = opts.initial.clone();
    for &lambda in lambdas {
        let mut o = opts
            .clone()
            .with_objective(Objective::limit().with_lambda(lambda));
        o.initial = warm.clone();
        match solve_ground_state(ps, &o) {
            Ok(r) => {
                warm = Some(r.u_hat.clone());
                solutions.push(Some(r));
                errors.push(None);
            }
            Err(e) => {
                solutions.push(None);
                errors.push(Some(e.to_string()));
            }
        }
    }

    let m_inf_values = solutions.iter().map(|s| s.as_ref().map(|r| r.m)).collect();
    let c_upper_values = lambdas
        .iter()
        .zip(&solutions)
        .map(|(&l, s)| {
            s.as_ref()
                .and_then(|r| mountain_pass_upper_bound(ps, l, &r.u_hat).ok())
        })
        .collect();
    let shared_seed = solutions
        .iter()
        .rev()
        .flatten()
        .next()
        .map(|r| r.u_hat.clone());
    let c_upper_shared_values = lambdas
        .iter()
        .map(|&l| {
            shared_seed
                .as_ref()
                .and_then(|seed| mountain_pass_upper_bound(ps, l, seed).ok())
        })
        .collect();
    Ok(LambdaSweep {
        lambdas: lambdas.to_vec(),
        m_inf_values,
        c_upper_values,
        c_upper_shared_values,
        errors,
        solutions,
    })
}
