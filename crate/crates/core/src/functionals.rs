//! Energy and Pohozaev functionals, their λ-weighted and limit variants,
//! and the fibering map `ζ(t) = I(u_t)` along dilations.
//!
//! Along the dilation orbit `u_t(x) = u(x/t)` every term is explicit in `t`:
//!
//! ```text
//! I(u_t) = (a t / 2)‖∇u‖² + (t³/2)∫V(t x)u² + (b t²/4)‖∇u‖⁴ − λ t³ ∫F(u)
//! P(u_t) = (a t / 2)‖∇u‖² + (t³/2)∫[3V + ∇V·x](t x)u² + (b t²/2)‖∇u‖⁴ − 3λ t³ ∫F(u)
//! ```
//!
//! so the fibering map is evaluated in closed form; only the rescaled
//! potential term needs a fresh quadrature per `t`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{grad_norm_sq, l2_norm_sq, rescale, RadialFunction, FOUR_PI};
use crate::problem::ProblemSpec;

/// Absolute quadrature tolerance (energy units) at the default grid.
pub const TOL_QUADRATURE: f64 = 1e-6;

/// Which energy the fibering map follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `I` with the variable potential `V`.
    Full,
    /// `I^∞` with `V ≡ V_∞`.
    Limit,
}

/// An energy value with its labeled parts; `total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub total: f64,
    /// `(a/2)‖∇u‖²`
    pub kinetic: f64,
    /// `½∫V u²`
    pub potential: f64,
    /// `(b/4)‖∇u‖⁴`
    pub kirchhoff: f64,
    /// `−λ∫F(u)` (signed)
    pub nonlinear: f64,
}

impl FunctionalValue {
    fn from_parts(kinetic: f64, potential: f64, kirchhoff: f64, nonlinear: f64) -> Self {
        Self {
            total: kinetic + potential + kirchhoff + nonlinear,
            kinetic,
            potential,
            kirchhoff,
            nonlinear,
        }
    }
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if (0.5..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

/// `∫_{R³} F(u) dx`.
pub fn nonlinear_integral(u: &RadialFunction, ps: &ProblemSpec) -> f64 {
    let v = u.values();
    u.grid().volume_integral(|i, _| ps.nonlinearity.F(v[i]))
}

/// The fibering map of one function, with its norms precomputed.
#[derive(Debug, Clone)]
pub struct Fibering<'a> {
    u: &'a RadialFunction,
    ps: &'a ProblemSpec,
    functional: Functional,
    lambda: f64,
    grad: f64,
    mass: f64,
    nonlinear: f64,
}

impl<'a> Fibering<'a> {
    pub fn new(u: &'a RadialFunction, ps: &'a ProblemSpec) -> Self {
        let (mass, grad) = u.norms();
        Self {
            u,
            ps,
            functional: Functional::Full,
            lambda: 1.0,
            grad,
            mass,
            nonlinear: nonlinear_integral(u, ps),
        }
    }

    pub fn with_functional(mut self, functional: Functional) -> Self {
        self.functional = functional;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        self.lambda = lambda;
        Ok(self)
    }

    pub fn function(&self) -> &'a RadialFunction {
        self.u
    }

    pub fn problem(&self) -> &'a ProblemSpec {
        self.ps
    }

    pub fn functional(&self) -> Functional {
        self.functional
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grad_norm_sq(&self) -> f64 {
        self.grad
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.mass
    }

    pub fn nonlinear_integral(&self) -> f64 {
        self.nonlinear
    }

    fn use_limit(&self) -> bool {
        self.functional == Functional::Limit || self.ps.potential.is_constant()
    }

    /// `∫ V(t x) u(x)² dx`.
    pub fn potential_integral(&self, t: f64) -> f64 {
        if self.use_limit() {
            return self.ps.v_inf() * self.mass;
        }
        let v = self.u.values();
        let pot = &self.ps.potential;
        self.u
            .grid()
            .volume_integral(|i, r| pot.value(t * r) * v[i] * v[i])
    }

    /// `∫ [3V + ∇V·x](t x) u(x)² dx`.
    pub fn pohozaev_potential_integral(&self, t: f64) -> f64 {
        if self.use_limit() {
            return 3.0 * self.ps.v_inf() * self.mass;
        }
        let v = self.u.values();
        let pot = &self.ps.potential;
        self.u
            .grid()
            .volume_integral(|i, r| pot.pohozaev_weight(t * r) * v[i] * v[i])
    }

    /// Labeled parts of `I(u_t)`.
    pub fn parts(&self, t: f64) -> FunctionalValue {
        let (a, b) = (self.ps.a, self.ps.b);
        let t3 = t * t * t;
        FunctionalValue::from_parts(
            0.5 * a * t * self.grad,
            0.5 * t3 * self.potential_integral(t),
            0.25 * b * t * t * self.grad * self.grad,
            -self.lambda * t3 * self.nonlinear,
        )
    }

    /// `ζ(t) = I(u_t)`.
    pub fn value(&self, t: f64) -> f64 {
        self.parts(t).total
    }

    fn pohozaev_terms(&self, t: f64) -> [f64; 4] {
        let (a, b) = (self.ps.a, self.ps.b);
        let t3 = t * t * t;
        [
            0.5 * a * t * self.grad,
            0.5 * t3 * self.pohozaev_potential_integral(t),
            0.5 * b * t * t * self.grad * self.grad,
            -3.0 * self.lambda * t3 * self.nonlinear,
        ]
    }

    /// `P(u_t)` in closed form.
    pub fn pohozaev(&self, t: f64) -> f64 {
        self.pohozaev_terms(t).iter().sum()
    }

    /// Largest magnitude among the terms of `P(u_t)`; the scale for
    /// relative Pohozaev tolerances.
    pub fn pohozaev_scale(&self, t: f64) -> f64 {
        self.pohozaev_terms(t)
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `ζ'(t)`, assembled by differentiating each term of `ζ` in `t`.
    pub fn derivative(&self, t: f64) -> f64 {
        let (a, b) = (self.ps.a, self.ps.b);
        let t2 = t * t;
        // d/dt ∫V(t x)u² = (1/t) ∫ (∇V·x)(t x) u²
        let dq = if self.use_limit() {
            0.0
        } else {
            let v = self.u.values();
            let pot = &self.ps.potential;
            self.u
                .grid()
                .volume_integral(|i, r| pot.radial_derivative(t * r) * v[i] * v[i])
                / t
        };
        0.5 * a * self.grad
            + 1.5 * t2 * self.potential_integral(t)
            + 0.5 * t2 * t * dq
            + 0.5 * b * t * self.grad * self.grad
            - 3.0 * self.lambda * t2 * self.nonlinear
    }

    /// Gradient of `u ↦ ζ(t; u)` with respect to the nodal values, `t` fixed.
    ///
    /// The directional derivative along `φ` is `Σ_i g_i φ_i`.
    pub fn nodal_gradient(&self, t: f64) -> Vec<f64> {
        let (a, b) = (self.ps.a, self.ps.b);
        let grid = self.u.grid();
        let v = self.u.values();
        let t3 = t * t * t;

        // ∂G/∂u = 2·4π Dᵀ (w ⊙ D u)
        let du = grid.cell_derivatives(v);
        let weighted: Vec<f64> = du
            .iter()
            .zip(grid.cell_weights())
            .map(|(d, w)| 2.0 * FOUR_PI * w * d)
            .collect();
        let dgrad = grid.cell_derivatives_transpose(&weighted);
        let coeff = 0.5 * a * t + 0.5 * b * t * t * self.grad;

        let limit = self.use_limit();
        let v_inf = self.ps.v_inf();
        let pot = &self.ps.potential;
        let nl = &self.ps.nonlinearity;
        grid.nodes()
            .iter()
            .zip(grid.norm_weights())
            .enumerate()
            .map(|(i, (&r, &w))| {
                let vol = FOUR_PI * w * r * r;
                let vt = if limit { v_inf } else { pot.value(t * r) };
                coeff * dgrad[i] + t3 * vol * vt * v[i] - self.lambda * t3 * vol * nl.f(v[i])
            })
            .collect()
    }
}

/// `I(u)` with its parts.
pub fn energy(u: &RadialFunction, ps: &ProblemSpec) -> FunctionalValue {
    Fibering::new(u, ps).parts(1.0)
}

/// `I^∞(u)`: the energy with `V` replaced by `V_∞`.
pub fn energy_limit(u: &RadialFunction, ps: &ProblemSpec) -> FunctionalValue {
    Fibering::new(u, ps)
        .with_functional(Functional::Limit)
        .parts(1.0)
}

/// `I_λ(u)`, the energy with the nonlinear term weighted by `λ ∈ [1/2, 1]`.
pub fn energy_lambda(u: &RadialFunction, ps: &ProblemSpec, lambda: f64) -> Result<FunctionalValue> {
    Ok(Fibering::new(u, ps).with_lambda(lambda)?.parts(1.0))
}

/// `I_λ^∞(u)`.
pub fn energy_lambda_limit(
    u: &RadialFunction,
    ps: &ProblemSpec,
    lambda: f64,
) -> Result<FunctionalValue> {
    Ok(Fibering::new(u, ps)
        .with_functional(Functional::Limit)
        .with_lambda(lambda)?
        .parts(1.0))
}

/// `P(u) = (a/2)‖∇u‖² + ½∫[3V + ∇V·x]u² + (b/2)‖∇u‖⁴ − 3∫F(u)`.
pub fn pohozaev(u: &RadialFunction, ps: &ProblemSpec) -> f64 {
    Fibering::new(u, ps).pohozaev(1.0)
}

/// `P^∞(u)`, with `3V_∞‖u‖²` in place of the potential term.
pub fn pohozaev_limit(u: &RadialFunction, ps: &ProblemSpec) -> f64 {
    Fibering::new(u, ps)
        .with_functional(Functional::Limit)
        .pohozaev(1.0)
}

pub fn pohozaev_lambda(u: &RadialFunction, ps: &ProblemSpec, lambda: f64) -> Result<f64> {
    Ok(Fibering::new(u, ps).with_lambda(lambda)?.pohozaev(1.0))
}

pub fn pohozaev_lambda_limit(u: &RadialFunction, ps: &ProblemSpec, lambda: f64) -> Result<f64> {
    Ok(Fibering::new(u, ps)
        .with_functional(Functional::Limit)
        .with_lambda(lambda)?
        .pohozaev(1.0))
}

fn check_dilation(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDilation(t))
    }
}

/// `ζ(t) = I(u_t)` in closed form.
pub fn fibering_value(u: &RadialFunction, ps: &ProblemSpec, t: f64) -> Result<f64> {
    check_dilation(t)?;
    Ok(Fibering::new(u, ps).value(t))
}

/// `ζ'(t)`; equals `P(u_t) / t`.
pub fn fibering_derivative(u: &RadialFunction, ps: &ProblemSpec, t: f64) -> Result<f64> {
    check_dilation(t)?;
    Ok(Fibering::new(u, ps).derivative(t))
}

/// Slack in `I(u) ≥ I(u_t) + ((1 − t³)/3) P(u) + (b (1 − t)² (1 + 2t) / 12)‖∇u‖⁴`.
///
/// Nonnegative whenever `V` satisfies the monotonicity hypothesis (V4);
/// for other potentials the value is informational.
pub fn iip_gap(u: &RadialFunction, ps: &ProblemSpec, t: f64) -> Result<f64> {
    check_dilation(t)?;
    Ok(iip_gap_of(&Fibering::new(u, ps), t))
}

pub(crate) fn iip_gap_of(fib: &Fibering<'_>, t: f64) -> f64 {
    let b = fib.problem().b;
    let g = fib.grad_norm_sq();
    let t3 = t * t * t;
    fib.value(1.0)
        - fib.value(t)
        - (1.0 - t3) / 3.0 * fib.pohozaev(1.0)
        - b * (1.0 - t).powi(2) * (1.0 + 2.0 * t) / 12.0 * g * g
}

/// Energy of the resampled dilation, the cross-check for [`fibering_value`].
pub fn fibering_value_resampled(u: &RadialFunction, ps: &ProblemSpec, t: f64) -> Result<f64> {
    Ok(energy(&rescale(u, t)?, ps).total)
}

/// Rows of `(t, ζ(t), ζ'(t), P(u_t), IIP gap)` for one function.
#[derive(Debug, Clone, Serialize)]
pub struct FiberingScan {
    pub ts: Vec<f64>,
    pub zeta: Vec<f64>,
    pub dzeta: Vec<f64>,
    pub pohozaev_of_ut: Vec<f64>,
    pub iip_gap: Vec<f64>,
}

impl FiberingScan {
    pub fn new(u: &RadialFunction, ps: &ProblemSpec, ts: &[f64]) -> Result<Self> {
        ts.iter().try_for_each(|&t| check_dilation(t))?;
        let fib = Fibering::new(u, ps);
        Ok(Self {
            ts: ts.to_vec(),
            zeta: ts.iter().map(|&t| fib.value(t)).collect(),
            dzeta: ts.iter().map(|&t| fib.derivative(t)).collect(),
            pohozaev_of_ut: ts.iter().map(|&t| fib.pohozaev(t)).collect(),
            iip_gap: ts.iter().map(|&t| iip_gap_of(&fib, t)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    /// Indices `k` where `dzeta` changes sign between rows `k` and `k + 1`.
    pub fn sign_changes(&self) -> Vec<usize> {
        sign_changes(&self.dzeta)
    }

    /// CSV with header `t,zeta,dzeta,pohozaev,iip_gap` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,zeta,dzeta,pohozaev,iip_gap\n");
        for k in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(self.ts[k]),
                fmt_f64(self.zeta[k]),
                fmt_f64(self.dzeta[k]),
                fmt_f64(self.pohozaev_of_ut[k]),
                fmt_f64(self.iip_gap[k])
            );
        }
        out
    }
}

pub(crate) fn sign_changes(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] > 0.0 && w[1] <= 0.0) || (w[0] < 0.0 && w[1] >= 0.0))
        .map(|(k, _)| k)
        .collect()
}

/// Seventeen significant digits, the round-trip precision of `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

/// Convenience accessors used by diagnostics.
pub fn norms(u: &RadialFunction) -> (f64, f64) {
    (l2_norm_sq(u), grad_norm_sq(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::problem::{Nonlinearity, Potential};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(20.0, 2001).unwrap())
    }

    fn gaussian(g: &Arc<RadialGrid>, amp: f64) -> RadialFunction {
        RadialFunction::from_fn(Arc::clone(g), |r| amp * (-r * r).exp()).unwrap()
    }

    fn constant_problem(a: f64, b: f64, p: f64) -> ProblemSpec {
        ProblemSpec::new(
            a,
            b,
            Potential::Constant { alpha: 1.0 },
            Nonlinearity::pure_power(p),
        )
        .unwrap()
    }

    fn dip_problem() -> ProblemSpec {
        ProblemSpec::new(
            20.0,
            0.5,
            Potential::InversePoly {
                alpha: 2.0,
                beta: 1.0,
                sigma: 2.0,
            },
            Nonlinearity::pure_power(4.0),
        )
        .unwrap()
    }

    #[test]
    fn zero_function_has_zero_energy() {
        let g = grid();
        let z = RadialFunction::zeros(g);
        let ps = dip_problem();
        let e = energy(&z, &ps);
        assert_eq!(e.total, 0.0);
        assert_eq!([e.kinetic, e.potential, e.kirchhoff, e.nonlinear], [0.0; 4]);
        assert_eq!(energy_limit(&z, &ps).total, 0.0);
        assert_eq!(pohozaev(&z, &ps), 0.0);
        assert_eq!(pohozaev_lambda_limit(&z, &ps, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn parts_sum_to_total() {
        let g = grid();
        let u = gaussian(&g, 2.0);
        let e = energy(&u, &dip_problem());
        assert_eq!(e.total, e.kinetic + e.potential + e.kirchhoff + e.nonlinear);
    }

    #[test]
    fn kirchhoff_part_of_gaussian() {
        let g = grid();
        let u = gaussian(&g, 1.0);
        let ps = constant_problem(1.0, 0.75, 4.0);
        let k = 3.0 * (PI / 2.0).powf(1.5);
        assert_relative_eq!(
            energy(&u, &ps).kirchhoff,
            0.75 / 4.0 * k * k,
            max_relative = 1e-4
        );
    }

    #[test]
    fn energy_minus_limit_is_potential_deficit() {
        let g = grid();
        let u = gaussian(&g, 1.3);
        let ps = dip_problem();
        let diff = energy(&u, &ps).total - energy_limit(&u, &ps).total;
        let v = u.values();
        let expected = -0.5 * g.volume_integral(|i, r| ps.potential.deficit(r) * v[i] * v[i]);
        assert_relative_eq!(diff, expected, max_relative = 1e-10);
    }

    #[test]
    fn constant_potential_collapses_limits() {
        let g = grid();
        let u = gaussian(&g, 1.3);
        let ps = constant_problem(1.0, 1.0, 4.0);
        assert_eq!(energy(&u, &ps).total, energy_limit(&u, &ps).total);
        assert_eq!(pohozaev(&u, &ps), pohozaev_limit(&u, &ps));
    }

    #[test]
    fn limit_energy_matches_trapezoid_requadrature() {
        // Independent route: Simpson weights and explicit derivative of the Gaussian.
        let g = grid();
        let u = gaussian(&g, 1.0);
        let ps = constant_problem(1.0, 1.0, 4.0);
        let grad = g.integrate(|r| 4.0 * PI * (2.0 * r * (-r * r).exp()).powi(2) * r * r);
        let mass = g.integrate(|r| 4.0 * PI * (-2.0 * r * r).exp() * r * r);
        let nl = g.integrate(|r| 4.0 * PI * (-4.0 * r * r).exp() / 4.0 * r * r);
        let expected = 0.5 * grad + 0.5 * mass + 0.25 * grad * grad - nl;
        assert_relative_eq!(energy_limit(&u, &ps).total, expected, max_relative = 1e-6);
    }

    #[test]
    fn lambda_family() {
        let g = grid();
        let u = gaussian(&g, 2.0);
        let ps = dip_problem();
        let n = nonlinear_integral(&u, &ps);
        assert_eq!(energy_lambda(&u, &ps, 1.0).unwrap(), energy(&u, &ps));
        assert_relative_eq!(
            energy_lambda(&u, &ps, 0.5).unwrap().total,
            energy(&u, &ps).total + 0.5 * n,
            max_relative = 1e-12
        );
        let h = 1e-4;
        let slope = (energy_lambda(&u, &ps, 0.75 + h).unwrap().total
            - energy_lambda(&u, &ps, 0.75 - h).unwrap().total)
            / (2.0 * h);
        assert_relative_eq!(slope, -n, max_relative = 1e-8);
        assert!(energy_lambda(&u, &ps, 0.49).is_err());
        assert!(energy_lambda(&u, &ps, 1.01).is_err());
        assert!(pohozaev_lambda(&u, &ps, 0.3).is_err());
        assert!(pohozaev_lambda_limit(&u, &ps, 1.2).is_err());
    }

    #[test]
    fn pohozaev_lambda_reductions() {
        let g = grid();
        let u = gaussian(&g, 2.0);
        let ps = dip_problem();
        assert_eq!(pohozaev_lambda(&u, &ps, 1.0).unwrap(), pohozaev(&u, &ps));
        assert_eq!(
            pohozaev_lambda_limit(&u, &ps, 1.0).unwrap(),
            pohozaev_limit(&u, &ps)
        );
        let p = |l| pohozaev_lambda_limit(&u, &ps, l).unwrap();
        let n = nonlinear_integral(&u, &ps);
        assert_relative_eq!((p(0.75) - p(0.5)) / 0.25, -3.0 * n, max_relative = 1e-10);
        assert_relative_eq!((p(1.0) - p(0.75)) / 0.25, -3.0 * n, max_relative = 1e-10);
    }

    #[test]
    fn pohozaev_is_dilation_derivative() {
        let g = grid();
        let u = gaussian(&g, 2.5);
        let ps = dip_problem();
        let h = 1e-5;
        let fd = (fibering_value(&u, &ps, 1.0 + h).unwrap()
            - fibering_value(&u, &ps, 1.0 - h).unwrap())
            / (2.0 * h);
        assert_relative_eq!(fd, pohozaev(&u, &ps), max_relative = 1e-7);
    }

    #[test]
    fn fibering_matches_resampling() {
        let g = grid();
        let u = gaussian(&g, 2.5);
        let ps = dip_problem();
        assert_eq!(fibering_value(&u, &ps, 1.0).unwrap(), energy(&u, &ps).total);
        for &t in &[0.6, 1.4, 2.0] {
            let closed = fibering_value(&u, &ps, t).unwrap();
            let resampled = fibering_value_resampled(&u, &ps, t).unwrap();
            assert_relative_eq!(closed, resampled, max_relative = 1e-3);
        }
        assert!(fibering_value(&u, &ps, 0.0).is_err());
        assert!(fibering_derivative(&u, &ps, -1.0).is_err());
    }

    #[test]
    fn constant_potential_fibering_is_polynomial() {
        let g = grid();
        let u = gaussian(&g, 2.5);
        let ps = constant_problem(1.0, 0.5, 4.0);
        let (m, k) = u.norms();
        let n = nonlinear_integral(&u, &ps);
        let t: f64 = 2.0;
        let expected = 0.5 * t * k + 0.5 * t.powi(3) * m + 0.125 * t * t * k * k - t.powi(3) * n;
        assert_relative_eq!(
            fibering_value(&u, &ps, t).unwrap(),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn fibering_vanishes_at_small_t() {
        let g = grid();
        let u = gaussian(&g, 2.5);
        let ps = dip_problem();
        let mut prev = f64::INFINITY;
        for k in 1..10 {
            let t = 10f64.powi(-k);
            let z = fibering_value(&u, &ps, t).unwrap().abs();
            assert!(z < prev);
            prev = z;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let g = grid();
        let u = gaussian(&g, 3.0);
        let ps = dip_problem();
        let fib = Fibering::new(&u, &ps);
        let t = 0.7;
        let h = 1e-5;
        let fd = (fib.value(t + h) - fib.value(t - h)) / (2.0 * h);
        assert_relative_eq!(fib.derivative(t), fd, max_relative = 1e-6);
        assert_relative_eq!(t * fib.derivative(t), fib.pohozaev(t), max_relative = 1e-8);
    }

    #[test]
    fn derivative_positive_outside_lambda() {
        let g = grid();
        let u = gaussian(&g, 0.5);
        let ps = constant_problem(1.0, 1.0, 4.0);
        let fib = Fibering::new(&u, &ps);
        for t in log_space(1e-2, 1e2, 64) {
            assert!(fib.derivative(t) > 0.0);
        }
    }

    #[test]
    fn iip_gap_cases() {
        let g = grid();
        let u = gaussian(&g, 2.0);
        let ps = dip_problem();
        assert_eq!(iip_gap(&u, &ps, 1.0).unwrap(), 0.0);
        let cst = constant_problem(1.0, 1.0, 4.0);
        assert!(iip_gap(&u, &cst, 2.0).unwrap() >= -1e-8);

        // b → 0: the Kirchhoff correction is explicit, so the gap is
        // independent of b for a constant potential.
        let oracle = ProblemSpec::oracle_mode(
            1.0,
            0.0,
            Potential::Constant { alpha: 1.0 },
            Nonlinearity::pure_power(4.0),
        )
        .unwrap();
        for &t in &[0.3, 2.0] {
            assert_relative_eq!(
                iip_gap(&u, &cst, t).unwrap(),
                iip_gap(&u, &oracle, t).unwrap(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn nodal_gradient_matches_difference() {
        let g = Arc::new(RadialGrid::uniform(10.0, 201).unwrap());
        let u = gaussian(&g, 2.5);
        let ps = dip_problem();
        let t = 0.9;
        let grad = Fibering::new(&u, &ps).nodal_gradient(t);
        let dir: Vec<f64> = g
            .nodes()
            .iter()
            .map(|r| (-(r - 1.0).powi(2)).exp())
            .collect();
        let eps = 1e-6;
        let plus = u.axpy(eps, &u.with_values(dir.clone()).unwrap()).unwrap();
        let minus = u.axpy(-eps, &u.with_values(dir.clone()).unwrap()).unwrap();
        let fd = (Fibering::new(&plus, &ps).value(t) - Fibering::new(&minus, &ps).value(t))
            / (2.0 * eps);
        let an: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
        assert_relative_eq!(an, fd, max_relative = 1e-6);
    }

    #[test]
    fn scan_csv_layout() {
        let g = grid();
        let u = gaussian(&g, 3.0);
        let ps = constant_problem(1.0, 1.0, 4.0);
        let scan = FiberingScan::new(&u, &ps, &log_space(1e-2, 1e2, 8)).unwrap();
        let csv = scan.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,zeta,dzeta,pohozaev,iip_gap");
        assert_eq!(lines.len(), 9);
        let first: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(first, scan.ts[0]);
        assert_eq!(scan.sign_changes().len(), 1);
    }
}
