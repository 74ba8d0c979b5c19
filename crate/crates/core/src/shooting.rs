//! Radial shooting for the scalar field equation `−a_eff Δv + V_∞ v = f(v)`
//! and the dilation that maps its solutions to constant-potential
//! Kirchhoff solutions.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid, FOUR_PI};
use crate::problem::Nonlinearity;

/// Relative separation of the bracketing trajectories at which the
/// integrated profile is replaced by its linear tail.
const SPLICE_RTOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fate {
    /// `v` turned upward while positive: initial value too small.
    Undershoot,
    /// `v` crossed zero: initial value too large.
    Overshoot,
}

struct Trajectory {
    v: Vec<f64>,
    w: Vec<f64>,
    fate: Fate,
}

/// Positive radial solution of the scalar field equation, stored on the
/// shooting mesh with its derivative and continued by `C e^{−κr}/r`.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarFieldSolution {
    pub a_eff: f64,
    pub v_inf: f64,
    /// Shooting parameter `v(0)`.
    pub v0: f64,
    /// Far-field decay rate `√(V_∞ / a_eff)`.
    pub kappa: f64,
    pub r_splice: f64,
    pub bisection_steps: usize,
    #[serde(skip)]
    h: f64,
    #[serde(skip)]
    v: Vec<f64>,
    #[serde(skip)]
    w: Vec<f64>,
    /// `‖v‖₂²`
    pub mass: f64,
    /// `‖∇v‖₂²`
    pub grad: f64,
    /// `∫F(v)`
    pub nonlinear: f64,
}

impl ScalarFieldSolution {
    fn tail(&self, r: f64) -> (f64, f64) {
        let rs = self.r_splice;
        let c = self.v[self.v.len() - 1] * rs;
        let e = (-self.kappa * (r - rs)).exp();
        let v = c * e / r;
        (v, -v * (self.kappa + 1.0 / r))
    }

    /// `(v(r), v'(r))`, cubic Hermite on the shooting mesh.
    pub fn eval_with_derivative(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        if r >= self.r_splice {
            return self.tail(r);
        }
        let k = ((r / self.h) as usize).min(self.v.len() - 2);
        let s = r / self.h - k as f64;
        let (y0, y1) = (self.v[k], self.v[k + 1]);
        let (d0, d1) = (self.w[k] * self.h, self.w[k + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        let dv = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * d1)
            / self.h;
        (v, dv)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_with_derivative(r).0
    }

    /// Samples `r ↦ v(scale·r)` on `grid`.
    pub fn sample(&self, grid: Arc<RadialGrid>, scale: f64) -> Result<RadialFunction> {
        RadialFunction::from_fn(grid, |r| self.eval(scale * r))
    }
}

fn taylor_start(v0: f64, a_eff: f64, v_inf: f64, f: &Nonlinearity, r: f64) -> (f64, f64) {
    // v = v0 + g r²/6 + g g' r⁴/120 with g(v) = (V_∞ v − f(v)) / a_eff
    let g = |v: f64| (v_inf * v - f.f(v)) / a_eff;
    let g0 = g(v0);
    let dv = 1e-6 * v0.abs().max(1e-300);
    let g1 = (g(v0 + dv) - g(v0 - dv)) / (2.0 * dv);
    let c4 = g0 * g1 / 120.0;
    (
        v0 + g0 * r * r / 6.0 + c4 * r.powi(4),
        g0 * r / 3.0 + 4.0 * c4 * r.powi(3),
    )
}

fn integrate(v0: f64, a_eff: f64, v_inf: f64, f: &Nonlinearity, h: f64, r_end: f64) -> Trajectory {
    let rhs = |r: f64, v: f64, w: f64| (w, (v_inf * v - f.f(v)) / a_eff - 2.0 * w / r);
    let steps = (r_end / h).ceil() as usize;
    let mut vs = Vec::with_capacity(steps + 1);
    let mut ws = Vec::with_capacity(steps + 1);
    vs.push(v0);
    ws.push(0.0);
    let (mut v, mut w) = taylor_start(v0, a_eff, v_inf, f, h);
    vs.push(v);
    ws.push(w);
    for k in 1..steps {
        let r = k as f64 * h;
        let (k1v, k1w) = rhs(r, v, w);
        let (k2v, k2w) = rhs(r + 0.5 * h, v + 0.5 * h * k1v, w + 0.5 * h * k1w);
        let (k3v, k3w) = rhs(r + 0.5 * h, v + 0.5 * h * k2v, w + 0.5 * h * k2w);
        let (k4v, k4w) = rhs(r + h, v + h * k3v, w + h * k3w);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        vs.push(v);
        ws.push(w);
        if v < 0.0 {
            return Trajectory {
                v: vs,
                w: ws,
                fate: Fate::Overshoot,
            };
        }
        if w > 0.0 {
            return Trajectory {
                v: vs,
                w: ws,
                fate: Fate::Undershoot,
            };
        }
    }
    Trajectory {
        v: vs,
        w: ws,
        fate: Fate::Undershoot,
    }
}

/// Smallest `s > 0` (on a fine log scan) with `F(s) > ½V_∞s²`.
fn locate_s0(v_inf: f64, f: &Nonlinearity) -> Option<f64> {
    (0..=1200)
        .map(|k| 10f64.powf(-4.0 + 8.0 * k as f64 / 1200.0))
        .find(|&s| f.F(s) > 0.5 * v_inf * s * s)
}

/// Positive ground state of `−a_eff Δv + V_∞ v = f(v)` by shooting on `v(0)`.
pub fn solve_scalar_field_shooting(
    a_eff: f64,
    v_inf: f64,
    f: &Nonlinearity,
) -> Result<ScalarFieldSolution> {
    if !(a_eff > 0.0 && v_inf > 0.0) {
        return Err(Error::Config(format!(
            "shooting needs a_eff > 0 and V_inf > 0, got {a_eff}, {v_inf}"
        )));
    }
    let s0 = locate_s0(v_inf, f).ok_or(Error::NoS0)?;
    let kappa = (v_inf / a_eff).sqrt();
    let step_for = |v0: f64| {
        let stiff = (f.f(v0) / v0).abs().max(v_inf) / a_eff;
        0.004 / stiff.sqrt()
    };
    let r_end = 200.0 / kappa;

    // bracket: lo undershoots, hi overshoots
    let mut lo = s0;
    let mut hi = s0;
    let classify = |v0: f64| integrate(v0, a_eff, v_inf, f, step_for(v0), r_end).fate;
    let mut tries = 0;
    while classify(hi) == Fate::Undershoot {
        lo = hi;
        hi *= 1.5;
        tries += 1;
        if tries > 80 || !hi.is_finite() {
            return Err(Error::ShootingBracketFailed(format!(
                "no overshoot up to v(0) = {hi:e}"
            )));
        }
    }
    if lo == hi {
        tries = 0;
        while classify(lo) == Fate::Overshoot {
            hi = lo;
            lo /= 1.5;
            tries += 1;
            if tries > 80 {
                return Err(Error::ShootingBracketFailed(format!(
                    "no undershoot down to v(0) = {lo:e}"
                )));
            }
        }
    }

    // The mesh is fixed by the upper end so both trajectories share nodes.
    let h = step_for(hi);
    let mut steps = 0;
    while hi - lo > 2.0 * f64::EPSILON * hi && steps < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match integrate(mid, a_eff, v_inf, f, h, r_end).fate {
            Fate::Undershoot => lo = mid,
            Fate::Overshoot => hi = mid,
        }
        steps += 1;
    }

    let t_lo = integrate(lo, a_eff, v_inf, f, h, r_end);
    let t_hi = integrate(hi, a_eff, v_inf, f, h, r_end);
    let len = t_lo.v.len().min(t_hi.v.len());
    let mut k_s = len - 1;
    for k in 1..len {
        let avg = 0.5 * (t_lo.v[k] + t_hi.v[k]);
        if (t_lo.v[k] - t_hi.v[k]).abs() > SPLICE_RTOL * avg.abs() || t_lo.w[k] >= 0.0 {
            k_s = k - 1;
            break;
        }
    }
    if k_s < 8 {
        return Err(Error::ShootingBracketFailed(
            "bracketing trajectories separate immediately".into(),
        ));
    }
    let v: Vec<f64> = (0..=k_s).map(|k| 0.5 * (t_lo.v[k] + t_hi.v[k])).collect();
    let w: Vec<f64> = (0..=k_s).map(|k| 0.5 * (t_lo.w[k] + t_hi.w[k])).collect();
    let r_splice = k_s as f64 * h;

    // Moments: Simpson on the shooting mesh plus the exponential tail.
    let simpson = |g: &dyn Fn(usize) -> f64| {
        let n = k_s; // intervals
        let even = n - n % 2;
        let mut s = g(0) + g(even);
        for k in 1..even {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k);
        }
        let mut total = s * h / 3.0;
        if n % 2 == 1 {
            total += 0.5 * h * (g(n - 1) + g(n));
        }
        total
    };
    let r = |k: usize| k as f64 * h;
    let vs = v[k_s];
    let tail_mass = (vs * r_splice).powi(2) / (2.0 * kappa);
    let tail_grad = tail_mass * (kappa + 1.0 / r_splice).powi(2);
    let mass = FOUR_PI * (simpson(&|k| v[k] * v[k] * r(k) * r(k)) + tail_mass);
    let grad = FOUR_PI * (simpson(&|k| w[k] * w[k] * r(k) * r(k)) + tail_grad);
    let nonlinear = FOUR_PI * simpson(&|k| f.F(v[k]) * r(k) * r(k));

    Ok(ScalarFieldSolution {
        a_eff,
        v_inf,
        v0: 0.5 * (lo + hi),
        kappa,
        r_splice,
        bisection_steps: steps,
        h,
        v,
        w,
        mass,
        grad,
        nonlinear,
    })
}

/// Dilation taking a unit-coefficient scalar field solution to the
/// Kirchhoff solution `u(r) = v(t r)` of the constant-potential problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KirchhoffRescaling {
    /// Positive root of `a t² + b‖∇v‖₂² t − 1 = 0`.
    pub t: f64,
    /// `‖∇u‖₂² = ‖∇v‖₂² / t`.
    pub grad_u: f64,
    /// Closed-form Kirchhoff energy of `u`.
    pub energy: f64,
}

/// Root `t` and the closed-form energy, from the moments of `v`.
pub fn kirchhoff_rescaling(v: &ScalarFieldSolution, a: f64, b: f64) -> Result<KirchhoffRescaling> {
    if !(a > 0.0 && b >= 0.0) {
        return Err(Error::Config(format!(
            "need a > 0 and b >= 0, got {a}, {b}"
        )));
    }
    let bg = b * v.grad;
    let disc = bg * bg + 4.0 * a;
    if disc <= 0.0 {
        return Err(Error::Config("non-positive discriminant".into()));
    }
    // 2 / (bG + √disc) avoids cancellation in (−bG + √disc) / (2a)
    let t = 2.0 / (bg + disc.sqrt());
    let t3 = t * t * t;
    let grad_u = v.grad / t;
    let energy = 0.5 * a * grad_u + 0.5 * v.v_inf * v.mass / t3 + 0.25 * b * grad_u * grad_u
        - v.nonlinear / t3;
    Ok(KirchhoffRescaling { t, grad_u, energy })
}

/// Samples `u(r) = v(t r)` on `grid` and returns it with `t`.
pub fn kirchhoff_from_scalar_field(
    v: &ScalarFieldSolution,
    a: f64,
    b: f64,
    grid: Arc<RadialGrid>,
) -> Result<(RadialFunction, f64)> {
    if (v.a_eff - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "scalar field must have a_eff = 1, got {}",
            v.a_eff
        )));
    }
    let k = kirchhoff_rescaling(v, a, b)?;
    Ok((v.sample(grid, k.t)?, k.t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_ground_state() {
        let f = Nonlinearity::pure_power(4.0);
        let sol = solve_scalar_field_shooting(1.0, 1.0, &f).unwrap();
        // known central amplitude of the cubic ground state in 3D
        assert_relative_eq!(sol.v0, 4.3374, max_relative = 1e-4);
        // scalar Pohozaev: ½G + (3/2)V_∞M − 3N = 0
        let p = 0.5 * sol.grad + 1.5 * sol.mass - 3.0 * sol.nonlinear;
        assert!(p.abs() < 1e-8 * sol.grad, "{p}");
        // Nehari: G + M = ∫f(v)v = 4N for p = 4
        assert_relative_eq!(
            sol.grad + sol.mass,
            4.0 * sol.nonlinear,
            max_relative = 1e-8
        );
    }

    #[test]
    fn profile_is_positive_decreasing() {
        let f = Nonlinearity::pure_power(3.5);
        let sol = solve_scalar_field_shooting(1.0, 1.0, &f).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..400 {
            let v = sol.eval(k as f64 * 0.05);
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        let (v, dv) = sol.eval_with_derivative(25.0);
        assert_relative_eq!(dv / v, -1.0 - 1.0 / 25.0, max_relative = 1e-6);
    }

    #[test]
    fn a_eff_scales_space() {
        let f = Nonlinearity::pure_power(4.0);
        let one = solve_scalar_field_shooting(1.0, 1.0, &f).unwrap();
        let four = solve_scalar_field_shooting(4.0, 1.0, &f).unwrap();
        assert_relative_eq!(one.v0, four.v0, max_relative = 1e-7);
        assert_relative_eq!(four.eval(2.0), one.eval(1.0), max_relative = 1e-7);
    }

    #[test]
    fn rescaling_root() {
        let f = Nonlinearity::pure_power(4.0);
        let sol = solve_scalar_field_shooting(1.0, 1.0, &f).unwrap();
        let k = kirchhoff_rescaling(&sol, 1.0, 0.25).unwrap();
        let res = k.t * k.t + 0.25 * sol.grad * k.t - 1.0;
        assert!(res.abs() < 1e-14);
        let k0 = kirchhoff_rescaling(&sol, 4.0, 0.0).unwrap();
        assert_relative_eq!(k0.t, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let f = Nonlinearity::pure_power(4.0);
        assert!(solve_scalar_field_shooting(0.0, 1.0, &f).is_err());
        let sol = solve_scalar_field_shooting(2.0, 1.0, &f).unwrap();
        let g = Arc::new(RadialGrid::uniform(20.0, 101).unwrap());
        assert!(kirchhoff_from_scalar_field(&sol, 1.0, 1.0, g).is_err());
    }
}
