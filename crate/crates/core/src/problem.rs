//! Potentials `V`, nonlinearities `f`, and the coefficient pair `(a, b)`
//! that together define `-(a + b‖∇u‖₂²)Δu + V(x)u = f(u)` on R³.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

/// Radial potential `V(|x|)` with a known value at infinity.
#[derive(Debug, Clone)]
pub enum Potential {
    /// `V ≡ alpha`.
    Constant { alpha: f64 },
    /// `V(r) = alpha - beta / (r^sigma + 1)`.
    InversePoly { alpha: f64, beta: f64, sigma: f64 },
    /// `V(r) = alpha - beta sin²(r) / (r³ + 1)`.
    SineDecay { alpha: f64, beta: f64 },
    /// `V(r) = alpha - beta exp(-r^sigma)`.
    ExpDecay { alpha: f64, beta: f64, sigma: f64 },
    /// Tabulated `(r, V)` pairs, monotone-cubic interpolated and held at the
    /// last value past the table.
    Tabulated(TabulatedPotential),
}

#[derive(Debug, Clone)]
pub struct TabulatedPotential {
    interp: MonotoneCubic,
    v_inf: f64,
}

impl TabulatedPotential {
    /// `v_inf` defaults to the last tabulated value.
    pub fn new(r: &[f64], v: &[f64], v_inf: Option<f64>) -> Result<Self> {
        validate_table(r, v)?;
        Ok(Self {
            interp: MonotoneCubic::new(r, v).with_start_slope(0.0),
            v_inf: v_inf.unwrap_or(v[v.len() - 1]),
        })
    }
}

fn validate_table(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Table("column lengths differ".into()));
    }
    if x.len() < 3 {
        return Err(Error::Table("need at least three rows".into()));
    }
    if x[0] < 0.0 {
        return Err(Error::Table("abscissae must be nonnegative".into()));
    }
    if !x.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Table("abscissae must be strictly increasing".into()));
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::Table("non-finite entry".into()));
    }
    Ok(())
}

impl Potential {
    pub fn kind(&self) -> &'static str {
        match self {
            Potential::Constant { .. } => "constant",
            Potential::InversePoly { .. } => "inverse_poly",
            Potential::SineDecay { .. } => "sine_decay",
            Potential::ExpDecay { .. } => "exp_decay",
            Potential::Tabulated(_) => "tabulated",
        }
    }

    /// `V_∞`; `alpha` for every built-in family.
    pub fn v_inf(&self) -> f64 {
        match self {
            Potential::Constant { alpha }
            | Potential::InversePoly { alpha, .. }
            | Potential::SineDecay { alpha, .. }
            | Potential::ExpDecay { alpha, .. } => *alpha,
            Potential::Tabulated(t) => t.v_inf,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Potential::Constant { .. })
    }

    /// `V_∞ - V(r)`, evaluated without cancellation for the built-in kinds.
    pub fn deficit(&self, r: f64) -> f64 {
        match *self {
            Potential::Constant { .. } => 0.0,
            Potential::InversePoly { beta, sigma, .. } => beta / (r.powf(sigma) + 1.0),
            Potential::SineDecay { beta, .. } => {
                let s = r.sin();
                beta * s * s / (r * r * r + 1.0)
            }
            Potential::ExpDecay { beta, sigma, .. } => beta * (-r.powf(sigma)).exp(),
            Potential::Tabulated(ref t) => t.v_inf - t.interp.eval(r),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Potential::Constant { alpha } => *alpha,
            Potential::Tabulated(t) => t.interp.eval(r),
            _ => self.v_inf() - self.deficit(r),
        }
    }

    /// `∇V(x)·x = r V'(r)`, zero at the origin.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        match *self {
            Potential::Constant { .. } => 0.0,
            Potential::InversePoly { beta, sigma, .. } => {
                // r^s / (r^s + 1)^2 written to stay finite for huge or tiny r^s
                let rs = r.powf(sigma);
                beta * sigma / (rs + 2.0 + 1.0 / rs)
            }
            Potential::SineDecay { beta, .. } => {
                let q = r * r * r + 1.0;
                let s = r.sin();
                -beta * r * ((2.0 * r).sin() * q - 3.0 * r * r * s * s) / (q * q)
            }
            Potential::ExpDecay { beta, sigma, .. } => {
                let rs = r.powf(sigma);
                beta * sigma * rs * (-rs).exp()
            }
            Potential::Tabulated(ref t) => r * t.interp.deriv(r),
        }
    }

    /// `3V(r) + r V'(r)`, the weight of `u²` in the Pohozaev functional.
    pub fn pohozaev_weight(&self, r: f64) -> f64 {
        3.0 * self.value(r) + self.radial_derivative(r)
    }
}

/// Nonlinearity `f` with primitive `F(t) = ∫_0^t f`.
#[derive(Debug, Clone)]
pub enum Nonlinearity {
    /// `f(t) = |t|^{p-2} t`, `F(t) = |t|^p / p`.
    PurePower { p: f64 },
    /// `f(t) = Σ c_k |t|^{p_k - 2} t`.
    PowerCombination { terms: Vec<PowerTerm> },
    /// Tabulated `(t, f)` for `t ≥ 0`, extended as an odd function.
    Tabulated(TabulatedNonlinearity),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone)]
pub struct TabulatedNonlinearity {
    interp: MonotoneCubic,
}

impl TabulatedNonlinearity {
    /// The first abscissa must be 0 with `f(0) = 0`.
    pub fn new(t: &[f64], f: &[f64]) -> Result<Self> {
        validate_table(t, f)?;
        if t[0] != 0.0 || f[0] != 0.0 {
            return Err(Error::Table("table must start at (0, 0)".into()));
        }
        Ok(Self {
            interp: MonotoneCubic::new(t, f),
        })
    }
}

impl Nonlinearity {
    pub fn pure_power(p: f64) -> Self {
        Nonlinearity::PurePower { p }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Nonlinearity::PurePower { .. } => "pure_power",
            Nonlinearity::PowerCombination { .. } => "power_combination",
            Nonlinearity::Tabulated(_) => "tabulated",
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::PurePower { p } => t.abs().powf(p - 2.0) * t,
            Nonlinearity::PowerCombination { terms } => terms
                .iter()
                .map(|k| k.coeff * t.abs().powf(k.exponent - 2.0) * t)
                .sum(),
            Nonlinearity::Tabulated(tab) => t.signum() * tab.interp.eval(t.abs()),
        }
    }

    #[allow(non_snake_case)]
    pub fn F(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::PurePower { p } => t.abs().powf(*p) / p,
            Nonlinearity::PowerCombination { terms } => terms
                .iter()
                .map(|k| k.coeff * t.abs().powf(k.exponent) / k.exponent)
                .sum(),
            Nonlinearity::Tabulated(tab) => tab.interp.integral(t.abs()),
        }
    }
}

/// Coefficients and data of the Kirchhoff problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub a: f64,
    pub b: f64,
    pub potential: Potential,
    pub nonlinearity: Nonlinearity,
    oracle_mode: bool,
}

impl ProblemSpec {
    /// Requires `a > 0` and `b > 0`.
    pub fn new(a: f64, b: f64, potential: Potential, nonlinearity: Nonlinearity) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Config(format!("b must be positive, got {b}")));
        }
        Self::build(a, b, potential, nonlinearity, false)
    }

    /// Oracle-mode problem: admits `b = 0` (the local scalar-field limit).
    pub fn oracle_mode(
        a: f64,
        b: f64,
        potential: Potential,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::Config(format!("b must be nonnegative, got {b}")));
        }
        Self::build(a, b, potential, nonlinearity, true)
    }

    fn build(
        a: f64,
        b: f64,
        potential: Potential,
        nonlinearity: Nonlinearity,
        oracle_mode: bool,
    ) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Config(format!("a must be positive, got {a}")));
        }
        Ok(Self {
            a,
            b,
            potential,
            nonlinearity,
            oracle_mode,
        })
    }

    pub fn is_oracle_mode(&self) -> bool {
        self.oracle_mode
    }

    pub fn v_inf(&self) -> f64 {
        self.potential.v_inf()
    }

    /// The same problem with `V` replaced by the constant `V_∞`.
    pub fn limit_problem(&self) -> Self {
        Self {
            potential: Potential::Constant {
                alpha: self.v_inf(),
            },
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn builtins() -> Vec<Potential> {
        vec![
            Potential::Constant { alpha: 1.5 },
            Potential::InversePoly {
                alpha: 2.0,
                beta: 1.0,
                sigma: 2.0,
            },
            Potential::SineDecay {
                alpha: 2.0,
                beta: 0.7,
            },
            Potential::ExpDecay {
                alpha: 2.0,
                beta: 1.0,
                sigma: 1.5,
            },
        ]
    }

    #[test]
    fn radial_derivative_matches_difference() {
        for v in builtins() {
            for i in 0..=60 {
                let r = 0.1 * 500f64.powf(i as f64 / 60.0);
                let h = 1e-5 * r;
                let fd = r * (v.value(r + h) - v.value(r - h)) / (2.0 * h);
                let an = v.radial_derivative(r);
                assert!(
                    (fd - an).abs() <= 1e-6 * an.abs().max(1e-3),
                    "{} at r={r}: fd {fd} vs {an}",
                    v.kind()
                );
            }
        }
    }

    #[test]
    fn v_inf_is_the_limit() {
        for v in builtins() {
            assert_relative_eq!(v.value(1e4), v.v_inf(), max_relative = 1e-7);
            assert_eq!(v.radial_derivative(0.0), 0.0);
        }
    }

    #[test]
    fn power_primitive() {
        let f = Nonlinearity::pure_power(4.0);
        assert_eq!(f.F(0.0), 0.0);
        assert_eq!(f.f(-2.0), -8.0);
        assert_eq!(f.F(-2.0), 4.0);
        for &t in &[0.3, 1.1, 2.7] {
            let h = 1e-6;
            let fd = (f.F(t + h) - f.F(t - h)) / (2.0 * h);
            assert_relative_eq!(fd, f.f(t), max_relative = 1e-7);
        }
    }

    #[test]
    fn tabulated_nonlinearity_primitive() {
        let t: Vec<f64> = (0..400).map(|i| i as f64 * 0.01).collect();
        let f: Vec<f64> = t.iter().map(|x| x * x * x).collect();
        let nl = Nonlinearity::Tabulated(TabulatedNonlinearity::new(&t, &f).unwrap());
        assert_relative_eq!(nl.F(2.0), 4.0, max_relative = 1e-5);
        assert_relative_eq!(nl.f(-1.5), -3.375, max_relative = 1e-4);
        assert!(TabulatedNonlinearity::new(&[0.5, 1.0, 2.0], &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn combination_matches_sum() {
        let nl = Nonlinearity::PowerCombination {
            terms: vec![
                PowerTerm {
                    coeff: 1.0,
                    exponent: 4.0,
                },
                PowerTerm {
                    coeff: -0.5,
                    exponent: 3.0,
                },
            ],
        };
        let t = 1.3;
        assert_relative_eq!(
            nl.F(t),
            t.powi(4) / 4.0 - 0.5 * t.powi(3) / 3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn coefficient_validation() {
        let v = Potential::Constant { alpha: 1.0 };
        let f = Nonlinearity::pure_power(4.0);
        assert!(ProblemSpec::new(1.0, -1.0, v.clone(), f.clone()).is_err());
        assert!(ProblemSpec::new(1.0, 0.0, v.clone(), f.clone()).is_err());
        assert!(ProblemSpec::new(0.0, 1.0, v.clone(), f.clone()).is_err());
        let oracle = ProblemSpec::oracle_mode(1.0, 0.0, v, f).unwrap();
        assert!(oracle.is_oracle_mode());
    }

    #[test]
    fn tabulated_potential_interpolates() {
        let r: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = r.iter().map(|x| 1.0 - 0.5 / (x * x + 1.0)).collect();
        let p = Potential::Tabulated(TabulatedPotential::new(&r, &v, Some(1.0)).unwrap());
        assert_relative_eq!(
            p.value(2.05),
            1.0 - 0.5 / (2.05f64.powi(2) + 1.0),
            max_relative = 1e-4
        );
        assert_eq!(p.v_inf(), 1.0);
    }
}
