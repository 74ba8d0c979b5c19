#![allow(dead_code)]

use std::sync::Arc;

use kirchhoff::{Nonlinearity, Potential, ProblemSpec, RadialFunction, RadialGrid};

pub fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::uniform(r_max, n).unwrap())
}

pub fn gaussian(g: &Arc<RadialGrid>, amp: f64, width: f64) -> RadialFunction {
    RadialFunction::from_fn(g.clone(), |r| amp * (-(r / width).powi(2)).exp()).unwrap()
}

pub fn power(a: f64, b: f64, v: Potential, p: f64) -> ProblemSpec {
    ProblemSpec::new(a, b, v, Nonlinearity::pure_power(p)).unwrap()
}

pub fn constant() -> Potential {
    Potential::Constant { alpha: 1.0 }
}

/// Built-in potentials whose parameters pass (V1)–(V4) with `a = 20`.
pub fn v4_potentials() -> Vec<Potential> {
    vec![
        constant(),
        Potential::InversePoly {
            alpha: 2.0,
            beta: 1.0,
            sigma: 2.0,
        },
        Potential::ExpDecay {
            alpha: 1.0,
            beta: 0.5,
            sigma: 1.0,
        },
    ]
}

/// The inverse-power family at the smallest `a` for which it satisfies (V4).
pub fn gap_problem() -> ProblemSpec {
    power(
        10.0,
        0.05,
        Potential::InversePoly {
            alpha: 1.0,
            beta: 0.5,
            sigma: 2.0,
        },
        4.0,
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
