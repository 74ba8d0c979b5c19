//! Run configuration: JSON, unknown keys rejected, validated before use.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use kirchhoff::audit::SampleSpec;
use kirchhoff::problem::{PowerTerm, TabulatedNonlinearity, TabulatedPotential};
use kirchhoff::projection::Objective;
use kirchhoff::solver::{Optimizer, SolverOptions};
use kirchhoff::{Functional, GridScheme, Nonlinearity, Potential, ProblemSpec, RadialGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibering: Option<FiberingConfig>,
    /// Not part of the config hash.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub a: f64,
    pub b: f64,
    pub potential: PotentialConfig,
    pub nonlinearity: NonlinearityConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Constant {
        alpha: f64,
    },
    InversePoly {
        alpha: f64,
        beta: f64,
        sigma: f64,
    },
    SineDecay {
        alpha: f64,
        beta: f64,
    },
    ExpDecay {
        alpha: f64,
        beta: f64,
        sigma: f64,
    },
    Tabulated {
        r: Vec<f64>,
        v: Vec<f64>,
        #[serde(default)]
        v_inf: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    PurePower { p: f64 },
    PowerCombination { terms: Vec<TermConfig> },
    Tabulated { t: Vec<f64>, f: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub coeff: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub r_max: f64,
    pub n: usize,
    pub scheme: GridScheme,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_max: 20.0,
            n: 2001,
            scheme: GridScheme::Uniform,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub functional: Functional,
    pub lambda: f64,
    pub optimizer: Optimizer,
    pub max_iters: usize,
    pub grad_rtol: f64,
    pub stall_window: usize,
    pub stall_rtol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            functional: Functional::Full,
            lambda: 1.0,
            optimizer: Optimizer::Gradient,
            max_iters: 500,
            grad_rtol: 1e-6,
            stall_window: 20,
            stall_rtol: 1e-12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyCheck {
    /// (V1)–(V4) and the inequalities they imply.
    Potential,
    /// (F1)–(F3).
    Nonlinearity,
    Hardy,
    Iip,
    FiberingUniqueness,
    LambdaInclusion,
}

impl VerifyCheck {
    pub const ALL: [VerifyCheck; 6] = [
        VerifyCheck::Potential,
        VerifyCheck::Nonlinearity,
        VerifyCheck::Hardy,
        VerifyCheck::Iip,
        VerifyCheck::FiberingUniqueness,
        VerifyCheck::LambdaInclusion,
    ];
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub checks: Vec<VerifyCheck>,
    pub samples: SampleSpec,
    /// Random profiles per function scan.
    pub profiles: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            checks: VerifyCheck::ALL.to_vec(),
            samples: SampleSpec::default(),
            profiles: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Largest accepted relative energy gap.
    pub rtol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { rtol: 1e-3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// Limit levels `m_λ^∞` and dilation-path bounds on `c_λ`.
    Lambda {
        lambdas: Vec<f64>,
    },
    A {
        values: Vec<f64>,
    },
    B {
        values: Vec<f64>,
    },
    /// Exponent of a pure-power nonlinearity.
    P {
        values: Vec<f64>,
    },
    Potential {
        potentials: Vec<PotentialConfig>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberingConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
    pub profile: ProfileConfig,
}

impl Default for FiberingConfig {
    fn default() -> Self {
        Self {
            t_min: 1e-2,
            t_max: 1e2,
            n: 200,
            profile: ProfileConfig::Gaussian {
                amplitude: 4.0,
                width: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    /// `amplitude · exp(−(r / width)²)`.
    Gaussian { amplitude: f64, width: f64 },
    /// The ground state computed with the solver settings.
    Solution,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] kirchhoff::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field that can be checked without running a solve.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.problem_spec()?;
        self.grid()?;
        let s = &self.solver;
        kirchhoff::functionals::check_lambda(s.lambda)?;
        if s.max_iters == 0 {
            return Err(invalid("solver.max_iters must be positive"));
        }
        if !(s.grad_rtol > 0.0 && s.grad_rtol.is_finite()) {
            return Err(invalid("solver.grad_rtol must be positive"));
        }
        if s.stall_window == 0 || !(s.stall_rtol >= 0.0 && s.stall_rtol.is_finite()) {
            return Err(invalid(
                "solver.stall_window must be positive and stall_rtol nonnegative",
            ));
        }
        if let Some(v) = &self.verify {
            if !v.samples.is_valid() {
                return Err(invalid(
                    "verify.samples: need 0 < lo < hi and at least 2 points",
                ));
            }
            if v.profiles == 0 {
                return Err(invalid("verify.profiles must be positive"));
            }
        }
        if let Some(o) = &self.oracle {
            if o.rtol.is_nan() || o.rtol <= 0.0 {
                return Err(invalid("oracle.rtol must be positive"));
            }
        }
        if let Some(sw) = &self.sweep {
            self.validate_sweep(sw)?;
        }
        if let Some(f) = &self.fibering {
            if !(f.t_min > 0.0 && f.t_max > f.t_min && f.t_max.is_finite() && f.n >= 2) {
                return Err(invalid("fibering: need 0 < t_min < t_max and n >= 2"));
            }
            if let ProfileConfig::Gaussian { amplitude, width } = f.profile {
                if !(amplitude.is_finite() && width > 0.0 && width.is_finite()) {
                    return Err(invalid("fibering.profile: width must be positive"));
                }
            }
        }
        Ok(())
    }

    fn validate_sweep(&self, sw: &SweepConfig) -> Result<(), ConfigError> {
        let nonempty = |n: usize| {
            if n == 0 {
                Err(invalid("sweep: empty axis"))
            } else {
                Ok(())
            }
        };
        match sw {
            SweepConfig::Lambda { lambdas } => {
                nonempty(lambdas.len())?;
                lambdas
                    .iter()
                    .try_for_each(|&l| kirchhoff::functionals::check_lambda(l))?;
                if !lambdas.windows(2).all(|w| w[1] > w[0]) {
                    return Err(invalid("sweep.lambdas must be strictly increasing"));
                }
            }
            SweepConfig::A { values } | SweepConfig::B { values } => nonempty(values.len())?,
            SweepConfig::P { values } => {
                nonempty(values.len())?;
                if !matches!(
                    self.problem.nonlinearity,
                    NonlinearityConfig::PurePower { .. }
                ) {
                    return Err(invalid("sweep axis p requires a pure_power nonlinearity"));
                }
                if values.iter().any(|p| !(*p > 2.0 && p.is_finite())) {
                    return Err(invalid("sweep: exponents must exceed 2"));
                }
            }
            SweepConfig::Potential { potentials } => {
                nonempty(potentials.len())?;
                potentials.iter().try_for_each(|p| p.build().map(|_| ()))?;
            }
        }
        Ok(())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, ConfigError> {
        let p = &self.problem;
        Ok(ProblemSpec::new(
            p.a,
            p.b,
            p.potential.build()?,
            p.nonlinearity.build()?,
        )?)
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>, ConfigError> {
        let g = &self.grid;
        Ok(Arc::new(RadialGrid::new(g.r_max, g.n, g.scheme)?))
    }

    pub fn solver_options(&self) -> Result<SolverOptions, ConfigError> {
        let s = &self.solver;
        let mut opts = SolverOptions::new(self.grid()?);
        opts.objective = Objective {
            functional: s.functional,
            lambda: s.lambda,
        };
        opts.optimizer = s.optimizer;
        opts.max_iters = s.max_iters;
        opts.grad_rtol = s.grad_rtol;
        opts.stall_window = s.stall_window;
        opts.stall_rtol = s.stall_rtol;
        opts.seed = s.seed;
        Ok(opts)
    }

    /// Applies `--seed`, which replaces every seed in the config.
    pub fn override_seed(&mut self, seed: u64) {
        self.solver.seed = seed;
        if let Some(v) = &mut self.verify {
            v.samples.seed = seed;
        }
    }

    /// SHA-256 of the canonical JSON serialization, output location excluded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

impl PotentialConfig {
    pub fn build(&self) -> Result<Potential, ConfigError> {
        let finite = |xs: &[f64]| {
            if xs.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(invalid("potential parameters must be finite"))
            }
        };
        Ok(match *self {
            PotentialConfig::Constant { alpha } => {
                finite(&[alpha])?;
                Potential::Constant { alpha }
            }
            PotentialConfig::InversePoly { alpha, beta, sigma } => {
                finite(&[alpha, beta, sigma])?;
                Potential::InversePoly { alpha, beta, sigma }
            }
            PotentialConfig::SineDecay { alpha, beta } => {
                finite(&[alpha, beta])?;
                Potential::SineDecay { alpha, beta }
            }
            PotentialConfig::ExpDecay { alpha, beta, sigma } => {
                finite(&[alpha, beta, sigma])?;
                Potential::ExpDecay { alpha, beta, sigma }
            }
            PotentialConfig::Tabulated {
                ref r,
                ref v,
                v_inf,
            } => Potential::Tabulated(TabulatedPotential::new(r, v, v_inf)?),
        })
    }
}

impl NonlinearityConfig {
    pub fn build(&self) -> Result<Nonlinearity, ConfigError> {
        Ok(match self {
            NonlinearityConfig::PurePower { p } => {
                if !(*p > 2.0 && p.is_finite()) {
                    return Err(invalid(format!("nonlinearity.p must exceed 2, got {p}")));
                }
                Nonlinearity::pure_power(*p)
            }
            NonlinearityConfig::PowerCombination { terms } => {
                if terms.is_empty()
                    || terms.iter().any(|t| {
                        !(t.exponent > 2.0 && t.exponent.is_finite() && t.coeff.is_finite())
                    })
                {
                    return Err(invalid("power_combination needs terms with exponent > 2"));
                }
                Nonlinearity::PowerCombination {
                    terms: terms
                        .iter()
                        .map(|t| PowerTerm {
                            coeff: t.coeff,
                            exponent: t.exponent,
                        })
                        .collect(),
                }
            }
            NonlinearityConfig::Tabulated { t, f } => {
                Nonlinearity::Tabulated(TabulatedNonlinearity::new(t, f)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "problem": {"a": 1, "b": 0.25,
            "potential": {"kind": "constant", "alpha": 1},
            "nonlinearity": {"kind": "pure_power", "p": 4}}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse(BASE).unwrap();
        assert_eq!(cfg.grid.n, 2001);
        assert_eq!(cfg.solver.max_iters, 500);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = BASE.replace("\"a\": 1", "\"a\": 1, \"c\": 2");
        assert!(matches!(
            RunConfig::parse(&text),
            Err(ConfigError::Schema(_))
        ));
        let text = BASE.replace("\"alpha\": 1", "\"alpha\": 1, \"beta\": 2");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::parse(&BASE.replace("0.25", "-1")).is_err());
        let with_grid = BASE.replacen('{', r#"{"grid": {"n": 8},"#, 1);
        assert!(RunConfig::parse(&with_grid).is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::parse(BASE).unwrap();
        let b = RunConfig::parse(&BASE.replacen('{', r#"{"output_dir": "x","#, 1)).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.override_seed(7);
        assert_ne!(a.hash(), c.hash());
    }
}
