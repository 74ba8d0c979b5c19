use std::fs;
use std::path::{Path, PathBuf};

use kirchhoff::audit::{check_nonlinearity_hypotheses, check_potential_hypotheses};
use kirchhoff::functionals::log_space;
use kirchhoff::scans::{
    default_dilations, hardy_scan, iip_scan, inclusion_scan, random_lambda_members,
    random_profiles, uniqueness_scan,
};
use kirchhoff::shooting::{
    kirchhoff_from_scalar_field, kirchhoff_rescaling, solve_scalar_field_shooting,
};
use kirchhoff::solver::{ode_residual, profile_csv, solve_ground_state, SolveResult, Status};
use kirchhoff::sweep::lambda_sweep;
use kirchhoff::{pohozaev, FiberingScan, Functional, Nonlinearity, ProblemSpec, RadialFunction};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, ProfileConfig, RunConfig, SweepConfig, VerifyCheck};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Config = 1,
    NotConverged = 2,
    VerifyFailed = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Solve(kirchhoff::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<kirchhoff::Error> for CmdError {
    fn from(e: kirchhoff::Error) -> Self {
        match e {
            kirchhoff::Error::Config(_)
            | kirchhoff::Error::Table(_)
            | kirchhoff::Error::LambdaOutOfRange(_) => CmdError::Config(ConfigError::Core(e)),
            e => CmdError::Solve(e),
        }
    }
}

impl CmdError {
    pub fn exit(&self) -> Exit {
        match self {
            CmdError::Config(_) | CmdError::Io { .. } => Exit::Config,
            CmdError::Solve(_) => Exit::NotConverged,
        }
    }
}

/// Writes artifacts into one directory, each stamped with the config hash.
pub struct Output {
    dir: PathBuf,
    hash: String,
}

impl Output {
    pub fn new(dir: &Path, hash: String) -> Result<Self, CmdError> {
        fs::create_dir_all(dir).map_err(|source| CmdError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
        })
    }

    fn write(&self, name: &str, text: &str) -> Result<(), CmdError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|source| CmdError::Io { path, source })
    }

    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> Result<(), CmdError> {
        let mut v = serde_json::to_value(body).expect("serializable");
        if let Value::Object(map) = &mut v {
            map.insert("config_hash".into(), Value::String(self.hash.clone()));
        }
        self.write(
            name,
            &(serde_json::to_string_pretty(&v).expect("serializable") + "\n"),
        )
    }

    pub fn csv(&self, name: &str, body: &str) -> Result<(), CmdError> {
        self.write(name, &format!("# config_hash: {}\n{body}", self.hash))
    }
}

fn solve_exit(r: &SolveResult) -> Exit {
    if r.status == Status::Converged {
        Exit::Ok
    } else {
        Exit::NotConverged
    }
}

fn problem_for(cfg: &RunConfig) -> Result<ProblemSpec, CmdError> {
    Ok(cfg.problem_spec()?)
}

pub fn solve(cfg: &RunConfig, out: &Output) -> Result<Exit, CmdError> {
    let ps = problem_for(cfg)?;
    let r = solve_ground_state(&ps, &cfg.solver_options()?)?;
    out.json("result.json", &r)?;
    out.csv("profile.csv", &r.profile_csv())?;
    out.csv("trace.csv", &r.trace_csv())?;
    eprintln!(
        "{:?} after {} iterations: m = {:.12e}, |P| = {:.2e}",
        r.status, r.iterations, r.m, r.pohozaev_residual
    );
    Ok(solve_exit(&r))
}

pub fn verify(cfg: &RunConfig, out: &Output) -> Result<Exit, CmdError> {
    let ps = problem_for(cfg)?;
    let vc = cfg.verify.clone().unwrap_or_default();
    let grid = cfg.grid()?;
    let seed = vc.samples.seed;
    let mut report = serde_json::Map::new();
    let mut all_pass = true;
    for check in &vc.checks {
        let (key, value, pass) = match check {
            VerifyCheck::Potential => {
                let r = check_potential_hypotheses(&ps.potential, ps.a, &vc.samples);
                ("potential", json!(r), r.all_pass())
            }
            VerifyCheck::Nonlinearity => {
                let r = check_nonlinearity_hypotheses(&ps.nonlinearity, ps.v_inf(), &vc.samples);
                ("nonlinearity", json!(r), r.all_pass())
            }
            VerifyCheck::Hardy => {
                let r = hardy_scan(&random_profiles(&grid, vc.profiles, (0.5, 8.0), seed));
                let pass = r.verdict == kirchhoff::audit::Verdict::Pass;
                ("hardy", json!(r), pass)
            }
            VerifyCheck::Iip => {
                let profiles = random_profiles(&grid, vc.profiles, (0.5, 8.0), seed);
                let r = iip_scan(&ps, &profiles, &vc.samples.dilations());
                let pass = r.verdict == kirchhoff::audit::Verdict::Pass;
                ("iip", json!(r), pass)
            }
            VerifyCheck::FiberingUniqueness => {
                let members = random_lambda_members(&ps, &grid, vc.profiles, seed);
                let r = uniqueness_scan(&ps, &members, &default_dilations());
                let pass = r.verdict == kirchhoff::audit::Verdict::Pass;
                ("fibering_uniqueness", json!(r), pass)
            }
            VerifyCheck::LambdaInclusion => {
                let profiles = random_profiles(&grid, vc.profiles, (0.5, 8.0), seed);
                let r = inclusion_scan(&ps, &profiles, &vc.samples.dilations());
                let pass = r.verdict == kirchhoff::audit::Verdict::Pass;
                ("lambda_inclusion", json!(r), pass)
            }
        };
        eprintln!("{key}: {}", if pass { "pass" } else { "FAIL" });
        all_pass &= pass;
        report.insert(key.into(), value);
    }
    report.insert("all_pass".into(), json!(all_pass));
    out.json("verify.json", &report)?;
    Ok(if all_pass {
        Exit::Ok
    } else {
        Exit::VerifyFailed
    })
}

#[derive(Serialize)]
struct OracleReport {
    m_direct: f64,
    m_oracle: f64,
    relative_gap: f64,
    rtol: f64,
    within_tolerance: bool,
    /// Dilation `t` with `u(r) = v(t r)`.
    t: f64,
    /// Shooting amplitude `v(0)`.
    v0: f64,
    oracle_pohozaev: f64,
    oracle_ode_residual: f64,
    direct: SolveResult,
}

pub fn oracle(cfg: &RunConfig, out: &Output) -> Result<Exit, CmdError> {
    let ps = problem_for(cfg)?;
    if !ps.potential.is_constant() {
        return Err(ConfigError::Invalid("oracle requires a constant potential".into()).into());
    }
    let rtol = cfg.oracle.clone().unwrap_or_default().rtol;
    let v = solve_scalar_field_shooting(1.0, ps.v_inf(), &ps.nonlinearity)?;
    let resc = kirchhoff_rescaling(&v, ps.a, ps.b)?;
    let (u_oracle, t) = kirchhoff_from_scalar_field(&v, ps.a, ps.b, cfg.grid()?)?;
    let direct = solve_ground_state(&ps, &cfg.solver_options()?)?;
    let relative_gap = (direct.m - resc.energy).abs() / resc.energy.abs();
    let exit = match solve_exit(&direct) {
        Exit::Ok if relative_gap > rtol => Exit::VerifyFailed,
        e => e,
    };
    let report = OracleReport {
        m_direct: direct.m,
        m_oracle: resc.energy,
        relative_gap,
        rtol,
        within_tolerance: relative_gap <= rtol,
        t,
        v0: v.v0,
        oracle_pohozaev: pohozaev(&u_oracle, &ps),
        oracle_ode_residual: ode_residual(&u_oracle, &ps),
        direct,
    };
    out.json("oracle.json", &report)?;
    out.csv("profile.csv", &report.direct.profile_csv())?;
    out.csv("oracle_profile.csv", &profile_csv(&u_oracle))?;
    eprintln!(
        "m_direct = {:.12e}, m_oracle = {:.12e}, relative gap {:.3e}",
        report.m_direct, report.m_oracle, relative_gap
    );
    Ok(exit)
}

pub fn sweep(cfg: &RunConfig, out: &Output) -> Result<Exit, CmdError> {
    let ps = problem_for(cfg)?;
    let opts = cfg.solver_options()?;
    let Some(sw) = &cfg.sweep else {
        return Err(ConfigError::Invalid("sweep block missing".into()).into());
    };
    if let SweepConfig::Lambda { lambdas } = sw {
        let table = lambda_sweep(&ps, lambdas, &opts)?;
        out.csv("sweep.csv", &table.to_csv())?;
        let ok = table.errors.iter().all(Option::is_none)
            && table
                .solutions
                .iter()
                .flatten()
                .all(|r| r.status == Status::Converged);
        for (l, g) in table.lambdas.iter().zip(table.gaps()) {
            eprintln!(
                "lambda = {l}: m_inf - c_upper = {}",
                g.map_or("n/a".into(), |g| format!("{g:.6e}"))
            );
        }
        return Ok(if ok { Exit::Ok } else { Exit::NotConverged });
    }

    let (axis, points): (&str, Vec<SweepPoint>) = match sw {
        SweepConfig::A { values } => (
            "a",
            values
                .iter()
                .map(|&a| (a, String::new(), rebuild(&ps, |p| p.a = a)))
                .collect(),
        ),
        SweepConfig::B { values } => (
            "b",
            values
                .iter()
                .map(|&b| (b, String::new(), rebuild(&ps, |p| p.b = b)))
                .collect(),
        ),
        SweepConfig::P { values } => (
            "p",
            values
                .iter()
                .map(|&p| {
                    (
                        p,
                        String::new(),
                        rebuild(&ps, |q| q.nonlinearity = Nonlinearity::pure_power(p)),
                    )
                })
                .collect(),
        ),
        SweepConfig::Potential { potentials } => (
            "potential",
            potentials
                .iter()
                .enumerate()
                .map(|(i, pc)| {
                    let spec = pc.build().and_then(|v| rebuild(&ps, |p| p.potential = v));
                    let label = spec
                        .as_ref()
                        .map(|p| p.potential.kind())
                        .unwrap_or("invalid");
                    (i as f64, label.to_string(), spec)
                })
                .collect(),
        ),
        SweepConfig::Lambda { .. } => unreachable!(),
    };

    let rows: Vec<(String, bool)> = points
        .par_iter()
        .map(|(value, label, spec)| {
            let res = match spec {
                Ok(p) => solve_ground_state(p, &opts).map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            };
            sweep_row(axis, *value, label, res)
        })
        .collect();
    let mut csv =
        String::from("axis,value,label,status,m,pohozaev_residual,ode_residual,iterations,error\n");
    let mut ok = true;
    for (row, converged) in rows {
        csv.push_str(&row);
        ok &= converged;
    }
    out.csv("sweep.csv", &csv)?;
    Ok(if ok { Exit::Ok } else { Exit::NotConverged })
}

/// Axis value, label, and the problem to solve there.
type SweepPoint = (f64, String, Result<ProblemSpec, ConfigError>);

fn rebuild(
    ps: &ProblemSpec,
    edit: impl FnOnce(&mut ProblemSpec),
) -> Result<ProblemSpec, ConfigError> {
    let mut p = ps.clone();
    edit(&mut p);
    Ok(ProblemSpec::new(p.a, p.b, p.potential, p.nonlinearity)?)
}

fn sweep_row(
    axis: &str,
    value: f64,
    label: &str,
    res: Result<SolveResult, String>,
) -> (String, bool) {
    match res {
        Ok(r) => (
            format!(
                "{axis},{value:.16e},{label},{},{:.16e},{:.16e},{:.16e},{},\n",
                status_name(r.status),
                r.m,
                r.pohozaev_residual,
                r.ode_residual,
                r.iterations
            ),
            r.status == Status::Converged,
        ),
        Err(e) => (
            format!(
                "{axis},{value:.16e},{label},failed,,,,,{}\n",
                e.replace([',', '\n'], ";")
            ),
            false,
        ),
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIters => "max_iters",
        Status::Stalled => "stalled",
    }
}

pub fn fibering(cfg: &RunConfig, out: &Output) -> Result<Exit, CmdError> {
    let ps = problem_for(cfg)?;
    let fc = cfg.fibering.clone().unwrap_or_default();
    let target = match cfg.solver.functional {
        Functional::Full => ps.clone(),
        Functional::Limit => ps.limit_problem(),
    };
    let u = match fc.profile {
        ProfileConfig::Gaussian { amplitude, width } => {
            RadialFunction::from_fn(cfg.grid()?, |r| amplitude * (-(r / width).powi(2)).exp())?
        }
        ProfileConfig::Solution => solve_ground_state(&ps, &cfg.solver_options()?)?.u_hat,
    };
    let scan = FiberingScan::new(&u, &target, &log_space(fc.t_min, fc.t_max, fc.n))?;
    out.csv("fibering.csv", &scan.to_csv())?;
    eprintln!("sign changes of dzeta: {}", scan.sign_changes().len());
    Ok(Exit::Ok)
}
