//! Inequality scans over randomized radial profiles.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::audit::Verdict;
use crate::functionals::{iip_gap_of, log_space, Fibering};
use crate::grid::{grad_norm_sq, hardy_lower_bound, RadialFunction, RadialGrid};
use crate::problem::ProblemSpec;
use crate::projection::{lambda_margin, project_fibering, ProjectionOptions, LAMBDA_MARGIN_TOL};

/// Relative slack for the Hardy scan.
pub const SLACK_HARDY: f64 = -1e-8;
/// Absolute slack for the IIP scan.
pub const SLACK_IIP: f64 = -1e-6;
/// Relative projection residual required by the uniqueness scan.
pub const UNIQUENESS_RTOL: f64 = 1e-9;
/// Largest dilation the uniqueness scan extends to.
const T_CEILING: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub name: String,
    pub verdict: Verdict,
    pub samples: usize,
    pub failures: usize,
    /// Smallest margin over the samples; negative means violated.
    pub worst_margin: Option<f64>,
    /// Index of the sample attaining `worst_margin`.
    pub worst_sample: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ScanReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            verdict: Verdict::Pass,
            samples: 0,
            failures: 0,
            worst_margin: None,
            worst_sample: None,
            worst_t: None,
            note: None,
        }
    }

    fn record(&mut self, i: usize, margin: f64, t: Option<f64>, slack: f64) {
        self.samples = self.samples.max(i + 1);
        if !margin.is_finite() || margin < slack {
            self.failures += 1;
        }
        if self.worst_margin.is_none_or(|w| margin < w) || !margin.is_finite() {
            self.worst_margin = Some(margin);
            self.worst_sample = Some(i);
            self.worst_t = t;
        }
    }

    fn finish(mut self) -> Self {
        self.verdict = if self.failures > 0 {
            Verdict::Fail
        } else if self.samples == 0 {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        self
    }
}

/// Random smooth radial profiles: sums of one to three positive
/// Gaussian or sech bumps with log-uniform amplitudes in `amp` and widths
/// between `4h` and `r_max / 8`.
pub fn random_profiles(
    grid: &Arc<RadialGrid>,
    count: usize,
    amp: (f64, f64),
    seed: u64,
) -> Vec<RadialFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = grid.r_max() / (grid.len() - 1) as f64;
    let (w_lo, w_hi) = ((4.0 * h).ln(), (grid.r_max() / 8.0).max(8.0 * h).ln());
    let (a_lo, a_hi) = (amp.0.ln(), amp.1.ln());
    (0..count)
        .map(|_| {
            let bumps: Vec<(f64, f64, bool)> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    (
                        rng.gen_range(a_lo..=a_hi).exp(),
                        rng.gen_range(w_lo..=w_hi).exp(),
                        rng.gen_bool(0.5),
                    )
                })
                .collect();
            let scale = 1.0 / bumps.len() as f64;
            RadialFunction::from_fn(grid.clone(), |r| {
                bumps
                    .iter()
                    .map(|&(c, w, gauss)| {
                        let x = r / w;
                        c * scale
                            * if gauss {
                                (-x * x).exp()
                            } else {
                                1.0 / (x.cosh() * x.cosh())
                            }
                    })
                    .sum()
            })
            .expect("finite profile")
        })
        .collect()
}

/// The first `count` random profiles lying in Λ, drawn in batches.
pub fn random_lambda_members(
    ps: &ProblemSpec,
    grid: &Arc<RadialGrid>,
    count: usize,
    seed: u64,
) -> Vec<RadialFunction> {
    let mut out = Vec::with_capacity(count);
    for batch in 0..64u64 {
        let profiles = random_profiles(
            grid,
            4 * count.max(1),
            (1.0, 16.0),
            seed.wrapping_add(batch),
        );
        out.extend(
            profiles
                .into_iter()
                .filter(|u| lambda_margin(u, ps, 1.0) < -LAMBDA_MARGIN_TOL),
        );
        if out.len() >= count {
            break;
        }
    }
    out.truncate(count);
    out
}

/// `‖∇u‖² ≥ ¼ ∫ u²/|x|²`, margin relative to `‖∇u‖²`.
pub fn hardy_scan(profiles: &[RadialFunction]) -> ScanReport {
    let mut rep = ScanReport::new("hardy");
    for (i, u) in profiles.iter().enumerate() {
        let g = grad_norm_sq(u);
        rep.record(i, (g - hardy_lower_bound(u)) / g, None, SLACK_HARDY);
    }
    rep.finish()
}

/// `iip_gap(u, t)` over every profile and dilation.
pub fn iip_scan(ps: &ProblemSpec, profiles: &[RadialFunction], ts: &[f64]) -> ScanReport {
    let mut rep = ScanReport::new("iip");
    for (i, u) in profiles.iter().enumerate() {
        let fib = Fibering::new(u, ps);
        for &t in ts {
            rep.record(i, iip_gap_of(&fib, t), Some(t), SLACK_IIP);
        }
    }
    rep.finish()
}

/// For every Λ-member: exactly one sign change of `ζ'` on a log grid and a
/// projection with relative Pohozaev residual below [`UNIQUENESS_RTOL`].
/// The margin is `UNIQUENESS_RTOL − residual`, or `−1` for a wrong count.
///
/// Members close to the boundary of Λ cross late, so the grid is extended
/// by decades at the same density until `ζ'` is negative at its top.
pub fn uniqueness_scan(ps: &ProblemSpec, profiles: &[RadialFunction], ts: &[f64]) -> ScanReport {
    let mut rep = ScanReport::new("fibering_uniqueness");
    let mut members = 0;
    let (t_lo, t_hi) = (ts[0], ts[ts.len() - 1]);
    let per_decade = (ts.len() - 1) as f64 / (t_hi / t_lo).log10();
    for u in profiles {
        if lambda_margin(u, ps, 1.0) >= -LAMBDA_MARGIN_TOL {
            continue;
        }
        let i = members;
        members += 1;
        let fib = Fibering::new(u, ps);
        let mut top = t_hi;
        while fib.derivative(top) > 0.0 && top < T_CEILING {
            top *= 10.0;
        }
        let grid = if top > t_hi {
            log_space(
                t_lo,
                top,
                1 + ((top / t_lo).log10() * per_decade).round() as usize,
            )
        } else {
            ts.to_vec()
        };
        let opts = ProjectionOptions {
            t_min: t_lo,
            t_max: top,
            ..Default::default()
        };
        let dz: Vec<f64> = grid.iter().map(|&t| fib.derivative(t)).collect();
        let changes = crate::functionals::sign_changes(&dz).len();
        let margin = match project_fibering(&fib, &opts) {
            Ok(p) if changes == 1 => UNIQUENESS_RTOL - p.relative_residual(),
            _ => -1.0,
        };
        rep.record(i, margin, None, 0.0);
    }
    rep.note = Some(format!("{members} of {} profiles in Λ", profiles.len()));
    rep.finish()
}

/// `{P ≤ 0} ∪ {P^∞ ≤ 0} ⊂ Λ`: the margin is `−(½V_∞‖u‖² − ∫F(u))` over
/// the profiles with a nonpositive Pohozaev value, each also dilated over `ts`.
pub fn inclusion_scan(ps: &ProblemSpec, profiles: &[RadialFunction], ts: &[f64]) -> ScanReport {
    let mut rep = ScanReport::new("lambda_inclusion");
    let limit = ps.limit_problem();
    let mut hits = 0;
    for u in profiles {
        let fib = Fibering::new(u, ps);
        let fib_inf = Fibering::new(u, &limit);
        let margin = -lambda_margin(u, ps, 1.0);
        for &t in ts {
            if fib.pohozaev(t) <= 0.0 || fib_inf.pohozaev(t) <= 0.0 {
                // Λ is dilation invariant, so the margin at u_t is t³·margin
                rep.record(hits, margin * t * t * t, Some(t), 0.0);
                hits += 1;
            }
        }
    }
    rep.note = Some(format!("{hits} (profile, t) pairs with P ≤ 0 or P^∞ ≤ 0"));
    rep.finish()
}

/// Default dilation grid for the fibering and IIP scans.
pub fn default_dilations() -> Vec<f64> {
    log_space(1e-3, 1e3, 400)
}
