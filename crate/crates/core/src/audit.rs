//! Finite-sample audits of the hypotheses on `V` and `f`.
//!
//! Asymptotic conditions cannot be proven from samples, so they pass only
//! when the outermost sampled decade shows the required trend and are
//! reported inconclusive otherwise. Audits never return errors.

use serde::{Deserialize, Serialize};

use crate::functionals::log_space;
use crate::problem::{Nonlinearity, Potential};

/// Absolute slack for the dilation inequality and Pohozaev-weight bound scans.
pub const SLACK_POTENTIAL_INEQ: f64 = -1e-9;

/// Relative slack for monotonicity checks, absorbing rounding only.
const MONOTONE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Log-spaced sample ranges for `r` and `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSpec {
    pub r_lo: f64,
    pub r_hi: f64,
    pub n_r: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_t: usize,
    /// Seed for randomized function samples (Hardy and Λ-inclusion scans).
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            r_lo: 1e-2,
            r_hi: 1e2,
            n_r: 200,
            t_lo: 1e-2,
            t_hi: 1e2,
            n_t: 200,
            seed: 0,
        }
    }
}

impl SampleSpec {
    pub fn radii(&self) -> Vec<f64> {
        log_space(self.r_lo, self.r_hi, self.n_r)
    }

    pub fn dilations(&self) -> Vec<f64> {
        log_space(self.t_lo, self.t_hi, self.n_t)
    }

    pub fn is_valid(&self) -> bool {
        self.r_lo > 0.0
            && self.r_hi > self.r_lo
            && self.t_lo > 0.0
            && self.t_hi > self.t_lo
            && self.n_r >= 2
            && self.n_t >= 2
            && [self.r_lo, self.r_hi, self.t_lo, self.t_hi]
                .iter()
                .all(|v| v.is_finite())
    }
}

/// One audited condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    /// Smallest (most violated) margin; negative means violated.
    pub worst_margin: Option<f64>,
    pub worst_r: Option<f64>,
    pub worst_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, verdict: Verdict) -> Self {
        Self {
            name: name.to_string(),
            verdict,
            worst_margin: None,
            worst_r: None,
            worst_t: None,
            note: None,
        }
    }

    fn with_worst(mut self, w: &Worst) -> Self {
        self.worst_margin = w.margin.is_finite().then_some(w.margin);
        self.worst_r = w.r;
        self.worst_t = w.t;
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// The largest `a` needed by (V3) on the samples, compared with the
/// closed-form sufficient condition stated for the family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyThreshold {
    pub family: String,
    /// `sup_r 2r²·rV'(r)`, refined around the best sample.
    pub computed_a_min: f64,
    pub computed_at_r: f64,
    /// Stated sufficient condition on `a`.
    pub stated_a_min: f64,
    /// `false` when the stated constant is smaller than the computed
    /// requirement (the condition would then be insufficient).
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub samples: SampleSpec,
    pub checks: Vec<Check>,
    /// First sampled `s₀` with `F(s₀) > V_∞ s₀² / 2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family_threshold: Option<FamilyThreshold>,
}

impl HypothesisReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.get(name).map(|c| c.verdict)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }
}

#[derive(Debug, Clone, Copy)]
struct Worst {
    margin: f64,
    r: Option<f64>,
    t: Option<f64>,
    non_finite: bool,
}

impl Worst {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            r: None,
            t: None,
            non_finite: false,
        }
    }

    fn update(&mut self, margin: f64, r: Option<f64>, t: Option<f64>) {
        if !margin.is_finite() {
            self.non_finite = true;
        } else if margin < self.margin {
            self.margin = margin;
            self.r = r;
            self.t = t;
        }
    }

    fn verdict(&self, slack: f64) -> Verdict {
        if self.margin < slack {
            Verdict::Fail
        } else if self.non_finite {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }
}

fn overflow_note(w: &Worst) -> Option<&'static str> {
    w.non_finite.then_some("non-finite values at some samples")
}

/// Audits (V1)–(V4) for `V` with gradient coefficient `a`, plus the
/// dilation inequality implied by (V4) and the Pohozaev-weight upper bound.
pub fn check_potential_hypotheses(v: &Potential, a: f64, samples: &SampleSpec) -> HypothesisReport {
    let rs = samples.radii();
    let ts = samples.dilations();
    let mut checks = Vec::new();

    // (V1): V ≥ 0, including the origin.
    let mut w = Worst::new();
    w.update(v.value(0.0), Some(0.0), None);
    for &r in &rs {
        w.update(v.value(r), Some(r), None);
    }
    let mut c = Check::new("V1", w.verdict(0.0)).with_worst(&w);
    if let Some(n) = overflow_note(&w) {
        c = c.with_note(n);
    }
    checks.push(c);

    checks.push(check_v2(v, &rs));

    // (V3): r V'(r) ≤ a / (2r²).
    let mut w = Worst::new();
    for &r in &rs {
        w.update(a / (2.0 * r * r) - v.radial_derivative(r), Some(r), None);
    }
    let mut c = Check::new("V3", w.verdict(0.0)).with_worst(&w);
    if let Some(n) = overflow_note(&w) {
        c = c.with_note(n);
    }
    checks.push(c);

    // (V4): t ↦ 3V(tr) + tr V'(tr) + a/(4t²r²) nonincreasing, per sampled r.
    let mut w = Worst::new();
    for &r in &rs {
        let h = |t: f64| {
            let s = t * r;
            v.pohozaev_weight(s) + a / (4.0 * s * s)
        };
        let mut prev = h(ts[0]);
        for &t in &ts[1..] {
            let cur = h(t);
            let tol = MONOTONE_RTOL * prev.abs().max(cur.abs());
            // negative margin means the map increased
            w.update(prev - cur + tol, Some(r), Some(t));
            prev = cur;
        }
    }
    let mut c = Check::new("V4", w.verdict(0.0)).with_worst(&w);
    if let Some(n) = overflow_note(&w) {
        c = c.with_note(n);
    }
    checks.push(c);

    // 3t³[V(r) − V(tr)] − (1 − t³) rV'(r) ≥ −a(1 − t)²(2 + t)/(4r²).
    let mut w = Worst::new();
    for &r in &rs {
        for &t in &ts {
            let t3 = t * t * t;
            let dv = v.deficit(t * r) - v.deficit(r);
            let lhs = 3.0 * t3 * dv - (1.0 - t3) * v.radial_derivative(r);
            let rhs = -a * (1.0 - t).powi(2) * (2.0 + t) / (4.0 * r * r);
            w.update(lhs - rhs, Some(r), Some(t));
        }
    }
    checks.push(
        Check::new("dilation_inequality", w.verdict(SLACK_POTENTIAL_INEQ))
            .with_worst(&w)
            .with_note("V4-dependent"),
    );

    // 3V + rV' ≤ 3V_∞ + a/(2r²).
    let mut w = Worst::new();
    for &r in &rs {
        let m = 3.0 * v.deficit(r) + a / (2.0 * r * r) - v.radial_derivative(r);
        w.update(m, Some(r), None);
    }
    checks.push(
        Check::new("pohozaev_weight_bound", w.verdict(SLACK_POTENTIAL_INEQ))
            .with_worst(&w)
            .with_note("V4-dependent"),
    );

    HypothesisReport {
        samples: *samples,
        checks,
        s0: None,
        family_threshold: family_threshold(v, &rs),
    }
}

// (V2): V ≤ V_∞ on samples, and the deficit decays over the outermost decade.
fn check_v2(v: &Potential, rs: &[f64]) -> Check {
    let mut w = Worst::new();
    for &r in rs {
        w.update(v.deficit(r), Some(r), None);
    }
    let c = Check::new("V2", w.verdict(0.0)).with_worst(&w);
    if c.verdict == Verdict::Fail {
        return c;
    }
    let r_hi = rs[rs.len() - 1];
    let sup_over = |lo: f64, hi: f64| {
        rs.iter()
            .filter(|&&r| r > lo && r <= hi)
            .map(|&r| v.deficit(r).abs())
            .fold(0.0f64, f64::max)
    };
    let outer = sup_over(r_hi / 10.0, r_hi);
    let inner = sup_over(r_hi / 100.0, r_hi / 10.0);
    if outer == 0.0 || outer < inner {
        c
    } else {
        Check {
            verdict: Verdict::Inconclusive,
            ..c
        }
        .with_note("deficit V_inf - V does not decay over the outermost sampled decade")
    }
}

fn family_threshold(v: &Potential, rs: &[f64]) -> Option<FamilyThreshold> {
    let stated = match *v {
        Potential::InversePoly { beta, sigma, .. } => 2.0 * sigma * beta,
        Potential::SineDecay { beta, .. } => 4.0 * beta,
        Potential::ExpDecay { beta, sigma, .. } => {
            let e = (sigma + 2.0) / sigma;
            2.0 * beta * (sigma + 2.0).powf(e) * sigma.powf(-2.0 / sigma) * (-e).exp()
        }
        _ => return None,
    };
    let need = |r: f64| 2.0 * r * r * v.radial_derivative(r);
    let (k, _) =
        rs.iter()
            .map(|&r| need(r))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, x)| {
                if x > bv {
                    (k, x)
                } else {
                    (bk, bv)
                }
            });
    let lo = rs[k.saturating_sub(1)];
    let hi = rs[(k + 1).min(rs.len() - 1)];
    let (r_star, best) = golden_max(need, lo, hi);
    Some(FamilyThreshold {
        family: v.kind().to_string(),
        computed_a_min: best,
        computed_at_r: r_star,
        stated_a_min: stated,
        consistent: best <= stated * (1.0 + 1e-9),
    })
}

/// Golden-section search for the maximum of a unimodal `g` on `[lo, hi]`;
/// returns the better of the refined point and the endpoints.
pub fn golden_max<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-13 * (a.abs() + b.abs()) {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(mid, g(mid)), (lo, g(lo)), (hi, g(hi))].into_iter().fold(
        (mid, f64::NEG_INFINITY),
        |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        },
    )
}

/// Audits (F1)–(F3) on the sampled `t` range; the located `s₀` is stored
/// in the report.
pub fn check_nonlinearity_hypotheses(
    f: &Nonlinearity,
    v_inf: f64,
    samples: &SampleSpec,
) -> HypothesisReport {
    let ts = samples.dilations();
    let t_hi = ts[ts.len() - 1];
    let t_lo = ts[0];
    let mut checks = Vec::new();

    // (F1): C₀ = max |f(t)| / (1 + |t|⁵) over ±t.
    let ratio1 = |t: f64| f.f(t).abs() / (1.0 + t.abs().powi(5));
    let c0 = ts
        .iter()
        .flat_map(|&t| [ratio1(t), ratio1(-t)])
        .fold(0.0f64, f64::max);
    let outer: Vec<f64> = ts
        .iter()
        .filter(|&&t| t >= t_hi / 10.0)
        .map(|&t| ratio1(t).max(ratio1(-t)))
        .collect();
    let mut c = Check::new(
        "F1",
        if !c0.is_finite() {
            Verdict::Inconclusive
        } else if is_nonincreasing(&outer) {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        },
    );
    c.worst_margin = c0.is_finite().then_some(c0);
    c = c.with_note(format!("fitted C0 = {c0:e}"));
    checks.push(c);

    // (F2): f(t)/t → 0 as t → 0 and f(t)/t⁵ → 0 as t → ∞.
    let small: Vec<f64> = ts
        .iter()
        .filter(|&&t| t <= t_lo * 10.0)
        .map(|&t| (f.f(t) / t).abs().max((f.f(-t) / t).abs()))
        .collect();
    let large: Vec<f64> = ts
        .iter()
        .filter(|&&t| t >= t_hi / 10.0)
        .map(|&t| (f.f(t) / t.powi(5)).abs().max((f.f(-t) / t.powi(5)).abs()))
        .collect();
    // near 0 the ratio must shrink as t decreases, i.e. be nondecreasing in t
    let small_ok = is_nondecreasing(&small);
    let large_ok = is_nonincreasing(&large);
    let small_bad = is_strictly_decreasing(&small);
    let large_bad = is_strictly_increasing(&large);
    let verdict = if small_bad || large_bad {
        Verdict::Fail
    } else if small_ok && large_ok {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    let mut c = Check::new("F2", verdict);
    c.worst_margin = large.last().copied();
    c.worst_t = Some(t_hi);
    c = c.with_note(format!(
        "|f(t)/t| at t={t_lo:e}: {:e}; |f(t)/t^5| at t={t_hi:e}: {:e}",
        small.first().copied().unwrap_or(f64::NAN),
        large.last().copied().unwrap_or(f64::NAN)
    ));
    checks.push(c);

    // (F3): first sampled s₀ with F(s₀) > V_∞ s₀²/2.
    let s0 = ts.iter().copied().find(|&s| f.F(s) > 0.5 * v_inf * s * s);
    let mut c = Check::new(
        "F3",
        if s0.is_some() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    );
    if let Some(s) = s0 {
        c.worst_margin = Some(f.F(s) - 0.5 * v_inf * s * s);
        c.worst_t = Some(s);
    }
    checks.push(c);

    HypothesisReport {
        samples: *samples,
        checks,
        s0,
        family_threshold: None,
    }
}

fn is_nonincreasing(x: &[f64]) -> bool {
    x.windows(2)
        .all(|w| w[1] <= w[0] + MONOTONE_RTOL * w[0].abs().max(w[1].abs()))
}

fn is_nondecreasing(x: &[f64]) -> bool {
    x.windows(2)
        .all(|w| w[1] + MONOTONE_RTOL * w[0].abs().max(w[1].abs()) >= w[0])
}

fn is_strictly_increasing(x: &[f64]) -> bool {
    x.len() >= 2 && x.windows(2).all(|w| w[1] > w[0])
}

fn is_strictly_decreasing(x: &[f64]) -> bool {
    x.len() >= 2 && x.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family_i() -> Potential {
        Potential::InversePoly {
            alpha: 2.0,
            beta: 1.0,
            sigma: 2.0,
        }
    }

    #[test]
    fn constant_passes_everything() {
        let v = Potential::Constant { alpha: 1.0 };
        for a in [0.1, 1.0, 10.0] {
            let rep = check_potential_hypotheses(&v, a, &SampleSpec::default());
            assert!(rep.all_pass(), "{rep:?}");
        }
    }

    #[test]
    fn inverse_poly_thresholds() {
        let s = SampleSpec::default();
        let v = family_i();
        let rep = check_potential_hypotheses(&v, 4.0, &s);
        for name in ["V1", "V2", "V3"] {
            assert_eq!(rep.verdict(name), Some(Verdict::Pass), "{name}");
        }
        let rep = check_potential_hypotheses(&v, 20.0, &s);
        assert!(rep.all_pass(), "{rep:?}");
        let rep = check_potential_hypotheses(&v, 1.0, &s);
        let v3 = rep.get("V3").unwrap();
        assert_eq!(v3.verdict, Verdict::Fail);
        assert!(v3.worst_r.unwrap() > 1.0);
        assert!(v3.worst_margin.unwrap() < 0.0);
    }

    #[test]
    fn family_constants_are_consistent() {
        let s = SampleSpec::default();
        let v = Potential::ExpDecay {
            alpha: 2.0,
            beta: 1.0,
            sigma: 2.0,
        };
        let rt = check_potential_hypotheses(&v, 1.0, &s)
            .family_threshold
            .unwrap();
        assert!(rt.consistent);
        assert!((rt.computed_a_min - rt.stated_a_min).abs() < 1e-6 * rt.stated_a_min);
        let v = Potential::SineDecay {
            alpha: 2.0,
            beta: 1.0,
        };
        let rt = check_potential_hypotheses(&v, 1.0, &s)
            .family_threshold
            .unwrap();
        assert!(rt.consistent);
    }

    #[test]
    fn sine_family_fails_v4() {
        let v = Potential::SineDecay {
            alpha: 2.0,
            beta: 1.0,
        };
        let rep = check_potential_hypotheses(&v, 4.0, &SampleSpec::default());
        assert_eq!(rep.verdict("V3"), Some(Verdict::Pass));
        assert_eq!(rep.verdict("V4"), Some(Verdict::Fail));
    }

    #[test]
    fn power_nonlinearities() {
        let s = SampleSpec::default();
        let rep = check_nonlinearity_hypotheses(&Nonlinearity::pure_power(4.0), 1.0, &s);
        assert!(rep.all_pass(), "{rep:?}");
        let s0 = rep.s0.unwrap();
        assert!(s0 > 2f64.sqrt() && s0 <= 2.0);
        let rep = check_nonlinearity_hypotheses(&Nonlinearity::pure_power(6.5), 1.0, &s);
        assert_eq!(rep.verdict("F2"), Some(Verdict::Fail));
        assert_ne!(rep.verdict("F1"), Some(Verdict::Pass));
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, y) = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(y.abs() < 1e-12);
    }
}
