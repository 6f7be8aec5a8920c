//! Sharp constants for both operators, the families that approach them, and
//! ratio experiments `||T f||_{q,inf} / ||f||_p` against the formulas.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::pow;
use crate::operators::OperatorKind;
use crate::params::SpaceParams;
use crate::profile::{lp_weighted_norm, Piece, RadialProfile, Term};
use crate::reduction::{reduced_params_adjoint, reduced_params_forward};
use crate::sampling::stream_rng;
use crate::weaknorm::{weak_norm, SupKind};

/// Relative slack allowed above the formula constant.
pub const UPPER_BOUND_SLACK: f64 = 1e-8;
/// Differences of gaps below this fraction of the constant count as ties.
const TREND_TOL: f64 = 1e-12;

/// `[n(p-1)/(n(p-1)-alpha)]^{1/p'} (n/(n+gamma))^{1/q} v_n^{beta/n+1/q-1/p}`.
///
/// At `p = 1` the first factor is 1.
pub fn c_sharp(params: &SpaceParams) -> f64 {
    let SpaceParams { p, q, alpha, beta, gamma, .. } = *params;
    let n = params.nf();
    let ipc = params.inv_p_conj();
    let first = if ipc == 0.0 {
        1.0
    } else {
        pow(n * (p - 1.0) / (n * (p - 1.0) - alpha), ipc)
    };
    first * pow(n / (n + gamma), 1.0 / q) * pow(params.geom().v_n, beta / n + 1.0 / q - 1.0 / p)
}

/// `(q/p')^{1/p'} (n/(n+gamma))^{1/p'+1/q} v_n^{beta/n+1/q-1/p}`.
///
/// At `p = 1` the first factor is 1.
pub fn c_sharp_adjoint(params: &SpaceParams) -> f64 {
    let SpaceParams { p, q, beta, gamma, .. } = *params;
    let n = params.nf();
    let ipc = params.inv_p_conj();
    let first = if ipc == 0.0 { 1.0 } else { pow(q * ipc, ipc) };
    first * pow(n / (n + gamma), ipc + 1.0 / q) * pow(params.geom().v_n, beta / n + 1.0 / q - 1.0 / p)
}

/// The formula constant a ratio for `kind` is compared with.
pub fn formula_constant(params: &SpaceParams, kind: OperatorKind) -> f64 {
    match kind {
        OperatorKind::Adjoint => c_sharp_adjoint(params),
        OperatorKind::Forward | OperatorKind::ForwardP(_) => c_sharp(params),
    }
}

/// `chi_(0, v_n^{-1/n} - delta)`.
pub fn extremizer_forward(delta: f64, params: &SpaceParams) -> Result<RadialProfile> {
    if params.alpha != 0.0 {
        return Err(Error::Range(format!(
            "the ball family needs alpha = 0, got {}; use the reduced family",
            params.alpha
        )));
    }
    let edge = pow(params.geom().v_n, -1.0 / params.nf());
    if !(delta > 0.0 && delta < edge) {
        return Err(Error::Range(format!("delta must lie in (0, {edge}), got {delta}")));
    }
    RadialProfile::indicator(0.0, edge - delta)
}

/// `r^{(beta-n)/(p-1)} chi_(1, inf)`, for `p > 1`.
pub fn extremizer_adjoint(params: &SpaceParams) -> Result<RadialProfile> {
    if params.p == 1.0 {
        return Err(Error::Range(
            "the power family needs p > 1; use the shell family at p = 1".into(),
        ));
    }
    RadialProfile::power(1.0, (params.beta - params.nf()) / (params.p - 1.0), 1.0, f64::INFINITY)
}

/// `chi_(1, 1+eps)`, the thin shell used at `p = 1`.
pub fn shell(eps: f64) -> Result<RadialProfile> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Range(format!("shell width must be positive, got {eps}")));
    }
    RadialProfile::indicator(1.0, 1.0 + eps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessReport {
    pub params: SpaceParams,
    pub kind: OperatorKind,
    pub formula_constant: f64,
    pub test_function: String,
    pub profile: RadialProfile,
    pub ratio: f64,
    /// `formula_constant - ratio`.
    pub gap: f64,
    pub witness_lambda: Option<f64>,
    pub attained: SupKind,
    pub family_param: Option<f64>,
    /// For families evaluated through the reduction, the ratio of the
    /// pulled-back profile under the operator itself.
    pub direct_ratio: Option<f64>,
    pub note: Option<String>,
}

impl SharpnessReport {
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.formula_constant
    }

    pub fn within_bound(&self) -> bool {
        self.ratio <= self.formula_constant * (1.0 + UPPER_BOUND_SLACK)
    }
}

/// `||T f||_{L^{q,inf}(|x|^gamma)} / ||f||_{L^p(|x|^alpha)}`.
pub fn ratio(f: &RadialProfile, params: &SpaceParams, kind: OperatorKind) -> Result<SharpnessReport> {
    let norm = lp_weighted_norm(f, params);
    if norm == 0.0 {
        return Err(Error::Range("the test function is zero".into()));
    }
    if !norm.is_finite() {
        return Err(Error::Divergence("the test function is not in the source space".into()));
    }
    let image = kind.apply(f, params)?;
    let w = weak_norm(&image, params)?;
    let formula = formula_constant(params, kind);
    let r = w.value / norm;
    Ok(SharpnessReport {
        params: *params,
        kind,
        formula_constant: formula,
        test_function: String::from("custom"),
        profile: f.clone(),
        ratio: r,
        gap: formula - r,
        witness_lambda: w.witness_lambda,
        attained: w.attained,
        family_param: None,
        direct_ratio: None,
        note: None,
    })
}

/// Which family a sweep runs for the given tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Balls of radius `v_n^{-1/n} - delta` under the auxiliary operator.
    Ball,
    /// One-dimensional balls pulled back through the forward substitution.
    ReducedBall,
    /// The adjoint power extremizer.
    Power,
    /// The adjoint power extremizer on the line, pulled back.
    ReducedPower,
    /// Thin shells `chi_(1, 1+eps)` for `p = 1`.
    Shell,
}

impl Family {
    pub fn for_params(params: &SpaceParams, kind: OperatorKind) -> Family {
        let p_one = params.p == 1.0;
        match (kind, p_one, params.alpha == 0.0) {
            (OperatorKind::Adjoint, true, _) => Family::Shell,
            (OperatorKind::Adjoint, false, true) => Family::Power,
            (OperatorKind::Adjoint, false, false) => Family::ReducedPower,
            (_, _, true) => Family::Ball,
            (_, true, false) => Family::Shell,
            (_, false, false) => Family::ReducedBall,
        }
    }

    /// Whether the family takes a parameter driven to zero.
    pub fn parametrized(&self) -> bool {
        !matches!(self, Family::Power | Family::ReducedPower)
    }
}

/// `delta` or `eps` values a sweep uses when none are given.
pub fn default_schedule(params: &SpaceParams, kind: OperatorKind) -> Vec<f64> {
    if Family::for_params(params, kind).parametrized() {
        alloc::vec![1e-1, 1e-2, 1e-3, 1e-4]
    } else {
        alloc::vec![f64::NAN]
    }
}

const POWER_NOTE: &str = "power family with exponent (beta-n)/(p-1)";
const BALL_NOTE: &str = "level sets taken of H_{beta,p} f, not of the adjoint";

/// One member of the family for `(params, kind)` at parameter `t`. `kind`
/// names the operator; the forward ball families are evaluated under the
/// auxiliary operator `H_{beta,p}`.
pub fn sweep_entry(params: &SpaceParams, kind: OperatorKind, t: f64) -> Result<SharpnessReport> {
    let kind = match kind {
        OperatorKind::ForwardP(_) => OperatorKind::Forward,
        k => k,
    };
    let family = Family::for_params(params, kind);
    let mut report = match family {
        Family::Ball => {
            let f = extremizer_forward(t, params)?;
            let mut r = ratio(&f, params, OperatorKind::ForwardP(params.p))?;
            r.test_function = format!("ball(v_n^(-1/n) - {t:e})");
            r.note = Some(String::from(BALL_NOTE));
            r
        }
        Family::Shell => {
            let mut r = ratio(&shell(t)?, params, kind)?;
            r.test_function = format!("shell(1, 1 + {t:e})");
            r
        }
        Family::Power => {
            let mut r = ratio(&extremizer_adjoint(params)?, params, kind)?;
            r.test_function = String::from("power((beta-n)/(p-1), 1, inf)");
            r.note = Some(String::from(POWER_NOTE));
            r
        }
        Family::ReducedBall => {
            let red = reduced_params_forward(params)?;
            let line = red.one_dim();
            let g = extremizer_forward(t, &line)?;
            let on_line = ratio(&g, &line, OperatorKind::ForwardP(params.p))?;
            let f = red.pull_back(&g)?;
            let direct = ratio(&f, params, OperatorKind::Forward)?;
            let value = red.ratio_factor() * on_line.ratio;
            let formula = c_sharp(params);
            SharpnessReport {
                params: *params,
                kind,
                formula_constant: formula,
                test_function: format!("pullback(ball(1/2 - {t:e}))"),
                profile: f,
                ratio: value,
                gap: formula - value,
                witness_lambda: on_line.witness_lambda.map(|l| l * red.operator_factor()),
                attained: on_line.attained,
                family_param: None,
                direct_ratio: Some(direct.ratio),
                note: Some(String::from(BALL_NOTE)),
            }
        }
        Family::ReducedPower => {
            let red = reduced_params_adjoint(params)?;
            let line = red.one_dim();
            let g = extremizer_adjoint(&line)?;
            let on_line = ratio(&g, &line, OperatorKind::Adjoint)?;
            let f = red.pull_back(&g)?;
            let mut r = ratio(&f, params, OperatorKind::Adjoint)?;
            let value = red.ratio_factor() * on_line.ratio;
            r.test_function = String::from("pullback(power((beta_red-1)/(p-1), 1, inf))");
            r.direct_ratio = Some(r.ratio);
            r.ratio = value;
            r.gap = r.formula_constant - value;
            r.note = Some(String::from(POWER_NOTE));
            r
        }
    };
    report.kind = kind;
    report.family_param = if family.parametrized() { Some(t) } else { None };
    Ok(report)
}

/// How gaps evolve along a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    StrictlyDecreasing,
    /// Non-increasing with ties, e.g. a family whose ratio is constant.
    NonIncreasing,
    Single,
    NotMonotone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub reports: Vec<SharpnessReport>,
    pub trend: Trend,
}

impl Sweep {
    /// Relative gap of the last report.
    pub fn final_relative_gap(&self) -> f64 {
        self.reports.last().map_or(f64::NAN, |r| r.relative_gap())
    }
}

pub fn trend(reports: &[SharpnessReport]) -> Trend {
    if reports.len() < 2 {
        return Trend::Single;
    }
    let mut strict = true;
    for w in reports.windows(2) {
        let tol = TREND_TOL * w[0].formula_constant;
        let d = w[1].gap - w[0].gap;
        if d > tol {
            return Trend::NotMonotone;
        }
        if d > -tol {
            strict = false;
        }
    }
    if strict {
        Trend::StrictlyDecreasing
    } else {
        Trend::NonIncreasing
    }
}

/// Runs [`sweep_entry`] over `schedule` in order. Families without a
/// parameter produce one report whatever the schedule.
pub fn sharpness_sweep(params: &SpaceParams, kind: OperatorKind, schedule: &[f64]) -> Result<Sweep> {
    let family = Family::for_params(params, kind);
    let reports = if family.parametrized() {
        if schedule.is_empty() {
            return Err(Error::Range("empty schedule".into()));
        }
        schedule
            .iter()
            .map(|&t| sweep_entry(params, kind, t))
            .collect::<Result<Vec<_>>>()?
    } else {
        alloc::vec![sweep_entry(params, kind, f64::NAN)?]
    };
    Ok(Sweep {
        trend: trend(&reports),
        reports,
    })
}

/// A random non-negative profile in the source space of `params`:
/// one to five power pieces on `[0.05, 20]`, sometimes with a power head
/// on `(0, lo)` or a power tail on `(hi, inf)` inside the integrability
/// windows.
pub fn random_admissible_profile<R: Rng>(rng: &mut R, params: &SpaceParams) -> RadialProfile {
    let crit = -(params.alpha + params.nf()) / params.p;
    let count = rng.random_range(1..=5);
    let mut pieces = Vec::new();
    let start: f64 = rng.random_range(0.05..0.5);
    let mut lo = start;
    for _ in 0..count {
        let hi = (lo + rng.random_range(0.05..4.0)).min(20.0);
        if !(hi > lo) {
            break;
        }
        let c = rng.random_range(0.1..3.0);
        let k = if lo >= 1.0 && rng.random_bool(0.2) { 1 } else { 0 };
        pieces.push(Piece::new(lo, hi, alloc::vec![Term::new(c, rng.random_range(-2.0..2.0), k)]));
        lo = hi + if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..1.0) };
        if lo >= 20.0 {
            break;
        }
    }
    let end = pieces.last().map_or(start, |p| p.hi);
    if rng.random_bool(0.25) {
        let a = crit + rng.random_range(0.1..1.0);
        pieces.insert(0, Piece::new(0.0, start, alloc::vec![Term::new(rng.random_range(0.1..3.0), a, 0)]));
    }
    if rng.random_bool(0.25) {
        let a = crit - rng.random_range(0.1..1.5);
        pieces.push(Piece::new(end, f64::INFINITY, alloc::vec![Term::new(rng.random_range(0.1..3.0), a, 0)]));
    }
    RadialProfile::new(pieces).expect("generated pieces are ordered and finite")
}

/// Outcome of ratio checks on random admissible profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundSummary {
    pub checked: usize,
    /// Largest `ratio / formula` seen.
    pub max_ratio: f64,
    /// Profiles whose ratio exceeded the formula by more than the slack.
    pub violations: Vec<RadialProfile>,
    /// Profiles whose ratio could not be evaluated, with the error.
    pub failures: Vec<(RadialProfile, Error)>,
}

impl UpperBoundSummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.failures.is_empty()
    }
}

/// Ratio of random profile number `index` of run `seed`.
pub fn random_ratio(
    params: &SpaceParams,
    kind: OperatorKind,
    seed: u64,
    index: u64,
) -> (RadialProfile, Result<SharpnessReport>) {
    let mut rng = stream_rng(seed, index);
    let f = random_admissible_profile(&mut rng, params);
    let r = ratio(&f, params, kind);
    (f, r)
}

pub fn summarize_upper_bound<I>(results: I) -> UpperBoundSummary
where
    I: IntoIterator<Item = (RadialProfile, Result<SharpnessReport>)>,
{
    let mut s = UpperBoundSummary {
        checked: 0,
        max_ratio: 0.0,
        violations: Vec::new(),
        failures: Vec::new(),
    };
    for (f, r) in results {
        s.checked += 1;
        match r {
            Ok(rep) => {
                s.max_ratio = s.max_ratio.max(rep.ratio / rep.formula_constant);
                if !rep.within_bound() {
                    s.violations.push(f);
                }
            }
            Err(e) => s.failures.push((f, e)),
        }
    }
    s
}

/// `count` random profiles checked sequentially.
pub fn upper_bound_check(params: &SpaceParams, kind: OperatorKind, count: usize, seed: u64) -> UpperBoundSummary {
    summarize_upper_bound((0..count as u64).map(|i| random_ratio(params, kind, seed, i)))
}
