//! Small-level behaviour of `lambda |{H_beta f > lambda}|^{1/q}` in the
//! unweighted case: it tends to `||f||_1` when `p = 1` and to zero when
//! `p > 1`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{pow, rel_diff};
use crate::operators::{cumulative_mass, dilate, hardy_forward};
use crate::params::SpaceParams;
use crate::profile::RadialProfile;
use crate::weaknorm::LevelSets;

/// Smallest level of the default schedule for `p = 1`.
pub const LAMBDA_MIN_P1: f64 = 1e-8;
/// Smallest level of the default schedule for `p > 1`, where the decay can
/// be as slow as `lambda^{1/3}`.
pub const LAMBDA_MIN_DECAY: f64 = 1e-12;
const LEVELS_PER_DECADE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct LimitTrace {
    pub params: SpaceParams,
    /// Strictly decreasing.
    pub lambdas: Vec<f64>,
    pub scores: Vec<f64>,
    pub extrapolated_limit: f64,
    /// `||f||_1` for `p = 1`, zero otherwise.
    pub target: f64,
    /// `lambda |{H f >= lambda}|^{1/q}` at `lambda = 1`, the scale decay is
    /// measured against when `p > 1`.
    pub reference_score: f64,
}

impl LimitTrace {
    /// For `p = 1`, `|limit - target| / target`. For `p > 1`, the last score
    /// over the reference score.
    pub fn rel_err(&self) -> f64 {
        if self.params.p == 1.0 {
            if self.target == 0.0 {
                self.extrapolated_limit.abs()
            } else {
                (self.extrapolated_limit - self.target).abs() / self.target
            }
        } else {
            let last = self.scores.last().copied().unwrap_or(0.0);
            if self.reference_score == 0.0 {
                last
            } else {
                last / self.reference_score
            }
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.rel_err() <= tol
    }

    /// Whether the scores are monotone, up to rounding, over the last
    /// `tail` levels.
    pub fn eventually_monotone(&self, tail: usize) -> bool {
        let s = &self.scores[self.scores.len().saturating_sub(tail)..];
        let tol = 1e-12 * s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        s.windows(2).all(|w| w[1] >= w[0] - tol) || s.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// `10^0` down to `lambda_min`, four levels per decade.
pub fn default_schedule(p: f64) -> Vec<f64> {
    let min = if p == 1.0 { LAMBDA_MIN_P1 } else { LAMBDA_MIN_DECAY };
    let decades = -libm::log10(min);
    let count = libm::round(decades * LEVELS_PER_DECADE as f64) as usize;
    (0..=count)
        .map(|k| pow(10.0, -(k as f64) / LEVELS_PER_DECADE as f64))
        .collect()
}

/// Aitken's delta-squared on the last three points, falling back to the last
/// score when the sequence is not contracting.
pub fn extrapolate(scores: &[f64]) -> f64 {
    match scores {
        [] => 0.0,
        [x] => *x,
        [.., a, b, c] => {
            let (d1, d2) = (b - a, c - b);
            let den = d2 - d1;
            if den == 0.0 || d2 == 0.0 || (d2 / d1).abs() >= 1.0 {
                return *c;
            }
            let limit = c - d2 * d2 / den;
            if (limit - c).abs() > (c - a).abs() {
                *c
            } else {
                limit
            }
        }
        [.., c] => *c,
    }
}

fn check_lebesgue(params: &SpaceParams) -> Result<()> {
    if params.alpha != 0.0 || params.gamma != 0.0 {
        return Err(Error::Range(format!(
            "limiting experiments are unweighted, got alpha = {}, gamma = {}",
            params.alpha, params.gamma
        )));
    }
    Ok(())
}

pub fn limiting_weak(f: &RadialProfile, params: &SpaceParams, lambdas: &[f64]) -> Result<LimitTrace> {
    check_lebesgue(params)?;
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0)) || lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Range("levels must be positive and strictly decreasing".into()));
    }
    let h = hardy_forward(f, params)?;
    let target = if params.p == 1.0 { f.l1_norm(params.n)? } else { 0.0 };
    if h.is_zero() {
        return Ok(LimitTrace {
            params: *params,
            lambdas: lambdas.to_vec(),
            scores: alloc::vec![0.0; lambdas.len()],
            extrapolated_limit: 0.0,
            target,
            reference_score: 0.0,
        });
    }
    let sets = LevelSets::new(&h, 0.0, params.n)?;
    let scores = lambdas
        .iter()
        .map(|&l| sets.score(l, params.q, true))
        .collect::<Result<Vec<f64>>>()?;
    let reference_score = sets.score(1.0, params.q, false)?;
    let mut limit = extrapolate(&scores);
    if params.p > 1.0 {
        limit = limit.max(0.0);
    }
    Ok(LimitTrace {
        params: *params,
        lambdas: lambdas.to_vec(),
        scores,
        extrapolated_limit: limit,
        target,
        reference_score,
    })
}

/// Both sides of `lambda m(f_t, lambda)^{1/q} = t^{n-beta} lambda m(f, t^{n-beta} lambda)^{1/q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCheck {
    pub dilated: f64,
    pub rescaled: f64,
    pub residual: f64,
}

/// Compares the score of `f_t` at `lambda` with the rescaled score of `f`;
/// `p = 1` so that `1/q = (n-beta)/n`.
pub fn scaling_identity_check(f: &RadialProfile, t: f64, lambda: f64, params: &SpaceParams) -> Result<ScalingCheck> {
    check_lebesgue(params)?;
    if params.p != 1.0 {
        return Err(Error::Range(format!("the scaling identity needs p = 1, got {}", params.p)));
    }
    if !(lambda > 0.0) {
        return Err(Error::Range(format!("lambda must be positive, got {lambda}")));
    }
    let n = params.nf();
    let e = (n - params.beta) / n;
    let ft = dilate(f, t, params.n)?;
    let m_t = LevelSets::new(&hardy_forward(&ft, params)?, 0.0, params.n)?.measure(lambda, true)?;
    let s = pow(t, n - params.beta);
    let m = LevelSets::new(&hardy_forward(f, params)?, 0.0, params.n)?.measure(s * lambda, true)?;
    let dilated = lambda * pow(m_t, e);
    let rescaled = s * lambda * pow(m, e);
    Ok(ScalingCheck {
        dilated,
        rescaled,
        residual: rel_diff(dilated, rescaled),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassRow {
    pub t: f64,
    /// Smallest `R` with `int_{B(0,R)} f > ||f||_1 - eps`.
    pub radius: f64,
    /// `R t`, the radius that captures the same mass of `f_t`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MassConcentration {
    NotApplicable(String),
    Rows(Vec<MassRow>),
}

impl MassConcentration {
    /// Whether `R t` decreases along the schedule.
    pub fn concentrates(&self) -> bool {
        match self {
            MassConcentration::NotApplicable(_) => false,
            MassConcentration::Rows(rows) => rows.windows(2).all(|w| w[1].scaled <= w[0].scaled),
        }
    }
}

/// The radius inside which `f` keeps all but `epsilon` of its mass, and how
/// it shrinks under `f -> f_t` along `t_schedule`.
pub fn mass_concentration_check(
    f: &RadialProfile,
    n: u32,
    epsilon: f64,
    t_schedule: &[f64],
) -> Result<MassConcentration> {
    if !(epsilon > 0.0) {
        return Err(Error::Range(format!("epsilon must be positive, got {epsilon}")));
    }
    let total = f.l1_norm(n)?;
    if !total.is_finite() {
        return Ok(MassConcentration::NotApplicable(String::from("||f||_1 is infinite")));
    }
    let radius = if epsilon >= total {
        0.0
    } else {
        mass_radius(&cumulative_mass(f, n)?, total - epsilon)
    };
    Ok(MassConcentration::Rows(
        t_schedule
            .iter()
            .map(|&t| MassRow { t, radius, scaled: radius * t })
            .collect(),
    ))
}

// Smallest r with mass(r) > level, for non-decreasing continuous `mass`.
fn mass_radius(mass: &RadialProfile, level: f64) -> f64 {
    let exceeds = |r: f64| mass.value(r) > level;
    let mut lo = 0.0;
    let mut hi = None;
    for p in mass.pieces() {
        let end = if p.hi.is_finite() { p.hi } else { p.lo.max(1.0) * 2.0 };
        if exceeds(end) {
            hi = Some(end);
            break;
        }
        lo = end;
    }
    let mut hi = match hi {
        Some(h) => h,
        None => {
            let mut h = lo.max(1.0);
            while !exceeds(h) && h < 1e300 {
                h *= 2.0;
            }
            h
        }
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exceeds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
