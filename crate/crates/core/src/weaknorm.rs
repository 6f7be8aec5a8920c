//! Power-weighted superlevel measures and the weak `L^{q,inf}(|x|^gamma)`
//! quasi-norm `sup_lambda lambda mu_gamma({g > lambda})^{1/q}` of radial
//! profiles.
//!
//! Each piece is split at its stationary points into monotone segments once;
//! a level set is then one bisection per segment. The supremum over lambda is
//! searched on the segment end values, geometric grids between them and
//! golden-section refinement, and the two limits `lambda -> 0` and
//! `lambda -> inf` are read off the dominant terms at `r -> inf` and `r -> 0`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln, pow};
use crate::params::{geom, SpaceParams};
use crate::profile::RadialProfile;

const GRID_PER_BRACKET: usize = 32;
const GRID_PER_DECADE: f64 = 16.0;
/// Levels closer than this relative distance are probed once.
const MERGE_TOL: f64 = 1e-12;
const NOISE_FLOOR: f64 = 1e-14;
const END_DECADES: f64 = 12.0;
const END_PER_DECADE: f64 = 8.0;
const MAX_REFINED_PEAKS: usize = 8;
const GOLDEN_LOG_TOL: f64 = 1e-11;
const CONSTANT_TOL: f64 = 1e-12;
const CONSTANT_DECADES: f64 = 3.0;
/// Tolerance for deciding that a limit exponent is exactly zero.
const CRITICAL_EXPONENT_TOL: f64 = 1e-10;

/// How the supremum was realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupKind {
    /// At a finite witness level.
    Attained,
    /// Approached as `lambda -> 0`.
    LimitZero,
    /// Approached as `lambda -> inf`.
    LimitInf,
    /// `lambda mu^{1/q}` does not depend on `lambda`.
    ConstantInLambda,
}

impl SupKind {
    pub fn tag(&self) -> &'static str {
        match self {
            SupKind::Attained => "SUP_ATTAINED",
            SupKind::LimitZero => "SUP_LIMIT_ZERO",
            SupKind::LimitInf => "SUP_LIMIT_INF",
            SupKind::ConstantInLambda => "CONSTANT_IN_LAMBDA",
        }
    }
}

/// One evaluation of `lambda mu^{1/q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub lambda: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakNormResult {
    pub value: f64,
    pub witness_lambda: Option<f64>,
    pub attained: SupKind,
    /// Every probe evaluated, sorted by lambda.
    pub probes: Vec<Probe>,
}

#[derive(Debug, Clone)]
struct Segment {
    piece: usize,
    lo: f64,
    hi: f64,
    v_lo: f64,
    v_hi: f64,
    flat: bool,
}

/// A profile prepared for repeated superlevel-set queries.
#[derive(Debug, Clone)]
pub struct LevelSets {
    profile: RadialProfile,
    segments: Vec<Segment>,
    dim: f64,
    omega: f64,
}

fn check_gamma(gamma: f64, n: u32) -> Result<()> {
    if !(gamma > -(n as f64)) {
        return Err(Error::Range(format!("gamma must exceed -n = -{n}, got {gamma}")));
    }
    Ok(())
}

impl LevelSets {
    /// Splits every piece of `g` into monotone segments for the measure
    /// `|x|^gamma dx` on `R^n`.
    pub fn new(g: &RadialProfile, gamma: f64, n: u32) -> Result<Self> {
        check_gamma(gamma, n)?;
        let omega = geom(n)?.omega_n;
        let mut segments = Vec::new();
        for (idx, piece) in g.pieces().iter().enumerate() {
            let h = piece.exp_poly(0.0);
            let flat = h.is_constant();
            let mut cuts = Vec::new();
            cuts.push(piece.lo);
            if !flat {
                let crit = h.derivative().roots(piece.u_lo(), piece.u_hi());
                cuts.extend(crit.into_iter().map(exp).filter(|&r| r > piece.lo && r < piece.hi));
            }
            cuts.push(piece.hi);
            cuts.dedup();
            for w in cuts.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let v_lo = if lo == piece.lo { piece.value_at_lo() } else { piece.value(lo) };
                let v_hi = if hi == piece.hi { piece.value_at_hi() } else { piece.value(hi) };
                segments.push(Segment {
                    piece: idx,
                    lo,
                    hi,
                    v_lo,
                    v_hi,
                    flat,
                });
            }
        }
        Ok(LevelSets {
            profile: g.clone(),
            segments,
            dim: n as f64 + gamma,
            omega,
        })
    }

    /// The radius in segment `s` where the profile crosses `lambda`, the end
    /// values lying on opposite sides, with its logarithm. The radius
    /// overflows to `inf` for slowly decaying tails; the logarithm does not.
    fn crossing(&self, s: &Segment, lambda: f64) -> (f64, f64) {
        let piece = &self.profile.pieces()[s.piece];
        let (u_lo, u_hi) = (ln(s.lo), ln(s.hi));
        if let [t] = piece.terms.as_slice() {
            if t.log_power == 0 && t.exponent != 0.0 && t.coeff > 0.0 {
                let r = pow(lambda / t.coeff, 1.0 / t.exponent);
                if r.is_finite() {
                    let r = r.clamp(s.lo, s.hi);
                    return (r, ln(r));
                }
                let u = ((ln(lambda) - ln(t.coeff)) / t.exponent).clamp(u_lo, u_hi);
                return (exp(u), u);
            }
        }
        let h = piece.exp_poly(lambda);
        let sign = |v: f64| if v > lambda { 1 } else { -1 };
        let (s_lo, s_hi) = (sign(s.v_lo), sign(s.v_hi));
        match h.bracketed_root(u_lo, u_hi, s_lo, s_hi) {
            Some(u) => {
                let u = u.clamp(u_lo, u_hi);
                (exp(u).clamp(s.lo, s.hi), u)
            }
            // the crossing is beyond |ln r| = 1e6: numerically at an end
            None => {
                if u_lo.is_infinite() {
                    (s.lo, u_lo)
                } else {
                    (s.hi, u_hi)
                }
            }
        }
    }

    /// Radial intervals `(a, b, ln b)` making up the superlevel set.
    fn spans(&self, lambda: f64, strict: bool) -> Result<Vec<(f64, f64, f64)>> {
        let above = |v: f64| if strict { v > lambda } else { v >= lambda };
        let mut spans = Vec::new();
        for s in &self.segments {
            let whole = (s.lo, s.hi, ln(s.hi));
            let span = if s.flat {
                if above(s.v_lo) {
                    whole
                } else {
                    continue;
                }
            } else {
                let (lo_in, hi_in) = (s.v_lo > lambda, s.v_hi > lambda);
                match (lo_in, hi_in) {
                    (true, true) => whole,
                    (false, false) => continue,
                    (true, false) if s.v_hi == lambda => whole,
                    (false, true) if s.v_lo == lambda => whole,
                    (true, false) => {
                        let (b, u) = self.crossing(s, lambda);
                        (s.lo, b, u)
                    }
                    (false, true) => (self.crossing(s, lambda).0, s.hi, ln(s.hi)),
                }
            };
            if span.2 == f64::INFINITY {
                return Err(Error::Divergence(format!(
                    "the set where the profile exceeds {lambda} has infinite measure"
                )));
            }
            if span.1 > span.0 {
                spans.push(span);
            }
        }
        Ok(spans)
    }

    /// `ln mu_gamma` of the superlevel set, finite even when the measure
    /// itself overflows.
    fn log_measure(&self, spans: &[(f64, f64, f64)]) -> f64 {
        let top = spans.iter().map(|s| self.dim * s.2).fold(f64::NEG_INFINITY, f64::max);
        let scaled: f64 = spans
            .iter()
            .map(|&(a, _, u)| exp(self.dim * u - top) - exp(self.dim * ln(a) - top))
            .sum();
        ln(self.omega / self.dim) + top + ln(scaled)
    }

    fn direct_measure(&self, spans: &[(f64, f64, f64)]) -> f64 {
        let total: f64 = spans.iter().map(|&(a, b, _)| pow(b, self.dim) - pow(a, self.dim)).sum();
        self.omega / self.dim * total
    }

    /// `mu_gamma({g > lambda})`, or `{g >= lambda}` when `strict` is false.
    /// Sets too large for `f64` measure `inf`.
    pub fn measure(&self, lambda: f64, strict: bool) -> Result<f64> {
        let spans = self.spans(lambda, strict)?;
        let m = self.direct_measure(&spans);
        Ok(if m.is_finite() { m } else { exp(self.log_measure(&spans)) })
    }

    /// `lambda mu^{1/q}`, through logarithms when the measure overflows.
    pub fn score(&self, lambda: f64, q: f64, strict: bool) -> Result<f64> {
        let spans = self.spans(lambda, strict)?;
        let m = self.direct_measure(&spans);
        if m.is_finite() {
            return Ok(lambda * pow(m, 1.0 / q));
        }
        Ok(exp(ln(lambda) + self.log_measure(&spans) / q))
    }

    /// Finite positive end values of the monotone segments: the only levels
    /// where `lambda -> mu(lambda)` can jump or kink.
    pub fn candidates(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self
            .segments
            .iter()
            .flat_map(|s| [s.v_lo, s.v_hi])
            .filter(|v| v.is_finite() && *v > 0.0)
            .collect();
        c.sort_by(f64::total_cmp);
        c.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL * b.abs());
        // values at rounding level of the largest one are zeros in disguise
        let top = c.last().copied().unwrap_or(0.0);
        c.retain(|&v| v > NOISE_FLOOR * top);
        c
    }
}

/// `mu_gamma({x in R^n : g(|x|) > lambda})`.
pub fn superlevel_measure(g: &RadialProfile, lambda: f64, gamma: f64, n: u32) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Range(format!("lambda must be positive, got {lambda}")));
    }
    LevelSets::new(g, gamma, n)?.measure(lambda, true)
}

/// `(omega_n int |g|^q r^{gamma+n-1} dr)^{1/q}`; `+inf` when divergent.
pub fn strong_norm(g: &RadialProfile, q: f64, gamma: f64, n: u32) -> Result<f64> {
    check_gamma(gamma, n)?;
    if !(q >= 1.0) {
        return Err(Error::Range(format!("q must be at least 1, got {q}")));
    }
    let omega = geom(n)?.omega_n;
    Ok(pow(omega * g.power_integral(q, gamma + n as f64 - 1.0), 1.0 / q))
}

/// `(lim_{lambda->0}, lim_{lambda->inf})` of `lambda mu^{1/q}`.
fn limits(g: &RadialProfile, gamma: f64, n: u32, q: f64) -> Result<(f64, f64)> {
    let omega = geom(n)?.omega_n;
    let dim = n as f64 + gamma;
    let pieces = g.pieces();
    let mut small = 0.0;
    let mut large = 0.0;
    if let Some(last) = pieces.last().filter(|p| p.hi.is_infinite()) {
        let h = last.exp_poly(0.0);
        let lim = h.limit_pos_inf();
        if lim > 0.0 {
            return Err(Error::Divergence(format!(
                "profile tends to {lim} at infinity; small levels have infinite measure"
            )));
        }
        let c = h.dominant_coeff(false).unwrap_or(0.0);
        if lim == 0.0 && c > 0.0 {
            let (a, d) = h.dominant_pos().expect("non-zero piece");
            // level set grows as lambda -> 0; the score must not blow up
            let e = 1.0 - dim / (q * a.abs());
            if e.abs() <= CRITICAL_EXPONENT_TOL && d == 0 {
                small = c * pow(omega / dim, 1.0 / q);
            } else if e < 0.0 || e.abs() <= CRITICAL_EXPONENT_TOL {
                return Err(Error::Divergence(format!(
                    "lambda mu^(1/q) is unbounded as lambda -> 0 (tail r^{a})"
                )));
            }
        }
    }
    if let Some(first) = pieces.first().filter(|p| p.lo == 0.0) {
        let h = first.exp_poly(0.0);
        if h.limit_neg_inf() == f64::INFINITY {
            let (a, d) = h.dominant_neg().expect("non-zero piece");
            if a < 0.0 {
                let c = h.dominant_coeff(true).expect("non-zero piece");
                // level set shrinks to r = 0 as lambda -> inf
                let e = 1.0 - dim / (q * a.abs());
                if e.abs() <= CRITICAL_EXPONENT_TOL && d == 0 {
                    large = c * pow(omega / dim, 1.0 / q);
                } else if e > 0.0 || e.abs() <= CRITICAL_EXPONENT_TOL {
                    return Err(Error::Divergence(format!(
                        "lambda mu^(1/q) is unbounded as lambda -> inf (singularity r^{a})"
                    )));
                }
            }
        }
    }
    Ok((small, large))
}

fn geometric(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (ln(lo), ln(hi));
    (1..count).map(move |i| exp(a + (b - a) * i as f64 / count as f64))
}

/// The weak `L^{q,inf}(|x|^gamma)` quasi-norm of `g` on `R^n`, with `q`,
/// `gamma` and `n` taken from `params`.
pub fn weak_norm(g: &RadialProfile, params: &SpaceParams) -> Result<WeakNormResult> {
    weak_norm_with(g, params.q, params.gamma, params.n)
}

/// [`weak_norm`] with explicit `q`, `gamma`, `n`.
pub fn weak_norm_with(g: &RadialProfile, q: f64, gamma: f64, n: u32) -> Result<WeakNormResult> {
    if g.is_zero() {
        return Ok(WeakNormResult {
            value: 0.0,
            witness_lambda: None,
            attained: SupKind::LimitZero,
            probes: Vec::new(),
        });
    }
    let sets = LevelSets::new(g, gamma, n)?;
    let (small, large) = limits(g, gamma, n, q)?;
    let cands = sets.candidates();

    let mut lambdas: Vec<f64> = Vec::new();
    let (lo_anchor, hi_anchor) = match (cands.first(), cands.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => {
            let r = reference_level(g);
            (r, r)
        }
    };
    let decades = END_DECADES;
    let end_count = (decades * END_PER_DECADE) as usize;
    lambdas.extend(geometric(lo_anchor * pow(10.0, -decades), lo_anchor, end_count));
    lambdas.push(lo_anchor * pow(10.0, -decades));
    lambdas.extend(geometric(hi_anchor, hi_anchor * pow(10.0, decades), end_count));
    lambdas.push(hi_anchor * pow(10.0, decades));
    for w in cands.windows(2) {
        let decades = ln(w[1] / w[0]) / ln(10.0);
        let count = GRID_PER_BRACKET.max((decades * GRID_PER_DECADE) as usize);
        lambdas.extend(geometric(w[0], w[1], count));
    }
    lambdas.extend(cands.iter().copied());
    lambdas.push(lo_anchor);
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL * b.abs());

    let mut probes: Vec<Probe> = Vec::with_capacity(lambdas.len() + cands.len());
    for &l in &lambdas {
        probes.push(Probe {
            lambda: l,
            score: sets.score(l, q, true)?,
        });
    }
    // left limits at the candidate levels
    let mut best = Probe {
        lambda: f64::NAN,
        score: f64::NEG_INFINITY,
    };
    for &c in &cands {
        let s = sets.score(c, q, false)?;
        if s > best.score {
            best = Probe { lambda: c, score: s };
        }
    }

    // refine the largest local maxima of the sampled strict scores
    let mut peaks: Vec<usize> = (0..probes.len())
        .filter(|&i| {
            let s = probes[i].score;
            let left = if i > 0 { probes[i - 1].score } else { f64::NEG_INFINITY };
            let right = probes.get(i + 1).map_or(f64::NEG_INFINITY, |p| p.score);
            s >= left && s >= right && s > 0.0
        })
        .collect();
    peaks.sort_by(|&a, &b| probes[b].score.total_cmp(&probes[a].score));
    peaks.truncate(MAX_REFINED_PEAKS);
    let mut extra = Vec::new();
    for &i in &peaks {
        if probes[i].score > best.score {
            best = probes[i];
        }
        if i == 0 || i + 1 == probes.len() {
            continue;
        }
        let found = golden_max(&sets, q, ln(probes[i - 1].lambda), ln(probes[i + 1].lambda), &mut extra)?;
        if found.score > best.score {
            best = found;
        }
    }
    probes.extend(extra);
    probes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    let positive: Vec<&Probe> = probes.iter().filter(|p| p.score > 0.0).collect();
    let constant = positive.len() >= 2 && {
        let hi = positive.iter().map(|p| p.score).fold(f64::NEG_INFINITY, f64::max);
        let lo = positive.iter().map(|p| p.score).fold(f64::INFINITY, f64::min);
        let span = ln(positive[positive.len() - 1].lambda / positive[0].lambda) / ln(10.0);
        hi - lo <= CONSTANT_TOL * hi && span >= CONSTANT_DECADES
    };

    let sampled = best.score.max(0.0);
    let value = sampled.max(small).max(large);
    let near = |limit: f64| limit > 0.0 && limit >= sampled * (1.0 - 1e-9);
    let (attained, witness) = if constant {
        (SupKind::ConstantInLambda, Some(positive[0].lambda))
    } else if near(small) && small >= large {
        (SupKind::LimitZero, None)
    } else if near(large) {
        (SupKind::LimitInf, None)
    } else if sampled == 0.0 {
        (SupKind::LimitZero, None)
    } else {
        (SupKind::Attained, Some(best.lambda))
    };
    Ok(WeakNormResult {
        value,
        witness_lambda: witness,
        attained,
        probes,
    })
}

// A representative level of `g` for centring the grid when it has no
// finite segment end values.
fn reference_level(g: &RadialProfile) -> f64 {
    let v = g.value(1.0).abs();
    if v > 0.0 && v.is_finite() {
        return v;
    }
    g.pieces()
        .iter()
        .flat_map(|p| p.terms.iter().map(|t| t.coeff.abs()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
}

fn golden_max(sets: &LevelSets, q: f64, mut a: f64, mut b: f64, log: &mut Vec<Probe>) -> Result<Probe> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let eval = |x: f64, log: &mut Vec<Probe>| -> Result<f64> {
        let l = exp(x);
        let s = sets.score(l, q, true)?;
        log.push(Probe { lambda: l, score: s });
        Ok(s)
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, log)?;
    let mut fd = eval(d, log)?;
    while (b - a).abs() > GOLDEN_LOG_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, log)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, log)?;
        }
    }
    Ok(if fc >= fd {
        Probe { lambda: exp(c), score: fc }
    } else {
        Probe { lambda: exp(d), score: fd }
    })
}
