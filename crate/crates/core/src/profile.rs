//! Radial profiles `f(|x|)` as piecewise sums of power-log terms, their
//! weighted norms, and the spherical-average map from fields on `R^n`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::integrate::{abs_power_log, ipow, is_critical, EXP_EPS};
use crate::math::{exp, ln, pow, pow0};
use crate::params::{geom, SpaceParams};
use crate::quad::integrate;
use crate::roots::ExpPoly;
use crate::sampling::{check_dim, stream_rng, unit_direction, Moments};

const QUAD_TOL: f64 = 1e-13;

/// One summand `coeff * r^exponent * (ln r)^log_power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub exponent: f64,
    pub log_power: u32,
}

impl Term {
    pub fn new(coeff: f64, exponent: f64, log_power: u32) -> Self {
        Term {
            coeff,
            exponent,
            log_power,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.coeff * pow0(r, self.exponent) * ipow(ln(r), self.log_power)
    }
}

/// A sum of terms on `[lo, hi)`; `hi` may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub terms: Vec<Term>,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, terms: Vec<Term>) -> Self {
        Piece { lo, hi, terms }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.value(r)).sum()
    }

    /// The piece minus `shift`, in the variable `u = ln r`.
    pub fn exp_poly(&self, shift: f64) -> ExpPoly {
        let shift = (shift != 0.0).then_some((-shift, 0.0, 0));
        ExpPoly::from_monomials(
            self.terms
                .iter()
                .map(|t| (t.coeff, t.exponent, t.log_power))
                .chain(shift),
        )
    }

    pub fn u_lo(&self) -> f64 {
        if self.lo == 0.0 {
            f64::NEG_INFINITY
        } else {
            ln(self.lo)
        }
    }

    pub fn u_hi(&self) -> f64 {
        if self.hi.is_infinite() {
            f64::INFINITY
        } else {
            ln(self.hi)
        }
    }

    /// Value at `lo`, or the limit `r -> 0+` when `lo = 0`.
    pub fn value_at_lo(&self) -> f64 {
        if self.lo == 0.0 {
            self.exp_poly(0.0).limit_neg_inf()
        } else {
            self.value(self.lo)
        }
    }

    /// Limit `r -> hi-`.
    pub fn value_at_hi(&self) -> f64 {
        if self.hi.is_infinite() {
            self.exp_poly(0.0).limit_pos_inf()
        } else {
            self.value(self.hi)
        }
    }
}

/// Merges terms with equal exponent and log power, drops zeros, and orders
/// them by exponent.
pub(crate) fn canonical_terms(terms: &[Term]) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        let exponent = if t.exponent.abs() <= EXP_EPS { 0.0 } else { t.exponent };
        match out
            .iter_mut()
            .find(|o| o.log_power == t.log_power && (o.exponent - exponent).abs() <= EXP_EPS)
        {
            Some(o) => o.coeff += t.coeff,
            None => out.push(Term::new(t.coeff, exponent, t.log_power)),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out.sort_by(|a, b| {
        a.exponent
            .total_cmp(&b.exponent)
            .then(a.log_power.cmp(&b.log_power))
    });
    out
}

/// Flat serialization record: one term together with its interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatTerm {
    pub c: f64,
    pub a: f64,
    pub k: u32,
    pub lo: f64,
    pub hi: f64,
}

/// A function of `r in (0, inf)` given as ordered, non-overlapping pieces.
/// Gaps between pieces are zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialProfile {
    pieces: Vec<Piece>,
}

impl RadialProfile {
    /// Validates and canonicalizes: sorts pieces, merges terms, drops empty
    /// pieces and merges adjacent pieces with identical terms.
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        for p in &pieces {
            if !(p.lo >= 0.0) || !p.lo.is_finite() || !(p.hi > p.lo) {
                return Err(Error::Profile(format!(
                    "interval [{}, {}) must satisfy 0 <= lo < hi",
                    p.lo, p.hi
                )));
            }
            for t in &p.terms {
                if !t.coeff.is_finite() || !t.exponent.is_finite() {
                    return Err(Error::Profile(format!("non-finite term {t:?}")));
                }
                if t.log_power > 1 {
                    return Err(Error::Profile(format!(
                        "log power must be 0 or 1, got {}",
                        t.log_power
                    )));
                }
            }
        }
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in pieces.windows(2) {
            if w[0].hi > w[1].lo {
                return Err(Error::Profile(format!(
                    "pieces [{}, {}) and [{}, {}) overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            let terms = canonical_terms(&p.terms);
            if terms.is_empty() {
                continue;
            }
            if let Some(last) = out.last_mut() {
                if last.hi == p.lo && last.terms == terms {
                    last.hi = p.hi;
                    continue;
                }
            }
            out.push(Piece::new(p.lo, p.hi, terms));
        }
        Ok(RadialProfile { pieces: out })
    }

    pub fn zero() -> Self {
        RadialProfile { pieces: Vec::new() }
    }

    /// `c r^a (ln r)^k` on `[lo, hi)`.
    pub fn single(c: f64, a: f64, k: u32, lo: f64, hi: f64) -> Result<Self> {
        Self::new(alloc::vec![Piece::new(lo, hi, alloc::vec![Term::new(c, a, k)])])
    }

    /// `c r^a` on `[lo, hi)`.
    pub fn power(c: f64, a: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::single(c, a, 0, lo, hi)
    }

    /// Indicator of `[lo, hi)`.
    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        Self::single(1.0, 0.0, 0, lo, hi)
    }

    /// Groups flat records by identical interval and sums their terms.
    pub fn from_flat(flat: &[FlatTerm]) -> Result<Self> {
        let mut pieces: Vec<Piece> = Vec::new();
        for f in flat {
            let term = Term::new(f.c, f.a, f.k);
            match pieces.iter_mut().find(|p| p.lo == f.lo && p.hi == f.hi) {
                Some(p) => p.terms.push(term),
                None => pieces.push(Piece::new(f.lo, f.hi, alloc::vec![term])),
            }
        }
        Self::new(pieces)
    }

    pub fn to_flat(&self) -> Vec<FlatTerm> {
        self.pieces
            .iter()
            .flat_map(|p| {
                p.terms.iter().map(move |t| FlatTerm {
                    c: t.coeff,
                    a: t.exponent,
                    k: t.log_power,
                    lo: p.lo,
                    hi: p.hi,
                })
            })
            .collect()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Right end of the support, infinite for unbounded support.
    pub fn support_end(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.hi)
    }

    /// Value at `r > 0`; zero in gaps.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(r));
        }
        Ok(self.value(r))
    }

    pub(crate) fn value(&self, r: f64) -> f64 {
        let idx = self.pieces.partition_point(|p| p.lo <= r);
        if idx == 0 {
            return 0.0;
        }
        let p = &self.pieces[idx - 1];
        if r < p.hi {
            p.value(r)
        } else {
            0.0
        }
    }

    /// `f` restricted to `(0, r_max)`.
    pub fn truncate(&self, r_max: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .filter(|p| p.lo < r_max)
            .map(|p| Piece::new(p.lo, p.hi.min(r_max), p.terms.clone()))
            .collect();
        RadialProfile::new(pieces).expect("restriction keeps a valid profile")
    }

    /// `c f`.
    pub fn scale(&self, c: f64) -> Self {
        self.mul_power(c, 0.0)
    }

    /// `c r^sigma f(r)`.
    pub fn mul_power(&self, c: f64, sigma: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let terms = p
                    .terms
                    .iter()
                    .map(|t| Term::new(c * t.coeff, t.exponent + sigma, t.log_power))
                    .collect();
                Piece::new(p.lo, p.hi, terms)
            })
            .collect();
        RadialProfile::new(pieces).expect("scaling keeps a valid profile")
    }

    /// Pointwise sum.
    pub fn add(&self, other: &RadialProfile) -> Self {
        let mut cuts: Vec<f64> = self
            .pieces
            .iter()
            .chain(other.pieces.iter())
            .flat_map(|p| [p.lo, p.hi])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mut terms = Vec::new();
            for prof in [self, other] {
                if let Some(p) = prof.pieces.iter().find(|p| p.lo <= lo && hi <= p.hi) {
                    terms.extend_from_slice(&p.terms);
                }
            }
            pieces.push(Piece::new(lo, hi, terms));
        }
        RadialProfile::new(pieces).expect("sum of valid profiles is valid")
    }

    /// Change of variable `s = m x^kappa` with weight `x^zeta`: returns
    /// `g(s) = f(x) x^zeta`. Needs `m > 0`, `kappa > 0`.
    pub fn substitute(&self, m: f64, kappa: f64, zeta: f64) -> Result<Self> {
        if !(m > 0.0 && kappa > 0.0) || !m.is_finite() || !kappa.is_finite() {
            return Err(Error::DegenerateSubstitution(format!(
                "s = {m} x^{kappa} is not an increasing bijection of (0, inf)"
            )));
        }
        let map = |x: f64| {
            if x == 0.0 || x.is_infinite() {
                x
            } else {
                m * pow(x, kappa)
            }
        };
        let ln_m = ln(m);
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            let mut terms = Vec::new();
            for t in &p.terms {
                // c x^{a+zeta} (ln x)^k with x = (s/m)^{1/kappa}
                let e = (t.exponent + zeta) / kappa;
                let c = t.coeff * exp(-e * ln_m);
                match t.log_power {
                    0 => terms.push(Term::new(c, e, 0)),
                    _ => {
                        terms.push(Term::new(c / kappa, e, 1));
                        terms.push(Term::new(-c * ln_m / kappa, e, 0));
                    }
                }
            }
            let (lo, hi) = (map(p.lo), map(p.hi));
            if !(hi > lo) {
                return Err(Error::DegenerateSubstitution(format!(
                    "interval [{}, {}) collapses under the substitution",
                    p.lo, p.hi
                )));
            }
            pieces.push(Piece::new(lo, hi, terms));
        }
        RadialProfile::new(pieces)
    }

    /// `int_0^inf |f(r)|^p r^w dr`, `+inf` when divergent.
    pub fn power_integral(&self, p: f64, w: f64) -> f64 {
        self.pieces.iter().map(|piece| piece_power_integral(piece, p, w)).sum()
    }

    /// `omega_n int_0^inf |f| r^{n-1} dr`, the `L^1(R^n)` norm.
    pub fn l1_norm(&self, n: u32) -> Result<f64> {
        let g = geom(n)?;
        Ok(g.omega_n * self.power_integral(1.0, n as f64 - 1.0))
    }
}

fn piece_power_integral(piece: &Piece, p: f64, w: f64) -> f64 {
    if let [t] = piece.terms.as_slice() {
        let m = p * t.log_power as f64;
        return pow(t.coeff.abs(), p) * abs_power_log(p * t.exponent + w, m, piece.lo, piece.hi);
    }
    let h = piece.exp_poly(0.0);
    if piece.lo == 0.0 {
        let (rate, _) = h.dominant_neg().expect("canonical pieces are non-zero");
        let e = p * rate + w + 1.0;
        if e <= 0.0 || is_critical(e) {
            return f64::INFINITY;
        }
    }
    if piece.hi.is_infinite() {
        let (rate, _) = h.dominant_pos().expect("canonical pieces are non-zero");
        let e = p * rate + w + 1.0;
        if e >= 0.0 || is_critical(e) {
            return f64::INFINITY;
        }
    }
    let mut cuts: Vec<f64> = Vec::new();
    cuts.push(piece.lo);
    cuts.extend(h.roots(piece.u_lo(), piece.u_hi()).into_iter().map(exp));
    if piece.lo == 0.0 && piece.hi.is_infinite() && !cuts.iter().any(|&c| c > 0.0) {
        cuts.push(1.0);
    }
    cuts.push(piece.hi);
    cuts.dedup();
    let f = |r: f64| {
        let v = piece.value(r).abs();
        if v == 0.0 {
            0.0
        } else {
            pow(v, p) * pow0(r, w)
        }
    };
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if a >= b {
            continue;
        }
        if a == 0.0 && b.is_infinite() {
            total += integrate(f, 0.0, 1.0, QUAD_TOL).value + integrate(f, 1.0, b, QUAD_TOL).value;
        } else {
            total += integrate(f, a, b, QUAD_TOL).value;
        }
    }
    total
}

/// `(omega_n int |f|^p r^{alpha+n-1} dr)^{1/p}`, the `L^p(|x|^alpha)` norm on
/// `R^n`; `+inf` when divergent.
pub fn lp_weighted_norm(f: &RadialProfile, params: &SpaceParams) -> f64 {
    let g = params.geom();
    let integral = f.power_integral(params.p, params.alpha + params.nf() - 1.0);
    pow(g.omega_n * integral, 1.0 / params.p)
}

/// A non-negative function on `R^n` that vanishes outside the closed ball of
/// radius `support_radius`.
pub struct ScalarField {
    eval: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    support_radius: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("support_radius", &self.support_radius)
            .finish_non_exhaustive()
    }
}

fn norm(x: &[f64]) -> f64 {
    crate::math::sqrt(x.iter().map(|v| v * v).sum())
}

impl ScalarField {
    /// `eval` is cut off outside `|x| <= support_radius`.
    pub fn new<F>(support_radius: f64, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            eval: Box::new(eval),
            support_radius,
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        if norm(x) > self.support_radius {
            0.0
        } else {
            (self.eval)(x)
        }
    }

    /// `|f(|x|)|` for a profile.
    pub fn radial(profile: RadialProfile) -> Self {
        let support = profile.support_end();
        ScalarField::new(support, move |x| profile.value(norm(x)).abs())
    }

    /// `exp(-|x - center|^2)` cut off at `|x| <= cutoff`.
    pub fn offset_gaussian(center: Vec<f64>, cutoff: f64) -> Self {
        ScalarField::new(cutoff, move |x| {
            let d2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
            exp(-d2)
        })
    }

    /// `|x_1|` on the ball of radius `radius`.
    pub fn abs_first_coordinate(radius: f64) -> Self {
        ScalarField::new(radius, |x| x[0].abs())
    }

    pub fn zero() -> Self {
        ScalarField::new(0.0, |_| 0.0)
    }
}

/// Spherical averages of a field at a set of radii, with the piecewise-constant
/// profile interpolating them.
#[derive(Debug, Clone, PartialEq)]
pub struct Radialization {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Constant on cells whose edges are the midpoints between radii; the first
    /// cell starts at 0 and the last extends half a spacing past the last radius.
    pub profile: RadialProfile,
    /// Cell edges, one more than the radii.
    pub edges: Vec<f64>,
}

/// Monte Carlo mean and standard error of `|F(r xi)|` over uniform directions
/// `xi`, using sub-stream `index` of `seed`.
pub fn spherical_average(
    field: &ScalarField,
    n: u32,
    r: f64,
    samples: usize,
    seed: u64,
    index: u64,
) -> Result<(f64, f64)> {
    check_dim(n)?;
    let mut rng = stream_rng(seed, index);
    let mut xi = alloc::vec![0.0; n as usize];
    let mut m = Moments::default();
    for _ in 0..samples {
        unit_direction(&mut rng, &mut xi);
        for v in xi.iter_mut() {
            *v *= r;
        }
        let v = field.value(&xi);
        if !v.is_finite() {
            return Err(Error::Sampling(format!("{xi:?}")));
        }
        m.push(v.abs());
    }
    Ok((m.mean(), m.std_error()))
}

/// Assembles a [`Radialization`] from per-radius averages.
pub fn assemble_radialization(radii: &[f64], values: Vec<f64>, std_errors: Vec<f64>) -> Result<Radialization> {
    if radii.is_empty() {
        return Err(Error::Profile("radialization needs at least one radius".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::Profile("radii must be positive and increasing".into()));
    }
    let m = radii.len();
    let mut edges = Vec::with_capacity(m + 1);
    edges.push(0.0);
    for w in radii.windows(2) {
        edges.push(0.5 * (w[0] + w[1]));
    }
    let last_gap = if m > 1 { radii[m - 1] - radii[m - 2] } else { radii[0] };
    edges.push(radii[m - 1] + 0.5 * last_gap);
    let pieces = (0..m)
        .map(|i| Piece::new(edges[i], edges[i + 1], alloc::vec![Term::new(values[i], 0.0, 0)]))
        .collect();
    Ok(Radialization {
        radii: radii.to_vec(),
        values,
        std_errors,
        profile: RadialProfile::new(pieces)?,
        edges,
    })
}

/// Spherical average `g_F(r)` of `|F|` at each radius, deterministic in `seed`.
pub fn radialize(
    field: &ScalarField,
    n: u32,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
) -> Result<Radialization> {
    if samples_per_radius == 0 {
        return Err(Error::Range("samples_per_radius must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(radii.len());
    let mut errors = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        let (v, e) = spherical_average(field, n, r, samples_per_radius, seed, i as u64)?;
        values.push(v);
        errors.push(e);
    }
    assemble_radialization(radii, values, errors)
}
