//! Brute-force Monte Carlo evaluation of both operators on fields that need
//! not be radial, and the checks built on it: radial averaging leaves the
//! operator unchanged and does not increase weighted norms.
//!
//! Work is cut into batches of [`BATCH`] samples, each drawn from its own
//! stream and merged in batch order, so any scheduler that preserves the
//! order reproduces the sequential result bit for bit.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{pow, sqrt};
use crate::operators::hardy_forward;
use crate::params::SpaceParams;
use crate::profile::{radialize, Radialization, ScalarField};
use crate::sampling::{check_dim, stream_rng, uniform_in_shell, weighted_in_ball, Moments, BATCH};

/// Fewest samples an estimate may use.
pub const MIN_SAMPLES: u64 = 10_000;
/// Half-width of the acceptance band in standard errors.
pub const SIGMA_BAND: f64 = 3.0;
/// Radial cells used to average a field before applying the operator.
pub const RADIAL_CELLS: usize = 400;
/// Fewest directions per radial cell.
pub const MIN_DIRECTIONS: usize = 1000;
/// Extra seeds tried before a failed radius counts as a confirmed failure.
pub const RESEEDS: u64 = 2;

// Offsets separating the streams of independent tasks that share a seed.
const ADJOINT_STREAM: u64 = 1 << 40;
const NORM_STREAM: u64 = 2 << 40;
const RADIAL_SEED_SALT: u64 = 0x5eed_0f_4ad1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_moments(m: &Moments, seed: u64) -> Self {
        McEstimate {
            mean: m.mean(),
            std_error: m.std_error(),
            samples: m.count,
            seed,
        }
    }

    fn exact(value: f64, samples: u64, seed: u64) -> Self {
        McEstimate {
            mean: value,
            std_error: 0.0,
            samples,
            seed,
        }
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::Range(format!(
            "at least {MIN_SAMPLES} samples are needed, got {samples}"
        )));
    }
    Ok(())
}

/// Number of batches for `samples`, the last one possibly short.
pub fn batch_count(samples: u64) -> u64 {
    samples.div_ceil(BATCH as u64)
}

fn batch_len(samples: u64, batch: u64) -> u64 {
    (samples - batch * BATCH as u64).min(BATCH as u64)
}

/// Which integral a batch estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McTask {
    /// `H_beta F(x)` at `|x| = x_radius`.
    Forward { x_radius: f64 },
    /// `H*_beta F(x)` at `|x| = x_radius`.
    Adjoint { x_radius: f64 },
    /// `int |F|^p |y|^alpha dy`.
    WeightedNorm,
}

fn task_stream(task: McTask) -> u64 {
    match task {
        McTask::Forward { .. } => 0,
        McTask::Adjoint { .. } => ADJOINT_STREAM,
        McTask::WeightedNorm => NORM_STREAM,
    }
}

fn checked(v: f64, y: &[f64]) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Sampling(format!("{y:?}")))
    }
}

/// Moments of the per-sample estimator over batch `batch` of `samples`.
pub fn mc_batch(
    field: &ScalarField,
    params: &SpaceParams,
    task: McTask,
    samples: u64,
    seed: u64,
    batch: u64,
) -> Result<Moments> {
    let n = params.nf();
    let v = params.geom().v_n;
    let mut rng = stream_rng(seed, task_stream(task) + batch);
    let mut y = alloc::vec![0.0; params.n as usize];
    let mut m = Moments::default();
    let count = batch_len(samples, batch);
    match task {
        McTask::Forward { x_radius } => {
            // uniform in the ball: (v r^n)^{beta/n - 1} int F = (v r^n)^{beta/n} E[F]
            let scale = pow(v * pow(x_radius, n), params.beta / n);
            for _ in 0..count {
                uniform_in_shell(&mut rng, 0.0, x_radius, &mut y);
                m.push(scale * checked(field.value(&y), &y)?);
            }
        }
        McTask::Adjoint { x_radius } => {
            let outer = field.support_radius();
            let volume = v * (pow(outer, n) - pow(x_radius, n));
            let e = params.beta / n - 1.0;
            for _ in 0..count {
                let r = uniform_in_shell(&mut rng, x_radius, outer, &mut y);
                let w = pow(v * pow(r, n), e);
                m.push(volume * w * checked(field.value(&y), &y)?);
            }
        }
        McTask::WeightedNorm => {
            // density proportional to |y|^alpha on the support ball
            let outer = field.support_radius();
            let d = params.alpha + n;
            let mass = params.geom().omega_n * pow(outer, d) / d;
            for _ in 0..count {
                weighted_in_ball(&mut rng, params.alpha, outer, &mut y);
                let f = checked(field.value(&y), &y)?.abs();
                m.push(mass * pow(f, params.p));
            }
        }
    }
    Ok(m)
}

fn check_task(field: &ScalarField, params: &SpaceParams, task: McTask) -> Result<Option<f64>> {
    check_dim(params.n)?;
    match task {
        McTask::Forward { x_radius } => {
            if !(x_radius > 0.0) || !x_radius.is_finite() {
                return Err(Error::Domain(x_radius));
            }
        }
        McTask::Adjoint { x_radius } => {
            if !(x_radius > 0.0) || !x_radius.is_finite() {
                return Err(Error::Domain(x_radius));
            }
            let outer = field.support_radius();
            if !outer.is_finite() {
                return Err(Error::Unsupported("the adjoint oracle needs compact support".into()));
            }
            if x_radius >= outer {
                return Ok(Some(0.0));
            }
        }
        McTask::WeightedNorm => {
            let outer = field.support_radius();
            if !outer.is_finite() {
                return Err(Error::Unsupported("the norm oracle needs compact support".into()));
            }
            if !(params.alpha + params.nf() > 0.0) {
                return Err(Error::Range("the weight |y|^alpha must be locally integrable".into()));
            }
            if outer == 0.0 {
                return Ok(Some(0.0));
            }
        }
    }
    Ok(None)
}

/// Merges per-batch moments, given in batch order, into an estimate.
pub fn merge_batches<I: IntoIterator<Item = Moments>>(batches: I, seed: u64) -> McEstimate {
    let mut total = Moments::default();
    for b in batches {
        total.merge(&b);
    }
    McEstimate::from_moments(&total, seed)
}

/// Evaluates one batch by index.
pub type BatchFn<'a> = dyn Fn(u64) -> Result<Moments> + Sync + 'a;

/// Maps a batch function over `0..count` and returns the moments in batch
/// order. [`sequential_batches`] is a plain loop; a parallel caller passes
/// an ordered parallel map.
pub type BatchRunner = dyn Fn(&BatchFn<'_>, u64) -> Result<Vec<Moments>> + Sync;

/// Runs `task` with the batches mapped by `run_batches`.
pub fn mc_estimate_with(
    field: &ScalarField,
    params: &SpaceParams,
    task: McTask,
    samples: u64,
    seed: u64,
    run_batches: &BatchRunner,
) -> Result<McEstimate> {
    check_samples(samples)?;
    if let Some(v) = check_task(field, params, task)? {
        return Ok(McEstimate::exact(v, samples, seed));
    }
    let one = |b: u64| mc_batch(field, params, task, samples, seed, b);
    let batches = run_batches(&one, batch_count(samples))?;
    Ok(merge_batches(batches, seed))
}

pub fn sequential_batches(one: &BatchFn<'_>, count: u64) -> Result<Vec<Moments>> {
    (0..count).map(one).collect()
}

/// `H_beta F(x)` at `|x| = x_radius` by uniform sampling of the ball.
pub fn mc_hardy(field: &ScalarField, x_radius: f64, params: &SpaceParams, samples: u64, seed: u64) -> Result<McEstimate> {
    mc_estimate_with(field, params, McTask::Forward { x_radius }, samples, seed, &sequential_batches)
}

/// `H*_beta F(x)` at `|x| = x_radius` by uniform sampling of the annulus out
/// to the support radius.
pub fn mc_adjoint(field: &ScalarField, x_radius: f64, params: &SpaceParams, samples: u64, seed: u64) -> Result<McEstimate> {
    mc_estimate_with(field, params, McTask::Adjoint { x_radius }, samples, seed, &sequential_batches)
}

/// `int |F|^p |y|^alpha dy`.
pub fn mc_weighted_norm(field: &ScalarField, params: &SpaceParams, samples: u64, seed: u64) -> Result<McEstimate> {
    mc_estimate_with(field, params, McTask::WeightedNorm, samples, seed, &sequential_batches)
}

/// Midpoints of `cells` equal cells of `(0, max_radius)`.
pub fn cell_midpoints(max_radius: f64, cells: usize) -> Vec<f64> {
    let h = max_radius / cells as f64;
    (0..cells).map(|j| (j as f64 + 0.5) * h).collect()
}

/// Directions per radial cell for a budget of `samples`.
pub fn directions_per_cell(samples: u64) -> usize {
    ((samples as usize) / RADIAL_CELLS).max(MIN_DIRECTIONS)
}

fn radial_seed(seed: u64) -> u64 {
    seed ^ RADIAL_SEED_SALT
}

/// The averaged field on the midpoint grid out to `max_radius`.
pub fn radial_average(field: &ScalarField, n: u32, max_radius: f64, samples: u64, seed: u64) -> Result<Radialization> {
    radialize(
        field,
        n,
        &cell_midpoints(max_radius, RADIAL_CELLS),
        directions_per_cell(samples),
        radial_seed(seed),
    )
}

/// `H_beta g(r)` for the averaged field `g` and its standard error, from the
/// per-cell errors.
pub fn radial_hardy(rad: &Radialization, r: f64, params: &SpaceParams) -> Result<(f64, f64)> {
    let n = params.nf();
    let value = hardy_forward(&rad.profile, params)?.evaluate(r)?;
    let k = n * pow(params.geom().v_n, params.beta / n) * pow(r, params.beta - n);
    let mut var = 0.0;
    for (j, err) in rad.std_errors.iter().enumerate() {
        let (a, b) = (rad.edges[j], rad.edges[j + 1].min(r));
        if b <= a {
            break;
        }
        let w = (pow(b, n) - pow(a, n)) / n;
        var += (err * w) * (err * w);
    }
    Ok((value, k * sqrt(var)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma21Row {
    pub radius: f64,
    pub mc: McEstimate,
    pub radial: f64,
    pub radial_std_error: f64,
    /// `|mc - radial| / sqrt(sigma_mc^2 + sigma_radial^2)`.
    pub z: f64,
    pub pass: bool,
    /// Seeds tried, including the first.
    pub attempts: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma21Report {
    pub rows: Vec<Lemma21Row>,
}

impl Lemma21Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn z_score(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    let s = sqrt(sa * sa + sb * sb);
    let d = (a - b).abs();
    // exact values on both sides still differ by quadrature rounding
    if d <= 1e-9 * a.abs().max(b.abs()) {
        0.0
    } else if s == 0.0 {
        f64::INFINITY
    } else {
        d / s
    }
}

/// Compares `H_beta F` by brute force with `H_beta` of the averaged field at
/// one radius under one seed.
pub fn lemma21_point(
    field: &ScalarField,
    params: &SpaceParams,
    radius: f64,
    samples: u64,
    seed: u64,
    run_batches: &BatchRunner,
) -> Result<Lemma21Row> {
    let mc = mc_estimate_with(field, params, McTask::Forward { x_radius: radius }, samples, seed, run_batches)?;
    let rad = radial_average(field, params.n, radius, samples, seed)?;
    let (radial, radial_std_error) = radial_hardy(&rad, radius, params)?;
    let z = z_score(mc.mean, mc.std_error, radial, radial_std_error);
    Ok(Lemma21Row {
        radius,
        mc,
        radial,
        radial_std_error,
        z,
        pass: z <= SIGMA_BAND,
        attempts: 1,
    })
}

/// Seed used for retry `k` (`k = 0` is the original run).
pub fn reseed(seed: u64, k: u64) -> u64 {
    seed.wrapping_add(k.wrapping_mul(0x9e37_79b9))
}

/// [`lemma21_point`] with the reseed policy: the radius fails only if the
/// original run and every retry fail.
pub fn lemma21_radius(
    field: &ScalarField,
    params: &SpaceParams,
    radius: f64,
    samples: u64,
    seed: u64,
    run_batches: &BatchRunner,
) -> Result<Lemma21Row> {
    let mut row = lemma21_point(field, params, radius, samples, seed, run_batches)?;
    let mut k = 0;
    while !row.pass && k < RESEEDS {
        k += 1;
        row = lemma21_point(field, params, radius, samples, reseed(seed, k), run_batches)?;
        row.attempts = k + 1;
    }
    Ok(row)
}

/// [`lemma21_radius`] at each radius, sequentially.
pub fn lemma21_check(
    field: &ScalarField,
    params: &SpaceParams,
    radii: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Lemma21Report> {
    let rows = radii
        .iter()
        .map(|&r| lemma21_radius(field, params, r, samples, seed, &sequential_batches))
        .collect::<Result<Vec<_>>>()?;
    Ok(Lemma21Report { rows })
}

/// `||F||_p^p` by sampling against `||g_F||_p^p` of the averaged field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormContraction {
    pub field: McEstimate,
    pub radial: f64,
    pub radial_std_error: f64,
    pub pass: bool,
}

/// Checks `||g_F||_{L^p(|x|^alpha)} <= ||F||_{L^p(|x|^alpha)}` within the
/// sampling band, in `p`-th powers.
pub fn norm_contraction_check(
    field: &ScalarField,
    params: &SpaceParams,
    samples: u64,
    seed: u64,
    run_batches: &BatchRunner,
) -> Result<NormContraction> {
    let est = mc_estimate_with(field, params, McTask::WeightedNorm, samples, seed, run_batches)?;
    let outer = field.support_radius();
    let rad = radial_average(field, params.n, outer, samples, seed.wrapping_add(1))?;
    let (p, w) = (params.p, params.alpha + params.nf());
    let omega = params.geom().omega_n;
    let mut total = 0.0;
    let mut var = 0.0;
    for (j, (&g, &err)) in rad.values.iter().zip(&rad.std_errors).enumerate() {
        let c = omega * (pow(rad.edges[j + 1], w) - pow(rad.edges[j], w)) / w;
        total += c * pow(g, p);
        let d = c * p * pow0_safe(g, p - 1.0) * err;
        var += d * d;
    }
    let sigma = sqrt(var);
    let band = SIGMA_BAND * sqrt(sigma * sigma + est.std_error * est.std_error);
    Ok(NormContraction {
        field: est,
        radial: total,
        radial_std_error: sigma,
        pass: total <= est.mean + band,
    })
}

fn pow0_safe(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else if x == 0.0 {
        0.0
    } else {
        pow(x, y)
    }
}

/// [`norm_contraction_check`] with sequential batches.
pub fn norm_contraction(field: &ScalarField, params: &SpaceParams, samples: u64, seed: u64) -> Result<NormContraction> {
    norm_contraction_check(field, params, samples, seed, &sequential_batches)
}
