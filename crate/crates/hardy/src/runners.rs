//! Parallel drivers over the sequential core routines. Every driver returns
//! results in input order so output is independent of scheduling.

use hardy_core::limiting::{limiting_weak, LimitTrace};
use hardy_core::oracle::{lemma21_radius, norm_contraction_check, BatchFn, Lemma21Report, NormContraction};
use hardy_core::sampling::Moments;
use hardy_core::sharpness::{random_ratio, sharpness_sweep, summarize_upper_bound, Sweep, UpperBoundSummary};
use hardy_core::{OperatorKind, RadialProfile, RawParams, Result, ScalarField, SpaceParams};
use rayon::prelude::*;

/// Ordered parallel map over Monte Carlo batches.
pub fn parallel_batches(one: &BatchFn<'_>, count: u64) -> Result<Vec<Moments>> {
    (0..count).into_par_iter().map(one).collect()
}

pub fn lemma21_parallel(
    field: &ScalarField,
    params: &SpaceParams,
    radii: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Lemma21Report> {
    let rows = radii
        .par_iter()
        .map(|&r| lemma21_radius(field, params, r, samples, seed, &parallel_batches))
        .collect::<Result<Vec<_>>>()?;
    Ok(Lemma21Report { rows })
}

pub fn norm_contraction_parallel(
    field: &ScalarField,
    params: &SpaceParams,
    samples: u64,
    seed: u64,
) -> Result<NormContraction> {
    norm_contraction_check(field, params, samples, seed, &parallel_batches)
}

pub fn upper_bound_parallel(params: &SpaceParams, kind: OperatorKind, count: usize, seed: u64) -> UpperBoundSummary {
    let results: Vec<_> = (0..count as u64)
        .into_par_iter()
        .map(|i| random_ratio(params, kind, seed, i))
        .collect();
    summarize_upper_bound(results)
}

/// One grid point of a sweep: the tuple as given and either its sweep or
/// the reason it was rejected.
#[derive(Debug)]
pub struct GridPoint {
    pub raw: RawParams,
    pub outcome: Result<(SpaceParams, Sweep)>,
}

pub fn sweep_grid<V>(points: &[RawParams], kind: OperatorKind, validate: V, schedule: Option<&[f64]>) -> Vec<GridPoint>
where
    V: Fn(&RawParams) -> Result<SpaceParams> + Sync,
{
    points
        .par_iter()
        .map(|raw| {
            let outcome = validate(raw).and_then(|sp| {
                let default = hardy_core::sharpness::default_schedule(&sp, kind);
                let sched = schedule.unwrap_or(&default);
                Ok((sp, sharpness_sweep(&sp, kind, sched)?))
            });
            GridPoint { raw: *raw, outcome }
        })
        .collect()
}

pub fn limits_parallel(runs: &[(RadialProfile, SpaceParams)], lambdas: Option<&[f64]>) -> Vec<Result<LimitTrace>> {
    runs.par_iter()
        .map(|(f, sp)| {
            let default = hardy_core::limiting::default_schedule(sp.p);
            limiting_weak(f, sp, lambdas.unwrap_or(&default))
        })
        .collect()
}
