//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion on the
//! real stdout, so the lines survive test capture, then fails if any
//! criterion failed.

use std::io::Write;
use std::process::Command;

use hardy::builtins;
use hardy::runners::{lemma21_parallel, norm_contraction_parallel, upper_bound_parallel};
use hardy_core::limiting::{default_schedule as limit_schedule, limiting_weak, scaling_identity_check, LAMBDA_MIN_P1};
use hardy_core::math::{pow, rel_diff};
use hardy_core::operators::{dilate, hardy_adjoint, hardy_forward, pairing};
use hardy_core::params::{conjugate, validate_adjoint, validate_forward, validate_lebesgue};
use hardy_core::reduction::{commutation_check, norm_preservation, reconstructed_constant, Branch};
use hardy_core::sampling::stream_rng;
use hardy_core::sharpness::{
    c_sharp, c_sharp_adjoint, default_schedule, extremizer_adjoint, random_admissible_profile, ratio, sharpness_sweep,
    sweep_entry, UPPER_BOUND_SLACK,
};
use hardy_core::weaknorm::{strong_norm, weak_norm_with};
use hardy_core::{OperatorKind, RawParams, SpaceParams};
use rand::Rng;

const EXACT_TOL: f64 = 1e-12;
const EXTREMIZER_TOL: f64 = 0.01;
const FORWARD_DELTA: f64 = 1e-4;
const ADJOINT_GAP_TOL: f64 = 1e-10;
const WEIGHTED_GAP_TOL: f64 = 0.01;
const RANDOM_PROFILES: usize = 200;
const NORM_TOL: f64 = 1e-10;
const COMMUTATION_TOL: f64 = 1e-9;
const LAMBDA_POINTS: usize = 20;
const ORACLE_SAMPLES: u64 = 1_000_000;
const LIMIT_TOL: f64 = 0.02;
const DECAY_TOL: f64 = 1e-3;
const SCALING_TOL: f64 = 1e-12;
const PAIRING_TOL: f64 = 1e-10;
const DILATION_TOL: f64 = 1e-12;
const CHEBYSHEV_SLACK: f64 = 1e-10;
const SEED: u64 = 20_241_016;

/// Why a criterion failed.
#[derive(Debug)]
struct Failure(String);

impl From<hardy_core::Error> for Failure {
    fn from(e: hardy_core::Error) -> Self {
        Failure(format!("{}: {e}", e.tag()))
    }
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure(s)
    }
}

impl From<&str> for Failure {
    fn from(s: &str) -> Self {
        Failure(s.into())
    }
}

type Outcome = Result<String, Failure>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(Failure(detail))
    }
}

fn unweighted(n: i64, p: f64, beta: f64, forward: bool) -> Option<SpaceParams> {
    let raw = RawParams { n, p, q: None, alpha: Some(0.0), beta, gamma: Some(0.0) };
    if forward {
        validate_forward(&raw).ok()
    } else {
        validate_adjoint(&raw).ok()
    }
}

fn unweighted_grid(forward: bool) -> Vec<SpaceParams> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for p in [1.0, 1.5, 2.0, 3.0] {
            for beta in [0.0, 0.3, 0.6] {
                if let Some(sp) = unweighted(n, p, beta, forward) {
                    out.push(sp);
                }
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let grid = unweighted_grid(true);
    let mut worst_const = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut bad = Vec::new();
    for sp in &grid {
        worst_const = worst_const.max((c_sharp(sp) - 1.0).abs());
        let sweep = sharpness_sweep(sp, OperatorKind::Forward, &[1e-1, 1e-2, 1e-3, FORWARD_DELTA])?;
        let ratios: Vec<f64> = sweep.reports.iter().map(|r| r.ratio).collect();
        let last = *ratios.last().unwrap();
        worst_gap = worst_gap.max((last - 1.0).abs());
        // at p = 1 every member is extremal and the trend is flat up to rounding
        let increasing = ratios.windows(2).all(|w| w[1] > w[0] - EXACT_TOL * w[0]);
        if (last - 1.0).abs() > EXTREMIZER_TOL || !increasing {
            bad.push(format!("{sp:?}: {ratios:?}"));
        }
    }
    check(
        worst_const <= EXACT_TOL && bad.is_empty(),
        format!(
            "{} tuples, max |C-1| = {worst_const:e}, max |ratio(1e-4)-1| = {worst_gap:e}, ratios non-decreasing{}",
            grid.len(),
            if bad.is_empty() { String::new() } else { format!("; offending {bad:?}") }
        ),
    )
}

fn criterion_2() -> Outcome {
    let grid: Vec<_> = unweighted_grid(false).into_iter().filter(|sp| sp.p > 1.0).collect();
    let mut worst_const = 0.0f64;
    let mut worst_gap = 0.0f64;
    for sp in &grid {
        let pc = conjugate(sp.p).unwrap();
        let want = pow(sp.q / pc, 1.0 / pc);
        worst_const = worst_const.max(rel_diff(c_sharp_adjoint(sp), want));
        let rep = ratio(&extremizer_adjoint(sp)?, sp, OperatorKind::Adjoint)?;
        worst_gap = worst_gap.max(rep.relative_gap().abs());
    }
    check(
        worst_const <= EXACT_TOL && worst_gap <= ADJOINT_GAP_TOL,
        format!("{} tuples, max rel |C* - (q/p')^(1/p')| = {worst_const:e}, max |gap|/C* = {worst_gap:e}", grid.len()),
    )
}

/// `(n, p, alpha, beta, gamma)` with `q` solved.
const WEIGHTED_FORWARD: [(i64, f64, f64, f64, f64); 20] = [
    (1, 2.0, -0.5, 0.0, 0.0),
    (2, 2.0, -0.5, 0.5, 0.0),
    (2, 2.0, 0.25, 0.5, 1.0),
    (3, 1.5, -1.0, 0.25, 0.5),
    (1, 3.0, 0.5, 0.25, -0.5),
    (2, 1.5, -1.0, 0.0, 0.5),
    (2, 3.0, 1.0, 0.6, -1.0),
    (3, 2.0, -2.0, 0.25, 1.0),
    (1, 1.5, 0.2, 0.6, 0.3),
    (2, 2.5, -0.3, 0.2, -0.5),
    (3, 3.0, 2.0, 1.2, 0.0),
    (1, 2.0, 0.1, 0.3, -0.2),
    (2, 1.2, -0.5, 0.1, 0.2),
    (3, 2.0, -1.5, 0.0, -1.0),
    (2, 4.0, 1.5, 0.5, 0.5),
    (1, 2.5, -0.5, 0.1, 0.0),
    (3, 1.5, 0.1, 0.5, 2.0),
    (2, 2.0, -1.0, 0.2, 0.0),
    (1, 3.0, -0.5, 0.1, 0.5),
    (2, 2.0, 0.5, 0.5, -1.0),
];

fn tuple(n: i64, p: f64, alpha: f64, beta: f64, gamma: f64) -> RawParams {
    RawParams { n, p, q: None, alpha: Some(alpha), beta, gamma: Some(gamma) }
}

fn criterion_3() -> Outcome {
    let mut worst_gap = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut bad = Vec::new();
    let (mut negative_alpha, mut nonzero_gamma) = (0, 0);
    for (i, &(n, p, a, b, g)) in WEIGHTED_FORWARD.iter().enumerate() {
        let sp = validate_forward(&tuple(n, p, a, b, g)).map_err(|e| format!("tuple {i}: {e}"))?;
        negative_alpha += usize::from(a < 0.0);
        nonzero_gamma += usize::from(g != 0.0);
        let sweep = sharpness_sweep(&sp, OperatorKind::Forward, &default_schedule(&sp, OperatorKind::Forward))?;
        let gap = sweep.final_relative_gap();
        worst_gap = worst_gap.max(gap);
        let bound = upper_bound_parallel(&sp, OperatorKind::Forward, RANDOM_PROFILES, SEED + i as u64);
        worst_ratio = worst_ratio.max(bound.max_ratio);
        if !(gap <= WEIGHTED_GAP_TOL && gap >= -UPPER_BOUND_SLACK) || !bound.passed() {
            let first_failure = bound.failures.first().map(|(_, e)| e.to_string());
            bad.push(format!(
                "tuple {i} gap {gap:e}, {} violations, {} unevaluated ({first_failure:?})",
                bound.violations.len(),
                bound.failures.len()
            ));
        }
    }
    check(
        bad.is_empty() && negative_alpha > 0 && nonzero_gamma > 0,
        format!(
            "20 tuples ({negative_alpha} with alpha<0, {nonzero_gamma} with gamma!=0), max final gap/C = {worst_gap:e}, \
             {RANDOM_PROFILES} random profiles each, max ratio/C = {worst_ratio:.6}{}",
            if bad.is_empty() { String::new() } else { format!("; offending {bad:?}") }
        ),
    )
}

/// `(n, p, beta, gamma)` with `alpha = 0` and `q` solved.
const UNWEIGHTED_ADJOINT: [(i64, f64, f64, f64); 20] = [
    (1, 2.0, 0.0, 0.0),
    (1, 2.0, 0.25, 0.5),
    (1, 1.5, 0.3, -0.5),
    (1, 3.0, 0.1, 1.0),
    (2, 2.0, 0.0, 0.0),
    (2, 2.0, 0.5, -1.0),
    (2, 1.5, 0.6, 0.5),
    (2, 3.0, 0.3, 2.0),
    (2, 1.2, 1.0, 0.0),
    (2, 4.0, 0.2, -0.5),
    (3, 2.0, 0.0, 0.0),
    (3, 2.0, 1.0, 1.0),
    (3, 1.5, 0.5, -1.0),
    (3, 3.0, 0.6, 0.5),
    (3, 2.5, 0.9, -1.0),
    (1, 1.2, 0.5, 0.0),
    (2, 2.5, 0.4, 3.0),
    (3, 1.1, 2.0, 0.5),
    (1, 4.0, 0.2, -0.3),
    (2, 5.0, 0.1, 0.0),
];

/// `(n, p, alpha, beta, gamma)`, `alpha != 0`, `q` solved.
const WEIGHTED_ADJOINT: [(i64, f64, f64, f64, f64); 10] = [
    (1, 2.0, 0.5, 0.25, 0.0),
    (2, 1.5, -0.5, 0.5, 0.0),
    (3, 2.0, 1.0, 0.5, 1.0),
    (2, 2.0, 2.0, 0.5, 1.0),
    (1, 3.0, -0.5, 0.0, 0.5),
    (2, 1.0, 1.0, 0.5, 1.0),
    (3, 1.5, -1.0, 0.25, -0.5),
    (1, 1.5, 0.3, 0.4, 0.2),
    (2, 2.5, 3.0, 1.0, 0.0),
    (3, 4.0, -2.0, 0.1, 0.0),
];

fn criterion_4() -> Outcome {
    let mut worst_direct = 0.0f64;
    for (i, &(n, p, b, g)) in UNWEIGHTED_ADJOINT.iter().enumerate() {
        let sp = validate_adjoint(&tuple(n, p, 0.0, b, g)).map_err(|e| format!("alpha=0 tuple {i}: {e}"))?;
        let rep = ratio(&extremizer_adjoint(&sp)?, &sp, OperatorKind::Adjoint)?;
        worst_direct = worst_direct.max(rel_diff(rep.ratio, c_sharp_adjoint(&sp)));
    }
    let mut worst_reduced = 0.0f64;
    for (i, &(n, p, a, b, g)) in WEIGHTED_ADJOINT.iter().enumerate() {
        let sp = validate_adjoint(&tuple(n, p, a, b, g)).map_err(|e| format!("weighted tuple {i}: {e}"))?;
        let want = c_sharp_adjoint(&sp);
        let rebuilt = reconstructed_constant(&sp, Branch::Adjoint)?;
        worst_reduced = worst_reduced.max(rel_diff(rebuilt, want));
        if sp.p > 1.0 {
            // the pulled-back extremizer, measured on the line and carried back
            let rep = sweep_entry(&sp, OperatorKind::Adjoint, f64::NAN)?;
            let direct = rep.direct_ratio.ok_or("reduced report without its direct ratio")?;
            worst_reduced = worst_reduced.max(rel_diff(rep.ratio, want)).max(rel_diff(direct, want));
        }
    }
    check(
        worst_direct <= ADJOINT_GAP_TOL && worst_reduced <= EXACT_TOL,
        format!(
            "20 alpha=0 tuples, max rel |ratio(f0*) - C*| = {worst_direct:e}; 10 alpha!=0 tuples, max rel reduction residual = {worst_reduced:e}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let forward: Vec<SpaceParams> = WEIGHTED_FORWARD[..4]
        .iter()
        .map(|&(n, p, a, b, g)| validate_forward(&tuple(n, p, a, b, g)).unwrap())
        .collect();
    let adjoint: Vec<SpaceParams> = WEIGHTED_ADJOINT[..4]
        .iter()
        .map(|&(n, p, a, b, g)| validate_adjoint(&tuple(n, p, a, b, g)).unwrap())
        .collect();
    let lambdas: Vec<f64> = (0..LAMBDA_POINTS)
        .map(|i| pow(10.0, -3.0 + 6.0 * i as f64 / (LAMBDA_POINTS - 1) as f64))
        .collect();
    let mut worst_norm = 0.0f64;
    let mut worst_weak = 0.0f64;
    for (branch, tuples) in [(Branch::Forward, &forward), (Branch::Adjoint, &adjoint)] {
        for i in 0..100u64 {
            let sp = &tuples[i as usize % tuples.len()];
            let f = random_admissible_profile(&mut stream_rng(SEED + 5, i), sp);
            let c = norm_preservation(&f, sp, branch)?;
            worst_norm = worst_norm.max(c.residual);
            if i < 20 {
                for row in commutation_check(&f, sp, branch, &lambdas)? {
                    worst_weak = worst_weak.max(row.residual);
                }
            }
        }
    }
    check(
        worst_norm <= NORM_TOL && worst_weak <= COMMUTATION_TOL,
        format!(
            "100 profiles per branch, max norm residual = {worst_norm:e}; 20 profiles per branch on {LAMBDA_POINTS}-point level grids, max weak residual = {worst_weak:e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let sp = validate_lebesgue(2, 2.0, 0.5).unwrap();
    let radii = [0.5, 1.0, 2.0, 4.0];
    let mut details = Vec::new();
    let mut ok = true;
    for name in ["offset-gaussian", "abs-first"] {
        let field = builtins::field(name, 2).unwrap();
        let rep = lemma21_parallel(&field, &sp, &radii, ORACLE_SAMPLES, SEED)?;
        let nc = norm_contraction_parallel(&field, &sp, ORACLE_SAMPLES, SEED)?;
        let max_z = rep.rows.iter().map(|r| r.z).fold(0.0, f64::max);
        ok &= rep.passed() && nc.pass;
        details.push(format!(
            "{name}: {}/4 radii within 3 sigma (max z {max_z:.2}), norm contraction {:.4} <= {:.4}",
            rep.rows.iter().filter(|r| r.pass).count(),
            nc.radial,
            nc.field.mean
        ));
    }
    check(ok, details.join("; "))
}

fn criterion_7() -> Outcome {
    let mut worst_limit = 0.0f64;
    let mut worst_decay = 0.0f64;
    let mut runs = 0;
    for name in ["step", "twostep"] {
        let f = builtins::profile(name).unwrap();
        for n in 1..=2 {
            for beta in [0.0, 0.5] {
                let sp = validate_lebesgue(n, 1.0, beta)?;
                let lambdas = limit_schedule(1.0);
                assert_eq!(*lambdas.last().unwrap(), LAMBDA_MIN_P1);
                let t = limiting_weak(&f, &sp, &lambdas)?;
                worst_limit = worst_limit.max(t.rel_err());
                runs += 1;
                for p in [1.5, 2.0] {
                    let Ok(sp) = validate_lebesgue(n, p, beta) else { continue };
                    let t = limiting_weak(&f, &sp, &limit_schedule(p))?;
                    worst_decay = worst_decay.max(t.rel_err());
                }
            }
        }
    }
    let mut rng = stream_rng(SEED + 7, 0);
    let mut worst_scaling = 0.0f64;
    for i in 0..50u64 {
        let n = rng.random_range(1..=3);
        let beta = rng.random_range(0.0..0.9) * n as f64;
        let sp = validate_lebesgue(n, 1.0, beta)?;
        let f = random_admissible_profile(&mut stream_rng(SEED + 8, i), &sp);
        let t = pow(10.0, rng.random_range(-1.5..1.5));
        let lambda = pow(10.0, rng.random_range(-3.0..1.0));
        let c = scaling_identity_check(&f, t, lambda, &sp)?;
        worst_scaling = worst_scaling.max(c.residual);
    }
    check(
        worst_limit <= LIMIT_TOL && worst_decay <= DECAY_TOL && worst_scaling <= SCALING_TOL,
        format!(
            "{runs} p=1 runs, max |limit - ||f||_1|/||f||_1 = {worst_limit:e}; p in {{1.5, 2}} max last/first score = {worst_decay:e}; 50 scaling checks, max residual = {worst_scaling:e}"
        ),
    )
}

fn cli_bytes(args: &[&str]) -> Result<Vec<u8>, Failure> {
    let o = Command::new(env!("CARGO_BIN_EXE_hardy")).args(args).output().map_err(|e| e.to_string())?;
    if o.status.code() != Some(0) {
        return Err(format!("{args:?} exited with {:?}", o.status.code()).into());
    }
    Ok(o.stdout)
}

fn criterion_8() -> Outcome {
    let sp = validate_lebesgue(2, 2.0, 0.5).unwrap();
    let mut worst_pair = 0.0f64;
    for i in 0..100u64 {
        // cut at a finite radius so both sides of the pairing are finite
        let f = random_admissible_profile(&mut stream_rng(SEED + 9, 2 * i), &sp).truncate(30.0);
        let g = random_admissible_profile(&mut stream_rng(SEED + 9, 2 * i + 1), &sp).truncate(30.0);
        let lhs = pairing(&hardy_forward(&f, &sp)?, &g, &sp)?;
        let rhs = pairing(&f, &hardy_adjoint(&g, &sp)?, &sp)?;
        worst_pair = worst_pair.max(rel_diff(lhs, rhs));
    }

    let sp3 = validate_lebesgue(3, 1.5, 0.4).unwrap();
    let mut worst_dil = 0.0f64;
    for i in 0..50u64 {
        let f = random_admissible_profile(&mut stream_rng(SEED + 10, i), &sp3);
        let t = pow(2.0, -3.0 + 6.0 * i as f64 / 49.0);
        let lhs = hardy_forward(&dilate(&f, t, 3).unwrap(), &sp3).unwrap();
        let rhs = hardy_forward(&f, &sp3).unwrap();
        for r in [0.03, 0.3, 1.0, 2.7, 11.0, 40.0] {
            let want = pow(t, sp3.beta - 3.0) * rhs.evaluate(r / t).unwrap();
            let got = lhs.evaluate(r).unwrap();
            if want != 0.0 || got != 0.0 {
                worst_dil = worst_dil.max(rel_diff(got, want));
            }
        }
    }

    let sp2 = validate_lebesgue(2, 1.5, 0.3).unwrap();
    let mut cheb_violations = 0;
    for i in 0..100u64 {
        let f = random_admissible_profile(&mut stream_rng(SEED + 11, i), &sp2);
        let g = hardy_forward(&f, &sp2).unwrap();
        let strong = strong_norm(&g, sp2.q, 0.0, 2).unwrap();
        let weak = weak_norm_with(&g, sp2.q, 0.0, 2).unwrap().value;
        cheb_violations += usize::from(weak > strong * (1.0 + CHEBYSHEV_SLACK));
    }

    let seed = SEED.to_string();
    let runs: [Vec<&str>; 4] = [
        vec!["verify", "--n", "2", "--p", "2", "--q", "3", "--alpha", "0.5", "--beta", "0.75", "--profiles", "50", "--format", "csv"],
        vec!["oracle", "--n", "2", "--p", "2", "--beta", "0.5", "--samples", "100000", "--format", "json"],
        vec!["limit", "--n", "2", "--p", "1", "--beta", "0.5", "--profile", "powerbump", "--format", "csv"],
        vec!["sweep", "--n", "1,2,3", "--p", "1,2", "--beta", "0,0.5", "--alpha", "-0.5,0", "--format", "json"],
    ];
    let mut deterministic = true;
    for args in &runs {
        let mut full = args.clone();
        full.extend(["--seed", &seed]);
        deterministic &= cli_bytes(&full)? == cli_bytes(&full)?;
    }

    check(
        worst_pair <= PAIRING_TOL && worst_dil <= DILATION_TOL && cheb_violations == 0 && deterministic,
        format!(
            "100 pairings, max residual = {worst_pair:e}; dilation max residual = {worst_dil:e}; Chebyshev violations {cheb_violations}/100; CLI byte-identical across reruns: {deterministic}"
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("unweighted forward sharpness", criterion_1),
        ("unweighted adjoint constant", criterion_2),
        ("weighted forward constant", criterion_3),
        ("weighted adjoint constant", criterion_4),
        ("reduction identities", criterion_5),
        ("radial averaging oracle", criterion_6),
        ("limiting behaviour", criterion_7),
        ("structural invariants", criterion_8),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(Failure(d)) => {
                failed.push(id);
                ("FAIL", d)
            }
        };
        writeln!(out, "{tag} criterion {id} ({name}): {detail}").unwrap();
        out.flush().unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
