use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardy_core::params::{validate_adjoint, validate_forward, validate_lebesgue, RELATION_TOL};
use hardy_core::sharpness::{c_sharp, c_sharp_adjoint, sharpness_sweep, default_schedule, Sweep, UpperBoundSummary};
use hardy_core::{OperatorKind, RadialProfile, RawParams, SpaceParams};
use serde_json::{json, Value};

use crate::builtins;
use crate::error::{exit, CliError, CliResult};
use crate::io::{
    csv_text, emit, fmt_num, json_text, lemma21_row_json, limit_summary_json, norm_contraction_json, num, params_json,
    profile_from_json, profile_to_json, report_json, report_record, table_text, REPORT_COLUMNS, SWEEP_EXTRA_COLUMNS,
};
use crate::runners::{lemma21_parallel, limits_parallel, norm_contraction_parallel, sweep_grid, upper_bound_parallel};

#[derive(Parser, Debug)]
#[command(name = "hardy", version, about = "Sharp weak-type bounds for Hardy-type operators with power weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the sharp constants and the solved member of the scaling relation
    Constant {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the extremizer sweep and the random-profile upper bound check
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = KindArg::Forward)]
        kind: KindArg,
        /// Family parameters, driven towards zero
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<f64>,
        /// Random admissible profiles to check against the constant
        #[arg(long, default_value_t = 200)]
        profiles: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Trace lambda |{H f > lambda}|^{1/q} as lambda decreases
    Limit {
        #[command(flatten)]
        params: ParamArgs,
        /// A builtin name (step, twostep, powerbump) or an inline JSON profile
        #[arg(long, default_value = "step")]
        profile: String,
        /// Tolerance on the relative error; 0.02 for p = 1 and 1e-3 otherwise
        #[arg(long)]
        tol: Option<f64>,
        /// Decreasing levels; four per decade by default
        #[arg(long, value_delimiter = ',')]
        lambdas: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare brute-force Monte Carlo with the radial closed form
    Oracle {
        #[command(flatten)]
        params: ParamArgs,
        /// offset-gaussian, abs-first or radial
        #[arg(long, default_value = "offset-gaussian")]
        field: String,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One report row per grid point; rejected points keep their reason
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<i64>,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        beta: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        gamma: Vec<f64>,
        #[arg(long, value_enum, default_value_t = KindArg::Forward)]
        kind: KindArg,
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// The parameter tuple. At most one of `q`, `alpha`, `gamma` may be left
/// out and is solved from the scaling relation; leaving out both `alpha`
/// and `gamma` sets them to zero.
#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: i64,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
}

impl ParamArgs {
    pub fn raw(&self) -> RawParams {
        let (alpha, gamma) = match (self.alpha, self.gamma) {
            (None, None) => (Some(0.0), Some(0.0)),
            other => other,
        };
        RawParams {
            n: self.n,
            p: self.p,
            q: self.q,
            alpha,
            beta: self.beta,
            gamma,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindArg {
    Forward,
    Adjoint,
}

impl KindArg {
    fn operator(self) -> OperatorKind {
        match self {
            KindArg::Forward => OperatorKind::Forward,
            KindArg::Adjoint => OperatorKind::Adjoint,
        }
    }

    fn validate(self, raw: &RawParams) -> hardy_core::Result<SpaceParams> {
        match self {
            KindArg::Forward => validate_forward(raw),
            KindArg::Adjoint => validate_adjoint(raw),
        }
    }
}

/// Runs one command and returns the exit status.
pub fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Constant { params, output } => cmd_constant(&params, &output),
        Command::Verify { params, kind, schedule, profiles, output } => {
            cmd_verify(&params, kind, &schedule, profiles, &output)
        }
        Command::Limit { params, profile, tol, lambdas, output } => cmd_limit(&params, &profile, tol, &lambdas, &output),
        Command::Oracle { params, field, radii, samples, output } => cmd_oracle(&params, &field, &radii, samples, &output),
        Command::Sweep { n, p, beta, alpha, gamma, kind, schedule, output } => {
            let points = grid(&n, &p, &beta, &alpha, &gamma);
            cmd_sweep(&points, kind, &schedule, &output)
        }
    }
}

fn solved_member(raw: &RawParams) -> &'static str {
    if raw.q.is_none() {
        "q"
    } else if raw.alpha.is_none() {
        "alpha"
    } else if raw.gamma.is_none() {
        "gamma"
    } else {
        "none"
    }
}

fn status(r: &hardy_core::Result<SpaceParams>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.tag().into(),
    }
}

pub fn cmd_constant(args: &ParamArgs, out: &OutputArgs) -> CliResult<i32> {
    let raw = args.raw();
    let fwd = validate_forward(&raw);
    let adj = validate_adjoint(&raw);
    let sp = match (&fwd, &adj) {
        (Ok(sp), _) | (_, Ok(sp)) => *sp,
        (Err(e), _) => return Err(e.clone().into()),
    };
    let cf = fwd.as_ref().ok().map(c_sharp);
    let ca = adj.as_ref().ok().map(c_sharp_adjoint);
    let opt = |x: Option<f64>| x.map_or_else(String::new, fmt_num);
    let header = [
        "n", "p", "q", "alpha", "beta", "gamma", "solved", "c_sharp", "c_sharp_adjoint", "forward", "adjoint",
    ];
    let row = vec![
        sp.n.to_string(),
        fmt_num(sp.p),
        fmt_num(sp.q),
        fmt_num(sp.alpha),
        fmt_num(sp.beta),
        fmt_num(sp.gamma),
        solved_member(&raw).to_string(),
        opt(cf),
        opt(ca),
        status(&fwd),
        status(&adj),
    ];
    let text = match out.format {
        Format::Table => header
            .iter()
            .zip(&row)
            .map(|(h, v)| format!("{h:<16}{v}\n"))
            .collect::<String>(),
        Format::Csv => csv_text(&header, &[row])?,
        Format::Json => json_text(&json!({
            "params": params_json(&sp),
            "solved": solved_member(&raw),
            "c_sharp": cf.map_or(Value::Null, num),
            "c_sharp_adjoint": ca.map_or(Value::Null, num),
            "forward": status(&fwd),
            "adjoint": status(&adj),
        })),
    };
    emit(&text, out.out.as_deref())?;
    Ok(exit::OK)
}

fn upper_bound_json(s: &UpperBoundSummary) -> Value {
    json!({
        "checked": s.checked,
        "max_ratio": num(s.max_ratio),
        "violations": s.violations.iter().map(profile_to_json).collect::<Vec<_>>(),
        "failures": s.failures.iter().map(|(f, e)| json!({"profile": profile_to_json(f), "error": e.tag(), "message": e.to_string()})).collect::<Vec<_>>(),
    })
}

fn trend_tag(s: &Sweep) -> &'static str {
    use hardy_core::sharpness::Trend::*;
    match s.trend {
        StrictlyDecreasing => "STRICTLY_DECREASING",
        NonIncreasing => "NON_INCREASING",
        Single => "SINGLE",
        NotMonotone => "NOT_MONOTONE",
    }
}

pub fn cmd_verify(args: &ParamArgs, kind: KindArg, schedule: &[f64], profiles: usize, out: &OutputArgs) -> CliResult<i32> {
    let sp = kind.validate(&args.raw())?;
    let op = kind.operator();
    let default = default_schedule(&sp, op);
    let sched = if schedule.is_empty() { &default[..] } else { schedule };
    let sweep = sharpness_sweep(&sp, op, sched)?;
    let bound = upper_bound_parallel(&sp, op, profiles, out.seed);
    let sweep_ok = sweep.reports.iter().all(|r| r.within_bound());
    let passed = sweep_ok && bound.passed();

    let text = match out.format {
        Format::Table | Format::Csv => {
            let rows: Vec<Vec<String>> = sweep.reports.iter().map(report_record).collect();
            if out.format == Format::Csv {
                csv_text(&REPORT_COLUMNS, &rows)?
            } else {
                let mut t = table_text(&REPORT_COLUMNS, &rows);
                t.push_str(&format!(
                    "\ntrend {}  final relative gap {}\nrandom profiles {}  max ratio/formula {}  violations {}  failures {}\n{}\n",
                    trend_tag(&sweep),
                    fmt_num(sweep.final_relative_gap()),
                    bound.checked,
                    fmt_num(bound.max_ratio),
                    bound.violations.len(),
                    bound.failures.len(),
                    if passed { "PASS" } else { "FAIL" },
                ));
                t
            }
        }
        Format::Json => json_text(&json!({
            "reports": sweep.reports.iter().map(report_json).collect::<Vec<_>>(),
            "trend": trend_tag(&sweep),
            "final_relative_gap": num(sweep.final_relative_gap()),
            "upper_bound": upper_bound_json(&bound),
            "passed": passed,
        })),
    };
    emit(&text, out.out.as_deref())?;
    if !passed {
        for r in sweep.reports.iter().filter(|r| !r.within_bound()) {
            eprintln!("sweep report exceeds the constant: {}", report_json(r));
        }
        for f in &bound.violations {
            eprintln!("profile exceeds the constant: {}", profile_to_json(f));
        }
        for (f, e) in &bound.failures {
            eprintln!("profile could not be evaluated ({}): {}", e, profile_to_json(f));
        }
        return Ok(exit::VERIFICATION_FAILED);
    }
    Ok(exit::OK)
}

/// A builtin name or an inline JSON profile.
pub fn resolve_profile(spec: &str) -> CliResult<RadialProfile> {
    if let Some(f) = builtins::profile(spec) {
        return Ok(f);
    }
    if spec.trim_start().starts_with('[') || spec.trim_start().starts_with('{') {
        return profile_from_json(spec);
    }
    Err(CliError::Usage(format!(
        "unknown profile `{spec}`; builtins are {}",
        builtins::PROFILE_NAMES.join(", ")
    )))
}

/// Unweighted parameters for the limiting experiment, which admits `q = 1`.
/// A given `q`, `alpha` or `gamma` must agree with them.
pub fn limit_params(args: &ParamArgs) -> CliResult<SpaceParams> {
    let sp = validate_lebesgue(args.n, args.p, args.beta)?;
    for (name, v) in [("alpha", args.alpha), ("gamma", args.gamma)] {
        if let Some(v) = v.filter(|v| *v != 0.0) {
            return Err(hardy_core::Error::Range(format!("limiting experiments are unweighted, got {name} = {v}")).into());
        }
    }
    if let Some(q) = args.q.filter(|q| (q - sp.q).abs() > RELATION_TOL * sp.q) {
        return Err(hardy_core::Error::Scaling(format!("q = {q} but 1/q = 1/p - beta/n gives {}", sp.q)).into());
    }
    Ok(sp)
}

pub fn cmd_limit(args: &ParamArgs, profile: &str, tol: Option<f64>, lambdas: &[f64], out: &OutputArgs) -> CliResult<i32> {
    let sp = limit_params(args)?;
    let f = resolve_profile(profile)?;
    let tol = tol.unwrap_or(if sp.p == 1.0 { 0.02 } else { 1e-3 });
    let given = (!lambdas.is_empty()).then_some(lambdas);
    let trace = limits_parallel(&[(f, sp)], given).pop().expect("one run")?;
    let passed = trace.passes(tol);
    let rows: Vec<Vec<String>> = trace
        .lambdas
        .iter()
        .zip(&trace.scores)
        .map(|(l, s)| vec![fmt_num(*l), fmt_num(*s)])
        .collect();
    let summary = limit_summary_json(&trace);
    let text = match out.format {
        Format::Csv => {
            eprintln!("{summary}");
            csv_text(&["lambda", "score"], &rows)?
        }
        Format::Table => {
            let mut t = table_text(&["lambda", "score"], &rows);
            t.push_str(&format!(
                "\nlimit {}  target {}  rel_err {}  tol {}\n{}\n",
                fmt_num(trace.extrapolated_limit),
                fmt_num(trace.target),
                fmt_num(trace.rel_err()),
                fmt_num(tol),
                if passed { "PASS" } else { "FAIL" },
            ));
            t
        }
        Format::Json => json_text(&json!({
            "params": params_json(&sp),
            "trace": trace.lambdas.iter().zip(&trace.scores).map(|(l, s)| json!({"lambda": num(*l), "score": num(*s)})).collect::<Vec<_>>(),
            "summary": summary,
            "tol": num(tol),
            "passed": passed,
        })),
    };
    emit(&text, out.out.as_deref())?;
    Ok(if passed { exit::OK } else { exit::VERIFICATION_FAILED })
}

pub fn cmd_oracle(args: &ParamArgs, field: &str, radii: &[f64], samples: u64, out: &OutputArgs) -> CliResult<i32> {
    let sp = validate_forward(&args.raw())?;
    let n = u32::try_from(sp.n).expect("validated dimension");
    let fld = builtins::field(field, n).ok_or_else(|| {
        CliError::Usage(format!("unknown field `{field}`; builtins are {}", builtins::FIELD_NAMES.join(", ")))
    })?;
    if radii.is_empty() {
        return Err(CliError::Usage("no radii given".into()));
    }
    let report = lemma21_parallel(&fld, &sp, radii, samples, out.seed)?;
    let contraction = norm_contraction_parallel(&fld, &sp, samples, out.seed)?;
    let passed = report.passed() && contraction.pass;
    let header = ["radius", "mc", "mc_std_error", "radial", "radial_std_error", "z", "attempts", "pass"];
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_num(r.radius),
                fmt_num(r.mc.mean),
                fmt_num(r.mc.std_error),
                fmt_num(r.radial),
                fmt_num(r.radial_std_error),
                fmt_num(r.z),
                r.attempts.to_string(),
                r.pass.to_string(),
            ]
        })
        .collect();
    let text = match out.format {
        Format::Csv => csv_text(&header, &rows)?,
        Format::Table => {
            let mut t = table_text(&header, &rows);
            t.push_str(&format!(
                "\nnorm contraction: field {} +- {}  radial {} +- {}  {}\n{}\n",
                fmt_num(contraction.field.mean),
                fmt_num(contraction.field.std_error),
                fmt_num(contraction.radial),
                fmt_num(contraction.radial_std_error),
                if contraction.pass { "holds" } else { "violated" },
                if passed { "PASS" } else { "FAIL" },
            ));
            t
        }
        Format::Json => json_text(&json!({
            "params": params_json(&sp),
            "field": field,
            "rows": report.rows.iter().map(lemma21_row_json).collect::<Vec<_>>(),
            "norm_contraction": norm_contraction_json(&contraction),
            "passed": passed,
        })),
    };
    emit(&text, out.out.as_deref())?;
    Ok(if passed { exit::OK } else { exit::VERIFICATION_FAILED })
}

/// Grid points in row-major order of `(n, p, beta, alpha, gamma)`, with `q`
/// left to the scaling relation.
pub fn grid(n: &[i64], p: &[f64], beta: &[f64], alpha: &[f64], gamma: &[f64]) -> Vec<RawParams> {
    let mut points = Vec::new();
    for &n in n {
        for &p in p {
            for &beta in beta {
                for &alpha in alpha {
                    for &gamma in gamma {
                        points.push(RawParams {
                            n,
                            p,
                            q: None,
                            alpha: Some(alpha),
                            beta,
                            gamma: Some(gamma),
                        });
                    }
                }
            }
        }
    }
    points
}

pub fn cmd_sweep(points: &[RawParams], kind: KindArg, schedule: &[f64], out: &OutputArgs) -> CliResult<i32> {
    if points.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    let given = (!schedule.is_empty()).then_some(schedule);
    let results = sweep_grid(points, kind.operator(), |raw| kind.validate(raw), given);
    let mut header: Vec<&str> = REPORT_COLUMNS.to_vec();
    header.extend(SWEEP_EXTRA_COLUMNS);
    let mut rows = Vec::with_capacity(results.len());
    let mut json_rows = Vec::with_capacity(results.len());
    let mut violated = false;
    for point in &results {
        match &point.outcome {
            Ok((_, sweep)) => {
                let last = sweep.reports.last().expect("sweeps are non-empty");
                violated |= sweep.reports.iter().any(|r| !r.within_bound());
                let mut row = report_record(last);
                row.extend(["ok".to_string(), String::new()]);
                rows.push(row);
                json_rows.push(json!({"status": "ok", "report": report_json(last), "trend": trend_tag(sweep)}));
            }
            Err(e) => {
                let raw = &point.raw;
                let opt = |x: Option<f64>| x.map_or_else(String::new, fmt_num);
                let mut row = vec![
                    raw.n.to_string(),
                    fmt_num(raw.p),
                    opt(raw.q),
                    opt(raw.alpha),
                    fmt_num(raw.beta),
                    opt(raw.gamma),
                    kind.operator().tag().to_string(),
                ];
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.extend([e.tag().to_string(), e.to_string()]);
                rows.push(row);
                json_rows.push(json!({
                    "status": e.tag(),
                    "reason": e.to_string(),
                    "raw": {"n": raw.n, "p": num(raw.p), "alpha": raw.alpha.map_or(Value::Null, num), "beta": num(raw.beta), "gamma": raw.gamma.map_or(Value::Null, num)},
                }));
            }
        }
    }
    let text = match out.format {
        Format::Csv => csv_text(&header, &rows)?,
        Format::Table => table_text(&header, &rows),
        Format::Json => json_text(&Value::Array(json_rows)),
    };
    emit(&text, out.out.as_deref())?;
    Ok(if violated { exit::VERIFICATION_FAILED } else { exit::OK })
}
