//! Subcommand handlers. Each returns the text to emit or a [`Failure`] carrying the exit code.

use std::fmt;

use serde::Serialize;

use oxy_fbp_core::model::{eval_profile, steady_state_boundary};
use oxy_fbp_core::moments::check_constraint;
use oxy_fbp_core::oracle::{oracle_solve, OracleField, OracleOptions, MIN_NX};
use oxy_fbp_core::reference::{compare, load_tables, table, ComparisonReport};
use oxy_fbp_core::{
    integrate, integrate_batch, IntegratorOptions, Method, ProblemSpec, State, Trajectory,
};

use crate::args::{CompareArgs, Format, ProfileArgs, SolveArgs, SolverArgs, SteadyArgs};
use crate::output::{fmt12, round12, to_json, Csv, SolveDoc};

/// Two sample times closer than this are the same time.
const TIME_EPS: f64 = 1e-12;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or parameters: exit 2.
    Usage(String),
    /// Solver or I/O failure: exit 3.
    Runtime(String),
    /// The comparison ran but some rows are out of tolerance: exit 1.
    OutOfTolerance(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::OutOfTolerance(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) | Failure::OutOfTolerance(m) => f.write_str(m),
        }
    }
}

fn runtime(e: impl fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// Builds and validates the problem before any solver runs.
pub fn build_spec(args: &SolverArgs) -> Result<ProblemSpec, Failure> {
    let method = Method::from(args.method);
    let mut spec = ProblemSpec::new(method);
    if method == Method::Oracle {
        if args.a0.is_some() || args.constraint_start {
            return Err(usage(
                "the oracle starts from (1 − x)²/2; --a0 and --constraint-start do not apply",
            ));
        }
        if args.dt.is_some() {
            return Err(usage(
                "the oracle step follows from the grid; use --nx instead of --dt",
            ));
        }
    }
    if let Some(a0) = args.a0 {
        spec.a0 = a0;
    }
    if args.constraint_start {
        spec = spec.with_constraint_start();
    }
    if let Some(t0) = args.t0 {
        spec.t0 = t0;
    }
    if let Some(dt) = args.dt {
        spec.dt = dt;
    }
    if let Some(t_end) = args.t_end {
        spec.t_end = t_end;
    }
    spec.validate().map_err(usage)?;
    Ok(spec)
}

fn oracle_options(nx: Option<usize>, method: Method) -> Result<OracleOptions, Failure> {
    let mut opts = OracleOptions::default();
    match nx {
        Some(_) if method != Method::Oracle => Err(usage("--nx applies only to --method oracle")),
        Some(n) if n < MIN_NX => Err(usage(format!("--nx must be at least {MIN_NX}, got {n}"))),
        Some(n) => {
            opts.nx = n;
            Ok(opts)
        }
        None => Ok(opts),
    }
}

/// Warns on stderr when the initial state has positive constraint slack.
pub fn warn_constraint(spec: &ProblemSpec) {
    let Some(m) = spec.method.moment() else {
        return;
    };
    let slack = check_constraint(m, spec.a0, spec.s0);
    if slack > 0.0 {
        let expr = match m {
            oxy_fbp_core::MomentMethod::Deg3 => "5a − s²",
            oxy_fbp_core::MomentMethod::Deg6 => "128a − 29s²",
        };
        eprintln!(
            "warning: {} constraint {expr} ≤ 0 is violated at a0 = {}: {expr} = {:+}; the boundary advances at first",
            spec.method,
            spec.a0,
            round12(slack)
        );
    }
}

fn summarize(traj: &Trajectory) {
    if let Some(last) = traj.last() {
        eprintln!(
            "{}: {} at t = {} (s = {}, a = {})",
            traj.method,
            traj.termination,
            fmt12(last.t),
            fmt12(last.s),
            fmt12(last.a)
        );
    }
    if let Some(t) = traj.extinction_estimate {
        eprintln!(
            "{}: extrapolated extinction time ≈ {}",
            traj.method,
            fmt12(t)
        );
    }
}

/// Uniform grid from `t0` in steps of `every`, closed at `t_end`, merged with `extra`.
pub fn oracle_sample_times(t0: f64, t_end: f64, every: f64, extra: &[f64]) -> Vec<f64> {
    let n = ((t_end - t0) / every).floor() as usize;
    let mut times: Vec<f64> = (1..=n).map(|k| t0 + k as f64 * every).collect();
    times.push(t_end);
    times.extend(extra.iter().copied().filter(|&t| t > t0 && t < t_end));
    times.sort_by(f64::total_cmp);
    times.dedup_by(|b, a| (*b - *a).abs() < TIME_EPS);
    times.retain(|&t| t - t0 > TIME_EPS && t <= t_end);
    times
}

fn run_method(
    spec: &ProblemSpec,
    nx: Option<usize>,
    every: f64,
    extra: &[f64],
) -> Result<Trajectory, Failure> {
    let opts = oracle_options(nx, spec.method)?;
    if spec.method == Method::Oracle {
        let times = oracle_sample_times(spec.t0, spec.t_end, every, extra);
        oracle_solve(spec, &opts, &times).map_err(runtime)
    } else {
        integrate(spec, &IntegratorOptions::from_spec(spec)).map_err(runtime)
    }
}

fn table_times() -> Vec<f64> {
    let (t1, t2) = load_tables();
    t1.rows.iter().chain(&t2.rows).map(|r| r.t).collect()
}

pub fn solve(args: &SolveArgs) -> Result<String, Failure> {
    if !(args.sample_dt > 0.0 && args.sample_dt.is_finite()) {
        return Err(usage(format!(
            "--sample-dt must be positive, got {}",
            args.sample_dt
        )));
    }
    if !args.sweep_a0.is_empty() {
        return sweep(args);
    }
    let spec = build_spec(&args.solver)?;
    warn_constraint(&spec);
    let traj = run_method(&spec, args.nx, args.sample_dt, &table_times())?;
    summarize(&traj);
    Ok(match args.output.format {
        Format::Json => to_json(&SolveDoc::from_trajectory(&traj)),
        Format::Csv => {
            let mut csv = Csv::new(&["t", "s", "a"]);
            for st in &traj.samples {
                csv.numbers(&[st.t, st.s, st.a]);
            }
            csv.into_string()
        }
    })
}

#[derive(Serialize)]
struct SweepRun {
    a0: f64,
    #[serde(flatten)]
    run: SolveDoc,
}

#[derive(Serialize)]
struct SweepDoc {
    runs: Vec<SweepRun>,
}

fn sweep(args: &SolveArgs) -> Result<String, Failure> {
    let base = build_spec(&args.solver)?;
    if base.method == Method::Oracle {
        return Err(usage("--sweep-a0 applies only to moment methods"));
    }
    oracle_options(args.nx, base.method)?;
    let jobs = args
        .sweep_a0
        .iter()
        .map(|&a0| {
            let spec = ProblemSpec { a0, ..base };
            spec.validate().map_err(usage)?;
            warn_constraint(&spec);
            Ok((spec, IntegratorOptions::from_spec(&spec)))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let runs = integrate_batch(&jobs, args.parallel)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    for traj in &runs {
        summarize(traj);
    }
    Ok(match args.output.format {
        Format::Json => to_json(&SweepDoc {
            runs: jobs
                .iter()
                .zip(&runs)
                .map(|((spec, _), traj)| SweepRun {
                    a0: round12(spec.a0),
                    run: SolveDoc::from_trajectory(traj),
                })
                .collect(),
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["a0", "t", "s", "a"]);
            for ((spec, _), traj) in jobs.iter().zip(&runs) {
                for st in &traj.samples {
                    csv.numbers(&[spec.a0, st.t, st.s, st.a]);
                }
            }
            csv.into_string()
        }
    })
}

#[derive(Serialize)]
struct CompareRowDoc {
    t: f64,
    reference: f64,
    computed: f64,
    abs_error: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct CompareDoc {
    table: u8,
    quantity: &'static str,
    column: &'static str,
    method: &'static str,
    rows: Vec<CompareRowDoc>,
    max_abs_error: f64,
    all_pass: bool,
}

fn render_report(report: &ComparisonReport, method: Method, format: Format) -> String {
    match format {
        Format::Json => to_json(&CompareDoc {
            table: report.table,
            quantity: report.quantity.symbol(),
            column: report.column.name(),
            method: method.name(),
            rows: report
                .rows
                .iter()
                .map(|r| CompareRowDoc {
                    t: round12(r.t),
                    reference: round12(r.reference),
                    computed: round12(r.computed),
                    abs_error: round12(r.abs_error),
                    tolerance: r.tolerance,
                    pass: r.passes(),
                })
                .collect(),
            max_abs_error: round12(report.max_abs_error),
            all_pass: report.all_pass(),
        }),
        Format::Csv => {
            let mut csv = Csv::new(&[
                "t",
                "reference",
                "computed",
                "abs_error",
                "tolerance",
                "pass",
            ]);
            for r in &report.rows {
                csv.row([
                    fmt12(r.t),
                    fmt12(r.reference),
                    fmt12(r.computed),
                    fmt12(r.abs_error),
                    fmt12(r.tolerance),
                    r.passes().to_string(),
                ]);
            }
            csv.into_string()
        }
    }
}

/// Renders the comparison; the caller still emits the text when rows fail.
pub fn compare_cmd(args: &CompareArgs) -> Result<(String, Option<Failure>), Failure> {
    let spec = build_spec(&args.solver)?;
    warn_constraint(&spec);
    let reference = table(args.table).map_err(usage)?;
    let times: Vec<f64> = reference.rows.iter().map(|r| r.t).collect();
    let opts = oracle_options(args.nx, spec.method)?;
    let traj = if spec.method == Method::Oracle {
        let times: Vec<f64> = times.iter().copied().filter(|&t| t > spec.t0).collect();
        oracle_solve(&spec, &opts, &times).map_err(runtime)?
    } else {
        integrate(&spec, &IntegratorOptions::from_spec(&spec)).map_err(runtime)?
    };
    let report = compare(&traj, &reference, args.column.into());
    report.require_complete(&traj).map_err(|e| {
        runtime(format!(
            "{} run ended ({}) before the table range: {e}",
            spec.method, traj.termination
        ))
    })?;
    let text = render_report(&report, spec.method, args.output.format);
    let summary = format!(
        "table {} ({}) vs {} column, {}: {}/{} rows within tolerance, max |err| = {}",
        report.table,
        report.quantity.symbol(),
        report.column.name(),
        spec.method,
        report.rows_within_tolerance,
        report.rows.len(),
        fmt12(report.max_abs_error)
    );
    eprintln!("{summary}");
    let failure = (!report.all_pass()).then_some(Failure::OutOfTolerance(summary));
    Ok((text, failure))
}

#[derive(Serialize)]
struct ProfileCurve {
    t: f64,
    s: f64,
    x: Vec<f64>,
    u: Vec<f64>,
}

#[derive(Serialize)]
struct ProfileDoc {
    method: &'static str,
    profiles: Vec<ProfileCurve>,
}

/// Linear interpolation of the grid field at `x`.
fn field_value(field: &OracleField, x: f64) -> f64 {
    let pos = x / field.dx;
    let i = (pos.floor() as usize).min(field.nx - 2);
    let w = pos - i as f64;
    (1.0 - w) * field.u[i] + w * field.u[i + 1]
}

fn sample_curve(
    t: f64,
    s: f64,
    nx: usize,
    value: impl Fn(f64) -> Result<f64, Failure>,
) -> Result<ProfileCurve, Failure> {
    let mut x = Vec::with_capacity(nx);
    let mut u = Vec::with_capacity(nx);
    for k in 0..nx {
        // the last point is exactly s
        let xk = if k + 1 == nx {
            s
        } else {
            s * k as f64 / (nx - 1) as f64
        };
        x.push(xk);
        u.push(value(xk)?);
    }
    Ok(ProfileCurve { t, s, x, u })
}

pub fn profile(args: &ProfileArgs) -> Result<String, Failure> {
    let spec = build_spec(&args.solver)?;
    if args.nx < 2 {
        return Err(usage(format!(
            "--nx must be at least 2 for profiles, got {}",
            args.nx
        )));
    }
    let mut times = args.times.clone();
    if times.iter().any(|t| !t.is_finite()) {
        return Err(usage("--times must be finite"));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    warn_constraint(&spec);
    let curves = match spec.method.moment() {
        Some(m) => {
            let traj = integrate(&spec, &IntegratorOptions::from_spec(&spec)).map_err(runtime)?;
            summarize(&traj);
            times
                .iter()
                .map(|&t| {
                    let State { s, a, .. } = traj.state_at(t).map_err(runtime)?;
                    sample_curve(t, s, args.nx, |x| eval_profile(m, a, s, x).map_err(runtime))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        None => {
            let mut field = OracleField::initial(&OracleOptions::default()).map_err(runtime)?;
            times
                .iter()
                .map(|&t| {
                    if t < spec.t0 || t > spec.t_end {
                        return Err(runtime(oxy_fbp_core::Error::OutOfRange {
                            t,
                            start: spec.t0,
                            end: spec.t_end,
                        }));
                    }
                    field.advance_to(t - spec.t0).map_err(runtime)?;
                    let s = field.s_est;
                    sample_curve(t, s, args.nx, |x| Ok(field_value(&field, x)))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(match args.output.format {
        Format::Json => to_json(&ProfileDoc {
            method: spec.method.name(),
            profiles: curves
                .into_iter()
                .map(|c| ProfileCurve {
                    t: round12(c.t),
                    s: round12(c.s),
                    x: c.x.into_iter().map(round12).collect(),
                    u: c.u.into_iter().map(round12).collect(),
                })
                .collect(),
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["t", "x", "u"]);
            for c in &curves {
                for (x, u) in c.x.iter().zip(&c.u) {
                    csv.numbers(&[c.t, *x, *u]);
                }
            }
            csv.into_string()
        }
    })
}

#[derive(Serialize)]
struct SteadyDoc {
    c0: f64,
    m: f64,
    x0: f64,
    coefficient: f64,
}

/// Penetration depth and the coefficient m/2 of `C = (m/2)(X − X0)²`.
pub fn steady(args: &SteadyArgs) -> Result<String, Failure> {
    let x0 = steady_state_boundary(args.c0, args.m).map_err(usage)?;
    let coefficient = args.m / 2.0;
    Ok(match args.output.format {
        Format::Json => to_json(&SteadyDoc {
            c0: round12(args.c0),
            m: round12(args.m),
            x0: round12(x0),
            coefficient: round12(coefficient),
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["c0", "m", "x0", "coefficient"]);
            csv.numbers(&[args.c0, args.m, x0, coefficient]);
            csv.into_string()
        }
    })
}
