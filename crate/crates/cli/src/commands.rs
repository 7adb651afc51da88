use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use gwrm_core::diagnostics::{calibrate_modes, estimate_modes, lle, CalibrationConfig, ClassifyConfig};
use gwrm_core::gwrm::solve_adaptive;
use gwrm_core::problems::{from_registry, REGISTRY};
use gwrm_core::refsolvers::{default_trapezoid_newton, rk4_adaptive, trapezoid_adaptive, StepperConfig, Trajectory};
use gwrm_core::smoothing::{
    recover_from_ti, steepness_piecewise, steepness_sampled, ti_auto_offset, transform_ta, transform_ti,
    PiecewiseSeries, TaTransform, TiRecovery,
};
use gwrm_core::{GwrmConfig, GwrmSolution, OdeProblem};
use serde::Serialize;

use crate::args::{
    CompareArgs, GlobalArgs, LleArgs, Method, ModesArgs, SampleArgs, Smoothing, SmoothingArgs, SolveArgs, Spacing,
    SpanArgs, SteepnessArgs,
};
use crate::output::{
    ensure_dir, sample_times, write_json, write_series, ConfigSnapshot, MethodStats, ProblemInfo, RunRecord,
    SmoothingInfo,
};

/// A command failure and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Internal(_) => 3,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(e) | Failure::Internal(e) => format!("{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

impl From<gwrm_core::Error> for Failure {
    fn from(e: gwrm_core::Error) -> Self {
        use gwrm_core::Error as E;
        match e {
            E::Config(_) | E::Domain(_) | E::Shape { .. } | E::Unsupported(_) | E::Degenerate(_) => {
                Failure::Usage(e.into())
            }
            other => Failure::Internal(other.into()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

pub type Outcome = Result<i32, Failure>;

const SUCCESS: i32 = 0;
const PARTIAL: i32 = 2;

pub fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut out = BTreeMap::new();
    for p in raw {
        let (k, v) = p.split_once('=').ok_or_else(|| usage(format!("--param expects name=value, got '{p}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| usage(format!("--param {k}: '{v}' is not a number")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

pub fn load_problem(global: &GlobalArgs, span: &SpanArgs) -> Result<OdeProblem, Failure> {
    let name = global
        .problem
        .as_deref()
        .ok_or_else(|| usage(format!("--problem is required (known: {})", REGISTRY.join(", "))))?;
    let mut p = from_registry(name, &parse_params(&global.params)?)?;
    let (t0, t1) = p.span();
    let (t0, t1) = (span.t_start.unwrap_or(t0), span.t_end.unwrap_or(t1));
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(usage(format!("invalid span [{t0}, {t1}]")));
    }
    p = p.with_span(t0, t1);
    if let Some(u0) = &span.u0 {
        if u0.len() != p.dim() {
            return Err(usage(format!("--u0 needs {} values, got {}", p.dim(), u0.len())));
        }
        p = p.with_initial_state(u0.clone());
    }
    Ok(p)
}

fn problem_info(p: &OdeProblem) -> ProblemInfo {
    ProblemInfo { name: p.name().to_string(), params: p.params().clone(), span: p.span(), u0: p.u0().to_vec() }
}

fn out_dir(global: &GlobalArgs) -> PathBuf {
    global.out.clone().unwrap_or_else(|| PathBuf::from("gwrm-out"))
}

enum Solved {
    Gwrm(GwrmSolution),
    Steps(Trajectory),
}

enum Transform {
    None,
    Ti { offset: Vec<f64> },
    Ta(TaTransform),
}

/// One solver run on `p` (or its transform), timed.
struct Run {
    solved: Solved,
    transform: Transform,
    /// The system actually integrated.
    system: OdeProblem,
    config: ConfigSnapshot,
    wall_time: f64,
}

impl Run {
    fn completed(&self) -> bool {
        match &self.solved {
            Solved::Gwrm(s) => s.is_complete(),
            Solved::Steps(t) => t.is_complete(),
        }
    }

    fn status(&self) -> String {
        let text = match &self.solved {
            Solved::Gwrm(s) => serde_json::to_value(&s.status),
            Solved::Steps(t) => serde_json::to_value(&t.status),
        };
        match text.ok().as_ref().and_then(|v| v.get("status")).and_then(|s| s.as_str()) {
            Some(s) => s.to_string(),
            None => "unknown".into(),
        }
    }

    fn stats(&self) -> MethodStats {
        match &self.solved {
            Solved::Gwrm(s) => MethodStats::Gwrm {
                interval_count: s.stats.interval_count,
                total_iterations: s.stats.total_iterations,
                jacobian_evals: s.stats.jacobian_evals,
                resolve_count: s.stats.resolve_count,
                total_modes: s.total_unknowns() / s.dim().max(1),
                max_tail_ratio: s.stats.tail_ratios.iter().copied().fold(0.0, f64::max),
            },
            Solved::Steps(t) => MethodStats::Stepper {
                steps_taken: t.steps_taken,
                steps_rejected: t.steps_rejected,
                last_time: t.last_time(),
            },
        }
    }

    fn smoothing_info(&self, warmup_tol: f64) -> SmoothingInfo {
        match &self.transform {
            Transform::None => SmoothingInfo::None,
            Transform::Ti { offset } => SmoothingInfo::Ti { offset: offset.clone() },
            Transform::Ta(ta) => SmoothingInfo::Ta { delta: ta.delta, warmup_tol },
        }
    }

    /// `u` of the original problem recovered from a GWRM run, if any.
    fn recovered(&self) -> Result<Option<Recovered>, Failure> {
        let Solved::Gwrm(sol) = &self.solved else {
            return Ok(None);
        };
        if sol.pieces.is_empty() {
            return Ok(None);
        }
        Ok(Some(match &self.transform {
            Transform::None => Recovered::Direct(sol.clone()),
            Transform::Ti { offset } => Recovered::Ti(recover_from_ti(sol, offset)?),
            Transform::Ta(ta) => Recovered::Ta(ta.recover_average(sol)?),
        }))
    }
}

enum Recovered {
    Direct(GwrmSolution),
    Ti(TiRecovery),
    Ta(PiecewiseSeries),
}

impl Recovered {
    fn span(&self) -> (f64, f64) {
        match self {
            Recovered::Direct(s) => (s.t_start(), s.t_end()),
            Recovered::Ti(r) => (r.u.t_start(), r.u.t_end()),
            Recovered::Ta(u) => (u.t_start(), u.t_end()),
        }
    }

    fn eval(&self, t: f64) -> gwrm_core::Result<Vec<f64>> {
        match self {
            Recovered::Direct(s) => s.eval(t),
            Recovered::Ti(r) => r.u.eval(t),
            Recovered::Ta(u) => u.eval(t),
        }
    }
}

fn run_method(
    p: &OdeProblem,
    method: Method,
    gwrm: &GwrmConfig,
    stepper: &StepperConfig,
    transform: Transform,
) -> Result<Run, Failure> {
    let system = match &transform {
        Transform::None => p.clone(),
        Transform::Ti { offset } => transform_ti(p, offset)?,
        Transform::Ta(ta) => ta.problem.clone(),
    };
    let clock = Instant::now();
    let (solved, config) = match method {
        Method::Gwrm => (Solved::Gwrm(solve_adaptive(&system, gwrm)?), ConfigSnapshot::Gwrm(*gwrm)),
        Method::Rk4 => (
            Solved::Steps(rk4_adaptive(&system, stepper)?),
            ConfigSnapshot::Stepper { stepper: stepper.clone(), newton: None },
        ),
        Method::Trapezoid => {
            let newton = default_trapezoid_newton();
            (
                Solved::Steps(trapezoid_adaptive(&system, stepper, &newton)?),
                ConfigSnapshot::Stepper { stepper: stepper.clone(), newton: Some(newton) },
            )
        }
    };
    let wall_time = clock.elapsed().as_secs_f64();
    Ok(Run { solved, transform, system, config, wall_time })
}

fn parse_offset(p: &OdeProblem, args: &SmoothingArgs) -> Result<Vec<f64>, Failure> {
    let (t0, t1) = p.span();
    match args.ti_a.as_deref().map(str::trim) {
        None => Ok(vec![0.0; p.dim()]),
        Some("auto") => Ok(ti_auto_offset(p, args.ti_horizon.unwrap_or(t1 - t0))?),
        Some(list) => {
            let vals: Vec<f64> = list
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| usage(format!("--ti-A expects numbers or 'auto', got '{list}'")))?;
            match vals.len() {
                1 => Ok(vec![vals[0]; p.dim()]),
                n if n == p.dim() => Ok(vals),
                n => Err(usage(format!("--ti-A needs 1 or {} values, got {n}", p.dim()))),
            }
        }
    }
}

fn build_transform(p: &OdeProblem, args: &SmoothingArgs) -> Result<Transform, Failure> {
    Ok(match args.smoothing {
        Smoothing::None => Transform::None,
        Smoothing::Ti => Transform::Ti { offset: parse_offset(p, args)? },
        Smoothing::Ta => {
            let delta = args.ta_delta.ok_or_else(|| usage("--smoothing ta needs --ta-delta"))?;
            Transform::Ta(transform_ta(p, delta, args.ta_warmup_tol)?)
        }
    })
}

fn record(label: &str, p: &OdeProblem, method: Method, run: &Run, warmup_tol: f64) -> RunRecord {
    RunRecord {
        label: label.to_string(),
        problem: problem_info(p),
        method,
        smoothing: run.smoothing_info(warmup_tol),
        config: run.config.clone(),
        wall_time: run.wall_time,
        completed: run.completed(),
        status: run.status(),
        stats: run.stats(),
        max_error: None,
        outputs: Vec::new(),
    }
}

/// Writes the sampled series (GWRM) or accepted-step trajectory (steppers).
fn write_run_outputs(
    dir: &Path,
    p: &OdeProblem,
    run: &Run,
    sampling: &SampleArgs,
    rec: &mut RunRecord,
) -> Result<(), Failure> {
    match &run.solved {
        Solved::Gwrm(sol) => {
            let coeffs = dir.join("coeffs.json");
            write_json(&coeffs, sol)?;
            rec.outputs.push(coeffs);
            if let Some(u) = run.recovered()? {
                let (a, b) = u.span();
                let times = sample_times(a, b, sampling.samples, sampling.spacing == Spacing::Log);
                let mut labels: Vec<String> = match &u {
                    Recovered::Ta(_) => p.labels().iter().map(|l| format!("U_{l}")).collect(),
                    _ => p.labels().to_vec(),
                };
                if let Recovered::Ti(_) = u {
                    labels.extend(p.labels().iter().map(|l| format!("W_{l}")));
                }
                let mut rows = Vec::with_capacity(times.len());
                for t in times {
                    let mut vals = u.eval(t)?;
                    if let Recovered::Ti(r) = &u {
                        vals.extend(r.long_time_average(t)?);
                    }
                    rows.push((t, vals));
                }
                let series = dir.join("series.csv");
                write_series(&series, p.name(), &labels, &rows)?;
                rec.outputs.push(series);
            }
        }
        Solved::Steps(traj) => {
            let rows: Vec<(f64, Vec<f64>)> =
                traj.times.iter().copied().zip(traj.states.iter().cloned()).collect();
            let path = dir.join("trajectory.csv");
            write_series(&path, p.name(), run.system.labels(), &rows)?;
            rec.outputs.push(path);
        }
    }
    Ok(())
}

pub fn solve(global: &GlobalArgs, args: &SolveArgs) -> Outcome {
    let p = load_problem(global, &args.span)?;
    let gwrm = args.gwrm.config(&p, None);
    let stepper = args.stepper.config(p.abs_scale(), 1e-6);
    let transform = build_transform(&p, &args.smoothing)?;
    let run = run_method(&p, args.method, &gwrm, &stepper, transform)?;
    let dir = out_dir(global);
    ensure_dir(&dir)?;
    let mut rec = record(args.method.name(), &p, args.method, &run, args.smoothing.ta_warmup_tol);
    write_run_outputs(&dir, &p, &run, &args.sampling, &mut rec)?;
    let run_json = dir.join("run.json");
    rec.outputs.push(run_json.clone());
    write_json(&run_json, &rec)?;
    println!("{}", summary_line(&rec));
    Ok(if rec.completed { SUCCESS } else { PARTIAL })
}

fn summary_line(rec: &RunRecord) -> String {
    let work = match &rec.stats {
        MethodStats::Gwrm { interval_count, total_modes, .. } => {
            format!("{interval_count} intervals, {total_modes} modes per variable")
        }
        MethodStats::Stepper { steps_taken, steps_rejected, last_time } => {
            format!("{steps_taken} steps ({steps_rejected} rejected), reached t = {last_time:e}")
        }
    };
    format!("{} on {}: {}, {work}, {:.3} s", rec.label, rec.problem.name, rec.status, rec.wall_time)
}

/// Largest deviation `|x − r| / (scale + |r|)` over the shared times, i.e. in
/// units of the mixed tolerance `tol·(scale + |u|)` the methods are run at.
fn scaled_error(pairs: impl Iterator<Item = (Vec<f64>, Vec<f64>)>, scale: f64) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for (x, r) in pairs {
        for (a, b) in x.iter().zip(&r) {
            let e = (a - b).abs() / (scale + b.abs());
            worst = Some(worst.map_or(e, |w| w.max(if e.is_nan() { f64::INFINITY } else { e })));
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub method: String,
    pub completed: bool,
    pub status: String,
    pub work: usize,
    pub modes: Option<usize>,
    pub wall_time: f64,
    pub max_error: Option<f64>,
}

pub fn compare(global: &GlobalArgs, args: &CompareArgs) -> Outcome {
    let p = load_problem(global, &args.span)?;
    let mut methods = args.methods.clone();
    methods.dedup();
    let extra_rows = usize::from(args.with_ti) + usize::from(args.with_ta);
    if methods.len() + extra_rows < 2 {
        return Err(usage("compare needs at least two methods"));
    }
    if (args.with_ti || args.with_ta) && !methods.contains(&Method::Gwrm) {
        return Err(usage("--with-ti/--with-ta need gwrm among --methods"));
    }
    let tol = args.stepper.tol.or(args.gwrm.epsilon).unwrap_or(1e-3);
    let gwrm = args.gwrm.config(&p, Some(tol));
    let stepper = args.stepper.config(p.abs_scale(), tol);
    let (t0, t1) = p.span();
    let grid = sample_times(t0, t1, args.sampling.samples, args.sampling.spacing == Spacing::Log);

    let mut runs: Vec<(String, Method, Run)> = Vec::new();
    for &m in &methods {
        runs.push((m.name().to_string(), m, run_method(&p, m, &gwrm, &stepper, Transform::None)?));
    }
    if args.with_ti {
        let t = Transform::Ti { offset: vec![0.0; p.dim()] };
        runs.push(("gwrm-ti".into(), Method::Gwrm, run_method(&p, Method::Gwrm, &gwrm, &stepper, t)?));
    }
    let warmup_tol = 1e-10;
    if args.with_ta {
        let delta = args.ta_delta.unwrap_or(0.01 * (t1 - t0));
        let t = Transform::Ta(transform_ta(&p, delta, warmup_tol)?);
        runs.push(("gwrm-ta".into(), Method::Gwrm, run_method(&p, Method::Gwrm, &gwrm, &stepper, t)?));
    }

    // Reference: trapezoid at a much tighter tolerance, landing on every time
    // at which some row is compared.
    let mut checkpoints = grid.clone();
    for (_, _, run) in &runs {
        if let Solved::Steps(traj) = &run.solved {
            checkpoints.extend_from_slice(&traj.times);
        }
    }
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.dedup();
    let ref_tol = args.ref_tol.unwrap_or((1e-3 * tol).max(1e-10));
    let ref_cfg = StepperConfig { checkpoints, max_steps: 10_000_000, ..StepperConfig::for_problem(&p, ref_tol) };
    let reference = trapezoid_adaptive(&p, &ref_cfg, &default_trapezoid_newton())?;
    if !reference.is_complete() {
        eprintln!("reference trapezoid run (tol {ref_tol:e}) did not complete: {:?}", reference.status);
        return Ok(PARTIAL);
    }

    let dir = out_dir(global);
    ensure_dir(&dir)?;
    let mut records = Vec::new();
    for (label, m, run) in &runs {
        let mut rec = record(label, &p, *m, run, warmup_tol);
        rec.max_error = match (&run.solved, &run.transform) {
            (_, Transform::Ta(_)) => None,
            (Solved::Steps(traj), _) => scaled_error(
                traj.times.iter().zip(&traj.states).filter_map(|(&t, s)| Some((s.clone(), reference.state_at(t)?.to_vec()))),
                p.abs_scale(),
            ),
            (Solved::Gwrm(_), _) => match run.recovered()? {
                Some(u) => {
                    let (a, b) = u.span();
                    scaled_error(
                        grid.iter()
                            .filter(|&&t| t >= a && t <= b)
                            .filter_map(|&t| Some((u.eval(t).ok()?, reference.state_at(t)?.to_vec()))),
                        p.abs_scale(),
                    )
                }
                None => None,
            },
        };
        let run_dir = dir.join(label);
        ensure_dir(&run_dir)?;
        write_run_outputs(&run_dir, &p, run, &args.sampling, &mut rec)?;
        let path = run_dir.join("run.json");
        rec.outputs.push(path.clone());
        write_json(&path, &rec)?;
        records.push(rec);
    }

    let rows: Vec<CompareRow> = records.iter().map(compare_row).collect();
    let text = render_table(&p, tol, ref_tol, &rows);
    print!("{text}");
    std::fs::write(dir.join("compare.txt"), &text).context("writing compare.txt")?;
    let mut w = csv::Writer::from_path(dir.join("compare.csv")).context("writing compare.csv")?;
    w.write_record(["method", "completed", "status", "steps_or_intervals", "modes", "wall_time_s", "max_error"])
        .context("writing compare.csv")?;
    for r in &rows {
        w.write_record([
            r.method.clone(),
            r.completed.to_string(),
            r.status.clone(),
            r.work.to_string(),
            r.modes.map(|m| m.to_string()).unwrap_or_default(),
            r.wall_time.to_string(),
            r.max_error.map(|e| e.to_string()).unwrap_or_default(),
        ])
        .context("writing compare.csv")?;
    }
    w.flush().context("writing compare.csv")?;
    Ok(SUCCESS)
}

/// Rebuilds a table row from a stored run record.
pub fn compare_row(rec: &RunRecord) -> CompareRow {
    CompareRow {
        method: rec.label.clone(),
        completed: rec.completed,
        status: rec.status.clone(),
        work: rec.stats.work(),
        modes: rec.stats.modes(),
        wall_time: rec.wall_time,
        max_error: rec.max_error,
    }
}

fn render_table(p: &OdeProblem, tol: f64, ref_tol: f64, rows: &[CompareRow]) -> String {
    let (t0, t1) = p.span();
    let mut s = String::new();
    let _ = writeln!(s, "{} on [{t0}, {t1}], tol {tol:e}, reference trapezoid tol {ref_tol:e}", p.name());
    let _ = writeln!(
        s,
        "{:<10} {:>9} {:<10} {:>10} {:>8} {:>12} {:>11}",
        "method", "completed", "status", "steps/int", "modes", "wall_time_s", "max_error"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<10} {:>9} {:<10} {:>10} {:>8} {:>12.6} {:>11}",
            r.method,
            if r.completed { "yes" } else { "no" },
            r.status,
            r.work,
            r.modes.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
            r.wall_time,
            r.max_error.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "-".into()),
        );
    }
    if let Some(base) = rows.iter().find(|r| r.method == "gwrm" && r.completed && r.wall_time > 0.0) {
        for r in rows.iter().filter(|r| r.method != "gwrm" && r.completed) {
            let _ = writeln!(s, "wall time {} / gwrm = {:.2}", r.method, r.wall_time / base.wall_time);
        }
        for r in rows.iter().filter(|r| r.method.starts_with("gwrm-")) {
            if let (Some(m), Some(b)) = (r.modes, base.modes) {
                let _ = writeln!(s, "modes {} / gwrm = {:.2}", r.method, m as f64 / b as f64);
            }
        }
    }
    s
}

fn print_report<T: Serialize>(global: &GlobalArgs, name: &str, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).context("serializing report")?;
    println!("{text}");
    if let Some(dir) = &global.out {
        ensure_dir(dir)?;
        write_json(&dir.join(format!("{name}.json")), value)?;
    }
    Ok(())
}

pub fn lle_cmd(global: &GlobalArgs, args: &LleArgs) -> Outcome {
    let p = load_problem(global, &SpanArgs { t_start: None, t_end: None, u0: None })?;
    let d = ClassifyConfig::default();
    let cfg = ClassifyConfig {
        chaos_threshold: args.chaos_threshold.unwrap_or(d.chaos_threshold),
        stiff_threshold: args.stiff_threshold.unwrap_or(d.stiff_threshold),
        spread: args.spread.unwrap_or(d.spread),
    };
    let state = args.state.clone().unwrap_or_else(|| p.u0().to_vec());
    let report = lle(&p, args.at.unwrap_or(p.span().0), &state, &cfg, args.dt)?;
    #[derive(Serialize)]
    struct Out<'a> {
        problem: &'a str,
        #[serde(flatten)]
        report: gwrm_core::diagnostics::LleReport,
    }
    print_report(global, "lle", &Out { problem: p.name(), report })?;
    Ok(SUCCESS)
}

pub fn modes_cmd(global: &GlobalArgs, args: &ModesArgs) -> Outcome {
    if args.calibrate {
        let cfg = CalibrationConfig {
            seed: global.seed.unwrap_or(0),
            epsilon: args.epsilon,
            per_bucket: args.per_bucket,
            ..CalibrationConfig::default()
        };
        let report = calibrate_modes(&cfg)?;
        #[derive(Serialize)]
        struct Out {
            config: CalibrationConfig,
            #[serde(flatten)]
            report: gwrm_core::diagnostics::CalibrationReport,
        }
        print_report(global, "modes", &Out { config: cfg, report })?;
    } else {
        let n_e = args.extrema.ok_or_else(|| usage("--extrema is required"))?;
        print_report(global, "modes", &estimate_modes(n_e, args.epsilon, args.order_t)?)?;
    }
    Ok(SUCCESS)
}

fn pick_column(labels: &[String], var: Option<&str>) -> Result<usize, Failure> {
    match var {
        None => Ok(0),
        Some(v) => labels
            .iter()
            .position(|l| l == v)
            .or_else(|| v.parse::<usize>().ok().filter(|&i| i < labels.len()))
            .ok_or_else(|| usage(format!("no variable '{v}' (have: {})", labels.join(", ")))),
    }
}

pub fn steepness_cmd(global: &GlobalArgs, args: &SteepnessArgs) -> Outcome {
    #[derive(Serialize)]
    struct Out {
        source: String,
        variable: String,
        #[serde(flatten)]
        report: gwrm_core::smoothing::SteepnessReport,
    }
    let out = if let Some(path) = &args.input {
        let mut r = csv::Reader::from_path(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
        let headers: Vec<String> = r.headers().map_err(|e| usage(e.to_string()))?.iter().map(String::from).collect();
        let t_col = headers.iter().position(|h| h == "t").ok_or_else(|| usage("input CSV needs a 't' column"))?;
        let data: Vec<String> = headers.iter().filter(|h| *h != "t").cloned().collect();
        let col = pick_column(&data, args.var.as_deref())?;
        let v_col = headers.iter().position(|h| *h == data[col]).unwrap_or(0);
        let (mut times, mut values) = (Vec::new(), Vec::new());
        for row in r.records() {
            let row = row.map_err(|e| usage(e.to_string()))?;
            let num = |i: usize| -> Result<f64, Failure> {
                row.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| usage(format!("bad number in row {:?}", row.position().map(|p| p.line()))))
            };
            times.push(num(t_col)?);
            values.push(num(v_col)?);
        }
        Out { source: path.display().to_string(), variable: data[col].clone(), report: steepness_sampled(&times, &values)? }
    } else {
        let p = load_problem(global, &args.span)?;
        let var = pick_column(p.labels(), args.var.as_deref())?;
        let sol = solve_adaptive(&p, &args.gwrm.config(&p, None))?;
        if !sol.is_complete() {
            eprintln!("warning: GWRM run incomplete: {:?}", sol.status);
        }
        Out {
            source: format!("gwrm:{}", p.name()),
            variable: p.labels()[var].clone(),
            report: steepness_piecewise(&sol.pieces, var)?,
        }
    };
    print_report(global, "steepness", &out)?;
    Ok(SUCCESS)
}
