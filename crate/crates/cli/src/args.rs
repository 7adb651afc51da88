use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwrm_core::gwrm::InitialGuess;
use gwrm_core::refsolvers::StepperConfig;
use gwrm_core::{GwrmConfig, OdeProblem, SolverConfig, SolverMode};

/// Time-spectral ODE solver and benchmark harness.
#[derive(Debug, Parser)]
#[command(name = "gwrm", version, args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Registry problem: robertson, lorenz84 or linear.
    #[arg(long, global = true)]
    pub problem: Option<String>,
    /// Problem parameter override `name=value` (repeatable).
    #[arg(long = "param", global = true, value_name = "K=V")]
    pub params: Vec<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for statistical commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `key = value` file with defaults for any long flag; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem with one method and write series, coefficients and stats.
    Solve(SolveArgs),
    /// Run several methods at equal tolerance and tabulate cost and error.
    Compare(CompareArgs),
    /// Local Lyapunov exponents of the frozen Jacobian.
    Lle(LleArgs),
    /// Chebyshev mode estimate from an extrema count, or its calibration.
    Modes(ModesArgs),
    /// Steepness of a sampled series or of a solved problem variable.
    Steepness(SteepnessArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gwrm,
    Rk4,
    Trapezoid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gwrm => "gwrm",
            Method::Rk4 => "rk4",
            Method::Trapezoid => "trapezoid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Smoothing {
    None,
    Ti,
    Ta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GuessArg {
    Constant,
    Extrapolate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Picard,
    Newton,
    SemiImplicit,
}

#[derive(Debug, Clone, Args)]
pub struct SpanArgs {
    #[arg(long)]
    pub t_start: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct GwrmArgs {
    /// Temporal order K.
    #[arg(long = "K")]
    pub order: Option<usize>,
    /// Tail-ratio bound.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub initial_dt: Option<f64>,
    #[arg(long)]
    pub min_dt: Option<f64>,
    #[arg(long)]
    pub max_dt: Option<f64>,
    #[arg(long)]
    pub shrink: Option<f64>,
    #[arg(long)]
    pub grow: Option<f64>,
    #[arg(long)]
    pub grow_threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub initial_guess: Option<GuessArg>,
    #[arg(long)]
    pub max_intervals: Option<usize>,
    #[arg(long, value_enum)]
    pub solver_mode: Option<ModeArg>,
    #[arg(long)]
    pub solver_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub jacobian_reuse: Option<usize>,
    #[arg(long)]
    pub damping_init: Option<f64>,
}

impl GwrmArgs {
    /// Robertson starts with a 1e-6 interval so its first decade is resolved.
    pub fn config(&self, problem: &OdeProblem, default_epsilon: Option<f64>) -> GwrmConfig {
        let d = GwrmConfig::default();
        let s = d.solver;
        let first_dt = if problem.name() == "robertson" { 1e-6 } else { d.initial_dt };
        let initial_dt = self.initial_dt.unwrap_or(first_dt);
        GwrmConfig {
            order: self.order.unwrap_or(d.order),
            epsilon: self.epsilon.or(default_epsilon).unwrap_or(d.epsilon),
            initial_dt,
            min_dt: self.min_dt.unwrap_or(d.min_dt.min(initial_dt)),
            max_dt: self.max_dt.unwrap_or(d.max_dt),
            shrink: self.shrink.unwrap_or(d.shrink),
            grow: self.grow.unwrap_or(d.grow),
            grow_threshold: self.grow_threshold.unwrap_or(d.grow_threshold),
            initial_guess: match self.initial_guess {
                Some(GuessArg::Extrapolate) => InitialGuess::Extrapolate,
                Some(GuessArg::Constant) => InitialGuess::Constant,
                None => d.initial_guess,
            },
            max_intervals: self.max_intervals.unwrap_or(d.max_intervals),
            solver: SolverConfig {
                mode: match self.solver_mode {
                    Some(ModeArg::Picard) => SolverMode::Picard,
                    Some(ModeArg::Newton) => SolverMode::Newton,
                    Some(ModeArg::SemiImplicit) => SolverMode::SemiImplicit,
                    None => s.mode,
                },
                tol: self.solver_tol.unwrap_or(s.tol),
                max_iters: self.max_iters.unwrap_or(s.max_iters),
                jacobian_reuse: self.jacobian_reuse.unwrap_or(s.jacobian_reuse),
                damping_init: self.damping_init.unwrap_or(s.damping_init),
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StepperArgs {
    /// Step tolerance: relative `tol`, absolute `tol` times the problem's scale.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub h0: Option<f64>,
    #[arg(long)]
    pub h_min: Option<f64>,
    #[arg(long)]
    pub h_max: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub stagnation_window: Option<usize>,
}

impl StepperArgs {
    pub fn config(&self, abs_scale: f64, default_tol: f64) -> StepperConfig {
        let tol = self.tol.unwrap_or(default_tol);
        let d = StepperConfig::default();
        let h0 = self.h0.unwrap_or(d.h0);
        StepperConfig {
            rel_tol: self.rel_tol.unwrap_or(tol),
            abs_tol: self.abs_tol.unwrap_or(tol * abs_scale),
            h0,
            h_min: self.h_min.unwrap_or(d.h_min.min(h0)),
            h_max: self.h_max.unwrap_or(d.h_max),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            stagnation_window: self.stagnation_window.unwrap_or(d.stagnation_window),
            checkpoints: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SmoothingArgs {
    #[arg(long, value_enum, default_value = "none")]
    pub smoothing: Smoothing,
    /// TI offset A: comma-separated values, or `auto`.
    #[arg(long = "ti-A", allow_hyphen_values = true)]
    pub ti_a: Option<String>,
    /// Horizon of the coarse pre-solve behind `--ti-A auto` (default: whole span).
    #[arg(long)]
    pub ti_horizon: Option<f64>,
    /// TA half width Δ.
    #[arg(long)]
    pub ta_delta: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub ta_warmup_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Points in the sampled series.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value = "gwrm")]
    pub method: Method,
    #[command(flatten)]
    pub span: SpanArgs,
    #[command(flatten)]
    pub gwrm: GwrmArgs,
    #[command(flatten)]
    pub stepper: StepperArgs,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    #[command(flatten)]
    pub sampling: SampleArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Methods to run, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gwrm,trapezoid,rk4")]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub span: SpanArgs,
    #[command(flatten)]
    pub gwrm: GwrmArgs,
    #[command(flatten)]
    pub stepper: StepperArgs,
    /// Tolerance of the trapezoid reference run (default: 1e-3 × tol, at least 1e-10).
    #[arg(long)]
    pub ref_tol: Option<f64>,
    /// Add a TI-transformed GWRM row (mode count against the plain run).
    #[arg(long)]
    pub with_ti: bool,
    /// Add a TA-transformed GWRM row; Δ from `--ta-delta` or 1% of the span.
    #[arg(long)]
    pub with_ta: bool,
    #[arg(long)]
    pub ta_delta: Option<f64>,
    #[command(flatten)]
    pub sampling: SampleArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LleArgs {
    /// Time at which the Jacobian is frozen (default: span start).
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<f64>,
    /// State, comma separated (default: the initial state).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub state: Option<Vec<f64>>,
    /// Sub-interval length ΔT; adds |Re γ|·ΔT to the report.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub chaos_threshold: Option<f64>,
    #[arg(long)]
    pub stiff_threshold: Option<f64>,
    #[arg(long)]
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ModesArgs {
    /// Number of extrema N_e on the interval.
    #[arg(long, required_unless_present = "calibrate")]
    pub extrema: Option<f64>,
    /// Relative accuracy (0.01 or 0.001).
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Temporal order O_t of the system.
    #[arg(long, default_value_t = 0)]
    pub order_t: u32,
    /// Measure mode counts of random signals instead (uses `--seed`).
    #[arg(long)]
    pub calibrate: bool,
    #[arg(long, default_value_t = 30)]
    pub per_bucket: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SteepnessArgs {
    /// CSV with a `t` column; without it the problem is solved with GWRM.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column (CSV) or variable (problem) by name or index; default the first.
    #[arg(long)]
    pub var: Option<String>,
    #[command(flatten)]
    pub span: SpanArgs,
    #[command(flatten)]
    pub gwrm: GwrmArgs,
}
