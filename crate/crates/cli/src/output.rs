use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use gwrm_core::refsolvers::StepperConfig;
use gwrm_core::{GwrmConfig, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::args::Method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub span: (f64, f64),
    pub u0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothingInfo {
    None,
    Ti { offset: Vec<f64> },
    Ta { delta: f64, warmup_tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfigSnapshot {
    Gwrm(GwrmConfig),
    Stepper { stepper: StepperConfig, newton: Option<SolverConfig> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodStats {
    Gwrm {
        interval_count: usize,
        total_iterations: usize,
        jacobian_evals: usize,
        resolve_count: usize,
        /// `Σ (K + 1)` over intervals, per variable.
        total_modes: usize,
        max_tail_ratio: f64,
    },
    Stepper {
        steps_taken: usize,
        steps_rejected: usize,
        last_time: f64,
    },
}

impl MethodStats {
    pub fn work(&self) -> usize {
        match self {
            MethodStats::Gwrm { interval_count, .. } => *interval_count,
            MethodStats::Stepper { steps_taken, .. } => *steps_taken,
        }
    }

    pub fn modes(&self) -> Option<usize> {
        match self {
            MethodStats::Gwrm { total_modes, .. } => Some(*total_modes),
            MethodStats::Stepper { .. } => None,
        }
    }
}

/// Everything needed to reproduce and tabulate one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Row label; the method name, or e.g. `gwrm-ti` for transformed runs.
    pub label: String,
    pub problem: ProblemInfo,
    pub method: Method,
    pub smoothing: SmoothingInfo,
    pub config: ConfigSnapshot,
    /// Seconds, monotonic clock.
    pub wall_time: f64,
    pub completed: bool,
    pub status: String,
    pub stats: MethodStats,
    /// Largest scaled deviation from the reference run (compare only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    pub outputs: Vec<PathBuf>,
}

pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes `t,<labels...>` rows; adds `y_scaled = 1e4·y` for Robertson.
pub fn write_series(path: &Path, problem: &str, labels: &[String], rows: &[(f64, Vec<f64>)]) -> anyhow::Result<()> {
    let y_col = if problem == "robertson" { labels.iter().position(|l| l == "y") } else { None };
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec!["t".to_string()];
    header.extend(labels.iter().cloned());
    if y_col.is_some() {
        header.push("y_scaled".into());
    }
    w.write_record(&header)?;
    for (t, vals) in rows {
        let mut rec = vec![t.to_string()];
        rec.extend(vals.iter().map(f64::to_string));
        if let Some(i) = y_col {
            rec.push((vals[i] * 1e4).to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Sample times on `[t0, t1]`; `log` spacing is geometric from `1e-12·span`
/// after `t0`, preceded by `t0` itself.
pub fn sample_times(t0: f64, t1: f64, n: usize, log: bool) -> Vec<f64> {
    let n = n.max(2);
    if !log {
        return (0..n)
            .map(|i| if i + 1 == n { t1 } else { t0 + (t1 - t0) * i as f64 / (n - 1) as f64 })
            .collect();
    }
    let span = t1 - t0;
    let (a, b) = ((1e-12 * span).log10(), span.log10());
    let mut out = vec![t0];
    out.extend((0..n - 1).map(|i| {
        if i + 2 == n {
            t1
        } else {
            t0 + 10f64.powf(a + (b - a) * i as f64 / (n - 2).max(1) as f64)
        }
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_grids_hit_both_ends() {
        for log in [false, true] {
            let t = sample_times(0.0, 1e6, 50, log);
            assert_eq!(t.len(), 50);
            assert_eq!((t[0], t[49]), (0.0, 1e6));
            assert!(t.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn run_record_round_trips_with_infinite_limits() {
        let rec = RunRecord {
            label: "trapezoid".into(),
            problem: ProblemInfo {
                name: "linear".into(),
                params: BTreeMap::from([("lambda".into(), -1.0)]),
                span: (0.0, 1.0),
                u0: vec![1.0],
            },
            method: Method::Trapezoid,
            smoothing: SmoothingInfo::Ti { offset: vec![0.1] },
            config: ConfigSnapshot::Stepper {
                stepper: StepperConfig::with_tol(1e-7),
                newton: Some(gwrm_core::refsolvers::default_trapezoid_newton()),
            },
            wall_time: 0.125,
            completed: true,
            status: "completed".into(),
            stats: MethodStats::Stepper { steps_taken: 9, steps_rejected: 1, last_time: 1.0 },
            max_error: Some(3.0e-4),
            outputs: vec![PathBuf::from("out/run.json")],
        };
        let text = serde_json::to_string(&rec).unwrap();
        assert_eq!(serde_json::from_str::<RunRecord>(&text).unwrap(), rec);
    }
}
