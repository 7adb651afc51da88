//! Initial-value problem descriptors and the benchmark systems.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub type RhsFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
pub type JacobianFn = dyn Fn(f64, &[f64]) -> Matrix + Send + Sync;

/// `du/dt = F(t, u)`, `u(t_start) = u0`, integrated over `span`.
///
/// Evaluators must be pure; problems are cheap to clone and share.
#[derive(Clone)]
pub struct OdeProblem {
    name: String,
    dim: usize,
    rhs: Arc<RhsFn>,
    jacobian: Option<Arc<JacobianFn>>,
    u0: Vec<f64>,
    span: (f64, f64),
    params: BTreeMap<String, f64>,
    labels: Vec<String>,
    abs_scale: f64,
}

impl fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("u0", &self.u0)
            .field("span", &self.span)
            .field("params", &self.params)
            .finish()
    }
}

impl OdeProblem {
    pub fn new<F>(name: impl Into<String>, u0: Vec<f64>, span: (f64, f64), rhs: F) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let dim = u0.len();
        assert!(dim > 0, "problem dimension must be positive");
        Self {
            name: name.into(),
            dim,
            rhs: Arc::new(rhs),
            jacobian: None,
            labels: (0..dim).map(|i| format!("u{i}")).collect(),
            u0,
            span,
            params: BTreeMap::new(),
            abs_scale: 1.0,
        }
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(f64, &[f64]) -> Matrix + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Self {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        assert_eq!(labels.len(), self.dim);
        self.labels = labels;
        self
    }

    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub fn with_span(mut self, t_start: f64, t_end: f64) -> Self {
        self.span = (t_start, t_end);
        self
    }

    pub fn with_initial_state(mut self, u0: Vec<f64>) -> Self {
        assert_eq!(u0.len(), self.dim);
        self.u0 = u0;
        self
    }

    /// Typical magnitude of the smallest component; step solvers multiply
    /// their tolerance by this to get an absolute tolerance.
    pub fn with_abs_scale(mut self, scale: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        self.abs_scale = scale;
        self
    }

    pub fn abs_scale(&self) -> f64 {
        self.abs_scale
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn rhs_into(&self, t: f64, u: &[f64], out: &mut [f64]) {
        (self.rhs)(t, u, out)
    }

    pub fn rhs(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.rhs)(t, u, &mut out);
        out
    }

    /// Analytic Jacobian when supplied, central differences otherwise.
    pub fn jacobian(&self, t: f64, u: &[f64]) -> Matrix {
        match &self.jacobian {
            Some(j) => j(t, u),
            None => self.fd_jacobian(t, u),
        }
    }

    /// Central-difference Jacobian with per-component step `max(1e-7, 1e-7·|u_j|)`.
    pub fn fd_jacobian(&self, t: f64, u: &[f64]) -> Matrix {
        let n = self.dim;
        let mut jac = Matrix::zeros(n, n);
        let mut probe = u.to_vec();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        for j in 0..n {
            let h = (1e-7 * u[j].abs()).max(1e-7);
            probe[j] = u[j] + h;
            self.rhs_into(t, &probe, &mut fp);
            probe[j] = u[j] - h;
            self.rhs_into(t, &probe, &mut fm);
            probe[j] = u[j];
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }
}

/// Robertson's autocatalytic reaction system.
pub fn robertson(a: f64, b: f64, c: f64) -> OdeProblem {
    assert!(a > 0.0 && b > 0.0 && c > 0.0, "rate constants must be positive");
    let params = BTreeMap::from([("a".into(), a), ("b".into(), b), ("c".into(), c)]);
    OdeProblem::new("robertson", vec![1.0, 0.0, 0.0], (0.0, 1e6), move |_, u, du| {
        let (x, y, z) = (u[0], u[1], u[2]);
        let fast = b * y * z;
        let slow = a * x;
        let prod = c * y * y;
        du[0] = -slow + fast;
        du[1] = slow - fast - prod;
        du[2] = prod;
    })
    .with_jacobian(move |_, u| {
        let (y, z) = (u[1], u[2]);
        Matrix::from_rows(&[
            vec![-a, b * z, b * y],
            vec![a, -b * z - 2.0 * c * y, -b * y],
            vec![0.0, 2.0 * c * y, 0.0],
        ])
    })
    .with_labels(["x", "y", "z"])
    .with_params(params)
    .with_abs_scale(1e-5)
}

/// Lorenz's 1984 model of Hadley circulation.
pub fn lorenz84(a: f64, b: f64, f: f64, g: f64) -> OdeProblem {
    let params = BTreeMap::from([
        ("a".into(), a),
        ("b".into(), b),
        ("F".into(), f),
        ("G".into(), g),
    ]);
    OdeProblem::new("lorenz84", vec![0.96, -1.1, 0.5], (0.0, 30.0), move |_, u, du| {
        let (x, y, z) = (u[0], u[1], u[2]);
        du[0] = -y * y - z * z - a * x + a * f;
        du[1] = x * y - b * x * z - y + g;
        du[2] = b * x * y + x * z - z;
    })
    .with_jacobian(move |_, u| {
        let (x, y, z) = (u[0], u[1], u[2]);
        Matrix::from_rows(&[
            vec![-a, -2.0 * y, -2.0 * z],
            vec![y - b * z, x - 1.0, -b * x],
            vec![b * y + z, b * x, x - 1.0],
        ])
    })
    .with_labels(["X", "Y", "Z"])
    .with_params(params)
}

/// `du/dt = λu`, with exact solution `u0·e^{λt}`.
pub fn linear_test(lambda: f64, u0: f64) -> OdeProblem {
    let params = BTreeMap::from([("lambda".into(), lambda), ("u0".into(), u0)]);
    OdeProblem::new("linear", vec![u0], (0.0, 1.0), move |_, u, du| du[0] = lambda * u[0])
        .with_jacobian(move |_, _| Matrix::from_rows(&[vec![lambda]]))
        .with_labels(["u"])
        .with_params(params)
}

pub fn linear_exact(lambda: f64, u0: f64, t: f64) -> f64 {
    u0 * (lambda * t).exp()
}

/// The variational system `dδu/dt = J(t, state)·δu` with the Jacobian frozen
/// at `(t, state)`. Starts from `δu = 0` at `t`; set another state with
/// [`OdeProblem::with_initial_state`].
pub fn linearized_problem(p: &OdeProblem, t: f64, state: &[f64]) -> OdeProblem {
    let jac = Arc::new(p.jacobian(t, state));
    let span_len = p.span().1 - p.span().0;
    let j_rhs = Arc::clone(&jac);
    OdeProblem::new(
        format!("{}-linearized", p.name()),
        vec![0.0; p.dim()],
        (t, t + span_len),
        move |_, du, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = j_rhs.row(i).iter().zip(du).map(|(a, b)| a * b).sum();
            }
        },
    )
    .with_jacobian(move |_, _| (*jac).clone())
    .with_labels(p.labels().iter().map(|l| format!("d{l}")))
}

/// Registry names accepted by [`from_registry`].
pub const REGISTRY: [&str; 3] = ["robertson", "lorenz84", "linear"];

fn registry_defaults(name: &str) -> Option<Vec<(&'static str, f64)>> {
    Some(match name {
        "robertson" => vec![("a", 0.04), ("b", 1e4), ("c", 3e7)],
        "lorenz84" => vec![("a", 0.25), ("b", 4.0), ("F", 8.0), ("G", 1.0)],
        "linear" => vec![("lambda", -1.0), ("u0", 1.0)],
        _ => return None,
    })
}

/// Builds a named benchmark problem, applying parameter overrides.
pub fn from_registry(name: &str, overrides: &BTreeMap<String, f64>) -> Result<OdeProblem> {
    let defaults = registry_defaults(name).ok_or_else(|| {
        Error::Domain(format!("unknown problem '{name}' (known: {})", REGISTRY.join(", ")))
    })?;
    let mut values: BTreeMap<&str, f64> = defaults.iter().copied().collect();
    for (k, v) in overrides {
        match values.get_mut(k.as_str()) {
            Some(slot) => *slot = *v,
            None => {
                let known: Vec<_> = defaults.iter().map(|(k, _)| *k).collect();
                return Err(Error::Domain(format!(
                    "problem '{name}' has no parameter '{k}' (known: {})",
                    known.join(", ")
                )));
            }
        }
    }
    let p = |k: &str| values[k];
    Ok(match name {
        "robertson" => {
            if !(p("a") > 0.0 && p("b") > 0.0 && p("c") > 0.0) {
                return Err(Error::Domain("robertson rates must be positive".into()));
            }
            robertson(p("a"), p("b"), p("c"))
        }
        "lorenz84" => lorenz84(p("a"), p("b"), p("F"), p("G")),
        _ => linear_test(p("lambda"), p("u0")),
    })
}
