//! Initial history: X(t) = Phi(t) for t <= t0.
//!
//! Stored on a finite [t_min, t0] window and continued constantly to the
//! left, which keeps Phi bounded and continuous while covering every finite
//! lag that can ever be queried.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Shared closure type of a user-supplied history: fills the state at t.
pub type HistoryFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

#[derive(Clone)]
enum HistoryKind {
    Constant(Vec<f64>),
    /// Sampled table, linearly interpolated; times strictly increasing,
    /// last entry at t0.
    Table {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    Custom { t_min: f64, f: HistoryFn },
}

#[derive(Clone)]
pub struct HistoryFunction {
    t0: f64,
    dim: usize,
    kind: HistoryKind,
}

impl fmt::Debug for HistoryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            HistoryKind::Constant(v) => format!("Constant({v:?})"),
            HistoryKind::Table { times, .. } => format!("Table({} samples)", times.len()),
            HistoryKind::Custom { t_min, .. } => format!("Custom(t_min={t_min})"),
        };
        write!(f, "HistoryFunction {{ t0: {}, {} }}", self.t0, kind)
    }
}

impl HistoryFunction {
    pub fn constant(t0: f64, values: Vec<f64>) -> Self {
        HistoryFunction {
            t0,
            dim: values.len(),
            kind: HistoryKind::Constant(values),
        }
    }

    pub fn table(t0: f64, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidParameter(
                "history table needs matching, non-empty time/value lists".into(),
            ));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "history table times must be strictly increasing".into(),
            ));
        }
        if (times.last().unwrap() - t0).abs() > 1e-12 * (1.0 + t0.abs()) {
            return Err(Error::InvalidParameter(format!(
                "history table must end at the anchor time t0 = {t0}"
            )));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidParameter(
                "history table rows must share one dimension".into(),
            ));
        }
        Ok(HistoryFunction {
            t0,
            dim,
            kind: HistoryKind::Table { times, values },
        })
    }

    pub fn custom(t0: f64, t_min: f64, dim: usize, f: HistoryFn) -> Self {
        HistoryFunction {
            t0,
            dim,
            kind: HistoryKind::Custom { t_min, f },
        }
    }

    pub fn anchor_time(&self) -> f64 {
        self.t0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Left end of the stored window; queries before it return the value at
    /// the window edge.
    pub fn t_min(&self) -> f64 {
        match &self.kind {
            HistoryKind::Constant(_) => self.t0,
            HistoryKind::Table { times, .. } => times[0],
            HistoryKind::Custom { t_min, .. } => *t_min,
        }
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let t = t.min(self.t0).max(self.t_min());
        match &self.kind {
            HistoryKind::Constant(v) => out.copy_from_slice(v),
            HistoryKind::Table { times, values } => {
                let idx = times.partition_point(|&x| x < t);
                if idx == 0 {
                    out.copy_from_slice(&values[0]);
                } else if idx >= times.len() {
                    out.copy_from_slice(values.last().unwrap());
                } else {
                    let (t0, t1) = (times[idx - 1], times[idx]);
                    let w = (t - t0) / (t1 - t0);
                    for (k, o) in out.iter_mut().enumerate() {
                        *o = values[idx - 1][k] * (1.0 - w) + values[idx][k] * w;
                    }
                }
            }
            HistoryKind::Custom { f, .. } => f(t, out),
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_component(&self, component: usize, t: f64) -> f64 {
        // dim is small; a stack-free path is not worth the complexity
        self.eval(t)[component]
    }

    /// Interior knot times of the table representation within [a, b].
    pub(crate) fn knots_within(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        if let HistoryKind::Table { times, .. } = &self.kind {
            for &t in times {
                if t > a && t < b {
                    out.push(t);
                }
            }
        }
    }
}
