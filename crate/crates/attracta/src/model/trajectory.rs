//! Dense-output trajectories.

use super::history::HistoryFunction;
use crate::error::{Error, Result};
use std::io::Write;

/// One accepted integrator step with its continuous extension.
///
/// The interpolant is the standard quartic extension of the 5(4) pair:
/// with theta in `[0, 1]` and theta1 = 1 - theta,
/// y(t_start + theta*h) = c1 + theta*(c2 + theta1*(c3 + theta*(c4 + theta1*c5)))
/// per component.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub t_start: f64,
    pub t_end: f64,
    pub y_start: Vec<f64>,
    pub y_end: Vec<f64>,
    /// 5 interpolation coefficients per component, flattened.
    pub coeffs: Vec<f64>,
    pub error_estimate: f64,
}

impl StepRecord {
    pub fn h(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn eval_component(&self, component: usize, t: f64) -> f64 {
        let theta = (t - self.t_start) / self.h();
        self.eval_component_theta(component, theta)
    }

    pub(crate) fn eval_component_theta(&self, component: usize, theta: f64) -> f64 {
        let c = &self.coeffs[component * 5..component * 5 + 5];
        let theta1 = 1.0 - theta;
        c[0] + theta * (c[1] + theta1 * (c[2] + theta * (c[3] + theta1 * c[4])))
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t_start) / self.h();
        let theta1 = 1.0 - theta;
        for (k, o) in out.iter_mut().enumerate() {
            let c = &self.coeffs[k * 5..k * 5 + 5];
            *o = c[0] + theta * (c[1] + theta1 * (c[2] + theta * (c[3] + theta1 * c[4])));
        }
    }
}

/// Numerical solution with interpolable history: queries anywhere at or
/// before the last accepted time, delegating to the attached history for
/// t <= t0.
#[derive(Debug, Clone)]
pub struct Trajectory {
    history: HistoryFunction,
    steps: Vec<StepRecord>,
    dim: usize,
}

impl Trajectory {
    pub(crate) fn new(history: HistoryFunction) -> Self {
        let dim = history.dim();
        Trajectory {
            history,
            steps: Vec::new(),
            dim,
        }
    }

    pub(crate) fn push_step(&mut self, rec: StepRecord) {
        debug_assert!(rec.t_end > rec.t_start);
        self.steps.push(rec);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn history(&self) -> &HistoryFunction {
        &self.history
    }

    pub fn t0(&self) -> f64 {
        self.history.anchor_time()
    }

    /// Last time covered by an accepted step (t0 if none).
    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(self.t0(), |s| s.t_end)
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    fn step_index_for(&self, t: f64) -> usize {
        // first step whose t_end >= t
        self.steps.partition_point(|s| s.t_end < t).min(self.steps.len() - 1)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if t <= self.t0() || self.steps.is_empty() {
            if t > self.t0() {
                return Err(Error::InsufficientHistory {
                    from: self.t0(),
                    to: t,
                });
            }
            self.history.eval_into(t, out);
            return Ok(());
        }
        let slack = 1e-9 * (1.0 + t.abs());
        if t > self.t_end() + slack {
            return Err(Error::InsufficientHistory {
                from: self.t_end(),
                to: t,
            });
        }
        let idx = self.step_index_for(t);
        self.steps[idx].eval_into(t.min(self.t_end()), out);
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    pub fn eval_component(&self, component: usize, t: f64) -> Result<f64> {
        if t <= self.t0() || self.steps.is_empty() {
            if t > self.t0() {
                return Err(Error::InsufficientHistory {
                    from: self.t0(),
                    to: t,
                });
            }
            return Ok(self.history.eval_component(component, t));
        }
        let slack = 1e-9 * (1.0 + t.abs());
        if t > self.t_end() + slack {
            return Err(Error::InsufficientHistory {
                from: self.t_end(),
                to: t,
            });
        }
        let idx = self.step_index_for(t);
        Ok(self.steps[idx].eval_component(component, t.min(self.t_end())))
    }

    /// Final state.
    pub fn final_state(&self) -> Vec<f64> {
        self.steps
            .last()
            .map_or_else(|| self.history.eval(self.t0()), |s| s.y_end.clone())
    }

    /// Knot times (step boundaries, t0, history table knots) in (a, b).
    pub(crate) fn knots_within(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        self.history.knots_within(a, b, out);
        let t0 = self.t0();
        if t0 > a && t0 < b {
            out.push(t0);
        }
        if self.steps.is_empty() {
            return;
        }
        let start = self.steps.partition_point(|s| s.t_end <= a);
        for s in &self.steps[start..] {
            if s.t_end >= b {
                break;
            }
            if s.t_end > a {
                out.push(s.t_end);
            }
        }
    }

    /// Sup-norm distance from `target` over the final `window` of time,
    /// sampled at accepted step ends plus `interior` interpolant points per
    /// step within the window.
    pub fn sup_distance_over_window(&self, target: &[f64], window: f64, interior: usize) -> f64 {
        let t_end = self.t_end();
        let t_lo = (t_end - window).max(self.t0());
        let mut worst = 0.0f64;
        let mut buf = vec![0.0; self.dim];

        let mut consider = |traj: &Trajectory, t: f64, buf: &mut [f64]| {
            if traj.eval_into(t, buf).is_ok() {
                for (k, &v) in buf.iter().enumerate() {
                    worst = worst.max((v - target[k]).abs());
                }
            }
        };

        for s in &self.steps {
            if s.t_end < t_lo {
                continue;
            }
            let lo = s.t_start.max(t_lo);
            let hi = s.t_end;
            consider(self, lo, &mut buf);
            consider(self, hi, &mut buf);
            for k in 1..=interior {
                let t = lo + (hi - lo) * k as f64 / (interior + 1) as f64;
                consider(self, t, &mut buf);
            }
        }
        if self.steps.is_empty() {
            consider(self, self.t0(), &mut buf);
        }
        worst
    }

    /// True when the trajectory has settled within `tol` of `target` (sup
    /// norm) over its final `window`.
    pub fn converged_to(&self, target: &[f64], tol: f64, window: f64) -> bool {
        self.sup_distance_over_window(target, window, 10) <= tol
    }

    /// CSV export: header `t,x1,...,xs`, one row per accepted step end, plus
    /// optional uniform resampling at `resample_dt`. Floats carry 17
    /// significant digits; rows end in CRLF.
    pub fn write_csv<W: Write>(&self, mut w: W, resample_dt: Option<f64>) -> std::io::Result<()> {
        write!(w, "t")?;
        for i in 1..=self.dim {
            write!(w, ",x{i}")?;
        }
        w.write_all(b"\r\n")?;

        let mut times: Vec<f64> = Vec::with_capacity(self.steps.len() + 1);
        times.push(self.t0());
        for s in &self.steps {
            times.push(s.t_end);
        }
        if let Some(dt) = resample_dt {
            if dt > 0.0 {
                let mut t = self.t0();
                let t_end = self.t_end();
                while t < t_end {
                    times.push(t);
                    t += dt;
                }
                times.push(t_end);
            }
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));

        let mut buf = vec![0.0; self.dim];
        for &t in &times {
            if self.eval_into(t, &mut buf).is_err() {
                continue;
            }
            write!(w, "{}", fmt_g17(t))?;
            for &v in &buf {
                write!(w, ",{}", fmt_g17(v))?;
            }
            w.write_all(b"\r\n")?;
        }
        Ok(())
    }
}

/// 17 significant digits round-trips any f64 exactly.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}
