//! Method-of-steps integration with an explicit 5(4) Runge-Kutta pair and a
//! quartic continuous extension.
//!
//! Delayed arguments are read from the growing trajectory's dense output.
//! When a delayed argument falls inside the step being computed (lag-zero
//! couplings excepted, which use the stage state directly), the step is
//! re-run as a fixed-point iteration on its own interpolant rather than
//! extrapolated; g * h is small whenever error control accepts the step, so
//! the iteration contracts.

mod tableau;

use crate::error::{Error, Result};
use crate::model::{DelaySystem, DelayDistribution, HistoryFunction, Lag, StepRecord, Trajectory};
use crate::numeric::quad;
use std::cell::Cell;

use tableau::{A, C, D, E, STAGES};

#[derive(Debug, Clone)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
    /// Order of the continuous extension; the 5(4) pair ships a quartic one,
    /// so anything but 4 is rejected.
    pub dense_output_order: u32,
    /// When set, steps producing negative components are rejected and
    /// retried with a smaller h instead of being accepted.
    pub positivity_clamp: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-8,
            atol: 1e-10,
            initial_step: None,
            max_step: f64::INFINITY,
            max_steps: 2_000_000,
            dense_output_order: 4,
            positivity_clamp: false,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        IntegratorOptions {
            rtol,
            atol,
            ..Default::default()
        }
    }

    /// Fixed-step configuration: every step is h (error control disarmed).
    /// Used by convergence-order studies.
    pub fn fixed_step(h: f64) -> Self {
        IntegratorOptions {
            rtol: 1e12,
            atol: 1e12,
            initial_step: Some(h),
            max_step: h,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter("max step must be positive".into()));
        }
        if self.dense_output_order != 4 {
            return Err(Error::InvalidParameter(format!(
                "the 5(4) pair provides a dense output of order 4, got {}",
                self.dense_output_order
            )));
        }
        Ok(())
    }
}

/// How queries past the trajectory end behave.
#[derive(Clone, Copy, PartialEq)]
enum OverlapMode {
    /// Public evaluation: a gap is an error.
    Strict,
    /// Inside a step attempt: fall back to the tentative interpolant (or a
    /// constant guess on the first pass) and flag the overlap.
    Tentative,
}

/// Delayed-state access for one right-hand-side evaluation.
struct QueryCtx<'a> {
    traj: &'a Trajectory,
    tentative: Option<&'a StepRecord>,
    mode: OverlapMode,
    overlap_seen: Cell<bool>,
}

impl QueryCtx<'_> {
    fn component(&self, j: usize, tau: f64) -> Result<f64> {
        let cover = self.traj.t_end();
        if tau <= cover {
            return self.traj.eval_component(j, tau);
        }
        let slack = 1e-9 * (1.0 + tau.abs());
        if tau <= cover + slack {
            return self.traj.eval_component(j, cover);
        }
        if self.mode == OverlapMode::Strict {
            return Err(Error::InsufficientHistory {
                from: cover,
                to: tau,
            });
        }
        self.overlap_seen.set(true);
        match self.tentative {
            Some(rec) if tau <= rec.t_end + slack => Ok(rec.eval_component(j, tau.min(rec.t_end))),
            Some(rec) => Ok(rec.y_end[j]),
            None => self.traj.eval_component(j, cover),
        }
    }

    fn knots_within(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        self.traj.knots_within(a, b, out);
        if let Some(rec) = self.tentative {
            if rec.t_start > a && rec.t_start < b {
                out.push(rec.t_start);
            }
        }
    }
}

const STAGE_TIME_EPS: f64 = 1e-13;

/// The distributed evaluation of f_i at time t: the iterated Stieltjes
/// integral of f_i over the product of the row's delay measures. Atom and
/// quadrature-node values factor per coordinate, so the result is a tensor
/// sum over per-coordinate weighted value lists.
#[allow(clippy::needless_range_loop)] // j indexes the coordinate, not just a vec
fn distributed_component(
    system: &DelaySystem,
    i: usize,
    t: f64,
    x: &[f64],
    ctx: &QueryCtx<'_>,
) -> Result<f64> {
    let s = system.dim();
    let nl = system.nonlinearity();
    let eps = STAGE_TIME_EPS * (1.0 + t.abs());

    // masked-out coordinates keep the current state; f_i never reads them
    let mut point: Vec<f64> = x.to_vec();
    let mut lists: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();

    let coord_value = |j: usize, tau: f64| -> Result<f64> {
        if tau >= t - eps {
            Ok(x[j])
        } else {
            ctx.component(j, tau)
        }
    };

    for j in 0..s {
        if !nl.depends_on(i, j) {
            continue;
        }
        let dist = system.distribution(i, j);
        if let Some(atoms) = dist.atoms_at(t) {
            if atoms.len() == 1 {
                point[j] = coord_value(j, atoms[0].1)?;
            } else {
                let mut vals = Vec::with_capacity(atoms.len());
                for (w, tau) in atoms {
                    vals.push((w, coord_value(j, tau)?));
                }
                lists.push((j, vals));
            }
        } else {
            let a = dist.earliest_argument(t);
            let mut knots = Vec::new();
            ctx.knots_within(a, t, &mut knots);
            // ensure a minimum panel resolution even on knot-free windows
            let width = t - a;
            for k in 1..4 {
                knots.push(a + width * k as f64 / 4.0);
            }
            let mut nodes = Vec::new();
            quad::gl10_panel_nodes(a, t, &knots, &mut nodes);
            let mut vals = Vec::with_capacity(nodes.len());
            for (tau, w) in nodes {
                let density = dist.kernel_density_at(t, tau)?;
                if density != 0.0 {
                    vals.push((w * density, coord_value(j, tau)?));
                }
            }
            lists.push((j, vals));
        }
    }

    let eval_checked = |p: &[f64]| -> Result<f64> {
        let v = nl.component(i, p);
        if !v.is_finite() {
            return Err(Error::EvalFailure {
                point: p.to_vec(),
                reason: format!("f_{} returned {v}", i + 1),
            });
        }
        Ok(v)
    };

    if lists.is_empty() {
        check_domain(system, &point, t)?;
        return eval_checked(&point);
    }
    tensor_sum(&eval_checked, system, t, &mut point, &lists, 0)
}

fn check_domain(system: &DelaySystem, point: &[f64], t: f64) -> Result<()> {
    let domain = system.domain();
    for (j, &v) in point.iter().enumerate() {
        let (lo, hi) = domain.axis(j);
        let slack = 1e-9 * (1.0 + v.abs());
        if v < lo - slack || v > hi + slack {
            return Err(Error::DomainExit { component: j, time: t });
        }
    }
    Ok(())
}

fn tensor_sum(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    system: &DelaySystem,
    t: f64,
    point: &mut Vec<f64>,
    lists: &[(usize, Vec<(f64, f64)>)],
    depth: usize,
) -> Result<f64> {
    if depth == lists.len() {
        check_domain(system, point, t)?;
        return f(point);
    }
    let (j, ref vals) = lists[depth];
    let mut sum = 0.0;
    for &(w, v) in vals {
        point[j] = v;
        sum += w * tensor_sum(f, system, t, point, lists, depth + 1)?;
    }
    Ok(sum)
}

fn eval_rhs_ctx(
    system: &DelaySystem,
    t: f64,
    x: &[f64],
    ctx: &QueryCtx<'_>,
    out: &mut [f64],
) -> Result<()> {
    for i in 0..system.dim() {
        let ehat = distributed_component(system, i, t, x, ctx)?;
        out[i] = system.rate(i, t) * (ehat - x[i]);
    }
    Ok(())
}

/// Right-hand side of the system at (t, x) against an existing trajectory.
/// Atoms sitting exactly at tau = t read the supplied state x; anything the
/// trajectory does not cover is an insufficient-history error.
pub fn rhs_eval(
    system: &DelaySystem,
    t: f64,
    x: &[f64],
    history: &Trajectory,
) -> Result<Vec<f64>> {
    let ctx = QueryCtx {
        traj: history,
        tentative: None,
        mode: OverlapMode::Strict,
        overlap_seen: Cell::new(false),
    };
    let mut out = vec![0.0; system.dim()];
    eval_rhs_ctx(system, t, x, &ctx, &mut out)?;
    Ok(out)
}

/// True when the trajectory has settled within `tol` of `target` over its
/// final `window`, sampling step ends plus 10 interior points per step.
pub fn converged_to(traj: &Trajectory, target: &[f64], tol: f64, window: f64) -> bool {
    traj.converged_to(target, tol, window)
}

struct StagePass {
    k: Vec<Vec<f64>>,
    y_new: Vec<f64>,
    err_norm: f64,
    overlap: bool,
}

#[allow(clippy::too_many_arguments)]
fn stage_pass(
    system: &DelaySystem,
    traj: &Trajectory,
    tentative: Option<&StepRecord>,
    t: f64,
    y: &[f64],
    k1: &[f64],
    h: f64,
    opts: &IntegratorOptions,
) -> Result<StagePass> {
    let s = system.dim();
    let ctx = QueryCtx {
        traj,
        tentative,
        mode: OverlapMode::Tentative,
        overlap_seen: Cell::new(false),
    };
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; s]; STAGES];
    k[0].copy_from_slice(k1);
    let mut y_stage = vec![0.0; s];

    for st in 1..STAGES {
        for j in 0..s {
            let mut acc = 0.0;
            for (m, krow) in k.iter().enumerate().take(st) {
                let a = A[st][m];
                if a != 0.0 {
                    acc += a * krow[j];
                }
            }
            y_stage[j] = y[j] + h * acc;
        }
        let t_stage = t + C[st] * h;
        let (head, tail) = k.split_at_mut(st);
        let _ = head;
        eval_rhs_ctx(system, t_stage, &y_stage, &ctx, &mut tail[0])?;
    }

    // stage 7 state is the fifth-order solution (FSAL)
    let mut y_new = vec![0.0; s];
    for j in 0..s {
        let mut acc = 0.0;
        for (m, krow) in k.iter().enumerate().take(STAGES - 1) {
            let a = A[STAGES - 1][m];
            if a != 0.0 {
                acc += a * krow[j];
            }
        }
        y_new[j] = y[j] + h * acc;
    }

    let mut err_norm = 0.0;
    for j in 0..s {
        let mut e = 0.0;
        for (m, krow) in k.iter().enumerate() {
            if E[m] != 0.0 {
                e += E[m] * krow[j];
            }
        }
        e *= h;
        let sc = opts.atol + opts.rtol * y[j].abs().max(y_new[j].abs());
        err_norm += (e / sc) * (e / sc);
    }
    err_norm = (err_norm / s as f64).sqrt();

    Ok(StagePass {
        k,
        y_new,
        err_norm,
        overlap: ctx.overlap_seen.get(),
    })
}

/// Build the dense record for an accepted (or tentative) pass. The last
/// stage derivative is evaluated at (t + h, y_new) by the caller and lives
/// in k[6].
fn make_record(t: f64, h: f64, y: &[f64], pass: &StagePass, err: f64) -> StepRecord {
    let s = y.len();
    let mut coeffs = vec![0.0; 5 * s];
    for j in 0..s {
        let ydiff = pass.y_new[j] - y[j];
        let bspl = h * pass.k[0][j] - ydiff;
        let c = &mut coeffs[j * 5..j * 5 + 5];
        c[0] = y[j];
        c[1] = ydiff;
        c[2] = bspl;
        c[3] = ydiff - h * pass.k[6][j] - bspl;
        c[4] = h * (D[0] * pass.k[0][j]
            + D[2] * pass.k[2][j]
            + D[3] * pass.k[3][j]
            + D[4] * pass.k[4][j]
            + D[5] * pass.k[5][j]
            + D[6] * pass.k[6][j]);
    }
    StepRecord {
        t_start: t,
        t_end: t + h,
        y_start: y.to_vec(),
        y_end: pass.y_new.clone(),
        coeffs,
        error_estimate: err,
    }
}

/// Mandatory mesh points: images of the initial point under the inverse lag
/// maps, up to order 3, for the lag families where that is tractable.
fn breaking_points(system: &DelaySystem, t0: f64, t_end: f64) -> Vec<f64> {
    fn push_constant(pts: &mut Vec<f64>, t0: f64, t_end: f64, tau: f64) {
        if tau > 0.0 {
            for k in 1..=3 {
                let p = t0 + tau * k as f64;
                if p > t0 && p < t_end {
                    pts.push(p);
                }
            }
        }
    }
    let mut pts = Vec::new();
    for row in system.distributions() {
        for d in row {
            match d {
                DelayDistribution::PointMass { lag } => match lag {
                    Lag::Constant(tau) => push_constant(&mut pts, t0, t_end, *tau),
                    Lag::Proportional(rho) => {
                        if t0 > 1e-12 {
                            let mut p = t0;
                            for _ in 0..3 {
                                p /= rho;
                                if p < t_end {
                                    pts.push(p);
                                }
                            }
                        }
                    }
                    Lag::Custom(_) => {}
                },
                DelayDistribution::Mixture { atoms } => {
                    for (_, lag) in atoms {
                        if let Lag::Constant(tau) = lag {
                            push_constant(&mut pts, t0, t_end, *tau);
                        }
                    }
                }
                DelayDistribution::StepCdf { lags, .. } => {
                    for &l in lags {
                        push_constant(&mut pts, t0, t_end, l);
                    }
                }
                DelayDistribution::Kernel { lower, .. } => {
                    if let Lag::Constant(w) = lower {
                        push_constant(&mut pts, t0, t_end, *w);
                    }
                }
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
    pts
}

/// Smallest proportional-lag factor (1/rho - 1) across the system, if any
/// proportional lag is present: keeping h below 0.9 * factor * t guarantees
/// the delayed arguments of a step stay behind its start, so the step stays
/// explicit once t has grown past the startup phase.
fn proportional_cap_factor(system: &DelaySystem) -> Option<f64> {
    let mut factor: Option<f64> = None;
    for row in system.distributions() {
        for d in row {
            let rho = match d {
                DelayDistribution::PointMass {
                    lag: Lag::Proportional(r),
                } => Some(*r),
                DelayDistribution::Kernel {
                    lower: Lag::Proportional(r),
                    ..
                } => Some(*r),
                DelayDistribution::Mixture { atoms } => atoms
                    .iter()
                    .filter_map(|(_, lag)| match lag {
                        Lag::Proportional(r) => Some(*r),
                        _ => None,
                    })
                    .fold(None, |acc: Option<f64>, r| {
                        Some(acc.map_or(r, |a| a.max(r)))
                    }),
                _ => None,
            };
            if let Some(r) = rho {
                let f = 1.0 / r - 1.0;
                factor = Some(factor.map_or(f, |a: f64| a.min(f)));
            }
        }
    }
    factor
}

/// Integrate the system from its history up to t_end.
pub fn integrate(
    system: &DelaySystem,
    history: &HistoryFunction,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    system.check_history(history)?;
    let t0 = history.anchor_time();
    if !(t_end > t0) {
        return Err(Error::InvalidParameter(format!(
            "empty integration interval: t_end = {t_end} <= t0 = {t0}"
        )));
    }

    let s = system.dim();
    let mut traj = Trajectory::new(history.clone());
    let mut t = t0;
    let mut y = history.eval(t0);

    // components allowed to sit exactly on the domain boundary: only those
    // whose history is identically the boundary value (trivial solutions)
    let boundary_ok: Vec<bool> = (0..s)
        .map(|j| {
            let (lo, hi) = system.domain().axis(j);
            let t_min = history.t_min();
            (0..=16).all(|k| {
                let tq = t_min + (t0 - t_min) * k as f64 / 16.0;
                let v = history.eval_component(j, tq);
                v == lo || v == hi
            })
        })
        .collect();

    let exit_check = |y: &[f64], t: f64, boundary_ok: &[bool]| -> Result<()> {
        for j in 0..s {
            let (lo, hi) = system.domain().axis(j);
            let inside = y[j] > lo && y[j] < hi;
            let on_boundary = y[j] == lo || y[j] == hi;
            if !inside && !(on_boundary && boundary_ok[j]) {
                return Err(Error::DomainExit { component: j, time: t });
            }
        }
        Ok(())
    };
    exit_check(&y, t0, &boundary_ok)?;

    let breaks = breaking_points(system, t0, t_end);
    let mut next_break = 0usize;
    let prop_cap = proportional_cap_factor(system);

    let mut k1 = rhs_eval(system, t0, &y, &traj)?;

    let span = t_end - t0;
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let ynorm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let fnorm = k1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (0.01 * (1.0 + ynorm) / (1.0 + fnorm)).min(0.1 * span).min(0.1)
    });
    h = h.min(opts.max_step).min(span);

    let mut accepted = 0usize;
    let mut consecutive_rejects = 0usize;

    while t < t_end - 1e-12 * (1.0 + t_end.abs()) {
        if accepted >= opts.max_steps {
            return Err(Error::MaxSteps(opts.max_steps));
        }

        h = h.min(opts.max_step).min(t_end - t);
        if let Some(f) = prop_cap {
            h = h.min((0.9 * f * t).max(0.02));
        }
        while next_break < breaks.len() && breaks[next_break] <= t + 1e-12 * (1.0 + t.abs()) {
            next_break += 1;
        }
        if next_break < breaks.len() {
            let gap = breaks[next_break] - t;
            if gap <= h * 1.0001 {
                h = gap;
            }
        }
        let h_min = 1e-14 * (1.0 + t.abs());
        if h < h_min {
            return Err(Error::StepSizeUnderflow { t });
        }

        // one pass; iterate on the step's own interpolant if any delayed
        // argument landed inside it
        let attempt = (|| -> Result<Option<StagePass>> {
            let mut pass = stage_pass(system, &traj, None, t, &y, &k1, h, opts)?;
            if pass.overlap {
                let mut converged = false;
                for _ in 0..10 {
                    let tentative = make_record(t, h, &y, &pass, pass.err_norm);
                    let next = stage_pass(system, &traj, Some(&tentative), t, &y, &k1, h, opts)?;
                    let mut delta = 0.0f64;
                    for (j, &yj) in y.iter().enumerate() {
                        let sc = opts.atol + opts.rtol * yj.abs().max(next.y_new[j].abs());
                        delta = delta.max((next.y_new[j] - pass.y_new[j]).abs() / sc);
                    }
                    pass = next;
                    if delta <= 0.01 {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Ok(None);
                }
            }
            Ok(Some(pass))
        })();

        let pass = match attempt {
            Ok(Some(p)) => p,
            Ok(None) => {
                // fixed-point iteration refused to settle; g*h too large
                h *= 0.5;
                consecutive_rejects += 1;
                if consecutive_rejects > 80 {
                    return Err(Error::StepSizeUnderflow { t });
                }
                continue;
            }
            Err(e @ (Error::DomainExit { .. } | Error::EvalFailure { .. })) => {
                // a stage wandered out; often cured by a smaller step
                consecutive_rejects += 1;
                if h * 0.5 < h_min || consecutive_rejects > 80 {
                    return Err(e);
                }
                h *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };

        let err = pass.err_norm;
        if err <= 1.0 {
            let positivity_violated =
                opts.positivity_clamp && pass.y_new.iter().any(|&v| v < 0.0);
            if positivity_violated {
                consecutive_rejects += 1;
                if h * 0.5 < h_min || consecutive_rejects > 80 {
                    return Err(Error::StepSizeUnderflow { t });
                }
                h *= 0.5;
                continue;
            }
            exit_check(&pass.y_new, t + h, &boundary_ok)?;
            let rec = make_record(t, h, &y, &pass, err);
            debug_assert!(rec
                .y_end
                .iter()
                .enumerate()
                .all(|(j, &v)| (rec.eval_component(j, rec.t_end) - v).abs()
                    <= 1e-13 * (1.0 + v.abs())));
            t = rec.t_end;
            y = rec.y_end.clone();
            k1 = pass.k[6].clone(); // FSAL
            traj.push_step(rec);
            accepted += 1;
            consecutive_rejects = 0;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            consecutive_rejects += 1;
            if consecutive_rejects > 80 {
                return Err(Error::StepSizeUnderflow { t });
            }
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    Ok(traj)
}
