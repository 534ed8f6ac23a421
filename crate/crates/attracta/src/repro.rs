//! Delay sweeps, certificate dispatch, and the bundled worked examples:
//! certify, then simulate under several qualitatively different admissible
//! delay configurations and check convergence to the certified equilibrium.

use crate::certifier::{
    certify_m_matrix_seeded, certify_nicholson_seeded, planar_certify, Certificate, PlanarOptions,
    Verdict,
};
use crate::config::{build_from_config, config_hash, parse_config, SystemConfig};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorOptions};
use crate::model::{DelayDistribution, Trajectory};
use crate::par;
use crate::zoo::{DelaySpec, ModelBuild, ModelKind};
use serde::Serialize;
use std::sync::Arc;
use std::time::Instant;

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Convergence criterion for sweeps: settle within this of the target...
pub const SWEEP_TOL: f64 = 1e-3;
/// ...over a trailing window this long.
pub const SWEEP_WINDOW: f64 = 5.0;

/// Horizon for proportional lags h(t) = rho * t. The lag (1-rho)t is
/// unbounded, so "a multiple of the maximum lag" has no finite meaning;
/// contraction rounds are multiplicative in t instead (round n ends near
/// t0 / rho^n) and convergence is algebraic in t. 3e5 buys ~35 rounds at
/// rho = 0.7; the explicit pair takes O(g * t_end) steps regardless of the
/// tolerance (the undelayed leakage bounds the stable step), so horizons
/// far beyond this stop being affordable.
pub const PROPORTIONAL_HORIZON: f64 = 3e5;

/// One delay configuration applied to a system's delayed structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DelayPreset {
    Constant { lag: f64 },
    Proportional { rho: f64 },
    UniformKernel { width: f64 },
}

impl DelayPreset {
    pub fn label(&self) -> String {
        match self {
            DelayPreset::Constant { lag } => format!("constant lag {lag}"),
            DelayPreset::Proportional { rho } => format!("proportional h(t) = {rho} t"),
            DelayPreset::UniformKernel { width } => format!("uniform kernel on [t-{width}, t]"),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            DelayPreset::Constant { .. } => "constant",
            DelayPreset::Proportional { .. } => "proportional",
            DelayPreset::UniformKernel { .. } => "kernel",
        }
    }

    pub fn parameter(&self) -> f64 {
        match self {
            DelayPreset::Constant { lag } => *lag,
            DelayPreset::Proportional { rho } => *rho,
            DelayPreset::UniformKernel { width } => *width,
        }
    }

    pub fn to_spec(&self) -> DelaySpec {
        DelaySpec::Template(self.distribution())
    }

    pub fn distribution(&self) -> DelayDistribution {
        match self {
            DelayPreset::Constant { lag } => DelayDistribution::constant_lag(*lag),
            DelayPreset::Proportional { rho } => DelayDistribution::proportional(*rho),
            DelayPreset::UniformKernel { width } => DelayDistribution::uniform_kernel(*width),
        }
    }

    /// Simulation horizon scaled so slow box entry is not misread as
    /// failure: max(200, 150 * mean lag) for bounded lags. At large lags
    /// the dynamics degenerate to iterating the map once per delay round,
    /// so the horizon must buy enough rounds for a contraction rate close
    /// to 1 (150 rounds cover alpha up to ~0.95 at the sweep tolerance).
    /// A uniform kernel's round length is its mean lag, half the window.
    pub fn horizon(&self) -> f64 {
        match self {
            DelayPreset::Constant { lag } => 200f64.max(150.0 * lag),
            DelayPreset::UniformKernel { width } => 200f64.max(75.0 * width),
            DelayPreset::Proportional { .. } => PROPORTIONAL_HORIZON,
        }
    }

    /// The three qualitatively different admissible configurations used by
    /// the bundled examples.
    pub fn standard_triple() -> [DelayPreset; 3] {
        [
            DelayPreset::Constant { lag: 1.0 },
            DelayPreset::Proportional { rho: 0.7 },
            DelayPreset::UniformKernel { width: 2.0 },
        ]
    }
}

/// Outcome of one simulation row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub family: String,
    pub parameter: f64,
    pub horizon: f64,
    pub converged: bool,
    pub final_error: f64,
    pub time_to_tolerance: Option<f64>,
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn sweep_options() -> IntegratorOptions {
    IntegratorOptions::with_tolerances(1e-6, 1e-9)
}

/// Earliest accepted time after which the trajectory stays within tol of
/// the target (sampled like the convergence check).
fn time_to_tolerance(traj: &Trajectory, target: &[f64], tol: f64) -> Option<f64> {
    let steps = traj.steps();
    if steps.is_empty() {
        return None;
    }
    let mut buf = vec![0.0; traj.dim()];
    let mut cut = None;
    for (idx, s) in steps.iter().enumerate().rev() {
        let mut worst = 0.0f64;
        for k in 0..=11 {
            let t = s.t_start + (s.t_end - s.t_start) * k as f64 / 11.0;
            s.eval_into(t, &mut buf);
            for (j, &v) in buf.iter().enumerate() {
                worst = worst.max((v - target[j]).abs());
            }
        }
        if worst > tol {
            break;
        }
        cut = Some(if idx == 0 { traj.t0() } else { s.t_start });
    }
    cut
}

/// Simulate one delay configuration and judge convergence to `target`.
pub fn run_preset(
    cfg: &SystemConfig,
    preset: &DelayPreset,
    target: &[f64],
    index: usize,
    tol: f64,
) -> SweepRow {
    let horizon = preset.horizon();
    let spec = preset.to_spec();
    let run = || -> Result<(Trajectory, f64)> {
        let (build, history) = build_from_config(cfg, Some(&spec))?;
        let traj = integrate(&build.system, &history, horizon, &sweep_options())?;
        let err = traj.sup_distance_over_window(target, SWEEP_WINDOW, 10);
        Ok((traj, err))
    };
    match run() {
        Ok((traj, final_error)) => SweepRow {
            index,
            family: preset.family().into(),
            parameter: preset.parameter(),
            horizon,
            converged: final_error <= tol,
            final_error,
            time_to_tolerance: time_to_tolerance(&traj, target, tol),
            steps: traj.steps().len(),
            error: None,
        },
        Err(e) => SweepRow {
            index,
            family: preset.family().into(),
            parameter: preset.parameter(),
            horizon,
            converged: false,
            final_error: f64::NAN,
            time_to_tolerance: None,
            steps: 0,
            error: Some(e.to_string()),
        },
    }
}

/// Run a grid of delay configurations; rows execute concurrently and are
/// reported in grid order.
pub fn run_sweep(
    cfg: &SystemConfig,
    presets: Vec<DelayPreset>,
    target: &[f64],
    tol: f64,
) -> Vec<SweepRow> {
    let indexed: Vec<(usize, DelayPreset)> = presets.into_iter().enumerate().collect();
    par::map_vec(indexed, |(idx, p)| run_preset(cfg, &p, target, idx, tol))
}

/// Sequential twin of [`run_sweep`], kept callable for benchmarks.
pub fn run_sweep_sequential(
    cfg: &SystemConfig,
    presets: Vec<DelayPreset>,
    target: &[f64],
    tol: f64,
) -> Vec<SweepRow> {
    let indexed: Vec<(usize, DelayPreset)> = presets.into_iter().enumerate().collect();
    par::map_vec_seq(indexed, |(idx, p)| run_preset(cfg, &p, target, idx, tol))
}

pub fn sweep_rows_to_csv(rows: &[SweepRow]) -> String {
    use crate::model::fmt_g17 as g17;
    let mut out = String::from(
        "index,family,parameter,horizon,converged,final_error,time_to_tolerance,steps,error\r\n",
    );
    for r in rows {
        let ttt = r.time_to_tolerance.map(g17).unwrap_or_default();
        let err = match &r.error {
            None => String::new(),
            Some(e) => csv_quote(e),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\r\n",
            r.index,
            r.family,
            g17(r.parameter),
            g17(r.horizon),
            r.converged,
            g17(r.final_error),
            ttt,
            r.steps,
            err
        ));
    }
    out
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifyMethod {
    Auto,
    MMatrix,
    Planar,
    Nicholson,
}

impl CertifyMethod {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "auto" => CertifyMethod::Auto,
            "mmatrix" => CertifyMethod::MMatrix,
            "planar" => CertifyMethod::Planar,
            "nicholson" => CertifyMethod::Nicholson,
            _ => return Err(Error::Config(format!("unknown method `{name}`"))),
        })
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn planar_pair_of(build: &ModelBuild) -> Option<(ScalarFn, ScalarFn)> {
    if let Some(p) = &build.planar_pair {
        return Some(p.clone());
    }
    // expression systems with a strict planar cross structure
    if build.system.dim() == 2 {
        let nl = build.system.nonlinearity();
        if nl.depends_on(0, 1) && nl.depends_on(1, 0) && !nl.depends_on(0, 0) && !nl.depends_on(1, 1)
        {
            let f = build.system.nonlinearity().clone();
            let g = f.clone();
            return Some((
                Arc::new(move |v| f.component(0, &[0.0, v])),
                Arc::new(move |v| g.component(1, &[v, 0.0])),
            ));
        }
    }
    None
}

/// Expand a bracket for the planar crossing around a hint.
fn planar_bracket(
    f1: &ScalarFn,
    f2: &ScalarFn,
    hint: f64,
) -> (f64, f64) {
    let psi = |x: f64| f1(f2(x)) - x;
    let mut a = hint * 0.5;
    let mut b = hint * 2.0;
    for _ in 0..48 {
        if psi(a) > 0.0 {
            break;
        }
        a *= 0.5;
    }
    for _ in 0..48 {
        if psi(b) < 0.0 {
            break;
        }
        b *= 2.0;
    }
    (a, b)
}

/// Certificate dispatch: pick the method from the model family (or force
/// one), run it, and return the certificate.
pub fn certify_build(
    build: &ModelBuild,
    method: CertifyMethod,
    seed: u64,
) -> Result<Certificate> {
    let resolved = if method == CertifyMethod::Auto {
        match build.kind {
            ModelKind::Nicholson => CertifyMethod::Nicholson,
            ModelKind::SqrtPair | ModelKind::PowerPair => CertifyMethod::Planar,
            ModelKind::Expression if planar_pair_of(build).is_some() && build.lipschitz.is_none() => {
                CertifyMethod::Planar
            }
            _ => CertifyMethod::MMatrix,
        }
    } else {
        method
    };

    if !build.system.is_certifiable() {
        return Err(Error::UnsupportedModel(
            "attractivity of this model is posed as an open problem; simulation only".into(),
        ));
    }

    match resolved {
        CertifyMethod::Nicholson => {
            let params = build.nicholson.as_ref().ok_or_else(|| {
                Error::UnsupportedModel("this system has no Nicholson structure".into())
            })?;
            certify_nicholson_seeded(params, seed)
        }
        CertifyMethod::Planar => {
            let (f1, f2) = planar_pair_of(build).ok_or_else(|| {
                Error::UnsupportedModel("this system has no planar cross structure".into())
            })?;
            let hint = build.equilibrium.as_ref().map_or(1.0, |z| z[0].max(1e-6));
            let (a11, b11) = planar_bracket(&f1, &f2, hint);
            planar_certify(
                f1.as_ref(),
                f2.as_ref(),
                hint,
                &PlanarOptions::default(),
                a11,
                b11,
            )
        }
        CertifyMethod::MMatrix | CertifyMethod::Auto => {
            let lip = build.lipschitz.as_ref().ok_or_else(|| {
                Error::UnsupportedModel(
                    "no componentwise Lipschitz data; supply a `lipschitz` block".into(),
                )
            })?;
            certify_m_matrix_seeded(&build.system, lip, seed)
        }
    }
}

// ---------------------------------------------------------------------------
// bundled worked examples

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleId {
    Example1,
    Example2,
    Example3,
    RemarkL,
    Example4,
}

impl ExampleId {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "example1" => ExampleId::Example1,
            "example2" => ExampleId::Example2,
            "example3" => ExampleId::Example3,
            "remark_L" | "remark_l" => ExampleId::RemarkL,
            "example4" => ExampleId::Example4,
            _ => {
                return Err(Error::Config(format!(
                    "unknown example `{name}` (expected example1..example4 or remark_L)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExampleId::Example1 => "example1",
            ExampleId::Example2 => "example2",
            ExampleId::Example3 => "example3",
            ExampleId::RemarkL => "remark_L",
            ExampleId::Example4 => "example4",
        }
    }

    pub fn all() -> [ExampleId; 5] {
        [
            ExampleId::Example1,
            ExampleId::Example2,
            ExampleId::Example3,
            ExampleId::RemarkL,
            ExampleId::Example4,
        ]
    }

    /// Canonical config text of the example (also the hash input).
    pub fn config_text(&self) -> &'static str {
        match self {
            ExampleId::Example1 => EXAMPLE1_CONFIG,
            ExampleId::Example2 => EXAMPLE2_CONFIG,
            ExampleId::Example3 => EXAMPLE3_CONFIG,
            ExampleId::RemarkL => REMARK_L_CONFIG,
            ExampleId::Example4 => EXAMPLE4_CONFIG,
        }
    }
}

pub const EXAMPLE1_CONFIG: &str = r#"{
  "dimension": 2,
  "rates": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": 1.0}],
  "nonlinearity": {"model": "sqrt_pair", "params": {}},
  "distributions": {"template": {"kind": "point", "lag": 1.0}},
  "history": {"kind": "constant", "values": [0.2, 3.0]}
}"#;

pub const EXAMPLE2_CONFIG: &str = r#"{
  "dimension": 2,
  "rates": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": 1.0}],
  "nonlinearity": {"model": "power_pair", "params": {}},
  "distributions": {"template": {"kind": "point", "lag": 1.0}},
  "history": {"kind": "constant", "values": [0.2, 3.0]}
}"#;

pub const EXAMPLE3_CONFIG: &str = r#"{
  "dimension": 2,
  "rates": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": 1.0}],
  "nonlinearity": {"model": "bam_root", "params": {"alpha": [[0.5, 0.5], [0.5, 0.5]], "k": [1, 1]}},
  "distributions": {"template": {"kind": "point", "lag": 1.0}},
  "history": {"kind": "constant", "values": [0.6, 1.9]}
}"#;

// The linear benchmark is scale-invariant (F = Lx), so the history
// amplitude only rescales the whole trajectory; a modest amplitude keeps
// the slowly contracting proportional-lag run (sup error ~ t^-0.44)
// within the sweep horizon.
pub const REMARK_L_CONFIG: &str = r#"{
  "dimension": 2,
  "nonlinearity": {"model": "hopfield", "params": {"b": [1.0, 1.0], "c": [[0.5, 2.0], [0.0625, 0.5]], "activation": "identity"}},
  "distributions": {"template": {"kind": "point", "lag": 1.0}},
  "history": {"kind": "constant", "values": [0.05, -0.025]}
}"#;

pub const EXAMPLE4_CONFIG: &str = r#"{
  "dimension": 2,
  "rates": [{"kind": "constant", "value": 1.0}, {"kind": "constant", "value": 1.0}],
  "nonlinearity": {"model": "nicholson", "params": {"beta": [4.0, 5.0], "a": [[0.0, 0.5], [0.2, 0.0]]}},
  "distributions": {"template": {"kind": "point", "lag": 1.0}},
  "history": {"kind": "constant", "values": [1.0, 1.0]}
}"#;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

/// Report of one bundled example: the certificate, example-specific value
/// checks, and the delay-configuration sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ReproReport {
    pub command: String,
    pub example: String,
    pub config_hash: String,
    pub seed: u64,
    pub certificate: Certificate,
    pub checks: Vec<CheckRow>,
    pub sweeps: Vec<SweepRow>,
    pub wall_ms: u128,
}

impl ReproReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.sweeps.iter().all(|s| s.converged)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "example {}  (config {})\n",
            self.example, self.config_hash
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {:<28} {}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        for s in &self.sweeps {
            let detail = match &s.error {
                Some(e) => format!("error: {e}"),
                None => format!(
                    "final sup-error {:.3e} at t = {:.3e} ({} steps)",
                    s.final_error, s.horizon, s.steps
                ),
            };
            out.push_str(&format!(
                "  [{}] sweep {:<21} {}\n",
                if s.converged { "pass" } else { "FAIL" },
                format!("{} {}", s.family, s.parameter),
                detail
            ));
        }
        out.push_str(&format!("  wall time {} ms\n", self.wall_ms));
        out
    }
}

/// Run one bundled example end to end: certify, check its published values,
/// sweep the three standard delay configurations, and check convergence.
pub fn reproduce_example(id: ExampleId, seed: u64) -> Result<ReproReport> {
    let start = Instant::now();
    let text = id.config_text();
    let cfg = parse_config(text)?;
    let hash = config_hash(text)?;
    let (build, _history) = build_from_config(&cfg, None)?;

    let certificate = certify_build(&build, CertifyMethod::Auto, seed)?;
    let mut checks = Vec::new();
    checks.push(CheckRow {
        name: "certificate".into(),
        detail: format!("{:?} by {:?}", certificate.verdict, certificate.method),
        pass: certificate.verdict == Verdict::Certified,
    });

    match id {
        ExampleId::RemarkL => {
            // the column-sum comparison criterion must fail while the
            // M-matrix certificate succeeds
            let flower = certificate.comparison_flower;
            checks.push(CheckRow {
                name: "column-sum comparison".into(),
                detail: format!("criterion satisfied: {flower:?} (expected false)"),
                pass: flower == Some(false),
            });
            let alpha = certificate.alpha.unwrap_or(f64::NAN);
            checks.push(CheckRow {
                name: "contraction rate".into(),
                detail: format!("alpha = {alpha}"),
                pass: (alpha - 0.95).abs() < 1e-9,
            });
        }
        ExampleId::Example4 => {
            let c5 = certificate.corollary5.clone();
            let pass = c5.as_ref().map(|p| {
                p.pass && (p.lhs - 0.1).abs() < 1e-12 && (p.rhs - 0.148295).abs() < 1e-5
            });
            checks.push(CheckRow {
                name: "product test".into(),
                detail: match &c5 {
                    Some(p) => format!("{:.6} < {:.6}", p.lhs, p.rhs),
                    None => "missing".into(),
                },
                pass: pass == Some(true),
            });
            let cmp = certificate.comparison_abs_nichol2;
            checks.push(CheckRow {
                name: "literature bound".into(),
                detail: format!("satisfied: {cmp:?} (expected false: 0.5 > 0.458659)"),
                pass: cmp == Some(false),
            });
        }
        _ => {}
    }

    // sweep target: the certified equilibrium
    let target = certificate.equilibrium.clone();
    let sweeps = run_sweep(&cfg, DelayPreset::standard_triple().to_vec(), &target, SWEEP_TOL);

    Ok(ReproReport {
        command: format!("reproduce {}", id.name()),
        example: id.name().into(),
        config_hash: hash,
        seed,
        certificate,
        checks,
        sweeps,
        wall_ms: start.elapsed().as_millis(),
    })
}
