//! Command-line front end.
//!
//! Exit codes follow the per-command contracts:
//! - simulate: 0 success, 2 integration failure, 3 invalid config
//! - certify: 0 Certified, 1 NotCertified, 3 invalid config, 4 Inconclusive or out of scope
//! - reproduce: 0 all checks pass, 1 any failure, 3 invalid example id
//! - sweep: 0 (per-row failures are recorded in the rows), 3 invalid config
//!
//! `ATTRACTA_LOG` in {error, info, debug} controls stderr chatter.

mod log;

use attracta::certifier::Verdict;
use attracta::config::{build_from_config, config_hash, parse_config};
use attracta::error::Error as CoreError;
use attracta::integrator::{integrate, IntegratorOptions};
use attracta::par::with_jobs;
use attracta::repro::{
    certify_build, reproduce_example, run_sweep, sweep_rows_to_csv, CertifyMethod, DelayPreset,
    ExampleId, DEFAULT_SEED, SWEEP_TOL,
};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "attracta",
    about = "Simulate delay systems with distributed delays and compute global-attractivity certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// System description file (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampling evidence
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured system and write a trajectory CSV
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// End of the integration interval
        #[arg(long = "t-end", default_value_t = 200.0)]
        t_end: f64,
        /// Additional uniform resampling interval for the CSV
        #[arg(long)]
        resample: Option<f64>,
    },
    /// Compute a global-attractivity certificate and write it as JSON
    Certify {
        #[command(flatten)]
        common: CommonOpts,
        /// auto | mmatrix | planar | nicholson
        #[arg(long, default_value = "auto")]
        method: String,
    },
    /// Run a bundled worked example end to end (certify + delay sweep)
    Reproduce {
        /// example1 | example2 | example3 | remark_L | example4 | all
        example: String,
        /// Report JSON output path (table always prints to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Worker threads for the sweep rows
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Simulate a grid of delay configurations and write a CSV report
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Delay family: constant | proportional | kernel
        #[arg(long)]
        family: String,
        /// Comma-separated grid values (lags, ratios, or widths)
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Convergence tolerance for the sup-error over the trailing window
        #[arg(long, default_value_t = SWEEP_TOL)]
        tol: f64,
        /// Worker threads for the grid rows
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn main() -> ExitCode {
    log::init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate {
            common,
            t_end,
            resample,
        } => cmd_simulate(&common, t_end, resample),
        Command::Certify { common, method } => cmd_certify(&common, &method),
        Command::Reproduce {
            example,
            out,
            seed,
            jobs,
        } => cmd_reproduce(&example, out.as_deref(), seed, jobs),
        Command::Sweep {
            common,
            family,
            values,
            tol,
            jobs,
        } => cmd_sweep(&common, &family, &values, tol, jobs),
    };
    ExitCode::from(code)
}

/// 3 for config problems, 2 for runtime integration failures,
/// 4 for out-of-scope certification requests.
fn classify(err: &CoreError) -> u8 {
    match err {
        CoreError::Config(_)
        | CoreError::InvalidParameter(_)
        | CoreError::InvalidSystem(_)
        | CoreError::InvalidDistribution(_) => 3,
        CoreError::UnsupportedModel(_) | CoreError::OutOfRange(_) => 4,
        _ => 2,
    }
}

fn fail(err: &CoreError, fallback: u8) -> u8 {
    let code = classify(err);
    eprintln!("error: {err}");
    if code == 2 {
        fallback
    } else {
        code
    }
}

fn read_config(path: &PathBuf) -> Result<(attracta::config::SystemConfig, String), u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        3u8
    })?;
    let cfg = parse_config(&text).map_err(|e| {
        eprintln!("error: {e}");
        3u8
    })?;
    let hash = config_hash(&text).map_err(|e| {
        eprintln!("error: {e}");
        3u8
    })?;
    Ok((cfg, hash))
}

fn write_out(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), u8> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            2u8
        }),
        None => std::io::stdout().write_all(bytes).map_err(|e| {
            eprintln!("error: stdout: {e}");
            2u8
        }),
    }
}

fn cmd_simulate(common: &CommonOpts, t_end: f64, resample: Option<f64>) -> u8 {
    let (cfg, hash) = match read_config(&common.config) {
        Ok(v) => v,
        Err(code) => return code,
    };
    log::info(&format!("config {hash}"));
    let (build, history) = match build_from_config(&cfg, None) {
        Ok(v) => v,
        Err(e) => return fail(&e, 3),
    };
    // NaN-rejecting comparison: a non-finite t_end must fail closed
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(t_end > history.anchor_time()) {
        eprintln!(
            "error: empty integration interval: t_end = {t_end} <= t0 = {}",
            history.anchor_time()
        );
        return 3;
    }
    let traj = match integrate(&build.system, &history, t_end, &IntegratorOptions::default()) {
        Ok(t) => t,
        Err(e) => return fail(&e, 2),
    };
    log::info(&format!("{} accepted steps", traj.steps().len()));
    let mut bytes = Vec::new();
    if traj.write_csv(&mut bytes, resample).is_err() {
        eprintln!("error: CSV serialization failed");
        return 2;
    }
    match write_out(&common.out, &bytes) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

fn cmd_certify(common: &CommonOpts, method: &str) -> u8 {
    let method = match CertifyMethod::parse(method) {
        Ok(m) => m,
        Err(e) => return fail(&e, 3),
    };
    let (cfg, hash) = match read_config(&common.config) {
        Ok(v) => v,
        Err(code) => return code,
    };
    log::info(&format!("config {hash}"));
    let (build, _history) = match build_from_config(&cfg, None) {
        Ok(v) => v,
        Err(e) => return fail(&e, 3),
    };
    let cert = match certify_build(&build, method, common.seed) {
        Ok(c) => c,
        Err(e) => return fail(&e, 4),
    };
    let mut json = cert.to_json();
    json.push('\n');
    if let Err(code) = write_out(&common.out, json.as_bytes()) {
        return code;
    }
    match cert.verdict {
        Verdict::Certified => 0,
        Verdict::NotCertified => 1,
        Verdict::Inconclusive => 4,
    }
}

fn cmd_reproduce(example: &str, out: Option<&std::path::Path>, seed: u64, jobs: Option<usize>) -> u8 {
    let ids: Vec<ExampleId> = if example == "all" {
        ExampleId::all().to_vec()
    } else {
        match ExampleId::parse(example) {
            Ok(id) => vec![id],
            Err(e) => {
                eprintln!("error: {e}");
                return 3;
            }
        }
    };
    let mut all_pass = true;
    let mut reports = Vec::new();
    for id in ids {
        match with_jobs(jobs, || reproduce_example(id, seed)) {
            Ok(report) => {
                print!("{}", report.table());
                all_pass &= report.all_pass();
                reports.push(report);
            }
            Err(e) => {
                eprintln!("error: {e}");
                all_pass = false;
            }
        }
    }
    if let Some(path) = out {
        let json = if reports.len() == 1 {
            serde_json::to_string_pretty(&reports[0])
        } else {
            serde_json::to_string_pretty(&reports)
        }
        .expect("report serialization");
        if let Err(e) = fs::write(path, json + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 1;
        }
    }
    u8::from(!all_pass)
}

fn cmd_sweep(common: &CommonOpts, family: &str, values: &[f64], tol: f64, jobs: Option<usize>) -> u8 {
    if values.is_empty() {
        eprintln!("error: --values must name at least one grid point");
        return 3;
    }
    let presets: Vec<DelayPreset> = match family {
        "constant" => values.iter().map(|&v| DelayPreset::Constant { lag: v }).collect(),
        "proportional" => values
            .iter()
            .map(|&v| DelayPreset::Proportional { rho: v })
            .collect(),
        "kernel" => values
            .iter()
            .map(|&v| DelayPreset::UniformKernel { width: v })
            .collect(),
        other => {
            eprintln!("error: unknown delay family `{other}` (constant | proportional | kernel)");
            return 3;
        }
    };
    let (cfg, hash) = match read_config(&common.config) {
        Ok(v) => v,
        Err(code) => return code,
    };
    log::info(&format!("config {hash}"));

    // target: the equilibrium the certificate speaks for, or a located one
    let target = match sweep_target(&cfg, common.seed) {
        Ok(t) => t,
        Err(e) => return fail(&e, 2),
    };
    log::info(&format!("sweep target {target:?}"));

    let rows = with_jobs(jobs, || run_sweep(&cfg, presets, &target, tol));
    let csv = sweep_rows_to_csv(&rows);
    match write_out(&common.out, csv.as_bytes()) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

/// Locate the reference equilibrium for sweep convergence: the model's
/// declared equilibrium when available, otherwise a fixed-point search from
/// the history's anchor value.
fn sweep_target(
    cfg: &attracta::config::SystemConfig,
    _seed: u64,
) -> Result<Vec<f64>, CoreError> {
    let (build, history) = build_from_config(cfg, None)?;
    if let Some(z) = &build.equilibrium {
        return Ok(z.clone());
    }
    if let Some(np) = &build.nicholson {
        let guess: Vec<f64> = np.beta.iter().map(|&b| b.ln().max(1.0)).collect();
        return attracta::certifier::find_equilibrium(
            &np.map(),
            build.system.domain(),
            &guess,
        );
    }
    let guess = history.eval(history.anchor_time());
    attracta::certifier::find_equilibrium(build.system.nonlinearity(), build.system.domain(), &guess)
}
