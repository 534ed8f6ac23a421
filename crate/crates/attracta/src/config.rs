//! System description files.
//!
//! A config names a dimension, per-equation rates, a nonlinearity (either a
//! named model builder with parameters or an expression vector over
//! x1..xs), an s x s delay-distribution matrix (or a single template applied
//! per the model's structure), a domain, and an initial history.

use crate::certifier::{LipschitzData, NicholsonParams};
use crate::error::{Error, Result};
use crate::model::{DelayDistribution, DelaySystem, Domain, HistoryFunction, Lag, Rate, VectorMap};
use crate::numeric::expr::Expr;
use crate::zoo::{
    build_bam_root, build_hopfield, build_nicholson, build_pair, build_section5, Activation,
    DelaySpec, ModelBuild, ModelKind, Section5Params,
};
use serde::Deserialize;
use std::sync::Arc;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateConfig {
    Constant { value: f64 },
    Expr { body: String },
    Oscillatory { scale: f64 },
}

impl RateConfig {
    fn to_rate(&self) -> Result<Rate> {
        Ok(match self {
            RateConfig::Constant { value } => Rate::Constant(*value),
            RateConfig::Oscillatory { scale } => Rate::Oscillatory { scale: *scale },
            RateConfig::Expr { body } => Rate::Expr(Arc::new(Expr::parse(body, &["t"])?)),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub weight: f64,
    #[serde(default)]
    pub lag: Option<f64>,
    #[serde(default)]
    pub proportional: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub lag: f64,
    pub size: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    Point {
        #[serde(default)]
        lag: Option<f64>,
        #[serde(default)]
        proportional: Option<f64>,
    },
    Mixture {
        atoms: Vec<AtomConfig>,
    },
    StepCdf {
        jumps: Vec<JumpConfig>,
    },
    UniformKernel {
        width: f64,
    },
}

fn lag_from(lag: Option<f64>, proportional: Option<f64>) -> Result<Lag> {
    match (lag, proportional) {
        (Some(tau), None) => Ok(Lag::Constant(tau)),
        (None, Some(rho)) => Ok(Lag::Proportional(rho)),
        _ => Err(Error::Config(
            "a point lag needs exactly one of `lag` or `proportional`".into(),
        )),
    }
}

impl DistributionConfig {
    pub fn to_distribution(&self) -> Result<DelayDistribution> {
        let d = match self {
            DistributionConfig::Point { lag, proportional } => {
                DelayDistribution::point(lag_from(*lag, *proportional)?)
            }
            DistributionConfig::Mixture { atoms } => DelayDistribution::mixture(
                atoms
                    .iter()
                    .map(|a| Ok((a.weight, lag_from(a.lag, a.proportional)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            DistributionConfig::StepCdf { jumps } => {
                DelayDistribution::step_cdf(jumps.iter().map(|j| (j.lag, j.size)).collect())
            }
            DistributionConfig::UniformKernel { width } => {
                DelayDistribution::uniform_kernel(*width)
            }
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DistributionsConfig {
    Template { template: DistributionConfig },
    Matrix(Vec<Vec<DistributionConfig>>),
}

impl DistributionsConfig {
    pub fn to_spec(&self) -> Result<DelaySpec> {
        Ok(match self {
            DistributionsConfig::Template { template } => {
                DelaySpec::Template(template.to_distribution()?)
            }
            DistributionsConfig::Matrix(rows) => DelaySpec::Matrix(
                rows.iter()
                    .map(|r| r.iter().map(|d| d.to_distribution()).collect())
                    .collect::<Result<Vec<Vec<_>>>>()?,
            ),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NonlinearityConfig {
    Model {
        model: String,
        #[serde(default)]
        params: serde_json::Value,
    },
    Exprs {
        exprs: Vec<String>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HistoryConfig {
    Constant {
        values: Vec<f64>,
    },
    Table {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

impl HistoryConfig {
    pub fn to_history(&self, t0: f64) -> Result<HistoryFunction> {
        match self {
            HistoryConfig::Constant { values } => Ok(HistoryFunction::constant(t0, values.clone())),
            HistoryConfig::Table { times, values } => {
                HistoryFunction::table(t0, times.clone(), values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzConfig {
    pub matrix: Vec<Vec<f64>>,
    pub equilibrium: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub dimension: usize,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub rates: Option<Vec<RateConfig>>,
    pub nonlinearity: NonlinearityConfig,
    pub distributions: DistributionsConfig,
    /// Per-axis [lo, hi]; null means unbounded. Only meaningful for
    /// expression systems (models fix their own domain).
    #[serde(default)]
    pub domain: Option<Vec<[Option<f64>; 2]>>,
    pub history: HistoryConfig,
    /// Contraction-certificate input for expression systems.
    #[serde(default)]
    pub lipschitz: Option<LipschitzConfig>,
}

pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let cfg: SystemConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
    if cfg.dimension == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    Ok(cfg)
}

/// Canonical hash of a config: the JSON value re-serialized with sorted
/// keys, digested with FNV-1a 64. Semantically identical configs that
/// differ only in key order hash identically.
pub fn config_hash(text: &str) -> Result<String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
    let canonical = value.to_string(); // object keys are sorted by the map type
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    Ok(format!("{hash:016x}"))
}

fn default_rates(s: usize) -> Vec<Rate> {
    vec![Rate::Constant(1.0); s]
}

fn parse_rates(cfg: &SystemConfig) -> Result<Option<Vec<Rate>>> {
    match &cfg.rates {
        None => Ok(None),
        Some(rc) => {
            if rc.len() != cfg.dimension {
                return Err(Error::Config(format!(
                    "expected {} rates, got {}",
                    cfg.dimension,
                    rc.len()
                )));
            }
            Ok(Some(
                rc.iter().map(|r| r.to_rate()).collect::<Result<Vec<_>>>()?,
            ))
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct HopfieldParams {
    b: Vec<f64>,
    c: Vec<Vec<f64>>,
    #[serde(default)]
    activation: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BamParams {
    alpha: Vec<Vec<f64>>,
    k: Vec<u32>,
    #[serde(default)]
    floor: Option<f64>,
    #[serde(default)]
    ceiling: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct NicholsonConfigParams {
    beta: Vec<f64>,
    a: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchParams {
    beta: Vec<f64>,
    #[serde(default)]
    capacity: Option<Vec<f64>>,
    #[serde(default)]
    exponent: Option<f64>,
    a: Vec<Vec<f64>>,
}

fn model_params<T: for<'de> Deserialize<'de>>(value: &serde_json::Value) -> Result<T> {
    serde_json::from_value(value.clone())
        .map_err(|e| Error::Config(format!("model params: {e}")))
}

/// Build the system (and history) described by a parsed config, optionally
/// overriding the delay configuration (sweeps do this per row).
pub fn build_from_config(
    cfg: &SystemConfig,
    delay_override: Option<&DelaySpec>,
) -> Result<(ModelBuild, HistoryFunction)> {
    let s = cfg.dimension;
    let own_spec;
    let spec: &DelaySpec = match delay_override {
        Some(d) => d,
        None => {
            own_spec = cfg.distributions.to_spec()?;
            &own_spec
        }
    };
    let rates = parse_rates(cfg)?;

    let build = match &cfg.nonlinearity {
        NonlinearityConfig::Model { model, params } => {
            let kind = ModelKind::parse(model)?;
            if cfg.domain.is_some() {
                return Err(Error::Config(
                    "model systems fix their own domain; drop the `domain` field".into(),
                ));
            }
            match kind {
                ModelKind::Hopfield => {
                    let p: HopfieldParams = model_params(params)?;
                    if rates.is_some() {
                        return Err(Error::Config(
                            "this model's rates are fixed by the decay vector b".into(),
                        ));
                    }
                    let act = match p.activation.as_deref() {
                        None | Some("identity") => Activation::identity(),
                        Some("tanh") => Activation::tanh(),
                        Some(other) => {
                            return Err(Error::Config(format!("unknown activation `{other}`")))
                        }
                    };
                    let acts = vec![act; p.b.len()];
                    build_hopfield(&p.b, &p.c, &acts, spec)?
                }
                ModelKind::BamRoot => {
                    let p: BamParams = model_params(params)?;
                    build_bam_root(
                        &p.alpha,
                        &p.k,
                        rates.unwrap_or_else(|| default_rates(s)),
                        spec,
                        p.floor.unwrap_or(0.25),
                        p.ceiling.unwrap_or(4.0),
                    )?
                }
                ModelKind::Nicholson => {
                    let p: NicholsonConfigParams = model_params(params)?;
                    let np = NicholsonParams {
                        beta: p.beta,
                        coupling: p.a,
                    };
                    let template = match spec {
                        DelaySpec::Template(d) => d.clone(),
                        DelaySpec::Matrix(_) => {
                            return Err(Error::Config(
                                "this model delays only the self term; give a single template".into(),
                            ))
                        }
                    };
                    build_nicholson(&np, rates.unwrap_or_else(|| default_rates(s)), &template)?
                }
                ModelKind::SqrtPair | ModelKind::PowerPair => {
                    build_pair(kind, rates.unwrap_or_else(|| default_rates(2)), spec)?
                }
                ModelKind::Expression => {
                    return Err(Error::Config(
                        "expression systems use the `exprs` form, not `model`".into(),
                    ))
                }
                ModelKind::LogisticPatch | ModelKind::MackeyGlassPatch | ModelKind::RickerPatch => {
                    let p: PatchParams = model_params(params)?;
                    let sp = match kind {
                        ModelKind::LogisticPatch => Section5Params::Logistic {
                            beta: p.beta,
                            capacity: p.capacity.ok_or_else(|| {
                                Error::Config("logistic_patch needs `capacity`".into())
                            })?,
                        },
                        ModelKind::MackeyGlassPatch => Section5Params::MackeyGlass {
                            beta: p.beta,
                            exponent: p.exponent.ok_or_else(|| {
                                Error::Config("mackey_glass_patch needs `exponent`".into())
                            })?,
                        },
                        _ => Section5Params::Ricker {
                            beta: p.beta,
                            capacity: p.capacity.ok_or_else(|| {
                                Error::Config("ricker_patch needs `capacity`".into())
                            })?,
                        },
                    };
                    let template = match spec {
                        DelaySpec::Template(d) => d.clone(),
                        DelaySpec::Matrix(_) => {
                            return Err(Error::Config(
                                "patch models take a single delay template".into(),
                            ))
                        }
                    };
                    build_section5(&sp, &p.a, rates.unwrap_or_else(|| default_rates(s)), &template)?
                }
            }
        }
        NonlinearityConfig::Exprs { exprs } => {
            if exprs.len() != s {
                return Err(Error::Config(format!(
                    "expected {s} nonlinearity expressions, got {}",
                    exprs.len()
                )));
            }
            let var_names: Vec<String> = (1..=s).map(|i| format!("x{i}")).collect();
            let var_refs: Vec<&str> = var_names.iter().map(String::as_str).collect();
            let parsed: Vec<Expr> = exprs
                .iter()
                .map(|e| Expr::parse(e, &var_refs))
                .collect::<Result<_>>()?;
            let f = VectorMap::from_exprs(parsed, s);
            let mask: Vec<Vec<bool>> = (0..s)
                .map(|i| (0..s).map(|j| f.depends_on(i, j)).collect())
                .collect();
            let domain = match &cfg.domain {
                None => Domain::unbounded(s),
                Some(axes) => {
                    if axes.len() != s {
                        return Err(Error::Config(format!("expected {s} domain axes")));
                    }
                    Domain::new(
                        axes.iter()
                            .map(|[lo, hi]| {
                                (
                                    lo.unwrap_or(f64::NEG_INFINITY),
                                    hi.unwrap_or(f64::INFINITY),
                                )
                            })
                            .collect(),
                    )?
                }
            };
            let dists = match spec {
                DelaySpec::Template(_) | DelaySpec::Matrix(_) => {
                    // template applies to every pair the expressions read
                    spec_materialize(spec, &mask)?
                }
            };
            let system = DelaySystem::new(
                rates.unwrap_or_else(|| default_rates(s)),
                f,
                dists,
                domain.clone(),
            )?;
            let lipschitz = match &cfg.lipschitz {
                None => None,
                Some(lc) => Some(LipschitzData::new(
                    &lc.matrix,
                    lc.equilibrium.clone(),
                    domain,
                )?),
            };
            ModelBuild {
                kind: ModelKind::Expression,
                system,
                equilibrium: cfg.lipschitz.as_ref().map(|lc| lc.equilibrium.clone()),
                lipschitz,
                planar_pair: None,
                nicholson: None,
                notes: Vec::new(),
            }
        }
    };

    if build.system.dim() != s {
        return Err(Error::Config(format!(
            "model dimension {} does not match `dimension` = {s}",
            build.system.dim()
        )));
    }
    let history = cfg.history.to_history(cfg.t0)?;
    build.system.check_history(&history)?;
    Ok((build, history))
}

// DelaySpec::materialize is private to the zoo; re-expose the same logic
// for expression systems.
fn spec_materialize(
    spec: &DelaySpec,
    mask: &[Vec<bool>],
) -> Result<Vec<Vec<DelayDistribution>>> {
    let s = mask.len();
    let mut out = vec![vec![DelayDistribution::constant_lag(0.0); s]; s];
    match spec {
        DelaySpec::Template(d) => {
            for i in 0..s {
                for j in 0..s {
                    if mask[i][j] {
                        out[i][j] = d.clone();
                    }
                }
            }
        }
        DelaySpec::Matrix(m) => {
            if m.len() != s || m.iter().any(|r| r.len() != s) {
                return Err(Error::Config(format!("delay matrix must be {s} x {s}")));
            }
            for i in 0..s {
                for j in 0..s {
                    if mask[i][j] {
                        out[i][j] = m[i][j].clone();
                    }
                }
            }
        }
    }
    Ok(out)
}
