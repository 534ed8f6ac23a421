//! Parameterized builders for the concrete model families: additive
//! networks with Lipschitz activations, root-type bidirectional networks,
//! Nicholson-type patch systems, the two planar monotone pairs, and the
//! simulation-only population models whose attractivity is an open problem.

use crate::certifier::{LipschitzData, NicholsonParams};
use crate::error::{Error, Result};
use crate::model::{ComponentFn, DelayDistribution, DelaySystem, Domain, Rate, VectorMap};
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How a delay configuration is applied to a model's structure.
#[derive(Debug, Clone)]
pub enum DelaySpec {
    /// One distribution template placed at every structurally delayed pair.
    Template(DelayDistribution),
    /// Full s x s matrix; entries outside the model's delayed structure are
    /// overridden to undelayed point masses where the structure demands it.
    Matrix(Vec<Vec<DelayDistribution>>),
}

impl DelaySpec {
    pub fn constant(tau: f64) -> Self {
        DelaySpec::Template(DelayDistribution::constant_lag(tau))
    }

    /// Materialize against an activity mask: active pairs receive the
    /// configured distribution, inactive pairs an undelayed point mass.
    fn materialize(&self, active: &[Vec<bool>]) -> Result<Vec<Vec<DelayDistribution>>> {
        let s = active.len();
        let mut out = vec![vec![DelayDistribution::constant_lag(0.0); s]; s];
        match self {
            DelaySpec::Template(d) => {
                for i in 0..s {
                    for j in 0..s {
                        if active[i][j] {
                            out[i][j] = d.clone();
                        }
                    }
                }
            }
            DelaySpec::Matrix(m) => {
                if m.len() != s || m.iter().any(|r| r.len() != s) {
                    return Err(Error::InvalidParameter(format!(
                        "delay matrix must be {s} x {s}"
                    )));
                }
                for i in 0..s {
                    for j in 0..s {
                        if active[i][j] {
                            out[i][j] = m[i][j].clone();
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Hopfield,
    BamRoot,
    Nicholson,
    SqrtPair,
    PowerPair,
    LogisticPatch,
    MackeyGlassPatch,
    RickerPatch,
    /// Expression-defined system from a config file.
    Expression,
}

impl ModelKind {
    pub fn parse(name: &str) -> Result<ModelKind> {
        Ok(match name {
            "hopfield" => ModelKind::Hopfield,
            "bam_root" => ModelKind::BamRoot,
            "nicholson" => ModelKind::Nicholson,
            "sqrt_pair" => ModelKind::SqrtPair,
            "power_pair" => ModelKind::PowerPair,
            "logistic_patch" => ModelKind::LogisticPatch,
            "mackey_glass_patch" => ModelKind::MackeyGlassPatch,
            "ricker_patch" => ModelKind::RickerPatch,
            _ => return Err(Error::Config(format!("unknown model `{name}`"))),
        })
    }
}

/// A built model: the system plus whatever certificate inputs its family
/// provides.
pub struct ModelBuild {
    pub kind: ModelKind,
    pub system: DelaySystem,
    /// Known equilibrium (analytic or located at build time).
    pub equilibrium: Option<Vec<f64>>,
    /// Contraction-certificate input, when the family supports it.
    pub lipschitz: Option<LipschitzData>,
    /// The scalar pair (f1, f2) for the planar certificate.
    pub planar_pair: Option<(ScalarFn, ScalarFn)>,
    /// Nicholson parameters for the family-specific certificate.
    pub nicholson: Option<NicholsonParams>,
    pub notes: Vec<String>,
}

/// Scalar activation with a declared Lipschitz constant.
#[derive(Clone)]
pub struct Activation {
    pub f: ScalarFn,
    pub lipschitz: f64,
}

impl Activation {
    pub fn identity() -> Self {
        Activation {
            f: Arc::new(|v| v),
            lipschitz: 1.0,
        }
    }

    pub fn tanh() -> Self {
        Activation {
            f: Arc::new(f64::tanh),
            lipschitz: 1.0,
        }
    }

    pub fn custom(f: ScalarFn, lipschitz: f64) -> Self {
        Activation { f, lipschitz }
    }
}

/// Additive network x_i' = -b_i x_i + sum_j c_ij act_j(x_j(delayed)),
/// normalized to rate form with g_i = b_i and
/// f_i(x) = (1/b_i) sum_j c_ij act_j(x_j).
pub fn build_hopfield(
    b: &[f64],
    c: &[Vec<f64>],
    activations: &[Activation],
    delays: &DelaySpec,
) -> Result<ModelBuild> {
    let s = b.len();
    if c.len() != s || c.iter().any(|r| r.len() != s) || activations.len() != s {
        return Err(Error::InvalidParameter(
            "network shapes disagree: need s rates, s x s weights, s activations".into(),
        ));
    }
    if b.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("decay rates b must be positive".into()));
    }

    let mut mask = vec![vec![false; s]; s];
    let mut components: Vec<ComponentFn> = Vec::new();
    for i in 0..s {
        let bi = b[i];
        let row = c[i].clone();
        let acts: Vec<ScalarFn> = activations.iter().map(|a| a.f.clone()).collect();
        for (j, m) in mask[i].iter_mut().enumerate() {
            *m = row[j] != 0.0;
        }
        components.push(Arc::new(move |x: &[f64]| {
            let mut acc = 0.0;
            for (j, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    acc += w * (acts[j])(x[j]);
                }
            }
            acc / bi
        }));
    }
    let f = VectorMap::new(components).with_mask(mask.clone());

    let mut l_rows = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in 0..s {
            l_rows[i][j] = c[i][j].abs() * activations[j].lipschitz / b[i];
        }
    }

    let domain = Domain::unbounded(s);
    let equilibrium =
        crate::certifier::find_equilibrium(&f, &domain, &vec![0.0; s]).unwrap_or(vec![0.0; s]);
    let lipschitz = LipschitzData::new(&l_rows, equilibrium.clone(), domain.clone())?;

    let rates: Vec<Rate> = b.iter().map(|&v| Rate::Constant(v)).collect();
    let dists = delays.materialize(&mask)?;
    let system = DelaySystem::new(rates, f, dists, domain)?;

    Ok(ModelBuild {
        kind: ModelKind::Hopfield,
        system,
        equilibrium: Some(equilibrium),
        lipschitz: Some(lipschitz),
        planar_pair: None,
        nicholson: None,
        notes: Vec::new(),
    })
}

/// Root-type bidirectional network
/// x_i' = g_i(t) [ (sum_j alpha_ij x_j(delayed))^(1/(2 k_i)) - x_i ]
/// with row-stochastic alpha; the equilibrium is the all-ones vector.
///
/// The root has unbounded slope at 0, so the Lipschitz data is valid on a
/// post-transient box obtained by one application of F to
/// [floor, ceiling]^s; the certificate speaks for histories inside it.
pub fn build_bam_root(
    alpha: &[Vec<f64>],
    k: &[u32],
    rates: Vec<Rate>,
    delays: &DelaySpec,
    floor: f64,
    ceiling: f64,
) -> Result<ModelBuild> {
    let s = alpha.len();
    if alpha.iter().any(|r| r.len() != s) || k.len() != s || rates.len() != s {
        return Err(Error::InvalidParameter("network shapes disagree".into()));
    }
    for (i, row) in alpha.iter().enumerate() {
        if row.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha row {} has a negative entry",
                i + 1
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "alpha row {} sums to {sum}, expected 1",
                i + 1
            )));
        }
    }
    if k.contains(&0) {
        return Err(Error::InvalidParameter("exponents k must be >= 1".into()));
    }
    if !(floor > 0.0 && floor < 1.0 && ceiling > 1.0) {
        return Err(Error::InvalidParameter(
            "need 0 < floor < 1 < ceiling for the post-transient box".into(),
        ));
    }

    let mut mask = vec![vec![false; s]; s];
    let mut components: Vec<ComponentFn> = Vec::new();
    for i in 0..s {
        let row = alpha[i].clone();
        let exponent = 1.0 / (2.0 * k[i] as f64);
        for (j, m) in mask[i].iter_mut().enumerate() {
            *m = row[j] != 0.0;
        }
        components.push(Arc::new(move |x: &[f64]| {
            let mut acc = 0.0;
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    acc += a * x[j];
                }
            }
            acc.powf(exponent)
        }));
    }
    let f = VectorMap::new(components).with_mask(mask.clone());

    // one F-round of [floor, ceiling]^s per component
    let lo: Vec<f64> = k
        .iter()
        .map(|&ki| floor.powf(1.0 / (2.0 * ki as f64)))
        .collect();
    let hi: Vec<f64> = k
        .iter()
        .map(|&ki| ceiling.powf(1.0 / (2.0 * ki as f64)))
        .collect();
    let u_min = lo.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut l_rows = vec![vec![0.0; s]; s];
    for i in 0..s {
        let e = 1.0 / (2.0 * k[i] as f64);
        let slope = e * u_min.powf(e - 1.0);
        for j in 0..s {
            l_rows[i][j] = alpha[i][j] * slope;
        }
    }
    let cert_domain = Domain::new(lo.iter().zip(&hi).map(|(&a, &b)| (a, b)).collect())?;
    let equilibrium = vec![1.0; s];
    let lipschitz = LipschitzData::new(&l_rows, equilibrium.clone(), cert_domain.clone())?;

    let dists = delays.materialize(&mask)?;
    let system = DelaySystem::new(rates, f, dists, Domain::positive_orthant(s))?;

    Ok(ModelBuild {
        kind: ModelKind::BamRoot,
        system,
        equilibrium: Some(equilibrium),
        lipschitz: Some(lipschitz),
        planar_pair: None,
        nicholson: None,
        notes: vec![format!(
            "certificate domain restricted to the post-transient box {:?}..{:?}; the global claim for nonnegative nontrivial histories rests on the transient lower-bound argument",
            lo, hi
        )],
    })
}

/// Nicholson-type patch system: couplings a_ij x_j(t) undelayed, only the
/// self birth term beta_i x_i e^{-x_i} carries the configured delay.
pub fn build_nicholson(
    params: &NicholsonParams,
    rates: Vec<Rate>,
    self_delay: &DelayDistribution,
) -> Result<ModelBuild> {
    params.validate()?;
    let s = params.dim();
    if rates.len() != s {
        return Err(Error::InvalidParameter("need one rate per equation".into()));
    }
    let f = params.map();
    let mut dists = vec![vec![DelayDistribution::constant_lag(0.0); s]; s];
    for (i, row) in dists.iter_mut().enumerate() {
        row[i] = self_delay.clone();
    }
    let system = DelaySystem::new(rates, f, dists, Domain::positive_orthant(s))?;
    Ok(ModelBuild {
        kind: ModelKind::Nicholson,
        system,
        equilibrium: None, // located by the certifier
        lipschitz: None,
        planar_pair: None,
        nicholson: Some(params.clone()),
        notes: Vec::new(),
    })
}

/// The two planar monotone pairs: square roots in both equations, or
/// f1(y) = y^2 against f2(x) = x^(1/4). Cross delays only.
pub fn build_pair(
    kind: ModelKind,
    rates: Vec<Rate>,
    delays: &DelaySpec,
) -> Result<ModelBuild> {
    let (f1, f2): (ScalarFn, ScalarFn) = match kind {
        ModelKind::SqrtPair => (Arc::new(f64::sqrt), Arc::new(f64::sqrt)),
        ModelKind::PowerPair => (Arc::new(|y: f64| y * y), Arc::new(|x: f64| x.powf(0.25))),
        _ => {
            return Err(Error::InvalidParameter(
                "build_pair handles the planar pair models only".into(),
            ))
        }
    };
    if rates.len() != 2 {
        return Err(Error::InvalidParameter("planar pairs have dimension 2".into()));
    }
    let f1c = f1.clone();
    let f2c = f2.clone();
    let f = VectorMap::new(vec![
        Arc::new(move |x: &[f64]| f1c(x[1])) as Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        Arc::new(move |x: &[f64]| f2c(x[0])),
    ])
    .with_mask(vec![vec![false, true], vec![true, false]]);

    let mask = vec![vec![false, true], vec![true, false]];
    let dists = delays.materialize(&mask)?;
    let system = DelaySystem::new(rates, f, dists, Domain::positive_orthant(2))?;
    Ok(ModelBuild {
        kind,
        system,
        equilibrium: Some(vec![1.0, 1.0]),
        lipschitz: None,
        planar_pair: Some((f1, f2)),
        nicholson: None,
        notes: Vec::new(),
    })
}

/// Simulation-only patch models; their global attractivity is posed as an
/// open problem, so the builders mark the system non-certifiable and the
/// certifier refuses it.
pub enum Section5Params {
    /// Logistic growth with carrying capacities.
    Logistic { beta: Vec<f64>, capacity: Vec<f64> },
    /// Saturating growth x/(1+x^n).
    MackeyGlass { beta: Vec<f64>, exponent: f64 },
    /// Exponential-suppression growth; the coupling sits inside the
    /// exponent and is delayed along with the self term.
    Ricker { beta: Vec<f64>, capacity: Vec<f64> },
}

pub fn build_section5(
    params: &Section5Params,
    coupling: &[Vec<f64>],
    rates: Vec<Rate>,
    delay: &DelayDistribution,
) -> Result<ModelBuild> {
    let s = rates.len();
    if coupling.len() != s || coupling.iter().any(|r| r.len() != s) {
        return Err(Error::InvalidParameter("coupling matrix shape".into()));
    }
    for (i, row) in coupling.iter().enumerate() {
        if row[i] != 0.0 || row.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling row {} must be nonnegative with zero diagonal",
                i + 1
            )));
        }
    }

    let (kind, components): (ModelKind, Vec<ComponentFn>) =
        match params {
            Section5Params::Logistic { beta, capacity } => {
                check_positive(beta, s, "beta")?;
                check_positive(capacity, s, "capacity")?;
                let mut comps: Vec<ComponentFn> = Vec::new();
                for i in 0..s {
                    let (b, kcap, row) = (beta[i], capacity[i], coupling[i].clone());
                    comps.push(Arc::new(move |x: &[f64]| {
                        let mut acc = b * x[i] * (1.0 - x[i] / kcap);
                        for (j, &a) in row.iter().enumerate() {
                            if j != i {
                                acc += a * x[j];
                            }
                        }
                        acc
                    }));
                }
                (ModelKind::LogisticPatch, comps)
            }
            Section5Params::MackeyGlass { beta, exponent } => {
                check_positive(beta, s, "beta")?;
                if !(*exponent > 0.0) {
                    return Err(Error::InvalidParameter("exponent must be positive".into()));
                }
                let n = *exponent;
                let mut comps: Vec<ComponentFn> = Vec::new();
                for i in 0..s {
                    let (b, row) = (beta[i], coupling[i].clone());
                    comps.push(Arc::new(move |x: &[f64]| {
                        let mut acc = b * x[i] / (1.0 + x[i].powf(n));
                        for (j, &a) in row.iter().enumerate() {
                            if j != i {
                                acc += a * x[j];
                            }
                        }
                        acc
                    }));
                }
                (ModelKind::MackeyGlassPatch, comps)
            }
            Section5Params::Ricker { beta, capacity } => {
                check_positive(beta, s, "beta")?;
                check_positive(capacity, s, "capacity")?;
                let mut comps: Vec<ComponentFn> = Vec::new();
                for i in 0..s {
                    let (b, kcap, row) = (beta[i], capacity[i], coupling[i].clone());
                    comps.push(Arc::new(move |x: &[f64]| {
                        let mut expo = kcap - x[i];
                        for (j, &a) in row.iter().enumerate() {
                            if j != i {
                                expo -= a * x[j];
                            }
                        }
                        b * x[i] * expo.exp()
                    }));
                }
                (ModelKind::RickerPatch, comps)
            }
        };

    let mut mask = vec![vec![false; s]; s];
    for i in 0..s {
        for j in 0..s {
            mask[i][j] = i == j || coupling[i][j] != 0.0;
        }
    }
    let f = VectorMap::new(components).with_mask(mask.clone());

    // logistic / saturating: self term delayed, couplings instantaneous;
    // exponential-suppression: the whole integrand is delayed, so every
    // active coordinate of the row draws the configured distribution
    // (coordinates draw independently under the iterated-measure form)
    let mut dists = vec![vec![DelayDistribution::constant_lag(0.0); s]; s];
    match kind {
        ModelKind::RickerPatch => {
            for i in 0..s {
                for j in 0..s {
                    if mask[i][j] {
                        dists[i][j] = delay.clone();
                    }
                }
            }
        }
        _ => {
            for (i, row) in dists.iter_mut().enumerate() {
                row[i] = delay.clone();
            }
        }
    }

    let system = DelaySystem::new(rates, f, dists, Domain::positive_orthant(s))?.non_certifiable();
    Ok(ModelBuild {
        kind,
        system,
        equilibrium: None,
        lipschitz: None,
        planar_pair: None,
        nicholson: None,
        notes: vec!["attractivity not certified: posed as an open problem".into()],
    })
}

fn check_positive(v: &[f64], s: usize, name: &str) -> Result<()> {
    if v.len() != s {
        return Err(Error::InvalidParameter(format!("{name} must have length {s}")));
    }
    if v.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidParameter(format!("{name} entries must be positive")));
    }
    Ok(())
}
