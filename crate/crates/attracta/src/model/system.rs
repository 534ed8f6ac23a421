//! The delay system: per-equation rates, nonlinearity, the s x s matrix of
//! delay distributions, and the admissibility checks.

use super::distribution::DelayDistribution;
use super::history::HistoryFunction;
use crate::error::{Error, Result};
use crate::numeric::expr::Expr;
use std::fmt;
use std::sync::Arc;

/// Nonnegative rate g_i(t) with divergent integral over [0, inf).
#[derive(Clone)]
pub enum Rate {
    Constant(f64),
    /// c * (1.1 + sin t); bounded away from zero, exercises non-autonomy.
    Oscillatory { scale: f64 },
    Expr(Arc<Expr>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Constant(c) => write!(f, "Constant({c})"),
            Rate::Oscillatory { scale } => write!(f, "Oscillatory({scale})"),
            Rate::Expr(_) => write!(f, "Expr(..)"),
            Rate::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Rate {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Rate::Constant(c) => *c,
            Rate::Oscillatory { scale } => scale * (1.1 + t.sin()),
            Rate::Expr(e) => e.eval(&[t]),
            Rate::Custom(g) => g(t),
        }
    }

    /// Structural nonnegativity/divergence check where possible; sampled
    /// nonnegativity for expression and callback rates.
    fn validate(&self, i: usize) -> Result<()> {
        match self {
            Rate::Constant(c) => {
                if !(*c > 0.0) {
                    return Err(Error::InvalidSystem(format!(
                        "rate g_{} must be positive, got {c}",
                        i + 1
                    )));
                }
            }
            Rate::Oscillatory { scale } => {
                if !(*scale > 0.0) {
                    return Err(Error::InvalidSystem(format!(
                        "oscillatory rate scale for g_{} must be positive",
                        i + 1
                    )));
                }
            }
            Rate::Expr(_) | Rate::Custom(_) => {
                for k in 0..64 {
                    let t = 0.37 * k as f64;
                    let v = self.eval(t);
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::InvalidSystem(format!(
                            "rate g_{} evaluates to {v} at t = {t}",
                            i + 1,
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Shared closure type of one nonlinearity component f_i.
pub type ComponentFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The map F = (f_1, ..., f_s) together with a per-pair dependency mask:
/// `mask[i][j]` says whether f_i actually reads x_j. Coordinates a component
/// ignores are skipped when iterating the delay integrals.
#[derive(Clone)]
pub struct VectorMap {
    dim: usize,
    components: Vec<ComponentFn>,
    mask: Vec<Vec<bool>>,
}

impl fmt::Debug for VectorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorMap {{ dim: {}, mask: {:?} }}", self.dim, self.mask)
    }
}

impl VectorMap {
    pub fn new(components: Vec<ComponentFn>) -> Self {
        let dim = components.len();
        VectorMap {
            dim,
            components,
            mask: vec![vec![true; dim]; dim],
        }
    }

    pub fn with_mask(mut self, mask: Vec<Vec<bool>>) -> Self {
        assert_eq!(mask.len(), self.dim);
        self.mask = mask;
        self
    }

    pub fn from_exprs(exprs: Vec<Expr>, dim: usize) -> Self {
        let mut mask = vec![vec![false; dim]; dim];
        let components = exprs
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                e.used_vars(&mut mask[i]);
                let e = Arc::new(e);
                Arc::new(move |x: &[f64]| e.eval(x)) as ComponentFn
            })
            .collect();
        VectorMap {
            dim,
            components,
            mask,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depends_on(&self, i: usize, j: usize) -> bool {
        self.mask[i][j]
    }

    pub fn component(&self, i: usize, x: &[f64]) -> f64 {
        (self.components[i])(x)
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (self.components[i])(x);
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    /// Evaluation with finiteness check.
    pub fn try_eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let out = self.eval(x);
        if let Some(v) = out.iter().find(|v| !v.is_finite()) {
            return Err(Error::EvalFailure {
                point: x.to_vec(),
                reason: format!("non-finite component value {v}"),
            });
        }
        Ok(out)
    }
}

/// Open box (a_1, b_1) x ... x (a_s, b_s); bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    axes: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(axes: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(lo, hi)) in axes.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::InvalidParameter(format!(
                    "domain axis {} has empty interval ({lo}, {hi})",
                    i + 1
                )));
            }
        }
        Ok(Domain { axes })
    }

    pub fn unbounded(dim: usize) -> Self {
        Domain {
            axes: vec![(f64::NEG_INFINITY, f64::INFINITY); dim],
        }
    }

    pub fn positive_orthant(dim: usize) -> Self {
        Domain {
            axes: vec![(0.0, f64::INFINITY); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> (f64, f64) {
        self.axes[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.axes)
            .all(|(&v, &(lo, hi))| v > lo && v < hi)
    }

    pub fn contains_closure(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.axes)
            .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Index of the first coordinate violating the open box, if any.
    pub fn first_violation(&self, x: &[f64]) -> Option<usize> {
        x.iter()
            .zip(&self.axes)
            .position(|(&v, &(lo, hi))| !(v > lo && v < hi))
    }
}

/// The full system: dX/dt = G(t) [ (distributed evaluation of F) - X ].
#[derive(Debug, Clone)]
pub struct DelaySystem {
    dim: usize,
    rates: Vec<Rate>,
    nonlinearity: VectorMap,
    distributions: Vec<Vec<DelayDistribution>>,
    domain: Domain,
    certifiable: bool,
}

impl DelaySystem {
    pub fn new(
        rates: Vec<Rate>,
        nonlinearity: VectorMap,
        distributions: Vec<Vec<DelayDistribution>>,
        domain: Domain,
    ) -> Result<Self> {
        let dim = nonlinearity.dim();
        if rates.len() != dim || distributions.len() != dim || domain.dim() != dim {
            return Err(Error::InvalidSystem(format!(
                "dimension mismatch: {} rates, {} nonlinearity components, {} distribution rows, {} domain axes",
                rates.len(),
                dim,
                distributions.len(),
                domain.dim()
            )));
        }
        for row in &distributions {
            if row.len() != dim {
                return Err(Error::InvalidSystem(
                    "distribution matrix must be square".into(),
                ));
            }
        }
        let sys = DelaySystem {
            dim,
            rates,
            nonlinearity,
            distributions,
            domain,
            certifiable: true,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// Marks the system as posed-only: the certifier refuses it.
    pub fn non_certifiable(mut self) -> Self {
        self.certifiable = false;
        self
    }

    pub fn is_certifiable(&self) -> bool {
        self.certifiable
    }

    fn validate(&self) -> Result<()> {
        for (i, r) in self.rates.iter().enumerate() {
            r.validate(i)?;
        }
        for row in &self.distributions {
            for d in row {
                d.validate()?;
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rate(&self, i: usize, t: f64) -> f64 {
        self.rates[i].eval(t)
    }

    pub fn rates(&self) -> &[Rate] {
        &self.rates
    }

    pub fn nonlinearity(&self) -> &VectorMap {
        &self.nonlinearity
    }

    pub fn distribution(&self, i: usize, j: usize) -> &DelayDistribution {
        &self.distributions[i][j]
    }

    pub fn distributions(&self) -> &Vec<Vec<DelayDistribution>> {
        &self.distributions
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Earliest delayed argument over all active pairs at time t; the
    /// integrator's history window must reach back this far.
    pub fn earliest_argument(&self, t: f64) -> f64 {
        let mut earliest = t;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if self.nonlinearity.depends_on(i, j) {
                    earliest = earliest.min(self.distributions[i][j].earliest_argument(t));
                }
            }
        }
        earliest
    }

    /// Check an initial history against the system: dimension, boundedness,
    /// values inside the closure of the domain.
    pub fn check_history(&self, history: &HistoryFunction) -> Result<()> {
        if history.dim() != self.dim {
            return Err(Error::InvalidSystem(format!(
                "history dimension {} does not match system dimension {}",
                history.dim(),
                self.dim
            )));
        }
        let t0 = history.anchor_time();
        let t_min = history.t_min();
        let samples = 64;
        for k in 0..=samples {
            let t = t_min + (t0 - t_min) * k as f64 / samples as f64;
            let v = history.eval(t);
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidSystem(format!(
                    "history is non-finite at t = {t}"
                )));
            }
            if !self.domain.contains_closure(&v) {
                return Err(Error::InvalidSystem(format!(
                    "history leaves the domain closure at t = {t}: {v:?}"
                )));
            }
        }
        // proportional lags only make sense from t0 >= 0
        let has_proportional = self.distributions.iter().flatten().any(|d| {
            matches!(
                d,
                DelayDistribution::PointMass {
                    lag: super::distribution::Lag::Proportional(_)
                }
            ) || matches!(d, DelayDistribution::Kernel { lower: super::distribution::Lag::Proportional(_), .. })
        });
        if has_proportional && t0 < 0.0 {
            return Err(Error::InvalidSystem(
                "proportional lags require the anchor time t0 >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Lag;

    fn scalar_map(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> VectorMap {
        VectorMap::new(vec![Arc::new(move |x: &[f64]| f(x[0]))])
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let sys = DelaySystem::new(
            vec![Rate::Constant(1.0), Rate::Constant(1.0)],
            scalar_map(|x| x),
            vec![vec![DelayDistribution::constant_lag(1.0)]],
            Domain::unbounded(1),
        );
        assert!(sys.is_err());
    }

    #[test]
    fn nonpositive_rate_rejected() {
        let sys = DelaySystem::new(
            vec![Rate::Constant(0.0)],
            scalar_map(|x| x),
            vec![vec![DelayDistribution::constant_lag(1.0)]],
            Domain::unbounded(1),
        );
        assert!(sys.is_err());
    }

    #[test]
    fn earliest_argument_respects_mask() {
        let f = VectorMap::new(vec![
            Arc::new(|x: &[f64]| x[1]) as Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
            Arc::new(|x: &[f64]| x[0]),
        ])
        .with_mask(vec![vec![false, true], vec![true, false]]);
        let sys = DelaySystem::new(
            vec![Rate::Constant(1.0), Rate::Constant(1.0)],
            f,
            vec![
                vec![
                    DelayDistribution::constant_lag(100.0), // masked out
                    DelayDistribution::constant_lag(1.0),
                ],
                vec![
                    DelayDistribution::constant_lag(2.0),
                    DelayDistribution::constant_lag(50.0), // masked out
                ],
            ],
            Domain::unbounded(2),
        )
        .unwrap();
        assert_eq!(sys.earliest_argument(10.0), 8.0);
    }

    #[test]
    fn history_outside_domain_rejected() {
        let sys = DelaySystem::new(
            vec![Rate::Constant(1.0)],
            scalar_map(|x| x),
            vec![vec![DelayDistribution::constant_lag(1.0)]],
            Domain::positive_orthant(1),
        )
        .unwrap();
        let h = HistoryFunction::constant(0.0, vec![-1.0]);
        assert!(sys.check_history(&h).is_err());
    }

    #[test]
    fn proportional_lag_requires_nonnegative_anchor() {
        let sys = DelaySystem::new(
            vec![Rate::Constant(1.0)],
            scalar_map(|x| x),
            vec![vec![DelayDistribution::point(Lag::Proportional(0.5))]],
            Domain::unbounded(1),
        )
        .unwrap();
        let h = HistoryFunction::constant(-1.0, vec![0.0]);
        assert!(sys.check_history(&h).is_err());
    }
}
