//! Delay distributions: normalized Stieltjes measures in the delayed
//! argument over the window (h(t), t].

use crate::error::{Error, Result};
use crate::numeric::quad;
use std::fmt;
use std::sync::Arc;

/// A delayed-argument map tau |-> h(t) <= t.
#[derive(Clone)]
pub enum Lag {
    /// h(t) = t - tau, tau >= 0.
    Constant(f64),
    /// h(t) = rho * t, rho in (0, 1); admissible for t >= 0.
    Proportional(f64),
    /// User-supplied measurable h(t) <= t, treated as a black box.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Lag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lag::Constant(tau) => write!(f, "Constant({tau})"),
            Lag::Proportional(rho) => write!(f, "Proportional({rho})"),
            Lag::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Lag {
    /// The delayed argument h(t).
    pub fn delayed_time(&self, t: f64) -> f64 {
        match self {
            Lag::Constant(tau) => t - tau,
            Lag::Proportional(rho) => rho * t,
            Lag::Custom(h) => h(t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Lag::Constant(tau) => {
                if !tau.is_finite() || *tau < 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "constant lag must be finite and >= 0, got {tau}"
                    )));
                }
            }
            Lag::Proportional(rho) => {
                if !(*rho > 0.0 && *rho < 1.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "proportional lag needs rho in (0,1), got {rho}"
                    )));
                }
            }
            Lag::Custom(_) => {}
        }
        Ok(())
    }
}

/// Density of an absolutely continuous delay measure.
#[derive(Clone)]
pub enum KernelDensity {
    /// K(t, tau) = 1 / (t - h(t)) on [h(t), t].
    Uniform,
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for KernelDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelDensity::Uniform => write!(f, "Uniform"),
            KernelDensity::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Per-evaluation absolute tolerance for kernel quadrature.
pub(crate) const KERNEL_QUAD_TOL: f64 = 1e-10;

/// A normalized measure in the delayed argument.
///
/// `PointMass`, `Mixture`, and `StepCdf` are purely atomic and evaluate
/// exactly; `Kernel` integrates a density by panel-aligned quadrature.
#[derive(Debug, Clone)]
pub enum DelayDistribution {
    PointMass {
        lag: Lag,
    },
    Mixture {
        atoms: Vec<(f64, Lag)>,
    },
    /// Left-continuous non-decreasing CDF with finitely many jumps; jump m
    /// sits at lag `lags[m]` behind t with size `sizes[m]`.
    StepCdf {
        lags: Vec<f64>,
        sizes: Vec<f64>,
    },
    Kernel {
        lower: Lag,
        density: KernelDensity,
    },
}

impl DelayDistribution {
    pub fn point(lag: Lag) -> Self {
        DelayDistribution::PointMass { lag }
    }

    pub fn constant_lag(tau: f64) -> Self {
        DelayDistribution::PointMass {
            lag: Lag::Constant(tau),
        }
    }

    pub fn proportional(rho: f64) -> Self {
        DelayDistribution::PointMass {
            lag: Lag::Proportional(rho),
        }
    }

    pub fn mixture(atoms: Vec<(f64, Lag)>) -> Self {
        DelayDistribution::Mixture { atoms }
    }

    pub fn step_cdf(jumps: Vec<(f64, f64)>) -> Self {
        let (lags, sizes) = jumps.into_iter().unzip();
        DelayDistribution::StepCdf { lags, sizes }
    }

    /// Uniform density on [t - width, t].
    pub fn uniform_kernel(width: f64) -> Self {
        DelayDistribution::Kernel {
            lower: Lag::Constant(width),
            density: KernelDensity::Uniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DelayDistribution::PointMass { lag } => lag.validate(),
            DelayDistribution::Mixture { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidDistribution("empty mixture".into()));
                }
                let mut total = 0.0;
                for (w, lag) in atoms {
                    if !(*w > 0.0) {
                        return Err(Error::InvalidDistribution(format!(
                            "mixture weight must be positive, got {w}"
                        )));
                    }
                    lag.validate()?;
                    total += w;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidDistribution(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
            DelayDistribution::StepCdf { lags, sizes } => {
                if lags.is_empty() || lags.len() != sizes.len() {
                    return Err(Error::InvalidDistribution(
                        "step CDF needs matching, non-empty jump lists".into(),
                    ));
                }
                let mut total = 0.0;
                for (&l, &s) in lags.iter().zip(sizes) {
                    if !l.is_finite() || l < 0.0 {
                        return Err(Error::InvalidDistribution(format!(
                            "jump lag must be finite and >= 0, got {l}"
                        )));
                    }
                    if !(s > 0.0) {
                        return Err(Error::InvalidDistribution(format!(
                            "jump size must be positive, got {s}"
                        )));
                    }
                    total += s;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidDistribution(format!(
                        "jump sizes sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
            DelayDistribution::Kernel { lower, .. } => {
                lower.validate()?;
                if let Lag::Constant(w) = lower {
                    if *w <= 0.0 {
                        return Err(Error::InvalidDistribution(
                            "kernel window must have positive width".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Infimum h(t) of the support at time t.
    pub fn earliest_argument(&self, t: f64) -> f64 {
        match self {
            DelayDistribution::PointMass { lag } => lag.delayed_time(t),
            DelayDistribution::Mixture { atoms } => atoms
                .iter()
                .map(|(_, lag)| lag.delayed_time(t))
                .fold(f64::INFINITY, f64::min),
            DelayDistribution::StepCdf { lags, .. } => {
                let max_lag = lags.iter().cloned().fold(0.0, f64::max);
                t - max_lag
            }
            DelayDistribution::Kernel { lower, .. } => lower.delayed_time(t),
        }
    }

    /// Atoms (weight, time) at time t for the discrete variants.
    pub fn atoms_at(&self, t: f64) -> Option<Vec<(f64, f64)>> {
        match self {
            DelayDistribution::PointMass { lag } => Some(vec![(1.0, lag.delayed_time(t))]),
            DelayDistribution::Mixture { atoms } => Some(
                atoms
                    .iter()
                    .map(|(w, lag)| (*w, lag.delayed_time(t)))
                    .collect(),
            ),
            DelayDistribution::StepCdf { lags, sizes } => Some(
                lags.iter()
                    .zip(sizes)
                    .map(|(&l, &s)| (s, t - l))
                    .collect(),
            ),
            DelayDistribution::Kernel { .. } => None,
        }
    }

    pub fn is_kernel(&self) -> bool {
        matches!(self, DelayDistribution::Kernel { .. })
    }

    /// Kernel density value at (t, tau); 0 for tau outside the window.
    pub(crate) fn kernel_density_at(&self, t: f64, tau: f64) -> Result<f64> {
        let DelayDistribution::Kernel { lower, density } = self else {
            return Err(Error::InvalidDistribution(
                "kernel density requested from an atomic distribution".into(),
            ));
        };
        let a = lower.delayed_time(t);
        if tau < a || tau > t {
            return Ok(0.0);
        }
        let v = match density {
            KernelDensity::Uniform => {
                let width = t - a;
                if width <= 0.0 {
                    return Err(Error::InvalidDistribution(
                        "kernel window has nonpositive width".into(),
                    ));
                }
                1.0 / width
            }
            KernelDensity::Custom(k) => k(t, tau),
        };
        if v < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "kernel density is negative at (t={t}, tau={tau}): {v}"
            )));
        }
        Ok(v)
    }

    /// Stieltjes measure of (h(t), t]: exactly 1 for atomic variants,
    /// quadrature of the density for kernels.
    pub fn total_mass(&self, t: f64) -> Result<f64> {
        match self {
            DelayDistribution::PointMass { .. } => Ok(1.0),
            DelayDistribution::Mixture { atoms } => Ok(atoms.iter().map(|(w, _)| w).sum()),
            DelayDistribution::StepCdf { sizes, .. } => Ok(sizes.iter().sum()),
            DelayDistribution::Kernel { lower, .. } => {
                let a = lower.delayed_time(t);
                let mut bad_density: Option<Error> = None;
                let value = quad::integrate(
                    |tau| match self.kernel_density_at(t, tau) {
                        Ok(k) => k,
                        Err(e) => {
                            bad_density.get_or_insert(e);
                            0.0
                        }
                    },
                    a,
                    t,
                    &[],
                    KERNEL_QUAD_TOL,
                );
                if let Some(e) = bad_density {
                    return Err(e);
                }
                value
            }
        }
    }

    /// The delayed functional: integral of u(tau) d r(t, tau) over (h(t), t].
    ///
    /// For a point mass at tau = t this is u(t), following the convention
    /// that an atom sitting at the right endpoint still contributes.
    /// `knots` lists times where u loses smoothness (interpolant step
    /// boundaries); only kernels use them.
    pub fn delayed_functional<F: FnMut(f64) -> f64>(
        &self,
        t: f64,
        mut u: F,
        knots: &[f64],
    ) -> Result<f64> {
        if let Some(atoms) = self.atoms_at(t) {
            return Ok(atoms.iter().map(|&(w, tau)| w * u(tau)).sum());
        }
        let DelayDistribution::Kernel { lower, .. } = self else {
            unreachable!()
        };
        let a = lower.delayed_time(t);
        let mut bad_density: Option<Error> = None;
        let value = quad::integrate(
            |tau| match self.kernel_density_at(t, tau) {
                Ok(k) => k * u(tau),
                Err(e) => {
                    bad_density.get_or_insert(e);
                    0.0
                }
            },
            a,
            t,
            knots,
            KERNEL_QUAD_TOL,
        );
        if let Some(e) = bad_density {
            return Err(e);
        }
        value
    }
}
