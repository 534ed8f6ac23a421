//! Nested certificate boxes and the sampled image check.

use crate::error::{Error, Result};
use crate::model::{Domain, VectorMap};
use crate::numeric::rng::Rng;
use crate::par;
use serde::Serialize;

/// Closed axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidParameter(
                "box bounds must satisfy lo <= hi per axis".into(),
            ));
        }
        Ok(BoxRegion { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(j, &v)| v >= self.lo[j] && v <= self.hi[j])
    }

    pub fn strictly_contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(j, &v)| v > self.lo[j] && v < self.hi[j])
    }

    /// self is a subset of the interior of `outer`.
    pub fn inside_interior_of(&self, outer: &BoxRegion) -> bool {
        (0..self.dim()).all(|j| self.lo[j] > outer.lo[j] && self.hi[j] < outer.hi[j])
    }

    /// Signed distance of x outside the box: positive when outside.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lo[j] - v).max(v - self.hi[j]);
        }
        worst
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let s = self.dim();
        (0..(1usize << s))
            .map(|mask| {
                (0..s)
                    .map(|j| {
                        if mask & (1 << j) == 0 {
                            self.lo[j]
                        } else {
                            self.hi[j]
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// The n-th certificate box around the equilibrium: half-widths
/// alpha^(n-1) * c * xi per axis, strictly nested and shrinking to the
/// equilibrium. n is 1-based; n = 1 is the base box, which must lie in the
/// domain under the boundary rule c <= distance-to-boundary / xi per axis.
pub fn box_sequence(
    equilibrium: &[f64],
    c: f64,
    xi: &[f64],
    alpha: f64,
    n: usize,
    domain: &Domain,
) -> Result<BoxRegion> {
    if n == 0 {
        return Err(Error::InvalidParameter("box index n starts at 1".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    if !(0.0..1.0).contains(&alpha) && n > 1 {
        return Err(Error::InvalidParameter(format!(
            "contraction rate must lie in [0,1), got {alpha}"
        )));
    }
    let c_max = max_admissible_c(equilibrium, xi, domain);
    if c > c_max * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "c = {c} exceeds the boundary rule maximum {c_max}"
        )));
    }
    let shrink = alpha.powi(n as i32 - 1);
    let lo = equilibrium
        .iter()
        .zip(xi)
        .map(|(z, x)| z - shrink * c * x)
        .collect();
    let hi = equilibrium
        .iter()
        .zip(xi)
        .map(|(z, x)| z + shrink * c * x)
        .collect();
    BoxRegion::new(lo, hi)
}

/// Largest c keeping the base box inside the domain:
/// min over axes of distance-to-boundary / xi_j (infinite for an unbounded
/// domain).
pub fn max_admissible_c(equilibrium: &[f64], xi: &[f64], domain: &Domain) -> f64 {
    let mut c = f64::INFINITY;
    for j in 0..equilibrium.len() {
        let (lo, hi) = domain.axis(j);
        if hi.is_finite() {
            c = c.min((hi - equilibrium[j]) / xi[j]);
        }
        if lo.is_finite() {
            c = c.min((equilibrium[j] - lo) / xi[j]);
        }
    }
    c
}

/// Sampled check that F maps `inner` into `outer`: a Latin hypercube of
/// `samples` points plus all 2^s corners of `inner`. This is evidence, not
/// proof; the analytic guarantee comes from the contraction matrix.
///
/// Returns (all images inside, worst signed violation). Contraction maps
/// can carry inner corners exactly onto the outer boundary, so violations
/// below a relative rounding slack still count as inside.
pub fn verify_box_mapping(
    f: &VectorMap,
    inner: &BoxRegion,
    outer: &BoxRegion,
    samples: usize,
    seed: u64,
) -> Result<(bool, f64)> {
    let s = inner.dim();
    let mut rng = Rng::new(seed);

    let mut points = inner.corners();
    if samples > 0 {
        // Latin hypercube: one stratum per sample per axis
        let mut strata: Vec<Vec<usize>> = Vec::with_capacity(s);
        for _ in 0..s {
            let mut order: Vec<usize> = (0..samples).collect();
            rng.shuffle(&mut order);
            strata.push(order);
        }
        let jitter: Vec<Vec<f64>> = (0..samples)
            .map(|_| (0..s).map(|_| rng.next_f64()).collect())
            .collect();
        for k in 0..samples {
            let point: Vec<f64> = (0..s)
                .map(|j| {
                    let cell = (strata[j][k] as f64 + jitter[k][j]) / samples as f64;
                    inner.lo[j] + cell * (inner.hi[j] - inner.lo[j])
                })
                .collect();
            points.push(point);
        }
    }

    let outcomes = par::map_vec(points, |p| {
        let image = f.try_eval(&p);
        (p, image.map(|img| outer.violation(&img)))
    });

    let mut worst = f64::NEG_INFINITY;
    for (p, outcome) in outcomes {
        match outcome {
            Ok(v) => worst = worst.max(v),
            Err(e) => {
                return Err(Error::EvalFailure {
                    point: p,
                    reason: e.to_string(),
                })
            }
        }
    }
    let scale = outer
        .lo
        .iter()
        .chain(&outer.hi)
        .fold(1.0f64, |m, v| m.max(v.abs()));
    Ok((worst <= 1e-9 * scale, worst))
}
