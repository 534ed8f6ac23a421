//! Nicholson-type certificates: per-equation contraction bounds for the
//! birth term b*x*exp(-x) on the post-transient region, fed into the
//! M-matrix test.

use super::mmatrix::{contraction_rate, m_matrix_report};
use super::{
    box_sequence, find_equilibrium, max_admissible_c, verify_box_mapping, Certificate, Method,
    ProductTest, SamplingEvidence, Verdict,
};
use crate::error::{Error, Result};
use crate::model::{ComponentFn, Domain, VectorMap};
use crate::numeric::linalg::SquareMatrix;
use std::f64::consts::E;
use std::sync::Arc;

/// Parameters of the patch-structured system
/// x_i' = g_i(t) [ sum_{j != i} a_ij x_j + (delayed) beta_i x_i e^{-x_i} - x_i ].
#[derive(Debug, Clone)]
pub struct NicholsonParams {
    pub beta: Vec<f64>,
    /// Coupling matrix, zero diagonal, entrywise nonnegative.
    pub coupling: Vec<Vec<f64>>,
}

impl NicholsonParams {
    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.beta.len();
        if self.coupling.len() != s || self.coupling.iter().any(|r| r.len() != s) {
            return Err(Error::InvalidParameter(
                "coupling matrix shape must match beta".into(),
            ));
        }
        for (i, row) in self.coupling.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "coupling diagonal must be zero (equation {})",
                    i + 1
                )));
            }
            if row.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "coupling row {} has a negative entry",
                    i + 1
                )));
            }
        }
        for (i, &b) in self.beta.iter().enumerate() {
            if !(b > 1.0) {
                return Err(Error::OutOfRange(format!(
                    "equation {}: beta = {b} must exceed 1 for a positive equilibrium",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.coupling[i].iter().sum()
    }

    /// The fixed-point map f_i(x) = sum_{j != i} a_ij x_j + beta_i x_i e^{-x_i}.
    pub fn map(&self) -> VectorMap {
        let s = self.dim();
        let mut mask = vec![vec![false; s]; s];
        let mut components: Vec<ComponentFn> = Vec::new();
        for i in 0..s {
            let beta = self.beta[i];
            let row = self.coupling[i].clone();
            for (j, m) in mask[i].iter_mut().enumerate() {
                *m = j == i || row[j] != 0.0;
            }
            components.push(Arc::new(move |x: &[f64]| {
                let mut acc = beta * x[i] * (-x[i]).exp();
                for (j, &a) in row.iter().enumerate() {
                    if j != i {
                        acc += a * x[j];
                    }
                }
                acc
            }));
        }
        VectorMap::new(components).with_mask(mask)
    }
}

fn check_beta_range(beta: f64, i: usize) -> Result<()> {
    if !(beta > 1.0 && beta < E * E) {
        return Err(Error::OutOfRange(format!(
            "equation {}: beta = {beta} outside (1, e^2)",
            i + 1
        )));
    }
    Ok(())
}

/// Contraction bound of the derivative |beta(1-x)e^{-x}| on the
/// post-transient region [x0, inf):
/// max(1 - ln(beta), beta/e^2) for beta in (1, e], beta/e^2 above.
pub fn nicholson_alpha(beta: f64) -> Result<f64> {
    check_beta_range(beta, 0)?;
    let upper = beta * (-2.0f64).exp();
    if beta <= E {
        Ok((1.0 - beta.ln()).max(upper))
    } else {
        Ok(upper)
    }
}

/// Asymptotic lower bound x0 on every positive solution component:
/// ln(beta) for beta in (1, e), (beta^2/e) e^{-beta/e} for beta in [e, e^2).
pub fn nicholson_lower_bound(beta: f64) -> Result<f64> {
    check_beta_range(beta, 0)?;
    if beta < E {
        Ok(beta.ln())
    } else {
        Ok(beta * beta / E * (-beta / E).exp())
    }
}

/// The equilibrium-existence threshold gamma = beta / (1 - sum of the
/// off-diagonal coupling row); gamma > 1 guarantees a positive equilibrium.
pub fn nicholson_gamma(beta: f64, coupling_row: &[f64]) -> Result<f64> {
    let row_sum: f64 = coupling_row.iter().sum();
    if row_sum >= 1.0 {
        return Err(Error::OutOfRange(format!(
            "coupling row sums to {row_sum} >= 1; gamma undefined"
        )));
    }
    Ok(beta / (1.0 - row_sum))
}

/// Certify the Nicholson-type system: L has the couplings off the diagonal
/// and the per-equation contraction bound alpha_i on it; Certified iff
/// I - L is an M-matrix. For s = 2 the product test
/// a12*a21 < (1-alpha1)(1-alpha2) and the literature comparison bounds
/// a12 < 1 - beta1/e^2, a21 < 1 - beta2/e^2 are reported alongside.
pub fn certify_nicholson(params: &NicholsonParams) -> Result<Certificate> {
    certify_nicholson_seeded(params, 0x5eed)
}

pub fn certify_nicholson_seeded(params: &NicholsonParams, seed: u64) -> Result<Certificate> {
    params.validate()?;
    let s = params.dim();
    for (i, &b) in params.beta.iter().enumerate() {
        check_beta_range(b, i)?;
    }
    let mut gamma = Vec::with_capacity(s);
    for i in 0..s {
        let row_sum = params.row_sum(i);
        if row_sum >= 1.0 {
            return Err(Error::OutOfRange(format!(
                "equation {}: coupling row sums to {row_sum} >= 1",
                i + 1
            )));
        }
        gamma.push(params.beta[i] / (1.0 - row_sum));
    }

    let alpha_i: Vec<f64> = params
        .beta
        .iter()
        .map(|&b| nicholson_alpha(b))
        .collect::<Result<_>>()?;
    let x_lower: Vec<f64> = params
        .beta
        .iter()
        .map(|&b| nicholson_lower_bound(b))
        .collect::<Result<_>>()?;

    let mut l = SquareMatrix::zeros(s);
    for i in 0..s {
        for j in 0..s {
            l[(i, j)] = if i == j {
                alpha_i[i]
            } else {
                params.coupling[i][j]
            };
        }
    }

    let map = params.map();
    let guess: Vec<f64> = params.beta.iter().map(|&b| b.ln().max(1.0)).collect();
    let equilibrium = find_equilibrium(&map, &Domain::positive_orthant(s), &guess)?;

    let report = m_matrix_report(&l.identity_minus())?;
    let verdict = if report.is_m_matrix {
        Verdict::Certified
    } else if report.marginal {
        Verdict::Inconclusive
    } else {
        Verdict::NotCertified
    };

    let mut cert = Certificate::bare(verdict, Method::Nicholson, equilibrium.clone());
    cert.gamma = Some(gamma.clone());
    cert.alpha_i = Some(alpha_i.clone());
    cert.x_lower = Some(x_lower.clone());
    cert.log.push(format!(
        "reduced matrix spectral radius {:.12}",
        report.rho
    ));
    for (i, g) in gamma.iter().enumerate() {
        if *g <= 1.0 {
            cert.log.push(format!(
                "warning: gamma_{} = {g} <= 1, positive equilibrium not guaranteed",
                i + 1
            ));
        }
    }

    if s == 2 {
        let lhs = params.coupling[0][1] * params.coupling[1][0];
        let rhs = (1.0 - alpha_i[0]) * (1.0 - alpha_i[1]);
        cert.corollary5 = Some(ProductTest {
            lhs,
            rhs,
            pass: lhs < rhs,
        });
        let cmp = params.coupling[0][1] < 1.0 - params.beta[0] * (-2.0f64).exp()
            && params.coupling[1][0] < 1.0 - params.beta[1] * (-2.0f64).exp();
        cert.comparison_abs_nichol2 = Some(cmp);
    }

    if let (Some(xi), true) = (report.xi.clone(), report.is_m_matrix) {
        let alpha = contraction_rate(&l, &xi);
        // certification domain: strictly above the transient floor
        let floor: Vec<f64> = x_lower.iter().map(|&x| x * (1.0 - 1e-9)).collect();
        let domain = Domain::new(
            floor.iter().map(|&f| (f, f64::INFINITY)).collect(),
        )?;
        let c_max = max_admissible_c(&equilibrium, &xi, &domain);
        let c = if c_max.is_finite() { 0.9 * c_max } else { 1.0 };
        if c > 0.0 {
            let mut boxes = Vec::new();
            for n in 1..=8 {
                boxes.push(box_sequence(&equilibrium, c, &xi, alpha, n, &domain)?);
            }
            let mut worst = f64::NEG_INFINITY;
            let mut all_ok = true;
            for n in 0..boxes.len() - 1 {
                let (ok, w) =
                    verify_box_mapping(&map, &boxes[n], &boxes[n + 1], 1000, seed ^ n as u64)?;
                all_ok &= ok;
                worst = worst.max(w);
            }
            cert.sampling = Some(SamplingEvidence {
                seed,
                samples: 1000,
                worst_margin: worst,
            });
            if !all_ok {
                cert.log.push(
                    "warning: sampled box images exceeded their target boxes".into(),
                );
            }
            cert.boxes = Some(boxes);
            cert.c = Some(c);
        } else {
            cert.log.push(format!(
                "equilibrium sits below the transient floor; no box sequence (c_max = {c_max})"
            ));
        }
        cert.alpha = Some(alpha);
        cert.xi = Some(xi);
    }

    Ok(cert)
}
