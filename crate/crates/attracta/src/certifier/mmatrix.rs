//! Non-singular M-matrix test with three mutually checking routes.

use crate::error::{Error, Result};
use crate::numeric::linalg::{spectral_radius, Lu, SquareMatrix};

/// Verdicts within a margin of 1e-9 around rho = 1 are refused: the
/// criterion is strict and floating point needs room.
pub const RHO_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MMatrixReport {
    /// Off-diagonal entries all <= 0 (sign pattern precondition).
    pub sign_pattern_ok: bool,
    /// Diagonal all > 0 (necessary for a non-singular M-matrix).
    pub diagonal_positive: bool,
    /// Spectral radius of the nonnegative part I - A (after a positive
    /// diagonal rescale when some a_ii > 1).
    pub rho: f64,
    /// Inverse, when the LU solve succeeds.
    pub inverse: Option<SquareMatrix>,
    /// Route (i): inverse exists and is entrywise nonnegative.
    pub inverse_nonnegative: bool,
    /// Witness xi = A^{ -1} * 1 when positive.
    pub xi: Option<Vec<f64>>,
    /// Route (iii): strict witness inequalities xi_i a_ii > sum_j xi_j |a_ij|.
    pub witness_ok: bool,
    /// rho landed inside the strictness margin around 1.
    pub marginal: bool,
    /// 1-norm condition estimate, when the inverse exists.
    pub condition: Option<f64>,
    pub is_m_matrix: bool,
    pub note: Option<String>,
}

/// Full three-route report for a square matrix with the M sign pattern.
///
/// Routes: (i) nonnegativity of A^{-1}; (ii) spectral radius of the
/// nonnegative part strictly below 1 (matrix-power iteration); (iii) the
/// positive-witness inequalities with xi = A^{-1} * 1. Disagreement between
/// decisive routes is an internal-consistency error.
pub fn m_matrix_report(a: &SquareMatrix) -> Result<MMatrixReport> {
    let n = a.dim();
    let mut report = MMatrixReport {
        sign_pattern_ok: true,
        diagonal_positive: true,
        rho: f64::NAN,
        inverse: None,
        inverse_nonnegative: false,
        xi: None,
        witness_ok: false,
        marginal: false,
        condition: None,
        is_m_matrix: false,
        note: None,
    };

    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] > 0.0 {
                report.sign_pattern_ok = false;
            }
        }
        if !(a[(i, i)] > 0.0) {
            report.diagonal_positive = false;
        }
    }
    if !report.sign_pattern_ok {
        // not a Z-pattern; the nonnegative-part route is undefined
        report.rho = f64::INFINITY;
        return Ok(report);
    }

    // Nonnegative part: L = I - A whenever the diagonal allows it (this
    // covers every A = I - L with nonnegative L, including a nonpositive
    // diagonal of A, where rho >= 1 follows); otherwise the positive
    // diagonal rescale I - D^{-1} A carries the same verdict.
    let diag_at_most_one = (0..n).all(|i| a[(i, i)] <= 1.0);
    if diag_at_most_one {
        report.rho = spectral_radius(&a.identity_minus());
    } else if report.diagonal_positive {
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = if i == j { 0.0 } else { -a[(i, j)] / a[(i, i)] };
            }
        }
        report.rho = spectral_radius(&m);
    } else {
        // entries above 1 and below 0 on the diagonal at once: not an
        // M-matrix, and neither nonnegative-part form applies
        report.rho = f64::INFINITY;
        report.note = Some("mixed-sign diagonal".into());
    }
    report.marginal = report.rho.is_finite() && (report.rho - 1.0).abs() < RHO_MARGIN;

    let lu = Lu::factor(a);
    if let Some(inv) = lu.inverse() {
        let tol = -1e-12 * (1.0 + inv.max_abs());
        report.inverse_nonnegative = inv.rows().iter().flatten().all(|&v| v >= tol);
        report.condition = Some(a.norm1() * inv.norm1());
        report.inverse = Some(inv);
        if let Some(xi) = lu.solve(&vec![1.0; n]) {
            if xi.iter().all(|&v| v > 0.0) {
                // Axi = 1 gives the strict inequalities margin 1 by
                // construction; re-verify against rounding anyway
                let xinorm = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let mut ok = true;
                for i in 0..n {
                    let mut off = 0.0;
                    for j in 0..n {
                        if j != i {
                            off += xi[j] * a[(i, j)].abs();
                        }
                    }
                    if xi[i] * a[(i, i)] - off <= 1e-10 * xinorm {
                        ok = false;
                    }
                }
                report.witness_ok = ok;
                if ok {
                    report.xi = Some(xi);
                }
            }
        }
    } else {
        report.note = Some("matrix is numerically singular".into());
    }

    if let Some(cond) = report.condition {
        if cond > 1e14 {
            report.note = Some(format!("near-singular: condition estimate {cond:.3e}"));
        }
    }

    if report.marginal {
        report.is_m_matrix = false;
        report.note = Some(format!(
            "spectral radius {} within {RHO_MARGIN} of 1; verdict withheld",
            report.rho
        ));
        return Ok(report);
    }

    let by_rho = report.rho < 1.0 - RHO_MARGIN;
    let by_inverse = report.inverse_nonnegative && report.xi.is_some() && report.witness_ok;

    if by_rho != by_inverse && report.note.is_none() {
        return Err(Error::InternalConsistency(format!(
            "M-matrix routes disagree: rho = {} vs inverse/witness = {}",
            report.rho, by_inverse
        )));
    }
    report.is_m_matrix = by_rho && by_inverse && report.diagonal_positive;
    Ok(report)
}

/// True plus the positive witness xi = A^{-1} * 1 when A is a non-singular
/// M-matrix; false (no witness) otherwise. Marginal spectral radii report
/// false here; use [`m_matrix_report`] to distinguish them.
pub fn is_m_matrix(a: &SquareMatrix) -> (bool, Option<Vec<f64>>) {
    match m_matrix_report(a) {
        Ok(rep) if rep.is_m_matrix => (true, rep.xi),
        _ => (false, None),
    }
}

/// The weighted max-norm contraction rate induced by the witness xi:
/// alpha = max_i [ L_ii + sum_{j != i} (xi_j / xi_i) L_ij ].
pub fn contraction_rate(l: &SquareMatrix, xi: &[f64]) -> f64 {
    let n = l.dim();
    let mut alpha = 0.0f64;
    for i in 0..n {
        let mut ai = l[(i, i)];
        for j in 0..n {
            if j != i {
                ai += xi[j] / xi[i] * l[(i, j)];
            }
        }
        alpha = alpha.max(ai);
    }
    alpha
}

/// The comparison criterion from the literature: every column sum of the
/// nonnegative matrix strictly below 1. Strictly stronger a premise than
/// the M-matrix test, which is the point of reporting it side by side.
pub fn column_sum_test(l: &SquareMatrix) -> bool {
    let n = l.dim();
    (0..n).all(|j| (0..n).map(|i| l[(i, j)]).sum::<f64>() < 1.0)
}
