//! Global-attractivity certificates.
//!
//! Three certificate families, each with a machine-checkable witness:
//! the M-matrix contraction test (weighted-norm contraction with witness
//! vector and nested boxes), the planar monotone test (four monotone
//! bracketing sequences), and the Nicholson-type test (per-equation
//! contraction bounds feeding the M-matrix test).

mod boxes;
mod certify;
mod equilibrium;
mod mmatrix;
mod nicholson;
mod planar;

pub use boxes::{box_sequence, max_admissible_c, verify_box_mapping, BoxRegion};
pub use certify::{certify_m_matrix, certify_m_matrix_seeded, LipschitzData};
pub use equilibrium::find_equilibrium;
pub use mmatrix::{column_sum_test, contraction_rate, is_m_matrix, m_matrix_report, MMatrixReport};
pub use nicholson::{
    certify_nicholson, certify_nicholson_seeded, nicholson_alpha, nicholson_gamma,
    nicholson_lower_bound, NicholsonParams,
};
pub use planar::{planar_certify, PlanarOptions};

use crate::numeric::linalg::SquareMatrix;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Certified,
    NotCertified,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    MMatrix,
    Planar,
    Nicholson,
}

/// Product test for the two-patch Nicholson case.
#[derive(Debug, Clone, Serialize)]
pub struct ProductTest {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplingEvidence {
    pub seed: u64,
    pub samples: usize,
    /// Worst signed violation across all checked box pairs; <= 0 means every
    /// sampled image stayed inside its target box by at least |margin|.
    pub worst_margin: f64,
}

/// Bracketing sequences of the planar certificate.
#[derive(Debug, Clone, Serialize)]
pub struct PlanarWitness {
    pub x_star: f64,
    pub y_star: f64,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub final_gap: f64,
}

/// A certificate with its witness data and validation log.
///
/// Serialized field order is the export schema; optional sections are
/// omitted when the method does not produce them.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub method: Method,
    pub equilibrium: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxes: Option<Vec<BoxRegion>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planar: Option<PlanarWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_i: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corollary5: Option<ProductTest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison_flower: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison_abs_nichol2: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingEvidence>,
    pub log: Vec<String>,
}

impl Certificate {
    pub(crate) fn bare(verdict: Verdict, method: Method, equilibrium: Vec<f64>) -> Self {
        Certificate {
            verdict,
            method,
            equilibrium,
            xi: None,
            alpha: None,
            c: None,
            boxes: None,
            planar: None,
            gamma: None,
            alpha_i: None,
            x_lower: None,
            corollary5: None,
            comparison_flower: None,
            comparison_abs_nichol2: None,
            sampling: None,
            log: Vec::new(),
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization cannot fail")
    }
}

/// Shared helper: a nonnegative matrix from rows, with validation.
pub(crate) fn nonnegative_matrix(rows: &[Vec<f64>]) -> crate::error::Result<SquareMatrix> {
    let m = SquareMatrix::from_rows(rows)?;
    if !m.is_nonnegative() {
        return Err(crate::error::Error::InvalidParameter(
            "matrix must be entrywise nonnegative".into(),
        ));
    }
    Ok(m)
}
