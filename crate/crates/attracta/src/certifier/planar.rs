//! Planar monotone certificate.
//!
//! For the cooperative pair x' = g1 [f1(y(h1)) - x], y' = g2 [f2(x(h2)) - y]
//! with f1, f2 strictly increasing, f(0) = 0, and the crossing condition
//! (f1 o f2 - id changes sign exactly once, from + to -, at x*), the four
//! sequences
//!   a1_{n+1} = f1(a2_n),  a2_{n+1} = f2(a1_{n+1})
//!   b1_{n+1} = f1(b2_n),  b2_{n+1} = f2(b1_{n+1})
//! bracket (x*, y*) monotonically; their convergence is the certificate.

use super::{Certificate, Method, PlanarWitness, Verdict};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PlanarOptions {
    /// Sign-condition grid points on each side of the crossing.
    pub grid: usize,
    /// Maximum sequence depth.
    pub depth: usize,
    /// Declare convergence when the bracket gap falls below this.
    pub gap_tol: f64,
    /// Slow-convergence escape hatch: still monotone at full depth with the
    /// gap shrinking at least this fast per iterate.
    pub shrink_ratio: f64,
}

impl Default for PlanarOptions {
    fn default() -> Self {
        PlanarOptions {
            grid: 64,
            depth: 64,
            gap_tol: 1e-6,
            shrink_ratio: 0.999,
        }
    }
}

/// The composite map whose strict sign change encodes the crossing
/// condition: psi(x) = f1(f2(x)) - x (positive below x*, negative above).
fn psi(f1: &dyn Fn(f64) -> f64, f2: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    f1(f2(x)) - x
}

pub fn planar_certify(
    f1: &(dyn Fn(f64) -> f64 + Sync),
    f2: &(dyn Fn(f64) -> f64 + Sync),
    x_star_hint: f64,
    opts: &PlanarOptions,
    a11: f64,
    b11: f64,
) -> Result<Certificate> {
    if !(a11 > 0.0 && b11 > a11) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < a11 < b11, got a11 = {a11}, b11 = {b11}"
        )));
    }
    let fail = |log: Vec<String>| {
        let mut cert = Certificate::bare(Verdict::NotCertified, Method::Planar, vec![]);
        cert.log = log;
        cert
    };

    // f(0) = 0 and monotonicity on a sampled grid are preconditions of the
    // construction; violations are verdicts, not panics
    for (name, f) in [("f1", f1 as &dyn Fn(f64) -> f64), ("f2", f2)] {
        let at0 = f(0.0);
        if !(at0.abs() <= 1e-12) {
            return Ok(fail(vec![format!("{name}(0) = {at0}, expected 0")]));
        }
    }

    // bracket the crossing of psi inside [a11, b11]
    let (pa, pb) = (psi(f1, f2, a11), psi(f1, f2, b11));
    if !(pa > 0.0) || !(pb < 0.0) {
        return Ok(fail(vec![format!(
            "crossing not bracketed: psi({a11}) = {pa}, psi({b11}) = {pb} (hint {x_star_hint})"
        )]));
    }
    let (mut lo, mut hi) = (a11, b11);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(f1, f2, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_star = 0.5 * (lo + hi);
    let y_star = f2(x_star);

    // monotonicity and strict sign condition on log-spaced grids both sides
    let log_grid = |from: f64, to: f64, n: usize| -> Vec<f64> {
        let (la, lb) = (from.ln(), to.ln());
        (0..n)
            .map(|k| (la + (lb - la) * (k as f64 + 0.5) / n as f64).exp())
            .collect()
    };
    let below = log_grid(a11.min(x_star * 1e-3), x_star * (1.0 - 1e-9), opts.grid);
    let above = log_grid(x_star * (1.0 + 1e-9), b11.max(x_star * 1e3), opts.grid);

    let mut log = Vec::new();
    for grid in [&below, &above] {
        let mut prev: Option<(f64, f64, f64)> = None;
        for &x in grid {
            let (v1, v2) = (f1(x), f2(x));
            if !v1.is_finite() || !v2.is_finite() {
                return Ok(fail(vec![format!("f not finite at x = {x}")]));
            }
            if let Some((px, p1, p2)) = prev {
                if v1 <= p1 || v2 <= p2 {
                    return Ok(fail(vec![format!(
                        "monotonicity violated between x = {px} and x = {x}"
                    )]));
                }
            }
            prev = Some((x, v1, v2));
        }
    }
    for &x in &below {
        if !(psi(f1, f2, x) > 0.0) {
            return Ok(fail(vec![format!(
                "sign condition fails below the crossing at x = {x}"
            )]));
        }
    }
    for &x in &above {
        if !(psi(f1, f2, x) < 0.0) {
            return Ok(fail(vec![format!(
                "sign condition fails above the crossing at x = {x}"
            )]));
        }
    }
    log.push(format!(
        "sign condition verified on {} log-spaced points per side",
        opts.grid
    ));

    // the four bracketing sequences
    let mut a1 = vec![a11];
    let mut a2 = vec![f2(a11)];
    let mut b1 = vec![b11];
    let mut b2 = vec![f2(b11)];
    let mut monotone = true;
    for _ in 1..opts.depth {
        let a1n = f1(*a2.last().unwrap());
        let a2n = f2(a1n);
        let b1n = f1(*b2.last().unwrap());
        let b2n = f2(b1n);
        let gap_prev = b1.last().unwrap() - a1.last().unwrap();
        if !(a1n > *a1.last().unwrap())
            || !(a2n > *a2.last().unwrap())
            || !(b1n < *b1.last().unwrap())
            || !(b2n < *b2.last().unwrap())
        {
            // sequences have converged to rounding level or monotonicity broke
            monotone = gap_prev < 1e-9;
            break;
        }
        a1.push(a1n);
        a2.push(a2n);
        b1.push(b1n);
        b2.push(b2n);
        if b1n - a1n < opts.gap_tol && b2n - a2n < opts.gap_tol {
            break;
        }
    }

    let gap1 = b1.last().unwrap() - a1.last().unwrap();
    let gap2 = b2.last().unwrap() - a2.last().unwrap();
    let final_gap = gap1.max(gap2);

    let converged = final_gap < opts.gap_tol;
    let still_shrinking = a1.len() >= 3 && {
        let n = a1.len();
        let g_prev = (b1[n - 2] - a1[n - 2]).max(b2[n - 2] - a2[n - 2]);
        final_gap < g_prev * opts.shrink_ratio
    };

    let verdict = if monotone && (converged || still_shrinking) {
        Verdict::Certified
    } else {
        Verdict::NotCertified
    };
    log.push(format!(
        "bracket gap {final_gap:.3e} after {} iterates",
        a1.len()
    ));

    let mut cert = Certificate::bare(verdict, Method::Planar, vec![x_star, y_star]);
    cert.planar = Some(PlanarWitness {
        x_star,
        y_star,
        a1,
        a2,
        b1,
        b2,
        final_gap,
    });
    cert.log = log;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_pair_certified() {
        let f = |x: f64| x.sqrt();
        let cert = planar_certify(&f, &f, 1.0, &PlanarOptions::default(), 0.1, 9.0).unwrap();
        assert!(cert.is_certified());
        let w = cert.planar.unwrap();
        assert!((w.x_star - 1.0).abs() < 1e-9);
        assert!((w.y_star - 1.0).abs() < 1e-9);
        // first iterates of the lower bracket
        assert!((w.a2[0] - 0.316228).abs() < 1e-6);
        assert!((w.a1[1] - 0.562341).abs() < 1e-6);
        assert!(w.final_gap < 1e-6);
    }

    #[test]
    fn power_pair_certified() {
        let f1 = |y: f64| y * y;
        let f2 = |x: f64| x.powf(0.25);
        let cert = planar_certify(&f1, &f2, 1.0, &PlanarOptions::default(), 0.2, 5.0).unwrap();
        assert!(cert.is_certified());
        let w = cert.planar.unwrap();
        assert!((w.x_star - 1.0).abs() < 1e-9);
        assert!((w.y_star - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_pair_rejected() {
        // psi = 0 everywhere: no strict crossing, a continuum of equilibria
        let f = |x: f64| x;
        let cert = planar_certify(&f, &f, 1.0, &PlanarOptions::default(), 0.5, 2.0).unwrap();
        assert!(!cert.is_certified());
    }

    #[test]
    fn non_monotone_map_rejected() {
        let f1 = |y: f64| y.sqrt();
        let f2 = |x: f64| x * (2.0 - x); // rises then falls
        let cert = planar_certify(&f1, &f2, 1.0, &PlanarOptions::default(), 0.1, 1.8).unwrap();
        assert!(!cert.is_certified());
    }

    #[test]
    fn monotone_sequences_bracket_fixed_point() {
        let f = |x: f64| x.sqrt();
        let cert = planar_certify(&f, &f, 1.0, &PlanarOptions::default(), 0.1, 9.0).unwrap();
        let w = cert.planar.unwrap();
        for k in 1..w.a1.len() {
            assert!(w.a1[k] > w.a1[k - 1]);
            assert!(w.a1[k] < w.x_star + 1e-12);
        }
        for k in 1..w.b1.len() {
            assert!(w.b1[k] < w.b1[k - 1]);
            assert!(w.b1[k] > w.x_star - 1e-12);
        }
    }
}
