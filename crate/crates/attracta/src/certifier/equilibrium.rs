//! Fixed-point location: damped Newton on F(z) - z with a plain fixed-point
//! fallback (the fallback converges whenever the contraction certificate
//! holds, since F contracts a weighted max norm there).

use crate::error::{Error, Result};
use crate::model::{Domain, VectorMap};
use crate::numeric::linalg::{Lu, SquareMatrix};

const MAX_ITERS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-12;

fn residual_norm(f: &VectorMap, z: &[f64]) -> Result<(Vec<f64>, f64)> {
    let fz = f.try_eval(z)?;
    let g: Vec<f64> = fz.iter().zip(z).map(|(a, b)| a - b).collect();
    let norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((g, norm))
}

/// Find z in `domain` with ||F(z) - z||_inf <= 1e-12, starting from `guess`.
pub fn find_equilibrium(f: &VectorMap, domain: &Domain, guess: &[f64]) -> Result<Vec<f64>> {
    let s = f.dim();
    if guess.len() != s {
        return Err(Error::InvalidParameter(
            "guess dimension does not match the map".into(),
        ));
    }
    if !domain.contains_closure(guess) {
        return Err(Error::InvalidParameter(format!(
            "starting guess {guess:?} lies outside the domain"
        )));
    }
    let mut z = guess.to_vec();
    let (mut g, mut gnorm) = residual_norm(f, &z)?;

    let mut iters = 0usize;
    while gnorm > RESIDUAL_TOL && iters < MAX_ITERS {
        iters += 1;

        // finite-difference Jacobian of F(z) - z
        let mut jac = SquareMatrix::zeros(s);
        let mut ok = true;
        for j in 0..s {
            let step = 1e-7 * (1.0 + z[j].abs());
            let mut zp = z.clone();
            zp[j] += step;
            match f.try_eval(&zp) {
                Ok(fp) => {
                    for i in 0..s {
                        jac[(i, j)] = (fp[i] - (g[i] + z[i])) / step - if i == j { 1.0 } else { 0.0 };
                    }
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }

        let newton_dir = if ok {
            Lu::factor(&jac).solve(&g).map(|d| d.iter().map(|v| -v).collect::<Vec<f64>>())
        } else {
            None
        };

        let moved = if let Some(dir) = newton_dir {
            // backtrack until the residual drops and the iterate stays in
            // the domain closure
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = z.iter().zip(&dir).map(|(a, d)| a + lambda * d).collect();
                if domain.contains_closure(&trial) {
                    if let Ok((gt, gt_norm)) = residual_norm(f, &trial) {
                        if gt_norm < gnorm * (1.0 - 0.25 * lambda) || gt_norm < RESIDUAL_TOL {
                            z = trial;
                            g = gt;
                            gnorm = gt_norm;
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            accepted
        } else {
            false
        };

        if !moved {
            // fixed-point fallback step z <- F(z), damped into the domain
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = z.iter().zip(&g).map(|(a, gi)| a + lambda * gi).collect();
                if domain.contains_closure(&trial) {
                    if let Ok((gt, gt_norm)) = residual_norm(f, &trial) {
                        if gt_norm < gnorm || gt_norm < RESIDUAL_TOL {
                            z = trial;
                            g = gt;
                            gnorm = gt_norm;
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::EquilibriumNotFound(iters));
            }
        }
    }

    if gnorm > RESIDUAL_TOL {
        return Err(Error::EquilibriumNotFound(MAX_ITERS));
    }
    if !domain.contains_closure(&z) {
        return Err(Error::EquilibriumOutsideDomain(z));
    }
    Ok(z)
}
