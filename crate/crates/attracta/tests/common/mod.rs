//! Shared test-side oracles, independent of the library's implementation
//! paths: a fixed-step concentrated-delay reference integrator and a dense
//! brute-force spectral radius.

pub mod reference;

/// Spectral radius by brute force for s <= 4: characteristic polynomial via
/// Faddeev-LeVerrier, roots by Durand-Kerner on the companion polynomial.
pub fn spectral_radius_brute(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    assert!((1..=4).contains(&n), "brute-force eigenvalues cover s <= 4");

    // Faddeev-LeVerrier: p(x) = x^n + c[1] x^(n-1) + ... + c[n]
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    let mut m = vec![vec![0.0; n]; n]; // M_0 = 0
    for k in 1..=n {
        // M_k = A * M_{k-1} + c_{k-1} I
        let mut am = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += rows[i][l] * m[l][j];
                }
                am[i][j] = acc;
            }
        }
        for (i, row) in am.iter_mut().enumerate() {
            row[i] += c[k - 1];
        }
        // c_k = -(1/k) tr(A * M_k)
        let mut tr = 0.0;
        for i in 0..n {
            for l in 0..n {
                tr += rows[i][l] * am[l][i];
            }
        }
        c[k] = -tr / k as f64;
        m = am;
    }

    durand_kerner_max_modulus(&c)
}

/// Max root modulus of x^n + c1 x^(n-1) + ... + cn (coefficients include
/// the leading 1 at index 0).
fn durand_kerner_max_modulus(c: &[f64]) -> f64 {
    let n = c.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let eval = |z: (f64, f64)| -> (f64, f64) {
        let mut acc = (c[0], 0.0);
        for &coef in &c[1..] {
            acc = (acc.0 * z.0 - acc.1 * z.1 + coef, acc.0 * z.1 + acc.1 * z.0);
        }
        acc
    };
    // distinct non-real starting points on a circle
    let radius = 1.0 + c.iter().skip(1).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut roots: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let angle = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            (radius * angle.cos(), radius * angle.sin())
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let p = eval(roots[i]);
            let mut denom = (1.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = (roots[i].0 - roots[j].0, roots[i].1 - roots[j].1);
                    denom = (
                        denom.0 * d.0 - denom.1 * d.1,
                        denom.0 * d.1 + denom.1 * d.0,
                    );
                }
            }
            let den_norm = denom.0 * denom.0 + denom.1 * denom.1;
            if den_norm == 0.0 {
                continue;
            }
            let q = (
                (p.0 * denom.0 + p.1 * denom.1) / den_norm,
                (p.1 * denom.0 - p.0 * denom.1) / den_norm,
            );
            roots[i] = (roots[i].0 - q.0, roots[i].1 - q.1);
            moved = moved.max(q.0.hypot(q.1));
        }
        if moved < 1e-14 * radius.max(1.0) {
            break;
        }
    }
    roots.iter().map(|r| r.0.hypot(r.1)).fold(0.0, f64::max)
}

#[allow(dead_code)]
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
