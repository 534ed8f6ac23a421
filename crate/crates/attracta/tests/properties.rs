//! Property tests for the library-level invariants: measure normalization,
//! functional linearity, support monotonicity, box nesting, contraction
//! scale covariance, and witness validity.

use attracta::certifier::{box_sequence, contraction_rate, is_m_matrix};
use attracta::model::{DelayDistribution, Domain, Lag};
use attracta::numeric::linalg::SquareMatrix;
use proptest::prelude::*;

fn mixture_strategy() -> impl Strategy<Value = DelayDistribution> {
    prop::collection::vec((0.01f64..1.0, 0.0f64..5.0), 1..6).prop_map(|raw| {
        let total: f64 = raw.iter().map(|(w, _)| w).sum();
        DelayDistribution::mixture(
            raw.into_iter()
                .map(|(w, tau)| (w / total, Lag::Constant(tau)))
                .collect(),
        )
    })
}

fn step_cdf_strategy() -> impl Strategy<Value = DelayDistribution> {
    prop::collection::vec((0.01f64..1.0, 0.0f64..5.0), 1..6).prop_map(|raw| {
        let total: f64 = raw.iter().map(|(w, _)| w).sum();
        DelayDistribution::step_cdf(raw.into_iter().map(|(w, l)| (l, w / total)).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Total mass is 1 for every admissible draw: exactly for the discrete
    /// variants, to quadrature tolerance for kernels.
    #[test]
    fn normalization_mixture(dist in mixture_strategy(), t in 0.0f64..100.0) {
        let m = dist.total_mass(t).unwrap();
        prop_assert!((m - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn normalization_step_cdf(dist in step_cdf_strategy(), t in 0.0f64..100.0) {
        let m = dist.total_mass(t).unwrap();
        prop_assert!((m - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn normalization_kernel(width in 0.05f64..10.0, t in 0.0f64..100.0) {
        let dist = DelayDistribution::uniform_kernel(width);
        let m = dist.total_mass(t).unwrap();
        prop_assert!((m - 1.0).abs() <= 1e-8);
    }

    /// The delayed functional is linear in the integrand for the discrete
    /// variants.
    #[test]
    fn functional_linearity(
        dist in mixture_strategy(),
        t in 0.0f64..50.0,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let u = |tau: f64| tau.sin() + 0.3 * tau;
        let v = |tau: f64| (0.5 * tau).cos();
        let joint = dist.delayed_functional(t, |tau| a * u(tau) + b * v(tau), &[]).unwrap();
        let split = a * dist.delayed_functional(t, u, &[]).unwrap()
            + b * dist.delayed_functional(t, v, &[]).unwrap();
        prop_assert!((joint - split).abs() <= 1e-12 * (1.0 + joint.abs()));
    }

    /// Constant integrands reproduce the constant.
    #[test]
    fn functional_constant_reproduction(dist in mixture_strategy(), t in 0.0f64..50.0, c in -5.0f64..5.0) {
        let got = dist.delayed_functional(t, |_| c, &[]).unwrap();
        prop_assert!((got - c).abs() <= 1e-12 * (1.0 + c.abs()));
    }

    /// The earliest argument never exceeds t, and the built-in lag families
    /// drift to +infinity along t = 10^k.
    #[test]
    fn support_monotone(dist in mixture_strategy(), t in 0.0f64..1000.0) {
        prop_assert!(dist.earliest_argument(t) <= t);
    }

    /// Nested boxes shrink by exactly alpha per step and stay inside their
    /// predecessor's interior.
    #[test]
    fn box_nesting(
        z in prop::collection::vec(-5.0f64..5.0, 1..5),
        seedling in prop::collection::vec(0.1f64..4.0, 1..5),
        alpha in 0.05f64..0.95,
        c in 0.1f64..2.0,
    ) {
        let dim = z.len().min(seedling.len());
        let z = &z[..dim];
        let xi = &seedling[..dim];
        let domain = Domain::unbounded(dim);
        for n in 1..6 {
            let outer = box_sequence(z, c, xi, alpha, n, &domain).unwrap();
            let inner = box_sequence(z, c, xi, alpha, n + 1, &domain).unwrap();
            prop_assert!(inner.inside_interior_of(&outer));
            for j in 0..dim {
                let ratio = (inner.hi[j] - inner.lo[j]) / (outer.hi[j] - outer.lo[j]);
                prop_assert!((ratio - alpha).abs() <= 1e-9);
            }
        }
    }

    /// The contraction rate is invariant under positive rescaling of the
    /// witness.
    #[test]
    fn contraction_rate_scale_covariant(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..0.4, 3), 3),
        xi in prop::collection::vec(0.2f64..5.0, 3),
        scale in 0.01f64..100.0,
    ) {
        let l = SquareMatrix::from_rows(&rows).unwrap();
        let a1 = contraction_rate(&l, &xi);
        let scaled: Vec<f64> = xi.iter().map(|v| v * scale).collect();
        let a2 = contraction_rate(&l, &scaled);
        prop_assert!((a1 - a2).abs() <= 1e-12 * (1.0 + a1));
    }

    /// Whenever the M-matrix test passes, the witness satisfies the strict
    /// inequalities with a real margin.
    #[test]
    fn witness_validity(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..0.45, 4), 4),
    ) {
        let l = SquareMatrix::from_rows(&rows).unwrap();
        let a = l.identity_minus();
        let (ok, xi) = is_m_matrix(&a);
        if ok {
            let xi = xi.unwrap();
            let norm = xi.iter().fold(0.0f64, |m, v| m.max(*v));
            for i in 0..4 {
                let mut off = 0.0;
                for j in 0..4 {
                    if j != i {
                        off += xi[j] * a[(i, j)].abs();
                    }
                }
                prop_assert!(xi[i] * a[(i, i)] - off > 1e-10 * norm);
            }
        }
    }
}

/// Built-in lag families reach arbitrarily far back as t grows.
#[test]
fn earliest_argument_diverges_for_builtin_lags() {
    let families = [
        DelayDistribution::constant_lag(3.0),
        DelayDistribution::proportional(0.5),
        DelayDistribution::mixture(vec![(0.3, Lag::Constant(1.0)), (0.7, Lag::Constant(2.0))]),
        DelayDistribution::uniform_kernel(2.0),
        DelayDistribution::step_cdf(vec![(1.5, 1.0)]),
    ];
    for dist in &families {
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=6 {
            let t = 10f64.powi(k);
            let h = dist.earliest_argument(t);
            assert!(h <= t);
            assert!(h > prev, "{dist:?} not drifting at t = {t}");
            prev = h;
        }
        assert!(prev > 1e5, "{dist:?} stalled at {prev}");
    }
}
