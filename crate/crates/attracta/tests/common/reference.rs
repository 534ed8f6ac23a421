#![allow(clippy::needless_range_loop)] // i/j index equations and coordinates

//! Reference integrator for systems with concentrated delays, written
//! against the published 5(4) tableau with its own data layout: fixed step,
//! mesh storage of states and derivatives, cubic Hermite interpolation for
//! delayed reads. No code is shared with the library's integration path.

pub type EquationFn = Box<dyn Fn(usize, &[f64]) -> f64>;

pub struct ConcentratedSystem {
    pub dim: usize,
    pub rates: Vec<f64>,
    /// Constant lags per (equation, coordinate); all strictly positive.
    pub lags: Vec<Vec<f64>>,
    /// f_i evaluated on the vector of per-coordinate delayed values.
    pub f: EquationFn,
}

pub struct ReferenceSolution {
    pub t0: f64,
    pub h: f64,
    /// States at mesh points, row-major [n][dim].
    pub y: Vec<Vec<f64>>,
    /// Right-hand sides at mesh points.
    pub dy: Vec<Vec<f64>>,
    pub history: Vec<f64>,
}

impl ReferenceSolution {
    /// Cubic Hermite read of component j at time tau (constant history
    /// before t0).
    pub fn value(&self, j: usize, tau: f64) -> f64 {
        if tau <= self.t0 {
            return self.history[j];
        }
        let steps = self.y.len() - 1;
        let pos = (tau - self.t0) / self.h;
        let k = (pos.floor() as usize).min(steps - 1);
        let theta = pos - k as f64;
        let (y0, y1) = (self.y[k][j], self.y[k + 1][j]);
        let (d0, d1) = (self.dy[k][j], self.dy[k + 1][j]);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + self.h * (h10 * d0 + h11 * d1) + h01 * y1
    }

    pub fn state_at(&self, tau: f64) -> Vec<f64> {
        (0..self.history.len()).map(|j| self.value(j, tau)).collect()
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Integrate with fixed step h from a constant history; h must be well
/// below the smallest lag so every delayed read lands in the stored mesh.
pub fn integrate_reference(
    sys: &ConcentratedSystem,
    history: &[f64],
    t0: f64,
    t_end: f64,
    h: f64,
) -> ReferenceSolution {
    let s = sys.dim;
    let min_lag = sys
        .lags
        .iter()
        .flatten()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert!(h < min_lag, "reference step must stay below the smallest lag");
    let steps = ((t_end - t0) / h).round() as usize;
    assert!(
        ((t_end - t0) - steps as f64 * h).abs() < 1e-9,
        "step must divide the interval"
    );

    let mut sol = ReferenceSolution {
        t0,
        h,
        y: Vec::with_capacity(steps + 1),
        dy: Vec::with_capacity(steps + 1),
        history: history.to_vec(),
    };

    let rhs = |sol: &ReferenceSolution, t: f64, state: &[f64], out: &mut Vec<f64>| {
        out.clear();
        let mut delayed = vec![0.0; s];
        for i in 0..s {
            for j in 0..s {
                delayed[j] = sol.value(j, t - sys.lags[i][j]);
            }
            out.push(sys.rates[i] * ((sys.f)(i, &delayed) - state[i]));
        }
    };

    let mut y = history.to_vec();
    let mut dy = Vec::new();
    rhs(&sol, t0, &y, &mut dy);
    sol.y.push(y.clone());
    sol.dy.push(dy.clone());

    let mut k = vec![vec![0.0; s]; 7];
    let mut stage_state = vec![0.0; s];
    let mut stage_out = Vec::new();
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        k[0].copy_from_slice(&dy);
        for st in 1..7 {
            for j in 0..s {
                let mut acc = 0.0;
                for (m, krow) in k.iter().enumerate().take(st) {
                    acc += A[st][m] * krow[j];
                }
                stage_state[j] = y[j] + h * acc;
            }
            rhs(&sol, t + C[st] * h, &stage_state, &mut stage_out);
            k[st].copy_from_slice(&stage_out);
        }
        for j in 0..s {
            let mut acc = 0.0;
            for (m, krow) in k.iter().enumerate().take(6) {
                acc += A[6][m] * krow[j];
            }
            y[j] += h * acc;
        }
        dy = k[6].clone(); // FSAL: derivative at the new mesh point
        sol.y.push(y.clone());
        sol.dy.push(dy.clone());
    }
    sol
}
