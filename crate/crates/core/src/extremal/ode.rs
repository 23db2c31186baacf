//! Dormand–Prince 5(4) with adaptive steps and Hermite sampling of the accepted points.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-300, max_steps: 200_000 }
    }
}

/// Accepted points with derivatives, for cubic Hermite sampling.
#[derive(Clone, Debug)]
pub struct Trajectory<const N: usize> {
    pub s: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub dy: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.s.last().unwrap(), *self.y.last().unwrap())
    }

    /// Component `i` at `s`, clamped to the integrated range.
    pub fn sample(&self, s: f64, i: usize) -> f64 {
        let n = self.s.len();
        if s <= self.s[0] {
            return self.y[0][i];
        }
        if s >= self.s[n - 1] {
            return self.y[n - 1][i];
        }
        let k = self.s.partition_point(|&v| v <= s) - 1;
        let h = self.s[k + 1] - self.s[k];
        let x = (s - self.s[k]) / h;
        let (y0, y1) = (self.y[k][i], self.y[k + 1][i]);
        let (d0, d1) = (self.dy[k][i] * h, self.dy[k + 1][i] * h);
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * y0
            + (x3 - 2.0 * x2 + x) * d0
            + (-2.0 * x3 + 3.0 * x2) * y1
            + (x3 - x2) * d1
    }
}

/// Integrates `y' = f(s, y)` from `s0` until `s_end` or until `stop` returns true on an
/// accepted point (that point is kept).
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    s0: f64,
    y0: [f64; N],
    s_end: f64,
    tol: Tolerances,
    mut stop: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<Trajectory<N>> {
    let mut s = s0;
    let mut y = y0;
    let mut k0 = f(s, &y);
    let mut traj = Trajectory { s: vec![s], y: vec![y], dy: vec![k0] };
    let mut h = 1e-3f64.min(s_end - s0);
    let mut steps = 0;
    while s < s_end {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::Shooting(format!("step limit reached at s = {s}")));
        }
        h = h.min(s_end - s);
        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        for st in 1..7 {
            let mut yt = y;
            for (j, kj) in k.iter().enumerate().take(st) {
                let a = A[st][j];
                if a != 0.0 {
                    for i in 0..N {
                        yt[i] += h * a * kj[i];
                    }
                }
            }
            k[st] = f(s + C[st] * h, &yt);
        }
        let mut yn = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut inc = 0.0;
            let mut e = 0.0;
            for st in 0..7 {
                inc += B[st] * k[st][i];
                e += E[st] * k[st][i];
            }
            yn[i] += h * inc;
            let sc = tol.atol + tol.rtol * y[i].abs().max(yn[i].abs());
            err = err.max((h * e / sc).abs());
        }
        if !err.is_finite() || yn.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h < 1e-14 * s.abs().max(1.0) {
                return Err(Error::Shooting(format!("solution blew up near s = {s}")));
            }
            continue;
        }
        if err <= 1.0 {
            s += h;
            y = yn;
            k0 = k[6];
            traj.s.push(s);
            traj.y.push(y);
            traj.dy.push(k0);
            if stop(s, &y) {
                break;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(traj)
}
