//! Truncated power-series arithmetic used for map Taylor expansions and chain rules.

pub(crate) fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `f^kappa` for a series with `f[0] > 0`.
pub(crate) fn powf(f: &[f64], kappa: f64, len: usize) -> Vec<f64> {
    let mut g = vec![0.0; len];
    if len == 0 {
        return g;
    }
    let f0 = f[0];
    g[0] = f0.powf(kappa);
    for n in 1..len {
        let mut s = 0.0;
        for k in 1..=n {
            let fk = f.get(k).copied().unwrap_or(0.0);
            if fk != 0.0 {
                s += (kappa * k as f64 - (n - k) as f64) * fk * g[n - k];
            }
        }
        g[n] = s / (n as f64 * f0);
    }
    g
}

/// `exp(f)`.
pub(crate) fn exp(f: &[f64], len: usize) -> Vec<f64> {
    let mut g = vec![0.0; len];
    if len == 0 {
        return g;
    }
    g[0] = f[0].exp();
    for n in 1..len {
        let mut s = 0.0;
        for k in 1..=n {
            let fk = f.get(k).copied().unwrap_or(0.0);
            s += k as f64 * fk * g[n - k];
        }
        g[n] = s / n as f64;
    }
    g
}

/// Compositional inverse of `x -> sum_{k>=1} rho[k] x^k` (rho[0] is ignored).
pub(crate) fn revert(rho: &[f64], len: usize) -> Vec<f64> {
    let mut tau = vec![0.0; len];
    if len < 2 {
        return tau;
    }
    let r1 = rho[1];
    tau[1] = 1.0 / r1;
    for n in 2..len {
        // coefficient of x^n in sum_{k>=2} rho_k tau^k using tau_1..tau_{n-1}
        let mut acc = 0.0;
        let mut power = tau.clone();
        for &rk in rho.iter().take(n + 1).skip(2) {
            power = mul(&power, &tau, len);
            acc += rk * power[n];
        }
        tau[n] = -acc / r1;
    }
    tau
}

/// Chain-rule matrix `b[j][i]` with `d^j u/dr^j = sum_i b[j][i] d^i u/dt^i`, given the
/// Taylor coefficients `rho` of `r(t)` about the evaluation point.
pub(crate) fn chain_matrix(rho: &[f64], order: usize) -> Vec<Vec<f64>> {
    let len = order + 1;
    let tau = revert(rho, len);
    let mut b = vec![vec![0.0; len]; len];
    b[0][0] = 1.0;
    let mut power = vec![0.0; len];
    power[0] = 1.0;
    let mut ifact = 1.0;
    for i in 1..len {
        power = mul(&power, &tau, len);
        ifact *= i as f64;
        let mut jfact = 1.0;
        for (j, row) in b.iter_mut().enumerate().skip(1) {
            jfact *= j as f64;
            if j >= i {
                row[i] = jfact / ifact * power[j];
            }
        }
    }
    b
}
