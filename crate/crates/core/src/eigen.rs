//! Dense complex eigenvalues and polynomial roots.
//!
//! Eigenvalues use a Householder reduction to upper Hessenberg form followed
//! by single-shift QR sweeps (Wilkinson shift, Givens rotations). Polynomial
//! roots use the Aberth–Ehrlich simultaneous iteration. The two are
//! independent, so each can check the other.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

/// In-place reduction to upper Hessenberg form by Householder reflections.
pub fn hessenberg(a: &mut DMatrix<C64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vn);
        // A ← (I − 2vvᴴ) A on rows k+1..n
        for j in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(t, vi)| vi.conj() * a[(k + 1 + t, j)])
                .sum();
            for (t, vi) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= vi * dot * 2.0;
            }
        }
        // A ← A (I − 2vvᴴ) on columns k+1..n
        for i in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(t, vi)| a[(i, k + 1 + t)] * vi)
                .sum();
            for (t, vi) in v.iter().enumerate() {
                a[(i, k + 1 + t)] -= dot * vi.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Rotation `[c s; −s̄ c]` mapping `(x, y)` to `(·, 0)`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    if ax == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let nu = ax.hypot(y.norm());
    (ax / nu, x * y.conj() / (ax * nu))
}

/// Eigenvalue of the 2×2 block `[a b; c d]` closest to `d`.
fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All eigenvalues of a square complex matrix.
pub fn eigenvalues(matrix: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols());
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = matrix.clone();
    hessenberg(&mut h);
    let mut out = vec![ZERO; n];
    let eps = f64::EPSILON;
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_iter = 60 * n;
    let mut hi = n - 1;
    let mut iter = 0;
    let mut since_deflation = 0;
    loop {
        // find the start of the trailing unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let diag = if diag == 0.0 { scale } else { diag };
            if sub <= eps * diag {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[(hi, hi)];
            since_deflation = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        iter += 1;
        since_deflation += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence(iter));
        }
        let mu = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((c, s));
        }
        for (t, (c, s)) in rots.into_iter().enumerate() {
            let k = lo + t;
            for i in lo..=(k + 1).min(hi) {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * c + s.conj() * y;
                h[(i, k + 1)] = -s * x + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(out)
}

/// `p(z) = zⁿ + Σ_{k<n} a_k z^k` and `p'(z)` by Horner's rule.
fn eval_monic(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(1.0, 0.0);
    let mut dp = ZERO;
    for a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Roots of the monic polynomial `zⁿ + a_{n−1}z^{n−1} + … + a_0`.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let n = coeffs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // Cauchy bound for the initial circle
    let bound = 1.0 + coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let radius = bound.min(
        coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| (n as f64 * a.norm()).powf(1.0 / (n - k) as f64))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE),
    );
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            C64::from_polar(
                radius,
                std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4,
            )
        })
        .collect();
    let max_iter = 500;
    for it in 0..max_iter {
        let mut moved: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = eval_monic(coeffs, z[k]);
            if p == ZERO {
                continue;
            }
            let w = p / dp;
            let sum: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = w / (C64::new(1.0, 0.0) - w * sum);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if moved < 4.0 * f64::EPSILON {
            return Ok(z);
        }
        if it + 1 == max_iter {
            return Err(Error::NoConvergence(max_iter));
        }
    }
    Ok(z)
}
