//! Shared helpers for the integration suites: a deterministic Gauss-Hermite
//! quadrature oracle for two-user mutual informations over the complex AWGN
//! channel `y = x1 + gamma2 * x2 + w`.

use num_complex::Complex64;
use satlink::constellation::Constellation;

/// Gauss-Hermite nodes and weights for the weight function `exp(-x^2)`.
///
/// Built from the orthonormal Hermite recurrence
/// `p_{k+1}(x) = x * sqrt(2/(k+1)) * p_k(x) - sqrt(k/(k+1)) * p_{k-1}(x)`
/// with `p_0 = pi^{-1/4}`; the roots of `p_n` are bracketed by a sign scan
/// and refined by bisection, and the weights are `1 / sum_{k<n} p_k(x_i)^2`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    // evaluate [p_0(x), ..., p_n(x)]
    let evals = |x: f64| -> Vec<f64> {
        let mut p = Vec::with_capacity(n + 1);
        p.push(std::f64::consts::PI.powf(-0.25));
        if n >= 1 {
            p.push(x * 2f64.sqrt() * p[0]);
        }
        for k in 1..n {
            let kf = k as f64;
            let next = x * (2.0 / (kf + 1.0)).sqrt() * p[k] - (kf / (kf + 1.0)).sqrt() * p[k - 1];
            p.push(next);
        }
        p
    };
    let pn = |x: f64| *evals(x).last().unwrap();

    // all roots lie within |x| < sqrt(2n + 1); scan for sign changes
    let bound = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    let steps = 20_000usize;
    let mut roots = Vec::with_capacity(n);
    let mut x_prev = -bound;
    let mut f_prev = pn(x_prev);
    for s in 1..=steps {
        let x = -bound + 2.0 * bound * s as f64 / steps as f64;
        let f = pn(x);
        if f_prev == 0.0 {
            roots.push(x_prev);
        } else if f_prev * f < 0.0 {
            let (mut lo, mut hi) = (x_prev, x);
            let (mut flo, _fhi) = (f_prev, f);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = pn(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x_prev = x;
        f_prev = f;
    }
    assert_eq!(roots.len(), n, "expected {n} Hermite roots, found {}", roots.len());
    let weights: Vec<f64> = roots
        .iter()
        .map(|&x| {
            let p = evals(x);
            1.0 / p[..n].iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    (roots, weights)
}

/// Deterministic quadrature values of the two-user mutual informations, all
/// in bits per channel use: `(I(x1;y|x2), I(x1;y), I(x1,x2;y))`.
///
/// The noise is complex Gaussian with total variance `n0`; the expectation
/// over `w = sqrt(n0) * (t_u + i t_v)` uses a tensor Gauss-Hermite rule with
/// the standard `1/pi` normalization.
pub fn quadrature_mi(
    c1: &Constellation,
    c2: &Constellation,
    gamma2: Complex64,
    n0: f64,
    nodes: usize,
) -> (f64, f64, f64) {
    let (t, wq) = gauss_hermite(nodes);
    let m1 = c1.size();
    let m2 = c2.size();
    let joint: Vec<Complex64> = (0..m1 * m2)
        .map(|k| c1.points[k / m2] + gamma2 * c2.points[k % m2])
        .collect();

    let mut i_cond = 0.0f64; // I(x1;y|x2)
    let mut i_sing = 0.0f64; // I(x1;y)
    let mut i_joint = 0.0f64; // I(x1,x2;y)
    let inv_pi = 1.0 / std::f64::consts::PI;
    for iu in 0..nodes {
        for iv in 0..nodes {
            let w = n0.sqrt() * Complex64::new(t[iu], t[iv]);
            let qw = wq[iu] * wq[iv] * inv_pi;
            // likelihood ratios exp((|w|^2 - |s_ab + w - s_a'b'|^2)/n0)
            for a in 0..m1 {
                // conditional term is independent of b (gamma2*x2 cancels)
                let num: f64 = (0..m1)
                    .map(|ap| {
                        let d = c1.points[a] + w - c1.points[ap];
                        ((w.norm_sqr() - d.norm_sqr()) / n0).exp()
                    })
                    .sum();
                i_cond += qw * num.log2() / m1 as f64;
                for b in 0..m2 {
                    let y = joint[a * m2 + b] + w;
                    let mut per_a = vec![0.0f64; m1];
                    for ap in 0..m1 {
                        for bp in 0..m2 {
                            let d = y - joint[ap * m2 + bp];
                            per_a[ap] += ((w.norm_sqr() - d.norm_sqr()) / n0).exp();
                        }
                    }
                    let total: f64 = per_a.iter().sum();
                    let d_joint = y - joint[a * m2 + b];
                    let self_lik = ((w.norm_sqr() - d_joint.norm_sqr()) / n0).exp();
                    i_joint += qw * (total / self_lik).log2() / (m1 * m2) as f64;
                    i_sing += qw * (total / per_a[a]).log2() / (m1 * m2) as f64;
                }
            }
        }
    }
    (
        (m1 as f64).log2() - i_cond,
        (m1 as f64).log2() - i_sing,
        ((m1 * m2) as f64).log2() - i_joint,
    )
}
