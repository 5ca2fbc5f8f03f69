//! Achievable information rates via mismatched-detection Monte Carlo, the
//! piecewise rate formulas for a fixed-rate interferer, Gaussian closed
//! forms, and the per-strategy rate curves.
//!
//! The receiver metric always assumes the two-signal-plus-Gaussian auxiliary
//! model `y = x1 + gamma2 x2 + w`; the generated samples come from the full
//! K-signal channel, so the interferers with `i >= 3` appear only in the
//! observations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{complex_gaussian, InterferenceProfile};
use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// One Monte Carlo mutual-information estimate, in bits/symbol.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MiEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// The mutual informations of the two-signal auxiliary model, all estimated
/// from one common sample stream.
#[derive(Debug, Clone, Copy)]
pub struct MiSet {
    /// I(x1; y | x2)
    pub i1: MiEstimate,
    /// I(x2; y | x1)
    pub i2: MiEstimate,
    /// I(x1, x2; y)
    pub ij: MiEstimate,
    /// I(x1; y)
    pub i_s: MiEstimate,
    /// I(x2; y)
    pub i_x2y: MiEstimate,
}

/// Which mutual information [`mi_mismatched`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiTarget {
    X1Y,
    X2Y,
    X1YGivenX2,
    X2YGivenX1,
    Joint,
}

/// Piecewise achievable-rate outputs at one operating point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateResult {
    pub snr_db: f64,
    pub i1: f64,
    pub i2: f64,
    pub i_j: f64,
    pub i_s: f64,
    pub i_a: f64,
    pub r1: f64,
}

/// Estimator knobs. `metric_snr_offset_db` shifts the SNR assumed by the
/// receiver metric (negative values increase the metric noise variance).
#[derive(Debug, Clone, Copy)]
pub struct MiParams {
    pub n_samples: usize,
    pub metric_snr_offset_db: f64,
}

impl Default for MiParams {
    fn default() -> Self {
        Self { n_samples: 200_000, metric_snr_offset_db: 0.0 }
    }
}

const CHUNK: usize = 8192;

#[derive(Clone, Copy, Default)]
struct Acc {
    sum: [f64; 5],
    sumsq: [f64; 5],
    n: usize,
}

impl Acc {
    fn push(&mut self, v: [f64; 5]) {
        for k in 0..5 {
            self.sum[k] += v[k];
            self.sumsq[k] += v[k] * v[k];
        }
        self.n += 1;
    }

    fn merge(&mut self, other: &Acc) {
        for k in 0..5 {
            self.sum[k] += other.sum[k];
            self.sumsq[k] += other.sumsq[k];
        }
        self.n += other.n;
    }

    fn estimate(&self, k: usize) -> MiEstimate {
        let n = self.n as f64;
        let mean = self.sum[k] / n;
        let var = (self.sumsq[k] / n - mean * mean).max(0.0);
        MiEstimate { value: mean, std_error: (var / n).sqrt(), n_samples: self.n }
    }
}

/// Estimate all five auxiliary-model mutual informations with common random
/// numbers. `constellations` holds one alphabet per signal of the profile.
pub fn mi_all(
    constellations: &[&Constellation],
    profile: &InterferenceProfile,
    snr_db: f64,
    params: &MiParams,
    seed: u64,
) -> Result<MiSet> {
    let k_signals = profile.n_signals();
    if constellations.len() != k_signals {
        return Err(Error::InvalidParameter(format!(
            "{} constellations for {} signals",
            constellations.len(),
            k_signals
        )));
    }
    if params.n_samples < 10_000 {
        return Err(Error::InvalidParameter(
            "mutual-information estimation needs at least 10^4 samples".into(),
        ));
    }
    let gains = profile.gains()?;
    let gamma2 = gains[1];
    let noise_var = 10f64.powf(-snr_db / 10.0);
    let metric_var = 10f64.powf(-(snr_db + params.metric_snr_offset_db) / 10.0);

    let c1 = constellations[0];
    let c2 = constellations[1];
    let m1 = c1.size();
    let m2 = c2.size();
    // auxiliary-model points, row-major over (x1, x2)
    let aux: Vec<Complex64> = c1
        .points
        .iter()
        .flat_map(|p1| c2.points.iter().map(move |p2| p1 + gamma2 * p2))
        .collect();

    let sizes: Vec<usize> = constellations.iter().map(|c| c.size()).collect();
    let points: Vec<Vec<Complex64>> =
        constellations.iter().map(|c| c.points.clone()).collect();

    let n_chunks = params.n_samples.div_ceil(CHUNK);
    let chunks: Vec<Acc> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk as u64);
            let len = CHUNK.min(params.n_samples - chunk * CHUNK);
            let mut acc = Acc::default();
            let inv = 1.0 / metric_var;
            let ln2 = std::f64::consts::LN_2;
            let mut expo = vec![0.0f64; m1 * m2];
            for _ in 0..len {
                // draw one full K-signal observation
                let mut y = complex_gaussian(noise_var, &mut rng);
                let mut tx = [0usize; 2];
                for (i, (pts, &sz)) in points.iter().zip(&sizes).enumerate() {
                    let s = rng.gen_range(0..sz);
                    y += gains[i] * pts[s];
                    if i < 2 {
                        tx[i] = s;
                    }
                }
                // metric exponents over the M1*M2 auxiliary hypotheses
                let mut maxe = f64::NEG_INFINITY;
                for (e, p) in expo.iter_mut().zip(&aux) {
                    *e = -(y - p).norm_sqr() * inv;
                    maxe = maxe.max(*e);
                }
                let mut total = 0.0;
                let mut row = vec![0.0f64; m1]; // q(y | x1 = a), unnormalized
                let mut col = vec![0.0f64; m2]; // q(y | x2 = b), unnormalized
                for a in 0..m1 {
                    for b in 0..m2 {
                        let v = (expo[a * m2 + b] - maxe).exp();
                        row[a] += v;
                        col[b] += v;
                        total += v;
                    }
                }
                let (a, b) = (tx[0], tx[1]);
                let k_true = (expo[a * m2 + b] - maxe).exp();
                // log2 of metric ratios; the uniform-pmf normalizations cancel
                let l_i1 = ((k_true * m1 as f64) / col[b]).ln() / ln2;
                let l_i2 = ((k_true * m2 as f64) / row[a]).ln() / ln2;
                let l_ij = ((k_true * (m1 * m2) as f64) / total).ln() / ln2;
                let l_is = ((row[a] * m1 as f64) / total).ln() / ln2;
                let l_x2 = ((col[b] * m2 as f64) / total).ln() / ln2;
                let vals = [l_i1, l_i2, l_ij, l_is, l_x2];
                if vals.iter().any(|v| !v.is_finite()) {
                    continue; // counted below as an estimation failure
                }
                acc.push(vals);
            }
            acc
        })
        .collect();

    let mut acc = Acc::default();
    for c in &chunks {
        acc.merge(c);
    }
    if acc.n < params.n_samples / 2 {
        return Err(Error::Estimation("too many non-finite metric ratios".into()));
    }
    Ok(MiSet {
        i1: acc.estimate(0),
        i2: acc.estimate(1),
        ij: acc.estimate(2),
        i_s: acc.estimate(3),
        i_x2y: acc.estimate(4),
    })
}

/// One mutual information of the auxiliary model; see [`mi_all`].
pub fn mi_mismatched(
    constellations: &[&Constellation],
    profile: &InterferenceProfile,
    snr_db: f64,
    target: MiTarget,
    params: &MiParams,
    seed: u64,
) -> Result<MiEstimate> {
    let set = mi_all(constellations, profile, snr_db, params, seed)?;
    Ok(match target {
        MiTarget::X1Y => set.i_s,
        MiTarget::X2Y => set.i_x2y,
        MiTarget::X1YGivenX2 => set.i1,
        MiTarget::X2YGivenX1 => set.i2,
        MiTarget::Joint => set.ij,
    })
}

/// Single-user-detector rate: mismatched `I(x1; y)` with an auxiliary model
/// containing only `x1` plus Gaussian noise of variance
/// `N + P * sum_{i>=2} |gamma_i|^2`.
pub fn mi_sud(
    constellations: &[&Constellation],
    profile: &InterferenceProfile,
    snr_db: f64,
    params: &MiParams,
    seed: u64,
) -> Result<MiEstimate> {
    let gains = profile.gains()?;
    let noise_var = 10f64.powf(-snr_db / 10.0);
    let metric_var = 10f64.powf(-(snr_db + params.metric_snr_offset_db) / 10.0)
        + profile.total_interference_power();
    let c1 = constellations[0];
    let sizes: Vec<usize> = constellations.iter().map(|c| c.size()).collect();
    let points: Vec<Vec<Complex64>> =
        constellations.iter().map(|c| c.points.clone()).collect();
    mi_single_signal_stream(params.n_samples, seed, move |rng| {
        let mut y = complex_gaussian(noise_var, rng);
        let mut x1 = 0usize;
        for (i, (pts, &sz)) in points.iter().zip(&sizes).enumerate() {
            let s = rng.gen_range(0..sz);
            y += gains[i] * pts[s];
            if i == 0 {
                x1 = s;
            }
        }
        (y, x1)
    }, &c1.points, 1.0, metric_var)
}

/// Interference-free single-signal mismatched MI at an amplitude-scaled
/// operating point; used by the Alamouti strategy where the equivalent
/// observable is `sqrt(1+|gamma2|^2) x1` plus noise, with the residual
/// interferers `i >= 3` present only in the generated samples.
pub fn mi_single_boosted(
    constellation: &Constellation,
    residual_constellations: &[&Constellation],
    residual_gains: &[Complex64],
    amplitude: f64,
    snr_db: f64,
    params: &MiParams,
    seed: u64,
) -> Result<MiEstimate> {
    let noise_var = 10f64.powf(-snr_db / 10.0);
    let metric_var = 10f64.powf(-(snr_db + params.metric_snr_offset_db) / 10.0);
    let points = constellation.points.clone();
    let res_pts: Vec<Vec<Complex64>> =
        residual_constellations.iter().map(|c| c.points.clone()).collect();
    let res_gains = residual_gains.to_vec();
    mi_single_signal_stream(params.n_samples, seed, move |rng| {
        let x1 = rng.gen_range(0..points.len());
        let mut y = amplitude * points[x1] + complex_gaussian(noise_var, rng);
        for (pts, g) in res_pts.iter().zip(&res_gains) {
            y += g * pts[rng.gen_range(0..pts.len())];
        }
        (y, x1)
    }, &constellation.points, amplitude, metric_var)
}

fn mi_single_signal_stream<F>(
    n_samples: usize,
    seed: u64,
    sample: F,
    points: &[Complex64],
    amplitude: f64,
    metric_var: f64,
) -> Result<MiEstimate>
where
    F: Fn(&mut ChaCha12Rng) -> (Complex64, usize) + Sync,
{
    let m = points.len() as f64;
    let scaled: Vec<Complex64> = points.iter().map(|p| amplitude * p).collect();
    let n_chunks = n_samples.div_ceil(CHUNK);
    let chunks: Vec<(f64, f64, usize)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk as u64);
            let len = CHUNK.min(n_samples - chunk * CHUNK);
            let inv = 1.0 / metric_var;
            let (mut sum, mut sumsq) = (0.0f64, 0.0f64);
            let mut n = 0usize;
            for _ in 0..len {
                let (y, x1) = sample(&mut rng);
                let mut maxe = f64::NEG_INFINITY;
                let expo: Vec<f64> = scaled
                    .iter()
                    .map(|p| {
                        let e = -(y - p).norm_sqr() * inv;
                        maxe = maxe.max(e);
                        e
                    })
                    .collect();
                let total: f64 = expo.iter().map(|e| (e - maxe).exp()).sum();
                let k_true = (expo[x1] - maxe).exp();
                let v = ((k_true * m) / total).ln() / std::f64::consts::LN_2;
                if v.is_finite() {
                    sum += v;
                    sumsq += v * v;
                    n += 1;
                }
            }
            (sum, sumsq, n)
        })
        .collect();
    let (mut sum, mut sumsq, mut n) = (0.0, 0.0, 0usize);
    for (s, q, c) in chunks {
        sum += s;
        sumsq += q;
        n += c;
    }
    if n < n_samples / 2 {
        return Err(Error::Estimation("too many non-finite metric ratios".into()));
    }
    let mean = sum / n as f64;
    let var = (sumsq / n as f64 - mean * mean).max(0.0);
    Ok(MiEstimate { value: mean, std_error: (var / n as f64).sqrt(), n_samples: n })
}

/// Worker seeding scheme: base seed plus worker index, whitened through the
/// stream id so neighboring seeds do not correlate.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(chunk.wrapping_add(1));
    rng
}

/// Maximum rate achievable by user 1 when the interfering signal can be
/// decoded, for a fixed interferer rate `r2`. Uses
/// `I(x2;y) = I_J - I1` under the auxiliary model.
pub fn rate_ia(r2: f64, i1: f64, i2: f64, ij: f64) -> f64 {
    let i_x2y = ij - i1;
    if r2 < i_x2y {
        i1
    } else if r2 < i2 {
        (ij - r2).max(0.0)
    } else {
        0.0
    }
}

/// Overall achievable rate for user 1.
pub fn rate_theorem1(i_s: f64, i_a: f64) -> f64 {
    i_s.max(i_a)
}

fn g(x: f64) -> f64 {
    (1.0 + x).log2()
}

/// Closed-form rates for Gaussian symbols and K = 2.
pub fn gaussian_rates(snr_linear: f64, gamma2_mag: f64, r2: f64) -> RateResult {
    let gm2 = gamma2_mag * gamma2_mag;
    let i1 = g(snr_linear);
    let i2 = g(snr_linear * gm2);
    let ij = g(snr_linear * (1.0 + gm2));
    let i_s = g(snr_linear / (1.0 + snr_linear * gm2));
    let i_x2y = g(snr_linear * gm2 / (1.0 + snr_linear));
    let i_a = if r2 < i_x2y {
        i1
    } else if r2 < i2 {
        (ij - r2).max(0.0)
    } else {
        0.0
    };
    RateResult {
        snr_db: 10.0 * snr_linear.log10(),
        i1,
        i2,
        i_j: ij,
        i_s,
        i_a,
        r1: rate_theorem1(i_s, i_a),
    }
}

/// Cutoff SNR where `I(x2;y|x1) = r2`, found by bisection of a monotone
/// evaluator over `[lo_db, hi_db]`.
pub fn cutoff_snr<F: Fn(f64) -> f64>(
    r2: f64,
    eval_i2: F,
    lo_db: f64,
    hi_db: f64,
    tolerance_db: f64,
) -> Result<f64> {
    let mut lo = lo_db;
    let mut hi = hi_db;
    if eval_i2(hi) < r2 {
        return Err(Error::NotFound(format!(
            "I(x2;y|x1) = {} at {hi} dB still below R2 = {r2}",
            eval_i2(hi)
        )));
    }
    if eval_i2(lo) >= r2 {
        return Ok(lo); // cutoff at or below the search floor
    }
    while hi - lo > tolerance_db {
        let mid = 0.5 * (lo + hi);
        if eval_i2(mid) < r2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Detector used by the strategy-1 rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Sud,
    Mud2,
}

/// Strategy-1 rate over an SNR grid, averaging over the distribution of the
/// interferer's rate. For the SUD the auxiliary model treats all interference
/// as Gaussian noise, so only `i_s`/`r1` are populated (NaN elsewhere).
pub fn strategy1_rate_curve(
    constellations: &[&Constellation],
    profile: &InterferenceProfile,
    r2_distribution: &[(f64, f64)],
    snr_grid_db: &[f64],
    detector: Detector,
    params: &MiParams,
    seed: u64,
) -> Result<Vec<RateResult>> {
    let psum: f64 = r2_distribution.iter().map(|(_, p)| p).sum();
    if (psum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "R2 distribution probabilities sum to {psum}"
        )));
    }
    snr_grid_db
        .iter()
        .enumerate()
        .map(|(k, &snr_db)| {
            let point_seed = seed.wrapping_add(k as u64);
            match detector {
                Detector::Sud => {
                    let e = mi_sud(constellations, profile, snr_db, params, point_seed)?;
                    Ok(RateResult {
                        snr_db,
                        i1: f64::NAN,
                        i2: f64::NAN,
                        i_j: f64::NAN,
                        i_s: e.value,
                        i_a: f64::NAN,
                        r1: e.value,
                    })
                }
                Detector::Mud2 => {
                    let set = mi_all(constellations, profile, snr_db, params, point_seed)?;
                    let (mut r1, mut ia_avg) = (0.0, 0.0);
                    for &(r2, p) in r2_distribution {
                        let ia = rate_ia(r2, set.i1.value, set.i2.value, set.ij.value);
                        ia_avg += p * ia;
                        r1 += p * rate_theorem1(set.i_s.value, ia);
                    }
                    Ok(RateResult {
                        snr_db,
                        i1: set.i1.value,
                        i2: set.i2.value,
                        i_j: set.ij.value,
                        i_s: set.i_s.value,
                        i_a: ia_avg,
                        r1,
                    })
                }
            }
        })
        .collect()
}

/// Strategy 2: user 1 is served with both signals for a fraction `alpha` of
/// the time, so its rate is `alpha` times the sum-rate.
pub fn strategy2_rate(alpha: f64, ij: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(alpha * ij)
}

/// Strategy 3: half the interference-free rate at SNR boosted by
/// `1 + |gamma2|^2`.
pub fn strategy3_rate(
    constellation: &Constellation,
    residual_constellations: &[&Constellation],
    profile: &InterferenceProfile,
    snr_db: f64,
    params: &MiParams,
    seed: u64,
) -> Result<f64> {
    let gains = profile.gains()?;
    let amp = (1.0 + gains[1].norm_sqr()).sqrt();
    let res_gains: Vec<Complex64> = gains.iter().skip(2).copied().collect();
    if residual_constellations.len() != res_gains.len() {
        return Err(Error::InvalidParameter(format!(
            "{} residual constellations for {} residual gains",
            residual_constellations.len(),
            res_gains.len()
        )));
    }
    let e = mi_single_boosted(
        constellation,
        residual_constellations,
        &res_gains,
        amp,
        snr_db,
        params,
        seed,
    )?;
    Ok(0.5 * e.value)
}

/// Objective of the relative-phase search.
#[derive(Debug, Clone, Copy)]
pub enum PhaseObjective {
    Joint,
    R1 { r2: f64 },
}

/// Arg-max of the chosen objective over a uniform grid of gamma2 phases,
/// with common random numbers across grid points.
pub fn optimize_phase(
    constellations: &[&Constellation],
    profile: &InterferenceProfile,
    snr_db: f64,
    objective: PhaseObjective,
    grid_steps: usize,
    params: &MiParams,
    seed: u64,
) -> Result<f64> {
    if grid_steps < 8 {
        return Err(Error::InvalidParameter("phase grid needs at least 8 steps".into()));
    }
    let mut best_phase = 0.0;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..grid_steps {
        let phase = std::f64::consts::TAU * k as f64 / grid_steps as f64;
        let shifted = profile.with_gamma2_phase(phase);
        let set = mi_all(constellations, &shifted, snr_db, params, seed)?;
        let val = match objective {
            PhaseObjective::Joint => set.ij.value,
            PhaseObjective::R1 { r2 } => rate_theorem1(
                set.i_s.value,
                rate_ia(r2, set.i1.value, set.i2.value, set.ij.value),
            ),
        };
        if val > best_val + 1e-12 {
            best_val = val;
            best_phase = phase;
        }
    }
    Ok(best_phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::make_psk;
    use approx::assert_abs_diff_eq;

    fn two_signal_profile(lambda_db: f64, phase: f64) -> InterferenceProfile {
        InterferenceProfile::new(vec![lambda_db], Some(vec![phase])).unwrap()
    }

    #[test]
    fn gaussian_rates_branches() {
        // no interference: first branch for any R2
        let r = gaussian_rates(10.0, 0.0, 0.7);
        assert_abs_diff_eq!(r.r1, (11.0f64).log2(), epsilon = 1e-12);
        // huge R2: interference treated as noise
        let r = gaussian_rates(10.0, 0.79, 100.0);
        assert_abs_diff_eq!(r.r1, g(10.0 / (1.0 + 10.0 * 0.79 * 0.79)), epsilon = 1e-12);
        assert_abs_diff_eq!(r.i_a, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rate_ia_branches() {
        assert_abs_diff_eq!(rate_ia(0.0, 1.4, 1.2, 2.1), 1.4, epsilon = 1e-12);
        assert_abs_diff_eq!(rate_ia(1.2, 1.4, 1.2, 2.1), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rate_ia(1.0, 1.4, 1.2, 2.1), 1.1, epsilon = 1e-12);
    }

    #[test]
    fn cutoff_matches_analytic_inverse() {
        // Gaussian closed form: I2(snr) = G(snr*|g2|^2) = R2
        let g2 = 0.79;
        let r2 = 0.5;
        let f = |snr_db: f64| g(10f64.powf(snr_db / 10.0) * g2 * g2);
        let got = cutoff_snr(r2, f, -20.0, 20.0, 1e-4).unwrap();
        let analytic = 10.0 * (((2f64.powf(r2)) - 1.0) / (g2 * g2)).log10();
        assert_abs_diff_eq!(got, analytic, epsilon = 1e-3);
        // 10*log10((2^0.5 - 1)/0.624) = -1.78 dB
        assert!((analytic - -1.78).abs() < 0.01);
    }

    #[test]
    fn cutoff_monotone_in_r2() {
        let g2 = 0.79;
        let f = |snr_db: f64| g(10f64.powf(snr_db / 10.0) * g2 * g2);
        let a = cutoff_snr(0.3, f, -20.0, 20.0, 1e-3).unwrap();
        let b = cutoff_snr(0.8, f, -20.0, 20.0, 1e-3).unwrap();
        assert!(b > a);
    }

    #[test]
    fn cutoff_unreachable_r2_errors() {
        let f = |_snr_db: f64| 0.4;
        assert!(cutoff_snr(0.9, f, -20.0, 20.0, 1e-3).is_err());
    }

    #[test]
    fn zero_gain_decouples_the_users() {
        let qpsk = make_psk(4, 0.0).unwrap();
        let p = two_signal_profile(f64::INFINITY, 0.0);
        let params = MiParams { n_samples: 40_000, metric_snr_offset_db: 0.0 };
        let set = mi_all(&[&qpsk, &qpsk], &p, 6.0, &params, 7).unwrap();
        let slack = 3.0 * (set.i1.std_error + set.i_s.std_error);
        assert!((set.i1.value - set.i_s.value).abs() <= slack.max(1e-9));
    }

    #[test]
    fn chain_rule_holds() {
        let qpsk = make_psk(4, 0.0).unwrap();
        let p = two_signal_profile(2.0, std::f64::consts::FRAC_PI_4);
        let params = MiParams { n_samples: 40_000, metric_snr_offset_db: 0.0 };
        let set = mi_all(&[&qpsk, &qpsk], &p, 5.0, &params, 8).unwrap();
        let lhs = set.ij.value;
        let rhs = set.i_x2y.value + set.i1.value;
        let slack =
            3.0 * (set.ij.std_error + set.i_x2y.std_error + set.i1.std_error);
        assert!((lhs - rhs).abs() <= slack.max(1e-9), "chain rule violated: {lhs} vs {rhs}");
    }

    #[test]
    fn strategy2_and_degenerate_cases() {
        assert_abs_diff_eq!(strategy2_rate(0.0, 1.7).unwrap(), 0.0);
        assert_abs_diff_eq!(strategy2_rate(0.5, 1.7).unwrap(), 0.85);
        assert!(strategy2_rate(1.2, 1.0).is_err());
    }

    #[test]
    fn strategy1_degenerate_distribution_matches_theorem1() {
        let qpsk = make_psk(4, 0.0).unwrap();
        let p = two_signal_profile(0.0, std::f64::consts::FRAC_PI_4);
        let params = MiParams { n_samples: 40_000, metric_snr_offset_db: 0.0 };
        let curve = strategy1_rate_curve(
            &[&qpsk, &qpsk],
            &p,
            &[(0.5, 1.0)],
            &[4.0],
            Detector::Mud2,
            &params,
            11,
        )
        .unwrap();
        let set = mi_all(&[&qpsk, &qpsk], &p, 4.0, &params, 11).unwrap();
        let expect = rate_theorem1(
            set.i_s.value,
            rate_ia(0.5, set.i1.value, set.i2.value, set.ij.value),
        );
        assert_abs_diff_eq!(curve[0].r1, expect, epsilon = 1e-12);
    }

    #[test]
    fn mi_within_alphabet_bound() {
        let qpsk = make_psk(4, 0.0).unwrap();
        let p = two_signal_profile(0.0, std::f64::consts::FRAC_PI_4);
        let params = MiParams { n_samples: 40_000, metric_snr_offset_db: 0.0 };
        let set = mi_all(&[&qpsk, &qpsk], &p, 10.0, &params, 9).unwrap();
        for e in [set.i1, set.i2, set.ij, set.i_s, set.i_x2y] {
            assert!(e.value <= 4.0 + 3.0 * e.std_error);
            assert!(e.value >= -3.0 * e.std_error);
        }
    }

    #[test]
    fn determinism_for_fixed_seed() {
        let qpsk = make_psk(4, 0.0).unwrap();
        let p = two_signal_profile(2.0, 0.3);
        let params = MiParams { n_samples: 20_000, metric_snr_offset_db: 0.0 };
        let a = mi_all(&[&qpsk, &qpsk], &p, 5.0, &params, 42).unwrap();
        let b = mi_all(&[&qpsk, &qpsk], &p, 5.0, &params, 42).unwrap();
        assert_eq!(a.ij.value.to_bits(), b.ij.value.to_bits());
    }

    #[test]
    fn phase_optimum_for_unit_gain_qpsk() {
        let qpsk = make_psk(4, 0.0).unwrap();
        let p = two_signal_profile(0.0, 0.0);
        let params = MiParams { n_samples: 30_000, metric_snr_offset_db: 0.0 };
        let phase = optimize_phase(
            &[&qpsk, &qpsk],
            &p,
            5.0,
            PhaseObjective::Joint,
            16,
            &params,
            3,
        )
        .unwrap();
        // optimum in the orbit of pi/4 under the pi/2 symmetry of the joint set
        let reduced = phase.rem_euclid(std::f64::consts::FRAC_PI_2);
        assert!(
            (reduced - std::f64::consts::FRAC_PI_4).abs() < 0.2,
            "phase {phase} not equivalent to pi/4"
        );
    }
}
