//! Soft-input soft-output symbol detectors: single-user demapper and
//! two-user MAP joint demapper producing extrinsic bit LLRs.
//!
//! LLR convention: natural log, positive favors bit 0. All outputs are
//! clamped to [`LLR_CLAMP`] to keep downstream decoder arithmetic stable.

use num_complex::Complex64;

use crate::constellation::{joint_constellation, Constellation, JointConstellation};

/// Clamp applied to every LLR produced by the detectors; the same value is
/// used in tests and oracles.
pub const LLR_CLAMP: f64 = 50.0;

/// Extrinsic bit LLRs for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftBits {
    pub llrs: Vec<f64>,
}

pub fn clamp_llr(l: f64) -> f64 {
    l.clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// A precomputed labeled point set a MAP demapper marginalizes over.
/// Hypothesis count per symbol is exactly `points.len()`.
#[derive(Debug, Clone)]
pub struct LabeledSet {
    pub points: Vec<Complex64>,
    pub labels: Vec<Vec<u8>>,
    pub bits: usize,
}

impl LabeledSet {
    pub fn from_constellation(c: &Constellation) -> Self {
        Self { points: c.points.clone(), labels: c.labels.clone(), bits: c.bits_per_symbol() }
    }

    pub fn from_joint(j: &JointConstellation) -> Self {
        Self { points: j.points.clone(), labels: j.labels.clone(), bits: j.bits_per_symbol() }
    }

    /// Exact MAP marginalization with Gaussian metric
    /// `exp(-|y - p|^2 / noise_var)` and factorized bit priors; returns the
    /// extrinsic LLR of every label bit and the number of metric evaluations.
    pub fn demap_counted(
        &self,
        y: Complex64,
        noise_var: f64,
        priors: &[f64],
        max_log: bool,
    ) -> (SoftBits, usize) {
        debug_assert_eq!(priors.len(), self.bits);
        let inv = 1.0 / noise_var;
        // log-domain metric per hypothesis, including all priors
        let mut metric = Vec::with_capacity(self.points.len());
        for (p, label) in self.points.iter().zip(&self.labels) {
            let mut m = -(y - p).norm_sqr() * inv;
            for (b, l) in label.iter().zip(priors) {
                // ln P(b) up to a bit-independent constant
                m += if *b == 0 { 0.5 * l } else { -0.5 * l };
            }
            metric.push(m);
        }
        let evals = metric.len();

        let mut llrs = Vec::with_capacity(self.bits);
        for k in 0..self.bits {
            let (mut m0, mut m1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            let (mut s0, mut s1) = (0.0f64, 0.0f64);
            if max_log {
                for (m, label) in metric.iter().zip(&self.labels) {
                    if label[k] == 0 {
                        m0 = m0.max(*m);
                    } else {
                        m1 = m1.max(*m);
                    }
                }
            } else {
                // two-pass log-sum-exp per bit
                for (m, label) in metric.iter().zip(&self.labels) {
                    if label[k] == 0 {
                        m0 = m0.max(*m);
                    } else {
                        m1 = m1.max(*m);
                    }
                }
                for (m, label) in metric.iter().zip(&self.labels) {
                    if label[k] == 0 {
                        s0 += (m - m0).exp();
                    } else {
                        s1 += (m - m1).exp();
                    }
                }
                m0 += s0.ln();
                m1 += s1.ln();
            }
            // posterior minus the prior of the bit under evaluation
            llrs.push(clamp_llr(m0 - m1 - priors[k]));
        }
        (SoftBits { llrs }, evals)
    }

    pub fn demap(&self, y: Complex64, noise_var: f64, priors: &[f64]) -> SoftBits {
        self.demap_counted(y, noise_var, priors, false).0
    }
}

/// Single-user demapper; `effective_noise_var` is the thermal noise plus the
/// power of every interferer the receiver ignores.
pub fn sud_demap(
    y: Complex64,
    c1: &Constellation,
    effective_noise_var: f64,
    priors1: &[f64],
) -> SoftBits {
    LabeledSet::from_constellation(c1).demap(y, effective_noise_var, priors1)
}

/// Two-user MAP joint demapper over all `M1*M2` hypotheses; extrinsic outputs
/// for every bit of both users.
pub fn mud2_demap(
    y: Complex64,
    c1: &Constellation,
    c2: &Constellation,
    gamma2: Complex64,
    noise_var: f64,
    priors1: &[f64],
    priors2: &[f64],
) -> (SoftBits, SoftBits) {
    let joint = joint_constellation(c1, c2, gamma2);
    let set = LabeledSet::from_joint(&joint);
    let mut priors = priors1.to_vec();
    priors.extend_from_slice(priors2);
    let out = set.demap(y, noise_var, &priors);
    let (a, b) = out.llrs.split_at(c1.bits_per_symbol());
    (SoftBits { llrs: a.to_vec() }, SoftBits { llrs: b.to_vec() })
}
