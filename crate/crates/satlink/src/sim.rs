//! End-to-end iterative detection/decoding BER simulation: coded frames
//! through the full multi-signal channel, joint demapping with decoder
//! feedback, and BER sweeps with deterministic parallel frame scheduling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::channel::{complex_gaussian, InterferenceProfile};
use crate::constellation::{
    joint_constellation, joint_gray_mapping, make_psk, strategy1_remap, Constellation,
};
use crate::error::{Error, Result};
use crate::exit::default_residual_constellations;
use crate::infotheory::chunk_rng;
use crate::ldpc::LdpcCode;
use crate::mud::{clamp_llr, LabeledSet};

/// Bit labeling used on the two modeled signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMapping {
    /// Independent per-signal Gray labels.
    Classical,
    /// Circle-structured joint Gray labeling (equal-order MPSK, relative
    /// phase pi/M).
    JointGray,
    /// Joint Gray labeling with the signal-1 labels re-permuted to minimize
    /// the neighbor Hamming cost of the useful signal.
    Strategy1Remap,
}

/// Complete description of one simulated link.
#[derive(Debug, Clone)]
pub struct FrameConfig {
    /// 1 = conventional with MUD2, 2 = time-shared dual transponder,
    /// 3 = Alamouti orthogonalization.
    pub strategy: u8,
    pub mapping: SimMapping,
    pub profile: InterferenceProfile,
    /// MPSK order of each modeled signal.
    pub m: usize,
    pub code1: LdpcCode,
    /// Code of the second modeled signal; signal 1's code if absent.
    pub code2: Option<LdpcCode>,
    /// Receiver-side SNR offset applied to the demapper metric only.
    pub metric_snr_offset_db: f64,
    pub max_global_iters: usize,
    pub bp_iters: usize,
    pub seed: u64,
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.strategy) {
            return Err(Error::InvalidParameter(format!("strategy {}", self.strategy)));
        }
        if self.max_global_iters == 0 || self.bp_iters == 0 {
            return Err(Error::InvalidParameter("iteration caps must be >= 1".into()));
        }
        if !self.m.is_power_of_two() || self.m < 2 {
            return Err(Error::InvalidParameter(format!("MPSK order {}", self.m)));
        }
        let b = self.m.trailing_zeros() as usize;
        if self.code1.n % b != 0 {
            return Err(Error::InvalidParameter(format!(
                "block length {} not a multiple of {b} bits/symbol",
                self.code1.n
            )));
        }
        if let Some(c2) = &self.code2 {
            if c2.n != self.code1.n {
                return Err(Error::InvalidParameter(
                    "both codes must share the block length".into(),
                ));
            }
        }
        if self.strategy == 3 && (self.code1.n / b) % 2 != 0 {
            return Err(Error::InvalidParameter(
                "Alamouti needs an even number of symbols per frame".into(),
            ));
        }
        Ok(())
    }

    /// Canonical text form hashed into the result fingerprint.
    pub fn canonical_string(&self) -> String {
        let code_hash = |c: &LdpcCode| {
            let mut h = Sha256::new();
            h.update(c.to_text().as_bytes());
            hex(&h.finalize()[..8])
        };
        format!(
            "strategy={} mapping={:?} lambdas={:?} phases={:?} m={} code1={} code2={} \
             offset={} global={} bp={} seed={}",
            self.strategy,
            self.mapping,
            self.profile.lambdas_db,
            self.profile.phases,
            self.m,
            code_hash(&self.code1),
            self.code2.as_ref().map_or_else(|| "none".into(), code_hash),
            self.metric_snr_offset_db,
            self.max_global_iters,
            self.bp_iters,
            self.seed
        )
    }

    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_string().as_bytes());
        hex(&h.finalize()[..16])
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Error counts of one simulated frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameResult {
    pub bit_errors: u64,
    pub info_bits: u64,
    pub frame_error: bool,
    pub global_iters: usize,
}

/// One point of a BER sweep with a binomial 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub errors: u64,
    pub bits: u64,
    pub frames: u64,
    pub ber: f64,
    pub ci95: (f64, f64),
}

impl BerPoint {
    fn from_counts(snr_db: f64, errors: u64, bits: u64, frames: u64) -> Self {
        let p = if bits > 0 { errors as f64 / bits as f64 } else { 0.0 };
        let half = if bits > 0 {
            1.96 * (p * (1.0 - p) / bits as f64).sqrt()
        } else {
            0.0
        };
        Self {
            snr_db,
            errors,
            bits,
            frames,
            ber: p,
            ci95: ((p - half).max(0.0), (p + half).min(1.0)),
        }
    }
}

/// Precomputed per-(config, SNR) state shared by every frame.
struct Engine {
    set: LabeledSet,
    bits1: usize,
    /// MSB-first label integer -> hypothesis index.
    lookup: Vec<u32>,
    residual_gains: Vec<num_complex::Complex64>,
    residual_consts: Vec<Constellation>,
    noise_var: f64,
    metric_var: f64,
    /// Code bit i of signal s maps to symbol-domain position perm[i].
    perm1: Vec<usize>,
    perm2: Vec<usize>,
    c1: Constellation,
    boost: f64,
}

impl Engine {
    fn build(cfg: &FrameConfig, snr_db: f64) -> Result<Self> {
        cfg.validate()?;
        let c1 = make_psk(cfg.m, 0.0)?;
        let c2 = make_psk(cfg.m, 0.0)?;
        let gamma2 = cfg.profile.gamma2();
        let joint = match cfg.mapping {
            SimMapping::Classical => joint_constellation(&c1, &c2, gamma2),
            SimMapping::JointGray => {
                let j = joint_gray_mapping(cfg.m)?;
                if (j.gamma2 - gamma2).norm() > 1e-9 {
                    return Err(Error::InvalidParameter(
                        "profile gamma2 incompatible with the joint Gray mapping".into(),
                    ));
                }
                j
            }
            SimMapping::Strategy1Remap => {
                let c1r = strategy1_remap(&c1, &c2, gamma2)?;
                joint_constellation(&c1r, &c2, gamma2)
            }
        };
        let set = LabeledSet::from_joint(&joint);
        let bits = set.bits;
        let mut lookup = vec![u32::MAX; 1 << bits];
        for (i, label) in set.labels.iter().enumerate() {
            let mut v = 0usize;
            for &b in label {
                v = (v << 1) | b as usize;
            }
            lookup[v] = i as u32;
        }
        let gains = cfg.profile.gains()?;
        let noise_var = 10f64.powf(-snr_db / 10.0);
        let metric_var =
            (10f64.powf(-(snr_db + cfg.metric_snr_offset_db) / 10.0)
                + cfg.profile.residual_power())
            .max(1e-12);
        let n = cfg.code1.n;
        let mut irng = ChaCha12Rng::seed_from_u64(cfg.seed ^ 0x1337_c0de_5eed_0001);
        let perm1 = random_permutation(n, &mut irng);
        let perm2 = random_permutation(n, &mut irng);
        Ok(Self {
            set,
            bits1: joint.bits1,
            lookup,
            residual_gains: gains[2..].to_vec(),
            residual_consts: default_residual_constellations(cfg.profile.n_signals())?,
            noise_var,
            metric_var,
            perm1,
            perm2,
            c1,
            boost: (1.0 + gamma2.norm_sqr()).sqrt(),
        })
    }
}

fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Simulate one frame. The frame index selects an independent, reproducible
/// random stream, so parallel and serial schedules agree bit for bit.
pub fn run_frame(cfg: &FrameConfig, snr_db: f64, frame_idx: u64) -> Result<FrameResult> {
    let engine = Engine::build(cfg, snr_db)?;
    run_frame_with(cfg, &engine, snr_db, frame_idx)
}

fn frame_rng(cfg: &FrameConfig, snr_db: f64, frame_idx: u64) -> ChaCha12Rng {
    chunk_rng(cfg.seed ^ snr_db.to_bits().rotate_left(17), frame_idx)
}

fn run_frame_with(
    cfg: &FrameConfig,
    eng: &Engine,
    snr_db: f64,
    frame_idx: u64,
) -> Result<FrameResult> {
    let mut rng = frame_rng(cfg, snr_db, frame_idx);
    match cfg.strategy {
        1 | 2 => run_mud_frame(cfg, eng, &mut rng),
        3 => run_alamouti_frame(cfg, eng, &mut rng),
        _ => unreachable!("validated"),
    }
}

fn run_mud_frame(cfg: &FrameConfig, eng: &Engine, rng: &mut ChaCha12Rng) -> Result<FrameResult> {
    let code1 = &cfg.code1;
    let code2 = cfg.code2.as_ref().unwrap_or(code1);
    let n = code1.n;
    let b = eng.bits1;
    let n_sym = n / b;

    let msg1: Vec<u8> = (0..code1.message_len()).map(|_| rng.gen_range(0..2u8)).collect();
    let msg2: Vec<u8> = (0..code2.message_len()).map(|_| rng.gen_range(0..2u8)).collect();
    let cw1 = code1.encode(&msg1)?;
    let cw2 = code2.encode(&msg2)?;

    // interleave into the symbol-bit domain
    let mut sb1 = vec![0u8; n];
    let mut sb2 = vec![0u8; n];
    for i in 0..n {
        sb1[eng.perm1[i]] = cw1[i];
        sb2[eng.perm2[i]] = cw2[i];
    }

    // both codewords' bits jointly select the transmitted point
    let mut ys = Vec::with_capacity(n_sym);
    for t in 0..n_sym {
        let mut v = 0usize;
        for k in 0..b {
            v = (v << 1) | sb1[t * b + k] as usize;
        }
        for k in 0..b {
            v = (v << 1) | sb2[t * b + k] as usize;
        }
        let idx = eng.lookup[v] as usize;
        let mut y = eng.set.points[idx] + complex_gaussian(eng.noise_var, rng);
        for (g, c) in eng.residual_gains.iter().zip(&eng.residual_consts) {
            y += g * c.points[rng.gen_range(0..c.size())];
        }
        ys.push(y);
    }

    let bits = eng.set.bits;
    let mut priors = vec![0.0f64; n_sym * bits];
    let mut llr1 = vec![0.0f64; n];
    let mut llr2 = vec![0.0f64; n];
    let mut iters_used = cfg.max_global_iters;
    let mut hard1 = Vec::new();
    let mut hard2 = Vec::new();
    for g in 1..=cfg.max_global_iters {
        for (t, &y) in ys.iter().enumerate() {
            let p = &priors[t * bits..(t + 1) * bits];
            let out = eng.set.demap(y, eng.metric_var, p);
            for k in 0..b {
                // detector extrinsic back into code-bit order
                let s1 = t * b + k;
                let s2 = t * b + k;
                llr1[s1] = out.llrs[k];
                llr2[s2] = out.llrs[b + k];
            }
        }
        // deinterleave
        let mut ch1 = vec![0.0f64; n];
        let mut ch2 = vec![0.0f64; n];
        for i in 0..n {
            ch1[i] = llr1[eng.perm1[i]];
            ch2[i] = llr2[eng.perm2[i]];
        }
        let out1 = code1.bp_decode(&ch1, cfg.bp_iters);
        let out2 = code2.bp_decode(&ch2, cfg.bp_iters);
        for i in 0..n {
            priors[symbol_bit(eng.perm1[i], b, bits, 0)] =
                clamp_llr(out1.posteriors[i] - ch1[i]);
            priors[symbol_bit(eng.perm2[i], b, bits, b)] =
                clamp_llr(out2.posteriors[i] - ch2[i]);
        }
        hard1 = out1.hard;
        hard2 = out2.hard;
        if out1.converged && out2.converged {
            iters_used = g;
            break;
        }
    }

    let err1 = count_errors(&code1.extract_message(&hard1), &msg1);
    let err2 = count_errors(&code2.extract_message(&hard2), &msg2);
    let (bit_errors, info_bits) = if cfg.strategy == 2 {
        // both transponders carry the user's data
        (err1 + err2, (msg1.len() + msg2.len()) as u64)
    } else {
        (err1, msg1.len() as u64)
    };
    Ok(FrameResult {
        bit_errors,
        info_bits,
        frame_error: bit_errors > 0,
        global_iters: iters_used,
    })
}

/// Symbol-domain flat index of code-bit position `pos` of the signal whose
/// bits start at `offset` within each symbol label.
fn symbol_bit(pos: usize, b: usize, bits: usize, offset: usize) -> usize {
    let t = pos / b;
    let k = pos % b;
    t * bits + offset + k
}

fn run_alamouti_frame(
    cfg: &FrameConfig,
    eng: &Engine,
    rng: &mut ChaCha12Rng,
) -> Result<FrameResult> {
    let code1 = &cfg.code1;
    let n = code1.n;
    let b = eng.bits1;
    let n_sym = n / b;
    let gamma2 = cfg.profile.gamma2();

    let msg1: Vec<u8> = (0..code1.message_len()).map(|_| rng.gen_range(0..2u8)).collect();
    let cw1 = code1.encode(&msg1)?;
    let mut sb = vec![0u8; n];
    for i in 0..n {
        sb[eng.perm1[i]] = cw1[i];
    }
    let sym_idx: Vec<usize> = (0..n_sym)
        .map(|t| {
            let mut v = 0usize;
            for k in 0..b {
                v = (v << 1) | sb[t * b + k] as usize;
            }
            v
        })
        .collect();
    let label_to_point: Vec<usize> = {
        // per-signal Gray labels of the component constellation
        let mut map = vec![usize::MAX; 1 << b];
        for (i, l) in eng.c1.labels.iter().enumerate() {
            let mut v = 0usize;
            for &bit in l {
                v = (v << 1) | bit as usize;
            }
            map[v] = i;
        }
        map
    };

    // combined observables, two per Alamouti pair
    let mut zs = Vec::with_capacity(n_sym);
    for pair in 0..n_sym / 2 {
        let x1 = eng.c1.points[label_to_point[sym_idx[2 * pair]]];
        let x2 = eng.c1.points[label_to_point[sym_idx[2 * pair + 1]]];
        let mut y1 = x1 + gamma2 * x2 + complex_gaussian(eng.noise_var, rng);
        let mut y2 =
            -x2.conj() + gamma2 * x1.conj() + complex_gaussian(eng.noise_var, rng);
        for (g, c) in eng.residual_gains.iter().zip(&eng.residual_consts) {
            y1 += g * c.points[rng.gen_range(0..c.size())];
            y2 += g * c.points[rng.gen_range(0..c.size())];
        }
        let (z1, z2) = crate::channel::alamouti_combine(y1, y2, gamma2);
        zs.push(z1);
        zs.push(z2);
    }

    // single-user demapping against the boosted constellation
    let boosted = LabeledSet {
        points: eng.c1.points.iter().map(|p| p * eng.boost).collect(),
        labels: eng.c1.labels.clone(),
        bits: b,
    };
    let flat = vec![0.0f64; b];
    let mut ch = vec![0.0f64; n];
    for (t, &z) in zs.iter().enumerate() {
        let out = boosted.demap(z, eng.metric_var, &flat);
        for k in 0..b {
            ch[t * b + k] = out.llrs[k];
        }
    }
    let mut deint = vec![0.0f64; n];
    for i in 0..n {
        deint[i] = ch[eng.perm1[i]];
    }
    let out = code1.bp_decode(&deint, cfg.bp_iters);
    let errs = count_errors(&code1.extract_message(&out.hard), &msg1);
    Ok(FrameResult {
        bit_errors: errs,
        info_bits: msg1.len() as u64,
        frame_error: errs > 0,
        global_iters: 1,
    })
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Per-point stopping rule of a BER sweep.
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_info_bits: u64,
    pub target_ber: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { min_errors: 100, max_info_bits: 2_000_000, target_ber: 1e-4 }
    }
}

const FRAME_BATCH: u64 = 32;

/// Sweep BER over ascending SNRs; each point runs until `min_errors` bit
/// errors or the bit budget, and the sweep stops early after two consecutive
/// points below the target BER. Frames are parallel but batch-scheduled so
/// the aggregate counts are schedule-independent.
pub fn sweep_ber(cfg: &FrameConfig, snrs_db: &[f64], stop: &StopRule) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    if snrs_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("SNR list must be ascending".into()));
    }
    let mut points = Vec::new();
    let mut below = 0u32;
    for &snr in snrs_db {
        let engine = Engine::build(cfg, snr)?;
        let (mut errors, mut bits, mut frames) = (0u64, 0u64, 0u64);
        while errors < stop.min_errors && bits < stop.max_info_bits {
            let batch: Vec<FrameResult> = (frames..frames + FRAME_BATCH)
                .into_par_iter()
                .map(|f| run_frame_with(cfg, &engine, snr, f))
                .collect::<Result<_>>()?;
            for r in batch {
                errors += r.bit_errors;
                bits += r.info_bits;
            }
            frames += FRAME_BATCH;
        }
        let point = BerPoint::from_counts(snr, errors, bits, frames);
        below = if point.ber < stop.target_ber { below + 1 } else { 0 };
        points.push(point);
        if below >= 2 {
            break;
        }
    }
    Ok(points)
}

/// SNR where the sweep crosses `target` BER, by log-linear interpolation;
/// zero-error points are floored at half an error.
pub fn crossing_snr(points: &[BerPoint], target: f64) -> Option<f64> {
    let floored = |p: &BerPoint| {
        if p.errors == 0 {
            0.5 / p.bits.max(1) as f64
        } else {
            p.ber
        }
    };
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (pa, pb) = (floored(a), floored(b));
        if pa >= target && pb < target {
            let t = (pa.log10() - target.log10()) / (pa.log10() - pb.log10());
            return Some(a.snr_db + t * (b.snr_db - a.snr_db));
        }
    }
    None
}

/// CSV rows with the full config fingerprint and iteration schedule.
pub fn ber_csv(cfg: &FrameConfig, points: &[BerPoint]) -> String {
    let mut out = format!(
        "# fingerprint={} schedule={}x{} {}\nsnr_db,errors,bits,frames,ber,ci_low,ci_high\n",
        cfg.fingerprint(),
        cfg.max_global_iters,
        cfg.bp_iters,
        cfg.canonical_string()
    );
    for p in points {
        out.push_str(&format!(
            "{:.3},{},{},{},{:.6e},{:.6e},{:.6e}\n",
            p.snr_db, p.errors, p.bits, p.frames, p.ber, p.ci95.0, p.ci95.1
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::{table2_distribution, CodeRate, DegreeDistribution};

    fn small_code(seed: u64) -> LdpcCode {
        let dist = table2_distribution(1, CodeRate::Half).unwrap();
        LdpcCode::peg_construct(1000, &dist, seed).unwrap()
    }

    fn base_config(strategy: u8, profile: InterferenceProfile) -> FrameConfig {
        FrameConfig {
            strategy,
            mapping: SimMapping::Classical,
            profile,
            m: 4,
            code1: small_code(1),
            code2: None,
            metric_snr_offset_db: 0.0,
            max_global_iters: 10,
            bp_iters: 20,
            seed: 42,
        }
    }

    fn quiet_profile() -> InterferenceProfile {
        InterferenceProfile::new(vec![f64::INFINITY; 5], None).unwrap()
    }

    #[test]
    fn noiseless_zero_errors_all_strategies() {
        for strategy in 1..=3u8 {
            // strategies 2 and 3 need a live second signal (gamma2 != 0)
            let profile = if strategy == 1 {
                quiet_profile()
            } else {
                InterferenceProfile::new(
                    vec![0.0, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY],
                    Some(vec![std::f64::consts::FRAC_PI_4, 0.0, 0.0, 0.0, 0.0]),
                )
                .unwrap()
            };
            let cfg = base_config(strategy, profile);
            let r = run_frame(&cfg, f64::INFINITY, 0).unwrap();
            assert_eq!(r.bit_errors, 0, "strategy {strategy}");
            assert_eq!(r.global_iters, 1, "strategy {strategy}");
            assert!(!r.frame_error);
        }
    }

    #[test]
    fn gamma2_zero_decouples_user1_from_code2() {
        // with gamma2 = 0 the user-1 error counts cannot depend on what the
        // second signal transmits
        let mut a = base_config(1, quiet_profile());
        let mut b = base_config(1, quiet_profile());
        a.code2 = None; // same code both signals
        b.code2 = Some(small_code(77)); // a different second code
        for frame in 0..3 {
            let ra = run_frame(&a, 1.1, frame).unwrap();
            let rb = run_frame(&b, 1.1, frame).unwrap();
            assert_eq!(ra.bit_errors, rb.bit_errors, "frame {frame}");
        }
    }

    #[test]
    fn sweep_is_deterministic_and_accounts_bits() {
        let cfg = base_config(1, quiet_profile());
        let stop = StopRule { min_errors: 20, max_info_bits: 40_000, target_ber: 1e-4 };
        let snrs = [1.0, 2.6];
        let p1 = sweep_ber(&cfg, &snrs, &stop).unwrap();
        let p2 = sweep_ber(&cfg, &snrs, &stop).unwrap();
        assert_eq!(p1, p2);
        for p in &p1 {
            assert!(p.errors <= p.bits);
            assert_eq!(p.bits, p.frames * cfg.code1.message_len() as u64);
            assert!(p.ci95.0 <= p.ber && p.ber <= p.ci95.1);
        }
    }

    #[test]
    fn sweep_monotone_trend_and_early_exit() {
        let cfg = base_config(1, quiet_profile());
        let stop = StopRule { min_errors: 30, max_info_bits: 60_000, target_ber: 2e-2 };
        let snrs = [0.0, 1.0, 2.6, 3.2, 4.0, 5.0];
        let points = sweep_ber(&cfg, &snrs, &stop).unwrap();
        assert!(points.len() < snrs.len(), "early exit expected");
        // broad monotone trend: first point worst, last point best
        assert!(points.first().unwrap().ber > points.last().unwrap().ber);
    }

    #[test]
    fn alamouti_combining_gain_matches_boosted_single_user() {
        // strategy 3 at SNR s ~ single user (gamma2 = 0) at s + 10log10(2)
        let profile3 = InterferenceProfile::new(
            vec![0.0, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY],
            Some(vec![std::f64::consts::FRAC_PI_4, 0.0, 0.0, 0.0, 0.0]),
        )
        .unwrap();
        let cfg3 = base_config(3, profile3);
        let cfg1 = base_config(3, quiet_profile());
        let snr = -0.9; // waterfall region for the boosted link
        let boost_db = 10.0 * (2.0f64).log10();
        let frames = 80u64;
        // compare frame error rates: bit errors are burst-correlated within
        // a frame, so the per-frame binomial model is the honest one
        let count = |cfg: &FrameConfig, s: f64| -> u64 {
            (0..frames)
                .map(|f| u64::from(run_frame(cfg, s, f).unwrap().frame_error))
                .sum()
        };
        let e3 = count(&cfg3, snr);
        let e1 = count(&cfg1, snr + boost_db);
        let n = frames as f64;
        let (p3, p1) = (e3 as f64 / n, e1 as f64 / n);
        let sigma = ((p3 * (1.0 - p3) + p1 * (1.0 - p1)) / n).sqrt();
        assert!(
            (p3 - p1).abs() <= (4.0 * sigma).max(4.0 / n),
            "p3={p3:.3} p1={p1:.3} sigma={sigma:.3}"
        );
    }

    #[test]
    fn config_validation_and_fingerprint() {
        let mut cfg = base_config(1, quiet_profile());
        let f1 = cfg.fingerprint();
        cfg.seed = 43;
        assert_ne!(f1, cfg.fingerprint());
        cfg.strategy = 9;
        assert!(cfg.validate().is_err());
        let mut odd = base_config(3, quiet_profile());
        odd.m = 3;
        assert!(odd.validate().is_err());
    }

    #[test]
    fn joint_mapping_frame_runs() {
        let dist = table2_distribution(2, CodeRate::Half).unwrap();
        let code = LdpcCode::peg_construct(1000, &dist, 5).unwrap();
        let profile = InterferenceProfile::preset("case1")
            .unwrap()
            .with_gamma2_phase(std::f64::consts::FRAC_PI_4);
        let cfg = FrameConfig {
            strategy: 2,
            mapping: SimMapping::JointGray,
            profile,
            m: 4,
            code1: code.clone(),
            code2: Some(LdpcCode::peg_construct(1000, &dist, 6).unwrap()),
            metric_snr_offset_db: 0.0,
            max_global_iters: 20,
            bp_iters: 20,
            seed: 7,
        };
        let r = run_frame(&cfg, 6.0, 0).unwrap();
        assert_eq!(r.info_bits, 2 * code.message_len() as u64);
        assert!(r.bit_errors <= r.info_bits);
        // comfortably above threshold: the frame should decode
        assert_eq!(r.bit_errors, 0);
    }

    #[test]
    fn degenerate_distribution_rejected() {
        assert!(DegreeDistribution::new(vec![(2, 0.9)], vec![(6, 1.0)], 0.5).is_err());
    }
}
