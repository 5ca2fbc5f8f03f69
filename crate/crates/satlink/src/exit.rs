//! EXIT-chart machinery: the J-function bridge, detector EXIT curves by
//! simulation, analytic decoder curves, projection of the multi-signal chart
//! onto two dimensions, convergence-threshold prediction and heuristic degree
//! optimization.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{complex_gaussian, InterferenceProfile};
use crate::constellation::{
    joint_constellation, make_16apsk, make_psk, Constellation, JointConstellation,
};
use crate::error::{Error, Result};
use crate::infotheory::chunk_rng;
use crate::ldpc::{cnd_exit, vnd_exit, DegreeDistribution};
use crate::mud::LabeledSet;

/// Piecewise polynomial approximation of the mutual information of a
/// consistent Gaussian LLR with standard deviation `sigma`.
pub fn j_function(sigma: f64) -> f64 {
    const SIGMA_STAR: f64 = 1.6363;
    if sigma <= 0.0 {
        0.0
    } else if sigma <= SIGMA_STAR {
        (-0.042_106_1 * sigma * sigma * sigma + 0.209_252 * sigma * sigma
            - 0.006_400_81 * sigma)
            .clamp(0.0, 1.0)
    } else if sigma < 10.0 {
        let e = 0.001_814_91 * sigma * sigma * sigma - 0.142_675 * sigma * sigma
            - 0.082_205_4 * sigma
            + 0.054_960_8;
        (1.0 - e.exp()).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Inverse of [`j_function`] by bisection on the same approximation, so the
/// round trip is self-consistent; MI at or above saturation maps to the
/// sigma cap of 10.
pub fn j_inverse(mi: f64) -> f64 {
    let mi = mi.clamp(0.0, 1.0);
    if mi <= 0.0 {
        return 0.0;
    }
    if mi >= j_function(10.0 - 1e-9) {
        return 10.0;
    }
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if j_function(mid) < mi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sampled extrinsic-vs-a-priori MI transfer function of one SISO block.
#[derive(Debug, Clone)]
pub struct ExitCurve {
    pub grid: Vec<f64>,
    pub extrinsic: Vec<f64>,
    pub context: String,
}

impl ExitCurve {
    pub fn new(grid: Vec<f64>, extrinsic: Vec<f64>, context: String) -> Result<Self> {
        if grid.len() != extrinsic.len() || grid.is_empty() {
            return Err(Error::InvalidParameter("curve grid/value length mismatch".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
        }
        if extrinsic.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidParameter("extrinsic MI outside [0,1]".into()));
        }
        Ok(Self { grid, extrinsic, context })
    }

    /// Monotone nondecreasing within the given slack.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.extrinsic.windows(2).all(|w| w[1] >= w[0] - slack)
    }

    /// Linear interpolation, clamped to the grid range.
    pub fn interpolate(&self, x: f64) -> f64 {
        interp1(&self.grid, &self.extrinsic, x)
    }

    /// Smallest a-priori MI whose extrinsic output reaches `target`
    /// (monotone inverse interpolation); 1.0 if never reached.
    pub fn inverse_at(&self, target: f64) -> f64 {
        if self.extrinsic[0] >= target {
            return self.grid[0];
        }
        for w in 0..self.grid.len() - 1 {
            let (y0, y1) = (self.extrinsic[w], self.extrinsic[w + 1]);
            if y1 >= target {
                if y1 <= y0 {
                    return self.grid[w + 1];
                }
                let t = (target - y0) / (y1 - y0);
                return self.grid[w] + t * (self.grid[w + 1] - self.grid[w]);
            }
        }
        1.0
    }

    /// `I_E(1) - I_E(0)`, the endpoint slope used to compare mappings.
    pub fn endpoint_span(&self) -> f64 {
        self.extrinsic[self.extrinsic.len() - 1] - self.extrinsic[0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\ni_a,i_e\n", self.context);
        for (a, e) in self.grid.iter().zip(&self.extrinsic) {
            out.push_str(&format!("{a:.6},{e:.6}\n"));
        }
        out
    }
}

fn interp1(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Everything the detector-EXIT simulation needs: the demapper's labeled
/// hypothesis set (auxiliary two-signal model), the residual interferers that
/// exist on the channel but not in the metric, and the noise figures.
#[derive(Debug, Clone)]
pub struct DetectorContext {
    pub set: LabeledSet,
    /// Number of leading label bits belonging to signal 1.
    pub bits1: usize,
    pub residual_gains: Vec<Complex64>,
    pub residual_constellations: Vec<Constellation>,
    /// Thermal noise variance on the channel.
    pub noise_var: f64,
    /// Metric variance of the auxiliary model (noise + residual power).
    pub metric_var: f64,
    pub label: String,
}

/// Bit labeling of the two-signal hypothesis set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingKind {
    /// Concatenated per-signal Gray labels.
    Classical,
    /// Circle-structured joint Gray labeling (equal-order MPSK, relative
    /// phase pi/M).
    JointGray,
}

/// Unit-energy constellations for the residual interferers `i = 3..=k`:
/// 8PSK everywhere except signal 5, which transmits 16APSK.
pub fn default_residual_constellations(k: usize) -> Result<Vec<Constellation>> {
    (3..=k)
        .map(|i| if i == 5 { make_16apsk(2.85) } else { make_psk(8, 0.0) })
        .collect()
}

impl DetectorContext {
    /// Two-signal MUD over the strongest interferer, residuals unmodeled.
    pub fn mud2(
        c1: &Constellation,
        c2: &Constellation,
        mapping: MappingKind,
        profile: &InterferenceProfile,
        snr_db: f64,
    ) -> Result<Self> {
        let gamma2 = profile.gamma2();
        let joint = match mapping {
            MappingKind::Classical => joint_constellation(c1, c2, gamma2),
            MappingKind::JointGray => {
                if c1.size() != c2.size() {
                    return Err(Error::InvalidParameter(
                        "joint Gray mapping needs equal-order signals".into(),
                    ));
                }
                let j = crate::constellation::joint_gray_mapping(c1.size())?;
                if (j.gamma2 - gamma2).norm() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "profile gamma2 {gamma2} incompatible with the joint \
                         Gray mapping's {}",
                        j.gamma2
                    )));
                }
                j
            }
        };
        Self::from_joint(&joint, profile, snr_db, &format!("{mapping:?}"))
    }

    /// MUD context from an explicit joint constellation (e.g. a remapped
    /// labeling); its embedded gamma2 must match the profile.
    pub fn from_joint(
        joint: &JointConstellation,
        profile: &InterferenceProfile,
        snr_db: f64,
    mapping_name: &str,
    ) -> Result<Self> {
        if (joint.gamma2 - profile.gamma2()).norm() > 1e-9 {
            return Err(Error::InvalidParameter(
                "joint constellation gamma2 differs from the profile's".into(),
            ));
        }
        let gains = profile.gains()?;
        let noise_var = 10f64.powf(-snr_db / 10.0);
        Ok(Self {
            set: LabeledSet::from_joint(joint),
            bits1: joint.bits1,
            residual_gains: gains[2..].to_vec(),
            residual_constellations: default_residual_constellations(profile.n_signals())?,
            noise_var,
            metric_var: noise_var + profile.residual_power(),
            label: format!(
                "snr_db={snr_db:.3} gamma2={:.4}{:+.4}j mapping={mapping_name}",
                profile.gamma2().re,
                profile.gamma2().im
            ),
        })
    }

    /// Interference-free single-signal demapper.
    pub fn single(c1: &Constellation, snr_db: f64) -> Self {
        let noise_var = 10f64.powf(-snr_db / 10.0);
        Self {
            set: LabeledSet::from_constellation(c1),
            bits1: c1.bits_per_symbol(),
            residual_gains: Vec::new(),
            residual_constellations: Vec::new(),
            noise_var,
            metric_var: noise_var,
            label: format!("snr_db={snr_db:.3} single"),
        }
    }
}

const EXIT_CHUNK: usize = 4096;

/// One Monte Carlo EXIT measurement: consistent Gaussian a-priori LLRs with
/// `sigma1` on signal-1 bits and `sigma2` on the rest; returns the extrinsic
/// MI of each signal's bits via `E[1 - log2(1 + e^{-L(1-2b)})]`.
fn exit_point(ctx: &DetectorContext, sigma1: f64, sigma2: f64, n: usize, seed: u64) -> (f64, f64) {
    let bits = ctx.set.bits;
    let bits2 = bits - ctx.bits1;
    let n_chunks = n.div_ceil(EXIT_CHUNK);
    let partials: Vec<(f64, f64, usize)> = (0..n_chunks as u64)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk);
            let start = chunk as usize * EXIT_CHUNK;
            let count = EXIT_CHUNK.min(n - start);
            let mut priors = vec![0.0f64; bits];
            let (mut acc1, mut acc2) = (0.0f64, 0.0f64);
            for _ in 0..count {
                let idx = rng.gen_range(0..ctx.set.points.len());
                let mut y = ctx.set.points[idx] + complex_gaussian(ctx.noise_var, &mut rng);
                for (g, c) in ctx.residual_gains.iter().zip(&ctx.residual_constellations) {
                    y += g * c.points[rng.gen_range(0..c.size())];
                }
                let label = &ctx.set.labels[idx];
                for (k, p) in priors.iter_mut().enumerate() {
                    let s = if k < ctx.bits1 { sigma1 } else { sigma2 };
                    *p = if s > 0.0 {
                        let z: f64 = rng.sample(StandardNormal);
                        0.5 * s * s * (1.0 - 2.0 * label[k] as f64) + s * z
                    } else {
                        0.0
                    };
                }
                let out = ctx.set.demap(y, ctx.metric_var, &priors);
                for (k, (&l, &b)) in out.llrs.iter().zip(label.iter()).enumerate() {
                    let x = l * (1.0 - 2.0 * b as f64);
                    // log2(1 + e^{-x}) without overflow
                    let lg = if x > 0.0 {
                        (-x).exp().ln_1p()
                    } else {
                        -x + x.exp().ln_1p()
                    } / std::f64::consts::LN_2;
                    if k < ctx.bits1 {
                        acc1 += 1.0 - lg;
                    } else {
                        acc2 += 1.0 - lg;
                    }
                }
            }
            (acc1, acc2, count)
        })
        .collect();
    let (mut s1, mut s2, mut total) = (0.0, 0.0, 0usize);
    for (a1, a2, c) in partials {
        s1 += a1;
        s2 += a2;
        total += c;
    }
    let i1 = if ctx.bits1 > 0 { s1 / (ctx.bits1 * total) as f64 } else { 0.0 };
    let i2 = if bits2 > 0 { s2 / (bits2 * total) as f64 } else { 0.0 };
    (i1.clamp(0.0, 1.0), i2.clamp(0.0, 1.0))
}

/// Which bits receive the a-priori information and which are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitMode {
    /// A-priori on every modeled bit, extrinsic averaged over every modeled
    /// bit (symmetric two-stream chart).
    Symmetric,
    /// A-priori on signal-2 bits only, extrinsic measured on signal-1 bits.
    CrossUser,
    /// A-priori and measurement both on signal-1 bits (single-signal BICM
    /// curve).
    SelfPrior,
}

/// Detector EXIT curve over an a-priori MI grid by Monte Carlo simulation.
pub fn detector_exit_curve(
    ctx: &DetectorContext,
    grid: &[f64],
    mode: ExitMode,
    n_symbols: usize,
    seed: u64,
) -> Result<ExitCurve> {
    if grid.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
        return Err(Error::InvalidParameter("a-priori grid outside [0,1]".into()));
    }
    let bits2 = ctx.set.bits - ctx.bits1;
    let mut extrinsic = Vec::with_capacity(grid.len());
    for &a in grid {
        let s = j_inverse(a);
        // common random numbers across the grid keep the curve monotone
        let point_seed = seed;
        let v = match mode {
            ExitMode::Symmetric => {
                let (i1, i2) = exit_point(ctx, s, s, n_symbols, point_seed);
                (i1 * ctx.bits1 as f64 + i2 * bits2 as f64) / ctx.set.bits as f64
            }
            ExitMode::CrossUser => exit_point(ctx, 0.0, s, n_symbols, point_seed).0,
            ExitMode::SelfPrior => exit_point(ctx, s, s, n_symbols, point_seed).0,
        };
        extrinsic.push(v);
    }
    ExitCurve::new(
        grid.to_vec(),
        extrinsic,
        format!("detector {} mode={mode:?} n={n_symbols} seed={seed}", ctx.label),
    )
}

/// Two-input MUD EXIT family: extrinsic MI toward each decoder as a function
/// of the a-priori MI pair.
#[derive(Debug, Clone)]
pub struct MudExitFamily {
    pub grid1: Vec<f64>,
    pub grid2: Vec<f64>,
    /// `ie1[i][j]` = extrinsic toward decoder 1 at `(grid1[i], grid2[j])`.
    pub ie1: Vec<Vec<f64>>,
    pub ie2: Vec<Vec<f64>>,
    pub context: String,
}

impl MudExitFamily {
    pub fn ie1_at(&self, a1: f64, a2: f64) -> f64 {
        bilinear(&self.grid1, &self.grid2, &self.ie1, a1, a2)
    }

    pub fn ie2_at(&self, a1: f64, a2: f64) -> f64 {
        bilinear(&self.grid1, &self.grid2, &self.ie2, a1, a2)
    }

    /// Role-swapped view (signal 2 as the measured user).
    pub fn transposed(&self) -> Self {
        let n1 = self.grid1.len();
        let n2 = self.grid2.len();
        let mut ie1 = vec![vec![0.0; n1]; n2];
        let mut ie2 = vec![vec![0.0; n1]; n2];
        for i in 0..n1 {
            for j in 0..n2 {
                ie1[j][i] = self.ie2[i][j];
                ie2[j][i] = self.ie1[i][j];
            }
        }
        Self {
            grid1: self.grid2.clone(),
            grid2: self.grid1.clone(),
            ie1,
            ie2,
            context: format!("{} (transposed)", self.context),
        }
    }
}

fn bilinear(xs: &[f64], ys: &[f64], grid: &[Vec<f64>], x: f64, y: f64) -> f64 {
    let col: Vec<f64> = grid.iter().map(|row| interp1(ys, row, y)).collect();
    interp1(xs, &col, x)
}

/// Simulate the full MUD family on the grid product.
pub fn mud_exit_family(
    ctx: &DetectorContext,
    grid1: &[f64],
    grid2: &[f64],
    n_symbols: usize,
    seed: u64,
) -> Result<MudExitFamily> {
    for g in [grid1, grid2] {
        if g.iter().any(|&a| !(0.0..=1.0).contains(&a)) || g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("bad a-priori grid".into()));
        }
    }
    let mut ie1 = vec![vec![0.0; grid2.len()]; grid1.len()];
    let mut ie2 = vec![vec![0.0; grid2.len()]; grid1.len()];
    for (i, &a1) in grid1.iter().enumerate() {
        let s1 = j_inverse(a1);
        for (j, &a2) in grid2.iter().enumerate() {
            let s2 = j_inverse(a2);
            // common random numbers across the whole family
            let (e1, e2) = exit_point(ctx, s1, s2, n_symbols, seed);
            ie1[i][j] = e1;
            ie2[i][j] = e2;
        }
    }
    Ok(MudExitFamily {
        grid1: grid1.to_vec(),
        grid2: grid2.to_vec(),
        ie1,
        ie2,
        context: format!("mud family {} n={n_symbols} seed={seed}", ctx.label),
    })
}

/// Analytic EXIT curve of an LDPC SISO decoder whose only input is the
/// detector's extrinsic information: `internal_iters` VND/CND passes, output
/// extrinsic toward the detector.
pub fn decoder_exit_curve(
    dist: &DegreeDistribution,
    internal_iters: usize,
    grid: &[f64],
) -> Result<ExitCurve> {
    dist.validate()?;
    let av = dist.avg_var_degree();
    let ac = dist.avg_check_degree();
    let mut extrinsic = Vec::with_capacity(grid.len());
    for &i_ch in grid {
        let mut i_ac = 0.0f64;
        for _ in 0..internal_iters {
            let i_ev: f64 = dist
                .vnd
                .iter()
                .map(|&(d, f)| d as f64 * f / av * vnd_exit(d, i_ac, i_ch))
                .sum();
            i_ac = dist
                .cnd
                .iter()
                .map(|&(d, f)| d as f64 * f / ac * cnd_exit(d, i_ev))
                .sum();
        }
        let s_c = j_inverse(i_ac);
        let out: f64 = dist
            .vnd
            .iter()
            .map(|&(d, f)| f * j_function((d as f64).sqrt() * s_c))
            .sum();
        extrinsic.push(out.clamp(0.0, 1.0));
    }
    ExitCurve::new(
        grid.to_vec(),
        extrinsic,
        format!("decoder rate={} iters={internal_iters}", dist.rate),
    )
}

/// Project the three-block chart onto two dimensions: for each a-priori MI
/// of decoder 1, run the MUD/decoder-2 subsystem to its fixed point and
/// report the extrinsic MI toward decoder 1.
pub fn projected_chart(
    family: &MudExitFamily,
    decoder2: &ExitCurve,
    decoder1: &ExitCurve,
    max_sub_iters: usize,
) -> Result<(ExitCurve, ExitCurve)> {
    let mut combined = Vec::with_capacity(family.grid1.len());
    for &a1 in &family.grid1 {
        let mut a2 = 0.0f64;
        let mut converged = false;
        for _ in 0..max_sub_iters {
            let e2 = family.ie2_at(a1, a2);
            let next = decoder2.interpolate(e2);
            if (next - a2).abs() < 1e-4 {
                a2 = next;
                converged = true;
                break;
            }
            a2 = next;
        }
        if !converged {
            return Err(Error::Estimation(format!(
                "MUD/decoder-2 fixed point not reached in {max_sub_iters} sub-iterations"
            )));
        }
        combined.push(family.ie1_at(a1, a2).clamp(0.0, 1.0));
    }
    let det = ExitCurve::new(
        family.grid1.clone(),
        combined,
        format!("projected {}", family.context),
    )?;
    Ok((det, decoder1.clone()))
}

/// Open tunnel: the detector-side curve lies strictly above the decoder-1
/// curve (plotted transposed) at every grid abscissa.
pub fn tunnel_open(detector: &ExitCurve, decoder1: &ExitCurve) -> bool {
    fixed_point_mi(detector, decoder1) > 0.99
}

/// Fixed point of the global iteration `x <- D(C(x))` started from zero
/// a-priori information; returns the decoder extrinsic at the fixed point.
///
/// This is the operational convergence criterion. The literal curve-crossing
/// test `C(x) > D^-1(x)` fails spuriously at the top end: a flat detector
/// curve saturates below the input level at which the decoder's extrinsic
/// toward the detector would reach 1, yet the decoder's internal recursion
/// has already escaped to vanishing error there. That escape is visible as
/// the decoder extrinsic jumping past 0.99, so the fixed point exceeding
/// 0.99 declares the tunnel open.
pub fn fixed_point_mi(detector: &ExitCurve, decoder1: &ExitCurve) -> f64 {
    let mut x = 0.0f64;
    for _ in 0..1000 {
        let next = decoder1.interpolate(detector.interpolate(x));
        if (next - x).abs() < 1e-7 {
            return next;
        }
        x = next;
    }
    x
}

/// Minimum vertical gap `C(x) - D^{-1}(x)` over a dense abscissa grid.
///
/// The abscissa is capped at MI 0.999: beyond that point the decoder is
/// operationally error-free, while both curves saturate just below 1 and the
/// literal gap at x = 1 would be negative at any finite SNR.
pub fn min_tunnel_gap(detector: &ExitCurve, decoder1: &ExitCurve) -> f64 {
    let mut gap = f64::INFINITY;
    for k in 0..=200 {
        let x = 0.999 * k as f64 / 200.0;
        let c = detector.interpolate(x);
        let d_inv = decoder1.inverse_at(x);
        gap = gap.min(c - d_inv);
    }
    gap
}

/// Bisection for the smallest SNR in `[lo_db, hi_db]` whose projected chart
/// has an open tunnel. The generator must use common random numbers so the
/// search is deterministic.
pub fn predict_threshold<F>(mut chart_at: F, lo_db: f64, hi_db: f64, tol_db: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(ExitCurve, ExitCurve)>,
{
    let open = |c: &(ExitCurve, ExitCurve)| tunnel_open(&c.0, &c.1);
    let hi_chart = chart_at(hi_db)?;
    if !open(&hi_chart) {
        return Err(Error::NotFound(format!(
            "no open tunnel up to {hi_db} dB"
        )));
    }
    if open(&chart_at(lo_db)?) {
        return Ok(lo_db);
    }
    let (mut lo, mut hi) = (lo_db, hi_db);
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if open(&chart_at(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Search space for [`optimize_degrees`]: three variable degrees
/// `(2, 3, d3)` with a uniform check degree; the edge-balance constraint
/// leaves the highest-degree fraction as the only free parameter.
#[derive(Debug, Clone)]
pub struct DegreeSearchSpace {
    pub d3_candidates: Vec<usize>,
    pub dc_candidates: Vec<usize>,
    pub f3_step: f64,
    /// Error-floor guard: maximum fraction of degree-2 variable nodes.
    pub max_f2: f64,
}

impl Default for DegreeSearchSpace {
    fn default() -> Self {
        Self {
            d3_candidates: vec![8, 10, 12, 15, 20, 30, 50],
            dc_candidates: vec![5, 6, 7, 8, 10, 12, 14],
            f3_step: 0.005,
            max_f2: 0.85,
        }
    }
}

/// Enumerate every rate-feasible `(2, 3, d3)` distribution in the space.
pub fn enumerate_candidates(rate: f64, space: &DegreeSearchSpace) -> Vec<DegreeDistribution> {
    let mut out = Vec::new();
    for &dc in &space.dc_candidates {
        let edge_sum = (1.0 - rate) * dc as f64;
        if edge_sum <= 2.0 {
            continue;
        }
        for &d3 in &space.d3_candidates {
            if d3 <= 3 {
                continue;
            }
            let f3_max = (edge_sum - 2.0) / (d3 as f64 - 2.0);
            let steps = (f3_max / space.f3_step).floor() as usize;
            for s in 0..=steps {
                let f_hi = s as f64 * space.f3_step;
                let f_mid = edge_sum - 2.0 - (d3 as f64 - 2.0) * f_hi;
                let f2 = 1.0 - f_mid - f_hi;
                if f_mid < -1e-12 || f2 < -1e-12 || f2 > space.max_f2 {
                    continue;
                }
                let mut vnd = vec![(2usize, f2.max(0.0)), (3usize, f_mid.max(0.0))];
                if f_hi > 0.0 {
                    vnd.push((d3, f_hi));
                }
                if let Ok(d) = DegreeDistribution::new(vnd, vec![(dc, 1.0)], rate) {
                    out.push(d);
                }
            }
        }
    }
    out
}

/// Heuristic curve-fitting optimizer: among the rate-feasible candidates with
/// an open tunnel at `context_snr_db`, return the one with the lowest
/// predicted threshold. `chart_at(dist, snr)` must build the projected chart
/// for a candidate, reusing common random numbers across calls.
pub fn optimize_degrees<F>(
    mut chart_at: F,
    rate: f64,
    space: &DegreeSearchSpace,
    context_snr_db: f64,
    search_lo_db: f64,
    tol_db: f64,
) -> Result<(DegreeDistribution, f64)>
where
    F: FnMut(&DegreeDistribution, f64) -> Result<(ExitCurve, ExitCurve)>,
{
    let candidates = enumerate_candidates(rate, space);
    if candidates.is_empty() {
        return Err(Error::NotFound("empty degree search space".into()));
    }
    let mut best: Option<(DegreeDistribution, f64)> = None;
    for cand in candidates {
        let chart = chart_at(&cand, context_snr_db)?;
        if !tunnel_open(&chart.0, &chart.1) {
            continue;
        }
        let thr = predict_threshold(
            |snr| chart_at(&cand, snr),
            search_lo_db,
            context_snr_db,
            tol_db,
        )?;
        if best.as_ref().map_or(true, |(_, b)| thr < *b) {
            best = Some((cand, thr));
        }
    }
    best.ok_or_else(|| Error::NotFound("no candidate with an open tunnel".into()))
}
