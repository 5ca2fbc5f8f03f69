//! Experiment configuration schema and the command implementations behind
//! the CLI: rate sweeps, EXIT charts, code design, code construction,
//! mapping export and BER campaigns. Every command is pure in
//! (config, seed) and produces deterministic text outputs carrying a
//! fingerprint of the canonical config serialization.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::InterferenceProfile;
use crate::constellation::{joint_constellation, joint_gray_mapping, make_psk, strategy1_remap};
use crate::error::{Error, Result};
use crate::exit::{
    decoder_exit_curve, default_residual_constellations, detector_exit_curve, mud_exit_family,
    optimize_degrees, projected_chart, tunnel_open, DegreeSearchSpace, DetectorContext, ExitMode,
    MappingKind, MudExitFamily,
};
use crate::infotheory::{
    mi_all, strategy1_rate_curve, strategy2_rate, strategy3_rate, Detector, MiParams, RateResult,
};
use crate::ldpc::{table2_distribution, CodeRate, DegreeDistribution, LdpcCode};
use crate::sim::{ber_csv, sweep_ber, FrameConfig, SimMapping, StopRule};

fn d_seed() -> u64 {
    1
}
fn d_m() -> usize {
    4
}
fn d_one() -> u64 {
    1
}
fn d_two() -> u64 {
    2
}
fn d_nsamples() -> usize {
    200_000
}
fn d_nsym() -> usize {
    50_000
}
fn d_grid() -> usize {
    11
}
fn d_iters() -> usize {
    20
}
fn d_global() -> usize {
    50
}
fn d_r2() -> f64 {
    0.5
}
fn d_alpha() -> f64 {
    0.5
}
fn d_minerr() -> u64 {
    100
}
fn d_budget() -> u64 {
    2_000_000
}
fn d_target() -> f64 {
    1e-4
}
fn d_classical() -> String {
    "classical".into()
}
fn d_joint() -> String {
    "joint".into()
}
fn d_table2() -> String {
    "table2".into()
}
fn d_strategies() -> Vec<String> {
    vec!["sud".into(), "mud2".into(), "strategy2".into(), "strategy3".into()]
}
fn d_strategy2() -> u8 {
    2
}
fn d_f3step() -> f64 {
    0.005
}
fn d_maxf2() -> f64 {
    0.85
}
fn d_toldb() -> f64 {
    0.1
}

/// Inclusive SNR grid in dB.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step_db > 0.0) || self.stop_db < self.start_db {
            return Err(Error::Config(format!(
                "empty SNR grid: start {} stop {} step {}",
                self.start_db, self.stop_db, self.step_db
            )));
        }
        let n = ((self.stop_db - self.start_db) / self.step_db).round() as usize + 1;
        Ok((0..n).map(|k| self.start_db + k as f64 * self.step_db).collect())
    }
}

/// Interference scenario: a named preset of the published gain tables or an
/// inline profile, plus an optional override of the gamma2 phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2_phase: Option<f64>,
}

impl ScenarioConfig {
    pub fn profile(&self) -> Result<InterferenceProfile> {
        let base = match (&self.preset, &self.lambdas_db) {
            (Some(name), None) => InterferenceProfile::preset(name)?,
            (None, Some(l)) => InterferenceProfile::new(l.clone(), self.phases.clone())?,
            _ => {
                return Err(Error::Config(
                    "scenario needs exactly one of `preset` or `lambdas_db`".into(),
                ))
            }
        };
        Ok(match self.gamma2_phase {
            Some(p) => base.with_gamma2_phase(p),
            None => base,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrConfig {
    pub snr: SnrGrid,
    #[serde(default = "d_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "d_nsamples")]
    pub n_samples: usize,
    #[serde(default = "d_r2")]
    pub r2: f64,
    /// Interferer ModCod rate distribution `(rate, probability)` for the
    /// strategy-1 average; degenerate at `r2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2_distribution: Option<Vec<(f64, f64)>>,
    #[serde(default = "d_m")]
    pub m: usize,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub metric_snr_offset_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitConfig {
    pub snr_db: f64,
    #[serde(default = "d_joint")]
    pub mapping: String,
    #[serde(default = "d_m")]
    pub m: usize,
    #[serde(default = "d_grid")]
    pub grid_points: usize,
    #[serde(default = "d_nsym")]
    pub n_symbols: usize,
    /// Emit the decoder curve and projected chart for this designed code.
    #[serde(default = "d_strategy2")]
    pub strategy: u8,
    #[serde(default)]
    pub rate: Option<String>,
    #[serde(default = "d_iters")]
    pub internal_iters: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub rate: f64,
    pub context_snr_db: f64,
    #[serde(default = "d_joint")]
    pub mapping: String,
    #[serde(default = "d_m")]
    pub m: usize,
    pub d3_candidates: Vec<usize>,
    pub dc_candidates: Vec<usize>,
    #[serde(default = "d_f3step")]
    pub f3_step: f64,
    #[serde(default = "d_maxf2")]
    pub max_f2: f64,
    #[serde(default)]
    pub search_lo_db: f64,
    #[serde(default = "d_toldb")]
    pub tol_db: f64,
    #[serde(default = "d_nsym")]
    pub n_symbols: usize,
    #[serde(default = "d_grid")]
    pub grid_points: usize,
    #[serde(default = "d_iters")]
    pub internal_iters: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub n: usize,
    #[serde(default = "d_table2")]
    pub source: String,
    #[serde(default = "d_strategy2")]
    pub strategy: u8,
    pub rate: String,
    #[serde(default = "d_one")]
    pub code_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerConfig {
    pub strategy: u8,
    #[serde(default = "d_classical")]
    pub mapping: String,
    #[serde(default = "d_m")]
    pub m: usize,
    pub n: usize,
    #[serde(default = "d_table2")]
    pub code_source: String,
    pub rate: String,
    pub snr: SnrGrid,
    #[serde(default = "d_minerr")]
    pub min_errors: u64,
    #[serde(default = "d_budget")]
    pub max_info_bits: u64,
    #[serde(default = "d_target")]
    pub target_ber: f64,
    #[serde(default = "d_global")]
    pub max_global_iters: usize,
    #[serde(default = "d_iters")]
    pub bp_iters: usize,
    #[serde(default)]
    pub metric_snr_offset_db: f64,
    #[serde(default = "d_one")]
    pub code_seed1: u64,
    #[serde(default = "d_two")]
    pub code_seed2: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingConfig {
    #[serde(default = "d_m")]
    pub m: usize,
    #[serde(default = "d_joint")]
    pub kind: String,
}

/// Top-level experiment description; each command reads its own section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "d_seed")]
    pub seed: u64,
    pub scenario: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ir: Option<IrConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit: Option<ExitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<CodeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ber: Option<BerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<MappingConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Schema-level validation of every present section.
    pub fn validate(&self) -> Result<()> {
        self.scenario.profile()?;
        if let Some(ir) = &self.ir {
            ir.snr.values()?;
            for s in &ir.strategies {
                parse_ir_strategy(s)?;
            }
            if !ir.m.is_power_of_two() || ir.m < 2 {
                return Err(Error::Config(format!("ir.m = {}", ir.m)));
            }
        }
        if let Some(e) = &self.exit {
            parse_mapping_kind(&e.mapping)?;
            if e.grid_points < 2 {
                return Err(Error::Config("exit.grid_points must be >= 2".into()));
            }
            if let Some(r) = &e.rate {
                parse_rate(r)?;
            }
        }
        if let Some(d) = &self.design {
            parse_mapping_kind(&d.mapping)?;
            if !(0.0 < d.rate && d.rate < 1.0) {
                return Err(Error::Config(format!("design.rate = {}", d.rate)));
            }
        }
        if let Some(c) = &self.code {
            parse_rate(&c.rate)?;
            parse_code_source(&c.source)?;
        }
        if let Some(b) = &self.ber {
            b.snr.values()?;
            parse_rate(&b.rate)?;
            parse_code_source(&b.code_source)?;
            parse_sim_mapping(&b.mapping)?;
            if !(1..=3).contains(&b.strategy) {
                return Err(Error::Config(format!("ber.strategy = {}", b.strategy)));
            }
        }
        if let Some(mc) = &self.mapping {
            parse_sim_mapping(&mc.kind)?;
        }
        Ok(())
    }

    /// Hash of the canonical (JSON) re-serialization plus the effective seed.
    pub fn fingerprint(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        h.update(self.seed.to_le_bytes());
        h.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_ir_strategy(s: &str) -> Result<&str> {
    match s {
        "sud" | "mud2" | "strategy2" | "strategy3" => Ok(s),
        other => Err(Error::Config(format!("unknown ir strategy `{other}`"))),
    }
}

fn parse_mapping_kind(s: &str) -> Result<MappingKind> {
    match s {
        "classical" => Ok(MappingKind::Classical),
        "joint" => Ok(MappingKind::JointGray),
        other => Err(Error::Config(format!("unknown mapping `{other}`"))),
    }
}

fn parse_sim_mapping(s: &str) -> Result<SimMapping> {
    match s {
        "classical" => Ok(SimMapping::Classical),
        "joint" => Ok(SimMapping::JointGray),
        "remap" => Ok(SimMapping::Strategy1Remap),
        other => Err(Error::Config(format!("unknown mapping `{other}`"))),
    }
}

fn parse_rate(s: &str) -> Result<CodeRate> {
    match s {
        "1/2" => Ok(CodeRate::Half),
        "3/4" => Ok(CodeRate::ThreeQuarter),
        other => Err(Error::Config(format!("unknown rate `{other}`"))),
    }
}

fn parse_code_source(s: &str) -> Result<&str> {
    match s {
        "table2" | "dvb" => Ok(s),
        other => Err(Error::Config(format!("unknown code source `{other}`"))),
    }
}

fn code_for(source: &str, strategy: u8, rate: CodeRate, n: usize, seed: u64) -> Result<LdpcCode> {
    let dist = match source {
        "table2" => table2_distribution(strategy, rate)?,
        "dvb" => crate::ldpc::dvb_like_distribution(rate),
        other => return Err(Error::Config(format!("unknown code source `{other}`"))),
    };
    LdpcCode::peg_construct(n, &dist, seed)
}

/// One named text artifact produced by a command.
pub type Output = (String, String);

fn rate_csv(fingerprint: &str, label: &str, rows: &[RateResult]) -> String {
    let mut out = format!("# fingerprint={fingerprint} curve={label}\n");
    out.push_str("snr_db,i1,i2,i_j,i_s,i_a,r1\n");
    for r in rows {
        out.push_str(&format!(
            "{:.3},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.snr_db, r.i1, r.i2, r.i_j, r.i_s, r.i_a, r.r1
        ));
    }
    out
}

/// Information-rate sweep: one CSV per requested strategy.
pub fn cmd_ir(cfg: &ExperimentConfig) -> Result<Vec<Output>> {
    let ir = cfg.ir.as_ref().ok_or_else(|| Error::Config("missing [ir] section".into()))?;
    let profile = cfg.scenario.profile()?;
    let snrs = ir.snr.values()?;
    let fp = cfg.fingerprint();
    let c1 = make_psk(ir.m, 0.0)?;
    let c2 = make_psk(ir.m, 0.0)?;
    let residuals = default_residual_constellations(profile.n_signals())?;
    let mut cons: Vec<&crate::constellation::Constellation> = vec![&c1, &c2];
    cons.extend(residuals.iter());
    let params = MiParams {
        n_samples: ir.n_samples,
        metric_snr_offset_db: ir.metric_snr_offset_db,
    };
    let degenerate = vec![(ir.r2, 1.0)];
    let r2_dist = ir.r2_distribution.as_deref().unwrap_or(&degenerate);

    let mut outputs = Vec::new();
    for name in &ir.strategies {
        let rows: Vec<RateResult> = match parse_ir_strategy(name)? {
            "sud" => strategy1_rate_curve(
                &cons, &profile, r2_dist, &snrs, Detector::Sud, &params, cfg.seed,
            )?,
            "mud2" => strategy1_rate_curve(
                &cons, &profile, r2_dist, &snrs, Detector::Mud2, &params, cfg.seed,
            )?,
            "strategy2" => snrs
                .iter()
                .enumerate()
                .map(|(k, &snr_db)| {
                    let set =
                        mi_all(&cons, &profile, snr_db, &params, cfg.seed.wrapping_add(k as u64))?;
                    Ok(RateResult {
                        snr_db,
                        i1: set.i1.value,
                        i2: set.i2.value,
                        i_j: set.ij.value,
                        i_s: set.i_s.value,
                        i_a: f64::NAN,
                        r1: strategy2_rate(ir.alpha, set.ij.value)?,
                    })
                })
                .collect::<Result<_>>()?,
            "strategy3" => {
                let res_refs: Vec<&crate::constellation::Constellation> =
                    residuals.iter().collect();
                snrs.iter()
                    .enumerate()
                    .map(|(k, &snr_db)| {
                        let r1 = strategy3_rate(
                            &c1,
                            &res_refs,
                            &profile,
                            snr_db,
                            &params,
                            cfg.seed.wrapping_add(k as u64),
                        )?;
                        Ok(RateResult {
                            snr_db,
                            i1: f64::NAN,
                            i2: f64::NAN,
                            i_j: f64::NAN,
                            i_s: f64::NAN,
                            i_a: f64::NAN,
                            r1,
                        })
                    })
                    .collect::<Result<_>>()?
            }
            _ => unreachable!("validated"),
        };
        outputs.push((format!("ir_{name}.csv"), rate_csv(&fp, name, &rows)));
    }
    Ok(outputs)
}

fn uniform_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| k as f64 / (points - 1) as f64).collect()
}

/// Detector (and optionally decoder/projected) EXIT curves as CSV.
pub fn cmd_exit(cfg: &ExperimentConfig) -> Result<Vec<Output>> {
    let ex = cfg.exit.as_ref().ok_or_else(|| Error::Config("missing [exit] section".into()))?;
    let profile = cfg.scenario.profile()?;
    let fp = cfg.fingerprint();
    let c1 = make_psk(ex.m, 0.0)?;
    let c2 = make_psk(ex.m, 0.0)?;
    let kind = parse_mapping_kind(&ex.mapping)?;
    let ctx = DetectorContext::mud2(&c1, &c2, kind, &profile, ex.snr_db)?;
    let grid = uniform_grid(ex.grid_points);
    let det = detector_exit_curve(&ctx, &grid, ExitMode::Symmetric, ex.n_symbols, cfg.seed)?;
    let mut outputs = vec![(
        "exit_detector.csv".to_string(),
        format!("# fingerprint={fp}\n{}", det.to_csv()),
    )];
    if let Some(rate) = &ex.rate {
        let dist = table2_distribution(ex.strategy, parse_rate(rate)?)?;
        // fine grid: the decoder curve is analytic and its convergence jump
        // must be resolved for the tunnel verdict
        let dec = decoder_exit_curve(&dist, ex.internal_iters, &uniform_grid(201))?;
        let family = mud_exit_family(&ctx, &grid, &grid, ex.n_symbols, cfg.seed)?;
        let (combined, dec1) = projected_chart(&family, &dec, &dec, 200)?;
        outputs.push((
            "exit_decoder.csv".to_string(),
            format!("# fingerprint={fp}\n{}", dec.to_csv()),
        ));
        let mut proj = format!(
            "# fingerprint={fp} tunnel_open={}\ni_a,detector_ie,decoder_ie\n",
            tunnel_open(&combined, &dec1)
        );
        for (k, a) in combined.grid.iter().enumerate() {
            proj.push_str(&format!(
                "{a:.6},{:.6},{:.6}\n",
                combined.extrinsic[k],
                dec1.interpolate(*a)
            ));
        }
        outputs.push(("exit_projected.csv".to_string(), proj));
    }
    Ok(outputs)
}

/// Shared chart builder with a per-SNR cache of the simulated MUD family;
/// decoder curves are analytic and cheap.
fn chart_builder<'a>(
    profile: &'a InterferenceProfile,
    m: usize,
    kind: MappingKind,
    grid: Vec<f64>,
    n_symbols: usize,
    internal_iters: usize,
    seed: u64,
) -> impl FnMut(&DegreeDistribution, f64) -> Result<(crate::exit::ExitCurve, crate::exit::ExitCurve)> + 'a
{
    let cache: RefCell<HashMap<u64, MudExitFamily>> = RefCell::new(HashMap::new());
    let c1 = make_psk(m, 0.0).expect("validated order");
    let c2 = make_psk(m, 0.0).expect("validated order");
    move |dist, snr_db| {
        let key = snr_db.to_bits();
        if !cache.borrow().contains_key(&key) {
            let ctx = DetectorContext::mud2(&c1, &c2, kind, profile, snr_db)?;
            let fam = mud_exit_family(&ctx, &grid, &grid, n_symbols, seed)?;
            cache.borrow_mut().insert(key, fam);
        }
        let dec = decoder_exit_curve(dist, internal_iters, &uniform_grid(201))?;
        let cache_ref = cache.borrow();
        let fam = cache_ref.get(&key).expect("just inserted");
        projected_chart(fam, &dec, &dec, 200)
    }
}

/// Degree-distribution search report.
pub fn cmd_design(cfg: &ExperimentConfig) -> Result<Vec<Output>> {
    let d =
        cfg.design.as_ref().ok_or_else(|| Error::Config("missing [design] section".into()))?;
    let profile = cfg.scenario.profile()?;
    let fp = cfg.fingerprint();
    let kind = parse_mapping_kind(&d.mapping)?;
    let grid = uniform_grid(d.grid_points);
    let mut chart = chart_builder(
        &profile,
        d.m,
        kind,
        grid,
        d.n_symbols,
        d.internal_iters,
        cfg.seed,
    );
    let space = DegreeSearchSpace {
        d3_candidates: d.d3_candidates.clone(),
        dc_candidates: d.dc_candidates.clone(),
        f3_step: d.f3_step,
        max_f2: d.max_f2,
    };
    let (best, threshold) = optimize_degrees(
        &mut chart,
        d.rate,
        &space,
        d.context_snr_db,
        d.search_lo_db,
        d.tol_db,
    )?;

    let mut report = format!(
        "# fingerprint={fp} context_snr_db={} rate={}\nname,vnd,cnd,threshold_db,feasible\n",
        d.context_snr_db, d.rate
    );
    let fmt_dist = |dist: &DegreeDistribution| {
        let v: Vec<String> =
            dist.vnd.iter().map(|(deg, f)| format!("{deg}:{f:.3}")).collect();
        let c: Vec<String> =
            dist.cnd.iter().map(|(deg, f)| format!("{deg}:{f:.3}")).collect();
        (v.join(" "), c.join(" "))
    };
    let (bv, bc) = fmt_dist(&best);
    report.push_str(&format!("best,{bv},{bc},{threshold:.2},true\n"));
    // feasibility of the designed reference rows at the context SNR
    for strategy in [1u8, 2u8] {
        for rate in [CodeRate::Half, CodeRate::ThreeQuarter] {
            let dist = table2_distribution(strategy, rate)?;
            if (dist.rate - d.rate).abs() > 1e-9 {
                continue;
            }
            let c = chart(&dist, d.context_snr_db)?;
            let (v, cn) = fmt_dist(&dist);
            report.push_str(&format!(
                "designed_s{strategy}_{},{v},{cn},,{}\n",
                match rate {
                    CodeRate::Half => "r12",
                    CodeRate::ThreeQuarter => "r34",
                },
                tunnel_open(&c.0, &c.1)
            ));
        }
    }
    Ok(vec![("design.csv".to_string(), report)])
}

/// PEG construction, serialized in the sparse text format.
pub fn cmd_build_code(cfg: &ExperimentConfig) -> Result<Vec<Output>> {
    let c = cfg.code.as_ref().ok_or_else(|| Error::Config("missing [code] section".into()))?;
    let fp = cfg.fingerprint();
    let rate = parse_rate(&c.rate)?;
    let code = code_for(&c.source, c.strategy, rate, c.n, c.code_seed)?;
    let name = format!("code_n{}_s{}_{}.txt", c.n, c.strategy, c.rate.replace('/', ""));
    Ok(vec![(name, format!("# fingerprint={fp}\n{}", code.to_text()))])
}

/// BER campaign over the configured sweep.
pub fn cmd_ber(cfg: &ExperimentConfig) -> Result<Vec<Output>> {
    let b = cfg.ber.as_ref().ok_or_else(|| Error::Config("missing [ber] section".into()))?;
    let profile = cfg.scenario.profile()?;
    let fp = cfg.fingerprint();
    let rate = parse_rate(&b.rate)?;
    let strategy_for_code = if b.strategy == 3 { 1 } else { b.strategy };
    let code1 = code_for(&b.code_source, strategy_for_code, rate, b.n, b.code_seed1)?;
    let code2 = if b.strategy == 2 {
        Some(code_for(&b.code_source, strategy_for_code, rate, b.n, b.code_seed2)?)
    } else {
        None
    };
    let frame = FrameConfig {
        strategy: b.strategy,
        mapping: parse_sim_mapping(&b.mapping)?,
        profile,
        m: b.m,
        code1,
        code2,
        metric_snr_offset_db: b.metric_snr_offset_db,
        max_global_iters: b.max_global_iters,
        bp_iters: b.bp_iters,
        seed: cfg.seed,
    };
    let stop = StopRule {
        min_errors: b.min_errors,
        max_info_bits: b.max_info_bits,
        target_ber: b.target_ber,
    };
    let points = sweep_ber(&frame, &b.snr.values()?, &stop)?;
    Ok(vec![(
        "ber.csv".to_string(),
        format!("# fingerprint={fp}\n{}", ber_csv(&frame, &points)),
    )])
}

/// Joint (or classical/remapped) constellation CSV.
pub fn cmd_export_mapping(cfg: &ExperimentConfig) -> Result<Vec<Output>> {
    let mc =
        cfg.mapping.as_ref().ok_or_else(|| Error::Config("missing [mapping] section".into()))?;
    let fp = cfg.fingerprint();
    let profile = cfg.scenario.profile()?;
    let joint = match parse_sim_mapping(&mc.kind)? {
        SimMapping::JointGray => joint_gray_mapping(mc.m)?,
        SimMapping::Classical => {
            let c1 = make_psk(mc.m, 0.0)?;
            let c2 = make_psk(mc.m, 0.0)?;
            joint_constellation(&c1, &c2, profile.gamma2())
        }
        SimMapping::Strategy1Remap => {
            let c1 = make_psk(mc.m, 0.0)?;
            let c2 = make_psk(mc.m, 0.0)?;
            let c1r = strategy1_remap(&c1, &c2, profile.gamma2())?;
            joint_constellation(&c1r, &c2, profile.gamma2())
        }
    };
    Ok(vec![(
        format!("mapping_{}_m{}.csv", mc.kind, mc.m),
        format!("# fingerprint={fp}\n{}", joint.to_csv()),
    )])
}

/// Dispatch by command name (the CLI subcommand).
pub fn run_command(cfg: &ExperimentConfig, command: &str) -> Result<Vec<Output>> {
    match command {
        "ir" => cmd_ir(cfg),
        "exit" => cmd_exit(cfg),
        "design" => cmd_design(cfg),
        "build-code" => cmd_build_code(cfg),
        "ber" => cmd_ber(cfg),
        "export-mapping" => cmd_export_mapping(cfg),
        other => Err(Error::Config(format!("unknown command `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(scenario: &str, extra: &str) -> String {
        format!("seed = 7\n[scenario]\n{scenario}\n{extra}")
    }

    #[test]
    fn parses_presets_and_rejects_unknown_keys() {
        let cfg = ExperimentConfig::from_toml(&minimal("preset = \"case1\"", "")).unwrap();
        assert_eq!(cfg.seed, 7);
        assert!(cfg.scenario.profile().is_ok());
        let bad = ExperimentConfig::from_toml(&minimal("preset = \"case1\"", "bogus = 1"));
        assert!(bad.is_err());
        let bad2 =
            ExperimentConfig::from_toml(&minimal("preset = \"case1\"\nwhat = 2", ""));
        assert!(bad2.is_err());
    }

    #[test]
    fn scenario_needs_exactly_one_source() {
        assert!(ExperimentConfig::from_toml(&minimal("", "")).is_err());
        assert!(ExperimentConfig::from_toml(&minimal(
            "preset = \"case1\"\nlambdas_db = [0.0, 25.0, 25.0, 27.0, 30.0]",
            ""
        ))
        .is_err());
    }

    #[test]
    fn empty_snr_grid_is_config_error() {
        let toml = minimal(
            "preset = \"case1\"",
            "[ir]\nsnr = { start_db = 5.0, stop_db = 1.0, step_db = 0.5 }",
        );
        assert!(ExperimentConfig::from_toml(&toml).is_err());
    }

    #[test]
    fn fingerprint_changes_with_seed() {
        let a = ExperimentConfig::from_toml(&minimal("preset = \"case1\"", "")).unwrap();
        let mut b = a.clone();
        b.seed = 8;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn export_mapping_joint_qpsk_has_16_rows() {
        let toml = minimal(
            "preset = \"case1\"\ngamma2_phase = 0.7853981633974483",
            "[mapping]\nm = 4\nkind = \"joint\"",
        );
        let cfg = ExperimentConfig::from_toml(&toml).unwrap();
        let out = cmd_export_mapping(&cfg).unwrap();
        assert_eq!(out.len(), 1);
        // fingerprint line + csv header + 16 points
        assert_eq!(out[0].1.trim_end().lines().count(), 18);
    }

    #[test]
    fn build_code_round_trip() {
        let toml = minimal(
            "preset = \"case1\"",
            "[code]\nn = 504\nstrategy = 2\nrate = \"1/2\"",
        );
        let cfg = ExperimentConfig::from_toml(&toml).unwrap();
        let out = cmd_build_code(&cfg).unwrap();
        let code = LdpcCode::from_text(&out[0].1).unwrap();
        assert_eq!(code.n, 504);
        let again = cmd_build_code(&cfg).unwrap();
        assert_eq!(out, again, "byte-identical re-run");
    }

    #[test]
    fn ir_requires_section_and_runs_small() {
        let cfg =
            ExperimentConfig::from_toml(&minimal("preset = \"case1\"", "")).unwrap();
        assert!(cmd_ir(&cfg).is_err());
        let toml = minimal(
            "preset = \"case1\"",
            "[ir]\nsnr = { start_db = 5.0, stop_db = 6.0, step_db = 1.0 }\n\
             strategies = [\"mud2\", \"strategy2\"]\nn_samples = 20000",
        );
        let cfg = ExperimentConfig::from_toml(&toml).unwrap();
        let out = cmd_ir(&cfg).unwrap();
        assert_eq!(out.len(), 2);
        for (_, text) in &out {
            assert!(text.starts_with("# fingerprint="));
            assert_eq!(text.trim_end().lines().count(), 4); // header + 2 rows + column line
        }
    }
}
