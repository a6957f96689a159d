//! Monte-Carlo experiment engine: trial orchestration, metrics, complexity
//! accounting, and CSV/diagnostics serialization.
//!
//! Determinism contract: every result is a pure function of the config
//! (including the seed). Trials get derived substream seeds, all metrics are
//! integer counters, and aggregation is commutative, so the rayon schedule
//! cannot change any output byte.

use crate::adaptive::{train_on_pilots, FilterBank, RlsHyperParams};
use crate::baselines::{
    aa_mf_sic_detect, build_lmmse, oracle_lmmse_detect, sa_sic_detect, SicOrdering,
};
use crate::coding::{build_ldpc, LdpcCode};
use crate::counter::OpCounter;
use crate::error::ConfigError;
use crate::idd::{idd_run, IddConfig};
use crate::listdetect::{
    detect_symbol_period, slice, AdaptiveVariant, DetectorConfig, SacConfig, SacOverride,
};
use crate::rng::{substream, Stream};
use crate::sysmodel::{
    build_alphabet, corrupt_csi, draw_frame, draw_frame_coded, snr_to_noise_var, AugmentedAlphabet,
    FrameRealization, Modulation, SystemConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Every detector the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DetectorVariant {
    AaRls,
    AaClRls,
    AaRlsDf,
    AaClDf,
    Lmmse,
    OracleLmmse,
    SaSic,
    AaMfSic,
}

impl DetectorVariant {
    pub const ALL: [DetectorVariant; 8] = [
        DetectorVariant::AaRls,
        DetectorVariant::AaClRls,
        DetectorVariant::AaRlsDf,
        DetectorVariant::AaClDf,
        DetectorVariant::Lmmse,
        DetectorVariant::OracleLmmse,
        DetectorVariant::SaSic,
        DetectorVariant::AaMfSic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorVariant::AaRls => "AA_RLS",
            DetectorVariant::AaClRls => "AA_CL_RLS",
            DetectorVariant::AaRlsDf => "AA_RLS_DF",
            DetectorVariant::AaClDf => "AA_CL_DF",
            DetectorVariant::Lmmse => "LMMSE",
            DetectorVariant::OracleLmmse => "ORACLE_LMMSE",
            DetectorVariant::SaSic => "SA_SIC",
            DetectorVariant::AaMfSic => "AA_MF_SIC",
        }
    }

    pub fn adaptive(self) -> Option<AdaptiveVariant> {
        match self {
            DetectorVariant::AaRls => Some(AdaptiveVariant::AaRls),
            DetectorVariant::AaClRls => Some(AdaptiveVariant::AaClRls),
            DetectorVariant::AaRlsDf => Some(AdaptiveVariant::AaRlsDf),
            DetectorVariant::AaClDf => Some(AdaptiveVariant::AaClDf),
            _ => None,
        }
    }
}

impl fmt::Display for DetectorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorVariant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == norm)
            .ok_or_else(|| ConfigError::field("variant", format!("unknown detector `{}`", s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    Perfect,
    Imperfect,
}

impl CsiMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CsiMode::Perfect => "perfect",
            CsiMode::Imperfect => "imperfect",
        }
    }
}

/// `system` section of the JSON config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// Uniform activity probability p_n.
    pub p: f64,
    pub symbol_var: f64,
    pub pilot_len: usize,
    pub data_len: usize,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            n: 64,
            m: 32,
            p: 0.2,
            symbol_var: 1.0,
            pilot_len: 16,
            data_len: 16,
        }
    }
}

/// `rls` section: a named preset with optional per-field overrides.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlsSection {
    /// "std" (λ=0.998, δ=0.5, γ=0) or "reg" (λ=0.92, δ=0.7, β=10, γ=1e-4).
    pub preset: String,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
}

impl Default for RlsSection {
    fn default() -> Self {
        RlsSection {
            preset: "reg".into(),
            lambda: None,
            gamma: None,
            beta: None,
            delta: None,
        }
    }
}

impl RlsSection {
    pub fn resolve(&self) -> Result<RlsHyperParams, ConfigError> {
        let mut h = match self.preset.as_str() {
            "std" => RlsHyperParams::std_preset(),
            "reg" => RlsHyperParams::reg_preset(),
            other => {
                return Err(ConfigError::field(
                    "rls.preset",
                    format!("unknown preset `{}` (expected std|reg)", other),
                ))
            }
        };
        if let Some(v) = self.lambda {
            h.lambda = v;
        }
        if let Some(v) = self.gamma {
            h.gamma = v;
        }
        if let Some(v) = self.beta {
            h.beta = v;
        }
        if let Some(v) = self.delta {
            h.delta = v;
        }
        h.validate()?;
        Ok(h)
    }
}

/// Full experiment description; serialized as the JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub variants: Vec<DetectorVariant>,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub coded: bool,
    pub idd_iterations: usize,
    pub seed: u64,
    pub csi: CsiMode,
    pub list_size: usize,
    pub sac_lambda: f64,
    pub sac_override: SacOverrideSetting,
    pub rls: RlsSection,
    pub sic_ordering: SicOrderingSetting,
    pub spa_iters: usize,
    pub restart_bank_each_iter: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SacOverrideSetting {
    Auto,
    AlwaysReliable,
    AlwaysUnreliable,
}

impl From<SacOverrideSetting> for SacOverride {
    fn from(s: SacOverrideSetting) -> Self {
        match s {
            SacOverrideSetting::Auto => SacOverride::Auto,
            SacOverrideSetting::AlwaysReliable => SacOverride::AlwaysReliable,
            SacOverrideSetting::AlwaysUnreliable => SacOverride::AlwaysUnreliable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SicOrderingSetting {
    Norm,
    Sinr,
}

impl From<SicOrderingSetting> for SicOrdering {
    fn from(s: SicOrderingSetting) -> Self {
        match s {
            SicOrderingSetting::Norm => SicOrdering::Norm,
            SicOrderingSetting::Sinr => SicOrdering::Sinr,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: SystemSection::default(),
            variants: vec![DetectorVariant::AaClDf],
            snr_grid_db: vec![12.0],
            trials: 2000,
            coded: false,
            idd_iterations: 2,
            seed: 1,
            csi: CsiMode::Perfect,
            list_size: 2,
            sac_lambda: 2.0,
            sac_override: SacOverrideSetting::Auto,
            rls: RlsSection::default(),
            sic_ordering: SicOrderingSetting::Norm,
            spa_iters: 20,
            restart_bank_each_iter: true,
        }
    }
}

impl ExperimentConfig {
    pub fn code_rate(&self) -> f64 {
        if self.coded {
            0.5
        } else {
            1.0
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.base_system().validate()?;
        if self.variants.is_empty() {
            return Err(ConfigError::field("variants", "at least one detector"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(ConfigError::field("snr_grid_db", "grid must be nonempty"));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(ConfigError::field(
                "snr_grid_db",
                "SNR points must be finite",
            ));
        }
        if self.trials == 0 {
            return Err(ConfigError::field("trials", "must be >= 1"));
        }
        if self.list_size == 0 || self.list_size > 5 {
            return Err(ConfigError::field("list_size", "K must be in 1..=5"));
        }
        if !(self.sac_lambda > 1.0) {
            return Err(ConfigError::field("sac_lambda", "must be > 1"));
        }
        self.rls.resolve()?;
        if self.coded {
            if self.idd_iterations == 0 {
                return Err(ConfigError::field(
                    "idd_iterations",
                    "must be >= 1 when coded",
                ));
            }
            if self.system.data_len < 128 {
                return Err(ConfigError::field(
                    "system.data_len",
                    "coded frames need data_len >= 128 (one codeword)",
                ));
            }
            if self.spa_iters == 0 {
                return Err(ConfigError::field("spa_iters", "must be >= 1 when coded"));
            }
        }
        Ok(())
    }

    fn base_system(&self) -> SystemConfig {
        SystemConfig {
            n: self.system.n,
            m: self.system.m,
            activity_prob: vec![self.system.p; self.system.n],
            noise_var: 0.1,
            symbol_var: self.system.symbol_var,
            csi_error_var: 0.0,
            pilot_len: self.system.pilot_len,
            data_len: self.system.data_len,
        }
    }

    /// The system realization for one SNR point.
    pub fn system_at(&self, snr_db: f64) -> SystemConfig {
        let mut sys = self.base_system();
        sys.noise_var = snr_to_noise_var(snr_db, sys.n, self.code_rate(), sys.symbol_var);
        sys.csi_error_var = match self.csi {
            CsiMode::Perfect => 0.0,
            CsiMode::Imperfect => sys.noise_var / 5.0,
        };
        sys
    }
}

/// Exact integer counters for one (variant, SNR) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub variant: DetectorVariant,
    pub snr_db: f64,
    pub symbol_errors: u64,
    pub active_symbol_count: u64,
    pub bit_errors: u64,
    pub bit_count: u64,
    pub false_alarms: u64,
    pub inactive_symbol_count: u64,
    pub missed: u64,
    pub complex_mults: u64,
    pub trials_run: u64,
    pub trials_skipped: u64,
    pub resets: u64,
}

fn rate(num: u64, den: u64) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

impl MetricsRecord {
    fn new(variant: DetectorVariant, snr_db: f64) -> Self {
        MetricsRecord {
            variant,
            snr_db,
            symbol_errors: 0,
            active_symbol_count: 0,
            bit_errors: 0,
            bit_count: 0,
            false_alarms: 0,
            inactive_symbol_count: 0,
            missed: 0,
            complex_mults: 0,
            trials_run: 0,
            trials_skipped: 0,
            resets: 0,
        }
    }

    pub fn nser(&self) -> f64 {
        rate(self.symbol_errors, self.active_symbol_count)
    }

    pub fn ber(&self) -> f64 {
        rate(self.bit_errors, self.bit_count)
    }

    pub fn false_alarm_rate(&self) -> f64 {
        rate(self.false_alarms, self.inactive_symbol_count)
    }

    pub fn miss_rate(&self) -> f64 {
        rate(self.missed, self.active_symbol_count)
    }

    /// Complex multiplications per detected symbol, total/(N·data_len·trials).
    pub fn cmults_per_symbol(&self, n: usize, data_len: usize) -> f64 {
        let den = (n as u64) * (data_len as u64) * self.trials_run;
        rate(self.complex_mults, den)
    }
}

/// One line per skipped trial or notable numerical event.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub variant: String,
    pub snr_db: f64,
    pub trial: u64,
    pub message: String,
}

pub struct ExperimentOutput {
    pub records: Vec<MetricsRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Default)]
struct TrialDelta {
    symbol_errors: u64,
    active_symbol_count: u64,
    bit_errors: u64,
    bit_count: u64,
    false_alarms: u64,
    inactive_symbol_count: u64,
    missed: u64,
    complex_mults: u64,
    resets: u64,
}

/// Run the full experiment grid. Records are ordered (variant, SNR) as given
/// in the config; diagnostics are ordered by (variant, SNR, trial).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ConfigError> {
    cfg.validate()?;
    let alphabet = build_alphabet(Modulation::Qpsk)?;
    let code = if cfg.coded {
        let mut crng = substream(cfg.seed, 0, Stream::CodeConstruction);
        Some(build_ldpc(256, 128, 6, &mut crng)?)
    } else {
        None
    };

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for &variant in &cfg.variants {
        for &snr_db in &cfg.snr_grid_db {
            let sys = cfg.system_at(snr_db);
            let mut rec = MetricsRecord::new(variant, snr_db);
            let results: Vec<(u64, Result<TrialDelta, String>)> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    (
                        trial,
                        run_trial(cfg, &sys, &alphabet, code.as_ref(), variant, trial),
                    )
                })
                .collect();
            for (trial, res) in results {
                match res {
                    Ok(d) => {
                        rec.symbol_errors += d.symbol_errors;
                        rec.active_symbol_count += d.active_symbol_count;
                        rec.bit_errors += d.bit_errors;
                        rec.bit_count += d.bit_count;
                        rec.false_alarms += d.false_alarms;
                        rec.inactive_symbol_count += d.inactive_symbol_count;
                        rec.missed += d.missed;
                        rec.complex_mults += d.complex_mults;
                        rec.resets += d.resets;
                        rec.trials_run += 1;
                    }
                    Err(message) => {
                        rec.trials_skipped += 1;
                        diagnostics.push(Diagnostic {
                            variant: variant.to_string(),
                            snr_db,
                            trial,
                            message,
                        });
                    }
                }
            }
            records.push(rec);
        }
    }
    Ok(ExperimentOutput {
        records,
        diagnostics,
    })
}

fn run_trial(
    cfg: &ExperimentConfig,
    sys: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    code: Option<&LdpcCode>,
    variant: DetectorVariant,
    trial: u64,
) -> Result<TrialDelta, String> {
    let mut frng = substream(cfg.seed, trial, Stream::Frame);
    let mut frame = match code {
        Some(c) => draw_frame_coded(sys, alphabet, c, &mut frng).map_err(|e| e.to_string())?,
        None => draw_frame(sys, alphabet, &mut frng),
    };
    if sys.csi_error_var > 0.0 {
        let mut erng = substream(cfg.seed, trial, Stream::CsiError);
        frame.h_hat = corrupt_csi(&frame.h, sys.csi_error_var, &mut erng);
    }

    let mut ops = OpCounter::new();
    let mut d = TrialDelta::default();
    // decisions[dev][k] over the data section.
    let decisions: Vec<Vec<usize>>;
    // Bit metrics from the decoder when IDD ran; raw label bits otherwise.
    let mut idd_bits: Option<(u64, u64)> = None;

    if let Some(av) = variant.adaptive() {
        let hyper = cfg.rls.resolve().map_err(|e| e.to_string())?;
        let mut bank = FilterBank::new(sys.m, sys.n, av.uses_feedback(), hyper);
        let mut train_ops = OpCounter::new();
        train_on_pilots(&mut bank, &frame, sys, alphabet, &mut train_ops)
            .map_err(|e| e.to_string())?;
        d.resets += train_ops.resets;
        let det = DetectorConfig {
            variant: av,
            sac: SacConfig::new(cfg.sac_lambda).map_err(|e| e.to_string())?,
            list_size: cfg.list_size,
            sac_override: cfg.sac_override.into(),
            zeta2: sys.noise_var.max(1e-12),
            symbol_scale: sys.symbol_var.sqrt(),
        };
        if let Some(c) = code {
            let idd_cfg = IddConfig {
                t_outer: cfg.idd_iterations,
                spa_iters: cfg.spa_iters,
                restart_from_snapshot: cfg.restart_bank_each_iter,
                det,
            };
            let out = idd_run(&bank, &frame, sys, alphabet, c, &idd_cfg, &mut ops)
                .map_err(|e| e.to_string())?;
            idd_bits = out.ber_trace.last().copied();
            decisions = out.decisions;
        } else {
            let mut dec = vec![Vec::with_capacity(sys.data_len); sys.n];
            for k in 0..sys.data_len {
                let y = frame.y_col(sys.pilot_len + k);
                let out = detect_symbol_period(
                    &mut bank,
                    &y,
                    &frame.h_hat,
                    alphabet,
                    &det,
                    None,
                    &mut ops,
                    None,
                );
                for dev in 0..sys.n {
                    dec[dev].push(out.decisions[dev]);
                }
            }
            decisions = dec;
        }
    } else {
        decisions = detect_baseline(cfg, sys, alphabet, &frame, variant, &mut ops)
            .map_err(|e| e.to_string())?;
    }

    let mc = alphabet.mc;
    for dev in 0..sys.n {
        for (k, &decided) in decisions[dev].iter().enumerate() {
            let t = sys.pilot_len + k;
            let truth = frame.x_idx[dev][t];
            if frame.active_mask[dev] {
                d.active_symbol_count += 1;
                if decided != truth {
                    d.symbol_errors += 1;
                }
                if decided == alphabet.zero_index() {
                    d.missed += 1;
                }
                if idd_bits.is_none() {
                    d.bit_count += mc as u64;
                    let tl = alphabet.label(truth).expect("active symbols are labeled");
                    match alphabet.label(decided) {
                        Some(dl) => {
                            d.bit_errors +=
                                tl.iter().zip(dl).filter(|(a, b)| a != b).count() as u64;
                        }
                        None => d.bit_errors += mc as u64,
                    }
                }
            } else {
                d.inactive_symbol_count += 1;
                if decided != alphabet.zero_index() {
                    d.false_alarms += 1;
                }
            }
        }
    }
    if let Some((errs, bits)) = idd_bits {
        d.bit_errors = errs;
        d.bit_count = bits;
    }
    d.complex_mults = ops.cmults;
    d.resets += ops.resets;
    Ok(d)
}

fn detect_baseline(
    cfg: &ExperimentConfig,
    sys: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    frame: &FrameRealization,
    variant: DetectorVariant,
    ops: &mut OpCounter,
) -> Result<Vec<Vec<usize>>, ConfigError> {
    let mut dec = vec![Vec::with_capacity(sys.data_len); sys.n];
    let push = |dec: &mut Vec<Vec<usize>>, out: Vec<usize>| {
        for dev in 0..sys.n {
            dec[dev].push(out[dev]);
        }
    };
    match variant {
        DetectorVariant::Lmmse => {
            // One filter per frame; apply and slice per period.
            let det = build_lmmse(&frame.h_hat, sys, ops)
                .map_err(|e| ConfigError::field("lmmse", e.to_string()))?;
            let scale = sys.symbol_var.sqrt();
            let priors: Vec<Vec<f64>> = (0..sys.n)
                .map(|dev| alphabet.activity_priors(sys.activity_prob[dev]))
                .collect();
            for k in 0..sys.data_len {
                let y = frame.y_col(sys.pilot_len + k);
                let soft = det.apply(&y, ops);
                let out: Vec<usize> = (0..sys.n)
                    .map(|dev| slice(soft[dev] / scale, alphabet, &priors[dev], sys.noise_var))
                    .collect();
                push(&mut dec, out);
            }
        }
        DetectorVariant::OracleLmmse => {
            for k in 0..sys.data_len {
                let y = frame.y_col(sys.pilot_len + k);
                let out =
                    oracle_lmmse_detect(&y, &frame.h_hat, &frame.active_mask, sys, alphabet, ops)
                        .map_err(|e| ConfigError::field("oracle_lmmse", e.to_string()))?;
                push(&mut dec, out);
            }
        }
        DetectorVariant::SaSic => {
            for k in 0..sys.data_len {
                let y = frame.y_col(sys.pilot_len + k);
                let out = sa_sic_detect(
                    &y,
                    &frame.h_hat,
                    sys,
                    alphabet,
                    cfg.sic_ordering.into(),
                    ops,
                )
                .map_err(|e| ConfigError::field("sa_sic", e.to_string()))?;
                push(&mut dec, out);
            }
        }
        DetectorVariant::AaMfSic => {
            let sac = SacConfig::new(cfg.sac_lambda)?;
            for k in 0..sys.data_len {
                let y = frame.y_col(sys.pilot_len + k);
                let out = aa_mf_sic_detect(
                    &y,
                    &frame.h_hat,
                    sys,
                    alphabet,
                    sac,
                    cfg.list_size,
                    cfg.sac_override.into(),
                    cfg.sic_ordering.into(),
                    ops,
                )
                .map_err(|e| ConfigError::field("aa_mf_sic", e.to_string()))?;
                push(&mut dec, out);
            }
        }
        _ => unreachable!("adaptive variants handled by the caller"),
    }
    Ok(dec)
}

fn fmt_rate(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{}", v)
    }
}

pub const CSV_HEADER: &str =
    "variant,snr_db,csi,coded,idd_iter,trials,nser,ber,fa_rate,miss_rate,cmults_per_symbol,seed";

/// One CSV row per (variant, SNR) record.
pub fn to_csv(cfg: &ExperimentConfig, records: &[MetricsRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    let idd_iter = if cfg.coded { cfg.idd_iterations } else { 0 };
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.variant,
            r.snr_db,
            cfg.csi.as_str(),
            cfg.coded,
            idd_iter,
            r.trials_run,
            fmt_rate(r.nser()),
            fmt_rate(r.ber()),
            fmt_rate(r.false_alarm_rate()),
            fmt_rate(r.miss_rate()),
            fmt_rate(r.cmults_per_symbol(cfg.system.n, cfg.system.data_len)),
            cfg.seed,
        ));
    }
    s
}

/// Line-delimited JSON, one object per diagnostic.
pub fn diagnostics_to_jsonl(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| serde_json::to_string(d).expect("diagnostics serialize"))
        .map(|l| l + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> ExperimentConfig {
        ExperimentConfig {
            system: SystemSection {
                n: 2,
                m: 2,
                p: 1.0,
                symbol_var: 1.0,
                pilot_len: 48,
                data_len: 8,
            },
            variants: DetectorVariant::ALL.to_vec(),
            snr_grid_db: vec![180.0],
            trials: 2,
            seed: 7,
            rls: RlsSection {
                preset: "std".into(),
                ..RlsSection::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in DetectorVariant::ALL {
            assert_eq!(v.as_str().parse::<DetectorVariant>().unwrap(), v);
        }
        assert_eq!(
            "aa-cl-df".parse::<DetectorVariant>().unwrap(),
            DetectorVariant::AaClDf
        );
        assert!("BOGUS".parse::<DetectorVariant>().is_err());
    }

    #[test]
    fn config_validation_names_fields() {
        let mut cfg = ExperimentConfig::default();
        cfg.trials = 0;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("trials"), "{}", err);

        let mut cfg = ExperimentConfig::default();
        cfg.rls.lambda = Some(1.5);
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("lambda"), "{}", err);

        let mut cfg = ExperimentConfig::default();
        cfg.coded = true;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("data_len"), "{}", err);
    }

    #[test]
    fn rate_helpers() {
        let mut r = MetricsRecord::new(DetectorVariant::Lmmse, 10.0);
        r.symbol_errors = 0;
        r.active_symbol_count = 100;
        assert_eq!(r.nser(), 0.0);
        r.symbol_errors = 5;
        assert_eq!(r.nser(), 0.05);
        r.active_symbol_count = 0;
        assert!(r.nser().is_nan());
    }

    #[test]
    fn noiseless_all_variants_error_free() {
        let cfg = quick_cfg();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 8);
        for rec in &out.records {
            assert_eq!(rec.trials_skipped, 0, "{}", rec.variant);
            assert_eq!(
                rec.symbol_errors,
                0,
                "{} NSER {} (errors {}/{})",
                rec.variant,
                rec.nser(),
                rec.symbol_errors,
                rec.active_symbol_count
            );
        }
    }

    #[test]
    fn same_seed_identical_csv() {
        let mut cfg = quick_cfg();
        cfg.snr_grid_db = vec![8.0, 12.0];
        cfg.system.p = 0.5;
        cfg.trials = 5;
        let a = to_csv(&cfg, &run_experiment(&cfg).unwrap().records);
        let b = to_csv(&cfg, &run_experiment(&cfg).unwrap().records);
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
        assert_eq!(a.lines().count(), 1 + 8 * 2);
    }

    #[test]
    fn csv_independent_of_thread_count() {
        let mut cfg = quick_cfg();
        cfg.snr_grid_db = vec![10.0];
        cfg.system.p = 0.5;
        cfg.trials = 6;
        cfg.variants = vec![DetectorVariant::AaClDf, DetectorVariant::Lmmse];
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| to_csv(&cfg, &run_experiment(&cfg).unwrap().records))
        };
        assert_eq!(run_with(1), run_with(3));
    }

    #[test]
    fn forced_reliable_cl_df_equals_rls_df() {
        let mut base = quick_cfg();
        base.snr_grid_db = vec![10.0];
        base.system.p = 0.5;
        base.trials = 10;

        let mut a = base.clone();
        a.variants = vec![DetectorVariant::AaClDf];
        a.sac_override = SacOverrideSetting::AlwaysReliable;
        let mut b = base;
        b.variants = vec![DetectorVariant::AaRlsDf];

        let ra = &run_experiment(&a).unwrap().records[0];
        let rb = &run_experiment(&b).unwrap().records[0];
        assert_eq!(ra.symbol_errors, rb.symbol_errors);
        assert_eq!(ra.bit_errors, rb.bit_errors);
        assert_eq!(ra.false_alarms, rb.false_alarms);
        assert_eq!(ra.missed, rb.missed);
    }

    #[test]
    fn undefined_rates_marked_nan_in_csv() {
        // p cannot be 0 (validation), so force no actives by… using an
        // always-inactive mask is impossible through config; instead check
        // the formatter directly plus the miss/fa denominators at p=1.
        assert_eq!(fmt_rate(f64::NAN), "nan");
        let cfg = quick_cfg();
        let out = run_experiment(&cfg).unwrap();
        // p = 1: no inactive device-periods → fa_rate is nan in the CSV.
        let csv = to_csv(&cfg, &out.records);
        let first = csv.lines().nth(1).unwrap();
        let cols: Vec<&str> = first.split(',').collect();
        assert_eq!(cols[8], "nan");
    }

    #[test]
    fn diagnostics_serialize_as_jsonl() {
        let d = vec![Diagnostic {
            variant: "LMMSE".into(),
            snr_db: 4.0,
            trial: 3,
            message: "cholesky failed".into(),
        }];
        let s = diagnostics_to_jsonl(&d);
        assert_eq!(s.lines().count(), 1);
        assert!(s.contains("\"trial\":3"));
    }
}
