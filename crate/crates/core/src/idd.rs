//! Soft-information bridge between detector and decoder: activity-aware
//! symbol priors, equivalent-AWGN likelihood statistics, extrinsic LLRs, and
//! the outer iterative detection-and-decoding loop.

use crate::adaptive::FilterBank;
use crate::coding::LdpcCode;
use crate::counter::OpCounter;
use crate::error::ConfigError;
use crate::linalg::{cdot, CMat, Complex64, C_ZERO};
use crate::listdetect::{detect_symbol_period, DetectorConfig, StageObservation};
use crate::sysmodel::{AugmentedAlphabet, FrameRealization, SystemConfig};

/// LLR clamp applied everywhere soft information crosses a module boundary.
pub const L_MAX: f64 = 30.0;
/// Variance floor for the equivalent-channel statistic.
pub const ZETA2_MIN: f64 = 1e-10;

pub fn clamp_llr(l: f64) -> f64 {
    l.clamp(-L_MAX, L_MAX)
}

/// Activity-aware symbol priors over A_0 from decoder extrinsics.
///
/// prior(0) = 1 − p_n; prior(a) = p_n·Π_z [1 + exp(−a^z·L_e^z)]⁻¹ with the
/// ±1 bit labels of a. Sums to one for any clamped L_e.
pub fn symbol_priors(l_e: &[f64], p_n: f64, alphabet: &AugmentedAlphabet) -> Vec<f64> {
    assert_eq!(l_e.len(), alphabet.mc);
    let le: Vec<f64> = l_e.iter().map(|&l| clamp_llr(l)).collect();
    let mut priors = vec![0.0; alphabet.num_symbols()];
    priors[alphabet.zero_index()] = 1.0 - p_n;
    for idx in 0..alphabet.num_symbols() {
        let Some(label) = alphabet.label(idx) else {
            continue;
        };
        let mut pr = p_n;
        for (z, &b) in label.iter().enumerate() {
            pr *= 1.0 / (1.0 + (-(b as f64) * le[z]).exp());
        }
        priors[idx] = pr;
    }
    priors
}

/// Exponentially-weighted accumulators behind the equivalent-AWGN statistics
/// μ (gain) and ζ² (variance) of a device's soft output.
#[derive(Debug, Clone)]
pub struct EquivalentChannelStats {
    acc_yx: Vec<Complex64>,
    acc_yy: CMat,
    /// Weight mass of acc_yx (Σλ^k over accumulated samples).
    w_yx: f64,
    /// Weight mass of acc_yy.
    w_yy: f64,
    pub lambda: f64,
}

impl EquivalentChannelStats {
    pub fn new(len: usize, lambda: f64) -> Self {
        EquivalentChannelStats {
            acc_yx: vec![C_ZERO; len],
            acc_yy: CMat::zeros(len, len),
            w_yx: 0.0,
            w_yy: 0.0,
            lambda,
        }
    }

    /// Fold one (input, reference symbol) sample into both accumulators.
    pub fn add_sample(&mut self, y: &[Complex64], x_ref: Complex64, ops: &mut OpCounter) {
        let len = self.acc_yx.len();
        assert_eq!(y.len(), len);
        let l = self.lambda;
        for (a, &yi) in self.acc_yx.iter_mut().zip(y) {
            *a = *a * l + yi * x_ref.conj();
        }
        ops.add(2 * len as u64);
        for i in 0..len {
            for j in 0..len {
                let v = self.acc_yy.get(i, j) * l + y[i] * y[j].conj();
                self.acc_yy.set(i, j, v);
            }
        }
        ops.add(2 * (len * len) as u64);
        self.w_yx = self.w_yx * l + 1.0;
        self.w_yy = self.w_yy * l + 1.0;
    }

    /// μ as the raw weighted sum wᴴ·(Σλ^k y·x*) — no normalization.
    pub fn mu_raw(&self, w: &[Complex64], ops: &mut OpCounter) -> Complex64 {
        cdot(w, &self.acc_yx, ops)
    }

    /// Weight-normalized gain estimate; zero before any samples.
    pub fn mu(&self, w: &[Complex64], ops: &mut OpCounter) -> Complex64 {
        if self.w_yx == 0.0 {
            return C_ZERO;
        }
        self.mu_raw(w, ops) / self.w_yx
    }

    /// Raw variance wᴴ(Σλ^k y·yᴴ)w − |μ|², floored.
    pub fn zeta2_raw(&self, w: &[Complex64], mu: Complex64, ops: &mut OpCounter) -> f64 {
        let aw = self.acc_yy.mul_vec(w, ops);
        let quad = cdot(w, &aw, ops).re;
        (quad - mu.norm_sqr()).max(ZETA2_MIN)
    }

    /// Weight-normalized variance estimate, floored.
    pub fn zeta2(&self, w: &[Complex64], mu: Complex64, ops: &mut OpCounter) -> f64 {
        if self.w_yy == 0.0 {
            return ZETA2_MIN;
        }
        let aw = self.acc_yy.mul_vec(w, ops);
        let quad = cdot(w, &aw, ops).re / self.w_yy;
        (quad - mu.norm_sqr()).max(ZETA2_MIN)
    }
}

/// Fold a sample into the stats and return the raw (μ, ζ²) pair.
pub fn update_equivalent_stats(
    stats: &mut EquivalentChannelStats,
    w: &[Complex64],
    y: &[Complex64],
    x_ref: Complex64,
    ops: &mut OpCounter,
) -> (Complex64, f64) {
    stats.add_sample(y, x_ref, ops);
    let mu = stats.mu_raw(w, ops);
    let zeta2 = stats.zeta2_raw(w, mu, ops);
    (mu, zeta2)
}

/// Complex-Gaussian density (1/πζ²)·exp(−|d̂ − μ·x̄|²/ζ²).
pub fn likelihood(d_hat: Complex64, mu: Complex64, zeta2: f64, x_bar: Complex64) -> f64 {
    assert!(zeta2 > 0.0);
    (-(d_hat - mu * x_bar).norm_sqr() / zeta2).exp() / (std::f64::consts::PI * zeta2)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Per-bit extrinsic LLRs L_c = log-ratio over the ±1 hypothesis sets minus
/// L_e, computed in the log domain and clamped to ±L_max. The zero symbol
/// belongs to neither hypothesis set. A bit whose two hypothesis sums both
/// vanish yields 0 and bumps the underflow counter.
pub fn extrinsic_llr(
    d_hat: Complex64,
    mu: Complex64,
    zeta2: f64,
    priors: &[f64],
    l_e: &[f64],
    alphabet: &AugmentedAlphabet,
    ops: &mut OpCounter,
) -> Vec<f64> {
    assert!(zeta2 > 0.0);
    let mc = alphabet.mc;
    assert_eq!(l_e.len(), mc);
    let mut out = Vec::with_capacity(mc);
    // Log-likelihood + log-prior per active symbol, shared across bits.
    let scored: Vec<(usize, f64)> = (0..alphabet.num_symbols())
        .filter(|&idx| idx != alphabet.zero_index() && priors[idx] > 0.0)
        .map(|idx| {
            let ll = -(d_hat - mu * alphabet.point(idx)).norm_sqr() / zeta2 + priors[idx].ln();
            (idx, ll)
        })
        .collect();
    ops.add(scored.len() as u64);
    for z in 0..mc {
        let pos: Vec<f64> = scored
            .iter()
            .filter(|(idx, _)| alphabet.label(*idx).unwrap()[z] > 0)
            .map(|&(_, s)| s)
            .collect();
        let neg: Vec<f64> = scored
            .iter()
            .filter(|(idx, _)| alphabet.label(*idx).unwrap()[z] < 0)
            .map(|&(_, s)| s)
            .collect();
        let lp = log_sum_exp(&pos);
        let ln = log_sum_exp(&neg);
        if lp == f64::NEG_INFINITY && ln == f64::NEG_INFINITY {
            ops.llr_underflows += 1;
            out.push(0.0);
        } else {
            out.push(clamp_llr(lp - ln - clamp_llr(l_e[z])));
        }
    }
    out
}

/// IDD loop knobs.
#[derive(Debug, Clone)]
pub struct IddConfig {
    pub t_outer: usize,
    pub spa_iters: usize,
    /// Restart the filter bank from the pilot-trained snapshot each outer
    /// iteration (otherwise adaptation carries over).
    pub restart_from_snapshot: bool,
    pub det: DetectorConfig,
}

/// IDD result with the per-iteration error trace.
#[derive(Debug, Clone)]
pub struct IddOutcome {
    /// Decoded message bits per device, final iteration.
    pub decoded_info_bits: Vec<Vec<u8>>,
    /// (bit errors, bits counted) per outer iteration, truly active devices.
    pub ber_trace: Vec<(u64, u64)>,
    /// Final-iteration symbol decisions, per device per data period.
    pub decisions: Vec<Vec<usize>>,
}

/// Run T_outer detection/decoding iterations over one coded frame. The bank
/// must be pilot-trained; iteration 1 uses zero a-priori information.
#[allow(clippy::too_many_arguments)]
pub fn idd_run(
    bank0: &FilterBank,
    frame: &FrameRealization,
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    code: &LdpcCode,
    idd: &IddConfig,
    ops: &mut OpCounter,
) -> Result<IddOutcome, ConfigError> {
    let n = cfg.n;
    let mc = alphabet.mc;
    let cw_periods = code.codeword_len() / mc;
    if cfg.data_len < cw_periods {
        return Err(ConfigError::field(
            "system.data_len",
            format!("IDD needs data_len >= {}", cw_periods),
        ));
    }
    if idd.t_outer == 0 {
        return Err(ConfigError::field("idd.t_outer", "must be >= 1"));
    }
    let filter_len = bank0.filter_len();
    let stats_lambda = bank0.hyper.lambda;

    // Decoder extrinsics, zero in the first iteration.
    let mut l_e = vec![vec![0.0f64; mc * cw_periods]; n];
    let mut ber_trace = Vec::with_capacity(idd.t_outer);
    let mut decoded = vec![Vec::new(); n];
    let mut final_decisions = vec![Vec::new(); n];
    let mut bank = bank0.clone();

    for _iter in 0..idd.t_outer {
        if idd.restart_from_snapshot {
            bank = bank0.clone();
        }
        let mut stats: Vec<EquivalentChannelStats> = (0..n)
            .map(|_| EquivalentChannelStats::new(filter_len, stats_lambda))
            .collect();
        let mut l_c = vec![vec![0.0f64; mc * cw_periods]; n];
        let mut decisions = vec![Vec::with_capacity(cfg.data_len); n];

        for k in 0..cfg.data_len {
            let t = frame.pilot_len + k;
            let priors: Vec<Vec<f64>> = (0..n)
                .map(|dev| {
                    let bits: &[f64] = if k < cw_periods {
                        &l_e[dev][k * mc..(k + 1) * mc]
                    } else {
                        &[0.0, 0.0][..mc]
                    };
                    symbol_priors(bits, cfg.activity_prob[dev], alphabet)
                })
                .collect();
            let y = frame.y_col(t);
            let mut stages: Vec<(usize, Vec<Complex64>, Complex64, usize)> = Vec::with_capacity(n);
            let mut hook = |obs: &StageObservation| {
                stages.push((obs.device, obs.input.to_vec(), obs.soft, obs.decision));
            };
            let out = detect_symbol_period(
                &mut bank,
                &y,
                &frame.h_hat,
                alphabet,
                &idd.det,
                Some(&priors),
                ops,
                Some(&mut hook),
            );
            for dev in 0..n {
                decisions[dev].push(out.decisions[dev]);
            }
            for (dev, input, soft, decision) in stages {
                let w = bank.filters[dev].w.clone();
                // Gain from samples up to t−1, variance including t.
                let mu = stats[dev].mu(&w, ops);
                stats[dev].add_sample(&input, alphabet.point(decision), ops);
                let zeta2 = stats[dev].zeta2(&w, mu, ops);
                if k < cw_periods {
                    let le_bits = &l_e[dev][k * mc..(k + 1) * mc];
                    let llrs = extrinsic_llr(soft, mu, zeta2, &priors[dev], le_bits, alphabet, ops);
                    l_c[dev][k * mc..(k + 1) * mc].copy_from_slice(&llrs);
                }
            }
        }

        let mut bit_errors = 0u64;
        let mut bits = 0u64;
        for dev in 0..n {
            let spa = code.spa_decode(&l_c[dev], idd.spa_iters);
            for (e, &x) in l_e[dev].iter_mut().zip(&spa.extrinsic_llrs) {
                *e = clamp_llr(x);
            }
            decoded[dev] = code.extract_message(&spa.hard_bits);
            if frame.active_mask[dev] && !frame.info_bits[dev].is_empty() {
                bits += frame.info_bits[dev].len() as u64;
                bit_errors += decoded[dev]
                    .iter()
                    .zip(&frame.info_bits[dev])
                    .filter(|(a, b)| a != b)
                    .count() as u64;
            }
        }
        ber_trace.push((bit_errors, bits));
        final_decisions = decisions;
    }

    Ok(IddOutcome {
        decoded_info_bits: decoded,
        ber_trace,
        decisions: final_decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::{train_on_pilots, RlsHyperParams};
    use crate::coding::build_ldpc;
    use crate::listdetect::{AdaptiveVariant, SacConfig, SacOverride};
    use crate::rng::{substream, Stream};
    use crate::sysmodel::{build_alphabet, draw_frame_coded, Modulation};
    use approx::assert_abs_diff_eq;

    fn qpsk() -> AugmentedAlphabet {
        build_alphabet(Modulation::Qpsk).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn priors_zero_llr() {
        let a = qpsk();
        let pr = symbol_priors(&[0.0, 0.0], 0.3, &a);
        assert_abs_diff_eq!(pr[a.zero_index()], 0.7, epsilon = 1e-14);
        for idx in 0..4 {
            assert_abs_diff_eq!(pr[idx], 0.075, epsilon = 1e-14);
        }
        let pr = symbol_priors(&[0.0, 0.0], 1.0, &a);
        assert_abs_diff_eq!(pr[a.zero_index()], 0.0, epsilon = 1e-14);
        for idx in 0..4 {
            assert_abs_diff_eq!(pr[idx], 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn priors_saturated_bits() {
        let a = qpsk();
        let pr = symbol_priors(&[1e9, 1e9], 0.5, &a);
        let target = a.index_of_label(&[1, 1]).unwrap();
        assert_abs_diff_eq!(pr[target], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(pr[a.zero_index()], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn priors_sum_to_one() {
        let a = qpsk();
        let mut rng = substream(60, 0, Stream::Misc(1));
        for _ in 0..200 {
            let le = [
                200.0 * (rand::Rng::gen::<f64>(&mut rng) - 0.5),
                200.0 * (rand::Rng::gen::<f64>(&mut rng) - 0.5),
            ];
            let p = rand::Rng::gen::<f64>(&mut rng);
            let pr = symbol_priors(&le, p, &a);
            assert_abs_diff_eq!(pr.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert!(pr.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn stats_degenerate_examples() {
        let mut ops = OpCounter::new();
        let mut st = EquivalentChannelStats::new(1, 1.0);
        let w = [c(1.0, 0.0)];
        let (mu, z2) = update_equivalent_stats(&mut st, &w, &[c(1.0, 0.0)], c(1.0, 0.0), &mut ops);
        assert_abs_diff_eq!(mu.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(z2, ZETA2_MIN, epsilon = 1e-20);

        // x_ref ≡ 0 history → μ = 0.
        let mut st = EquivalentChannelStats::new(1, 0.9);
        for _ in 0..20 {
            st.add_sample(&[c(0.3, -0.8)], C_ZERO, &mut ops);
        }
        assert_abs_diff_eq!(st.mu_raw(&w, &mut ops).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn stats_geometric_series_oracle() {
        // Stationary noiseless scalar channel y = h·x with constant x = 1:
        // raw μ = w*·h·Σ_{k<T}λ^k.
        let mut ops = OpCounter::new();
        let lambda = 0.92;
        let h = c(0.6, -1.1);
        let w = [c(0.4, 0.25)];
        let mut st = EquivalentChannelStats::new(1, lambda);
        let t = 100;
        for _ in 0..t {
            st.add_sample(&[h], c(1.0, 0.0), &mut ops);
        }
        let series = (1.0 - lambda.powi(t)) / (1.0 - lambda);
        let expect = w[0].conj() * h * series;
        let mu = st.mu_raw(&w, &mut ops);
        assert!(
            (mu - expect).norm() / expect.norm() < 1e-3,
            "{} vs {}",
            mu,
            expect
        );
    }

    #[test]
    fn likelihood_examples() {
        let mu = c(1.0, 0.0);
        let x = c(0.5, 0.5);
        let peak = likelihood(mu * x, mu, 0.3, x);
        assert_abs_diff_eq!(peak, 1.0 / (std::f64::consts::PI * 0.3), epsilon = 1e-12);

        let unit = likelihood(mu * x, mu, 1.0 / std::f64::consts::PI, x);
        assert_abs_diff_eq!(unit, 1.0, epsilon = 1e-12);

        // One standard-deviation offset: peak·e⁻¹.
        let z2: f64 = 0.4;
        let off = likelihood(mu * x + c(z2.sqrt(), 0.0), mu, z2, x);
        assert_abs_diff_eq!(
            off,
            (1.0 / (std::f64::consts::PI * z2)) * (-1.0f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn likelihood_integrates_to_one() {
        // 2-D quadrature over a generous box.
        let mu = c(0.8, -0.2);
        let x = c(0.7, 0.1);
        let z2 = 0.5;
        let step = 0.02;
        let half = 6.0;
        let mut total = 0.0;
        let cells = (2.0 * half / step) as i64;
        for i in 0..cells {
            for j in 0..cells {
                let re = -half + (i as f64 + 0.5) * step + (mu * x).re;
                let im = -half + (j as f64 + 0.5) * step + (mu * x).im;
                total += likelihood(c(re, im), mu, z2, x) * step * step;
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn llr_no_information_when_flat() {
        let a = qpsk();
        let mut ops = OpCounter::new();
        // ζ² huge → likelihood flat; with bitwise-independent priors the
        // prior log-ratio equals L_e, so L_c ≈ 0.
        let le = [1.3, -0.7];
        let priors = symbol_priors(&le, 0.6, &a);
        let out = extrinsic_llr(c(0.3, -0.2), c(1.0, 0.0), 1e9, &priors, &le, &a, &mut ops);
        for l in out {
            assert_abs_diff_eq!(l, 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn llr_dominant_point() {
        let a = qpsk();
        let mut ops = OpCounter::new();
        let target = a.index_of_label(&[1, 1]).unwrap();
        let d_hat = a.point(target);
        let priors = symbol_priors(&[0.0, 0.0], 0.8, &a);
        let out = extrinsic_llr(d_hat, c(1.0, 0.0), 1e-3, &priors, &[0.0, 0.0], &a, &mut ops);
        assert!(out.iter().all(|&l| l >= 10.0), "{:?}", out);
    }

    #[test]
    fn llr_antisymmetric_in_d_hat() {
        let a = qpsk();
        let mut ops = OpCounter::new();
        let priors = symbol_priors(&[0.0, 0.0], 0.5, &a);
        let mut rng = substream(61, 0, Stream::Misc(2));
        for _ in 0..100 {
            let d = crate::sysmodel::sample_cn(&mut rng, 1.0);
            let mu = c(0.9, 0.1);
            let p = extrinsic_llr(d, mu, 0.4, &priors, &[0.0, 0.0], &a, &mut ops);
            let q = extrinsic_llr(-d, mu, 0.4, &priors, &[0.0, 0.0], &a, &mut ops);
            for z in 0..2 {
                assert_abs_diff_eq!(p[z], -q[z], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn llr_zero_prior_mass_underflows_to_zero() {
        let a = qpsk();
        let mut ops = OpCounter::new();
        let mut priors = vec![0.0; a.num_symbols()];
        priors[a.zero_index()] = 1.0;
        let out = extrinsic_llr(
            c(0.1, 0.1),
            c(1.0, 0.0),
            0.5,
            &priors,
            &[0.0, 0.0],
            &a,
            &mut ops,
        );
        assert_eq!(out, vec![0.0, 0.0]);
        assert_eq!(ops.llr_underflows, 2);
    }

    fn orthogonal_coded_frame(
        code: &LdpcCode,
        seed: u64,
    ) -> (SystemConfig, FrameRealization, AugmentedAlphabet) {
        let a = qpsk();
        let mut cfg = SystemConfig::uniform(2, 2, 1.0);
        cfg.noise_var = 0.0;
        cfg.pilot_len = 48;
        cfg.data_len = 128;
        let mut rng = substream(seed, 0, Stream::Frame);
        let mut frame = draw_frame_coded(&cfg, &a, code, &mut rng).unwrap();
        frame.h = CMat::from_fn(2, 2, |i, j| if i == j { c(1.0, 0.0) } else { C_ZERO });
        frame.h_hat = frame.h.clone();
        for i in 0..2 {
            for t in 0..cfg.total_len() {
                frame.y.set(i, t, frame.x.get(i, t));
            }
        }
        (cfg, frame, a)
    }

    #[test]
    fn idd_noiseless_zero_ber_first_iteration() {
        let mut rng = substream(62, 0, Stream::CodeConstruction);
        let code = build_ldpc(256, 128, 6, &mut rng).unwrap();
        let (cfg, frame, a) = orthogonal_coded_frame(&code, 63);
        let mut bank = FilterBank::new(2, 2, true, RlsHyperParams::std_preset());
        let mut ops = OpCounter::new();
        train_on_pilots(&mut bank, &frame, &cfg, &a, &mut ops).unwrap();
        let idd = IddConfig {
            t_outer: 1,
            spa_iters: 20,
            restart_from_snapshot: true,
            det: DetectorConfig {
                variant: AdaptiveVariant::AaClDf,
                sac: SacConfig::default(),
                list_size: 2,
                sac_override: SacOverride::Auto,
                zeta2: 1e-3,
                symbol_scale: 1.0,
            },
        };
        let out = idd_run(&bank, &frame, &cfg, &a, &code, &idd, &mut ops).unwrap();
        assert_eq!(out.ber_trace.len(), 1);
        let (errs, bits) = out.ber_trace[0];
        assert_eq!(bits, 256);
        assert_eq!(errs, 0, "noiseless IDD should decode error-free");
        for dev in 0..2 {
            assert_eq!(out.decoded_info_bits[dev], frame.info_bits[dev]);
        }
    }

    #[test]
    fn idd_never_activates_clamped_device() {
        // Device 1 has p = 0 → prior(0) = 1 → never detected nonzero.
        let mut rng = substream(64, 0, Stream::CodeConstruction);
        let code = build_ldpc(256, 128, 6, &mut rng).unwrap();
        let a = qpsk();
        let mut cfg = SystemConfig::uniform(2, 2, 1.0);
        cfg.activity_prob[1] = 0.0;
        cfg.noise_var = 0.05;
        cfg.pilot_len = 32;
        cfg.data_len = 128;
        let mut frng = substream(64, 1, Stream::Frame);
        let frame = draw_frame_coded(&cfg, &a, &code, &mut frng).unwrap();
        let mut bank = FilterBank::new(2, 2, true, RlsHyperParams::std_preset());
        let mut ops = OpCounter::new();
        train_on_pilots(&mut bank, &frame, &cfg, &a, &mut ops).unwrap();
        let idd = IddConfig {
            t_outer: 2,
            spa_iters: 10,
            restart_from_snapshot: true,
            det: DetectorConfig {
                variant: AdaptiveVariant::AaClDf,
                sac: SacConfig::default(),
                list_size: 2,
                sac_override: SacOverride::Auto,
                zeta2: cfg.noise_var,
                symbol_scale: 1.0,
            },
        };
        let out = idd_run(&bank, &frame, &cfg, &a, &code, &idd, &mut ops).unwrap();
        assert!(out.decisions[1].iter().all(|&d| d == a.zero_index()));
    }
}
