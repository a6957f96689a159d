//! System model: augmented constellation, sparse device activity, flat
//! Rayleigh channel, noise and imperfect CSI.
//!
//! A frame spans `pilot_len + data_len` symbol periods. Device activity is
//! drawn once per frame: an active device transmits its assigned pilot
//! sequence followed by data symbols, an inactive device is silent for the
//! whole frame. The received matrix satisfies `Y = H·X + V` exactly by
//! construction.

use crate::coding::LdpcCode;
use crate::error::ConfigError;
use crate::linalg::{CMat, Complex64, C_ZERO};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Supported modulations for the active-symbol constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    Qpsk,
}

/// Constellation `A` plus the zero symbol for inactivity (`A_0 = A ∪ {0}`).
///
/// Symbol indices `0..active_points.len()` name the active points; the last
/// index (`zero_index`) names the zero symbol, which carries no bit label.
#[derive(Debug, Clone)]
pub struct AugmentedAlphabet {
    pub active_points: Vec<Complex64>,
    /// Per active point, `mc` label bits with values +1/-1 (+1 encodes bit 0).
    pub bit_labels: Vec<Vec<i8>>,
    pub mc: usize,
}

impl AugmentedAlphabet {
    #[inline]
    pub fn zero_index(&self) -> usize {
        self.active_points.len()
    }

    /// |A_0| = |A| + 1.
    #[inline]
    pub fn num_symbols(&self) -> usize {
        self.active_points.len() + 1
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Complex64 {
        if idx == self.zero_index() {
            C_ZERO
        } else {
            self.active_points[idx]
        }
    }

    pub fn label(&self, idx: usize) -> Option<&[i8]> {
        self.bit_labels.get(idx).map(|l| l.as_slice())
    }

    /// Active-point index whose label matches the given ±1 bits.
    pub fn index_of_label(&self, bits: &[i8]) -> Option<usize> {
        self.bit_labels.iter().position(|l| l == bits)
    }

    /// Uniform prior over all of A_0.
    pub fn uniform_priors(&self) -> Vec<f64> {
        vec![1.0 / self.num_symbols() as f64; self.num_symbols()]
    }

    /// Activity-aware prior: 1-p on the zero symbol, p split over A.
    pub fn activity_priors(&self, p: f64) -> Vec<f64> {
        let na = self.active_points.len();
        let mut pri = vec![p / na as f64; na];
        pri.push(1.0 - p);
        pri
    }
}

/// Builds the augmented alphabet with Gray bit labeling.
pub fn build_alphabet(modulation: Modulation) -> Result<AugmentedAlphabet, ConfigError> {
    match modulation {
        Modulation::Qpsk => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let signs = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
            let active_points = signs
                .iter()
                .map(|&(re, im)| Complex64::new(re * s, im * s))
                .collect();
            // Labels are the quadrant signs, so angularly adjacent points
            // differ in exactly one bit.
            let bit_labels = signs
                .iter()
                .map(|&(re, im)| vec![re as i8, im as i8])
                .collect();
            Ok(AugmentedAlphabet {
                active_points,
                bit_labels,
                mc: 2,
            })
        }
    }
}

/// Scenario dimensions and statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Device count N.
    pub n: usize,
    /// Spreading factor / receive dimension M.
    pub m: usize,
    /// Per-device activity probabilities p_n, each in (0, 1].
    pub activity_prob: Vec<f64>,
    /// Noise variance σ_v² (linear).
    pub noise_var: f64,
    /// Symbol variance σ_x² (linear).
    pub symbol_var: f64,
    /// CSI error variance σ_e² (linear); 0 means perfect CSI.
    pub csi_error_var: f64,
    /// Pilot symbol periods per frame.
    pub pilot_len: usize,
    /// Payload symbol periods per frame.
    pub data_len: usize,
}

impl SystemConfig {
    /// Desk-scale defaults: N=64, M=32, uniform p=0.2.
    pub fn default_desk() -> Self {
        SystemConfig {
            n: 64,
            m: 32,
            activity_prob: vec![0.2; 64],
            noise_var: 0.1,
            symbol_var: 1.0,
            csi_error_var: 0.0,
            pilot_len: 16,
            data_len: 16,
        }
    }

    pub fn uniform(n: usize, m: usize, p: f64) -> Self {
        SystemConfig {
            n,
            m,
            activity_prob: vec![p; n],
            noise_var: 0.1,
            symbol_var: 1.0,
            csi_error_var: 0.0,
            pilot_len: 16,
            data_len: 16,
        }
    }

    pub fn total_len(&self) -> usize {
        self.pilot_len + self.data_len
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::field("system.N", "N must be >= 1"));
        }
        if self.m == 0 {
            return Err(ConfigError::field("system.M", "M must be >= 1"));
        }
        if self.activity_prob.len() != self.n {
            return Err(ConfigError::field(
                "system.activity_prob",
                format!(
                    "expected {} entries, got {}",
                    self.n,
                    self.activity_prob.len()
                ),
            ));
        }
        for (i, &p) in self.activity_prob.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(ConfigError::field(
                    "system.activity_prob",
                    format!("p_{} = {} must be in (0, 1]", i, p),
                ));
            }
        }
        for (name, v) in [
            ("system.noise_var", self.noise_var),
            ("system.symbol_var", self.symbol_var),
            ("system.csi_error_var", self.csi_error_var),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::field(name, "variance must be >= 0 and finite"));
            }
        }
        Ok(())
    }
}

/// One simulated transmission.
#[derive(Debug, Clone)]
pub struct FrameRealization {
    /// True channel, M×N.
    pub h: CMat,
    /// Receiver-side CSI (equals `h` until corrupted).
    pub h_hat: CMat,
    pub active_mask: Vec<bool>,
    /// Transmitted symbols, N×T (columns of silent devices are zero).
    pub x: CMat,
    /// Symbol indices into A_0 for every (device, period).
    pub x_idx: Vec<Vec<usize>>,
    /// Noise, M×T.
    pub v: CMat,
    /// Received matrix, M×T; `Y = H·X + V` exactly.
    pub y: CMat,
    pub pilot_len: usize,
    pub data_len: usize,
    /// Assigned pilot symbol indices per device (known to the receiver for
    /// every device, transmitted only by active ones).
    pub assigned_pilots: Vec<Vec<usize>>,
    /// Information bits per device (coded frames; empty otherwise).
    pub info_bits: Vec<Vec<u8>>,
    /// Coded bits per device (coded frames; empty otherwise).
    pub coded_bits: Vec<Vec<u8>>,
}

impl FrameRealization {
    /// Received column at symbol period `t`.
    pub fn y_col(&self, t: usize) -> Vec<Complex64> {
        self.y.col(t)
    }

    pub fn is_data_period(&self, t: usize) -> bool {
        t >= self.pilot_len
    }
}

/// Sample CN(0, sigma2): real and imaginary parts each N(0, sigma2/2).
pub fn sample_cn<R: Rng>(rng: &mut R, sigma2: f64) -> Complex64 {
    let s = (sigma2 / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

fn draw_frame_inner<R: Rng>(
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    code: Option<&LdpcCode>,
    rng: &mut R,
) -> FrameRealization {
    let (n, m, t_total) = (cfg.n, cfg.m, cfg.total_len());
    let scale = cfg.symbol_var.sqrt();

    let h = CMat::from_fn(m, n, |_, _| sample_cn(rng, 1.0));
    let active_mask: Vec<bool> = cfg
        .activity_prob
        .iter()
        .map(|&p| rng.gen::<f64>() < p)
        .collect();

    let na = alphabet.active_points.len();
    let assigned_pilots: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..cfg.pilot_len).map(|_| rng.gen_range(0..na)).collect())
        .collect();

    let mut x = CMat::zeros(n, t_total);
    let mut x_idx = vec![vec![alphabet.zero_index(); t_total]; n];
    let mut info_bits = vec![Vec::new(); n];
    let mut coded_bits = vec![Vec::new(); n];

    for dev in 0..n {
        if !active_mask[dev] {
            continue;
        }
        for t in 0..cfg.pilot_len {
            let idx = assigned_pilots[dev][t];
            x_idx[dev][t] = idx;
            x.set(dev, t, alphabet.point(idx) * scale);
        }
        let data_syms: Vec<usize> = match code {
            None => (0..cfg.data_len).map(|_| rng.gen_range(0..na)).collect(),
            Some(code) => {
                let msg: Vec<u8> = (0..code.message_len())
                    .map(|_| rng.gen_range(0..2u8))
                    .collect();
                let cw = code.encode(&msg).expect("message length fixed by code");
                let mut syms = Vec::with_capacity(cfg.data_len);
                for pair in cw.chunks(alphabet.mc) {
                    let bits: Vec<i8> = pair.iter().map(|&b| if b == 0 { 1 } else { -1 }).collect();
                    syms.push(alphabet.index_of_label(&bits).expect("complete labeling"));
                }
                // Periods beyond the codeword carry uniform filler symbols.
                while syms.len() < cfg.data_len {
                    syms.push(rng.gen_range(0..na));
                }
                info_bits[dev] = msg;
                coded_bits[dev] = cw;
                syms
            }
        };
        for (k, &idx) in data_syms.iter().enumerate() {
            let t = cfg.pilot_len + k;
            x_idx[dev][t] = idx;
            x.set(dev, t, alphabet.point(idx) * scale);
        }
    }

    let v = CMat::from_fn(m, t_total, |_, _| sample_cn(rng, cfg.noise_var));

    let mut y = CMat::zeros(m, t_total);
    for i in 0..m {
        for t in 0..t_total {
            let mut acc = v.get(i, t);
            for dev in 0..n {
                acc += h.get(i, dev) * x.get(dev, t);
            }
            y.set(i, t, acc);
        }
    }

    FrameRealization {
        h_hat: h.clone(),
        h,
        active_mask,
        x,
        x_idx,
        v,
        y,
        pilot_len: cfg.pilot_len,
        data_len: cfg.data_len,
        assigned_pilots,
        info_bits,
        coded_bits,
    }
}

/// Draw one uncoded frame: active devices transmit uniform pilots and
/// uniform data symbols from A.
pub fn draw_frame<R: Rng>(
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    rng: &mut R,
) -> FrameRealization {
    draw_frame_inner(cfg, alphabet, None, rng)
}

/// Draw one coded frame: each active device transmits one LDPC codeword
/// mapped to QPSK symbols across the data section.
pub fn draw_frame_coded<R: Rng>(
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    code: &LdpcCode,
    rng: &mut R,
) -> Result<FrameRealization, ConfigError> {
    let needed = code.codeword_len() / alphabet.mc;
    if cfg.data_len < needed {
        return Err(ConfigError::field(
            "system.data_len",
            format!("coded frames need data_len >= {}", needed),
        ));
    }
    Ok(draw_frame_inner(cfg, alphabet, Some(code), rng))
}

/// Return `h + E` with E i.i.d. CN(0, sigma_e2).
pub fn corrupt_csi<R: Rng>(h: &CMat, sigma_e2: f64, rng: &mut R) -> CMat {
    assert!(sigma_e2 >= 0.0);
    if sigma_e2 == 0.0 {
        return h.clone();
    }
    CMat {
        rows: h.rows,
        cols: h.cols,
        data: h
            .data
            .iter()
            .map(|&v| v + sample_cn(rng, sigma_e2))
            .collect(),
    }
}

/// σ_v² for a target average SNR of `10·log10(N·R·σ_x²/σ_v²)` dB.
pub fn snr_to_noise_var(snr_db: f64, n: usize, rate: f64, sigma_x2: f64) -> f64 {
    assert!(snr_db.is_finite() && n >= 1 && rate > 0.0 && rate <= 1.0);
    n as f64 * rate * sigma_x2 / 10f64.powf(snr_db / 10.0)
}
