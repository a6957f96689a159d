//! l0-regularized RLS decision-feedback filter bank.
//!
//! One filter per device, stored at fixed length M (feedforward only) or
//! M+N (feedforward + feedback taps) depending on the bank's structure.
//! Updates run on the leading "excited" block of each filter: coordinates
//! that have only ever seen zero inputs keep their initial state exactly, so
//! restricting the rank-one recursion to the excited block is lossless and
//! saves most of the O(L²) work for early-order devices.

use crate::counter::OpCounter;
use crate::error::{ConfigError, NumericalError};
use crate::linalg::{CMat, Complex64, C_ZERO};
use crate::sysmodel::{AugmentedAlphabet, FrameRealization, SystemConfig};
use serde::{Deserialize, Serialize};

/// RLS hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RlsHyperParams {
    /// Forgetting factor, in (0, 1].
    pub lambda: f64,
    /// l0 regularization weight, >= 0.
    pub gamma: f64,
    /// Zero-attraction range parameter, > 0.
    pub beta: f64,
    /// Inverse-correlation initialization scale, > 0 (P[0] = I/delta).
    pub delta: f64,
}

impl RlsHyperParams {
    /// Plain RLS preset (no zero attraction).
    pub fn std_preset() -> Self {
        RlsHyperParams {
            lambda: 0.998,
            gamma: 0.0,
            beta: 10.0,
            delta: 0.5,
        }
    }

    /// Regularized preset.
    pub fn reg_preset() -> Self {
        RlsHyperParams {
            lambda: 0.92,
            gamma: 1e-4,
            beta: 10.0,
            delta: 0.7,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(ConfigError::field("rls.lambda", "lambda must be in (0,1]"));
        }
        if !(self.gamma >= 0.0) {
            return Err(ConfigError::field("rls.gamma", "gamma must be >= 0"));
        }
        if !(self.beta > 0.0) {
            return Err(ConfigError::field("rls.beta", "beta must be > 0"));
        }
        if !(self.delta > 0.0) {
            return Err(ConfigError::field("rls.delta", "delta must be > 0"));
        }
        Ok(())
    }
}

/// Per-device adaptive filter state.
#[derive(Debug, Clone)]
pub struct DeviceFilter {
    /// Combined feedforward (first M) and feedback (next N) weights.
    pub w: Vec<Complex64>,
    /// Inverse correlation matrix.
    pub p: CMat,
    /// Exponentially-weighted LSE accumulator (unregularized).
    pub cost: f64,
    /// Leading block of coordinates excited so far.
    pub excited: usize,
}

impl DeviceFilter {
    fn new(len: usize, delta: f64) -> Self {
        DeviceFilter {
            w: vec![C_ZERO; len],
            p: CMat::identity_scaled(len, 1.0 / delta),
            cost: 0.0,
            excited: 0,
        }
    }

    fn reset(&mut self, delta: f64) {
        let len = self.w.len();
        self.w.iter_mut().for_each(|c| *c = C_ZERO);
        self.p = CMat::identity_scaled(len, 1.0 / delta);
        self.cost = 0.0;
        self.excited = 0;
    }
}

/// Bank of per-device filters plus the detection order.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub filters: Vec<DeviceFilter>,
    /// Detection order φ (device indices).
    pub order: Vec<usize>,
    pub hyper: RlsHyperParams,
    /// Decision-feedback structure: filters of length M+N when true, M otherwise.
    pub df: bool,
    pub m: usize,
    pub n: usize,
    /// Numerical resets performed by the divergence guard.
    pub resets: u64,
    /// Compare regularized costs in the detection-order rule.
    pub order_by_regularized_cost: bool,
}

impl FilterBank {
    pub fn new(m: usize, n: usize, df: bool, hyper: RlsHyperParams) -> Self {
        let len = if df { m + n } else { m };
        FilterBank {
            filters: (0..n)
                .map(|_| DeviceFilter::new(len, hyper.delta))
                .collect(),
            order: (0..n).collect(),
            hyper,
            df,
            m,
            n,
            resets: 0,
            order_by_regularized_cost: true,
        }
    }

    pub fn filter_len(&self) -> usize {
        if self.df {
            self.m + self.n
        } else {
            self.m
        }
    }

    /// Feedforward section of a device's filter.
    pub fn feedforward(&self, device: usize) -> &[Complex64] {
        &self.filters[device].w[..self.m]
    }

    /// Feedback section (empty for feedforward-only banks).
    pub fn feedback(&self, device: usize) -> &[Complex64] {
        &self.filters[device].w[self.m..]
    }

    /// Cost used by the detection-order rule.
    pub fn ordering_cost(&self, device: usize) -> f64 {
        let f = &self.filters[device];
        if self.order_by_regularized_cost {
            f.cost + self.hyper.gamma * l0_surrogate(&f.w, self.hyper.beta)
        } else {
            f.cost
        }
    }

    /// Re-derive the detection order by ascending ordering cost (ties break
    /// toward lower device index).
    pub fn refresh_order(&mut self) {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| {
            self.ordering_cost(a)
                .partial_cmp(&self.ordering_cost(b))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        self.order = order;
    }

    /// Pad an input to the stored filter length.
    pub fn padded_input(&self, y: &[Complex64], prior_decisions: &[Complex64]) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.filter_len());
        v.extend_from_slice(y);
        if self.df {
            v.extend_from_slice(prior_decisions);
        }
        v.resize(self.filter_len(), C_ZERO);
        v
    }
}

/// Smooth l0-norm surrogate Σ (1 − exp(−β|w_p|)).
pub fn l0_surrogate(w: &[Complex64], beta: f64) -> f64 {
    w.iter().map(|c| 1.0 - (-beta * c.norm()).exp()).sum()
}

/// Augmented received vector: stage 1 passes y through; later stages append
/// the prior decisions and zero-pad to length M+N.
pub fn augment_input(
    y: &[Complex64],
    prior_decisions: &[Complex64],
    stage: usize,
    n: usize,
) -> Result<Vec<Complex64>, ConfigError> {
    if stage == 0 || stage > n {
        return Err(ConfigError::field(
            "stage",
            format!("stage {} out of 1..={}", stage, n),
        ));
    }
    if prior_decisions.len() != stage - 1 {
        return Err(ConfigError::DimensionMismatch(format!(
            "stage {} expects {} prior decisions, got {}",
            stage,
            stage - 1,
            prior_decisions.len()
        )));
    }
    if stage == 1 {
        return Ok(y.to_vec());
    }
    let mut v = Vec::with_capacity(y.len() + n);
    v.extend_from_slice(y);
    v.extend_from_slice(prior_decisions);
    v.resize(y.len() + n, C_ZERO);
    Ok(v)
}

/// Kalman gain k = (P·y)/(λ + yᴴ·P·y).
pub fn kalman_gain(
    p: &CMat,
    y: &[Complex64],
    lambda: f64,
    ops: &mut OpCounter,
) -> Result<Vec<Complex64>, NumericalError> {
    let u = p.mul_vec(y, ops);
    let quad: f64 = y.iter().zip(&u).map(|(a, b)| (a.conj() * b).re).sum();
    ops.add(y.len() as u64);
    let denom = lambda + quad;
    if !denom.is_finite() || denom <= 0.0 {
        return Err(NumericalError::new("kalman gain denominator"));
    }
    ops.add(y.len() as u64);
    Ok(u.iter().map(|c| c / denom).collect())
}

/// Additive zero-attraction adjustment per coefficient.
///
/// Coefficients inside the band |w| <= 1/β shrink toward zero along their
/// complex phase by γ·β·(β − β²|w|), clamped so the shrink never overshoots
/// past zero; coefficients outside the band are untouched.
pub fn zero_attraction(w: &[Complex64], gamma: f64, beta: f64) -> Vec<Complex64> {
    assert!(gamma >= 0.0 && beta > 0.0);
    w.iter()
        .map(|&c| {
            let mag = c.norm();
            if mag == 0.0 || mag > 1.0 / beta || gamma == 0.0 {
                return C_ZERO;
            }
            let pull = (gamma * beta * (beta - beta * beta * mag)).min(mag);
            -(c / mag) * pull
        })
        .collect()
}

/// One RLS update of a device filter against a desired symbol.
///
/// Runs on the leading excited block (`active_len` grows the block). The
/// a-priori error drives the gain step, the zero attractor is applied
/// elementwise, P is refreshed with the rank-one recursion and re-symmetrized,
/// and the cost accumulator tracks the post-update error.
pub fn rls_update(
    bank: &mut FilterBank,
    device: usize,
    y_n: &[Complex64],
    desired: Complex64,
    ops: &mut OpCounter,
) {
    let len = bank.filter_len();
    assert_eq!(y_n.len(), len, "input length mismatch");
    // Active length = trailing zeros stripped.
    let nnz = y_n.iter().rposition(|c| *c != C_ZERO).map_or(0, |i| i + 1);
    let hyper = bank.hyper;
    let f = &mut bank.filters[device];
    f.excited = f.excited.max(nnz).min(len);
    let al = f.excited;
    if al == 0 {
        // y = 0: k = 0, weights and P unchanged, the error is all of `desired`.
        f.cost = hyper.lambda * f.cost + desired.norm_sqr();
        return;
    }
    let ya = &y_n[..al];
    let stride = len;

    // u = P·y on the excited block.
    let mut u = vec![C_ZERO; al];
    for i in 0..al {
        let row = &f.p.data[i * stride..i * stride + al];
        u[i] = row.iter().zip(ya).fold(C_ZERO, |acc, (a, b)| acc + a * b);
    }
    ops.add((al * al) as u64);
    let quad: f64 = ya.iter().zip(&u).map(|(a, b)| (a.conj() * b).re).sum();
    ops.add(al as u64);
    let denom = hyper.lambda + quad;

    let mut diverged = !denom.is_finite() || denom <= 0.0;
    if !diverged {
        let k: Vec<Complex64> = u.iter().map(|c| c / denom).collect();
        ops.add(al as u64);

        // A-priori error and gain step.
        let pre = ya
            .iter()
            .zip(&f.w[..al])
            .fold(C_ZERO, |acc, (y, w)| acc + w.conj() * y);
        ops.add(al as u64);
        let err = desired - pre;
        for (wi, ki) in f.w[..al].iter_mut().zip(&k) {
            *wi += ki * err.conj();
        }
        ops.add(al as u64);

        // Zero attraction on the excited block.
        if hyper.gamma > 0.0 {
            let adj = zero_attraction(&f.w[..al], hyper.gamma, hyper.beta);
            for (wi, ai) in f.w[..al].iter_mut().zip(&adj) {
                *wi += ai;
            }
            ops.add(al as u64);
        }

        // P ← λ⁻¹(P − k·uᴴ); u = P·y so k·yᴴ·P = k·uᴴ for Hermitian P.
        let inv_l = 1.0 / hyper.lambda;
        for i in 0..al {
            let ki = k[i];
            let row = &mut f.p.data[i * stride..i * stride + al];
            for (pij, uj) in row.iter_mut().zip(&u) {
                *pij = (*pij - ki * uj.conj()) * inv_l;
            }
        }
        ops.add((al * al) as u64);
        // Re-symmetrize.
        for i in 0..al {
            for j in i + 1..al {
                let a = f.p.data[i * stride + j];
                let b = f.p.data[j * stride + i];
                let s = (a + b.conj()) * 0.5;
                f.p.data[i * stride + j] = s;
                f.p.data[j * stride + i] = s.conj();
            }
            let d = f.p.data[i * stride + i];
            f.p.data[i * stride + i] = Complex64::new(d.re, 0.0);
        }

        // Cost with the post-update error.
        let post = ya
            .iter()
            .zip(&f.w[..al])
            .fold(C_ZERO, |acc, (y, w)| acc + w.conj() * y);
        ops.add(al as u64);
        f.cost = hyper.lambda * f.cost + (desired - post).norm_sqr();

        diverged = !f.cost.is_finite()
            || f.w[..al]
                .iter()
                .any(|c| !c.re.is_finite() || !c.im.is_finite());
    }

    if diverged {
        f.reset(hyper.delta);
        bank.resets += 1;
        ops.resets += 1;
    }
}

/// Detection-order rule: argmin ordering cost over the remaining set, ties
/// toward the lowest device index.
pub fn select_detection_order(
    bank: &FilterBank,
    remaining: &[usize],
) -> Result<usize, ConfigError> {
    if remaining.is_empty() {
        return Err(ConfigError::field("remaining", "empty candidate set"));
    }
    let mut best = remaining[0];
    let mut best_cost = bank.ordering_cost(best);
    for &j in &remaining[1..] {
        let c = bank.ordering_cost(j);
        if c < best_cost || (c == best_cost && j < best) {
            best = j;
            best_cost = c;
        }
    }
    Ok(best)
}

/// Train the bank over the frame's pilot section.
///
/// The receiver knows every device's assigned pilot sequence but not its
/// activity; each filter trains against its assigned pilot, and the
/// feedback taps see the assigned pilots of earlier-ordered devices. The
/// detection order is refreshed after every pilot instant.
pub fn train_on_pilots(
    bank: &mut FilterBank,
    frame: &FrameRealization,
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    ops: &mut OpCounter,
) -> Result<(), ConfigError> {
    if frame.y.rows != bank.m || frame.assigned_pilots.len() != bank.n {
        return Err(ConfigError::DimensionMismatch(
            "frame dimensions do not match the filter bank".into(),
        ));
    }
    let scale = cfg.symbol_var.sqrt();
    for t in 0..frame.pilot_len {
        let y = frame.y_col(t);
        let order = bank.order.clone();
        let mut decisions: Vec<Complex64> = Vec::with_capacity(bank.n);
        for &device in &order {
            let pilot = alphabet.point(frame.assigned_pilots[device][t]) * scale;
            let input = bank.padded_input(&y, &decisions);
            rls_update(bank, device, &input, pilot, ops);
            decisions.push(pilot);
        }
        bank.refresh_order();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Stream};
    use crate::sysmodel::{build_alphabet, draw_frame, sample_cn, Modulation, SystemConfig};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn augment_input_branches() {
        let y = [c(1.0, 1.0)];
        assert_eq!(augment_input(&y, &[], 1, 3).unwrap(), vec![c(1.0, 1.0)]);

        let y = [c(1.0, 0.0), c(2.0, 0.0)];
        let d = [c(3.0, 0.0)];
        assert_eq!(
            augment_input(&y, &d, 2, 3).unwrap(),
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), C_ZERO, C_ZERO]
        );

        // Stage N: N-1 decisions then one zero of padding.
        let d3 = [c(1.0, 0.0), c(2.0, 0.0)];
        let out = augment_input(&y, &d3, 3, 3).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out[4], C_ZERO);

        assert!(augment_input(&y, &[], 0, 3).is_err());
        assert!(augment_input(&y, &[], 4, 3).is_err());
        assert!(augment_input(&y, &d, 3, 3).is_err());
    }

    #[test]
    fn kalman_gain_values() {
        let mut ops = OpCounter::new();
        let p = CMat::identity_scaled(2, 1.0);
        let k = kalman_gain(&p, &[c(1.0, 0.0), C_ZERO], 1.0, &mut ops).unwrap();
        assert_abs_diff_eq!(k[0].re, 0.5, epsilon = 1e-15);
        assert_eq!(k[1], C_ZERO);

        // Scalar case with the reg-preset δ and λ.
        let p = CMat::identity_scaled(1, 1.0 / 0.7);
        let k = kalman_gain(&p, &[c(1.0, 0.0)], 0.92, &mut ops).unwrap();
        let expect = (1.0 / 0.7) / (0.92 + 1.0 / 0.7);
        assert_abs_diff_eq!(k[0].re, expect, epsilon = 1e-12);
        assert!((k[0].re - 0.60829).abs() < 1e-4);

        let k = kalman_gain(&p, &[C_ZERO], 0.92, &mut ops).unwrap();
        assert_eq!(k[0], C_ZERO);
    }

    #[test]
    fn zero_attraction_band() {
        let adj = zero_attraction(&[c(0.05, 0.0)], 1e-4, 10.0);
        assert_abs_diff_eq!(adj[0].re, -0.005, epsilon = 1e-12);
        assert_abs_diff_eq!((c(0.05, 0.0) + adj[0]).re, 0.045, epsilon = 1e-12);

        // Outside the band: untouched.
        let adj = zero_attraction(&[c(0.2, 0.0)], 1e-4, 10.0);
        assert_eq!(adj[0], C_ZERO);

        // At zero: no pull.
        let adj = zero_attraction(&[C_ZERO], 1e-4, 10.0);
        assert_eq!(adj[0], C_ZERO);
    }

    #[test]
    fn zero_attraction_monotone_shrink() {
        // Inside the band the adjusted coefficient never grows and never
        // crosses zero, for any phase.
        let mut rng = substream(20, 0, Stream::Misc(1));
        for _ in 0..500 {
            let w = sample_cn(&mut rng, 0.01);
            let adj = zero_attraction(&[w], 1e-3, 10.0)[0];
            assert!((w + adj).norm() <= w.norm() + 1e-15);
        }
    }

    /// Exponentially-weighted normal-equations oracle:
    /// w = (Σ λ^{t-l} y yᴴ + λ^t δ I)⁻¹ Σ λ^{t-l} y d*.
    fn batch_ls(
        inputs: &[Vec<Complex64>],
        desired: &[Complex64],
        lambda: f64,
        delta: f64,
    ) -> Vec<Complex64> {
        let dim = inputs[0].len();
        let t = inputs.len();
        let mut phi = CMat::identity_scaled(dim, delta * lambda.powi(t as i32));
        let mut theta = vec![C_ZERO; dim];
        for (l, (y, d)) in inputs.iter().zip(desired).enumerate() {
            let w = lambda.powi((t - 1 - l) as i32);
            for i in 0..dim {
                for j in 0..dim {
                    let v = phi.get(i, j) + y[i] * y[j].conj() * w;
                    phi.set(i, j, v);
                }
                theta[i] += y[i] * d.conj() * w;
            }
        }
        let mut ops = OpCounter::new();
        crate::linalg::herm_solve(&phi, &theta, &mut ops).unwrap()
    }

    #[test]
    fn rls_matches_normal_equations() {
        // γ=0: recursive solution equals the direct EW-LS solve.
        let mut rng = substream(21, 0, Stream::Misc(2));
        for dim in [1usize, 4] {
            let hyper = RlsHyperParams {
                lambda: 0.95,
                gamma: 0.0,
                beta: 10.0,
                delta: 0.7,
            };
            let mut bank = FilterBank::new(dim, 1, false, hyper);
            let mut ops = OpCounter::new();
            let truth: Vec<Complex64> = (0..dim).map(|_| sample_cn(&mut rng, 1.0)).collect();
            let mut inputs = Vec::new();
            let mut targets = Vec::new();
            for _ in 0..200 {
                let y: Vec<Complex64> = (0..dim).map(|_| sample_cn(&mut rng, 1.0)).collect();
                let d = truth
                    .iter()
                    .zip(&y)
                    .fold(C_ZERO, |a, (h, yi)| a + h.conj() * yi)
                    + sample_cn(&mut rng, 0.01);
                rls_update(&mut bank, 0, &y, d, &mut ops);
                inputs.push(y);
                targets.push(d);
            }
            let reference = batch_ls(&inputs, &targets, hyper.lambda, hyper.delta);
            let w = &bank.filters[0].w;
            let num: f64 = w
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            let den: f64 = reference.iter().map(|b| b.norm_sqr()).sum();
            assert!(
                (num / den).sqrt() < 1e-6,
                "dim {}: relative error {}",
                dim,
                (num / den).sqrt()
            );
        }
    }

    #[test]
    fn rls_converges_noiseless_scalar() {
        let hyper = RlsHyperParams {
            lambda: 1.0,
            gamma: 0.0,
            beta: 10.0,
            // Small init regularization: the bias it leaves decays like δ/t.
            delta: 1e-3,
        };
        let mut bank = FilterBank::new(1, 1, false, hyper);
        let mut ops = OpCounter::new();
        let h = c(0.8, -0.3);
        let mut rng = substream(22, 0, Stream::Misc(3));
        let mut last_err = f64::MAX;
        for i in 0..50 {
            let x = sample_cn(&mut rng, 1.0);
            let y = [h * x];
            let pre = bank.filters[0].w[0].conj() * y[0];
            last_err = (x - pre).norm();
            rls_update(&mut bank, 0, &y, x, &mut ops);
            if i >= 49 {
                break;
            }
        }
        assert!(last_err < 1e-3, "error after 50 iterations: {}", last_err);
    }

    #[test]
    fn first_update_reproduces_textbook_step() {
        // One scalar update from cold start: w1 = k·ε* with ε = d (w0 = 0).
        let hyper = RlsHyperParams {
            lambda: 0.92,
            gamma: 0.0,
            beta: 10.0,
            delta: 0.7,
        };
        let mut bank = FilterBank::new(1, 1, false, hyper);
        let mut ops = OpCounter::new();
        let d = c(0.3, -0.4);
        rls_update(&mut bank, 0, &[c(1.0, 0.0)], d, &mut ops);
        let k = (1.0 / 0.7) / (0.92 + 1.0 / 0.7);
        let expect = d.conj() * k;
        assert_abs_diff_eq!(bank.filters[0].w[0].re, expect.re, epsilon = 1e-12);
        assert_abs_diff_eq!(bank.filters[0].w[0].im, expect.im, epsilon = 1e-12);
    }

    #[test]
    fn p_stays_hermitian() {
        let mut bank = FilterBank::new(4, 1, false, RlsHyperParams::reg_preset());
        let mut ops = OpCounter::new();
        let mut rng = substream(23, 0, Stream::Misc(4));
        for _ in 0..500 {
            let y: Vec<Complex64> = (0..4).map(|_| sample_cn(&mut rng, 1.0)).collect();
            rls_update(&mut bank, 0, &y, sample_cn(&mut rng, 1.0), &mut ops);
        }
        let p = &bank.filters[0].p;
        for i in 0..4 {
            for j in 0..4 {
                let diff = (p.get(i, j) - p.get(j, i).conj()).norm();
                assert!(diff < 1e-9, "P not Hermitian at ({},{}): {}", i, j, diff);
            }
        }
    }

    #[test]
    fn zero_attraction_shrinks_inactive_device_taps() {
        // Paired same-data runs. A warm-up phase with nonzero desired makes
        // the taps nonzero; then desired ≡ 0 for 100 updates (the device went
        // silent) and the γ>0 run must end with strictly smaller mean |w|.
        let mut rng = substream(24, 0, Stream::Misc(5));
        let mut data: Vec<(Vec<Complex64>, Complex64)> = Vec::new();
        for t in 0..150 {
            let y: Vec<Complex64> = (0..3).map(|_| sample_cn(&mut rng, 1.0)).collect();
            let d = if t < 50 {
                sample_cn(&mut rng, 1.0)
            } else {
                C_ZERO
            };
            data.push((y, d));
        }
        let run = |gamma: f64| -> f64 {
            let hyper = RlsHyperParams {
                lambda: 0.92,
                gamma,
                beta: 10.0,
                delta: 0.7,
            };
            let mut bank = FilterBank::new(3, 1, false, hyper);
            let mut ops = OpCounter::new();
            for (y, d) in &data {
                rls_update(&mut bank, 0, y, *d, &mut ops);
            }
            bank.filters[0].w.iter().map(|c| c.norm()).sum::<f64>() / 3.0
        };
        let (plain, reg) = (run(0.0), run(1e-4));
        assert!(reg < plain, "regularized {} vs plain {}", reg, plain);
    }

    #[test]
    fn order_selection() {
        let mut bank = FilterBank::new(2, 10, false, RlsHyperParams::std_preset());
        bank.filters[3].cost = 0.2;
        bank.filters[7].cost = 0.05;
        bank.filters[9].cost = 0.4;
        assert_eq!(select_detection_order(&bank, &[3, 7, 9]).unwrap(), 7);
        assert_eq!(select_detection_order(&bank, &[5]).unwrap(), 5);
        assert!(select_detection_order(&bank, &[]).is_err());

        // All-equal costs: lowest index.
        let bank = FilterBank::new(2, 4, false, RlsHyperParams::std_preset());
        assert_eq!(select_detection_order(&bank, &[2, 1, 3]).unwrap(), 1);
    }

    #[test]
    fn order_invariant_to_cost_scale() {
        let mut bank = FilterBank::new(2, 5, false, RlsHyperParams::std_preset());
        for (i, c) in [0.5, 0.1, 0.9, 0.3, 0.7].iter().enumerate() {
            bank.filters[i].cost = *c;
        }
        bank.refresh_order();
        let base = bank.order.clone();
        for f in &mut bank.filters {
            f.cost *= 3.5;
        }
        bank.refresh_order();
        assert_eq!(bank.order, base);
    }

    #[test]
    fn filter_output_linear_in_input() {
        let mut rng = substream(25, 0, Stream::Misc(6));
        let w: Vec<Complex64> = (0..4).map(|_| sample_cn(&mut rng, 1.0)).collect();
        let y: Vec<Complex64> = (0..4).map(|_| sample_cn(&mut rng, 1.0)).collect();
        let alpha = c(1.3, -0.4);
        let mut ops = OpCounter::new();
        let d1 = crate::linalg::cdot(&w, &y, &mut ops);
        let scaled: Vec<Complex64> = y.iter().map(|v| v * alpha).collect();
        let d2 = crate::linalg::cdot(&w, &scaled, &mut ops);
        assert!((d2 - alpha * d1).norm() < 1e-12);
    }

    #[test]
    fn train_on_pilots_noiseless_two_devices() {
        let mut cfg = SystemConfig::uniform(2, 2, 1.0);
        cfg.noise_var = 0.0;
        cfg.pilot_len = 64;
        cfg.data_len = 0;
        let alphabet = build_alphabet(Modulation::Qpsk).unwrap();
        let mut rng = substream(26, 0, Stream::Frame);
        let frame = draw_frame(&cfg, &alphabet, &mut rng);
        let mut bank = FilterBank::new(2, 2, true, RlsHyperParams::std_preset());
        let mut ops = OpCounter::new();
        train_on_pilots(&mut bank, &frame, &cfg, &alphabet, &mut ops).unwrap();
        // Post-training pilot detection is error free.
        let mut errors = 0;
        for t in 0..cfg.pilot_len {
            let y = frame.y_col(t);
            let order = bank.order.clone();
            let mut decisions: Vec<Complex64> = Vec::new();
            for &dev in &order {
                let input = bank.padded_input(&y, &decisions);
                let soft = crate::linalg::cdot(&bank.filters[dev].w, &input, &mut ops);
                let truth = alphabet.point(frame.assigned_pilots[dev][t]);
                let nearest = alphabet
                    .active_points
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        (soft - *a).norm().partial_cmp(&(soft - *b).norm()).unwrap()
                    })
                    .unwrap()
                    .0;
                if alphabet.point(nearest) != truth {
                    errors += 1;
                }
                decisions.push(truth);
            }
        }
        assert_eq!(errors, 0);
    }

    #[test]
    fn zero_pilots_leaves_bank_unchanged() {
        let mut cfg = SystemConfig::uniform(3, 2, 0.5);
        cfg.pilot_len = 0;
        cfg.data_len = 4;
        let alphabet = build_alphabet(Modulation::Qpsk).unwrap();
        let mut rng = substream(27, 0, Stream::Frame);
        let frame = draw_frame(&cfg, &alphabet, &mut rng);
        let mut bank = FilterBank::new(2, 3, true, RlsHyperParams::reg_preset());
        let before = bank.clone();
        let mut ops = OpCounter::new();
        train_on_pilots(&mut bank, &frame, &cfg, &alphabet, &mut ops).unwrap();
        assert_eq!(bank.order, before.order);
        for (a, b) in bank.filters.iter().zip(&before.filters) {
            assert_eq!(a.w, b.w);
            assert_eq!(a.cost, b.cost);
        }
    }

    #[test]
    fn lambda_one_training_is_additive() {
        // With λ=1, training twice on the same data equals training once on
        // the doubled sequence.
        let mut rng = substream(28, 0, Stream::Misc(7));
        let seq: Vec<(Vec<Complex64>, Complex64)> = (0..32)
            .map(|_| {
                let y: Vec<Complex64> = (0..3).map(|_| sample_cn(&mut rng, 1.0)).collect();
                (y, sample_cn(&mut rng, 1.0))
            })
            .collect();
        let hyper = RlsHyperParams {
            lambda: 1.0,
            gamma: 0.0,
            beta: 10.0,
            delta: 0.5,
        };
        let mut ops = OpCounter::new();
        let mut twice = FilterBank::new(3, 1, false, hyper);
        for _ in 0..2 {
            for (y, d) in &seq {
                rls_update(&mut twice, 0, y, *d, &mut ops);
            }
        }
        let mut doubled = FilterBank::new(3, 1, false, hyper);
        let mut double_seq = seq.clone();
        double_seq.extend(seq.iter().cloned());
        for (y, d) in &double_seq {
            rls_update(&mut doubled, 0, y, *d, &mut ops);
        }
        for (a, b) in twice.filters[0].w.iter().zip(&doubled.filters[0].w) {
            assert!((a - b).norm() < 1e-8);
        }
    }
}
