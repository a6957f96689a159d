//! Reference detectors: LMMSE, Oracle LMMSE, SA-SIC, and AA-MF-SIC.
//!
//! All are pure functions of (y, Ĥ, cfg) — no randomness, bit-exact reruns.
//! MMSE solves go through a Cholesky factorization; no inverse is formed.

use crate::counter::OpCounter;
use crate::error::NumericalError;
use crate::linalg::{axpy, cdot, cholesky, cholesky_solve, CMat, Complex64, C_ZERO};
use crate::listdetect::{
    build_candidate_list_map, extend_branch, sac_reliable, select_branch, slice, PriorSet,
    SacConfig, SacOverride,
};
use crate::sysmodel::{AugmentedAlphabet, SystemConfig};
use serde::{Deserialize, Serialize};

/// SIC detection-order rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SicOrdering {
    /// Descending channel column norm.
    Norm,
    /// Descending post-MMSE SINR computed once on the full system.
    Sinr,
}

/// A fixed linear receive filter W (N×M) with the per-device effective
/// symbol variances that built it.
#[derive(Debug, Clone)]
pub struct LinearDetector {
    pub w: CMat,
    pub regularization: Vec<f64>,
}

impl LinearDetector {
    /// Soft estimates W·y.
    pub fn apply(&self, y: &[Complex64], ops: &mut OpCounter) -> Vec<Complex64> {
        self.w.mul_vec(y, ops)
    }
}

/// R = Ĥ·D·Ĥᴴ + σ_v²·I with D = diag(d).
fn system_matrix(h_hat: &CMat, d: &[f64], noise_var: f64, ops: &mut OpCounter) -> CMat {
    let devices: Vec<usize> = (0..h_hat.cols).collect();
    system_matrix_subset(h_hat, &devices, d, noise_var, ops)
}

/// MMSE filter W with row n = d_n·ĥ_nᴴ·R⁻¹ over the given device set.
fn mmse_filter(
    h_hat: &CMat,
    devices: &[usize],
    d: &[f64],
    noise_var: f64,
    ops: &mut OpCounter,
) -> Result<LinearDetector, NumericalError> {
    let m = h_hat.rows;
    let r = system_matrix_subset(h_hat, devices, d, noise_var, ops);
    let l = cholesky(&r, ops)?;
    let mut w = CMat::zeros(h_hat.cols, m);
    for &dev in devices {
        let z = cholesky_solve(&l, &h_hat.col(dev), ops);
        for i in 0..m {
            // Row of W is w_nᴴ, so soft_n = Σ_i W[n,i]·y_i = d_n·(R⁻¹ĥ_n)ᴴ·y.
            w.set(dev, i, z[i].conj() * d[dev]);
        }
        ops.add(m as u64);
    }
    Ok(LinearDetector {
        w,
        regularization: d.to_vec(),
    })
}

fn system_matrix_subset(
    h_hat: &CMat,
    devices: &[usize],
    d: &[f64],
    noise_var: f64,
    ops: &mut OpCounter,
) -> CMat {
    let m = h_hat.rows;
    let mut r = CMat::identity_scaled(m, noise_var);
    for &j in devices {
        if d[j] == 0.0 {
            continue;
        }
        let col = h_hat.col(j);
        for i in 0..m {
            let s = col[i] * d[j];
            for k in 0..m {
                let v = r.get(i, k) + s * col[k].conj();
                r.set(i, k, v);
            }
        }
        ops.add((m * m) as u64);
    }
    r
}

/// Build the activity-aware LMMSE filter: W = D·Ĥᴴ(Ĥ·D·Ĥᴴ + σ_v²I)⁻¹ with
/// D = diag(p_n·σ_x²).
pub fn build_lmmse(
    h_hat: &CMat,
    cfg: &SystemConfig,
    ops: &mut OpCounter,
) -> Result<LinearDetector, NumericalError> {
    let d: Vec<f64> = cfg
        .activity_prob
        .iter()
        .map(|p| p * cfg.symbol_var)
        .collect();
    let devices: Vec<usize> = (0..cfg.n).collect();
    mmse_filter(h_hat, &devices, &d, cfg.noise_var, ops)
}

/// LMMSE detection: filter, then MAP slice over A_0 with activity priors.
pub fn lmmse_detect(
    y: &[Complex64],
    h_hat: &CMat,
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    ops: &mut OpCounter,
) -> Result<Vec<usize>, NumericalError> {
    let det = build_lmmse(h_hat, cfg, ops)?;
    let soft = det.apply(y, ops);
    let scale = cfg.symbol_var.sqrt();
    Ok((0..cfg.n)
        .map(|dev| {
            let priors = alphabet.activity_priors(cfg.activity_prob[dev]);
            slice(soft[dev] / scale, alphabet, &priors, cfg.noise_var)
        })
        .collect())
}

/// Oracle LMMSE: the true active set is known. Supported devices are
/// filtered with full variance σ_x² and sliced over the active points only;
/// everyone else outputs the zero symbol.
pub fn oracle_lmmse_detect(
    y: &[Complex64],
    h_hat: &CMat,
    support: &[bool],
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    ops: &mut OpCounter,
) -> Result<Vec<usize>, NumericalError> {
    assert_eq!(support.len(), cfg.n);
    let mut decisions = vec![alphabet.zero_index(); cfg.n];
    let devices: Vec<usize> = (0..cfg.n).filter(|&d| support[d]).collect();
    if devices.is_empty() {
        return Ok(decisions);
    }
    let soft = restricted_mmse_soft(y, h_hat, &devices, cfg.symbol_var, cfg.noise_var, ops)?;
    let scale = cfg.symbol_var.sqrt();
    // Active points only: the zero symbol gets prior 0.
    let mut priors = vec![1.0 / alphabet.active_points.len() as f64; alphabet.num_symbols()];
    priors[alphabet.zero_index()] = 0.0;
    for (k, &dev) in devices.iter().enumerate() {
        decisions[dev] = slice(soft[k] / scale, alphabet, &priors, cfg.noise_var);
    }
    Ok(decisions)
}

/// MMSE soft estimates restricted to a device subset, in subset order.
///
/// Uses the |S|×|S| normal-equations form when the subsystem is (over-)
/// determined — valid even at σ_v² = 0 for full-column-rank Ĥ_S — and the
/// M×M covariance form otherwise.
fn restricted_mmse_soft(
    y: &[Complex64],
    h_hat: &CMat,
    devices: &[usize],
    sigma_x2: f64,
    noise_var: f64,
    ops: &mut OpCounter,
) -> Result<Vec<Complex64>, NumericalError> {
    let m = h_hat.rows;
    let s = devices.len();
    if s <= m {
        // (Ĥ_SᴴĤ_S + σ_v²/σ_x²·I)⁻¹ Ĥ_Sᴴ y
        let cols: Vec<Vec<Complex64>> = devices.iter().map(|&d| h_hat.col(d)).collect();
        let mut g = CMat::identity_scaled(s, noise_var / sigma_x2);
        for i in 0..s {
            for j in 0..s {
                let v = g.get(i, j) + cdot(&cols[i], &cols[j], ops);
                g.set(i, j, v);
            }
        }
        let rhs: Vec<Complex64> = cols.iter().map(|c| cdot(c, y, ops)).collect();
        let l = cholesky(&g, ops)?;
        Ok(cholesky_solve(&l, &rhs, ops))
    } else {
        let d = vec![sigma_x2; h_hat.cols];
        let r = system_matrix_subset(h_hat, devices, &d, noise_var, ops);
        let l = cholesky(&r, ops)?;
        let z = cholesky_solve(&l, y, ops);
        Ok(devices
            .iter()
            .map(|&dev| cdot(&h_hat.col(dev), &z, ops) * sigma_x2)
            .collect())
    }
}

/// SIC detection order over all N devices.
fn sic_order(
    h_hat: &CMat,
    cfg: &SystemConfig,
    ordering: SicOrdering,
    ops: &mut OpCounter,
) -> Result<Vec<usize>, NumericalError> {
    let n = cfg.n;
    let metric: Vec<f64> = match ordering {
        SicOrdering::Norm => (0..n)
            .map(|j| h_hat.col(j).iter().map(|c| c.norm_sqr()).sum())
            .collect(),
        SicOrdering::Sinr => {
            let d: Vec<f64> = cfg
                .activity_prob
                .iter()
                .map(|p| p * cfg.symbol_var)
                .collect();
            let r = system_matrix(h_hat, &d, cfg.noise_var, ops);
            let l = cholesky(&r, ops)?;
            (0..n)
                .map(|j| {
                    let col = h_hat.col(j);
                    let z = cholesky_solve(&l, &col, ops);
                    d[j] * cdot(&col, &z, ops).re
                })
                .collect()
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| metric[b].partial_cmp(&metric[a]).unwrap().then(a.cmp(&b)));
    Ok(order)
}

/// Per-stage branch record exposed for oracle-equivalence checks.
#[derive(Debug, Clone)]
pub struct SicStageTrace {
    pub position: usize,
    pub device: usize,
    pub reliable: bool,
    /// Completed branches (symbol index per position), list order.
    pub branches: Vec<Vec<usize>>,
    /// Index of the selected branch within `branches`.
    pub chosen: usize,
    /// Residual ‖y − Ĥ·b‖² per branch.
    pub residuals: Vec<f64>,
}

/// Shared SIC core: `list` = None gives plain SA-SIC; Some gives AA-MF-SIC.
#[allow(clippy::too_many_arguments)]
fn sic_core(
    y: &[Complex64],
    h_hat: &CMat,
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    list: Option<(SacConfig, usize, SacOverride)>,
    ordering: SicOrdering,
    ops: &mut OpCounter,
    mut trace: Option<&mut Vec<SicStageTrace>>,
) -> Result<Vec<usize>, NumericalError> {
    let n = cfg.n;
    let scale = cfg.symbol_var.sqrt();
    let zeta2 = cfg.noise_var;
    let order = sic_order(h_hat, cfg, ordering, ops)?;
    let per_device_priors: Vec<Vec<f64>> = (0..n)
        .map(|dev| alphabet.activity_priors(cfg.activity_prob[dev]))
        .collect();
    let priors = PriorSet::new(alphabet, Some(&per_device_priors));
    let d: Vec<f64> = cfg
        .activity_prob
        .iter()
        .map(|p| p * cfg.symbol_var)
        .collect();

    // Per-position MMSE filters against the not-yet-decided set.
    let mut stage_w: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for pos in 0..n {
        let remaining = &order[pos..];
        let dev = order[pos];
        let soft_filter = stage_mmse_vector(h_hat, remaining, dev, &d, cfg.noise_var, ops)?;
        stage_w.push(soft_filter);
    }

    let mut decisions_by_device = vec![alphabet.zero_index(); n];
    let mut decided: Vec<usize> = Vec::with_capacity(n);
    let mut residual = y.to_vec();

    for pos in 0..n {
        let device = order[pos];
        let soft = cdot(&stage_w[pos], &residual, ops);
        let z = soft / scale;
        let dev_priors = &per_device_priors[device];

        let decision = match list {
            None => slice(z, alphabet, dev_priors, zeta2),
            Some((sac, k, ov)) => {
                let reliable = match ov {
                    SacOverride::AlwaysReliable => true,
                    SacOverride::AlwaysUnreliable => false,
                    SacOverride::Auto => sac_reliable(z, alphabet, sac).0,
                };
                if reliable {
                    if let Some(tr) = trace.as_mut() {
                        tr.push(SicStageTrace {
                            position: pos,
                            device,
                            reliable: true,
                            branches: Vec::new(),
                            chosen: 0,
                            residuals: Vec::new(),
                        });
                    }
                    slice(z, alphabet, dev_priors, zeta2)
                } else {
                    let cands = build_candidate_list_map(z, alphabet, dev_priors, zeta2, k)
                        .expect("list size validated upstream");
                    let mut soft_fn =
                        |r: &[Complex64], p: usize, _dev: usize, ops: &mut OpCounter| {
                            cdot(&stage_w[p], r, ops)
                        };
                    let branches: Vec<Vec<usize>> = cands
                        .iter()
                        .map(|&c| {
                            extend_branch(
                                &residual,
                                h_hat,
                                &order,
                                pos,
                                &decided,
                                c,
                                alphabet,
                                &priors,
                                zeta2,
                                scale,
                                &mut soft_fn,
                                ops,
                            )
                        })
                        .collect();
                    let (k_opt, residuals) =
                        select_branch(y, h_hat, &order, &branches, alphabet, scale, ops);
                    if let Some(tr) = trace.as_mut() {
                        tr.push(SicStageTrace {
                            position: pos,
                            device,
                            reliable: false,
                            branches: branches.clone(),
                            chosen: k_opt,
                            residuals: residuals.clone(),
                        });
                    }
                    cands[k_opt]
                }
            }
        };

        decisions_by_device[device] = decision;
        decided.push(decision);
        let p = alphabet.point(decision);
        if p != C_ZERO {
            let col = h_hat.col(device);
            axpy(-p * scale, &col, &mut residual, ops);
        }
    }
    Ok(decisions_by_device)
}

/// Filter vector whose Hermitian product with the residual gives the MMSE
/// soft estimate of `dev` against the remaining interferers.
fn stage_mmse_vector(
    h_hat: &CMat,
    remaining: &[usize],
    dev: usize,
    d: &[f64],
    noise_var: f64,
    ops: &mut OpCounter,
) -> Result<Vec<Complex64>, NumericalError> {
    let m = h_hat.rows;
    if remaining.len() <= m {
        // Normal-equations form, robust at σ_v² = 0 for full column rank:
        // soft = D^{1/2}(D^{1/2}GD^{1/2} + σI)⁻¹D^{1/2}Ĥᴴ r, row of `dev`.
        let s = remaining.len();
        let cols: Vec<Vec<Complex64>> = remaining.iter().map(|&j| h_hat.col(j)).collect();
        let sd: Vec<f64> = remaining.iter().map(|&j| d[j].sqrt()).collect();
        let mut g = CMat::identity_scaled(s, noise_var);
        for i in 0..s {
            for j in 0..s {
                let v = g.get(i, j) + cdot(&cols[i], &cols[j], ops) * (sd[i] * sd[j]);
                g.set(i, j, v);
            }
        }
        let l = cholesky(&g, ops)?;
        let k = remaining
            .iter()
            .position(|&j| j == dev)
            .expect("dev in remaining");
        let mut e = vec![C_ZERO; s];
        e[k] = Complex64::new(sd[k], 0.0);
        // Solve Gᵀ-free: G Hermitian, so w coefficients come from G⁻¹e.
        let a = cholesky_solve(&l, &e, ops);
        // soft = Σ_i a_i*·sd_i·(ĥ_iᴴr), and cdot conjugates its first arg, so
        // the filter vector is w = Σ_i a_i·sd_i·ĥ_i.
        let mut w = vec![C_ZERO; m];
        for i in 0..s {
            axpy(a[i] * sd[i], &cols[i], &mut w, ops);
        }
        Ok(w)
    } else {
        let r = system_matrix_subset(h_hat, remaining, d, noise_var, ops);
        let l = cholesky(&r, ops)?;
        let z = cholesky_solve(&l, &h_hat.col(dev), ops);
        Ok(z.iter().map(|c| c * d[dev]).collect())
    }
}

/// Sparsity-aware SIC: norm-ordered, per-stage MMSE soft value, MAP slice
/// over A_0, cancel, repeat. No reliability test, no list.
pub fn sa_sic_detect(
    y: &[Complex64],
    h_hat: &CMat,
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    ordering: SicOrdering,
    ops: &mut OpCounter,
) -> Result<Vec<usize>, NumericalError> {
    sic_core(y, h_hat, cfg, alphabet, None, ordering, ops, None)
}

/// AA-MF-SIC: SA-SIC structure plus the SAC reliability test and K-candidate
/// list selection, entirely in the channel domain.
#[allow(clippy::too_many_arguments)]
pub fn aa_mf_sic_detect(
    y: &[Complex64],
    h_hat: &CMat,
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    sac: SacConfig,
    k: usize,
    sac_override: SacOverride,
    ordering: SicOrdering,
    ops: &mut OpCounter,
) -> Result<Vec<usize>, NumericalError> {
    sic_core(
        y,
        h_hat,
        cfg,
        alphabet,
        Some((sac, k, sac_override)),
        ordering,
        ops,
        None,
    )
}

/// AA-MF-SIC with a per-stage branch trace.
#[allow(clippy::too_many_arguments)]
pub fn aa_mf_sic_detect_traced(
    y: &[Complex64],
    h_hat: &CMat,
    cfg: &SystemConfig,
    alphabet: &AugmentedAlphabet,
    sac: SacConfig,
    k: usize,
    sac_override: SacOverride,
    ordering: SicOrdering,
    ops: &mut OpCounter,
    trace: &mut Vec<SicStageTrace>,
) -> Result<Vec<usize>, NumericalError> {
    sic_core(
        y,
        h_hat,
        cfg,
        alphabet,
        Some((sac, k, sac_override)),
        ordering,
        ops,
        Some(trace),
    )
}
