//! Shadow-area reliability test and constellation-list branch machinery,
//! composed with the adaptive filter bank into the AA-CL-DF detector family.
//!
//! Per stage the soft estimate is tested against two reliability disks: the
//! zero disk of radius 1 − 1/λ and per-active-point disks of radius 1/λ (the
//! zero disk is tested first). A reliable estimate is sliced; an unreliable
//! one spawns K candidate branches, each completed by conventional SIC in the
//! channel domain, and the branch with the smallest residual ‖y − Ĥ·b‖² wins.

use crate::adaptive::{rls_update, FilterBank};
use crate::counter::OpCounter;
use crate::error::ConfigError;
use crate::linalg::{axpy, cdot, norm_sq, CMat, Complex64, C_ZERO};
use crate::sysmodel::AugmentedAlphabet;
use serde::{Deserialize, Serialize};

/// Shadow-area constraint: reliability radii derived from λ > 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SacConfig {
    pub lambda_rel: f64,
}

impl SacConfig {
    pub fn new(lambda_rel: f64) -> Result<Self, ConfigError> {
        if !(lambda_rel > 1.0) {
            return Err(ConfigError::field("sac.lambda_rel", "must be > 1"));
        }
        Ok(SacConfig { lambda_rel })
    }

    /// Radius of the zero-symbol disk, 1 − 1/λ.
    pub fn zero_radius(&self) -> f64 {
        1.0 - 1.0 / self.lambda_rel
    }

    /// Radius of each active-point disk, 1/λ.
    pub fn active_radius(&self) -> f64 {
        1.0 / self.lambda_rel
    }
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig { lambda_rel: 2.0 }
    }
}

/// Forces the SAC outcome; used for ablations and paired-run tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SacOverride {
    Auto,
    AlwaysReliable,
    AlwaysUnreliable,
}

/// Adaptive detector structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdaptiveVariant {
    /// Feedforward RLS, hard slice always.
    AaRls,
    /// Feedforward RLS with SAC + constellation list.
    AaClRls,
    /// Decision-feedback RLS, hard slice always.
    AaRlsDf,
    /// Decision-feedback RLS with SAC + constellation list.
    AaClDf,
}

impl AdaptiveVariant {
    pub fn uses_feedback(self) -> bool {
        matches!(self, AdaptiveVariant::AaRlsDf | AdaptiveVariant::AaClDf)
    }

    pub fn uses_list(self) -> bool {
        matches!(self, AdaptiveVariant::AaClRls | AdaptiveVariant::AaClDf)
    }
}

/// Tie rank: the zero symbol wins ties, then the lowest active label.
#[inline]
fn tie_rank(alphabet: &AugmentedAlphabet, idx: usize) -> usize {
    if idx == alphabet.zero_index() {
        0
    } else {
        idx + 1
    }
}

/// MAP slicing score: |z − x|² − ζ²·ln prior (lower is better).
fn map_score(z: Complex64, point: Complex64, prior: f64, zeta2: f64) -> f64 {
    if prior <= 0.0 {
        return f64::INFINITY;
    }
    (z - point).norm_sqr() - zeta2 * prior.ln()
}

/// MAP hard slice over A_0; reduces to nearest-neighbor under uniform priors.
pub fn slice(z: Complex64, alphabet: &AugmentedAlphabet, priors: &[f64], zeta2: f64) -> usize {
    debug_assert_eq!(priors.len(), alphabet.num_symbols());
    let mut best = usize::MAX;
    let mut best_score = f64::INFINITY;
    for idx in 0..alphabet.num_symbols() {
        let score = map_score(z, alphabet.point(idx), priors[idx], zeta2);
        if score < best_score - 1e-12
            || ((score - best_score).abs() <= 1e-12
                && best != usize::MAX
                && tie_rank(alphabet, idx) < tie_rank(alphabet, best))
        {
            best = idx;
            best_score = score;
        }
    }
    best
}

/// SAC reliability test: (reliable, nearest symbol index).
pub fn sac_reliable(z: Complex64, alphabet: &AugmentedAlphabet, sac: SacConfig) -> (bool, usize) {
    if z.norm() <= sac.zero_radius() {
        return (true, alphabet.zero_index());
    }
    let mut nearest_active = 0;
    let mut nearest_dist = f64::INFINITY;
    for (i, a) in alphabet.active_points.iter().enumerate() {
        let d = (z - a).norm();
        if d < nearest_dist {
            nearest_dist = d;
            nearest_active = i;
        }
    }
    if nearest_dist <= sac.active_radius() {
        return (true, nearest_active);
    }
    // Unreliable: report the nearest point of A_0 (including zero).
    let nearest = if z.norm() < nearest_dist {
        alphabet.zero_index()
    } else {
        nearest_active
    };
    (false, nearest)
}

/// The K points of A_0 nearest to z, nearest first.
pub fn build_candidate_list(
    z: Complex64,
    alphabet: &AugmentedAlphabet,
    k: usize,
) -> Result<Vec<usize>, ConfigError> {
    build_candidate_list_map(z, alphabet, &alphabet.uniform_priors(), 1.0, k)
}

/// Candidate list ordered by the MAP slicing score, so the list head always
/// equals the hard slice. Under uniform priors this is the plain
/// nearest-first ordering.
pub fn build_candidate_list_map(
    z: Complex64,
    alphabet: &AugmentedAlphabet,
    priors: &[f64],
    zeta2: f64,
    k: usize,
) -> Result<Vec<usize>, ConfigError> {
    if k == 0 || k > alphabet.num_symbols() {
        return Err(ConfigError::field(
            "list_size",
            format!("K = {} out of 1..={}", k, alphabet.num_symbols()),
        ));
    }
    let mut idxs: Vec<usize> = (0..alphabet.num_symbols())
        .filter(|&i| priors[i] > 0.0)
        .collect();
    idxs.sort_by(|&a, &b| {
        let sa = map_score(z, alphabet.point(a), priors[a], zeta2);
        let sb = map_score(z, alphabet.point(b), priors[b], zeta2);
        if (sa - sb).abs() <= 1e-12 {
            tie_rank(alphabet, a).cmp(&tie_rank(alphabet, b))
        } else {
            sa.partial_cmp(&sb).unwrap()
        }
    });
    idxs.truncate(k);
    Ok(idxs)
}

/// Per-device symbol priors used in slicing; `None` means uniform over A_0.
pub struct PriorSet<'a> {
    per_device: Option<&'a [Vec<f64>]>,
    uniform: Vec<f64>,
}

impl<'a> PriorSet<'a> {
    pub fn new(alphabet: &AugmentedAlphabet, per_device: Option<&'a [Vec<f64>]>) -> Self {
        PriorSet {
            per_device,
            uniform: alphabet.uniform_priors(),
        }
    }

    pub fn get(&self, device: usize) -> &[f64] {
        match self.per_device {
            Some(p) => &p[device],
            None => &self.uniform,
        }
    }
}

/// Complete a candidate branch by conventional SIC over the remaining stages.
///
/// `residual` is the received vector with all already-decided stages
/// cancelled (channel domain, Ĥ-based). `soft_fn(residual, position, device,
/// ops)` produces the continuation soft value for a later stage.
#[allow(clippy::too_many_arguments)]
pub fn extend_branch(
    residual: &[Complex64],
    h_hat: &CMat,
    order: &[usize],
    stage_pos: usize,
    decided: &[usize],
    candidate: usize,
    alphabet: &AugmentedAlphabet,
    priors: &PriorSet,
    zeta2: f64,
    symbol_scale: f64,
    soft_fn: &mut dyn FnMut(&[Complex64], usize, usize, &mut OpCounter) -> Complex64,
    ops: &mut OpCounter,
) -> Vec<usize> {
    debug_assert_eq!(decided.len(), stage_pos);
    let n_stages = order.len();
    let mut branch = Vec::with_capacity(n_stages);
    branch.extend_from_slice(decided);
    branch.push(candidate);

    let mut r = residual.to_vec();
    let cand_point = alphabet.point(candidate);
    if cand_point != C_ZERO && stage_pos + 1 < n_stages {
        let col = h_hat.col(order[stage_pos]);
        axpy(-cand_point * symbol_scale, &col, &mut r, ops);
    }
    for pos in stage_pos + 1..n_stages {
        let device = order[pos];
        let z = soft_fn(&r, pos, device, ops) / symbol_scale;
        let b = slice(z, alphabet, priors.get(device), zeta2);
        branch.push(b);
        let p = alphabet.point(b);
        if p != C_ZERO && pos + 1 < n_stages {
            let col = h_hat.col(device);
            axpy(-p * symbol_scale, &col, &mut r, ops);
        }
    }
    branch
}

/// Residual ‖y − Ĥ·b‖² of a completed branch.
pub fn branch_residual(
    y: &[Complex64],
    h_hat: &CMat,
    order: &[usize],
    branch: &[usize],
    alphabet: &AugmentedAlphabet,
    symbol_scale: f64,
    ops: &mut OpCounter,
) -> f64 {
    let mut r = y.to_vec();
    for (pos, &sym) in branch.iter().enumerate() {
        let p = alphabet.point(sym);
        if p != C_ZERO {
            let col = h_hat.col(order[pos]);
            axpy(-p * symbol_scale, &col, &mut r, ops);
        }
    }
    norm_sq(&r, ops)
}

/// Pick the branch with the smallest residual; ties keep the earlier (nearer
/// candidate) branch.
pub fn select_branch(
    y: &[Complex64],
    h_hat: &CMat,
    order: &[usize],
    branches: &[Vec<usize>],
    alphabet: &AugmentedAlphabet,
    symbol_scale: f64,
    ops: &mut OpCounter,
) -> (usize, Vec<f64>) {
    assert!(!branches.is_empty());
    let residuals: Vec<f64> = branches
        .iter()
        .map(|b| branch_residual(y, h_hat, order, b, alphabet, symbol_scale, ops))
        .collect();
    let mut k_opt = 0;
    for (k, &r) in residuals.iter().enumerate().skip(1) {
        if r < residuals[k_opt] {
            k_opt = k;
        }
    }
    (k_opt, residuals)
}

/// Detector knobs for one symbol period.
#[derive(Debug, Clone, Copy)]
pub struct DetectorConfig {
    pub variant: AdaptiveVariant,
    pub sac: SacConfig,
    pub list_size: usize,
    pub sac_override: SacOverride,
    /// Noise proxy ζ² for MAP slicing.
    pub zeta2: f64,
    /// sqrt(σ_x²); soft values are divided by this before slicing.
    pub symbol_scale: f64,
}

/// Per-stage observation handed to the IDD hook.
pub struct StageObservation<'a> {
    pub device: usize,
    pub position: usize,
    /// The (padded) filter input used at this stage.
    pub input: &'a [Complex64],
    /// Filter output before slicing.
    pub soft: Complex64,
    pub decision: usize,
}

/// Result of detecting one symbol period.
#[derive(Debug, Clone)]
pub struct PeriodDetection {
    /// Decided symbol index per device.
    pub decisions: Vec<usize>,
    /// Soft filter output per device.
    pub soft: Vec<Complex64>,
    /// Stages where the list path fired.
    pub list_invocations: u64,
    /// Selected-branch residual never exceeded the slice-branch residual.
    pub dominance_ok: bool,
}

/// Detect all N devices for one received vector, updating the bank in
/// decision-directed mode and refreshing the detection order afterwards.
#[allow(clippy::too_many_arguments)]
pub fn detect_symbol_period(
    bank: &mut FilterBank,
    y: &[Complex64],
    h_hat: &CMat,
    alphabet: &AugmentedAlphabet,
    det: &DetectorConfig,
    priors_per_device: Option<&[Vec<f64>]>,
    ops: &mut OpCounter,
    mut stage_hook: Option<&mut dyn FnMut(&StageObservation)>,
) -> PeriodDetection {
    let n = bank.n;
    assert_eq!(y.len(), bank.m, "received vector length mismatch");
    let priors = PriorSet::new(alphabet, priors_per_device);
    let order = bank.order.clone();
    let scale = det.symbol_scale;

    let mut decisions_by_device = vec![alphabet.zero_index(); n];
    let mut soft_by_device = vec![C_ZERO; n];
    let mut fed_back: Vec<Complex64> = Vec::with_capacity(n);
    let mut decided_syms: Vec<usize> = Vec::with_capacity(n);
    // Channel-domain residual for list continuations.
    let mut chan_residual = if det.variant.uses_list() {
        y.to_vec()
    } else {
        Vec::new()
    };
    let mut list_invocations = 0u64;
    let mut dominance_ok = true;

    for (pos, &device) in order.iter().enumerate() {
        let input = bank.padded_input(y, &fed_back);
        let soft = cdot(&bank.filters[device].w, &input, ops);
        let z = soft / scale;
        let dev_priors = priors.get(device);

        let reliable = match det.sac_override {
            SacOverride::AlwaysReliable => true,
            SacOverride::AlwaysUnreliable => false,
            SacOverride::Auto => sac_reliable(z, alphabet, det.sac).0,
        };

        let decision = if !det.variant.uses_list() || reliable {
            slice(z, alphabet, dev_priors, det.zeta2)
        } else {
            list_invocations += 1;
            let cands = build_candidate_list_map(z, alphabet, dev_priors, det.zeta2, det.list_size)
                .expect("list size validated upstream");
            let mut soft_fn = |r: &[Complex64], _pos: usize, dev: usize, ops: &mut OpCounter| {
                cdot(bank.feedforward(dev), r, ops)
            };
            let branches: Vec<Vec<usize>> = cands
                .iter()
                .map(|&c| {
                    extend_branch(
                        &chan_residual,
                        h_hat,
                        &order,
                        pos,
                        &decided_syms,
                        c,
                        alphabet,
                        &priors,
                        det.zeta2,
                        scale,
                        &mut soft_fn,
                        ops,
                    )
                })
                .collect();
            let (k_opt, residuals) =
                select_branch(y, h_hat, &order, &branches, alphabet, scale, ops);
            // The list head is the slice symbol, so the selected branch can
            // never be worse than the plain hard slice.
            if residuals[k_opt] > residuals[0] + 1e-9 {
                dominance_ok = false;
            }
            cands[k_opt]
        };

        // Decision-directed adaptation against the chosen symbol.
        let desired = alphabet.point(decision) * scale;
        rls_update(bank, device, &input, desired, ops);

        if let Some(hook) = stage_hook.as_mut() {
            hook(&StageObservation {
                device,
                position: pos,
                input: &input,
                soft,
                decision,
            });
        }

        decisions_by_device[device] = decision;
        soft_by_device[device] = soft;
        decided_syms.push(decision);
        fed_back.push(desired);
        if det.variant.uses_list() {
            let p = alphabet.point(decision);
            if p != C_ZERO {
                let col = h_hat.col(device);
                axpy(-p * scale, &col, &mut chan_residual, ops);
            }
        }
    }

    bank.refresh_order();
    PeriodDetection {
        decisions: decisions_by_device,
        soft: soft_by_device,
        list_invocations,
        dominance_ok,
    }
}
