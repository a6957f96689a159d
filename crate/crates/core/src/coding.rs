//! Regular LDPC construction, systematic encoding, and sum-product decoding.
//!
//! The parity matrix is built column by column with uniform column weight,
//! rejecting any column that would close a length-4 cycle (no two columns
//! share more than one row). The systematic generator is derived by GF(2)
//! row reduction. LLR convention throughout: bit b in {0,1} maps to the
//! antipodal value +1 for b=0, and `L = log P(b=0)/P(b=1)`, so positive LLR
//! means bit 0.

use crate::error::ConfigError;
use rand::seq::SliceRandom;
use rand::Rng;

/// Sparse binary parity-check code with a derived systematic encoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    /// Codeword length (columns of H).
    pub n: usize,
    /// Check count (rows of H).
    pub m: usize,
    pub col_weight: usize,
    /// Per check, the variable indices it touches.
    pub checks: Vec<Vec<usize>>,
    /// Per variable, the check indices touching it.
    pub vars: Vec<Vec<usize>>,
    /// Non-pivot columns, ascending; the first n − m carry the message and
    /// any extras (from rank deficiency) are pinned to zero when encoding.
    free_cols: Vec<usize>,
    /// Per check row of the reduced system: (pivot column, free columns XORed).
    parity_eqs: Vec<(usize, Vec<usize>)>,
    /// Rows whose final weight deviates from the regular target.
    pub row_weight_deviations: usize,
}

impl LdpcCode {
    pub fn message_len(&self) -> usize {
        self.n - self.m
    }

    pub fn codeword_len(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.message_len() as f64 / self.n as f64
    }

    /// Systematic encode; message bits land on the free columns.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, ConfigError> {
        if message.len() != self.message_len() {
            return Err(ConfigError::DimensionMismatch(format!(
                "message length {} != {}",
                message.len(),
                self.message_len()
            )));
        }
        let mut cw = vec![0u8; self.n];
        for (bit, &col) in message.iter().zip(&self.free_cols) {
            cw[col] = bit & 1;
        }
        for &(pivot, ref frees) in &self.parity_eqs {
            let mut acc = 0u8;
            for &f in frees {
                acc ^= cw[f];
            }
            cw[pivot] = acc;
        }
        Ok(cw)
    }

    /// Message bits extracted from a codeword's systematic positions.
    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.free_cols[..self.message_len()]
            .iter()
            .map(|&c| codeword[c] & 1)
            .collect()
    }

    pub fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        self.checks
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 0)
    }

    /// Flooding sum-product decode.
    pub fn spa_decode(&self, channel_llrs: &[f64], max_iters: usize) -> SpaResult {
        assert_eq!(channel_llrs.len(), self.n);
        // Messages indexed by (check, position within check).
        let mut c2v: Vec<Vec<f64>> = self.checks.iter().map(|row| vec![0.0; row.len()]).collect();
        let mut posterior: Vec<f64> = channel_llrs.to_vec();
        let mut hard: Vec<u8> = posterior.iter().map(|&l| u8::from(l < 0.0)).collect();
        let mut converged = self.syndrome_is_zero(&hard);
        let mut iters = 0;

        while !converged && iters < max_iters {
            iters += 1;
            for (ci, row) in self.checks.iter().enumerate() {
                // Variable-to-check message is posterior minus this check's
                // previous contribution; combine with the tanh rule.
                let vmsgs: Vec<f64> = row
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| (posterior[v] - c2v[ci][k]).clamp(-40.0, 40.0))
                    .collect();
                let tanhs: Vec<f64> = vmsgs.iter().map(|&x| (x / 2.0).tanh()).collect();
                for k in 0..row.len() {
                    let mut prod = 1.0;
                    for (j, &t) in tanhs.iter().enumerate() {
                        if j != k {
                            prod *= t;
                        }
                    }
                    c2v[ci][k] = 2.0 * prod.clamp(-0.999_999_999_999, 0.999_999_999_999).atanh();
                }
            }
            posterior.copy_from_slice(channel_llrs);
            for (ci, row) in self.checks.iter().enumerate() {
                for (k, &v) in row.iter().enumerate() {
                    posterior[v] += c2v[ci][k];
                }
            }
            for (h, &l) in hard.iter_mut().zip(&posterior) {
                *h = u8::from(l < 0.0);
            }
            converged = self.syndrome_is_zero(&hard);
        }

        let extrinsic: Vec<f64> = posterior
            .iter()
            .zip(channel_llrs)
            .map(|(p, c)| p - c)
            .collect();
        SpaResult {
            posterior_llrs: posterior,
            extrinsic_llrs: extrinsic,
            hard_bits: hard,
            converged,
            iterations: iters,
        }
    }

    /// Serialize the parity matrix in alist format (1-based indices).
    pub fn to_alist(&self) -> String {
        let max_col = self.vars.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.checks.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        out.push_str(&format!("{} {}\n{} {}\n", self.n, self.m, max_col, max_row));
        out.push_str(
            &self
                .vars
                .iter()
                .map(|v| v.len().to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        out.push('\n');
        out.push_str(
            &self
                .checks
                .iter()
                .map(|r| r.len().to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        out.push('\n');
        for v in &self.vars {
            let mut entries: Vec<String> = v.iter().map(|&r| (r + 1).to_string()).collect();
            while entries.len() < max_col {
                entries.push("0".to_string());
            }
            out.push_str(&entries.join(" "));
            out.push('\n');
        }
        for r in &self.checks {
            let mut entries: Vec<String> = r.iter().map(|&c| (c + 1).to_string()).collect();
            while entries.len() < max_row {
                entries.push("0".to_string());
            }
            out.push_str(&entries.join(" "));
            out.push('\n');
        }
        out
    }

    /// Rebuild a code (including its encoder) from alist text.
    pub fn from_alist(text: &str) -> Result<LdpcCode, ConfigError> {
        let mut nums = text.split_whitespace().map(|t| {
            t.parse::<usize>()
                .map_err(|_| ConfigError::field("alist", format!("bad token `{}`", t)))
        });
        let mut next = || {
            nums.next()
                .unwrap_or_else(|| Err(ConfigError::field("alist", "unexpected end of file")))
        };
        let n = next()?;
        let m = next()?;
        let max_col = next()?;
        let max_row = next()?;
        let col_weights: Vec<usize> = (0..n).map(|_| next()).collect::<Result<_, _>>()?;
        let _row_weights: Vec<usize> = (0..m).map(|_| next()).collect::<Result<_, _>>()?;
        let mut vars: Vec<Vec<usize>> = Vec::with_capacity(n);
        for &w in &col_weights {
            let mut entries = Vec::with_capacity(w);
            for k in 0..max_col {
                let e = next()?;
                if e > 0 {
                    if e > m {
                        return Err(ConfigError::field("alist", "row index out of range"));
                    }
                    entries.push(e - 1);
                } else if k < w {
                    return Err(ConfigError::field("alist", "padded zero inside weight"));
                }
            }
            vars.push(entries);
        }
        let mut checks: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (c, rows) in vars.iter().enumerate() {
            for &r in rows {
                checks[r].push(c);
            }
        }
        // Consume the per-row lists for format validation only.
        for _ in 0..m * max_row {
            if nums.next().is_none() {
                break;
            }
        }
        let col_weight = col_weights.iter().copied().max().unwrap_or(0);
        finish_code(n, m, col_weight, checks, vars, 0)
    }
}

/// Decoder output.
#[derive(Debug, Clone)]
pub struct SpaResult {
    pub posterior_llrs: Vec<f64>,
    pub extrinsic_llrs: Vec<f64>,
    pub hard_bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

fn finish_code(
    n: usize,
    m: usize,
    col_weight: usize,
    checks: Vec<Vec<usize>>,
    vars: Vec<Vec<usize>>,
    row_weight_deviations: usize,
) -> Result<LdpcCode, ConfigError> {
    // GF(2) row reduction of H to derive the systematic encoder.
    let words = (n + 63) / 64;
    let mut rows: Vec<Vec<u64>> = checks
        .iter()
        .map(|row| {
            let mut bits = vec![0u64; words];
            for &c in row {
                bits[c / 64] |= 1u64 << (c % 64);
            }
            bits
        })
        .collect();

    let mut pivot_of_row: Vec<Option<usize>> = vec![None; m];
    let mut is_pivot_col = vec![false; n];
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let bit = |r: &Vec<u64>| r[col / 64] >> (col % 64) & 1 == 1;
        let Some(pr) = (rank..m).find(|&r| bit(&rows[r])) else {
            continue;
        };
        rows.swap(rank, pr);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && bit(row) {
                for w in 0..words {
                    row[w] ^= pivot_row[w];
                }
            }
        }
        pivot_of_row[rank] = Some(col);
        is_pivot_col[col] = true;
        rank += 1;
    }
    // With an even column weight the rows of H always sum to zero, so rank
    // < m is structural, not a construction defect. The first n − m free
    // columns carry the message; any extra free columns are pinned to zero,
    // giving a systematic rate-(n−m)/n subcode that satisfies every check.
    if n - rank < n - m {
        return Err(ConfigError::field(
            "ldpc",
            format!("parity matrix rank {} leaves no room for the message", rank),
        ));
    }

    let free_cols: Vec<usize> = (0..n).filter(|&c| !is_pivot_col[c]).collect();
    let parity_eqs: Vec<(usize, Vec<usize>)> = (0..rank)
        .map(|r| {
            let pivot = pivot_of_row[r].unwrap();
            let frees = free_cols
                .iter()
                .copied()
                .filter(|&c| rows[r][c / 64] >> (c % 64) & 1 == 1)
                .collect();
            (pivot, frees)
        })
        .collect();

    Ok(LdpcCode {
        n,
        m,
        col_weight,
        checks,
        vars,
        free_cols,
        parity_eqs,
        row_weight_deviations,
    })
}

/// Build a (near-)regular 4-cycle-free LDPC code by randomized progressive
/// column placement.
pub fn build_ldpc<R: Rng>(
    n: usize,
    m: usize,
    col_weight: usize,
    rng: &mut R,
) -> Result<LdpcCode, ConfigError> {
    if col_weight == 0 || col_weight > m {
        return Err(ConfigError::field("ldpc.col_weight", "must be in 1..=m"));
    }
    let total_ones = n * col_weight;
    let row_target = (total_ones + m - 1) / m;
    let max_restarts = 200;

    'restart: for restart in 0..max_restarts {
        let mut fill = vec![0usize; m];
        let mut pair_used = vec![false; m * m];
        let mut vars: Vec<Vec<usize>> = Vec::with_capacity(n);

        for _col in 0..n {
            let mut placed: Option<Vec<usize>> = None;
            'attempts: for attempt in 0..400 {
                // Rows with spare capacity; ±1 slack once attempts pile up.
                let slack = usize::from(attempt >= 200);
                let mut cands: Vec<usize> =
                    (0..m).filter(|&r| fill[r] < row_target + slack).collect();
                cands.shuffle(rng);
                // Prefer emptier rows to keep row weights concentrated.
                cands.sort_by_key(|&r| fill[r]);
                let mut chosen: Vec<usize> = Vec::with_capacity(col_weight);
                // Randomized greedy: walk a shuffled-then-sorted candidate
                // list, skipping rows that would close a 4-cycle.
                for &r in &cands {
                    if chosen.iter().any(|&c| pair_used[c.min(r) * m + c.max(r)]) {
                        continue;
                    }
                    chosen.push(r);
                    if chosen.len() == col_weight {
                        break;
                    }
                }
                if chosen.len() < col_weight {
                    continue 'attempts;
                }
                chosen.sort_unstable();
                placed = Some(chosen);
                break;
            }
            let Some(chosen) = placed else {
                let _ = restart;
                continue 'restart;
            };
            for i in 0..chosen.len() {
                fill[chosen[i]] += 1;
                for j in i + 1..chosen.len() {
                    pair_used[chosen[i] * m + chosen[j]] = true;
                }
            }
            vars.push(chosen);
        }

        let mut checks: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (c, rows) in vars.iter().enumerate() {
            for &r in rows {
                checks[r].push(c);
            }
        }
        let deviations = fill.iter().filter(|&&w| w != row_target).count();
        match finish_code(n, m, col_weight, checks, vars, deviations) {
            Ok(code) => return Ok(code),
            Err(_) => continue 'restart, // rank deficient; rebuild
        }
    }
    Err(ConfigError::LdpcConstruction {
        attempts: max_restarts,
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Stream};

    fn code() -> LdpcCode {
        let mut rng = substream(11, 0, Stream::CodeConstruction);
        build_ldpc(256, 128, 6, &mut rng).unwrap()
    }

    #[test]
    fn construction_constraints() {
        let c = code();
        assert_eq!(c.n, 256);
        assert_eq!(c.m, 128);
        for v in &c.vars {
            assert_eq!(v.len(), 6);
        }
        // Row weights concentrated at 12.
        let weights: Vec<usize> = c.checks.iter().map(Vec::len).collect();
        assert!(
            weights.iter().all(|&w| (11..=13).contains(&w)),
            "{:?}",
            weights
        );
        // No two columns share more than one row.
        for i in 0..c.n {
            for j in i + 1..c.n {
                let overlap = c.vars[i].iter().filter(|r| c.vars[j].contains(r)).count();
                assert!(overlap <= 1, "columns {} and {} overlap {}", i, j, overlap);
            }
        }
    }

    #[test]
    fn encoder_validity() {
        let c = code();
        let mut rng = substream(12, 0, Stream::Payload);
        assert_eq!(c.encode(&vec![0; 128]).unwrap(), vec![0; 256]);
        for _ in 0..100 {
            let msg: Vec<u8> = (0..128).map(|_| rng.gen_range(0..2u8)).collect();
            let cw = c.encode(&msg).unwrap();
            assert!(c.syndrome_is_zero(&cw));
            assert_eq!(c.extract_message(&cw), msg);
        }
        // Linearity: sum of two codewords is a codeword.
        let m1: Vec<u8> = (0..128).map(|_| rng.gen_range(0..2u8)).collect();
        let m2: Vec<u8> = (0..128).map(|_| rng.gen_range(0..2u8)).collect();
        let c1 = c.encode(&m1).unwrap();
        let c2 = c.encode(&m2).unwrap();
        let sum: Vec<u8> = c1.iter().zip(&c2).map(|(a, b)| a ^ b).collect();
        assert!(c.syndrome_is_zero(&sum));
        assert!(c.encode(&vec![0; 64]).is_err());
    }

    #[test]
    fn spa_noiseless_fixed_point() {
        let c = code();
        let mut rng = substream(13, 0, Stream::Payload);
        let msg: Vec<u8> = (0..128).map(|_| rng.gen_range(0..2u8)).collect();
        let cw = c.encode(&msg).unwrap();
        let llrs: Vec<f64> = cw
            .iter()
            .map(|&b| if b == 0 { 20.0 } else { -20.0 })
            .collect();
        let out = c.spa_decode(&llrs, 10);
        assert!(out.converged);
        assert_eq!(out.iterations, 0); // already a codeword, no iteration needed
        assert_eq!(out.hard_bits, cw);
    }

    #[test]
    fn spa_corrects_single_weak_flip() {
        let c = code();
        let mut rng = substream(14, 0, Stream::Payload);
        let msg: Vec<u8> = (0..128).map(|_| rng.gen_range(0..2u8)).collect();
        let cw = c.encode(&msg).unwrap();
        let mut llrs: Vec<f64> = cw
            .iter()
            .map(|&b| if b == 0 { 20.0 } else { -20.0 })
            .collect();
        // One bit flipped with low confidence.
        llrs[17] = if cw[17] == 0 { -2.0 } else { 2.0 };
        let out = c.spa_decode(&llrs, 10);
        assert!(out.converged);
        assert_eq!(out.hard_bits, cw);
    }

    #[test]
    fn spa_zero_input_gives_zero_extrinsic() {
        let c = code();
        let out = c.spa_decode(&vec![0.0; 256], 5);
        assert!(out.extrinsic_llrs.iter().all(|&l| l.abs() < 1e-12));
    }

    #[test]
    fn extrinsic_plus_channel_equals_posterior() {
        let c = code();
        let mut rng = substream(15, 0, Stream::Payload);
        let llrs: Vec<f64> = (0..256).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let out = c.spa_decode(&llrs, 8);
        for ((e, ch), p) in out
            .extrinsic_llrs
            .iter()
            .zip(&llrs)
            .zip(&out.posterior_llrs)
        {
            assert!((e + ch - p).abs() < 1e-12);
        }
    }

    #[test]
    fn alist_round_trip() {
        let c = code();
        let text = c.to_alist();
        let c2 = LdpcCode::from_alist(&text).unwrap();
        assert_eq!(c.vars, c2.vars);
        assert_eq!(c.checks, c2.checks);
        // Encoders derived from the same H agree.
        let msg: Vec<u8> = (0..128).map(|i| (i % 3 == 0) as u8).collect();
        assert_eq!(c.encode(&msg).unwrap(), c2.encode(&msg).unwrap());
    }
}
