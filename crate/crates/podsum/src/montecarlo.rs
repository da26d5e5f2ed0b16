//! Stochastic verification of the distinctness-probability identity and the
//! conditional-binomial product bound behind the symmetric-sum estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logdomain::log_factorial;
use crate::symfunc::log_elementary_prefix;
use crate::weights::WeightSequence;

/// Samples per parallel batch. Batches are seeded independently by index, so
/// results do not depend on the worker count.
const BATCH: usize = 4096;

/// Configuration for one distinctness experiment: `ell` i.i.d. draws from the
/// normalized finite distribution `P(j) = Upsilon_j / zeta_1`.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub ell: usize,
    /// Cumulative distribution over the retained atoms; zero-mass atoms keep
    /// their index but are never sampled.
    cdf: Vec<f64>,
}

impl McConfig {
    pub fn new(seq: &WeightSequence, ell: usize, n_samples: usize, seed: u64) -> Result<Self> {
        if ell < 1 {
            return Err(Error::InvalidSpec("ell must be >= 1".into()));
        }
        if n_samples == 0 {
            return Err(Error::InvalidSpec("n_samples must be positive".into()));
        }
        let values = match seq {
            WeightSequence::Explicit { values } => values.clone(),
            WeightSequence::Zero => Vec::new(),
            _ => {
                return Err(Error::Unsupported(
                    "the sampler needs an explicit finite-support sequence".into(),
                ))
            }
        };
        let total: f64 = values.iter().rev().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroTail(1));
        }
        let mut cdf = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for &v in &values {
            acc += v / total;
            cdf.push(acc);
        }
        debug_assert!((acc - 1.0).abs() <= 1e-12);
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(McConfig {
            n_samples,
            seed,
            ell,
            cdf,
        })
    }

    fn sample_index(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n_samples: usize,
}

/// SplitMix64 step; derives one batch stream key from (seed, batch index).
fn stream_key(seed: u64, batch: u64) -> u64 {
    let mut z = seed ^ batch.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fraction of batches of `ell` i.i.d. draws that are pairwise distinct,
/// with the binomial standard error `sqrt(p(1-p)/n)`.
///
/// Deterministic for a fixed `(seed, config)` regardless of thread count:
/// each batch runs its own ChaCha8 stream keyed by `stream_key(seed, batch)`.
pub fn distinctness_estimate(cfg: &McConfig) -> Estimate {
    let n_batches = (cfg.n_samples + BATCH - 1) / BATCH;
    let hits: u64 = (0..n_batches as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_key(cfg.seed, b));
            let start = b as usize * BATCH;
            let count = BATCH.min(cfg.n_samples - start);
            let mut draws = vec![0usize; cfg.ell];
            let mut hits = 0u64;
            for _ in 0..count {
                for slot in draws.iter_mut() {
                    *slot = cfg.sample_index(rng.gen::<f64>());
                }
                draws.sort_unstable();
                if draws.windows(2).all(|w| w[0] != w[1]) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p_hat = hits as f64 / cfg.n_samples as f64;
    Estimate {
        p_hat,
        std_err: (p_hat * (1.0 - p_hat) / cfg.n_samples as f64).sqrt(),
        n_samples: cfg.n_samples,
    }
}

/// Exact distinctness probability `ell! e_ell / zeta_1^ell` via the symmetric
/// polynomial table.
pub fn distinctness_exact(seq: &WeightSequence, ell: usize) -> Result<f64> {
    let d = seq
        .support_len()
        .ok_or_else(|| Error::Unsupported("exact probability needs finite support".into()))?;
    let zeta1 = seq.tail_sum(1).hi;
    if !(zeta1 > 0.0) {
        return Err(Error::ZeroTail(1));
    }
    if ell > d {
        return Ok(0.0); // pigeonhole
    }
    let e = log_elementary_prefix(seq, d, ell)?;
    let log_p = log_factorial(ell) + e[ell] - ell as f64 * zeta1.ln();
    Ok(log_p.exp().clamp(0.0, 1.0))
}

/// Report from the conditional-binomial chain check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChainReport {
    pub exact: f64,
    /// The product bound
    /// `prod_J (1 + (ell-J) Upsilon_J/zeta_J) (1 - Upsilon_J/zeta_J)^{ell-J}`.
    pub product_bound: f64,
    /// Relative residual of the identity
    /// `zeta_1^ell prod (1 - Upsilon_J/zeta_J)^{ell-J} = prod zeta_J`.
    pub identity_residual: f64,
}

/// Verify `exact <= product bound` and the telescoping identity.
pub fn chain_bound_check(seq: &WeightSequence, ell: usize) -> Result<ChainReport> {
    if ell < 1 {
        return Err(Error::InvalidSpec("ell must be >= 1".into()));
    }
    let exact = distinctness_exact(seq, ell)?;
    let tails = seq.tail_sums_upto(ell + 1);
    for j in 1..=ell {
        if !(tails[j].hi > 0.0) {
            // zeta_J = 0 while the probability mass continues: degenerate
            return Err(Error::ZeroTail(j));
        }
    }

    let mut log_bound = 0.0;
    let mut log_identity_lhs = ell as f64 * tails[1].hi.ln();
    let mut log_identity_rhs = 0.0;
    for j in 1..=ell {
        let ratio = seq.term(j) / tails[j].hi;
        let rem = (ell - j) as f64;
        log_bound += (rem * ratio).ln_1p();
        if rem > 0.0 {
            // skipped when rem = 0: the factor is exactly 1, and ratio = 1
            // there would otherwise produce 0 * -inf = NaN
            let decay = rem * (-ratio).ln_1p();
            log_bound += decay;
            log_identity_lhs += decay;
        }
        log_identity_rhs += tails[j].hi.ln();
    }
    let identity_residual = ((log_identity_lhs - log_identity_rhs).exp() - 1.0).abs();
    Ok(ChainReport {
        exact,
        product_bound: log_bound.exp(),
        identity_residual,
    })
}
