//! Elementary symmetric polynomials `e_ell(Upsilon_1..Upsilon_d)` in log
//! domain, plus the two product bounds on `sum_{|v|=ell} prod_{j in v} Upsilon_j`.

use crate::error::{Error, Result};
use crate::logdomain::logaddexp;
use crate::weights::WeightSequence;

/// Triangular table of `log e_ell` over growing prefixes of a sequence.
#[derive(Debug, Clone)]
pub struct SymTable {
    d: usize,
    max_order: usize,
    /// rows[j] holds log e_ell(Upsilon_1..Upsilon_j) for ell = 0..=min(j, max_order).
    rows: Vec<Vec<f64>>,
}

impl SymTable {
    /// Build via the Pascal-style recursion
    /// `e_ell(1..j) = e_ell(1..j-1) + Upsilon_j * e_{ell-1}(1..j-1)`.
    pub fn build(seq: &WeightSequence, d: usize, max_order: usize) -> Result<Self> {
        if max_order > d {
            return Err(Error::OrderExceedsPrefix {
                order: max_order,
                prefix: d,
            });
        }
        let mut rows = Vec::with_capacity(d + 1);
        rows.push(vec![0.0]); // e_0 of the empty prefix is 1
        for j in 1..=d {
            let log_u = seq.term(j).ln();
            let prev = &rows[j - 1];
            let width = j.min(max_order);
            let mut row = Vec::with_capacity(width + 1);
            row.push(0.0);
            for ell in 1..=width {
                let keep = prev.get(ell).copied().unwrap_or(f64::NEG_INFINITY);
                let take = log_u + prev[ell - 1];
                row.push(logaddexp(keep, take));
            }
            rows.push(row);
        }
        Ok(SymTable { d, max_order, rows })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `log e_ell(Upsilon_1..Upsilon_j)`; NEG_INFINITY for ell > j.
    pub fn entry(&self, j: usize, ell: usize) -> f64 {
        assert!(j <= self.d && ell <= self.max_order);
        self.rows[j].get(ell).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// Final-row value `log e_ell(Upsilon_1..Upsilon_d)`.
    pub fn log_e(&self, ell: usize) -> f64 {
        self.entry(self.d, ell)
    }
}

/// Rolling-array variant of the table: only the final row, O(max_order) memory.
pub fn log_elementary_prefix(seq: &WeightSequence, d: usize, max_order: usize) -> Result<Vec<f64>> {
    if max_order > d {
        return Err(Error::OrderExceedsPrefix {
            order: max_order,
            prefix: d,
        });
    }
    let mut e = vec![f64::NEG_INFINITY; max_order + 1];
    e[0] = 0.0;
    for j in 1..=d {
        let log_u = seq.term(j).ln();
        for ell in (1..=max_order.min(j)).rev() {
            e[ell] = logaddexp(e[ell], log_u + e[ell - 1]);
        }
    }
    Ok(e)
}

/// Log of the sharper product bound
/// `prod_{J=1}^{ell} (Upsilon_J + zeta_{J+1} / (ell - J + 1))`,
/// using tail-enclosure upper endpoints so the result is a rigorous upper
/// bound on `e_ell` of the full (untruncated) sequence.
pub fn lemma2_bound_fine(seq: &WeightSequence, ell: usize) -> f64 {
    assert!(ell >= 1);
    let tails = seq.tail_sums_upto(ell + 1);
    let mut acc = 0.0;
    for j in 1..=ell {
        let factor = seq.term(j) + tails[j + 1].hi / (ell - j + 1) as f64;
        acc += factor.ln();
    }
    acc
}

/// Log of the coarser bound
/// `exp(ell + 1) * prod_{J=1}^{ell} max(Upsilon_J, zeta_{J+1} / J)`.
pub fn lemma2_bound_coarse(seq: &WeightSequence, ell: usize) -> f64 {
    assert!(ell >= 1);
    let tails = seq.tail_sums_upto(ell + 1);
    let mut acc = (ell + 1) as f64;
    for j in 1..=ell {
        let factor = seq.term(j).max(tails[j + 1].hi / j as f64);
        acc += factor.ln();
    }
    acc
}
