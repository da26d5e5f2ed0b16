//! POD weight sums: certified truncations of `S_gamma(m)`, the product-weight
//! closed form, the naive geometric bound, the main improved bound with its
//! tail certificate, and the factorial-profile summability classifier.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logdomain::logaddexp;
use crate::spod::spod_truncated_sum;
use crate::weights::{OrderProfile, PodSpec, WeightSequence};

/// Hard cap on the coordinate prefix during adaptive refinement.
pub const ADAPTIVE_D_CAP: usize = 1_000_000;

/// Truncation diagnostics attached to an adaptive evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Truncation {
    pub d: usize,
    pub max_order: usize,
    /// Linear-domain relative change at the last refinement step.
    pub rel_change: f64,
}

/// `log(Gamma_0 + sum_{ell=1}^{L} Gamma_ell m^ell e_ell(Upsilon_1..Upsilon_d))`.
///
/// A certified lower bound on `log S_gamma(m)`; monotone nondecreasing in
/// `d`, `L`, and `m`.
pub fn truncated_sum(spec: &PodSpec, m: f64, d: usize, max_order: usize) -> Result<f64> {
    // Shares the smoothness-1 dynamic program so the SPOD collapse is exact.
    spod_truncated_sum(&spec.to_spod(), m, d, max_order)
}

/// Refine `(d, L)` until the linear-domain value stabilizes to `rtol` twice
/// in a row: `d` doubles, `L` grows by 8 per step.
pub fn adaptive_sum(spec: &PodSpec, m: f64, rtol: f64) -> Result<(f64, Truncation)> {
    adaptive_sum_with_cap(spec, m, rtol, ADAPTIVE_D_CAP)
}

pub fn adaptive_sum_with_cap(
    spec: &PodSpec,
    m: f64,
    rtol: f64,
    d_cap: usize,
) -> Result<(f64, Truncation)> {
    if !(m > 0.0) {
        return Err(Error::NonPositiveM(m));
    }
    if !(rtol > 0.0) {
        return Err(Error::InvalidSpec(format!("rtol must be positive, got {rtol}")));
    }
    check_summable(spec)?;

    let mut d = 64usize;
    let mut max_order = 8usize.min(d);
    let mut prev = truncated_sum(spec, m, d, max_order)?;
    let mut streak = 0;
    loop {
        if d >= d_cap {
            return Err(Error::BudgetExceeded { d, rtol });
        }
        d = (d * 2).min(d_cap);
        max_order = (max_order + 8).min(d);
        let next = truncated_sum(spec, m, d, max_order)?;
        let rel_change = (next - prev).exp_m1().abs();
        if rel_change < rtol {
            streak += 1;
            if streak >= 2 {
                return Ok((
                    next,
                    Truncation {
                        d,
                        max_order,
                        rel_change,
                    },
                ));
            }
        } else {
            streak = 0;
        }
        prev = next;
    }
}

/// `log prod_j (1 + m Upsilon_j)`: the closed form for product weights
/// (`Gamma_ell` identically 1).
pub fn product_weight_sum(seq: &WeightSequence, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::NonPositiveM(m));
    }
    match seq {
        WeightSequence::Zero => Ok(0.0),
        WeightSequence::Explicit { values } => {
            Ok(values.iter().map(|&u| (m * u).ln_1p()).sum())
        }
        _ => {
            // Partial sum of log1p terms plus a tail bracket:
            //   m*zeta_{J+1}*(1 - m*Upsilon_{J+1}/2) <= remainder <= m*zeta_{J+1}.
            let mut j_cut = 1024usize;
            loop {
                let mut partial = 0.0;
                for j in (1..=j_cut).rev() {
                    partial += (m * seq.term(j)).ln_1p();
                }
                let zeta = seq.tail_sum(j_cut + 1);
                let hi = m * zeta.hi;
                let lo = (m * zeta.lo * (1.0 - 0.5 * m * seq.term(j_cut + 1))).max(0.0);
                let value = partial + 0.5 * (lo + hi);
                if hi - lo <= 1e-12 * value.abs().max(1.0) || j_cut >= (1 << 24) {
                    return Ok(value);
                }
                j_cut *= 2;
            }
        }
    }
}

/// Outcome of the geometric-series bound `sum_ell (m zeta_1)^ell`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum NaiveBound {
    /// `-log(1 - m zeta_1)` using the enclosure upper endpoint.
    Value { log_value: f64 },
    /// `m * zeta_1 >= 1` certainly: the geometric series diverges.
    Diverged,
    /// The enclosure of `m zeta_1` straddles 1.
    Indeterminate,
}

/// The geometric bound, stated for the factorial profile `Gamma_ell = ell!`.
pub fn naive_bound(spec: &PodSpec, m: f64) -> Result<NaiveBound> {
    if !(m > 0.0) {
        return Err(Error::NonPositiveM(m));
    }
    if !spec.gamma.is_factorial() {
        return Err(Error::NonFactorialProfile);
    }
    let zeta1 = spec.upsilon.tail_sum(1);
    if m * zeta1.lo >= 1.0 {
        Ok(NaiveBound::Diverged)
    } else if m * zeta1.hi < 1.0 {
        Ok(NaiveBound::Value {
            log_value: -(-m * zeta1.hi).ln_1p(),
        })
    } else {
        Ok(NaiveBound::Indeterminate)
    }
}

/// Status of the geometric tail beyond the truncation order of the main bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TailStatus {
    /// Later terms are exactly zero (finite support exhausted).
    TerminatesExactly,
    /// Remainder provably below `log_remainder` via a geometric majorant.
    Certified { log_remainder: f64 },
    /// No certificate found within the requested order; the reported value
    /// is a partial sum of the bound series only.
    UnboundedAtL,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem1Bound {
    /// Log of the bound including any certified remainder.
    pub log_value: f64,
    pub tail: TailStatus,
}

/// The improved POD bound
/// `Gamma_0 + sum_ell exp(ell+1) Gamma_ell m^ell prod_J max(Upsilon_J, zeta_{J+1}/J)`,
/// truncated at `max_order` with a geometric tail certificate where available.
pub fn theorem1_bound(spec: &PodSpec, m: f64, max_order: usize) -> Result<Theorem1Bound> {
    if !(m > 0.0) {
        return Err(Error::NonPositiveM(m));
    }
    let seq = &spec.upsilon;
    let tails = seq.tail_sums_upto(max_order + 1);
    let log_m = m.ln();

    let mut acc = spec.gamma.gamma0().ln();
    let mut log_factor_sum = 0.0;
    let mut last_term = f64::NEG_INFINITY;
    for ell in 1..=max_order {
        let factor = seq.term(ell).max(tails[ell + 1].hi / ell as f64);
        log_factor_sum += factor.ln();
        last_term =
            (ell + 1) as f64 + spec.gamma.log_gamma(ell) + ell as f64 * log_m + log_factor_sum;
        acc = logaddexp(acc, last_term);
    }

    // Exact termination: a zero factor or exhausted profile keeps every later
    // term at zero.
    let terminates = match (seq.support_len(), spec.gamma.support_len()) {
        (Some(n), _) if max_order >= n + 1 || last_term == f64::NEG_INFINITY => true,
        (_, Some(g)) if max_order >= g => true,
        _ => last_term == f64::NEG_INFINITY && max_order >= 1,
    };
    if terminates {
        return Ok(Theorem1Bound {
            log_value: acc,
            tail: TailStatus::TerminatesExactly,
        });
    }

    // Geometric certificate for FactorialPower(sigma) profiles over decay
    // laws: term ratios are bounded by
    //   q_ell = exp(1 + log m + log C + (sigma - rho) log(ell+1)),
    // decreasing in ell when rho > sigma, with
    //   C = c * max(1, 1/(rho-1))  majorizing  max(Upsilon_J, zeta_{J+1}/J).
    if let (OrderProfile::FactorialPower { sigma }, WeightSequence::PolyDecay { c, rho }) =
        (&spec.gamma, seq)
    {
        if *rho > *sigma {
            let log_c_bar = (c * (1.0f64).max(1.0 / (rho - 1.0))).ln();
            let log_q = 1.0 + log_m + log_c_bar
                + (*sigma - *rho) * ((max_order + 1) as f64).ln();
            if log_q <= -(2.0f64).ln() {
                // remainder <= exp(last_term) * q/(1-q) <= 2 q exp(last_term)
                let log_remainder = last_term + log_q + (2.0f64).ln();
                return Ok(Theorem1Bound {
                    log_value: logaddexp(acc, log_remainder),
                    tail: TailStatus::Certified { log_remainder },
                });
            }
        }
    }

    Ok(Theorem1Bound {
        log_value: acc,
        tail: TailStatus::UnboundedAtL,
    })
}

/// Summability verdict with its certificate.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Summability {
    /// `zeta_1 < infinity`; carries the root-test sequence
    /// `r_ell = (prod_{J<=ell} max(J Upsilon_J, zeta_{J+1}))^{1/ell}`,
    /// which tends to zero.
    Summable { root_test: Vec<(usize, f64)> },
    /// Divergent tail; carries partial log-products of `prod (1 + Upsilon_j)`
    /// as the divergence witness.
    NotSummable { witness: Vec<(usize, f64)> },
}

/// Summability verdict for the factorial profile `Gamma_ell = ell!`.
///
/// Valid `WeightSequence` values always have finite tails, so the verdict is
/// Summable; the certificate is the root-test sequence at the requested
/// orders. Raw decay laws that violate `rho > 1` go through
/// [`classify_raw_decay`].
pub fn summability_classifier(spec: &PodSpec, orders: &[usize]) -> Result<Summability> {
    if !spec.gamma.is_factorial() {
        return Err(Error::NonFactorialProfile);
    }
    Ok(Summability::Summable {
        root_test: root_test_sequence(&spec.upsilon, orders),
    })
}

/// `r_ell` of the root test, per requested order.
pub fn root_test_sequence(seq: &WeightSequence, orders: &[usize]) -> Vec<(usize, f64)> {
    let max_ell = orders.iter().copied().max().unwrap_or(0);
    let tails = seq.tail_sums_upto(max_ell + 1);
    let mut log_prod = 0.0;
    let mut out = Vec::with_capacity(orders.len());
    let mut sorted: Vec<usize> = orders.to_vec();
    sorted.sort_unstable();
    let mut idx = 0;
    for ell in 1..=max_ell {
        let factor = (ell as f64 * seq.term(ell)).max(tails[ell + 1].hi);
        log_prod += factor.ln();
        while idx < sorted.len() && sorted[idx] == ell {
            out.push((ell, (log_prod / ell as f64).exp()));
            idx += 1;
        }
    }
    out
}

/// Classifier entry point for a user-supplied decay law `c * j^{-rho}` that
/// may violate the `rho > 1` invariant. For `rho <= 1` the verdict is
/// NotSummable, witnessed by the divergent partial products of
/// `prod (1 + Upsilon_j)`.
pub fn classify_raw_decay(c: f64, rho: f64, orders: &[usize]) -> Result<Summability> {
    if !c.is_finite() || c < 0.0 || !rho.is_finite() {
        return Err(Error::InvalidSequence(format!(
            "raw decay law needs finite c >= 0 and finite rho; got c={c}, rho={rho}"
        )));
    }
    if c == 0.0 || rho > 1.0 {
        let seq = if c == 0.0 {
            WeightSequence::Zero
        } else {
            WeightSequence::poly_decay(c, rho)?
        };
        return Ok(Summability::Summable {
            root_test: root_test_sequence(&seq, orders),
        });
    }
    // Divergent tail: report log prod_{j<=n} (1 + c j^{-rho}) at growing n.
    let mut witness = Vec::new();
    let mut log_prod = 0.0;
    let mut next_report = 10usize;
    for j in 1..=1_000_000usize {
        log_prod += (c * (j as f64).powf(-rho)).ln_1p();
        if j == next_report {
            witness.push((j, log_prod));
            next_report *= 10;
        }
    }
    Ok(Summability::NotSummable { witness })
}

fn check_summable(spec: &PodSpec) -> Result<()> {
    match (&spec.gamma, &spec.upsilon) {
        (OrderProfile::Explicit { .. }, _) => Ok(()),
        (_, WeightSequence::Zero | WeightSequence::Explicit { .. }) => Ok(()),
        (
            OrderProfile::FactorialPower { sigma },
            WeightSequence::PolyDecay { rho, .. } | WeightSequence::BlockedPolyDecay { rho, .. },
        ) => {
            if *rho > *sigma {
                Ok(())
            } else {
                Err(Error::NotSummable(format!(
                    "sum diverges: rho = {rho} <= sigma = {sigma} (summable iff rho > sigma)"
                )))
            }
        }
    }
}

/// One full evaluation record for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub m: f64,
    /// Certified lower bound on `log S_gamma(m)` (truncated sum).
    pub exact_lo: f64,
    pub theorem1: Theorem1Bound,
    /// Present only for the factorial profile.
    pub naive: Option<NaiveBound>,
    pub truncation: (usize, usize),
    pub summable: bool,
}

/// Assemble the truncated sum, both bounds, and the classifier verdict.
pub fn bound_report(spec: &PodSpec, m: f64, d: usize, max_order: usize) -> Result<BoundReport> {
    let exact_lo = truncated_sum(spec, m, d, max_order)?;
    let theorem1 = theorem1_bound(spec, m, max_order)?;
    let naive = if spec.gamma.is_factorial() {
        Some(naive_bound(spec, m)?)
    } else {
        None
    };
    let summable = check_summable(spec).is_ok();
    Ok(BoundReport {
        m,
        exact_lo,
        theorem1,
        naive,
        truncation: (d, max_order),
        summable,
    })
}
