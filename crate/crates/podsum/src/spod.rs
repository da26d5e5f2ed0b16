//! SPOD weight sums via a two-index dynamic program over (subset size,
//! multi-index total), the SPOD-to-POD reduction, summability and growth
//! brackets, and a divergence probe for the open necessity question.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::ThetaSeries;
use crate::error::{Error, Result};
use crate::logdomain::{log_factorial, logaddexp};
use crate::symfunc::log_elementary_prefix;
use crate::weights::{Interval, SpodSpec, WeightSequence};

/// DP table over subset size `ell` and multi-index total `ell'`:
/// `T[ell][ell'] = sum over (v, nu) with v in {1..d}, |v| = ell, |nu| = ell'`
/// of `prod_{j in v} Upsilon_{j, nu_j}` (log domain).
#[derive(Debug, Clone)]
pub struct SpodTable {
    d: usize,
    alpha: usize,
    max_order: usize,
    /// Row ell holds ell' = 0..=alpha*max_order; flattened below.
    logs: Vec<f64>,
    stride: usize,
}

impl SpodTable {
    pub fn build(spec: &SpodSpec, d: usize, max_order: usize) -> Result<Self> {
        if max_order > d {
            return Err(Error::OrderExceedsPrefix {
                order: max_order,
                prefix: d,
            });
        }
        let alpha = spec.alpha;
        let stride = alpha * max_order + 1;
        let mut logs = vec![f64::NEG_INFINITY; (max_order + 1) * stride];
        logs[0] = 0.0; // T[0][0] = 1
        let mut log_u = vec![0.0f64; alpha + 1];
        for j in 1..=d {
            for k in 1..=alpha {
                log_u[k] = spec.upsilon(k).term(j).ln();
            }
            for ell in (1..=max_order.min(j)).rev() {
                // reachable totals for this ell
                let lo = ell;
                let hi = alpha * ell;
                for lp in (lo..=hi).rev() {
                    let mut acc = logs[ell * stride + lp];
                    for k in 1..=alpha.min(lp) {
                        let prev = logs[(ell - 1) * stride + (lp - k)];
                        if prev != f64::NEG_INFINITY {
                            acc = logaddexp(acc, log_u[k] + prev);
                        }
                    }
                    logs[ell * stride + lp] = acc;
                }
            }
        }
        Ok(SpodTable {
            d,
            alpha,
            max_order,
            logs,
            stride,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `log T[ell][ell']`; NEG_INFINITY outside `ell <= ell' <= alpha*ell`.
    pub fn log_t(&self, ell: usize, ell_prime: usize) -> f64 {
        if ell > self.max_order || ell_prime > self.alpha * self.max_order {
            return f64::NEG_INFINITY;
        }
        self.logs[ell * self.stride + ell_prime]
    }
}

/// `log(Gamma_0 + sum_{ell=1}^{L} m^ell sum_{ell'=ell}^{alpha*ell} Gamma_{ell'} T[ell][ell'])`.
///
/// A certified lower bound on `log S_gamma(m)`: truncation only drops
/// nonnegative terms. Monotone nondecreasing in `d`, `L`, and `m`.
pub fn spod_truncated_sum(spec: &SpodSpec, m: f64, d: usize, max_order: usize) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::NonPositiveM(m));
    }
    let table = SpodTable::build(spec, d, max_order)?;
    let log_m = m.ln();
    let mut acc = spec.gamma.gamma0().ln();
    for ell in 1..=max_order {
        for lp in ell..=spec.alpha * ell {
            let t = table.log_t(ell, lp);
            if t != f64::NEG_INFINITY {
                let term = spec.gamma.log_gamma(lp) + ell as f64 * log_m + t;
                acc = logaddexp(acc, term);
            }
        }
    }
    Ok(acc)
}

/// The index-set image `v' = { alpha*(j-1)+k | j in v, k in 1..=nu_j }` of the
/// SPOD-to-POD reduction. Injective in `(v, nu)` for fixed alpha; `|v'| = |nu|`.
pub fn reduction_map(v: &[usize], nu: &[usize], alpha: usize) -> Result<Vec<usize>> {
    if v.len() != nu.len() {
        return Err(Error::InvalidMultiIndex(format!(
            "index set has {} entries but multi-index has {}",
            v.len(),
            nu.len()
        )));
    }
    let mut out = Vec::new();
    for (&j, &nu_j) in v.iter().zip(nu) {
        if j < 1 {
            return Err(Error::InvalidMultiIndex("indices are 1-based".into()));
        }
        if nu_j < 1 || nu_j > alpha {
            return Err(Error::InvalidMultiIndex(format!(
                "nu_{j} = {nu_j} outside 1..={alpha}"
            )));
        }
        for k in 1..=nu_j {
            out.push(alpha * (j - 1) + k);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// The blocked majorant sequence `Upsilon'` used by the reduction.
///
/// For explicit grids this is `Upsilon'_{j'} = max_k Upsilon_{j,k}^{1/k}`
/// repeated over each length-alpha block. For grids of the form
/// `Upsilon_{j,k} = C_k j^{-k rho}` it is the decay law
/// `C_max * ceil(j'/alpha)^{-rho}` with `C_max = max_k C_k^{1/k}`.
pub fn reduced_upsilon(spec: &SpodSpec) -> Result<WeightSequence> {
    let alpha = spec.alpha;
    if spec.upsilon_grid.iter().all(|s| s.finite_support()) {
        let d = spec
            .upsilon_grid
            .iter()
            .map(|s| s.support_len().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let mut values = Vec::with_capacity(alpha * d);
        for j in 1..=d {
            let block_max = (1..=alpha)
                .map(|k| spec.upsilon(k).term(j).powf(1.0 / k as f64))
                .fold(0.0f64, f64::max);
            values.extend(std::iter::repeat(block_max).take(alpha));
        }
        return WeightSequence::explicit(values);
    }
    // Decay-law grids: require Upsilon_{j,k} = C_k j^{-k*rho} for a common rho.
    let mut rho_common: Option<f64> = None;
    let mut c_max = 0.0f64;
    for k in 1..=alpha {
        match spec.upsilon(k) {
            WeightSequence::PolyDecay { c, rho } => {
                let per_level = rho / k as f64;
                match rho_common {
                    None => rho_common = Some(per_level),
                    Some(r) if (r - per_level).abs() <= 1e-12 * r.abs() => {}
                    Some(r) => {
                        return Err(Error::Unsupported(format!(
                            "decay exponents must share rho across levels: got {per_level} vs {r}"
                        )))
                    }
                }
                c_max = c_max.max(c.powf(1.0 / k as f64));
            }
            WeightSequence::Zero => {}
            other => {
                return Err(Error::Unsupported(format!(
                    "reduced_upsilon needs explicit or poly-decay grids, got {other:?}"
                )))
            }
        }
    }
    let rho = rho_common
        .ok_or_else(|| Error::Unsupported("all-zero grid has no decay exponent".into()))?;
    WeightSequence::blocked_poly_decay(c_max, rho, alpha)
}

/// Outcome of the sufficient summability condition
/// `sum_j sum_k Upsilon_{j,k}^{1/k} < infinity`.
#[derive(Debug, Clone)]
pub enum SpodSummability {
    SufficientConditionHolds {
        /// Enclosure of the double sum.
        value: Interval,
        /// Number of sampled per-term domination checks performed (all passed).
        domination_checked: usize,
    },
    ConditionFails {
        /// Smoothness level whose rooted tail diverges.
        level: usize,
    },
}

/// Evaluate the sufficient condition, and on explicit grids spot-check the
/// per-term domination inequality behind the reduction on random samples.
pub fn spod_summability(spec: &SpodSpec) -> Result<SpodSummability> {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for k in 1..=spec.alpha {
        match spec.upsilon(k) {
            WeightSequence::Zero => {}
            WeightSequence::Explicit { values } => {
                let s: f64 = values.iter().map(|v| v.powf(1.0 / k as f64)).sum();
                lo += s;
                hi += s;
            }
            WeightSequence::PolyDecay { c, rho } => {
                // (c j^{-rho})^{1/k} = c^{1/k} j^{-rho/k}: summable iff rho/k > 1
                let rooted_rho = rho / k as f64;
                if rooted_rho <= 1.0 {
                    return Ok(SpodSummability::ConditionFails { level: k });
                }
                let rooted = WeightSequence::poly_decay(c.powf(1.0 / k as f64), rooted_rho)?;
                let t = rooted.tail_sum(1);
                lo += t.lo;
                hi += t.hi;
            }
            WeightSequence::BlockedPolyDecay { c, rho, block } => {
                let rooted_rho = rho / k as f64;
                if rooted_rho <= 1.0 {
                    return Ok(SpodSummability::ConditionFails { level: k });
                }
                let rooted = WeightSequence::blocked_poly_decay(
                    c.powf(1.0 / k as f64),
                    rooted_rho,
                    *block,
                )?;
                let t = rooted.tail_sum(1);
                lo += t.lo;
                hi += t.hi;
            }
        }
    }

    let mut checked = 0;
    if spec.upsilon_grid.iter().all(|s| s.finite_support()) {
        let d = spec
            .upsilon_grid
            .iter()
            .map(|s| s.support_len().unwrap_or(0))
            .max()
            .unwrap_or(0);
        if d > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5D0D);
            for _ in 0..64 {
                let (v, nu) = sample_pair(&mut rng, d, spec.alpha);
                if v.is_empty() {
                    continue;
                }
                let m = rng.gen_range(1.0..10.0);
                let (lhs, rhs) = per_term_domination(spec, &v, &nu, m)?;
                if lhs > rhs + 1e-9 {
                    return Err(Error::InvalidSpec(format!(
                        "per-term domination violated at v={v:?}, nu={nu:?}, m={m}: {lhs} > {rhs}"
                    )));
                }
                checked += 1;
            }
        }
    }

    Ok(SpodSummability::SufficientConditionHolds {
        value: Interval { lo, hi },
        domination_checked: checked,
    })
}

fn sample_pair(rng: &mut ChaCha8Rng, d: usize, alpha: usize) -> (Vec<usize>, Vec<usize>) {
    let mut v = Vec::new();
    let mut nu = Vec::new();
    for j in 1..=d {
        if rng.gen_bool(0.5) {
            v.push(j);
            nu.push(rng.gen_range(1..=alpha));
        }
    }
    (v, nu)
}

/// Both sides of the per-term domination inequality, in log domain:
/// `|nu|! m^{|v|} prod Upsilon_{j,nu_j}  <=  |v'|! m^{|v'|} prod Upsilon'_{j'}`
/// for `m >= 1`. Returns `(log lhs, log rhs)`.
pub fn per_term_domination(
    spec: &SpodSpec,
    v: &[usize],
    nu: &[usize],
    m: f64,
) -> Result<(f64, f64)> {
    if m < 1.0 {
        return Err(Error::Unsupported(
            "per-term domination is stated for m >= 1".into(),
        ));
    }
    let v_prime = reduction_map(v, nu, spec.alpha)?;
    let reduced = reduced_upsilon(spec)?;
    let nu_total: usize = nu.iter().sum();
    debug_assert_eq!(v_prime.len(), nu_total);
    let log_m = m.ln();

    let mut lhs = log_factorial(nu_total) + v.len() as f64 * log_m;
    for (&j, &k) in v.iter().zip(nu) {
        lhs += spec.upsilon(k).term(j).ln();
    }
    let mut rhs = log_factorial(v_prime.len()) + v_prime.len() as f64 * log_m;
    for &jp in &v_prime {
        rhs += reduced.term(jp).ln();
    }
    Ok((lhs, rhs))
}

/// Certified constants of the SPOD growth theorem for the family
/// `Upsilon_{j,k} = C_{Upsilon,k} j^{-k rho}`, `Gamma_{ell'} = (ell'!)^sigma`.
#[derive(Debug, Clone)]
pub struct SpodGrowthConstants {
    pub alpha: usize,
    pub rho: f64,
    pub sigma: f64,
    pub c_values: Vec<f64>,
    /// `max_k C_{Upsilon,k}^{1/k}`.
    pub c_max: f64,
    /// Explicit instantiation of the reduction constant `C'_{alpha,rho} >= 1`.
    pub c_prime: f64,
    /// `C_{alpha,rho} = e * alpha^rho * C'_{alpha,rho}`.
    pub c_alpha_rho: f64,
    /// Polynomial/series split point `ceil((2 C_{alpha,rho} C_max)^{1/(rho-sigma)})`.
    pub ell_star: usize,
    /// Normalized-log bracket constants.
    pub lower_const: f64,
    pub upper_const: f64,
}

impl SpodGrowthConstants {
    pub fn new(alpha: usize, rho: f64, sigma: f64, c_values: &[f64]) -> Result<Self> {
        if alpha < 1 || c_values.len() != alpha {
            return Err(Error::InvalidSpec(
                "need one positive C_{Upsilon,k} per smoothness level".into(),
            ));
        }
        if !(rho > 1.0) || !(sigma >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "growth constants need rho > 1 (got {rho}) and sigma >= 0 (got {sigma})"
            )));
        }
        if rho <= sigma {
            return Err(Error::NotSummable(format!(
                "rho = {rho} <= sigma = {sigma}; the embedded level-1 POD family diverges"
            )));
        }
        if c_values.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::InvalidSpec("C_{Upsilon,k} must be positive".into()));
        }
        let c_max = c_values
            .iter()
            .enumerate()
            .map(|(i, &c)| c.powf(1.0 / (i + 1) as f64))
            .fold(0.0f64, f64::max);

        // C' must satisfy (alpha/J) * sum_{j > floor(J/alpha)} j^{-rho}
        //   <= C' * (J/alpha)^{-rho} for all J >= 1, i.e.
        // C' >= (J/alpha)^{rho-1} * zeta(floor(J/alpha)+1). Evaluate the
        // supremum numerically over J <= 10*alpha; beyond that the integral
        // bound caps it by 2^rho/(rho-1).
        let unit = WeightSequence::poly_decay(1.0, rho)?;
        let mut sup = 0.0f64;
        for j in 1..=10 * alpha {
            let n0 = j / alpha; // floor
            let zeta = unit.tail_sum(n0 + 1).hi;
            sup = sup.max((j as f64 / alpha as f64).powf(rho - 1.0) * zeta);
        }
        let analytic_cap = 2.0f64.powf(rho) / (rho - 1.0);
        let c_prime = sup.max(analytic_cap).max(1.0);

        let c_alpha_rho = 1.0f64.exp() * (alpha as f64).powf(rho) * c_prime;
        let gap = rho - sigma;
        let ell_star = (2.0 * c_alpha_rho * c_max).powf(1.0 / gap).ceil() as usize;
        let lower_const = gap * c_values[0].powf(1.0 / gap);
        let upper_const = gap * (c_alpha_rho * c_max).powf(1.0 / gap);
        Ok(SpodGrowthConstants {
            alpha,
            rho,
            sigma,
            c_values: c_values.to_vec(),
            c_max,
            c_prime,
            c_alpha_rho,
            ell_star,
            lower_const,
            upper_const,
        })
    }

    /// The SPOD family these constants describe.
    pub fn family(&self) -> Result<SpodSpec> {
        let grid = self
            .c_values
            .iter()
            .enumerate()
            .map(|(i, &c)| WeightSequence::poly_decay(c, (i + 1) as f64 * self.rho))
            .collect::<Result<Vec<_>>>()?;
        let gamma = crate::weights::OrderProfile::factorial_power(self.sigma)?;
        SpodSpec::new(self.alpha, gamma, grid)
    }
}

/// One grid point of the growth bracket.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SpodRatePoint {
    pub m: f64,
    /// Log of the embedded level-1 theta lower series.
    pub lower_log: f64,
    /// Log of the certified upper bound `S(m, ell_*) + 2e * theta tail`.
    pub upper_log: f64,
    /// The two logs normalized by `m^{-1/(rho-sigma)}`.
    pub lower_norm: f64,
    pub upper_norm: f64,
}

/// Lower and upper growth curves per grid point, normalized against the
/// bracket constants.
pub fn spod_growth_bracket(
    constants: &SpodGrowthConstants,
    m_grid: &[f64],
) -> Result<Vec<SpodRatePoint>> {
    let gap = constants.rho - constants.sigma;
    let theta = ThetaSeries::new(gap)?;
    let x = constants.c_alpha_rho * constants.c_max;
    let mut out = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        if !(m > 0.0) {
            return Err(Error::NonPositiveM(m));
        }
        let lower_log = theta.log_eval(constants.c_values[0] * m);

        // S(m, ell_*) = 1 + e * sum_{ell=1..ell_*} m^ell * sum_{ell'>=ell} x^{ell'}/(ell'!)^gap
        let log_m = m.ln();
        let mut s_poly = 0.0f64; // log(1)
        for ell in 1..=constants.ell_star {
            let tail = theta_tail_log(x, gap, ell);
            s_poly = logaddexp(s_poly, 1.0 + ell as f64 * log_m + tail);
        }
        // remainder: 2e * sum_{ell > ell_*} (x m)^ell / (ell!)^gap
        let rem = (2.0f64).ln() + 1.0 + theta_tail_log(x * m, gap, constants.ell_star + 1);
        let upper_log = logaddexp(s_poly, rem);

        let norm = m.powf(-1.0 / gap);
        out.push(SpodRatePoint {
            m,
            lower_log,
            upper_log,
            lower_norm: norm * lower_log,
            upper_norm: norm * upper_log,
        });
    }
    Ok(out)
}

/// `log sum_{ell >= start} x^ell / (ell!)^theta`, summed upward until terms
/// fall 60 nats below the running peak.
fn theta_tail_log(x: f64, theta: f64, start: usize) -> f64 {
    let log_x = x.ln();
    let term = |ell: usize| ell as f64 * log_x - theta * log_factorial(ell);
    let mut acc = f64::NEG_INFINITY;
    let mut peak = f64::NEG_INFINITY;
    let mut ell = start;
    loop {
        let t = term(ell);
        acc = logaddexp(acc, t);
        peak = peak.max(t);
        // terms are unimodal in ell; stop once past the peak and negligible
        if t < peak - 60.0 {
            break;
        }
        ell += 1;
        if ell > start + 10_000_000 {
            break;
        }
    }
    acc
}

/// Growth table for the open necessity question: truncated values of
/// `sum_{ell <= L} (k ell)! m^ell e_ell(Upsilon_{.,k})` and the lower device
/// obtained from `(k ell)! >= (ell!)^k`. Reports trends only; makes no
/// convergence claim.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeRow {
    pub m: f64,
    /// Cumulative log of the truncated sum at orders 1..=L.
    pub truncated_log: Vec<f64>,
    /// Same accumulation with `(ell!)^k` in place of `(k ell)!`.
    pub lower_device_log: Vec<f64>,
}

pub fn divergence_probe(
    k: usize,
    seq: &WeightSequence,
    d: usize,
    max_order: usize,
    m_grid: &[f64],
) -> Result<Vec<ProbeRow>> {
    if k < 1 {
        return Err(Error::InvalidSpec("smoothness level k must be >= 1".into()));
    }
    let e = log_elementary_prefix(seq, d, max_order)?;
    let mut rows = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        if !(m > 0.0) {
            return Err(Error::NonPositiveM(m));
        }
        let log_m = m.ln();
        let mut acc = 0.0f64;
        let mut acc_dev = 0.0f64;
        let mut truncated = Vec::with_capacity(max_order);
        let mut device = Vec::with_capacity(max_order);
        for ell in 1..=max_order {
            acc = logaddexp(acc, log_factorial(k * ell) + ell as f64 * log_m + e[ell]);
            acc_dev = logaddexp(
                acc_dev,
                k as f64 * log_factorial(ell) + ell as f64 * log_m + e[ell],
            );
            truncated.push(acc);
            device.push(acc_dev);
        }
        rows.push(ProbeRow {
            m,
            truncated_log: truncated,
            lower_device_log: device,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::OrderProfile;

    fn explicit_grid(alpha: usize, rows: &[&[f64]]) -> SpodSpec {
        let grid = rows
            .iter()
            .map(|r| WeightSequence::explicit(r.to_vec()).unwrap())
            .collect();
        SpodSpec::new(alpha, OrderProfile::factorial_power(1.0).unwrap(), grid).unwrap()
    }

    /// Enumerate all (v, nu) pairs over subsets of 1..=d.
    fn brute_force_spod(spec: &SpodSpec, m: f64, d: usize, max_order: usize) -> f64 {
        let alpha = spec.alpha;
        // each coordinate is either "absent" (0) or carries nu_j in 1..=alpha
        let mut total = spec.gamma.gamma0();
        let mut state = vec![0usize; d];
        loop {
            // advance odometer
            let mut i = 0;
            loop {
                if i == d {
                    return total;
                }
                state[i] += 1;
                if state[i] <= alpha {
                    break;
                }
                state[i] = 0;
                i += 1;
            }
            let v_size = state.iter().filter(|&&s| s > 0).count();
            if v_size == 0 || v_size > max_order {
                continue;
            }
            let nu_total: usize = state.iter().sum();
            let mut prod = 1.0;
            for (idx, &k) in state.iter().enumerate() {
                if k > 0 {
                    prod *= spec.upsilon(k).term(idx + 1);
                }
            }
            total += spec.gamma.log_gamma(nu_total).exp() * m.powi(v_size as i32) * prod;
        }
    }

    #[test]
    fn dp_matches_enumeration_on_random_grid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let alpha = rng.gen_range(1..=3);
            let d = rng.gen_range(1..=6);
            let grid: Vec<WeightSequence> = (0..alpha)
                .map(|_| {
                    WeightSequence::explicit((0..d).map(|_| rng.gen_range(0.0..1.0)).collect())
                        .unwrap()
                })
                .collect();
            let spec =
                SpodSpec::new(alpha, OrderProfile::factorial_power(1.0).unwrap(), grid).unwrap();
            let m = rng.gen_range(0.1..2.0);
            let got = spod_truncated_sum(&spec, m, d, d).unwrap().exp();
            let want = brute_force_spod(&spec, m, d, d);
            assert!(
                (got - want).abs() <= 1e-10 * want.abs(),
                "alpha={alpha} d={d}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn gamma0_term_present() {
        // Zero upsilon grid: only the empty set survives, gamma_empty = 1
        let spec = SpodSpec::new(
            2,
            OrderProfile::factorial_power(1.0).unwrap(),
            vec![WeightSequence::Zero, WeightSequence::Zero],
        )
        .unwrap();
        let v = spod_truncated_sum(&spec, 3.0, 4, 2).unwrap();
        assert_eq!(v, 0.0); // log 1
    }

    #[test]
    fn rejects_bad_truncation_and_m() {
        let spec = explicit_grid(1, &[&[0.5]]);
        assert!(spod_truncated_sum(&spec, 1.0, 2, 3).is_err());
        assert!(spod_truncated_sum(&spec, 0.0, 2, 2).is_err());
    }

    #[test]
    fn reduction_map_examples() {
        assert_eq!(reduction_map(&[2], &[3], 3).unwrap(), vec![4, 5, 6]);
        assert_eq!(reduction_map(&[1, 3], &[1, 2], 2).unwrap(), vec![1, 5, 6]);
        assert!(reduction_map(&[1], &[3], 2).is_err());
        let v = reduction_map(&[2, 4, 5], &[2, 1, 3], 3).unwrap();
        assert_eq!(v.len(), 6); // |v'| = sum nu_j
    }

    #[test]
    fn reduction_map_injective_exhaustively() {
        use std::collections::HashSet;
        for alpha in 1..=3usize {
            let mut seen = HashSet::new();
            for mask in 0u32..(1 << 5) {
                let v: Vec<usize> = (1..=5).filter(|j| mask & (1 << (j - 1)) != 0).collect();
                let mut nu = vec![1usize; v.len()];
                loop {
                    let image = reduction_map(&v, &nu, alpha).unwrap();
                    assert!(
                        seen.insert(image.clone()),
                        "collision at alpha={alpha}, v={v:?}, nu={nu:?}"
                    );
                    // advance nu odometer
                    let mut i = 0;
                    loop {
                        if i == nu.len() {
                            break;
                        }
                        nu[i] += 1;
                        if nu[i] <= alpha {
                            break;
                        }
                        nu[i] = 1;
                        i += 1;
                    }
                    if nu.iter().all(|&x| x == 1) || v.is_empty() {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_upsilon_explicit_blocks() {
        let spec = explicit_grid(2, &[&[0.25], &[0.04]]);
        let r = reduced_upsilon(&spec).unwrap();
        // max(0.25, 0.04^{1/2}) = max(0.25, 0.2) = 0.25, repeated alpha times
        assert!((r.term(1) - 0.25).abs() < 1e-15);
        assert!((r.term(2) - 0.25).abs() < 1e-15);
        assert_eq!(r.term(3), 0.0);

        let alpha1 = explicit_grid(1, &[&[0.7, 0.1]]);
        let r1 = reduced_upsilon(&alpha1).unwrap();
        assert_eq!(r1.term(1), 0.7);
        assert_eq!(r1.term(2), 0.1);
    }

    #[test]
    fn reduced_upsilon_block_sum_identity() {
        let spec = explicit_grid(3, &[&[0.5, 0.2], &[0.09, 0.01], &[0.008, 0.001]]);
        let r = reduced_upsilon(&spec).unwrap();
        let total = r.tail_sum(1).hi;
        let expected: f64 = 3.0
            * (1..=2)
                .map(|j| {
                    (1..=3)
                        .map(|k| spec.upsilon(k).term(j).powf(1.0 / k as f64))
                        .fold(0.0f64, f64::max)
                })
                .sum::<f64>();
        assert!((total - expected).abs() < 1e-12);
    }

    #[test]
    fn summability_condition_poly_grid() {
        // alpha = 1, PolyDecay(1,2): condition value encloses pi^2/6
        let spec = SpodSpec::new(
            1,
            OrderProfile::factorial_power(1.0).unwrap(),
            vec![WeightSequence::poly_decay(1.0, 2.0).unwrap()],
        )
        .unwrap();
        match spod_summability(&spec).unwrap() {
            SpodSummability::SufficientConditionHolds { value, .. } => {
                assert!(value.contains(1.6449340668482264));
            }
            other => panic!("expected condition to hold: {other:?}"),
        }

        // Upsilon_{j,2} = j^{-2}: square root is j^{-1}, not summable
        let bad = SpodSpec::new(
            2,
            OrderProfile::factorial_power(1.0).unwrap(),
            vec![
                WeightSequence::Zero,
                WeightSequence::poly_decay(1.0, 2.0).unwrap(),
            ],
        )
        .unwrap();
        match spod_summability(&bad).unwrap() {
            SpodSummability::ConditionFails { level } => assert_eq!(level, 2),
            other => panic!("expected failure: {other:?}"),
        }
    }

    #[test]
    fn per_term_domination_single_sample() {
        // v = {2}, nu = (2), alpha = 2, m = 1
        let spec = explicit_grid(2, &[&[0.3, 0.2], &[0.05, 0.04]]);
        let (lhs, rhs) = per_term_domination(&spec, &[2], &[2], 1.0).unwrap();
        assert!(lhs <= rhs + 1e-12, "lhs {lhs} > rhs {rhs}");
    }

    #[test]
    fn growth_constants_reduce_to_pod_case() {
        let c = SpodGrowthConstants::new(1, 2.0, 0.0, &[1.0]).unwrap();
        assert_eq!(c.c_max, 1.0);
        assert!(c.c_prime >= 1.0);
        assert!((c.lower_const - 2.0).abs() < 1e-12);
        // upper_const = (rho-sigma) * (C_{alpha,rho} C_max)^{1/(rho-sigma)}
        let expect = 2.0 * c.c_alpha_rho.sqrt();
        assert!((c.upper_const - expect).abs() < 1e-12);
        assert!(SpodGrowthConstants::new(1, 1.5, 2.0, &[1.0]).is_err());
    }

    #[test]
    fn factorial_power_inequality_for_probe() {
        // (k ell)! >= (ell!)^k in log domain
        for k in 1..=4usize {
            for ell in 1..=100usize {
                assert!(log_factorial(k * ell) >= k as f64 * log_factorial(ell) - 1e-9);
            }
        }
    }

    #[test]
    fn probe_values_increase_in_order() {
        let seq = WeightSequence::poly_decay(1.0, 2.0).unwrap();
        let rows = divergence_probe(2, &seq, 40, 20, &[50.0]).unwrap();
        let t = &rows[0].truncated_log;
        for w in t.windows(2) {
            assert!(w[1] > w[0], "expected strict growth in L at large m");
        }
        // the lower device never exceeds the truncated sum
        for (a, b) in rows[0].lower_device_log.iter().zip(t) {
            assert!(a <= b);
        }
    }
}
