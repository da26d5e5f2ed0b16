//! Theta-series evaluation by peak-centered summation, growth-rate brackets
//! for factorial-power/poly-decay POD families, and the sub-exponentiality
//! trend check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logdomain::{log_factorial, logaddexp};
use crate::pod::{adaptive_sum, theorem1_bound, truncated_sum};
use crate::weights::{OrderProfile, PodSpec, WeightSequence};

/// Terms more than this many nats below the peak cannot move the total at
/// f64 precision.
const PEAK_CUTOFF_NATS: f64 = 60.0;

/// The series `f(m) = sum_{ell >= 0} m^ell / (ell!)^theta`, `theta > 0`.
///
/// Its log grows like `theta * m^{1/theta}`.
#[derive(Debug, Clone, Copy)]
pub struct ThetaSeries {
    theta: f64,
}

impl ThetaSeries {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "theta series exponent must be positive and finite, got {theta}"
            )));
        }
        Ok(ThetaSeries { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Index of the largest term, `floor(m^{1/theta})`.
    pub fn peak_index(&self, m: f64) -> usize {
        m.powf(1.0 / self.theta).floor() as usize
    }

    /// `log f(m)`, summing outward from the peak term until both sides fall
    /// `PEAK_CUTOFF_NATS` below it.
    pub fn log_eval(&self, m: f64) -> f64 {
        assert!(m > 0.0, "theta series is evaluated at m > 0");
        let log_m = m.ln();
        let term = |ell: usize| ell as f64 * log_m - self.theta * log_factorial(ell);
        let ell_star = self.peak_index(m);
        let peak = term(ell_star);
        let mut acc = peak;
        let mut ell = ell_star;
        while ell > 0 {
            ell -= 1;
            let t = term(ell);
            acc = logaddexp(acc, t);
            if t < peak - PEAK_CUTOFF_NATS {
                break;
            }
        }
        let mut ell = ell_star + 1;
        loop {
            let t = term(ell);
            acc = logaddexp(acc, t);
            if t < peak - PEAK_CUTOFF_NATS {
                break;
            }
            ell += 1;
        }
        acc
    }

    /// Log of the peak term alone: the lower half of the sandwich.
    pub fn log_peak(&self, m: f64) -> f64 {
        let ell_star = self.peak_index(m);
        ell_star as f64 * m.ln() - self.theta * log_factorial(ell_star)
    }

    /// Log of the sandwich upper bound
    /// `(2 ell_* + sum_ell 2^{-theta ell}) * peak`.
    pub fn log_sandwich_upper(&self, m: f64) -> f64 {
        let ell_star = self.peak_index(m);
        let geo = 1.0 / (1.0 - 2.0f64.powf(-self.theta));
        (2.0 * ell_star as f64 + geo).ln() + self.log_peak(m)
    }

    /// `(m, m^{-1/theta} log f(m))` per grid point.
    pub fn rate(&self, m_grid: &[f64]) -> Vec<(f64, f64)> {
        m_grid
            .iter()
            .map(|&m| (m, m.powf(-1.0 / self.theta) * self.log_eval(m)))
            .collect()
    }
}

/// Growth-rate bracket constants for `gamma_v = (|v|!)^sigma prod C_Y j^{-rho}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateBracket {
    pub rho: f64,
    pub sigma: f64,
    pub c_upsilon: f64,
    /// `(rho - sigma) * C_Y^{1/(rho-sigma)}`: liminf constant.
    pub lower_const: f64,
    /// `(rho - sigma) * (C_rho C_Y)^{1/(rho-sigma)}`: limsup constant.
    pub upper_const: f64,
    /// `C_rho = e / min(rho - 1, 1)`.
    pub c_rho: f64,
}

pub fn theorem5_bracket(rho: f64, sigma: f64, c_upsilon: f64) -> Result<RateBracket> {
    if !(rho > 1.0) {
        return Err(Error::InvalidSpec(format!("rho must exceed 1, got {rho}")));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidSpec(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    if !(c_upsilon > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "C_Upsilon must be positive, got {c_upsilon}"
        )));
    }
    if rho <= sigma {
        return Err(Error::NotSummable(format!(
            "rho = {rho} <= sigma = {sigma}: S_gamma(m) is infinite for large m (finite iff rho > sigma)"
        )));
    }
    let gap = rho - sigma;
    let c_rho = 1.0f64.exp() / (rho - 1.0).min(1.0);
    Ok(RateBracket {
        rho,
        sigma,
        c_upsilon,
        lower_const: gap * c_upsilon.powf(1.0 / gap),
        upper_const: gap * (c_rho * c_upsilon).powf(1.0 / gap),
        c_rho,
    })
}

/// One grid point of the three-curve sandwich.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatePoint {
    pub m: f64,
    /// Normalized log of the certified lower series `sum (C_Y m)^ell/(ell!)^gap`.
    pub lower_series: f64,
    /// Normalized certified lower bound from the adaptive truncated sum.
    pub exact_lo: f64,
    /// Normalized improved upper bound.
    pub upper_bound: f64,
}

/// Evaluate the sandwich `lower series <= S_gamma(m) <= improved bound`
/// per grid point, all normalized by `m^{-1/(rho-sigma)}`.
pub fn empirical_rate(
    rho: f64,
    sigma: f64,
    c_upsilon: f64,
    m_grid: &[f64],
    rtol: f64,
) -> Result<Vec<RatePoint>> {
    let bracket = theorem5_bracket(rho, sigma, c_upsilon)?;
    let gap = bracket.rho - bracket.sigma;
    let theta = ThetaSeries::new(gap)?;
    let spec = PodSpec::new(
        OrderProfile::factorial_power(sigma)?,
        WeightSequence::poly_decay(c_upsilon, rho)?,
    );
    let mut out = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        if !(m > 0.0) {
            return Err(Error::NonPositiveM(m));
        }
        let norm = m.powf(-1.0 / gap);
        let lower_series = theta.log_eval(c_upsilon * m);
        // The truncated sum at the refinement cap is still a certified lower
        // bound, so a busted budget degrades precision, not validity.
        let exact_lo = match adaptive_sum(&spec, m, rtol) {
            Ok((v, _)) => v,
            Err(Error::BudgetExceeded { d, .. }) => truncated_sum(&spec, m, d, 128)?,
            Err(e) => return Err(e),
        };
        // enough orders for the certificate and the bulk of the bound series
        let max_order = (2 * theta.peak_index(bracket.c_rho * c_upsilon * m) + 32).max(48);
        let upper = theorem1_bound(&spec, m, max_order)?;
        out.push(RatePoint {
            m,
            lower_series: norm * lower_series,
            exact_lo: norm * exact_lo,
            upper_bound: norm * upper.log_value,
        });
    }
    Ok(out)
}

/// Sub-exponentiality trend: `(1/m) log S` per point, which must decay
/// toward zero for sub-exponential families.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeReport {
    /// `(m, (1/m) log S)` rows, in input order.
    pub rows: Vec<(f64, f64)>,
    /// True if the normalized log strictly decreases along the grid.
    pub decreasing: bool,
}

pub fn subexp_check(values: &[(f64, f64)]) -> Result<SlopeReport> {
    if values.len() < 3 {
        return Err(Error::InvalidSpec(
            "sub-exponentiality check needs at least 3 grid points".into(),
        ));
    }
    if !values.windows(2).all(|w| w[1].0 > w[0].0) {
        return Err(Error::InvalidSpec("m grid must be strictly increasing".into()));
    }
    let rows: Vec<(f64, f64)> = values.iter().map(|&(m, log_s)| (m, log_s / m)).collect();
    let decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(SlopeReport { rows, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_one_is_exponential() {
        let ts = ThetaSeries::new(1.0).unwrap();
        for m in [1.0, 2.5, 5.0, 13.0, 30.0] {
            let v = ts.log_eval(m);
            assert!((v - m).abs() <= 1e-12 * m, "m={m}: log f = {v}");
        }
    }

    #[test]
    fn theta_two_matches_bessel_value() {
        // f(m) = I_0(2 sqrt(m)) for theta = 2; at m = 4, f ~ 11.3019
        let ts = ThetaSeries::new(2.0).unwrap();
        let v = ts.log_eval(4.0).exp();
        assert!((v - 11.301921952136329).abs() < 1e-9, "{v}");
    }

    #[test]
    fn theta_limit_at_small_m_is_one() {
        let ts = ThetaSeries::new(3.0).unwrap();
        let v = ts.log_eval(1e-12);
        assert!(v.abs() < 1e-11, "f -> 1 as m -> 0, got log f = {v}");
    }

    #[test]
    fn sandwich_validity() {
        for theta in [0.5, 1.0, 2.0, 3.0] {
            let ts = ThetaSeries::new(theta).unwrap();
            for m in [2.0, 47.0, 1e3, 1e5] {
                let f = ts.log_eval(m);
                assert!(ts.log_peak(m) <= f + 1e-12);
                assert!(f <= ts.log_sandwich_upper(m) + 1e-12);
            }
        }
    }

    #[test]
    fn rate_approaches_theta_monotonically() {
        for theta in [0.5, 1.0, 2.0, 3.0] {
            let ts = ThetaSeries::new(theta).unwrap();
            let grid: Vec<f64> = (2..=6).map(|k| 10f64.powi(k)).collect();
            let rates = ts.rate(&grid);
            let mut prev_dist = f64::INFINITY;
            for (m, r) in rates {
                let dist = (r - theta).abs();
                assert!(
                    dist < prev_dist || theta == 1.0,
                    "theta={theta}, m={m}: {r} not closer"
                );
                prev_dist = dist;
            }
        }
    }

    #[test]
    fn theta_half_far_grid_point() {
        let ts = ThetaSeries::new(0.5).unwrap();
        let r = ts.rate(&[1e6])[0].1;
        assert!((r - 0.5).abs() < 0.125, "within 25% of 0.5, got {r}");
    }

    #[test]
    fn bracket_constants() {
        let b = theorem5_bracket(2.0, 0.0, 1.0).unwrap();
        assert!((b.lower_const - 2.0).abs() < 1e-14);
        assert!((b.c_rho - 1f64.exp()).abs() < 1e-14);
        assert!((b.upper_const - 2.0 * 1f64.exp().sqrt()).abs() < 1e-12); // 2 sqrt(e)

        let b = theorem5_bracket(3.0, 1.0, 2.0).unwrap();
        assert!((b.lower_const - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
        assert!((b.upper_const - 2.0 * (2.0 * 1f64.exp()).sqrt()).abs() < 1e-12);

        assert!(matches!(
            theorem5_bracket(1.5, 2.0, 1.0),
            Err(Error::NotSummable(_))
        ));
    }

    #[test]
    fn empirical_rate_sandwich_holds() {
        let points = empirical_rate(2.0, 0.0, 1.0, &[100.0], 1e-5).unwrap();
        let p = &points[0];
        // lower series <= S; truncated sum sits above the lower series once
        // enough coordinates are included, and below the improved bound
        assert!(p.exact_lo >= p.lower_series - 1e-9);
        assert!(p.exact_lo <= p.upper_bound);
        // bracket containment with the generous finite-m tolerance
        let b = theorem5_bracket(2.0, 0.0, 1.0).unwrap();
        assert!(p.lower_series >= b.lower_const * 0.7);
        assert!(p.lower_series <= b.upper_const * 1.3);
    }

    #[test]
    fn empirical_rate_small_m_positive() {
        // sigma = rho - 1
        let points = empirical_rate(2.0, 1.0, 1.0, &[0.5], 1e-6).unwrap();
        assert!(points[0].exact_lo.is_finite());
        assert!(points[0].lower_series > 0.0);
    }

    #[test]
    fn subexp_trends() {
        // S = 1 + m: (1/m) log(1+m) decreasing toward 0
        let vals: Vec<(f64, f64)> = [10.0f64, 100.0, 1000.0]
            .iter()
            .map(|&m| (m, (1.0 + m).ln()))
            .collect();
        let r = subexp_check(&vals).unwrap();
        assert!(r.decreasing);
        assert!(r.rows.last().unwrap().1 < 0.01);

        // theta series with theta = 2: slope ~ 2 m^{-1/2} -> 0
        let ts = ThetaSeries::new(2.0).unwrap();
        let vals: Vec<(f64, f64)> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&m| (m, ts.log_eval(m)))
            .collect();
        assert!(subexp_check(&vals).unwrap().decreasing);

        // constant S = c
        let vals = vec![(10.0, 3.0f64.ln()), (100.0, 3.0f64.ln()), (1000.0, 3.0f64.ln())];
        let r = subexp_check(&vals).unwrap();
        assert!(r.decreasing);

        assert!(subexp_check(&vals[..2]).is_err());
    }
}
