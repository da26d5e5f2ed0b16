//! Weight-family specifications: per-coordinate sequences, order profiles,
//! and the POD/SPOD spec types, with rigorous tail-sum enclosures.
//!
//! All sequences are 1-indexed: `term(1)` is the first element.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logdomain::log_factorial;

/// Relative width contract for decay-law tail enclosures.
pub const TAIL_RTOL: f64 = 1e-12;

/// A closed interval `[lo, hi]` enclosing a nonnegative real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A nonnegative per-coordinate sequence with finite tail sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(try_from = "SequenceRepr")]
pub enum WeightSequence {
    /// Finite support: `term(j) = values[j-1]`, zero beyond the list.
    Explicit { values: Vec<f64> },
    /// `term(j) = c * j^{-rho}` with `rho > 1`.
    PolyDecay { c: f64, rho: f64 },
    /// `term(j) = c * ceil(j/block)^{-rho}`: a decay law repeated in blocks.
    /// Produced by the SPOD-to-POD reduction; `rho > 1`, `block >= 1`.
    BlockedPolyDecay { c: f64, rho: f64, block: usize },
    /// The identically zero sequence.
    Zero,
}

/// Untagged mirror used to validate on deserialization.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SequenceRepr {
    Explicit { values: Vec<f64> },
    PolyDecay { c: f64, rho: f64 },
    BlockedPolyDecay { c: f64, rho: f64, block: usize },
    Zero,
}

impl TryFrom<SequenceRepr> for WeightSequence {
    type Error = Error;

    fn try_from(repr: SequenceRepr) -> Result<Self> {
        match repr {
            SequenceRepr::Explicit { values } => WeightSequence::explicit(values),
            SequenceRepr::PolyDecay { c, rho } => WeightSequence::poly_decay(c, rho),
            SequenceRepr::BlockedPolyDecay { c, rho, block } => {
                WeightSequence::blocked_poly_decay(c, rho, block)
            }
            SequenceRepr::Zero => Ok(WeightSequence::Zero),
        }
    }
}

impl WeightSequence {
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSequence(format!(
                    "explicit value at index {} is {v}; entries must be finite and >= 0",
                    i + 1
                )));
            }
        }
        Ok(WeightSequence::Explicit { values })
    }

    pub fn poly_decay(c: f64, rho: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidSequence(format!(
                "poly_decay coefficient c = {c}; must be finite and >= 0"
            )));
        }
        if !rho.is_finite() || rho <= 1.0 {
            return Err(Error::InvalidSequence(format!(
                "poly_decay exponent rho = {rho}; must satisfy rho > 1 for a finite tail"
            )));
        }
        Ok(WeightSequence::PolyDecay { c, rho })
    }

    pub fn blocked_poly_decay(c: f64, rho: f64, block: usize) -> Result<Self> {
        if block == 0 {
            return Err(Error::InvalidSequence("block size must be >= 1".into()));
        }
        match Self::poly_decay(c, rho)? {
            WeightSequence::PolyDecay { c, rho } => {
                Ok(WeightSequence::BlockedPolyDecay { c, rho, block })
            }
            _ => unreachable!(),
        }
    }

    /// The sequence value at 1-based index `j`.
    pub fn term(&self, j: usize) -> f64 {
        assert!(j >= 1, "sequences are 1-indexed");
        match self {
            WeightSequence::Explicit { values } => values.get(j - 1).copied().unwrap_or(0.0),
            WeightSequence::PolyDecay { c, rho } => c * (j as f64).powf(-rho),
            WeightSequence::BlockedPolyDecay { c, rho, block } => {
                let inner = (j + block - 1) / block;
                c * (inner as f64).powf(-rho)
            }
            WeightSequence::Zero => 0.0,
        }
    }

    /// True if `term(j) = 0` for all `j` beyond some finite index.
    pub fn finite_support(&self) -> bool {
        matches!(self, WeightSequence::Explicit { .. } | WeightSequence::Zero)
    }

    /// Length of the explicit support, if finite.
    pub fn support_len(&self) -> Option<usize> {
        match self {
            WeightSequence::Explicit { values } => Some(values.len()),
            WeightSequence::Zero => Some(0),
            _ => None,
        }
    }

    /// Rigorous enclosure of the tail sum `zeta_J = sum_{j >= J} term(j)`.
    ///
    /// Exact (zero-width) for finite-support sequences. For decay laws the
    /// enclosure is a partial sum plus an integral remainder bracket, refined
    /// until `hi - lo <= TAIL_RTOL * hi`.
    pub fn tail_sum(&self, j_start: usize) -> Interval {
        assert!(j_start >= 1, "sequences are 1-indexed");
        match self {
            WeightSequence::Zero => Interval::point(0.0),
            WeightSequence::Explicit { values } => {
                if j_start > values.len() {
                    return Interval::point(0.0);
                }
                // Summed back-to-front so repeated calls agree bit-for-bit
                // with the recurrence zeta_J = term(J) + zeta_{J+1}.
                let s = values[j_start - 1..].iter().rev().sum();
                Interval::point(s)
            }
            WeightSequence::PolyDecay { c, rho } => poly_tail(*c, *rho, j_start),
            WeightSequence::BlockedPolyDecay { c, rho, block } => {
                // Explicit terms up to the end of the current block, then
                // `block` copies of every later inner term.
                let inner_done = (j_start + block - 1) / block;
                let aligned_end = inner_done * block; // last index of that block
                let mut head = 0.0;
                for j in j_start..=aligned_end {
                    head += self.term(j);
                }
                let inner = poly_tail(*c, *rho, inner_done + 1);
                Interval {
                    lo: head + *block as f64 * inner.lo,
                    hi: head + *block as f64 * inner.hi,
                }
            }
        }
    }

    /// Tail enclosures `zeta_1 .. zeta_{j_max}` in one pass, satisfying
    /// `zeta_J = term(J) + zeta_{J+1}` exactly in both endpoints.
    pub fn tail_sums_upto(&self, j_max: usize) -> Vec<Interval> {
        let mut out = vec![Interval::point(0.0); j_max + 1]; // 1-based, slot 0 unused
        let mut acc = self.tail_sum(j_max + 1);
        for j in (1..=j_max).rev() {
            let t = self.term(j);
            acc = Interval {
                lo: t + acc.lo,
                hi: t + acc.hi,
            };
            out[j] = acc;
        }
        out
    }
}

/// Enclosure of `sum_{j >= j_start} c * j^{-rho}` for `rho > 1`.
fn poly_tail(c: f64, rho: f64, j_start: usize) -> Interval {
    if c == 0.0 {
        return Interval::point(0.0);
    }
    // Partial sum of t terms, then integral remainder bracket
    //   c * (J+t)^{1-rho}/(rho-1)  <=  tail  <=  c * (J+t-1)^{1-rho}/(rho-1),
    // doubling t until the width contract holds.
    let j0 = j_start as f64;
    let mut t: usize = 64;
    loop {
        let mut partial = 0.0;
        for j in (j_start..j_start + t).rev() {
            partial += c * (j as f64).powf(-rho);
        }
        let lo = partial + c * (j0 + t as f64).powf(1.0 - rho) / (rho - 1.0);
        let hi = partial + c * (j0 + t as f64 - 1.0).powf(1.0 - rho) / (rho - 1.0);
        if hi - lo <= TAIL_RTOL * hi || t >= (1 << 26) {
            return Interval { lo, hi };
        }
        t *= 2;
    }
}

/// Order-dependent factors `Gamma_ell`, stored and served in log domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(try_from = "ProfileRepr")]
pub enum OrderProfile {
    /// `Gamma_ell = values[ell]` (Gamma_0 first), zero beyond the list.
    Explicit { values: Vec<f64> },
    /// `Gamma_ell = (ell!)^sigma` with `sigma >= 0`; `Gamma_0 = 1`.
    FactorialPower { sigma: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ProfileRepr {
    Explicit { values: Vec<f64> },
    FactorialPower { sigma: f64 },
}

impl TryFrom<ProfileRepr> for OrderProfile {
    type Error = Error;

    fn try_from(repr: ProfileRepr) -> Result<Self> {
        match repr {
            ProfileRepr::Explicit { values } => OrderProfile::explicit(values),
            ProfileRepr::FactorialPower { sigma } => OrderProfile::factorial_power(sigma),
        }
    }
}

impl OrderProfile {
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidProfile(
                "explicit profile needs at least Gamma_0".into(),
            ));
        }
        for (ell, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "Gamma_{ell} = {v}; entries must be finite and >= 0"
                )));
            }
        }
        Ok(OrderProfile::Explicit { values })
    }

    pub fn factorial_power(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidProfile(format!(
                "factorial_power sigma = {sigma}; must be finite and >= 0"
            )));
        }
        Ok(OrderProfile::FactorialPower { sigma })
    }

    /// `Gamma_0` in linear domain.
    pub fn gamma0(&self) -> f64 {
        match self {
            OrderProfile::Explicit { values } => values[0],
            OrderProfile::FactorialPower { .. } => 1.0,
        }
    }

    /// `log Gamma_ell`; NEG_INFINITY where the profile vanishes.
    pub fn log_gamma(&self, ell: usize) -> f64 {
        match self {
            OrderProfile::Explicit { values } => {
                values.get(ell).map_or(f64::NEG_INFINITY, |v| v.ln())
            }
            OrderProfile::FactorialPower { sigma } => sigma * log_factorial(ell),
        }
    }

    /// Index past which the profile is identically zero, if any.
    pub fn support_len(&self) -> Option<usize> {
        match self {
            OrderProfile::Explicit { values } => Some(values.len()),
            OrderProfile::FactorialPower { .. } => None,
        }
    }

    pub fn is_factorial(&self) -> bool {
        matches!(self, OrderProfile::FactorialPower { sigma } if *sigma == 1.0)
    }
}

/// A product-and-order-dependent weight family: `gamma_v = Gamma_{|v|} * prod Upsilon_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PodSpec {
    pub gamma: OrderProfile,
    pub upsilon: WeightSequence,
}

impl PodSpec {
    pub fn new(gamma: OrderProfile, upsilon: WeightSequence) -> Self {
        PodSpec { gamma, upsilon }
    }

    /// View as a smoothness-1 SPOD family.
    pub fn to_spod(&self) -> SpodSpec {
        SpodSpec {
            alpha: 1,
            gamma: self.gamma.clone(),
            upsilon_grid: vec![self.upsilon.clone()],
        }
    }
}

/// A smoothness-driven POD family: `gamma_v = sum_{nu} Gamma_{|nu|} * prod Upsilon_{j, nu_j}`
/// over multi-indices `nu` with entries in `1..=alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(try_from = "SpodRepr")]
pub struct SpodSpec {
    pub alpha: usize,
    pub gamma: OrderProfile,
    /// `upsilon_grid[k-1]` is the sequence `j -> Upsilon_{j,k}`.
    #[serde(rename = "upsilon")]
    pub upsilon_grid: Vec<WeightSequence>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpodRepr {
    alpha: usize,
    gamma: OrderProfile,
    #[serde(rename = "upsilon")]
    upsilon_grid: Vec<WeightSequence>,
}

impl TryFrom<SpodRepr> for SpodSpec {
    type Error = Error;

    fn try_from(repr: SpodRepr) -> Result<Self> {
        SpodSpec::new(repr.alpha, repr.gamma, repr.upsilon_grid)
    }
}

impl SpodSpec {
    pub fn new(alpha: usize, gamma: OrderProfile, upsilon_grid: Vec<WeightSequence>) -> Result<Self> {
        if alpha < 1 {
            return Err(Error::InvalidSpec("alpha must be >= 1".into()));
        }
        if upsilon_grid.len() != alpha {
            return Err(Error::InvalidSpec(format!(
                "expected {alpha} coordinate sequences (one per smoothness level), got {}",
                upsilon_grid.len()
            )));
        }
        Ok(SpodSpec {
            alpha,
            gamma,
            upsilon_grid,
        })
    }

    pub fn upsilon(&self, k: usize) -> &WeightSequence {
        &self.upsilon_grid[k - 1]
    }
}

/// Either flavor of weight family, as read from a JSON spec file.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Pod(PodSpec),
    Spod(SpodSpec),
}

/// Parse a JSON spec document. POD files carry `{"gamma": .., "upsilon": {..}}`;
/// SPOD files add `"alpha"` and make `"upsilon"` an array of sequences.
pub fn parse_spec(text: &str) -> Result<FamilySpec> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::SpecParse {
        path: "$".into(),
        message: e.to_string(),
    })?;
    let is_spod = value.get("alpha").is_some();
    if is_spod {
        parse_spod(&value).map(FamilySpec::Spod)
    } else {
        parse_pod(&value).map(FamilySpec::Pod)
    }
}

fn parse_pod(value: &serde_json::Value) -> Result<PodSpec> {
    let gamma = field(value, "gamma")?;
    let upsilon = field(value, "upsilon")?;
    let gamma: OrderProfile = from_value(gamma, "gamma")?;
    let upsilon: WeightSequence = from_value(upsilon, "upsilon")?;
    Ok(PodSpec::new(gamma, upsilon))
}

fn parse_spod(value: &serde_json::Value) -> Result<SpodSpec> {
    let alpha = field(value, "alpha")?
        .as_u64()
        .ok_or_else(|| Error::SpecParse {
            path: "alpha".into(),
            message: "must be a positive integer".into(),
        })? as usize;
    let gamma: OrderProfile = from_value(field(value, "gamma")?, "gamma")?;
    let seqs = field(value, "upsilon")?
        .as_array()
        .ok_or_else(|| Error::SpecParse {
            path: "upsilon".into(),
            message: "must be an array of sequences for SPOD specs".into(),
        })?;
    let mut grid = Vec::with_capacity(seqs.len());
    for (i, s) in seqs.iter().enumerate() {
        grid.push(from_value(s, &format!("upsilon[{i}]"))?);
    }
    SpodSpec::new(alpha, gamma, grid).map_err(|e| Error::SpecParse {
        path: "alpha".into(),
        message: e.to_string(),
    })
}

fn field<'a>(value: &'a serde_json::Value, name: &str) -> Result<&'a serde_json::Value> {
    value.get(name).ok_or_else(|| Error::SpecParse {
        path: name.into(),
        message: "missing field".into(),
    })
}

fn from_value<T: serde::de::DeserializeOwned>(value: &serde_json::Value, path: &str) -> Result<T> {
    serde_json::from_value(value.clone()).map_err(|e| Error::SpecParse {
        path: path.into(),
        message: e.to_string(),
    })
}
