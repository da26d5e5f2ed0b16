//! Weighted sums over finite subsets of the naturals,
//! `S_gamma(m) = sum_v gamma_v m^{|v|}`, for product, product-and-order-
//! dependent (POD), and smoothness-driven POD (SPOD) weight families.
//!
//! The crate provides exact truncated evaluation in log domain, certified
//! upper bounds via elementary symmetric function inequalities, a
//! summability classifier, theta-series asymptotics with growth-rate
//! brackets, the SPOD-to-POD reduction, and seeded Monte Carlo checks.

pub mod asymptotics;
pub mod error;
pub mod logdomain;
pub mod montecarlo;
pub mod pod;
pub mod spod;
pub mod symfunc;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use weights::{FamilySpec, Interval, OrderProfile, PodSpec, SpodSpec, WeightSequence};

pub use pod::{
    adaptive_sum, bound_report, naive_bound, summability_classifier, theorem1_bound,
    truncated_sum, BoundReport, NaiveBound, Summability, TailStatus, Theorem1Bound, Truncation,
};

pub use symfunc::{lemma2_bound_coarse, lemma2_bound_fine, log_elementary_prefix, SymTable};

pub use asymptotics::{
    empirical_rate, subexp_check, theorem5_bracket, RateBracket, RatePoint, SlopeReport,
    ThetaSeries,
};

pub use spod::{
    divergence_probe, per_term_domination, reduced_upsilon, reduction_map, spod_growth_bracket,
    spod_summability, spod_truncated_sum, SpodGrowthConstants, SpodSummability, SpodTable,
};

pub use montecarlo::{
    chain_bound_check, distinctness_estimate, distinctness_exact, ChainReport, Estimate, McConfig,
};
