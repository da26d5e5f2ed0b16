//! Seeded property suites behind `podsum verify`: deterministic pass/fail
//! checks over randomized instances of the core inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::montecarlo::{chain_bound_check, distinctness_estimate, distinctness_exact, McConfig};
use crate::spod::{per_term_domination, reduction_map, SpodTable};
use crate::symfunc::{lemma2_bound_coarse, lemma2_bound_fine, log_elementary_prefix};
use crate::weights::{OrderProfile, SpodSpec, WeightSequence};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

fn random_explicit(rng: &mut ChaCha8Rng, d: usize, allow_zero: bool) -> WeightSequence {
    let values: Vec<f64> = (0..d)
        .map(|_| {
            if allow_zero && rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(1e-3..1.5)
            }
        })
        .collect();
    WeightSequence::explicit(values).unwrap()
}

/// Symmetric-sum bound chain and telescoping identity over random instances.
pub fn lemma2_suite(seed: u64, n: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain_violations = 0usize;
    let mut worst_residual = 0.0f64;
    for _ in 0..n {
        let d = rng.gen_range(1..=30);
        let seq = random_explicit(&mut rng, d, true);
        let ell = rng.gen_range(1..=d);
        let exact = log_elementary_prefix(&seq, d, ell).unwrap()[ell];
        let fine = lemma2_bound_fine(&seq, ell);
        let coarse = lemma2_bound_coarse(&seq, ell);
        if !(exact <= fine + 1e-10 && fine <= coarse + 1e-10) {
            chain_violations += 1;
        }

        // identity needs positive tails along 1..=ell
        let pd_len = rng.gen_range(1..=12);
        let positive = random_explicit(&mut rng, pd_len, false);
        let pd = positive.support_len().unwrap();
        let pell = rng.gen_range(1..=pd.min(8));
        let report = chain_bound_check(&positive, pell).unwrap();
        worst_residual = worst_residual.max(report.identity_residual);
        if report.exact > report.product_bound + 1e-10 {
            chain_violations += 1;
        }
    }
    vec![
        Check::new(
            "lemma2.bound_chain",
            chain_violations == 0,
            format!("{chain_violations} violations over {n} instances (required 0)"),
        ),
        Check::new(
            "lemma2.telescoping_identity",
            worst_residual <= 1e-10,
            format!("worst relative residual {worst_residual:.3e} (required <= 1e-10)"),
        ),
    ]
}

/// Reduction injectivity (exhaustive) and per-term domination (sampled).
pub fn spod_reduction_suite(seed: u64, n: usize) -> Vec<Check> {
    // exhaustive injectivity over v subset of {1..5}, alpha <= 3
    let mut injective = true;
    let mut images_total = 0usize;
    for alpha in 1..=3usize {
        let mut seen = std::collections::HashSet::new();
        for mask in 0u32..(1 << 5) {
            let v: Vec<usize> = (1..=5).filter(|j| mask & (1 << (j - 1)) != 0).collect();
            for_each_multi_index(v.len(), alpha, |nu| {
                let image = reduction_map(&v, nu, alpha).unwrap();
                if !seen.insert(image) {
                    injective = false;
                }
                images_total += 1;
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut domination_violations = 0usize;
    for _ in 0..n {
        let alpha = rng.gen_range(1..=3);
        let d = rng.gen_range(1..=6);
        let grid: Vec<WeightSequence> =
            (0..alpha).map(|_| random_explicit(&mut rng, d, false)).collect();
        let spec =
            SpodSpec::new(alpha, OrderProfile::factorial_power(1.0).unwrap(), grid).unwrap();
        let mut v = Vec::new();
        let mut nu = Vec::new();
        for j in 1..=d {
            if rng.gen_bool(0.6) {
                v.push(j);
                nu.push(rng.gen_range(1..=alpha));
            }
        }
        if v.is_empty() {
            v.push(1);
            nu.push(rng.gen_range(1..=alpha));
        }
        let m = rng.gen_range(1.0..10.0);
        let (lhs, rhs) = per_term_domination(&spec, &v, &nu, m).unwrap();
        if lhs > rhs + 1e-9 {
            domination_violations += 1;
        }
    }
    vec![
        Check::new(
            "spod.reduction_injective",
            injective,
            format!("{images_total} images, all distinct per alpha"),
        ),
        Check::new(
            "spod.per_term_domination",
            domination_violations == 0,
            format!("{domination_violations} violations over {n} samples (required 0)"),
        ),
    ]
}

fn for_each_multi_index(len: usize, alpha: usize, mut f: impl FnMut(&[usize])) {
    let mut nu = vec![1usize; len];
    loop {
        f(&nu);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            nu[i] += 1;
            if nu[i] <= alpha {
                break;
            }
            nu[i] = 1;
            i += 1;
        }
    }
}

/// Monte Carlo consistency: estimates within 3 standard errors of the exact
/// probability in at least 99% of seeded runs.
pub fn mc_suite(seed: u64, n_samples: usize) -> Vec<Check> {
    let values: Vec<f64> = (1..=20).map(|j| (j as f64).powi(-2)).collect();
    let seq = WeightSequence::explicit(values).unwrap();
    let runs = 100;
    let mut within = 0usize;
    for run in 0..runs {
        let ell = 2 + run % 3;
        let exact = distinctness_exact(&seq, ell).unwrap();
        let cfg = McConfig::new(&seq, ell, n_samples, seed.wrapping_add(run as u64)).unwrap();
        let est = distinctness_estimate(&cfg);
        if (est.p_hat - exact).abs() <= 3.0 * est.std_err {
            within += 1;
        }
    }

    // determinism of a single configuration
    let cfg = McConfig::new(&seq, 3, n_samples.min(50_000), seed).unwrap();
    let a = distinctness_estimate(&cfg);
    let b = distinctness_estimate(&cfg);

    vec![
        Check::new(
            "mc.three_sigma_coverage",
            within >= 99,
            format!("{within}/{runs} runs within 3 standard errors (required >= 99)"),
        ),
        Check::new(
            "mc.determinism",
            a.p_hat == b.p_hat,
            format!("repeat estimates {} and {}", a.p_hat, b.p_hat),
        ),
    ]
}

/// Aggregate dominance of the reduced POD family over the SPOD slice sums,
/// brute-forced on small explicit instances.
pub fn aggregate_domination_suite(seed: u64, n: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    for _ in 0..n {
        let alpha = rng.gen_range(1..=3);
        let d = rng.gen_range(1..=5);
        let grid: Vec<WeightSequence> = (0..alpha)
            .map(|_| random_explicit(&mut rng, d, false))
            .collect();
        let spec =
            SpodSpec::new(alpha, OrderProfile::factorial_power(1.0).unwrap(), grid).unwrap();
        let reduced = crate::spod::reduced_upsilon(&spec).unwrap();
        let table = SpodTable::build(&spec, d, d).unwrap();
        let reduced_len = alpha * d;
        let e_reduced = log_elementary_prefix(&reduced, reduced_len, reduced_len).unwrap();
        for ell in 1..=d {
            for lp in ell..=alpha * ell {
                let lhs = table.log_t(ell, lp);
                // reduction images live inside {1..alpha*d}, so row alpha*d covers them
                let rhs = e_reduced[lp];
                if lhs > rhs + 1e-9 {
                    violations += 1;
                }
            }
        }
    }
    vec![Check::new(
        "spod.aggregate_domination",
        violations == 0,
        format!("{violations} slice violations over {n} instances (required 0)"),
    )]
}

/// All suites back to back.
pub fn all_suites(seed: u64, n: usize, n_samples: usize) -> Vec<Check> {
    let mut checks = lemma2_suite(seed, n);
    checks.extend(spod_reduction_suite(seed, n));
    checks.extend(aggregate_domination_suite(seed, n.min(50)));
    checks.extend(mc_suite(seed, n_samples));
    checks
}

/// Deterministic plain-text rendering: one line per check, no timing.
pub fn render(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(if c.passed { "PASS " } else { "FAIL " });
        out.push_str(&c.name);
        out.push_str(": ");
        out.push_str(&c.detail);
        out.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!(
        "{} checks, {} failed\n",
        checks.len(),
        failed
    ));
    out
}
