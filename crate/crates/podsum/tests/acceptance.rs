//! Acceptance gate: one check per criterion, each printing a single
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines for passing criteria too.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use podsum::logdomain::logaddexp;
use podsum::pod::{naive_bound, theorem1_bound, truncated_sum, NaiveBound};
use podsum::spod::spod_truncated_sum;
use podsum::verify;
use podsum::weights::{OrderProfile, PodSpec, SpodSpec, WeightSequence};
use podsum::ThetaSeries;

fn report(criterion: usize, name: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion:2} [{}] {name}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} ({name}) failed: {detail}");
}

fn rel_err(log_a: f64, log_b: f64) -> f64 {
    (log_a - log_b).exp_m1().abs()
}

fn random_values(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| {
            if rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(1e-3..1.2)
            }
        })
        .collect()
}

/// Full subset enumeration of `log sum_v Gamma_{|v|} m^{|v|} prod Upsilon_j`.
fn enumerate_pod(gamma: &[f64], upsilon: &[f64], m: f64) -> f64 {
    let d = upsilon.len();
    let mut acc = f64::NEG_INFINITY;
    for mask in 0u32..(1 << d) {
        let ell = mask.count_ones() as usize;
        let mut term = gamma[ell].ln() + ell as f64 * m.ln();
        for j in 0..d {
            if mask & (1 << j) != 0 {
                term += upsilon[j].ln();
            }
        }
        acc = logaddexp(acc, term);
    }
    acc
}

#[test]
fn criterion_01_pod_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.gen_range(1..=12);
        let upsilon = random_values(&mut rng, d);
        let gamma: Vec<f64> = (0..=d).map(|_| rng.gen_range(0.1..3.0)).collect();
        let m = rng.gen_range(0.1..5.0);
        let spec = PodSpec::new(
            OrderProfile::explicit(gamma.clone()).unwrap(),
            WeightSequence::explicit(upsilon.clone()).unwrap(),
        );
        let got = truncated_sum(&spec, m, d, d).unwrap();
        let want = enumerate_pod(&gamma, &upsilon, m);
        worst = worst.max(rel_err(got, want));
    }
    let elapsed = started.elapsed();
    report(
        1,
        "pod oracle equivalence",
        worst <= 1e-10 && elapsed.as_secs_f64() < 10.0,
        &format!(
            "worst relative error {worst:.3e} over 200 specs in {:.2}s (need <= 1e-10, < 10s)",
            elapsed.as_secs_f64()
        ),
    );
}

/// `(v, nu)` enumeration of the SPOD sum via a mask over v and an odometer
/// over nu.
fn enumerate_spod(spec: &SpodSpec, d: usize, m: f64) -> f64 {
    let alpha = spec.alpha;
    let mut acc = spec.gamma.gamma0().ln();
    for mask in 1u32..(1 << d) {
        let v: Vec<usize> = (1..=d).filter(|j| mask & (1 << (j - 1)) != 0).collect();
        let mut nu = vec![1usize; v.len()];
        'multi_indices: loop {
            let nu_total: usize = nu.iter().sum();
            let mut term = spec.gamma.log_gamma(nu_total) + v.len() as f64 * m.ln();
            for (&j, &k) in v.iter().zip(&nu) {
                term += spec.upsilon(k).term(j).ln();
            }
            acc = logaddexp(acc, term);
            let mut i = 0;
            while i < nu.len() {
                nu[i] += 1;
                if nu[i] <= alpha {
                    continue 'multi_indices;
                }
                nu[i] = 1;
                i += 1;
            }
            break;
        }
    }
    acc
}

#[test]
fn criterion_02_spod_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let alpha = rng.gen_range(1..=3);
        let d = rng.gen_range(1..=6);
        let grid: Vec<WeightSequence> = (0..alpha)
            .map(|_| WeightSequence::explicit(random_values(&mut rng, d)).unwrap())
            .collect();
        let sigma = rng.gen_range(0.0..2.0);
        let spec =
            SpodSpec::new(alpha, OrderProfile::factorial_power(sigma).unwrap(), grid).unwrap();
        let m = rng.gen_range(0.1..4.0);
        let got = spod_truncated_sum(&spec, m, d, d).unwrap();
        let want = enumerate_spod(&spec, d, m);
        worst = worst.max(rel_err(got, want));
    }
    let elapsed = started.elapsed();
    report(
        2,
        "spod oracle equivalence",
        worst <= 1e-10 && elapsed.as_secs_f64() < 30.0,
        &format!(
            "worst relative error {worst:.3e} over 100 specs in {:.2}s (need <= 1e-10, < 30s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_lemma2_chain() {
    let checks = verify::lemma2_suite(303, 1000);
    let passed = checks.iter().all(|c| c.passed);
    let detail: Vec<String> = checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    report(3, "lemma 2 bound chain and identity", passed, &detail.join("; "));
}

#[test]
fn criterion_04_theorem1_dominance() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut violations = 0usize;
    for _ in 0..500 {
        let spec = if rng.gen_bool(0.5) {
            let sigma: f64 = rng.gen_range(0.0..1.5);
            let rho = sigma.max(1.0) + rng.gen_range(0.1..2.0);
            PodSpec::new(
                OrderProfile::factorial_power(sigma).unwrap(),
                WeightSequence::poly_decay(rng.gen_range(0.1..2.0), rho).unwrap(),
            )
        } else {
            let d = rng.gen_range(1..=20);
            PodSpec::new(
                OrderProfile::factorial_power(rng.gen_range(0.0..1.5)).unwrap(),
                WeightSequence::explicit(random_values(&mut rng, d)).unwrap(),
            )
        };
        let m = rng.gen_range(0.1..8.0);
        let max_order = rng.gen_range(1..=24);
        let d = rng.gen_range(max_order..=max_order + 200);
        let exact = truncated_sum(&spec, m, d, max_order).unwrap();
        let bound = theorem1_bound(&spec, m, max_order).unwrap();
        if exact > bound.log_value + 1e-9 {
            violations += 1;
        }
    }
    report(
        4,
        "theorem 1 dominance",
        violations == 0,
        &format!("{violations} violations over 500 random summable cases (need 0)"),
    );
}

#[test]
fn criterion_05_theorem3_separation() {
    let spec = PodSpec::new(
        OrderProfile::factorial_power(1.0).unwrap(),
        WeightSequence::poly_decay(1.0, 2.0).unwrap(),
    );
    let naive = naive_bound(&spec, 1.0).unwrap();
    let diverged = matches!(naive, NaiveBound::Diverged);
    let bound = theorem1_bound(&spec, 1.0, 64).unwrap();
    let exact = truncated_sum(&spec, 1.0, 10_000, 64).unwrap();
    let passed = diverged && bound.log_value.is_finite() && bound.log_value >= exact;
    report(
        5,
        "theorem 3 separation",
        passed,
        &format!(
            "naive diverged = {diverged}, log bound {:.6} >= log truncated sum {:.6}",
            bound.log_value, exact
        ),
    );
}

#[test]
fn criterion_06_theta_series() {
    let theta1 = ThetaSeries::new(1.0).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=29 {
        let m = 1.0 + i as f64;
        worst = worst.max((theta1.log_eval(m) - m).abs() / m);
    }
    let exp_ok = worst <= 1e-12;

    let mut monotone = true;
    for theta in [0.5, 2.0, 3.0] {
        let series = ThetaSeries::new(theta).unwrap();
        let grid: Vec<f64> = (0..9).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
        let gaps: Vec<f64> = series
            .rate(&grid)
            .iter()
            .map(|&(_, r)| (r - theta).abs())
            .collect();
        if !gaps.windows(2).all(|w| w[1] < w[0]) {
            monotone = false;
        }
    }
    report(
        6,
        "theta series rate",
        exp_ok && monotone,
        &format!(
            "theta=1 worst relative gap {worst:.3e} (need <= 1e-12); monotone approach for theta in {{0.5,2,3}}: {monotone}"
        ),
    );
}

#[test]
fn criterion_07_theorem5_bracket() {
    let started = Instant::now();
    let bracket = podsum::theorem5_bracket(2.0, 0.0, 1.0).unwrap();
    let two_root_e = 2.0 * (1.0f64).exp().sqrt();
    let consts_ok =
        (bracket.lower_const - 2.0).abs() <= 1e-12 && (bracket.upper_const - two_root_e).abs() <= 1e-12;

    let theta = ThetaSeries::new(2.0).unwrap();
    let at = |m: f64| m.powf(-0.5) * theta.log_eval(m);
    let v4 = at(1e4);
    let v2 = at(1e2);
    let window_ok = (1.4..=3.3).contains(&v4) && (v4 - 2.0).abs() < (v2 - 2.0).abs();
    let elapsed = started.elapsed();
    report(
        7,
        "theorem 5 bracket",
        consts_ok && window_ok && elapsed.as_secs_f64() < 5.0,
        &format!(
            "constants ({:.6}, {:.6}) vs (2, {:.6}); normalized log {v4:.4} at m=1e4 (in [1.4,3.3], closer to 2 than {v2:.4}); {:.2}s",
            bracket.lower_const, bracket.upper_const, two_root_e, elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_08_monte_carlo() {
    let checks = verify::mc_suite(808, 100_000);
    let coverage = checks.iter().find(|c| c.name == "mc.three_sigma_coverage").unwrap();
    report(8, "monte carlo distinctness", coverage.passed, &coverage.detail);
}

#[test]
fn criterion_09_spod_reduction() {
    let checks = verify::spod_reduction_suite(909, 1000);
    let passed = checks.iter().all(|c| c.passed);
    let detail: Vec<String> = checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    report(9, "spod reduction", passed, &detail.join("; "));
}

#[test]
fn criterion_10_verify_determinism() {
    let run = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_podsum"))
            .args(["verify", "all", "--seed", "7", "--n", "100", "--n-samples", "20000"])
            .output()
            .expect("verify run")
    };
    let a = run();
    let b = run();
    let passed = a.status.success()
        && b.status.success()
        && a.stdout == b.stdout
        && !a.stdout.is_empty();
    report(
        10,
        "verify determinism",
        passed,
        &format!(
            "two runs: {} bytes vs {} bytes, identical = {}",
            a.stdout.len(),
            b.stdout.len(),
            a.stdout == b.stdout
        ),
    );
}
