//! Monte Carlo consistency: sampled walks against exact laws. Every test is
//! fully seeded, so these are regression tests, not flaky statistics — the
//! z-score bands were sized so a correct sampler passes with huge margin.

use nbrw::graph::named_graph;
use nbrw::sieve::factorial_moments_mc;
use nbrw::spectral::nbrw_k_step_vertex_distribution;
use nbrw::stats::balls_and_bins;
use nbrw::walk::{fold_trials, run_trials, WalkConfig, WalkKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// Tally of walk endpoints over `trials` independent samples.
fn endpoint_tally(
    g: &nbrw::graph::RegularGraph,
    cfg: &WalkConfig,
    trials: usize,
) -> Vec<u64> {
    let n = g.vertex_count();
    fold_trials(
        g,
        cfg,
        trials,
        || vec![0u64; n],
        |mut acc, s| {
            acc[s.end as usize] += 1;
            acc
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += *y;
            }
            a
        },
    )
    .unwrap()
}

#[test]
fn endpoint_frequencies_match_exact_law() {
    const TRIALS: usize = 1_000_000;
    for name in ["k4", "petersen"] {
        let g = named_graph(name).unwrap();
        for k in 1..=10usize {
            let exact = nbrw_k_step_vertex_distribution::<f64>(&g, 0, k).unwrap();
            let cfg = WalkConfig::new(WalkKind::Nbrw, k, 0, 20_000 + k as u64);
            let tally = endpoint_tally(&g, &cfg, TRIALS);
            for (v, (&count, &p)) in tally.iter().zip(exact.probs()).enumerate() {
                if p == 0.0 {
                    assert_eq!(count, 0, "{name} k={k}: unreachable vertex {v} was hit");
                    continue;
                }
                let freq = count as f64 / TRIALS as f64;
                let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
                let z = (freq - p).abs() / sigma;
                assert!(
                    z <= 4.0,
                    "{name} k={k} v={v}: freq {freq:.6} vs exact {p:.6} is {z:.2} sigma off"
                );
            }
        }
    }
}

#[test]
fn k4_three_step_return_frequency() {
    const TRIALS: usize = 1_000_000;
    let g = named_graph("k4").unwrap();
    let cfg = WalkConfig::new(WalkKind::Nbrw, 3, 1, 404);
    let returns = fold_trials(
        &g,
        &cfg,
        TRIALS,
        || 0u64,
        |acc, s| acc + u64::from(s.end == s.start),
        |a, b| a + b,
    )
    .unwrap();
    let freq = returns as f64 / TRIALS as f64;
    assert!((freq - 0.5).abs() <= 0.002, "return frequency {freq}");
}

#[test]
fn srw_two_step_return_frequency() {
    // The simple walk may backtrack: from any K4 vertex the two-step return
    // probability is exactly 1/3.
    const TRIALS: usize = 1_000_000;
    let g = named_graph("k4").unwrap();
    let cfg = WalkConfig::new(WalkKind::Srw, 2, 0, 405);
    let returns = fold_trials(
        &g,
        &cfg,
        TRIALS,
        || 0u64,
        |acc, s| acc + u64::from(s.end == s.start),
        |a, b| a + b,
    )
    .unwrap();
    let freq = returns as f64 / TRIALS as f64;
    assert!((freq - 1.0 / 3.0).abs() <= 0.002, "return frequency {freq}");
}

#[test]
fn long_walks_equidistribute() {
    // 100 walks of 10^4 steps on Petersen: every vertex should collect
    // close to a tenth of all positions.
    let g = named_graph("petersen").unwrap();
    let cfg = WalkConfig::new(WalkKind::Nbrw, 10_000, 0, 777);
    let samples = run_trials(&g, &cfg, 100).unwrap();
    let mut totals = vec![0u64; 10];
    for s in &samples {
        for (t, c) in totals.iter_mut().zip(&s.counts) {
            *t += *c;
        }
    }
    let grand: u64 = totals.iter().sum();
    assert_eq!(grand, 100 * 10_000);
    for (v, &t) in totals.iter().enumerate() {
        let share = t as f64 / grand as f64;
        assert!(
            (share - 0.1).abs() <= 0.005,
            "vertex {v} got share {share} of all visits"
        );
    }
}

#[test]
fn balls_and_bins_empty_fraction_matches_binomial() {
    // Mean number of empty bins over many throws vs the exact value
    // n(1-1/n)^m, judged on the empirical standard error.
    let (n, m) = (100usize, 100usize);
    let trials = 10_000u64;
    let mut empties = Vec::with_capacity(trials as usize);
    for seed in 0..trials {
        let h = balls_and_bins(m, n, seed);
        empties.push(h.count(0) as f64);
    }
    let mean = empties.iter().sum::<f64>() / trials as f64;
    let var = empties.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    let expect = n as f64 * (1.0 - 1.0 / n as f64).powi(m as i32);
    let z = (mean - expect).abs() / (var / trials as f64).sqrt();
    assert!(z <= 4.0, "mean empties {mean} vs {expect}, {z:.2} sigma");
}

#[test]
fn two_balls_two_bins_collision_rate() {
    // Both balls land in one bin with probability 1/2 exactly.
    let trials = 100_000u64;
    let mut collisions = 0u64;
    for seed in 0..trials {
        let h = balls_and_bins(2, 2, seed);
        if h.count(2) == 1 {
            collisions += 1;
        }
    }
    let freq = collisions as f64 / trials as f64;
    let sigma = (0.25f64 / trials as f64).sqrt();
    assert!((freq - 0.5).abs() <= 4.0 * sigma, "collision rate {freq}");
}

#[test]
fn mc_moments_recover_poisson_within_stderr() {
    // Factorial moments of Po(1) are 1/i!; the Monte Carlo estimator must
    // land within its own reported error bars.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let po = Poisson::new(1.0f64).unwrap();
    let ensemble: Vec<Vec<u64>> =
        (0..1_000_000).map(|_| vec![po.sample(&mut rng) as u64]).collect();
    let table = factorial_moments_mc::<f64>(&ensemble, 5).unwrap();
    let mut factorial = 1.0f64;
    for i in 0..=5usize {
        if i > 0 {
            factorial *= i as f64;
        }
        let entry = table.entry(&[i]).unwrap();
        let target = 1.0 / factorial;
        let stderr = entry.stderr.unwrap();
        if i == 0 {
            assert_eq!(entry.value, 1.0, "zeroth moment is an average of ones");
            continue;
        }
        assert!(stderr > 0.0);
        let z = (entry.value - target).abs() / stderr;
        assert!(
            z <= 4.0,
            "S({i}) = {} vs {target}, {z:.2} sigma (stderr {stderr:.2e})",
            entry.value
        );
    }
}
