//! Sampling moments checked against closed-form distribution moments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

use vodtier::workload::{sample_gop_size, weibull_draw, GopStats, ViewModel};

fn truncated_normal_mean(mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let z = Normal::new(0.0, 1.0).unwrap();
    let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
    mu + sigma * (z.pdf(a) - z.pdf(b)) / (z.cdf(b) - z.cdf(a))
}

#[test]
fn gop_size_mean_matches_truncated_normal() {
    let stats = GopStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 200_000;
    let mean_kb = (0..n)
        .map(|_| sample_gop_size(&mut rng, &stats).unwrap() * 1024.0)
        .sum::<f64>()
        / n as f64;
    let oracle = truncated_normal_mean(
        stats.size_mean_kb,
        stats.size_std_kb,
        stats.size_min_kb,
        stats.size_max_kb,
    );
    assert!(
        (mean_kb - oracle).abs() / oracle < 0.01,
        "{mean_kb} vs {oracle}"
    );
}

#[test]
fn narrow_truncation_shifts_the_mean() {
    // truncation that bites: [mean, mean + 2 sd]
    let stats = GopStats {
        size_min_kb: 655.08,
        size_max_kb: 655.08 + 2.0 * 201.44,
        ..GopStats::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let mean_kb = (0..n)
        .map(|_| sample_gop_size(&mut rng, &stats).unwrap() * 1024.0)
        .sum::<f64>()
        / n as f64;
    let oracle = truncated_normal_mean(655.08, 201.44, stats.size_min_kb, stats.size_max_kb);
    assert!(
        (mean_kb - oracle).abs() / oracle < 0.01,
        "{mean_kb} vs {oracle}"
    );
    assert!(oracle > 655.08 + 100.0);
}

#[test]
fn weibull_draws_match_analytic_mean() {
    for shape in [0.6, 1.0, 2.4] {
        let m = ViewModel::new(shape, 2.0, 1.0).unwrap();
        let n = 100_000u64;
        let mean = (0..n)
            .map(|id| weibull_draw(99, id, &m).unwrap())
            .sum::<f64>()
            / n as f64;
        let oracle = 2.0 * gamma(1.0 + 1.0 / shape);
        assert!(
            (mean - oracle).abs() / oracle < 0.02,
            "shape {shape}: {mean} vs {oracle}"
        );
    }
}
