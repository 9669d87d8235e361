//! Empirical correlations of seeded draws against the exact values.

use ggchain::analysis::closed_form_correlation;
use ggchain::oracle::sample;
use ggchain::{GraphSpec, Tau};

#[test]
fn every_graph_within_four_standard_errors() {
    let cases = [
        (GraphSpec::open(6).unwrap(), 0.45, 11),
        (GraphSpec::centered(3).unwrap(), 0.3, 12),
        (GraphSpec::cycle(7).unwrap(), 0.4, 13),
        (GraphSpec::cycle(3).unwrap(), 0.49, 14),
    ];
    for (g, t, seed) in cases {
        let tau = Tau::new(t).unwrap();
        let b = sample(g, tau, 50_000, seed).unwrap();
        let exact = closed_form_correlation(g, tau).unwrap();
        let worst = b.fisher_discrepancy(&exact).amax();
        assert!(worst <= 4.0, "{:?} tau {t}: {worst}", g.kind());
    }
}

#[test]
fn sample_moments_are_centered() {
    let b = sample(GraphSpec::open(4).unwrap(), Tau::new(0.35).unwrap(), 40_000, 3).unwrap();
    let cov = ggchain::oracle::invert_tridiagonal(1.0, -0.35, 4).unwrap();
    for k in 0..4 {
        let mean = b.sums[k] / b.count as f64;
        let se = (cov[(k, k)] / b.count as f64).sqrt();
        assert!(mean.abs() <= 4.0 * se);
        let var = b.cross_products[(k, k)] / b.count as f64;
        assert!((var / cov[(k, k)] - 1.0).abs() <= 4.0 * (2.0 / b.count as f64).sqrt());
    }
}

#[test]
fn seeds_and_counts_are_prefix_stable() {
    // draw d depends only on (seed, d), so a longer batch extends a shorter one
    let g = GraphSpec::open(3).unwrap();
    let tau = Tau::new(0.2).unwrap();
    let a = sample(g, tau, 4096, 77).unwrap();
    let b = sample(g, tau, 2048, 77).unwrap();
    let c = sample(g, tau, 4096, 78).unwrap();
    assert_ne!(a.sums, b.sums);
    assert_ne!(a.sums, c.sums);
    assert_eq!(a, sample(g, tau, 4096, 77).unwrap());
}
