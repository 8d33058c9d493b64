use rcds_core::network::{default_radius, generate_rgg, is_connected, GraphTopology};
use rcds_core::seed::{rng_from, stream_rng, Stream};
use rcds_core::walkers::{estimate_counts, measure_cover_time, observe_visits, EstimatorConfig, TimingStats};

fn complete_graph(n: usize) -> GraphTopology {
    let positions = (0..n).map(|i| ((i % 8) as f64 * 0.1, (i / 8) as f64 * 0.1)).collect();
    GraphTopology::from_positions(1.0, 10.0, positions).unwrap()
}

fn connected_rgg(n: usize, seed: u64) -> GraphTopology {
    (0..)
        .map(|a| generate_rgg(n, 5.0, default_radius(n, 5.0), &mut stream_rng(seed, Stream::Graph, a)).unwrap())
        .find(is_connected)
        .unwrap()
}

#[test]
fn complete_graph_cover_time_is_coupon_collecting() {
    let g = complete_graph(50);
    assert_eq!(g.edge_count(), 50 * 49 / 2);
    let mut rng = rng_from(4);
    let runs = 2000;
    let mean = (0..runs).map(|_| measure_cover_time(&g, 0, &mut rng).unwrap()).sum::<u64>() as f64 / runs as f64;
    // A walk on K_n moves to a uniform other node: (n-1) H_{n-1} steps.
    let exact: f64 = 49.0 * (1..=49).map(|i| 1.0 / i as f64).sum::<f64>();
    assert!((exact - 219.481).abs() < 0.001);
    assert!((mean - exact).abs() / exact < 0.03, "mean {mean}");
    assert!((mean - 224.0).abs() / 224.0 <= 0.15);
}

#[test]
fn rgg_cover_time_scales_like_n_log_n() {
    let ratios: Vec<f64> = [100usize, 200, 400]
        .iter()
        .map(|&n| {
            let mut total = 0.0;
            for seed in 0..10 {
                let g = connected_rgg(n, seed);
                total += measure_cover_time(&g, 0, &mut rng_from(seed)).unwrap() as f64;
            }
            total / 10.0 / (n as f64 * (n as f64).ln())
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(hi / lo <= 2.0, "{ratios:?}");
}

#[test]
fn inter_visit_time_matches_stationary_return_time() {
    let g = connected_rgg(200, 3);
    let two_e = 2.0 * g.edge_count() as f64;
    let summary = observe_visits(&g, &[0], 1_000_000, &mut rng_from(8)).unwrap();
    for u in (0..200).step_by(10) {
        let expected = two_e / g.degree(u) as f64;
        let got = summary[u].mean_gap().unwrap();
        assert!((got - expected).abs() / expected < 0.10, "node {u}: {got} vs {expected}");
    }
}

#[test]
fn inter_packet_time_divides_by_walker_count() {
    let g = connected_rgg(200, 3);
    let two_e = 2.0 * g.edge_count() as f64;
    let starts: Vec<usize> = (0..20).map(|i| i * 10).collect();
    let summary = observe_visits(&g, &starts, 200_000, &mut rng_from(9)).unwrap();
    for u in (5..200).step_by(10) {
        let expected = two_e / g.degree(u) as f64 / 20.0;
        let got = summary[u].mean_gap().unwrap();
        assert!((got - expected).abs() / expected < 0.10, "node {u}: {got} vs {expected}");
    }
}

#[test]
fn count_estimates_from_periodic_visits() {
    // Three sources, each returning every 30 rounds, staggered by 10.
    let mut stats = TimingStats::new(20);
    for j in 0..20u64 {
        for s in 0..3u32 {
            stats.record_visit(s, 1 + 30 * j + 10 * s as u64);
        }
    }
    let est = estimate_counts(&stats, &EstimatorConfig::default()).unwrap();
    assert!((est.mean_visit - 30.0).abs() < 1e-9);
    assert!((est.mean_packet - 10.0).abs() < 1e-9);
    assert!((est.k_hat - 3.0).abs() < 1e-9);
    assert!((est.n_hat - 15.0).abs() < 1e-9);
}
