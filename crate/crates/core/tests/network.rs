use rcds_core::network::{choose_sources, generate_rgg, is_connected, GraphTopology};
use rcds_core::seed::{rng_from, stream_rng, Stream};

/// Probability that two uniform points in a square of side `l` lie within
/// distance `r <= l`: `pi a^2 - 8/3 a^3 + 1/2 a^4` with `a = r / l`.
fn pair_probability(r: f64, l: f64) -> f64 {
    let a = r / l;
    std::f64::consts::PI * a * a - 8.0 / 3.0 * a.powi(3) + 0.5 * a.powi(4)
}

#[test]
fn pair_probability_matches_monte_carlo() {
    use rand::Rng;
    let mut rng = rng_from(99);
    let trials = 400_000;
    let hits = (0..trials)
        .filter(|_| {
            let (x1, y1, x2, y2): (f64, f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
            ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt() <= 0.16
        })
        .count();
    let p = hits as f64 / trials as f64;
    assert!((p - pair_probability(0.8, 5.0)).abs() < 0.002, "{p}");
}

#[test]
fn rgg_mean_degree_over_100_seeds() {
    let (n, side, r) = (200, 5.0, 0.8);
    let mean: f64 = (0..100)
        .map(|s| generate_rgg(n, side, r, &mut rng_from(s)).unwrap().mean_degree())
        .sum::<f64>()
        / 100.0;
    let interior = n as f64 * std::f64::consts::PI * r * r / (side * side);
    assert!((interior - 16.08).abs() < 0.01);
    assert!((mean - interior).abs() / interior <= 0.15, "mean degree {mean}");
    assert!(mean < interior);
    let exact = (n - 1) as f64 * pair_probability(r, side);
    assert!((mean - exact).abs() / exact < 0.02, "mean {mean} vs {exact}");
}

#[test]
fn rgg_is_usually_connected() {
    let connected = (0..100)
        .filter(|&s| is_connected(&generate_rgg(200, 5.0, 0.8, &mut stream_rng(s, Stream::Graph, 0)).unwrap()))
        .count();
    assert!(connected >= 95, "{connected}/100");
}

#[test]
fn adjacency_matches_the_distance_rule() {
    let g = generate_rgg(150, 5.0, 0.7, &mut rng_from(5)).unwrap();
    let p = g.positions();
    for u in 0..g.n() {
        for v in 0..g.n() {
            let d = ((p[u].0 - p[v].0).powi(2) + (p[u].1 - p[v].1).powi(2)).sqrt();
            assert_eq!(g.is_adjacent(u, v), u != v && d <= 0.7);
        }
        assert!(p[u].0 >= 0.0 && p[u].0 <= 5.0 && p[u].1 >= 0.0 && p[u].1 <= 5.0);
    }
    assert_eq!(g.degrees().sum::<usize>(), 2 * g.edge_count());
}

#[test]
fn larger_radius_keeps_every_edge() {
    let small = generate_rgg(120, 5.0, 0.6, &mut rng_from(8)).unwrap();
    let large = generate_rgg(120, 5.0, 0.9, &mut rng_from(8)).unwrap();
    assert_eq!(small.positions(), large.positions());
    assert!(small.edges().all(|(u, v)| large.is_adjacent(u, v)));
}

#[test]
fn source_selection_is_uniform() {
    let g = GraphTopology::from_positions(5.0, 8.0, (0..100).map(|i| ((i % 10) as f64 * 0.5, (i / 10) as f64 * 0.5)).collect())
        .unwrap();
    let mut counts = [0u32; 100];
    for seed in 0..10_000 {
        let s = choose_sources(&g, 10, &mut stream_rng(seed, Stream::Sources, 0)).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        for u in s {
            counts[u] += 1;
        }
    }
    for c in counts {
        let f = c as f64 / 10_000.0;
        assert!((f - 0.10).abs() <= 0.01, "{f}");
    }
}
