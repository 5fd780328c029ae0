use einstein_lab::potential::{harmonic_measure, mean_exit_time};
use einstein_lab::walker::{mc_exit_sample, mc_exit_time, WalkConfig};
use einstein_lab::{lattice_box, sierpinski_gasket, vicsek_tree, Exec};

#[test]
fn plane_exit_time_matches_exact_solve() {
    let fx = lattice_box(2, 41).unwrap();
    let c = fx.center.unwrap();
    let exact = mean_exit_time(&fx.graph, c, 6).unwrap();
    let est = mc_exit_time(&fx.graph, c, 6, &WalkConfig::for_radius(7, 10_000, 6)).unwrap();
    assert!(est.valid);
    assert!(
        (est.mean - exact).abs() <= 4.0 * est.std_error,
        "{} vs {exact}",
        est.mean
    );
}

#[test]
fn fractal_exit_times_match_exact_solve() {
    for (fx, r) in [(sierpinski_gasket(4).unwrap(), 4), (vicsek_tree(3).unwrap(), 5)] {
        let c = fx.center.unwrap();
        let exact = mean_exit_time(&fx.graph, c, r).unwrap();
        let est = mc_exit_time(&fx.graph, c, r, &WalkConfig::for_radius(3, 10_000, r)).unwrap();
        assert!(
            (est.mean - exact).abs() <= 4.0 * est.std_error,
            "{}: {} vs {exact}",
            fx.label,
            est.mean
        );
    }
}

#[test]
fn exit_positions_follow_harmonic_measure() {
    let fx = lattice_box(2, 21).unwrap();
    let c = fx.center.unwrap();
    let n = 10_000u64;
    let sample = mc_exit_sample(&fx.graph, c, 4, &WalkConfig::for_radius(5, n, 4), Exec::default()).unwrap();
    let hm = harmonic_measure(&fx.graph, c, 4).unwrap();
    let row = hm.row(c).unwrap();
    let counts: std::collections::HashMap<_, _> = sample.exit_counts.iter().copied().collect();
    assert!(counts.keys().all(|z| hm.boundary.contains(*z)));
    for (z, &p) in hm.boundary.iter().zip(row) {
        let observed = *counts.get(&z).unwrap_or(&0) as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((observed - p).abs() <= 4.0 * sigma, "z={z}: {observed} vs {p}");
    }
}

#[test]
fn same_seed_same_estimate() {
    let fx = sierpinski_gasket(3).unwrap();
    let c = fx.center.unwrap();
    let cfg = WalkConfig::for_radius(99, 3_000, 3);
    assert_eq!(
        mc_exit_time(&fx.graph, c, 3, &cfg).unwrap(),
        mc_exit_time(&fx.graph, c, 3, &cfg).unwrap()
    );
    let other = WalkConfig { seed: 100, ..cfg };
    assert_ne!(
        mc_exit_time(&fx.graph, c, 3, &cfg).unwrap(),
        mc_exit_time(&fx.graph, c, 3, &other).unwrap()
    );
}
