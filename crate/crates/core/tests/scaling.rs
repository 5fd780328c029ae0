use einstein_lab::conditions::{linear_fit, Lab, SweepGrid};
use einstein_lab::{vicsek_tree, Exec};

#[test]
fn vicsek_annulus_resistance_grows_linearly() {
    let fx = vicsek_tree(4).unwrap();
    let hub = fx.center.unwrap();
    let lab = Lab::new(&fx.graph, Exec::default());
    let points: Vec<(f64, f64)> = SweepGrid::dyadic(2, 4)
        .into_iter()
        .map(|r| ((r as f64).ln(), lab.rho(hub, r, 2 * r).unwrap().ln()))
        .collect();
    let slope = linear_fit(&points).0;
    assert!((slope - 1.0).abs() <= 0.15, "slope {slope}");
}
