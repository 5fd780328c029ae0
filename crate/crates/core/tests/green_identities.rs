use approx::assert_relative_eq;
use einstein_lab::{lattice_box, sierpinski_gasket, vicsek_tree, BallSpec};
use einstein_lab::{potential, Fixture, VertexSet};
use proptest::prelude::*;

fn fixtures() -> Vec<Fixture> {
    vec![
        lattice_box(2, 21).unwrap(),
        sierpinski_gasket(4).unwrap(),
        vicsek_tree(3).unwrap(),
    ]
}

fn check_ball(fx: &Fixture, x: usize, radius: u32) -> Result<(), TestCaseError> {
    let g = &fx.graph;
    let ball = g.ball(BallSpec::new(x, radius)).unwrap();
    if ball.len() == g.vertex_count() {
        return Ok(());
    }
    let green = potential::green(g, &ball).unwrap();
    let exit = green.exit_times(g).unwrap();
    let sum: f64 = ball.iter().map(|y| green.kernel(x, y).unwrap() * g.mu(y)).sum();
    prop_assert!((exit.at(x) - sum).abs() <= 1e-8 * sum.abs());
    let rho = potential::resistance(g, &VertexSet::singleton(x), &ball)
        .unwrap()
        .finite()
        .unwrap();
    let diag = green.kernel(x, x).unwrap();
    prop_assert!((rho - diag).abs() <= 1e-8 * diag);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn green_sums_give_exit_times(which in 0usize..3, seed in any::<u64>(), radius in 1u32..7) {
        let fx = &fixtures()[which];
        let x = (seed % fx.graph.vertex_count() as u64) as usize;
        check_ball(fx, x, radius)?;
    }
}

#[test]
fn boundary_balls_are_solvable() {
    // Balls touching the host frontier are fine for raw solves; only sweeps need the margin.
    let fx = lattice_box(2, 11).unwrap();
    let g = &fx.graph;
    let ball = g.ball(BallSpec::new(0, 4)).unwrap();
    let e = potential::exit_time(g, &ball).unwrap();
    assert!(e.at(0) > 1.0);
    assert!(e.residual < 1e-10);
    assert_relative_eq!(
        e.values.iter().zip(g.mu_all()).map(|(t, m)| t * m).sum::<f64>(),
        ball.iter().map(|y| e.at(y) * g.mu(y)).sum::<f64>(),
        max_relative = 1e-14
    );
}
