use approx::assert_abs_diff_eq;
use polyce::adaptive::{run_adaptive, AdaptiveConfig};
use polyce::fixtures::{constant_game, embedded_trap, unique_ce_quadratic};
use polyce::moments::{
    build_relaxation, check_moment_membership, payoff_bounds, payoff_region_sketch,
    sketch_directions, MomentError, PayoffBox, RelaxationOrder,
};
use polyce::sos::MomentVector;
use polyce::{PolynomialGame, SupportedDistribution};

const CORNER_PAYOFF: [f64; 2] = [2.988, -1.510];

fn order(game: &PolynomialGame, d: u32) -> RelaxationOrder {
    RelaxationOrder::auto(game, d)
}

fn moments_of(dist: &SupportedDistribution, r: u32) -> MomentVector {
    MomentVector::from_atoms(dist.grid().num_players(), r, &dist.support())
}

#[test]
fn auto_order_is_the_smallest_valid_one() {
    let g = unique_ce_quadratic();
    // total degree 2: 2r ≥ 2d + 2
    assert_eq!(order(&g, 0), RelaxationOrder { d: 0, r: 1 });
    assert_eq!(order(&g, 2), RelaxationOrder { d: 2, r: 3 });
    assert!(RelaxationOrder { d: 2, r: 2 }.validate(&g).is_err());
    assert!(matches!(
        payoff_bounds(&g, RelaxationOrder { d: 1, r: 1 }),
        Err(MomentError::Order { d: 1, r: 1, .. })
    ));
}

#[test]
fn boxes_nest_and_contain_the_equilibrium_payoff() {
    let g = unique_ce_quadratic();
    let boxes: Vec<PayoffBox> = (0..=2)
        .map(|d| payoff_bounds(&g, order(&g, d)).unwrap())
        .collect();
    for b in &boxes {
        assert!(b.contains(&CORNER_PAYOFF, 1e-5), "{b:?}");
        for iv in &b.bounds {
            assert!(iv.min <= iv.max + 1e-9);
        }
    }
    for w in boxes.windows(2) {
        assert!(w[1].excess_over(&w[0]) <= 1e-5);
    }
    // the first order is strictly larger than the point
    assert!(boxes[0].bounds[0].spread() > 0.5);
}

#[test]
fn second_order_is_a_singleton() {
    let g = unique_ce_quadratic();
    let b = payoff_bounds(&g, order(&g, 2)).unwrap();
    for (iv, want) in b.bounds.iter().zip(CORNER_PAYOFF) {
        assert!(iv.spread() <= 1e-3, "{iv:?}");
        assert_abs_diff_eq!(iv.min, want, epsilon = 1e-3);
    }
    let sketch = payoff_region_sketch(&g, order(&g, 2), 16, 0).unwrap();
    for p in &sketch.points {
        assert_abs_diff_eq!(p[0], CORNER_PAYOFF[0], epsilon = 1e-3);
        assert_abs_diff_eq!(p[1], CORNER_PAYOFF[1], epsilon = 1e-3);
    }
}

#[test]
fn constant_game_box_is_the_constant() {
    let g = constant_game(2, -0.75);
    for d in 0..=2 {
        let b = payoff_bounds(&g, order(&g, d)).unwrap();
        for iv in &b.bounds {
            assert_abs_diff_eq!(iv.min, -0.75, epsilon = 1e-6);
            assert_abs_diff_eq!(iv.max, -0.75, epsilon = 1e-6);
        }
    }
}

#[test]
fn axis_directions_reproduce_the_box() {
    let g = unique_ce_quadratic();
    let o = order(&g, 1);
    let b = payoff_bounds(&g, o).unwrap();
    let s = payoff_region_sketch(&g, o, 4, 0).unwrap();
    // angles 0, π/2, π, 3π/2
    assert_abs_diff_eq!(s.points[0][0], b.bounds[0].max, epsilon = 1e-5);
    assert_abs_diff_eq!(s.points[1][1], b.bounds[1].max, epsilon = 1e-5);
    assert_abs_diff_eq!(s.points[2][0], b.bounds[0].min, epsilon = 1e-5);
    assert_abs_diff_eq!(s.points[3][1], b.bounds[1].min, epsilon = 1e-5);
}

#[test]
fn first_order_polygon_contains_the_singleton() {
    let g = unique_ce_quadratic();
    let s = payoff_region_sketch(&g, order(&g, 0), 16, 0).unwrap();
    for (w, p) in s.directions.iter().zip(&s.points) {
        let support: f64 = w.iter().zip(p).map(|(a, b)| a * b).sum();
        let at_corner: f64 = w.iter().zip(CORNER_PAYOFF).map(|(a, b)| a * b).sum();
        assert!(at_corner <= support + 1e-5, "direction {w:?}");
    }
}

#[test]
fn sketch_csv_and_directions() {
    let g = unique_ce_quadratic();
    let s = payoff_region_sketch(&g, order(&g, 0), 3, 0).unwrap();
    let csv = s.to_csv();
    assert_eq!(csv.lines().next(), Some("w_x,w_y,u_x,u_y"));
    assert_eq!(csv.lines().count(), 4);
    assert!(matches!(
        payoff_region_sketch(&g, order(&g, 0), 2, 0),
        Err(MomentError::Directions(2))
    ));

    let dirs = sketch_directions(3, 5, 9);
    assert_eq!(dirs, sketch_directions(3, 5, 9));
    for d in &dirs {
        assert_abs_diff_eq!(d.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn support_point_checks_direction_length() {
    let g = unique_ce_quadratic();
    let relax = build_relaxation(&g, order(&g, 0)).unwrap();
    assert!(matches!(
        relax.support_point(&[1.0]),
        Err(MomentError::DirectionLength {
            expected: 2,
            got: 1
        })
    ));
}

#[test]
fn payoff_box_json_round_trip() {
    let g = unique_ce_quadratic();
    let b = payoff_bounds(&g, order(&g, 0)).unwrap();
    let back: PayoffBox = serde_json::from_str(&b.to_json()).unwrap();
    assert_eq!(back, b);
}

#[test]
fn equilibrium_corner_is_a_member() {
    let g = unique_ce_quadratic();
    let o = order(&g, 2);
    let corner = SupportedDistribution::point_mass(&[1.0, 1.0]).unwrap();
    let m = check_moment_membership(&g, o, &moments_of(&corner, o.r)).unwrap();
    assert!(m.member, "{m:?}");
    assert!(m.separation.is_none());
}

#[test]
fn origin_is_separated() {
    let g = unique_ce_quadratic();
    let o = order(&g, 1);
    let origin = SupportedDistribution::point_mass(&[0.0, 0.0]).unwrap();
    let m = check_moment_membership(&g, o, &moments_of(&origin, o.r)).unwrap();
    assert!(!m.member);
    let sep = m.separation.expect("a separating test polynomial");
    let direct = sep.integrate(&g, &origin);
    assert!(direct > 0.0);
    assert_abs_diff_eq!(direct, sep.value, epsilon = 1e-9);
    // agrees with the sampled margins up to sampling
    for (sdp, sampled) in m.margins.iter().zip(&m.sampled_margins) {
        assert!(*sdp <= sampled + 1e-6);
    }
}

#[test]
fn uniform_product_on_a_constant_game_is_a_member() {
    let g = constant_game(2, 1.0);
    let o = order(&g, 1);
    let grid = vec![vec![-1.0, -0.5, 0.5, 1.0]; 2];
    let uniform = SupportedDistribution::new(
        polyce::game::ProductGrid::new(grid).unwrap(),
        vec![1.0 / 16.0; 16],
    )
    .unwrap();
    let m = check_moment_membership(&g, o, &moments_of(&uniform, o.r)).unwrap();
    assert!(m.member, "{m:?}");
}

#[test]
fn non_moment_vectors_fail_validity() {
    let g = unique_ce_quadratic();
    let o = order(&g, 0);
    let mut mv = moments_of(
        &SupportedDistribution::point_mass(&[1.0, 1.0]).unwrap(),
        o.r,
    );
    // a second moment above one is impossible on the square
    mv.values.insert(vec![2, 0], 2.0);
    let m = check_moment_membership(&g, o, &mv).unwrap();
    assert!(!m.member);
    assert!(m.localizing_min_eigenvalue < 0.0);
}

#[test]
fn membership_checks_the_moment_vector_shape() {
    let g = unique_ce_quadratic();
    let mv = MomentVector::from_atoms(3, 3, &[(vec![0.0; 3], 1.0)]);
    assert!(matches!(
        check_moment_membership(&g, order(&g, 1), &mv),
        Err(MomentError::Mismatch { .. })
    ));
}

#[test]
fn adaptive_equilibria_pass_every_order() {
    for game in [unique_ce_quadratic(), embedded_trap()] {
        let trace = run_adaptive(&game, vec![vec![-1.0]; 2], &AdaptiveConfig::default()).unwrap();
        let dist = &trace.last().distribution;
        assert!(trace.last().audited_epsilon <= 1e-5);
        for d in 0..=1 {
            let o = order(&game, d);
            let m = check_moment_membership(&game, o, &moments_of(dist, o.r)).unwrap();
            assert!(m.margins.iter().all(|&x| x >= -1e-4), "d = {d}: {m:?}");
            let payoffs: Vec<f64> = game
                .utilities()
                .iter()
                .map(|u| dist.expectation(u))
                .collect();
            assert!(payoff_bounds(&game, o).unwrap().contains(&payoffs, 1e-4));
        }
    }
}
