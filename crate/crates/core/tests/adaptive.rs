mod common;

use approx::assert_abs_diff_eq;
use common::max_departure_gain;
use polyce::adaptive::{
    build_iteration_sdp, run_adaptive, run_adaptive_finite, solve_iteration, AdaptiveConfig,
    AdaptiveError, AdaptiveStatus, IterationTrace,
};
use polyce::finite_ce::ce_violation;
use polyce::fixtures::{embedded_trap, stuck_finite_game, unique_ce_quadratic};
use polyce::game::ProductGrid;
use polyce::randgame::random_game;
use polyce::{maximize_univariate, min_epsilon, FiniteGame, MultiPoly, PolynomialGame};

const A: f64 = -1.0;
const B: f64 = 0.0;
const C: f64 = 1.0;

fn alg1() -> AdaptiveConfig {
    AdaptiveConfig::default()
}

fn degenerate(max_iter: usize) -> AdaptiveConfig {
    AdaptiveConfig {
        max_iter,
        ..AdaptiveConfig::degenerate()
    }
}

fn assert_grids(trace: &IterationTrace, k: usize, want: &[f64]) {
    for axis in &trace.iterations[k].grids {
        assert_eq!(axis.len(), want.len(), "k = {k}: {axis:?}");
        for (a, b) in axis.iter().zip(want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-4);
        }
    }
}

/// Every grid contains the previous one.
fn assert_nested(trace: &IterationTrace) {
    for w in trace.iterations.windows(2) {
        for (old, new) in w[0].grids.iter().zip(&w[1].grids) {
            assert!(old.iter().all(|x| new.contains(x)), "{old:?} ⊄ {new:?}");
        }
    }
}

#[test]
fn maximizer_examples() {
    let m = maximize_univariate(&[0.0, 1.0]);
    assert_eq!((m.t_star, m.value), (1.0, 1.0));
    let m = maximize_univariate(&[2.0, 0.0, -2.0]);
    assert_abs_diff_eq!(m.t_star, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(m.value, 2.0, epsilon = 1e-12);
    let m = maximize_univariate(&[0.0, 6.0, -2.0]);
    assert_eq!(m.t_star, 1.0);
    assert_abs_diff_eq!(m.value, 4.0, epsilon = 1e-12);
    let m = maximize_univariate(&[3.0]);
    assert_eq!((m.t_star, m.value), (-1.0, 3.0));
}

#[test]
fn maximizer_reports_ties() {
    // t² − t⁴ peaks at ±1/√2
    let m = maximize_univariate(&[0.0, 0.0, 1.0, 0.0, -1.0]);
    assert_abs_diff_eq!(m.value, 0.25, epsilon = 1e-12);
    assert_eq!(m.maximizers.len(), 2);
    assert_abs_diff_eq!(m.t_star, -(0.5f64).sqrt(), epsilon = 1e-9);
}

#[test]
fn iteration_sdp_on_a_single_cell() {
    let sdp = build_iteration_sdp(
        &embedded_trap(),
        &ProductGrid::new(vec![vec![-1.0]; 2]).unwrap(),
        0.0,
    )
    .unwrap();
    let (dist, eps) = solve_iteration(&sdp, 1e-9, 1e-6).unwrap();
    assert_abs_diff_eq!(eps, 2.0, epsilon = 1e-6);
    assert_eq!(dist.probs().len(), 1);
    assert_abs_diff_eq!(dist.probs()[0], 1.0, epsilon = 1e-9);
}

#[test]
fn iteration_sdp_on_the_full_embedded_grid() {
    let grid = ProductGrid::new(vec![vec![-1.0, 0.0, 1.0]; 2]).unwrap();
    let sdp = build_iteration_sdp(&embedded_trap(), &grid, 0.0).unwrap();
    let (dist, eps) = solve_iteration(&sdp, 1e-9, 1e-6).unwrap();
    assert!(eps <= 1e-6, "{eps}");
    // every optimal π puts no mass off the three-cell face
    let on_face = dist.prob(&[1, 2]) + dist.prob(&[2, 1]) + dist.prob(&[2, 2]);
    assert_abs_diff_eq!(on_face, 1.0, epsilon = 1e-4);
    assert!(min_epsilon(&embedded_trap(), &dist).unwrap().epsilon <= 1e-5);
}

#[test]
fn iteration_sdp_at_a_pure_nash_point() {
    let g = unique_ce_quadratic();
    let sdp = build_iteration_sdp(&g, &ProductGrid::new(vec![vec![1.0]; 2]).unwrap(), 0.0).unwrap();
    let (_, eps) = solve_iteration(&sdp, 1e-9, 1e-6).unwrap();
    assert!(eps <= 1e-6, "{eps}");
}

#[test]
fn iteration_sdp_checks_dimensions() {
    let grid = ProductGrid::new(vec![vec![0.0]]).unwrap();
    assert!(matches!(
        build_iteration_sdp(&unique_ce_quadratic(), &grid, 0.0),
        Err(AdaptiveError::Game(_))
    ));
}

#[test]
fn quadratic_game_converges_in_three_iterations() {
    let trace = run_adaptive(&unique_ce_quadratic(), vec![vec![0.0]; 2], &alg1()).unwrap();
    assert_eq!(trace.status, AdaptiveStatus::Converged);
    assert_eq!(trace.iterations.len(), 3);
    assert!(trace.last().epsilon <= 1e-6);
    assert_grids(&trace, 2, &[0.0, 1.0]);
    assert_nested(&trace);
}

#[test]
fn embedded_trace() {
    let trace = run_adaptive(&embedded_trap(), vec![vec![-1.0]; 2], &alg1()).unwrap();
    let eps = trace.epsilons();
    assert_eq!(eps.len(), 3);
    for (got, want) in eps.iter().zip([2.0, 4.0, 0.0]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-4);
    }
    for p in 0..2 {
        assert_eq!(trace.iterations[1].new_strategies[p].len(), 1);
        assert_abs_diff_eq!(
            trace.iterations[1].new_strategies[p][0],
            0.0,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(
            trace.iterations[2].new_strategies[p][0],
            1.0,
            epsilon = 1e-4
        );
    }
}

#[test]
fn embedded_degenerate_mode_freezes() {
    let trace = run_adaptive(&embedded_trap(), vec![vec![-1.0]; 2], &degenerate(6)).unwrap();
    assert_eq!(trace.status, AdaptiveStatus::Stalled);
    assert_eq!(trace.iterations.len(), 6);
    for k in 1..6 {
        assert_abs_diff_eq!(trace.iterations[k].epsilon, 2.0, epsilon = 1e-6);
        assert_grids(&trace, k, &[-1.0, 0.0]);
    }
}

#[test]
fn finite_game_degenerate_mode_is_stuck() {
    let trace =
        run_adaptive_finite(&stuck_finite_game(), vec![vec![A]; 2], &degenerate(6)).unwrap();
    assert_eq!(trace.status, AdaptiveStatus::Stalled);
    for k in 1..6 {
        assert_abs_diff_eq!(trace.iterations[k].epsilon, 1.0, epsilon = 1e-6);
        assert_grids(&trace, k, &[A, B]);
    }
}

#[test]
fn finite_game_algorithm_one_converges() {
    let fg = stuck_finite_game();
    let trace = run_adaptive_finite(&fg, vec![vec![A]; 2], &alg1()).unwrap();
    assert_eq!(trace.status, AdaptiveStatus::Converged);
    assert!(trace.iterations.len() <= 5);
    assert_nested(&trace);
    // the terminal π, embedded into the full game, passes enumeration
    let last = trace.last();
    let mut probs = vec![0.0; fg.grid().len()];
    for (point, p) in last.distribution.support() {
        let idx: Vec<usize> = (0..2)
            .map(|i| fg.grid().position(i, point[i]).unwrap())
            .collect();
        probs[fg.grid().flat_index(&idx)] += p;
    }
    assert!(max_departure_gain(&fg, &probs) <= 1e-6);
}

#[test]
fn finite_game_from_a_nash_profile_stops_at_once() {
    let trace = run_adaptive_finite(&stuck_finite_game(), vec![vec![B], vec![C]], &alg1()).unwrap();
    assert_eq!(trace.iterations.len(), 1);
    assert!(trace.last().epsilon <= 1e-9);
    assert_eq!(trace.status, AdaptiveStatus::Converged);
}

#[test]
fn finite_initial_points_must_be_strategies() {
    assert!(matches!(
        run_adaptive_finite(&stuck_finite_game(), vec![vec![0.5], vec![B]], &alg1()),
        Err(AdaptiveError::Game(_))
    ));
}

#[test]
fn configuration_is_validated() {
    let g = unique_ce_quadratic();
    for bad in [
        AdaptiveConfig {
            alpha: 1.0,
            beta: 1.0,
            ..alg1()
        },
        AdaptiveConfig {
            alpha: 0.5,
            beta: 0.4,
            ..alg1()
        },
        AdaptiveConfig {
            alpha: -0.1,
            ..alg1()
        },
        AdaptiveConfig {
            beta: 1.5,
            ..alg1()
        },
        AdaptiveConfig {
            max_iter: 0,
            ..alg1()
        },
    ] {
        assert!(matches!(
            run_adaptive(&g, vec![vec![0.0]; 2], &bad),
            Err(AdaptiveError::Config(_))
        ));
    }
    assert!(AdaptiveConfig::degenerate().validate().is_ok());
}

/// Runs exercised by the trace properties below.
fn sample_runs() -> Vec<(PolynomialGame, IterationTrace, AdaptiveConfig)> {
    let mut runs = Vec::new();
    let cfgs = [
        alg1(),
        AdaptiveConfig {
            alpha: 0.5,
            beta: 1.0,
            ..alg1()
        },
        AdaptiveConfig {
            alpha: 0.0,
            beta: 0.5,
            ..alg1()
        },
    ];
    for cfg in cfgs {
        for game in [unique_ce_quadratic(), embedded_trap(), random_game(2, 4, 3)] {
            let trace = run_adaptive(&game, vec![vec![-1.0]; 2], &cfg).unwrap();
            runs.push((game, trace, cfg.clone()));
        }
    }
    runs
}

#[test]
fn trace_properties() {
    for (game, trace, cfg) in sample_runs() {
        assert_eq!(trace.status, AdaptiveStatus::Converged, "{cfg:?}");
        assert_nested(&trace);
        for (k, r) in trace.iterations.iter().enumerate() {
            assert!(r.epsilon >= 0.0);
            // the SDP value agrees with exact maximization of the gains
            let audit = min_epsilon(&game, &r.distribution).unwrap().epsilon;
            assert!(
                (audit - r.epsilon).abs() <= 1e-5,
                "k = {k}: {audit} vs {}",
                r.epsilon
            );
            assert_abs_diff_eq!(audit, r.audited_epsilon, epsilon = 1e-12);
            // strict growth while unconverged
            if r.epsilon > cfg.eps_stop && k + 1 < trace.iterations.len() {
                let next = &trace.iterations[k + 1];
                let before: usize = r.grids.iter().map(Vec::len).sum();
                let after: usize = next.grids.iter().map(Vec::len).sum();
                assert!(after > before, "k = {k}");
            }
        }
        assert!(
            trace.last().audited_epsilon <= 1e-5,
            "{}",
            trace.last().audited_epsilon
        );
    }
}

#[test]
fn algorithm_one_iterates_are_restricted_equilibria() {
    for game in [unique_ce_quadratic(), embedded_trap(), random_game(2, 4, 3)] {
        let trace = run_adaptive(&game, vec![vec![-1.0]; 2], &alg1()).unwrap();
        for r in &trace.iterations {
            let fg: FiniteGame = game.sample(r.distribution.grid()).unwrap();
            let v = ce_violation(&fg, r.distribution.probs());
            assert!(v <= 1e-7, "k = {}: {v}", r.k);
        }
    }
}

#[test]
fn three_player_game_converges() {
    let trace = run_adaptive(&random_game(3, 2, 5), vec![vec![0.0]; 3], &alg1()).unwrap();
    assert_eq!(trace.status, AdaptiveStatus::Converged);
    assert!(trace.last().audited_epsilon <= 1e-5);
}

#[test]
fn linear_game_stops_at_the_dominant_corner() {
    // u_x = x, u_y = −y: strictly dominant strategies 1 and −1
    let game = PolynomialGame::with_default_names(vec![
        MultiPoly::from_terms(2, [(vec![1, 0], 1.0)]),
        MultiPoly::from_terms(2, [(vec![0, 1], -1.0)]),
    ])
    .unwrap();
    let trace = run_adaptive(&game, vec![vec![0.0]; 2], &alg1()).unwrap();
    assert_eq!(trace.status, AdaptiveStatus::Converged);
    let support = trace.last().distribution.support();
    let (point, p) = support.iter().find(|(_, p)| *p > 0.5).unwrap();
    assert_abs_diff_eq!(*p, 1.0, epsilon = 1e-5);
    assert_abs_diff_eq!(point[0], 1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(point[1], -1.0, epsilon = 1e-9);
}

#[test]
fn trace_serializes_and_tabulates() {
    let g = unique_ce_quadratic();
    let trace = run_adaptive(&g, vec![vec![0.0]; 2], &alg1()).unwrap();
    let v = serde_json::to_value(&trace).unwrap();
    assert_eq!(v["status"], "Converged");
    assert_eq!(v["iterations"].as_array().unwrap().len(), 3);
    let table = trace.table(g.players());
    assert_eq!(table.lines().count(), 5);
    assert!(table.lines().last().unwrap().contains("Converged"));
}
