use super::*;
use crate::boundary::{build_boundary_curves, build_coons_blend, CurveSpec};
use crate::fixtures::{fixture, table1_grid, TABLE1_X, TABLE1_Y};
use crate::grid::default_domain_maps;
use crate::scaling::{SamplingOptions, ScalingSpec};

fn system(name: &str) -> IfsSystem {
    fixture(name).unwrap().build_system(None).unwrap()
}

/// Linear curves, Coons blends and the same quartic coefficient everywhere.
fn uniform_quartic(grid: DataGrid, c: f64) -> IfsSystem {
    let curves = build_boundary_curves(&grid, &CurveSpec::Linear).unwrap();
    let maps = default_domain_maps(&grid).unwrap();
    let spec = ScalingSpec::SeparableQuartic { coefficient: c };
    let scalings = grid
        .cells()
        .map(|cell| ScalingField::from_spec(&grid, cell, &spec, SamplingOptions::default()))
        .collect::<Result<Vec<_>>>()
        .unwrap();
    let blends = grid
        .cells()
        .map(|cell| build_coons_blend(&grid, &curves, cell))
        .collect::<Result<Vec<_>>>()
        .unwrap();
    assemble_ifs(
        grid,
        curves,
        maps,
        scalings,
        blends,
        FreeFields::shared(FreeField::zero()),
    )
    .unwrap()
}

#[test]
fn example2a_certificate() {
    let sys = system("example2a");
    let cert = sys.certificate();
    assert!((cert.c_s - 2300.0 / 2304.0).abs() < 1e-12);
    assert_eq!(cert.c_s_cell, CellIndex::new(2, 2));
    // taxicab factor max(1/4, 1/3)
    assert!((cert.c_l - 1.0 / 3.0).abs() < 1e-12);
    assert!(cert.height_bound > 0.0 && cert.height_bound.is_finite());
    let upper = cert.theta_upper().unwrap();
    assert!(upper > 0.0);
    assert!(cert.predicted_factor(0.5 * upper) < 1.0);
}

#[test]
fn f_maps_corners_to_data() {
    let sys = system("example2a");
    let grid = sys.grid().clone();
    for cell in grid.cells() {
        // F_ij sends the domain corner data onto the cell corner data
        for (cx, cy) in [(0, 0), (4, 0), (0, 3), (4, 3)] {
            let z = grid.z(cx, cy);
            let w = sys.apply_w(cell, TABLE1_X[cx], TABLE1_Y[cy], z);
            let (a, b) = (
                if cx == 0 { cell.i - 1 } else { cell.i },
                if cy == 0 { cell.j - 1 } else { cell.j },
            );
            assert!((w[0] - TABLE1_X[a]).abs() < 1e-12);
            assert!((w[1] - TABLE1_Y[b]).abs() < 1e-12);
            assert!(
                (w[2] - grid.z(a, b)).abs() < 1e-9,
                "{cell} corner {cx},{cy}"
            );
        }
    }
    assert!((sys.eval_f(CellIndex::new(1, 1), 0.0, 0.0, 0.3) - 0.3).abs() < 1e-12);
}

#[test]
fn zero_scaling_converges_in_one_step() {
    let grid = table1_grid().unwrap();
    let sys = uniform_quartic(grid, 0.0);
    let sol = solve_fixed_point(
        &sys,
        SolveOptions {
            resolution: 97,
            tol: 1e-9,
            max_iter: 5,
        },
    )
    .unwrap();
    assert_eq!(sol.iterations, 1);
    assert_eq!(sol.error_bound, 0.0);
    for b in 0..97 {
        for a in 0..97 {
            let (x, y) = sol.node(a, b);
            assert!((sol.height(a, b) - sys.eval_blend(x, y).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn lattice_operator_matches_pointwise_operator() {
    let sys = system("example2b-sin");
    let r = 49;
    let phi = sys.initial_iterate(r).unwrap();
    let next = sys.apply_t(&phi).unwrap();
    for b in (0..r).step_by(5) {
        for a in (0..r).step_by(3) {
            let (x, y) = next.node(a, b);
            let direct = sys
                .apply_t_pointwise(|u, v| phi.eval_bilinear(u, v), x, y)
                .unwrap();
            assert!((next.height(a, b) - direct).abs() < 1e-9, "({x}, {y})");
        }
    }
}

#[test]
fn operator_reproduces_boundary_curves() {
    let sys = system("example2a");
    let phi = sys.initial_iterate(97).unwrap();
    let phi = sys.apply_t(&phi).unwrap();
    let curves = sys.curves();
    for (alpha, &x) in TABLE1_X.iter().enumerate() {
        for k in 0..=40 {
            let y = k as f64 / 40.0;
            let tphi = sys
                .apply_t_pointwise(|u, v| phi.eval_bilinear(u, v), x, y)
                .unwrap();
            assert!((tphi - curves.q[alpha].eval(y)).abs() < 1e-9);
        }
    }
}

#[test]
fn solution_interpolates_the_data() {
    let sys = system("example2a");
    let sol = solve_fixed_point(
        &sys,
        SolveOptions {
            resolution: 97,
            tol: 1e-6,
            max_iter: 10_000,
        },
    )
    .unwrap();
    let grid = sys.grid();
    for i in 0..=4 {
        for j in 0..=3 {
            let (a, b) = (i * 24, j * 32);
            assert!((sol.height(a, b) - grid.z(i, j)).abs() < 1e-12);
        }
    }
    assert!(sol.error_bound <= 1e-6);
}

#[test]
fn differences_contract_at_the_certified_rate() {
    let sys = system("example2a");
    let c = sys.certificate().c_s;
    let sol = solve_fixed_point(
        &sys,
        SolveOptions {
            resolution: 97,
            tol: 1e-8,
            max_iter: 10_000,
        },
    )
    .unwrap();
    for w in sol.history.windows(2).skip(2) {
        if w[0] > 1e-13 {
            assert!(w[1] / w[0] <= c + 0.01, "ratio {}", w[1] / w[0]);
        }
    }
}

#[test]
fn refined_evaluation_is_consistent_with_lattice() {
    let sys = system("example2a");
    let sol = solve_fixed_point(&sys, SolveOptions::default()).unwrap();
    for &(x, y) in &[(0.3, 0.41), (0.777, 0.05), (0.5, 0.5)] {
        let (v0, _) = sys.eval_refined(&sol, x, y, 0).unwrap();
        assert_eq!(v0, sol.eval_bilinear(x, y));
        let (v, slack) = sys.eval_refined(&sol, x, y, 6).unwrap();
        assert!((v - v0).abs() <= 3.0 * (slack + sol.quad_oscillation(x, y)) + 1e-9);
    }
    // on a knot line the first step already lands on s = 0
    let (v, slack) = sys.eval_refined(&sol, 0.25, 0.4, 3).unwrap();
    assert_eq!(slack, 0.0);
    assert!((v - sys.curves().q[1].eval(0.4)).abs() < 1e-12);
}

#[test]
fn residual_and_edges_on_solved_surface() {
    let sys = system("example2b-sin");
    let sol = solve_fixed_point(
        &sys,
        SolveOptions {
            resolution: 193,
            ..SolveOptions::default()
        },
    )
    .unwrap();
    let rep = sys.fixed_point_residual(&sol, 2000, 7);
    assert!(rep.max_ratio <= 1.0, "{rep:?}");
    assert!(sys.edge_jump(&sol, 64) < 1e-9);
}

#[test]
fn chaos_orbit_stays_on_the_graph_and_covers_cells() {
    let sys = system("example2a");
    let pts = sys.chaos_game(20_000, 3, 0);
    let again = sys.chaos_game(20_000, 3, 0);
    assert_eq!(pts, again);
    let sol = solve_fixed_point(&sys, SolveOptions::default()).unwrap();
    let mut hit = [false; 12];
    for p in &pts {
        let cell = locate_cell(sys.grid(), p[0], p[1]).unwrap();
        hit[sys.grid().cell_slot(cell)] = true;
    }
    assert!(hit.iter().all(|&h| h));
    let rep = sys.chaos_agreement(&sol, &pts, 8).unwrap();
    assert_eq!(rep.points, 20_000);
    assert!(rep.max_ratio <= 1.0, "{rep:?}");
}

#[test]
fn chaos_game_covers_unit_square() {
    let grid = DataGrid::new(
        vec![0.0, 0.5, 1.0],
        vec![0.0, 0.5, 1.0],
        vec![
            vec![0.0, 0.5, 0.0],
            vec![0.3, 1.0, 0.2],
            vec![0.0, 0.4, 0.1],
        ],
    )
    .unwrap();
    let sys = uniform_quartic(grid, 10.0);
    let pts = sys.chaos_game(1_000_000, 11, 0);
    let mut seen = vec![false; 64 * 64];
    for p in &pts {
        let a = ((p[0] * 64.0) as usize).min(63);
        let b = ((p[1] * 64.0) as usize).min(63);
        seen[b * 64 + a] = true;
    }
    assert!(seen.iter().all(|&s| s));
}

#[test]
fn metric_certification() {
    let sys = system("example2a");
    let rep = sys.certify_metric(None, 4000, 5).unwrap();
    assert!(rep.admissible);
    assert!(rep.sampled_factor < 1.0);
    assert!(rep.sampled_factor <= rep.predicted_factor + 1e-9);
    let upper = rep.theta_upper.unwrap();
    let far = sys.certify_metric(Some(10.0 * upper), 10, 5);
    match far {
        Ok(r) => assert!(!r.admissible),
        Err(e) => panic!("inadmissible θ must not error: {e}"),
    }
    // s ≡ 0 and linear curves on flat data: Q is constant so any θ works
    let flat = DataGrid::new(
        vec![0.0, 0.5, 1.0],
        vec![0.0, 0.5, 1.0],
        vec![vec![1.0; 3]; 3],
    )
    .unwrap();
    let sys = uniform_quartic(flat, 0.0);
    let rep = sys.certify_metric(None, 100, 1).unwrap();
    assert_eq!(rep.theta_upper, None);
    assert!(rep.admissible);
}

#[test]
fn knot_misaligned_resolution_is_rejected() {
    let sys = system("example2a");
    assert!(matches!(
        TOperator::compile(&sys, 100),
        Err(Error::Resolution(_))
    ));
    assert!(matches!(
        TOperator::compile(&sys, 13),
        Err(Error::Resolution(_))
    ));
    assert!(TOperator::compile(&sys, 25).is_ok());
}

#[test]
fn non_convergence_reports_bound() {
    let sys = system("example2a");
    match solve_fixed_point(
        &sys,
        SolveOptions {
            resolution: 97,
            tol: 1e-12,
            max_iter: 3,
        },
    ) {
        Err(Error::NonConvergence { iterations, bound }) => {
            assert_eq!(iterations, 3);
            assert!(bound > 1e-12);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn discretization_bias_is_zero_on_uniform_lattices() {
    // every lattice preimage is a node, so halving the spacing changes nothing
    let sys = system("example2a");
    let bias = discretization_bias(
        &sys,
        SolveOptions {
            resolution: 49,
            tol: 1e-10,
            max_iter: 10_000,
        },
    )
    .unwrap();
    assert!(bias < 1e-8, "bias {bias}");
}
