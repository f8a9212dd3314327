use fractsurf::boundary::{build_boundary_curves, load_explicit_blend};
use fractsurf::config::{parse_config, parse_config_value, parse_grid_text, GridSource, JobConfig};
use fractsurf::error::{ConfigIssue, Error};
use fractsurf::fixtures::{
    example2_curves, example2_printed_curves, fixture, printed_blend, table1_grid, FIXTURES,
};
use fractsurf::grid::CellIndex;
use fractsurf::scaling::ScalingSpec;
use proptest::prelude::*;
use serde_json::json;

fn issues(result: fractsurf::error::Result<JobConfig>) -> Vec<ConfigIssue> {
    match result {
        Err(Error::Config(list)) => list,
        other => panic!("expected configuration issues, got {other:?}"),
    }
}

fn has(list: &[ConfigIssue], path: &str, fragment: &str) -> bool {
    list.iter()
        .any(|i| i.path == path && i.message.contains(fragment))
}

#[test]
fn empty_document_lists_every_required_key() {
    let list = issues(parse_config("{}", None));
    for key in ["grid", "scaling", "boundary"] {
        assert!(has(&list, key, "missing required key"), "{list:?}");
    }
}

#[test]
fn malformed_json_reports_position() {
    let list = issues(parse_config("{\"grid\": [1,", None));
    assert_eq!(list.len(), 1);
    assert!(list[0].path.starts_with("line 1"));
}

#[test]
fn unknown_keys_are_reported_with_paths() {
    let doc = json!({
        "fixture": "flat-2x2",
        "solvr": {},
        "solver": {"resolutoin": 9},
        "scaling": [
            {"cell": [1, 1], "form": "separable-quartic", "coefficient": 0.0},
            {"cell": [1, 2], "form": "separable-quartic", "coeff": 0.0},
            {"cell": [2, 1], "form": "cubic"},
            {"form": "expression", "expr": "0"}
        ]
    });
    let list = issues(parse_config_value(doc, None));
    assert!(has(&list, "solvr", "unknown key"), "{list:?}");
    assert!(has(&list, "solver.resolutoin", "unknown key"), "{list:?}");
    assert!(has(&list, "scaling[1].coeff", "unknown key"), "{list:?}");
    assert!(has(&list, "scaling[1].coefficient", "missing"), "{list:?}");
    assert!(
        list.iter().any(|i| i.path.starts_with("scaling[2]")),
        "{list:?}"
    );
    assert!(has(&list, "scaling[3].cell", "missing"), "{list:?}");
}

#[test]
fn semantic_problems_are_collected_together() {
    let doc = json!({
        "fixture": "flat-2x2",
        "solver": {"resolution": 100, "tol": -1.0, "max_iter": 0},
        "dimension": {"scales": 2, "epsilon": 0.7},
        "free_field": {"shared": "x +* y"},
        "scaling": [
            {"cell": [1, 1], "form": "separable-quartic", "coefficient": 0.0},
            {"cell": [1, 1], "form": "separable-quartic", "coefficient": 0.0},
            {"cell": [3, 1], "form": "separable-quartic", "coefficient": 0.0}
        ]
    });
    let list = issues(parse_config_value(doc, None));
    for path in [
        "solver.tol",
        "solver.max_iter",
        "solver.resolution",
        "dimension.scales",
        "dimension.epsilon",
        "free_field.shared",
    ] {
        assert!(
            list.iter().any(|i| i.path == path),
            "no issue at {path}: {list:?}"
        );
    }
    assert!(
        list.iter().any(|i| i.message.contains("no scaling field")),
        "{list:?}"
    );
    assert!(list.len() >= 9, "{list:?}");
}

#[test]
fn every_fixture_round_trips_through_json() {
    for name in FIXTURES {
        let config = fixture(name).unwrap();
        let back = parse_config(&config.to_json(), None).unwrap();
        assert_eq!(back, config, "{name}");
        assert_eq!(back.to_json(), config.to_json(), "{name}");
    }
}

#[test]
fn fixture_key_overlays_sections() {
    let doc =
        json!({"fixture": "example2a", "solver": {"resolution": 97, "tol": 1e-4, "max_iter": 50}});
    let c = parse_config_value(doc, None).unwrap();
    assert_eq!(c.solver.resolution, 97);
    assert_eq!(c.scaling, fixture("example2a").unwrap().scaling);
    assert!(
        issues(parse_config_value(json!({"fixture": "nope"}), None))[0]
            .message
            .contains("nope")
    );
}

#[test]
fn grid_file_is_resolved_against_base_dir() {
    let dir = std::env::temp_dir().join(format!("fractsurf-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("grid.txt"),
        "# knots\n0 1/2 1\n0, 0.5, 1\n1 1 1\n1 1 1\n1 1 1\n",
    )
    .unwrap();
    let mut doc = serde_json::to_value(fixture("flat-2x2").unwrap()).unwrap();
    doc["grid"] = json!({"file": "grid.txt"});
    let c = parse_config_value(doc.clone(), Some(&dir)).unwrap();
    let grid = c.load_grid(Some(&dir)).unwrap();
    assert_eq!(grid.x_knots(), &[0.0, 0.5, 1.0]);
    let list = issues(parse_config_value(doc, None));
    assert!(list.iter().any(|i| i.path == "grid"), "{list:?}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn grid_text_rejects_ragged_rows() {
    assert!(parse_grid_text("0 1\n0 1\n1 2\n3\n").is_err());
    let g = parse_grid_text("0 1\n0 2\n1 2\n3 4\n").unwrap();
    // rows are listed per y knot
    assert_eq!(g.z(1, 0), 2.0);
    assert_eq!(g.z(0, 1), 3.0);
}

#[test]
fn inline_grid_source_round_trips() {
    let grid = table1_grid().unwrap();
    let back = GridSource::inline(&grid).load(None).unwrap();
    assert_eq!(back, grid);
}

#[test]
fn scaling_at_the_magnitude_limit_is_rejected() {
    let mut c = fixture("example2a").unwrap();
    let slot = c
        .scaling
        .iter()
        .position(|s| s.cell == CellIndex::new(2, 2))
        .unwrap();
    c.scaling[slot].spec = ScalingSpec::SeparableQuartic {
        coefficient: 2305.0,
    };
    let text = c.to_json();
    // structurally valid; the certificate catches it
    let parsed = parse_config(&text, None).unwrap();
    match parsed.build_system(None) {
        Err(Error::MagnitudeViolation { cell, value, .. }) => {
            assert_eq!(cell, CellIndex::new(2, 2));
            assert!(value > 1.0);
        }
        other => panic!("expected a magnitude violation, got {other:?}"),
    }
    c.scaling[slot].spec = ScalingSpec::SeparableQuartic {
        coefficient: 2304.0,
    };
    assert!(matches!(
        c.build_system(None),
        Err(Error::MagnitudeViolation { .. })
    ));
}

#[test]
fn printed_q3_piece_fails_and_corrected_piece_passes() {
    let grid = table1_grid().unwrap();
    assert!(build_boundary_curves(&grid, &example2_printed_curves()).is_err());
    assert!(build_boundary_curves(&grid, &example2_curves()).is_ok());
}

#[test]
fn printed_h41_fails_the_edge_check() {
    let grid = table1_grid().unwrap();
    let curves = build_boundary_curves(&grid, &example2_curves()).unwrap();
    let cell = CellIndex::new(4, 1);
    assert!(matches!(
        load_explicit_blend(&grid, &curves, cell, printed_blend(cell)),
        Err(Error::EdgeConstraint { .. })
    ));
    let ok = CellIndex::new(1, 3);
    assert!(load_explicit_blend(&grid, &curves, ok, printed_blend(ok)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_and_chaos_settings_round_trip(
        tol in 1e-12f64..1.0,
        max_iter in 1usize..1_000_000,
        seed in any::<u64>(),
        points in 1usize..10_000_000,
        eps in 1e-6f64..0.49,
    ) {
        let mut c = fixture("flat-2x2").unwrap();
        c.solver.tol = tol;
        c.solver.max_iter = max_iter;
        c.chaos.seed = seed;
        c.chaos.points = points;
        c.dimension.epsilon = eps;
        let back = parse_config(&c.to_json(), None).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn grid_text_round_trips(
        xs in proptest::collection::vec(0.01f64..1.0, 1..5),
        ys in proptest::collection::vec(0.01f64..1.0, 1..5),
        seed in any::<u64>(),
    ) {
        let knots = |steps: &[f64]| {
            let mut k = vec![0.0];
            for s in steps { k.push(k.last().unwrap() + s); }
            k
        };
        let (x, y) = (knots(&xs), knots(&ys));
        let z = |i: usize, j: usize| ((seed as f64) * 1e-15 + (i * 7 + j * 3) as f64).sin();
        let mut text = String::new();
        text.push_str(&x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
        text.push('\n');
        text.push_str(&y.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "));
        text.push('\n');
        for j in 0..y.len() {
            text.push_str(&(0..x.len()).map(|i| z(i, j).to_string()).collect::<Vec<_>>().join(" "));
            text.push('\n');
        }
        let g = parse_grid_text(&text).unwrap();
        prop_assert_eq!(g.x_knots(), &x[..]);
        prop_assert_eq!(g.y_knots(), &y[..]);
        for i in 0..x.len() {
            for j in 0..y.len() {
                prop_assert_eq!(g.z(i, j), z(i, j));
            }
        }
    }
}
