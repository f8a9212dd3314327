//! Built-in configurations. The `table1` data set and its curve, blend and
//! scaling tables are stored exactly as printed, as polynomial text.

use crate::boundary::{BlendSpec, CurveSpec};
use crate::config::{
    BlendConfig, CellBlend, CellScaling, ChaosConfig, DefaultBlend, DimensionConfig,
    FreeFieldConfig, GridSource, JobConfig, OutputConfig, SamplingConfig, SolverConfig,
};
use crate::error::{Error, Result};
use crate::expr::ExprText;
use crate::grid::{CellIndex, DataGrid};
use crate::poly::{Poly1, Poly2};
use crate::scaling::ScalingSpec;

pub const TABLE1_X: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
pub const TABLE1_Y: [f64; 4] = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
/// Rows by y knot, values along x.
pub const TABLE1_ROWS: [[f64; 5]; 4] = [
    [0.3, 1.1, 0.2, 1.5, 2.0],
    [0.3, 2.0, 1.8, 1.5, 2.0],
    [3.0, 2.0, 3.0, 3.3, 3.0],
    [2.0, 3.0, 2.5, 4.0, 4.5],
];

/// `q_α` pieces on `I_{y_1}, I_{y_2}, I_{y_3}` as printed.
pub const PRINTED_Q: [[&str; 3]; 5] = [
    ["18y^2-6y+0.3", "18y^2-9.9y+1.6", "-18y^2+27y-7"],
    ["4.5y^2+1.2y+1.1", "9y^2-9y+4", "18y^2-27y+12"],
    ["8.1y^2+2.1y+0.2", "9y^2-5.4y+2.6", "-9y^2+13.5y-2"],
    ["9y^2-3y+1.5", "9y^2-3.6y+1.7", "-4.5y^2-5.4y+4.9"],
    ["9y^2-3y+2", "18y^2-15y+5", "9y^2-10.5y+6"],
];

/// The printed third piece of `q_3` misses the `table1` data at both ends; with the
/// leading sign flipped it matches the data and the `x = 0.75` edges of
/// the printed `h_33` and `h_43`.
pub const CORRECTED_Q3_PIECE3: &str = "4.5y^2-5.4y+4.9";

/// `r_β` pieces on `I_{x_1}, …, I_{x_4}` as printed.
pub const PRINTED_R: [[&str; 4]; 4] = [
    [
        "6.4x^2+1.6x+0.3",
        "-16x^2+8.4x",
        "16x^2-14.8x+3.6",
        "4.8x^2-6.4x+3.6",
    ],
    [
        "8x^2+4.8x+0.3",
        "-16x^2+11.2x+0.2",
        "-9.6x^2+10.8x-1.2",
        "4.8x^2-6.4x+3.6",
    ],
    [
        "-32x^2+4x+3",
        "32x^2-20x+5",
        "3.2x^2-2.8x+3.6",
        "-16x^2+26.8x-7.8",
    ],
    [
        "32x^2-4x+2",
        "-16x^2+10x+1.5",
        "16x^2-14x+5.5",
        "16x^2-26x+14.5",
    ],
];

/// Blend tables `h_ij` as printed.
pub const PRINTED_H: [((usize, usize), &str); 12] = [
    ((1, 1), "18y^2+4.8x^2y-54xy^2+6.4x^2+27.6xy+1.6x-6y+0.3"),
    ((1, 2), "18y^2-120x^2y-36xy^2+48x^2+33.6xy-2.4x-9.9y+1.6"),
    ((1, 3), "-18y^2+192x^2y+144xy^2-160x^2-264xy+116x+27y-7"),
    ((2, 1), "0.9y^2+14.4xy^2-16x^2+3.6xy+8.4x+0.3y"),
    ((2, 2), "9y^2+144x^2y-64x^2-93.6xy+42.4x+5.4y-2.6"),
    ((2, 3), "45y^2-144x^2y-108xy^2+128x^2+270xy-152x-85.5y+42"),
    (
        (3, 1),
        "6.3y^2-76.8x^2y+3.6xy^2+16x^2+75.6xy-14.8x-16.5y+3.6",
    ),
    ((3, 2), "9y^2+38.4x^2y-22.4x^2-40.8xy+24.4x+5.4y-4"),
    (
        (3, 3),
        "-36y^2+38.4x^2y+54xy^2-22.4x^2-123.6xy+55.6x+65.7y-24.2",
    ),
    ((4, 1), "-18y^2+192x^2y+144xy^2-160x^2-264xy+116x+27y-7"),
    (
        (4, 2),
        "-18y^2-62.4x^2y+36xy^2+25.6x^2+63.6xy-31.6x-16.2y+11",
    ),
    (
        (4, 3),
        "-9y^2+96x^2y+18xy^2-80x^2-188.4xy+144.4x+81.9y-58.4",
    ),
];

/// The printed `h_41` repeats `h_13` and fails all four edge constraints
/// of cell (4,1); that cell falls back to the Coons blend.
pub const BLEND_FALLBACK_CELLS: [(usize, usize); 1] = [(4, 1)];

/// Coefficients `c` of `s_ij = c·(x−x_{i−1})(x−x_i)(y−y_{j−1})(y−y_j)`,
/// family (a).
pub const SCALING_A: [((usize, usize), f64); 12] = [
    ((1, 1), 2120.0),
    ((1, 2), 150.0),
    ((1, 3), 400.0),
    ((2, 1), -2111.0),
    ((2, 2), 2300.0),
    ((2, 3), -950.0),
    ((3, 1), 333.0),
    ((3, 2), -1903.0),
    ((3, 3), 435.0),
    ((4, 1), -2123.0),
    ((4, 2), 666.0),
    ((4, 3), -2119.0),
];

/// Family (b).
pub const SCALING_B: [((usize, usize), f64); 12] = [
    ((1, 1), 2119.0),
    ((1, 2), 1580.0),
    ((1, 3), -2111.0),
    ((2, 1), 1888.0),
    ((2, 2), 2300.0),
    ((2, 3), -2103.0),
    ((3, 1), 1989.0),
    ((3, 2), -1903.0),
    ((3, 3), 2003.0),
    ((4, 1), -2123.0),
    ((4, 2), 1673.0),
    ((4, 3), -2118.0),
];

pub const SIN_FREE_FIELD: &str = "sin(PI^2*x*y)";

/// Named job fixtures.
pub const FIXTURES: [&str; 8] = [
    "example2a",
    "example2b",
    "example2a-sin",
    "example2b-sin",
    "plateau-2x2",
    "flat-2x2",
    "bilinear-2x2",
    "zero-scaling-explicit",
];

/// Named grids usable as `"grid": {"fixture": ...}`.
pub const GRID_FIXTURES: [&str; 1] = ["table1"];

pub fn grid_fixture(name: &str) -> Result<DataGrid> {
    match name {
        "table1" => table1_grid(),
        _ => Err(Error::UnknownFixture(name.to_string())),
    }
}

pub fn table1_grid() -> Result<DataGrid> {
    let rows: Vec<Vec<f64>> = TABLE1_ROWS.iter().map(|r| r.to_vec()).collect();
    DataGrid::from_rows(TABLE1_X.to_vec(), TABLE1_Y.to_vec(), &rows)
}

fn poly1(text: &str, var: char) -> Poly1 {
    Poly1::parse(text, var).expect("fixture polynomial parses")
}

/// Boundary pieces with the corrected `q_3` piece.
pub fn example2_curves() -> CurveSpec {
    let mut q: Vec<Vec<Poly1>> = PRINTED_Q
        .iter()
        .map(|pieces| pieces.iter().map(|t| poly1(t, 'y')).collect())
        .collect();
    q[3][2] = poly1(CORRECTED_Q3_PIECE3, 'y');
    let r = PRINTED_R
        .iter()
        .map(|pieces| pieces.iter().map(|t| poly1(t, 'x')).collect())
        .collect();
    CurveSpec::Pieces { q, r }
}

/// Boundary pieces exactly as printed (fails validation).
pub fn example2_printed_curves() -> CurveSpec {
    let q = PRINTED_Q
        .iter()
        .map(|pieces| pieces.iter().map(|t| poly1(t, 'y')).collect())
        .collect();
    let r = PRINTED_R
        .iter()
        .map(|pieces| pieces.iter().map(|t| poly1(t, 'x')).collect())
        .collect();
    CurveSpec::Pieces { q, r }
}

pub fn printed_blend(cell: CellIndex) -> Poly2 {
    let (_, text) = PRINTED_H
        .iter()
        .find(|(c, _)| *c == (cell.i, cell.j))
        .expect("cell of the 4×3 grid");
    Poly2::parse(text).expect("fixture polynomial parses")
}

fn example2_blends() -> BlendConfig {
    BlendConfig {
        default: DefaultBlend::Coons,
        cells: PRINTED_H
            .iter()
            .filter(|(c, _)| !BLEND_FALLBACK_CELLS.contains(c))
            .map(|&((i, j), _)| CellBlend {
                cell: CellIndex::new(i, j),
                spec: BlendSpec::Explicit {
                    terms: printed_blend(CellIndex::new(i, j)),
                },
            })
            .collect(),
    }
}

fn quartic_scalings(table: &[((usize, usize), f64)]) -> Vec<CellScaling> {
    table
        .iter()
        .map(|&((i, j), c)| CellScaling {
            cell: CellIndex::new(i, j),
            spec: ScalingSpec::SeparableQuartic { coefficient: c },
        })
        .collect()
}

fn example2(table: &[((usize, usize), f64)], free: &str, out: &str) -> JobConfig {
    JobConfig {
        grid: GridSource {
            fixture: Some("table1".into()),
            ..GridSource::default()
        },
        orientations: Vec::new(),
        scaling: quartic_scalings(table),
        boundary: example2_curves(),
        blend: example2_blends(),
        free_field: FreeFieldConfig {
            shared: ExprText::new(free),
            cells: Vec::new(),
        },
        sampling: SamplingConfig::default(),
        solver: SolverConfig {
            resolution: 769,
            tol: 1e-6,
            max_iter: 100_000,
        },
        dimension: DimensionConfig {
            scales: 4,
            first_scale: 1,
            ..DimensionConfig::default()
        },
        chaos: ChaosConfig::default(),
        output: OutputConfig {
            dir: format!("out/{out}").into(),
        },
    }
}

/// Uniform `n×n` grid on the unit square with the given values.
fn unit_grid(n: usize, z: impl Fn(f64, f64) -> f64) -> GridSource {
    let knots: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let rows = knots
        .iter()
        .map(|&y| knots.iter().map(|&x| z(x, y)).collect())
        .collect();
    GridSource {
        x: Some(knots.clone()),
        y: Some(knots),
        rows: Some(rows),
        ..GridSource::default()
    }
}

fn smooth_job(grid: GridSource, n: usize, out: &str, blend: BlendConfig) -> JobConfig {
    let scaling = (1..=n)
        .flat_map(|i| (1..=n).map(move |j| (i, j)))
        .map(|(i, j)| CellScaling {
            cell: CellIndex::new(i, j),
            spec: ScalingSpec::SeparableQuartic { coefficient: 0.0 },
        })
        .collect();
    JobConfig {
        grid,
        orientations: Vec::new(),
        scaling,
        boundary: CurveSpec::Linear,
        blend,
        free_field: FreeFieldConfig::default(),
        sampling: SamplingConfig::default(),
        solver: SolverConfig {
            resolution: 1025,
            tol: 1e-9,
            max_iter: 10,
        },
        dimension: DimensionConfig {
            scales: 5,
            first_scale: 1,
            ..DimensionConfig::default()
        },
        chaos: ChaosConfig::default(),
        output: OutputConfig {
            dir: format!("out/{out}").into(),
        },
    }
}

/// `min(a, b)` spelled with `abs`, which the expression language has.
fn min_text(a: &str, b: &str) -> String {
    format!("(({a})+({b})-abs(({a})-({b})))/2")
}

/// Near-constant `|s| = height` away from an edge strip of `1/64` of the
/// cell width, ramping linearly to 0 on the edges.
fn plateau_expr(x: (f64, f64), y: (f64, f64), height: f64) -> String {
    let ramp = |v: &str, (a, b): (f64, f64)| {
        let k = 64.0 / (b - a);
        min_text(
            "1",
            &min_text(&format!("({v}-{a})*{k}"), &format!("({b}-{v})*{k}")),
        )
    };
    format!("{height}*{}*{}", ramp("x", x), ramp("y", y))
}

fn plateau_job() -> JobConfig {
    let rows = [[0.0, 0.5, 0.0], [0.3, 1.0, 0.2], [0.0, 0.4, 0.1]];
    let knots = vec![0.0, 0.5, 1.0];
    let grid = GridSource {
        x: Some(knots.clone()),
        y: Some(knots.clone()),
        rows: Some(rows.iter().map(|r| r.to_vec()).collect()),
        ..GridSource::default()
    };
    let scaling = (1..=2)
        .flat_map(|i| (1..=2).map(move |j| (i, j)))
        .map(|(i, j)| CellScaling {
            cell: CellIndex::new(i, j),
            spec: ScalingSpec::Expression {
                expr: ExprText::new(plateau_expr(
                    (knots[i - 1], knots[i]),
                    (knots[j - 1], knots[j]),
                    0.9,
                )),
            },
        })
        .collect();
    JobConfig {
        grid,
        orientations: Vec::new(),
        scaling,
        boundary: CurveSpec::Linear,
        blend: BlendConfig::default(),
        free_field: FreeFieldConfig::default(),
        sampling: SamplingConfig {
            certify_resolution: 2048,
            ..SamplingConfig::default()
        },
        solver: SolverConfig {
            resolution: 1025,
            tol: 1e-6,
            max_iter: 100_000,
        },
        dimension: DimensionConfig {
            scales: 5,
            first_scale: 1,
            resolution: Some(2049),
            ..DimensionConfig::default()
        },
        chaos: ChaosConfig::default(),
        output: OutputConfig {
            dir: "out/plateau-2x2".into(),
        },
    }
}

/// `s ≡ 0` with explicit bilinear tables on a 2×2 grid.
fn zero_scaling_explicit_job() -> JobConfig {
    let f = |x: f64, y: f64| 1.0 + 2.0 * x - 0.5 * y + 3.0 * x * y;
    let blend = BlendConfig {
        default: DefaultBlend::None,
        cells: (1..=2)
            .flat_map(|i| (1..=2).map(move |j| CellIndex::new(i, j)))
            .map(|cell| CellBlend {
                cell,
                spec: BlendSpec::Explicit {
                    terms: Poly2::parse("1+2x-0.5y+3xy").expect("parses"),
                },
            })
            .collect(),
    };
    let mut job = smooth_job(unit_grid(2, f), 2, "zero-scaling-explicit", blend);
    job.solver.resolution = 257;
    job
}

pub fn fixture(name: &str) -> Result<JobConfig> {
    match name {
        "example2a" => Ok(example2(&SCALING_A, "0", "example2a")),
        "example2b" => Ok(example2(&SCALING_B, "0", "example2b")),
        "example2a-sin" => Ok(example2(&SCALING_A, SIN_FREE_FIELD, "example2a-sin")),
        "example2b-sin" => Ok(example2(&SCALING_B, SIN_FREE_FIELD, "example2b-sin")),
        "plateau-2x2" => Ok(plateau_job()),
        "flat-2x2" => Ok(smooth_job(
            unit_grid(2, |_, _| 1.5),
            2,
            "flat-2x2",
            BlendConfig::default(),
        )),
        "bilinear-2x2" => Ok(smooth_job(
            unit_grid(2, |x, y| 0.2 + x - 0.7 * y + 1.3 * x * y),
            2,
            "bilinear-2x2",
            BlendConfig::default(),
        )),
        "zero-scaling-explicit" => Ok(zero_scaling_explicit_job()),
        _ => Err(Error::UnknownFixture(name.to_string())),
    }
}
