//! Boundary curves on the knot lines, per-cell blends `h_ij` whose edges
//! follow those curves, the free fields `g_ij`, and the derived
//! `Q_ij = −s_ij∘L_ij · g_ij + h_ij∘L_ij`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprText};
use crate::grid::{CellIndex, DataGrid, DomainMap};
use crate::poly::{Poly1, Poly2};
use crate::scaling::ScalingField;

/// Interpolation error tolerated for boundary curves at data points.
pub const CURVE_TOL: f64 = 1e-12;
/// Corner agreement required between the `q` and `r` curves of a cell.
pub const CORNER_TOL: f64 = 1e-9;
/// Edge agreement required of explicit blends.
pub const EDGE_TOL: f64 = 1e-9;
const EDGE_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveAxis {
    /// `q_α` on the vertical line `x = x_α`, parametrized by `y`.
    X,
    /// `r_β` on the horizontal line `y = y_β`, parametrized by `x`.
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMethod {
    Linear,
    Pieces,
}

/// Piecewise polynomial through the data on one knot line.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub axis: CurveAxis,
    pub index: usize,
    pub method: CurveMethod,
    knots: Vec<f64>,
    pieces: Vec<Poly1>,
}

impl BoundaryCurve {
    pub fn name(&self) -> String {
        match self.axis {
            CurveAxis::X => format!("q_{}", self.index),
            CurveAxis::Y => format!("r_{}", self.index),
        }
    }

    pub fn pieces(&self) -> &[Poly1] {
        &self.pieces
    }

    /// Piece on the `k`-th transverse interval (1-based).
    pub fn piece(&self, k: usize) -> &Poly1 {
        &self.pieces[k - 1]
    }

    /// Value at transverse coordinate `t`; junctions use the lower piece.
    pub fn eval(&self, t: f64) -> f64 {
        let below = self.knots[1..].partition_point(|&k| k < t);
        let k = below.min(self.pieces.len() - 1);
        self.pieces[k].eval(t)
    }
}

/// Configuration of the boundary curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum CurveSpec {
    /// Piecewise linear through the data on every knot line.
    Linear,
    /// Explicit pieces: `q[α][j-1]` is the polynomial in `y` on `I_{y_j}`,
    /// `r[β][i-1]` the polynomial in `x` on `I_{x_i}`.
    Pieces {
        q: Vec<Vec<Poly1>>,
        r: Vec<Vec<Poly1>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurves {
    pub q: Vec<BoundaryCurve>,
    pub r: Vec<BoundaryCurve>,
}

pub fn build_boundary_curves(grid: &DataGrid, spec: &CurveSpec) -> Result<BoundaryCurves> {
    let (xs, ys) = (grid.x_knots(), grid.y_knots());
    let data_q = |a: usize| -> Vec<f64> { (0..ys.len()).map(|l| grid.z(a, l)).collect() };
    let data_r = |b: usize| -> Vec<f64> { (0..xs.len()).map(|k| grid.z(k, b)).collect() };
    match spec {
        CurveSpec::Linear => {
            let linear = |axis, index, knots: &[f64], data: Vec<f64>| BoundaryCurve {
                axis,
                index,
                method: CurveMethod::Linear,
                knots: knots.to_vec(),
                pieces: knots
                    .windows(2)
                    .zip(data.windows(2))
                    .map(|(t, v)| Poly1::line_through(t[0], v[0], t[1], v[1]))
                    .collect(),
            };
            let curves = BoundaryCurves {
                q: (0..xs.len())
                    .map(|a| linear(CurveAxis::X, a, ys, data_q(a)))
                    .collect(),
                r: (0..ys.len())
                    .map(|b| linear(CurveAxis::Y, b, xs, data_r(b)))
                    .collect(),
            };
            for c in curves.q.iter().zip(0..).map(|(c, a)| (c, data_q(a))) {
                check_interpolation(c.0, &c.1)?;
            }
            for c in curves.r.iter().zip(0..).map(|(c, b)| (c, data_r(b))) {
                check_interpolation(c.0, &c.1)?;
            }
            Ok(curves)
        }
        CurveSpec::Pieces { q, r } => {
            if q.len() != xs.len() {
                return Err(Error::Curve {
                    curve: "q".into(),
                    message: format!("{} curves given, expected {}", q.len(), xs.len()),
                });
            }
            if r.len() != ys.len() {
                return Err(Error::Curve {
                    curve: "r".into(),
                    message: format!("{} curves given, expected {}", r.len(), ys.len()),
                });
            }
            let mut curves = BoundaryCurves {
                q: Vec::new(),
                r: Vec::new(),
            };
            for (a, pieces) in q.iter().enumerate() {
                let c = pieces_curve(CurveAxis::X, a, ys, pieces)?;
                check_interpolation(&c, &data_q(a))?;
                curves.q.push(c);
            }
            for (b, pieces) in r.iter().enumerate() {
                let c = pieces_curve(CurveAxis::Y, b, xs, pieces)?;
                check_interpolation(&c, &data_r(b))?;
                curves.r.push(c);
            }
            Ok(curves)
        }
    }
}

fn pieces_curve(
    axis: CurveAxis,
    index: usize,
    knots: &[f64],
    pieces: &[Poly1],
) -> Result<BoundaryCurve> {
    let curve = BoundaryCurve {
        axis,
        index,
        method: CurveMethod::Pieces,
        knots: knots.to_vec(),
        pieces: pieces.to_vec(),
    };
    if pieces.len() != knots.len() - 1 {
        return Err(Error::Curve {
            curve: curve.name(),
            message: format!(
                "{} pieces given, expected {}",
                pieces.len(),
                knots.len() - 1
            ),
        });
    }
    Ok(curve)
}

/// Every piece must hit the data at both ends of its interval; this also
/// makes adjacent pieces meet at the junctions.
fn check_interpolation(curve: &BoundaryCurve, data: &[f64]) -> Result<()> {
    let var = match curve.axis {
        CurveAxis::X => "y",
        CurveAxis::Y => "x",
    };
    for (k, piece) in curve.pieces.iter().enumerate() {
        for (end, t) in [(k, curve.knots[k]), (k + 1, curve.knots[k + 1])] {
            let got = piece.eval(t);
            let want = data[end];
            if !((got - want).abs() <= CURVE_TOL * want.abs().max(1.0)) {
                let junction = if end == k { "start" } else { "end" };
                return Err(Error::Curve {
                    curve: curve.name(),
                    message: format!(
                        "piece {} gives {got} at its {junction} {var} = {t} (junction {end}), data value is {want}",
                        k + 1
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Configuration of one blend `h_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlendSpec {
    Coons,
    /// Monomial table `[[x power, y power, coefficient], ...]` in native coordinates.
    Explicit {
        terms: Poly2,
    },
}

/// Bilinearly blended Coons patch over one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CoonsPatch {
    pub cell: CellIndex,
    x_span: (f64, f64),
    y_span: (f64, f64),
    left: Poly1,
    right: Poly1,
    bottom: Poly1,
    top: Poly1,
    /// `[h(x0,y0), h(x1,y0), h(x0,y1), h(x1,y1)]`
    corners: [f64; 4],
}

impl CoonsPatch {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let u = (x - self.x_span.0) / (self.x_span.1 - self.x_span.0);
        let v = (y - self.y_span.0) / (self.y_span.1 - self.y_span.0);
        let [c00, c10, c01, c11] = self.corners;
        let ruled_x = (1.0 - u) * self.left.eval(y) + u * self.right.eval(y);
        let ruled_y = (1.0 - v) * self.bottom.eval(x) + v * self.top.eval(x);
        let bilinear =
            (1.0 - u) * (1.0 - v) * c00 + u * (1.0 - v) * c10 + (1.0 - u) * v * c01 + u * v * c11;
        ruled_x + ruled_y - bilinear
    }

    fn lipschitz(&self) -> f64 {
        let (x0, x1) = self.x_span;
        let (y0, y1) = self.y_span;
        let (dx, dy) = (x1 - x0, y1 - y0);
        let [c00, c10, c01, c11] = self.corners;
        let diff_lr = Poly1::new(sub_coeffs(&self.right.coeffs, &self.left.coeffs));
        let diff_bt = Poly1::new(sub_coeffs(&self.top.coeffs, &self.bottom.coeffs));
        let dxb = diff_lr.abs_bound(y0, y1) / dx
            + self
                .bottom
                .derivative()
                .abs_bound(x0, x1)
                .max(self.top.derivative().abs_bound(x0, x1))
            + (c10 - c00).abs().max((c11 - c01).abs()) / dx;
        let dyb = diff_bt.abs_bound(x0, x1) / dy
            + self
                .left
                .derivative()
                .abs_bound(y0, y1)
                .max(self.right.derivative().abs_bound(y0, y1))
            + (c01 - c00).abs().max((c11 - c10).abs()) / dy;
        dxb.max(dyb)
    }
}

fn sub_coeffs(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len().max(b.len()))
        .map(|k| a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0))
        .collect()
}

/// A Lipschitz surface patch `h_ij` on cell `E_ij` whose edges equal the
/// boundary curves.
#[derive(Debug, Clone, PartialEq)]
pub enum PatchBlend {
    Coons(CoonsPatch),
    Explicit {
        cell: CellIndex,
        x_span: (f64, f64),
        y_span: (f64, f64),
        poly: Poly2,
    },
}

impl PatchBlend {
    pub fn cell(&self) -> CellIndex {
        match self {
            PatchBlend::Coons(c) => c.cell,
            PatchBlend::Explicit { cell, .. } => *cell,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            PatchBlend::Coons(c) => c.eval(x, y),
            PatchBlend::Explicit { poly, .. } => poly.eval(x, y),
        }
    }

    /// Taxicab Lipschitz bound over the cell, from coefficient magnitudes.
    pub fn lipschitz(&self) -> f64 {
        match self {
            PatchBlend::Coons(c) => c.lipschitz(),
            PatchBlend::Explicit {
                x_span,
                y_span,
                poly,
                ..
            } => poly.lipschitz_bound(*x_span, *y_span),
        }
    }

    /// Largest deviation from the four boundary curves over `samples`
    /// points per edge, with the worst edge and point.
    pub fn edge_error(
        &self,
        grid: &DataGrid,
        curves: &BoundaryCurves,
        samples: usize,
    ) -> (f64, &'static str, (f64, f64)) {
        let cell = self.cell();
        let (x0, x1) = grid.x_interval(cell.i);
        let (y0, y1) = grid.y_interval(cell.j);
        let edges: [(&'static str, &BoundaryCurve, bool, f64); 4] = [
            ("left", &curves.q[cell.i - 1], true, x0),
            ("right", &curves.q[cell.i], true, x1),
            ("bottom", &curves.r[cell.j - 1], false, y0),
            ("top", &curves.r[cell.j], false, y1),
        ];
        let mut worst = (0.0, "left", (x0, y0));
        for (name, curve, vertical, fixed) in edges {
            for k in 0..=samples {
                let a = k as f64 / samples as f64;
                let (x, y, t) = if vertical {
                    let y = y0 + a * (y1 - y0);
                    (fixed, y, y)
                } else {
                    let x = x0 + a * (x1 - x0);
                    (x, fixed, x)
                };
                let piece = if vertical {
                    curve.piece(cell.j)
                } else {
                    curve.piece(cell.i)
                };
                let err = (self.eval(x, y) - piece.eval(t)).abs();
                if !(err <= worst.0) {
                    worst = (err, name, (x, y));
                }
            }
        }
        worst
    }
}

pub fn build_coons_blend(
    grid: &DataGrid,
    curves: &BoundaryCurves,
    cell: CellIndex,
) -> Result<PatchBlend> {
    let (x0, x1) = grid.x_interval(cell.i);
    let (y0, y1) = grid.y_interval(cell.j);
    let left = curves.q[cell.i - 1].piece(cell.j).clone();
    let right = curves.q[cell.i].piece(cell.j).clone();
    let bottom = curves.r[cell.j - 1].piece(cell.i).clone();
    let top = curves.r[cell.j].piece(cell.i).clone();
    let pairs = [
        ((x0, y0), left.eval(y0), bottom.eval(x0)),
        ((x1, y0), right.eval(y0), bottom.eval(x1)),
        ((x0, y1), left.eval(y1), top.eval(x0)),
        ((x1, y1), right.eval(y1), top.eval(x1)),
    ];
    let mut corners = [0.0; 4];
    for (k, ((x, y), from_q, from_r)) in pairs.into_iter().enumerate() {
        let gap = (from_q - from_r).abs();
        if !(gap <= CORNER_TOL) {
            return Err(Error::Compatibility { cell, x, y, gap });
        }
        corners[k] = from_q;
    }
    Ok(PatchBlend::Coons(CoonsPatch {
        cell,
        x_span: (x0, x1),
        y_span: (y0, y1),
        left,
        right,
        bottom,
        top,
        corners,
    }))
}

/// Validates an explicit polynomial blend against the boundary curves.
pub fn load_explicit_blend(
    grid: &DataGrid,
    curves: &BoundaryCurves,
    cell: CellIndex,
    poly: Poly2,
) -> Result<PatchBlend> {
    let blend = PatchBlend::Explicit {
        cell,
        x_span: grid.x_interval(cell.i),
        y_span: grid.y_interval(cell.j),
        poly,
    };
    let (error, edge, (x, y)) = blend.edge_error(grid, curves, EDGE_SAMPLES);
    if !(error <= EDGE_TOL) {
        return Err(Error::EdgeConstraint {
            cell,
            edge,
            error,
            x,
            y,
        });
    }
    Ok(blend)
}

pub fn build_blend(
    grid: &DataGrid,
    curves: &BoundaryCurves,
    cell: CellIndex,
    spec: &BlendSpec,
) -> Result<PatchBlend> {
    match spec {
        BlendSpec::Coons => build_coons_blend(grid, curves, cell),
        BlendSpec::Explicit { terms } => load_explicit_blend(grid, curves, cell, terms.clone()),
    }
}

/// A Lipschitz function `g` on the whole domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeField {
    expr: Option<Expr>,
    lipschitz: f64,
    sup_abs: f64,
}

impl FreeField {
    pub fn zero() -> Self {
        Self {
            expr: None,
            lipschitz: 0.0,
            sup_abs: 0.0,
        }
    }

    /// Compiles `text` (variables `x`, `y`) and estimates its Lipschitz
    /// constant and sup norm over the domain from a 512×512 lattice.
    pub fn from_text(grid: &DataGrid, text: &ExprText) -> Result<Self> {
        let expr = text.compile(&["x", "y"])?;
        if expr.is_constant() {
            let c = expr.eval(&[0.0, 0.0]);
            if c == 0.0 {
                return Ok(Self::zero());
            }
            if !c.is_finite() {
                return Err(Error::Expression {
                    source_text: text.0.clone(),
                    message: "not finite".into(),
                });
            }
            return Ok(Self {
                expr: Some(expr),
                lipschitz: 0.0,
                sup_abs: c.abs(),
            });
        }
        const RES: usize = 512;
        let (x0, x1) = grid.x_range();
        let (y0, y1) = grid.y_range();
        let (hx, hy) = ((x1 - x0) / RES as f64, (y1 - y0) / RES as f64);
        let values: Vec<f64> = (0..=RES)
            .into_par_iter()
            .flat_map_iter(|b| {
                let expr = &expr;
                (0..=RES).map(move |a| expr.eval(&[x0 + a as f64 * hx, y0 + b as f64 * hy]))
            })
            .collect();
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Expression {
                source_text: text.0.clone(),
                message: format!(
                    "not finite at ({}, {})",
                    x0 + (k % (RES + 1)) as f64 * hx,
                    y0 + (k / (RES + 1)) as f64 * hy
                ),
            });
        }
        let at = |a: usize, b: usize| values[b * (RES + 1) + a];
        let mut lip: f64 = 0.0;
        for b in 0..=RES {
            for a in 0..=RES {
                if a < RES {
                    lip = lip.max((at(a + 1, b) - at(a, b)).abs() / hx);
                }
                if b < RES {
                    lip = lip.max((at(a, b + 1) - at(a, b)).abs() / hy);
                }
            }
        }
        let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            expr: Some(expr),
            lipschitz: lip,
            sup_abs: sup,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_none()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.expr {
            None => 0.0,
            Some(e) => e.eval(&[x, y]),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }
}

/// Free fields for all cells: one shared field with optional per-cell overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeFields {
    pub shared: FreeField,
    pub per_cell: BTreeMap<CellIndex, FreeField>,
}

impl FreeFields {
    pub fn shared(field: FreeField) -> Self {
        Self {
            shared: field,
            per_cell: BTreeMap::new(),
        }
    }

    pub fn get(&self, cell: CellIndex) -> &FreeField {
        self.per_cell.get(&cell).unwrap_or(&self.shared)
    }
}

/// `Q_ij(x, y) = −s_ij(L_ij(x,y))·g_ij(x,y) + h_ij(L_ij(x,y))` on the whole domain.
#[derive(Debug, Clone, Copy)]
pub struct QField<'a> {
    pub cell: CellIndex,
    pub map: &'a DomainMap,
    pub scaling: &'a ScalingField,
    pub free: &'a FreeField,
    pub blend: &'a PatchBlend,
}

impl QField<'_> {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (u, v) = self.map.apply(x, y);
        -self.scaling.eval(u, v) * self.free.eval(x, y) + self.blend.eval(u, v)
    }

    /// Taxicab Lipschitz bound from the product and sum rules.
    pub fn lipschitz(&self) -> f64 {
        let c = self.map.factor();
        let s_comp = self.scaling.lipschitz() * c;
        s_comp * self.free.sup_abs()
            + self.scaling.sup_abs() * self.free.lipschitz()
            + self.blend.lipschitz() * c
    }
}

pub fn build_q<'a>(
    map: &'a DomainMap,
    scaling: &'a ScalingField,
    free: &'a FreeField,
    blend: &'a PatchBlend,
) -> QField<'a> {
    debug_assert_eq!(map.cell, scaling.cell());
    debug_assert_eq!(map.cell, blend.cell());
    QField {
        cell: map.cell,
        map,
        scaling,
        free,
        blend,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::default_domain_maps;
    use crate::scaling::{SamplingOptions, ScalingSpec};

    fn table1() -> DataGrid {
        DataGrid::from_rows(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            &[
                vec![0.3, 1.1, 0.2, 1.5, 2.0],
                vec![0.3, 2.0, 1.8, 1.5, 2.0],
                vec![3.0, 2.0, 3.0, 3.3, 3.0],
                vec![2.0, 3.0, 2.5, 4.0, 4.5],
            ],
        )
        .unwrap()
    }

    fn p(c: &[f64]) -> Poly1 {
        Poly1::new(c.to_vec())
    }

    #[test]
    fn linear_curves_interpolate() {
        let grid = table1();
        let curves = build_boundary_curves(&grid, &CurveSpec::Linear).unwrap();
        assert_eq!(curves.q.len(), 5);
        assert_eq!(curves.r.len(), 4);
        assert!((curves.r[0].eval(0.125) - 0.7).abs() < 1e-15);
        for (a, q) in curves.q.iter().enumerate() {
            for (l, &y) in grid.y_knots().iter().enumerate() {
                assert!((q.eval(y) - grid.z(a, l)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn printed_pieces_match_table() {
        let grid = table1();
        let q0 = [
            p(&[0.3, -6.0, 18.0]),
            p(&[1.6, -9.9, 18.0]),
            p(&[-7.0, 27.0, -18.0]),
        ];
        let third = 1.0 / 3.0;
        assert!((q0[0].eval(0.0) - 0.3).abs() < 1e-15);
        assert!((q0[0].eval(third) - 0.3).abs() < 1e-14);
        let r3 = p(&[2.0, -4.0, 32.0]);
        assert_eq!(r3.eval(0.0), 2.0);
        assert!((r3.eval(0.25) - 3.0).abs() < 1e-15);
        let _ = grid;
    }

    #[test]
    fn bad_piece_names_junction() {
        let grid = DataGrid::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.5, 1.0],
            vec![vec![0.0, 1.0, 0.0]; 3],
        )
        .unwrap();
        let good = vec![p(&[0.0, 2.0]), p(&[2.0, -2.0])];
        let bad = vec![p(&[0.0, 2.0]), p(&[2.5, -2.0])];
        let flat = vec![p(&[0.0]), p(&[0.0])];
        let spec = CurveSpec::Pieces {
            q: vec![good.clone(), bad, good.clone()],
            r: vec![flat.clone(), vec![p(&[1.0]), p(&[1.0])], flat],
        };
        match build_boundary_curves(&grid, &spec) {
            Err(Error::Curve { curve, message }) => {
                assert_eq!(curve, "q_1");
                assert!(message.contains("piece 2"), "{message}");
                assert!(message.contains("junction 1"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coons_collapses_on_edges_and_constants() {
        let grid = table1();
        let curves = build_boundary_curves(&grid, &CurveSpec::Linear).unwrap();
        let cell = CellIndex::new(2, 3);
        let h = build_coons_blend(&grid, &curves, cell).unwrap();
        let (err, _, _) = h.edge_error(&grid, &curves, 256);
        assert!(err < 1e-14);
        let (x0, _) = grid.x_interval(2);
        for k in 0..=10 {
            let y = 2.0 / 3.0 + k as f64 / 30.0;
            assert!((h.eval(x0, y) - curves.q[1].eval(y)).abs() < 1e-14);
        }

        let flat = table1().with_z(vec![vec![2.5; 4]; 5]).unwrap();
        let curves = build_boundary_curves(&flat, &CurveSpec::Linear).unwrap();
        let h = build_coons_blend(&flat, &curves, cell).unwrap();
        for &(x, y) in &[(0.3, 0.7), (0.49, 0.99), (0.25, 2.0 / 3.0)] {
            assert!((h.eval(x, y) - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn explicit_zero_table_rejected() {
        let grid = table1();
        let curves = build_boundary_curves(&grid, &CurveSpec::Linear).unwrap();
        let r = load_explicit_blend(&grid, &curves, CellIndex::new(1, 1), Poly2::default());
        assert!(matches!(r, Err(Error::EdgeConstraint { .. })));
    }

    #[test]
    fn q_field_identity() {
        let grid = table1();
        let curves = build_boundary_curves(&grid, &CurveSpec::Linear).unwrap();
        let maps = default_domain_maps(&grid).unwrap();
        let cell = CellIndex::new(3, 2);
        let map = &maps[grid.cell_slot(cell)];
        let s = ScalingField::from_spec(
            &grid,
            cell,
            &ScalingSpec::SeparableQuartic {
                coefficient: 1903.0,
            },
            SamplingOptions::default(),
        )
        .unwrap();
        let h = build_coons_blend(&grid, &curves, cell).unwrap();
        let g = FreeField::from_text(&grid, &"sin(PI^2*x*y)".into()).unwrap();
        let q = build_q(map, &s, &g, &h);
        for &(x, y) in &[(0.1, 0.9), (0.5, 0.5), (0.77, 0.01)] {
            let (u, v) = map.apply(x, y);
            let direct = -s.eval(u, v) * g.eval(x, y) + h.eval(u, v);
            assert!((q.eval(x, y) - direct).abs() < 1e-12);
        }
        // corners of the domain land on cell corners where s vanishes
        let zero = FreeField::zero();
        let q0 = build_q(map, &s, &zero, &h);
        for &(x, y) in &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            let (u, v) = map.apply(x, y);
            assert!((q.eval(x, y) - h.eval(u, v)).abs() < 1e-12);
            assert_eq!(q0.eval(x, y), h.eval(u, v));
        }
        assert!(q.lipschitz().is_finite() && q.lipschitz() > 0.0);
        // sin(π²xy) has Lipschitz constant π² on the unit square
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(g.lipschitz() <= pi2 && g.lipschitz() > 0.99 * pi2);
    }
}
