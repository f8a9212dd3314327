//! The operator `(Tφ)(x,y) = s_ij(x,y)·(φ(L_ij^{-1}(x,y)) − g_ij(L_ij^{-1}(x,y))) + h_ij(x,y)`
//! on a knot-aligned lattice, and its fixed-point iteration.

use rayon::prelude::*;

use super::surface::{axis_cell, lattice_coord};
use super::{cell_slot_of, IfsSystem, SurfaceSample};
use crate::error::{Error, Result};
use crate::grid::{DataGrid, Orientation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Lattice nodes per axis.
    pub resolution: usize,
    /// Target a-posteriori sup-norm bound.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            resolution: 769,
            tol: 1e-6,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Stencil {
    lo: u32,
    w: f64,
}

/// `T` restricted to lattice functions: values at nodes are pulled back
/// through `L_ij^{-1}` and read by bilinear interpolation.
pub struct TOperator {
    resolution: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
    /// `[preserving, reversing]` stencils per column / row.
    x_stencil: Vec<[Stencil; 2]>,
    y_stencil: Vec<[Stencil; 2]>,
    /// Per node: orientation pair of the owning cell.
    orient: Vec<(u8, u8)>,
    slope: Vec<f64>,
    offset: Vec<f64>,
}

/// Checks that every knot falls on a lattice line.
pub fn check_resolution(grid: &DataGrid, resolution: usize) -> Result<()> {
    let min = 4 * grid.n().max(grid.m()) + 1;
    if resolution < min {
        return Err(Error::Resolution(format!(
            "resolution {resolution} below the minimum {min} for a {}×{} grid",
            grid.n(),
            grid.m()
        )));
    }
    for (axis, knots) in [("x", grid.x_knots()), ("y", grid.y_knots())] {
        let (a, b) = (knots[0], knots[knots.len() - 1]);
        for &k in knots {
            let pos = (k - a) / (b - a) * (resolution - 1) as f64;
            if (pos - pos.round()).abs() > 1e-9 * resolution as f64 {
                return Err(Error::Resolution(format!(
                    "{axis} knot {k} is not on a lattice line for resolution {resolution}"
                )));
            }
        }
    }
    Ok(())
}

impl TOperator {
    pub fn compile(system: &IfsSystem, resolution: usize) -> Result<Self> {
        check_resolution(system.grid(), resolution)?;
        let grid = system.grid();
        let (xr, yr) = (grid.x_range(), grid.y_range());
        let r = resolution;
        let (hx, hy) = (
            (xr.1 - xr.0) / (r - 1) as f64,
            (yr.1 - yr.0) / (r - 1) as f64,
        );
        // cells in one column (row) share the x (y) axis map up to orientation
        let cell_x_maps = |a: usize, o: usize| {
            let x = lattice_coord(xr, r, a);
            let slot = cell_slot_of(system, x, yr.0).expect("lattice inside domain");
            let base = crate::grid::AxisMap::between(
                xr,
                grid.x_interval(system.cells()[slot].map.cell.i),
                if o == 0 {
                    Orientation::Preserving
                } else {
                    Orientation::Reversing
                },
            );
            let (lo, w) = axis_cell((base.invert(x) - xr.0) / hx, r);
            Stencil { lo: lo as u32, w }
        };
        let cell_y_maps = |b: usize, o: usize| {
            let y = lattice_coord(yr, r, b);
            let slot = cell_slot_of(system, xr.0, y).expect("lattice inside domain");
            let base = crate::grid::AxisMap::between(
                yr,
                grid.y_interval(system.cells()[slot].map.cell.j),
                if o == 0 {
                    Orientation::Preserving
                } else {
                    Orientation::Reversing
                },
            );
            let (lo, w) = axis_cell((base.invert(y) - yr.0) / hy, r);
            Stencil { lo: lo as u32, w }
        };
        let x_stencil: Vec<[Stencil; 2]> = (0..r)
            .map(|a| [cell_x_maps(a, 0), cell_x_maps(a, 1)])
            .collect();
        let y_stencil: Vec<[Stencil; 2]> = (0..r)
            .map(|b| [cell_y_maps(b, 0), cell_y_maps(b, 1)])
            .collect();

        let per_node: Vec<((u8, u8), f64, f64)> = (0..r * r)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (k % r, k / r);
                let (x, y) = (lattice_coord(xr, r, a), lattice_coord(yr, r, b));
                let slot = cell_slot_of(system, x, y).expect("lattice inside domain");
                let cs = &system.cells()[slot];
                let o = |o: Orientation| u8::from(o == Orientation::Reversing);
                let orient = (o(cs.map.x_map.orientation), o(cs.map.y_map.orientation));
                let s = cs.scaling.eval(x, y);
                let h = cs.blend.eval(x, y);
                let offset = if s == 0.0 {
                    h
                } else {
                    let (px, py) = cs.map.invert_unchecked(x, y);
                    h - s * system.free_field(cs.map.cell).eval(px, py)
                };
                (orient, s, offset)
            })
            .collect();
        let mut orient = Vec::with_capacity(r * r);
        let mut slope = Vec::with_capacity(r * r);
        let mut offset = Vec::with_capacity(r * r);
        for (o, s, c) in per_node {
            orient.push(o);
            slope.push(s);
            offset.push(c);
        }
        Ok(Self {
            resolution: r,
            x_range: xr,
            y_range: yr,
            x_stencil,
            y_stencil,
            orient,
            slope,
            offset,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Writes `Tφ` into `out`; both are row-major lattices.
    pub fn apply_into(&self, phi: &[f64], out: &mut [f64]) {
        let r = self.resolution;
        assert_eq!(phi.len(), r * r);
        assert_eq!(out.len(), r * r);
        out.par_chunks_mut(r).enumerate().for_each(|(b, row)| {
            for (a, slot) in row.iter_mut().enumerate() {
                let k = b * r + a;
                let s = self.slope[k];
                if s == 0.0 {
                    *slot = self.offset[k];
                    continue;
                }
                let (ox, oy) = self.orient[k];
                let sx = self.x_stencil[a][ox as usize];
                let sy = self.y_stencil[b][oy as usize];
                let (a0, b0) = (sx.lo as usize, sy.lo as usize);
                let v = if sx.w == 0.0 && sy.w == 0.0 {
                    phi[b0 * r + a0]
                } else {
                    let p00 = phi[b0 * r + a0];
                    let p10 = phi[b0 * r + a0 + 1];
                    let p01 = phi[(b0 + 1) * r + a0];
                    let p11 = phi[(b0 + 1) * r + a0 + 1];
                    (1.0 - sy.w) * ((1.0 - sx.w) * p00 + sx.w * p10)
                        + sy.w * ((1.0 - sx.w) * p01 + sx.w * p11)
                };
                *slot = s * v + self.offset[k];
            }
        });
    }

    pub fn apply(&self, phi: &SurfaceSample) -> Result<SurfaceSample> {
        if phi.resolution() != self.resolution {
            return Err(Error::Resolution(format!(
                "sample has resolution {}, operator expects {}",
                phi.resolution(),
                self.resolution
            )));
        }
        let mut out = vec![0.0; self.resolution * self.resolution];
        self.apply_into(phi.heights(), &mut out);
        Ok(SurfaceSample::new(
            self.resolution,
            self.x_range,
            self.y_range,
            out,
        ))
    }
}

impl IfsSystem {
    /// One application of `T` to a lattice function.
    pub fn apply_t(&self, phi: &SurfaceSample) -> Result<SurfaceSample> {
        TOperator::compile(self, phi.resolution())?.apply(phi)
    }

    /// Lattice samples of the Coons patchwork built from the boundary curves.
    pub fn initial_iterate(&self, resolution: usize) -> Result<SurfaceSample> {
        let patches = self.coons_patchwork()?;
        let grid = self.grid();
        let (xr, yr) = (grid.x_range(), grid.y_range());
        let r = resolution;
        let heights: Vec<f64> = (0..r * r)
            .into_par_iter()
            .map(|k| {
                let (x, y) = (lattice_coord(xr, r, k % r), lattice_coord(yr, r, k / r));
                let slot = cell_slot_of(self, x, y).expect("lattice inside domain");
                patches[slot].eval(x, y)
            })
            .collect();
        Ok(SurfaceSample::new(r, xr, yr, heights))
    }
}

/// Iterates `T` from the Coons patchwork until
/// `c_s/(1−c_s)·‖φ_k − φ_{k−1}‖∞ ≤ tol`.
pub fn solve_fixed_point(system: &IfsSystem, options: SolveOptions) -> Result<SurfaceSample> {
    if !(options.tol > 0.0) {
        return Err(Error::Resolution(format!(
            "tolerance must be positive, got {}",
            options.tol
        )));
    }
    let op = TOperator::compile(system, options.resolution)?;
    let c = system.certificate().c_s;
    let factor = c / (1.0 - c);
    let initial = system.initial_iterate(options.resolution)?;
    let (r, xr, yr) = (initial.resolution(), initial.x_range(), initial.y_range());
    let mut current = initial.heights().to_vec();
    let mut next = vec![0.0; current.len()];
    let mut history = Vec::new();
    let mut bound = f64::INFINITY;
    for iteration in 1..=options.max_iter {
        op.apply_into(&current, &mut next);
        let diff = current
            .par_iter()
            .zip(next.par_iter())
            .map(|(a, b)| (a - b).abs())
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut current, &mut next);
        history.push(diff);
        bound = factor * diff;
        if bound <= options.tol {
            let mut sample = SurfaceSample::new(r, xr, yr, current);
            sample.iterations = iteration;
            sample.error_bound = bound;
            sample.history = history;
            sample.contraction = c;
            return Ok(sample);
        }
    }
    Err(Error::NonConvergence {
        iterations: options.max_iter,
        bound,
    })
}

/// Largest difference between the solutions at `R` and `2R−1` on the
/// shared nodes; the lattice discretization bias, reported separately
/// from the contraction bound.
pub fn discretization_bias(system: &IfsSystem, options: SolveOptions) -> Result<f64> {
    let coarse = solve_fixed_point(system, options)?;
    let fine = solve_fixed_point(
        system,
        SolveOptions {
            resolution: 2 * options.resolution - 1,
            ..options
        },
    )?;
    let r = coarse.resolution();
    let mut worst: f64 = 0.0;
    for b in 0..r {
        for a in 0..r {
            worst = worst.max((coarse.height(a, b) - fine.height(2 * a, 2 * b)).abs());
        }
    }
    Ok(worst)
}
