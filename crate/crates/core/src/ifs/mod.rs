//! The iterated function system `{W_ij}` built from the grid, scaling
//! fields and blends; its contraction certificate; and the two
//! representations of its attractor (fixed point of the operator `T` on a
//! lattice, and chaos-game point clouds).

mod operator;
mod surface;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use operator::{
    check_resolution, discretization_bias, solve_fixed_point, SolveOptions, TOperator,
};
pub use surface::SurfaceSample;

use crate::boundary::{
    build_coons_blend, build_q, BoundaryCurves, FreeField, FreeFields, PatchBlend, QField,
};
use crate::error::{Error, Result};
use crate::grid::{locate_cell, CellIndex, DataGrid, DomainMap};
use crate::scaling::ScalingField;

/// Tolerance on cell images when checking that the maps tile the domain.
pub const TILING_TOL: f64 = 1e-12;

/// Everything that defines `W_ij` for one cell.
#[derive(Debug, Clone)]
pub struct CellSystem {
    pub map: DomainMap,
    pub scaling: ScalingField,
    pub blend: PatchBlend,
}

/// Contraction data of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCertificate {
    /// Largest taxicab contraction factor of the domain maps.
    pub c_l: f64,
    /// Largest certified `sup|s_ij|`; the sup-norm contraction factor of `T`.
    pub c_s: f64,
    pub c_s_cell: CellIndex,
    /// Largest Lipschitz bound of the `Q_ij`.
    pub l_q: f64,
    /// Largest Lipschitz bound of `s_ij∘L_ij`.
    pub l_s: f64,
    /// A-priori bound on `|f|`; the box `E × [−Z, Z]` is mapped into itself.
    pub height_bound: f64,
}

impl ContractionCertificate {
    /// Lipschitz bound in `(x, y)` of `F_ij(·, z)` uniformly over `|z| ≤ Z`.
    pub fn l_f(&self) -> f64 {
        self.l_q + self.l_s * self.height_bound
    }

    /// Upper end of the admissible `θ` interval `(0, (1 − c_L)/L)`;
    /// `None` when every `θ > 0` works.
    pub fn theta_upper(&self) -> Option<f64> {
        let l = self.l_f();
        if l > 0.0 {
            Some((1.0 - self.c_l) / l)
        } else {
            None
        }
    }

    /// Contraction factor of every `W_ij` in `ρ_θ` predicted by the bounds.
    pub fn predicted_factor(&self, theta: f64) -> f64 {
        (self.c_l + theta * self.l_f()).max(self.c_s)
    }
}

#[derive(Debug, Clone)]
pub struct IfsSystem {
    grid: DataGrid,
    curves: BoundaryCurves,
    cells: Vec<CellSystem>,
    free: FreeFields,
    certificate: ContractionCertificate,
}

/// Sampled check of the `ρ_θ` contraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub theta_upper: Option<f64>,
    pub theta: f64,
    pub admissible: bool,
    pub predicted_factor: f64,
    pub sampled_factor: f64,
    pub pairs: usize,
}

/// Self-affinity residual of a solved sample at random points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub points: usize,
    pub max_residual: f64,
    /// Largest `residual / allowance`; at most 1 when the check passes.
    pub max_ratio: f64,
    pub worst_point: (f64, f64),
}

/// Agreement of chaos-game heights with the solved surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosReport {
    pub points: usize,
    pub max_difference: f64,
    /// Largest `difference / allowance`; at most 1 when the check passes.
    pub max_ratio: f64,
    pub worst_point: [f64; 3],
}

pub fn assemble_ifs(
    grid: DataGrid,
    curves: BoundaryCurves,
    maps: Vec<DomainMap>,
    scalings: Vec<ScalingField>,
    blends: Vec<PatchBlend>,
    free: FreeFields,
) -> Result<IfsSystem> {
    let count = grid.cell_count();
    if maps.len() != count || scalings.len() != count || blends.len() != count {
        return Err(Error::InvalidGrid(format!(
            "expected {count} maps, scaling fields and blends, got {}, {}, {}",
            maps.len(),
            scalings.len(),
            blends.len()
        )));
    }
    let mut cells = Vec::with_capacity(count);
    for ((cell, map), (scaling, blend)) in
        grid.cells().zip(maps).zip(scalings.into_iter().zip(blends))
    {
        if map.cell != cell || scaling.cell() != cell || blend.cell() != cell {
            return Err(Error::InvalidGrid(format!(
                "components out of order at cell {cell}"
            )));
        }
        check_tiling(&grid, &map)?;
        if !(scaling.sup_abs() < 1.0) {
            let (x, y) = scaling.certificate().witness;
            return Err(Error::MagnitudeViolation {
                cell,
                value: scaling.sup_abs(),
                x,
                y,
            });
        }
        cells.push(CellSystem {
            map,
            scaling,
            blend,
        });
    }
    let mut system = IfsSystem {
        grid,
        curves,
        cells,
        free,
        certificate: ContractionCertificate {
            c_l: 0.0,
            c_s: 0.0,
            c_s_cell: CellIndex::new(1, 1),
            l_q: 0.0,
            l_s: 0.0,
            height_bound: 0.0,
        },
    };
    system.certificate = system.compute_certificate();
    Ok(system)
}

fn check_tiling(grid: &DataGrid, map: &DomainMap) -> Result<()> {
    let (xr, yr) = (grid.x_range(), grid.y_range());
    let want_x = grid.x_interval(map.cell.i);
    let want_y = grid.y_interval(map.cell.j);
    let xs = {
        let (a, b) = (map.x_map.apply(xr.0), map.x_map.apply(xr.1));
        (a.min(b), a.max(b))
    };
    let ys = {
        let (a, b) = (map.y_map.apply(yr.0), map.y_map.apply(yr.1));
        (a.min(b), a.max(b))
    };
    let gap = (xs.0 - want_x.0)
        .abs()
        .max((xs.1 - want_x.1).abs())
        .max((ys.0 - want_y.0).abs())
        .max((ys.1 - want_y.1).abs());
    if !(gap <= TILING_TOL * grid.width().max(grid.height()).max(1.0)) {
        return Err(Error::InvalidGrid(format!(
            "image of the domain under L{} misses its cell by {gap}",
            map.cell
        )));
    }
    Ok(())
}

impl IfsSystem {
    fn compute_certificate(&self) -> ContractionCertificate {
        let mut cert = ContractionCertificate {
            c_l: 0.0,
            c_s: 0.0,
            c_s_cell: self.cells[0].map.cell,
            l_q: 0.0,
            l_s: 0.0,
            height_bound: 0.0,
        };
        let mut h_sup: f64 = 0.0;
        let mut g_sup: f64 = 0.0;
        for (slot, cs) in self.cells.iter().enumerate() {
            let cell = cs.map.cell;
            cert.c_l = cert.c_l.max(cs.map.factor());
            if cs.scaling.sup_abs() > cert.c_s {
                cert.c_s = cs.scaling.sup_abs();
                cert.c_s_cell = cell;
            }
            cert.l_q = cert.l_q.max(self.q_field(slot).lipschitz());
            cert.l_s = cert.l_s.max(cs.scaling.lipschitz() * cs.map.factor());
            g_sup = g_sup.max(self.free.get(cell).sup_abs());
            h_sup = h_sup.max(blend_sup(
                &cs.blend,
                cs.scaling.x_span(),
                cs.scaling.y_span(),
            ));
        }
        cert.height_bound = (cert.c_s * g_sup + h_sup) / (1.0 - cert.c_s);
        cert
    }

    pub fn grid(&self) -> &DataGrid {
        &self.grid
    }

    pub fn curves(&self) -> &BoundaryCurves {
        &self.curves
    }

    pub fn cells(&self) -> &[CellSystem] {
        &self.cells
    }

    pub fn certificate(&self) -> &ContractionCertificate {
        &self.certificate
    }

    pub fn free_field(&self, cell: CellIndex) -> &FreeField {
        self.free.get(cell)
    }

    pub fn cell_system(&self, cell: CellIndex) -> &CellSystem {
        &self.cells[self.grid.cell_slot(cell)]
    }

    pub fn q_field(&self, slot: usize) -> QField<'_> {
        let cs = &self.cells[slot];
        build_q(&cs.map, &cs.scaling, self.free.get(cs.map.cell), &cs.blend)
    }

    /// `F_ij(x, y, z) = s_ij(L_ij(x,y))·z + Q_ij(x,y)`.
    pub fn eval_f(&self, cell: CellIndex, x: f64, y: f64, z: f64) -> f64 {
        let slot = self.grid.cell_slot(cell);
        let cs = &self.cells[slot];
        let (u, v) = cs.map.apply(x, y);
        cs.scaling.eval(u, v) * z + self.q_field(slot).eval(x, y)
    }

    /// `W_ij(x, y, z) = (L_ij(x, y), F_ij(x, y, z))`.
    pub fn apply_w(&self, cell: CellIndex, x: f64, y: f64, z: f64) -> [f64; 3] {
        let cs = self.cell_system(cell);
        let (u, v) = cs.map.apply(x, y);
        [u, v, self.eval_f(cell, x, y, z)]
    }

    /// `(Tφ)(x, y)` for an arbitrary function `φ` on the domain.
    pub fn apply_t_pointwise<F: Fn(f64, f64) -> f64>(&self, phi: F, x: f64, y: f64) -> Result<f64> {
        let cell = locate_cell(&self.grid, x, y)?;
        let cs = self.cell_system(cell);
        let (px, py) = cs.map.invert(x, y)?;
        let g = self.free.get(cell);
        Ok(cs.scaling.eval(x, y) * (phi(px, py) - g.eval(px, py)) + cs.blend.eval(x, y))
    }

    /// `(Tφ)(x, y)` computed with the formula of a given cell, used to
    /// compare the two sides of a shared edge.
    pub fn apply_t_in_cell<F: Fn(f64, f64) -> f64>(
        &self,
        cell: CellIndex,
        phi: F,
        x: f64,
        y: f64,
    ) -> f64 {
        let cs = self.cell_system(cell);
        let (px, py) = cs.map.invert_unchecked(x, y);
        let g = self.free.get(cell);
        cs.scaling.eval(x, y) * (phi(px, py) - g.eval(px, py)) + cs.blend.eval(x, y)
    }

    /// Patchwork of Coons blends of the boundary curves; a member of the
    /// operator's domain whatever blends the system uses.
    pub fn coons_patchwork(&self) -> Result<Vec<PatchBlend>> {
        self.grid
            .cells()
            .map(|cell| build_coons_blend(&self.grid, &self.curves, cell))
            .collect()
    }

    /// Patchwork of the system's own blends `h_ij`.
    pub fn eval_blend(&self, x: f64, y: f64) -> Result<f64> {
        let cell = locate_cell(&self.grid, x, y)?;
        Ok(self.cell_system(cell).blend.eval(x, y))
    }

    /// Value of the attractor surface at `(x, y)` obtained by unrolling the
    /// functional equation `depth` times before reading the lattice.
    /// Returns the value and its slack: the product of `|s|` along the
    /// unrolled path times the ring oscillation where it ends.
    pub fn eval_refined(
        &self,
        sample: &SurfaceSample,
        x: f64,
        y: f64,
        depth: usize,
    ) -> Result<(f64, f64)> {
        // walk forward collecting (s, -s·g + h) then fold backwards
        let mut path: Vec<(f64, f64)> = Vec::with_capacity(depth);
        let (mut px, mut py) = (x, y);
        for _ in 0..depth {
            let cell = locate_cell(&self.grid, px, py)?;
            let cs = self.cell_system(cell);
            let s = cs.scaling.eval(px, py);
            let h = cs.blend.eval(px, py);
            let (qx, qy) = cs.map.invert_unchecked(px, py);
            let g = self.free.get(cell).eval(qx, qy);
            path.push((s, h - s * g));
            (px, py) = (qx, qy);
            if s == 0.0 {
                break;
            }
        }
        let mut value = sample.eval_bilinear(px, py);
        let mut slack = sample.ring_oscillation(px, py);
        for &(s, offset) in path.iter().rev() {
            value = s * value + offset;
            slack *= s.abs();
        }
        Ok((value, slack))
    }

    /// Checks `f(L(p)) = s(L(p))·(f(p) − g(p)) + h(L(p))` on the lattice
    /// interpolant at `points` random `(cell, p)` pairs. The allowance at
    /// each point is `3·(error bound + osc(L(p)) + |s(L(p))|·osc(p))` with
    /// `osc` the ring oscillation.
    pub fn fixed_point_residual(
        &self,
        sample: &SurfaceSample,
        points: usize,
        seed: u64,
    ) -> ResidualReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (xr, yr) = (self.grid.x_range(), self.grid.y_range());
        let mut report = ResidualReport {
            points,
            max_residual: 0.0,
            max_ratio: 0.0,
            worst_point: (xr.0, yr.0),
        };
        for _ in 0..points {
            let slot = rng.gen_range(0..self.cells.len());
            let x = rng.gen_range(xr.0..=xr.1);
            let y = rng.gen_range(yr.0..=yr.1);
            let cs = &self.cells[slot];
            let (u, v) = cs.map.apply(x, y);
            let s = cs.scaling.eval(u, v);
            let g = self.free.get(cs.map.cell).eval(x, y);
            let lhs = sample.eval_bilinear(u, v);
            let rhs = s * (sample.eval_bilinear(x, y) - g) + cs.blend.eval(u, v);
            let residual = (lhs - rhs).abs();
            let slack = sample.ring_oscillation(u, v) + s.abs() * sample.ring_oscillation(x, y);
            let allowance = 3.0 * (sample.error_bound + slack) + 1e-12;
            if residual > report.max_residual {
                report.max_residual = residual;
            }
            let ratio = residual / allowance;
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.worst_point = (x, y);
            }
        }
        report
    }

    /// Largest disagreement of `Tφ` evaluated with the formulas of the two
    /// cells meeting along each interior knot line.
    pub fn edge_jump(&self, sample: &SurfaceSample, samples_per_edge: usize) -> f64 {
        let phi = |x: f64, y: f64| sample.eval_bilinear(x, y);
        let (n, m) = (self.grid.n(), self.grid.m());
        let mut worst: f64 = 0.0;
        for i in 1..n {
            let x = self.grid.x_knots()[i];
            for j in 1..=m {
                let (y0, y1) = self.grid.y_interval(j);
                for k in 0..=samples_per_edge {
                    let y = y0 + (y1 - y0) * k as f64 / samples_per_edge as f64;
                    let a = self.apply_t_in_cell(CellIndex::new(i, j), phi, x, y);
                    let b = self.apply_t_in_cell(CellIndex::new(i + 1, j), phi, x, y);
                    worst = worst.max((a - b).abs());
                }
            }
        }
        for j in 1..m {
            let y = self.grid.y_knots()[j];
            for i in 1..=n {
                let (x0, x1) = self.grid.x_interval(i);
                for k in 0..=samples_per_edge {
                    let x = x0 + (x1 - x0) * k as f64 / samples_per_edge as f64;
                    let a = self.apply_t_in_cell(CellIndex::new(i, j), phi, x, y);
                    let b = self.apply_t_in_cell(CellIndex::new(i, j + 1), phi, x, y);
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }

    /// Random orbit under uniformly chosen maps, started on the attractor
    /// at the first data point and recorded after `burn_in` steps.
    pub fn chaos_game(&self, points: usize, seed: u64, burn_in: usize) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x0, y0) = (self.grid.x_range().0, self.grid.y_range().0);
        let mut p = [x0, y0, self.grid.z(0, 0)];
        let mut out = Vec::with_capacity(points);
        for step in 0..burn_in + points {
            let slot = rng.gen_range(0..self.cells.len());
            let cs = &self.cells[slot];
            let (u, v) = cs.map.apply(p[0], p[1]);
            let s = cs.scaling.eval(u, v);
            let z = s * p[2] + self.q_field(slot).eval(p[0], p[1]);
            p = [u, v, z];
            if step >= burn_in {
                out.push(p);
            }
        }
        out
    }

    /// Compares orbit heights with [`IfsSystem::eval_refined`] at `depth`.
    /// The allowance per point is `3·(error bound + slack) + 1e-9·(1 + |z|)`.
    pub fn chaos_agreement(
        &self,
        sample: &SurfaceSample,
        points: &[[f64; 3]],
        depth: usize,
    ) -> Result<ChaosReport> {
        let mut report = ChaosReport {
            points: points.len(),
            max_difference: 0.0,
            max_ratio: 0.0,
            worst_point: [f64::NAN; 3],
        };
        for p in points {
            let (v, slack) = self.eval_refined(sample, p[0], p[1], depth)?;
            let diff = (p[2] - v).abs();
            let allowance = 3.0 * (sample.error_bound + slack) + 1e-9 * (1.0 + p[2].abs());
            report.max_difference = report.max_difference.max(diff);
            if diff / allowance > report.max_ratio {
                report.max_ratio = diff / allowance;
                report.worst_point = *p;
            }
        }
        Ok(report)
    }

    /// `θ` interval and a sampled check of the `ρ_θ` contraction of every
    /// `W_ij` over `E × [−Z, Z]`. `theta` defaults to the interval midpoint
    /// (or 1 when unbounded).
    pub fn certify_metric(
        &self,
        theta: Option<f64>,
        pairs: usize,
        seed: u64,
    ) -> Result<MetricReport> {
        let cert = self.certificate;
        let upper = cert.theta_upper();
        let theta = theta.unwrap_or(match upper {
            Some(u) => 0.5 * u,
            None => 1.0,
        });
        let admissible = theta > 0.0 && upper.is_none_or(|u| theta < u);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (xr, yr) = (self.grid.x_range(), self.grid.y_range());
        let zb = cert.height_bound.max(1e-300);
        let rho = |p: [f64; 3], q: [f64; 3]| {
            (p[0] - q[0]).abs() + (p[1] - q[1]).abs() + theta * (p[2] - q[2]).abs()
        };
        let mut sampled: f64 = 0.0;
        let diam = (xr.1 - xr.0) + (yr.1 - yr.0);
        for k in 0..pairs {
            let slot = k % self.cells.len();
            let cell = self.cells[slot].map.cell;
            let p = [
                rng.gen_range(xr.0..=xr.1),
                rng.gen_range(yr.0..=yr.1),
                rng.gen_range(-zb..=zb),
            ];
            // alternate far pairs and close pairs with equal heights; the
            // latter probe the Lipschitz term in (x, y)
            let q = if k % 2 == 0 {
                [
                    rng.gen_range(xr.0..=xr.1),
                    rng.gen_range(yr.0..=yr.1),
                    rng.gen_range(-zb..=zb),
                ]
            } else {
                let r = 1e-4 * diam;
                [
                    (p[0] + rng.gen_range(-r..=r)).clamp(xr.0, xr.1),
                    (p[1] + rng.gen_range(-r..=r)).clamp(yr.0, yr.1),
                    p[2],
                ]
            };
            let d = rho(p, q);
            if d == 0.0 {
                continue;
            }
            let ratio = rho(
                self.apply_w(cell, p[0], p[1], p[2]),
                self.apply_w(cell, q[0], q[1], q[2]),
            ) / d;
            sampled = sampled.max(ratio);
        }
        let report = MetricReport {
            theta_upper: upper,
            theta,
            admissible,
            predicted_factor: cert.predicted_factor(theta),
            sampled_factor: sampled,
            pairs,
        };
        if admissible && !(sampled < 1.0) {
            return Err(Error::Certification(format!(
                "sampled ρ_θ contraction factor {sampled} ≥ 1 at admissible θ = {theta}; a Lipschitz bound upstream is too small"
            )));
        }
        Ok(report)
    }
}

fn blend_sup(blend: &PatchBlend, xs: (f64, f64), ys: (f64, f64)) -> f64 {
    const RES: usize = 64;
    let mut sup: f64 = 0.0;
    for b in 0..=RES {
        for a in 0..=RES {
            let x = xs.0 + (xs.1 - xs.0) * a as f64 / RES as f64;
            let y = ys.0 + (ys.1 - ys.0) * b as f64 / RES as f64;
            sup = sup.max(blend.eval(x, y).abs());
        }
    }
    // lattice max plus Lipschitz slack over half a lattice step
    sup + blend.lipschitz() * 0.5 * ((xs.1 - xs.0) + (ys.1 - ys.0)) / RES as f64
}

pub(crate) fn cell_slot_of(system: &IfsSystem, x: f64, y: f64) -> Result<usize> {
    let cell = locate_cell(&system.grid, x, y)?;
    Ok(system.grid.cell_slot(cell))
}

#[cfg(test)]
mod tests;
