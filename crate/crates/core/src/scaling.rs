//! Vertical scaling functions `s_ij` that vanish on the boundary of their
//! cell, together with certified bounds on `|s_ij|`.
//!
//! Three forms are supported:
//!
//! * separable quartic `c·(x−x_{i−1})(x−x_i)(y−y_{j−1})(y−y_j)`, for which
//!   every quantity is available in closed form;
//! * the polynomial-product family `d(ψ(x,y)·(x−x_i)^λ1 (x−x_{i−1})^λ2
//!   (y−y_j)^λ3 (y−y_{j−1})^λ4)` with `d(0) = 0`;
//! * a free expression in `x` and `y`, which must vanish on the edges.
//!
//! Non-analytic forms are certified by dense sampling plus a local
//! Lipschitz slack estimated from neighbouring finite differences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprText};
use crate::grid::{CellIndex, DataGrid};

/// Maximum `|s|` tolerated on cell edges.
pub const BOUNDARY_TOL: f64 = 1e-10;
const EDGE_SAMPLES: usize = 1024;

/// Configuration-level description of a scaling field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum ScalingSpec {
    SeparableQuartic {
        coefficient: f64,
    },
    PolynomialProduct {
        psi: ExprText,
        /// `[λ_{x_i}, λ_{x_{i−1}}, λ_{y_j}, λ_{y_{j−1}}]`
        exponents: [f64; 4],
        #[serde(default = "identity_outer")]
        outer: ExprText,
    },
    Expression {
        expr: ExprText,
    },
}

fn identity_outer() -> ExprText {
    ExprText::new("t")
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum ScalingForm {
    SeparableQuartic {
        coefficient: f64,
    },
    PolynomialProduct {
        psi: Expr,
        exponents: [f64; 4],
        outer: Expr,
    },
    Expression {
        expr: Expr,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    /// Intervals per axis for magnitude certification.
    pub certify_resolution: usize,
    /// Intervals per axis for interior extrema.
    pub extrema_resolution: usize,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            certify_resolution: 512,
            extrema_resolution: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CertificationMethod {
    /// Exact maximum of the separable quartic at the cell midpoint.
    Analytic,
    /// Sampled maximum plus local Lipschitz slack.
    Sampled {
        resolution: usize,
        grid_max: f64,
        slack: f64,
    },
}

/// Upper bound on `sup |s|` over the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnitudeCertificate {
    pub sup_abs: f64,
    pub witness: (f64, f64),
    pub method: CertificationMethod,
}

/// Extremes of `|s|` over the cell shrunk by `margin·width` on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorExtrema {
    pub s_bar: f64,
    pub s_underbar: f64,
    pub margin: f64,
    pub argmax: (f64, f64),
    pub argmin: (f64, f64),
    /// Infimum of `|s|` over the whole open cell. Always 0 for a
    /// continuous field that vanishes on the edges.
    pub open_cell_infimum: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingField {
    cell: CellIndex,
    x_span: (f64, f64),
    y_span: (f64, f64),
    form: ScalingForm,
    certificate: MagnitudeCertificate,
    lipschitz: f64,
}

impl ScalingField {
    /// Compiles a configuration spec for `cell`, checks the boundary-zero
    /// property and certifies `sup|s| < 1`.
    pub fn from_spec(
        grid: &DataGrid,
        cell: CellIndex,
        spec: &ScalingSpec,
        options: SamplingOptions,
    ) -> Result<Self> {
        let field_err = |e: Error| match e {
            Error::Expression {
                source_text,
                message,
            } => Error::ScalingField {
                cell,
                message: format!("`{source_text}`: {message}"),
            },
            other => other,
        };
        let form = match spec {
            ScalingSpec::SeparableQuartic { coefficient } => ScalingForm::SeparableQuartic {
                coefficient: *coefficient,
            },
            ScalingSpec::PolynomialProduct {
                psi,
                exponents,
                outer,
            } => ScalingForm::PolynomialProduct {
                psi: psi.compile(&["x", "y"]).map_err(field_err)?,
                exponents: *exponents,
                outer: outer.compile(&["t"]).map_err(field_err)?,
            },
            ScalingSpec::Expression { expr } => ScalingForm::Expression {
                expr: expr.compile(&["x", "y"]).map_err(field_err)?,
            },
        };
        Self::new(grid, cell, form, options)
    }

    pub fn new(
        grid: &DataGrid,
        cell: CellIndex,
        form: ScalingForm,
        options: SamplingOptions,
    ) -> Result<Self> {
        if !grid.contains_cell(cell) {
            return Err(Error::ScalingField {
                cell,
                message: "cell outside the grid".into(),
            });
        }
        if let ScalingForm::PolynomialProduct {
            exponents, outer, ..
        } = &form
        {
            if exponents.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
                return Err(Error::ScalingField {
                    cell,
                    message: format!("exponents must be positive, got {exponents:?}"),
                });
            }
            let d0 = outer.eval(&[0.0]);
            if d0.abs() > 1e-12 {
                return Err(Error::ScalingField {
                    cell,
                    message: format!("outer map must satisfy d(0) = 0, got {d0}"),
                });
            }
        }
        let mut field = Self {
            cell,
            x_span: grid.x_interval(cell.i),
            y_span: grid.y_interval(cell.j),
            form,
            certificate: MagnitudeCertificate {
                sup_abs: f64::NAN,
                witness: (f64::NAN, f64::NAN),
                method: CertificationMethod::Analytic,
            },
            lipschitz: f64::NAN,
        };
        field.check_boundary_zero()?;
        if field.quartic_coefficient().is_some() {
            field.lipschitz = field.compute_lipschitz(options.certify_resolution);
            field.certificate = field.certify_magnitude(options.certify_resolution)?;
        } else {
            let res = options.certify_resolution;
            let grid = SampleGrid::new(&field, field.x_span, field.y_span, res);
            field.lipschitz = grid.max_slope();
            field.certificate = field.sampled_certificate(&grid, res)?;
        }
        Ok(field)
    }

    pub fn cell(&self) -> CellIndex {
        self.cell
    }

    pub fn form(&self) -> &ScalingForm {
        &self.form
    }

    pub fn x_span(&self) -> (f64, f64) {
        self.x_span
    }

    pub fn y_span(&self) -> (f64, f64) {
        self.y_span
    }

    pub fn certificate(&self) -> &MagnitudeCertificate {
        &self.certificate
    }

    /// Certified upper bound on `sup |s|` over the cell.
    pub fn sup_abs(&self) -> f64 {
        self.certificate.sup_abs
    }

    /// Taxicab Lipschitz constant over the cell (exact bound for the
    /// separable quartic, finite-difference estimate otherwise).
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// The constant `c` when the field is `c·(x−x_{i−1})(x−x_i)(y−y_{j−1})(y−y_j)`.
    pub fn quartic_coefficient(&self) -> Option<f64> {
        match &self.form {
            ScalingForm::SeparableQuartic { coefficient } => Some(*coefficient),
            ScalingForm::PolynomialProduct {
                psi,
                exponents,
                outer,
            } if psi.is_constant()
                && exponents.iter().all(|&l| l == 1.0)
                && outer.source().trim() == "t" =>
            {
                Some(psi.eval(&[0.0, 0.0]))
            }
            _ => None,
        }
    }

    /// `s(x, y)`; meaningful for points of the cell.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (x0, x1) = self.x_span;
        let (y0, y1) = self.y_span;
        match &self.form {
            ScalingForm::SeparableQuartic { coefficient } => {
                coefficient * (x - x0) * (x - x1) * (y - y0) * (y - y1)
            }
            ScalingForm::PolynomialProduct {
                psi,
                exponents,
                outer,
            } => {
                let t = psi.eval(&[x, y])
                    * signed_pow(x - x1, exponents[0])
                    * signed_pow(x - x0, exponents[1])
                    * signed_pow(y - y1, exponents[2])
                    * signed_pow(y - y0, exponents[3]);
                outer.eval(&[t])
            }
            ScalingForm::Expression { expr } => expr.eval(&[x, y]),
        }
    }

    fn check_boundary_zero(&self) -> Result<()> {
        let (x0, x1) = self.x_span;
        let (y0, y1) = self.y_span;
        for k in 0..=EDGE_SAMPLES {
            let a = k as f64 / EDGE_SAMPLES as f64;
            let x = x0 + a * (x1 - x0);
            let y = y0 + a * (y1 - y0);
            for (px, py) in [(x0, y), (x1, y), (x, y0), (x, y1)] {
                let v = self.eval(px, py);
                if !(v.abs() < BOUNDARY_TOL) {
                    return Err(Error::BoundaryNonZero {
                        cell: self.cell,
                        value: v.abs(),
                        x: px,
                        y: py,
                    });
                }
            }
        }
        Ok(())
    }

    fn compute_lipschitz(&self, resolution: usize) -> f64 {
        let (dx, dy) = (self.x_span.1 - self.x_span.0, self.y_span.1 - self.y_span.0);
        if let Some(c) = self.quartic_coefficient() {
            // sup|∂x s| = |c|·Δx·(Δy/2)², sup|∂y s| = |c|·(Δx/2)²·Δy
            let c = c.abs();
            return (c * dx * dy * dy / 4.0).max(c * dx * dx * dy / 4.0);
        }
        let grid = SampleGrid::new(self, self.x_span, self.y_span, resolution);
        grid.max_slope()
    }

    /// Certifies `sup |s| < 1` on the closed cell.
    pub fn certify_magnitude(&self, resolution: usize) -> Result<MagnitudeCertificate> {
        let cert = if let Some(c) = self.quartic_coefficient() {
            let (dx, dy) = (self.x_span.1 - self.x_span.0, self.y_span.1 - self.y_span.0);
            MagnitudeCertificate {
                sup_abs: c.abs() * (dx / 2.0).powi(2) * (dy / 2.0).powi(2),
                witness: (
                    0.5 * (self.x_span.0 + self.x_span.1),
                    0.5 * (self.y_span.0 + self.y_span.1),
                ),
                method: CertificationMethod::Analytic,
            }
        } else {
            let grid = SampleGrid::new(self, self.x_span, self.y_span, resolution);
            return self.sampled_certificate(&grid, resolution);
        };
        self.check_certificate(cert)
    }

    fn sampled_certificate(
        &self,
        grid: &SampleGrid,
        resolution: usize,
    ) -> Result<MagnitudeCertificate> {
        let (grid_max, witness) = grid.max();
        let bound = grid.max_with_local_slack();
        self.check_certificate(MagnitudeCertificate {
            sup_abs: bound,
            witness,
            method: CertificationMethod::Sampled {
                resolution,
                grid_max,
                slack: bound - grid_max,
            },
        })
    }

    fn check_certificate(&self, cert: MagnitudeCertificate) -> Result<MagnitudeCertificate> {
        if !(cert.sup_abs < 1.0) {
            let value = self.eval(cert.witness.0, cert.witness.1).abs();
            return Err(Error::MagnitudeViolation {
                cell: self.cell,
                value: if value >= 1.0 { value } else { cert.sup_abs },
                x: cert.witness.0,
                y: cert.witness.1,
            });
        }
        Ok(cert)
    }

    /// Sampled maximum of `|s|` over the cell, polished by golden-section
    /// search around the best sample. Independent of the analytic route.
    pub fn sampled_sup(&self, resolution: usize) -> (f64, (f64, f64)) {
        let grid = SampleGrid::new(self, self.x_span, self.y_span, resolution);
        let (_, start) = grid.max();
        polish(
            self,
            start,
            grid.hx,
            grid.hy,
            self.x_span,
            self.y_span,
            true,
        )
    }

    /// Max and min of `|s|` over the cell shrunk by `margin` (a fraction
    /// of the cell width and height, in `(0, 0.5)`) on every side.
    pub fn interior_extrema(&self, margin: f64, resolution: usize) -> Result<InteriorExtrema> {
        if !(margin > 0.0 && margin < 0.5) {
            return Err(Error::ScalingField {
                cell: self.cell,
                message: format!("interior margin must lie in (0, 0.5), got {margin}"),
            });
        }
        let (dx, dy) = (self.x_span.1 - self.x_span.0, self.y_span.1 - self.y_span.0);
        let xs = (self.x_span.0 + margin * dx, self.x_span.1 - margin * dx);
        let ys = (self.y_span.0 + margin * dy, self.y_span.1 - margin * dy);
        let grid = SampleGrid::new(self, xs, ys, resolution);
        let (_, amax) = grid.max();
        let (_, amin) = grid.min();
        let (s_bar, argmax) = polish(self, amax, grid.hx, grid.hy, xs, ys, true);
        let (s_underbar, argmin) = polish(self, amin, grid.hx, grid.hy, xs, ys, false);
        Ok(InteriorExtrema {
            s_bar,
            s_underbar,
            margin,
            argmax,
            argmin,
            open_cell_infimum: 0.0,
        })
    }
}

fn signed_pow(t: f64, lambda: f64) -> f64 {
    if lambda.fract() == 0.0 && lambda.abs() < i32::MAX as f64 {
        t.powi(lambda as i32)
    } else {
        t.abs().powf(lambda)
    }
}

/// `|s|` sampled on a `(res+1)×(res+1)` lattice, row-major in y.
struct SampleGrid {
    res: usize,
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
    values: Vec<f64>,
}

impl SampleGrid {
    fn new(field: &ScalingField, xs: (f64, f64), ys: (f64, f64), res: usize) -> Self {
        let res = res.max(2);
        let hx = (xs.1 - xs.0) / res as f64;
        let hy = (ys.1 - ys.0) / res as f64;
        let values: Vec<f64> = (0..=res)
            .into_par_iter()
            .flat_map_iter(|b| {
                let y = if b == res { ys.1 } else { ys.0 + b as f64 * hy };
                (0..=res).map(move |a| {
                    let x = if a == res { xs.1 } else { xs.0 + a as f64 * hx };
                    field.eval(x, y).abs()
                })
            })
            .collect();
        Self {
            res,
            x0: xs.0,
            y0: ys.0,
            hx,
            hy,
            values,
        }
    }

    fn at(&self, a: usize, b: usize) -> f64 {
        self.values[b * (self.res + 1) + a]
    }

    fn point(&self, k: usize) -> (f64, f64) {
        let a = k % (self.res + 1);
        let b = k / (self.res + 1);
        (self.x0 + a as f64 * self.hx, self.y0 + b as f64 * self.hy)
    }

    fn max(&self) -> (f64, (f64, f64)) {
        let (k, v) =
            self.values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &v)| {
                    if v > best.1 || v.is_nan() {
                        (k, v)
                    } else {
                        best
                    }
                });
        (v, self.point(k))
    }

    fn min(&self) -> (f64, (f64, f64)) {
        let (k, v) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (k, &v)| {
                    if v < best.1 {
                        (k, v)
                    } else {
                        best
                    }
                },
            );
        (v, self.point(k))
    }

    /// Largest finite-difference slope of `|s|` between lattice neighbours,
    /// in the taxicab sense.
    fn max_slope(&self) -> f64 {
        let n = self.res;
        (0..=n)
            .into_par_iter()
            .map(|b| {
                let mut worst: f64 = 0.0;
                for a in 0..=n {
                    let v = self.at(a, b);
                    if a < n {
                        worst = worst.max((self.at(a + 1, b) - v).abs() / self.hx);
                    }
                    if b < n {
                        worst = worst.max((self.at(a, b + 1) - v).abs() / self.hy);
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max over lattice squares of (max corner + L_loc·(hx+hy)/2)`, where
    /// `L_loc` is the largest neighbour slope in the 3×3 block of squares
    /// around each square.
    fn max_with_local_slack(&self) -> f64 {
        let n = self.res;
        // slope of each square from its four edges
        let square_slope = |a: usize, b: usize| -> f64 {
            let (v00, v10, v01, v11) = (
                self.at(a, b),
                self.at(a + 1, b),
                self.at(a, b + 1),
                self.at(a + 1, b + 1),
            );
            ((v10 - v00).abs() / self.hx)
                .max((v11 - v01).abs() / self.hx)
                .max((v01 - v00).abs() / self.hy)
                .max((v11 - v10).abs() / self.hy)
        };
        let slopes: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|b| (0..n).map(move |a| (a, b)))
            .map(|(a, b)| square_slope(a, b))
            .collect();
        let half_diam = 0.5 * (self.hx + self.hy);
        (0..n)
            .into_par_iter()
            .map(|b| {
                let mut worst = f64::NEG_INFINITY;
                for a in 0..n {
                    let mut lip: f64 = 0.0;
                    for bb in b.saturating_sub(1)..=(b + 1).min(n - 1) {
                        for aa in a.saturating_sub(1)..=(a + 1).min(n - 1) {
                            lip = lip.max(slopes[bb * n + aa]);
                        }
                    }
                    let corner = self
                        .at(a, b)
                        .max(self.at(a + 1, b))
                        .max(self.at(a, b + 1))
                        .max(self.at(a + 1, b + 1));
                    worst = worst.max(corner + lip * half_diam);
                }
                worst
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Coordinate-wise golden-section refinement of `|s|` around `start`,
/// confined to `xs × ys`. Returns the best value seen.
fn polish(
    field: &ScalingField,
    start: (f64, f64),
    hx: f64,
    hy: f64,
    xs: (f64, f64),
    ys: (f64, f64),
    maximize: bool,
) -> (f64, (f64, f64)) {
    let score = |x: f64, y: f64| {
        let v = field.eval(x, y).abs();
        if maximize {
            v
        } else {
            -v
        }
    };
    let (mut x, mut y) = start;
    let mut best = score(x, y);
    for _ in 0..4 {
        let lo = (x - hx).max(xs.0);
        let hi = (x + hx).min(xs.1);
        let (nx, v) = golden_1d(|t| score(t, y), lo, hi);
        if v > best {
            best = v;
            x = nx;
        }
        let lo = (y - hy).max(ys.0);
        let hi = (y + hy).min(ys.1);
        let (ny, v) = golden_1d(|t| score(x, t), lo, hi);
        if v > best {
            best = v;
            y = ny;
        }
    }
    (if maximize { best } else { -best }, (x, y))
}

fn golden_1d<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if hi - lo < 1e-15 * (1.0 + lo.abs()) {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = f(d);
        }
    }
    // endpoints matter when the extremum sits on the boundary of the box
    [(c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold(
            (c, f64::NEG_INFINITY),
            |acc, p| if p.1 > acc.1 { p } else { acc },
        )
}

/// Builds the Example 1 family `d(ψ·(x−x_i)^λ1 (x−x_{i−1})^λ2 (y−y_j)^λ3 (y−y_{j−1})^λ4)`
/// and certifies it.
pub fn build_example1_field(
    grid: &DataGrid,
    cell: CellIndex,
    psi: &str,
    exponents: [f64; 4],
    outer: &str,
) -> Result<ScalingField> {
    ScalingField::from_spec(
        grid,
        cell,
        &ScalingSpec::PolynomialProduct {
            psi: psi.into(),
            exponents,
            outer: outer.into(),
        },
        SamplingOptions::default(),
    )
}
