//! Box-counting dimension of the attractor: the theoretical band from the
//! extrema of `|s_ij|`, and a multiscale estimate from counts on the
//! sampled surface or a chaos-game point cloud.
//!
//! Counting happens on the mesh that splits each domain axis into `1/δ`
//! equal parts; the vertical box side is `δ·|I_x|`.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::DataGrid;
use crate::ifs::{check_resolution, IfsSystem, SurfaceSample};

/// Tolerance on knot spacing for the uniform-grid hypothesis.
pub const UNIFORM_TOL: f64 = 1e-12;
/// Largest distance from the chord below which a data line counts as collinear.
pub const COLLINEAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataLine {
    /// Points `(x_α, y_l, z_αl)`, `l = 0..m`.
    Column(usize),
    /// Points `(x_k, y_β, z_kβ)`, `k = 0..n`.
    Row(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Applicability {
    pub square: bool,
    pub uniform: bool,
    /// First interior data line that is not collinear.
    pub non_collinear: Option<DataLine>,
    pub reasons: Vec<String>,
}

impl Applicability {
    pub fn applicable(&self) -> bool {
        self.square && self.uniform && self.non_collinear.is_some()
    }
}

fn uniform(knots: &[f64]) -> bool {
    let n = knots.len() - 1;
    let (a, b) = (knots[0], knots[n]);
    let tol = UNIFORM_TOL * a.abs().max(b.abs()).max(1.0);
    knots
        .iter()
        .enumerate()
        .all(|(k, &t)| (t - (a + (b - a) * k as f64 / n as f64)).abs() <= tol)
}

/// Largest distance of the points from the line through the first and last.
fn chord_distance(points: &[(f64, f64)]) -> f64 {
    let (p, q) = (points[0], points[points.len() - 1]);
    let (dx, dz) = (q.0 - p.0, q.1 - p.1);
    let len = dx.hypot(dz);
    points
        .iter()
        .map(|&(t, z)| ((t - p.0) * dz - (z - p.1) * dx).abs() / len)
        .fold(0.0, f64::max)
}

/// Checks the square uniform grid and non-collinear interior line hypotheses.
pub fn check_hypotheses(grid: &DataGrid) -> Applicability {
    let square = grid.n() == grid.m();
    let uniform = uniform(grid.x_knots()) && uniform(grid.y_knots());
    let mut non_collinear = None;
    for a in 1..grid.n() {
        let pts: Vec<(f64, f64)> = (0..=grid.m())
            .map(|l| (grid.y_knots()[l], grid.z(a, l)))
            .collect();
        if chord_distance(&pts) > COLLINEAR_TOL {
            non_collinear = Some(DataLine::Column(a));
            break;
        }
    }
    if non_collinear.is_none() {
        for b in 1..grid.m() {
            let pts: Vec<(f64, f64)> = (0..=grid.n())
                .map(|k| (grid.x_knots()[k], grid.z(k, b)))
                .collect();
            if chord_distance(&pts) > COLLINEAR_TOL {
                non_collinear = Some(DataLine::Row(b));
                break;
            }
        }
    }
    let mut reasons = Vec::new();
    if !square {
        reasons.push(format!("grid is {}×{}, not square", grid.n(), grid.m()));
    }
    if !uniform {
        reasons.push("knots are not uniformly spaced".into());
    }
    if non_collinear.is_none() {
        reasons.push("every interior data line is collinear".into());
    }
    Applicability {
        square,
        uniform,
        non_collinear,
        reasons,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsCase {
    /// `Σ s̲ > n`: both bounds from the formula.
    Bounds,
    /// `Σ s̄ ≤ n`: the dimension is 2.
    ExactlyTwo,
    /// `Σ s̲ ≤ n < Σ s̄`: only the upper bound is available; the lower one
    /// is the trivial 2.
    Gap,
    Inapplicable,
}

impl BoundsCase {
    pub fn label(&self) -> &'static str {
        match self {
            BoundsCase::Bounds => "bounds",
            BoundsCase::ExactlyTwo => "exactly-two",
            BoundsCase::Gap => "gap",
            BoundsCase::Inapplicable => "inapplicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalBounds {
    pub case: BoundsCase,
    pub lower: f64,
    pub upper: f64,
    pub sum_s_bar: f64,
    pub sum_s_underbar: f64,
    pub note: Option<String>,
}

impl TheoreticalBounds {
    pub fn inapplicable(note: impl Into<String>) -> Self {
        Self {
            case: BoundsCase::Inapplicable,
            lower: f64::NAN,
            upper: f64::NAN,
            sum_s_bar: f64::NAN,
            sum_s_underbar: f64::NAN,
            note: Some(note.into()),
        }
    }
}

/// `1 + log_n Σ` bounds from `n×n` tables of interior maxima and minima of `|s|`.
pub fn theoretical_bounds(
    s_bar: &[Vec<f64>],
    s_underbar: &[Vec<f64>],
    n: usize,
) -> TheoreticalBounds {
    let square = |t: &[Vec<f64>]| t.len() == n && t.iter().all(|r| r.len() == n);
    if n < 2 || !square(s_bar) || !square(s_underbar) {
        return TheoreticalBounds::inapplicable(format!(
            "extrema tables are not {n}×{n} with n ≥ 2"
        ));
    }
    let sum_bar: f64 = s_bar.iter().flatten().sum();
    let sum_under: f64 = s_underbar.iter().flatten().sum();
    let nf = n as f64;
    let formula = |sum: f64| (1.0 + sum.ln() / nf.ln()).clamp(2.0, 3.0);
    let (case, lower, upper, note) = if sum_bar <= nf {
        (BoundsCase::ExactlyTwo, 2.0, 2.0, None)
    } else if sum_under > nf {
        (
            BoundsCase::Bounds,
            formula(sum_under),
            formula(sum_bar),
            None,
        )
    } else {
        (
            BoundsCase::Gap,
            2.0,
            formula(sum_bar),
            Some("no statement for Σ s̲ ≤ n < Σ s̄; lower bound is the trivial 2".into()),
        )
    };
    TheoreticalBounds {
        case,
        lower,
        upper,
        sum_s_bar: sum_bar,
        sum_s_underbar: sum_under,
        note,
    }
}

/// `N(δ)` per scale; `delta` is the fraction of each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    pub deltas: Vec<f64>,
    pub counts: Vec<f64>,
}

impl CountTable {
    /// True when `N(δ)` does not increase with `δ`.
    pub fn is_monotone(&self) -> bool {
        let mut pairs: Vec<(f64, f64)> = self
            .deltas
            .iter()
            .copied()
            .zip(self.counts.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

/// `δ_k = base^{−k}` for `k = first..first+count−1`.
pub fn scale_list(base: usize, first: usize, count: usize) -> Vec<f64> {
    (first..first + count)
        .map(|k| (base as f64).powi(-(k as i32)))
        .collect()
}

fn mesh_divisions(delta: f64) -> Result<usize> {
    let d = (1.0 / delta).round();
    if !(d >= 1.0) || ((1.0 / delta) - d).abs() > 1e-9 * d {
        return Err(Error::BoxCounting(format!(
            "scale {delta} does not split the axis into a whole number of parts"
        )));
    }
    Ok(d as usize)
}

/// Smallest lattice resolution that puts every knot and every mesh line
/// on a lattice line with at least 4 lattice steps per finest box, and
/// is no smaller than `at_least`.
pub fn counting_resolution(grid: &DataGrid, deltas: &[f64], at_least: usize) -> Result<usize> {
    let finest = deltas
        .iter()
        .map(|&d| mesh_divisions(d))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(1);
    const CAP: usize = 1 << 14;
    let mut steps = finest;
    while steps <= CAP {
        if steps >= 4 * finest
            && steps + 1 >= at_least
            && deltas
                .iter()
                .all(|&d| steps.is_multiple_of(mesh_divisions(d).unwrap_or(1)))
            && check_resolution(grid, steps + 1).is_ok()
        {
            return Ok(steps + 1);
        }
        steps += finest;
    }
    Err(Error::BoxCounting(format!(
        "no lattice up to {} nodes per axis aligns with both the knots and the finest scale",
        CAP + 1
    )))
}

/// Column-range box counting on the sampled surface: each mesh column
/// contributes `⌈(max − min)/δ_z⌉ + 1` boxes.
pub fn count_height_field(sample: &SurfaceSample, deltas: &[f64]) -> Result<CountTable> {
    let r = sample.resolution();
    let steps = r - 1;
    let width = sample.x_range().1 - sample.x_range().0;
    let mut counts = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let d = mesh_divisions(delta)?;
        if !steps.is_multiple_of(d) || steps / d < 4 {
            return Err(Error::BoxCounting(format!(
                "scale {delta} needs a lattice with a multiple of {d} steps and at least 4 per box; have {steps}"
            )));
        }
        let per = steps / d;
        let dz = delta * width;
        let total: f64 = (0..d * d)
            .into_par_iter()
            .map(|c| {
                let (p, q) = (c % d, c / d);
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for b in q * per..=(q + 1) * per {
                    for a in p * per..=(p + 1) * per {
                        let z = sample.height(a, b);
                        lo = lo.min(z);
                        hi = hi.max(z);
                    }
                }
                ((hi - lo) / dz).ceil() + 1.0
            })
            .sum();
        counts.push(total);
    }
    Ok(CountTable {
        deltas: deltas.to_vec(),
        counts,
    })
}

/// Number of distinct occupied boxes for a point cloud over the domain.
pub fn count_points(
    points: &[[f64; 3]],
    x_range: (f64, f64),
    y_range: (f64, f64),
    deltas: &[f64],
) -> Result<CountTable> {
    if points.is_empty() {
        return Err(Error::BoxCounting("empty point cloud".into()));
    }
    let z_min = points.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
    let width = x_range.1 - x_range.0;
    let height = y_range.1 - y_range.0;
    let mut counts = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let d = mesh_divisions(delta)?;
        let dz = delta * width;
        let index = |t: f64| ((t * d as f64).floor().max(0.0) as usize).min(d - 1);
        let boxes: HashSet<(usize, usize, i64)> = points
            .iter()
            .map(|p| {
                (
                    index((p[0] - x_range.0) / width),
                    index((p[1] - y_range.0) / height),
                    ((p[2] - z_min) / dz).floor() as i64,
                )
            })
            .collect();
        counts.push(boxes.len() as f64);
    }
    Ok(CountTable {
        deltas: deltas.to_vec(),
        counts,
    })
}

/// Least-squares fit of `log N(δ)` against `log(1/δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Residuals of the final fit, one per scale (NaN for excluded scales).
    pub residuals: Vec<f64>,
    pub excluded_coarsest: bool,
    pub warning: Option<String>,
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Fits the slope. The coarsest scale is dropped when its prediction error
/// from a fit of the finer scales exceeds three times the median absolute
/// residual of the full fit, provided at least three scales remain.
pub fn estimate_dimension(table: &CountTable) -> Result<DimensionFit> {
    if table.deltas.len() < 3 || table.deltas.len() != table.counts.len() {
        return Err(Error::BoxCounting(format!(
            "need at least 3 scales, got {}",
            table.deltas.len()
        )));
    }
    if table.counts.iter().any(|&c| !(c >= 1.0)) || table.deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::BoxCounting(
            "counts must be ≥ 1 and scales positive".into(),
        ));
    }
    let xs: Vec<f64> = table.deltas.iter().map(|d| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = table.counts.iter().map(|c| c.ln()).collect();
    if ys.iter().all(|&y| y == ys[0]) {
        return Ok(DimensionFit {
            slope: 0.0,
            intercept: ys[0],
            r_squared: 1.0,
            residuals: vec![0.0; xs.len()],
            excluded_coarsest: false,
            warning: Some("counts are constant across scales".into()),
        });
    }
    let (slope, intercept, r2) = ols(&xs, &ys);
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let coarsest = (0..xs.len())
        .min_by(|&a, &b| xs[a].total_cmp(&xs[b]))
        .expect("non-empty");
    let mut abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let median = abs[abs.len() / 2];
    if xs.len() >= 4 {
        let keep: Vec<usize> = (0..xs.len()).filter(|&k| k != coarsest).collect();
        let kx: Vec<f64> = keep.iter().map(|&k| xs[k]).collect();
        let ky: Vec<f64> = keep.iter().map(|&k| ys[k]).collect();
        let (k_slope, k_intercept, k_r2) = ols(&kx, &ky);
        // prediction error at the coarsest scale from the finer ones
        let outlier = (ys[coarsest] - (k_intercept + k_slope * xs[coarsest])).abs();
        if outlier > 3.0 * median && outlier > 1e-9 {
            let residuals = (0..xs.len())
                .map(|k| {
                    if k == coarsest {
                        f64::NAN
                    } else {
                        ys[k] - (k_intercept + k_slope * xs[k])
                    }
                })
                .collect();
            return Ok(DimensionFit {
                slope: k_slope,
                intercept: k_intercept,
                r_squared: k_r2,
                residuals,
                excluded_coarsest: true,
                warning: None,
            });
        }
    }
    Ok(DimensionFit {
        slope,
        intercept,
        r_squared: r2,
        residuals,
        excluded_coarsest: false,
        warning: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionOptions {
    pub first_scale: usize,
    pub scales: usize,
    /// Interior margin as a fraction of the cell width.
    pub epsilon: f64,
    pub extrema_resolution: usize,
}

impl Default for DimensionOptions {
    fn default() -> Self {
        Self {
            first_scale: 1,
            scales: 5,
            epsilon: 1.0 / 64.0,
            extrema_resolution: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub applicability: Applicability,
    pub epsilon: f64,
    /// `s̄_ij` and `s̲_ij` on the ε-shrunk cells, `[i-1][j-1]`.
    pub s_bar: Vec<Vec<f64>>,
    pub s_underbar: Vec<Vec<f64>>,
    /// Band from the ε-shrunk extrema.
    pub bounds: TheoreticalBounds,
    /// Band with `s̲` replaced by its infimum over the open cell (0).
    pub limit_bounds: TheoreticalBounds,
    pub counts: CountTable,
    pub fit: DimensionFit,
}

impl DimensionReport {
    pub fn empirical_estimate(&self) -> f64 {
        self.fit.slope
    }
}

/// Per-cell table indexed `[i-1][j-1]`.
pub type CellTable = Vec<Vec<f64>>;

/// Interior extrema `(s̄, s̲)` of every `|s_ij|`.
pub fn extrema_tables(
    system: &IfsSystem,
    epsilon: f64,
    resolution: usize,
) -> Result<(CellTable, CellTable)> {
    let grid = system.grid();
    let mut s_bar = vec![vec![0.0; grid.m()]; grid.n()];
    let mut s_under = vec![vec![0.0; grid.m()]; grid.n()];
    for cs in system.cells() {
        let cell = cs.map.cell;
        let ext = cs.scaling.interior_extrema(epsilon, resolution)?;
        s_bar[cell.i - 1][cell.j - 1] = ext.s_bar;
        s_under[cell.i - 1][cell.j - 1] = ext.s_underbar;
    }
    Ok((s_bar, s_under))
}

/// Band, counts and fit for a solved surface, or for a point cloud when
/// `points` is given.
pub fn dimension_report(
    system: &IfsSystem,
    sample: &SurfaceSample,
    points: Option<&[[f64; 3]]>,
    options: DimensionOptions,
) -> Result<DimensionReport> {
    let grid = system.grid();
    let applicability = check_hypotheses(grid);
    let (s_bar, s_underbar) = extrema_tables(system, options.epsilon, options.extrema_resolution)?;
    let (bounds, limit_bounds) = if applicability.applicable() {
        let zeros = vec![vec![0.0; grid.n()]; grid.n()];
        (
            theoretical_bounds(&s_bar, &s_underbar, grid.n()),
            theoretical_bounds(&s_bar, &zeros, grid.n()),
        )
    } else {
        let why = applicability.reasons.join("; ");
        (
            TheoreticalBounds::inapplicable(why.clone()),
            TheoreticalBounds::inapplicable(why),
        )
    };
    let deltas = scale_list(grid.n(), options.first_scale, options.scales);
    let counts = match points {
        Some(p) => count_points(p, grid.x_range(), grid.y_range(), &deltas)?,
        None => count_height_field(sample, &deltas)?,
    };
    let fit = estimate_dimension(&counts)?;
    Ok(DimensionReport {
        applicability,
        epsilon: options.epsilon,
        s_bar,
        s_underbar,
        bounds,
        limit_bounds,
        counts,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: usize, z: impl Fn(usize, usize) -> f64) -> DataGrid {
        let knots: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let cols = (0..=n)
            .map(|i| (0..=n).map(|j| z(i, j)).collect())
            .collect();
        DataGrid::new(knots.clone(), knots, cols).unwrap()
    }

    #[test]
    fn table1_grid_is_not_square() {
        let grid = crate::fixtures::table1_grid().unwrap();
        let a = check_hypotheses(&grid);
        assert!(!a.square);
        assert!(!a.applicable());
        assert!(a.reasons[0].contains("4×3"));
    }

    #[test]
    fn flat_data_has_no_non_collinear_line() {
        let a = check_hypotheses(&unit_grid(3, |_, _| 0.0));
        assert!(a.square && a.uniform);
        assert_eq!(a.non_collinear, None);
        assert!(!a.applicable());
    }

    #[test]
    fn bumped_column_makes_grid_applicable() {
        let grid = unit_grid(4, |i, j| if (i, j) == (2, 2) { 0.5 } else { 0.0 });
        let a = check_hypotheses(&grid);
        assert_eq!(a.non_collinear, Some(DataLine::Column(2)));
        assert!(a.applicable());
        // a planar tilt is collinear on every line
        let tilted = unit_grid(4, |i, j| 0.1 * i as f64 + 0.3 * j as f64);
        assert!(!check_hypotheses(&tilted).applicable());
    }

    #[test]
    fn non_uniform_knots_are_rejected() {
        let grid = DataGrid::new(
            vec![0.0, 0.4, 1.0],
            vec![0.0, 0.5, 1.0],
            vec![vec![0.0, 1.0, 0.0]; 3],
        )
        .unwrap();
        let a = check_hypotheses(&grid);
        assert!(!a.uniform && !a.applicable());
    }

    #[test]
    fn bounds_cases() {
        let z = vec![vec![0.0; 2]; 2];
        let b = theoretical_bounds(&z, &z, 2);
        assert_eq!(
            (b.case, b.lower, b.upper),
            (BoundsCase::ExactlyTwo, 2.0, 2.0)
        );

        let p = vec![vec![0.9; 2]; 2];
        let b = theoretical_bounds(&p, &p, 2);
        let expected = 1.0 + 3.6f64.log2();
        assert_eq!(b.case, BoundsCase::Bounds);
        assert!((b.lower - expected).abs() < 1e-12 && (b.upper - expected).abs() < 1e-12);
        assert!((expected - 2.848).abs() < 1e-3);

        let b = theoretical_bounds(&p, &z, 2);
        assert_eq!(b.case, BoundsCase::Gap);
        assert_eq!(b.lower, 2.0);
        assert!((b.upper - expected).abs() < 1e-12);
        assert!(b.note.is_some());

        let b = theoretical_bounds(&p, &p, 3);
        assert_eq!(b.case, BoundsCase::Inapplicable);
    }

    #[test]
    fn exact_power_law_slope() {
        let deltas = scale_list(2, 1, 5);
        let counts = deltas.iter().map(|d: &f64| (1.0 / d).powf(2.5)).collect();
        let fit = estimate_dimension(&CountTable { deltas, counts }).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(!fit.excluded_coarsest);
    }

    #[test]
    fn constant_counts_warn() {
        let fit = estimate_dimension(&CountTable {
            deltas: vec![0.5, 0.25, 0.125],
            counts: vec![7.0; 3],
        })
        .unwrap();
        assert_eq!(fit.slope, 0.0);
        assert!(fit.warning.is_some());
    }

    #[test]
    fn coarsest_outlier_is_dropped() {
        let deltas = scale_list(2, 1, 6);
        let mut counts: Vec<f64> = deltas
            .iter()
            .map(|d| (1.0 / d).powi(2) * 1.01f64.powf(d.ln()))
            .collect();
        counts[0] *= 3.0;
        let fit = estimate_dimension(&CountTable { deltas, counts }).unwrap();
        assert!(fit.excluded_coarsest);
        assert!(fit.residuals[0].is_nan());
        assert!((fit.slope - 2.0).abs() < 0.02);
    }

    #[test]
    fn too_few_scales_is_an_error() {
        assert!(estimate_dimension(&CountTable {
            deltas: vec![0.5, 0.25],
            counts: vec![4.0, 16.0],
        })
        .is_err());
    }

    #[test]
    fn flat_sample_counts_squares() {
        let grid = unit_grid(2, |_, _| 1.0);
        let sample = SurfaceSample::from_fn(&grid, 129, |_, _| 1.0);
        let deltas = scale_list(2, 1, 5);
        let t = count_height_field(&sample, &deltas).unwrap();
        for (d, c) in t.deltas.iter().zip(&t.counts) {
            assert_eq!(*c, (1.0 / d).powi(2));
        }
        assert!(t.is_monotone());
        assert!((estimate_dimension(&t).unwrap().slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scale_too_fine_for_lattice_is_an_error() {
        let grid = unit_grid(2, |_, _| 1.0);
        let sample = SurfaceSample::from_fn(&grid, 33, |_, _| 1.0);
        assert!(count_height_field(&sample, &[1.0 / 16.0]).is_err());
        assert!(count_height_field(&sample, &[1.0 / 8.0]).is_ok());
        assert!(count_height_field(&sample, &[0.3]).is_err());
    }

    #[test]
    fn point_cloud_counts_plane() {
        let mut pts = Vec::new();
        for b in 0..200 {
            for a in 0..200 {
                pts.push([(a as f64 + 0.5) / 200.0, (b as f64 + 0.5) / 200.0, 2.0]);
            }
        }
        let t = count_points(&pts, (0.0, 1.0), (0.0, 1.0), &scale_list(2, 1, 5)).unwrap();
        assert_eq!(t.counts, vec![4.0, 16.0, 64.0, 256.0, 1024.0]);
    }

    #[test]
    fn counting_resolution_aligns_knots_and_mesh() {
        let grid = crate::fixtures::table1_grid().unwrap();
        let deltas = scale_list(4, 1, 4);
        let r = counting_resolution(&grid, &deltas, 769).unwrap();
        assert_eq!(r, 1537);
        let grid2 = unit_grid(2, |_, _| 0.0);
        assert_eq!(
            counting_resolution(&grid2, &scale_list(2, 1, 5), 0).unwrap(),
            129
        );
    }
}
