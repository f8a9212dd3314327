//! Interpolation data on a rectangular grid and the affine maps that send
//! the whole domain onto each grid cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack used when deciding whether a point belongs to a closed
/// interval; scaled by the interval's magnitude.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Data points `(x_i, y_j, z_ij)` on a rectangular grid. `z[i][j]` is the
/// value at `(x_knots[i], y_knots[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataGrid {
    x_knots: Vec<f64>,
    y_knots: Vec<f64>,
    z: Vec<Vec<f64>>,
}

impl DataGrid {
    pub fn new(x_knots: Vec<f64>, y_knots: Vec<f64>, z: Vec<Vec<f64>>) -> Result<Self> {
        check_knots("x", &x_knots)?;
        check_knots("y", &y_knots)?;
        if z.len() != x_knots.len() {
            return Err(Error::InvalidGrid(format!(
                "z has {} columns, expected {} (one per x knot)",
                z.len(),
                x_knots.len()
            )));
        }
        for (i, col) in z.iter().enumerate() {
            if col.len() != y_knots.len() {
                return Err(Error::InvalidGrid(format!(
                    "z[{i}] has {} entries, expected {} (one per y knot)",
                    col.len(),
                    y_knots.len()
                )));
            }
            if let Some(j) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidGrid(format!("z[{i}][{j}] is not finite")));
            }
        }
        Ok(Self {
            x_knots,
            y_knots,
            z,
        })
    }

    /// Builds a grid from rows ordered by y, each listing values along x
    /// (the layout data tables are usually printed in).
    pub fn from_rows(x_knots: Vec<f64>, y_knots: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != y_knots.len() {
            return Err(Error::InvalidGrid(format!(
                "{} rows given, expected {} (one per y knot)",
                rows.len(),
                y_knots.len()
            )));
        }
        let mut z = vec![Vec::with_capacity(y_knots.len()); x_knots.len()];
        for (j, row) in rows.iter().enumerate() {
            if row.len() != x_knots.len() {
                return Err(Error::InvalidGrid(format!(
                    "row {j} has {} entries, expected {}",
                    row.len(),
                    x_knots.len()
                )));
            }
            for (i, &v) in row.iter().enumerate() {
                z[i].push(v);
            }
        }
        Self::new(x_knots, y_knots, z)
    }

    /// Number of x intervals.
    pub fn n(&self) -> usize {
        self.x_knots.len() - 1
    }

    /// Number of y intervals.
    pub fn m(&self) -> usize {
        self.y_knots.len() - 1
    }

    pub fn x_knots(&self) -> &[f64] {
        &self.x_knots
    }

    pub fn y_knots(&self) -> &[f64] {
        &self.y_knots
    }

    pub fn z(&self, i: usize, j: usize) -> f64 {
        self.z[i][j]
    }

    pub fn z_columns(&self) -> &[Vec<f64>] {
        &self.z
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x_knots[0], *self.x_knots.last().unwrap())
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y_knots[0], *self.y_knots.last().unwrap())
    }

    pub fn width(&self) -> f64 {
        let (a, b) = self.x_range();
        b - a
    }

    pub fn height(&self) -> f64 {
        let (a, b) = self.y_range();
        b - a
    }

    /// `[x_{i-1}, x_i]` for the cell column `i` (1-based).
    pub fn x_interval(&self, i: usize) -> (f64, f64) {
        (self.x_knots[i - 1], self.x_knots[i])
    }

    /// `[y_{j-1}, y_j]` for the cell row `j` (1-based).
    pub fn y_interval(&self, j: usize) -> (f64, f64) {
        (self.y_knots[j - 1], self.y_knots[j])
    }

    /// All cells, `i` outermost.
    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (1..=self.n()).flat_map(move |i| (1..=self.m()).map(move |j| CellIndex { i, j }))
    }

    pub fn cell_count(&self) -> usize {
        self.n() * self.m()
    }

    /// Position of a cell in the order produced by [`DataGrid::cells`].
    pub fn cell_slot(&self, cell: CellIndex) -> usize {
        (cell.i - 1) * self.m() + (cell.j - 1)
    }

    pub fn contains_cell(&self, cell: CellIndex) -> bool {
        (1..=self.n()).contains(&cell.i) && (1..=self.m()).contains(&cell.j)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        within(x, self.x_range()) && within(y, self.y_range())
    }

    /// Same knots with every z replaced.
    pub fn with_z(&self, z: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.x_knots.clone(), self.y_knots.clone(), z)
    }
}

fn check_knots(axis: &str, knots: &[f64]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "{axis} needs at least 2 knots, got {}",
            knots.len()
        )));
    }
    if let Some(k) = knots.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!("{axis} knot {k} is not finite")));
    }
    for (k, w) in knots.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::InvalidGrid(format!(
                "{axis} knots must be strictly increasing: {axis}[{}] = {} >= {axis}[{}] = {}",
                k,
                w[0],
                k + 1,
                w[1]
            )));
        }
    }
    Ok(())
}

fn tol_for(range: (f64, f64)) -> f64 {
    DOMAIN_TOL * range.0.abs().max(range.1.abs()).max(1.0)
}

fn within(v: f64, range: (f64, f64)) -> bool {
    let tol = tol_for(range);
    v >= range.0 - tol && v <= range.1 + tol
}

/// Cell `(i, j)`, both 1-based: the rectangle `[x_{i-1}, x_i] × [y_{j-1}, y_j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct CellIndex {
    pub i: usize,
    pub j: usize,
}

impl CellIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

impl From<[usize; 2]> for CellIndex {
    fn from([i, j]: [usize; 2]) -> Self {
        Self { i, j }
    }
}

impl From<CellIndex> for [usize; 2] {
    fn from(c: CellIndex) -> Self {
        [c.i, c.j]
    }
}

impl std::fmt::Display for CellIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Left endpoint of the domain goes to the left endpoint of the cell.
    #[default]
    Preserving,
    Reversing,
}

/// Affine map `t ↦ slope·t + offset` of a domain axis onto one cell interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisMap {
    pub slope: f64,
    pub offset: f64,
    pub orientation: Orientation,
}

impl AxisMap {
    /// Maps `[lo, hi]` onto `[a, b]` with the given orientation.
    pub fn between(domain: (f64, f64), image: (f64, f64), orientation: Orientation) -> Self {
        let ratio = (image.1 - image.0) / (domain.1 - domain.0);
        let (slope, offset) = match orientation {
            Orientation::Preserving => (ratio, image.0 - ratio * domain.0),
            Orientation::Reversing => (-ratio, image.1 + ratio * domain.0),
        };
        Self {
            slope,
            offset,
            orientation,
        }
    }

    pub fn apply(&self, t: f64) -> f64 {
        self.slope * t + self.offset
    }

    pub fn invert(&self, u: f64) -> f64 {
        (u - self.offset) / self.slope
    }

    /// Contraction factor `|slope|`.
    pub fn factor(&self) -> f64 {
        self.slope.abs()
    }
}

/// `L_ij(x, y) = (L_x(x), L_y(y))`, mapping the domain onto cell `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainMap {
    pub x_map: AxisMap,
    pub y_map: AxisMap,
    pub cell: CellIndex,
    x_image: (f64, f64),
    y_image: (f64, f64),
}

impl DomainMap {
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.x_map.apply(x), self.y_map.apply(y))
    }

    /// Closed-form `L_ij^{-1}`; fails when the point is not in the cell.
    pub fn invert(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        if !within(x, self.x_image) || !within(y, self.y_image) {
            return Err(Error::OutOfDomain { x, y });
        }
        Ok(self.invert_unchecked(x, y))
    }

    pub fn invert_unchecked(&self, x: f64, y: f64) -> (f64, f64) {
        (self.x_map.invert(x), self.y_map.invert(y))
    }

    /// Contraction factor in the taxicab metric.
    pub fn factor(&self) -> f64 {
        self.x_map.factor().max(self.y_map.factor())
    }

    pub fn x_image(&self) -> (f64, f64) {
        self.x_image
    }

    pub fn y_image(&self) -> (f64, f64) {
        self.y_image
    }
}

/// One affine map per cell (in [`DataGrid::cells`] order), with per-cell
/// orientation chosen by `orientation`.
pub fn build_domain_maps<F>(grid: &DataGrid, orientation: F) -> Result<Vec<DomainMap>>
where
    F: Fn(CellIndex) -> (Orientation, Orientation),
{
    let (xr, yr) = (grid.x_range(), grid.y_range());
    grid.cells()
        .map(|cell| {
            let (ox, oy) = orientation(cell);
            let x_image = grid.x_interval(cell.i);
            let y_image = grid.y_interval(cell.j);
            if x_image.1 <= x_image.0 || y_image.1 <= y_image.0 {
                return Err(Error::InvalidGrid(format!("cell {cell} is degenerate")));
            }
            let map = DomainMap {
                x_map: AxisMap::between(xr, x_image, ox),
                y_map: AxisMap::between(yr, y_image, oy),
                cell,
                x_image,
                y_image,
            };
            if map.factor() >= 1.0 {
                return Err(Error::NotContraction {
                    cell,
                    factor: map.factor(),
                });
            }
            Ok(map)
        })
        .collect()
}

/// Order-preserving maps for every cell.
pub fn default_domain_maps(grid: &DataGrid) -> Result<Vec<DomainMap>> {
    build_domain_maps(grid, |_| (Orientation::Preserving, Orientation::Preserving))
}

fn locate_axis(knots: &[f64], t: f64) -> usize {
    let below = knots[1..].partition_point(|&k| k < t);
    (below + 1).min(knots.len() - 1)
}

/// Cell whose closed rectangle holds the point; shared edges go to the
/// lower index.
pub fn locate_cell(grid: &DataGrid, x: f64, y: f64) -> Result<CellIndex> {
    if !grid.contains(x, y) || x.is_nan() || y.is_nan() {
        return Err(Error::OutOfDomain { x, y });
    }
    Ok(CellIndex {
        i: locate_axis(grid.x_knots(), x),
        j: locate_axis(grid.y_knots(), y),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn example2_grid() -> DataGrid {
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

    #[test]
    fn rejects_bad_knots_and_shapes() {
        assert!(matches!(
            DataGrid::new(vec![0.0, 0.0], vec![0.0, 1.0], vec![vec![0.0; 2]; 2]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            DataGrid::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![vec![0.0; 3]; 2]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            DataGrid::new(vec![0.0], vec![0.0, 1.0], vec![vec![0.0; 2]]),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn example2_axis_maps() {
        let grid = example2_grid();
        let maps = default_domain_maps(&grid).unwrap();
        let l11 = &maps[grid.cell_slot(CellIndex::new(1, 1))];
        let l21 = &maps[grid.cell_slot(CellIndex::new(2, 1))];
        // L_{x_1}(x) = x/4, L_{x_2}(x) = x/4 + 1/4, L_{y_1}(y) = y/3
        assert_eq!((l11.x_map.slope, l11.x_map.offset), (0.25, 0.0));
        assert_eq!((l21.x_map.slope, l21.x_map.offset), (0.25, 0.25));
        assert!((l11.y_map.slope - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(l11.y_map.offset, 0.0);
    }

    #[test]
    fn single_cell_is_not_a_contraction() {
        let grid = DataGrid::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![vec![0.0; 2]; 2]).unwrap();
        assert!(matches!(
            default_domain_maps(&grid),
            Err(Error::NotContraction { .. })
        ));
    }

    #[test]
    fn uniform_bisection() {
        let grid = DataGrid::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.5, 1.0],
            vec![vec![0.0; 3]; 3],
        )
        .unwrap();
        let maps = default_domain_maps(&grid).unwrap();
        assert_eq!(maps.len(), 4);
        for m in &maps {
            assert_eq!(m.x_map.slope, 0.5);
            assert_eq!(m.y_map.slope, 0.5);
            assert!([0.0, 0.5].contains(&m.x_map.offset));
            assert!([0.0, 0.5].contains(&m.y_map.offset));
        }
    }

    #[test]
    fn corners_map_to_corners_both_orientations() {
        let grid = example2_grid();
        for orient in [Orientation::Preserving, Orientation::Reversing] {
            let maps = build_domain_maps(&grid, |_| (orient, Orientation::Preserving)).unwrap();
            for map in &maps {
                let mut images: Vec<(f64, f64)> = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
                    .iter()
                    .map(|&(x, y)| map.apply(x, y))
                    .collect();
                images.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let (xa, xb) = map.x_image();
                let (ya, yb) = map.y_image();
                let expect = [(xa, ya), (xa, yb), (xb, ya), (xb, yb)];
                for (got, want) in images.iter().zip(expect.iter()) {
                    assert!((got.0 - want.0).abs() < 1e-15 && (got.1 - want.1).abs() < 1e-15);
                }
            }
        }
        let rev = build_domain_maps(&grid, |_| (Orientation::Reversing, Orientation::Preserving))
            .unwrap();
        assert_eq!(rev[0].apply(0.0, 0.0).0, 0.25);
    }

    #[test]
    fn locate_examples() {
        let grid = example2_grid();
        assert_eq!(locate_cell(&grid, 0.3, 0.5).unwrap(), CellIndex::new(2, 2));
        assert_eq!(locate_cell(&grid, 0.0, 0.0).unwrap(), CellIndex::new(1, 1));
        assert_eq!(locate_cell(&grid, 1.0, 1.0).unwrap(), CellIndex::new(4, 3));
        // shared edges resolve to the lower index
        assert_eq!(
            locate_cell(&grid, 0.25, 1.0 / 3.0).unwrap(),
            CellIndex::new(1, 1)
        );
        assert!(matches!(
            locate_cell(&grid, 1.5, 0.0),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn invert_examples() {
        let grid = example2_grid();
        let maps = default_domain_maps(&grid).unwrap();
        let l21 = &maps[grid.cell_slot(CellIndex::new(2, 1))];
        let (x, y) = l21.invert(0.375, 1.0 / 6.0).unwrap();
        assert!((x - 0.5).abs() < 1e-15 && (y - 0.5).abs() < 1e-15);
        let corner = l21.apply(0.0, 0.0);
        assert_eq!(l21.invert(corner.0, corner.1).unwrap(), (0.0, 0.0));
        assert!(l21.invert(0.9, 0.1).is_err());
    }

    #[test]
    fn invert_round_trip_and_locate() {
        let grid = example2_grid();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for orient in [Orientation::Preserving, Orientation::Reversing] {
            let maps = build_domain_maps(&grid, |c| {
                if (c.i + c.j) % 2 == 0 {
                    (orient, orient)
                } else {
                    (Orientation::Preserving, orient)
                }
            })
            .unwrap();
            for map in &maps {
                let mut worst: f64 = 0.0;
                for _ in 0..1000 {
                    let (x, y) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                    let (u, v) = map.apply(x, y);
                    let (bx, by) = map.invert(u, v).unwrap();
                    worst = worst.max((bx - x).abs()).max((by - y).abs());
                    if x > 1e-9 && x < 1.0 - 1e-9 && y > 1e-9 && y < 1.0 - 1e-9 {
                        assert_eq!(locate_cell(&grid, u, v).unwrap(), map.cell);
                    }
                }
                assert!(worst < 1e-12, "round trip error {worst}");
            }
        }
    }
}
