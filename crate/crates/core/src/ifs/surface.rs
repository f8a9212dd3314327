use crate::grid::DataGrid;

/// Dense approximation of the attractor surface on an `R×R` lattice over
/// the domain, row-major with row 0 at `y_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    resolution: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
    heights: Vec<f64>,
    /// Number of applications of the operator.
    pub iterations: usize,
    /// A-posteriori sup-norm distance to the fixed point of the sampled operator.
    pub error_bound: f64,
    /// Sup-norm differences between successive iterates.
    pub history: Vec<f64>,
    /// Contraction factor used for the bound.
    pub contraction: f64,
}

impl SurfaceSample {
    pub fn new(
        resolution: usize,
        x_range: (f64, f64),
        y_range: (f64, f64),
        heights: Vec<f64>,
    ) -> Self {
        assert_eq!(heights.len(), resolution * resolution);
        Self {
            resolution,
            x_range,
            y_range,
            heights,
            iterations: 0,
            error_bound: 0.0,
            history: Vec::new(),
            contraction: 0.0,
        }
    }

    /// Samples `f` on the lattice of `grid`'s domain.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: &DataGrid, resolution: usize, f: F) -> Self {
        let mut s = Self::new(
            resolution,
            grid.x_range(),
            grid.y_range(),
            vec![0.0; resolution * resolution],
        );
        for b in 0..resolution {
            for a in 0..resolution {
                let (x, y) = s.node(a, b);
                s.heights[b * resolution + a] = f(x, y);
            }
        }
        s
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.y_range
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn height(&self, a: usize, b: usize) -> f64 {
        self.heights[b * self.resolution + a]
    }

    pub fn spacing(&self) -> (f64, f64) {
        let r = (self.resolution - 1) as f64;
        (
            (self.x_range.1 - self.x_range.0) / r,
            (self.y_range.1 - self.y_range.0) / r,
        )
    }

    /// Coordinates of lattice node `(a, b)`; the last node hits the far
    /// edge exactly.
    pub fn node(&self, a: usize, b: usize) -> (f64, f64) {
        (
            lattice_coord(self.x_range, self.resolution, a),
            lattice_coord(self.y_range, self.resolution, b),
        )
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.heights
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    fn locate(&self, x: f64, y: f64) -> (usize, f64, usize, f64) {
        let (hx, hy) = self.spacing();
        let (a, u) = axis_cell((x - self.x_range.0) / hx, self.resolution);
        let (b, v) = axis_cell((y - self.y_range.0) / hy, self.resolution);
        (a, u, b, v)
    }

    /// Bilinear interpolation of the lattice values (clamped to the domain).
    pub fn eval_bilinear(&self, x: f64, y: f64) -> f64 {
        let (a, u, b, v) = self.locate(x, y);
        let h = |a, b| self.height(a, b);
        (1.0 - v) * ((1.0 - u) * h(a, b) + u * h(a + 1, b))
            + v * ((1.0 - u) * h(a, b + 1) + u * h(a + 1, b + 1))
    }

    /// Max minus min of the four lattice values around `(x, y)`; the local
    /// slack used when comparing interpolated values with exact ones.
    pub fn quad_oscillation(&self, x: f64, y: f64) -> f64 {
        let (a, _, b, _) = self.locate(x, y);
        let vals = [
            self.height(a, b),
            self.height(a + 1, b),
            self.height(a, b + 1),
            self.height(a + 1, b + 1),
        ];
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Max minus min of the lattice values on the quad around `(x, y)` and
    /// its ring of neighbouring nodes (up to 4×4 values). The surface can
    /// leave the range of the four corners inside a quad, so this is the
    /// slack used where an exact value is compared with an interpolated one.
    pub fn ring_oscillation(&self, x: f64, y: f64) -> f64 {
        let (a, _, b, _) = self.locate(x, y);
        let r = self.resolution;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for bb in b.saturating_sub(1)..=(b + 2).min(r - 1) {
            for aa in a.saturating_sub(1)..=(a + 2).min(r - 1) {
                let v = self.height(aa, bb);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        hi - lo
    }

    /// Largest [`SurfaceSample::quad_oscillation`] over the lattice.
    pub fn max_quad_oscillation(&self) -> f64 {
        let r = self.resolution;
        let mut worst: f64 = 0.0;
        for b in 0..r - 1 {
            for a in 0..r - 1 {
                let vals = [
                    self.height(a, b),
                    self.height(a + 1, b),
                    self.height(a, b + 1),
                    self.height(a + 1, b + 1),
                ];
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                worst = worst.max(hi - lo);
            }
        }
        worst
    }
}

pub(crate) fn lattice_coord(range: (f64, f64), resolution: usize, k: usize) -> f64 {
    if k + 1 == resolution {
        range.1
    } else {
        range.0 + (range.1 - range.0) * k as f64 / (resolution - 1) as f64
    }
}

/// Splits a fractional lattice position into `(lower index, weight)`,
/// snapping to nodes within 1e-9.
pub(crate) fn axis_cell(pos: f64, resolution: usize) -> (usize, f64) {
    let last = (resolution - 1) as f64;
    let pos = pos.clamp(0.0, last);
    let nearest = pos.round();
    if (pos - nearest).abs() < 1e-9 {
        let k = nearest as usize;
        if k == resolution - 1 {
            (k - 1, 1.0)
        } else {
            (k, 0.0)
        }
    } else {
        let k = (pos.floor() as usize).min(resolution - 2);
        (k, pos - k as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_bilinear_functions() {
        let grid = DataGrid::new(vec![0.0, 2.0], vec![-1.0, 1.0], vec![vec![0.0; 2]; 2]).unwrap();
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - 3.0 * y + 0.5 * x * y;
        let s = SurfaceSample::from_fn(&grid, 9, f);
        for &(x, y) in &[(0.0, -1.0), (2.0, 1.0), (0.33, 0.1), (1.99, -0.77)] {
            assert!((s.eval_bilinear(x, y) - f(x, y)).abs() < 1e-12);
        }
        assert_eq!(s.node(8, 8), (2.0, 1.0));
        assert!((s.quad_oscillation(0.1, 0.1) - s.max_quad_oscillation()).abs() < 1.0);
    }

    #[test]
    fn axis_cell_snaps() {
        assert_eq!(axis_cell(3.0 + 1e-12, 10), (3, 0.0));
        assert_eq!(axis_cell(9.0, 10), (8, 1.0));
        let (k, w) = axis_cell(2.25, 10);
        assert_eq!(k, 2);
        assert!((w - 0.25).abs() < 1e-15);
    }
}
