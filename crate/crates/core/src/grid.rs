//! Uniform periodic lattice on the box [−X, X)^dim and scalar fields on it.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("dim must be 1 or 2, got {0}")]
    Dim(usize),
    #[error("n must be a power of two >= 16, got {0}")]
    Points(usize),
    #[error("half_length must be > 0, got {0}")]
    HalfLength(f64),
    #[error("bump radius {rho} must be < X/4 = {limit}")]
    BumpTooWide { rho: f64, limit: f64 },
    #[error("initial data parameter {0} must be >= 0")]
    Negative(&'static str),
    #[error(
        "front undefined: field not even about the origin (asymmetry {asymmetry:e}, sup {sup:e})"
    )]
    FrontUndefined { asymmetry: f64, sup: f64 },
    #[error("field has {got} values, grid needs {expected}")]
    Length { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_length: f64) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::Dim(dim));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(GridError::Points(n));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(GridError::HalfLength(half_length));
        }
        Ok(Grid {
            dim,
            n,
            half_length,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    /// Total number of lattice points, n^dim.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same box with twice the points per axis.
    pub fn refined(&self) -> Self {
        Grid {
            n: self.n * 2,
            ..*self
        }
    }

    /// Coordinate of index `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dx()
    }

    /// Per-axis indices of a flat row-major index.
    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    /// Flat index of the point reflected through the origin.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.n;
        let m = |i: usize| (n - i) % n;
        if self.dim == 1 {
            m(idx)
        } else {
            let [i, j] = self.unflatten(idx);
            m(i) * n + m(j)
        }
    }

    /// Euclidean norm of the lattice point with flat index `idx`.
    #[inline]
    pub fn radius(&self, idx: usize) -> f64 {
        let [i, j] = self.unflatten(idx);
        if self.dim == 1 {
            self.coord(i).abs()
        } else {
            self.coord(i).hypot(self.coord(j))
        }
    }

    /// Sup-norm (max over axes of |x_k|) of the lattice point; used for the boundary strip.
    #[inline]
    pub fn box_distance(&self, idx: usize) -> f64 {
        let [i, j] = self.unflatten(idx);
        if self.dim == 1 {
            self.coord(i).abs()
        } else {
            self.coord(i).abs().max(self.coord(j).abs())
        }
    }

    /// Point coordinates (second entry is 0 in 1D).
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.unflatten(idx);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub sup: f64,
    pub inf: f64,
    /// dx^dim · Σ|values|
    pub l1_scaled: f64,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Length {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Field { grid, values })
    }

    /// Samples `f(x)` at every lattice point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn values_mut_vec(&mut self) -> &mut Vec<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn norms(&self) -> Norms {
        let cell = self.grid.dx().powi(self.grid.dim() as i32);
        Norms {
            sup: self.sup(),
            inf: self.inf(),
            l1_scaled: cell * self.values.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// max |f(x) − f(−x)| over the lattice.
    pub fn asymmetry(&self) -> f64 {
        (0..self.values.len())
            .map(|i| (self.values[i] - self.values[self.grid.mirror(i)]).abs())
            .fold(0.0, f64::max)
    }

    /// Outermost lattice radius at which the field reaches `threshold`.
    pub fn front_radius(&self, threshold: f64) -> Result<f64, GridError> {
        front_radius(self, threshold)
    }
}

pub fn norms(f: &Field) -> Norms {
    f.norms()
}

pub const FRONT_SYMMETRY_TOL: f64 = 1e-6;

pub fn front_radius(f: &Field, threshold: f64) -> Result<f64, GridError> {
    let sup = f.sup();
    if !(sup >= threshold) {
        return Ok(0.0);
    }
    let asymmetry = f.asymmetry();
    if asymmetry >= FRONT_SYMMETRY_TOL * sup.abs() {
        return Err(GridError::FrontUndefined { asymmetry, sup });
    }
    Ok(f.values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= threshold)
        .map(|(i, _)| f.grid.radius(i))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpec {
    Constant {
        h: f64,
    },
    /// `h_min + h·cos²(π|x − center|/(2ρ))` inside the bump, `h_min` elsewhere.
    FloorBump {
        h_min: f64,
        h: f64,
        rho: f64,
        center: [f64; 2],
    },
    /// `h·cos²(π|x|/(2ρ))` for |x| ≤ ρ, exactly 0 outside.
    CompactBump {
        h: f64,
        rho: f64,
    },
}

/// cos² bump of unit height and radius `rho`; exactly zero for r ≥ rho.
#[inline]
pub fn cos2_bump(r: f64, rho: f64) -> f64 {
    if r >= rho {
        0.0
    } else {
        let c = (PI * r / (2.0 * rho)).cos();
        c * c
    }
}

pub fn make_initial(grid: Grid, spec: InitialSpec) -> Result<Field, GridError> {
    let limit = grid.half_length() / 4.0;
    match spec {
        InitialSpec::Constant { h } => {
            if !(h >= 0.0) {
                return Err(GridError::Negative("h"));
            }
            Ok(Field::constant(grid, h))
        }
        InitialSpec::FloorBump {
            h_min,
            h,
            rho,
            center,
        } => {
            if !(h_min > 0.0) {
                return Err(GridError::Negative("h_min"));
            }
            if !(h >= 0.0) {
                return Err(GridError::Negative("h"));
            }
            if !(rho > 0.0 && rho < limit) {
                return Err(GridError::BumpTooWide { rho, limit });
            }
            Ok(Field::from_fn(grid, |x| {
                let r = (x[0] - center[0]).hypot(x[1] - center[1]);
                h_min + h * cos2_bump(r, rho)
            }))
        }
        InitialSpec::CompactBump { h, rho } => {
            if !(h >= 0.0) {
                return Err(GridError::Negative("h"));
            }
            if !(rho > 0.0 && rho < limit) {
                return Err(GridError::BumpTooWide { rho, limit });
            }
            Ok(Field::from_fn(grid, |x| {
                h * cos2_bump(x[0].hypot(x[1]), rho)
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize, x: f64) -> Grid {
        Grid::new(1, n, x).unwrap()
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert_eq!(Grid::new(1, 24, 1.0), Err(GridError::Points(24)));
        assert_eq!(Grid::new(1, 8, 1.0), Err(GridError::Points(8)));
        assert_eq!(Grid::new(3, 16, 1.0), Err(GridError::Dim(3)));
        assert!(Grid::new(2, 16, 0.0).is_err());
    }

    #[test]
    fn mirror_is_reflection() {
        let g = Grid::new(2, 16, 4.0).unwrap();
        for idx in 0..g.len() {
            let p = g.point(idx);
            let q = g.point(g.mirror(idx));
            // −X maps onto itself through periodicity
            for k in 0..2 {
                let s = p[k] + q[k];
                assert!(s.abs() < 1e-12 || (p[k] + 4.0).abs() < 1e-12, "{p:?} {q:?}");
            }
        }
    }

    #[test]
    fn constant_initial_data() {
        let g = grid1(64, 10.0);
        let f = make_initial(g, InitialSpec::Constant { h: 1.0 }).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn compact_bump_values() {
        // dx = 0.5 puts lattice points at |x| = 0, 2.5, 5
        let g = grid1(128, 32.0);
        let f = make_initial(g, InitialSpec::CompactBump { h: 1.0, rho: 5.0 }).unwrap();
        let at = |x: f64| f.values()[((x + 32.0) / g.dx()).round() as usize];
        assert_eq!(at(0.0), 1.0);
        assert_eq!(at(5.0), 0.0);
        assert_eq!(at(-5.0), 0.0);
        assert!((at(2.5) - 0.5).abs() < 1e-15);
        for i in 0..g.len() {
            if g.radius(i) > 5.0 {
                assert_eq!(f.values()[i].to_bits(), 0.0f64.to_bits());
            }
        }
    }

    #[test]
    fn wide_bump_rejected() {
        let g = grid1(64, 16.0);
        assert!(matches!(
            make_initial(g, InitialSpec::CompactBump { h: 1.0, rho: 4.0 }),
            Err(GridError::BumpTooWide { .. })
        ));
    }

    #[test]
    fn norms_examples() {
        let g = grid1(64, 5.0);
        let n = Field::constant(g, 1.0).norms();
        assert_eq!((n.sup, n.inf), (1.0, 1.0));
        assert!((n.l1_scaled - 10.0).abs() < 1e-12);

        let g2 = Grid::new(2, 32, 5.0).unwrap();
        assert!((Field::constant(g2, 1.0).norms().l1_scaled - 100.0).abs() < 1e-10);

        let g = grid1(64, 32.0);
        let f = make_initial(g, InitialSpec::CompactBump { h: 2.0, rho: 5.0 }).unwrap();
        let n = f.norms();
        assert_eq!((n.sup, n.inf), (2.0, 0.0));

        let g = grid1(16, 8.0);
        let mut f = Field::zeros(g);
        f.values_mut()[3] = 3.0;
        assert_eq!(f.norms().l1_scaled, 3.0);
    }

    #[test]
    fn front_radius_examples() {
        let g = grid1(256, 32.0);
        let f = make_initial(g, InitialSpec::CompactBump { h: 1.0, rho: 5.0 }).unwrap();
        let r = front_radius(&f, 0.5).unwrap();
        assert!((r - 2.5).abs() <= g.dx(), "{r}");

        let f = Field::constant(g, 1.0);
        assert_eq!(front_radius(&f, 0.5).unwrap(), 32.0);

        assert_eq!(front_radius(&Field::zeros(g), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn front_radius_rejects_asymmetric_field() {
        let g = grid1(64, 16.0);
        let mut f = make_initial(g, InitialSpec::CompactBump { h: 1.0, rho: 3.0 }).unwrap();
        f.values_mut()[30] += 0.1;
        assert!(matches!(
            front_radius(&f, 0.5),
            Err(GridError::FrontUndefined { .. })
        ));
    }

    #[test]
    fn front_radius_monotone_in_threshold() {
        let g = Grid::new(2, 32, 16.0).unwrap();
        let f = make_initial(g, InitialSpec::CompactBump { h: 1.0, rho: 3.5 }).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let r = front_radius(&f, k as f64 / 20.0).unwrap();
            assert!(r <= last);
            last = r;
        }
    }
}
