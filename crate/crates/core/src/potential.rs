use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::BoundaryData;

/// Uniform grid `x_i = x0 + i dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::invalid("dx", "grid spacing must be positive"));
        }
        if n < 2 {
            return Err(Error::invalid("n", "grid needs at least two points"));
        }
        if !x0.is_finite() {
            return Err(Error::invalid("x0", "grid origin must be finite"));
        }
        Ok(Self { x0, dx, n })
    }

    /// `[-half_width, half_width]` split into `intervals` equal steps.
    pub fn symmetric(half_width: f64, intervals: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::invalid("half_width", "must be positive"));
        }
        Self::new(-half_width, 2.0 * half_width / intervals as f64, intervals + 1)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn end(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Index of the grid point closest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.x0) / self.dx).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// Complex potential sampled on a uniform grid at a fixed time.
///
/// Values at the cell midpoints are kept alongside the nodes so that the
/// fourth-order integrators never have to guess the field between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    grid: UniformGrid,
    u: Vec<Complex64>,
    u_mid: Vec<Complex64>,
    boundary: BoundaryData,
    time: f64,
}

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-6;

impl PotentialField {
    /// Samples `f` at the nodes and the exact midpoints.
    pub fn from_fn(
        grid: UniformGrid,
        boundary: BoundaryData,
        time: f64,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let u: Vec<_> = grid.points().map(&f).collect();
        let u_mid = (0..grid.n - 1).map(|i| f(grid.x(i) + 0.5 * grid.dx)).collect();
        let field = Self { grid, u, u_mid, boundary, time };
        field.check_boundary(DEFAULT_BOUNDARY_TOL * boundary.rho())?;
        Ok(field)
    }

    /// Tabulated samples; midpoints come from four-point Lagrange interpolation.
    pub fn from_samples(
        grid: UniformGrid,
        u: Vec<Complex64>,
        boundary: BoundaryData,
        time: f64,
    ) -> Result<Self> {
        Self::from_samples_with_tol(grid, u, boundary, time, DEFAULT_BOUNDARY_TOL * boundary.rho())
    }

    pub fn from_samples_with_tol(
        grid: UniformGrid,
        u: Vec<Complex64>,
        boundary: BoundaryData,
        time: f64,
        tol: f64,
    ) -> Result<Self> {
        if u.len() != grid.n {
            return Err(Error::GridMismatch { expected: grid.n, found: u.len() });
        }
        if u.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("u", "potential samples must be finite"));
        }
        let u_mid = midpoints(&u);
        let field = Self { grid, u, u_mid, boundary, time };
        field.check_boundary(tol)?;
        Ok(field)
    }

    /// Re-checks the edges against the plane-wave limits.
    pub fn check_boundary(&self, tol: f64) -> Result<()> {
        let left = (self.u[0] - self.boundary.left_limit(self.time)).norm();
        if left > tol {
            return Err(Error::BoundaryMismatch { side: "left", deviation: left, tolerance: tol });
        }
        let right = (self.u[self.grid.n - 1] - self.boundary.right_limit(self.time)).norm();
        if right > tol {
            return Err(Error::BoundaryMismatch { side: "right", deviation: right, tolerance: tol });
        }
        Ok(())
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.u
    }

    pub fn midpoint_values(&self) -> &[Complex64] {
        &self.u_mid
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    pub fn time(&self) -> f64 {
        self.time
    }
}

fn midpoints(u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    if n == 2 {
        return vec![(u[0] + u[1]) * 0.5];
    }
    if n == 3 {
        // quadratic through all three nodes
        return vec![
            (u[0] * 3.0 + u[1] * 6.0 - u[2]) / 8.0,
            (-u[0] + u[1] * 6.0 + u[2] * 3.0) / 8.0,
        ];
    }
    (0..n - 1)
        .map(|i| {
            if i == 0 {
                (u[0] * 5.0 + u[1] * 15.0 - u[2] * 5.0 + u[3]) / 16.0
            } else if i == n - 2 {
                (u[n - 1] * 5.0 + u[n - 2] * 15.0 - u[n - 3] * 5.0 + u[n - 4]) / 16.0
            } else {
                (-u[i - 1] + u[i] * 9.0 + u[i + 1] * 9.0 - u[i + 2]) / 16.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_midpoints_are_exact() {
        let f = |x: f64| Complex64::new(x * x * x - 2.0 * x, 0.5 * x * x + 1.0);
        let grid = UniformGrid::new(-1.0, 0.25, 9).unwrap();
        let u: Vec<_> = grid.points().map(f).collect();
        let mid = midpoints(&u);
        for (i, m) in mid.iter().enumerate() {
            let exact = f(grid.x(i) + 0.125);
            assert!((m - exact).norm() < 1e-13, "i={i}");
        }
    }

    #[test]
    fn boundary_check_flags_wrong_limits() {
        let b = BoundaryData::new(1.0, 0.0, 0.5).unwrap();
        let grid = UniformGrid::symmetric(10.0, 100).unwrap();
        let err = PotentialField::from_fn(grid, b, 0.0, |_| Complex64::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::BoundaryMismatch { side: "right", .. }));
        let ok = PotentialField::from_fn(grid, b, 0.0, |x| {
            if x < 0.0 { b.left_limit(0.0) } else { b.right_limit(0.0) }
        });
        assert!(ok.is_ok());
    }

    #[test]
    fn nearest_index_clamps() {
        let g = UniformGrid::symmetric(4.0, 8).unwrap();
        assert_eq!(g.nearest(0.0), 4);
        assert_eq!(g.nearest(-100.0), 0);
        assert_eq!(g.nearest(100.0), 8);
        assert_eq!(g.nearest(1.4), 5);
    }
}
