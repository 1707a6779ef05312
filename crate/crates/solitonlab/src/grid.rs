//! Uniform radial grid and the discrete differential operators.
//!
//! The grid covers [0, R] with nodes r_i = i·dr. Three stencils live here:
//!
//! - [`centered_d1`], [`centered_d2`] — plain centered first/second differences,
//! - [`natural_radial_operator`] — the divergence-form discretization of
//!   L = r⁻⁵ ∂ᵣ (r⁵ ∂ᵣ ·), which is what keeps the evolution stable near the
//!   origin. Model right-hand sides must use it instead of assembling
//!   d² + 5·d¹/r from the centered stencils.
//!
//! All stencils are defined on interior nodes only (1 ≤ i ≤ n−2); the two end
//! nodes are written exclusively by the boundary rules in the stepper.

use thiserror::Error;

/// Relative tolerance for deciding whether r_max/dr is an integer.
const COMMENSURATE_RTOL: f64 = 1e-9;

/// Errors from grid construction and stencil application.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("r_max/dr = {ratio} is not an integer; grid must end exactly at r_max")]
    NotCommensurate { ratio: f64 },
    #[error("index {index} is outside the interior stencil range 1..={max_interior}")]
    OutOfStencil { index: usize, max_interior: usize },
    #[error("field has {actual} values but grid has {expected} nodes")]
    LengthMismatch { expected: usize, actual: usize },
}

/// Uniform mesh r_i = i·dr on [0, r_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    dr: f64,
    n_points: usize,
}

impl RadialGrid {
    /// Build a grid over [0, r_max] with spacing dr. Fails if either length is
    /// non-positive or r_max is not a whole number of steps.
    pub fn new(r_max: f64, dr: f64) -> Result<Self, GridError> {
        if !(r_max > 0.0) {
            return Err(GridError::NonPositive {
                name: "r_max",
                value: r_max,
            });
        }
        if !(dr > 0.0) {
            return Err(GridError::NonPositive {
                name: "dr",
                value: dr,
            });
        }
        let ratio = r_max / dr;
        let rounded = ratio.round();
        if rounded < 1.0 || (ratio - rounded).abs() > COMMENSURATE_RTOL * ratio {
            return Err(GridError::NotCommensurate { ratio });
        }
        Ok(Self {
            r_max,
            dr,
            n_points: rounded as usize + 1,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Radius of node i.
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    /// All node radii, in order.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.r(i)).collect()
    }
}

/// One time level of the field: f(r_i) for every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    /// Wrap a value vector; its length must match the grid.
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.n_points() {
            return Err(GridError::LengthMismatch {
                expected: grid.n_points(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Field with the same value at every node.
    pub fn constant(grid: RadialGrid, value: f64) -> Self {
        Self {
            values: vec![value; grid.n_points()],
            grid,
        }
    }

    /// Field sampled from a function of radius.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: (0..grid.n_points()).map(|i| f(grid.r(i))).collect(),
            grid,
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_interior(field: &RadialField, i: usize) -> Result<(), GridError> {
    let n = field.len();
    if i == 0 || i + 1 >= n {
        return Err(GridError::OutOfStencil {
            index: i,
            max_interior: n.saturating_sub(2),
        });
    }
    Ok(())
}

/// Centered first difference (f_{i+1} − f_{i−1}) / (2·dr); interior nodes only.
pub fn centered_d1(field: &RadialField, i: usize) -> Result<f64, GridError> {
    check_interior(field, i)?;
    let v = field.values();
    Ok((v[i + 1] - v[i - 1]) / (2.0 * field.grid().dr()))
}

/// Centered second difference (f_{i+1} + f_{i−1} − 2f_i) / dr²; interior nodes only.
pub fn centered_d2(field: &RadialField, i: usize) -> Result<f64, GridError> {
    check_interior(field, i)?;
    let v = field.values();
    let dr = field.grid().dr();
    Ok((v[i + 1] + v[i - 1] - 2.0 * v[i]) / (dr * dr))
}

/// Divergence-form discretization of L = r⁻⁵ ∂ᵣ (r⁵ ∂ᵣ f) at interior node i:
///
/// ```text
/// (Lf)_i = [ (r_i + δ/2)⁵ (f_{i+1} − f_i) − (r_i − δ/2)⁵ (f_i − f_{i−1}) ] / (δ² r_i⁵)
/// ```
///
/// This agrees with f'' + 5 f'/r to second order but, unlike the centered
/// assembly of that sum, is self-adjoint under the discrete measure r_i⁵·dr,
/// so the linearized evolution has a real negative spectrum. Node 0 is
/// excluded (r = 0 divides by zero there).
pub fn natural_radial_operator(field: &RadialField, i: usize) -> Result<f64, GridError> {
    check_interior(field, i)?;
    let v = field.values();
    let dr = field.grid().dr();
    let r = field.grid().r(i);
    let w_plus = (r + 0.5 * dr).powi(5);
    let w_minus = (r - 0.5 * dr).powi(5);
    Ok((w_plus * (v[i + 1] - v[i]) - w_minus * (v[i] - v[i - 1])) / (dr * dr * r.powi(5)))
}
