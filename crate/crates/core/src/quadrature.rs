//! Deterministic trapezoidal quadrature and finite-difference stencils on
//! uniform grids.
//!
//! Every sum runs strictly left to right so that repeated evaluations are
//! bitwise reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform one-dimensional grid `x_i = x0 + i * dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x0: f64,
    dx: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !x0.is_finite() || !dx.is_finite() || dx <= 0.0 {
            return Err(Error::Domain(format!(
                "grid needs finite x0 and dx > 0 (x0 = {x0}, dx = {dx})"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        Ok(Self { x0, dx, n })
    }

    /// Grid with `n` points spanning `[start, end]` inclusive.
    pub fn spanning(start: f64, end: f64, n: usize) -> Result<Self> {
        if !(end > start) {
            return Err(Error::Domain(format!("empty interval [{start}, {end}]")));
        }
        if n < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        Self::new(start, (end - start) / (n - 1) as f64, n)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a grid holds at least two points.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Shape(format!(
                "expected {} values on the grid, got {len}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Trapezoidal integral of `values` sampled on `grid`.
pub fn trapz(values: &[f64], grid: &Grid1D) -> Result<f64> {
    grid.check_len(values.len())?;
    Ok(trapz_uniform(values, grid.dx))
}

/// Trapezoidal rule for samples with uniform spacing `dx`. Callers guarantee
/// `values.len() >= 2`.
pub(crate) fn trapz_uniform(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    let mut interior = 0.0;
    for v in &values[1..n - 1] {
        interior += v;
    }
    dx * (0.5 * (values[0] + values[n - 1]) + interior)
}

/// Per-node trapezoid weights: `dx/2` at the ends, `dx` inside.
pub fn trapz_weights(n: usize, dx: f64) -> Vec<f64> {
    let mut w = vec![dx; n];
    if let Some(first) = w.first_mut() {
        *first = 0.5 * dx;
    }
    if let Some(last) = w.last_mut() {
        *last = 0.5 * dx;
    }
    w
}

/// Running trapezoidal integral; element `i` is the integral over `[x_0, x_i]`.
pub fn cumulative_trapz(values: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    grid.check_len(values.len())?;
    let half = 0.5 * grid.dx;
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(acc);
    for pair in values.windows(2) {
        acc += half * (pair[0] + pair[1]);
        out.push(acc);
    }
    Ok(out)
}

/// Trapezoidal inner product `∫ a b` on a shared grid.
pub fn trapz_product(a: &[f64], b: &[f64], grid: &Grid1D) -> Result<f64> {
    grid.check_len(a.len())?;
    grid.check_len(b.len())?;
    let n = a.len();
    let mut interior = 0.0;
    for i in 1..n - 1 {
        interior += a[i] * b[i];
    }
    Ok(grid.dx * (0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]) + interior))
}

/// Derivative order supported by [`central_diff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    First,
    Second,
}

impl DiffOrder {
    pub fn as_usize(self) -> usize {
        match self {
            DiffOrder::First => 1,
            DiffOrder::Second => 2,
        }
    }
}

/// Second-order accurate finite differences: central in the interior,
/// one-sided three/four-point stencils at the two ends.
pub fn central_diff(values: &[f64], dx: f64, order: DiffOrder) -> Result<Vec<f64>> {
    let n = values.len();
    if n < order.as_usize() + 2 {
        return Err(Error::Shape(format!(
            "order-{} stencil needs at least {} values, got {n}",
            order.as_usize(),
            order.as_usize() + 2
        )));
    }
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::Domain(format!(
            "finite difference step must be > 0, got {dx}"
        )));
    }
    let v = values;
    let mut out = vec![0.0; n];
    match order {
        DiffOrder::First => {
            let inv = 1.0 / (2.0 * dx);
            out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv;
            for i in 1..n - 1 {
                out[i] = (v[i + 1] - v[i - 1]) * inv;
            }
            out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) * inv;
        }
        DiffOrder::Second => {
            let inv = 1.0 / (dx * dx);
            out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) * inv;
            for i in 1..n - 1 {
                out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv;
            }
            out[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) * inv;
        }
    }
    Ok(out)
}
