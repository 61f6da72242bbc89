//! Square-root embedding of densities into the unit sphere of L², and the
//! closed-form geometry of that sphere: inner product, great-circle
//! distance, exponential and logarithm maps.
//!
//! Under `p ↦ √p` the Fisher–Rao metric becomes (a multiple of) the flat L²
//! inner product restricted to the sphere, so geodesics are great circles:
//!
//! ```text
//! d(ψ₀, ψ₁)     = arccos ⟨ψ₀, ψ₁⟩
//! exp_ψ(v)      = cos‖v‖ ψ + sin‖v‖ v/‖v‖
//! log_ψ₀(ψ₁)    = d / sin d · (ψ₁ − cos d · ψ₀)
//! ```
//!
//! All integrals use the trapezoidal rule on the shared sample grid.

use std::f64::consts::PI;

use crate::densities::GridDensity;
use crate::error::{Error, Result};
use crate::quadrature::{trapz, trapz_product, Grid1D};

pub const NORM_TOLERANCE: f64 = 1e-6;
pub const TANGENCY_TOLERANCE: f64 = 1e-8;

/// Distances below this use the projection branch of the log map.
pub const SMALL_DISTANCE: f64 = 1e-8;

/// Targets closer than this to the antipode are rejected by the log map.
pub const ANTIPODAL_MARGIN: f64 = 1e-6;

/// Largest L² mass of negative sphere values that may be clipped when a
/// sphere point is mapped back to a density.
pub const CLIP_TOLERANCE: f64 = 1e-6;

/// Anything sampled on a [`Grid1D`].
pub trait GridFunction {
    fn grid(&self) -> &Grid1D;
    fn values(&self) -> &[f64];
}

macro_rules! grid_function {
    ($t:ty) => {
        impl GridFunction for $t {
            fn grid(&self) -> &Grid1D {
                &self.grid
            }
            fn values(&self) -> &[f64] {
                &self.values
            }
        }
    };
}

/// `ψ = √p`: a non-negative unit vector of L².
#[derive(Debug, Clone, PartialEq)]
pub struct SphereDensity {
    grid: Grid1D,
    values: Vec<f64>,
}

/// A unit vector of L² of arbitrary sign, as produced by the exponential map.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    grid: Grid1D,
    values: Vec<f64>,
}

/// A perturbation direction orthogonal to the base point it was built at.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    grid: Grid1D,
    values: Vec<f64>,
}

grid_function!(SphereDensity);
grid_function!(SpherePoint);
grid_function!(TangentVector);

impl SphereDensity {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain(
                "square-root density samples must be finite and >= 0".into(),
            ));
        }
        let norm = trapz_product(&values, &values, &grid)?.sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!(
                "square-root density has norm {norm}, not 1"
            )));
        }
        Ok(Self { grid, values })
    }

    /// Squares back to a density.
    pub fn to_density(&self) -> Result<GridDensity> {
        GridDensity::normalized(self.grid, self.values.iter().map(|v| v * v).collect())
    }
}

impl SpherePoint {
    pub fn norm(&self) -> f64 {
        norm(self)
    }
}

impl From<SphereDensity> for SpherePoint {
    fn from(p: SphereDensity) -> Self {
        SpherePoint {
            grid: p.grid,
            values: p.values,
        }
    }
}

impl TangentVector {
    /// Wraps `values` as a tangent vector at `base`, rejecting anything not
    /// orthogonal to it.
    pub fn at(base: &SphereDensity, values: Vec<f64>) -> Result<Self> {
        let v = TangentVector {
            grid: base.grid,
            values,
        };
        check_tangent(base, &v)?;
        Ok(v)
    }

    /// Orthogonal projection of `values` onto the tangent space at `base`.
    pub fn project(base: &SphereDensity, values: Vec<f64>) -> Result<Self> {
        let c = trapz_product(&values, &base.values, &base.grid)?;
        let values = values
            .iter()
            .zip(&base.values)
            .map(|(v, b)| v - c * b)
            .collect();
        Ok(TangentVector {
            grid: base.grid,
            values,
        })
    }

    pub fn zero(base: &SphereDensity) -> Self {
        TangentVector {
            grid: base.grid,
            values: vec![0.0; base.values.len()],
        }
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn scaled(&self, k: f64) -> Self {
        TangentVector {
            grid: self.grid,
            values: self.values.iter().map(|v| k * v).collect(),
        }
    }
}

fn check_tangent(base: &SphereDensity, v: &TangentVector) -> Result<()> {
    let c = inner(base, v)?;
    let tol = TANGENCY_TOLERANCE * v.norm().max(1.0);
    if c.abs() >= tol {
        return Err(Error::Domain(format!(
            "vector is not tangent at the base point: <v, ψ> = {c:e}"
        )));
    }
    Ok(())
}

fn same_grid(a: &Grid1D, b: &Grid1D) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("grid mismatch: {a:?} vs {b:?}")));
    }
    Ok(())
}

fn norm<F: GridFunction>(f: &F) -> f64 {
    trapz_product(f.values(), f.values(), f.grid())
        .expect("grid and values agree")
        .sqrt()
}

/// Pointwise square root, rescaled to unit L² norm.
pub fn sqrt_embed(p: &GridDensity) -> Result<SphereDensity> {
    let grid = *p.grid();
    let mass = trapz(p.values(), &grid)?;
    if !(mass > 0.0) {
        return Err(Error::Domain(format!(
            "cannot embed a density of mass {mass}"
        )));
    }
    let scale = mass.sqrt();
    let values = p.values().iter().map(|v| v.sqrt() / scale).collect();
    Ok(SphereDensity { grid, values })
}

/// Trapezoidal L² inner product of two functions on the same grid.
pub fn inner<A: GridFunction, B: GridFunction>(a: &A, b: &B) -> Result<f64> {
    same_grid(a.grid(), b.grid())?;
    trapz_product(a.values(), b.values(), a.grid())
}

/// Great-circle distance, in `[0, π]`.
///
/// Equals `arccos ⟨a, b⟩` (clamped to `[-1, 1]`). For nearby points the
/// chord form `2 asin(‖a − b‖ / 2)` is used instead, which is exactly zero
/// for identical inputs and keeps full precision at small distances.
pub fn distance(a: &SphereDensity, b: &SphereDensity) -> Result<f64> {
    let c = inner(a, b)?.clamp(-1.0, 1.0);
    if c < 0.5 {
        return Ok(c.acos());
    }
    let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    let chord = trapz_product(&diff, &diff, &a.grid)?.sqrt();
    Ok(2.0 * (0.5 * chord).min(1.0).asin())
}

/// Point reached after following the geodesic from `base` with initial
/// velocity `v` for time `t`.
pub fn exp_map(base: &SphereDensity, v: &TangentVector, t: f64) -> Result<SpherePoint> {
    same_grid(&base.grid, &v.grid)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "geodesic time must be finite and >= 0, got {t}"
        )));
    }
    check_tangent(base, v)?;
    let len = t * v.norm();
    if len >= PI {
        return Err(Error::OutOfChart(format!(
            "geodesic length {len} reaches the antipode"
        )));
    }
    if len == 0.0 {
        return Ok(base.clone().into());
    }
    let (s, c) = len.sin_cos();
    let k = s * t / len;
    let values = base
        .values
        .iter()
        .zip(&v.values)
        .map(|(p, w)| c * p + k * w)
        .collect();
    Ok(SpherePoint {
        grid: base.grid,
        values,
    })
}

/// Initial velocity of the unit-time geodesic from `base` to `target`.
pub fn log_map(base: &SphereDensity, target: &SphereDensity) -> Result<TangentVector> {
    same_grid(&base.grid, &target.grid)?;
    let c = inner(base, target)?.clamp(-1.0, 1.0);
    let d = distance(base, target)?;
    if d >= PI - ANTIPODAL_MARGIN {
        return Err(Error::OutOfChart(format!(
            "target is (nearly) antipodal, d = {d}"
        )));
    }
    // c = cos d up to rounding; below SMALL_DISTANCE the projection branch
    // avoids 0/0.
    let k = if d < SMALL_DISTANCE { 1.0 } else { d / d.sin() };
    let values = target
        .values
        .iter()
        .zip(&base.values)
        .map(|(q, p)| k * (q - c * p))
        .collect();
    Ok(TangentVector {
        grid: base.grid,
        values,
    })
}

/// Density at time `t` on the geodesic `exp_base(t v)`, squared back into a
/// probability density. Negative sphere values are clipped to zero; more
/// than [`CLIP_TOLERANCE`] of clipped L² mass is an error.
pub fn geodesic_point(base: &SphereDensity, v: &TangentVector, t: f64) -> Result<GridDensity> {
    let point = exp_map(base, v, t)?;
    let clipped: Vec<f64> = point.values.iter().map(|x| x.min(0.0)).collect();
    let clipped_mass = trapz_product(&clipped, &clipped, &point.grid)?;
    if clipped_mass > CLIP_TOLERANCE {
        return Err(Error::OutOfChart(format!(
            "geodesic left the positive orthant at t = {t}: clipped mass {clipped_mass:e}"
        )));
    }
    let squared = point
        .values
        .iter()
        .map(|x| if *x > 0.0 { x * x } else { 0.0 })
        .collect();
    GridDensity::normalized(point.grid, squared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{discretize_on, FamilyParams, GridSpec};

    fn embed_all(models: &[FamilyParams]) -> Vec<SphereDensity> {
        let grid = GridSpec::default().grid_for(models).unwrap();
        models
            .iter()
            .map(|m| sqrt_embed(&discretize_on(m, &grid).unwrap()).unwrap())
            .collect()
    }

    fn sup(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn uniform_density_embeds_to_ones() {
        let grid = Grid1D::spanning(0.0, 1.0, 101).unwrap();
        let p = GridDensity::new(grid, vec![1.0; 101]).unwrap();
        let psi = sqrt_embed(&p).unwrap();
        assert!(psi.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn embedding_has_unit_norm_and_squares_back() {
        let models = [
            FamilyParams::normal(2.0, 10.0).unwrap(),
            FamilyParams::skew_normal(1.95, 9.98, 2.0).unwrap(),
        ];
        for psi in embed_all(&models) {
            assert!((inner(&psi, &psi).unwrap() - 1.0).abs() < 1e-6);
            assert!((psi.to_density().unwrap().mass() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn self_distance_is_zero() {
        let psi = &embed_all(&[FamilyParams::normal(0.0, 1.0).unwrap()])[0];
        assert_eq!(distance(psi, psi).unwrap(), 0.0);
        let v = log_map(psi, psi).unwrap();
        assert!(v.norm() < 1e-7);
    }

    #[test]
    fn bhattacharyya_equal_variance() {
        let e = embed_all(&[
            FamilyParams::normal(0.0, 1.0).unwrap(),
            FamilyParams::normal(0.1, 1.0).unwrap(),
        ]);
        let d = distance(&e[0], &e[1]).unwrap();
        let oracle = (-(0.1f64 * 0.1) / 8.0).exp().acos();
        assert!((d - oracle).abs() < 1e-4, "{d} vs {oracle}");
    }

    #[test]
    fn grid_mismatch_is_shape_error() {
        let n = FamilyParams::normal(0.0, 1.0).unwrap();
        let a =
            sqrt_embed(&crate::densities::discretize(&n, &GridSpec::default()).unwrap()).unwrap();
        let spec = GridSpec {
            points: 2048,
            ..GridSpec::default()
        };
        let b = sqrt_embed(&crate::densities::discretize(&n, &spec).unwrap()).unwrap();
        assert!(matches!(inner(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(log_map(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn exp_log_round_trip() {
        let e = embed_all(&[
            FamilyParams::normal(2.0, 10.0).unwrap(),
            FamilyParams::skew_normal(1.95, 9.98, 2.0).unwrap(),
        ]);
        let v = log_map(&e[0], &e[1]).unwrap();
        assert!(inner(&v, &e[0]).unwrap().abs() < 1e-8);
        let d = distance(&e[0], &e[1]).unwrap();
        assert!((v.norm() - d).abs() < 1e-8);

        let back = exp_map(&e[0], &v, 1.0).unwrap();
        assert!(sup(back.values(), e[1].values()) < 1e-6);

        assert_eq!(exp_map(&e[0], &v, 0.0).unwrap().values(), e[0].values());
        for t in [0.1, 0.5, 1.0] {
            assert!((exp_map(&e[0], &v, t).unwrap().norm() - 1.0).abs() < 1e-6);
        }

        let p0 = geodesic_point(&e[0], &v, 0.0).unwrap();
        let base_sq: Vec<f64> = e[0].values().iter().map(|x| x * x).collect();
        assert!(sup(p0.values(), &base_sq) < 1e-10);
        let p1 = geodesic_point(&e[0], &v, 1.0).unwrap();
        let target_sq: Vec<f64> = e[1].values().iter().map(|x| x * x).collect();
        assert!(sup(p1.values(), &target_sq) < 1e-6);
        assert!((geodesic_point(&e[0], &v, 0.37).unwrap().mass() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn antipodal_and_out_of_chart() {
        let grid = Grid1D::spanning(0.0, 2.0, 201).unwrap();
        // two disjointly supported densities are orthogonal, d = π/2
        let a: Vec<f64> = grid
            .points()
            .map(|x| if x <= 1.0 { 1.0 } else { 0.0 })
            .collect();
        let b: Vec<f64> = grid
            .points()
            .map(|x| if x >= 1.0 { 1.0 } else { 0.0 })
            .collect();
        let a = sqrt_embed(&GridDensity::normalized(grid, a).unwrap()).unwrap();
        let b = sqrt_embed(&GridDensity::normalized(grid, b).unwrap()).unwrap();
        let v = log_map(&a, &b).unwrap();
        assert!(matches!(exp_map(&a, &v, 2.5), Err(Error::OutOfChart(_))));
        // past t = 1 the great circle leaves the positive orthant
        assert!(matches!(
            geodesic_point(&a, &v, 1.3),
            Err(Error::OutOfChart(_))
        ));
        assert!(matches!(exp_map(&a, &v, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn non_tangent_vectors_rejected() {
        let psi = &embed_all(&[FamilyParams::normal(0.0, 1.0).unwrap()])[0];
        assert!(TangentVector::at(psi, psi.values().to_vec()).is_err());
        let v = TangentVector::project(psi, psi.values().iter().map(|x| x * x).collect()).unwrap();
        assert!(inner(&v, psi).unwrap().abs() < 1e-12);
    }
}
