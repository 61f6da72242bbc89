//! Star-shaped neighbourhoods of a base model: a finite fan of unit tangent
//! directions, each followed along its geodesic up to a radius.

use std::f64::consts::PI;

use crate::densities::{discretize_on, FamilyParams, GridDensity, GridSpec};
use crate::error::{Error, Result};
use crate::quadrature::trapz_product;
use crate::sphere::{
    distance, exp_map, geodesic_point, inner, log_map, sqrt_embed, GridFunction, SphereDensity,
    TangentVector, CLIP_TOLERANCE, SMALL_DISTANCE,
};

pub const DEFAULT_T_SAMPLES: usize = 65;

const UNIT_TOLERANCE: f64 = 1e-8;

/// A unit tangent direction and the geodesic radius along it.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    v: TangentVector,
    rho: f64,
}

impl Direction {
    pub fn new(v: TangentVector, rho: f64) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Domain(format!(
                "direction must have unit norm, got {n}"
            )));
        }
        if !(rho > 0.0 && rho < PI) {
            return Err(Error::Domain(format!(
                "radius must lie in (0, π), got {rho}"
            )));
        }
        Ok(Self { v, rho })
    }

    /// Direction from `base` toward `target` with radius `d(base, target)`.
    pub fn toward(base: &SphereDensity, target: &SphereDensity) -> Result<Self> {
        let d = distance(base, target)?;
        if d <= SMALL_DISTANCE {
            return Err(Error::DegenerateDirection(format!(
                "target coincides with the base model (d = {d:e})"
            )));
        }
        let v = log_map(base, target)?;
        let len = v.norm();
        Self::new(v.scaled(1.0 / len), d)
    }

    pub fn vector(&self) -> &TangentVector {
        &self.v
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// One sampled model on a ray: `γ(t) = exp_{ψ₀}(t v)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicNode {
    pub direction: usize,
    pub t: f64,
    pub density: GridDensity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbourhood {
    base: SphereDensity,
    directions: Vec<Direction>,
    t_samples: usize,
}

impl Neighbourhood {
    /// Checks that every sampled node of every ray stays inside the chart and
    /// the positive orthant.
    pub fn new(base: SphereDensity, directions: Vec<Direction>, t_samples: usize) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::Domain(
                "a neighbourhood needs at least one direction".into(),
            ));
        }
        if t_samples < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 nodes per ray, got {t_samples}"
            )));
        }
        for (i, dir) in directions.iter().enumerate() {
            if dir.v.grid() != base.grid() {
                return Err(Error::Shape(format!(
                    "direction {i} lives on a different grid"
                )));
            }
            let c = inner(&base, &dir.v)?;
            if c.abs() >= crate::sphere::TANGENCY_TOLERANCE {
                return Err(Error::Domain(format!(
                    "direction {i} is not tangent at the base: {c:e}"
                )));
            }
        }
        let nb = Self {
            base,
            directions,
            t_samples,
        };
        for (i, dir) in nb.directions.iter().enumerate() {
            for t in nb.ray_times(i) {
                let p = exp_map(&nb.base, &dir.v, t)?;
                let clipped: Vec<f64> = p.values().iter().map(|x| x.min(0.0)).collect();
                let neg = trapz_product(&clipped, &clipped, p.grid())?;
                if neg > CLIP_TOLERANCE {
                    return Err(Error::OutOfChart(format!(
                        "ray {i} leaves the positive orthant at t = {t}"
                    )));
                }
            }
        }
        Ok(nb)
    }

    /// One ray per target, embedded on a grid covering base and targets.
    pub fn from_targets(
        base: &FamilyParams,
        targets: &[FamilyParams],
        spec: &GridSpec,
        t_samples: usize,
    ) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Domain(
                "at least one target model is required".into(),
            ));
        }
        let grid = spec.grid_for(std::iter::once(base).chain(targets))?;
        let psi0 = sqrt_embed(&discretize_on(base, &grid)?)?;
        let directions = targets
            .iter()
            .map(|t| {
                let psi = sqrt_embed(&discretize_on(t, &grid)?)?;
                Direction::toward(&psi0, &psi)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(psi0, directions, t_samples)
    }

    pub fn base(&self) -> &SphereDensity {
        &self.base
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn t_samples(&self) -> usize {
        self.t_samples
    }

    /// Same rays sampled at a different resolution.
    pub fn with_t_samples(&self, t_samples: usize) -> Result<Self> {
        Self::new(self.base.clone(), self.directions.clone(), t_samples)
    }

    /// Uniform node times on `[0, ρ]`, endpoints included.
    pub fn ray_times(&self, direction: usize) -> impl Iterator<Item = f64> + '_ {
        let rho = self.directions[direction].rho;
        let m = self.t_samples;
        (0..m).map(move |k| {
            if k + 1 == m {
                rho
            } else {
                rho * k as f64 / (m - 1) as f64
            }
        })
    }

    pub fn ray_step(&self, direction: usize) -> f64 {
        self.directions[direction].rho / (self.t_samples - 1) as f64
    }

    /// Model at time `t` along ray `direction`.
    pub fn point(&self, direction: usize, t: f64) -> Result<GridDensity> {
        geodesic_point(&self.base, &self.directions[direction].v, t)
    }
}

/// Every node of every ray, ordered by direction then by `t`.
pub fn sample_geodesics(nb: &Neighbourhood) -> Result<Vec<GeodesicNode>> {
    let mut out = Vec::with_capacity(nb.directions.len() * nb.t_samples);
    for i in 0..nb.directions.len() {
        for t in nb.ray_times(i) {
            out.push(GeodesicNode {
                direction: i,
                t,
                density: nb.point(i, t)?,
            });
        }
    }
    Ok(out)
}
