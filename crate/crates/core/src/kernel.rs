//! Admissible weight functions on a neighbourhood.
//!
//! A weight is first chosen as a profile `h(u, ν)` on the cylinder
//! `[0, 1] × {directions}`, then pulled onto the neighbourhood by rescaling
//! each ray to its radius:
//!
//! ```text
//! K(p, t) = η(p)⁻¹ · t^{1-n} · ρ(v)^{-n} · h(t / ρ(v), v)
//! ```
//!
//! Every ray is a one-dimensional slice (`n = 1`) and the volume density of
//! the square-root chart is taken as `η ≡ 1`, so `K(t) = h(t/ρ)/ρ` on each
//! ray. Directions share the measure of the zero-dimensional unit sphere
//! `{−1, +1}`, whose total mass is [`DIRECTION_MEASURE`] = 2.
//!
//! The kernel defines the probability measure `dζ = K dv` through the node
//! weights returned by [`measure_weights`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighbourhood::Neighbourhood;
use crate::quadrature::{trapz_uniform, trapz_weights};

/// Surface measure of the unit sphere in one dimension, `2 π^{1/2} / Γ(1/2)`.
pub const DIRECTION_MEASURE: f64 = 2.0;

/// Nodes used to normalize a profile on `[0, 1]`.
pub const PROFILE_NODES: usize = 65_537;

pub const PROFILE_TOLERANCE: f64 = 1e-8;
pub const KERNEL_TOLERANCE: f64 = 1e-4;

/// `Γ(n/2) π^{-n/2}`, the normalizing constant of the linear profile on the
/// full `(n-1)`-sphere of directions. Evaluated through the exact rational
/// part of `Γ(n/2)`, so `n = 1` gives exactly 1.
pub fn sphere_profile_constant(n: u32) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    if n.is_multiple_of(2) {
        // Γ(k) = (k-1)!, k = n/2
        let k = n / 2;
        let fact: f64 = (1..k).map(f64::from).product();
        fact / PI.powi(k as i32)
    } else {
        // Γ(k + 1/2) = √π (2k)! / (4^k k!), k = (n-1)/2; the √π cancels.
        let k = (n - 1) / 2;
        let ratio: f64 = (1..=k).map(|j| (2 * j - 1) as f64 / 2.0).product();
        ratio / PI.powi(k as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileKind {
    /// `h(u) ∝ 1 − slope·u`; `slope = 1` vanishes on the boundary.
    LinearDecreasing {
        #[serde(default = "unit_slope")]
        slope: f64,
    },
    Constant,
    /// `h(u) ∝ exp(−(u − center)² / 2 width²)` on `[0, 1]`.
    GaussianBump {
        center: f64,
        width: f64,
    },
}

fn unit_slope() -> f64 {
    1.0
}

impl ProfileKind {
    pub fn linear() -> Self {
        ProfileKind::LinearDecreasing { slope: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ProfileKind::LinearDecreasing { slope } => {
                if !slope.is_finite() || slope < 0.0 {
                    return Err(Error::InvalidProfile(format!(
                        "linear profile must be non-increasing, slope = {slope}"
                    )));
                }
                if slope > 1.0 {
                    return Err(Error::InvalidProfile(format!(
                        "slope {slope} makes the profile negative near u = 1"
                    )));
                }
            }
            ProfileKind::GaussianBump { center, width } => {
                if !(0.0..=1.0).contains(&center) {
                    return Err(Error::InvalidProfile(format!(
                        "bump centre {center} outside [0, 1]"
                    )));
                }
                if !(width > 0.0) || !width.is_finite() {
                    return Err(Error::InvalidProfile(format!(
                        "bump width must be > 0, got {width}"
                    )));
                }
            }
            ProfileKind::Constant => {}
        }
        Ok(())
    }

    fn shape(&self, u: f64) -> f64 {
        match *self {
            ProfileKind::LinearDecreasing { slope } => 1.0 - slope * u,
            ProfileKind::Constant => 1.0,
            ProfileKind::GaussianBump { center, width } => {
                let z = (u - center) / width;
                (-0.5 * z * z).exp()
            }
        }
    }
}

/// A profile `h(u, ν) = c · shape(u)` on the cylinder, with per-direction
/// weights that together carry [`DIRECTION_MEASURE`].
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderProfile {
    kind: ProfileKind,
    c: f64,
    direction_weights: Vec<f64>,
}

pub fn make_profile(kind: ProfileKind, n_directions: usize) -> Result<CylinderProfile> {
    kind.validate()?;
    if n_directions == 0 {
        return Err(Error::InvalidProfile(
            "profile needs at least one direction".into(),
        ));
    }
    let du = 1.0 / (PROFILE_NODES - 1) as f64;
    let samples: Vec<f64> = (0..PROFILE_NODES)
        .map(|i| kind.shape(i as f64 * du))
        .collect();
    if let Some(v) = samples.iter().find(|v| **v < 0.0) {
        return Err(Error::InvalidProfile(format!(
            "profile takes the negative value {v}"
        )));
    }
    let integral = trapz_uniform(&samples, du);
    let c = 1.0 / (integral * DIRECTION_MEASURE);
    let direction_weights = vec![DIRECTION_MEASURE / n_directions as f64; n_directions];
    let profile = CylinderProfile {
        kind,
        c,
        direction_weights,
    };
    profile.verify()?;
    Ok(profile)
}

impl CylinderProfile {
    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn normalization(&self) -> f64 {
        self.c
    }

    pub fn direction_weights(&self) -> &[f64] {
        &self.direction_weights
    }

    /// `h(u, ν)`; zero outside `u ∈ [0, 1]`.
    pub fn h(&self, u: f64, direction: usize) -> f64 {
        assert!(
            direction < self.direction_weights.len(),
            "direction index out of range"
        );
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        self.c * self.kind.shape(u)
    }

    /// Checks non-negativity, a common value at `u = 0` and unit total mass.
    pub fn verify(&self) -> Result<()> {
        let n = self.direction_weights.len();
        let du = 1.0 / (PROFILE_NODES - 1) as f64;
        let h0 = self.h(0.0, 0);
        if !(h0 > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "profile must be positive at u = 0, got {h0}"
            )));
        }
        let mut total = 0.0;
        for dir in 0..n {
            if (self.h(0.0, dir) - h0).abs() > 1e-12 {
                return Err(Error::InvalidProfile(format!(
                    "direction {dir} disagrees at u = 0"
                )));
            }
            let samples: Vec<f64> = (0..PROFILE_NODES)
                .map(|i| self.h(i as f64 * du, dir))
                .collect();
            if samples.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::InvalidProfile(format!(
                    "negative profile value on direction {dir}"
                )));
            }
            total += self.direction_weights[dir] * trapz_uniform(&samples, du);
        }
        if (total - 1.0).abs() > PROFILE_TOLERANCE {
            return Err(Error::InvalidProfile(format!(
                "profile mass {total} is not 1"
            )));
        }
        Ok(())
    }
}

/// Kernel value and measure weight at one neighbourhood node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelNode {
    pub direction: usize,
    pub t: f64,
    pub k: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightKernel {
    profile: CylinderProfile,
    nodes: Vec<KernelNode>,
    rhos: Vec<f64>,
    t_samples: usize,
    residual: f64,
}

/// Evaluates the pulled-back profile at every node of `nb` and forms the
/// trapezoidal measure weights.
pub fn pull_forward(profile: &CylinderProfile, nb: &Neighbourhood) -> Result<WeightKernel> {
    let n_dir = nb.directions().len();
    if profile.direction_weights.len() != n_dir {
        return Err(Error::Shape(format!(
            "profile has {} directions, neighbourhood has {n_dir}",
            profile.direction_weights.len()
        )));
    }
    let m = nb.t_samples();
    let mut nodes = Vec::with_capacity(n_dir * m);
    let mut rhos = Vec::with_capacity(n_dir);
    for (dir, d) in nb.directions().iter().enumerate() {
        let rho = d.rho();
        rhos.push(rho);
        let tw = trapz_weights(m, nb.ray_step(dir));
        for (t, w) in nb.ray_times(dir).zip(tw) {
            let k = ray_kernel(profile, dir, rho, t);
            nodes.push(KernelNode {
                direction: dir,
                t,
                k,
                weight: profile.direction_weights[dir] * w * k,
            });
        }
    }
    let mut total = 0.0;
    for n in &nodes {
        total += n.weight;
    }
    let residual = (total - 1.0).abs();
    if !(residual < KERNEL_TOLERANCE) {
        return Err(Error::KernelNormalization { residual });
    }
    // ζ is a probability measure; the residual only reports quadrature error.
    for n in &mut nodes {
        n.weight /= total;
    }
    let kernel = WeightKernel {
        profile: profile.clone(),
        nodes,
        rhos,
        t_samples: m,
        residual,
    };
    kernel.verify()?;
    Ok(kernel)
}

/// `t^{1-n} ρ^{-n} h(t/ρ)` with `n = 1` and unit volume density.
fn ray_kernel(profile: &CylinderProfile, dir: usize, rho: f64, t: f64) -> f64 {
    let u = if t == rho { 1.0 } else { t / rho };
    profile.h(u, dir) / rho
}

impl WeightKernel {
    pub fn profile(&self) -> &CylinderProfile {
        &self.profile
    }

    pub fn nodes(&self) -> &[KernelNode] {
        &self.nodes
    }

    pub fn t_samples(&self) -> usize {
        self.t_samples
    }

    pub fn n_directions(&self) -> usize {
        self.rhos.len()
    }

    pub fn rho(&self, direction: usize) -> f64 {
        self.rhos[direction]
    }

    /// Nodes of one ray, in increasing `t`.
    pub fn ray(&self, direction: usize) -> &[KernelNode] {
        let m = self.t_samples;
        &self.nodes[direction * m..(direction + 1) * m]
    }

    /// `|Σ w − 1|`.
    pub fn normalization_residual(&self) -> f64 {
        self.residual
    }

    /// Kernel at an arbitrary `t` on a ray; zero outside `[0, ρ]`.
    pub fn value_at(&self, direction: usize, t: f64) -> f64 {
        let rho = self.rhos[direction];
        if !(0.0..=rho).contains(&t) {
            return 0.0;
        }
        ray_kernel(&self.profile, direction, rho, t)
    }

    /// `(c₁, c₂)` with `K(t) = c₁ (1 − c₂ t)` read off the first two nodes of
    /// a ray; only meaningful for linear profiles.
    pub fn linear_coefficients(&self, direction: usize) -> Option<(f64, f64)> {
        if !matches!(self.profile.kind, ProfileKind::LinearDecreasing { .. }) {
            return None;
        }
        let ray = self.ray(direction);
        let (a, b) = (ray[0], ray[1]);
        Some((a.k, (a.k - b.k) / (a.k * b.t)))
    }

    /// Positive inside each ray, non-negative at the ends, finite everywhere.
    pub fn verify(&self) -> Result<()> {
        for dir in 0..self.n_directions() {
            let ray = self.ray(dir);
            for (i, node) in ray.iter().enumerate() {
                let interior = i > 0 && i + 1 < ray.len();
                let ok = node.k.is_finite()
                    && if interior {
                        node.k > 0.0
                    } else {
                        node.k >= 0.0
                    };
                if !ok {
                    return Err(Error::InvalidProfile(format!(
                        "kernel value {} at direction {dir}, t = {}",
                        node.k, node.t
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Weights `w_i` with `∫ g dζ ≈ Σ w_i g(node_i)`, summing to one.
pub fn measure_weights(k: &WeightKernel) -> Vec<f64> {
    k.nodes.iter().map(|n| n.weight).collect()
}
