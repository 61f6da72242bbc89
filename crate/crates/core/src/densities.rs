//! Parametric density families on the real line, their discretization on
//! uniform grids, and scalar output functionals of a density (VaR, moments,
//! tabulated payoffs).

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quadrature::{cumulative_trapz, trapz, Grid1D};

/// Tolerance on the trapezoidal mass of a [`GridDensity`].
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Largest acceptable deviation of the raw (pre-renormalization) mass from 1
/// before a discretization is declared too coarse.
pub const RAW_MASS_TOLERANCE: f64 = 1e-4;

pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Half-width of the truncated sample space in units of sigma.
pub const DEFAULT_SPAN: f64 = 10.0;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal distribution function.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// `ln Φ(z)`, finite far into the lower tail where `Φ` underflows.
pub fn ln_std_normal_cdf(z: f64) -> f64 {
    if z > -20.0 {
        return std_normal_cdf(z).ln();
    }
    // Asymptotic Mills-ratio series; the truncation error at z = -20 is ~1e-14.
    let r = 1.0 / (z * z);
    let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    -0.5 * z * z - (-z).ln() - LN_SQRT_2PI + series.ln()
}

/// Parameters of a density family. Normal parameters never carry a shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyParams {
    Normal {
        mu: f64,
        sigma: f64,
    },
    /// Azzalini skew-normal, `p(x) = (2/σ) φ(z) Φ(s z)`, `z = (x - μ)/σ`.
    SkewNormal {
        mu: f64,
        sigma: f64,
        shape: f64,
    },
}

impl FamilyParams {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        let p = FamilyParams::Normal { mu, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn skew_normal(mu: f64, sigma: f64, shape: f64) -> Result<Self> {
        let p = FamilyParams::SkewNormal { mu, sigma, shape };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (mu, sigma) = (self.mu(), self.sigma());
        if !mu.is_finite() {
            return Err(Error::Domain(format!("location must be finite, got {mu}")));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Domain(format!(
                "scale must be finite and > 0, got {sigma}"
            )));
        }
        if let FamilyParams::SkewNormal { shape, .. } = self {
            if !shape.is_finite() {
                return Err(Error::Domain(format!("shape must be finite, got {shape}")));
            }
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        match *self {
            FamilyParams::Normal { mu, .. } | FamilyParams::SkewNormal { mu, .. } => mu,
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            FamilyParams::Normal { sigma, .. } | FamilyParams::SkewNormal { sigma, .. } => sigma,
        }
    }

    pub fn shape(&self) -> Option<f64> {
        match *self {
            FamilyParams::Normal { .. } => None,
            FamilyParams::SkewNormal { shape, .. } => Some(shape),
        }
    }

    /// Number of free parameters.
    pub fn dim(&self) -> usize {
        match self {
            FamilyParams::Normal { .. } => 2,
            FamilyParams::SkewNormal { .. } => 3,
        }
    }

    /// Parameter coordinates `θ` in the order (μ, σ[, s]).
    pub fn coords(&self) -> Vec<f64> {
        match *self {
            FamilyParams::Normal { mu, sigma } => vec![mu, sigma],
            FamilyParams::SkewNormal { mu, sigma, shape } => vec![mu, sigma, shape],
        }
    }

    /// Same family with new coordinates (no validation).
    pub(crate) fn with_coords(&self, theta: &[f64]) -> Self {
        match self {
            FamilyParams::Normal { .. } => FamilyParams::Normal {
                mu: theta[0],
                sigma: theta[1],
            },
            FamilyParams::SkewNormal { .. } => FamilyParams::SkewNormal {
                mu: theta[0],
                sigma: theta[1],
                shape: theta[2],
            },
        }
    }

    fn pdf_unchecked(&self, x: f64) -> f64 {
        match *self {
            FamilyParams::Normal { mu, sigma } => std_normal_pdf((x - mu) / sigma) / sigma,
            FamilyParams::SkewNormal { mu, sigma, shape } => {
                let z = (x - mu) / sigma;
                let base = std_normal_pdf(z) / sigma;
                if shape == 0.0 {
                    base
                } else {
                    base * 2.0 * std_normal_cdf(shape * z)
                }
            }
        }
    }

    /// Log-density; finite wherever the closed form is, including deep tails.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            FamilyParams::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - LN_SQRT_2PI - sigma.ln()
            }
            FamilyParams::SkewNormal { mu, sigma, shape } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - LN_SQRT_2PI - sigma.ln() + 2f64.ln() + ln_std_normal_cdf(shape * z)
            }
        }
    }
}

/// Pointwise density of the family at `x`.
pub fn eval_pdf(params: &FamilyParams, x: f64) -> Result<f64> {
    params.validate()?;
    if !x.is_finite() {
        return Err(Error::Domain(format!(
            "density evaluated at non-finite x = {x}"
        )));
    }
    Ok(params.pdf_unchecked(x))
}

/// How a truncated sample space is laid out around one or more models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Half-width in units of sigma around each model's location.
    pub span: f64,
    /// Number of grid points.
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            span: DEFAULT_SPAN,
            points: DEFAULT_GRID_POINTS,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.span >= DEFAULT_SPAN) || !self.span.is_finite() {
            return Err(Error::Domain(format!(
                "span must be finite and at least {DEFAULT_SPAN} sigma, got {}",
                self.span
            )));
        }
        if self.points < 3 {
            return Err(Error::Domain(format!(
                "grid needs at least 3 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// Smallest uniform grid covering `μ ± span·σ` for every model.
    pub fn grid_for<'a, I>(&self, models: I) -> Result<Grid1D>
    where
        I: IntoIterator<Item = &'a FamilyParams>,
    {
        self.validate()?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in models {
            m.validate()?;
            lo = lo.min(m.mu() - self.span * m.sigma());
            hi = hi.max(m.mu() + self.span * m.sigma());
        }
        if !lo.is_finite() {
            return Err(Error::Domain("no models to lay a grid around".into()));
        }
        Grid1D::spanning(lo, hi, self.points)
    }
}

/// A probability density sampled on a uniform grid with unit trapezoidal mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Grid1D,
    values: Vec<f64>,
}

impl GridDensity {
    /// Wraps samples that already satisfy the density invariants.
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        check_nonnegative(&values)?;
        let mass = trapz(&values, &grid)?;
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain(format!("density mass {mass} is not 1")));
        }
        Ok(Self { grid, values })
    }

    /// Scales non-negative samples to unit trapezoidal mass.
    pub fn normalized(grid: Grid1D, mut values: Vec<f64>) -> Result<Self> {
        check_nonnegative(&values)?;
        let mass = trapz(&values, &grid)?;
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Numeric(format!(
                "cannot normalize samples with mass {mass}"
            )));
        }
        for v in &mut values {
            *v /= mass;
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        trapz(&self.values, &self.grid).expect("length checked at construction")
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn check_nonnegative(values: &[f64]) -> Result<()> {
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
    {
        return Err(Error::Domain(format!(
            "density sample {i} is {v}; must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Samples `params` on its own default-style grid described by `spec`.
pub fn discretize(params: &FamilyParams, spec: &GridSpec) -> Result<GridDensity> {
    let grid = spec.grid_for([params])?;
    discretize_on(params, &grid)
}

/// Samples `params` on a caller-supplied grid, renormalized to unit mass.
pub fn discretize_on(params: &FamilyParams, grid: &Grid1D) -> Result<GridDensity> {
    params.validate()?;
    let (lo, hi) = (
        params.mu() - DEFAULT_SPAN * params.sigma(),
        params.mu() + DEFAULT_SPAN * params.sigma(),
    );
    let slack = 1e-9 * (hi - lo);
    if grid.x0() > lo + slack || grid.x_end() < hi - slack {
        return Err(Error::Discretization(format!(
            "grid [{}, {}] does not cover [{lo}, {hi}]",
            grid.x0(),
            grid.x_end()
        )));
    }
    let values: Vec<f64> = grid.points().map(|x| params.pdf_unchecked(x)).collect();
    let raw = trapz(&values, grid)?;
    if (raw - 1.0).abs() > RAW_MASS_TOLERANCE {
        return Err(Error::Discretization(format!(
            "grid spacing {} is too coarse: raw mass {raw}",
            grid.dx()
        )));
    }
    GridDensity::normalized(*grid, values)
}

/// A scalar output computed from a density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputFunctional {
    /// The quantile `q` with `P(X <= q) = 1 - beta`.
    #[serde(rename = "var")]
    VaR {
        beta: f64,
    },
    Mean,
    StdDev,
    /// Expected value of a piecewise-linear payoff given as `[x, g(x)]`
    /// knots (flat beyond the first and last knot).
    UserTable {
        points: Vec<[f64; 2]>,
    },
}

impl OutputFunctional {
    pub fn validate(&self) -> Result<()> {
        match self {
            OutputFunctional::VaR { beta } => {
                if !(*beta > 0.0 && *beta < 1.0) {
                    return Err(Error::Domain(format!(
                        "VaR level beta must lie in (0, 1), got {beta}"
                    )));
                }
            }
            OutputFunctional::UserTable { points } => {
                if points.len() < 2 {
                    return Err(Error::Domain(
                        "payoff table needs at least two knots".into(),
                    ));
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::Domain(
                        "payoff table contains non-finite values".into(),
                    ));
                }
                if points.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return Err(Error::Domain(
                        "payoff knots must be strictly increasing in x".into(),
                    ));
                }
            }
            OutputFunctional::Mean | OutputFunctional::StdDev => {}
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            OutputFunctional::VaR { beta } => format!("VaR({beta})"),
            OutputFunctional::Mean => "mean".into(),
            OutputFunctional::StdDev => "std_dev".into(),
            OutputFunctional::UserTable { .. } => "user_table".into(),
        }
    }
}

/// Evaluates the functional on a discretized density.
pub fn apply_functional(f: &OutputFunctional, p: &GridDensity) -> Result<f64> {
    f.validate()?;
    let grid = p.grid();
    let v = p.values();
    match f {
        OutputFunctional::VaR { beta } => quantile(p, 1.0 - beta),
        OutputFunctional::Mean => mean(p),
        OutputFunctional::StdDev => {
            let m = mean(p)?;
            let centred: Vec<f64> = grid
                .points()
                .zip(v)
                .map(|(x, d)| (x - m) * (x - m) * d)
                .collect();
            Ok(trapz(&centred, grid)?.sqrt())
        }
        OutputFunctional::UserTable { points } => {
            let weighted: Vec<f64> = grid
                .points()
                .zip(v)
                .map(|(x, d)| interpolate_table(points, x) * d)
                .collect();
            trapz(&weighted, grid)
        }
    }
}

fn mean(p: &GridDensity) -> Result<f64> {
    let xs: Vec<f64> = p
        .grid()
        .points()
        .zip(p.values())
        .map(|(x, d)| x * d)
        .collect();
    trapz(&xs, p.grid())
}

/// Inverts the linearly interpolated trapezoidal CDF at `level`.
pub fn quantile(p: &GridDensity, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "quantile level must lie in (0, 1), got {level}"
        )));
    }
    let grid = p.grid();
    let cdf = cumulative_trapz(p.values(), grid)?;
    let i = match cdf.iter().position(|&c| c >= level) {
        Some(i) => i,
        None => {
            return Err(Error::Truncation(format!(
                "CDF reaches only {} on the grid, below level {level}",
                cdf[cdf.len() - 1]
            )))
        }
    };
    // cdf[0] = 0 < level, so i >= 1.
    let (c0, c1) = (cdf[i - 1], cdf[i]);
    let frac = if c1 > c0 {
        (level - c0) / (c1 - c0)
    } else {
        0.0
    };
    Ok(grid.x(i - 1) + frac * grid.dx())
}

fn interpolate_table(points: &[[f64; 2]], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first[0] {
        return first[1];
    }
    if x >= last[0] {
        return last[1];
    }
    let k = points.partition_point(|p| p[0] <= x);
    let (a, b) = (points[k - 1], points[k]);
    a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
}
