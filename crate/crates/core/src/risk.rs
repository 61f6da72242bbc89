//! Model-risk measures: norms of the output deviation `f − f(p₀)` over the
//! weighted neighbourhood.
//!
//! | norm          | value                                              |
//! |---------------|----------------------------------------------------|
//! | `L1`          | `∫ |f − f(p₀)| dζ`                                 |
//! | `L2`          | `(∫ (f − f(p₀))² dζ)^{1/2}`                        |
//! | `Linf`        | `ess sup |f − f(p₀)|` over the support of `ζ`      |
//! | `Sobolev(s,p)`| `(Σ_{k≤s} ∫ |∂ₜᵏ (f − f(p₀))|^p dζ)^{1/p}`          |
//!
//! Derivatives are taken along geodesic arc length on each ray.

use serde::{Deserialize, Serialize};

use crate::densities::{apply_functional, OutputFunctional};
use crate::error::{Error, Result};
use crate::kernel::WeightKernel;
use crate::neighbourhood::{sample_geodesics, Neighbourhood};
use crate::quadrature::{central_diff, DiffOrder};
use crate::sphere::{distance, sqrt_embed};

/// Smallest `|f(p₀)|` accepted by the ratio forms.
pub const RELATIVE_FLOOR: f64 = 1e-12;

pub const MAX_SOBOLEV_ORDER: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "snake_case", deny_unknown_fields)]
pub enum Norm {
    L1,
    L2,
    Linf,
    Sobolev { s: u32, p: f64 },
}

impl Norm {
    pub fn validate(&self) -> Result<()> {
        if let Norm::Sobolev { s, p } = *self {
            if s > MAX_SOBOLEV_ORDER {
                return Err(Error::Config(format!(
                    "Sobolev order {s} exceeds the supported {MAX_SOBOLEV_ORDER}"
                )));
            }
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::Config(format!(
                    "Sobolev exponent must be finite and >= 1, got {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            Norm::L1 => "L1".into(),
            Norm::L2 => "L2".into(),
            Norm::Linf => "Linf".into(),
            Norm::Sobolev { s, p } => format!("W{s},{p}"),
        }
    }
}

/// Which function of the outputs the norm is applied to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deviation {
    /// `f − f(p₀)`
    #[default]
    Difference,
    /// `f / f(p₀)`
    Ratio,
    /// `(f − f(p₀)) / f(p₀)`
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskRequest {
    pub functional: OutputFunctional,
    pub norms: Vec<Norm>,
    #[serde(default)]
    pub deviation: Deviation,
}

impl RiskRequest {
    pub fn validate(&self) -> Result<()> {
        self.functional.validate()?;
        if self.norms.is_empty() {
            return Err(Error::Config("at least one norm is required".into()));
        }
        self.norms.iter().try_for_each(Norm::validate)
    }
}

/// Output values at the base model and at every kernel node, in kernel
/// node order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    f0: f64,
    values: Vec<f64>,
    distances: Option<Vec<f64>>,
    deviation: Deviation,
}

impl NodeTable {
    /// A table from precomputed outputs (synthetic functionals, external
    /// models).
    pub fn new(f0: f64, values: Vec<f64>) -> Result<Self> {
        if !f0.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(
                "node table contains non-finite outputs".into(),
            ));
        }
        Ok(Self {
            f0,
            values,
            distances: None,
            deviation: Deviation::Difference,
        })
    }

    /// Applies `f` to every sampled model of `nb`.
    pub fn evaluate(f: &OutputFunctional, nb: &Neighbourhood) -> Result<Self> {
        f.validate()?;
        let base = nb.base().to_density()?;
        let f0 = apply_functional(f, &base)?;
        let nodes = sample_geodesics(nb)?;
        let mut values = Vec::with_capacity(nodes.len());
        let mut distances = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let at = |e: Error| Error::AtNode {
                direction: node.direction,
                t: node.t,
                source: Box::new(e),
            };
            values.push(apply_functional(f, &node.density).map_err(at)?);
            let psi = sqrt_embed(&node.density).map_err(at)?;
            distances.push(distance(nb.base(), &psi).map_err(at)?);
        }
        let mut table = Self::new(f0, values)?;
        table.distances = Some(distances);
        Ok(table)
    }

    pub fn with_deviation(mut self, deviation: Deviation) -> Result<Self> {
        if deviation != Deviation::Difference && self.f0.abs() < RELATIVE_FLOOR {
            return Err(Error::Numeric(format!(
                "relative deviation needs |f(p0)| >= {RELATIVE_FLOOR}, got {}",
                self.f0
            )));
        }
        self.deviation = deviation;
        Ok(self)
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Geodesic distance of each node from the base, when sampled from a
    /// neighbourhood.
    pub fn distances(&self) -> Option<&[f64]> {
        self.distances.as_deref()
    }

    /// The integrand the norms are applied to.
    pub fn deviations(&self) -> Vec<f64> {
        let f0 = self.f0;
        match self.deviation {
            Deviation::Difference => self.values.iter().map(|f| f - f0).collect(),
            Deviation::Ratio => self.values.iter().map(|f| f / f0).collect(),
            Deviation::Relative => self.values.iter().map(|f| (f - f0) / f0).collect(),
        }
    }

    fn check(&self, kernel: &WeightKernel) -> Result<()> {
        if self.values.len() != kernel.nodes().len() {
            return Err(Error::Shape(format!(
                "{} outputs for {} kernel nodes",
                self.values.len(),
                kernel.nodes().len()
            )));
        }
        Ok(())
    }
}

pub fn risk_l1(table: &NodeTable, kernel: &WeightKernel) -> Result<f64> {
    table.check(kernel)?;
    let mut acc = 0.0;
    for (g, n) in table.deviations().iter().zip(kernel.nodes()) {
        acc += n.weight * g.abs();
    }
    Ok(acc)
}

pub fn risk_l2(table: &NodeTable, kernel: &WeightKernel) -> Result<f64> {
    table.check(kernel)?;
    let mut acc = 0.0;
    for (g, n) in table.deviations().iter().zip(kernel.nodes()) {
        acc += n.weight * g * g;
    }
    Ok(acc.sqrt())
}

/// Worst-case deviation and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstCase {
    pub value: f64,
    pub direction: usize,
    pub t: f64,
}

/// Maximum `|deviation|` over the closed support of the kernel: nodes with
/// `K > 0` and their immediate neighbours on the same ray.
pub fn risk_linf(table: &NodeTable, kernel: &WeightKernel) -> Result<WorstCase> {
    table.check(kernel)?;
    let dev = table.deviations();
    let m = kernel.t_samples();
    let mut best: Option<WorstCase> = None;
    for dir in 0..kernel.n_directions() {
        let ray = kernel.ray(dir);
        for (i, node) in ray.iter().enumerate() {
            let supported = node.k > 0.0
                || (i > 0 && ray[i - 1].k > 0.0)
                || (i + 1 < ray.len() && ray[i + 1].k > 0.0);
            if !supported {
                continue;
            }
            let v = dev[dir * m + i].abs();
            if best.is_none_or(|b| v > b.value) {
                best = Some(WorstCase {
                    value: v,
                    direction: dir,
                    t: node.t,
                });
            }
        }
    }
    best.ok_or_else(|| Error::Numeric("kernel has empty support".into()))
}

/// Sobolev-type norm with arc-length derivatives up to order `s`.
pub fn risk_sobolev(table: &NodeTable, kernel: &WeightKernel, s: u32, p: f64) -> Result<f64> {
    table.check(kernel)?;
    Norm::Sobolev { s, p }.validate()?;
    let m = kernel.t_samples();
    let needed = 2 * s as usize + 3;
    if m < needed {
        return Err(Error::Config(format!(
            "order-{s} Sobolev norm needs at least {needed} nodes per ray, got {m}"
        )));
    }
    let dev = table.deviations();
    let mut acc = 0.0;
    for dir in 0..kernel.n_directions() {
        let ray = kernel.ray(dir);
        let g = &dev[dir * m..(dir + 1) * m];
        let dt = kernel.rho(dir) / (m - 1) as f64;
        for k in 0..=s {
            let deriv = match k {
                0 => g.to_vec(),
                1 => central_diff(g, dt, DiffOrder::First)?,
                _ => central_diff(g, dt, DiffOrder::Second)?,
            };
            for (d, n) in deriv.iter().zip(ray) {
                acc += n.weight * d.abs().powf(p);
            }
        }
    }
    Ok(acc.powf(1.0 / p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormValue {
    pub norm: Norm,
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRow {
    pub direction: usize,
    pub t: f64,
    pub d: f64,
    pub f: f64,
    pub k: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub functional: String,
    pub f0: f64,
    pub deviation: Deviation,
    pub values: Vec<NormValue>,
    pub worst_case: WorstCase,
    pub nodes: Vec<NodeRow>,
}

impl RiskReport {
    pub fn value(&self, norm: &Norm) -> Option<f64> {
        self.values
            .iter()
            .find(|v| &v.norm == norm)
            .map(|v| v.value)
    }
}

/// Evaluates every requested norm on an already computed node table.
pub fn assess_table(
    table: &NodeTable,
    kernel: &WeightKernel,
    request: &RiskRequest,
) -> Result<RiskReport> {
    request.validate()?;
    let worst_case = risk_linf(table, kernel)?;
    let mut values = Vec::with_capacity(request.norms.len());
    for norm in &request.norms {
        let value = match *norm {
            Norm::L1 => risk_l1(table, kernel)?,
            Norm::L2 => risk_l2(table, kernel)?,
            Norm::Linf => worst_case.value,
            Norm::Sobolev { s, p } => risk_sobolev(table, kernel, s, p)?,
        };
        values.push(NormValue {
            norm: *norm,
            label: norm.label(),
            value,
        });
    }
    let distances = table.distances();
    let nodes = kernel
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| NodeRow {
            direction: n.direction,
            t: n.t,
            d: distances.map_or(n.t, |d| d[i]),
            f: table.values[i],
            k: n.k,
            w: n.weight,
        })
        .collect();
    Ok(RiskReport {
        functional: request.functional.label(),
        f0: table.f0,
        deviation: table.deviation,
        values,
        worst_case,
        nodes,
    })
}

/// Samples the neighbourhood, applies the functional and evaluates the norms.
pub fn assess(
    nb: &Neighbourhood,
    kernel: &WeightKernel,
    request: &RiskRequest,
) -> Result<RiskReport> {
    request.validate()?;
    let table = NodeTable::evaluate(&request.functional, nb)?.with_deviation(request.deviation)?;
    assess_table(&table, kernel, request)
}
