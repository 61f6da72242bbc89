//! Model-risk quantification on the Fisher–Rao manifold of densities.
//!
//! Candidate models are embedded as square-root densities on the unit sphere
//! of L², where the Fisher–Rao geometry has closed-form geodesics. Around a
//! base model a star-shaped neighbourhood of perturbed models is spanned by
//! geodesic rays, weighted by a kernel pulled back from a simple profile on
//! `[0, 1] × directions`, and the spread of an output functional over that
//! weighted neighbourhood is summarised by L¹, L², L^∞ and Sobolev norms.
//!
//! ```no_run
//! use modelrisk_core::prelude::*;
//!
//! let base = FamilyParams::normal(2.0, 10.0)?;
//! let target = FamilyParams::skew_normal(1.95, 9.98, 2.0)?;
//! let nb = Neighbourhood::from_targets(&base, &[target], &GridSpec::default(), 65)?;
//! let profile = make_profile(ProfileKind::linear(), nb.directions().len())?;
//! let kernel = pull_forward(&profile, &nb)?;
//! let request = RiskRequest {
//!     functional: OutputFunctional::VaR { beta: 0.999 },
//!     norms: vec![Norm::L1, Norm::L2, Norm::Linf],
//!     deviation: Deviation::Difference,
//! };
//! let report = assess(&nb, &kernel, &request)?;
//! println!("{:?}", report.values);
//! # Ok::<(), modelrisk_core::Error>(())
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densities;
pub mod error;
pub mod fisher;
pub mod kernel;
pub mod neighbourhood;
pub mod quadrature;
pub mod risk;
pub mod sphere;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::densities::{
        apply_functional, discretize, discretize_on, eval_pdf, FamilyParams, GridDensity, GridSpec,
        OutputFunctional,
    };
    pub use crate::error::{Error, Result};
    pub use crate::fisher::{
        fisher_matrix, fisher_matrix_quadrature, fisher_volume_element, FisherMatrix,
    };
    pub use crate::kernel::{
        make_profile, measure_weights, pull_forward, CylinderProfile, ProfileKind, WeightKernel,
    };
    pub use crate::neighbourhood::{sample_geodesics, Direction, GeodesicNode, Neighbourhood};
    pub use crate::quadrature::{central_diff, trapz, DiffOrder, Grid1D};
    pub use crate::risk::{
        assess, assess_table, risk_l1, risk_l2, risk_linf, risk_sobolev, Deviation, NodeTable,
        Norm, RiskReport, RiskRequest, WorstCase,
    };
    pub use crate::sphere::{
        distance, exp_map, geodesic_point, inner, log_map, sqrt_embed, GridFunction, SphereDensity,
        SpherePoint, TangentVector,
    };
}
