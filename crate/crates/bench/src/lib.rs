//! Shared fixtures for the criterion benchmarks.

use modelrisk_core::prelude::*;

/// Normal base model with one skew-normal perturbation.
pub fn skew_fixture(t_samples: usize) -> Result<(Neighbourhood, WeightKernel)> {
    let base = FamilyParams::normal(2.0, 10.0)?;
    let target = FamilyParams::skew_normal(1.95, 9.98, 2.0)?;
    let nb = Neighbourhood::from_targets(&base, &[target], &GridSpec::default(), t_samples)?;
    let kernel = pull_forward(&make_profile(ProfileKind::linear(), 1)?, &nb)?;
    Ok((nb, kernel))
}
