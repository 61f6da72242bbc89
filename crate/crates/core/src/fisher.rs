//! Fisher information matrices of the density families, analytic for the
//! normal family and by quadrature of the score outer product otherwise.

use nalgebra::DMatrix;

use crate::densities::{discretize, FamilyParams, GridSpec};
use crate::error::{Error, Result};
use crate::quadrature::trapz;

/// Relative step for central-difference scores.
pub const SCORE_STEP: f64 = 1e-5;

/// Eigenvalues above `-PSD_TOLERANCE` count as non-negative.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl FisherMatrix {
    /// Row-major `dim × dim` entries; checked for symmetry.
    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if (a - b).abs() >= 1e-10 {
                    return Err(Error::Numeric(format!(
                        "asymmetric entry ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .to_matrix()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn determinant(&self) -> f64 {
        self.to_matrix().determinant()
    }

    pub fn is_psd(&self) -> bool {
        self.eigenvalues().iter().all(|&e| e >= -PSD_TOLERANCE)
    }
}

/// Fisher matrix in the coordinates (μ, σ[, s]): closed form for the normal
/// family, quadrature for the skew-normal family.
pub fn fisher_matrix(params: &FamilyParams) -> Result<FisherMatrix> {
    params.validate()?;
    match *params {
        FamilyParams::Normal { sigma, .. } => {
            let s2 = sigma * sigma;
            FisherMatrix::from_row_major(2, vec![1.0 / s2, 0.0, 0.0, 2.0 / s2])
        }
        FamilyParams::SkewNormal { .. } => fisher_matrix_quadrature(params, &GridSpec::default()),
    }
}

/// `E[∂_i ln p ∂_j ln p]` by trapezoidal quadrature, with scores from
/// central differences of the log-density in each coordinate.
pub fn fisher_matrix_quadrature(params: &FamilyParams, spec: &GridSpec) -> Result<FisherMatrix> {
    let density = discretize(params, spec)?;
    let grid = *density.grid();
    let theta = params.coords();
    let dim = theta.len();

    let mut scores: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for i in 0..dim {
        let h = SCORE_STEP * theta[i].abs().max(1.0);
        let mut up = theta.clone();
        let mut down = theta.clone();
        up[i] += h;
        down[i] -= h;
        let (pu, pd) = (params.with_coords(&up), params.with_coords(&down));
        pu.validate()?;
        pd.validate()?;
        let score: Vec<f64> = grid
            .points()
            .map(|x| (pu.ln_pdf(x) - pd.ln_pdf(x)) / (2.0 * h))
            .collect();
        if score.iter().any(|s| !s.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite score in coordinate {i}"
            )));
        }
        scores.push(score);
    }

    let mut entries = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let integrand: Vec<f64> = density
                .values()
                .iter()
                .zip(&scores[i])
                .zip(&scores[j])
                .map(|((p, a), b)| p * a * b)
                .collect();
            let v = trapz(&integrand, &grid)?;
            if !v.is_finite() {
                return Err(Error::Numeric(format!(
                    "quadrature did not converge for entry ({i},{j})"
                )));
            }
            entries[i * dim + j] = v;
            entries[j * dim + i] = v;
        }
    }
    FisherMatrix::from_row_major(dim, entries)
}

/// Riemannian volume density `sqrt(det I(θ))`.
pub fn fisher_volume_element(params: &FamilyParams) -> Result<f64> {
    volume_element_of(&fisher_matrix(params)?)
}

pub fn volume_element_of(m: &FisherMatrix) -> Result<f64> {
    let det = m.determinant();
    if det < -PSD_TOLERANCE || !det.is_finite() {
        return Err(Error::Numeric(format!(
            "Fisher determinant {det} is negative"
        )));
    }
    Ok(det.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_closed_form() {
        let m = fisher_matrix(&FamilyParams::normal(2.0, 10.0).unwrap()).unwrap();
        assert_eq!(m.entries(), &[0.01, 0.0, 0.0, 0.02]);
        let m = fisher_matrix(&FamilyParams::normal(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(m.entries(), &[1.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn normal_quadrature_agrees() {
        let p = FamilyParams::normal(2.0, 10.0).unwrap();
        let q = fisher_matrix_quadrature(&p, &GridSpec::default()).unwrap();
        for (a, b) in q.entries().iter().zip([0.01, 0.0, 0.0, 0.02]) {
            assert!((a - b).abs() < 1e-4 * 0.01, "{a} vs {b}");
        }
    }

    #[test]
    fn skew_normal_at_zero_shape_has_normal_block() {
        let m = fisher_matrix(&FamilyParams::skew_normal(0.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(m.dim(), 3);
        assert!((m.get(0, 0) - 1.0).abs() < 1e-4);
        assert!(m.get(0, 1).abs() < 1e-4);
        assert!((m.get(1, 1) - 2.0).abs() < 1e-4);
        // the shape score is proportional to the location score at s = 0
        assert!(m.eigenvalues()[0].abs() < 1e-6);
    }

    #[test]
    fn volume_elements() {
        let v = fisher_volume_element(&FamilyParams::normal(2.0, 10.0).unwrap()).unwrap();
        assert!((v - (0.01f64 * 0.02).sqrt()).abs() < 1e-12);
        assert!((v - 0.014_142_1).abs() < 1e-6);
        let v1 = fisher_volume_element(&FamilyParams::normal(0.0, 1.0).unwrap()).unwrap();
        assert!((v1 - 2f64.sqrt()).abs() < 1e-9);
        let v2 = fisher_volume_element(&FamilyParams::normal(0.0, 2.0).unwrap()).unwrap();
        assert!((v2 - v1 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_input_rejected() {
        assert!(FisherMatrix::from_row_major(2, vec![1.0, 0.1, 0.0, 1.0]).is_err());
        assert!(FisherMatrix::from_row_major(2, vec![1.0, 0.0, 1.0]).is_err());
    }
}
