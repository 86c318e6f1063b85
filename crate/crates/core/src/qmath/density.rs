use super::layout::SubsystemLayout;
use super::matrix::{tensor_product, ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace operator on a factored space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    mat: ComplexMatrix,
    layout: SubsystemLayout,
}

impl DensityOperator {
    pub fn new(mat: ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        if mat.dim() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                found: mat.dim(),
            });
        }
        let herm = mat.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = mat.eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { mat, layout })
    }

    /// Skips validation; for results of trace- and positivity-preserving maps.
    pub(crate) fn trusted(mat: ComplexMatrix, layout: SubsystemLayout) -> Self {
        debug_assert_eq!(mat.dim(), layout.total_dim());
        Self { mat, layout }
    }

    pub fn single(mat: ComplexMatrix, label: &str) -> Result<Self> {
        let layout = SubsystemLayout::single(label, mat.dim())?;
        Self::new(mat, layout)
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let n = layout.total_dim();
        Self::trusted(ComplexMatrix::identity(n).scale(1.0 / n as f64), layout)
    }

    pub fn basis_state(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let n = layout.total_dim();
        if index >= n {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range {n}")));
        }
        Ok(Self::trusted(ComplexMatrix::unit(n, index, index), layout))
    }

    /// `Σ_x p_x |x⟩⟨x|`.
    pub fn diagonal(probs: &[f64], layout: SubsystemLayout) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(probs), layout)
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &[C64], layout: SubsystemLayout) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        Self::new(ComplexMatrix::outer(psi).scale(1.0 / norm2), layout)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn with_layout(self, layout: SubsystemLayout) -> Result<Self> {
        if layout.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: layout.total_dim(),
            });
        }
        Ok(Self { layout, ..self })
    }

    pub fn relabel(self, label: &str) -> Result<Self> {
        let layout = SubsystemLayout::single(label, self.dim())?;
        self.with_layout(layout)
    }

    /// `self ⊗ other`; slot labels must be disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self::trusted(
            tensor_product(&self.mat, &other.mat),
            self.layout.concat(&other.layout)?,
        ))
    }

    /// `self^⊗n` with slots relabeled `prefix1 … prefixn` (each slot of `self`
    /// collapses into one slot per copy).
    pub fn tensor_power(&self, n: usize, prefix: &str) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("tensor power 0".into()));
        }
        let mut mat = self.mat.clone();
        for _ in 1..n {
            mat = tensor_product(&mat, &self.mat);
        }
        Ok(Self::trusted(
            mat,
            SubsystemLayout::numbered(prefix, n, self.dim())?,
        ))
    }

    pub fn purity(&self) -> f64 {
        self.mat.matmul(&self.mat).expect("same dim").trace().re
    }

    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat.get(i, i).re.max(0.0)).collect()
    }
}
