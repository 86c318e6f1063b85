use nalgebra::DMatrix;

use super::layout::SubsystemLayout;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Dense(ComplexMatrix),
    /// `U|i⟩ = |image[i]⟩`.
    Permutation(Vec<usize>),
}

/// Unitary on a tensor-factored space. Basis permutations are kept in
/// index form so they can act on spaces far larger than a dense matrix allows.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator {
    repr: Repr,
    layout: SubsystemLayout,
}

impl UnitaryOperator {
    pub fn dense(mat: ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        check_dims(mat.dim(), &layout)?;
        let defect = unitarity_defect(&mat);
        if defect > UNITARITY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self {
            repr: Repr::Dense(mat),
            layout,
        })
    }

    pub fn permutation(image: Vec<usize>, layout: SubsystemLayout) -> Result<Self> {
        check_dims(image.len(), &layout)?;
        let mut seen = vec![false; image.len()];
        for &j in &image {
            if j >= image.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::NotPermutation(format!("image entry {j} repeated or out of range")));
            }
        }
        Ok(Self {
            repr: Repr::Permutation(image),
            layout,
        })
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let n = layout.total_dim();
        Self {
            repr: Repr::Permutation((0..n).collect()),
            layout,
        }
    }

    /// Permutation built from a map on digit tuples.
    pub fn from_basis_map(
        layout: SubsystemLayout,
        map: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        let image = (0..layout.total_dim())
            .map(|i| layout.encode(&map(&layout.decode(i))))
            .collect();
        Self::permutation(image, layout)
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn with_layout(mut self, layout: SubsystemLayout) -> Result<Self> {
        check_dims(self.dim(), &layout)?;
        self.layout = layout;
        Ok(self)
    }

    pub fn permutation_image(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Permutation(p) => Some(p),
            Repr::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Permutation(p) => {
                let mut m = DMatrix::zeros(p.len(), p.len());
                for (i, &j) in p.iter().enumerate() {
                    m[(j, i)] = C64::new(1.0, 0.0);
                }
                ComplexMatrix::from_inner(m)
            }
        }
    }

    /// Nonzero entries `(row, value)` of column `col`.
    pub fn column(&self, col: usize) -> Vec<(usize, C64)> {
        match &self.repr {
            Repr::Permutation(p) => vec![(p[col], C64::new(1.0, 0.0))],
            Repr::Dense(m) => (0..m.dim())
                .filter_map(|r| {
                    let z = m.get(r, col);
                    (z != C64::new(0.0, 0.0)).then_some((r, z))
                })
                .collect(),
        }
    }

    /// `after ∘ self`: apply `self` first.
    pub fn then(&self, after: &UnitaryOperator) -> Result<UnitaryOperator> {
        if self.dim() != after.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: after.dim(),
            });
        }
        let repr = match (&self.repr, &after.repr) {
            (Repr::Permutation(first), Repr::Permutation(second)) => {
                Repr::Permutation(first.iter().map(|&i| second[i]).collect())
            }
            _ => Repr::Dense(after.to_dense().matmul(&self.to_dense())?),
        };
        Ok(Self {
            repr,
            layout: self.layout.clone(),
        })
    }

    pub fn adjoint(&self) -> Self {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Permutation(p) => {
                let mut inv = vec![0; p.len()];
                for (i, &j) in p.iter().enumerate() {
                    inv[j] = i;
                }
                Repr::Permutation(inv)
            }
        };
        Self {
            repr,
            layout: self.layout.clone(),
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => unitarity_defect(m),
            Repr::Permutation(_) => 0.0,
        }
    }

    /// `U m U†`.
    pub fn conjugate(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.dim(),
            });
        }
        Ok(match &self.repr {
            Repr::Dense(u) => {
                ComplexMatrix::from_inner(u.inner() * m.inner() * u.inner().adjoint())
            }
            Repr::Permutation(p) => {
                let n = p.len();
                let src = m.inner();
                let mut out = DMatrix::zeros(n, n);
                for j in 0..n {
                    for i in 0..n {
                        out[(p[i], p[j])] = src[(i, j)];
                    }
                }
                ComplexMatrix::from_inner(out)
            }
        })
    }
}

fn check_dims(dim: usize, layout: &SubsystemLayout) -> Result<()> {
    if dim != layout.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_dim(),
            found: dim,
        });
    }
    Ok(())
}

/// Max-abs entry of `U U† − I`.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let prod = m.inner() * m.inner().adjoint();
    let id = DMatrix::<C64>::identity(m.dim(), m.dim());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubits(n: usize) -> SubsystemLayout {
        SubsystemLayout::numbered("q", n, 2).unwrap()
    }

    #[test]
    fn permutation_validation() {
        assert!(UnitaryOperator::permutation(vec![0, 0], qubits(1)).is_err());
        assert!(UnitaryOperator::permutation(vec![0, 2], qubits(1)).is_err());
        assert!(UnitaryOperator::permutation(vec![0, 1, 2], qubits(1)).is_err());
    }

    #[test]
    fn dense_rejects_non_unitary() {
        let m = ComplexMatrix::from_diagonal(&[1.0, 0.5]);
        assert!(matches!(
            UnitaryOperator::dense(m, qubits(1)),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn composition_matches_dense_product() {
        let a = UnitaryOperator::permutation(vec![1, 2, 3, 0], qubits(2)).unwrap();
        let b = UnitaryOperator::permutation(vec![0, 1, 3, 2], qubits(2)).unwrap();
        let ab = a.then(&b).unwrap();
        let dense = b.to_dense().matmul(&a.to_dense()).unwrap();
        assert_eq!(ab.to_dense(), dense);
        let mixed = a
            .then(&UnitaryOperator::dense(b.to_dense(), qubits(2)).unwrap())
            .unwrap();
        assert_eq!(mixed.to_dense(), dense);
    }

    #[test]
    fn permutation_conjugation_matches_dense() {
        let p = UnitaryOperator::permutation(vec![2, 0, 3, 1], qubits(2)).unwrap();
        let m = ComplexMatrix::from_row_major(
            4,
            &(0..16).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect::<Vec<_>>(),
        )
        .unwrap();
        let d = UnitaryOperator::dense(p.to_dense(), qubits(2)).unwrap();
        assert!(p.conjugate(&m).unwrap().max_abs_diff(&d.conjugate(&m).unwrap()).unwrap() < 1e-14);
        let back = p.adjoint().conjugate(&p.conjugate(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
