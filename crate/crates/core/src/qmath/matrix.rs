use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Square, finite, dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Wraps without validation. Callers guarantee squareness and finiteness.
    pub(crate) fn from_inner(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square() && m.nrows() > 0);
        Self(m)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional matrix");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional matrix");
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self::from_inner(DMatrix::from_diagonal(&v))
    }

    /// Outer product |ψ⟩⟨ψ| (no normalization).
    pub fn outer(psi: &[C64]) -> Self {
        let v = DVector::from_column_slice(psi);
        Self::from_inner(&v * v.adjoint())
    }

    /// Matrix unit |row⟩⟨col|.
    pub fn unit(dim: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[(row, col)] = C64::new(1.0, 0.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self(&self.0 * &other.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = self.hermitian_part().0.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .hermitian_part()
            .0
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// V diag(f(λ)) V† over the Hermitian part.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let (values, vectors) = self.hermitian_eigen();
        Self::from_spectrum(&values.iter().map(|&l| f(l)).collect::<Vec<_>>(), &vectors)
    }

    pub(crate) fn from_spectrum(values: &[f64], vectors: &DMatrix<C64>) -> Self {
        let mut scaled = vectors.clone();
        for (c, &l) in values.iter().enumerate() {
            scaled.column_mut(c).scale_mut(l);
        }
        Self::from_inner(scaled * vectors.adjoint())
    }

    /// Row-major vectorization.
    pub fn vectorize(&self) -> Vec<C64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Text fixture: `dim` on the first line, then one `re im` pair per entry
    /// in row-major order, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.dim());
        for z in self.vectorize() {
            let _ = writeln!(s, "{:.16e} {:.16e}", z.re, z.im);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let dim = parse_dim(lines.next())?;
        let entries = parse_entries(&mut lines, dim * dim)?;
        Self::from_row_major(dim, &entries)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn parse_dim(line: Option<&str>) -> Result<usize> {
    line.ok_or_else(|| Error::Parse("missing dimension".into()))?
        .parse::<usize>()
        .map_err(|e| Error::Parse(format!("bad dimension: {e}")))
}

pub(crate) fn parse_entries<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    count: usize,
) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {count} entries, got {k}")))?;
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("entry {k}: expected `re im`")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("entry {k}: {e}")))
        };
        let re = next()?;
        let im = next()?;
        out.push(C64::new(re, im));
    }
    Ok(out)
}

/// Kronecker product; slots of `a` come first.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_inner(a.0.kronecker(&b.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert_eq!(
            ComplexMatrix::new(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        );
        assert_eq!(ComplexMatrix::new(DMatrix::zeros(0, 0)), Err(Error::Empty));
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert_eq!(ComplexMatrix::new(m), Err(Error::NonFinite));
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_basis_projectors() {
        let p0 = ComplexMatrix::unit(2, 0, 0);
        let p1 = ComplexMatrix::unit(2, 1, 1);
        assert_eq!(tensor_product(&p0, &p1), ComplexMatrix::unit(4, 1, 1));
    }

    #[test]
    fn kron_diagonal() {
        let p = 0.3;
        let a = ComplexMatrix::from_diagonal(&[p, 1.0 - p]);
        let pi = ComplexMatrix::from_diagonal(&[0.5, 0.5]);
        let expected =
            ComplexMatrix::from_diagonal(&[p / 2.0, p / 2.0, (1.0 - p) / 2.0, (1.0 - p) / 2.0]);
        assert!(tensor_product(&a, &pi).max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let m = ComplexMatrix::from_row_major(
            2,
            &[c(1.0 / 3.0), C64::new(0.1, -0.7), C64::new(0.1, 0.7), c(2.0 / 3.0)],
        )
        .unwrap();
        let back = ComplexMatrix::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn text_parse_errors() {
        assert!(matches!(ComplexMatrix::from_text(""), Err(Error::Parse(_))));
        assert!(matches!(
            ComplexMatrix::from_text("2\n1 0\n0 0\n"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn eigen_sorted_ascending() {
        let m = ComplexMatrix::from_diagonal(&[0.7, -0.2, 0.5]);
        assert_eq!(m.eigenvalues().len(), 3);
        let ev = m.eigenvalues();
        assert!((ev[0] + 0.2).abs() < 1e-15 && (ev[2] - 0.7).abs() < 1e-15);
    }
}
