use crate::error::{Error, Result};

/// Ordered tensor factorization of a Hilbert space. Row-major convention:
/// the leftmost slot is the most significant digit of a basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(slots: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut dims = Vec::new();
        let mut labels: Vec<String> = Vec::new();
        for (label, dim) in slots {
            let label = label.into();
            if dim == 0 {
                return Err(Error::InvalidArgument(format!("slot `{label}` has dimension 0")));
            }
            if labels.contains(&label) {
                return Err(Error::DuplicateLabel(label));
            }
            labels.push(label);
            dims.push(dim);
        }
        if dims.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self { dims, labels })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    /// `prefix1 … prefixN`, each of dimension `dim`.
    pub fn numbered(prefix: &str, count: usize, dim: usize) -> Result<Self> {
        Self::new((1..=count).map(|i| (format!("{prefix}{i}"), dim)))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownSlot(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.index_of(label)?])
    }

    /// Place value of each slot in a flat basis index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            digits[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        digits
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    /// `self` followed by `other`; labels must stay unique.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.labels
                .iter()
                .cloned()
                .zip(self.dims.iter().copied())
                .chain(other.labels.iter().cloned().zip(other.dims.iter().copied())),
        )
    }

    /// Sub-layout of the given slot positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        Self::new(
            positions
                .iter()
                .map(|&p| (self.labels[p].clone(), self.dims[p])),
        )
    }

    /// Positions of `labels`, sorted into layout order.
    pub fn positions_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut pos = labels
            .iter()
            .map(|l| self.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        pos.sort_unstable();
        pos.dedup();
        Ok(pos)
    }

    /// Offsets contributed by the slots at `positions` for every joint value of
    /// those slots, enumerated in row-major order over `positions`.
    pub(crate) fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &p in positions {
            let mut next = Vec::with_capacity(out.len() * self.dims[p]);
            for &base in &out {
                for x in 0..self.dims[p] {
                    next.push(base + x * strides[p]);
                }
            }
            out = next;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_row_major() {
        let l = SubsystemLayout::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        assert_eq!(l.total_dim(), 12);
        assert_eq!(l.strides(), vec![6, 2, 1]);
        assert_eq!(l.decode(11), vec![1, 2, 1]);
        for i in 0..12 {
            assert_eq!(l.encode(&l.decode(i)), i);
        }
    }

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        assert_eq!(
            SubsystemLayout::new([("a", 2), ("a", 2)]),
            Err(Error::DuplicateLabel("a".into()))
        );
        assert!(SubsystemLayout::new([("a", 0)]).is_err());
        assert_eq!(
            SubsystemLayout::new(Vec::<(String, usize)>::new()),
            Err(Error::Empty)
        );
    }

    #[test]
    fn offsets_cover_selected_slots() {
        let l = SubsystemLayout::new([("a", 2), ("b", 3)]).unwrap();
        assert_eq!(l.offsets(&[1]), vec![0, 1, 2]);
        assert_eq!(l.offsets(&[0]), vec![0, 3]);
        assert_eq!(l.offsets(&[0, 1]), (0..6).collect::<Vec<_>>());
    }
}
