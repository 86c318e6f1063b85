//! Informationally complete measurements, the measurement map
//! `ρ ↦ Σ_x Tr{M_x ρ}|x⟩⟨x|`, its Stinespring dilation, and linear-inversion
//! tomography.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::qmath::{
    nearest_density_operator, parse_dim, parse_entries, ComplexMatrix, DensityOperator,
    SubsystemLayout, UnitaryOperator, C64, PSD_TOL,
};
use crate::seed;

/// Tolerance on `Σ_x M_x = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Relative singular-value cutoff used for rank decisions.
pub const RANK_RTOL: f64 = 1e-9;
/// Allowed deviation of an empirical frequency vector's sum from one.
pub const FREQUENCY_SUM_TOL: f64 = 1e-6;

const MAX_POVM_RETRIES: usize = 32;

/// A finite measurement `{M_x}` with `M_x ≥ 0` and `Σ_x M_x = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
    d_in: usize,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let d_in = effects.first().map(ComplexMatrix::dim).ok_or(Error::Empty)?;
        let mut sum = ComplexMatrix::zeros(d_in);
        for m in &effects {
            let herm = m.hermiticity_defect();
            if herm > PSD_TOL {
                return Err(Error::NotHermitian(herm));
            }
            let min = m.eigenvalues()[0];
            if min < -PSD_TOL {
                return Err(Error::NotPsd(min));
            }
            sum = sum.add(m)?;
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(d_in))?;
        if defect > COMPLETENESS_TOL {
            return Err(Error::InvalidArgument(format!(
                "effects do not sum to identity (defect {defect:e})"
            )));
        }
        Ok(Self { effects, d_in })
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.effects.len()
    }

    pub fn is_informationally_complete(&self) -> bool {
        completeness_rank(self) == self.d_in * self.d_in
    }

    /// `d_in d_out` on the first line, then every effect in the matrix text format.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.d_in, self.d_out());
        for m in &self.effects {
            s.push_str(&m.to_text());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let mut parts = header.split_whitespace();
        let d_in = parse_dim(parts.next())?;
        let d_out = parse_dim(parts.next())?;
        let mut effects = Vec::with_capacity(d_out);
        for _ in 0..d_out {
            let dim = parse_dim(lines.next())?;
            if dim != d_in {
                return Err(Error::Parse(format!("effect dimension {dim} != {d_in}")));
            }
            effects.push(ComplexMatrix::from_row_major(dim, &parse_entries(&mut lines, dim * dim)?)?);
        }
        Self::new(effects)
    }
}

/// Pauli-vector operator `(I + v·σ)/4`.
fn tetrahedral_effect(v: [f64; 3]) -> ComplexMatrix {
    let [x, y, z] = v;
    let q = 0.25;
    ComplexMatrix::from_row_major(
        2,
        &[
            C64::new(q * (1.0 + z), 0.0),
            C64::new(q * x, -q * y),
            C64::new(q * x, q * y),
            C64::new(q * (1.0 - z), 0.0),
        ],
    )
    .expect("2x2")
}

/// Bloch directions of the qubit SIC effects, in effect order.
pub const SIC_QUBIT_DIRECTIONS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// The qubit SIC measurement: `(1/2)|ψ_k⟩⟨ψ_k|` along the tetrahedron.
pub fn sic_qubit() -> Povm {
    let s = 1.0 / 3f64.sqrt();
    let effects = SIC_QUBIT_DIRECTIONS
        .iter()
        .map(|v| tetrahedral_effect([v[0] * s, v[1] * s, v[2] * s]))
        .collect();
    Povm::new(effects).expect("SIC effects are valid")
}

/// Seeded random rank-one IC measurement with `d²` outcomes.
pub fn random_ic_povm(d: usize, seed: u64) -> Result<Povm> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
    }
    let mut rng = seed::rng(seed);
    for _ in 0..MAX_POVM_RETRIES {
        let povm = random_rank_one_povm(d, d * d, &mut rng)?;
        if completeness_rank(&povm) == d * d {
            return Ok(povm);
        }
    }
    Err(Error::Numerical(format!(
        "no informationally complete measurement after {MAX_POVM_RETRIES} draws"
    )))
}

fn random_rank_one_povm<R: Rng + ?Sized>(d: usize, outcomes: usize, rng: &mut R) -> Result<Povm> {
    let raw: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| ComplexMatrix::outer(&crate::qmath::random_state_vector(d, rng)))
        .collect();
    let mut total = ComplexMatrix::zeros(d);
    for a in &raw {
        total = total.add(a)?;
    }
    let inv_sqrt = total.map_spectrum(|l| 1.0 / l.sqrt());
    let effects = raw
        .iter()
        .map(|a| {
            inv_sqrt
                .matmul(a)
                .and_then(|m| m.matmul(&inv_sqrt))
                .map(|m| m.hermitian_part())
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

/// The default measurement for dimension `d`: SIC for qubits, seeded random otherwise.
pub fn default_povm(d: usize, seed: u64) -> Result<Povm> {
    if d == 2 {
        Ok(sic_qubit())
    } else {
        random_ic_povm(d, seed)
    }
}

/// Rows are `conj(vec(M_x))`, so that `p = A vec(ρ)`.
fn effect_matrix(p: &Povm) -> DMatrix<C64> {
    let n2 = p.d_in * p.d_in;
    let mut a = DMatrix::zeros(p.d_out(), n2);
    for (x, m) in p.effects.iter().enumerate() {
        for (k, z) in m.vectorize().into_iter().enumerate() {
            a[(x, k)] = z.conj();
        }
    }
    a
}

/// Rank of the span of the effects; `d_in²` iff informationally complete.
pub fn completeness_rank(p: &Povm) -> usize {
    let sv = effect_matrix(p).singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_RTOL * max).count()
}

/// `p_x = Tr{M_x ρ}`.
pub fn outcome_probabilities(p: &Povm, rho: &DensityOperator) -> Result<Vec<f64>> {
    if rho.dim() != p.d_in {
        return Err(Error::DimensionMismatch {
            expected: p.d_in,
            found: rho.dim(),
        });
    }
    let mut probs = Vec::with_capacity(p.d_out());
    for m in &p.effects {
        let v = m.matmul(rho.matrix())?.trace().re;
        if v < -1e-9 {
            return Err(Error::Numerical(format!("negative outcome probability {v:e}")));
        }
        probs.push(if v < 1e-12 { v.max(0.0) } else { v });
    }
    Ok(probs)
}

/// `ω = Σ_x Tr{M_x ρ}|x⟩⟨x|` on a fresh `d_out`-dimensional slot labeled `S`.
pub fn measurement_map(p: &Povm, rho: &DensityOperator) -> Result<DensityOperator> {
    if !p.is_informationally_complete() {
        log::warn!("measurement map with a measurement that is not informationally complete");
    }
    let probs = outcome_probabilities(p, rho)?;
    DensityOperator::diagonal(&probs, SubsystemLayout::single("S", p.d_out())?)
}

/// Layout of the dilation: `E` carries the post-measurement input, `B` the pointer.
pub fn dilation_layout(p: &Povm) -> Result<SubsystemLayout> {
    SubsystemLayout::new([("E", p.d_in), ("B", p.d_out())])
}

/// Unitary `U_ICM` on input ⊗ pointer with
/// `U (|ψ⟩ ⊗ |0⟩) = Σ_x √M_x|ψ⟩ ⊗ |x⟩`, Kraus operators `√M_x`.
pub fn stinespring_unitary(p: &Povm) -> Result<UnitaryOperator> {
    let layout = dilation_layout(p)?;
    let (d_in, d_out) = (p.d_in, p.d_out());
    let n = d_in * d_out;
    let roots: Vec<ComplexMatrix> = p.effects.iter().map(|m| m.map_spectrum(|l| l.max(0.0).sqrt())).collect();

    let mut columns: Vec<Option<DVector<C64>>> = vec![None; n];
    for i in 0..d_in {
        let mut v = DVector::zeros(n);
        for (x, r) in roots.iter().enumerate() {
            for e in 0..d_in {
                v[e * d_out + x] = r.get(e, i);
            }
        }
        columns[i * d_out] = Some(v);
    }

    // Complete the isometry to a unitary with Gram–Schmidt on basis vectors.
    let mut basis: Vec<DVector<C64>> = columns.iter().flatten().cloned().collect();
    let mut candidates = (0..n).map(|k| {
        let mut e = DVector::zeros(n);
        e[k] = C64::new(1.0, 0.0);
        e
    });
    for slot in columns.iter_mut().filter(|c| c.is_none()) {
        loop {
            let mut v = candidates
                .next()
                .ok_or_else(|| Error::Numerical("unitary completion ran out of candidates".into()))?;
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dotc(&v);
                    v -= b * proj;
                }
            }
            let norm = v.norm();
            if norm > 1e-6 {
                v /= C64::new(norm, 0.0);
                basis.push(v.clone());
                *slot = Some(v);
                break;
            }
        }
    }

    let mut u = DMatrix::zeros(n, n);
    for (c, col) in columns.into_iter().enumerate() {
        u.set_column(c, &col.expect("filled"));
    }
    UnitaryOperator::dense(ComplexMatrix::new(u)?, layout)
}

/// Linear-inversion map from outcome probabilities to operators.
#[derive(Clone, Debug)]
pub struct ReconstructionFrame {
    povm: Povm,
    /// `d_in² × d_out` Moore–Penrose pseudoinverse of the effect matrix.
    pseudoinverse: DMatrix<C64>,
}

pub fn build_frame(p: &Povm) -> Result<ReconstructionFrame> {
    let rank = completeness_rank(p);
    let required = p.d_in * p.d_in;
    if rank < required {
        return Err(Error::NotInformationallyComplete { rank, required });
    }
    let a = effect_matrix(p);
    let max_sv = a.singular_values().iter().copied().fold(0.0, f64::max);
    let pseudoinverse = a
        .pseudo_inverse(RANK_RTOL * max_sv)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(ReconstructionFrame {
        povm: p.clone(),
        pseudoinverse,
    })
}

impl ReconstructionFrame {
    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    /// Unprojected linear-inversion estimate.
    pub fn invert(&self, probs: &[f64]) -> Result<ComplexMatrix> {
        let d_out = self.povm.d_out();
        if probs.len() != d_out {
            return Err(Error::DimensionMismatch {
                expected: d_out,
                found: probs.len(),
            });
        }
        let p = DVector::from_iterator(d_out, probs.iter().map(|&x| C64::new(x, 0.0)));
        let v = &self.pseudoinverse * p;
        ComplexMatrix::from_row_major(self.povm.d_in, v.as_slice())
    }

    /// Copy with every pseudoinverse entry shifted by `amount`. Used only to
    /// confirm that validation notices a corrupted frame.
    #[doc(hidden)]
    pub fn perturbed(&self, amount: f64) -> Self {
        let mut out = self.clone();
        out.pseudoinverse.iter_mut().for_each(|z| *z += C64::new(amount, 0.0));
        out
    }
}

/// Linear inversion of (possibly empirical) probabilities followed by
/// projection onto density operators.
pub fn reconstruct(f: &ReconstructionFrame, probs: &[f64]) -> Result<DensityOperator> {
    if let Some(&bad) = probs.iter().find(|&&x| x.is_nan() || x < 0.0) {
        return Err(Error::InvalidArgument(format!("negative or NaN frequency {bad}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > FREQUENCY_SUM_TOL {
        return Err(Error::InvalidArgument(format!("frequencies sum to {total}")));
    }
    let normalized: Vec<f64> = probs.iter().map(|x| x / total).collect();
    let raw = f.invert(&normalized)?;
    Ok(nearest_density_operator(&raw))
}
