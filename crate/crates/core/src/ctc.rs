//! Deutsch's self-consistency condition.
//!
//! For an interaction `U` on chronology-respecting slots `S` and CTC slots `C`
//! the CTC state must satisfy `σ = Φ_ρ(σ) = Tr_S{U (ρ ⊗ σ) U†}`, and the
//! chronology-respecting output is `Tr_C{U (ρ ⊗ σ) U†}`. Both partial traces
//! are computed without materializing the joint operator when `U` is a basis
//! permutation, which keeps the cloner circuits tractable well past the size
//! where a dense joint matrix fits in memory.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::par;
use crate::qmath::{
    nearest_density_operator, partial_trace_matrix, tensor_product, trace_distance,
    ComplexMatrix, DensityOperator, SubsystemLayout, UnitaryOperator, C64,
};

/// Default bound on `d_S · d_C` for dense simulation.
pub const DEFAULT_DENSE_CAP: usize = 1 << 14;
pub const DEFAULT_TOL: f64 = 1e-12;
/// Singular-value threshold for the eigenvalue-one space of `Φ_ρ`.
pub const EIGENVALUE_ONE_TOL: f64 = 1e-9;

/// A unitary with its slots split into chronology-respecting (leading) and
/// CTC (trailing) groups.
#[derive(Clone, Debug)]
pub struct DctcInteraction {
    u: UnitaryOperator,
    s_layout: SubsystemLayout,
    c_layout: SubsystemLayout,
}

impl DctcInteraction {
    /// The layout of `u` must list every slot of `s_slots` followed by every
    /// slot of `c_slots`.
    pub fn new<S: AsRef<str>>(u: UnitaryOperator, s_slots: &[S], c_slots: &[S]) -> Result<Self> {
        let layout = u.layout();
        let expected: Vec<&str> = s_slots
            .iter()
            .chain(c_slots)
            .map(AsRef::as_ref)
            .collect();
        let actual: Vec<&str> = layout.labels().iter().map(String::as_str).collect();
        if s_slots.is_empty() || c_slots.is_empty() || expected != actual {
            return Err(Error::InvalidArgument(format!(
                "slot partition {expected:?} does not match unitary layout {actual:?}"
            )));
        }
        let s_layout = layout.select(&(0..s_slots.len()).collect::<Vec<_>>())?;
        let c_layout = layout.select(&(s_slots.len()..layout.len()).collect::<Vec<_>>())?;
        Ok(Self { u, s_layout, c_layout })
    }

    pub fn unitary(&self) -> &UnitaryOperator {
        &self.u
    }

    pub fn s_layout(&self) -> &SubsystemLayout {
        &self.s_layout
    }

    pub fn c_layout(&self) -> &SubsystemLayout {
        &self.c_layout
    }

    pub fn d_s(&self) -> usize {
        self.s_layout.total_dim()
    }

    pub fn d_c(&self) -> usize {
        self.c_layout.total_dim()
    }

    fn check_inputs(&self, rho_s: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<()> {
        if rho_s.dim() != self.d_s() {
            return Err(Error::DimensionMismatch {
                expected: self.d_s(),
                found: rho_s.dim(),
            });
        }
        if sigma.dim() != self.d_c() {
            return Err(Error::DimensionMismatch {
                expected: self.d_c(),
                found: sigma.dim(),
            });
        }
        Ok(())
    }

    /// `Tr_{other}[U (a ⊗ b) U†]`, keeping the S group when `keep_s`.
    fn contract(&self, a: &ComplexMatrix, b: &ComplexMatrix, keep_s: bool) -> ComplexMatrix {
        let (d1, d2) = (self.d_s(), self.d_c());
        match self.u.permutation_image() {
            Some(perm) => {
                let zero = C64::new(0.0, 0.0);
                let nz = |m: &ComplexMatrix| -> Vec<(usize, usize, C64)> {
                    let inner = m.inner();
                    let n = m.dim();
                    let mut v = Vec::new();
                    for j in 0..n {
                        for i in 0..n {
                            let z = inner[(i, j)];
                            if z != zero {
                                v.push((i, j, z));
                            }
                        }
                    }
                    v
                };
                let a_nz = nz(a);
                let b_nz = nz(b);
                let out_dim = if keep_s { d1 } else { d2 };
                let mut out = DMatrix::zeros(out_dim, out_dim);
                for &(s, s2, x) in &a_nz {
                    for &(c, c2, y) in &b_nz {
                        let r = perm[s * d2 + c];
                        let r2 = perm[s2 * d2 + c2];
                        if keep_s {
                            if r % d2 == r2 % d2 {
                                out[(r / d2, r2 / d2)] += x * y;
                            }
                        } else if r / d2 == r2 / d2 {
                            out[(r % d2, r2 % d2)] += x * y;
                        }
                    }
                }
                ComplexMatrix::from_inner(out)
            }
            None => {
                let joint = self
                    .u
                    .conjugate(&tensor_product(a, b))
                    .expect("dimensions checked");
                let layout = SubsystemLayout::new([("s", d1), ("c", d2)]).expect("valid");
                let kept = if keep_s { [0] } else { [1] };
                partial_trace_matrix(&joint, &layout, &kept)
                    .expect("dimensions checked")
                    .0
            }
        }
    }
}

/// One application of `Φ_ρ(σ) = Tr_S{U (ρ ⊗ σ) U†}`.
pub fn apply_phi(
    ix: &DctcInteraction,
    rho_s: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<DensityOperator> {
    ix.check_inputs(rho_s.matrix(), sigma.matrix())?;
    let out = ix.contract(rho_s.matrix(), sigma.matrix(), false);
    Ok(DensityOperator::trusted(out.hermitian_part(), ix.c_layout.clone()))
}

/// Chronology-respecting output `Tr_C{U (ρ ⊗ σ) U†}` for a solved fixed point.
pub fn ctc_output(
    ix: &DctcInteraction,
    rho_s: &DensityOperator,
    fp: &FixedPointResult,
) -> Result<DensityOperator> {
    output_for(ix, rho_s, &fp.sigma)
}

pub(crate) fn output_for(
    ix: &DctcInteraction,
    rho_s: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<DensityOperator> {
    ix.check_inputs(rho_s.matrix(), sigma.matrix())?;
    let out = ix.contract(rho_s.matrix(), sigma.matrix(), true);
    Ok(DensityOperator::trusted(out.hermitian_part(), ix.s_layout.clone()))
}

/// `T(Φ_ρ(σ), σ)`.
pub fn consistency_defect(
    ix: &DctcInteraction,
    rho_s: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<f64> {
    trace_distance(&apply_phi(ix, rho_s, sigma)?, sigma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Iterate,
    Spectral,
}

#[derive(Clone, Debug)]
pub struct FixedPointResult {
    pub sigma: DensityOperator,
    /// Applications of `Φ_ρ` that produced `sigma` (iterative method).
    pub iterations: usize,
    /// Trace distance between `sigma` and `Φ_ρ(sigma)`.
    pub residual: f64,
    /// Dimension of the eigenvalue-one space (spectral method only).
    pub ev1_multiplicity: Option<usize>,
    pub method: SolveMethod,
    pub converged: bool,
    /// Residual after each iteration, in order.
    pub residual_history: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct IterateOptions {
    pub tol: f64,
    /// Defaults to `10·d_C² + 100`.
    pub max_iter: Option<usize>,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: None,
        }
    }
}

/// Repeated application of `Φ_ρ` from `sigma0` (maximally mixed by default).
///
/// Iteration `k` produces `σ_k = Φ_ρ(σ_{k−1})` and records the residual
/// `T(Φ_ρ(σ_k), σ_k)`; the solve stops at the first `σ_k` whose residual is
/// within `tol`. A budget overrun returns the last iterate with
/// `converged == false`.
pub fn solve_fixed_point_iterate(
    ix: &DctcInteraction,
    rho_s: &DensityOperator,
    sigma0: Option<&DensityOperator>,
    opts: IterateOptions,
) -> Result<FixedPointResult> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance {} must be positive", opts.tol)));
    }
    let max_iter = opts.max_iter.unwrap_or(10 * ix.d_c() * ix.d_c() + 100).max(1);
    let start = match sigma0 {
        Some(s) => s.clone(),
        None => DensityOperator::maximally_mixed(ix.c_layout.clone()),
    };
    let mut current = apply_phi(ix, rho_s, &start)?;
    let mut history = Vec::new();
    for k in 1..=max_iter {
        let next = apply_phi(ix, rho_s, &current)?;
        let residual = trace_distance(&next, &current)?;
        history.push(residual);
        if residual <= opts.tol || k == max_iter {
            return Ok(FixedPointResult {
                sigma: current,
                iterations: k,
                residual,
                ev1_multiplicity: None,
                method: SolveMethod::Iterate,
                converged: residual <= opts.tol,
                residual_history: history,
            });
        }
        current = next;
    }
    unreachable!("loop returns on the last iteration")
}

/// Matrix of `Φ_ρ` acting on row-major vectorized operators.
pub fn superoperator(ix: &DctcInteraction, rho_s: &DensityOperator) -> Result<DMatrix<C64>> {
    ix.check_inputs(rho_s.matrix(), &ComplexMatrix::zeros(ix.d_c()))?;
    let d = ix.d_c();
    let columns = par::map_indexed(d * d, |k| {
        ix.contract(rho_s.matrix(), &ComplexMatrix::unit(d, k / d, k % d), false)
            .vectorize()
    });
    let mut t = DMatrix::zeros(d * d, d * d);
    for (k, col) in columns.into_iter().enumerate() {
        for (r, z) in col.into_iter().enumerate() {
            t[(r, k)] = z;
        }
    }
    Ok(t)
}

/// Fixed points from the eigenvalue-one space of the superoperator.
///
/// The multiplicity is the nullity of `T − I`; the returned state is the
/// Hilbert–Schmidt projection of the maximally mixed state onto that space,
/// normalized to unit trace and projected onto density operators. When the
/// multiplicity exceeds one the choice is not canonical and the multiplicity
/// says so.
pub fn solve_fixed_point_spectral(
    ix: &DctcInteraction,
    rho_s: &DensityOperator,
    dense_cap: usize,
) -> Result<FixedPointResult> {
    let d = ix.d_c();
    if d * d > dense_cap {
        return Err(Error::DenseCapExceeded {
            dimension: d * d,
            cap: dense_cap,
        });
    }
    let mut t = superoperator(ix, rho_s)?;
    for k in 0..d * d {
        t[(k, k)] -= C64::new(1.0, 0.0);
    }
    let svd = t.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
    let null: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < EIGENVALUE_ONE_TOL)
        .map(|(k, _)| k)
        .collect();
    if null.is_empty() {
        return Err(Error::Numerical(
            "superoperator has no eigenvalue within tolerance of 1".into(),
        ));
    }

    let pi = ComplexMatrix::identity(d).scale(1.0 / d as f64).vectorize();
    let mut proj = vec![C64::new(0.0, 0.0); d * d];
    for &k in &null {
        // Null vector v = (row k of V†)†.
        let row = v_t.row(k);
        let coeff: C64 = row.iter().zip(&pi).map(|(r, p)| r * p).sum();
        for (slot, r) in proj.iter_mut().zip(row.iter()) {
            *slot += r.conj() * coeff;
        }
    }
    let mut m = ComplexMatrix::from_row_major(d, &proj)?.hermitian_part();
    let tr = m.trace().re;
    if tr.abs() > 1e-12 {
        m = m.scale(1.0 / tr);
    }
    let sigma = nearest_density_operator(&m).with_layout(ix.c_layout.clone())?;
    let residual = consistency_defect(ix, rho_s, &sigma)?;
    Ok(FixedPointResult {
        sigma,
        iterations: 0,
        residual,
        ev1_multiplicity: Some(null.len()),
        method: SolveMethod::Spectral,
        converged: true,
        residual_history: Vec::new(),
    })
}
