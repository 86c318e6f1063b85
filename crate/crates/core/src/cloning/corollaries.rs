use super::{run_protocol, CloneRunConfig, CloneRunResult};
use crate::error::{Error, Result};
use crate::qmath::{trace_distance, ComplexMatrix, DensityOperator, SubsystemLayout, C64};

/// Below this trace distance two states are treated as identical.
const DISTINCT_TOL: f64 = 1e-12;

/// `f(ρ̂)` for the protocol's estimate `ρ̂` of `rho`.
pub fn apply_nonlinear_map<F>(f: F, rho: &DensityOperator, cfg: &CloneRunConfig) -> Result<DensityOperator>
where
    F: Fn(&DensityOperator) -> Result<DensityOperator>,
{
    f(&run_protocol(rho, cfg)?.rho_hat)
}

/// Projector onto the leading eigenvector of `rho`.
pub fn nearest_pure_state(rho: &DensityOperator) -> Result<DensityOperator> {
    let (_, vectors) = rho.matrix().hermitian_eigen();
    let top: Vec<C64> = vectors.column(rho.dim() - 1).iter().copied().collect();
    DensityOperator::new(ComplexMatrix::outer(&top), rho.layout().clone())
}

/// Which of `rho0`, `rho1` the protocol's estimate of `input` is closer to
/// in trace distance; ties go to 0.
pub fn discriminate(
    rho0: &DensityOperator,
    rho1: &DensityOperator,
    input: &DensityOperator,
    cfg: &CloneRunConfig,
) -> Result<usize> {
    if trace_distance(rho0, rho1)? <= DISTINCT_TOL {
        return Err(Error::Indistinguishable);
    }
    decide(rho0, rho1, &run_protocol(input, cfg)?.rho_hat)
}

/// The decision rule of [`discriminate`] applied to an existing estimate.
pub fn decide(rho0: &DensityOperator, rho1: &DensityOperator, estimate: &DensityOperator) -> Result<usize> {
    if trace_distance(rho0, rho1)? <= DISTINCT_TOL {
        return Err(Error::Indistinguishable);
    }
    let d0 = trace_distance(estimate, rho0)?;
    let d1 = trace_distance(estimate, rho1)?;
    Ok(usize::from(d1 < d0))
}

/// Best single-shot success probability `(1 + T)/2` for equiprobable states
/// under ordinary quantum measurement.
pub fn helstrom_bound(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<f64> {
    Ok(0.5 * (1.0 + trace_distance(rho0, rho1)?))
}

/// Protocol run on a labeled ensemble.
#[derive(Clone, Debug)]
pub struct MixtureRun {
    /// `Σ_x p(x) ρ_x`, the only thing the CTC sees.
    pub average_state: DensityOperator,
    pub result: CloneRunResult,
    /// Always `false`: the output approximates the average state, not one
    /// clone per label.
    pub per_label_clones: bool,
}

/// Runs the protocol on the ensemble's average state.
pub fn labeled_mixture_behavior(
    ensemble: &[(f64, DensityOperator)],
    cfg: &CloneRunConfig,
) -> Result<MixtureRun> {
    let (_, first) = ensemble.first().ok_or(Error::Empty)?;
    let d = first.dim();
    if let Some(&(w, _)) = ensemble.iter().find(|(w, _)| *w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid weight {w}")));
    }
    let total: f64 = ensemble.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("weights sum to {total}")));
    }
    let mut avg = ComplexMatrix::zeros(d);
    for (w, rho) in ensemble {
        avg = avg.add(&rho.matrix().scale(*w))?;
    }
    let average_state = DensityOperator::new(avg.hermitian_part(), SubsystemLayout::single("S", d)?)?;
    let result = run_protocol(&average_state, cfg)?;
    Ok(MixtureRun {
        average_state,
        result,
        per_label_clones: false,
    })
}
