//! Approximate cloning through a CTC.
//!
//! The protocol measures the input with an informationally complete
//! measurement, copies the classical outcome state `ω` onto `N` ancillas
//! through the cloner interaction, counts outcome frequencies on the
//! ancillas, and reconstructs `ρ̂` by linear inversion. Any number of clones
//! can then be prepared from `ρ̂`.
//!
//! Two execution modes share the estimator:
//! - `Dense` builds the cloner interaction, solves its fixed point, checks
//!   that the ancilla marginal is `ω^⊗N`, and measures the ancillas once.
//! - `Structured` skips the solve and draws the `N` outcomes directly from
//!   `Tr{M_x ρ}`, which is what the dense model produces whenever it fits.

mod corollaries;
mod sampling;
mod sweep;

use std::fmt;

pub use corollaries::{
    apply_nonlinear_map, decide, discriminate, helstrom_bound, labeled_mixture_behavior,
    nearest_pure_state, MixtureRun,
};
pub use sampling::{
    empirical_frequencies, hoeffding_bound, plan_samples, required_n, sample_counts, SamplePlan,
};
pub use sweep::{haar_pure_inputs, run_sweep, summarize, SweepConfig, SweepSummary, TrialRecord};

use rand::Rng;

use crate::circuits::{cloner_interaction, ClonerSpec};
use crate::ctc::{ctc_output, solve_fixed_point_iterate, FixedPointResult, IterateOptions, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::povm::{
    build_frame, measurement_map, outcome_probabilities, random_ic_povm, reconstruct, sic_qubit,
    stinespring_unitary, Povm, ReconstructionFrame,
};
use crate::qmath::{
    apply_unitary, fidelity, partial_trace, trace_distance, DensityOperator, SubsystemLayout,
};
use crate::seed;

/// Largest `N` accepted in structured mode.
pub const MAX_STRUCTURED_N: u64 = 100_000_000;
/// Allowed trace distance between the dense ancilla marginal and `ω^⊗N`.
pub const DENSE_MARGINAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PovmChoice {
    /// The qubit SIC measurement (`d = 2` only).
    Sic,
    Random { seed: u64 },
}

impl PovmChoice {
    pub fn build(&self, d: usize) -> Result<Povm> {
        match *self {
            PovmChoice::Sic if d == 2 => Ok(sic_qubit()),
            PovmChoice::Sic => Err(Error::InvalidArgument(format!(
                "the SIC measurement is only built for d = 2 (got d = {d})"
            ))),
            PovmChoice::Random { seed } => random_ic_povm(d, seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PovmChoice::Sic => "sic",
            PovmChoice::Random { .. } => "random",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Dense,
    Structured,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Dense => "dense",
            Mode::Structured => "structured",
        })
    }
}

/// Which cloner circuit dense mode simulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DenseVariant {
    /// `ω` enters the cloner directly.
    Measured,
    /// The measurement is dilated and the `(E, B)` pairs traverse the CTC.
    Coherent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CloneRunConfig {
    pub d: usize,
    pub n_ctc: u64,
    pub povm: PovmChoice,
    pub mode: Mode,
    pub variant: DenseVariant,
    pub n_clones_out: usize,
    pub seed: u64,
    pub dense_cap: usize,
}

impl CloneRunConfig {
    pub fn structured(d: usize, n_ctc: u64, seed: u64) -> Self {
        Self {
            d,
            n_ctc,
            povm: if d == 2 { PovmChoice::Sic } else { PovmChoice::Random { seed: 0 } },
            mode: Mode::Structured,
            variant: DenseVariant::Measured,
            n_clones_out: 1,
            seed,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn dense(d: usize, n_ctc: u64, seed: u64) -> Self {
        Self {
            mode: Mode::Dense,
            ..Self::structured(d, n_ctc, seed)
        }
    }

    pub fn with_povm(mut self, povm: PovmChoice) -> Self {
        self.povm = povm;
        self
    }

    pub fn with_clones(mut self, n: usize) -> Self {
        self.n_clones_out = n;
        self
    }

    pub fn with_variant(mut self, variant: DenseVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidArgument(format!("dimension {} < 2", self.d)));
        }
        if self.n_ctc == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        if self.mode == Mode::Structured && self.n_ctc > MAX_STRUCTURED_N {
            return Err(Error::InvalidArgument(format!(
                "N = {} exceeds the structured-mode limit {MAX_STRUCTURED_N}",
                self.n_ctc
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CloneRunResult {
    pub rho_in: DensityOperator,
    /// `Tr{M_x ρ}`.
    pub probs: Vec<f64>,
    pub empirical_freqs: Vec<f64>,
    pub rho_hat: DensityOperator,
    pub clone_fidelity: f64,
    pub clone_trace_distance: f64,
    /// `max_x |f_x − p_x|`.
    pub max_freq_error: f64,
    pub n_used: u64,
    pub mode: Mode,
    pub n_clones_out: usize,
}

impl CloneRunResult {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.clone_fidelity
    }

    /// The requested clones; each is the reconstructed state.
    pub fn clones(&self) -> impl Iterator<Item = &DensityOperator> {
        std::iter::repeat_n(&self.rho_hat, self.n_clones_out)
    }

    /// `ρ̂^⊗k` on slots `K1 … Kk`.
    pub fn joint_clones(&self, k: usize) -> Result<DensityOperator> {
        self.rho_hat.tensor_power(k, "K")
    }
}

/// Dense simulation of the cloner for one input: the solved fixed point, the
/// ancilla marginal and its computational-basis outcome distribution.
#[derive(Clone, Debug)]
pub struct DenseAncillaModel {
    pub fixed_point: FixedPointResult,
    pub ancillas: DensityOperator,
    /// Trace distance between the ancilla marginal and `ω^⊗N`.
    pub marginal_defect: f64,
    /// Joint outcome distribution over `d_out^N` ancilla readings.
    pub joint_probs: Vec<f64>,
    d_out: usize,
    n: usize,
}

impl DenseAncillaModel {
    pub fn build(
        povm: &Povm,
        rho: &DensityOperator,
        n: usize,
        variant: DenseVariant,
        dense_cap: usize,
    ) -> Result<Self> {
        let d_out = povm.d_out();
        let omega = measurement_map(povm, rho)?;
        let (spec, input) = match variant {
            DenseVariant::Measured => {
                let spec = ClonerSpec::measured(d_out, n).with_dense_cap(dense_cap);
                (spec, omega.clone())
            }
            DenseVariant::Coherent => {
                let spec = ClonerSpec::coherent(povm.d_in(), d_out, n).with_dense_cap(dense_cap);
                (spec, dilated_input(povm, rho)?)
            }
        };
        let ix = cloner_interaction(&spec)?;
        let input = spec.chronology_input(&input)?;
        let fixed_point = solve_fixed_point_iterate(&ix, &input, None, IterateOptions::default())?;
        if !fixed_point.converged {
            return Err(Error::Numerical(format!(
                "cloner fixed point did not converge (residual {:e})",
                fixed_point.residual
            )));
        }
        let out = ctc_output(&ix, &input, &fixed_point)?;
        let ancillas = partial_trace(&out, &spec.ancilla_labels())?;
        let expected = omega.tensor_power(n, "A")?;
        let marginal_defect = trace_distance(&ancillas, &expected)?;
        if marginal_defect > DENSE_MARGINAL_TOL {
            return Err(Error::Numerical(format!(
                "ancilla marginal differs from the product of measured states by {marginal_defect:e}"
            )));
        }
        let mut joint_probs = ancillas.diagonal_probabilities();
        let total: f64 = joint_probs.iter().sum();
        joint_probs.iter_mut().for_each(|p| *p /= total);
        Ok(Self {
            fixed_point,
            ancillas,
            marginal_defect,
            joint_probs,
            d_out,
            n,
        })
    }

    /// One computational-basis measurement of all ancillas.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let idx = sampling::sample_index(&self.joint_probs, rng);
        let layout = SubsystemLayout::numbered("A", self.n, self.d_out).expect("valid layout");
        layout.decode(idx)
    }
}

/// `U_ICM (ρ ⊗ |0⟩⟨0|) U_ICM†` on slots `(E, B)`.
pub fn dilated_input(povm: &Povm, rho: &DensityOperator) -> Result<DensityOperator> {
    let u = stinespring_unitary(povm)?;
    let e = rho.clone().relabel("E")?;
    let b = DensityOperator::basis_state(SubsystemLayout::single("B", povm.d_out())?, 0)?;
    apply_unitary(&e.tensor(&b)?, &u)
}

/// The protocol with its measurement and reconstruction frame prepared.
#[derive(Clone, Debug)]
pub struct Cloner {
    cfg: CloneRunConfig,
    frame: ReconstructionFrame,
}

impl Cloner {
    pub fn new(cfg: CloneRunConfig) -> Result<Self> {
        cfg.validate()?;
        let povm = cfg.povm.build(cfg.d)?;
        let frame = build_frame(&povm)?;
        if cfg.mode == Mode::Dense {
            let dim = dense_dimension(&cfg, &povm);
            if dim.is_none_or(|dim| dim > cfg.dense_cap) {
                return Err(Error::DenseCapExceeded {
                    dimension: dim.unwrap_or(usize::MAX),
                    cap: cfg.dense_cap,
                });
            }
        }
        Ok(Self { cfg, frame })
    }

    /// Replaces the reconstruction frame (fault injection in validation).
    pub fn with_frame(mut self, frame: ReconstructionFrame) -> Self {
        self.frame = frame;
        self
    }

    pub fn config(&self) -> &CloneRunConfig {
        &self.cfg
    }

    pub fn povm(&self) -> &Povm {
        self.frame.povm()
    }

    pub fn frame(&self) -> &ReconstructionFrame {
        &self.frame
    }

    pub fn run(&self, rho: &DensityOperator) -> Result<CloneRunResult> {
        self.run_seeded(rho, self.cfg.seed)
    }

    /// Runs with `seed` in place of the configured seed.
    pub fn run_seeded(&self, rho: &DensityOperator, seed_value: u64) -> Result<CloneRunResult> {
        let cfg = &self.cfg;
        if rho.dim() != cfg.d {
            return Err(Error::DimensionMismatch {
                expected: cfg.d,
                found: rho.dim(),
            });
        }
        let rho_in = rho.clone().relabel("S")?;
        let povm = self.povm();
        let probs = outcome_probabilities(povm, &rho_in)?;
        let mut rng = seed::child_rng(seed_value, &[0]);
        let counts = match cfg.mode {
            Mode::Structured => sample_counts(&probs, cfg.n_ctc, &mut rng)?,
            Mode::Dense => {
                let model =
                    DenseAncillaModel::build(povm, &rho_in, cfg.n_ctc as usize, cfg.variant, cfg.dense_cap)?;
                let mut counts = vec![0u64; povm.d_out()];
                for x in model.sample(&mut rng) {
                    counts[x] += 1;
                }
                counts
            }
        };
        let n = cfg.n_ctc as f64;
        let empirical_freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        let max_freq_error = empirical_freqs
            .iter()
            .zip(&probs)
            .map(|(f, p)| (f - p).abs())
            .fold(0.0, f64::max);
        let rho_hat = reconstruct(&self.frame, &empirical_freqs)?;
        Ok(CloneRunResult {
            clone_fidelity: fidelity(&rho_in, &rho_hat)?,
            clone_trace_distance: trace_distance(&rho_in, &rho_hat)?,
            rho_in,
            probs,
            empirical_freqs,
            rho_hat,
            max_freq_error,
            n_used: cfg.n_ctc,
            mode: cfg.mode,
            n_clones_out: cfg.n_clones_out,
        })
    }
}

fn dense_dimension(cfg: &CloneRunConfig, povm: &Povm) -> Option<usize> {
    let n = u32::try_from(cfg.n_ctc).ok()?;
    let d_out = povm.d_out();
    let base = match cfg.variant {
        DenseVariant::Measured => d_out,
        DenseVariant::Coherent => d_out.checked_mul(povm.d_in())?,
    };
    base.checked_pow(n + 1)?.checked_mul(d_out.checked_pow(n)?)
}

/// Runs the five-step protocol once.
pub fn run_protocol(rho: &DensityOperator, cfg: &CloneRunConfig) -> Result<CloneRunResult> {
    Cloner::new(cfg.clone())?.run(rho)
}
