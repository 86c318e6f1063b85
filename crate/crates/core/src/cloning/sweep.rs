use super::{CloneRunConfig, Cloner, DenseVariant, Mode, PovmChoice};
use crate::ctc::DEFAULT_DENSE_CAP;
use crate::error::{Error, Result};
use crate::par;
use crate::qmath::{random_density_operator, DensityOperator, Purity};
use crate::seed;

const STATE_STREAM: u64 = 0;
const SAMPLE_STREAM: u64 = 1;

/// Monte Carlo sweep of the protocol over several `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub d: usize,
    pub n_list: Vec<u64>,
    pub trials: usize,
    pub povm: PovmChoice,
    pub mode: Mode,
    pub seed: u64,
    pub dense_cap: usize,
}

impl SweepConfig {
    pub fn structured(d: usize, n_list: Vec<u64>, trials: usize, seed: u64) -> Self {
        Self {
            d,
            n_list,
            trials,
            povm: CloneRunConfig::structured(d, 1, 0).povm,
            mode: Mode::Structured,
            seed,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

/// One row of sweep output.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub d: usize,
    pub n: u64,
    pub povm: &'static str,
    pub mode: Mode,
    pub fidelity: f64,
    pub trace_distance: f64,
    pub max_freq_error: f64,
}

/// `count` Haar-random pure states of dimension `d`, the `t`-th keyed by
/// `(seed, t)` so the same inputs recur for every `N`.
pub fn haar_pure_inputs(d: usize, count: usize, seed_value: u64) -> Result<Vec<DensityOperator>> {
    (0..count)
        .map(|t| {
            let mut rng = seed::child_rng(seed_value, &[STATE_STREAM, t as u64]);
            random_density_operator(d, Purity::Pure, &mut rng)
        })
        .collect()
}

/// One record per `(N, trial)`, ordered by `N` (as listed) then trial.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<TrialRecord>> {
    if cfg.n_list.is_empty() {
        return Err(Error::InvalidArgument("empty N list".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let inputs = haar_pure_inputs(cfg.d, cfg.trials, cfg.seed)?;
    let mut out = Vec::with_capacity(cfg.n_list.len() * cfg.trials);
    for &n in &cfg.n_list {
        let cloner = Cloner::new(CloneRunConfig {
            d: cfg.d,
            n_ctc: n,
            povm: cfg.povm,
            mode: cfg.mode,
            variant: DenseVariant::Measured,
            n_clones_out: 1,
            seed: cfg.seed,
            dense_cap: cfg.dense_cap,
        })?;
        let rows = par::try_map_indexed(cfg.trials, |t| {
            let trial_seed = seed::derive(cfg.seed, &[SAMPLE_STREAM, n, t as u64]);
            let r = cloner.run_seeded(&inputs[t], trial_seed)?;
            Ok::<_, Error>(TrialRecord {
                seed: trial_seed,
                d: cfg.d,
                n,
                povm: cfg.povm.name(),
                mode: cfg.mode,
                fidelity: r.clone_fidelity,
                trace_distance: r.clone_trace_distance,
                max_freq_error: r.max_freq_error,
            })
        })?;
        out.extend(rows);
    }
    Ok(out)
}

/// Per-`N` quantiles of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub n: u64,
    pub trials: usize,
    pub infidelity_q10: f64,
    pub median_infidelity: f64,
    pub infidelity_q90: f64,
    pub median_trace_distance: f64,
    pub median_max_freq_error: f64,
}

/// Linear-interpolation quantile of unsorted data.
pub(crate) fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Summaries in order of first appearance of each `N`.
pub fn summarize(records: &[TrialRecord]) -> Vec<SweepSummary> {
    let mut ns: Vec<u64> = Vec::new();
    for r in records {
        if !ns.contains(&r.n) {
            ns.push(r.n);
        }
    }
    ns.into_iter()
        .map(|n| {
            let rows: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
            let infid: Vec<f64> = rows.iter().map(|r| 1.0 - r.fidelity).collect();
            let td: Vec<f64> = rows.iter().map(|r| r.trace_distance).collect();
            let fe: Vec<f64> = rows.iter().map(|r| r.max_freq_error).collect();
            SweepSummary {
                n,
                trials: rows.len(),
                infidelity_q10: quantile(&infid, 0.1),
                median_infidelity: quantile(&infid, 0.5),
                infidelity_q90: quantile(&infid, 0.9),
                median_trace_distance: quantile(&td, 0.5),
                median_max_freq_error: quantile(&fe, 0.5),
            }
        })
        .collect()
}
