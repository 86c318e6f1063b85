use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::Rng;

use dctc_core::circuits::{cloner_interaction, ClonerSpec};
use dctc_core::cloning::{
    decide, helstrom_bound, nearest_pure_state, run_sweep, summarize, CloneRunConfig, CloneRunResult, Cloner,
    DenseVariant, SweepConfig,
};
use dctc_core::ctc::{
    solve_fixed_point_iterate, solve_fixed_point_spectral, DctcInteraction, IterateOptions,
};
use dctc_core::qmath::{
    random_density_operator, trace_distance, DensityOperator, Purity, SubsystemLayout, UnitaryOperator, C64,
};
use dctc_core::validation::{run_check, ValidationOptions, CHECK_COUNT};
use dctc_core::{par, seed, Error};

use crate::config::{Command, ConfigError, ExperimentConfig, InputKind, InteractionKind};
use crate::output::{self, ResultRow};

const STATE_STREAM: u64 = 0;
const SAMPLE_STREAM: u64 = 1;

#[derive(Debug)]
pub enum Failure {
    /// A check or solve did not meet its criterion.
    Check(String),
    Config(String),
    Cap(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Check(_) => 1,
            Failure::Config(_) => 2,
            Failure::Cap(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Check(m) | Failure::Config(m) | Failure::Cap(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("I/O error: {e}"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DenseCapExceeded { .. } => Failure::Cap(format!(
                "{e}; lower N, use --mode structured, or raise --dense-cap"
            )),
            Error::Numerical(_) | Error::NotPsd(_) | Error::NotHermitian(_) | Error::InvalidTrace(_) => {
                Failure::Check(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

pub fn run(cfg: &ExperimentConfig, inject_fault: Option<f64>) -> Outcome {
    cfg.check_dimension()?;
    match cfg.command()? {
        Command::FixedPoint => fixed_point(cfg),
        Command::Clone => clone(cfg),
        Command::Sweep => sweep(cfg),
        Command::Discriminate => discriminate(cfg),
        Command::Nonlinear => nonlinear(cfg),
        Command::Validate => validate(cfg, inject_fault),
    }
}

fn input_state(kind: InputKind, d: usize, rng: &mut impl Rng) -> Result<DensityOperator, Failure> {
    Ok(match kind {
        InputKind::Pure => random_density_operator(d, Purity::Pure, rng)?,
        InputKind::Mixed => random_density_operator(d, Purity::Mixed, rng)?,
        InputKind::Diagonal => {
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
            let total: f64 = raw.iter().sum();
            let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
            DensityOperator::diagonal(&probs, SubsystemLayout::single("S", d)?)?
        }
    })
}

fn single_n(cfg: &ExperimentConfig) -> Result<u64, Failure> {
    match cfg.n_list()?.as_slice() {
        [n] => Ok(*n),
        list => Err(Failure::Config(format!("this command takes one N (got {list:?})"))),
    }
}

fn fixed_point(cfg: &ExperimentConfig) -> Outcome {
    let n = usize::try_from(single_n(cfg)?).map_err(|_| Failure::Config("N too large".into()))?;
    let d = cfg.d;
    let mut rng = seed::child_rng(cfg.seed(), &[STATE_STREAM]);
    let rho = input_state(cfg.input.unwrap_or(InputKind::Diagonal), d, &mut rng)?;
    let (ix, input) = match cfg.interaction {
        InteractionKind::Cloner => {
            let spec = ClonerSpec::measured(d, n).with_dense_cap(cfg.dense_cap);
            (cloner_interaction(&spec)?, spec.chronology_input(&rho)?)
        }
        InteractionKind::Identity => {
            let layout = SubsystemLayout::single("S", d)?.concat(&SubsystemLayout::numbered("C", n, d)?)?;
            let total = d.checked_pow(n as u32 + 1).unwrap_or(usize::MAX);
            if total > cfg.dense_cap {
                return Err(Error::DenseCapExceeded { dimension: total, cap: cfg.dense_cap }.into());
            }
            let c_labels: Vec<String> = (1..=n).map(|i| format!("C{i}")).collect();
            (DctcInteraction::new(UnitaryOperator::identity(layout), &["S".to_string()], &c_labels)?, rho)
        }
    };
    eprintln!("solving d={d} N={n} ({:?} interaction, d_S·d_C = {})", cfg.interaction, ix.d_s() * ix.d_c());
    let fp = solve_fixed_point_iterate(&ix, &input, None, IterateOptions::default())?;
    for (k, r) in fp.residual_history.iter().enumerate() {
        println!("iteration {}: residual {r:e}", k + 1);
    }
    let d_c = ix.d_c();
    match d_c.checked_mul(d_c).filter(|&sq| sq <= cfg.dense_cap) {
        Some(_) => {
            let sp = solve_fixed_point_spectral(&ix, &input, cfg.dense_cap)?;
            println!(
                "spectral: eigenvalue-one multiplicity {}, distance to iterate {:e}",
                sp.ev1_multiplicity.unwrap_or(0),
                trace_distance(&sp.sigma, &fp.sigma)?
            );
        }
        None => println!("spectral: skipped (d_C² = {} exceeds the dense cap)", d_c as u128 * d_c as u128),
    }
    let out = cfg.out_path(Command::FixedPoint);
    output::write_residuals(&out, &fp.residual_history)?;
    eprintln!("wrote {}", out.display());
    if fp.converged {
        println!("converged after {} iterations (residual {:e})", fp.iterations, fp.residual);
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "no convergence within {} iterations (residual {:e})",
            fp.iterations, fp.residual
        )))
    }
}

fn row(cfg: &ExperimentConfig, seed_value: u64, r: &CloneRunResult, wall: Option<f64>) -> Result<ResultRow, Failure> {
    Ok(ResultRow {
        seed: seed_value,
        d: cfg.d,
        n: r.n_used,
        povm: cfg.povm_choice()?.name(),
        mode: r.mode,
        fidelity: r.clone_fidelity,
        trace_distance: r.clone_trace_distance,
        max_freq_error: r.max_freq_error,
        wall_time: wall,
    })
}

fn cloner_for(cfg: &ExperimentConfig, n: u64) -> Result<Cloner, Failure> {
    Ok(Cloner::new(CloneRunConfig {
        d: cfg.d,
        n_ctc: n,
        povm: cfg.povm_choice()?,
        mode: cfg.mode(),
        variant: DenseVariant::Measured,
        n_clones_out: 1,
        seed: cfg.seed(),
        dense_cap: cfg.dense_cap,
    })?)
}

/// Runs `trials` protocol instances per `N` on inputs keyed by trial index.
fn protocol_rows(
    cfg: &ExperimentConfig,
    kind: InputKind,
    mut inspect: impl FnMut(u64, usize, &DensityOperator, &CloneRunResult) -> Outcome,
) -> Result<Vec<ResultRow>, Failure> {
    let trials = cfg.trials()?;
    let inputs = (0..trials)
        .map(|t| input_state(kind, cfg.d, &mut seed::child_rng(cfg.seed(), &[STATE_STREAM, t as u64])))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for n in cfg.n_list()? {
        eprintln!("N = {n}: {trials} trial(s)");
        let cloner = cloner_for(cfg, n)?;
        let start = Instant::now();
        let results = par::try_map_indexed(trials, |t| {
            let s = seed::derive(cfg.seed(), &[SAMPLE_STREAM, n, t as u64]);
            cloner.run_seeded(&inputs[t], s).map(|r| (s, r))
        })?;
        let wall = cfg.record_wall_time.then(|| start.elapsed().as_secs_f64() / trials as f64);
        for (t, (s, r)) in results.iter().enumerate() {
            inspect(n, t, &inputs[t], r)?;
            rows.push(row(cfg, *s, r, wall)?);
        }
    }
    Ok(rows)
}

fn finish(cfg: &ExperimentConfig, command: Command, rows: &[ResultRow]) -> Outcome {
    let out = cfg.out_path(command);
    output::write_results(&out, rows)?;
    eprintln!("wrote {} ({} rows)", out.display(), rows.len());
    Ok(())
}

fn clone(cfg: &ExperimentConfig) -> Outcome {
    let rows = protocol_rows(cfg, cfg.input.unwrap_or(InputKind::Pure), |n, t, _, r| {
        println!(
            "N={n} trial {t}: fidelity {:.6} trace distance {:.3e} max frequency error {:.3e}",
            r.clone_fidelity, r.clone_trace_distance, r.max_freq_error
        );
        Ok(())
    })?;
    finish(cfg, Command::Clone, &rows)
}

fn sweep(cfg: &ExperimentConfig) -> Outcome {
    if cfg.input.is_some_and(|k| k != InputKind::Pure) {
        return Err(Failure::Config("sweep inputs are Haar-random pure states; drop --input".into()));
    }
    let trials = cfg.trials()?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for n in cfg.n_list()? {
        eprintln!("N = {n}: {trials} trial(s)");
        let start = Instant::now();
        let batch = run_sweep(&SweepConfig {
            d: cfg.d,
            n_list: vec![n],
            trials,
            povm: cfg.povm_choice()?,
            mode: cfg.mode(),
            seed: cfg.seed(),
            dense_cap: cfg.dense_cap,
        })?;
        let wall = cfg.record_wall_time.then(|| start.elapsed().as_secs_f64() / trials as f64);
        rows.extend(batch.iter().map(|r| ResultRow {
            seed: r.seed,
            d: r.d,
            n: r.n,
            povm: r.povm,
            mode: r.mode,
            fidelity: r.fidelity,
            trace_distance: r.trace_distance,
            max_freq_error: r.max_freq_error,
            wall_time: wall,
        }));
        records.extend(batch);
    }
    let summary = summarize(&records);
    println!("N\tmedian infidelity\tq10\tq90\tmedian trace distance");
    for s in &summary {
        println!(
            "{}\t{:.3e}\t{:.3e}\t{:.3e}\t{:.3e}",
            s.n, s.median_infidelity, s.infidelity_q10, s.infidelity_q90, s.median_trace_distance
        );
    }
    finish(cfg, Command::Sweep, &rows)?;
    let out = cfg.out_path(Command::Sweep);
    let summary_out = output::summary_path(&out);
    output::write_summary(&summary_out, &summary)?;
    eprintln!("wrote {}", summary_out.display());
    if let Some(plot) = &cfg.plot {
        write_text(plot, &output::render_svg(&summary))?;
        eprintln!("wrote {}", plot.display());
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)
}

/// `|0⟩` and the uniform superposition.
fn discrimination_pair(d: usize) -> Result<(DensityOperator, DensityOperator), Failure> {
    let layout = SubsystemLayout::single("S", d)?;
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    Ok((DensityOperator::basis_state(layout.clone(), 0)?, DensityOperator::pure(&vec![amp; d], layout)?))
}

fn discriminate(cfg: &ExperimentConfig) -> Outcome {
    let n = single_n(cfg)?;
    let trials = cfg.trials()?;
    let (rho0, rho1) = discrimination_pair(cfg.d)?;
    let cloner = cloner_for(cfg, n)?;
    eprintln!("discriminating |0⟩ from the uniform superposition: N = {n}, {trials} trials");
    let start = Instant::now();
    let results = par::try_map_indexed(trials, |t| {
        let truth = usize::from(seed::child_rng(cfg.seed(), &[STATE_STREAM, t as u64]).random::<bool>());
        let s = seed::derive(cfg.seed(), &[SAMPLE_STREAM, n, t as u64]);
        let r = cloner.run_seeded(if truth == 0 { &rho0 } else { &rho1 }, s)?;
        let guess = decide(&rho0, &rho1, &r.rho_hat)?;
        Ok::<_, Error>((s, r, guess == truth))
    })?;
    let wall = cfg.record_wall_time.then(|| start.elapsed().as_secs_f64() / trials as f64);
    let hits = results.iter().filter(|(_, _, ok)| *ok).count();
    let rate = hits as f64 / trials as f64;
    println!(
        "success rate {rate:.4} ({hits}/{trials}); linear-measurement (Helstrom) bound {:.4}",
        helstrom_bound(&rho0, &rho1)?
    );
    let rows = results
        .iter()
        .map(|(s, r, _)| row(cfg, *s, r, wall))
        .collect::<Result<Vec<_>, _>>()?;
    finish(cfg, Command::Discriminate, &rows)
}

fn nonlinear(cfg: &ExperimentConfig) -> Outcome {
    let mut worst: f64 = 0.0;
    let rows = protocol_rows(cfg, cfg.input.unwrap_or(InputKind::Mixed), |n, t, rho, r| {
        let target = nearest_pure_state(rho)?;
        let got = nearest_pure_state(&r.rho_hat)?;
        let dist = trace_distance(&got, &target)?;
        worst = worst.max(dist);
        println!("N={n} trial {t}: T(f(ρ̂), f(ρ)) = {dist:.3e} for f = nearest pure state");
        Ok(())
    })?;
    println!("max T(f(ρ̂), f(ρ)) = {worst:.3e}");
    finish(cfg, Command::Nonlinear, &rows)
}

fn validate(cfg: &ExperimentConfig, inject_fault: Option<f64>) -> Outcome {
    let mut opts = ValidationOptions::default();
    if let Some(s) = cfg.seed {
        opts.seed = s;
    }
    opts.frame_fault = inject_fault;
    let mut failed = Vec::new();
    for id in 1..=CHECK_COUNT {
        eprintln!("running check {id}/{CHECK_COUNT}");
        let report = run_check(id, &opts)?;
        println!("{report}");
        if !report.passed {
            failed.push(format!("[{}] {}", report.id, report.name));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
    }
}
