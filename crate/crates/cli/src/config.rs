use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use dctc_core::cloning::{Mode, PovmChoice};
use dctc_core::ctc::DEFAULT_DENSE_CAP;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FixedPoint,
    Clone,
    Sweep,
    Discriminate,
    Nonlinear,
    Validate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PovmKind {
    Sic,
    Random,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Dense,
    #[default]
    Structured,
}

/// Interaction used by `fixed-point`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionKind {
    #[default]
    Cloner,
    Identity,
}

/// Input state family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// Random state diagonal in the computational basis.
    Diagonal,
    /// Haar-random pure state.
    Pure,
    /// Normalized Ginibre state.
    Mixed,
}

/// Simulator for Deutschian CTC circuits and CTC-assisted cloning.
#[derive(Debug, Parser)]
#[command(name = "dctc-sim", version)]
pub struct Cli {
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    /// Input dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of CTC systems; repeat or separate with commas for a list.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long, value_enum)]
    pub povm: Option<PovmKind>,
    #[arg(long)]
    pub povm_seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeKind>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output data file (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dense_cap: Option<usize>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub interaction: Option<InteractionKind>,
    #[arg(long, value_enum)]
    pub input: Option<InputKind>,
    /// Also render the sweep's median infidelity against N as SVG.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Fill the wall_time column (makes output run-dependent).
    #[arg(long)]
    pub record_wall_time: bool,
    /// Write the resolved configuration as TOML before running.
    #[arg(long)]
    pub save_config: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub inject_fault: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub d: usize,
    pub n: Vec<u64>,
    pub povm: Option<PovmKind>,
    pub povm_seed: u64,
    pub mode: ModeKind,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub dense_cap: usize,
    pub interaction: InteractionKind,
    pub input: Option<InputKind>,
    pub plot: Option<PathBuf>,
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: None,
            d: 2,
            n: Vec::new(),
            povm: None,
            povm_seed: 0,
            mode: ModeKind::Structured,
            trials: None,
            seed: None,
            out: None,
            dense_cap: DEFAULT_DENSE_CAP,
            interaction: InteractionKind::Cloner,
            input: None,
            plot: None,
            record_wall_time: false,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("config file: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError(format!("cannot serialize config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// File values (if any) overridden by every flag that was given.
    pub fn from_cli(cli: &Cli) -> Result<Self, ConfigError> {
        let mut cfg = match &cli.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if cli.command.is_some() {
            cfg.command = cli.command;
        }
        if let Some(d) = cli.d {
            cfg.d = d;
        }
        if !cli.n.is_empty() {
            cfg.n = cli.n.clone();
        }
        if cli.povm.is_some() {
            cfg.povm = cli.povm;
        }
        if let Some(s) = cli.povm_seed {
            cfg.povm_seed = s;
        }
        if let Some(m) = cli.mode {
            cfg.mode = m;
        }
        if cli.trials.is_some() {
            cfg.trials = cli.trials;
        }
        if cli.seed.is_some() {
            cfg.seed = cli.seed;
        }
        if cli.out.is_some() {
            cfg.out = cli.out.clone();
        }
        if let Some(c) = cli.dense_cap {
            cfg.dense_cap = c;
        }
        if let Some(i) = cli.interaction {
            cfg.interaction = i;
        }
        if cli.input.is_some() {
            cfg.input = cli.input;
        }
        if cli.plot.is_some() {
            cfg.plot = cli.plot.clone();
        }
        cfg.record_wall_time |= cli.record_wall_time;
        Ok(cfg)
    }

    pub fn command(&self) -> Result<Command, ConfigError> {
        self.command
            .ok_or_else(|| ConfigError("no command given (use --command or `command` in the config file)".into()))
    }

    pub fn n_list(&self) -> Result<Vec<u64>, ConfigError> {
        if !self.n.is_empty() {
            if self.n.contains(&0) {
                return Err(ConfigError("N must be at least 1".into()));
            }
            return Ok(self.n.clone());
        }
        Ok(match self.command()? {
            Command::FixedPoint => vec![3],
            Command::Clone => vec![10_000],
            Command::Sweep => vec![100, 1_000, 10_000, 100_000, 1_000_000],
            Command::Discriminate | Command::Nonlinear | Command::Validate => vec![1_000_000],
        })
    }

    pub fn trials(&self) -> Result<usize, ConfigError> {
        let t = match self.trials {
            Some(t) => t,
            None => match self.command()? {
                Command::Sweep => 200,
                Command::Discriminate => 1000,
                _ => 1,
            },
        };
        if t == 0 {
            return Err(ConfigError("trials must be positive".into()));
        }
        Ok(t)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn mode(&self) -> Mode {
        match self.mode {
            ModeKind::Dense => Mode::Dense,
            ModeKind::Structured => Mode::Structured,
        }
    }

    pub fn povm_choice(&self) -> Result<PovmChoice, ConfigError> {
        let kind = self.povm.unwrap_or(if self.d == 2 { PovmKind::Sic } else { PovmKind::Random });
        match kind {
            PovmKind::Sic if self.d != 2 => Err(ConfigError(format!(
                "--povm sic needs --d 2 (got {}); use --povm random",
                self.d
            ))),
            PovmKind::Sic => Ok(PovmChoice::Sic),
            PovmKind::Random => Ok(PovmChoice::Random { seed: self.povm_seed }),
        }
    }

    pub fn check_dimension(&self) -> Result<(), ConfigError> {
        if self.d < 2 {
            return Err(ConfigError(format!("--d must be at least 2 (got {})", self.d)));
        }
        Ok(())
    }

    pub fn out_path(&self, command: Command) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let stem = command
                .to_possible_value()
                .map(|v| v.get_name().to_string())
                .unwrap_or_else(|| "out".into());
            PathBuf::from(format!("{stem}.csv"))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("dctc-sim").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file_values() {
        let dir = std::env::temp_dir().join(format!("dctc-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.toml");
        std::fs::write(&path, "command = \"sweep\"\nd = 3\nn = [10, 20]\ntrials = 4\nseed = 9\n").unwrap();
        let cli = parse(&["--config", path.to_str().unwrap(), "--trials", "7", "--n", "5", "--n", "6"]);
        let cfg = ExperimentConfig::from_cli(&cli).unwrap();
        assert_eq!(cfg.command, Some(Command::Sweep));
        assert_eq!(cfg.d, 3);
        assert_eq!(cfg.n, vec![5, 6]);
        assert_eq!(cfg.trials, Some(7));
        assert_eq!(cfg.seed, Some(9));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn comma_lists_and_defaults() {
        let cfg = ExperimentConfig::from_cli(&parse(&["--command", "sweep", "--n", "1,2,3"])).unwrap();
        assert_eq!(cfg.n_list().unwrap(), vec![1, 2, 3]);
        assert_eq!(cfg.trials().unwrap(), 200);
        let cfg = ExperimentConfig::from_cli(&parse(&["--command", "fixed-point"])).unwrap();
        assert_eq!(cfg.n_list().unwrap(), vec![3]);
        assert_eq!(cfg.out_path(Command::FixedPoint), PathBuf::from("fixed-point.csv"));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig {
            command: Some(Command::Discriminate),
            d: 3,
            n: vec![1, 1_000_000],
            povm: Some(PovmKind::Random),
            povm_seed: 17,
            mode: ModeKind::Dense,
            trials: Some(12),
            seed: Some(u64::MAX),
            out: Some(PathBuf::from("a/b.csv")),
            dense_cap: 99,
            interaction: InteractionKind::Identity,
            input: Some(InputKind::Mixed),
            plot: Some(PathBuf::from("p.svg")),
            record_wall_time: true,
        };
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
        let d = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&d.to_toml().unwrap()).unwrap(), d);
    }

    #[test]
    fn invalid_settings_are_config_errors() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        let cfg = ExperimentConfig { d: 3, povm: Some(PovmKind::Sic), ..Default::default() };
        assert!(cfg.povm_choice().is_err());
        assert!(ExperimentConfig::default().command().is_err());
        let cfg = ExperimentConfig { command: Some(Command::Clone), trials: Some(0), ..Default::default() };
        assert!(cfg.trials().is_err());
    }
}
