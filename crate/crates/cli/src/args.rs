//! Command-line surface and config-file merging.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use hepp_core::model::NoiseModel;
use hepp_core::protocol::ReusePolicy;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "hepp",
    version,
    about = "Two-step hyperentanglement-assisted entanglement purification: engine runs, closed-form curves and checks",
    args_override_self = true
)]
pub struct Cli {
    /// File of `key=value` lines (keys are flag names, `#` starts a
    /// comment). Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to PATH instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One engine run at a point, per outcome class, beside the closed forms.
    #[command(args_override_self = true)]
    Purify(PurifyArgs),
    /// Step or failure-branch weights along one parameter, or a figure table.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Criterion bands on the grids of figures 3 and 5.
    #[command(args_override_self = true)]
    Thresholds(ThresholdArgs),
    /// E_o, E_n and their ratio against distribution distance.
    #[command(args_override_self = true)]
    Efficiency(EfficiencyArgs),
    /// Engine against closed forms on a grid, plus the step-2 map check.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Repeated rounds with fresh spatial and time-bin pairs.
    #[command(args_override_self = true)]
    Iterate(IterateArgs),
}

impl Command {
    pub const NAMES: [&'static str; 6] =
        ["purify", "sweep", "thresholds", "efficiency", "verify", "iterate"];
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Noise {
    /// Bit-flip-only spatial and time-bin pairs.
    Bitflip,
    /// Werner pairs in every degree of freedom.
    General,
}

impl From<Noise> for NoiseModel {
    fn from(n: Noise) -> NoiseModel {
        match n {
            Noise::Bitflip => NoiseModel::BitFlipOnly,
            Noise::General => NoiseModel::FullWerner,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vary {
    Pp,
    Ps,
    Pt,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// Step-1 success.
    Step1,
    /// Step-2 success after step-1 success.
    Step2,
    /// Step-2 success after step-1 failure.
    Fail1,
    /// Step-2 failure after step-1 success.
    Fail2,
    /// Both steps fail.
    Fail3,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reuse {
    /// Keep the class with the highest Phi+ weight.
    Best,
    /// Keep only the both-steps-succeeded class.
    SuccessOnly,
}

impl From<Reuse> for ReusePolicy {
    fn from(r: Reuse) -> ReusePolicy {
        match r {
            Reuse::Best => ReusePolicy::KeepBestBranch,
            Reuse::SuccessOnly => ReusePolicy::KeepBothSuccessOnly,
        }
    }
}

#[derive(Args, Debug)]
pub struct PurifyArgs {
    #[arg(long)]
    pub pp: f64,
    #[arg(long)]
    pub ps: f64,
    #[arg(long)]
    pub pt: f64,
    #[arg(long, value_enum, default_value_t = Noise::General)]
    pub noise: Noise,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).args(["vary", "figure"])))]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub vary: Option<Vary>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    /// Fixed values for the parameters not being varied.
    #[arg(long)]
    pub pp: Option<f64>,
    #[arg(long)]
    pub ps: Option<f64>,
    #[arg(long)]
    pub pt: Option<f64>,
    #[arg(long, value_enum, default_value_t = Noise::General)]
    pub noise: Noise,
    #[arg(long, value_enum, default_value_t = Target::Step1)]
    pub target: Target,
    /// Emit the full curve table of figure 2, 4, 7, 8 or 9 instead.
    #[arg(long)]
    pub figure: Option<u32>,
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    /// 3: p_s band against p_p; 5: p_t band against p_s at fixed p_p.
    #[arg(long)]
    pub figure: u32,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fixed p_p for figure 5.
    #[arg(long, default_value_t = 0.65)]
    pub pp: f64,
}

#[derive(Args, Debug)]
pub struct EfficiencyArgs {
    /// Fidelity set; omit all three for both published cases.
    #[arg(long)]
    pub pp: Option<f64>,
    #[arg(long)]
    pub ps: Option<f64>,
    #[arg(long)]
    pub pt: Option<f64>,
    /// Attenuation length in km.
    #[arg(long, default_value_t = 25.0)]
    pub d0: f64,
    #[arg(long, default_value_t = 0.9)]
    pub eta_d: f64,
    #[arg(long, default_value_t = 0.95)]
    pub eta_c: f64,
    #[arg(long, default_value_t = 0.0)]
    pub d_from: f64,
    #[arg(long, default_value_t = 100.0)]
    pub d_to: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    /// Only 6 is accepted; present so figure scripts can name it.
    #[arg(long)]
    pub figure: Option<u32>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Points per axis on [0.55, 0.95].
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct IterateArgs {
    #[arg(long)]
    pub pp: f64,
    #[arg(long)]
    pub ps: f64,
    #[arg(long)]
    pub pt: f64,
    #[arg(long, value_enum, default_value_t = Noise::General)]
    pub noise: Noise,
    #[arg(long, default_value_t = 3)]
    pub rounds: usize,
    #[arg(long, value_enum, default_value_t = Reuse::SuccessOnly)]
    pub reuse: Reuse,
}

const VALUE_GLOBALS: [&str; 3] = ["--config", "--format", "--out"];

/// Path given to `--config`, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    let mut found = None;
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            found = it.next().cloned();
        } else if let Some(v) = s.strip_prefix("--config=") {
            found = Some(v.into());
        }
    }
    found
}

/// Index of the subcommand token.
fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if VALUE_GLOBALS.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if Command::NAMES.contains(&s.as_ref()) {
            return Some(i);
        }
        if !s.starts_with('-') {
            return None;
        }
        i += 1;
    }
    None
}

/// `key=value` lines as `--key value` pairs.
pub fn parse_config(text: &str) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", n + 1)))?;
        let key = k.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(CliError::Config(format!("line {}: invalid key `{}`", n + 1, k.trim())));
        }
        out.push(format!("--{key}").into());
        out.push(v.trim().into());
    }
    Ok(out)
}

/// Splices config-file flags directly after the subcommand so that later
/// command-line occurrences override them.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::Config(format!("cannot read {}: {e}", path.to_string_lossy()))
    })?;
    let extra = parse_config(&text)?;
    let at = subcommand_index(&args).map_or(args.len(), |i| i + 1);
    let mut merged = args[..at].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[at..]);
    Ok(merged)
}
