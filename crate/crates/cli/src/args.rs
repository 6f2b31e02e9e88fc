use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kropina_core::kropina::Mode;

#[derive(Debug, Parser)]
#[command(name = "kropina", version, about = "Curvature of Kropina metrics F = α²/β")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every closed-form and pipeline quantity at one (x, y).
    Eval(RunArgs),
    /// Compare closed forms with the differentiation pipeline on sampled (x, y).
    Verify(RunArgs),
    /// Decide whether the metric has isotropic scalar curvature.
    Classify(RunArgs),
    /// List the built-in fields, or print one field document.
    Catalog(CatalogArgs),
    /// Verification and classification in one document.
    Report(RunArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Field document (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Built-in field.
    #[arg(long, value_name = "NAME")]
    pub catalog: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub points: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub dirs: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = ModeArg::General)]
    pub mode: ModeArg,
    /// Point for `eval`, comma separated.
    #[arg(long, value_name = "x1,x2,...", value_parser = coordinates, allow_hyphen_values = true)]
    pub point: Option<Coords>,
    /// Direction for `eval`, comma separated.
    #[arg(long, value_name = "y1,y2,...", value_parser = coordinates, allow_hyphen_values = true)]
    pub dir: Option<Coords>,
    /// Include the individual terms of the long closed-form sums.
    #[arg(long)]
    pub verbose_terms: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CatalogArgs {
    /// Print this entry's document instead of the list.
    #[arg(long, value_name = "NAME")]
    pub catalog: Option<String>,
    /// Seed for generated entries.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Md,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    General,
    S0Zero,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::General => Mode::General,
            ModeArg::S0Zero => Mode::S0Zero,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive finite number".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Comma-separated coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

fn coordinates(s: &str) -> Result<Coords, String> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| format!("'{}' is not a number", t.trim()))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("'{}' is not finite", t.trim()))
            }
        })
        .collect::<Result<_, _>>()
        .map(Coords)
}
