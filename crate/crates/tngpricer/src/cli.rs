use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "tngpricer", version, about = "Structural-credit pricing of tax-advance guarantee bonds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Price every contract as a risky zero-coupon claim on its obligor.
    PriceBond,
    /// Price the scenario's perpetual coupon bonds.
    PricePerpetual,
    /// Check the bond price surface against the valuation PDE.
    CheckPde,
    /// Simulate correlated first-passage defaults.
    Simulate,
    /// Price the scenario's tranches on simulated pool defaults.
    PriceCdo,
    /// Fit one-factor loadings to a correlation matrix.
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PriceBond => "price-bond",
            Command::PricePerpetual => "price-perpetual",
            Command::CheckPde => "check-pde",
            Command::Simulate => "simulate",
            Command::PriceCdo => "price-cdo",
            Command::Calibrate => "calibrate",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Command::Simulate | Command::PriceCdo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Scenario JSON file.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,

    /// Seed for randomized commands (required by simulate and price-cdo).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Monte Carlo paths (overrides the scenario).
    #[arg(long, global = true)]
    pub paths: Option<usize>,

    /// Time steps per path (overrides the scenario).
    #[arg(long, global = true)]
    pub steps: Option<usize>,

    /// Brownian-bridge barrier correction (overrides the scenario).
    #[arg(long, global = true, value_enum)]
    pub bridge: Option<Switch>,

    /// Recovery fraction on default (overrides the scenario; default 0.4).
    #[arg(long, global = true)]
    pub recovery: Option<f64>,

    /// Square correlation matrix CSV for calibrate.
    #[arg(long, global = true)]
    pub correlation: Option<PathBuf>,
}
