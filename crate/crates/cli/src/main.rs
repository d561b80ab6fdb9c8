mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "ionstring",
    version,
    about = "Normal modes, stability and heating of three-species ion strings"
)]
pub struct Cli {
    /// Output format for results on stdout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    pub format: Format,
    /// Suppress notes on stderr and the file listing of `figure`.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Extra species definitions (`name mass_u [charge]` per line).
    #[arg(long, global = true, value_name = "FILE")]
    pub species_file: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchArg {
    Axial,
    Transverse,
}

impl From<BranchArg> for ionstring::Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Axial => ionstring::Branch::Axial,
            BranchArg::Transverse => ionstring::Branch::Transverse,
        }
    }
}

/// Transverse confinement, either absolute or relative to the instability.
#[derive(Args, Debug, Clone, Copy)]
pub struct Anisotropy {
    /// Trap anisotropy ε = ω_r0/ω_z (transverse branch).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "epsilon_ratio")]
    pub epsilon: Option<f64>,
    /// ε as a multiple of the instability threshold ε_s (transverse branch).
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon_ratio: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct Crystal {
    /// Number of ions (odd, 3..=25).
    #[arg(long)]
    pub n: usize,
    /// Center-to-outer mass ratio μ = M/m.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, value_enum, default_value_t = BranchArg::Axial)]
    pub branch: BranchArg,
    #[command(flatten)]
    pub anisotropy: Anisotropy,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Equilibrium positions in units of the length scale ℓ.
    Equilibrium {
        #[arg(long)]
        n: usize,
    },
    /// Normal-mode frequencies and eigenvectors.
    Modes(Crystal),
    /// Critical anisotropy ε_s at one mass ratio, or sampled over a range.
    Stability {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["mu_min", "mu_max"])]
        mu: Option<f64>,
        #[arg(long, allow_negative_numbers = true, requires = "mu_max")]
        mu_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true, requires = "mu_min")]
        mu_max: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Mode heating rates from a uniform noisy field.
    Heating {
        #[arg(long)]
        n: usize,
        /// Mass ratio; taken from the species when `--physical` is given.
        #[arg(
            long,
            allow_negative_numbers = true,
            required_unless_present = "physical"
        )]
        mu: Option<f64>,
        #[arg(long, value_enum, default_value_t = BranchArg::Axial)]
        branch: BranchArg,
        #[command(flatten)]
        anisotropy: Anisotropy,
        /// Also report absolute rates in quanta per second.
        #[arg(long, requires_all = ["outer", "center", "fz_mhz", "se"])]
        physical: bool,
        #[arg(long)]
        outer: Option<String>,
        #[arg(long)]
        center: Option<String>,
        /// Axial frequency of a single outer ion, in MHz.
        #[arg(long, allow_negative_numbers = true)]
        fz_mhz: Option<f64>,
        /// Field noise spectral density S_E in V² m⁻² Hz⁻¹.
        #[arg(long, allow_negative_numbers = true)]
        se: Option<f64>,
    },
    /// Time samples of one excited mode.
    Trajectory {
        #[command(flatten)]
        crystal: Crystal,
        /// Mode number, 1 = lowest frequency.
        #[arg(long)]
        mode: usize,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        phase: f64,
        /// End time in units of 1/ω_z.
        #[arg(long, allow_negative_numbers = true)]
        t_max: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Spectrum and spacings in laboratory units for a species pair.
    Physical {
        #[arg(long)]
        outer: String,
        #[arg(long)]
        center: String,
        /// Axial frequency of a single outer ion, in MHz.
        #[arg(long, allow_negative_numbers = true)]
        fz_mhz: f64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, default_value_t = BranchArg::Axial)]
        branch: BranchArg,
        /// Radial confinement as a multiple of ε_s (transverse branch).
        #[arg(long, allow_negative_numbers = true, default_value_t = ionstring::sweep::FIGURE_EPSILON_RATIO)]
        epsilon_ratio: f64,
    },
    /// Write the CSV dataset of one figure, one file per panel.
    Figure {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        id: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Show the species table, optionally merged with a file.
    #[command(group = clap::ArgGroup::new("action").required(true))]
    Species {
        #[arg(long, group = "action")]
        list: bool,
        /// Validate a species file and show the merged table.
        #[arg(long, group = "action", value_name = "FILE")]
        add: Option<PathBuf>,
    },
}

/// Input rejected before any numerical work.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some()
        || err.downcast_ref::<ionstring::ConfigError>().is_some()
    {
        return 2;
    }
    match err.downcast_ref::<ionstring::Error>() {
        Some(e) if e.is_validation() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let msg = format!("{err:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&err))
        }
    }
}
