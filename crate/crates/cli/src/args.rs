use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cantor-fiber", version, about = "Codings, fiber sets and dimensions for C_λ ∩ (C_λ + t)")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunConfig {
    /// Working precision in bits.
    #[arg(long, global = true, env = "CANTOR_FIBER_PRECISION", default_value_t = 128,
          value_parser = clap::value_parser!(u32).range(53..))]
    pub precision: u32,

    /// Relative tolerance for root bracketing.
    #[arg(long, global = true, default_value_t = 1e-12, value_parser = positive)]
    pub tolerance: f64,

    /// Node budget for covers and rasters.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub budget: u64,

    /// Output format (default: csv for psi, gamma and sigma, json otherwise).
    #[arg(long, global = true)]
    pub format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 => Ok(x),
        _ => Err(format!("'{s}' is not a positive number")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Digits of t in base λ.
    Code {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 24)]
        digits: usize,
        /// greedy, lazy or auto
        #[arg(long, default_value = "auto")]
        mode: String,
    },
    /// Certified cover of the fiber of t, with its gaps.
    Cover {
        #[arg(long)]
        t: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// λ-window as `a,b`.
        #[arg(long)]
        window: Option<String>,
    },
    /// Samples of the dimension profile ψ_t.
    Psi {
        #[arg(long)]
        t: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Either a count of evenly spaced λ in (0, 1/3] or a comma-separated list.
        #[arg(long, default_value = "100")]
        samples: String,
    },
    /// Raster of the level-n picture of {(λ, t) : t in E_λ}.
    Gamma {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Grid as `WxH`.
        #[arg(long, default_value = "200x200")]
        grid: String,
    },
    /// All λ in (0, 1/3] with Π(coding, λ) = t.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        coding: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        /// Solve for the coding obtained by flipping the last digit of this word.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "coding")]
        prefix: Option<String>,
        /// plus or minus
        #[arg(long, requires = "prefix", allow_hyphen_values = true)]
        flip: Option<String>,
        /// λ-window for a flipped prefix, as `a,b`.
        #[arg(long)]
        window: Option<String>,
    },
    /// Dimension formulas.
    Dim(DimArgs),
    /// Zero-frequency checkpoints of the oscillating pattern.
    Sigma {
        #[arg(long, default_value_t = 1)]
        q: u32,
        #[arg(long, default_value_t = 12)]
        m: u32,
        /// Also print the first digits of the tail.
        #[arg(long)]
        digits: Option<u64>,
    },
    /// Run the self-verification suite.
    Verify {
        /// acceptance, invariants or all
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Debug, Args)]
pub struct DimArgs {
    /// Intersection dimensions for this coding (needs --lambda).
    #[arg(long, allow_hyphen_values = true)]
    pub coding: Option<String>,
    /// With --coding: the intersection; alone: local dimension of the fiber.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Dimension of the level set with zero-frequency β.
    #[arg(long)]
    pub level_set_beta: Option<String>,
    /// Lower bound for the oscillating pattern (needs --gamma).
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub gamma: Option<String>,
    /// Entropy of a probability vector `p-,p0,p+`.
    #[arg(long)]
    pub entropy: Option<String>,
    /// Box-counting estimate of the fiber cover of t (uses --depth and --window).
    #[arg(long)]
    pub box_count_t: Option<String>,
    #[arg(long, default_value_t = 14)]
    pub depth: usize,
    #[arg(long)]
    pub window: Option<String>,
}
