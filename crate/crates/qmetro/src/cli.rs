use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Name of a value as typed on the command line.
pub fn flag_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

/// Inclusive photon-number range written `a..b`, `a..=b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub start: usize,
    pub end: usize,
}

impl NRange {
    pub fn iter(self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad photon number `{t}`"));
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let n = num(s)?;
                (n, n)
            }
        };
        if start == 0 {
            return Err("photon numbers start at 1".into());
        }
        if end < start {
            return Err(format!("empty range {s}"));
        }
        Ok(NRange { start, end })
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}..{}", self.start, self.end)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundModel {
    Loss,
    Dephasing,
    PhaseDiffusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostKind {
    Ideal,
    Loss,
    PhaseDiffusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QfiModel {
    Ideal,
    Loss,
    Dephasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Noon,
    Sine,
    Balanced,
    TwinFock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureMethod {
    Qfi,
    Bayes,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "qmetro", version, about = "Precision limits for lossy and noisy optical interferometry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the randomised restarts of the simulation-bound optimiser.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,
}

/// Noise strengths; which ones are needed depends on the model.
#[derive(Debug, Clone, Copy, Args)]
pub struct Noise {
    /// Transmission (loss) or visibility (dephasing), used for both arms.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eta_a: Option<f64>,
    #[arg(long)]
    pub eta_b: Option<f64>,
    /// Phase-diffusion variance.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Asymptotic precision bounds.
    Bounds {
        #[arg(long, value_enum)]
        model: BoundModel,
        #[command(flatten)]
        noise: Noise,
        #[arg(long)]
        n: NRange,
        /// Add the finite-N classical- and quantum-simulation bounds.
        #[arg(long)]
        simulation: bool,
    },
    /// Optimal input for the Bayesian circular cost.
    OptimalState {
        #[arg(long, value_enum, default_value_t = CostKind::Ideal)]
        model: CostKind,
        #[command(flatten)]
        noise: Noise,
        #[arg(long)]
        n: usize,
    },
    /// Minimal Bayesian cost over a range of N.
    CostTable {
        #[arg(long, value_enum, default_value_t = CostKind::Ideal)]
        model: CostKind,
        #[command(flatten)]
        noise: Noise,
        #[arg(long)]
        n: NRange,
    },
    /// Quantum Fisher information of a named input.
    Qfi {
        #[arg(long, value_enum)]
        state: StateKind,
        #[arg(long, value_enum, default_value_t = QfiModel::Ideal)]
        model: QfiModel,
        #[command(flatten)]
        noise: Noise,
        #[arg(long)]
        n: NRange,
    },
    /// Optimal, NOON, bound and coherent+squeezed precision under equal loss.
    FigureLoss {
        #[arg(long, default_value_t = 0.9)]
        eta: f64,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = FigureMethod::Qfi)]
        method: FigureMethod,
        /// Iteration budget of the optimal-state search.
        #[arg(long, default_value_t = 300)]
        iterations: usize,
    },
    /// Gap between a squeezed interferometer and the loss bound.
    LigoCheck {
        #[arg(long, default_value_t = 0.62)]
        eta: f64,
        /// Squeezing as the noise-power factor e^{-2r}.
        #[arg(long, default_value_t = 0.1)]
        squeeze_factor: f64,
    },
    /// Estimators for the binomial model.
    Binomial {
        #[arg(long)]
        trials: usize,
        /// Success probability at which Fisher information and CRB are reported.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        repetitions: f64,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!("1..100".parse::<NRange>().unwrap(), NRange { start: 1, end: 100 });
        assert_eq!("3..=5".parse::<NRange>().unwrap(), NRange { start: 3, end: 5 });
        assert_eq!("10".parse::<NRange>().unwrap(), NRange { start: 10, end: 10 });
        assert!("5..2".parse::<NRange>().is_err());
        assert!("0..4".parse::<NRange>().is_err());
        assert!("x".parse::<NRange>().is_err());
        assert_eq!(NRange { start: 1, end: 4 }.to_string(), "1..4");
    }

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["qmetro", "bounds", "--model", "loss", "--eta", "0.9", "--n", "1..100"]).unwrap();
        assert!(matches!(cli.command, Command::Bounds { model: BoundModel::Loss, .. }));
        assert_eq!(cli.format, Format::Csv);
        assert!(Cli::try_parse_from(["qmetro", "bounds", "--model", "nope", "--n", "1"]).is_err());
    }
}
