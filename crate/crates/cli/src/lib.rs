//! Command-line front end for `ceo_core`.
//!
//! Every subcommand writes CSV with a header row to the given writer.
//! Summary lines that do not fit the table are appended as `#` comments.

pub mod commands;
pub mod scenario;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::run;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "CEO_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ceo", version, about = "Error exponents per rate for the CEO problem with context")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chernoff information between two source values under one context.
    Divergence {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        s: usize,
        #[arg(long)]
        x1: usize,
        #[arg(long)]
        x2: usize,
        /// Also print the divergence at N evenly spaced values of lambda.
        #[arg(long, value_name = "N")]
        curve: Option<usize>,
        /// Compare codeword laws through this dictionary channel instead of raw observations.
        #[arg(long, value_name = "K")]
        dictionary_entry: Option<usize>,
    },
    /// Optimize group weights over the scenario dictionary for each softening level.
    Optimize {
        file: PathBuf,
        /// Strictly decreasing softening levels in (0, 1].
        #[arg(long, value_delimiter = ',', default_value = "1")]
        taus: Vec<f64>,
    },
    /// Monte-Carlo error rates and the fitted exponent.
    Simulate { file: PathBuf },
    /// Vanishing-rate exponents per rate of the Gaussian example, with and without context.
    Gaussian {
        #[arg(long, required_unless_present = "scenario", requires = "grid")]
        sigma_s2: Option<f64>,
        /// Noise variances as `start:end:count`, endpoints included.
        #[arg(long, value_parser = parse_grid, requires = "sigma_s2")]
        grid: Option<Grid>,
        /// Read the variances from the `[gaussian]` block of a scenario instead.
        #[arg(long, conflicts_with_all = ["sigma_s2", "grid"])]
        scenario: Option<PathBuf>,
    },
    /// Solve a max-min linear fractional program instance file.
    Lfp { file: PathBuf },
}

/// Evenly spaced noise variances.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// Parses `start:end:count` into `count` evenly spaced values.
pub fn parse_grid(spec: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, count] = parts[..] else {
        return Err(format!("expected start:end:count, got {spec:?}"));
    };
    let start: f64 = start.trim().parse().map_err(|e| format!("bad start {start:?}: {e}"))?;
    let end: f64 = end.trim().parse().map_err(|e| format!("bad end {end:?}: {e}"))?;
    let count: usize = count.trim().parse().map_err(|e| format!("bad count {count:?}: {e}"))?;
    if !(start.is_finite() && end.is_finite() && start > 0.0 && end > start) {
        return Err(format!("need 0 < start < end, got {start} and {end}"));
    }
    if count < 2 {
        return Err(format!("need at least two grid points, got {count}"));
    }
    let last = (count - 1) as f64;
    Ok(Grid(
        (0..count)
            .map(|k| if k + 1 == count { end } else { start + (end - start) * k as f64 / last })
            .collect(),
    ))
}

/// Shortest round-trip decimal, with `infinity` for `+inf`.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "infinity".to_string()
    } else if v == f64::NEG_INFINITY {
        "-infinity".to_string()
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = parse_grid("0.25:4:16").unwrap().0;
        assert_eq!(g.len(), 16);
        assert_eq!(g[0], 0.25);
        assert_eq!(g[15], 4.0);
        assert_eq!(parse_grid("1:3:3").unwrap().0, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn malformed_grids() {
        for bad in ["", "1:2", "1:2:3:4", "a:2:3", "2:1:3", "0:1:3", "1:2:1", "1:2:-3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn float_formatting_round_trips() {
        assert_eq!(fmt_f64(f64::INFINITY), "infinity");
        assert_eq!(fmt_f64(0.1), "0.1");
        let v = 1.0 / 3.0;
        assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
