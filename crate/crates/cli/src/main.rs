//! `troptev`: exact tropical Tevelev degrees of Hirzebruch surfaces and P2.
//!
//! Every command prints one JSON document on standard output. Counts are
//! decimal strings. Exit status 0 means success, 1 a disagreement found by
//! `verify`, `sweep`, `identities` or `replay`, and 2 invalid input.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;

use manifest::{digest, strip_manifest_flag, versions, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "troptev", version, about = "Exact tropical Tevelev degrees of Hirzebruch surfaces and P2")]
pub struct Cli {
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true, env = "TROPTEV_THREADS")]
    pub threads: Option<usize>,
    /// Write a run manifest (command, data, seed, versions, timing, digest).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the closed formula.
    Compute(ComputeArgs),
    /// List every contributing curve through a standard point configuration.
    Enumerate(EnumerateArgs),
    /// Compare the formula with the oracles; exits 1 on disagreement.
    Verify(VerifyArgs),
    /// Formula against structured oracle over a grid of instances, as CSV.
    Sweep(SweepArgs),
    /// Check the binomial identities and the type-split sum.
    Identities(IdentitiesArgs),
    /// Log against stable degrees for the all-ones profiles of a class.
    Compare(CompareArgs),
    /// Draw curves from `enumerate` output as SVG.
    Render(RenderArgs),
    /// Evaluate a conjectural higher-dimensional formula.
    Conjecture {
        #[command(subcommand)]
        which: ConjectureCmd,
    },
    /// Re-run a manifest and check its result digest.
    Replay {
        #[arg(long = "from")]
        from: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Evaluate the P2 formula (the data must have a = 1 and empty mu2).
    #[arg(long)]
    pub p2: bool,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points to use instead of sampling: a configuration from an earlier
    /// run or a list of `[[num, den], [num, den]]` pairs in standard order.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleChoice {
    Structured,
    Full,
    Both,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = OracleChoice::Both)]
    pub oracle: OracleChoice,
    /// Independent point seeds for the structured oracle.
    #[arg(long, default_value_t = 5)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of legs the full oracle will attempt.
    #[arg(long, default_value_t = 10)]
    pub max_leaves: usize,
    /// Use the P2 formula.
    #[arg(long)]
    pub p2: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Range of `a`, as `lo..hi` (inclusive).
    #[arg(long, default_value = "1..3", value_parser = parse_range)]
    pub a: (i64, i64),
    #[arg(long, default_value_t = 3)]
    pub s1_max: i64,
    #[arg(long, default_value_t = 4)]
    pub wmax: i64,
    #[arg(long, default_value_t = 6)]
    pub nmax: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    #[arg(long, default_value = "-10..10", value_parser = parse_range, allow_hyphen_values = true)]
    pub xrange: (i64, i64),
    #[arg(long, default_value = "0..10", value_parser = parse_range, allow_hyphen_values = true)]
    pub yrange: (i64, i64),
    /// Largest N for Vandermonde's identity.
    #[arg(long, default_value_t = 12)]
    pub nmax: u64,
    /// Largest n of the instance grid used for the type-split sum.
    #[arg(long, default_value_t = 6)]
    pub grid_nmax: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_enum)]
    pub parity: ParityArg,
    #[arg(long)]
    pub j: i64,
    #[arg(long)]
    pub d: i64,
    #[arg(long)]
    pub k: Option<i64>,
    #[arg(long)]
    pub n: i64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// `enumerate` output, or a bare list of curve records.
    #[arg(long)]
    pub curves: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Label every end with its weight.
    #[arg(long)]
    pub label_all: bool,
    /// Omit the fan rays.
    #[arg(long)]
    pub no_fan: bool,
}

#[derive(Debug, Subcommand)]
pub enum ConjectureCmd {
    /// P(O + O(a)) over P^r; profiles: r+1 fibres, zero section, infinity section.
    Pbundle {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        a: u32,
        /// Profiles as JSON, e.g. `[[1],[1],[1],[1,1],[2]]`.
        #[arg(long)]
        mu: String,
        #[arg(long)]
        n: i64,
    },
    /// P^r blown up at r fixed points; profiles: r exceptional divisors, then r+1 hyperplanes.
    Blowup {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        n: i64,
    },
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (s, s),
    };
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad range start in {s:?}"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad range end in {s:?}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

/// Result of one command: the JSON text and the intended exit status.
pub struct Outcome {
    pub json: String,
    pub status: u8,
    pub gamma: Option<troptev::model::RawInstance>,
    pub seed: Option<u64>,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Compute(_) => "compute",
        Command::Enumerate(_) => "enumerate",
        Command::Verify(_) => "verify",
        Command::Sweep(_) => "sweep",
        Command::Identities(_) => "identities",
        Command::Compare(_) => "compare",
        Command::Render(_) => "render",
        Command::Conjecture { .. } => "conjecture",
        Command::Replay { .. } => "replay",
    }
}

fn run(args: Vec<String>) -> ExitCode {
    let cli = match Cli::try_parse_from(std::iter::once("troptev".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        // a second initialisation (replay) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let start = Instant::now();
    let name = command_name(&cli.command);
    let outcome = match &cli.command {
        Command::Replay { from } => replay(from),
        other => commands::dispatch(other),
    };
    match outcome {
        Ok(out) => {
            // a closed pipe (e.g. `| head`) is not an error of the computation
            let _ = writeln!(std::io::stdout(), "{}", out.json);
            if let Some(path) = &cli.manifest {
                let m = RunManifest {
                    command: name.to_string(),
                    argv: strip_manifest_flag(&args),
                    gamma: out.gamma.clone(),
                    seed: out.seed,
                    versions: versions(),
                    timing_ms: start.elapsed().as_millis(),
                    result_digest: digest(&out.json),
                };
                if let Err(e) = m.write(path) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(out.status)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn replay(from: &std::path::Path) -> anyhow::Result<Outcome> {
    let m = RunManifest::read(from)?;
    let cli = Cli::try_parse_from(std::iter::once("troptev".to_string()).chain(m.argv.iter().cloned()))?;
    if matches!(cli.command, Command::Replay { .. }) {
        anyhow::bail!("a manifest cannot replay another replay");
    }
    let again = commands::dispatch(&cli.command)?;
    let found = digest(&again.json);
    let matches = found == m.result_digest;
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "command": m.command,
        "expected_digest": m.result_digest,
        "digest": found,
        "reproduced": matches,
    }))?;
    Ok(Outcome { json, status: if matches { 0 } else { 1 }, gamma: m.gamma, seed: m.seed })
}

fn main() -> ExitCode {
    run(std::env::args().skip(1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse_with_negative_bounds() {
        assert_eq!(parse_range("-10..10"), Ok((-10, 10)));
        assert_eq!(parse_range("1..=3"), Ok((1, 3)));
        assert_eq!(parse_range("4"), Ok((4, 4)));
        assert!(parse_range("3..1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
