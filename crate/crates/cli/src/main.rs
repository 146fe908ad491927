//! `eislab`: evaluation, sign-change counting, correlation integrals and
//! shifted divisor sums from the command line.
//!
//! Exit codes: 0 ok, 1 invariant failure, 2 configuration error, 3 accuracy
//! failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use eislab::golden::GOLDEN_ENV;
use eislab::par::Exec;
use eislab::Error;

#[derive(Parser, Debug)]
#[command(
    name = "eislab",
    version,
    about = "Eisenstein series on the imaginary axis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; 1 runs everything on the calling thread.
    #[arg(long, default_value_t = default_threads(), value_parser = clap::value_parser!(u32).range(1..), global = true)]
    pub threads: u32,

    /// Directory with the golden reference files.
    #[arg(long, env = GOLDEN_ENV, global = true)]
    pub golden: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate E*_T(iy) on a grid or at given points.
    Eval {
        #[arg(long = "T")]
        t: f64,
        /// Evaluation window a,b.
        #[arg(long, value_parser = parse_window, default_value = "0.9,3.4")]
        window: (f64, f64),
        /// Points evaluated, uniformly in log y across the window.
        #[arg(long, default_value_t = 11, conflicts_with = "y")]
        points: usize,
        /// Explicit abscissae (comma separated).
        #[arg(long, value_delimiter = ',')]
        y: Vec<f64>,
    },
    /// Count sign changes of E*_T(iy) on an interval.
    Signchanges {
        #[arg(long = "T")]
        t: f64,
        #[arg(long, value_parser = parse_window, default_value = "1,3")]
        window: (f64, f64),
    },
    /// The correlation integral I_{ψ,α}(T) by both routes, against the main term.
    Correlation {
        #[arg(long = "T")]
        t: f64,
        /// Shift(s) α (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "4")]
        alpha: Vec<f64>,
        /// Bump centre.
        #[arg(long, default_value_t = 2.0)]
        center: f64,
        /// Bump width.
        #[arg(long, default_value_t = 0.5)]
        width: f64,
        /// Skip the Parseval route.
        #[arg(long)]
        direct_only: bool,
    },
    /// The windowed sign-change experiment over the bump family ψ_{T,j}.
    Windows {
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 0.019)]
        delta: f64,
        #[arg(long, default_value_t = 4.0)]
        alpha: f64,
    },
    /// Shifted divisor sums against their main term.
    Scs {
        #[arg(long = "T")]
        t: f64,
        #[arg(long = "Y", default_value_t = 1e4)]
        y: f64,
        #[arg(long = "P", default_value_t = 4.0)]
        p: f64,
        /// Shifts (comma separated); defaults to ±1, …, ±M.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        m: Vec<i64>,
        #[arg(long = "M", default_value_t = 8, conflicts_with = "m")]
        big_m: i64,
    },
    /// Run the invariant suites.
    Selftest {
        /// Run only this suite.
        #[arg(long)]
        suite: Option<String>,
    },
}

fn default_threads() -> u32 {
    std::thread::available_parallelism()
        .map(|n| n.get() as u32)
        .unwrap_or(1)
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected a,b, got '{s}'"));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|e| format!("'{}': {e}", parts[0]))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|e| format!("'{}': {e}", parts[1]))?;
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(format!("need 0 < a < b, got {a},{b}"));
    }
    Ok((a, b))
}

/// How a run ended, beyond success.
#[derive(Debug)]
pub enum Failure {
    /// A checked property did not hold; the report was still written.
    Invariant(String),
    Config(String),
    Accuracy(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Config(_) => 2,
            Failure::Accuracy(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_accuracy() {
            Failure::Accuracy(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

fn setup_threads(threads: u32) -> Result<Exec, Failure> {
    if threads == 1 {
        return Ok(Exec::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads as usize)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
        Ok(Exec::Parallel)
    }
    #[cfg(not(feature = "parallel"))]
    {
        log::warn!("built without the parallel feature; running on one thread");
        Ok(Exec::Sequential)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = setup_threads(cli.threads).and_then(|exec| commands::run(&cli, exec));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Invariant(m) => format!("invariant failure: {m}"),
                Failure::Config(m) | Failure::Accuracy(m) => m.clone(),
            };
            eprintln!("eislab: {msg}");
            ExitCode::from(f.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_exit_codes() {
        assert_eq!(
            Failure::from(Error::accuracy("quadrature", 1e-6, 1e-9)).exit_code(),
            3
        );
        assert_eq!(Failure::from(Error::domain("bad T")).exit_code(), 2);
        assert_eq!(Failure::from(Error::MissingData("x".into())).exit_code(), 2);
        assert_eq!(Failure::Invariant("x".into()).exit_code(), 1);
    }

    #[test]
    fn window_flag_parsing() {
        assert_eq!(parse_window("1,3"), Ok((1.0, 3.0)));
        assert_eq!(parse_window(" 0.9 , 3.4"), Ok((0.9, 3.4)));
        assert!(parse_window("3,1").is_err());
        assert!(parse_window("1").is_err());
        assert!(parse_window("0,1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
