use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use transfer_spectrum_cli::{
    cmd_converge, cmd_spectrum, cmd_verify, dump_matrices, parse_orders, CliError, MapSource, RunConfig,
    DEFAULT_K, DEFAULT_ORDER, DEFAULT_ORDERS, DEFAULT_TRIALS,
};

/// Spectra of transfer operators of expanding Blaschke products.
#[derive(Parser)]
#[command(name = "transfer-spectrum", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the finite-section matrices against the prediction
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Write the direct transfer matrix as CSV
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
        /// Write the adjoint block matrix as CSV
        #[arg(long)]
        dump_adjoint: Option<PathBuf>,
    },
    /// Run every consistency check and report value against threshold
    Verify {
        #[command(flatten)]
        common: Common,
        /// Random triples for the adjoint identity
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Match error as a function of N, as CSV
    Converge {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// `z^n`, or a JSON object {"zeros": [[re, im], ...], "constant": [re, im]}
    #[arg(long, group = "source")]
    map: Option<String>,
    /// The family B(z) = z(mu - z)/(1 - conj(mu) z), e.g. 0.3+0.2i
    #[arg(long, group = "source", allow_hyphen_values = true)]
    mu: Option<String>,
    /// JSON file holding the map
    #[arg(long, group = "source")]
    file: Option<PathBuf>,
    /// Truncation order; a comma-separated list for `converge`
    #[arg(short = 'N')]
    n: Option<String>,
    /// Collocation points, at least 4(2N+1)
    #[arg(short = 'M')]
    m: Option<usize>,
    /// Annulus radii `r,R` instead of the automatic search
    #[arg(long)]
    annulus: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of leading predicted eigenvalues to match
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
}

impl Common {
    fn source(&self) -> Result<MapSource, CliError> {
        match (&self.map, &self.mu, &self.file) {
            (Some(m), None, None) => Ok(MapSource::Map(m.clone())),
            (None, Some(m), None) => Ok(MapSource::Mu(m.clone())),
            (None, None, Some(f)) => Ok(MapSource::File(f.clone())),
            _ => Err(CliError::Usage("give exactly one of --map, --mu, --file".into())),
        }
    }

    fn config(&self, default_orders: &[usize], trials: usize) -> Result<RunConfig, CliError> {
        let orders = match &self.n {
            Some(s) => parse_orders(s)?,
            None => default_orders.to_vec(),
        };
        RunConfig::new(
            &self.source()?,
            orders,
            self.m,
            self.annulus.as_deref(),
            self.seed,
            self.k,
            trials,
            self.out.clone(),
        )
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerics(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Spectrum { common, dump_matrix, dump_adjoint } => {
            let cfg = common.config(&[DEFAULT_ORDER], DEFAULT_TRIALS)?;
            let report = cmd_spectrum(&cfg)?;
            if dump_matrix.is_some() || dump_adjoint.is_some() {
                dump_matrices(&cfg, dump_matrix.as_deref(), dump_adjoint.as_deref())?;
            }
            emit(cfg.out.as_ref(), &to_json(&report)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common, trials } => {
            let cfg = common.config(&[DEFAULT_ORDER], trials)?;
            let report = cmd_verify(&cfg)?;
            emit(cfg.out.as_ref(), &to_json(&report)?)?;
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                let payload = serde_json::json!({
                    "error": {"kind": "checks_failed", "failed": report.failed, "exit_code": 4}
                });
                eprintln!("{payload}");
                Ok(ExitCode::from(4))
            }
        }
        Command::Converge { common } => {
            let cfg = common.config(&DEFAULT_ORDERS, DEFAULT_TRIALS)?;
            let result = cmd_converge(&cfg)?;
            emit(cfg.out.as_ref(), &result.study.to_csv())?;
            eprintln!("{}", result.study.summary());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            println!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
