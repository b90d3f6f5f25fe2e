use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use psmm::field::MERSENNE_31;
use psmm_cli::{
    cmd_communication, cmd_complexity, cmd_dof_thresholds, cmd_privacy_audit, cmd_scheme_verify, cmd_simulate,
    cmd_thresholds, emit, CliError, OperatorSpec, SimulateArgs,
};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "psmm",
    version,
    about = "Secure distributed matrix multiplication experiments"
)]
struct Cli {
    /// Prime modulus of the field.
    #[arg(long, global = true, default_value_t = MERSENNE_31)]
    prime: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorArg {
    Dense,
    Strassen,
}

#[derive(Subcommand)]
enum Command {
    /// Agents required per (k, t): closed form, BGW, and exact support size.
    Thresholds {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        t: Vec<usize>,
    },
    /// Agents required by the reduced-DOF decoder for every s.
    DofThresholds {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        t: Vec<usize>,
    },
    /// Run one protocol instance on seeded random secrets.
    Simulate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, value_enum, default_value_t = OperatorArg::Dense)]
        operator: OperatorArg,
        /// Lifting depth for scheme operators.
        #[arg(long, default_value_t = 1)]
        depth: usize,
        /// Use a scheme file as the agent operator (overrides --operator).
        #[arg(long)]
        scheme: Option<PathBuf>,
        /// Decode under a synthetic s-dimensional constraint on the targets.
        #[arg(long)]
        dof_s: Option<usize>,
    },
    /// Per-agent and total bytes versus N, with a modeled BGW baseline.
    Communication {
        #[arg(long, default_value_t = 1024)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        t: usize,
        #[arg(long, value_delimiter = ',', default_value = "134,200,400,600,800,960,1200")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 2.0)]
        bgw_factor: f64,
    },
    /// Per-agent cost model for dense and learned local products.
    Complexity {
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        t: usize,
        #[arg(long, value_delimiter = ',')]
        tl: Vec<usize>,
        /// Also run lifted Strassen and naive products for m <= 64.
        #[arg(long)]
        measure: bool,
    },
    /// Exhaustive coalition-view audit over a small field.
    PrivacyAudit {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        t: usize,
        #[arg(long, default_value_t = 1)]
        coalition: usize,
    },
    /// Parse a scheme file and verify it on every basis pair.
    SchemeVerify { path: PathBuf },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Thresholds { k, t } => cmd_thresholds(&k, &t),
        Command::DofThresholds { k, t } => cmd_dof_thresholds(&k, &t),
        Command::Simulate {
            m,
            k,
            t,
            operator,
            depth,
            scheme,
            dof_s,
        } => {
            let operator = match (scheme, operator) {
                (Some(path), _) => OperatorSpec::SchemeFile {
                    path: path.display().to_string(),
                    depth,
                },
                (None, OperatorArg::Dense) => OperatorSpec::Dense,
                (None, OperatorArg::Strassen) => OperatorSpec::Strassen { depth },
            };
            cmd_simulate(&SimulateArgs {
                m,
                k,
                t,
                prime: cli.prime,
                seed: cli.seed,
                operator,
                dof_s,
            })
        }
        Command::Communication { m, k, t, n, bgw_factor } => cmd_communication(m, k, t, cli.prime, &n, bgw_factor),
        Command::Complexity { m, k, t, tl, measure } => cmd_complexity(&m, k, t, &tl, measure, cli.prime, cli.seed),
        Command::PrivacyAudit { m, k, t, coalition } => cmd_privacy_audit(cli.prime, m, k, t, coalition, cli.seed),
        Command::SchemeVerify { path } => cmd_scheme_verify(&path, cli.prime),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let out = cli.out.clone();
    let result = run(cli).and_then(|content| emit(&content, out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::Check { output, .. } = &e {
                print!("{output}");
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
