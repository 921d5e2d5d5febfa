//! `doublespend`: double-spend risk queries, table regeneration and the
//! race simulator from the command line.
//!
//! Exit codes: 0 success, 1 failed statistical check, 2 domain error,
//! 3 I/O error.

mod grid;
mod tables;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use doublespend::asymptotics::p_asymptotic;
use doublespend::race::{
    attacker_success_closed, attacker_success_sum, conditional_probability, confirmations_required,
    nakamoto_probability,
};
use doublespend::sim::{
    estimate_success, SimConfig, DEFAULT_DEFICIT_CAP, DEFAULT_KAPPA_HALF_WIDTH,
};
use doublespend::{HashSplit, NetworkParams, RaceQuery, BITCOIN_BLOCK_MINUTES};

use grid::Grid;
use tables::TextTable;

/// Largest κ accepted by `curve`.
const CURVE_KAPPA_MAX: f64 = 20.0;

/// Simulations whose estimate is further than this many standard errors
/// from the analytic value fail with exit code 1.
const Z_SCORE_LIMIT: f64 = 5.0;

#[derive(Parser)]
#[command(
    name = "doublespend",
    version,
    about = "Double-spend race probabilities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probability that an attacker with share q overtakes z confirmations.
    Prob {
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long)]
        z: u64,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
    },
    /// Probability conditioned on how long the z confirmations took.
    #[command(group(ArgGroup::new("time").required(true).args(["kappa", "tau1_minutes"])))]
    Conditional {
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long)]
        z: u64,
        /// Observed time over expected time for the z blocks.
        #[arg(long, allow_negative_numbers = true)]
        kappa: Option<f64>,
        /// Minutes the z confirmations took.
        #[arg(long, allow_negative_numbers = true)]
        tau1_minutes: Option<f64>,
        /// Mean block interval of the network.
        #[arg(long, default_value_t = BITCOIN_BLOCK_MINUTES, allow_negative_numbers = true)]
        tau0_minutes: f64,
    },
    /// Confirmations needed to push the risk below a target, exact and Nakamoto.
    Confirmations {
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, default_value_t = 0.001, allow_negative_numbers = true)]
        risk: f64,
    },
    /// Writes one of the published tables, or a custom conditional table, as CSV.
    Table {
        #[arg(long, value_enum)]
        which: Which,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Confirmations for the custom table.
        #[arg(long, default_value_t = 6)]
        z: u64,
        /// κ rows of the custom table, start:stop:step.
        #[arg(long, default_value_t = tables::SATOSHI_KAPPAS)]
        kappa_range: Grid,
        /// q columns of the custom table, start:stop:step.
        #[arg(long, default_value_t = tables::SATOSHI_SHARES)]
        q_range: Grid,
    },
    /// Monte-Carlo estimate of the success probability, checked against the formula.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long)]
        z: u64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Hybrid)]
        mode: Mode,
        /// Full walk only: blocks the attacker may fall further behind before giving up.
        #[arg(long, default_value_t = DEFAULT_DEFICIT_CAP)]
        deficit_cap: u64,
        /// Keep only races whose κ lies within `window` of this value.
        #[arg(long, allow_negative_numbers = true)]
        kappa: Option<f64>,
        /// Half-width of the κ window.
        #[arg(long, default_value_t = DEFAULT_KAPPA_HALF_WIDTH, requires = "kappa", allow_negative_numbers = true)]
        window: f64,
    },
    /// Long-format CSV of κ ↦ P(z, κ) for plotting.
    Curve {
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        /// Comma separated list of confirmation counts.
        #[arg(long, value_delimiter = ',', required = true)]
        z: Vec<u64>,
        /// κ values, start:stop:step, inside (0, 20].
        #[arg(long)]
        kappa_range: Grid,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Sum,
    Nakamoto,
    Asymptotic,
}

impl Method {
    fn describe(self) -> &'static str {
        match self {
            Method::Exact => "exact, regularized incomplete beta I_{4pq}(z, 1/2)",
            Method::Sum => "exact, finite sum over the attacker's block count",
            Method::Nakamoto => "Nakamoto's Poisson approximation",
            Method::Asymptotic => "large-z asymptotic (4pq)^z / ((p - q) sqrt(pi z))",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    #[value(name = "pz_q01")]
    PzQ01,
    #[value(name = "pz_q03")]
    PzQ03,
    Confirmations,
    Z0,
    Satoshi3,
    Satoshi6,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Hybrid,
    FullWalk,
}

#[derive(Debug)]
enum Failure {
    Check(String),
    Domain(String),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Domain(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Domain(m) | Failure::Io(m) => m,
        }
    }
}

// Every library error comes from an argument the kernels cannot handle,
// so all of them are reported as domain errors.
impl From<doublespend::Error> for Failure {
    fn from(e: doublespend::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    match run(cli.command, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(command: Command, out: &mut impl Write) -> Outcome {
    match command {
        Command::Prob { q, z, method } => prob(out, q, z, method),
        Command::Conditional {
            q,
            z,
            kappa,
            tau1_minutes,
            tau0_minutes,
        } => conditional(out, q, z, kappa, tau1_minutes, tau0_minutes),
        Command::Confirmations { q, risk } => confirmations(out, q, risk),
        Command::Table {
            which,
            out: path,
            z,
            kappa_range,
            q_range,
        } => table(out, which, path.as_deref(), z, &kappa_range, &q_range),
        Command::Simulate {
            q,
            z,
            trials,
            seed,
            mode,
            deficit_cap,
            kappa,
            window,
        } => {
            let mut config = SimConfig::new(z, trials, seed);
            if let Mode::FullWalk = mode {
                config = config.full_walk(deficit_cap);
            }
            if let Some(k) = kappa {
                config = config.conditioned(k, window);
            }
            simulate(out, q, &config)
        }
        Command::Curve {
            q,
            z,
            kappa_range,
            out: path,
        } => curve(out, q, &z, &kappa_range, path.as_deref()),
    }
}

fn prob(out: &mut impl Write, q: f64, z: u64, method: Method) -> Outcome {
    let split = HashSplit::new(q)?;
    let value = match method {
        Method::Exact => attacker_success_closed(&split, z)?,
        Method::Sum => attacker_success_sum(&split, z)?,
        Method::Nakamoto => nakamoto_probability(&split, z)?,
        Method::Asymptotic => p_asymptotic(&split, z)?,
    };
    writeln!(out, "{value:.7}")?;
    writeln!(out, "method: {}", method.describe())?;
    Ok(())
}

fn conditional(
    out: &mut impl Write,
    q: f64,
    z: u64,
    kappa: Option<f64>,
    tau1: Option<f64>,
    tau0: f64,
) -> Outcome {
    let split = HashSplit::new(q)?;
    let net = NetworkParams::new(tau0, &split)?;
    let query = RaceQuery { z, kappa, tau1 };
    let kappa = query
        .resolve_kappa(&net, &split)?
        .expect("clap requires kappa or tau1");
    let value = conditional_probability(&split, z, kappa)?;
    writeln!(out, "kappa = {kappa:.4}")?;
    writeln!(out, "{value:.7} ({:.2}%)", 100.0 * value)?;
    Ok(())
}

fn confirmations(out: &mut impl Write, q: f64, risk: f64) -> Outcome {
    let split = HashSplit::new(q)?;
    let exact = confirmations_required(&split, risk, false)?;
    let nakamoto = confirmations_required(&split, risk, true)?;
    writeln!(out, "z={exact}, z_SN={nakamoto}")?;
    Ok(())
}

fn table(
    out: &mut impl Write,
    which: Which,
    path: Option<&Path>,
    z: u64,
    kappas: &Grid,
    shares: &Grid,
) -> Outcome {
    let text = match which {
        Which::PzQ01 => tables::pz_q01()?.to_text(),
        Which::PzQ03 => tables::pz_q03()?.to_text(),
        Which::Confirmations => tables::confirmations()?,
        Which::Z0 => tables::z0()?,
        Which::Satoshi3 => tables::satoshi(3)?.to_text(),
        Which::Satoshi6 => tables::satoshi(6)?.to_text(),
        Which::Custom => tables::conditional_table(z, kappas, shares)?.to_text(),
    };
    emit(out, &text, path)
}

fn simulate(out: &mut impl Write, q: f64, config: &SimConfig) -> Outcome {
    let split = HashSplit::new(q)?;
    let net = NetworkParams::bitcoin(&split);
    let r = estimate_success(&split, &net, config)?;
    let analytic = match config.window {
        Some(w) => conditional_probability(&split, config.z, w.kappa)?,
        None => attacker_success_closed(&split, config.z)?,
    };
    let gap = r.p_hat - analytic;
    let score = if r.std_err > 0.0 {
        gap / r.std_err
    } else if gap == 0.0 {
        0.0
    } else {
        gap.signum() * f64::INFINITY
    };
    writeln!(out, "trials   {}", r.trials)?;
    writeln!(out, "p_hat    {:.7}", r.p_hat)?;
    writeln!(out, "std_err  {:.7}", r.std_err)?;
    writeln!(out, "analytic {analytic:.7}")?;
    writeln!(out, "z_score  {score:+.3}")?;
    if score.abs() > Z_SCORE_LIMIT {
        return Err(Failure::Check(format!(
            "estimate is {score:.2} standard errors from the analytic value"
        )));
    }
    Ok(())
}

fn curve(out: &mut impl Write, q: f64, zs: &[u64], kappas: &Grid, path: Option<&Path>) -> Outcome {
    let split = HashSplit::new(q)?;
    if !(kappas.start > 0.0 && kappas.stop <= CURVE_KAPPA_MAX) {
        return Err(Failure::Domain(format!(
            "kappa range {kappas} must lie in (0, {CURVE_KAPPA_MAX}]"
        )));
    }
    let mut rows = Vec::new();
    for &z in zs {
        for kappa in kappas.values() {
            let v = conditional_probability(&split, z, kappa)?;
            rows.push(vec![z.to_string(), kappa.to_string(), format!("{v:.10e}")]);
        }
    }
    let text = TextTable {
        header: vec!["z".into(), "kappa".into(), "probability".into()],
        rows,
    };
    emit(out, &text, path)
}

fn emit(out: &mut impl Write, text: &TextTable, path: Option<&Path>) -> Outcome {
    match path {
        None => text.write_csv(out)?,
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| Failure::Io(format!("cannot create {}: {e}", p.display())))?;
            text.write_csv(BufWriter::new(file))
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display())))?;
        }
    }
    Ok(())
}
