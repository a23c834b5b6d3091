use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde_json::json;

use mqsynth::circuit::{serialize, Circuit};
use mqsynth::claims::{any_failed, run_claims_suite, write_jsonl, ClaimResult, Status, SweepConfig};
use mqsynth::elementary::synth_multibody_zz;
use mqsynth::generators::{naive_gm, synth_bk, synth_block_diagonal, GmSpec};
use mqsynth::layout::{build_layout, subspace_support, BasisOrdering};
use mqsynth::transfer::{random_subspace_state, synth_upm, transfer_state, GmRealization, TransferSpec};
use mqsynth::{Error, Result};

#[derive(Parser)]
#[command(name = "mqsynth", version, about = "Synthesize and verify subspace-selective multiple-quantum circuits")]
struct Cli {
    /// Basis ordering for diagonal generators.
    #[arg(long, global = true)]
    ordering: Option<BasisOrdering>,
    /// Tolerance override for every numeric claim.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the weight-subspace layout of an n-qubit register.
    Layout {
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Write a circuit as JSON.
    Synth {
        #[command(subcommand)]
        target: SynthTarget,
    },
    /// Run a claims suite and write a JSON-lines report.
    Verify {
        #[arg(long)]
        suite: PathBuf,
    },
    /// Gate-count claims only, no dense matrices.
    Sweep {
        #[arg(long)]
        counts: bool,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
    },
    /// Transfer a random subspace state and print its support before and after.
    Transfer {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = PI)]
        theta: f64,
        #[arg(long = "L", default_value_t = 16)]
        trotter_l: usize,
        #[arg(long, default_value = "auto")]
        k: KArg,
        /// Apply exp(-iθ Q_pm) instead of the circuit.
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Subcommand)]
enum SynthTarget {
    /// exp(-iθ 2^{m-1} I_{k1 z} ... I_{km z})
    Zz {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        qubits: Vec<usize>,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
    },
    /// exp(-iθ g_m)
    Gm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = PI, allow_negative_numbers = true)]
        theta: f64,
        /// One selective rotation per basis state.
        #[arg(long)]
        naive: bool,
    },
    /// exp(-iθ b_k)
    Bk {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long = "L", default_value_t = 1)]
        trotter_l: usize,
    },
    /// U_pm(θ) on the weight-lex position register.
    Upm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = PI, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long = "L", default_value_t = 1)]
        trotter_l: usize,
        #[arg(long, default_value = "auto")]
        k: KArg,
        #[arg(long)]
        naive: bool,
    },
}

#[derive(Clone, Copy, Debug)]
enum KArg {
    Auto,
    Fixed(i64),
}

impl FromStr for KArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(KArg::Auto);
        }
        s.parse().map(KArg::Fixed).map_err(|_| format!("expected 'auto' or an integer, got '{s}'"))
    }
}

fn transfer_spec(n: usize, m: usize, target: Option<usize>, theta: f64, trotter_l: usize, k: KArg) -> Result<TransferSpec> {
    let layout = build_layout(n)?;
    let mut spec = TransferSpec::new(&layout, m)?;
    if let Some(t) = target {
        spec = spec.with_target(t)?;
    }
    spec = spec.with_theta(theta).with_trotter(trotter_l)?;
    if let KArg::Fixed(k) = k {
        spec = spec.with_k(k)?;
    }
    Ok(spec)
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    let res = match out {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().write_all(bytes),
    };
    res.map_err(|e| Error::Config(format!("cannot write output: {e}")))
}

fn synth(cli: &Cli, target: &SynthTarget) -> Result<Circuit> {
    match *target {
        SynthTarget::Zz { n, ref qubits, theta } => synth_multibody_zz(qubits, theta, n),
        SynthTarget::Gm { n, m, theta, naive } => {
            let spec = GmSpec::new(&build_layout(n)?, m)?;
            let ordering = cli.ordering.unwrap_or(BasisOrdering::WeightLex);
            if naive || ordering == BasisOrdering::Binary {
                naive_gm(&spec, theta, ordering)
            } else {
                Ok(synth_block_diagonal(&spec.position_block(), theta))
            }
        }
        SynthTarget::Bk { n, k, theta, trotter_l } => synth_bk(k, theta, trotter_l, n),
        SynthTarget::Upm { n, m, target, theta, trotter_l, k, naive } => {
            if cli.ordering == Some(BasisOrdering::Binary) {
                return Err(Error::Config("U_pm circuits act on weight-lex positions".into()));
            }
            let spec = transfer_spec(n, m, target, theta, trotter_l, k)?;
            let realization = if naive { GmRealization::Naive } else { GmRealization::Block };
            synth_upm(&spec, realization)
        }
    }
}

fn report(cli: &Cli, results: &[ClaimResult]) -> Result<ExitCode> {
    let mut buf = Vec::new();
    write_jsonl(results, &mut buf).map_err(|e| Error::Config(e.to_string()))?;
    emit(&cli.out, &buf)?;
    let tally = |s: Status| results.iter().filter(|r| r.status == s).count();
    eprintln!(
        "{} claims: {} pass, {} fail, {} measured",
        results.len(),
        tally(Status::Pass),
        tally(Status::Fail),
        tally(Status::Measured)
    );
    Ok(if any_failed(results) { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn with_overrides(cli: &Cli, mut config: SweepConfig) -> SweepConfig {
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match cli.tol {
        Some(tol) => config.with_numeric_tolerance(tol),
        None => config,
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Layout { n, json } => {
            let layout = build_layout(*n)?;
            let text = if *json {
                serde_json::to_string_pretty(&layout).expect("layout serializes") + "\n"
            } else {
                layout.to_string()
            };
            emit(&cli.out, text.as_bytes())?;
        }
        Command::Synth { target } => emit(&cli.out, &serialize(&synth(cli, target)?))?,
        Command::Verify { suite } => {
            let bytes = fs::read(suite).map_err(|e| Error::Config(format!("{}: {e}", suite.display())))?;
            let config = with_overrides(cli, SweepConfig::from_json(&bytes)?);
            return report(cli, &run_claims_suite(&config)?);
        }
        Command::Sweep { counts, n_max } => {
            if !counts {
                return Err(Error::Config("sweep supports --counts only; use verify --suite for dense claims".into()));
            }
            let config = with_overrides(cli, SweepConfig::counts(*n_max));
            return report(cli, &run_claims_suite(&config)?);
        }
        Command::Transfer { n, m, target, theta, trotter_l, k, exact } => {
            let spec = transfer_spec(*n, *m, *target, *theta, *trotter_l, *k)?;
            let seed = cli.seed.unwrap_or(0);
            let psi = random_subspace_state(&spec.layout, *m, seed)?;
            let phi = transfer_state(&psi, &spec, *exact)?;
            let ordering = BasisOrdering::WeightLex;
            let summary = json!({
                "n": n,
                "m": m,
                "target": spec.target,
                "k": spec.resolve_k()?,
                "theta": theta,
                "L": trotter_l,
                "seed": seed,
                "path": if *exact { "exact" } else { "circuit" },
                "before": subspace_support(&psi, &spec.layout, ordering)?,
                "after": subspace_support(&phi, &spec.layout, ordering)?,
            });
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
            emit(&cli.out, text.as_bytes())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
