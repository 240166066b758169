use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qecsim::config::{ArrangementSource, BasisKind, ModeKind, ModelKind, OrderKind, Param, SamplerKind};
use qecsim::format::{parse_circuit, to_csv, write_atomic, write_circuit, write_tables};
use qecsim::{run, Pool, RunConfig};
use qecsim_core::{Decoder, Experiment, LogicalBasis};

/// Bacon-Shor-13 vs Surface-17 simulation toolkit.
///
/// Every command reads an optional JSON config; flags override its fields.
/// Worker threads: QECSIM_WORKERS (default: all cores).
#[derive(Parser)]
#[command(name = "qecsim", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Append a timestamped run summary to this file.
    #[arg(long, global = true)]
    log: Option<PathBuf>,
    #[command(flatten)]
    set: Overrides,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long, global = true)]
    code: Option<String>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelKind>,
    /// Swept parameter.
    #[arg(long, global = true, value_enum)]
    param: Option<Param>,
    /// Comma-separated sweep values.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    values: Option<Vec<f64>>,
    #[arg(long, global = true)]
    p_xx: Option<f64>,
    /// Heating rate, quanta/s.
    #[arg(long, global = true)]
    r_heating: Option<f64>,
    /// Dephasing rate, 1/s.
    #[arg(long, global = true)]
    r_dephasing: Option<f64>,
    #[arg(long, global = true)]
    heating_factor: Option<f64>,
    #[arg(long, global = true)]
    rounds: Option<usize>,
    #[arg(long, global = true, value_enum)]
    order: Option<OrderKind>,
    #[arg(long, global = true, value_enum)]
    basis: Option<BasisKind>,
    #[arg(long, global = true, value_enum)]
    sampler: Option<SamplerKind>,
    /// Total trials (direct) or trials per stratum (importance).
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    k_max: Option<usize>,
    #[arg(long, global = true, value_enum)]
    arrangement: Option<ArrangementSource>,
    /// Explicit chain order, space-separated qubit labels.
    #[arg(long, global = true)]
    chain: Option<String>,
    /// SA, MA or MT.
    #[arg(long, global = true)]
    objective: Option<String>,
    #[arg(long, global = true)]
    anneal_seed: Option<u64>,
    #[arg(long, global = true)]
    proposals: Option<usize>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeKind>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Logical error rate at each configured sweep value.
    Simulate {
        /// Simulate this circuit file instead of the built-in simple circuit.
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Logical error rate over log-spaced values of the swept parameter.
    Sweep {
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
    /// Bisect for the crossing with the unencoded comparator.
    Pseudothreshold {
        #[arg(long, default_value_t = 1e-4)]
        lo: f64,
        #[arg(long, default_value_t = 5e-2)]
        hi: f64,
        #[arg(long, default_value_t = 0.02)]
        rel_tol: f64,
    },
    /// Bacon-Shor-13 vs Surface-17 as the number of QEC rounds grows.
    Crossover {
        #[arg(long, default_value_t = 12)]
        max_rounds: usize,
    },
    /// Exhaustive single-fault check; exit code 2 on any logical failure.
    Ftcheck {
        /// Use the naive CNOT order (negative control).
        #[arg(long)]
        naive: bool,
        /// Also write the decoder lookup tables here.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Simple-circuit execution times for an ion arrangement.
    Times {
        /// Every reference arrangement, serial and parallel.
        #[arg(long)]
        all: bool,
        /// Also write the timed, MS-compiled simple circuit here.
        #[arg(long)]
        circuit_out: Option<PathBuf>,
    },
    /// Anneal an ion arrangement; writes the chain order.
    Anneal {
        /// Objective-vs-proposal CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Simulate { .. } => "simulate",
            Cmd::Sweep { .. } => "sweep",
            Cmd::Pseudothreshold { .. } => "pseudothreshold",
            Cmd::Crossover { .. } => "crossover",
            Cmd::Ftcheck { .. } => "ftcheck",
            Cmd::Times { .. } => "times",
            Cmd::Anneal { .. } => "anneal",
        }
    }
}

fn apply(cfg: &mut RunConfig, o: Overrides) {
    macro_rules! set {
        ($($field:ident => $target:expr),* $(,)?) => {
            $(if let Some(v) = o.$field { $target = v; })*
        };
    }
    set! {
        code => cfg.code,
        model => cfg.model,
        param => cfg.sweep.param,
        values => cfg.sweep.values,
        p_xx => cfg.ion.p_xx,
        r_heating => cfg.ion.r_heating,
        r_dephasing => cfg.ion.r_dephasing,
        heating_factor => cfg.ion.heating_factor,
        rounds => cfg.rounds,
        order => cfg.order,
        basis => cfg.basis,
        sampler => cfg.sampler.kind,
        trials => cfg.sampler.trials,
        k_max => cfg.sampler.k_max,
        arrangement => cfg.arrangement.source,
        chain => cfg.arrangement.order,
        objective => cfg.arrangement.objective,
        anneal_seed => cfg.arrangement.seed,
        proposals => cfg.arrangement.proposals,
        mode => cfg.mode,
        seed => cfg.seed,
    }
    if o.output.is_some() {
        cfg.output = o.output;
    }
}

/// Failed acceptance-style check, distinct from configuration errors.
struct CheckFailed;

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<()> {
    match &cfg.output {
        Some(p) => write_atomic(p, bytes),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn execute(cfg: &mut RunConfig, cmd: Cmd, explicit_basis: bool) -> Result<Option<CheckFailed>> {
    let pool = Pool::from_env()?;
    match cmd {
        Cmd::Simulate { circuit } => {
            let rows = match circuit {
                None => run::simulate(cfg, &pool)?,
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let c = parse_circuit(&text).with_context(|| format!("parsing {}", path.display()))?;
                    let code = cfg.code_spec()?;
                    let exp = Experiment::new(c, Decoder::new(&code, cfg.cnot_order())?)?;
                    run::simulate_with(cfg, exp, &pool)?
                }
            };
            emit(cfg, &to_csv(&rows)?)?;
        }
        Cmd::Sweep { from, to, points } => {
            cfg.sweep.values = run::log_space(from, to, points)?;
            emit(cfg, &to_csv(&run::simulate(cfg, &pool)?)?)?;
        }
        Cmd::Pseudothreshold { lo, hi, rel_tol } => {
            let row = run::threshold(cfg, (lo, hi), rel_tol, &pool)?;
            emit(cfg, &to_csv(&[row])?)?;
        }
        Cmd::Crossover { max_rounds } => {
            if max_rounds == 0 {
                bail!("--max-rounds must be positive");
            }
            emit(cfg, &to_csv(&run::crossover(cfg, max_rounds, &pool)?)?)?;
        }
        Cmd::Ftcheck { naive, tables } => {
            if naive {
                cfg.order = OrderKind::Naive;
            }
            let bases = if explicit_basis {
                vec![cfg.logical_basis()]
            } else {
                vec![LogicalBasis::Z, LogicalBasis::X]
            };
            let outcomes = run::ftcheck(cfg, &bases)?;
            if let Some(path) = tables {
                write_atomic(&path, write_tables(outcomes[0].experiment.decoder()).as_bytes())?;
            }
            emit(cfg, run::ft_report_text(cfg, &outcomes).as_bytes())?;
            if outcomes.iter().any(|o| !o.report.passed()) {
                return Ok(Some(CheckFailed));
            }
        }
        Cmd::Times { all, circuit_out } => {
            let rows = run::times(cfg, all)?;
            if let Some(path) = circuit_out {
                let code = cfg.code_spec()?;
                let c = qecsim_core::timed_simple_circuit(
                    &code,
                    cfg.rounds,
                    cfg.cnot_order(),
                    cfg.logical_basis(),
                    &cfg.arrangement_for(&code)?,
                    &cfg.timing_params()?,
                )?;
                write_atomic(&path, write_circuit(&c).as_bytes())?;
            }
            emit(cfg, &to_csv(&rows)?)?;
        }
        Cmd::Anneal { trace } => {
            let out = run::run_anneal(cfg)?;
            if let Some(path) = trace {
                write_atomic(&path, &to_csv(&out.trace_rows())?)?;
            }
            emit(cfg, format!("{}\n", out.annealed.arrangement).as_bytes())?;
            if let Some(reference) = out.reference {
                eprintln!(
                    "{} objective {}: annealed {} vs reference {}",
                    cfg.code, cfg.arrangement.objective, out.annealed.value, reference
                );
            }
        }
    }
    Ok(None)
}

fn log_run(path: &Path, cmd: &str, digest: &str, start: Instant, status: &str) {
    let unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let line = format!(
        "unix={unix} cmd={cmd} digest={digest} elapsed_ms={} status={status}\n",
        start.elapsed().as_millis()
    );
    let res = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .and_then(|mut f| f.write_all(line.as_bytes()));
    if let Err(e) = res {
        eprintln!("warning: cannot write log {}: {e}", path.display());
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let start = Instant::now();
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };
    let explicit_basis = cli.set.basis.is_some();
    apply(&mut cfg, cli.set);
    let name = cli.cmd.name();
    let result = execute(&mut cfg, cli.cmd, explicit_basis);
    let (code, status) = match result {
        Ok(None) => (ExitCode::SUCCESS, "ok"),
        Ok(Some(CheckFailed)) => (ExitCode::from(2), "check-failed"),
        Err(e) => {
            eprintln!("error: {e:#}");
            (ExitCode::from(1), "error")
        }
    };
    if let Some(log) = &cli.log {
        log_run(log, name, &cfg.digest(), start, status);
    }
    code
}
