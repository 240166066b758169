//! Command implementations, independent of argument parsing.

use anyhow::{bail, Context, Result};
use qecsim_core::layout::{objective_value, round_circuit};
use qecsim_core::montecarlo::{trial_rng, RoundComparison};
use qecsim_core::{
    anneal, crossover_rounds, enumerate_locations, ft_check, pseudothreshold, reference_arrangement, run_direct,
    run_importance, simple_times, timed_simple_circuit, AnnealParams, Annealed, Arrangement, Circuit, CodeSpec,
    Decoder, Executor, Experiment, LogicalBasis, McError, Mode, NoiseModel, Objective, SimResult,
};

use crate::config::{parse_code, ModelKind, RunConfig, SamplerKind};
use crate::format::{CrossoverRow, SweepRow, ThresholdRow, TimesRow, TraceRow};

/// The simple circuit of `cfg` for `code`: plain for depolarizing noise,
/// MS-compiled and timed on the configured arrangement for ion noise.
pub fn circuit_for(cfg: &RunConfig, code: &CodeSpec, rounds: usize, basis: LogicalBasis) -> Result<Circuit> {
    let order = cfg.cnot_order();
    Ok(match cfg.model {
        ModelKind::Depolarizing => qecsim_core::simple_circuit_in(code, rounds, order, basis),
        ModelKind::Iontrap => {
            let arr = cfg.arrangement_for(code)?;
            timed_simple_circuit(code, rounds, order, basis, &arr, &cfg.timing_params()?)?
        }
    })
}

pub fn experiment(cfg: &RunConfig, code: &CodeSpec, rounds: usize) -> Result<Experiment> {
    let circuit = circuit_for(cfg, code, rounds, cfg.logical_basis())?;
    Ok(Experiment::new(circuit, Decoder::new(code, cfg.cnot_order())?)?)
}

/// Unencoded reference at a sweep point: `p` itself for depolarizing noise,
/// one nearest-neighbour MS gate for ion noise.
pub fn comparator(cfg: &RunConfig, value: f64) -> Result<f64> {
    Ok(match cfg.noise_at(value)? {
        NoiseModel::Depolarizing(d) => d.p,
        NoiseModel::IonTrap(ion) => ion.single_gate_error(cfg.timing_params()?.t_2q(1)),
    })
}

/// Logical failure rate of `exp` at one sweep point.
pub fn evaluate<E: Executor>(cfg: &RunConfig, exp: &Experiment, value: f64, seed: u64, exec: &E) -> Result<SimResult> {
    let locations = enumerate_locations(exp.circuit(), &cfg.noise_at(value)?)?;
    Ok(match cfg.sampler.kind {
        SamplerKind::Direct => run_direct(exp, &locations, cfg.sampler.trials, seed, exec)?,
        SamplerKind::Importance => run_importance(exp, &locations, &cfg.importance(), seed, exec)?,
    })
}

/// `simulate`: one row per sweep value.
pub fn simulate<E: Executor>(cfg: &RunConfig, exec: &E) -> Result<Vec<SweepRow>> {
    simulate_with(cfg, experiment(cfg, &cfg.code_spec()?, cfg.rounds)?, exec)
}

/// As [`simulate`] on a caller-supplied experiment.
pub fn simulate_with<E: Executor>(cfg: &RunConfig, exp: Experiment, exec: &E) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let digest = cfg.digest();
    cfg.sweep
        .values
        .iter()
        .map(|&v| {
            let r = evaluate(cfg, &exp, v, cfg.seed, exec)?;
            Ok(SweepRow {
                p: v,
                p_logical: r.p_logical,
                stderr: r.stderr,
                trials: r.trials,
                rounds: cfg.rounds,
                code: cfg.code.clone(),
                seed: cfg.seed,
                param: cfg.sweep.param.name(),
                comparator: comparator(cfg, v)?,
                digest: digest.clone(),
            })
        })
        .collect()
}

/// `points` values from `from` to `to`, evenly spaced in log.
pub fn log_space(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if !(from > 0.0 && to > 0.0 && from.is_finite() && to.is_finite()) {
        bail!("log-spaced sweeps need positive finite bounds");
    }
    Ok(match points {
        0 => Vec::new(),
        1 => vec![from],
        n => {
            let (a, b) = (from.ln(), to.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    })
}

pub fn threshold<E: Executor>(cfg: &RunConfig, bracket: (f64, f64), rel_tol: f64, exec: &E) -> Result<ThresholdRow> {
    cfg.validate()?;
    let exp = experiment(cfg, &cfg.code_spec()?, cfg.rounds)?;
    let mut err = None;
    let t = pseudothreshold(
        |v| match evaluate(cfg, &exp, v, cfg.seed, exec) {
            Ok(r) => (r.p_logical, r.stderr),
            Err(e) => {
                err.get_or_insert(e);
                (f64::NAN, 0.0)
            }
        },
        |v| comparator(cfg, v).unwrap_or(f64::NAN),
        bracket,
        rel_tol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let t = t?;
    Ok(ThresholdRow {
        code: cfg.code.clone(),
        param: cfg.sweep.param.name(),
        p_star: t.p,
        lo: t.lo,
        hi: t.hi,
        evaluations: t.evaluations,
        rounds: cfg.rounds,
        seed: cfg.seed,
        digest: cfg.digest(),
    })
}

fn unavailable() -> SimResult {
    SimResult {
        trials: 0,
        failures: 0,
        p_logical: f64::NAN,
        stderr: f64::NAN,
        seed: 0,
        strata: Vec::new(),
        tail: 0.0,
    }
}

/// Bacon-Shor-13 vs Surface-17 over `1..=max_rounds` at the first sweep
/// value. Rows cover every round count evaluated; the flag marks the first
/// significant Surface-17 win, if any.
pub fn crossover<E: Executor>(cfg: &RunConfig, max_rounds: usize, exec: &E) -> Result<Vec<CrossoverRow>> {
    cfg.validate()?;
    let value = cfg.sweep.values[0];
    let bs = parse_code("baconshor13")?;
    let s17 = parse_code("surface17")?;
    let mut err = None;
    let mut seen = Vec::new();
    let result = crossover_rounds(
        |r| {
            let mut eval = |code: &CodeSpec| -> SimResult {
                let r = experiment(cfg, code, r).and_then(|exp| evaluate(cfg, &exp, value, cfg.seed, exec));
                r.unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    unavailable()
                })
            };
            let pair = (eval(&bs), eval(&s17));
            seen.push(RoundComparison {
                rounds: r,
                baconshor: pair.0.clone(),
                surface: pair.1.clone(),
            });
            pair
        },
        max_rounds,
    );
    match result {
        Ok(_) | Err(McError::NoCrossing(_)) => {}
        Err(e) => return Err(e.into()),
    }
    let sweep = seen;
    if let Some(e) = err {
        return Err(e);
    }
    let digest = cfg.digest();
    Ok(sweep
        .iter()
        .map(|c| CrossoverRow {
            rounds: c.rounds,
            p: value,
            p_logical_baconshor: c.baconshor.p_logical,
            stderr_baconshor: c.baconshor.stderr,
            p_logical_surface17: c.surface.p_logical,
            stderr_surface17: c.surface.stderr,
            surface17_wins: c.surface_wins(),
            seed: cfg.seed,
            digest: digest.clone(),
        })
        .collect())
}

pub struct FtOutcome {
    pub basis: LogicalBasis,
    pub report: qecsim_core::FtReport,
    pub experiment: Experiment,
}

/// Exhaustive single-fault check of the one-round simple circuit in each
/// requested basis.
pub fn ftcheck(cfg: &RunConfig, bases: &[LogicalBasis]) -> Result<Vec<FtOutcome>> {
    let code = cfg.code_spec()?;
    if code.side() != 3 {
        bail!("ftcheck needs a distance-3 code, got {}", code.name());
    }
    bases
        .iter()
        .map(|&basis| {
            let exp = Experiment::simple_in(&code, 1, cfg.cnot_order(), basis)?;
            let report = ft_check(&exp, |l, o| trial_rng(cfg.seed, l as u64, o as u64));
            Ok(FtOutcome {
                basis,
                report,
                experiment: exp,
            })
        })
        .collect()
}

pub fn ft_report_text(cfg: &RunConfig, outcomes: &[FtOutcome]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for o in outcomes {
        let basis = match o.basis {
            LogicalBasis::Z => "z",
            LogicalBasis::X => "x",
        };
        let order = match cfg.order {
            crate::config::OrderKind::Gauge => "gauge",
            crate::config::OrderKind::Naive => "naive",
        };
        writeln!(
            out,
            "{} order={order} basis={basis} runs={} failures={}",
            cfg.code,
            o.report.runs,
            o.report.failures.len()
        )
        .unwrap();
        for f in &o.report.failures {
            let op = &o.experiment.circuit().ops()[f.fault.op];
            let terms: Vec<String> = f.fault.terms().map(|(q, p)| format!("{}{q}", p.as_char())).collect();
            writeln!(
                out,
                "  fail location={} outcome={} op={} {} {:?} {} {}",
                f.location,
                f.outcome,
                f.fault.op,
                op.kind.name(),
                op.qubits(),
                if f.fault.before { "before" } else { "after" },
                terms.join(" ")
            )
            .unwrap();
        }
    }
    out
}

/// Timing rows for the configured arrangement and mode, or every reference
/// arrangement in both modes when `all` is set.
pub fn times(cfg: &RunConfig, all: bool) -> Result<Vec<TimesRow>> {
    let code = cfg.code_spec()?;
    let timing = cfg.timing_params()?;
    let cases: Vec<(String, Arrangement, Mode)> = if all {
        if code.n_data() != 9 {
            bail!("--all needs a distance-3 code");
        }
        Objective::ALL
            .iter()
            .flat_map(|&o| {
                [Mode::Serial, Mode::Parallel]
                    .map(|m| (o.name().to_string(), reference_arrangement(code.family(), o), m))
            })
            .collect()
    } else {
        let name = match cfg.arrangement.source {
            crate::config::ArrangementSource::Explicit => "explicit".to_string(),
            _ => cfg.arrangement.objective.clone(),
        };
        vec![(name, cfg.arrangement_for(&code)?, cfg.layout_mode())]
    };
    let digest = cfg.digest();
    cases
        .into_iter()
        .map(|(name, arr, mode)| {
            let t = simple_times(&code, &arr, &timing, mode)?;
            Ok(TimesRow {
                code: cfg.code.clone(),
                arrangement: name,
                mode: match mode {
                    Mode::Serial => "serial",
                    Mode::Parallel => "parallel",
                },
                round_logic: t.round.logic,
                round_shuttle: t.round.shuttle,
                round_meas: t.round.meas,
                round_total: t.round.total,
                prep: t.prep.to_string(),
                qec: t.qec.to_string(),
                measure: t.measure,
                total: t.total.to_string(),
                digest: digest.clone(),
            })
        })
        .collect()
}

pub struct AnnealOutput {
    pub annealed: Annealed,
    /// Objective of the reference arrangement, when one exists.
    pub reference: Option<f64>,
}

impl AnnealOutput {
    pub fn trace_rows(&self) -> Vec<TraceRow> {
        self.annealed
            .trace
            .iter()
            .map(|&(proposal, current, best)| TraceRow {
                proposal,
                current,
                best,
            })
            .collect()
    }
}

pub fn run_anneal(cfg: &RunConfig) -> Result<AnnealOutput> {
    let code = cfg.code_spec()?;
    let objective = cfg.objective()?;
    let timing = cfg.timing_params()?;
    let round = round_circuit(&code);
    let params = AnnealParams {
        proposals: cfg.arrangement.proposals,
        ..Default::default()
    };
    let annealed =
        anneal(&round, code.n_data(), objective, cfg.arrangement.seed, &timing, &params).context("annealing")?;
    let reference = if code.n_data() == 9 {
        Some(objective_value(
            objective,
            &round,
            &reference_arrangement(code.family(), objective),
            &timing,
        )?)
    } else {
        None
    };
    Ok(AnnealOutput { annealed, reference })
}
