//! File formats: the circuit text format, lookup-table dumps and CSV output.
//!
//! Circuit text format, one item per line:
//!
//! ```text
//! qubits 17
//! # prep
//! 0 prep_x 9
//! 1 cnot 9 1
//! # qec 0 0
//! 40 measure_z 10 rec=z0 dur=0
//! ```
//!
//! `# <block>` opens a block (`prep`, `prep_round <i>`, `qec <block> <step>`,
//! `round`, `measure`, or `-` for ops outside any block). Ops carry their
//! index, kind and qubits, then optional `rec=` (`x<i>`, `z<i>` or `d<i>`)
//! and `dur=` (μs) fields. Blank lines and lines starting with `//` are
//! ignored.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use qecsim_core::circuit::{BlockKind, Circuit, OpKind, Record};
use qecsim_core::{Decoder, LookupTable};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn block_name(kind: BlockKind) -> String {
    match kind {
        BlockKind::Prep => "prep".into(),
        BlockKind::PrepRound(i) => format!("prep_round {i}"),
        BlockKind::Qec { block, step } => format!("qec {block} {step}"),
        BlockKind::Round => "round".into(),
        BlockKind::Measure => "measure".into(),
    }
}

fn parse_block(words: &[&str]) -> Option<Option<BlockKind>> {
    Some(Some(match words {
        ["-"] => return Some(None),
        ["prep"] => BlockKind::Prep,
        ["prep_round", i] => BlockKind::PrepRound(i.parse().ok()?),
        ["qec", b, s] => BlockKind::Qec {
            block: b.parse().ok()?,
            step: s.parse().ok()?,
        },
        ["round"] => BlockKind::Round,
        ["measure"] => BlockKind::Measure,
        _ => return None,
    }))
}

fn record_name(r: Record) -> String {
    match r {
        Record::XCheck(i) => format!("x{i}"),
        Record::ZCheck(i) => format!("z{i}"),
        Record::Data(i) => format!("d{i}"),
    }
}

fn parse_record(s: &str) -> Option<Record> {
    let (tag, i) = s.split_at_checked(1)?;
    let i = i.parse().ok()?;
    match tag {
        "x" => Some(Record::XCheck(i)),
        "z" => Some(Record::ZCheck(i)),
        "d" => Some(Record::Data(i)),
        _ => None,
    }
}

pub fn write_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.n_qubits());
    let mut blocks = c.blocks().iter().peekable();
    let mut open = false;
    for (i, op) in c.ops().iter().enumerate() {
        while let Some(b) = blocks.next_if(|b| b.ops.start == i) {
            writeln!(out, "# {}", block_name(b.kind)).unwrap();
            open = true;
        }
        if open && c.blocks().iter().all(|b| !b.ops.contains(&i)) {
            out.push_str("# -\n");
            open = false;
        }
        write!(out, "{} {}", op.id, op.kind.name()).unwrap();
        for q in op.qubits() {
            write!(out, " {q}").unwrap();
        }
        if let Some(r) = op.record {
            write!(out, " rec={}", record_name(r)).unwrap();
        }
        if op.duration != 0.0 {
            write!(out, " dur={}", op.duration).unwrap();
        }
        out.push('\n');
    }
    for b in blocks {
        writeln!(out, "# {}", block_name(b.kind)).unwrap();
    }
    out
}

struct ParsedOp {
    line: usize,
    kind: OpKind,
    qubits: Vec<usize>,
    record: Option<Record>,
    duration: f64,
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let err = |line: usize, msg: String| ParseError { line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with("//"));
    let (n_line, first) = lines.next().ok_or_else(|| err(1, "empty circuit file".into()))?;
    let n_qubits: usize = first
        .strip_prefix("qubits ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| err(n_line, "expected `qubits <n>`".into()))?;

    let mut groups: Vec<(Option<BlockKind>, Vec<ParsedOp>)> = Vec::new();
    let mut n_ops = 0;
    for (line, l) in lines {
        let words: Vec<&str> = l.split_whitespace().collect();
        if words[0] == "#" {
            let kind = parse_block(&words[1..]).ok_or_else(|| err(line, format!("unknown block header {l:?}")))?;
            groups.push((kind, Vec::new()));
            continue;
        }
        let id: usize = words[0]
            .parse()
            .map_err(|_| err(line, format!("bad op index {:?}", words[0])))?;
        if id != n_ops {
            return Err(err(line, format!("op index {id}, expected {n_ops}")));
        }
        let kind = words
            .get(1)
            .and_then(|w| OpKind::from_name(w))
            .ok_or_else(|| err(line, "missing or unknown op kind".into()))?;
        let mut qubits = Vec::new();
        let mut record = None;
        let mut duration = 0.0;
        for w in &words[2..] {
            if let Some(r) = w.strip_prefix("rec=") {
                record = Some(parse_record(r).ok_or_else(|| err(line, format!("bad record {r:?}")))?);
            } else if let Some(d) = w.strip_prefix("dur=") {
                duration = d
                    .parse()
                    .ok()
                    .filter(|d: &f64| d.is_finite() && *d >= 0.0)
                    .ok_or_else(|| err(line, format!("bad duration {d:?}")))?;
            } else {
                qubits.push(w.parse().map_err(|_| err(line, format!("bad qubit {w:?}")))?);
            }
        }
        if qubits.len() != kind.arity() {
            return Err(err(
                line,
                format!("{} takes {} qubits, got {}", kind.name(), kind.arity(), qubits.len()),
            ));
        }
        if let Some(&q) = qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(err(line, format!("qubit {q} out of range for {n_qubits} qubits")));
        }
        if kind == OpKind::Cnot || kind == OpKind::Xx {
            if qubits[0] == qubits[1] {
                return Err(err(line, "two-qubit op on one qubit".into()));
            }
        }
        if groups.is_empty() {
            groups.push((None, Vec::new()));
        }
        groups.last_mut().unwrap().1.push(ParsedOp {
            line,
            kind,
            qubits,
            record,
            duration,
        });
        n_ops += 1;
    }

    let mut c = Circuit::new(n_qubits);
    let mut durations = Vec::with_capacity(n_ops);
    let push_all = |c: &mut Circuit, ops: &[ParsedOp], durations: &mut Vec<f64>| {
        for op in ops {
            c.push(op.kind, &op.qubits, op.record)
                .map_err(|e| err(op.line, e.to_string()))?;
            durations.push(op.duration);
        }
        Ok::<(), ParseError>(())
    };
    for (kind, ops) in &groups {
        match kind {
            Some(kind) => {
                let mut res = Ok(());
                c.block(*kind, |c| res = push_all(c, ops, &mut durations));
                res?;
            }
            None => push_all(&mut c, ops, &mut durations)?,
        }
    }
    c.set_durations(&durations);
    Ok(c)
}

fn write_table(out: &mut String, title: &str, t: &LookupTable) {
    writeln!(out, "# {title}").unwrap();
    let bits = t.key_bits();
    for (key, corr) in t.iter() {
        let key_str: String = (0..bits).map(|b| if key >> b & 1 == 1 { '1' } else { '0' }).collect();
        writeln!(out, "{key_str} {corr}").unwrap();
    }
}

/// Both lookup tables, one `<syndrome bits> <correction>` line per entry.
/// Syndrome bit `i` (printed `i`-th) belongs to check `i` of the keying type.
pub fn write_tables(d: &Decoder) -> String {
    let mut out = String::new();
    writeln!(out, "# code {}", d.code().name()).unwrap();
    write_table(&mut out, "X corrections, keyed by Z-check syndromes", d.x_table());
    write_table(&mut out, "Z corrections, keyed by X-check syndromes", d.z_table());
    out
}

/// CSV with a header row.
pub fn to_csv<T: Serialize>(rows: &[T]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let Some(name) = path.file_name() else {
        bail!("output path {} has no file name", path.display());
    };
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let write = || -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    };
    write()
        .inspect_err(|_| {
            let _ = std::fs::remove_file(&tmp);
        })
        .with_context(|| format!("writing {}", path.display()))
}

/// One swept point of `simulate`/`sweep`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SweepRow {
    /// Value of the swept parameter.
    pub p: f64,
    pub p_logical: f64,
    pub stderr: f64,
    pub trials: u64,
    pub rounds: usize,
    pub code: String,
    pub seed: u64,
    pub param: &'static str,
    /// Unencoded reference error at this point.
    pub comparator: f64,
    pub digest: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ThresholdRow {
    pub code: String,
    pub param: &'static str,
    pub p_star: f64,
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
    pub rounds: usize,
    pub seed: u64,
    pub digest: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CrossoverRow {
    pub rounds: usize,
    pub p: f64,
    pub p_logical_baconshor: f64,
    pub stderr_baconshor: f64,
    pub p_logical_surface17: f64,
    pub stderr_surface17: f64,
    pub surface17_wins: bool,
    pub seed: u64,
    pub digest: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TimesRow {
    pub code: String,
    pub arrangement: String,
    pub mode: &'static str,
    pub round_logic: f64,
    pub round_shuttle: f64,
    pub round_meas: f64,
    pub round_total: f64,
    pub prep: String,
    pub qec: String,
    pub measure: f64,
    pub total: String,
    pub digest: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TraceRow {
    pub proposal: usize,
    pub current: f64,
    pub best: f64,
}
