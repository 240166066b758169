//! Linear ion-chain layouts: distance-dependent gate timing, serial and
//! parallel scheduling, shuttle/measurement accounting and a simulated
//! annealing search over chain orders.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{
    compile_to_ms, prep_circuit, simple_circuit_in, syndrome_round, Circuit, CnotOrder, LogicalBasis, OpKind,
};
use crate::code::{CodeFamily, CodeSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("scheduling needs native operations; found {0:?}")]
    NotNative(OpKind),
    #[error("arrangement is not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("arrangement has {arrangement} ions, circuit has {circuit} qubits")]
    SizeMismatch { arrangement: usize, circuit: usize },
    #[error("circuit has no two-qubit gates")]
    NoTwoQubitGates,
    #[error("cannot parse ion label {0:?}")]
    Parse(String),
}

/// Operation times in μs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingParams {
    pub t_1q: f64,
    pub t_meas_batch: f64,
    pub t_shuttle_op: f64,
    /// Two-qubit gate time between neighbouring ions.
    pub t_base: f64,
    /// Extra two-qubit gate time per unit of separation beyond 1.
    pub t_slope: f64,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self {
            t_1q: 10.0,
            t_meas_batch: 100.0,
            t_shuttle_op: 100.0,
            t_base: 40.0,
            t_slope: 20.0,
        }
    }
}

impl TimingParams {
    /// Gate time at chain separation `d ≥ 1`.
    pub fn t_2q(&self, d: usize) -> f64 {
        self.t_base + self.t_slope * d.saturating_sub(1) as f64
    }
}

/// Chain position → qubit label. Labels `>= n_data` are ancillas.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arrangement {
    order: Vec<usize>,
    pos: Vec<usize>,
    n_data: usize,
}

impl Arrangement {
    pub fn new(order: Vec<usize>, n_data: usize) -> Result<Self, LayoutError> {
        let n = order.len();
        let mut pos = vec![usize::MAX; n];
        for (i, &q) in order.iter().enumerate() {
            if q >= n || pos[q] != usize::MAX {
                return Err(LayoutError::NotPermutation(n));
            }
            pos[q] = i;
        }
        Ok(Self { order, pos, n_data })
    }

    pub fn identity(n_qubits: usize, n_data: usize) -> Self {
        Self::new((0..n_qubits).collect(), n_data).expect("identity is a permutation")
    }

    /// Parses whitespace-separated qubit labels in chain order.
    pub fn parse(s: &str, n_data: usize) -> Result<Self, LayoutError> {
        let order = s
            .split_whitespace()
            .map(|t| usize::from_str(t).map_err(|_| LayoutError::Parse(t.into())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(order, n_data)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn position(&self, q: usize) -> usize {
        self.pos[q]
    }

    pub fn is_ancilla(&self, q: usize) -> bool {
        q >= self.n_data
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.pos[a].abs_diff(self.pos[b])
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.order.iter().rev().copied().collect(), self.n_data).expect("reversal is a permutation")
    }

    /// Whether the ancillas occupy one contiguous run at the end of the chain.
    pub fn ancillas_trailing(&self) -> bool {
        self.order.iter().skip(self.n_data).all(|&q| self.is_ancilla(q))
    }

    /// Maximal runs of consecutive ancilla positions.
    pub fn ancilla_blocks(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, &q) in self.order.iter().enumerate() {
            match (self.is_ancilla(q), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push(s..self.order.len());
        }
        out
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.order.swap(i, j);
        self.pos[self.order[i]] = i;
        self.pos[self.order[j]] = j;
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

/// Optimization label: separated (S) or mixed (M) data/ancillas, minimising
/// average two-qubit time (A) or parallel round time (T).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Objective {
    Sa,
    Ma,
    Mt,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Sa, Objective::Ma, Objective::Mt];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Sa => "SA",
            Objective::Ma => "MA",
            Objective::Mt => "MT",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name().eq_ignore_ascii_case(s))
    }
}

/// Optimized reference chain orders for the distance-3 codes.
pub fn reference_arrangement(family: CodeFamily, objective: Objective) -> Arrangement {
    let s = match (family, objective) {
        (CodeFamily::Surface17, Objective::Sa) => "0 2 6 8 1 4 3 7 5 11 12 10 15 13 14 9 16",
        (CodeFamily::Surface17, Objective::Ma) => "2 9 1 12 5 15 8 14 4 11 0 10 3 13 7 16 6",
        (CodeFamily::Surface17, Objective::Mt) => "10 15 9 5 0 1 11 12 14 7 4 3 8 2 6 13 16",
        (CodeFamily::BaconShor, Objective::Sa) => "0 2 6 8 1 3 7 5 4 11 10 12 9",
        (CodeFamily::BaconShor, Objective::Ma) => "8 2 12 1 5 9 4 10 7 3 11 0 6",
        (CodeFamily::BaconShor, Objective::Mt) => "2 1 5 4 9 12 10 11 7 3 0 8 6",
    };
    Arrangement::parse(s, 9).expect("reference arrangements are permutations")
}

/// `(shuttle, meas)` for measuring every ancilla once: one batch per ancilla
/// block, two shuttle operations per interior block plus one move out and
/// back.
pub fn shuttle_meas_cost(arr: &Arrangement, params: &TimingParams) -> (f64, f64) {
    block_cost(arr, &arr.ancilla_blocks(), params)
}

fn block_cost(arr: &Arrangement, blocks: &[Range<usize>], params: &TimingParams) -> (f64, f64) {
    if blocks.is_empty() {
        return (0.0, 0.0);
    }
    let interior = blocks.iter().filter(|b| b.start > 0 && b.end < arr.len()).count();
    (
        params.t_shuttle_op * (2 * interior + 2) as f64,
        params.t_meas_batch * blocks.len() as f64,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Serial,
    /// Up to two concurrent XX gates, single-ion operations unrestricted.
    Parallel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleResult {
    pub logic: f64,
    pub shuttle: f64,
    pub meas: f64,
    pub total: f64,
    /// Start time of each operation within the logic schedule.
    pub starts: Vec<f64>,
}

/// Gate durations under `arr`; preparations and measurements take none (they
/// are charged per measurement batch).
pub fn durations(circuit: &Circuit, arr: &Arrangement, params: &TimingParams) -> Result<Vec<f64>, LayoutError> {
    if arr.len() != circuit.n_qubits() {
        return Err(LayoutError::SizeMismatch {
            arrangement: arr.len(),
            circuit: circuit.n_qubits(),
        });
    }
    circuit
        .ops()
        .iter()
        .map(|op| {
            if !op.kind.is_native() {
                return Err(LayoutError::NotNative(op.kind));
            }
            let q = op.qubits();
            Ok(match op.kind {
                OpKind::Xx => params.t_2q(arr.distance(q[0], q[1])),
                k if k.is_gate() => params.t_1q,
                _ => 0.0,
            })
        })
        .collect()
}

/// Greedy in-order list schedule of a native circuit. Durations are written
/// back onto the circuit. Each block that measures ancillas pays the shuttle
/// and batch cost of the ancilla blocks it measures; a block measuring only
/// data pays one batch.
pub fn schedule(
    circuit: &mut Circuit,
    arr: &Arrangement,
    params: &TimingParams,
    mode: Mode,
) -> Result<ScheduleResult, LayoutError> {
    let dur = durations(circuit, arr, params)?;
    circuit.set_durations(&dur);
    let ops = circuit.ops();
    let mut starts = vec![0.0; ops.len()];
    let mut logic: f64 = 0.0;
    match mode {
        Mode::Serial => {
            for (i, d) in dur.iter().enumerate() {
                starts[i] = logic;
                logic += d;
            }
        }
        Mode::Parallel => {
            let mut ready = vec![0.0f64; circuit.n_qubits()];
            let mut xx: Vec<(f64, f64)> = Vec::new();
            for (i, op) in ops.iter().enumerate() {
                let qs = op.qubits();
                let mut t = qs.iter().map(|&q| ready[q]).fold(0.0, f64::max);
                if op.kind == OpKind::Xx {
                    t = earliest_slot(&xx, t, dur[i]);
                    xx.push((t, t + dur[i]));
                }
                starts[i] = t;
                for &q in qs {
                    ready[q] = t + dur[i];
                }
                logic = logic.max(t + dur[i]);
            }
        }
    }
    let (mut shuttle, mut meas) = (0.0, 0.0);
    let whole = [crate::circuit::Block {
        kind: crate::circuit::BlockKind::Round,
        ops: 0..ops.len(),
    }];
    let blocks = if circuit.blocks().is_empty() {
        &whole[..]
    } else {
        circuit.blocks()
    };
    for b in blocks {
        let measured: Vec<usize> = ops[b.ops.clone()]
            .iter()
            .filter(|o| o.kind.is_measurement())
            .map(|o| o.qubits()[0])
            .collect();
        if measured.is_empty() {
            continue;
        }
        let runs: Vec<Range<usize>> = arr
            .ancilla_blocks()
            .into_iter()
            .filter(|r| measured.iter().any(|&q| r.contains(&arr.position(q))))
            .collect();
        let (s, m) = block_cost(arr, &runs, params);
        shuttle += s;
        meas += m;
        if measured.iter().any(|&q| !arr.is_ancilla(q)) {
            meas += params.t_meas_batch;
        }
    }
    Ok(ScheduleResult {
        logic,
        shuttle,
        meas,
        total: logic + shuttle + meas,
        starts,
    })
}

/// Earliest `t ≥ from` at which `[t, t + d)` overlaps fewer than two of `busy`.
fn earliest_slot(busy: &[(f64, f64)], from: f64, d: f64) -> f64 {
    let mut candidates: Vec<f64> = busy.iter().map(|&(_, e)| e).filter(|&e| e > from).collect();
    candidates.push(from);
    candidates.sort_by(f64::total_cmp);
    for t in candidates {
        let overlap = busy.iter().filter(|&&(s, e)| s < t + d && t < e).count();
        if overlap < 2 {
            return t;
        }
    }
    unreachable!("the last busy interval end is always free")
}

/// Mean two-qubit gate time over the circuit's XX (or CNOT) gates.
pub fn avg_2q_time(circuit: &Circuit, arr: &Arrangement, params: &TimingParams) -> Result<f64, LayoutError> {
    let pairs = two_qubit_pairs(circuit);
    if pairs.is_empty() {
        return Err(LayoutError::NoTwoQubitGates);
    }
    Ok(mean_2q(&pairs, arr, params))
}

fn two_qubit_pairs(circuit: &Circuit) -> Vec<(usize, usize)> {
    circuit
        .ops()
        .iter()
        .filter(|o| matches!(o.kind, OpKind::Xx | OpKind::Cnot))
        .map(|o| (o.qubits()[0], o.qubits()[1]))
        .collect()
}

fn mean_2q(pairs: &[(usize, usize)], arr: &Arrangement, params: &TimingParams) -> f64 {
    pairs.iter().map(|&(a, b)| params.t_2q(arr.distance(a, b))).sum::<f64>() / pairs.len() as f64
}

/// The compiled circuit of one syndrome round, the unit the arrangements are
/// optimized for.
pub fn round_circuit(code: &CodeSpec) -> Circuit {
    compile_to_ms(&syndrome_round(code, CnotOrder::Gauge)).expect("rounds use H/CNOT only")
}

/// The MS-compiled simple circuit with gate durations for `arr`, ready for
/// trapped-ion noise.
pub fn timed_simple_circuit(
    code: &CodeSpec,
    rounds: usize,
    order: CnotOrder,
    basis: LogicalBasis,
    arr: &Arrangement,
    params: &TimingParams,
) -> Result<Circuit, LayoutError> {
    let mut c = compile_to_ms(&simple_circuit_in(code, rounds, order, basis)).expect("simple circuits use H/CNOT only");
    schedule(&mut c, arr, params, Mode::Serial)?;
    Ok(c)
}

/// Objective value of `arr` for one compiled syndrome round: mean two-qubit
/// time for SA/MA, parallel round total for MT.
pub fn objective_value(
    objective: Objective,
    round: &Circuit,
    arr: &Arrangement,
    params: &TimingParams,
) -> Result<f64, LayoutError> {
    match objective {
        Objective::Sa | Objective::Ma => avg_2q_time(round, arr, params),
        Objective::Mt => Ok(schedule(&mut round.clone(), arr, params, Mode::Parallel)?.total),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealParams {
    pub proposals: usize,
    /// Geometric cooling factor per proposal.
    pub cooling: f64,
    /// Initial temperature relative to the starting objective.
    pub t0: f64,
    /// Proposals without a new best before reheating from the best state.
    pub stagnation: usize,
    /// Record `(proposal, current, best)` every this many proposals (0: never).
    pub trace_every: usize,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            proposals: 100_000,
            cooling: 0.999,
            t0: 0.05,
            stagnation: 2_000,
            trace_every: 100,
        }
    }
}

/// Simulated annealing over chain orders of `round`'s qubits. Neighbours swap
/// two positions; for SA the swap stays within the data prefix or the ancilla
/// suffix. Returns the best arrangement seen.
pub fn anneal(
    round: &Circuit,
    n_data: usize,
    objective: Objective,
    seed: u64,
    timing: &TimingParams,
    params: &AnnealParams,
) -> Result<Annealed, LayoutError> {
    let n = round.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    match objective {
        Objective::Sa => {
            shuffle(&mut order[..n_data], &mut rng);
            shuffle(&mut order[n_data..], &mut rng);
        }
        _ => shuffle(&mut order, &mut rng),
    }
    let pairs = two_qubit_pairs(round);
    if pairs.is_empty() {
        return Err(LayoutError::NoTwoQubitGates);
    }
    let mut scratch = round.clone();
    let mut eval = |a: &Arrangement| -> Result<f64, LayoutError> {
        match objective {
            Objective::Sa | Objective::Ma => Ok(mean_2q(&pairs, a, timing)),
            Objective::Mt => Ok(schedule(&mut scratch, a, timing, Mode::Parallel)?.total),
        }
    };
    let mut cur = Arrangement::new(order, n_data)?;
    let mut cur_val = eval(&cur)?;
    let (mut best, mut best_val) = (cur.clone(), cur_val);
    let mut temp = params.t0 * cur_val;
    let mut since_best = 0;
    let mut trace = Vec::new();
    for step in 0..params.proposals {
        if params.trace_every > 0 && step % params.trace_every == 0 {
            trace.push((step, cur_val, best_val));
        }
        let (lo, hi) = match objective {
            Objective::Sa if rng.random_bool(n_data as f64 / n as f64) => (0, n_data),
            Objective::Sa => (n_data, n),
            _ => (0, n),
        };
        if hi - lo < 2 {
            continue;
        }
        let i = rng.random_range(lo..hi);
        let mut j = rng.random_range(lo..hi - 1);
        if j >= i {
            j += 1;
        }
        cur.swap(i, j);
        let val = eval(&cur)?;
        let delta = val - cur_val;
        if delta <= 0.0 || (temp > 0.0 && rng.random::<f64>() < libm::exp(-delta / temp)) {
            cur_val = val;
        } else {
            cur.swap(i, j);
        }
        if cur_val < best_val {
            best = cur.clone();
            best_val = cur_val;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= params.stagnation {
                cur = best.clone();
                cur_val = best_val;
                since_best = 0;
                temp = params.t0 * best_val;
                continue;
            }
        }
        temp *= params.cooling;
    }
    trace.push((params.proposals, cur_val, best_val));
    Ok(Annealed {
        arrangement: best,
        value: best_val,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Annealed {
    pub arrangement: Arrangement,
    pub value: f64,
    /// `(proposal, current, best)` objective samples.
    pub trace: Vec<(usize, f64, f64)>,
}

fn shuffle<R: Rng>(xs: &mut [usize], rng: &mut R) {
    for i in (1..xs.len()).rev() {
        xs.swap(i, rng.random_range(0..=i));
    }
}

/// Lower and upper bounds of a time that depends on how many conditional
/// rounds run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{:.0}", self.lo)
        } else {
            write!(f, "{:.0}-{:.0}", self.lo, self.hi)
        }
    }
}

/// Simple-circuit timing with one two-qubit QEC block.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleTimes {
    /// Gate time of logical preparation (two or three rounds for Surface-17).
    pub prep: Span,
    /// One syndrome round, as scheduled.
    pub round: ScheduleResult,
    /// One or two syndrome rounds.
    pub qec: Span,
    pub measure: f64,
    pub total: Span,
}

pub fn simple_times(
    code: &CodeSpec,
    arr: &Arrangement,
    params: &TimingParams,
    mode: Mode,
) -> Result<SimpleTimes, LayoutError> {
    let mut prep =
        compile_to_ms(&prep_circuit(code, CnotOrder::Gauge, LogicalBasis::Z)).expect("preparation uses H/CNOT only");
    schedule(&mut prep, arr, params, mode)?;
    let block_logic = |c: &Circuit, r: Range<usize>| -> Result<f64, LayoutError> {
        let mut sub = Circuit::new(c.n_qubits());
        for op in &c.ops()[r] {
            sub.push(op.kind, op.qubits(), op.record)
                .expect("ops come from a valid circuit");
        }
        Ok(schedule(&mut sub, arr, params, mode)?.logic)
    };
    let blocks = prep.blocks().to_vec();
    let parts = blocks
        .iter()
        .map(|b| block_logic(&prep, b.ops.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let prep_span = match code.family() {
        CodeFamily::BaconShor => Span {
            lo: parts.iter().sum(),
            hi: parts.iter().sum(),
        },
        CodeFamily::Surface17 => Span {
            lo: parts[..3].iter().sum(),
            hi: parts.iter().sum(),
        },
    };
    let round = schedule(&mut round_circuit(code), arr, params, mode)?;
    let qec = Span {
        lo: round.total,
        hi: 2.0 * round.total,
    };
    let measure = params.t_meas_batch;
    Ok(SimpleTimes {
        prep: prep_span,
        total: Span {
            lo: prep_span.lo + qec.lo + measure,
            hi: prep_span.hi + qec.hi + measure,
        },
        round,
        qec,
        measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{baconshor, surface17};
    use proptest::prelude::*;

    fn single_cnot() -> Circuit {
        let mut c = Circuit::new(2);
        c.push(OpKind::Cnot, &[0, 1], None).unwrap();
        compile_to_ms(&c).unwrap()
    }

    #[test]
    fn single_cnot_serial_time() {
        let arr = Arrangement::identity(2, 2);
        let r = schedule(&mut single_cnot(), &arr, &TimingParams::default(), Mode::Serial).unwrap();
        assert_eq!(r.logic, 80.0);
        assert_eq!(r.total, 80.0);
    }

    #[test]
    fn durations_written_back() {
        let arr = Arrangement::new(vec![0, 2, 1], 3).unwrap();
        let mut c = Circuit::new(3);
        c.push(OpKind::Cnot, &[0, 1], None).unwrap();
        let mut c = compile_to_ms(&c).unwrap();
        schedule(&mut c, &arr, &TimingParams::default(), Mode::Serial).unwrap();
        let xx = c.ops().iter().find(|o| o.kind == OpKind::Xx).unwrap();
        assert_eq!(xx.duration, 60.0);
        assert!(c.ops().iter().filter(|o| o.kind.is_gate()).all(|o| o.duration > 0.0));
    }

    #[test]
    fn uncompiled_rejected() {
        let mut c = syndrome_round(&surface17(), CnotOrder::Gauge);
        let arr = Arrangement::identity(17, 9);
        assert_eq!(
            schedule(&mut c, &arr, &TimingParams::default(), Mode::Serial),
            Err(LayoutError::NotNative(OpKind::Cnot))
        );
    }

    #[test]
    fn bad_arrangements() {
        assert!(Arrangement::new(vec![0, 0, 1], 2).is_err());
        assert!(Arrangement::new(vec![0, 3, 1], 2).is_err());
        assert!(Arrangement::parse("0 x 1", 2).is_err());
        let arr = Arrangement::identity(4, 2);
        assert!(matches!(
            schedule(&mut single_cnot(), &arr, &TimingParams::default(), Mode::Serial),
            Err(LayoutError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn table_meas_column() {
        let t = TimingParams::default();
        let meas = |f, o| shuttle_meas_cost(&reference_arrangement(f, o), &t);
        assert_eq!(meas(CodeFamily::Surface17, Objective::Sa).1, 100.0);
        assert_eq!(meas(CodeFamily::Surface17, Objective::Ma).1, 800.0);
        assert_eq!(meas(CodeFamily::Surface17, Objective::Mt).1, 300.0);
        assert_eq!(meas(CodeFamily::BaconShor, Objective::Sa).1, 100.0);
        assert_eq!(meas(CodeFamily::BaconShor, Objective::Ma).1, 400.0);
        assert_eq!(meas(CodeFamily::BaconShor, Objective::Mt).1, 100.0);
        assert_eq!(meas(CodeFamily::Surface17, Objective::Ma).0, 1800.0);
        assert_eq!(meas(CodeFamily::BaconShor, Objective::Ma).0, 1000.0);
        assert_eq!(meas(CodeFamily::BaconShor, Objective::Sa), (200.0, 100.0));
        assert_eq!(meas(CodeFamily::BaconShor, Objective::Mt).0, 400.0);
    }

    #[test]
    fn no_ancillas_cost_nothing() {
        let arr = Arrangement::identity(5, 5);
        assert_eq!(shuttle_meas_cost(&arr, &TimingParams::default()), (0.0, 0.0));
    }

    #[test]
    fn table_round_trip() {
        for f in [CodeFamily::Surface17, CodeFamily::BaconShor] {
            for o in Objective::ALL {
                let a = reference_arrangement(f, o);
                assert_eq!(Arrangement::parse(&a.to_string(), 9).unwrap(), a);
                assert_eq!(a.ancillas_trailing(), o == Objective::Sa);
            }
        }
        assert_eq!(
            reference_arrangement(CodeFamily::BaconShor, Objective::Ma).to_string(),
            "8 2 12 1 5 9 4 10 7 3 11 0 6"
        );
    }

    #[test]
    fn ma_round_time_near_reference() {
        let t = TimingParams::default();
        let code = baconshor(3).unwrap();
        let r = schedule(
            &mut round_circuit(&code),
            &reference_arrangement(CodeFamily::BaconShor, Objective::Ma),
            &t,
            Mode::Serial,
        )
        .unwrap();
        assert!((r.logic - 2910.0).abs() <= 0.5 * 2910.0, "{}", r.logic);
        assert_eq!(r.total, r.logic + 1400.0);
    }

    #[test]
    fn parallel_respects_dependencies_and_capacity() {
        let code = surface17();
        let arr = reference_arrangement(CodeFamily::Surface17, Objective::Mt);
        let mut c = round_circuit(&code);
        let r = schedule(&mut c, &arr, &TimingParams::default(), Mode::Parallel).unwrap();
        let ops = c.ops();
        let mut last_end = vec![0.0f64; 17];
        for (i, op) in ops.iter().enumerate() {
            for &q in op.qubits() {
                assert!(r.starts[i] >= last_end[q] - 1e-9);
                last_end[q] = r.starts[i] + op.duration;
            }
        }
        let xx: Vec<(f64, f64)> = ops
            .iter()
            .enumerate()
            .filter(|(_, o)| o.kind == OpKind::Xx)
            .map(|(i, o)| (r.starts[i], r.starts[i] + o.duration))
            .collect();
        for &(s, _) in &xx {
            let live = xx.iter().filter(|&&(a, b)| a <= s && s < b).count();
            assert!(live <= 2);
        }
    }

    #[test]
    fn avg_time_cases() {
        let t = TimingParams::default();
        let mut c = Circuit::new(4);
        for q in 0..3 {
            c.push(OpKind::Cnot, &[q, q + 1], None).unwrap();
        }
        assert_eq!(avg_2q_time(&c, &Arrangement::identity(4, 4), &t).unwrap(), 40.0);
        let empty = Circuit::new(4);
        assert_eq!(
            avg_2q_time(&empty, &Arrangement::identity(4, 4), &t),
            Err(LayoutError::NoTwoQubitGates)
        );
    }

    #[test]
    fn ma_beats_identity() {
        let t = TimingParams::default();
        for code in [surface17(), baconshor(3).unwrap()] {
            let round = round_circuit(&code);
            let id = Arrangement::identity(code.n_qubits(), 9);
            let r = anneal(&round, 9, Objective::Ma, 3, &t, &AnnealParams::default()).unwrap();
            let (a, v) = (r.arrangement, r.value);
            assert_eq!(v, avg_2q_time(&round, &a, &t).unwrap());
            assert!(r.trace.windows(2).all(|w| w[1].2 <= w[0].2));
            assert!(v < avg_2q_time(&round, &id, &t).unwrap());
        }
    }

    #[test]
    fn sa_keeps_ancillas_trailing() {
        let code = surface17();
        let a = anneal(
            &round_circuit(&code),
            9,
            Objective::Sa,
            1,
            &TimingParams::default(),
            &AnnealParams {
                proposals: 3000,
                ..Default::default()
            },
        )
        .unwrap()
        .arrangement;
        assert!(a.ancillas_trailing());
        assert_eq!(a.ancilla_blocks().len(), 1);
    }

    #[test]
    fn seeds_agree() {
        let code = baconshor(3).unwrap();
        let round = round_circuit(&code);
        let t = TimingParams::default();
        let v: Vec<f64> = (0..2)
            .map(|s| {
                anneal(&round, 9, Objective::Ma, s, &t, &AnnealParams::default())
                    .unwrap()
                    .value
            })
            .collect();
        assert!((v[0] - v[1]).abs() <= 0.05 * v[0].min(v[1]), "{v:?}");
    }

    #[test]
    fn table_one_ordering() {
        let t = TimingParams::default();
        for o in Objective::ALL {
            for mode in [Mode::Serial, Mode::Parallel] {
                let bs = simple_times(
                    &baconshor(3).unwrap(),
                    &reference_arrangement(CodeFamily::BaconShor, o),
                    &t,
                    mode,
                )
                .unwrap();
                let s17 =
                    simple_times(&surface17(), &reference_arrangement(CodeFamily::Surface17, o), &t, mode).unwrap();
                assert!(bs.prep.hi < s17.prep.lo, "{o:?} {mode:?}");
                assert!(
                    bs.total.hi < s17.total.hi && bs.total.lo < s17.total.lo,
                    "{o:?} {mode:?}"
                );
            }
        }
    }

    #[test]
    fn timed_circuit_runs_under_ion_noise() {
        use crate::decoder::{Decoder, Experiment};
        use crate::noise::{enumerate_locations, IonTrapParams, NoiseModel};
        let t = TimingParams::default();
        for (code, fam) in [
            (baconshor(3).unwrap(), CodeFamily::BaconShor),
            (surface17(), CodeFamily::Surface17),
        ] {
            let arr = reference_arrangement(fam, Objective::Ma);
            let c = timed_simple_circuit(&code, 1, CnotOrder::Gauge, LogicalBasis::Z, &arr, &t).unwrap();
            let model = NoiseModel::IonTrap(IonTrapParams::new(1e-3, 30.0, 1.0).unwrap());
            let locs = enumerate_locations(&c, &model).unwrap();
            let exp = Experiment::new(c, Decoder::new(&code, CnotOrder::Gauge).unwrap()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            assert!(exp.run(&[], &mut rng).pass);
            let heating = locs.iter().filter(|l| l.channel == crate::noise::Channel::Heating);
            assert!(heating.clone().all(|l| l.probability >= 30.0 * 40.0 * 1e-6 - 1e-15));
            assert!(heating.count() > 0);
        }
    }

    proptest! {
        #[test]
        fn parallel_never_slower(seed in any::<u64>()) {
            let code = baconshor(3).unwrap();
            let mut order: Vec<usize> = (0..13).collect();
            shuffle(&mut order, &mut ChaCha8Rng::seed_from_u64(seed));
            let arr = Arrangement::new(order, 9).unwrap();
            let t = TimingParams::default();
            let s = schedule(&mut round_circuit(&code), &arr, &t, Mode::Serial).unwrap();
            let p = schedule(&mut round_circuit(&code), &arr, &t, Mode::Parallel).unwrap();
            prop_assert!(p.logic <= s.logic + 1e-9);
            prop_assert_eq!(p.shuttle, s.shuttle);
            prop_assert_eq!(p.meas, s.meas);
        }

        #[test]
        fn mean_reversal_invariant(seed in any::<u64>()) {
            let code = surface17();
            let mut order: Vec<usize> = (0..17).collect();
            shuffle(&mut order, &mut ChaCha8Rng::seed_from_u64(seed));
            let arr = Arrangement::new(order, 9).unwrap();
            let round = round_circuit(&code);
            let t = TimingParams::default();
            prop_assert_eq!(avg_2q_time(&round, &arr, &t).unwrap(), avg_2q_time(&round, &arr.reversed(), &t).unwrap());
        }
    }
}
