//! Noiseless reference circuits: logical preparation, syndrome extraction,
//! the prep / QEC / measure "simple circuit", and compilation to the
//! trapped-ion gate set.

use alloc::vec::Vec;
use core::ops::Range;

use thiserror::Error;

use crate::code::{Check, CheckType, CodeFamily, CodeSpec};
use crate::pauli::PauliString;
use crate::tableau::Gate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("operation {kind:?} on qubits {qubits:?} has no trapped-ion compilation")]
    NotCompilable { kind: OpKind, qubits: [usize; 2] },
    #[error("operation {0:?} is not a native trapped-ion operation")]
    NotNative(OpKind),
    #[error("qubit {qubit} out of range for a {n}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    PrepZ,
    PrepX,
    H,
    X,
    Z,
    Cnot,
    /// Rotation by `+π/2` (`true`) or `-π/2` about X.
    Rx(bool),
    Ry(bool),
    /// Mølmer–Sørensen `exp(-iπ/4 X⊗X)`.
    Xx,
    MeasureZ,
    MeasureX,
    ShuttleMarker,
}

impl OpKind {
    pub fn arity(self) -> usize {
        match self {
            OpKind::Cnot | OpKind::Xx => 2,
            OpKind::ShuttleMarker => 0,
            _ => 1,
        }
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, OpKind::MeasureZ | OpKind::MeasureX)
    }

    pub fn is_prep(self) -> bool {
        matches!(self, OpKind::PrepZ | OpKind::PrepX)
    }

    pub fn is_gate(self) -> bool {
        !self.is_measurement() && !self.is_prep() && self != OpKind::ShuttleMarker
    }

    /// Native to the trapped-ion model: rotations, XX, preparations and
    /// measurements.
    pub fn is_native(self) -> bool {
        matches!(
            self,
            OpKind::Rx(_)
                | OpKind::Ry(_)
                | OpKind::Xx
                | OpKind::PrepZ
                | OpKind::PrepX
                | OpKind::MeasureZ
                | OpKind::MeasureX
                | OpKind::ShuttleMarker
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::PrepZ => "prep_z",
            OpKind::PrepX => "prep_x",
            OpKind::H => "h",
            OpKind::X => "x",
            OpKind::Z => "z",
            OpKind::Cnot => "cnot",
            OpKind::Rx(true) => "rx+",
            OpKind::Rx(false) => "rx-",
            OpKind::Ry(true) => "ry+",
            OpKind::Ry(false) => "ry-",
            OpKind::Xx => "xx",
            OpKind::MeasureZ => "measure_z",
            OpKind::MeasureX => "measure_x",
            OpKind::ShuttleMarker => "shuttle",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "prep_z" => OpKind::PrepZ,
            "prep_x" => OpKind::PrepX,
            "h" => OpKind::H,
            "x" => OpKind::X,
            "z" => OpKind::Z,
            "cnot" => OpKind::Cnot,
            "rx+" => OpKind::Rx(true),
            "rx-" => OpKind::Rx(false),
            "ry+" => OpKind::Ry(true),
            "ry-" => OpKind::Ry(false),
            "xx" => OpKind::Xx,
            "measure_z" => OpKind::MeasureZ,
            "measure_x" => OpKind::MeasureX,
            "shuttle" => OpKind::ShuttleMarker,
            _ => return None,
        })
    }
}

/// Where a measurement outcome goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Record {
    XCheck(usize),
    ZCheck(usize),
    Data(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocatedOp {
    pub id: usize,
    pub kind: OpKind,
    qubits: [usize; 2],
    /// μs; zero until a schedule assigns it.
    pub duration: f64,
    pub record: Option<Record>,
}

impl LocatedOp {
    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    /// The tableau gate for unitary ops, `None` for preps, measurements and
    /// markers.
    pub fn gate(&self) -> Option<Gate> {
        let [a, b] = self.qubits;
        Some(match self.kind {
            OpKind::H => Gate::H(a),
            OpKind::X => Gate::X(a),
            OpKind::Z => Gate::Z(a),
            OpKind::Cnot => Gate::Cnot(a, b),
            OpKind::Rx(s) => Gate::Rx(a, s),
            OpKind::Ry(s) => Gate::Ry(a, s),
            OpKind::Xx => Gate::Xx(a, b),
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// Unconditional logical-state encoding.
    Prep,
    /// X-stabilizer round `i` of a repeated-measurement preparation; round 2
    /// only runs when rounds 0 and 1 disagree.
    PrepRound(u8),
    /// Syndrome round `step` (0 or 1) of two-step QEC block `block`; step 1
    /// only runs when step 0 reports a non-trivial syndrome.
    Qec { block: usize, step: u8 },
    /// A stand-alone syndrome round.
    Round,
    /// Transversal data measurement.
    Measure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub ops: Range<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<LocatedOp>,
    blocks: Vec<Block>,
}

/// How the data qubits of each stabilizer are visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CnotOrder {
    /// X checks row by row, Z checks column by column, so hook errors are
    /// gauge operators (or harmless stabilizer-equivalents) times at most one
    /// data error.
    #[default]
    Gauge,
    /// Increasing qubit index.
    Naive,
}

/// The order in which `check`'s CNOTs touch its data qubits.
pub fn cnot_order(code: &CodeSpec, check: &Check, order: CnotOrder) -> Vec<usize> {
    let mut qs = check.support.clone();
    match order {
        CnotOrder::Naive => qs.sort_unstable(),
        CnotOrder::Gauge => {
            let rc = |q: usize| code.data_coords(q);
            match check.kind {
                CheckType::X => qs.sort_by_key(|&q| rc(q)),
                CheckType::Z => qs.sort_by_key(|&q| {
                    let (r, c) = rc(q);
                    (c, r)
                }),
            }
        }
    }
    qs
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[LocatedOp] {
        &self.ops
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn count(&self, kind: OpKind) -> usize {
        self.ops.iter().filter(|o| o.kind == kind).count()
    }

    pub fn push(&mut self, kind: OpKind, qubits: &[usize], record: Option<Record>) -> Result<usize, CircuitError> {
        assert_eq!(qubits.len(), kind.arity(), "{kind:?} takes {} qubits", kind.arity());
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    n: self.n_qubits,
                });
            }
        }
        let mut qs = [0; 2];
        qs[..qubits.len()].copy_from_slice(qubits);
        Ok(self.push_raw(kind, qs, record))
    }

    fn push_raw(&mut self, kind: OpKind, qubits: [usize; 2], record: Option<Record>) -> usize {
        let id = self.ops.len();
        self.ops.push(LocatedOp {
            id,
            kind,
            qubits,
            duration: 0.0,
            record,
        });
        id
    }

    fn op(&mut self, kind: OpKind, qubits: &[usize]) {
        self.push(kind, qubits, None).expect("builder qubit in range");
    }

    fn measured(&mut self, kind: OpKind, q: usize, record: Record) {
        self.push(kind, &[q], Some(record)).expect("builder qubit in range");
    }

    /// Runs `build` and records everything it appends as one block.
    pub fn block(&mut self, kind: BlockKind, build: impl FnOnce(&mut Self)) {
        let start = self.ops.len();
        build(self);
        self.blocks.push(Block {
            kind,
            ops: start..self.ops.len(),
        });
    }

    /// Appends all ops and blocks of `other`, renumbering location ids.
    pub fn extend(&mut self, other: &Circuit) {
        let offset = self.ops.len();
        for op in &other.ops {
            let id = self.push_raw(op.kind, op.qubits, op.record);
            self.ops[id].duration = op.duration;
        }
        for b in &other.blocks {
            self.blocks.push(Block {
                kind: b.kind,
                ops: b.ops.start + offset..b.ops.end + offset,
            });
        }
    }

    pub fn set_durations(&mut self, durations: &[f64]) {
        assert_eq!(durations.len(), self.ops.len());
        for (op, &d) in self.ops.iter_mut().zip(durations) {
            op.duration = d;
        }
    }

    pub fn has_durations(&self) -> bool {
        self.ops.iter().any(|o| o.duration > 0.0)
    }

    /// Pushes `error` forward through `self.ops[range]`, letters only.
    /// Preparations clear the prepared qubit; measurements whose outcome the
    /// error flips push their record (or `None` for unrecorded ones) onto
    /// `flips`.
    pub fn propagate(&self, range: Range<usize>, error: &mut PauliString, flips: &mut Vec<Option<Record>>) {
        for op in &self.ops[range] {
            let [a, b] = op.qubits;
            match op.kind {
                OpKind::PrepZ | OpKind::PrepX => error.set(a, crate::pauli::Pauli::I),
                OpKind::H => error.propagate_h(a),
                OpKind::X | OpKind::Z | OpKind::ShuttleMarker => {}
                OpKind::Cnot => error.propagate_cnot(a, b),
                OpKind::Rx(_) => error.propagate_rx(a),
                OpKind::Ry(_) => error.propagate_ry(a),
                OpKind::Xx => error.propagate_xx(a, b),
                OpKind::MeasureZ => {
                    if error.x_bit(a) {
                        flips.push(op.record);
                    }
                }
                OpKind::MeasureX => {
                    if error.z_bit(a) {
                        flips.push(op.record);
                    }
                }
            }
        }
    }
}

fn push_check(c: &mut Circuit, code: &CodeSpec, check: &Check, order: CnotOrder) {
    for q in cnot_order(code, check, order) {
        match check.kind {
            CheckType::Z => c.op(OpKind::Cnot, &[q, check.ancilla]),
            CheckType::X => c.op(OpKind::Cnot, &[check.ancilla, q]),
        }
    }
}

/// Ops of one syndrome measurement over the checks of the given types:
/// all ancilla preparations, then each Z check's CNOTs, then each X check's,
/// then one batch of ancilla measurements.
fn push_round(c: &mut Circuit, code: &CodeSpec, kinds: &[CheckType], order: CnotOrder) {
    for &kind in kinds {
        for check in code.checks(kind) {
            let prep = match kind {
                CheckType::Z => OpKind::PrepZ,
                CheckType::X => OpKind::PrepX,
            };
            c.op(prep, &[check.ancilla]);
        }
    }
    for &kind in kinds {
        for check in code.checks(kind) {
            push_check(c, code, check, order);
        }
    }
    for &kind in kinds {
        for (i, check) in code.checks(kind).iter().enumerate() {
            match kind {
                CheckType::Z => c.measured(OpKind::MeasureZ, check.ancilla, Record::ZCheck(i)),
                CheckType::X => c.measured(OpKind::MeasureX, check.ancilla, Record::XCheck(i)),
            }
        }
    }
}

/// One round measuring every stabilizer once, as a single [`BlockKind::Round`].
pub fn syndrome_round(code: &CodeSpec, order: CnotOrder) -> Circuit {
    let mut c = Circuit::new(code.n_qubits());
    c.block(BlockKind::Round, |c| {
        push_round(c, code, &[CheckType::Z, CheckType::X], order)
    });
    c
}

/// Basis of the encoded state and of the final transversal measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum LogicalBasis {
    /// Logical `|0⟩`, data measured in Z.
    #[default]
    Z,
    /// Logical `|+⟩`, data measured in X.
    X,
}

/// Logical `|0⟩` of an L×L Bacon-Shor code: one X-basis GHZ state per row,
/// `(|+…+⟩ + |−…−⟩)/√2`, built as H, a CNOT chain, and transversal H.
pub fn prep_baconshor(code: &CodeSpec) -> Circuit {
    prep_baconshor_in(code, LogicalBasis::Z)
}

/// As [`prep_baconshor`]; for [`LogicalBasis::X`] the GHZ states run down the
/// columns in the Z basis instead (no final H layer).
pub fn prep_baconshor_in(code: &CodeSpec, basis: LogicalBasis) -> Circuit {
    assert_eq!(code.family(), CodeFamily::BaconShor);
    let l = code.side();
    let mut c = Circuit::new(code.n_qubits());
    c.block(BlockKind::Prep, |c| {
        for i in 0..l {
            let line: Vec<usize> = match basis {
                LogicalBasis::Z => (i * l..(i + 1) * l).collect(),
                LogicalBasis::X => (0..l).map(|r| r * l + i).collect(),
            };
            for &q in &line {
                c.op(OpKind::PrepZ, &[q]);
            }
            c.op(OpKind::H, &[line[0]]);
            for w in line.windows(2) {
                c.op(OpKind::Cnot, &[w[0], w[1]]);
            }
            if basis == LogicalBasis::Z {
                for &q in &line {
                    c.op(OpKind::H, &[q]);
                }
            }
        }
    });
    c
}

pub fn prep_bs13() -> Circuit {
    prep_baconshor(&crate::code::baconshor(3).expect("L = 3 is valid"))
}

/// Surface-17 preparation: all data in `|0⟩`, then up to three rounds of
/// X-stabilizer measurement. The third round is conditional, and the
/// resulting Z correction is applied as a frame by the executor.
pub fn prep_surface17(code: &CodeSpec, order: CnotOrder) -> Circuit {
    prep_surface17_in(code, order, LogicalBasis::Z)
}

/// As [`prep_surface17`]; for [`LogicalBasis::X`] the data start in `|+⟩` and
/// the Z stabilizers are the ones measured.
pub fn prep_surface17_in(code: &CodeSpec, order: CnotOrder, basis: LogicalBasis) -> Circuit {
    let (prep, checks) = match basis {
        LogicalBasis::Z => (OpKind::PrepZ, CheckType::X),
        LogicalBasis::X => (OpKind::PrepX, CheckType::Z),
    };
    let mut c = Circuit::new(code.n_qubits());
    c.block(BlockKind::Prep, |c| {
        for q in 0..code.n_data() {
            c.op(prep, &[q]);
        }
    });
    for r in 0..3 {
        c.block(BlockKind::PrepRound(r), |c| push_round(c, code, &[checks], order));
    }
    c
}

pub fn prep_circuit(code: &CodeSpec, order: CnotOrder, basis: LogicalBasis) -> Circuit {
    match code.family() {
        CodeFamily::BaconShor => prep_baconshor_in(code, basis),
        CodeFamily::Surface17 => prep_surface17_in(code, order, basis),
    }
}

/// Transversal measurement of every data qubit.
pub fn measure_data(code: &CodeSpec, basis: LogicalBasis) -> Circuit {
    let kind = match basis {
        LogicalBasis::Z => OpKind::MeasureZ,
        LogicalBasis::X => OpKind::MeasureX,
    };
    let mut c = Circuit::new(code.n_qubits());
    c.block(BlockKind::Measure, |c| {
        for q in 0..code.n_data() {
            c.measured(kind, q, Record::Data(q));
        }
    });
    c
}

/// Preparation of logical `|0⟩`, `rounds` two-step QEC blocks (each holding
/// two syndrome rounds, the second conditional), then transversal Z
/// measurement.
pub fn simple_circuit(code: &CodeSpec, rounds: usize, order: CnotOrder) -> Circuit {
    simple_circuit_in(code, rounds, order, LogicalBasis::Z)
}

pub fn simple_circuit_in(code: &CodeSpec, rounds: usize, order: CnotOrder, basis: LogicalBasis) -> Circuit {
    let mut c = prep_circuit(code, order, basis);
    for block in 0..rounds {
        for step in 0..2 {
            c.block(BlockKind::Qec { block, step }, |c| {
                push_round(c, code, &[CheckType::Z, CheckType::X], order)
            });
        }
    }
    c.extend(&measure_data(code, basis));
    c
}

/// Rewrites `H` and `CNOT` into `RX(±π/2)`, `RY(±π/2)` and `XX`; native ops are
/// copied. Location ids are renumbered and block ranges remapped.
///
/// `CNOT(c, t)` becomes `RY+(c) XX(c,t) RX−(c) RX−(t) RY−(c)` and `H` becomes
/// `RY+ RX+ RX+`, both equal to the originals up to global phase.
pub fn compile_to_ms(circuit: &Circuit) -> Result<Circuit, CircuitError> {
    let mut out = Circuit::new(circuit.n_qubits);
    let mut starts = Vec::with_capacity(circuit.ops.len() + 1);
    for op in &circuit.ops {
        starts.push(out.ops.len());
        let [a, b] = op.qubits;
        match op.kind {
            OpKind::Cnot => {
                out.push_raw(OpKind::Ry(true), [a, 0], None);
                out.push_raw(OpKind::Xx, [a, b], None);
                out.push_raw(OpKind::Rx(false), [a, 0], None);
                out.push_raw(OpKind::Rx(false), [b, 0], None);
                out.push_raw(OpKind::Ry(false), [a, 0], None);
            }
            OpKind::H => {
                out.push_raw(OpKind::Ry(true), [a, 0], None);
                out.push_raw(OpKind::Rx(true), [a, 0], None);
                out.push_raw(OpKind::Rx(true), [a, 0], None);
            }
            OpKind::X | OpKind::Z => {
                return Err(CircuitError::NotCompilable {
                    kind: op.kind,
                    qubits: op.qubits,
                })
            }
            kind => {
                out.push_raw(kind, op.qubits, op.record);
            }
        }
    }
    starts.push(out.ops.len());
    out.blocks = circuit
        .blocks
        .iter()
        .map(|b| Block {
            kind: b.kind,
            ops: starts[b.ops.start]..starts[b.ops.end],
        })
        .collect();
    Ok(out)
}
