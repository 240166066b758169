//! Two-step lookup-table decoding, trial execution with a Pauli frame, and
//! logical adjudication.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;
use thiserror::Error;

use crate::circuit::{simple_circuit_in, syndrome_round, BlockKind, Circuit, CnotOrder, LogicalBasis, OpKind, Record};
use crate::code::{canonical_key, reduce_exhaustive, CheckType, CodeFamily, CodeSpec, Syndrome};
use crate::noise::{enumerate_locations, DepolarizingParams, Fault, FaultLocation, NoiseModel};
use crate::pauli::{Pauli, PauliString};
use crate::tableau::{Basis, Tableau};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecoderError {
    #[error("lookup tables need a distance-3 code, got side {0}")]
    NotDistanceThree(usize),
    #[error("more than 64 data qubits")]
    TooManyQubits,
    #[error("circuit has {found} qubits, code needs {expected}")]
    QubitMismatch { expected: usize, found: usize },
    #[error("circuit lacks a final data measurement block")]
    MissingMeasurement,
    #[error("malformed block structure: {0}")]
    BadBlocks(&'static str),
}

fn mask_of(p: &PauliString, x: bool) -> u64 {
    let w = if x { p.x_words() } else { p.z_words() };
    w.first().copied().unwrap_or(0)
}

fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

/// Corrections for one error type, indexed by the syndrome bits of the
/// checks that detect it: X corrections are keyed by Z-check syndromes and
/// vice versa.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookupTable {
    correction_type: Pauli,
    entries: Vec<PauliString>,
}

impl LookupTable {
    /// `Pauli::X` for the table keyed by Z checks.
    pub fn correction_type(&self) -> Pauli {
        self.correction_type
    }

    pub fn key_bits(&self) -> usize {
        self.entries.len().trailing_zeros() as usize
    }

    pub fn get(&self, key: u64) -> &PauliString {
        &self.entries[key as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &PauliString)> {
        self.entries.iter().enumerate().map(|(k, p)| (k as u64, p))
    }
}

/// Both lookup tables for a distance-3 code plus bit-mask views of the checks
/// used in the inner loop.
#[derive(Clone, Debug)]
pub struct Decoder {
    code: CodeSpec,
    x_table: LookupTable,
    z_table: LookupTable,
    x_corr: Vec<u64>,
    z_corr: Vec<u64>,
    x_checks: Vec<u64>,
    z_checks: Vec<u64>,
    logical_z: u64,
    logical_x: u64,
}

fn harmless_generators(code: &CodeSpec, kind: Pauli) -> Vec<PauliString> {
    match (code.family(), kind) {
        (CodeFamily::BaconShor, Pauli::X) => code.x_gauges().to_vec(),
        (CodeFamily::BaconShor, _) => code.z_gauges().to_vec(),
        (CodeFamily::Surface17, Pauli::X) => code.x_stabilizers().iter().map(|c| c.operator.clone()).collect(),
        (CodeFamily::Surface17, _) => code.z_stabilizers().iter().map(|c| c.operator.clone()).collect(),
    }
}

fn part(p: &PauliString, kind: Pauli) -> PauliString {
    if kind == Pauli::X {
        p.x_part()
    } else {
        p.z_part()
    }
}

fn key_of(code: &CodeSpec, e: &PauliString, kind: Pauli) -> u64 {
    let s = code.syndrome_of(e).expect("data-sized error");
    if kind == Pauli::X {
        s.z
    } else {
        s.x
    }
}

fn build_table(code: &CodeSpec, kind: Pauli, order: CnotOrder) -> LookupTable {
    let n = code.n_data();
    let gens = harmless_generators(code, kind);
    let key_bits = match kind {
        Pauli::X => code.z_stabilizers().len(),
        _ => code.x_stabilizers().len(),
    };
    let mut best: BTreeMap<u64, PauliString> = BTreeMap::new();
    let offer = |e: PauliString, best: &mut BTreeMap<u64, PauliString>| {
        let e = reduce_exhaustive(&part(&e, kind), &gens);
        let key = key_of(code, &e, kind);
        match best.get(&key) {
            Some(cur) if canonical_key(cur) <= canonical_key(&e) => {}
            _ => {
                best.insert(key, e);
            }
        }
    };

    // single circuit-level faults in one round, pushed to the end of it
    let round = syndrome_round(code, order);
    let model = NoiseModel::Depolarizing(DepolarizingParams { p: 0.5 });
    let locations = enumerate_locations(&round, &model).expect("depolarizing model accepts any circuit");
    for loc in &locations {
        for i in 0..loc.n_outcomes() {
            let f = loc.outcome(i);
            let mut e = PauliString::identity(round.n_qubits());
            for (q, p) in f.terms() {
                e.set(q, p);
            }
            let start = if f.before { f.op } else { f.op + 1 };
            let mut flips = Vec::new();
            round.propagate(start..round.len(), &mut e, &mut flips);
            offer(e.truncated(n), &mut best);
        }
    }
    for q in 0..n {
        offer(PauliString::single(n, q, kind), &mut best);
    }

    // any remaining syndrome: the minimum-weight preimage
    let mut fallback: BTreeMap<u64, PauliString> = BTreeMap::new();
    for bits in 0u64..(1 << n) {
        let qs: Vec<usize> = (0..n).filter(|&q| bits >> q & 1 == 1).collect();
        let e = PauliString::uniform(n, &qs, kind);
        let key = key_of(code, &e, kind);
        match fallback.get(&key) {
            Some(cur) if canonical_key(cur) <= canonical_key(&e) => {}
            _ => {
                fallback.insert(key, e);
            }
        }
    }
    let entries = (0..1u64 << key_bits)
        .map(|k| {
            best.get(&k)
                .or_else(|| fallback.get(&k))
                .cloned()
                .expect("every syndrome has a preimage")
        })
        .collect();
    LookupTable {
        correction_type: kind,
        entries,
    }
}

impl Decoder {
    pub fn new(code: &CodeSpec, order: CnotOrder) -> Result<Self, DecoderError> {
        if code.side() != 3 {
            return Err(DecoderError::NotDistanceThree(code.side()));
        }
        let x_table = build_table(code, Pauli::X, order);
        let z_table = build_table(code, Pauli::Z, order);
        Ok(Self::from_tables(code, x_table, z_table))
    }

    fn from_tables(code: &CodeSpec, x_table: LookupTable, z_table: LookupTable) -> Self {
        let x_corr = x_table.entries.iter().map(|p| mask_of(p, true)).collect();
        let z_corr = z_table.entries.iter().map(|p| mask_of(p, false)).collect();
        Self {
            x_checks: code
                .x_stabilizers()
                .iter()
                .map(|c| mask_of(&c.operator, true))
                .collect(),
            z_checks: code
                .z_stabilizers()
                .iter()
                .map(|c| mask_of(&c.operator, false))
                .collect(),
            logical_z: mask_of(code.logical_z(), false),
            logical_x: mask_of(code.logical_x(), true),
            code: code.clone(),
            x_table,
            z_table,
            x_corr,
            z_corr,
        }
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    /// X corrections keyed by Z-check syndromes.
    pub fn x_table(&self) -> &LookupTable {
        &self.x_table
    }

    /// Z corrections keyed by X-check syndromes.
    pub fn z_table(&self) -> &LookupTable {
        &self.z_table
    }

    /// Union of the X correction for `s.z` and the Z correction for `s.x`.
    pub fn correction(&self, s: &Syndrome) -> PauliString {
        let mut c = self.x_table.get(s.z).clone();
        c.xor_assign(self.z_table.get(s.x));
        c
    }

    /// Z-check syndrome of an X pattern on the data.
    fn z_syndrome(&self, x: u64) -> u64 {
        self.z_checks
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &m)| acc | (u64::from(parity(x & m)) << i))
    }

    fn x_syndrome(&self, z: u64) -> u64 {
        self.x_checks
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &m)| acc | (u64::from(parity(z & m)) << i))
    }

    /// Decodes transversal Z outcomes (bit `q` = data qubit `q`): undo the
    /// frame, correct with the X table, and compare the logical-Z parity to
    /// `expected`. Returns `true` on success.
    pub fn adjudicate(&self, data_bits: u64, frame: &PauliString, expected: bool) -> bool {
        self.adjudicate_bits(LogicalBasis::Z, data_bits ^ mask_of(frame, true), expected)
    }

    /// As [`Decoder::adjudicate`] for transversal X outcomes: the frame's Z
    /// part is undone, the Z table corrects, and logical X is read out.
    pub fn adjudicate_x(&self, data_bits: u64, frame: &PauliString, expected: bool) -> bool {
        self.adjudicate_bits(LogicalBasis::X, data_bits ^ mask_of(frame, false), expected)
    }

    fn adjudicate_bits(&self, basis: LogicalBasis, bits: u64, expected: bool) -> bool {
        let (fixed, logical) = match basis {
            LogicalBasis::Z => (bits ^ self.x_corr[self.z_syndrome(bits) as usize], self.logical_z),
            LogicalBasis::X => (bits ^ self.z_corr[self.x_syndrome(bits) as usize], self.logical_x),
        };
        parity(fixed & logical) == expected
    }
}

/// A circuit in simple-circuit shape (prep, optional prep rounds, two-step QEC
/// blocks, final measurement) paired with its decoder. The logical basis is
/// read off the final measurement.
#[derive(Clone, Debug)]
pub struct Experiment {
    circuit: Circuit,
    decoder: Decoder,
    basis: LogicalBasis,
    prep: Vec<Range<usize>>,
    prep_rounds: Vec<Range<usize>>,
    qec: Vec<[Range<usize>; 2]>,
    measure: Range<usize>,
}

impl Experiment {
    pub fn new(circuit: Circuit, decoder: Decoder) -> Result<Self, DecoderError> {
        let code = decoder.code();
        if circuit.n_qubits() != code.n_qubits() {
            return Err(DecoderError::QubitMismatch {
                expected: code.n_qubits(),
                found: circuit.n_qubits(),
            });
        }
        if code.n_data() > 64 {
            return Err(DecoderError::TooManyQubits);
        }
        let mut prep = Vec::new();
        let mut prep_rounds = Vec::new();
        let mut qec: Vec<[Range<usize>; 2]> = Vec::new();
        let mut measure = None;
        let mut pending: Option<Range<usize>> = None;
        for b in circuit.blocks() {
            match b.kind {
                BlockKind::Prep | BlockKind::Round => prep.push(b.ops.clone()),
                BlockKind::PrepRound(_) => prep_rounds.push(b.ops.clone()),
                BlockKind::Qec { step: 0, .. } => pending = Some(b.ops.clone()),
                BlockKind::Qec { .. } => {
                    let first = pending
                        .take()
                        .ok_or(DecoderError::BadBlocks("second QEC step without a first"))?;
                    qec.push([first, b.ops.clone()]);
                }
                BlockKind::Measure => measure = Some(b.ops.clone()),
            }
        }
        if pending.is_some() {
            return Err(DecoderError::BadBlocks("unpaired QEC step"));
        }
        if !(prep_rounds.is_empty() || prep_rounds.len() == 3) {
            return Err(DecoderError::BadBlocks("preparation needs exactly three rounds"));
        }
        let measure = measure.ok_or(DecoderError::MissingMeasurement)?;
        let basis = match circuit.ops().get(measure.start).map(|o| o.kind) {
            Some(OpKind::MeasureZ) => LogicalBasis::Z,
            Some(OpKind::MeasureX) => LogicalBasis::X,
            _ => return Err(DecoderError::MissingMeasurement),
        };
        Ok(Self {
            circuit,
            decoder,
            basis,
            prep,
            prep_rounds,
            qec,
            measure,
        })
    }

    /// `simple_circuit(code, rounds, order)` with tables built for `order`.
    pub fn simple(code: &CodeSpec, rounds: usize, order: CnotOrder) -> Result<Self, DecoderError> {
        Self::simple_in(code, rounds, order, LogicalBasis::Z)
    }

    pub fn simple_in(
        code: &CodeSpec,
        rounds: usize,
        order: CnotOrder,
        basis: LogicalBasis,
    ) -> Result<Self, DecoderError> {
        let decoder = Decoder::new(code, order)?;
        Self::new(simple_circuit_in(code, rounds, order, basis), decoder)
    }

    pub fn basis(&self) -> LogicalBasis {
        self.basis
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn decoder(&self) -> &Decoder {
        &self.decoder
    }

    pub fn code(&self) -> &CodeSpec {
        &self.decoder.code
    }

    pub fn qec_blocks(&self) -> usize {
        self.qec.len()
    }

    pub fn session(&self) -> QecSession<'_> {
        QecSession::new(self)
    }

    /// One full trial with the given faults (sorted by [`Fault::slot`]).
    pub fn run<R: Rng + ?Sized>(&self, faults: &[Fault], rng: &mut R) -> TrialOutcome {
        let mut s = self.session();
        s.prepare(faults, rng);
        let mut qec_rounds = 0;
        for b in 0..self.qec.len() {
            qec_rounds += s.two_step_qec(b, faults, rng);
        }
        let pass = s.measure_and_adjudicate(faults, rng);
        TrialOutcome {
            pass,
            prep_rounds: s.prep_rounds_used,
            qec_rounds,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub pass: bool,
    pub prep_rounds: u8,
    pub qec_rounds: usize,
}

/// Outcomes of one executed op range.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Records {
    pub x: u64,
    pub z: u64,
    pub data: u64,
}

/// State of one trial: the tableau, the classical Pauli frame on the data, and
/// the raw syndrome history.
#[derive(Clone, Debug)]
pub struct QecSession<'a> {
    exp: &'a Experiment,
    tableau: Tableau,
    frame_x: u64,
    frame_z: u64,
    history: Vec<Syndrome>,
    prep_rounds_used: u8,
}

impl<'a> QecSession<'a> {
    fn new(exp: &'a Experiment) -> Self {
        Self {
            exp,
            tableau: Tableau::new(exp.circuit.n_qubits()).expect("code has qubits"),
            frame_x: 0,
            frame_z: 0,
            history: Vec::new(),
            prep_rounds_used: 0,
        }
    }

    pub fn frame(&self) -> PauliString {
        let n = self.exp.code().n_data();
        PauliString::from_words(n, vec![self.frame_x], vec![self.frame_z])
    }

    pub fn history(&self) -> &[Syndrome] {
        &self.history
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }

    /// Applies a physical Pauli to the data qubits, outside any circuit op.
    pub fn inject(&mut self, error: &PauliString) {
        for q in error.support() {
            let (x, z) = error.get(q).bits();
            self.tableau.apply_single_pauli(q, x, z);
        }
    }

    fn syndrome(&self, r: &Records) -> Syndrome {
        let code = self.exp.code();
        Syndrome {
            x: r.x,
            z: r.z,
            x_len: code.x_stabilizers().len() as u8,
            z_len: code.z_stabilizers().len() as u8,
        }
    }

    /// Executes `ops`, inserting the faults whose op lies in the range.
    pub fn run_ops<R: Rng + ?Sized>(&mut self, ops: Range<usize>, faults: &[Fault], rng: &mut R) -> Records {
        let mut rec = Records::default();
        let lo = faults.partition_point(|f| f.op < ops.start);
        let hi = faults.partition_point(|f| f.op < ops.end);
        let mut pending = faults[lo..hi].iter().peekable();
        let circuit_ops = self.exp.circuit.ops();
        for i in ops {
            let op = &circuit_ops[i];
            while let Some(f) = pending.next_if(|f| f.op == i && f.before) {
                self.apply_fault(f);
            }
            let q = op.qubits().first().copied().unwrap_or(0);
            match op.kind {
                OpKind::PrepZ => self.tableau.reset_unchecked(q, Basis::Z, rng),
                OpKind::PrepX => self.tableau.reset_unchecked(q, Basis::X, rng),
                OpKind::MeasureZ | OpKind::MeasureX => {
                    let basis = if op.kind == OpKind::MeasureZ {
                        Basis::Z
                    } else {
                        Basis::X
                    };
                    let bit = u64::from(self.tableau.measure_unchecked(q, basis, rng).outcome);
                    match op.record {
                        Some(Record::XCheck(j)) => rec.x |= bit << j,
                        Some(Record::ZCheck(j)) => rec.z |= bit << j,
                        Some(Record::Data(j)) => rec.data |= bit << j,
                        None => {}
                    }
                }
                OpKind::ShuttleMarker => {}
                _ => self.tableau.apply_unchecked(op.gate().expect("unitary op")),
            }
            while let Some(f) = pending.next_if(|f| f.op == i) {
                self.apply_fault(f);
            }
        }
        rec
    }

    fn apply_fault(&mut self, f: &Fault) {
        for (q, p) in f.terms() {
            let (x, z) = p.bits();
            self.tableau.apply_single_pauli(q, x, z);
        }
    }

    /// Syndrome relative to the frame.
    fn effective(&self, s: &Syndrome) -> Syndrome {
        let d = &self.exp.decoder;
        Syndrome {
            x: s.x ^ d.x_syndrome(self.frame_z),
            z: s.z ^ d.z_syndrome(self.frame_x),
            ..*s
        }
    }

    /// Encodes the logical state. With repeated check rounds, two agreeing
    /// records are accepted, otherwise a third round decides by majority; the
    /// accepted record sets the frame (Z corrections from X checks when
    /// preparing `|0⟩`, X corrections from Z checks for `|+⟩`).
    pub fn prepare<R: Rng + ?Sized>(&mut self, faults: &[Fault], rng: &mut R) {
        let exp = self.exp;
        for r in &exp.prep {
            self.run_ops(r.clone(), faults, rng);
        }
        if exp.prep_rounds.is_empty() {
            return;
        }
        let pick = |r: &Records| match exp.basis {
            LogicalBasis::Z => r.x,
            LogicalBasis::X => r.z,
        };
        let a = self.run_ops(exp.prep_rounds[0].clone(), faults, rng);
        let b = self.run_ops(exp.prep_rounds[1].clone(), faults, rng);
        self.history.push(self.syndrome(&a));
        self.history.push(self.syndrome(&b));
        let (a, b) = (pick(&a), pick(&b));
        let accepted = if a == b {
            self.prep_rounds_used = 2;
            b
        } else {
            let c = self.run_ops(exp.prep_rounds[2].clone(), faults, rng);
            self.history.push(self.syndrome(&c));
            self.prep_rounds_used = 3;
            let c = pick(&c);
            (a & b) | (a & c) | (b & c)
        };
        match exp.basis {
            LogicalBasis::Z => self.frame_z ^= exp.decoder.z_corr[accepted as usize],
            LogicalBasis::X => self.frame_x ^= exp.decoder.x_corr[accepted as usize],
        }
    }

    /// One two-step QEC block: a trivial first syndrome (relative to the
    /// frame) ends the block; otherwise a second round is measured and its
    /// syndrome alone selects the correction. Returns the rounds used.
    pub fn two_step_qec<R: Rng + ?Sized>(&mut self, block: usize, faults: &[Fault], rng: &mut R) -> usize {
        let [first, second] = self.exp.qec[block].clone();
        let r1 = self.run_ops(first, faults, rng);
        let s1 = self.syndrome(&r1);
        self.history.push(s1);
        if self.effective(&s1).is_trivial() {
            return 1;
        }
        let r2 = self.run_ops(second, faults, rng);
        let s2 = self.syndrome(&r2);
        self.history.push(s2);
        let e = self.effective(&s2);
        let d = &self.exp.decoder;
        self.frame_x ^= d.x_corr[e.z as usize];
        self.frame_z ^= d.z_corr[e.x as usize];
        2
    }

    pub fn measure_data<R: Rng + ?Sized>(&mut self, faults: &[Fault], rng: &mut R) -> u64 {
        self.run_ops(self.exp.measure.clone(), faults, rng).data
    }

    pub fn measure_and_adjudicate<R: Rng + ?Sized>(&mut self, faults: &[Fault], rng: &mut R) -> bool {
        let bits = self.measure_data(faults, rng);
        let undo = match self.exp.basis {
            LogicalBasis::Z => self.frame_x,
            LogicalBasis::X => self.frame_z,
        };
        self.exp.decoder.adjudicate_bits(self.exp.basis, bits ^ undo, false)
    }
}

/// A single fault whose trial failed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FtFailure {
    pub location: usize,
    pub outcome: usize,
    pub fault: Fault,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FtReport {
    pub runs: usize,
    pub failures: Vec<FtFailure>,
}

impl FtReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every single fault (every outcome of every depolarizing location of
/// the experiment's circuit) once.
pub fn ft_check<R: Rng>(exp: &Experiment, mut rng_for: impl FnMut(usize, usize) -> R) -> FtReport {
    let model = NoiseModel::Depolarizing(DepolarizingParams { p: 0.5 });
    let locations: Vec<FaultLocation> =
        enumerate_locations(exp.circuit(), &model).expect("depolarizing model accepts any circuit");
    let mut report = FtReport {
        runs: 0,
        failures: Vec::new(),
    };
    for (li, loc) in locations.iter().enumerate() {
        for oi in 0..loc.n_outcomes() {
            let fault = loc.outcome(oi);
            let mut rng = rng_for(li, oi);
            report.runs += 1;
            if !exp.run(&[fault], &mut rng).pass {
                report.failures.push(FtFailure {
                    location: li,
                    outcome: oi,
                    fault,
                });
            }
        }
    }
    report
}

/// Whether `check` is a check type this decoder uses for corrections of `kind`.
pub fn detects(check: CheckType, kind: Pauli) -> bool {
    matches!((check, kind), (CheckType::Z, Pauli::X) | (CheckType::X, Pauli::Z))
}
