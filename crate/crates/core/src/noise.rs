//! Stochastic Pauli channels attached to circuit locations.

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::circuit::{Circuit, OpKind};
use crate::pauli::Pauli;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("rate {0} must be finite and non-negative")]
    BadRate(f64),
    #[error("trapped-ion noise needs a compiled circuit; found {0:?}")]
    NotCompiled(OpKind),
    #[error("trapped-ion noise needs gate durations; operation {0} has none")]
    MissingDuration(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepolarizingParams {
    pub p: f64,
}

impl DepolarizingParams {
    pub fn new(p: f64) -> Result<Self, NoiseError> {
        check_probability(p)?;
        Ok(Self { p })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IonTrapParams {
    /// Mølmer–Sørensen control error per XX gate.
    pub p_xx: f64,
    /// Heating rate in quanta per second.
    pub r_heating: f64,
    /// Dephasing rate in 1/s.
    pub r_dephasing: f64,
    /// XX error events per quantum of heating.
    pub heating_factor: f64,
}

impl IonTrapParams {
    pub fn new(p_xx: f64, r_heating: f64, r_dephasing: f64) -> Result<Self, NoiseError> {
        check_probability(p_xx)?;
        for r in [r_heating, r_dephasing] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(NoiseError::BadRate(r));
            }
        }
        Ok(Self {
            p_xx,
            r_heating,
            r_dephasing,
            heating_factor: 1.0,
        })
    }

    /// Rotation, preparation and measurement error rate.
    pub fn p_1q(&self) -> f64 {
        self.p_xx / 10.0
    }

    /// Heating error of an XX gate lasting `t_us` microseconds.
    pub fn p_heating(&self, t_us: f64) -> f64 {
        (self.r_heating * self.heating_factor * t_us * 1e-6).min(1.0)
    }

    pub fn p_dephasing(&self, t_us: f64) -> f64 {
        (self.r_dephasing * t_us * 1e-6).min(1.0)
    }

    /// Probability that a lone XX gate of duration `t_us` suffers any fault:
    /// control error, heating, or dephasing of either ion.
    pub fn single_gate_error(&self, t_us: f64) -> f64 {
        let pd = self.p_dephasing(t_us);
        1.0 - (1.0 - self.p_xx) * (1.0 - self.p_heating(t_us)) * (1.0 - pd) * (1.0 - pd)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    Depolarizing(DepolarizingParams),
    IonTrap(IonTrapParams),
}

fn check_probability(p: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(NoiseError::BadProbability(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Uniform over X, Y, Z.
    Depol1,
    /// Uniform over the 15 non-identity two-qubit Paulis.
    Depol2,
    /// Flips the following measurement.
    MeasFlip,
    /// XX on the gate's pair.
    MsFlip,
    RxFlip,
    RyFlip,
    /// XX on the gate's pair.
    Heating,
    /// Z on one qubit.
    Dephasing,
}

impl Channel {
    pub fn arity(self) -> usize {
        match self {
            Channel::Depol2 | Channel::MsFlip | Channel::Heating => 2,
            _ => 1,
        }
    }

    pub fn n_outcomes(self) -> usize {
        match self {
            Channel::Depol1 => 3,
            Channel::Depol2 => 15,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Depol1 => "depol1",
            Channel::Depol2 => "depol2",
            Channel::MeasFlip => "meas_flip",
            Channel::MsFlip => "ms_flip",
            Channel::RxFlip => "rx_flip",
            Channel::RyFlip => "ry_flip",
            Channel::Heating => "heating",
            Channel::Dephasing => "dephasing",
        }
    }
}

/// A Pauli inserted next to one circuit operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fault {
    /// Index of the operation in the circuit.
    pub op: usize,
    /// Inserted before the operation (measurement errors) instead of after.
    pub before: bool,
    pub qubits: [usize; 2],
    pub paulis: [Pauli; 2],
}

impl Fault {
    pub fn terms(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.qubits
            .iter()
            .copied()
            .zip(self.paulis.iter().copied())
            .filter(|&(_, p)| p != Pauli::I)
    }

    /// Position key used to interleave faults with operations.
    pub fn slot(&self) -> usize {
        2 * self.op + usize::from(!self.before)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaultLocation {
    pub op: usize,
    pub channel: Channel,
    pub probability: f64,
    qubits: [usize; 2],
    /// For measurement flips: the measured basis is X.
    x_basis: bool,
}

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

impl FaultLocation {
    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.channel.arity()]
    }

    pub fn n_outcomes(&self) -> usize {
        self.channel.n_outcomes()
    }

    /// Outcome `i < n_outcomes()`, given that the location faults.
    pub fn outcome(&self, i: usize) -> Fault {
        let [a, b] = self.qubits;
        let (qubits, paulis) = match self.channel {
            Channel::Depol1 => ([a, a], [PAULIS[i + 1], Pauli::I]),
            Channel::Depol2 => {
                let idx = i + 1;
                ([a, b], [PAULIS[idx >> 2], PAULIS[idx & 3]])
            }
            Channel::MeasFlip => {
                let p = if self.x_basis { Pauli::Z } else { Pauli::X };
                ([a, a], [p, Pauli::I])
            }
            Channel::MsFlip | Channel::Heating => ([a, b], [Pauli::X, Pauli::X]),
            Channel::RxFlip => ([a, a], [Pauli::X, Pauli::I]),
            Channel::RyFlip => ([a, a], [Pauli::Y, Pauli::I]),
            Channel::Dephasing => ([a, a], [Pauli::Z, Pauli::I]),
        };
        Fault {
            op: self.op,
            before: self.channel == Channel::MeasFlip,
            qubits,
            paulis,
        }
    }

    /// A uniformly chosen outcome, given that the location faults.
    pub fn sample_fault<R: Rng + ?Sized>(&self, rng: &mut R) -> Fault {
        let n = self.n_outcomes();
        let i = if n == 1 { 0 } else { rng.random_range(0..n) };
        self.outcome(i)
    }

    /// Whether the location faults in this trial.
    pub fn fires<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        self.probability > 0.0 && rng.random::<f64>() < self.probability
    }
}

fn loc(op: usize, channel: Channel, probability: f64, qubits: &[usize]) -> FaultLocation {
    let mut qs = [qubits[0]; 2];
    qs[..qubits.len()].copy_from_slice(qubits);
    FaultLocation {
        op,
        channel,
        probability,
        qubits: qs,
        x_basis: false,
    }
}

/// Every fault location of `circuit` under `model`, ordered by operation.
/// Conditional blocks contribute their locations too; they simply never fire
/// when the block is skipped.
pub fn enumerate_locations(circuit: &Circuit, model: &NoiseModel) -> Result<Vec<FaultLocation>, NoiseError> {
    let mut out = Vec::new();
    match model {
        NoiseModel::Depolarizing(DepolarizingParams { p }) => {
            let p = *p;
            for (i, op) in circuit.ops().iter().enumerate() {
                let qs = op.qubits();
                match op.kind {
                    OpKind::ShuttleMarker => {}
                    OpKind::MeasureZ | OpKind::MeasureX => {
                        let mut l = loc(i, Channel::MeasFlip, p, qs);
                        l.x_basis = op.kind == OpKind::MeasureX;
                        out.push(l);
                    }
                    OpKind::Cnot | OpKind::Xx => out.push(loc(i, Channel::Depol2, p, qs)),
                    _ => out.push(loc(i, Channel::Depol1, p, qs)),
                }
            }
        }
        NoiseModel::IonTrap(params) => {
            let p1 = params.p_1q();
            for (i, op) in circuit.ops().iter().enumerate() {
                if !op.kind.is_native() {
                    return Err(NoiseError::NotCompiled(op.kind));
                }
                if op.kind.is_gate() && op.duration <= 0.0 {
                    return Err(NoiseError::MissingDuration(i));
                }
                let qs = op.qubits();
                match op.kind {
                    OpKind::ShuttleMarker => {}
                    OpKind::MeasureZ | OpKind::MeasureX => {
                        let mut l = loc(i, Channel::MeasFlip, p1, qs);
                        l.x_basis = op.kind == OpKind::MeasureX;
                        out.push(l);
                    }
                    OpKind::PrepZ | OpKind::PrepX => out.push(loc(i, Channel::Depol1, p1, qs)),
                    OpKind::Xx => {
                        out.push(loc(i, Channel::MsFlip, params.p_xx, qs));
                        out.push(loc(i, Channel::Heating, params.p_heating(op.duration), qs));
                    }
                    OpKind::Rx(_) => out.push(loc(i, Channel::RxFlip, p1, qs)),
                    OpKind::Ry(_) => out.push(loc(i, Channel::RyFlip, p1, qs)),
                    _ => unreachable!("native kinds are covered"),
                }
                if op.kind.is_gate() {
                    let pd = params.p_dephasing(op.duration);
                    for &q in qs {
                        out.push(loc(i, Channel::Dephasing, pd, &[q]));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Samples every location independently; faults come out sorted by slot.
pub fn sample_faults<R: Rng + ?Sized>(locations: &[FaultLocation], rng: &mut R, out: &mut Vec<Fault>) {
    out.clear();
    for l in locations {
        if l.fires(rng) {
            out.push(l.sample_fault(rng));
        }
    }
    out.sort_by_key(Fault::slot);
}
