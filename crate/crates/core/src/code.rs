//! Distance-3 rotated surface code (Surface-17) and L×L Bacon-Shor codes.
//!
//! Data qubits are labelled row-major on the L×L lattice, so column `c` of the
//! 3×3 lattice holds `{c, c+3, c+6}`. Ancillas follow the data qubits; each
//! stabilizer owns exactly one ancilla.
//!
//! Both codes share the compass-model convention: `XX` bonds are horizontal
//! (same row), `ZZ` bonds vertical (same column), logical X is X on a column
//! and logical Z is Z on a row.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("Bacon-Shor lattice side must be at least 2, got {0}")]
    SideTooSmall(usize),
    #[error("lattice side {0} needs more than 64 checks of one type")]
    SideTooLarge(usize),
    #[error("operator acts on {found} qubits, code has {expected} data qubits")]
    SizeMismatch { expected: usize, found: usize },
    #[error("residual has a non-trivial syndrome {0}; correct it first")]
    NonzeroSyndrome(Syndrome),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckType {
    X,
    Z,
}

impl CheckType {
    pub fn pauli(self) -> Pauli {
        match self {
            CheckType::X => Pauli::X,
            CheckType::Z => Pauli::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodeFamily {
    Surface17,
    BaconShor,
}

/// A stabilizer generator together with the ancilla that measures it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub kind: CheckType,
    /// Data qubits in increasing order.
    pub support: Vec<usize>,
    pub operator: PauliString,
    pub ancilla: usize,
}

/// Outcomes of the X-type and Z-type checks; bit `i` of `x` belongs to
/// `x_stabilizers()[i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Syndrome {
    pub x: u64,
    pub z: u64,
    pub x_len: u8,
    pub z_len: u8,
}

impl Syndrome {
    pub fn trivial(x_len: usize, z_len: usize) -> Self {
        Self {
            x: 0,
            z: 0,
            x_len: x_len as u8,
            z_len: z_len as u8,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn xor(&self, other: &Syndrome) -> Syndrome {
        Syndrome {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            ..*self
        }
    }

    pub fn x_bit(&self, i: usize) -> bool {
        self.x >> i & 1 == 1
    }

    pub fn z_bit(&self, i: usize) -> bool {
        self.z >> i & 1 == 1
    }

    /// Bits in check order: X checks first, then Z checks.
    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.x_len as usize)
            .map(|i| self.x_bit(i))
            .chain((0..self.z_len as usize).map(|i| self.z_bit(i)))
            .collect()
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("x=")?;
        for i in 0..self.x_len as usize {
            f.write_str(if self.x_bit(i) { "1" } else { "0" })?;
        }
        f.write_str(" z=")?;
        for i in 0..self.z_len as usize {
            f.write_str(if self.z_bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    name: String,
    family: CodeFamily,
    side: usize,
    x_stabilizers: Vec<Check>,
    z_stabilizers: Vec<Check>,
    x_gauges: Vec<PauliString>,
    z_gauges: Vec<PauliString>,
    logical_x: PauliString,
    logical_z: PauliString,
}

/// The rotated distance-3 surface code with its 8 ancillas (qubits 9–16).
///
/// Ancillas are numbered row by row over their positions on the rotated
/// lattice: 9 on the top boundary, 10/11/12 on the first plaquette row,
/// 13/14/15 on the second, 16 on the bottom boundary.
pub fn surface17() -> CodeSpec {
    let n = 9;
    let check = |kind: CheckType, support: &[usize], ancilla: usize| Check {
        kind,
        support: support.to_vec(),
        operator: PauliString::uniform(n, support, kind.pauli()),
        ancilla,
    };
    let x_stabilizers = alloc::vec![
        check(CheckType::X, &[1, 2], 9),
        check(CheckType::X, &[0, 1, 3, 4], 11),
        check(CheckType::X, &[4, 5, 7, 8], 14),
        check(CheckType::X, &[6, 7], 16),
    ];
    let z_stabilizers = alloc::vec![
        check(CheckType::Z, &[0, 3], 10),
        check(CheckType::Z, &[1, 2, 4, 5], 12),
        check(CheckType::Z, &[3, 4, 6, 7], 13),
        check(CheckType::Z, &[5, 8], 15),
    ];
    CodeSpec {
        name: String::from("surface17"),
        family: CodeFamily::Surface17,
        side: 3,
        x_stabilizers,
        z_stabilizers,
        x_gauges: Vec::new(),
        z_gauges: Vec::new(),
        logical_x: PauliString::x_on(n, &[0, 3, 6]),
        logical_z: PauliString::z_on(n, &[0, 1, 2]),
    }
}

/// The L×L Bacon-Shor code. Z stabilizer `i` acts on rows `i, i+1`, X
/// stabilizer `j` on columns `j, j+1`. Ancillas `L²..` are assigned to the Z
/// stabilizers first, then the X stabilizers (9–10 and 11–12 at L = 3).
pub fn baconshor(side: usize) -> Result<CodeSpec, CodeError> {
    if side < 2 {
        return Err(CodeError::SideTooSmall(side));
    }
    if side - 1 > 64 {
        return Err(CodeError::SideTooLarge(side));
    }
    let l = side;
    let n = l * l;
    let idx = |r: usize, c: usize| r * l + c;

    let z_stabilizers: Vec<Check> = (0..l - 1)
        .map(|i| {
            let support: Vec<usize> = (i * l..(i + 2) * l).collect();
            Check {
                kind: CheckType::Z,
                operator: PauliString::z_on(n, &support),
                support,
                ancilla: n + i,
            }
        })
        .collect();
    let x_stabilizers: Vec<Check> = (0..l - 1)
        .map(|j| {
            let mut support: Vec<usize> = (0..l).flat_map(|r| [idx(r, j), idx(r, j + 1)]).collect();
            support.sort_unstable();
            Check {
                kind: CheckType::X,
                operator: PauliString::x_on(n, &support),
                support,
                ancilla: n + (l - 1) + j,
            }
        })
        .collect();

    let x_gauges = (0..l)
        .flat_map(|r| (0..l - 1).map(move |c| (r, c)))
        .map(|(r, c)| PauliString::x_on(n, &[idx(r, c), idx(r, c + 1)]))
        .collect();
    let z_gauges = (0..l - 1)
        .flat_map(|r| (0..l).map(move |c| (r, c)))
        .map(|(r, c)| PauliString::z_on(n, &[idx(r, c), idx(r + 1, c)]))
        .collect();

    let column0: Vec<usize> = (0..l).map(|r| idx(r, 0)).collect();
    let row0: Vec<usize> = (0..l).collect();
    Ok(CodeSpec {
        name: if side == 3 {
            String::from("baconshor13")
        } else {
            format!("baconshor{side}")
        },
        family: CodeFamily::BaconShor,
        side,
        x_stabilizers,
        z_stabilizers,
        x_gauges,
        z_gauges,
        logical_x: PauliString::x_on(n, &column0),
        logical_z: PauliString::z_on(n, &row0),
    })
}

impl CodeSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> CodeFamily {
        self.family
    }

    /// Lattice side L.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn n_data(&self) -> usize {
        self.side * self.side
    }

    pub fn n_ancilla(&self) -> usize {
        self.x_stabilizers.len() + self.z_stabilizers.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_data() + self.n_ancilla()
    }

    pub fn data_coords(&self, q: usize) -> (usize, usize) {
        (q / self.side, q % self.side)
    }

    pub fn x_stabilizers(&self) -> &[Check] {
        &self.x_stabilizers
    }

    pub fn z_stabilizers(&self) -> &[Check] {
        &self.z_stabilizers
    }

    pub fn checks(&self, kind: CheckType) -> &[Check] {
        match kind {
            CheckType::X => &self.x_stabilizers,
            CheckType::Z => &self.z_stabilizers,
        }
    }

    /// All stabilizer generators, X checks first.
    pub fn stabilizers(&self) -> impl Iterator<Item = &Check> {
        self.x_stabilizers.iter().chain(&self.z_stabilizers)
    }

    pub fn x_gauges(&self) -> &[PauliString] {
        &self.x_gauges
    }

    pub fn z_gauges(&self) -> &[PauliString] {
        &self.z_gauges
    }

    /// Independent generators of the group of harmless errors: the gauge
    /// group for Bacon-Shor, the stabilizer group for the surface code.
    pub fn gauge_group_generators(&self) -> Vec<PauliString> {
        match self.family {
            CodeFamily::BaconShor => self.x_gauges.iter().chain(&self.z_gauges).cloned().collect(),
            CodeFamily::Surface17 => self.stabilizers().map(|c| c.operator.clone()).collect(),
        }
    }

    pub fn logical_x(&self) -> &PauliString {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliString {
        &self.logical_z
    }

    pub fn is_ancilla(&self, q: usize) -> bool {
        q >= self.n_data() && q < self.n_qubits()
    }

    /// The check measured by ancilla `q`, if any.
    pub fn check_for_ancilla(&self, q: usize) -> Option<(CheckType, usize)> {
        self.x_stabilizers
            .iter()
            .position(|c| c.ancilla == q)
            .map(|i| (CheckType::X, i))
            .or_else(|| {
                self.z_stabilizers
                    .iter()
                    .position(|c| c.ancilla == q)
                    .map(|i| (CheckType::Z, i))
            })
    }

    fn check_size(&self, p: &PauliString) -> Result<(), CodeError> {
        if p.num_qubits() != self.n_data() {
            Err(CodeError::SizeMismatch {
                expected: self.n_data(),
                found: p.num_qubits(),
            })
        } else {
            Ok(())
        }
    }

    /// Bit `i` is set iff `error` anticommutes with stabilizer `i`.
    pub fn syndrome_of(&self, error: &PauliString) -> Result<Syndrome, CodeError> {
        self.check_size(error)?;
        Ok(self.syndrome_unchecked(error))
    }

    pub(crate) fn syndrome_unchecked(&self, error: &PauliString) -> Syndrome {
        let bits = |checks: &[Check]| {
            checks
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.operator.commutes_with(error))
                .fold(0u64, |acc, (i, _)| acc | 1 << i)
        };
        Syndrome {
            x: bits(&self.x_stabilizers),
            z: bits(&self.z_stabilizers),
            x_len: self.x_stabilizers.len() as u8,
            z_len: self.z_stabilizers.len() as u8,
        }
    }

    pub fn trivial_syndrome(&self) -> Syndrome {
        Syndrome::trivial(self.x_stabilizers.len(), self.z_stabilizers.len())
    }

    /// A minimum-weight representative of `error` times the group of harmless
    /// operators (gauge group for Bacon-Shor, stabilizer group otherwise).
    ///
    /// Bacon-Shor uses the row/column parity shortcut: the X part collapses to
    /// one X per row with odd X parity, the Z part to one Z per column with
    /// odd Z parity, paired into Ys where possible.
    pub fn reduce_mod_gauge(&self, error: &PauliString) -> Result<PauliString, CodeError> {
        self.check_size(error)?;
        Ok(match self.family {
            CodeFamily::BaconShor => self.reduce_baconshor(error),
            CodeFamily::Surface17 => reduce_exhaustive(error, &self.gauge_group_generators()),
        })
    }

    fn reduce_baconshor(&self, error: &PauliString) -> PauliString {
        let l = self.side;
        let n = self.n_data();
        let mut odd_rows = Vec::new();
        let mut odd_cols = Vec::new();
        for r in 0..l {
            if (0..l).filter(|&c| error.x_bit(r * l + c)).count() % 2 == 1 {
                odd_rows.push(r);
            }
        }
        for c in 0..l {
            if (0..l).filter(|&r| error.z_bit(r * l + c)).count() % 2 == 1 {
                odd_cols.push(c);
            }
        }
        let mut out = PauliString::identity(n);
        let paired = odd_rows.len().min(odd_cols.len());
        for i in 0..paired {
            out.set(odd_rows[i] * l + odd_cols[i], Pauli::Y);
        }
        for &r in &odd_rows[paired..] {
            out.set(r * l, Pauli::X);
        }
        for &c in &odd_cols[paired..] {
            out.set(c, Pauli::Z);
        }
        out
    }

    /// Whether a syndrome-free residual acts non-trivially on the logical qubit.
    pub fn is_logical(&self, residual: &PauliString) -> Result<bool, CodeError> {
        let s = self.syndrome_of(residual)?;
        if !s.is_trivial() {
            return Err(CodeError::NonzeroSyndrome(s));
        }
        let reduced = self.reduce_mod_gauge(residual)?;
        Ok(!reduced.commutes_with(&self.logical_z) || !reduced.commutes_with(&self.logical_x))
    }
}

/// Ordering used to pick canonical representatives: weight, then support,
/// then letters with X before Y before Z.
pub fn canonical_key(p: &PauliString) -> (usize, Vec<usize>, Vec<Pauli>) {
    let support: Vec<usize> = p.support().collect();
    let letters = support.iter().map(|&q| p.get(q)).collect();
    (support.len(), support, letters)
}

/// Minimum-weight element of `error · ⟨generators⟩` by enumerating the whole
/// group (Gray-code order). Intended for groups of at most ~2^20 elements.
pub fn reduce_exhaustive(error: &PauliString, generators: &[PauliString]) -> PauliString {
    assert!(generators.len() < 32, "group too large to enumerate");
    let mut current = error.unsigned();
    let mut best = current.clone();
    let mut best_key = canonical_key(&best);
    for i in 1u64..(1u64 << generators.len()) {
        let flip = i.trailing_zeros() as usize;
        current.xor_assign(&generators[flip]);
        let w = current.weight();
        if w <= best_key.0 {
            let key = canonical_key(&current);
            if key < best_key {
                best_key = key;
                best = current.clone();
            }
        }
    }
    best
}
