//! Stabilizer states in the Aaronson–Gottesman destabilizer/stabilizer
//! tableau representation.
//!
//! Rows `0..n` are destabilizers, rows `n..2n` stabilizers and row `2n` is
//! scratch space. Each row is bit-packed into 64-bit words so that Clifford
//! updates and row products are word-wise XORs.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::pauli::{bit, product_phase, words_for, PauliString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("a state needs at least one qubit")]
    ZeroQubits,
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate acts twice on qubit {0}")]
    RepeatedQubit(usize),
    #[error("size mismatch: state has {expected} qubits, operator has {found}")]
    SizeMismatch { expected: usize, found: usize },
}

/// Clifford gates understood by the simulator.
///
/// `Rx`/`Ry` are rotations by `+π/2` (`positive == true`) or `-π/2`; `Xx` is
/// the Mølmer–Sørensen gate `exp(-iπ/4 X⊗X)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Rx(usize, bool),
    Ry(usize, bool),
    Xx(usize, usize),
}

impl Gate {
    fn check(&self, n: usize) -> Result<(), SimError> {
        let in_range = |q: usize| {
            if q < n {
                Ok(())
            } else {
                Err(SimError::QubitOutOfRange { qubit: q, n })
            }
        };
        match *self {
            Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _) => in_range(q),
            Gate::Cnot(a, b) | Gate::Xx(a, b) => {
                in_range(a)?;
                in_range(b)?;
                if a == b {
                    Err(SimError::RepeatedQubit(a))
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

/// Result of a single-qubit measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    /// `false` for the +1 eigenvalue, `true` for -1.
    pub outcome: bool,
    pub deterministic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
}

impl Tableau {
    /// The all-zero state `|0…0⟩`.
    pub fn new(n: usize) -> Result<Self, SimError> {
        if n == 0 {
            return Err(SimError::ZeroQubits);
        }
        let words = words_for(n);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            words,
            xs: vec![0; rows * words],
            zs: vec![0; rows * words],
            signs: vec![false; rows],
        };
        for q in 0..n {
            let (w, m) = bit(q);
            t.xs[q * words + w] |= m;
            t.zs[(n + q) * words + w] |= m;
        }
        Ok(t)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    fn row(&self, r: usize) -> PauliString {
        let x = self.xs[r * self.words..(r + 1) * self.words].to_vec();
        let z = self.zs[r * self.words..(r + 1) * self.words].to_vec();
        let p = PauliString::from_words(self.n, x, z);
        if self.signs[r] {
            p.with_phase(2)
        } else {
            p
        }
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (self.n..2 * self.n).map(|r| self.row(r)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliString> {
        (0..self.n).map(|r| self.row(r)).collect()
    }

    pub fn apply(&mut self, gate: Gate) -> Result<(), SimError> {
        gate.check(self.n)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: Gate) {
        match gate {
            Gate::H(q) => self.h(q),
            Gate::S(q) => self.s(q),
            Gate::Sdg(q) => self.sdg(q),
            Gate::X(q) => self.pauli_x(q),
            Gate::Y(q) => self.pauli_y(q),
            Gate::Z(q) => self.pauli_z(q),
            Gate::Cnot(c, t) => self.cnot(c, t),
            Gate::Rx(q, positive) => {
                self.h(q);
                if positive {
                    self.s(q);
                } else {
                    self.sdg(q);
                }
                self.h(q);
            }
            Gate::Ry(q, positive) => {
                if positive {
                    self.h(q);
                    self.pauli_x(q);
                } else {
                    self.pauli_x(q);
                    self.h(q);
                }
            }
            Gate::Xx(a, b) => {
                self.h(a);
                self.h(b);
                self.cnot(a, b);
                self.s(b);
                self.cnot(a, b);
                self.h(a);
                self.h(b);
            }
        }
    }

    #[inline]
    fn rows(&self) -> usize {
        2 * self.n
    }

    fn h(&mut self, q: usize) {
        let (w, m) = bit(q);
        for r in 0..self.rows() {
            let i = r * self.words + w;
            let x = self.xs[i] & m;
            let z = self.zs[i] & m;
            if x != 0 && z != 0 {
                self.signs[r] ^= true;
            }
            self.xs[i] = (self.xs[i] & !m) | z;
            self.zs[i] = (self.zs[i] & !m) | x;
        }
    }

    fn s(&mut self, q: usize) {
        let (w, m) = bit(q);
        for r in 0..self.rows() {
            let i = r * self.words + w;
            let x = self.xs[i] & m;
            if x != 0 {
                if self.zs[i] & m != 0 {
                    self.signs[r] ^= true;
                }
                self.zs[i] ^= m;
            }
        }
    }

    fn sdg(&mut self, q: usize) {
        let (w, m) = bit(q);
        for r in 0..self.rows() {
            let i = r * self.words + w;
            if self.xs[i] & m != 0 {
                if self.zs[i] & m == 0 {
                    self.signs[r] ^= true;
                }
                self.zs[i] ^= m;
            }
        }
    }

    fn pauli_x(&mut self, q: usize) {
        let (w, m) = bit(q);
        for r in 0..self.rows() {
            if self.zs[r * self.words + w] & m != 0 {
                self.signs[r] ^= true;
            }
        }
    }

    fn pauli_z(&mut self, q: usize) {
        let (w, m) = bit(q);
        for r in 0..self.rows() {
            if self.xs[r * self.words + w] & m != 0 {
                self.signs[r] ^= true;
            }
        }
    }

    fn pauli_y(&mut self, q: usize) {
        let (w, m) = bit(q);
        for r in 0..self.rows() {
            let i = r * self.words + w;
            if ((self.xs[i] ^ self.zs[i]) & m) != 0 {
                self.signs[r] ^= true;
            }
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (wc, mc) = bit(c);
        let (wt, mt) = bit(t);
        for r in 0..self.rows() {
            let base = r * self.words;
            let xc = self.xs[base + wc] & mc != 0;
            let zc = self.zs[base + wc] & mc != 0;
            let xt = self.xs[base + wt] & mt != 0;
            let zt = self.zs[base + wt] & mt != 0;
            if xc && zt && (xt == zc) {
                self.signs[r] ^= true;
            }
            if xc {
                self.xs[base + wt] ^= mt;
            }
            if zt {
                self.zs[base + wc] ^= mc;
            }
        }
    }

    /// Row `h ← row h · row i`, tracking the sign.
    fn rowsum(&mut self, h: usize, i: usize) {
        let (bh, bi) = (h * self.words, i * self.words);
        let mut g = 0i32;
        for k in 0..self.words {
            let (xh, zh) = (self.xs[bh + k], self.zs[bh + k]);
            let (xi, zi) = (self.xs[bi + k], self.zs[bi + k]);
            // row i is the left factor in the Aaronson-Gottesman convention
            g += product_phase(xi, zi, xh, zh);
            self.xs[bh + k] = xh ^ xi;
            self.zs[bh + k] = zh ^ zi;
        }
        let total = 2 * self.signs[h] as i32 + 2 * self.signs[i] as i32 + g;
        self.signs[h] = total.rem_euclid(4) == 2;
    }

    fn clear_row(&mut self, r: usize) {
        let b = r * self.words;
        self.xs[b..b + self.words].fill(0);
        self.zs[b..b + self.words].fill(0);
        self.signs[r] = false;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let (bd, bs) = (dst * self.words, src * self.words);
        for k in 0..self.words {
            self.xs[bd + k] = self.xs[bs + k];
            self.zs[bd + k] = self.zs[bs + k];
        }
        self.signs[dst] = self.signs[src];
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, basis: Basis, rng: &mut R) -> Result<Measurement, SimError> {
        if q >= self.n {
            return Err(SimError::QubitOutOfRange { qubit: q, n: self.n });
        }
        Ok(self.measure_unchecked(q, basis, rng))
    }

    pub(crate) fn measure_unchecked<R: Rng + ?Sized>(&mut self, q: usize, basis: Basis, rng: &mut R) -> Measurement {
        match basis {
            Basis::Z => self.measure_z(q, rng),
            Basis::X => {
                self.h(q);
                let m = self.measure_z(q, rng);
                self.h(q);
                m
            }
        }
    }

    fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Measurement {
        let n = self.n;
        let (w, m) = bit(q);
        let pivot = (n..2 * n).find(|&r| self.xs[r * self.words + w] & m != 0);
        match pivot {
            Some(p) => {
                for r in 0..2 * n {
                    if r != p && self.xs[r * self.words + w] & m != 0 {
                        self.rowsum(r, p);
                    }
                }
                self.copy_row(p - n, p);
                self.clear_row(p);
                self.zs[p * self.words + w] |= m;
                let outcome = rng.random::<bool>();
                self.signs[p] = outcome;
                Measurement {
                    outcome,
                    deterministic: false,
                }
            }
            None => {
                let scratch = 2 * n;
                self.clear_row(scratch);
                for r in 0..n {
                    if self.xs[r * self.words + w] & m != 0 {
                        self.rowsum(scratch, r + n);
                    }
                }
                Measurement {
                    outcome: self.signs[scratch],
                    deterministic: true,
                }
            }
        }
    }

    /// Measures and flips so the qubit ends in `|0⟩` (Z) or `|+⟩` (X).
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, basis: Basis, rng: &mut R) -> Result<(), SimError> {
        if q >= self.n {
            return Err(SimError::QubitOutOfRange { qubit: q, n: self.n });
        }
        self.reset_unchecked(q, basis, rng);
        Ok(())
    }

    pub(crate) fn reset_unchecked<R: Rng + ?Sized>(&mut self, q: usize, basis: Basis, rng: &mut R) {
        let m = self.measure_z(q, rng);
        if m.outcome {
            self.pauli_x(q);
        }
        if basis == Basis::X {
            self.h(q);
        }
    }

    /// Conjugates the state by a Pauli: stabilizer signs flip where they
    /// anticommute with `p`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<(), SimError> {
        if p.num_qubits() != self.n {
            return Err(SimError::SizeMismatch {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        let (px, pz) = (p.x_words(), p.z_words());
        for r in 0..self.rows() {
            let b = r * self.words;
            let mut parity = 0u32;
            for k in 0..self.words {
                parity ^= ((self.xs[b + k] & pz[k]) ^ (self.zs[b + k] & px[k])).count_ones();
            }
            if parity & 1 == 1 {
                self.signs[r] ^= true;
            }
        }
        Ok(())
    }

    /// Applies a single-qubit Pauli without building a full string.
    pub(crate) fn apply_single_pauli(&mut self, q: usize, x: bool, z: bool) {
        match (x, z) {
            (false, false) => {}
            (true, false) => self.pauli_x(q),
            (false, true) => self.pauli_z(q),
            (true, true) => self.pauli_y(q),
        }
    }

    /// `Some(+1)` or `Some(-1)` if the state is an eigenstate of `p`
    /// (respecting the sign of `p`), `None` if a measurement would be random.
    pub fn expectation(&self, p: &PauliString) -> Result<Option<i8>, SimError> {
        if p.num_qubits() != self.n {
            return Err(SimError::SizeMismatch {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        let anticommutes = |t: &Self, r: usize| {
            let b = r * t.words;
            let mut parity = 0u32;
            for k in 0..t.words {
                parity ^= ((t.xs[b + k] & p.z_words()[k]) ^ (t.zs[b + k] & p.x_words()[k])).count_ones();
            }
            parity & 1 == 1
        };
        if (self.n..2 * self.n).any(|r| anticommutes(self, r)) {
            return Ok(None);
        }
        let mut scratch = self.clone();
        let s = 2 * self.n;
        scratch.clear_row(s);
        for r in 0..self.n {
            if anticommutes(self, r) {
                scratch.rowsum(s, r + self.n);
            }
        }
        let found = scratch.row(s);
        debug_assert_eq!(found.unsigned(), p.unsigned());
        let p_sign = p.sign().expect("expectation of a non-Hermitian operator");
        let row_sign: i8 = if scratch.signs[s] { -1 } else { 1 };
        Ok(Some(row_sign * p_sign))
    }

    /// Checks the commutation structure and full GF(2) rank of the rows.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        let rows: Vec<PauliString> = (0..2 * n).map(|r| self.row(r)).collect();
        for i in 0..2 * n {
            for j in (i + 1)..2 * n {
                let should_anticommute = j == i + n;
                if rows[i].commutes_with(&rows[j]) == should_anticommute {
                    return false;
                }
            }
        }
        gf2_rank(&rows) == 2 * n
    }
}

/// Rank over GF(2) of the symplectic vectors of `rows`.
pub fn gf2_rank(rows: &[PauliString]) -> usize {
    let mut vecs: Vec<Vec<u64>> = rows
        .iter()
        .map(|p| p.x_words().iter().chain(p.z_words()).copied().collect())
        .collect();
    let mut rank = 0;
    let width = vecs.first().map_or(0, |v| v.len() * 64);
    for col in 0..width {
        let (w, m) = (col / 64, 1u64 << (col % 64));
        if let Some(p) = (rank..vecs.len()).find(|&r| vecs[r][w] & m != 0) {
            vecs.swap(rank, p);
            for r in 0..vecs.len() {
                if r != rank && vecs[r][w] & m != 0 {
                    let pivot = vecs[rank].clone();
                    for (a, b) in vecs[r].iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn new_state_is_all_zero() {
        let t = Tableau::new(2).unwrap();
        assert_eq!(t.stabilizers(), vec![ps("ZI"), ps("IZ")]);
        assert_eq!(t.destabilizers(), vec![ps("XI"), ps("IX")]);
        let t3 = Tableau::new(3).unwrap();
        assert_eq!(t3.expectation(&ps("ZZZ")).unwrap(), Some(1));
        assert!(t3.is_valid());
    }

    #[test]
    fn zero_qubits_rejected() {
        assert_eq!(Tableau::new(0), Err(SimError::ZeroQubits));
    }

    #[test]
    fn bad_indices_rejected() {
        let mut t = Tableau::new(2).unwrap();
        assert_eq!(t.apply(Gate::H(2)), Err(SimError::QubitOutOfRange { qubit: 2, n: 2 }));
        assert_eq!(t.apply(Gate::Cnot(1, 1)), Err(SimError::RepeatedQubit(1)));
        assert!(t.apply_pauli(&ps("XXX")).is_err());
    }

    #[test]
    fn deterministic_zero_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = Tableau::new(1).unwrap();
        let m = t.measure(0, Basis::Z, &mut rng).unwrap();
        assert_eq!(
            m,
            Measurement {
                outcome: false,
                deterministic: true
            }
        );
    }

    #[test]
    fn cnot_truth_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = Tableau::new(2).unwrap();
        t.apply(Gate::X(0)).unwrap();
        t.apply(Gate::Cnot(0, 1)).unwrap();
        for q in 0..2 {
            let m = t.measure(q, Basis::Z, &mut rng).unwrap();
            assert!(m.outcome && m.deterministic);
        }
    }

    #[test]
    fn bell_state_correlations() {
        let mut t = Tableau::new(2).unwrap();
        t.apply(Gate::H(0)).unwrap();
        t.apply(Gate::Cnot(0, 1)).unwrap();
        assert_eq!(t.expectation(&ps("ZZ")).unwrap(), Some(1));
        assert_eq!(t.expectation(&ps("XX")).unwrap(), Some(1));
        assert_eq!(t.expectation(&ps("YY")).unwrap(), Some(-1));
        assert_eq!(t.expectation(&ps("ZI")).unwrap(), None);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..20 {
            let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
            let mut u = t.clone();
            let a = u.measure(0, Basis::Z, &mut rng2).unwrap();
            assert!(!a.deterministic);
            let b = u.measure(1, Basis::Z, &mut rng).unwrap();
            assert!(b.deterministic);
            assert_eq!(a.outcome, b.outcome);
        }
    }

    #[test]
    fn plus_state_x_measurement_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut t = Tableau::new(1).unwrap();
        t.apply(Gate::H(0)).unwrap();
        let m = t.measure(0, Basis::X, &mut rng).unwrap();
        assert_eq!(
            m,
            Measurement {
                outcome: false,
                deterministic: true
            }
        );
    }

    #[test]
    fn hadamard_measurement_is_random() {
        let mut ones = 0;
        for seed in 0..2000 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = Tableau::new(1).unwrap();
            t.apply(Gate::H(0)).unwrap();
            let m = t.measure(0, Basis::Z, &mut rng).unwrap();
            assert!(!m.deterministic);
            ones += m.outcome as u32;
        }
        // 4 sigma for Binomial(2000, 1/2)
        assert!((ones as f64 - 1000.0).abs() < 4.0 * 22.37, "{ones}");
    }

    #[test]
    fn pauli_injection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut t = Tableau::new(1).unwrap();
        t.apply_pauli(&ps("I")).unwrap();
        assert_eq!(t, Tableau::new(1).unwrap());
        t.apply_pauli(&ps("X")).unwrap();
        assert!(t.measure(0, Basis::Z, &mut rng).unwrap().outcome);

        let mut bell = Tableau::new(2).unwrap();
        bell.apply(Gate::H(0)).unwrap();
        bell.apply(Gate::Cnot(0, 1)).unwrap();
        bell.apply_pauli(&ps("ZI")).unwrap();
        assert_eq!(bell.expectation(&ps("XX")).unwrap(), Some(-1));
        assert_eq!(bell.expectation(&ps("ZZ")).unwrap(), Some(1));
    }

    #[test]
    fn ghz_x_parity_even() {
        // (|+++> + |--->)/sqrt(2)
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let mut t = Tableau::new(3).unwrap();
            t.apply(Gate::H(0)).unwrap();
            t.apply(Gate::Cnot(0, 1)).unwrap();
            t.apply(Gate::Cnot(1, 2)).unwrap();
            for q in 0..3 {
                t.apply(Gate::H(q)).unwrap();
            }
            let a = t.measure(0, Basis::X, &mut rng).unwrap();
            let b = t.measure(1, Basis::X, &mut rng).unwrap();
            let c = t.measure(2, Basis::X, &mut rng).unwrap();
            assert!(!a.deterministic && b.deterministic && c.deterministic);
            // X_aX_b stabilizes the state: every pair of outcomes agrees
            assert!(a.outcome == b.outcome && b.outcome == c.outcome);
        }
    }

    #[test]
    fn reset_returns_to_basis_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut t = Tableau::new(2).unwrap();
        t.apply(Gate::H(0)).unwrap();
        t.apply(Gate::Cnot(0, 1)).unwrap();
        t.reset(1, Basis::X, &mut rng).unwrap();
        assert_eq!(t.expectation(&ps("IX")).unwrap(), Some(1));
        t.reset(1, Basis::Z, &mut rng).unwrap();
        assert_eq!(t.expectation(&ps("IZ")).unwrap(), Some(1));
        assert!(t.is_valid());
    }

    #[test]
    fn multiword_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 70;
        let mut t = Tableau::new(n).unwrap();
        t.apply(Gate::H(0)).unwrap();
        for q in 0..n - 1 {
            t.apply(Gate::Cnot(q, q + 1)).unwrap();
        }
        let a = t.measure(0, Basis::Z, &mut rng).unwrap();
        let b = t.measure(69, Basis::Z, &mut rng).unwrap();
        assert!(b.deterministic);
        assert_eq!(a.outcome, b.outcome);
        assert!(t.is_valid());
    }
}
