//! Signed n-qubit Pauli operators in the X/Z bit representation.
//!
//! A [`PauliString`] stores one X bit and one Z bit per qubit, packed into
//! 64-bit words, together with an overall phase `i^k`. The single-qubit
//! operator on a qubit is `X` for `(1, 0)`, `Z` for `(0, 1)` and the Hermitian
//! `Y` for `(1, 1)`, so a string with an even phase exponent is Hermitian with
//! sign `(-1)^(k/2)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

#[inline]
pub(crate) fn bit(q: usize) -> (usize, u64) {
    (q / WORD_BITS, 1u64 << (q % WORD_BITS))
}

/// Phase exponent contributed by multiplying the Paulis encoded in one word
/// of each operand, as `(#(+i) - #(-i))`.
#[inline]
pub(crate) fn product_phase(x1: u64, z1: u64, x2: u64, z2: u64) -> i32 {
    let y1 = x1 & z1;
    let only_x1 = x1 & !z1;
    let only_z1 = z1 & !x1;
    let y2 = x2 & z2;
    let only_x2 = x2 & !z2;
    let only_z2 = z2 & !x2;
    let plus = (y1 & only_z2) | (only_x1 & y2) | (only_z1 & only_x2);
    let minus = (y1 & only_x2) | (only_x1 & only_z2) | (only_z1 & y2);
    plus.count_ones() as i32 - minus.count_ones() as i32
}

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("size mismatch: expected {expected} qubits, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid Pauli character {0:?}")]
    InvalidChar(char),
}

/// An n-qubit Pauli operator `i^phase · P_0 ⊗ … ⊗ P_{n-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(qubit, p);
        s
    }

    /// `p` on every listed qubit, identity elsewhere.
    pub fn uniform(n: usize, qubits: &[usize], p: Pauli) -> Self {
        let mut s = Self::identity(n);
        for &q in qubits {
            s.set(q, p);
        }
        s
    }

    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        Self::uniform(n, qubits, Pauli::X)
    }

    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        Self::uniform(n, qubits, Pauli::Z)
    }

    pub fn from_sparse(n: usize, terms: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(n);
        for &(q, p) in terms {
            s.set(q, p);
        }
        s
    }

    /// Builds an operator directly from packed bit words (phase zero).
    pub fn from_words(n: usize, x: Vec<u64>, z: Vec<u64>) -> Self {
        assert_eq!(x.len(), words_for(n));
        assert_eq!(z.len(), words_for(n));
        Self { n, x, z, phase: 0 }
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    #[inline]
    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Phase exponent `k` of the overall factor `i^k`.
    #[inline]
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// `+1` or `-1` for Hermitian operators, `None` when the phase is `±i`.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    #[inline]
    pub fn get(&self, q: usize) -> Pauli {
        let (w, m) = bit(q);
        Pauli::from_bits(self.x[w] & m != 0, self.z[w] & m != 0)
    }

    #[inline]
    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, m) = bit(q);
        let (xb, zb) = p.bits();
        if xb {
            self.x[w] |= m;
        } else {
            self.x[w] &= !m;
        }
        if zb {
            self.z[w] |= m;
        } else {
            self.z[w] &= !m;
        }
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        let (w, m) = bit(q);
        self.x[w] & m != 0
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        let (w, m) = bit(q);
        self.z[w] & m != 0
    }

    #[inline]
    pub(crate) fn flip_x(&mut self, q: usize) {
        let (w, m) = bit(q);
        self.x[w] ^= m;
    }

    #[inline]
    pub(crate) fn flip_z(&mut self, q: usize) {
        let (w, m) = bit(q);
        self.z[w] ^= m;
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Qubits on which the operator acts non-trivially, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.x
            .iter()
            .zip(&self.z)
            .enumerate()
            .flat_map(|(wi, (x, z))| BitIter(x | z).map(move |b| wi * WORD_BITS + b))
    }

    /// The X component (X on every qubit with an X bit), phase dropped.
    pub fn x_part(&self) -> Self {
        Self {
            n: self.n,
            x: self.x.clone(),
            z: vec![0; self.z.len()],
            phase: 0,
        }
    }

    /// The Z component, phase dropped.
    pub fn z_part(&self) -> Self {
        Self {
            n: self.n,
            x: vec![0; self.x.len()],
            z: self.z.clone(),
            phase: 0,
        }
    }

    /// Same Pauli letters with the phase reset to `+1`.
    pub fn unsigned(&self) -> Self {
        Self {
            phase: 0,
            ..self.clone()
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        acc % 2 == 0
    }

    /// `self ← self · rhs` with exact phase tracking.
    pub fn mul_assign_checked(&mut self, rhs: &PauliString) -> Result<(), PauliError> {
        if self.n != rhs.n {
            return Err(PauliError::SizeMismatch {
                expected: self.n,
                found: rhs.n,
            });
        }
        let mut g = 0i32;
        for i in 0..self.x.len() {
            g += product_phase(self.x[i], self.z[i], rhs.x[i], rhs.z[i]);
            self.x[i] ^= rhs.x[i];
            self.z[i] ^= rhs.z[i];
        }
        self.phase = ((self.phase as i32 + rhs.phase as i32 + g).rem_euclid(4)) as u8;
        Ok(())
    }

    /// Multiplies the letters only, ignoring phase. This is the group
    /// operation used for error propagation where overall signs are irrelevant.
    pub fn xor_assign(&mut self, rhs: &PauliString) {
        debug_assert_eq!(self.n, rhs.n);
        for i in 0..self.x.len() {
            self.x[i] ^= rhs.x[i];
            self.z[i] ^= rhs.z[i];
        }
    }

    /// Restricts to the first `m` qubits.
    pub fn truncated(&self, m: usize) -> Self {
        let mut out = Self::identity(m);
        for q in self.support().take_while(|&q| q < m) {
            out.set(q, self.get(q));
        }
        out.phase = self.phase;
        out
    }

    /// Letters-only conjugation rules used to push errors through Clifford gates.
    pub fn propagate_h(&mut self, q: usize) {
        let (w, m) = bit(q);
        let xb = self.x[w] & m;
        let zb = self.z[w] & m;
        self.x[w] = (self.x[w] & !m) | zb;
        self.z[w] = (self.z[w] & !m) | xb;
    }

    pub fn propagate_s(&mut self, q: usize) {
        if self.x_bit(q) {
            self.flip_z(q);
        }
    }

    pub fn propagate_cnot(&mut self, control: usize, target: usize) {
        if self.x_bit(control) {
            self.flip_x(target);
        }
        if self.z_bit(target) {
            self.flip_z(control);
        }
    }

    /// Rotations by ±π/2 about X: Z ↔ Y, X fixed.
    pub fn propagate_rx(&mut self, q: usize) {
        if self.z_bit(q) {
            self.flip_x(q);
        }
    }

    /// Rotations by ±π/2 about Y: X ↔ Z, Y fixed.
    pub fn propagate_ry(&mut self, q: usize) {
        let (w, m) = bit(q);
        let xb = self.x[w] & m;
        let zb = self.z[w] & m;
        self.x[w] = (self.x[w] & !m) | zb;
        self.z[w] = (self.z[w] & !m) | xb;
    }

    /// exp(∓iπ/4 X⊗X): a Z component on either qubit picks up X on both.
    pub fn propagate_xx(&mut self, a: usize, b: usize) {
        let flip = self.z_bit(a) ^ self.z_bit(b);
        if flip {
            self.flip_x(a);
            self.flip_x(b);
        }
    }
}

impl core::ops::Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign_checked(rhs)
            .expect("multiplying Pauli strings of different length");
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Parses dense notation such as `"+XIZ"`, `"-YY"` or `"ZZI"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        let letters: Vec<char> = body.chars().collect();
        let mut out = PauliString::identity(letters.len());
        for (q, c) in letters.into_iter().enumerate() {
            let p = match c {
                'I' | '_' | '.' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(PauliError::InvalidChar(other)),
            };
            out.set(q, p);
        }
        out.phase = phase;
        Ok(out)
    }
}

/// Compact sparse rendering, e.g. `X0 Z4` (identity renders as `I`).
pub fn sparse_label(p: &PauliString) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for q in p.support() {
        if !s.is_empty() {
            s.push(' ');
        }
        let _ = write!(s, "{}{}", p.get(q).as_char(), q);
    }
    if s.is_empty() {
        s.push('I');
    }
    s
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            let b = self.0.trailing_zeros() as usize;
            self.0 &= self.0 - 1;
            Some(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(&p("X") * &p("Z"), p("-iY"));
        assert_eq!(&p("Z") * &p("X"), p("+iY"));
        assert_eq!(&p("X") * &p("Y"), p("+iZ"));
        assert_eq!(&p("Y") * &p("Z"), p("+iX"));
        assert_eq!(&p("Y") * &p("Y"), p("I"));
    }

    #[test]
    fn weight_and_support() {
        let s = p("XIZYI");
        assert_eq!(s.weight(), 3);
        assert_eq!(s.support().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert!(PauliString::identity(7).is_identity());
    }

    #[test]
    fn support_spans_words() {
        let s = PauliString::from_sparse(130, &[(3, Pauli::X), (64, Pauli::Z), (129, Pauli::Y)]);
        assert_eq!(s.support().collect::<Vec<_>>(), vec![3, 64, 129]);
        assert_eq!(s.get(129), Pauli::Y);
    }

    #[test]
    fn size_mismatch_rejected() {
        let mut a = PauliString::identity(3);
        assert_eq!(
            a.mul_assign_checked(&PauliString::identity(4)),
            Err(PauliError::SizeMismatch { expected: 3, found: 4 })
        );
    }

    #[test]
    fn display_roundtrip() {
        for s in ["+XYZI", "-ZZ", "+iX", "-iYI"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(sparse_label(&p("IXIZ")), "X1 Z3");
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(move |(letters, ph)| {
            let mut s = PauliString::identity(n);
            for (q, l) in letters.into_iter().enumerate() {
                s.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][l as usize]);
            }
            s.with_phase(ph)
        })
    }

    /// Dense 2x2 matrices over Z[i] scaled so products stay exact.
    fn dense(s: &PauliString) -> Vec<(i64, i64)> {
        // Kronecker product of single-qubit matrices; entries are Gaussian integers.
        let mut m: Vec<(i64, i64)> = vec![(1, 0)];
        let mut dim = 1usize;
        for q in 0..s.num_qubits() {
            let local: [[(i64, i64); 2]; 2] = match s.get(q) {
                Pauli::I => [[(1, 0), (0, 0)], [(0, 0), (1, 0)]],
                Pauli::X => [[(0, 0), (1, 0)], [(1, 0), (0, 0)]],
                Pauli::Y => [[(0, 0), (0, -1)], [(0, 1), (0, 0)]],
                Pauli::Z => [[(1, 0), (0, 0)], [(0, 0), (-1, 0)]],
            };
            let nd = dim * 2;
            let mut out = vec![(0, 0); nd * nd];
            for r in 0..dim {
                for c in 0..dim {
                    let a = m[r * dim + c];
                    for lr in 0..2 {
                        for lc in 0..2 {
                            let b = local[lr][lc];
                            // qubit q is the least significant index
                            let rr = r * 2 + lr;
                            let cc = c * 2 + lc;
                            out[rr * nd + cc] = (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
                        }
                    }
                }
            }
            m = out;
            dim = nd;
        }
        let ph = [(1, 0), (0, 1), (-1, 0), (0, -1)][s.phase_exponent() as usize];
        m.into_iter()
            .map(|a| (a.0 * ph.0 - a.1 * ph.1, a.0 * ph.1 + a.1 * ph.0))
            .collect()
    }

    fn matmul(a: &[(i64, i64)], b: &[(i64, i64)]) -> Vec<(i64, i64)> {
        let dim = (a.len() as f64).sqrt() as usize;
        let mut out = vec![(0, 0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = (0, 0);
                for k in 0..dim {
                    let x = a[r * dim + k];
                    let y = b[k * dim + c];
                    acc.0 += x.0 * y.0 - x.1 * y.1;
                    acc.1 += x.0 * y.1 + x.1 * y.0;
                }
                out[r * dim + c] = acc;
            }
        }
        out
    }

    proptest! {
        #[test]
        fn product_matches_dense_matrices(a in arb_pauli(3), b in arb_pauli(3)) {
            prop_assert_eq!(dense(&(&a * &b)), matmul(&dense(&a), &dense(&b)));
        }

        #[test]
        fn multiplication_is_associative(a in arb_pauli(5), b in arb_pauli(5), c in arb_pauli(5)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn hermitian_square_is_identity(a in arb_pauli(6)) {
            let h = a.unsigned();
            let sq = &h * &h;
            prop_assert!(sq.is_identity());
            prop_assert_eq!(sq.sign(), Some(1));
        }

        #[test]
        fn weight_bounded(a in arb_pauli(9)) {
            prop_assert!(a.weight() <= 9);
        }

        #[test]
        fn commutation_matches_product_order(a in arb_pauli(4), b in arb_pauli(4)) {
            let ab = &a * &b;
            let ba = &b * &a;
            if a.commutes_with(&b) {
                prop_assert_eq!(ab, ba);
            } else {
                let mut neg = ba.clone();
                neg.negate();
                prop_assert_eq!(ab, neg);
            }
        }
    }
}
