//! Dense state-vector reference simulator for small qubit counts.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use qecsim_core::{Basis, Gate, Pauli, PauliString};

const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub type M2 = [[C; 2]; 2];

pub fn pauli_matrix(p: Pauli) -> M2 {
    let (o, l, i) = (c(0., 0.), c(1., 0.), c(0., 1.));
    match p {
        Pauli::I => [[l, o], [o, l]],
        Pauli::X => [[o, l], [l, o]],
        Pauli::Y => [[o, -i], [i, o]],
        Pauli::Z => [[l, o], [o, -l]],
    }
}

/// `exp(-i·s·π/4·P)` for a single-qubit Pauli `P`.
fn quarter_turn(p: Pauli, s: f64) -> M2 {
    let m = pauli_matrix(p);
    let mut out = [[c(0., 0.); 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            let id = if r == k { c(R, 0.) } else { c(0., 0.) };
            out[r][k] = id - c(0., s * R) * m[r][k];
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct State {
    pub n: usize,
    pub amp: Vec<C>,
}

impl State {
    pub fn zero(n: usize) -> Self {
        let mut amp = vec![c(0., 0.); 1 << n];
        amp[0] = c(1., 0.);
        Self { n, amp }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amp = vec![c(0., 0.); 1 << n];
        amp[index] = c(1., 0.);
        Self { n, amp }
    }

    pub fn apply1(&mut self, q: usize, m: &M2) {
        let b = 1 << q;
        for i in 0..self.amp.len() {
            if i & b == 0 {
                let (a0, a1) = (self.amp[i], self.amp[i | b]);
                self.amp[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amp[i | b] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn cnot(&mut self, ctl: usize, tgt: usize) {
        for i in 0..self.amp.len() {
            if i & (1 << ctl) != 0 && i & (1 << tgt) == 0 {
                self.amp.swap(i, i | (1 << tgt));
            }
        }
    }

    /// `exp(-iπ/4 X⊗X)`.
    pub fn xx(&mut self, a: usize, b: usize) {
        let flip = (1 << a) | (1 << b);
        let old = self.amp.clone();
        for i in 0..old.len() {
            self.amp[i] = c(R, 0.) * old[i] - c(0., R) * old[i ^ flip];
        }
    }

    pub fn gate(&mut self, g: Gate) {
        let (o, l, i) = (c(0., 0.), c(1., 0.), c(0., 1.));
        match g {
            Gate::H(q) => self.apply1(q, &[[c(R, 0.), c(R, 0.)], [c(R, 0.), c(-R, 0.)]]),
            Gate::S(q) => self.apply1(q, &[[l, o], [o, i]]),
            Gate::Sdg(q) => self.apply1(q, &[[l, o], [o, -i]]),
            Gate::X(q) => self.apply1(q, &pauli_matrix(Pauli::X)),
            Gate::Y(q) => self.apply1(q, &pauli_matrix(Pauli::Y)),
            Gate::Z(q) => self.apply1(q, &pauli_matrix(Pauli::Z)),
            Gate::Cnot(a, b) => self.cnot(a, b),
            Gate::Rx(q, pos) => self.apply1(q, &quarter_turn(Pauli::X, if pos { 1. } else { -1. })),
            Gate::Ry(q, pos) => self.apply1(q, &quarter_turn(Pauli::Y, if pos { 1. } else { -1. })),
            Gate::Xx(a, b) => self.xx(a, b),
        }
    }

    pub fn apply_pauli(&mut self, p: &PauliString) {
        for q in 0..self.n {
            let m = pauli_matrix(p.get(q));
            self.apply1(q, &m);
        }
    }

    /// `⟨ψ|P|ψ⟩` including the operator's phase.
    pub fn expectation(&self, p: &PauliString) -> C {
        let mut moved = self.clone();
        moved.apply_pauli(p);
        let phase = [c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)][p.phase_exponent() as usize];
        phase * self.amp.iter().zip(&moved.amp).map(|(a, b)| a.conj() * b).sum::<C>()
    }

    fn rotate_to_z(&mut self, q: usize, basis: Basis) {
        if basis == Basis::X {
            self.gate(Gate::H(q));
        }
    }

    /// Probability that measuring `q` in `basis` gives the -1 outcome.
    pub fn prob_one(&self, q: usize, basis: Basis) -> f64 {
        let mut s = self.clone();
        s.rotate_to_z(q, basis);
        s.amp
            .iter()
            .enumerate()
            .filter(|(i, _)| i & (1 << q) != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects onto `outcome` and renormalises; returns its probability.
    pub fn collapse(&mut self, q: usize, basis: Basis, outcome: bool) -> f64 {
        self.rotate_to_z(q, basis);
        let mut p = 0.0;
        for (i, a) in self.amp.iter_mut().enumerate() {
            if (i & (1 << q) != 0) != outcome {
                *a = c(0., 0.);
            } else {
                p += a.norm_sqr();
            }
        }
        let k = 1.0 / p.sqrt();
        for a in &mut self.amp {
            *a *= k;
        }
        self.rotate_to_z(q, basis);
        p
    }

    pub fn overlap(&self, other: &State) -> C {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Columns `U|k⟩` of the unitary of a gate sequence.
pub fn unitary(n: usize, gates: &[Gate]) -> Vec<State> {
    (0..1 << n)
        .map(|k| {
            let mut s = State::basis(n, k);
            for &g in gates {
                s.gate(g);
            }
            s
        })
        .collect()
}

/// Whether two unitaries agree up to one global phase.
pub fn equal_up_to_phase(a: &[State], b: &[State], tol: f64) -> bool {
    let mut phase: Option<C> = None;
    for (u, v) in a.iter().zip(b) {
        for (x, y) in u.amp.iter().zip(&v.amp) {
            if x.norm() < tol && y.norm() < tol {
                continue;
            }
            if x.norm() < tol || y.norm() < tol {
                return false;
            }
            let r = y / x;
            match phase {
                None => phase = Some(r),
                Some(p) if (p - r).norm() > tol => return false,
                _ => {}
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug)]
pub enum Step {
    Gate(Gate),
    Measure(usize, Basis),
}

/// A random Clifford circuit on 1..=`max_qubits` qubits with 1..=`max_len`
/// steps; roughly one step in five is a measurement.
pub fn random_circuit<Rn: rand::Rng>(rng: &mut Rn, max_qubits: usize, max_len: usize) -> (usize, Vec<Step>) {
    let n = rng.random_range(1..=max_qubits);
    let len = rng.random_range(1..=max_len);
    let steps = (0..len)
        .map(|_| {
            let a = rng.random_range(0..n);
            let two = n > 1 && rng.random_bool(0.35);
            if rng.random_bool(0.2) {
                let basis = if rng.random_bool(0.5) { Basis::Z } else { Basis::X };
                return Step::Measure(a, basis);
            }
            if two {
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                if rng.random_bool(0.5) {
                    Step::Gate(Gate::Cnot(a, b))
                } else {
                    Step::Gate(Gate::Xx(a, b))
                }
            } else {
                let pos = rng.random_bool(0.5);
                Step::Gate(match rng.random_range(0..8) {
                    0 => Gate::H(a),
                    1 => Gate::S(a),
                    2 => Gate::Sdg(a),
                    3 => Gate::X(a),
                    4 => Gate::Y(a),
                    5 => Gate::Z(a),
                    6 => Gate::Rx(a, pos),
                    _ => Gate::Ry(a, pos),
                })
            }
        })
        .collect();
    (n, steps)
}

/// Outcome of running one circuit many times on both simulators.
#[derive(Clone, Debug, Default)]
pub struct Comparison {
    /// Measurements the reference calls deterministic, over all trials.
    pub deterministic: u64,
    /// -1 outcomes of the circuit's first random measurement, if it has one.
    pub first_random_ones: Option<u64>,
}

/// Runs `steps` `trials` times on the tableau, shadowing every trial with the
/// dense simulator collapsed onto the tableau's outcomes. Determinism flags,
/// deterministic outcomes, random probabilities (exactly 1/2) and the final
/// state are all checked exactly.
pub fn compare_runs<Rn: rand::Rng>(n: usize, steps: &[Step], trials: u64, rng: &mut Rn) -> Result<Comparison, String> {
    const EPS: f64 = 1e-9;
    let mut out = Comparison::default();
    let first_random = {
        let mut probe = State::zero(n);
        let mut idx = None;
        for (i, s) in steps.iter().enumerate() {
            match *s {
                Step::Gate(g) => probe.gate(g),
                Step::Measure(q, b) => {
                    let p = probe.prob_one(q, b);
                    if p > EPS && p < 1.0 - EPS {
                        idx = Some(i);
                        break;
                    }
                    probe.collapse(q, b, p > 0.5);
                }
            }
        }
        idx
    };
    let mut ones = 0;
    for _ in 0..trials {
        let mut t = qecsim_core::Tableau::new(n).map_err(|e| e.to_string())?;
        let mut d = State::zero(n);
        for (i, s) in steps.iter().enumerate() {
            match *s {
                Step::Gate(g) => {
                    t.apply(g).map_err(|e| e.to_string())?;
                    d.gate(g);
                }
                Step::Measure(q, b) => {
                    let m = t.measure(q, b, rng).map_err(|e| e.to_string())?;
                    let p = d.prob_one(q, b);
                    let det = p < EPS || p > 1.0 - EPS;
                    if det != m.deterministic {
                        return Err(format!("step {i}: determinism differs (p = {p})"));
                    }
                    if det {
                        out.deterministic += 1;
                        if m.outcome != (p > 0.5) {
                            return Err(format!("step {i}: deterministic outcome differs"));
                        }
                    } else if (p - 0.5).abs() > EPS {
                        return Err(format!("step {i}: random outcome with p = {p}"));
                    }
                    if Some(i) == first_random && m.outcome {
                        ones += 1;
                    }
                    d.collapse(q, b, m.outcome);
                }
            }
        }
        for g in t.stabilizers() {
            let e = d.expectation(&g);
            if (e - C::new(1.0, 0.0)).norm() > 1e-6 {
                return Err(format!("final stabilizer {g} has expectation {e}"));
            }
        }
    }
    out.first_random_ones = first_random.map(|_| ones);
    Ok(out)
}
