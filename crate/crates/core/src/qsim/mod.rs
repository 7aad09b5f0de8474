//! Dense statevector simulator.
//!
//! Qubit 0 is the least significant bit of a basis index. Every gate acts in
//! place on the amplitude vector.

mod gates;
mod pauli;
mod sampling;

pub use gates::{apply_f_gate, apply_layer, FGateParams, Rotation, RotationProgram, F_GATE_ARITY};
pub use pauli::{i_pow, Pauli, PauliOp, PauliString, PauliSum, PauliWord, MAX_PAULI_QUBITS};
pub use sampling::{sample_basis, Basis};

use num_complex::Complex64;

use crate::error::{bail, Result};

/// Largest register a dense state may hold (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

pub type Matrix2 = [[Complex64; 2]; 2];
pub type Matrix4 = [[Complex64; 4]; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// |0...0> on `n_qubits` qubits.
pub fn new_zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::basis_state(n_qubits, 0)
}

impl StateVector {
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            bail!(Capacity, "{n_qubits} qubits outside the supported range 1..={MAX_QUBITS}");
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            bail!(Argument, "basis index {index} out of range for {n_qubits} qubits");
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the vector must have power-of-two length and unit norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            bail!(Argument, "amplitude vector length {dim} is not a power of two >= 2");
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            bail!(Capacity, "{n_qubits} qubits exceed the limit of {MAX_QUBITS}");
        }
        let s = Self { n_qubits, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            bail!(Numerical, "state is not normalized (norm^2 = {norm})");
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Wraps an unnormalised vector (adjoint and intermediate vectors).
    pub(crate) fn from_raw(amps: Vec<Complex64>) -> Self {
        debug_assert!(amps.len().is_power_of_two());
        Self { n_qubits: amps.len().trailing_zeros() as usize, amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            bail!(Argument, "qubit {q} out of range for {} qubits", self.n_qubits);
        }
        Ok(())
    }

    /// Applies `exp(i * angle * W)` for a Hermitian Pauli word `W`.
    pub fn apply_pauli_rotation(&mut self, word: PauliWord, angle: f64) -> Result<()> {
        if word.span() > self.n_qubits {
            bail!(Argument, "rotation '{word}' acts outside a {}-qubit register", self.n_qubits);
        }
        self.rotate_unchecked(word, angle);
        Ok(())
    }

    pub(crate) fn rotate_unchecked(&mut self, word: PauliWord, angle: f64) {
        let (s, c) = angle.sin_cos();
        let is = Complex64::new(0.0, s);
        let x = word.x as usize;
        if x == 0 {
            let plus = Complex64::new(c, s);
            let minus = Complex64::new(c, -s);
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= if (word.z & b as u64).count_ones() & 1 == 0 { plus } else { minus };
            }
            return;
        }
        let top = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for b in 0..self.amps.len() {
            if b & top != 0 {
                continue;
            }
            let f = b ^ x;
            let (a0, a1) = (self.amps[b], self.amps[f]);
            self.amps[b] = a0 * c + is * word.phase_on(f as u64) * a1;
            self.amps[f] = a1 * c + is * word.phase_on(b as u64) * a0;
        }
    }

    /// Applies a single-qubit matrix `m[out][in]`.
    pub fn apply_1q(&mut self, q: usize, m: &Matrix2) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for b in 0..self.amps.len() {
            if b & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[b], self.amps[b | bit]);
            self.amps[b] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[b | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    /// Applies a two-qubit matrix in the local basis |q1 q2>, i.e. local
    /// index `2 * bit(q1) + bit(q2)`.
    pub fn apply_2q(&mut self, q1: usize, q2: usize, m: &Matrix4) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            bail!(Argument, "two-qubit gate on coincident qubit {q1}");
        }
        let (b1, b2) = (1usize << q1, 1usize << q2);
        for b in 0..self.amps.len() {
            if b & (b1 | b2) != 0 {
                continue;
            }
            let idx = [b, b | b2, b | b1, b | b1 | b2];
            let v = idx.map(|i| self.amps[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amps[i] = (0..4).map(|k| m[r][k] * v[k]).sum();
            }
        }
        Ok(())
    }
}
