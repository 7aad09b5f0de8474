//! The six-angle f-gate and circuits expressed as sequences of Pauli rotations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{new_zero_state, Pauli, PauliWord, StateVector};
use crate::ansatz::{DeviceGraph, Pattern};
use crate::error::{bail, Result};

/// Number of angles in one f-gate.
pub const F_GATE_ARITY: usize = 6;

/// f-gate angles. The gate is
/// `RZ(tz1) RZ(tz2) * exp(i phi ZZ) * exp(-i theta (XX + YY)) * RX(tx1) RX(tx2)`
/// with `RX(a) = exp(i a X)` and `RZ(a) = exp(i a Z)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FGateParams {
    pub theta_x1: f64,
    pub theta_x2: f64,
    pub theta: f64,
    pub phi: f64,
    pub theta_z1: f64,
    pub theta_z2: f64,
}

impl FGateParams {
    pub fn to_array(&self) -> [f64; F_GATE_ARITY] {
        [self.theta_x1, self.theta_x2, self.theta, self.phi, self.theta_z1, self.theta_z2]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != F_GATE_ARITY {
            bail!(Argument, "f-gate needs {F_GATE_ARITY} angles, got {}", v.len());
        }
        let p = Self {
            theta_x1: v[0],
            theta_x2: v[1],
            theta: v[2],
            phi: v[3],
            theta_z1: v[4],
            theta_z2: v[5],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().any(|a| !a.is_finite()) {
            bail!(Argument, "non-finite f-gate angle in {self:?}");
        }
        Ok(())
    }

    /// Reduces every angle to (-pi, pi]. Each factor has period 2*pi, so the
    /// unitary is unchanged.
    pub fn reduced(&self) -> Self {
        let r = |a: f64| {
            let m = (a + PI).rem_euclid(2.0 * PI) - PI;
            if m <= -PI {
                m + 2.0 * PI
            } else {
                m
            }
        };
        let a = self.to_array().map(r);
        Self::from_slice(&a).expect("reduced angles are finite")
    }
}

/// `exp(i * sign * params[param] * word)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    pub word: PauliWord,
    pub param: usize,
    pub sign: f64,
}

/// The seven elementary rotations of an f-gate whose angles start at `offset`.
pub(crate) fn f_gate_rotations(q1: usize, q2: usize, offset: usize) -> [Rotation; 7] {
    let w = |ops: &[(usize, Pauli)]| PauliWord::from_ops(ops.iter().copied());
    let rot = |word, k: usize, sign| Rotation { word, param: offset + k, sign };
    [
        rot(w(&[(q1, Pauli::X)]), 0, 1.0),
        rot(w(&[(q2, Pauli::X)]), 1, 1.0),
        rot(w(&[(q1, Pauli::X), (q2, Pauli::X)]), 2, -1.0),
        rot(w(&[(q1, Pauli::Y), (q2, Pauli::Y)]), 2, -1.0),
        rot(w(&[(q1, Pauli::Z), (q2, Pauli::Z)]), 3, 1.0),
        rot(w(&[(q1, Pauli::Z)]), 4, 1.0),
        rot(w(&[(q2, Pauli::Z)]), 5, 1.0),
    ]
}

fn check_pair(state: &StateVector, q1: usize, q2: usize) -> Result<()> {
    if q1 == q2 {
        bail!(Argument, "f-gate on coincident qubit {q1}");
    }
    let n = state.n_qubits();
    if q1 >= n || q2 >= n {
        bail!(Argument, "f-gate on ({q1}, {q2}) outside a {n}-qubit register");
    }
    Ok(())
}

pub fn apply_f_gate(state: &mut StateVector, q1: usize, q2: usize, p: &FGateParams) -> Result<()> {
    check_pair(state, q1, q2)?;
    p.validate()?;
    let angles = p.to_array();
    for r in f_gate_rotations(q1, q2, 0) {
        state.rotate_unchecked(r.word, r.sign * angles[r.param]);
    }
    Ok(())
}

/// Applies one f-gate per edge of `pattern`, in edge order.
pub fn apply_layer(
    state: &mut StateVector,
    graph: &DeviceGraph,
    pattern: Pattern,
    params: &[FGateParams],
) -> Result<()> {
    let edges = graph.edges_of(pattern);
    if params.len() != edges.len() {
        bail!(
            Argument,
            "pattern {pattern:?} has {} edges but {} parameter sets were given",
            edges.len(),
            params.len()
        );
    }
    let mut used = 0u64;
    for &(a, b) in &edges {
        let m = (1u64 << a) | (1u64 << b);
        if used & m != 0 {
            bail!(Topology, "pattern {pattern:?} is not a matching");
        }
        used |= m;
    }
    for (&(a, b), p) in edges.iter().zip(params) {
        apply_f_gate(state, a, b, p)?;
    }
    Ok(())
}

/// A parametrized circuit flattened to Pauli rotations on `n_qubits` qubits,
/// run from |0...0>.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationProgram {
    pub n_qubits: usize,
    pub n_params: usize,
    pub ops: Vec<Rotation>,
}

impl RotationProgram {
    pub fn new(n_qubits: usize, n_params: usize) -> Self {
        Self { n_qubits, n_params, ops: Vec::new() }
    }

    pub fn push_f_gate(&mut self, q1: usize, q2: usize, offset: usize) {
        self.ops.extend(f_gate_rotations(q1, q2, offset));
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            bail!(Argument, "expected {} parameters, got {}", self.n_params, params.len());
        }
        if params.iter().any(|p| !p.is_finite()) {
            bail!(Argument, "non-finite circuit parameter");
        }
        Ok(())
    }

    pub fn run(&self, params: &[f64]) -> Result<StateVector> {
        let mut s = new_zero_state(self.n_qubits)?;
        self.run_on(&mut s, params)?;
        Ok(s)
    }

    pub fn run_on(&self, state: &mut StateVector, params: &[f64]) -> Result<()> {
        self.check(params)?;
        if state.n_qubits() != self.n_qubits {
            bail!(Argument, "program on {} qubits, state on {}", self.n_qubits, state.n_qubits());
        }
        for r in &self.ops {
            state.rotate_unchecked(r.word, r.sign * params[r.param]);
        }
        Ok(())
    }

    /// Runs with one elementary rotation's angle shifted by `delta`.
    pub fn run_shifted(&self, params: &[f64], op: usize, delta: f64) -> Result<StateVector> {
        self.check(params)?;
        let mut s = new_zero_state(self.n_qubits)?;
        for (i, r) in self.ops.iter().enumerate() {
            let mut angle = r.sign * params[r.param];
            if i == op {
                angle += delta;
            }
            s.rotate_unchecked(r.word, angle);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_angles_are_identity() {
        let amps: Vec<Complex64> = (0..8).map(|k| c(k as f64, 1.0 - k as f64)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let s0 = StateVector::from_amplitudes(amps.iter().map(|a| a / norm).collect()).unwrap();
        let mut s = s0.clone();
        apply_f_gate(&mut s, 0, 2, &FGateParams::default()).unwrap();
        assert_eq!(s, s0);
    }

    #[test]
    fn exchange_quarter_pi_maps_01_to_minus_i_10() {
        // q1 = qubit 0 in |0>, q2 = qubit 1 in |1>: basis index 2.
        let mut s = StateVector::basis_state(2, 0b10).unwrap();
        let p = FGateParams { theta: FRAC_PI_4, ..Default::default() };
        apply_f_gate(&mut s, 0, 1, &p).unwrap();
        let a = s.amplitudes();
        assert!((a[0b01] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(a[0b10].norm() < 1e-15);
    }

    #[test]
    fn cphase_half_pi_phases() {
        let p = FGateParams { phi: std::f64::consts::FRAC_PI_2, ..Default::default() };
        let expect = [c(0.0, 1.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 1.0)];
        for (b, e) in expect.iter().enumerate() {
            let mut s = StateVector::basis_state(2, b).unwrap();
            apply_f_gate(&mut s, 0, 1, &p).unwrap();
            assert!((s.amplitudes()[b] - e).norm() < 1e-15);
        }
    }

    #[test]
    fn coincident_qubits_rejected() {
        let mut s = new_zero_state(2).unwrap();
        assert!(matches!(
            apply_f_gate(&mut s, 1, 1, &FGateParams::default()),
            Err(crate::Error::Argument(_))
        ));
    }

    #[test]
    fn reduction_keeps_the_unitary() {
        let p = FGateParams {
            theta_x1: 7.0,
            theta_x2: -9.5,
            theta: 3.5,
            phi: -3.2,
            theta_z1: 12.0,
            theta_z2: PI,
        };
        let r = p.reduced();
        assert!(r.to_array().iter().all(|a| *a > -PI && *a <= PI));
        let mut s1 = StateVector::basis_state(2, 1).unwrap();
        let mut s2 = s1.clone();
        apply_f_gate(&mut s1, 0, 1, &p).unwrap();
        apply_f_gate(&mut s2, 0, 1, &r).unwrap();
        for (a, b) in s1.amplitudes().iter().zip(s2.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
