//! Self-checks behind the `check` command, plus the random-circuit helpers
//! they share with the test suites.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ansatz::{build_ansatz, build_grid};
use crate::error::Result;
use crate::gaussian::{covariance_from_state, mode_word, rotation_from_circuit, CircuitGate, Matchgate};
use crate::model::{
    bethe_energy_density, build_hamiltonian, build_majorana_hamiltonian, build_number_operator, dense_operator,
    exact_ground_energy, exact_ground_energy_penalized, HubbardParams,
};
use crate::qsim::{Pauli, PauliString, PauliSum, PauliWord, StateVector};
use crate::rng;
use crate::vqe::{gradient_engines, layer_by_layer_train, TrainConfig, VqeProblem};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, err: f64, tol: f64) -> CheckOutcome {
    CheckOutcome { name, passed: err <= tol, detail: format!("max error {err:.3e} (tolerance {tol:.0e})") }
}

/// Haar-ish 2x2 unitary `e^{i phase} [[a, b], [-b*, a*]]`.
fn random_u2(rng: &mut ChaCha8Rng, phase: f64) -> Matrix2<Complex64> {
    let th: f64 = rng.gen_range(0.0..PI / 2.0);
    let (p1, p2): (f64, f64) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
    let a = Complex64::from_polar(th.cos(), p1);
    let b = Complex64::from_polar(th.sin(), p2);
    Matrix2::new(a, b, -b.conj(), a.conj()) * Complex64::from_polar(1.0, phase)
}

/// Matchgate with independent random blocks sharing one determinant.
pub fn random_matchgate(rng: &mut ChaCha8Rng) -> Matchgate {
    let alpha = rng.gen_range(0.0..PI);
    Matchgate { a: random_u2(rng, alpha), b: random_u2(rng, alpha) }
}

/// `depth` random matchgates on random neighbouring pairs of an `m`-qubit line.
pub fn random_matchgate_circuit(m: usize, depth: usize, rng: &mut ChaCha8Rng) -> Vec<CircuitGate> {
    (0..depth).map(|_| CircuitGate::Matchgate { q: rng.gen_range(0..m - 1), gate: random_matchgate(rng) }).collect()
}

/// Worst `|cov(V psi) - R cov(psi) R^T|` over `n_circuits` random circuits on
/// `m` qubits, each started from a random computational basis state.
pub fn matchgate_covariance_error(m: usize, n_circuits: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..n_circuits {
        let mut r = rng::stream(seed, "matchgate", k as u64);
        let start = StateVector::basis_state(m, r.gen_range(0..1usize << m))?;
        let gates = random_matchgate_circuit(m, 3 * m, &mut r);
        let rot = rotation_from_circuit(m, &gates)?;
        rot.validate()?;
        let mut state = start.clone();
        for g in &gates {
            g.apply(&mut state)?;
        }
        let before = covariance_from_state(&start, m)?;
        let after = covariance_from_state(&state, m)?;
        worst = worst.max((&after.0 - before.transformed(&rot).0).abs().max());
    }
    Ok(worst)
}

/// The six quadratic generators of a neighbouring qubit pair against their
/// Majorana products, as dense two-qubit matrices. Modes `2q` and `2q+1` are
/// the A and B quadratures of qubit `q`.
pub fn generator_identity_errors() -> Result<Vec<(String, f64)>> {
    let i = Complex64::new(0.0, 1.0);
    let table: [(&[(usize, Pauli)], Complex64, usize, usize); 6] = [
        (&[(0, Pauli::X), (1, Pauli::X)], -i, 1, 2),
        (&[(0, Pauli::X), (1, Pauli::Y)], -i, 1, 3),
        (&[(0, Pauli::Y), (1, Pauli::X)], i, 0, 2),
        (&[(0, Pauli::Y), (1, Pauli::Y)], i, 0, 3),
        (&[(0, Pauli::Z)], -i, 0, 1),
        (&[(1, Pauli::Z)], -i, 2, 3),
    ];
    let dense = |w: PauliWord| dense_operator(&PauliSum::from_terms(2, vec![PauliString { word: w, coeff: 1.0 }])?);
    let mut out = Vec::new();
    for (ops, c, a, b) in table {
        let word = PauliWord::from_ops(ops.iter().copied());
        let lhs = dense(word)?;
        let rhs: DMatrix<Complex64> = dense(mode_word(a))? * dense(mode_word(b))? * c;
        out.push((word.to_string(), (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max)));
    }
    Ok(out)
}

/// Largest `|shift - finite difference|` over `points` random angle sets for
/// a two-layer ansatz on a `rows x cols` grid, for energy and number operators.
pub fn gradient_agreement(rows: usize, cols: usize, points: usize, seed: u64) -> Result<f64> {
    let g = build_grid(rows, cols)?;
    let l = rows * cols / 2;
    let prob = VqeProblem::new(HubbardParams::half_filling(l, 1.0, 8.0)?, &g, "interleaved")?;
    let a = build_ansatz(&g, 4, None)?;
    let program = a.program();
    let shift = gradient_engines().get("shift")?;
    let fd = gradient_engines().get("finite-diff")?;
    let obs = [&prob.objective_op, &prob.number_op];
    let mut worst = 0.0f64;
    for k in 0..points {
        let mut r = rng::stream(seed, "gradient-check", k as u64);
        let x: Vec<f64> = (0..a.n_params()).map(|_| r.gen_range(0.0..2.0 * PI)).collect();
        let gs = shift.gradients(&program, &x, &obs)?;
        let gf = fd.gradients(&program, &x, &obs)?;
        for (u, v) in gs.iter().flatten().zip(gf.iter().flatten()) {
            worst = worst.max((u - v).abs());
        }
    }
    Ok(worst)
}

/// Worst `|[H, N]|` coefficient over `L = 1..=max_l`.
pub fn number_conservation_error(max_l: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for l in 1..=max_l {
        let p = HubbardParams::new(l, 1.0, 8.0, 1.3)?;
        let c = build_hamiltonian(&p).to_op().commutator(&build_number_operator(l)?.to_op());
        worst = c.terms().values().map(|z| z.norm()).fold(worst, f64::max);
    }
    Ok(worst)
}

/// Largest weight of a non-identity Hamiltonian term and whether all act on
/// JW-adjacent or same-site pairs, over `L = 1..=max_l`.
pub fn locality(max_l: usize) -> Result<(u32, bool)> {
    let mut max_w = 0;
    let mut local = true;
    for l in 1..=max_l {
        let p = HubbardParams::half_filling(l, 1.0, 8.0)?;
        for t in build_hamiltonian(&p).terms() {
            max_w = max_w.max(t.word.weight());
            let q: Vec<usize> = t.ops().iter().map(|o| o.0).collect();
            if q.len() == 2 && q[1] - q[0] != 1 && q[0] + q[1] != 2 * l - 1 {
                local = false;
            }
        }
    }
    Ok((max_w, local))
}

pub fn run_checks() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut push = |name: &'static str, r: Result<CheckOutcome>| {
        out.push(r.unwrap_or_else(|e| CheckOutcome { name, passed: false, detail: format!("error: {e}") }));
    };

    push("bethe-table", (|| {
        let table = [(0.0, -1.27324), (2.0, -0.844374), (4.0, -0.573729), (8.0, -0.327531)];
        let mut err = 0.0f64;
        for (u, e) in table {
            err = err.max((bethe_energy_density(u)? - e).abs());
        }
        Ok(outcome("bethe-table", err, 1e-5))
    })());
    push("ed-two-site", (|| {
        let (e, _) = exact_ground_energy(&HubbardParams::half_filling(2, 1.0, 8.0)?, 2)?;
        Ok(outcome("ed-two-site", (e - (4.0 - 2.0 * 5f64.sqrt())).abs(), 1e-9))
    })());
    push("ed-full-vs-sector", (|| {
        let mut err = 0.0f64;
        for l in 1..=3 {
            let p = HubbardParams::half_filling(l, 1.0, 8.0)?;
            err = err.max((exact_ground_energy(&p, l)?.0 - exact_ground_energy_penalized(&p)?).abs());
        }
        Ok(outcome("ed-full-vs-sector", err, 1e-10))
    })());
    push("particle-number-conserved", number_conservation_error(8).map(|e| outcome("particle-number-conserved", e, 0.0)));
    push("two-local-terms", (|| {
        let (w, local) = locality(8)?;
        Ok(CheckOutcome { name: "two-local-terms", passed: w <= 2 && local, detail: format!("max weight {w}, adjacent pairs only: {local}") })
    })());
    push("majorana-vs-pauli", (|| {
        let mut err = 0.0f64;
        for l in 1..=3 {
            let p = HubbardParams::new(l, 0.7, 3.0, 1.1)?;
            let a = dense_operator(&build_majorana_hamiltonian(&p).to_pauli_sum(1e-14)?)?;
            let b = dense_operator(&build_hamiltonian(&p))?;
            err = err.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        Ok(outcome("majorana-vs-pauli", err, 1e-12))
    })());
    push("gradient-shift-vs-fd", (|| {
        let e = gradient_agreement(2, 2, 10, 1)?.max(gradient_agreement(2, 4, 3, 2)?);
        Ok(outcome("gradient-shift-vs-fd", e, 1e-6))
    })());
    push("matchgate-covariance", matchgate_covariance_error(6, 10, 5).map(|e| outcome("matchgate-covariance", e, 1e-10)));
    push("generator-identities", generator_identity_errors().map(|v| {
        outcome("generator-identities", v.iter().map(|x| x.1).fold(0.0, f64::max), 1e-12)
    }));
    push("training-determinism", (|| {
        let g = build_grid(2, 2)?;
        let prob = VqeProblem::new(HubbardParams::half_filling(2, 1.0, 8.0)?, &g, "interleaved")?;
        let cfg = TrainConfig { n_stages: 1, max_iters_per_stage: 10, seed: 11, ..TrainConfig::default() };
        let a = layer_by_layer_train(&cfg, &prob)?.to_json()?;
        let b = layer_by_layer_train(&cfg, &prob)?.to_json()?;
        Ok(CheckOutcome { name: "training-determinism", passed: a == b, detail: format!("{} bytes", a.len()) })
    })());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for c in run_checks() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
