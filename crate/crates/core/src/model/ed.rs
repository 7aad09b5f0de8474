//! Exact diagonalisation in fixed particle-number sectors.
//!
//! The Hamiltonian conserves the particle number of each spin species, so a
//! sector with `N` particles splits into blocks `(n_up, n_down)`. Blocks up
//! to [`DENSE_LIMIT`] states use a dense symmetric eigensolver; larger ones
//! use Lanczos with full reorthogonalisation.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use super::{energy_operator, EnergyMode, HubbardParams, JwLayout, Spin};
use crate::error::{bail, Result};
use crate::qsim::{PauliSum, StateVector};

/// Largest register handled by the sector solvers.
pub const MAX_ED_QUBITS: usize = 16;
/// Largest block diagonalised densely under [`SectorSolver::Auto`].
pub const DENSE_LIMIT: usize = 1500;
/// Largest register [`exact_spectrum_min`] builds a dense matrix for.
pub const MAX_DENSE_QUBITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorSolver {
    Dense,
    Lanczos,
    Auto,
}

/// Occupied orbital = bit 0, so a basis index has `N = n_qubits - popcount`.
fn occupation_count(b: usize, mask: usize) -> usize {
    (mask & !b).count_ones() as usize
}

struct Block {
    basis: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
}

fn build_block(op: &PauliSum, jw: &JwLayout, n_up: usize, n_down: usize) -> Result<Block> {
    let n = jw.n_positions();
    let up_mask: usize = (0..jw.l()).map(|s| 1usize << jw.position(s, Spin::Up)).sum();
    let down_mask: usize = (0..jw.l()).map(|s| 1usize << jw.position(s, Spin::Down)).sum();
    let basis: Vec<usize> = (0..1usize << n)
        .filter(|&b| occupation_count(b, up_mask) == n_up && occupation_count(b, down_mask) == n_down)
        .collect();
    let index: HashMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut rows = vec![Vec::new(); basis.len()];
    for (col, &b) in basis.iter().enumerate() {
        let mut acc: HashMap<usize, Complex64> = HashMap::new();
        for t in op.terms() {
            *acc.entry(b ^ t.word.x as usize).or_default() += t.word.phase_on(b as u64) * t.coeff;
        }
        for (target, v) in acc {
            if v.norm() < 1e-14 {
                continue;
            }
            let Some(&row) = index.get(&target) else {
                bail!(Numerical, "operator leaves the ({n_up}, {n_down}) block");
            };
            if v.im.abs() > 1e-12 {
                bail!(Numerical, "complex matrix element {v} in a real Hamiltonian block");
            }
            rows[row].push((col, v.re));
        }
    }
    for r in &mut rows {
        r.sort_by_key(|e| e.0);
    }
    Ok(Block { basis, rows })
}

impl Block {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.rows.iter().map(|r| r.iter().map(|&(c, v)| v * x[c]).sum()))
    }

    fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] = v;
            }
        }
        m
    }

    fn ground_dense(&self) -> (f64, DVector<f64>) {
        let eig = SymmetricEigen::new(self.dense());
        let k = eig.eigenvalues.argmin().0;
        (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
    }

    fn ground_lanczos(&self) -> Result<(f64, DVector<f64>)> {
        let dim = self.dim();
        let mut rng = crate::rng::stream(0, "lanczos", dim as u64);
        let mut v = DVector::from_fn(dim, |_, _| rng.gen::<f64>() - 0.5);
        v /= v.norm();
        let mut basis: Vec<DVector<f64>> = vec![v];
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        let max_steps = dim.min(400);
        for step in 0..max_steps {
            let mut w = self.matvec(&basis[step]);
            let a = basis[step].dot(&w);
            alpha.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dot(&w);
                    w.axpy(-c, q, 1.0);
                }
            }
            let b = w.norm();
            let m = alpha.len();
            let t = DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let k = eig.eigenvalues.argmin().0;
            let ritz = eig.eigenvalues[k];
            let residual = (b * eig.eigenvectors[(m - 1, k)]).abs();
            let done = residual < 1e-11 || b < 1e-12 || step + 1 == max_steps;
            if done {
                if residual > 1e-8 && b >= 1e-12 {
                    bail!(Numerical, "Lanczos did not converge (residual {residual:e})");
                }
                let y = eig.eigenvectors.column(k);
                let mut x = DVector::zeros(dim);
                for (i, q) in basis.iter().enumerate() {
                    x.axpy(y[i], q, 1.0);
                }
                x /= x.norm();
                return Ok((ritz, x));
            }
            beta.push(b);
            basis.push(w / b);
        }
        unreachable!("loop returns on its last step")
    }
}

fn check_size(p: &HubbardParams) -> Result<JwLayout> {
    if p.n_qubits() > MAX_ED_QUBITS {
        bail!(Capacity, "exact diagonalisation supports at most {MAX_ED_QUBITS} qubits, got {}", p.n_qubits());
    }
    JwLayout::new(p.l)
}

/// Lowest eigenvalue of `H + mu N` with exactly `n_particles` particles and
/// its eigenvector on the `2L`-qubit register.
pub fn exact_ground_energy(p: &HubbardParams, n_particles: usize) -> Result<(f64, StateVector)> {
    exact_ground_energy_with(p, n_particles, SectorSolver::Auto)
}

pub fn exact_ground_energy_with(
    p: &HubbardParams,
    n_particles: usize,
    solver: SectorSolver,
) -> Result<(f64, StateVector)> {
    let jw = check_size(p)?;
    if n_particles > 2 * p.l {
        bail!(Argument, "sector N = {n_particles} is empty for L = {}", p.l);
    }
    let op = energy_operator(p, EnergyMode::Full);
    let mut best: Option<(f64, Vec<usize>, DVector<f64>)> = None;
    for n_up in 0..=p.l.min(n_particles) {
        let n_down = n_particles - n_up;
        if n_down > p.l {
            continue;
        }
        let block = build_block(&op, &jw, n_up, n_down)?;
        let dense = match solver {
            SectorSolver::Dense => true,
            SectorSolver::Lanczos => false,
            SectorSolver::Auto => block.dim() <= DENSE_LIMIT,
        };
        let (e, v) = if dense { block.ground_dense() } else { block.ground_lanczos()? };
        if best.as_ref().is_none_or(|b| e < b.0 - 1e-12) {
            best = Some((e, block.basis, v));
        }
    }
    let (e, basis, v) = best.expect("at least one block is non-empty");
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << p.n_qubits()];
    for (b, x) in basis.iter().zip(v.iter()) {
        amps[*b] = Complex64::new(*x, 0.0);
    }
    Ok((e, StateVector::from_amplitudes(amps)?))
}

/// Dense Hermitian matrix of a Pauli sum.
pub fn dense_operator(op: &PauliSum) -> Result<DMatrix<Complex64>> {
    if op.n_qubits() > MAX_DENSE_QUBITS {
        bail!(Capacity, "dense matrices are limited to {MAX_DENSE_QUBITS} qubits");
    }
    let dim = 1usize << op.n_qubits();
    let mut m = DMatrix::zeros(dim, dim);
    for t in op.terms() {
        for b in 0..dim {
            m[(b ^ t.word.x as usize, b)] += t.word.phase_on(b as u64) * t.coeff;
        }
    }
    Ok(m)
}

/// Sorted eigenvalues of a Pauli sum over the whole register.
pub fn dense_spectrum(op: &PauliSum) -> Result<Vec<f64>> {
    let mut ev: Vec<f64> = SymmetricEigen::new(dense_operator(op)?).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Lowest eigenvalue of a Pauli sum over the whole register.
pub fn exact_spectrum_min(op: &PauliSum) -> Result<f64> {
    Ok(dense_spectrum(op)?[0])
}

/// Half-filling ground energy of `H + mu N` from the full register, with the
/// other sectors lifted by the penalty `lambda (N - L)^2`.
pub fn exact_ground_energy_penalized(p: &HubbardParams) -> Result<f64> {
    let n = p.n_qubits();
    if n > MAX_DENSE_QUBITS {
        bail!(Capacity, "full-space diagonalisation is limited to {MAX_DENSE_QUBITS} qubits");
    }
    // Every sector's spectrum lies in [-2t(2L-2), 2t(2L-2) + U L]; a penalty
    // beyond that width separates N = L from the rest.
    let lambda = 1.0 + 4.0 * p.t * (2 * p.l) as f64 + p.u * p.l as f64;
    let mut m = dense_operator(&energy_operator(p, EnergyMode::Full))?;
    for b in 0..1usize << n {
        let excess = (n - b.count_ones() as usize) as f64 - p.l as f64;
        m[(b, b)] += lambda * excess * excess;
    }
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}
