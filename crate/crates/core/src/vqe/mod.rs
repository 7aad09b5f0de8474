//! Variational energy evaluation, gradients, the constrained optimizer,
//! layer-by-layer training and the Gaussian-frame Newton trainer.

mod gradient;
mod newton;
mod sqp;
mod train;

pub use gradient::{
    gradient_engines, Adjoint, FiniteDifference, GradientEngine, ShiftRule, DEFAULT_ENGINE, DEFAULT_FD_STEP,
};
pub use newton::{advanced_newton_train, rotation_from_phi, NewtonConfig, NewtonIteration, NewtonProblem, NewtonTrace};
pub use sqp::{optimize_stage, Eval, Grad, SqpOptions, SqpResult, Termination};
pub use train::{layer_by_layer_train, DepthCapReport, StageRecord, TrainConfig, TrainTrace};

use serde::{Deserialize, Serialize};

use crate::ansatz::{make_ordering, CircuitOrdering, DeviceGraph, LayeredAnsatz};
use crate::error::{bail, Result};
use crate::model::{build_hamiltonian, build_number_operator, energy_operator, EnergyMode, HubbardParams};
use crate::qsim::{PauliSum, StateVector};

/// A Hubbard instance placed on a device grid through an ordering. All
/// observables act on grid qubits.
#[derive(Clone, Debug)]
pub struct VqeProblem {
    pub model: HubbardParams,
    pub graph: DeviceGraph,
    pub ordering: CircuitOrdering,
    /// `<H> + mu <N>`, the optimised objective.
    pub objective_op: PauliSum,
    pub number_op: PauliSum,
    /// `H` including `-mu N`.
    pub hamiltonian_op: PauliSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// `<H> + mu <N>`.
    pub objective: f64,
    /// `<N> - L`.
    pub residual: f64,
    /// `<H> + mu L`: equal to the objective when `<N> = L`, and never below
    /// the exact half-filling ground energy at `mu = U/2`.
    pub energy: f64,
}

impl VqeProblem {
    pub fn new(model: HubbardParams, graph: &DeviceGraph, ordering: &str) -> Result<Self> {
        let ordering = make_ordering(ordering, model.l, graph)?;
        Self::with_ordering(model, graph, ordering)
    }

    pub fn with_ordering(model: HubbardParams, graph: &DeviceGraph, ordering: CircuitOrdering) -> Result<Self> {
        let map = |op: &PauliSum| op.relabel(&ordering.qubit_of, graph.n_nodes());
        Ok(Self {
            objective_op: map(&energy_operator(&model, EnergyMode::Full))?,
            number_op: map(&build_number_operator(model.l)?)?,
            hamiltonian_op: map(&build_hamiltonian(&model))?,
            model,
            graph: graph.clone(),
            ordering,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.graph.n_nodes()
    }

    /// Relabels a JW-position observable onto the grid.
    pub fn on_grid(&self, op: &PauliSum) -> Result<PauliSum> {
        op.relabel(&self.ordering.qubit_of, self.n_qubits())
    }

    /// Angles preparing the basis state whose occupied JW positions are
    /// `occupied`.
    pub fn reference_params(&self, ansatz: &LayeredAnsatz, occupied: &[usize]) -> Result<Vec<f64>> {
        let n = 2 * self.model.l;
        if let Some(&p) = occupied.iter().find(|&&p| p >= n) {
            bail!(Argument, "JW position {p} out of range for {n} modes");
        }
        let flips: Vec<usize> = (0..n).filter(|p| !occupied.contains(p)).map(|p| self.ordering.qubit(p)).collect();
        ansatz.flip_params(&flips)
    }

    pub fn evaluate_state(&self, state: &StateVector) -> Result<Evaluation> {
        let objective = self.objective_op.expectation(state)?;
        let n = self.number_op.expectation(state)?;
        let h = self.hamiltonian_op.expectation(state)?;
        let l = self.model.l as f64;
        Ok(Evaluation { objective, residual: n - l, energy: h + self.model.mu * l })
    }

    pub fn evaluate(&self, ansatz: &LayeredAnsatz, params: &[f64]) -> Result<Evaluation> {
        if ansatz.graph != self.graph {
            bail!(Argument, "ansatz and problem use different grids");
        }
        self.evaluate_state(&ansatz.program().run(params)?)
    }
}

/// `<H> + mu <N>` of the circuit state.
pub fn objective(params: &[f64], ansatz: &LayeredAnsatz, problem: &VqeProblem) -> Result<f64> {
    Ok(problem.evaluate(ansatz, params)?.objective)
}

/// `<N> - L` of the circuit state.
pub fn constraint_residual(params: &[f64], ansatz: &LayeredAnsatz, problem: &VqeProblem) -> Result<f64> {
    Ok(problem.evaluate(ansatz, params)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_ansatz, build_grid};

    fn l2() -> (VqeProblem, LayeredAnsatz) {
        let g = build_grid(2, 2).unwrap();
        let p = HubbardParams::half_filling(2, 1.0, 8.0).unwrap();
        (VqeProblem::new(p, &g, "interleaved").unwrap(), build_ansatz(&g, 4, None).unwrap())
    }

    #[test]
    fn zero_parameters_give_the_filled_lattice() {
        let (prob, a) = l2();
        let x = vec![0.0; a.n_params()];
        assert!((objective(&x, &a, &prob).unwrap() - 16.0).abs() < 1e-12);
        assert!((constraint_residual(&x, &a, &prob).unwrap() - 2.0).abs() < 1e-12);
        assert!(objective(&x[1..], &a, &prob).is_err());
    }

    #[test]
    fn half_filled_basis_state_is_feasible() {
        let (prob, a) = l2();
        let x = prob.reference_params(&a, &[0, 2]).unwrap();
        assert!(constraint_residual(&x, &a, &prob).unwrap().abs() < 1e-12);
    }
}
