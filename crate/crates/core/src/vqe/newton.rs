//! Damped Newton training over circuit angles and a Gaussian mode rotation.
//!
//! The cost is `Omega(theta, R) = <psi(theta)| S_R(H) |psi(theta)>`, where `S_R`
//! substitutes `g_j -> sum_k R_kj g_k` in the Majorana form of `H` (including
//! `-mu N`). The rotation is kept as a base matrix and every iterate expands
//! around it as `R = R_base exp(4 h(phi))` with `phi = 0`, so the `phi`
//! derivatives are derivations of `H` followed by one substitution.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gradient_engines, GradientEngine, VqeProblem};
use crate::ansatz::LayeredAnsatz;
use crate::error::{bail, Error, Result};
use crate::gaussian::{generator_from_angles, rotation_from_generator, so_dimension, GaussianRotation};
use crate::model::{build_majorana_hamiltonian, MajoranaPolynomial};
use crate::qsim::{PauliSum, RotationProgram, StateVector};

const PAULI_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    pub max_iters: usize,
    /// Initial Levenberg damping.
    pub damping: f64,
    pub max_damping: f64,
    pub grad_tol: f64,
    /// Stop once an accepted step lowers the cost by less than this.
    pub energy_tol: f64,
    pub optimize_theta: bool,
    pub optimize_phi: bool,
    /// Step for finite-differencing engine gradients in the angle block.
    pub fd_step: f64,
    pub gradient: String,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            damping: 1e-3,
            max_damping: 1e12,
            grad_tol: 1e-9,
            energy_tol: 1e-12,
            optimize_theta: true,
            optimize_phi: true,
            fd_step: 1e-4,
            gradient: super::DEFAULT_ENGINE.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonIteration {
    pub iter: usize,
    pub omega: f64,
    /// `Omega + mu L`.
    pub energy: f64,
    pub grad_norm: f64,
    pub damping: f64,
    pub step_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonTrace {
    pub initial_energy: f64,
    pub final_energy: f64,
    pub iterations: Vec<NewtonIteration>,
    pub theta: Vec<f64>,
    /// Final mode rotation, row-major.
    pub rotation: Vec<Vec<f64>>,
    pub stop_reason: String,
}

pub struct NewtonProblem {
    pub vqe: VqeProblem,
    pub ansatz: LayeredAnsatz,
    pub hamiltonian: MajoranaPolynomial,
    program: RotationProgram,
    pairs: Vec<(usize, usize)>,
}

/// `exp(4 h(phi))` with `h` filled from the strict upper triangle.
pub fn rotation_from_phi(n_modes: usize, phi: &[f64]) -> Result<GaussianRotation> {
    rotation_from_generator(&generator_from_angles(n_modes, phi)?)
}

impl NewtonProblem {
    pub fn new(vqe: VqeProblem, ansatz: LayeredAnsatz) -> Result<Self> {
        if ansatz.graph != vqe.graph {
            bail!(Argument, "ansatz and problem use different grids");
        }
        let hamiltonian = build_majorana_hamiltonian(&vqe.model);
        let n = hamiltonian.n_modes();
        let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let program = ansatz.program();
        Ok(Self { vqe, ansatz, hamiltonian, program, pairs })
    }

    pub fn n_modes(&self) -> usize {
        self.hamiltonian.n_modes()
    }

    pub fn n_phi(&self) -> usize {
        so_dimension(self.n_modes())
    }

    /// `S_R(poly)` as a grid observable.
    fn observable(&self, poly: &MajoranaPolynomial, r: &GaussianRotation) -> Result<PauliSum> {
        self.vqe.on_grid(&poly.conjugate(&r.0)?.to_pauli_sum(PAULI_TOL)?)
    }

    fn state(&self, theta: &[f64]) -> Result<StateVector> {
        self.program.run(theta)
    }

    pub fn omega(&self, theta: &[f64], r: &GaussianRotation) -> Result<f64> {
        self.observable(&self.hamiltonian, r)?.expectation(&self.state(theta)?)
    }

    /// Gradient and Hessian of `Omega` over the active blocks, angles first.
    fn derivatives(
        &self,
        theta: &[f64],
        r: &GaussianRotation,
        cfg: &NewtonConfig,
        engine: &dyn GradientEngine,
    ) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let state = self.state(theta)?;
        let h_op = self.observable(&self.hamiltonian, r)?;
        let omega = h_op.expectation(&state)?;
        let nt = if cfg.optimize_theta { theta.len() } else { 0 };
        let np = if cfg.optimize_phi { self.pairs.len() } else { 0 };
        let mut g = DVector::zeros(nt + np);
        let mut b = DMatrix::zeros(nt + np, nt + np);

        let dh: Vec<MajoranaPolynomial> =
            if np > 0 { self.pairs.iter().map(|&(a, c)| self.hamiltonian.derivation(a, c)).collect() } else { Vec::new() };
        let g_ops: Vec<PauliSum> = dh
            .par_iter()
            .map(|d| self.observable(&d.scale(4.0.into()), r))
            .collect::<Result<_>>()?;
        for (k, op) in g_ops.iter().enumerate() {
            g[nt + k] = op.expectation(&state)?;
        }

        if np > 0 {
            let upper: Vec<(usize, usize)> = (0..np).flat_map(|j| (j..np).map(move |k| (j, k))).collect();
            let vals: Vec<f64> = upper
                .par_iter()
                .map(|&(j, k)| {
                    let (a, c) = self.pairs[j];
                    let (a2, c2) = self.pairs[k];
                    let sym = dh[k].derivation(a, c).add(&dh[j].derivation(a2, c2));
                    self.observable(&sym.scale(8.0.into()), r)?.expectation(&state)
                })
                .collect::<Result<_>>()?;
            for (&(j, k), v) in upper.iter().zip(vals) {
                b[(nt + j, nt + k)] = v;
                b[(nt + k, nt + j)] = v;
            }
        }

        if nt > 0 {
            let mut obs: Vec<&PauliSum> = vec![&h_op];
            obs.extend(g_ops.iter());
            let rows = engine.gradients(&self.program, theta, &obs)?;
            for i in 0..nt {
                g[i] = rows[0][i];
            }
            for k in 0..np {
                for i in 0..nt {
                    b[(i, nt + k)] = rows[k + 1][i];
                    b[(nt + k, i)] = rows[k + 1][i];
                }
            }
            let hstep = cfg.fd_step;
            let cols: Vec<Vec<f64>> = (0..nt)
                .into_par_iter()
                .map(|i| {
                    let mut tp = theta.to_vec();
                    tp[i] += hstep;
                    let mut tm = theta.to_vec();
                    tm[i] -= hstep;
                    let gp = engine.gradients(&self.program, &tp, &[&h_op])?.remove(0);
                    let gm = engine.gradients(&self.program, &tm, &[&h_op])?.remove(0);
                    Ok(gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * hstep)).collect())
                })
                .collect::<Result<_>>()?;
            for i in 0..nt {
                for j in 0..nt {
                    b[(i, j)] = 0.5 * (cols[i][j] + cols[j][i]);
                }
            }
        }
        Ok((omega, g, b))
    }
}

/// `-(B + lambda I)^{-1} g`, or `None` if the damped matrix is not positive
/// definite.
pub(crate) fn damped_step(b: &DMatrix<f64>, g: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let n = b.nrows();
    let m = b + DMatrix::<f64>::identity(n, n) * lambda;
    m.cholesky().map(|c| -c.solve(g))
}

/// Runs damped Newton from angles `theta0` and mode rotation `r0`.
pub fn advanced_newton_train(
    problem: &NewtonProblem,
    theta0: &[f64],
    r0: &GaussianRotation,
    cfg: &NewtonConfig,
) -> Result<NewtonTrace> {
    if theta0.len() != problem.ansatz.n_params() {
        bail!(Argument, "ansatz has {} parameters, got {}", problem.ansatz.n_params(), theta0.len());
    }
    if r0.n_modes() != problem.n_modes() {
        bail!(Argument, "rotation acts on {} modes, Hamiltonian has {}", r0.n_modes(), problem.n_modes());
    }
    r0.validate()?;
    if !(cfg.damping > 0.0 && cfg.max_damping >= cfg.damping && cfg.fd_step > 0.0) {
        bail!(Argument, "damping and finite-difference step must be positive");
    }
    let engine = gradient_engines().get(&cfg.gradient)?;
    let shift = problem.vqe.model.mu * problem.vqe.model.l as f64;
    let nt = if cfg.optimize_theta { theta0.len() } else { 0 };
    let mut theta = theta0.to_vec();
    let mut r = r0.clone();
    let mut lambda = cfg.damping;
    let mut iterations = Vec::new();
    let mut omega = problem.omega(&theta, &r)?;
    let initial_energy = omega + shift;
    let mut stop_reason = "iteration limit".to_string();

    for iter in 0..cfg.max_iters {
        let (om, g, b) = problem.derivatives(&theta, &r, cfg, engine)?;
        omega = om;
        let grad_norm = g.amax();
        if !grad_norm.is_finite() || b.iter().any(|v| !v.is_finite()) {
            bail!(Numerical, "non-finite derivatives at iteration {iter}");
        }
        if grad_norm <= cfg.grad_tol {
            stop_reason = "gradient below tolerance".into();
            break;
        }
        let mut accepted = None;
        let mut factorised = false;
        while lambda <= cfg.max_damping {
            let Some(d) = damped_step(&b, &g, lambda) else {
                lambda *= 10.0;
                continue;
            };
            factorised = true;
            let tn: Vec<f64> = theta.iter().zip(d.iter()).map(|(t, s)| t + s).collect();
            let theta_new = if nt > 0 { tn } else { theta.clone() };
            let r_new = if cfg.optimize_phi {
                let phi = &d.as_slice()[nt..];
                GaussianRotation(&r.0 * rotation_from_phi(problem.n_modes(), phi)?.0)
            } else {
                r.clone()
            };
            let o = problem.omega(&theta_new, &r_new)?;
            if o < omega {
                accepted = Some((theta_new, r_new, o, d.amax()));
                break;
            }
            lambda *= 10.0;
        }
        let Some((tn, rn, o, step)) = accepted else {
            if !factorised {
                return Err(Error::Stall(format!(
                    "damped Hessian not positive definite up to damping {:e}",
                    cfg.max_damping
                )));
            }
            stop_reason = "no decrease at maximum damping".into();
            break;
        };
        let decrease = omega - o;
        iterations.push(NewtonIteration { iter, omega: o, energy: o + shift, grad_norm, damping: lambda, step_norm: step });
        theta = tn;
        r = rn;
        omega = o;
        lambda = (lambda / 10.0).max(1e-12);
        if decrease < cfg.energy_tol {
            stop_reason = "energy change below tolerance".into();
            break;
        }
    }
    Ok(NewtonTrace {
        initial_energy,
        final_energy: omega + shift,
        iterations,
        theta,
        rotation: r.0.row_iter().map(|row| row.iter().copied().collect()).collect(),
        stop_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_ansatz, build_grid};
    use crate::model::HubbardParams;

    #[test]
    fn zero_gradient_gives_zero_step() {
        let b = DMatrix::from_row_slice(2, 2, &[-3.0, 1.0, 1.0, 2.0]);
        let g = DVector::zeros(2);
        for lambda in [1e-3, 1.0, 10.0] {
            if let Some(d) = damped_step(&b, &g, lambda) {
                assert_eq!(d.amax(), 0.0);
            }
        }
        assert!(damped_step(&b, &g, 1e-3).is_none());
    }

    #[test]
    fn identity_rotation_matches_qubit_energy() {
        let g = build_grid(2, 2).unwrap();
        let p = HubbardParams::half_filling(2, 1.0, 8.0).unwrap();
        let vqe = VqeProblem::new(p, &g, "interleaved").unwrap();
        let a = build_ansatz(&g, 5, None).unwrap();
        let theta: Vec<f64> = (0..a.n_params()).map(|k| (k as f64 * 0.37).sin()).collect();
        let e = vqe.evaluate(&a, &theta).unwrap();
        let np = NewtonProblem::new(vqe, a).unwrap();
        let om = np.omega(&theta, &GaussianRotation::identity(8)).unwrap();
        assert!((om + p.mu * 2.0 - e.energy).abs() < 1e-10);
    }

    #[test]
    fn phi_gradient_matches_finite_differences() {
        let g = build_grid(2, 2).unwrap();
        let p = HubbardParams::half_filling(2, 1.0, 4.0).unwrap();
        let a = build_ansatz(&g, 2, None).unwrap();
        let np = NewtonProblem::new(VqeProblem::new(p, &g, "interleaved").unwrap(), a).unwrap();
        let theta: Vec<f64> = (0..np.ansatz.n_params()).map(|k| 0.3 + 0.1 * k as f64).collect();
        let phi0: Vec<f64> = (0..np.n_phi()).map(|k| 0.02 * ((k * 7 % 11) as f64 - 5.0)).collect();
        let r = rotation_from_phi(8, &phi0).unwrap();
        let cfg = NewtonConfig::default();
        let engine = gradient_engines().get("shift").unwrap();
        let (om, grad, hess) = np.derivatives(&theta, &r, &cfg, engine).unwrap();
        assert!((om - np.omega(&theta, &r).unwrap()).abs() < 1e-12);
        let nt = theta.len();
        let h = 1e-5;
        let at = |phi: &[f64]| np.omega(&theta, &GaussianRotation(&r.0 * rotation_from_phi(8, phi).unwrap().0)).unwrap();
        for k in [0, 5, 13, 27] {
            let mut e = vec![0.0; np.n_phi()];
            e[k] = h;
            let plus = at(&e);
            e[k] = -h;
            let minus = at(&e);
            assert!(((plus - minus) / (2.0 * h) - grad[nt + k]).abs() < 1e-6);
            let second = (plus - 2.0 * om + minus) / (h * h);
            assert!((second - hess[(nt + k, nt + k)]).abs() < 1e-3, "{second} vs {}", hess[(nt + k, nt + k)]);
        }
        assert!((&hess - hess.transpose()).amax() < 1e-12);
    }
}
