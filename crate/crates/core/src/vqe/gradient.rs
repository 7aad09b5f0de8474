//! Gradient engines for expectation values of rotation programs.

use std::f64::consts::FRAC_PI_4;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{bail, Result};
use crate::qsim::{PauliSum, PauliWord, RotationProgram, StateVector};
use crate::registry::{Named, Registry};

/// Computes `d<O_j>/d params` for several observables at once.
pub trait GradientEngine: Named + Send + Sync {
    fn gradients(&self, program: &RotationProgram, params: &[f64], observables: &[&PauliSum]) -> Result<Vec<Vec<f64>>>;
}

/// Two-point shift rule per elementary rotation; angles shared by several
/// rotations (the exchange angle) collect one term per rotation.
pub struct ShiftRule;

/// Central differences with step `h` per parameter.
pub struct FiniteDifference {
    pub h: f64,
}

/// Reverse-mode sweep: one forward run, then one backward pass per observable.
pub struct Adjoint;

impl Named for ShiftRule {
    fn name(&self) -> &'static str {
        "shift"
    }
}

impl Named for FiniteDifference {
    fn name(&self) -> &'static str {
        "finite-diff"
    }
}

impl Named for Adjoint {
    fn name(&self) -> &'static str {
        "adjoint"
    }
}

pub const DEFAULT_ENGINE: &str = "shift";
pub const DEFAULT_FD_STEP: f64 = 1e-4;

pub fn gradient_engines() -> &'static Registry<dyn GradientEngine> {
    static REG: OnceLock<Registry<dyn GradientEngine>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn GradientEngine> = Registry::new("gradient engine");
        r.register(Box::new(ShiftRule))
            .register(Box::new(FiniteDifference { h: DEFAULT_FD_STEP }))
            .register(Box::new(Adjoint));
        r
    })
}

fn check(program: &RotationProgram, observables: &[&PauliSum]) -> Result<()> {
    for o in observables {
        if o.n_qubits() != program.n_qubits {
            bail!(Argument, "observable on {} qubits, circuit on {}", o.n_qubits(), program.n_qubits);
        }
    }
    Ok(())
}

fn expectations(state: &StateVector, observables: &[&PauliSum]) -> Result<Vec<f64>> {
    observables.iter().map(|o| o.expectation(state)).collect()
}

impl GradientEngine for ShiftRule {
    fn gradients(&self, program: &RotationProgram, params: &[f64], observables: &[&PauliSum]) -> Result<Vec<Vec<f64>>> {
        check(program, observables)?;
        let per_op: Vec<Vec<f64>> = (0..program.ops.len())
            .into_par_iter()
            .map(|i| {
                let plus = expectations(&program.run_shifted(params, i, FRAC_PI_4)?, observables)?;
                let minus = expectations(&program.run_shifted(params, i, -FRAC_PI_4)?, observables)?;
                Ok(plus.iter().zip(&minus).map(|(p, m)| p - m).collect())
            })
            .collect::<Result<_>>()?;
        let mut out = vec![vec![0.0; program.n_params]; observables.len()];
        for (op, d) in program.ops.iter().zip(per_op) {
            for (g, v) in out.iter_mut().zip(d) {
                g[op.param] += op.sign * v;
            }
        }
        Ok(out)
    }
}

impl GradientEngine for FiniteDifference {
    fn gradients(&self, program: &RotationProgram, params: &[f64], observables: &[&PauliSum]) -> Result<Vec<Vec<f64>>> {
        check(program, observables)?;
        let cols: Vec<Vec<f64>> = (0..program.n_params)
            .into_par_iter()
            .map(|k| {
                let mut x = params.to_vec();
                x[k] = params[k] + self.h;
                let plus = expectations(&program.run(&x)?, observables)?;
                x[k] = params[k] - self.h;
                let minus = expectations(&program.run(&x)?, observables)?;
                Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * self.h)).collect())
            })
            .collect::<Result<_>>()?;
        Ok((0..observables.len()).map(|j| cols.iter().map(|c| c[j]).collect()).collect())
    }
}

/// `<a| W |b>`.
fn matrix_element(a: &[Complex64], word: &PauliWord, b: &[Complex64]) -> Complex64 {
    let x = word.x as usize;
    b.iter().enumerate().map(|(i, v)| a[i ^ x].conj() * word.phase_on(i as u64) * v).sum()
}

impl GradientEngine for Adjoint {
    fn gradients(&self, program: &RotationProgram, params: &[f64], observables: &[&PauliSum]) -> Result<Vec<Vec<f64>>> {
        check(program, observables)?;
        let state = program.run(params)?;
        observables
            .par_iter()
            .map(|o| {
                let mut psi = state.clone();
                let mut lambda = StateVector::from_raw(o.apply(state.amplitudes()));
                let mut g = vec![0.0; program.n_params];
                for op in program.ops.iter().rev() {
                    // d/da <O> for exp(i a W) at this point is -2 Im <lambda|W|psi>.
                    let m = matrix_element(lambda.amplitudes(), &op.word, psi.amplitudes());
                    g[op.param] += op.sign * -2.0 * m.im;
                    let angle = -op.sign * params[op.param];
                    psi.rotate_unchecked(op.word, angle);
                    lambda.rotate_unchecked(op.word, angle);
                }
                Ok(g)
            })
            .collect()
    }
}
