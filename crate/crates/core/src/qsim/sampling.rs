//! Shot sampling in the three product bases.
//!
//! Randomness comes from ChaCha8 seeded through [`crate::rng::stream`] with the
//! stream name `"shots"`; each shot draws one uniform `f64` and inverts the
//! cumulative distribution by binary search. Counts are keyed by bitstrings
//! written most-significant qubit first.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::StateVector;
use crate::error::{bail, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    AllX,
    AllY,
    AllZ,
}

pub fn sample_basis(
    state: &StateVector,
    basis: Basis,
    shots: usize,
    seed: u64,
) -> Result<BTreeMap<String, usize>> {
    if shots == 0 {
        bail!(Argument, "shots must be at least 1");
    }
    let mut s = state.clone();
    let h = FRAC_1_SQRT_2;
    let hadamard = [[Complex64::new(h, 0.0), Complex64::new(h, 0.0)], [
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
    ]];
    let s_dag = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, -1.0),
    ]];
    for q in 0..s.n_qubits() {
        match basis {
            Basis::AllZ => {}
            Basis::AllX => s.apply_1q(q, &hadamard)?,
            Basis::AllY => {
                s.apply_1q(q, &s_dag)?;
                s.apply_1q(q, &hadamard)?;
            }
        }
    }
    let mut cdf = Vec::with_capacity(s.dim());
    let mut acc = 0.0;
    for p in s.probabilities() {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = crate::rng::stream(seed, "shots", 0);
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        *hist.entry(idx).or_default() += 1;
    }
    let n = s.n_qubits();
    Ok(hist.into_iter().map(|(i, c)| (format!("{i:0n$b}"), c)).collect())
}
