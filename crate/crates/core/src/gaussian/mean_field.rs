//! Slater-determinant reference states of the hopping chain.

use nalgebra::{DMatrix, SymmetricEigen};

use super::GaussianRotation;
use crate::error::{bail, Result};
use crate::model::{HubbardParams, JwLayout, Spin};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanFieldOptions {
    /// Iterate unrestricted Hartree-Fock to self-consistency instead of a
    /// single Hartree evaluation on the free orbitals.
    pub self_consistent: bool,
    pub max_iters: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanField {
    /// `<H> + mu <N>` of the determinant.
    pub energy: f64,
    /// Maps the reference product state onto the determinant: the state is
    /// `V^dag |ref>` for the `V` of this rotation.
    pub rotation: GaussianRotation,
    /// JW positions occupied in the reference product state.
    pub occupied: Vec<usize>,
    /// `<n_p>` per JW position.
    pub densities: Vec<f64>,
}

/// Lowest `n` eigenvectors of a symmetric block, ascending.
fn orbitals(block: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(block.clone());
    let mut order: Vec<usize> = (0..block.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(block.nrows(), block.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Hopping matrix of one spin chain in chain order (site 0 first).
fn chain_hopping(l: usize, t: f64) -> DMatrix<f64> {
    DMatrix::from_fn(l, l, |a, b| if a.abs_diff(b) == 1 { -t } else { 0.0 })
}

fn density(vecs: &DMatrix<f64>, filled: usize) -> Vec<f64> {
    (0..vecs.nrows()).map(|s| (0..filled).map(|k| vecs[(s, k)].powi(2)).sum()).collect()
}

/// Half-filled determinant with `ceil(L/2)` up and `floor(L/2)` down electrons
/// in the lowest orbitals, and its energy on the full Hamiltonian.
pub fn mean_field_state(p: &HubbardParams, opts: MeanFieldOptions) -> Result<MeanField> {
    let jw = JwLayout::new(p.l)?;
    let l = p.l;
    let (n_up, n_down) = (l.div_ceil(2), l / 2);
    let hop = chain_hopping(l, p.t);

    let solve = |field: &[f64]| orbitals(&(hop.clone() + DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(field)))).1;
    let mut up = solve(&vec![0.0; l]);
    let mut down = solve(&vec![0.0; l]);
    if opts.self_consistent {
        // Start from a Neel density (up on even sites, down on odd) and mix
        // the Hartree fields linearly to damp the usual two-cycle.
        let iters = if opts.max_iters == 0 { 500 } else { opts.max_iters };
        let mut nu: Vec<f64> = (0..l).map(|s| if s % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let mut nd: Vec<f64> = nu.iter().map(|n| 1.0 - n).collect();
        let mut converged = false;
        for _ in 0..iters {
            up = solve(&nd.iter().map(|n| p.u * n).collect::<Vec<_>>());
            down = solve(&nu.iter().map(|n| p.u * n).collect::<Vec<_>>());
            let (du, dd) = (density(&up, n_up), density(&down, n_down));
            let change = du.iter().zip(&nu).chain(dd.iter().zip(&nd)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            for (n, d) in nu.iter_mut().zip(&du) {
                *n = 0.5 * (*n + d);
            }
            for (n, d) in nd.iter_mut().zip(&dd) {
                *n = 0.5 * (*n + d);
            }
            if change < 1e-12 {
                converged = true;
                break;
            }
        }
        if !converged {
            bail!(Numerical, "self-consistent mean field did not converge in {iters} iterations");
        }
    }

    let (du, dd) = (density(&up, n_up), density(&down, n_down));
    let kinetic = |vecs: &DMatrix<f64>, filled: usize| -> f64 {
        (0..filled).map(|k| (vecs.column(k).transpose() * &hop * vecs.column(k))[(0, 0)]).sum()
    };
    let energy = kinetic(&up, n_up) + kinetic(&down, n_down) + p.u * du.iter().zip(&dd).map(|(a, b)| a * b).sum::<f64>();

    // Orbital matrix u in JW-position space: column `k` of the up block sits
    // at position k, column `k` of the down block at position L + k.
    let n = 2 * l;
    let mut u = DMatrix::zeros(n, n);
    for s in 0..l {
        for k in 0..l {
            u[(jw.position(s, Spin::Up), k)] = up[(s, k)];
            u[(jw.position(s, Spin::Down), l + k)] = down[(s, k)];
        }
    }
    // Mode rotation acting on both quadratures of every orbital; R = O^T.
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            r[(2 * b, 2 * a)] = u[(a, b)];
            r[(2 * b + 1, 2 * a + 1)] = u[(a, b)];
        }
    }
    let occupied = (0..n_up).chain(l..l + n_down).collect();
    let mut densities = vec![0.0; n];
    for s in 0..l {
        densities[jw.position(s, Spin::Up)] = du[s];
        densities[jw.position(s, Spin::Down)] = dd[s];
    }
    Ok(MeanField { energy, rotation: GaussianRotation(r), occupied, densities })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_two_site_chain() {
        let p = HubbardParams::new(2, 1.0, 0.0, 0.0).unwrap();
        let mf = mean_field_state(&p, MeanFieldOptions::default()).unwrap();
        assert!((mf.energy + 2.0).abs() < 1e-14);
        mf.rotation.validate().unwrap();
    }

    #[test]
    fn atomic_limit_has_no_energy() {
        let p = HubbardParams::half_filling(4, 0.0, 8.0).unwrap();
        let mf = mean_field_state(&p, MeanFieldOptions::default()).unwrap();
        // With t = 0 the solver is free to pick any orbitals; the energy only
        // vanishes for a singly occupied lattice, which the self-consistent
        // loop finds.
        let sc = mean_field_state(&p, MeanFieldOptions { self_consistent: true, max_iters: 0 }).unwrap();
        assert!(sc.energy.abs() < 1e-12, "{}", sc.energy);
        assert!(mf.energy >= sc.energy - 1e-12);
    }

    #[test]
    fn self_consistency_lowers_the_energy() {
        let p = HubbardParams::half_filling(4, 1.0, 8.0).unwrap();
        let single = mean_field_state(&p, MeanFieldOptions::default()).unwrap();
        let sc = mean_field_state(&p, MeanFieldOptions { self_consistent: true, max_iters: 0 }).unwrap();
        assert!(sc.energy <= single.energy + 1e-12);
        let total: f64 = sc.densities.iter().sum();
        assert!((total - 4.0).abs() < 1e-12);
    }
}
