//! One-dimensional Fermi-Hubbard model: parameters, Jordan-Wigner layout,
//! qubit and Majorana Hamiltonians, the infinite-chain reference density and
//! exact diagonalisation.
//!
//! An occupied spin orbital is the `Z = +1` eigenstate, so `|0...0>` is the
//! completely filled lattice and `N = L + (1/2) sum_q Z_q`.

mod bethe;
mod ed;
mod majorana;

pub use bethe::{bessel_j0, bessel_j1, bethe_energy_density, bethe_cutoff};
pub use ed::{
    dense_operator, dense_spectrum, exact_ground_energy, exact_ground_energy_penalized,
    exact_ground_energy_with, exact_spectrum_min, SectorSolver, MAX_ED_QUBITS,
};
pub use majorana::{build_majorana_hamiltonian, MajoranaPolynomial};

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::qsim::{Pauli, PauliString, PauliSum, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    #[serde(rename = "L")]
    pub l: usize,
    pub t: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub mu: f64,
}

impl HubbardParams {
    /// `t = 0` is accepted for the atomic limit; energy densities still need `t > 0`.
    pub fn new(l: usize, t: f64, u: f64, mu: f64) -> Result<Self> {
        if l == 0 {
            bail!(Argument, "L must be at least 1");
        }
        if !(t.is_finite() && t >= 0.0) {
            bail!(Argument, "hopping t must be finite and non-negative, got {t}");
        }
        if !(u.is_finite() && u >= 0.0) {
            bail!(Argument, "interaction U must be finite and non-negative, got {u}");
        }
        if !mu.is_finite() {
            bail!(Argument, "chemical potential must be finite, got {mu}");
        }
        Ok(Self { l, t, u, mu })
    }

    /// Half filling: `mu = U / 2`.
    pub fn half_filling(l: usize, t: f64, u: f64) -> Result<Self> {
        Self::new(l, t, u, u / 2.0)
    }

    pub fn is_half_filling(&self) -> bool {
        self.mu == self.u / 2.0
    }

    /// Particle number at half filling.
    pub fn target_n(&self) -> usize {
        self.l
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.l
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

/// Jordan-Wigner chain `1up, ..., Lup, Ldown, ..., 1down`. Sites are 0-based here.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JwLayout {
    l: usize,
}

impl JwLayout {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            bail!(Argument, "L must be at least 1");
        }
        Ok(Self { l })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_positions(&self) -> usize {
        2 * self.l
    }

    pub fn position(&self, site: usize, spin: Spin) -> usize {
        assert!(site < self.l, "site {site} out of range");
        match spin {
            Spin::Up => site,
            Spin::Down => 2 * self.l - 1 - site,
        }
    }

    pub fn orbital(&self, position: usize) -> (usize, Spin) {
        assert!(position < 2 * self.l, "position {position} out of range");
        if position < self.l {
            (position, Spin::Up)
        } else {
            (2 * self.l - 1 - position, Spin::Down)
        }
    }

    /// JW positions of nearest-neighbour hopping partners, up chain first.
    pub fn hopping_pairs(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for spin in [Spin::Up, Spin::Down] {
            for j in 0..self.l - 1 {
                let (a, b) = (self.position(j, spin), self.position(j + 1, spin));
                v.push((a.min(b), a.max(b)));
            }
        }
        v
    }

    /// `(up, down)` positions per site.
    pub fn onsite_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.l).map(|j| (self.position(j, Spin::Up), self.position(j, Spin::Down))).collect()
    }

    /// Distinct qubit pairs coupled by some two-qubit Hamiltonian term.
    pub fn interaction_pairs(&self) -> Vec<(usize, usize)> {
        let mut v = self.hopping_pairs();
        v.extend(self.onsite_pairs());
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn zz(a: usize, b: usize) -> [(usize, Pauli); 2] {
    [(a, Pauli::Z), (b, Pauli::Z)]
}

fn hopping_terms(jw: &JwLayout, t: f64) -> Vec<PauliString> {
    jw.hopping_pairs()
        .into_iter()
        .flat_map(|(a, b)| {
            [
                PauliString::new(t / 2.0, [(a, Pauli::X), (b, Pauli::X)]),
                PauliString::new(t / 2.0, [(a, Pauli::Y), (b, Pauli::Y)]),
            ]
        })
        .collect()
}

/// Qubit Hamiltonian `H` (including `-mu N`) on `2L` qubits. Zero
/// coefficients are kept so the term list has a fixed shape.
pub fn build_hamiltonian(p: &HubbardParams) -> PauliSum {
    let jw = JwLayout::new(p.l).expect("validated params");
    let mut terms = hopping_terms(&jw, p.t);
    for q in 0..p.n_qubits() {
        terms.push(PauliString::new(0.5 * (p.u / 2.0 - p.mu), [(q, Pauli::Z)]));
    }
    for (a, b) in jw.onsite_pairs() {
        terms.push(PauliString::new(p.u / 4.0, zz(a, b)));
    }
    terms.push(PauliString::identity(p.l as f64 * (p.u / 4.0 - p.mu)));
    PauliSum::from_terms(p.n_qubits(), terms).expect("terms lie inside the register")
}

/// `N = L + (1/2) sum_q Z_q`.
pub fn build_number_operator(l: usize) -> Result<PauliSum> {
    JwLayout::new(l)?;
    let mut n = PauliSum::new(2 * l);
    n.push(PauliString::identity(l as f64))?;
    for q in 0..2 * l {
        n.push(PauliString::new(0.5, [(q, Pauli::Z)]))?;
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyMode {
    /// `<H> + mu <N>`.
    Full,
    /// `(t/2) sum (<XX> + <YY>) + (U/4) sum (<ZZ> + 1)`; equals `Full` when `<N> = L`.
    HalfFillingForm,
}

/// The operator whose expectation is the variational energy in `mode`.
pub fn energy_operator(p: &HubbardParams, mode: EnergyMode) -> PauliSum {
    let jw = JwLayout::new(p.l).expect("validated params");
    let mut terms = hopping_terms(&jw, p.t);
    for (a, b) in jw.onsite_pairs() {
        terms.push(PauliString::new(p.u / 4.0, zz(a, b)));
        if mode == EnergyMode::Full {
            terms.push(PauliString::new(p.u / 4.0, [(a, Pauli::Z)]));
            terms.push(PauliString::new(p.u / 4.0, [(b, Pauli::Z)]));
        }
    }
    terms.push(PauliString::identity(p.l as f64 * p.u / 4.0));
    PauliSum::from_terms(p.n_qubits(), terms).expect("terms lie inside the register")
}

pub fn energy_expectation(state: &StateVector, p: &HubbardParams, mode: EnergyMode) -> Result<f64> {
    if state.n_qubits() != p.n_qubits() {
        bail!(Argument, "state has {} qubits, model needs {}", state.n_qubits(), p.n_qubits());
    }
    energy_operator(p, mode).expectation(state)
}

/// `E / (L t) - e_inf(U / t)`.
pub fn energy_density_deviation(energy: f64, p: &HubbardParams) -> Result<f64> {
    if p.t <= 0.0 {
        bail!(Argument, "energy density needs t > 0");
    }
    Ok(energy / (p.l as f64 * p.t) - bethe_energy_density(p.u / p.t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::new_zero_state;

    #[test]
    fn single_site_terms() {
        let p = HubbardParams::half_filling(1, 1.0, 8.0).unwrap();
        let h = build_hamiltonian(&p);
        let got: Vec<(String, f64)> = h.terms().iter().map(|t| (t.word.to_string(), t.coeff)).collect();
        assert_eq!(
            got,
            vec![
                ("Z@0".into(), 0.0),
                ("Z@1".into(), 0.0),
                ("Z@0 Z@1".into(), 2.0),
                ("".into(), -2.0)
            ]
        );
    }

    #[test]
    fn free_two_site_chain_is_pure_hopping() {
        let p = HubbardParams::new(2, 1.0, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&p).prune(0.0);
        assert_eq!(h.len(), 4);
        assert!(h.terms().iter().all(|t| t.coeff == 0.5 && t.word.weight() == 2));
    }

    #[test]
    fn term_count_and_locality() {
        for l in 1..=8 {
            let p = HubbardParams::half_filling(l, 1.0, 8.0).unwrap();
            let h = build_hamiltonian(&p);
            assert_eq!(h.len(), 4 * (l - 1) + 2 * l + l + 1);
            let pairs = JwLayout::new(l).unwrap().interaction_pairs();
            for t in h.terms() {
                assert!(t.word.weight() <= 2);
                if t.word.weight() == 2 {
                    let q: Vec<usize> = t.ops().iter().map(|o| o.0).collect();
                    assert!(pairs.contains(&(q[0], q[1])));
                }
            }
            assert_eq!(pairs.len(), 3 * l - 2);
        }
    }

    #[test]
    fn layout_is_a_bijection() {
        let jw = JwLayout::new(5).unwrap();
        for pos in 0..10 {
            let (s, spin) = jw.orbital(pos);
            assert_eq!(jw.position(s, spin), pos);
        }
        assert_eq!(jw.position(0, Spin::Down), 9);
    }

    #[test]
    fn number_operator_on_product_states() {
        let n = build_number_operator(2).unwrap();
        let full = new_zero_state(4).unwrap();
        assert!((n.expectation(&full).unwrap() - 4.0).abs() < 1e-15);
        let vac = StateVector::basis_state(4, 0b1111).unwrap();
        assert!(n.expectation(&vac).unwrap().abs() < 1e-15);
        let half = StateVector::basis_state(4, 0b0101).unwrap();
        assert!((n.expectation(&half).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn evaluator_modes() {
        let p = HubbardParams::half_filling(3, 1.0, 8.0).unwrap();
        let vac = StateVector::basis_state(6, 0b111111).unwrap();
        assert!(energy_expectation(&vac, &p, EnergyMode::Full).unwrap().abs() < 1e-14);
        let full = new_zero_state(6).unwrap();
        assert!((energy_expectation(&full, &p, EnergyMode::Full).unwrap() - 24.0).abs() < 1e-13);
        // The modes coincide on any N = L basis state.
        let s = StateVector::basis_state(6, 0b100110).unwrap();
        let a = energy_expectation(&s, &p, EnergyMode::Full).unwrap();
        let b = energy_expectation(&s, &p, EnergyMode::HalfFillingForm).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(energy_expectation(&new_zero_state(4).unwrap(), &p, EnergyMode::Full).is_err());
    }

    #[test]
    fn full_mode_operator_equals_h_plus_mu_n() {
        let p = HubbardParams::new(3, 0.7, 5.0, 1.3).unwrap();
        let mut sum = build_hamiltonian(&p);
        sum.extend_scaled(&build_number_operator(3).unwrap(), p.mu).unwrap();
        let diff = {
            let mut d = sum.to_op();
            for t in energy_operator(&p, EnergyMode::Full).terms() {
                d.add_term(t.word, (-t.coeff).into());
            }
            d
        };
        assert!(diff.is_zero(1e-14));
    }

    #[test]
    fn deviation_examples() {
        let p = HubbardParams::half_filling(2, 1.0, 8.0).unwrap();
        let e0 = bethe_energy_density(8.0).unwrap();
        assert!(energy_density_deviation(2.0 * e0, &p).unwrap().abs() < 1e-15);
        let q = HubbardParams::half_filling(2, 2.0, 16.0).unwrap();
        let d1 = energy_density_deviation(-0.4, &p).unwrap();
        let d2 = energy_density_deviation(-0.8, &q).unwrap();
        assert!((d1 - d2).abs() < 1e-12);
    }
}
