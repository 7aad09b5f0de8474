//! Fermionic Gaussian machinery: Majorana covariance matrices, matchgates and
//! the map from nearest-neighbour matchgate circuits to SO(2M) rotations.
//!
//! A rotation `R` belongs to the unitary `V` with
//! `V g_j V^dag = sum_k R_kj g_k`; covariances then transform as
//! `Gamma -> R Gamma R^T`.

mod mean_field;

pub use mean_field::{mean_field_state, MeanField, MeanFieldOptions};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{bail, Result};
use crate::model::MajoranaPolynomial;
use crate::qsim::{i_pow, Matrix4, Pauli, PauliString, PauliSum, PauliWord, StateVector};

/// JW word and phase of a single mode: `g_m = i^k W`.
pub fn mode_word(m: usize) -> PauliWord {
    let p = m / 2;
    let mut w = PauliWord::IDENTITY;
    for q in 0..p {
        w = w.with(q, Pauli::Z);
    }
    w.with(p, if m % 2 == 0 { Pauli::X } else { Pauli::Y })
}

/// `g_a g_b = i^k W` as `(k, W)`.
pub fn pair_word(a: usize, b: usize) -> (u32, PauliWord) {
    mode_word(a).mul(&mode_word(b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix(pub DMatrix<f64>);

/// `Gamma_kl = i <g_k g_l>` for `k != l` over the `2M` modes of an `M`-qubit state.
pub fn covariance_from_state(state: &StateVector, m: usize) -> Result<CovarianceMatrix> {
    if state.n_qubits() != m {
        bail!(Argument, "state has {} qubits, expected {m}", state.n_qubits());
    }
    let n = 2 * m;
    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let (k, w) = pair_word(a, b);
            let single = PauliSum::from_terms(m, vec![PauliString { word: w, coeff: 1.0 }])?;
            let v = Complex64::new(0.0, 1.0) * i_pow(k) * single.expectation(state)?;
            if v.im.abs() > 1e-10 {
                bail!(Numerical, "covariance entry ({a}, {b}) is not real: {v}");
            }
            g[(a, b)] = v.re;
            g[(b, a)] = -v.re;
        }
    }
    Ok(CovarianceMatrix(g))
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let asym = (&self.0 + self.0.transpose()).abs().max();
        if asym > 1e-12 {
            bail!(Numerical, "covariance is not antisymmetric (deviation {asym:e})");
        }
        let top = self.0.clone().singular_values().max();
        if top > 1.0 + 1e-10 {
            bail!(Numerical, "covariance singular value {top} exceeds 1");
        }
        Ok(())
    }

    /// Williamson values: the singular values, which come in equal pairs.
    pub fn williamson_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.0.clone().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv.into_iter().step_by(2).collect()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.williamson_values().iter().all(|v| (v - 1.0).abs() <= tol)
    }

    pub fn transformed(&self, r: &GaussianRotation) -> CovarianceMatrix {
        CovarianceMatrix(&r.0 * &self.0 * r.0.transpose())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.0.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianRotation(pub DMatrix<f64>);

impl GaussianRotation {
    pub fn identity(n_modes: usize) -> Self {
        Self(DMatrix::identity(n_modes, n_modes))
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes();
        let orth = (&self.0 * self.0.transpose() - DMatrix::<f64>::identity(n, n)).abs().max();
        if orth > 1e-10 {
            bail!(Numerical, "rotation is not orthogonal (deviation {orth:e})");
        }
        let d = self.0.determinant();
        if (d - 1.0).abs() > 1e-10 {
            bail!(Numerical, "rotation has determinant {d}");
        }
        Ok(())
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &GaussianRotation) -> GaussianRotation {
        GaussianRotation(&self.0 * &first.0)
    }
}

/// `R = exp(4 h)` for real antisymmetric `h`.
pub fn rotation_from_generator(h: &DMatrix<f64>) -> Result<GaussianRotation> {
    if !h.is_square() {
        bail!(Argument, "generator must be square");
    }
    let asym = (h + h.transpose()).abs().max();
    if asym > 1e-12 {
        bail!(Argument, "generator is not antisymmetric (deviation {asym:e})");
    }
    Ok(GaussianRotation((h * 4.0).exp()))
}

/// Number of independent angles of an SO(n) rotation.
pub fn so_dimension(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Antisymmetric matrix from its strict upper triangle, row by row.
pub fn generator_from_angles(n: usize, angles: &[f64]) -> Result<DMatrix<f64>> {
    if angles.len() != so_dimension(n) {
        bail!(Argument, "SO({n}) needs {} angles, got {}", so_dimension(n), angles.len());
    }
    let mut h = DMatrix::zeros(n, n);
    let mut it = angles.iter();
    for a in 0..n {
        for b in a + 1..n {
            let v = *it.next().unwrap();
            h[(a, b)] = v;
            h[(b, a)] = -v;
        }
    }
    Ok(h)
}

/// Two-qubit gate acting as `a` on span{|00>, |11>} and `b` on span{|01>, |10>}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matchgate {
    pub a: Matrix2<Complex64>,
    pub b: Matrix2<Complex64>,
}

pub fn matchgate_unitary(m: &Matchgate) -> Result<Matrix4> {
    let (da, db) = (m.a.determinant(), m.b.determinant());
    if (da - db).norm() > 1e-12 {
        bail!(Argument, "matchgate blocks have different determinants ({da} vs {db})");
    }
    let z = Complex64::new(0.0, 0.0);
    let (a, b) = (&m.a, &m.b);
    Ok([
        [a[(0, 0)], z, z, a[(0, 1)]],
        [z, b[(0, 0)], b[(0, 1)], z],
        [z, b[(1, 0)], b[(1, 1)], z],
        [a[(1, 0)], z, z, a[(1, 1)]],
    ])
}

/// Gates accepted by [`rotation_from_circuit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircuitGate {
    /// `exp(i angle W)`.
    Rotation { word: PauliWord, angle: f64 },
    /// Matchgate on qubits `(q, q + 1)` with `q` as the first factor.
    Matchgate { q: usize, gate: Matchgate },
}

impl CircuitGate {
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match self {
            CircuitGate::Rotation { word, angle } => state.apply_pauli_rotation(*word, *angle),
            CircuitGate::Matchgate { q, gate } => state.apply_2q(*q, q + 1, &matchgate_unitary(gate)?),
        }
    }
}

/// Real antisymmetric `B` with `word = (i/4) sum B_ab g_a g_b`, if the word
/// is quadratic in Majoranas on one or two neighbouring qubits.
fn quadratic_form_of(word: &PauliWord, n_modes: usize) -> Option<DMatrix<f64>> {
    let lo = (word.support().trailing_zeros() as usize).min(n_modes / 2);
    let modes = (2 * lo)..(2 * lo + 4).min(n_modes);
    for a in modes.clone() {
        for b in modes.clone().filter(|&b| b > a) {
            let (k, w) = pair_word(a, b);
            if w != *word {
                continue;
            }
            // word = i^{-k} g_a g_b and (i/4)(B_ab - B_ba) = i^{-k}.
            let c = i_pow(4 - k % 4);
            debug_assert!(c.re == 0.0);
            let mut m = DMatrix::zeros(n_modes, n_modes);
            m[(a, b)] = 2.0 * c.im;
            m[(b, a)] = -2.0 * c.im;
            return Some(m);
        }
    }
    None
}

/// Local SO(4) block of a matchgate from `R_kj = tr(g_k G g_j G^dag) / 4`.
fn matchgate_block(gate: &Matchgate) -> Result<DMatrix<f64>> {
    let u = matchgate_unitary(gate)?;
    let to_mat = |m: &Matrix4| nalgebra::Matrix4::from_fn(|r, c| m[r][c]);
    let g = to_mat(&u);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let x = Matrix2::new(zero, one, one, zero);
    let y = Matrix2::new(zero, -i, i, zero);
    let zm = Matrix2::new(one, zero, zero, -one);
    let id = Matrix2::identity();
    let modes = [x.kronecker(&id), y.kronecker(&id), zm.kronecker(&x), zm.kronecker(&y)];
    let mut block = DMatrix::zeros(4, 4);
    for (j, gj) in modes.iter().enumerate() {
        let conj = g * gj * g.adjoint();
        for (k, gk) in modes.iter().enumerate() {
            let v = (gk * conj).trace() / 4.0;
            if v.im.abs() > 1e-10 {
                bail!(Classification, "gate does not map Majoranas to real combinations");
            }
            block[(k, j)] = v.re;
        }
    }
    let orth = (&block * block.transpose() - DMatrix::<f64>::identity(4, 4)).abs().max();
    if orth > 1e-9 || block.determinant() < 0.0 {
        bail!(Classification, "gate is not a parity-preserving matchgate");
    }
    Ok(block)
}

/// SO(2M) rotation of a circuit of nearest-neighbour matchgates on `m` qubits.
pub fn rotation_from_circuit(m: usize, gates: &[CircuitGate]) -> Result<GaussianRotation> {
    let n = 2 * m;
    let mut r = DMatrix::<f64>::identity(n, n);
    for gate in gates {
        let g = match gate {
            CircuitGate::Rotation { word, angle } => {
                if word.span() > m {
                    bail!(Argument, "gate '{word}' outside a {m}-qubit line");
                }
                if *angle == 0.0 || word.is_identity() {
                    continue;
                }
                let b = quadratic_form_of(word, n).ok_or_else(|| {
                    crate::Error::Classification(format!("'{word}' is not a nearest-neighbour quadratic generator"))
                })?;
                // exp(i angle W) = exp(-i K) with K = (i/4) sum (-angle B)_ab g_a g_b.
                (b * -angle).exp()
            }
            CircuitGate::Matchgate { q, gate } => {
                if q + 1 >= m {
                    bail!(Argument, "matchgate on ({q}, {}) outside a {m}-qubit line", q + 1);
                }
                let block = matchgate_block(gate)?;
                let mut full = DMatrix::<f64>::identity(n, n);
                full.view_mut((2 * q, 2 * q), (4, 4)).copy_from(&block);
                full
            }
        };
        r = g * r;
    }
    Ok(GaussianRotation(r))
}

/// Substitutes `g_j -> sum_k R_kj g_k`; a quadratic part with matrix `h`
/// becomes `R h R^T`.
pub fn conjugate_hamiltonian(h: &MajoranaPolynomial, r: &GaussianRotation) -> Result<MajoranaPolynomial> {
    h.conjugate(&r.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::new_zero_state;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn zero_state_covariance() {
        let c = covariance_from_state(&new_zero_state(3).unwrap(), 3).unwrap();
        for p in 0..3 {
            assert_eq!(c.0[(2 * p, 2 * p + 1)], -1.0);
            assert_eq!(c.0[(2 * p + 1, 2 * p)], 1.0);
        }
        assert_eq!(c.0.abs().sum(), 6.0);
        c.validate().unwrap();
        assert!(c.is_pure(1e-12));
    }

    #[test]
    fn bell_pair_blocks_vanish() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![h.into(), 0.0.into(), 0.0.into(), h.into()];
        let c = covariance_from_state(&StateVector::from_amplitudes(amps).unwrap(), 2).unwrap();
        for p in 0..2 {
            assert_eq!(c.0[(2 * p, 2 * p + 1)], 0.0);
        }
        assert!((0..4).all(|k| c.0[(k, k)] == 0.0));
    }

    #[test]
    fn z_rotation_turns_its_mode_plane_by_twice_the_angle() {
        let a = 0.3;
        let r = rotation_from_circuit(2, &[CircuitGate::Rotation { word: PauliWord::single(1, Pauli::Z), angle: a }])
            .unwrap();
        let block = r.0.view((2, 2), (2, 2)).into_owned();
        let (c, s) = ((2.0 * a).cos(), (2.0 * a).sin());
        // V g_2 V^dag = cos g_2 - sin g_3: column 2 of R is (c, -s).
        assert!((block[(0, 0)] - c).abs() < 1e-15 && (block[(1, 0)] + s).abs() < 1e-15);
        assert!((r.0.view((0, 0), (2, 2)).into_owned() - Matrix2::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn non_gaussian_gates_are_rejected() {
        for word in [
            PauliWord::single(0, Pauli::X),
            PauliWord::from_ops([(0, Pauli::Z), (1, Pauli::Z)]),
            PauliWord::from_ops([(0, Pauli::X), (2, Pauli::X)]),
        ] {
            let err = rotation_from_circuit(3, &[CircuitGate::Rotation { word, angle: 0.2 }]);
            assert!(matches!(err, Err(crate::Error::Classification(_))), "{word}");
        }
        assert!(rotation_from_circuit(3, &[]).unwrap().0 == DMatrix::identity(6, 6));
    }

    #[test]
    fn matchgate_layout_and_det_check() {
        let one = Complex64::new(1.0, 0.0);
        let id = Matchgate { a: Matrix2::identity(), b: Matrix2::identity() };
        let u = matchgate_unitary(&id).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(u[r][c], if r == c { one } else { Complex64::default() });
            }
        }
        let bad = Matchgate { a: Matrix2::new(one, 0.0.into(), 0.0.into(), -one), b: Matrix2::identity() };
        assert!(matchgate_unitary(&bad).is_err());
    }

    #[test]
    fn exchange_matchgate_matches_the_f_gate() {
        // e^{-i pi/4 (XX + YY)}: identity on the even block, -i X on the odd block.
        let z = Complex64::new(0.0, 0.0);
        let mi = Complex64::new(0.0, -1.0);
        let m = Matchgate { a: Matrix2::identity(), b: Matrix2::new(z, mi, mi, z) };
        let u = matchgate_unitary(&m).unwrap();
        for b in 0..4usize {
            let mut s1 = StateVector::basis_state(2, b).unwrap();
            let mut s2 = s1.clone();
            s1.apply_2q(0, 1, &u).unwrap();
            let p = crate::qsim::FGateParams { theta: FRAC_PI_4, ..Default::default() };
            crate::qsim::apply_f_gate(&mut s2, 0, 1, &p).unwrap();
            for (x, y) in s1.amplitudes().iter().zip(s2.amplitudes()) {
                assert!((x - y).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn generator_exponential() {
        assert_eq!(rotation_from_generator(&DMatrix::zeros(4, 4)).unwrap().0, DMatrix::identity(4, 4));
        let a = 0.1;
        let h = DMatrix::from_row_slice(2, 2, &[0.0, a, -a, 0.0]);
        let r = rotation_from_generator(&h).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[(4.0 * a).cos(), (4.0 * a).sin(), -(4.0 * a).sin(), (4.0 * a).cos()]);
        assert!((r.0 - expect).abs().max() < 1e-15);
        assert!(rotation_from_generator(&DMatrix::identity(2, 2)).is_err());
        assert_eq!(so_dimension(8), 28);
        let h = generator_from_angles(4, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(h[(2, 3)], 6.0);
        assert_eq!(h[(3, 0)], -3.0);
    }

    #[test]
    fn csv_dump() {
        let c = covariance_from_state(&new_zero_state(1).unwrap(), 1).unwrap();
        assert_eq!(c.to_csv(), "0,-1\n1,0\n");
    }
}
