//! Polynomials in Majorana operators with `{g_a, g_b} = 2 delta_ab`.
//!
//! Mode `2p` is `Z_{<p} X_p` and mode `2p + 1` is `Z_{<p} Y_p`, so
//! `Z_p = -i g_{2p} g_{2p+1}`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{HubbardParams, JwLayout};
use crate::error::{bail, Result};
use crate::qsim::{i_pow, Pauli, PauliOp, PauliSum, PauliWord};

type Monomial = Vec<u16>;

#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaPolynomial {
    n_modes: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

/// Sorts `modes` with anticommutation signs and cancels squares.
fn canonicalize(modes: &[u16]) -> (f64, Monomial) {
    let mut v = modes.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    let mut out: Monomial = Vec::with_capacity(v.len());
    for m in v {
        if out.last() == Some(&m) {
            out.pop();
        } else {
            out.push(m);
        }
    }
    (sign, out)
}

fn det(mut m: Vec<f64>, n: usize) -> f64 {
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a * n + c].abs().total_cmp(&m[b * n + c].abs())).unwrap();
        if m[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..n {
                m.swap(p * n + k, c * n + k);
            }
            d = -d;
        }
        let piv = m[c * n + c];
        d *= piv;
        for r in c + 1..n {
            let f = m[r * n + c] / piv;
            if f != 0.0 {
                for k in c..n {
                    m[r * n + k] -= f * m[c * n + k];
                }
            }
        }
    }
    d
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl MajoranaPolynomial {
    pub fn zero(n_modes: usize) -> Self {
        Self { n_modes, terms: BTreeMap::new() }
    }

    pub fn constant(n_modes: usize, c: f64) -> Self {
        let mut p = Self::zero(n_modes);
        p.add_monomial(Complex64::new(c, 0.0), &[]);
        p
    }

    /// `(i/4) sum_ab h_ab g_a g_b` for a real antisymmetric `h`.
    pub fn from_quadratic(h: &DMatrix<f64>) -> Self {
        let n = h.nrows();
        let mut p = Self::zero(n);
        for a in 0..n {
            for b in a + 1..n {
                let c = h[(a, b)] - h[(b, a)];
                if c != 0.0 {
                    p.add_monomial(Complex64::new(0.0, c / 4.0), &[a, b]);
                }
            }
        }
        p
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], Complex64)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, modes: &[usize]) -> Complex64 {
        let key: Monomial = modes.iter().map(|&m| m as u16).collect();
        self.terms.get(&key).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&[]).re
    }

    /// Adds `coeff * g_{m1} g_{m2} ...` in the given (arbitrary) order.
    pub fn add_monomial(&mut self, coeff: Complex64, modes: &[usize]) {
        assert!(modes.iter().all(|&m| m < self.n_modes), "mode index out of range");
        let raw: Vec<u16> = modes.iter().map(|&m| m as u16).collect();
        let (sign, key) = canonicalize(&raw);
        *self.terms.entry(key).or_default() += coeff * sign;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.n_modes = self.n_modes.max(other.n_modes);
        for (m, c) in &other.terms {
            *out.terms.entry(m.clone()).or_default() += c;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { n_modes: self.n_modes, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n_modes.max(other.n_modes));
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let joined: Vec<u16> = m1.iter().chain(m2).copied().collect();
                let (sign, key) = canonicalize(&joined);
                *out.terms.entry(key).or_default() += c1 * c2 * sign;
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self).scale(Complex64::new(-1.0, 0.0)))
    }

    /// Reversing a degree-d monomial gives sign `(-1)^{d(d-1)/2}`.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let d = m.len();
                let s = if (d * d.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                (m.clone(), c.conj() * s)
            })
            .collect();
        Self { n_modes: self.n_modes, terms }
    }

    pub fn prune(&self, tol: f64) -> Self {
        Self {
            n_modes: self.n_modes,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(m, c)| (m.clone(), *c)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<&Monomial> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|k| {
                let a = self.terms.get(k).copied().unwrap_or_default();
                let b = other.terms.get(k).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Real antisymmetric `h` with the quadratic part equal to `(i/4) sum h_ab g_a g_b`.
    pub fn quadratic_matrix(&self) -> Result<DMatrix<f64>> {
        let mut h = DMatrix::zeros(self.n_modes, self.n_modes);
        for (m, c) in &self.terms {
            if m.len() != 2 {
                continue;
            }
            if c.re.abs() > 1e-12 * (1.0 + c.norm()) {
                bail!(Numerical, "quadratic coefficient {c} is not Hermitian");
            }
            let (a, b) = (m[0] as usize, m[1] as usize);
            h[(a, b)] = 2.0 * c.im;
            h[(b, a)] = -2.0 * c.im;
        }
        Ok(h)
    }

    /// Substitutes `g_j -> sum_k R_kj g_k` in every monomial.
    ///
    /// For orthogonal `R` the images of distinct modes are again mutually
    /// anticommuting Majoranas, so the image of a canonical monomial is its
    /// fully antisymmetric part: `sum_K det(R[K, A]) g_K` over sorted index
    /// sets `K` of the same size.
    pub fn conjugate(&self, r: &DMatrix<f64>) -> Result<Self> {
        let n = self.n_modes;
        if r.nrows() != n || r.ncols() != n {
            bail!(Argument, "rotation is {}x{}, polynomial has {n} modes", r.nrows(), r.ncols());
        }
        let mut out = Self::zero(n);
        for (mono, c) in &self.terms {
            let d = mono.len();
            if d == 0 {
                *out.terms.entry(Vec::new()).or_default() += c;
                continue;
            }
            combinations(n, d, |rows| {
                let mut sub = Vec::with_capacity(d * d);
                for &k in rows {
                    for &a in mono {
                        sub.push(r[(k, a as usize)]);
                    }
                }
                let v = det(sub, d);
                if v != 0.0 {
                    let key: Monomial = rows.iter().map(|&k| k as u16).collect();
                    *out.terms.entry(key).or_default() += c * v;
                }
            });
        }
        Ok(out)
    }

    /// Applies the derivation with `d(g_b) = g_a` and `d(g_a) = -g_b`: the
    /// first-order change of the polynomial under a rotation by a small angle
    /// in the `(a, b)` mode plane.
    pub fn derivation(&self, a: usize, b: usize) -> Self {
        let (a, b) = (a as u16, b as u16);
        let mut out = Self::zero(self.n_modes);
        for (mono, c) in &self.terms {
            for (pos, &m) in mono.iter().enumerate() {
                let (target, sign) = if m == b {
                    (a, 1.0)
                } else if m == a {
                    (b, -1.0)
                } else {
                    continue;
                };
                let mut raw = mono.clone();
                raw[pos] = target;
                let (s, key) = canonicalize(&raw);
                *out.terms.entry(key).or_default() += c * (s * sign);
            }
        }
        out
    }

    /// Jordan-Wigner image as a complex Pauli operator on `n_modes / 2` qubits.
    pub fn to_pauli_op(&self) -> PauliOp {
        let n_qubits = self.n_modes.div_ceil(2);
        let mode_word = |m: u16| {
            let p = (m / 2) as usize;
            let mut w = PauliWord::IDENTITY;
            for q in 0..p {
                w = w.with(q, Pauli::Z);
            }
            w.with(p, if m % 2 == 0 { Pauli::X } else { Pauli::Y })
        };
        let mut op = PauliOp::new(n_qubits);
        for (mono, c) in &self.terms {
            let mut k = 0;
            let mut w = PauliWord::IDENTITY;
            for &m in mono {
                let (kk, ww) = w.mul(&mode_word(m));
                k += kk;
                w = ww;
            }
            op.add_term(w, i_pow(k) * c);
        }
        op
    }

    pub fn to_pauli_sum(&self, tol: f64) -> Result<PauliSum> {
        self.to_pauli_op().prune(tol).to_real_sum(tol)
    }
}

/// `Z_p` as `-i g_{2p} g_{2p+1}`.
fn z_mode(n_modes: usize, p: usize) -> MajoranaPolynomial {
    let mut z = MajoranaPolynomial::zero(n_modes);
    z.add_monomial(Complex64::new(0.0, -1.0), &[2 * p, 2 * p + 1]);
    z
}

/// Majorana form of the qubit Hamiltonian `H`, built from
/// `X_p X_{p+1} = -i g_{2p+1} g_{2p+2}`, `Y_p Y_{p+1} = i g_{2p} g_{2p+3}` and
/// `Z_p = -i g_{2p} g_{2p+1}`.
pub fn build_majorana_hamiltonian(p: &HubbardParams) -> MajoranaPolynomial {
    let jw = JwLayout::new(p.l).expect("validated params");
    let n = 2 * p.n_qubits();
    let mut h = MajoranaPolynomial::zero(n);
    for (a, b) in jw.hopping_pairs() {
        debug_assert_eq!(b, a + 1);
        h.add_monomial(Complex64::new(0.0, -p.t / 2.0), &[2 * a + 1, 2 * b]);
        h.add_monomial(Complex64::new(0.0, p.t / 2.0), &[2 * a, 2 * b + 1]);
    }
    let zc = 0.5 * (p.u / 2.0 - p.mu);
    for q in 0..p.n_qubits() {
        h = h.add(&z_mode(n, q).scale(zc.into()));
    }
    for (a, b) in jw.onsite_pairs() {
        h = h.add(&z_mode(n, a).mul(&z_mode(n, b)).scale((p.u / 4.0).into()));
    }
    h.add(&MajoranaPolynomial::constant(n, p.l as f64 * (p.u / 4.0 - p.mu)))
}
