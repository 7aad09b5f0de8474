//! Pauli words, real-weighted Pauli sums (observables) and a complex Pauli
//! algebra used for symbolic checks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::StateVector;
use crate::error::{bail, Error, Result};

pub const MAX_PAULI_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `i^k` for `k` taken mod 4.
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Hermitian Pauli word `i^{|x & z|} X^x Z^z` on up to 64 qubits.
///
/// A qubit with both bits set carries `Y = iXZ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord {
    pub x: u64,
    pub z: u64,
}

impl PauliWord {
    pub const IDENTITY: PauliWord = PauliWord { x: 0, z: 0 };

    pub fn single(qubit: usize, p: Pauli) -> Self {
        Self::IDENTITY.with(qubit, p)
    }

    pub fn from_ops<I: IntoIterator<Item = (usize, Pauli)>>(ops: I) -> Self {
        ops.into_iter().fold(Self::IDENTITY, |w, (q, p)| w.with(q, p))
    }

    /// Replaces the operator on `qubit`.
    pub fn with(mut self, qubit: usize, p: Pauli) -> Self {
        assert!(qubit < MAX_PAULI_QUBITS, "qubit index {qubit} exceeds Pauli word width");
        let m = 1u64 << qubit;
        self.x &= !m;
        self.z &= !m;
        let (x, z) = p.bits();
        if x {
            self.x |= m;
        }
        if z {
            self.z |= m;
        }
        self
    }

    pub fn get(&self, qubit: usize) -> Option<Pauli> {
        let m = 1u64 << qubit;
        match (self.x & m != 0, self.z & m != 0) {
            (false, false) => None,
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
        }
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    /// Highest qubit touched plus one (0 for the identity).
    pub fn span(&self) -> usize {
        64 - self.support().leading_zeros() as usize
    }

    pub fn ops(&self) -> Vec<(usize, Pauli)> {
        let s = self.support();
        (0..64).filter(|q| s >> q & 1 == 1).map(|q| (q, self.get(q).unwrap())).collect()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Product `self * other = i^k * word`, returned as `(k mod 4, word)`.
    pub fn mul(&self, other: &PauliWord) -> (u32, PauliWord) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // Move Z^{z1} past X^{x2}: one sign per overlapping qubit.
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones() + 4
            - (x & z).count_ones() % 4;
        (k % 4, PauliWord { x, z })
    }

    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// `W|b> = phase(b) |b ^ x>`.
    #[inline]
    pub fn phase_on(&self, basis: u64) -> Complex64 {
        let sign = (self.z & basis).count_ones() & 1;
        i_pow(self.y_count() + 2 * sign)
    }

    /// Relabels qubit `q` to `map[q]`.
    pub fn relabel(&self, map: &[usize]) -> PauliWord {
        PauliWord::from_ops(self.ops().into_iter().map(|(q, p)| (map[q], p)))
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (q, p) in self.ops() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}@{}", p.symbol(), q)?;
        }
        Ok(())
    }
}

/// Real coefficient times a Pauli word.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliString {
    pub word: PauliWord,
    pub coeff: f64,
}

impl PauliString {
    pub fn new<I: IntoIterator<Item = (usize, Pauli)>>(coeff: f64, ops: I) -> Self {
        Self { word: PauliWord::from_ops(ops), coeff }
    }

    pub fn identity(coeff: f64) -> Self {
        Self { word: PauliWord::IDENTITY, coeff }
    }

    pub fn ops(&self) -> Vec<(usize, Pauli)> {
        self.word.ops()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        if !self.word.is_identity() {
            write!(f, " {}", self.word)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        let coeff: f64 = match tokens.next() {
            Some(tok) => tok.parse().map_err(|_| Error::Parse(format!("bad coefficient '{tok}'")))?,
            None => bail!(Parse, "empty Pauli term"),
        };
        let mut word = PauliWord::IDENTITY;
        for tok in tokens {
            let (op, q) = tok
                .split_once('@')
                .ok_or_else(|| Error::Parse(format!("expected op@qubit, got '{tok}'")))?;
            let p = match op {
                "X" => Pauli::X,
                "Y" => Pauli::Y,
                "Z" => Pauli::Z,
                _ => bail!(Parse, "unknown Pauli '{op}'"),
            };
            let q: usize = q.parse().map_err(|_| Error::Parse(format!("bad qubit index in '{tok}'")))?;
            if q >= MAX_PAULI_QUBITS {
                bail!(Parse, "qubit index {q} too large");
            }
            if word.get(q).is_some() {
                bail!(Parse, "qubit {q} repeated in '{line}'");
            }
            word = word.with(q, p);
        }
        Ok(PauliString { word, coeff })
    }
}

/// Hermitian observable: real-weighted sum of Pauli strings on `n_qubits` qubits.
///
/// Terms keep their insertion order, so evaluation is reproducible bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        let mut s = Self::new(n_qubits);
        for t in terms {
            s.push(t)?;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        if term.word.span() > self.n_qubits {
            bail!(Argument, "term '{term}' acts outside a {}-qubit register", self.n_qubits);
        }
        self.terms.push(term);
        Ok(())
    }

    /// Appends all terms of `other` scaled by `scale`.
    pub fn extend_scaled(&mut self, other: &PauliSum, scale: f64) -> Result<()> {
        for t in &other.terms {
            self.push(PauliString { word: t.word, coeff: t.coeff * scale })?;
        }
        Ok(())
    }

    /// Merges equal words (first occurrence keeps its position).
    pub fn simplify(&self) -> PauliSum {
        let mut index: BTreeMap<PauliWord, usize> = BTreeMap::new();
        let mut terms: Vec<PauliString> = Vec::new();
        for t in &self.terms {
            match index.get(&t.word) {
                Some(&i) => terms[i].coeff += t.coeff,
                None => {
                    index.insert(t.word, terms.len());
                    terms.push(*t);
                }
            }
        }
        PauliSum { n_qubits: self.n_qubits, terms }
    }

    /// Drops terms with |coeff| <= tol.
    pub fn prune(&self, tol: f64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().copied().filter(|t| t.coeff.abs() > tol).collect(),
        }
    }

    pub fn constant(&self) -> f64 {
        self.terms.iter().filter(|t| t.word.is_identity()).map(|t| t.coeff).sum()
    }

    /// Relabels qubits through `map` onto a register of `n_qubits`.
    pub fn relabel(&self, map: &[usize], n_qubits: usize) -> Result<PauliSum> {
        if map.len() < self.n_qubits {
            bail!(Argument, "qubit map has {} entries for {} qubits", map.len(), self.n_qubits);
        }
        let terms = self
            .terms
            .iter()
            .map(|t| PauliString { word: t.word.relabel(map), coeff: t.coeff })
            .collect();
        PauliSum::from_terms(n_qubits, terms)
    }

    pub fn to_op(&self) -> PauliOp {
        let mut op = PauliOp::new(self.n_qubits);
        for t in &self.terms {
            op.add_term(t.word, Complex64::new(t.coeff, 0.0));
        }
        op
    }

    /// <psi|O|psi>; the imaginary residue must vanish for a Hermitian sum.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            bail!(
                Argument,
                "observable on {} qubits applied to a {}-qubit state",
                self.n_qubits,
                state.n_qubits()
            );
        }
        let value = expectation_raw(&self.terms, state.amplitudes());
        if value.im.abs() > 1e-10 * (1.0 + value.re.abs()) {
            bail!(Numerical, "expectation has imaginary part {:e}", value.im);
        }
        Ok(value.re)
    }

    /// O|psi> as a raw amplitude vector.
    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for t in &self.terms {
            let x = t.word.x as usize;
            for (b, a) in amps.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                out[b ^ x] += t.word.phase_on(b as u64) * *a * t.coeff;
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.terms {
            s.push_str(&t.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(n_qubits: usize, text: &str) -> Result<PauliSum> {
        let terms = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        PauliSum::from_terms(n_qubits, terms)
    }
}

/// Sum of `coeff * <psi|W|psi>` grouped by X mask so each amplitude product
/// is formed once per group.
pub(crate) fn expectation_raw(terms: &[PauliString], amps: &[Complex64]) -> Complex64 {
    let mut groups: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
    for t in terms {
        groups
            .entry(t.word.x)
            .or_default()
            .push((t.word.z, i_pow(t.word.y_count()) * t.coeff));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (x, group) in groups {
        let x = x as usize;
        let mut acc = vec![Complex64::new(0.0, 0.0); group.len()];
        for (b, a) in amps.iter().enumerate() {
            let p = amps[b ^ x].conj() * a;
            if p.re == 0.0 && p.im == 0.0 {
                continue;
            }
            for (slot, (z, _)) in acc.iter_mut().zip(&group) {
                if (z & b as u64).count_ones() & 1 == 0 {
                    *slot += p;
                } else {
                    *slot -= p;
                }
            }
        }
        for (s, (_, c)) in acc.iter().zip(&group) {
            total += s * c;
        }
    }
    total
}

/// Complex linear combination of Pauli words.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOp {
    n_qubits: usize,
    terms: BTreeMap<PauliWord, Complex64>,
}

impl PauliOp {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &BTreeMap<PauliWord, Complex64> {
        &self.terms
    }

    pub fn add_term(&mut self, word: PauliWord, coeff: Complex64) {
        *self.terms.entry(word).or_insert(Complex64::new(0.0, 0.0)) += coeff;
    }

    pub fn mul(&self, other: &PauliOp) -> PauliOp {
        let mut out = PauliOp::new(self.n_qubits.max(other.n_qubits));
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let (k, w) = w1.mul(w2);
                out.add_term(w, i_pow(k) * c1 * c2);
            }
        }
        out
    }

    /// `[self, other]`, computed directly from anticommuting word pairs.
    pub fn commutator(&self, other: &PauliOp) -> PauliOp {
        let mut out = PauliOp::new(self.n_qubits.max(other.n_qubits));
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                if !w1.commutes_with(w2) {
                    let (k, w) = w1.mul(w2);
                    out.add_term(w, i_pow(k) * c1 * c2 * 2.0);
                }
            }
        }
        out
    }

    pub fn prune(&self, tol: f64) -> PauliOp {
        PauliOp {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(w, c)| (*w, *c)).collect(),
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.norm() <= tol)
    }

    /// Converts to a real Pauli sum; fails if any coefficient has an
    /// imaginary part above `tol`.
    pub fn to_real_sum(&self, tol: f64) -> Result<PauliSum> {
        let mut out = PauliSum::new(self.n_qubits);
        for (w, c) in &self.terms {
            if c.im.abs() > tol {
                bail!(Numerical, "non-Hermitian coefficient {c} on '{w}'");
            }
            if c.re != 0.0 {
                out.push(PauliString { word: *w, coeff: c.re })?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(word: &PauliWord, n: usize) -> Vec<Vec<Complex64>> {
        // Kronecker product built qubit by qubit, qubit 0 least significant.
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let mat = |p: Option<Pauli>| -> [[Complex64; 2]; 2] {
            match p {
                None => [[one, zero], [zero, one]],
                Some(Pauli::X) => [[zero, one], [one, zero]],
                Some(Pauli::Y) => [[zero, -i], [i, zero]],
                Some(Pauli::Z) => [[one, zero], [zero, -one]],
            }
        };
        let dim = 1 << n;
        let mut m = vec![vec![zero; dim]; dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut v = one;
                for q in 0..n {
                    v *= mat(word.get(q))[(r >> q) & 1][(c >> q) & 1];
                }
                m[r][c] = v;
            }
        }
        m
    }

    #[test]
    fn word_product_matches_dense_matrices() {
        let words = [
            PauliWord::from_ops([(0, Pauli::X), (1, Pauli::Y)]),
            PauliWord::from_ops([(0, Pauli::Y), (1, Pauli::Z)]),
            PauliWord::from_ops([(0, Pauli::Z), (1, Pauli::X)]),
            PauliWord::single(1, Pauli::Y),
        ];
        for a in &words {
            for b in &words {
                let (k, w) = a.mul(b);
                let (ma, mb, mw) = (dense(a, 2), dense(b, 2), dense(&w, 2));
                for r in 0..4 {
                    for c in 0..4 {
                        let prod: Complex64 = (0..4).map(|s| ma[r][s] * mb[s][c]).sum();
                        assert!((prod - i_pow(k) * mw[r][c]).norm() < 1e-14);
                    }
                }
                let commute = a.commutes_with(b);
                let (k2, _) = b.mul(a);
                assert_eq!(commute, k == k2);
            }
        }
    }

    #[test]
    fn phase_on_matches_dense_action() {
        let w = PauliWord::from_ops([(0, Pauli::Y), (2, Pauli::Z), (1, Pauli::X)]);
        let m = dense(&w, 3);
        for b in 0..8usize {
            let target = b ^ w.x as usize;
            assert!((m[target][b] - w.phase_on(b as u64)).norm() < 1e-15);
        }
    }

    #[test]
    fn text_round_trip() {
        let sum = PauliSum::from_terms(
            3,
            vec![
                PauliString::new(0.5, [(0, Pauli::X), (1, Pauli::X)]),
                PauliString::new(-2.0, []),
                PauliString::new(0.1 + 0.2, [(2, Pauli::Y)]),
            ],
        )
        .unwrap();
        let text = sum.to_text();
        assert!(text.starts_with("0.5 X@0 X@1\n-2\n"));
        assert_eq!(PauliSum::from_text(3, &text).unwrap(), sum);
    }

    #[test]
    fn parse_errors() {
        assert!("".parse::<PauliString>().is_err());
        assert!("abc X@0".parse::<PauliString>().is_err());
        assert!("1 W@0".parse::<PauliString>().is_err());
        assert!("1 X@0 Z@0".parse::<PauliString>().is_err());
        assert!(PauliSum::from_text(2, "1 X@5").is_err());
    }

    #[test]
    fn commutator_of_x_and_z_is_minus_two_i_y() {
        let x = PauliSum::from_terms(1, vec![PauliString::new(1.0, [(0, Pauli::X)])]).unwrap().to_op();
        let z = PauliSum::from_terms(1, vec![PauliString::new(1.0, [(0, Pauli::Z)])]).unwrap().to_op();
        let c = x.commutator(&z);
        assert_eq!(c.terms().len(), 1);
        let (w, coeff) = c.terms().iter().next().unwrap();
        assert_eq!(w.get(0), Some(Pauli::Y));
        assert!((coeff - Complex64::new(0.0, -2.0)).norm() < 1e-15);
    }
}
