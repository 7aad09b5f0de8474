use std::f64::consts::PI;

use efl::ansatz::{build_ansatz, build_grid, make_ordering};
use efl::bench::{efl_from_points, measurement_budget, CurvePoint};
use efl::gaussian::{generator_from_angles, rotation_from_generator, so_dimension};
use efl::model::{
    build_hamiltonian, build_majorana_hamiltonian, build_number_operator, dense_operator, exact_ground_energy,
    HubbardParams, MajoranaPolynomial,
};
use efl::qsim::{apply_f_gate, new_zero_state, FGateParams, PauliString, PauliSum, PauliWord, StateVector};
use efl::vqe::{gradient_engines, VqeProblem};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-PI..PI, n)
}

fn random_state(n: usize, seed: &[f64]) -> StateVector {
    let amps: Vec<Complex64> =
        (0..1usize << n).map(|k| Complex64::new((1.3 * k as f64 + seed[0]).sin(), (0.7 * k as f64 + seed[1]).cos())).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// Independent expansion: multiply out each substituted Majorana as a linear form.
fn naive_conjugate(p: &MajoranaPolynomial, r: &DMatrix<f64>) -> MajoranaPolynomial {
    let n = p.n_modes();
    let mut out = MajoranaPolynomial::zero(n);
    for (mono, c) in p.terms() {
        let mut prod = MajoranaPolynomial::constant(n, 1.0);
        for &j in mono {
            let mut lin = MajoranaPolynomial::zero(n);
            for k in 0..n {
                lin.add_monomial(r[(k, j as usize)].into(), &[k]);
            }
            prod = prod.mul(&lin);
        }
        out = out.add(&prod.scale(c));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pauli_text_roundtrip(c in -5.0f64..5.0, ops in prop::collection::btree_map(0usize..8, 0u8..3, 0..5)) {
        let word = PauliWord::from_ops(ops.iter().map(|(&q, &p)| (q, [efl::qsim::Pauli::X, efl::qsim::Pauli::Y, efl::qsim::Pauli::Z][p as usize])));
        let sum = PauliSum::from_terms(8, vec![PauliString { word, coeff: c }]).unwrap();
        prop_assert_eq!(PauliSum::from_text(8, &sum.to_text()).unwrap(), sum);
    }

    #[test]
    fn expectation_matches_dense_matrix(t in 0.1f64..2.0, u in 0.0f64..10.0, mu in -3.0f64..3.0, s in angles(2)) {
        let p = HubbardParams::new(2, t, u, mu).unwrap();
        let h = build_hamiltonian(&p);
        let psi = random_state(4, &s);
        let m = dense_operator(&h).unwrap();
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let dense = (v.adjoint() * &m * &v)[(0, 0)];
        prop_assert!((dense.im).abs() < 1e-12);
        prop_assert!((dense.re - h.expectation(&psi).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn f_gate_is_unitary_and_periodic(x in angles(6), s in angles(2)) {
        let mut a = random_state(3, &s);
        let p = FGateParams::from_slice(&x).unwrap();
        apply_f_gate(&mut a, 0, 2, &p).unwrap();
        prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        let mut b = random_state(3, &s);
        apply_f_gate(&mut b, 0, 2, &p.reduced()).unwrap();
        let mut c = random_state(3, &s);
        let shifted: Vec<f64> = x.iter().map(|v| v + 2.0 * PI).collect();
        apply_f_gate(&mut c, 0, 2, &FGateParams::from_slice(&shifted).unwrap()).unwrap();
        prop_assert!((a.inner(&b).norm() - 1.0).abs() < 1e-10);
        prop_assert!((a.inner(&c).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hamiltonian_conserves_particles(l in 1usize..6, t in 0.0f64..2.0, u in 0.0f64..10.0, mu in -3.0f64..3.0) {
        let p = HubbardParams::new(l, t, u, mu).unwrap();
        let c = build_hamiltonian(&p).to_op().commutator(&build_number_operator(l).unwrap().to_op());
        prop_assert!(c.is_zero(1e-12));
        for term in build_hamiltonian(&p).terms() {
            prop_assert!(term.word.weight() <= 2);
        }
    }

    #[test]
    fn conjugation_matches_naive_expansion(u in 0.0f64..8.0, a in angles(so_dimension(4))) {
        let p = HubbardParams::half_filling(1, 1.0, u).unwrap();
        let h = build_majorana_hamiltonian(&p);
        let r = rotation_from_generator(&generator_from_angles(4, &a).unwrap()).unwrap();
        let fast = h.conjugate(&r.0).unwrap();
        prop_assert!(fast.max_abs_diff(&naive_conjugate(&h, &r.0)) < 1e-12);
        prop_assert!(fast.is_hermitian(1e-12));
    }

    #[test]
    fn conjugation_composes(a in angles(so_dimension(8)), b in angles(so_dimension(8))) {
        let p = HubbardParams::new(2, 1.0, 3.0, 0.5).unwrap();
        let h = build_majorana_hamiltonian(&p);
        let ra = rotation_from_generator(&(generator_from_angles(8, &a).unwrap() * 0.1)).unwrap();
        let rb = rotation_from_generator(&(generator_from_angles(8, &b).unwrap() * 0.1)).unwrap();
        let two_step = h.conjugate(&rb.0).unwrap().conjugate(&ra.0).unwrap();
        let one_step = h.conjugate(&(&ra.0 * &rb.0)).unwrap();
        prop_assert!(two_step.max_abs_diff(&one_step) < 1e-10);
    }

    #[test]
    fn efl_is_first_argmin(devs in prop::collection::vec(0u8..6, 2..8)) {
        // Small integer grid so ties are common.
        let pts: Vec<CurvePoint> = devs.iter().enumerate().map(|(k, &d)| CurvePoint::new(2 * (k + 1), f64::from(d) / 10.0, "x", 0)).collect();
        let c = efl_from_points(&pts).unwrap();
        let min = devs.iter().min().unwrap();
        let first = devs.iter().position(|d| d == min).unwrap();
        prop_assert_eq!(c.l_star, 2 * (first + 1));
    }

    #[test]
    fn orderings_are_permutations(half in 1usize..4, kind in 0usize..3) {
        let l = 2 * half;
        let kind = ["interleaved", "vertical", "horizontal"][kind];
        let g = build_grid(2, l).unwrap();
        let o = make_ordering(kind, l, &g).unwrap();
        let mut seen = o.qubit_of.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..2 * l).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reported_energy_respects_the_exact_bound(x in angles(256)) {
        let g = build_grid(2, 2).unwrap();
        let p = HubbardParams::half_filling(2, 1.0, 8.0).unwrap();
        let prob = VqeProblem::new(p, &g, "interleaved").unwrap();
        let a = build_ansatz(&g, 9, None).unwrap();
        let x = &x[..a.n_params()];
        let e = prob.evaluate(&a, x).unwrap();
        prop_assert!(e.energy >= exact_ground_energy(&p, 2).unwrap().0 - 1e-9);
    }

    #[test]
    fn adjoint_matches_shift_rule(x in angles(256)) {
        let g = build_grid(2, 3).unwrap();
        let p = HubbardParams::half_filling(3, 1.0, 4.0).unwrap();
        let prob = VqeProblem::new(p, &g, "interleaved").unwrap();
        let a = build_ansatz(&g, 3, None).unwrap();
        let x = &x[..a.n_params()];
        let prog = a.program();
        let obs = [&prob.objective_op, &prob.number_op];
        let s = gradient_engines().get("shift").unwrap().gradients(&prog, x, &obs).unwrap();
        let j = gradient_engines().get("adjoint").unwrap().gradients(&prog, x, &obs).unwrap();
        for (u, v) in s.iter().flatten().zip(j.iter().flatten()) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }
}

#[test]
fn budget_per_density_scaling_within_factor_two() {
    let eps = 1e-2;
    let scaled: Vec<f64> = [2, 4, 8, 16]
        .iter()
        .map(|&l| {
            let b = measurement_budget(&HubbardParams::half_filling(l, 1.0, 8.0).unwrap(), eps, 5e3).unwrap();
            b.shots as f64 * l as f64 * eps * eps
        })
        .collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo <= 2.0, "{scaled:?}");
    // Total shots grow sub-quadratically in L.
    assert!(scaled[3] / 16.0 * 16.0 * 16.0 / (scaled[0] / 2.0 * 2.0 * 2.0) < 64.0);
}

#[test]
fn zero_state_energy_and_identity_ansatz() {
    let g = build_grid(2, 2).unwrap();
    let a = build_ansatz(&g, 4, None).unwrap();
    let mut s = new_zero_state(4).unwrap();
    a.apply(&mut s).unwrap();
    assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
}
