use efl::ansatz::{build_ansatz, build_grid, default_grid};
use efl::gaussian::{mean_field_state, so_dimension, GaussianRotation, MeanFieldOptions};
use efl::model::HubbardParams;
use efl::vqe::{
    advanced_newton_train, optimize_stage, rotation_from_phi, Eval, Grad, NewtonConfig, NewtonProblem, SqpOptions,
    VqeProblem, gradient_engines,
};

fn newton_problem(p: HubbardParams, layers: usize) -> NewtonProblem {
    let (rows, cols) = default_grid(p.l);
    let g = build_grid(rows, cols).unwrap();
    let a = build_ansatz(&g, layers, None).unwrap();
    NewtonProblem::new(VqeProblem::new(p, &g, "interleaved").unwrap(), a).unwrap()
}

#[test]
fn free_chain_phi_only_reaches_tight_binding_energy() {
    // Two-site hopping chain: orbital energies -1, +1 per spin, two electrons.
    let p = HubbardParams::new(2, 1.0, 0.0, 0.0).unwrap();
    let np = newton_problem(p, 1);
    let theta = vec![0.0; np.ansatz.n_params()];
    let phi0: Vec<f64> = (0..so_dimension(8)).map(|k| 0.05 * (((k * 5) % 9) as f64 - 4.0)).collect();
    let r0 = rotation_from_phi(8, &phi0).unwrap();
    let cfg = NewtonConfig { optimize_theta: false, ..Default::default() };
    let t = advanced_newton_train(&np, &theta, &r0, &cfg).unwrap();
    assert!((t.final_energy + 2.0).abs() < 1e-6, "{} ({})", t.final_energy, t.stop_reason);
    assert!(t.iterations.windows(2).all(|w| w[1].omega < w[0].omega));
}

#[test]
fn mean_field_start_never_gets_worse() {
    let p = HubbardParams::half_filling(2, 1.0, 8.0).unwrap();
    let mf = mean_field_state(&p, MeanFieldOptions { self_consistent: true, max_iters: 0 }).unwrap();
    let np = newton_problem(p, 5);
    let theta = np.vqe.reference_params(&np.ansatz, &mf.occupied).unwrap();
    let e0 = np.omega(&theta, &mf.rotation).unwrap() + p.mu * 2.0;
    assert!((e0 - mf.energy).abs() < 1e-9, "{e0} vs {}", mf.energy);
    let cfg = NewtonConfig { max_iters: 10, ..Default::default() };
    let t = advanced_newton_train(&np, &theta, &mf.rotation, &cfg).unwrap();
    assert!(t.final_energy <= mf.energy + 1e-12);
    assert!(t.final_energy >= -0.4721359549995794 - 1e-9);
}

#[test]
fn fixed_rotation_agrees_with_constrained_optimizer_on_one_site() {
    let p = HubbardParams::half_filling(1, 1.0, 8.0).unwrap();
    let np = newton_problem(p, 1);
    let x0: Vec<f64> = (0..np.ansatz.n_params()).map(|k| 0.4 + 0.3 * k as f64).collect();
    let cfg = NewtonConfig { optimize_phi: false, ..Default::default() };
    let t = advanced_newton_train(&np, &x0, &GaussianRotation::identity(4), &cfg).unwrap();

    let prob = &np.vqe;
    let program = np.ansatz.program();
    let eval = |x: &[f64]| {
        let s = program.run(x)?;
        Ok(Eval { f: prob.objective_op.expectation(&s)?, c: Some(prob.number_op.expectation(&s)? - 1.0) })
    };
    let engine = gradient_engines().get("shift").unwrap();
    let grad = |x: &[f64]| {
        let mut g = engine.gradients(&program, x, &[&prob.objective_op, &prob.number_op])?;
        let c = g.pop().unwrap();
        Ok(Grad { f: g.pop().unwrap(), c: Some(c) })
    };
    let r = optimize_stage(&eval, &grad, &x0, &SqpOptions { energy_tol: 1e-12, ..Default::default() }).unwrap();
    assert!(r.feasible);
    assert!((t.final_energy - r.f).abs() < 1e-6, "newton {} sqp {}", t.final_energy, r.f);
}

#[test]
fn perturbed_mean_field_start_descends() {
    let p = HubbardParams::half_filling(2, 1.0, 8.0).unwrap();
    let mf = mean_field_state(&p, MeanFieldOptions { self_consistent: true, max_iters: 0 }).unwrap();
    let np = newton_problem(p, 5);
    let mut theta = np.vqe.reference_params(&np.ansatz, &mf.occupied).unwrap();
    for (k, t) in theta.iter_mut().enumerate() {
        *t += 1e-2 * ((k * 7 % 13) as f64 - 6.0) / 6.0;
    }
    let cfg = NewtonConfig { max_iters: 40, ..Default::default() };
    let t = advanced_newton_train(&np, &theta, &mf.rotation, &cfg).unwrap();
    assert!(t.final_energy < mf.energy - 0.1, "{} ({})", t.final_energy, t.stop_reason);
}
