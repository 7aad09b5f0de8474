use efl::ansatz::{build_ansatz, build_grid};
use efl::model::HubbardParams;
use efl::vqe::{constraint_residual, gradient_engines, optimize_stage, Eval, Grad, SqpOptions, VqeProblem};

fn rosenbrock(x: f64, y: f64) -> f64 {
    (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
}

/// Minimum of Rosenbrock on the line x + y = 1 by repeated grid refinement.
fn brute_force_line_minimum() -> (f64, f64) {
    let (mut lo, mut hi) = (-3.0f64, 3.0f64);
    let mut best = 0.0;
    for _ in 0..40 {
        let n = 2000;
        let step = (hi - lo) / n as f64;
        best = (0..=n)
            .map(|k| lo + step * k as f64)
            .min_by(|a, b| rosenbrock(*a, 1.0 - a).total_cmp(&rosenbrock(*b, 1.0 - b)))
            .unwrap();
        lo = best - 2.0 * step;
        hi = best + 2.0 * step;
    }
    (best, rosenbrock(best, 1.0 - best))
}

#[test]
fn constrained_rosenbrock_matches_grid_refinement() {
    let eval = |v: &[f64]| Ok(Eval { f: rosenbrock(v[0], v[1]), c: Some(v[0] + v[1] - 1.0) });
    let grad = |v: &[f64]| {
        let (x, y) = (v[0], v[1]);
        Ok(Grad {
            f: vec![-2.0 * (1.0 - x) - 400.0 * x * (y - x * x), 200.0 * (y - x * x)],
            c: Some(vec![1.0, 1.0]),
        })
    };
    let opts = SqpOptions { max_iters: 500, energy_tol: 1e-14, ..Default::default() };
    let r = optimize_stage(&eval, &grad, &[0.0, 0.5], &opts).unwrap();
    let (xb, fb) = brute_force_line_minimum();
    assert!(r.feasible);
    assert!((r.x[0] - xb).abs() < 1e-4, "{} vs {xb}", r.x[0]);
    assert!((r.x[1] - (1.0 - xb)).abs() < 1e-4);
    assert!((r.f - fb).abs() < 1e-4);
}

#[test]
fn vqe_stage_from_feasible_start_respects_the_bound() {
    let g = build_grid(2, 2).unwrap();
    let prob = VqeProblem::new(HubbardParams::half_filling(2, 1.0, 8.0).unwrap(), &g, "interleaved").unwrap();
    let a = build_ansatz(&g, 5, None).unwrap();
    let mut x0 = prob.reference_params(&a, &[0, 2]).unwrap();
    for (k, v) in x0.iter_mut().enumerate() {
        *v += 0.05 * ((k % 5) as f64 - 2.0);
    }
    let program = a.program();
    let engine = gradient_engines().get("shift").unwrap();
    let eval = |x: &[f64]| {
        let s = program.run(x)?;
        Ok(Eval { f: prob.objective_op.expectation(&s)?, c: Some(prob.number_op.expectation(&s)? - 2.0) })
    };
    let grad = |x: &[f64]| {
        let mut g = engine.gradients(&program, x, &[&prob.objective_op, &prob.number_op])?;
        let c = g.pop().unwrap();
        Ok(Grad { f: g.pop().unwrap(), c: Some(c) })
    };
    let r = optimize_stage(&eval, &grad, &x0, &SqpOptions::default()).unwrap();
    assert!(r.feasible);
    assert!(r.f >= -0.472136 - 1e-6);
    assert!(r.f < 0.0);
    assert!(r.evals >= 1);
}

#[test]
fn residual_gradient_matches_finite_differences() {
    let g = build_grid(2, 2).unwrap();
    let prob = VqeProblem::new(HubbardParams::half_filling(2, 1.0, 8.0).unwrap(), &g, "interleaved").unwrap();
    let a = build_ansatz(&g, 3, None).unwrap();
    let x: Vec<f64> = (0..a.n_params()).map(|k| (k as f64 * 1.7).cos()).collect();
    let gr = gradient_engines().get("shift").unwrap().gradients(&a.program(), &x, &[&prob.number_op]).unwrap();
    let h = 1e-5;
    for i in 0..x.len() {
        let mut p = x.clone();
        p[i] += h;
        let up = constraint_residual(&p, &a, &prob).unwrap();
        p[i] -= 2.0 * h;
        let down = constraint_residual(&p, &a, &prob).unwrap();
        assert!(((up - down) / (2.0 * h) - gr[0][i]).abs() < 1e-6);
    }
}
