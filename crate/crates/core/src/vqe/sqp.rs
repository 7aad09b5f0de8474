//! Sequential quadratic programming with one optional equality constraint.
//!
//! Each iteration solves the quadratic model with the inverse BFGS matrix `H`
//! and the linearised constraint `c + a^T d = 0` in closed form:
//! `d = -H (g + lambda a)` with `lambda = (c - a^T H g) / (a^T H a)`. Steps are
//! accepted by Armijo backtracking on the L1 merit `f + rho |c|`, and `H` gets
//! Powell-damped updates from the Lagrangian gradient change.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqpOptions {
    pub max_iters: usize,
    pub max_evals: Option<usize>,
    pub step_tol: f64,
    pub energy_tol: f64,
    pub constraint_tol: f64,
    /// Largest allowed step component (angles are periodic).
    pub max_step: f64,
}

impl Default for SqpOptions {
    fn default() -> Self {
        Self { max_iters: 100, max_evals: None, step_tol: 1e-8, energy_tol: 1e-6, constraint_tol: 1e-4, max_step: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eval {
    pub f: f64,
    pub c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grad {
    pub f: Vec<f64>,
    pub c: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Iterations,
    Evaluations,
    StepTolerance,
    EnergyTolerance,
    LineSearch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqpResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub c: Option<f64>,
    pub feasible: bool,
    pub evals: usize,
    pub iters: usize,
    pub termination: Termination,
}

struct Counter<'a> {
    f: &'a dyn Fn(&[f64]) -> Result<Eval>,
    evals: usize,
}

impl Counter<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<Eval> {
        self.evals += 1;
        let e = (self.f)(x)?;
        if !e.f.is_finite() || e.c.is_some_and(|c| !c.is_finite()) {
            bail!(Numerical, "non-finite objective or constraint at evaluation {}", self.evals);
        }
        Ok(e)
    }
}

fn vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Minimises `f` subject to `c = 0` (when `eval` reports a constraint).
///
/// Returns the best iterate with `|c| <= constraint_tol`, or the last iterate
/// if none was feasible.
pub fn optimize_stage(
    eval: &dyn Fn(&[f64]) -> Result<Eval>,
    grad: &dyn Fn(&[f64]) -> Result<Grad>,
    x0: &[f64],
    opts: &SqpOptions,
) -> Result<SqpResult> {
    if opts.max_iters == 0 || opts.max_evals == Some(0) {
        bail!(Argument, "optimizer budget must be at least 1");
    }
    let n = x0.len();
    let mut counter = Counter { f: eval, evals: 0 };
    let mut x = vec(x0);
    let mut e = counter.eval(x0)?;
    let mut g = grad(x0)?;
    let feasible = |e: &Eval| e.c.is_none_or(|c| c.abs() <= opts.constraint_tol);
    let mut best: Option<(DVector<f64>, Eval)> = feasible(&e).then(|| (x.clone(), e));
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut fresh_h = true;
    let mut rho = 0.0f64;
    let mut iters = 0;
    let termination = loop {
        if iters >= opts.max_iters {
            break Termination::Iterations;
        }
        if opts.max_evals.is_some_and(|m| counter.evals >= m) {
            break Termination::Evaluations;
        }
        iters += 1;
        let gf = vec(&g.f);
        let a = g.c.as_deref().map(vec);
        let c = e.c.unwrap_or(0.0);

        let (d, lambda) = {
            let hg = &h * &gf;
            match &a {
                Some(a) => {
                    let ha = &h * a;
                    let aha = a.dot(&ha);
                    if aha > 1e-14 {
                        let lambda = (c - a.dot(&hg)) / aha;
                        (-(hg + ha * lambda), lambda)
                    } else {
                        (-hg, 0.0)
                    }
                }
                None => (-hg, 0.0),
            }
        };
        let big = d.amax();
        let scale = if big > opts.max_step { opts.max_step / big } else { 1.0 };
        let d = d * scale;
        rho = rho.max(1.5 * lambda.abs() + 1e-3);
        let merit = |e: &Eval| e.f + rho * e.c.map_or(0.0, f64::abs);
        let slope = gf.dot(&d) - rho * c.abs();
        if slope >= 0.0 && !fresh_h {
            h = DMatrix::identity(n, n);
            fresh_h = true;
            iters -= 1;
            continue;
        }

        let m0 = merit(&e);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let xt = &x + &d * alpha;
            let et = counter.eval(xt.as_slice())?;
            if merit(&et) <= m0 + 1e-4 * alpha * slope.min(0.0) {
                accepted = Some((xt, et));
                break;
            }
            if opts.max_evals.is_some_and(|m| counter.evals >= m) {
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, en)) = accepted else {
            if !fresh_h {
                h = DMatrix::identity(n, n);
                fresh_h = true;
                continue;
            }
            break Termination::LineSearch;
        };

        let s = &xn - &x;
        let gn = grad(xn.as_slice())?;
        let lag = |g: &Grad| {
            let mut v = vec(&g.f);
            if let Some(a) = &g.c {
                v += vec(a) * lambda;
            }
            v
        };
        let mut y = lag(&gn) - lag(&g);
        // B s = -alpha * scale * (g + lambda a) since the unclipped step is -H (g + lambda a).
        let bs = lag(&g) * (-alpha * scale);
        let sy = s.dot(&y);
        let sbs = s.dot(&bs);
        if sbs > 0.0 && sy < 0.2 * sbs {
            let theta = 0.8 * sbs / (sbs - sy);
            y = y * theta + bs * (1.0 - theta);
        }
        let sy = s.dot(&y);
        if sy > 1e-16 {
            if fresh_h {
                h *= sy / y.dot(&y);
            }
            let r = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H+ = H - r (H y s^T + s y^T H) + (r^2 y^T H y + r) s s^T
            h -= (&hy * s.transpose() + &s * hy.transpose()) * r;
            h += (&s * s.transpose()) * (r * r * yhy + r);
            fresh_h = false;
        }

        let df = (en.f - e.f).abs();
        let step = s.amax();
        x = xn;
        e = en;
        g = gn;
        if feasible(&e) && best.as_ref().is_none_or(|(_, b)| e.f < b.f) {
            best = Some((x.clone(), e));
        }
        if step < opts.step_tol {
            break Termination::StepTolerance;
        }
        if df < opts.energy_tol && feasible(&e) {
            break Termination::EnergyTolerance;
        }
    };
    let (xb, eb, ok) = match best {
        Some((xb, eb)) => (xb, eb, true),
        None => (x, e, false),
    };
    Ok(SqpResult {
        x: xb.as_slice().to_vec(),
        f: eb.f,
        c: eb.c,
        feasible: ok,
        evals: counter.evals,
        iters,
        termination,
    })
}
