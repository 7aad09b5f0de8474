//! Layer-by-layer training: optimise a shallow circuit, append a few
//! near-identity layers, re-optimise everything, repeat.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{gradient_engines, optimize_stage, Eval, Grad, SqpOptions, Termination, VqeProblem};
use crate::ansatz::{build_ansatz, LayeredAnsatz};
use crate::error::{bail, Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub initial_layers: usize,
    pub layers_per_stage: usize,
    /// Number of growth stages after the initial one.
    pub n_stages: usize,
    pub init_range_first: [f64; 2],
    pub init_range_new: [f64; 2],
    pub max_iters_per_stage: usize,
    pub max_evals_per_stage: Option<usize>,
    pub depth_cap: usize,
    pub energy_tol: f64,
    pub constraint_tol: f64,
    pub step_tol: f64,
    pub gradient: String,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            initial_layers: 1,
            layers_per_stage: 4,
            n_stages: 8,
            init_range_first: [0.0, 2.0 * PI],
            init_range_new: [-PI / 10.0, PI / 10.0],
            max_iters_per_stage: 100,
            max_evals_per_stage: None,
            depth_cap: 33,
            energy_tol: 1e-6,
            constraint_tol: 1e-4,
            step_tol: 1e-8,
            gradient: super::DEFAULT_ENGINE.to_string(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Checks everything except the depth cap, which training reports in the
    /// trace instead.
    pub fn validate(&self) -> Result<()> {
        if self.initial_layers == 0 || self.layers_per_stage == 0 {
            bail!(Argument, "layer counts must be positive");
        }
        if self.max_iters_per_stage == 0 || self.max_evals_per_stage == Some(0) {
            bail!(Argument, "per-stage budget must be at least 1");
        }
        for r in [self.init_range_first, self.init_range_new] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
                bail!(Argument, "bad init range [{}, {}]", r[0], r[1]);
            }
        }
        if !(self.energy_tol >= 0.0 && self.constraint_tol > 0.0 && self.step_tol >= 0.0) {
            bail!(Argument, "tolerances must be non-negative");
        }
        gradient_engines().get(&self.gradient)?;
        Ok(())
    }

    /// Depth after the last scheduled stage.
    pub fn final_depth(&self) -> usize {
        self.initial_layers + self.layers_per_stage * self.n_stages
    }

    pub fn fits_depth_cap(&self) -> bool {
        self.final_depth() <= self.depth_cap
    }

    fn sqp(&self) -> SqpOptions {
        SqpOptions {
            max_iters: self.max_iters_per_stage,
            max_evals: self.max_evals_per_stage,
            step_tol: self.step_tol,
            energy_tol: self.energy_tol,
            constraint_tol: self.constraint_tol,
            ..SqpOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub depth: usize,
    pub evals: usize,
    pub iters: usize,
    /// `<H> + mu L` at the stage result.
    pub energy: f64,
    /// `<H> + mu <N>`, the optimised quantity.
    pub objective: f64,
    pub n_residual: f64,
    pub feasible: bool,
    pub termination: Termination,
    pub params: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthCapReport {
    pub cap: usize,
    pub requested: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub config: TrainConfig,
    pub stages: Vec<StageRecord>,
    /// Lowest feasible stage energy so far, one entry per stage.
    pub best_so_far: Vec<Option<f64>>,
    pub depth_cap_hit: Option<DepthCapReport>,
    pub stop_reason: String,
}

impl TrainTrace {
    /// The feasible stage with the lowest energy.
    pub fn best_stage(&self) -> Option<&StageRecord> {
        self.stages.iter().filter(|s| s.feasible).min_by(|a, b| a.energy.total_cmp(&b.energy))
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.best_stage().map(|s| s.energy)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn run_stage(
    problem: &VqeProblem,
    ansatz: &LayeredAnsatz,
    x0: &[f64],
    cfg: &TrainConfig,
    stage: usize,
) -> Result<StageRecord> {
    let program = ansatz.program();
    let engine = gradient_engines().get(&cfg.gradient)?;
    let l = problem.model.l as f64;
    let eval = |x: &[f64]| -> Result<Eval> {
        let state = program.run(x)?;
        Ok(Eval {
            f: problem.objective_op.expectation(&state)?,
            c: Some(problem.number_op.expectation(&state)? - l),
        })
    };
    let grad = |x: &[f64]| -> Result<Grad> {
        let mut g = engine.gradients(&program, x, &[&problem.objective_op, &problem.number_op])?;
        let c = g.pop().expect("two observables");
        let f = g.pop().expect("two observables");
        Ok(Grad { f, c: Some(c) })
    };
    let r = optimize_stage(&eval, &grad, x0, &cfg.sqp())?;
    let e = problem.evaluate_state(&program.run(&r.x)?)?;
    Ok(StageRecord {
        stage,
        depth: ansatz.depth(),
        evals: r.evals,
        iters: r.iters,
        energy: e.energy,
        objective: e.objective,
        n_residual: e.residual,
        feasible: r.feasible,
        termination: r.termination,
        params: r.x,
    })
}

/// Runs the staged schedule of `cfg` on `problem` with the default pattern cycle.
pub fn layer_by_layer_train(cfg: &TrainConfig, problem: &VqeProblem) -> Result<TrainTrace> {
    cfg.validate()?;
    let mut trace = TrainTrace {
        config: cfg.clone(),
        stages: Vec::new(),
        best_so_far: Vec::new(),
        depth_cap_hit: None,
        stop_reason: "completed all stages".into(),
    };
    let mut ansatz = match build_ansatz(&problem.graph, cfg.initial_layers, None)?.with_depth_cap(cfg.depth_cap) {
        Ok(a) => a,
        Err(Error::DepthCap { cap, requested }) => {
            trace.depth_cap_hit = Some(DepthCapReport { cap, requested });
            trace.stop_reason = "depth cap".into();
            return Ok(trace);
        }
        Err(e) => return Err(e),
    };
    let [lo, hi] = cfg.init_range_first;
    let mut r = rng::stream(cfg.seed, "init", 0);
    let mut x: Vec<f64> = (0..ansatz.n_params()).map(|_| r.gen_range(lo..=hi)).collect();
    let mut best: Option<f64> = None;
    for stage in 0..=cfg.n_stages {
        if stage > 0 {
            ansatz = match ansatz.extend(cfg.layers_per_stage) {
                Ok(a) => a,
                Err(Error::DepthCap { cap, requested }) => {
                    trace.depth_cap_hit = Some(DepthCapReport { cap, requested });
                    trace.stop_reason = "depth cap".into();
                    break;
                }
                Err(e) => return Err(e),
            };
            let [lo, hi] = cfg.init_range_new;
            let mut r = rng::stream(cfg.seed, "init", stage as u64);
            let fresh = ansatz.n_params() - x.len();
            x.extend((0..fresh).map(|_| r.gen_range(lo..=hi)));
        }
        let rec = run_stage(problem, &ansatz, &x, cfg, stage)?;
        let previous = trace.stages.last().filter(|p| p.feasible).map(|p| p.energy);
        x.clone_from(&rec.params);
        if rec.feasible && best.is_none_or(|b| rec.energy < b) {
            best = Some(rec.energy);
        }
        let stalled = rec.feasible && previous.is_some_and(|p| p - rec.energy < cfg.energy_tol);
        trace.best_so_far.push(best);
        trace.stages.push(rec);
        if stalled && stage < cfg.n_stages {
            trace.stop_reason = "stage improvement below energy tolerance".into();
            break;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_grid;
    use crate::model::HubbardParams;

    fn problem(l: usize, u: f64) -> VqeProblem {
        let g = build_grid(2, l).unwrap();
        VqeProblem::new(HubbardParams::half_filling(l, 1.0, u).unwrap(), &g, "interleaved").unwrap()
    }

    #[test]
    fn default_schedule_depths() {
        let cfg = TrainConfig::default();
        assert!(cfg.fits_depth_cap());
        let depths: Vec<usize> = (0..=cfg.n_stages).map(|s| cfg.initial_layers + s * cfg.layers_per_stage).collect();
        assert_eq!(depths, vec![1, 5, 9, 13, 17, 21, 25, 29, 33]);
    }

    #[test]
    fn depth_cap_is_reported_not_raised() {
        let cfg = TrainConfig { depth_cap: 3, max_iters_per_stage: 5, ..Default::default() };
        assert!(!cfg.fits_depth_cap());
        let t = layer_by_layer_train(&cfg, &problem(1, 4.0)).unwrap();
        assert_eq!(t.stages.len(), 1);
        assert_eq!(t.depth_cap_hit, Some(DepthCapReport { cap: 3, requested: 5 }));
    }

    #[test]
    fn short_run_is_deterministic_and_monotone() {
        let cfg = TrainConfig { n_stages: 2, max_iters_per_stage: 15, seed: 3, ..Default::default() };
        let p = problem(2, 8.0);
        let a = layer_by_layer_train(&cfg, &p).unwrap();
        let b = layer_by_layer_train(&cfg, &p).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let seq: Vec<f64> = a.best_so_far.iter().flatten().copied().collect();
        assert!(seq.windows(2).all(|w| w[1] <= w[0]));
        let back = TrainTrace::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
        for s in &a.stages {
            assert!(s.energy >= -0.4721359549995794 - 1e-9);
        }
    }
}
