//! `efl`: Hubbard-chain benchmark workflow from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use efl::ansatz::{build_grid, layout_dump, make_ordering};
use efl::bench::{
    efl_by_ordering, efl_from_points, emit_plot_data, extract_efl, load_results, measurement_budget, parse_plot_csv,
    record_points, run_benchmark, run_single, write_results, EflCurve, RunConfig, SweepConfig,
};
use efl::checks::run_checks;
use efl::model::{bethe_energy_density, build_hamiltonian, energy_density_deviation, exact_ground_energy, HubbardParams};
use efl::Error;

const OUT_ENV: &str = "EFL_OUT";

#[derive(Parser)]
#[command(name = "efl", version, about = "Effective fermionic length benchmark for Hubbard-chain VQE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the qubit Hamiltonian, one `coeff op@q ...` term per line.
    Hamiltonian {
        #[command(flatten)]
        model: ModelArgs,
        /// Drop zero-coefficient terms.
        #[arg(long)]
        prune: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Infinite-chain ground energy density for each U/t.
    Bethe {
        #[arg(required = true, allow_negative_numbers = true)]
        u_over_t: Vec<f64>,
    },
    /// Exact ground energy in a particle-number sector.
    Ed {
        #[command(flatten)]
        model: ModelArgs,
        /// Particle number (default L).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Grid, edge patterns and orbital placement as JSON.
    Layout {
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long, default_value = "interleaved")]
        ordering: String,
    },
    /// Layer-by-layer training of one chain; writes a record JSON.
    Vqe(VqeArgs),
    /// Sweep over lengths, orderings and seeds; writes results and the EFL report.
    Bench(BenchArgs),
    /// Deviation curve and L* from a results directory or plot CSV.
    Efl {
        /// Results directory (default: $EFL_OUT/bench).
        dir: Option<PathBuf>,
        #[arg(long, conflicts_with = "dir")]
        csv: Option<PathBuf>,
    },
    /// Shots and sampling time to reach a given energy-density precision.
    Budget {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 5000.0)]
        rate: f64,
    },
    /// Run the built-in invariant checks.
    Check,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long = "L")]
    l: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long = "U", default_value_t = 8.0)]
    u: f64,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "half_filling")]
    mu: Option<f64>,
    /// Set mu = U/2 (the default when --mu is absent).
    #[arg(long)]
    half_filling: bool,
}

impl ModelArgs {
    fn params(&self) -> efl::Result<HubbardParams> {
        match self.mu {
            Some(mu) => HubbardParams::new(self.l, self.t, self.u, mu),
            None => HubbardParams::half_filling(self.l, self.t, self.u),
        }
    }
}

#[derive(Args)]
struct VqeArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long = "U")]
    u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    ordering: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    depth_cap: Option<usize>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    layers_per_stage: Option<usize>,
    #[arg(long)]
    initial_layers: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    max_evals: Option<usize>,
    /// Gradient engine: shift, finite-diff or adjoint.
    #[arg(long)]
    gradient: Option<String>,
    /// Output directory (default: $EFL_OUT/vqe).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML sweep configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated chain lengths.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<usize>>,
    /// Comma list or range (`0..3` exclusive, `0..=3` inclusive).
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, value_delimiter = ',')]
    orderings: Option<Vec<String>>,
    #[arg(long)]
    depth_cap: Option<usize>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    gradient: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Results directory (default: $EFL_OUT/bench).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Argument(_) | Error::Parse(_) | Error::Io { .. } | Error::Topology(_) | Error::Capacity(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

type CliResult = Result<(), Failure>;

fn out_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("efl-out"), PathBuf::from)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| usage(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = || usage(format!("bad seed list '{s}'"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..=") {
        return Ok((num(a)?..=num(b)?).collect());
    }
    if let Some((a, b)) = s.split_once("..") {
        return Ok((num(a)?..num(b)?).collect());
    }
    s.split(',').map(num).collect()
}

fn print_curve(curve: &EflCurve) {
    println!("{:>4} {:>8} {:>12} {:>12} {:>6}", "L", "1/L", "deviation", "ordering", "seed");
    for p in &curve.points {
        println!("{:>4} {:>8.4} {:>12.6} {:>12} {:>6}", p.l, p.inv_l, p.deviation, p.ordering, p.seed);
    }
    println!("L* = {}", curve.l_star);
}

fn hamiltonian(model: &ModelArgs, prune: bool, out: Option<&Path>) -> CliResult {
    let h = build_hamiltonian(&model.params()?);
    let h = if prune { h.prune(0.0) } else { h };
    let text = h.to_text();
    match out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bethe(values: &[f64]) -> CliResult {
    for &u in values {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(usage(format!("U/t must be a non-negative number, got {u}")));
        }
    }
    for &u in values {
        println!("{u} {:.6}", bethe_energy_density(u)?);
    }
    Ok(())
}

fn ed(model: &ModelArgs, n: Option<usize>) -> CliResult {
    let p = model.params()?;
    let n = n.unwrap_or(p.l);
    let (e, _) = exact_ground_energy(&p, n)?;
    println!("ground energy (N = {n}): {e:.12}");
    if n == p.l && p.t > 0.0 {
        println!("energy density: {:.12}", e / (p.l as f64 * p.t));
        println!("deviation: {:.12}", energy_density_deviation(e, &p)?);
    }
    Ok(())
}

fn layout(l: usize, rows: Option<usize>, cols: Option<usize>, ordering: &str) -> CliResult {
    let (dr, dc) = efl::ansatz::default_grid(l);
    let g = build_grid(rows.unwrap_or(dr), cols.unwrap_or(dc))?;
    let o = make_ordering(ordering, l, &g)?;
    let dump = layout_dump(&g, &o)?;
    println!("{}", serde_json::to_string_pretty(&dump).map_err(|e| usage(e.to_string()))?);
    Ok(())
}

fn vqe(a: &VqeArgs) -> CliResult {
    let mut run = match &a.config {
        Some(path) => RunConfig::from_toml(&read(path)?)?,
        None => RunConfig::for_length(a.l.ok_or_else(|| usage("vqe needs --L or --config"))?),
    };
    if let Some(l) = a.l {
        if a.config.is_some() && l != run.l && (a.rows.is_none() || a.cols.is_none()) {
            return Err(usage("changing L from a config file needs --rows and --cols"));
        }
        let (r, c) = efl::ansatz::default_grid(l);
        if a.config.is_none() {
            (run.rows, run.cols) = (r, c);
        }
        run.l = l;
    }
    if let Some(v) = a.rows {
        run.rows = v;
    }
    if let Some(v) = a.cols {
        run.cols = v;
    }
    if let Some(v) = &a.ordering {
        run.ordering.clone_from(v);
    }
    if let Some(v) = a.t {
        run.physics.t = v;
    }
    if let Some(v) = a.u {
        run.physics.u = v;
    }
    if a.mu.is_some() {
        run.physics.mu = a.mu;
    }
    if let Some(v) = a.seed {
        run.seed = v;
    }
    run.train.seed = run.seed;
    let tr = &mut run.train;
    if let Some(v) = a.depth_cap {
        tr.depth_cap = v;
    }
    if let Some(v) = a.stages {
        tr.n_stages = v;
    }
    if let Some(v) = a.layers_per_stage {
        tr.layers_per_stage = v;
    }
    if let Some(v) = a.initial_layers {
        tr.initial_layers = v;
    }
    if let Some(v) = a.max_iters {
        tr.max_iters_per_stage = v;
    }
    if a.max_evals.is_some() {
        tr.max_evals_per_stage = a.max_evals;
    }
    if let Some(v) = &a.gradient {
        tr.gradient.clone_from(v);
    }

    let record = run_single(&run)?;
    let dir = a.out.clone().unwrap_or_else(|| out_root().join("vqe"));
    let path = dir.join(record.file_name());
    write(&path, &record.to_json()?)?;
    for s in &record.trace.stages {
        println!(
            "stage {:>2} depth {:>2} energy {:>12.8} residual {:>9.2e} evals {:>5}{}",
            s.stage,
            s.depth,
            s.energy,
            s.n_residual,
            s.evals,
            if s.feasible { "" } else { " (infeasible)" }
        );
    }
    println!("record: {}", path.display());
    match (record.final_energy, record.deviation) {
        (Some(e), Some(d)) => println!("final energy: {e:.10}\ndeviation: {d:.10}"),
        (Some(e), None) => println!("final energy: {e:.10}"),
        _ => println!("no stage met the particle-number constraint"),
    }
    if let Some(cap) = record.trace.depth_cap_hit {
        return Err(Failure {
            code: 2,
            message: format!(
                "depth cap {} reached: next stage needed {} layers; stopped after {} stage(s)",
                cap.cap,
                cap.requested,
                record.trace.stages.len()
            ),
        });
    }
    if record.final_energy.is_none() {
        return Err(Failure { code: 2, message: "training ended without a feasible stage".into() });
    }
    Ok(())
}

fn bench(a: &BenchArgs) -> CliResult {
    let mut cfg = match &a.config {
        Some(path) => SweepConfig::from_toml(&read(path)?)?,
        None => SweepConfig::default(),
    };
    if let Some(v) = &a.lengths {
        cfg.lengths.clone_from(v);
    }
    if let Some(s) = &a.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(v) = &a.orderings {
        cfg.orderings.clone_from(v);
    }
    if let Some(v) = a.depth_cap {
        cfg.depth_cap = v;
    }
    if let Some(v) = a.stages {
        cfg.train.n_stages = v;
    }
    if let Some(v) = a.max_iters {
        cfg.train.max_iters_per_stage = v;
    }
    if let Some(v) = &a.gradient {
        cfg.train.gradient.clone_from(v);
    }
    if cfg.lengths.is_empty() || cfg.seeds.is_empty() || cfg.orderings.is_empty() {
        return Err(usage("sweep needs at least one length, seed and ordering"));
    }
    if let Some(j) = a.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| usage(format!("cannot start {j} workers: {e}")))?;
    }
    let dir = a.out.clone().unwrap_or_else(|| out_root().join("bench"));
    let run = run_benchmark(&cfg)?;
    write_results(&dir, &run)?;
    write(&dir.join("sweep.toml"), &cfg.to_toml()?)?;
    for s in &run.skipped {
        println!("skipped L={} {} seed {}: {}", s.l, s.ordering, s.seed, s.reason);
    }
    for r in &run.records {
        match r.deviation {
            Some(d) => println!("L={} {} seed {}: energy {:.8} deviation {:.6}", r.l, r.ordering, r.seed, r.final_energy.unwrap_or(f64::NAN), d),
            None => println!("L={} {} seed {}: no feasible stage", r.l, r.ordering, r.seed),
        }
    }
    emit_plot_data(&record_points(&run.records), &dir.join("deviation"))?;
    println!("results: {}", dir.display());
    report(&run.records)
}

fn report(records: &[efl::bench::BenchmarkRecord]) -> CliResult {
    let lengths: std::collections::BTreeSet<usize> = records.iter().filter(|r| r.deviation.is_some()).map(|r| r.l).collect();
    if lengths.len() < 2 {
        println!("EFL needs at least two chain lengths with results");
        return Ok(());
    }
    for (ordering, curve) in efl_by_ordering(records) {
        if let Ok(c) = curve {
            println!("{ordering}: L* = {}", c.l_star);
        }
    }
    print_curve(&extract_efl(records)?);
    Ok(())
}

fn efl_cmd(dir: Option<&Path>, csv: Option<&Path>) -> CliResult {
    if let Some(csv) = csv {
        let points = parse_plot_csv(&read(csv)?)?;
        print_curve(&efl_from_points(&points)?);
        return Ok(());
    }
    let dir = dir.map_or_else(|| out_root().join("bench"), Path::to_path_buf);
    let run = load_results(&dir)?;
    let curve = extract_efl(&run.records)?;
    for (ordering, c) in efl_by_ordering(&run.records) {
        if let Ok(c) = c {
            println!("{ordering}: L* = {}", c.l_star);
        }
    }
    print_curve(&curve);
    write(&dir.join("efl.json"), &serde_json::to_string_pretty(&curve).map_err(|e| usage(e.to_string()))?)
}

fn budget(model: &ModelArgs, eps: f64, rate: f64) -> CliResult {
    let b = measurement_budget(&model.params()?, eps, rate)?;
    println!("shots: {}", b.shots);
    println!("seconds: {}", b.wall_seconds);
    for s in &b.bases {
        println!("{:?}: weight {:.6} shots {:.1}", s.basis, s.weight, s.shots);
    }
    println!("model: {}", b.model);
    Ok(())
}

fn check() -> CliResult {
    let results = run_checks();
    let mut failed = 0;
    for c in &results {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Failure { code: 2, message: format!("{failed} of {} checks failed", results.len()) });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Hamiltonian { model, prune, out } => hamiltonian(model, *prune, out.as_deref()),
        Command::Bethe { u_over_t } => bethe(u_over_t),
        Command::Ed { model, n } => ed(model, *n),
        Command::Layout { l, rows, cols, ordering } => layout(*l, *rows, *cols, ordering),
        Command::Vqe(a) => vqe(a),
        Command::Bench(a) => bench(a),
        Command::Efl { dir, csv } => efl_cmd(dir.as_deref(), csv.as_deref()),
        Command::Budget { model, eps, rate } => budget(model, *eps, *rate),
        Command::Check => check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
