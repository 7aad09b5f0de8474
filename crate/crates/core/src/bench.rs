//! Benchmark sweeps, effective-fermionic-length extraction, measurement
//! budgets and plot output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_grid, default_grid};
use crate::error::{bail, Error, Result};
use crate::model::{energy_density_deviation, energy_operator, EnergyMode, HubbardParams};
use crate::qsim::{Basis, Pauli};
use crate::vqe::{layer_by_layer_train, TrainConfig, TrainTrace, VqeProblem};

/// Physical parameters shared by every point of a sweep. `mu = None` means
/// half filling (`U/2`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Physics {
    pub t: f64,
    pub u: f64,
    pub mu: Option<f64>,
}

impl Default for Physics {
    fn default() -> Self {
        Self { t: 1.0, u: 8.0, mu: None }
    }
}

impl Physics {
    pub fn params(&self, l: usize) -> Result<HubbardParams> {
        match self.mu {
            Some(mu) => HubbardParams::new(l, self.t, self.u, mu),
            None => HubbardParams::half_filling(l, self.t, self.u),
        }
    }
}

/// Sweep description, usually read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub lengths: Vec<usize>,
    /// Grid per length as `[rows, cols]`; missing lengths use [`default_grid`].
    pub grids: BTreeMap<String, [usize; 2]>,
    pub orderings: Vec<String>,
    pub seeds: Vec<u64>,
    pub physics: Physics,
    /// Optimiser and schedule settings; `seed` and `depth_cap` are overridden
    /// per run.
    pub train: TrainConfig,
    pub depth_cap: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lengths: vec![2, 4, 6, 8],
            grids: BTreeMap::new(),
            orderings: vec!["interleaved".into(), "vertical".into(), "horizontal".into()],
            seeds: vec![0],
            physics: Physics::default(),
            train: TrainConfig { gradient: "adjoint".into(), ..TrainConfig::default() },
            depth_cap: 33,
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn grid_for(&self, l: usize) -> (usize, usize) {
        self.grids.get(&l.to_string()).map_or_else(|| default_grid(l), |g| (g[0], g[1]))
    }

    /// Every (L, ordering, seed) point in sweep order.
    pub fn runs(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for &l in &self.lengths {
            let (rows, cols) = self.grid_for(l);
            for ordering in &self.orderings {
                for &seed in &self.seeds {
                    out.push(RunConfig {
                        l,
                        rows,
                        cols,
                        ordering: ordering.clone(),
                        seed,
                        physics: self.physics,
                        train: TrainConfig { seed, depth_cap: self.depth_cap, ..self.train.clone() },
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "L")]
    pub l: usize,
    pub rows: usize,
    pub cols: usize,
    pub ordering: String,
    pub seed: u64,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub train: TrainConfig,
}

impl RunConfig {
    /// Default settings for `l` sites on the reference grid, with adjoint gradients.
    pub fn for_length(l: usize) -> Self {
        let (rows, cols) = default_grid(l);
        Self {
            l,
            rows,
            cols,
            ordering: "interleaved".into(),
            seed: 0,
            physics: Physics::default(),
            train: TrainConfig { gradient: "adjoint".into(), ..TrainConfig::default() },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub schema_version: u32,
    /// The exact configuration that produced this record.
    pub run: RunConfig,
    #[serde(rename = "L")]
    pub l: usize,
    pub rows: usize,
    pub cols: usize,
    pub ordering: String,
    pub depth_cap: usize,
    pub seed: u64,
    pub params: HubbardParams,
    pub trace: TrainTrace,
    /// Lowest feasible stage energy; `None` if no stage met the constraint.
    pub final_energy: Option<f64>,
    pub deviation: Option<f64>,
}

impl BenchmarkRecord {
    /// Checks the stored deviation against a recomputation from the stored energy.
    pub fn verify(&self) -> Result<()> {
        let expect = self.final_energy.map(|e| energy_density_deviation(e, &self.params)).transpose()?;
        let ok = match (expect, self.deviation) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
            (None, None) => true,
            _ => false,
        };
        if !ok {
            bail!(Numerical, "record L={} seed={}: stored deviation {:?} != recomputed {:?}", self.l, self.seed, self.deviation, expect);
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            bail!(Parse, "record schema version {} (expected {SCHEMA_VERSION})", r.schema_version);
        }
        r.verify()?;
        Ok(r)
    }

    pub fn file_name(&self) -> String {
        format!("record_L{}_{}_seed{}.json", self.l, self.ordering, self.seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedRun {
    #[serde(rename = "L")]
    pub l: usize,
    pub ordering: String,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRun {
    pub records: Vec<BenchmarkRecord>,
    pub skipped: Vec<SkippedRun>,
}

/// Trains a single sweep point.
pub fn run_single(run: &RunConfig) -> Result<BenchmarkRecord> {
    let params = run.physics.params(run.l)?;
    let graph = build_grid(run.rows, run.cols)?;
    let problem = VqeProblem::new(params, &graph, &run.ordering)?;
    let trace = layer_by_layer_train(&run.train, &problem)?;
    let final_energy = trace.final_energy();
    let deviation = final_energy.map(|e| energy_density_deviation(e, &params)).transpose()?;
    Ok(BenchmarkRecord {
        schema_version: SCHEMA_VERSION,
        run: run.clone(),
        l: run.l,
        rows: run.rows,
        cols: run.cols,
        ordering: problem.ordering.kind.clone(),
        depth_cap: run.train.depth_cap,
        seed: run.seed,
        params,
        trace,
        final_energy,
        deviation,
    })
}

/// Runs every sweep point concurrently. Topology errors (ordering does not fit
/// the grid) skip the point; any other error aborts the sweep.
pub fn run_benchmark(cfg: &SweepConfig) -> Result<BenchmarkRun> {
    let runs = cfg.runs();
    let results: Vec<Result<BenchmarkRecord>> = runs.par_iter().map(run_single).collect();
    let mut out = BenchmarkRun::default();
    for (run, res) in runs.iter().zip(results) {
        match res {
            Ok(r) => out.records.push(r),
            Err(Error::Topology(reason)) => {
                out.skipped.push(SkippedRun { l: run.l, ordering: run.ordering.clone(), seed: run.seed, reason })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    records: Vec<String>,
    skipped: Vec<SkippedRun>,
}

/// Writes one JSON file per record plus `manifest.json`.
pub fn write_results(dir: &Path, run: &BenchmarkRun) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for r in &run.records {
        let path = dir.join(r.file_name());
        fs::write(&path, r.to_json()?).map_err(|e| Error::io(&path, e))?;
        names.push(r.file_name());
    }
    let manifest = Manifest { schema_version: SCHEMA_VERSION, records: names, skipped: run.skipped.clone() };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Reads a results directory written by [`write_results`], verifying every record.
pub fn load_results(dir: &Path) -> Result<BenchmarkRun> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut records = Vec::new();
    for name in &manifest.records {
        let p = dir.join(name);
        records.push(BenchmarkRecord::from_json(&fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?)?);
    }
    Ok(BenchmarkRun { records, skipped: manifest.skipped })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub inv_l: f64,
    pub deviation: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub ordering: String,
    pub seed: u64,
}

impl CurvePoint {
    pub fn new(l: usize, deviation: f64, ordering: &str, seed: u64) -> Self {
        Self { inv_l: 1.0 / l as f64, deviation, l, ordering: ordering.into(), seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EflCurve {
    /// Best deviation per length, ascending in L.
    pub points: Vec<CurvePoint>,
    pub l_star: usize,
}

/// Every record with a deviation as a plot point.
pub fn record_points(records: &[BenchmarkRecord]) -> Vec<CurvePoint> {
    records
        .iter()
        .filter_map(|r| r.deviation.map(|d| CurvePoint::new(r.l, d, &r.ordering, r.seed)))
        .collect()
}

/// Best point per length among `points`; `L*` is the argmin, ties going to
/// the smaller length.
pub fn efl_from_points(points: &[CurvePoint]) -> Result<EflCurve> {
    let mut best: BTreeMap<usize, &CurvePoint> = BTreeMap::new();
    for p in points {
        if !p.deviation.is_finite() {
            bail!(Argument, "non-finite deviation at L={}", p.l);
        }
        best.entry(p.l).and_modify(|b| if p.deviation < b.deviation { *b = p }).or_insert(p);
    }
    if best.len() < 2 {
        bail!(Argument, "need at least two chain lengths, got {}", best.len());
    }
    let points: Vec<CurvePoint> = best.into_values().cloned().collect();
    let mut l_star = points[0].l;
    let mut d_star = points[0].deviation;
    for p in &points[1..] {
        if p.deviation < d_star {
            l_star = p.l;
            d_star = p.deviation;
        }
    }
    Ok(EflCurve { points, l_star })
}

pub fn extract_efl(records: &[BenchmarkRecord]) -> Result<EflCurve> {
    efl_from_points(&record_points(records))
}

/// One curve per ordering (the per-ordering view of the same records).
pub fn efl_by_ordering(records: &[BenchmarkRecord]) -> BTreeMap<String, Result<EflCurve>> {
    let mut groups: BTreeMap<String, Vec<CurvePoint>> = BTreeMap::new();
    for p in record_points(records) {
        groups.entry(p.ordering.clone()).or_default().push(p);
    }
    groups.into_iter().map(|(k, v)| (k, efl_from_points(&v))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisShare {
    pub basis: Basis,
    /// `sqrt(sum c_i^2)` over the terms measured in this basis.
    pub weight: f64,
    pub shots: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBudget {
    pub shots: u64,
    pub wall_seconds: f64,
    pub bases: Vec<BasisShare>,
    /// Unit variance per term and no covariance within a basis: an upper-bound model.
    pub model: String,
}

fn basis_of(ops: &[(usize, Pauli)]) -> Option<Basis> {
    let first = ops.first()?.1;
    if ops.iter().any(|&(_, p)| p != first) {
        return None;
    }
    Some(match first {
        Pauli::X => Basis::AllX,
        Pauli::Y => Basis::AllY,
        Pauli::Z => Basis::AllZ,
    })
}

/// Shots to estimate the energy density to `epsilon_density` by measuring the
/// half-filling energy form in the three product bases.
pub fn measurement_budget(p: &HubbardParams, epsilon_density: f64, sample_rate_hz: f64) -> Result<MeasurementBudget> {
    if !(epsilon_density > 0.0 && sample_rate_hz > 0.0 && p.t > 0.0) {
        bail!(Argument, "precision, sample rate and t must be positive");
    }
    let mut sq = [0.0f64; 3];
    for term in energy_operator(p, EnergyMode::HalfFillingForm).terms() {
        let ops = term.ops();
        if ops.is_empty() {
            continue;
        }
        let b = basis_of(&ops).ok_or_else(|| Error::Classification(format!("term {term} mixes bases")))?;
        sq[b as usize] += term.coeff * term.coeff;
    }
    let weights = sq.map(f64::sqrt);
    let total_weight: f64 = weights.iter().sum();
    let eps_e = epsilon_density * p.l as f64 * p.t;
    let raw = (total_weight / eps_e).powi(2);
    let shots = if (raw - raw.round()).abs() <= 1e-9 * raw { raw.round() } else { raw.ceil() };
    let bases = [Basis::AllX, Basis::AllY, Basis::AllZ]
        .into_iter()
        .zip(weights)
        .map(|(basis, weight)| BasisShare { basis, weight, shots: shots * weight / total_weight })
        .collect();
    Ok(MeasurementBudget {
        shots: shots as u64,
        wall_seconds: shots / sample_rate_hz,
        bases,
        model: "upper bound: unit term variance, zero intra-basis covariance".into(),
    })
}

const CSV_HEADER: &str = "inv_L,deviation,L,ordering,seed";

pub fn plot_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(s, "{},{},{},{},{}", p.inv_l, p.deviation, p.l, p.ordering, p.seed);
    }
    s
}

pub fn parse_plot_csv(text: &str) -> Result<Vec<CurvePoint>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        bail!(Parse, "missing plot CSV header");
    }
    let bad = |line: &str| Error::Parse(format!("bad plot CSV row '{line}'"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(line));
            }
            Ok(CurvePoint {
                inv_l: f[0].parse().map_err(|_| bad(line))?,
                deviation: f[1].parse().map_err(|_| bad(line))?,
                l: f[2].parse().map_err(|_| bad(line))?,
                ordering: f[3].to_string(),
                seed: f[4].parse().map_err(|_| bad(line))?,
            })
        })
        .collect()
}

/// Deviation against `1/L`: one marker per point, one polyline per ordering.
pub fn plot_svg(points: &[CurvePoint]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const M: f64 = 48.0;
    let x_max = points.iter().map(|p| p.inv_l).fold(0.0, f64::max).max(1e-9) * 1.1;
    let (mut y_lo, mut y_hi) = points.iter().fold((0.0f64, 0.0f64), |(lo, hi), p| (lo.min(p.deviation), hi.max(p.deviation)));
    if y_hi - y_lo < 1e-12 {
        y_hi = y_lo + 1.0;
    }
    let pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
    let px = |x: f64| M + x / x_max * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y_lo) / (y_hi - y_lo) * (H - 2.0 * M);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{M} {top} V{bot} H{right}" fill="none" stroke="black"/>"#,
        top = M,
        bot = H - M,
        right = W - M
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">1/L</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(s, r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">deviation</text>"#, H / 2.0, H / 2.0);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut by_ordering: BTreeMap<&str, Vec<&CurvePoint>> = BTreeMap::new();
    for p in points {
        by_ordering.entry(p.ordering.as_str()).or_default().push(p);
    }
    for (k, (name, mut pts)) in by_ordering.into_iter().enumerate() {
        let color = colors[k % colors.len()];
        pts.sort_by(|a, b| a.inv_l.total_cmp(&b.inv_l).then(a.deviation.total_cmp(&b.deviation)));
        let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", px(p.inv_l), py(p.deviation))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, path.join(" "));
        for p in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(p.inv_l), py(p.deviation));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" fill="{color}">{name}</text>"#, W - M - 90.0, M + 14.0 * k as f64);
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<stem>.csv` and `<stem>.svg`; returns both paths.
pub fn emit_plot_data(points: &[CurvePoint], stem: &Path) -> Result<(PathBuf, PathBuf)> {
    if let Some(parent) = stem.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let csv = stem.with_extension("csv");
    let svg = stem.with_extension("svg");
    fs::write(&csv, plot_csv(points)).map_err(|e| Error::io(&csv, e))?;
    fs::write(&svg, plot_svg(points)).map_err(|e| Error::io(&svg, e))?;
    Ok((csv, svg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(d: &[(usize, f64)]) -> Vec<CurvePoint> {
        d.iter().map(|&(l, v)| CurvePoint::new(l, v, "interleaved", 0)).collect()
    }

    #[test]
    fn efl_argmin_and_ties() {
        let c = efl_from_points(&pts(&[(2, 0.09), (4, 0.05), (6, 0.03), (8, 0.15)])).unwrap();
        assert_eq!(c.l_star, 6);
        let c = efl_from_points(&pts(&[(2, 0.09), (4, 0.05), (6, 0.03), (8, 0.01)])).unwrap();
        assert_eq!(c.l_star, 8);
        let c = efl_from_points(&pts(&[(2, 0.09), (4, 0.04), (6, 0.04)])).unwrap();
        assert_eq!(c.l_star, 4);
        assert!(efl_from_points(&pts(&[(2, 0.1), (2, 0.05)])).is_err());
    }

    #[test]
    fn budget_reference_numbers() {
        let p = HubbardParams::half_filling(2, 1.0, 8.0).unwrap();
        let b = measurement_budget(&p, 1e-2, 5e3).unwrap();
        assert_eq!(b.shots, 45_000);
        assert!((b.wall_seconds - 9.0).abs() < 1e-12);
        let b = measurement_budget(&p, 1e-3, 5e3).unwrap();
        assert_eq!(b.shots, 4_500_000);
        assert!((b.wall_seconds - 900.0).abs() < 1e-9);
        assert!(measurement_budget(&p, 0.0, 5e3).is_err());
    }

    #[test]
    fn csv_roundtrip_and_empty_plot() {
        let p = pts(&[(2, 0.0914625568787659), (4, 1.0 / 3.0)]);
        assert_eq!(parse_plot_csv(&plot_csv(&p)).unwrap(), p);
        assert_eq!(plot_csv(&[]), format!("{CSV_HEADER}\n"));
        assert!(!plot_svg(&[]).contains("<circle"));
        assert_eq!(plot_csv(&p[..1]).lines().count(), 2);
    }

    #[test]
    fn sweep_toml_roundtrip() {
        let cfg = SweepConfig::default();
        assert_eq!(SweepConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
        let cfg = SweepConfig::from_toml("lengths = [2]\nseeds = [1, 2]\norderings = [\"vertical\"]\n[grids]\n2 = [1, 4]\n").unwrap();
        let runs = cfg.runs();
        assert_eq!(runs.len(), 2);
        assert_eq!((runs[0].rows, runs[0].cols), (1, 4));
        assert_eq!(cfg.physics, Physics::default());
    }
}
