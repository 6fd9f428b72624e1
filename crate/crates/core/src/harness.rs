//! Batch experiments: seeded trials, per-trial CSV rows and grouped summaries.
//!
//! A config is a flat `key = value` file (`#` starts a comment). Every
//! combination of sparsity `s` and projection count runs `trials` trials with
//! seeds `seed + trial`, so the same scenes are reused across projection
//! counts and runs are reproducible bit for bit.
//!
//! ```text
//! name = sweep
//! experiment = proj-sweep
//! d = 3
//! cells = 40000
//! s = 200
//! projections = 5,10,20,30
//! trials = 200
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{difference_set, equivalent};
use crate::noise::{noisy_pipeline, NoisyParams};
use crate::rng::{stream, DIRECTION_STREAM, SCENE_STREAM};
use crate::scene::{generate, theta, SceneModel, SceneParams};
use crate::search::{mistr, MistrParams};

/// Fixed leading CSV columns; `projections` and `support_ok` follow.
pub const CSV_HEADER: &str = "trial,s,n,d,theta,sigma,k,kappa,exact,equivalent,depth,nodes,wall_ms,projections,support_ok";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RecoveryProb,
    ProjSweep,
    Timing,
    CollabDepth,
    DiffsetSize,
    NoisyPr,
    UniformRecovery,
    UniformTiming,
}

impl ExperimentKind {
    pub fn is_timing(self) -> bool {
        matches!(self, ExperimentKind::Timing | ExperimentKind::UniformTiming)
    }

    fn default_model(self) -> SceneModel {
        match self {
            ExperimentKind::UniformRecovery | ExperimentKind::UniformTiming => SceneModel::UniformCube,
            _ => SceneModel::Gaussian,
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "recovery-prob" => ExperimentKind::RecoveryProb,
            "proj-sweep" => ExperimentKind::ProjSweep,
            "timing" => ExperimentKind::Timing,
            "collab-depth" => ExperimentKind::CollabDepth,
            "diffset-size" => ExperimentKind::DiffsetSize,
            "noisy-pr" => ExperimentKind::NoisyPr,
            "uniform-recovery" => ExperimentKind::UniformRecovery,
            "uniform-timing" => ExperimentKind::UniformTiming,
            other => return Err(Error::invalid(format!("unknown experiment `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub model: SceneModel,
    pub d: usize,
    /// Sparsity exponent; with `s` it fixes `n = s^(1/(dθ))`.
    pub theta: Option<f64>,
    /// Grid volume `n^d`; fixes `n = cells^(1/d)`.
    pub cells: Option<f64>,
    pub n: Option<f64>,
    pub s: Vec<u64>,
    pub projections: Vec<usize>,
    pub c: f64,
    pub trials: usize,
    pub seed: u64,
    pub sigma: f64,
    pub tau_thresh: f64,
    /// Half-width of the noisy-pipeline window in units of `1/n`.
    pub extent: f64,
    pub node_budget: u64,
    pub output_dir: PathBuf,
    /// Record wall time; runs trials sequentially after one discarded warm-up.
    pub timing: bool,
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, kind: ExperimentKind) -> Self {
        ExperimentConfig {
            name: name.into(),
            kind,
            model: kind.default_model(),
            d: if kind == ExperimentKind::NoisyPr { 2 } else { 3 },
            theta: None,
            cells: None,
            n: None,
            s: Vec::new(),
            projections: vec![MistrParams::default().projections],
            c: MistrParams::default().c,
            trials: 100,
            seed: 0,
            sigma: 0.0,
            tau_thresh: 0.0114,
            extent: 2.0,
            node_budget: MistrParams::default().node_budget,
            output_dir: PathBuf::from("."),
            timing: kind.is_timing(),
            parallel: true,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected `key = value`, got `{line}`") })?;
            pairs.push((i + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(_, k, _)| k == "experiment")
            .ok_or_else(|| Error::Parse { line: 1, msg: "missing `experiment`".into() })?
            .2
            .parse()?;
        let mut cfg = ExperimentConfig::new("experiment", kind);
        for (line, key, value) in pairs {
            let err = |msg: String| Error::Parse { line, msg };
            macro_rules! num {
                () => {
                    value.parse().map_err(|e| err(format!("`{key}`: {e}")))?
                };
            }
            match key.as_str() {
                "experiment" => {}
                "name" => cfg.name = value,
                "model" => cfg.model = value.parse()?,
                "d" => cfg.d = num!(),
                "theta" => cfg.theta = Some(num!()),
                "cells" => cfg.cells = Some(num!()),
                "n" => cfg.n = Some(num!()),
                "s" => cfg.s = parse_list(&value).map_err(|e| err(format!("`s`: {e}")))?,
                "projections" => cfg.projections = parse_list(&value).map_err(|e| err(format!("`projections`: {e}")))?,
                "c" => cfg.c = num!(),
                "trials" => cfg.trials = num!(),
                "seed" => cfg.seed = num!(),
                "sigma" => cfg.sigma = num!(),
                "tau_thresh" => cfg.tau_thresh = num!(),
                "extent" => cfg.extent = num!(),
                "node_budget" => cfg.node_budget = num!(),
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "timing" => cfg.timing = num!(),
                "parallel" => cfg.parallel = num!(),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.d < 2 {
            return Err(Error::invalid("d must be at least 2"));
        }
        if self.projections.is_empty() || self.projections.contains(&0) {
            return Err(Error::invalid("projections must be a nonempty list of positive counts"));
        }
        if !(self.c > 1.0) {
            return Err(Error::invalid("c must exceed 1"));
        }
        if let Some(t) = self.theta {
            if !(t > 0.0) {
                return Err(Error::invalid("theta must be positive"));
            }
        }
        if self.s.is_empty() && (self.theta.is_none() || (self.n.is_none() && self.cells.is_none())) {
            return Err(Error::invalid("give `s`, or `theta` together with `n` or `cells`"));
        }
        if self.n.is_none() && self.cells.is_none() && self.theta.is_none() {
            return Err(Error::invalid("give one of `n`, `cells` or `theta` to fix the resolution"));
        }
        self.scene_grid()?;
        Ok(())
    }

    /// Resolution for a given sparsity.
    fn resolution(&self, s: u64) -> Result<f64> {
        let n = if let Some(n) = self.n {
            n
        } else if let Some(cells) = self.cells {
            cells.powf(1.0 / self.d as f64)
        } else {
            let t = self.theta.expect("validated");
            (s as f64).powf(1.0 / (self.d as f64 * t))
        };
        Ok(match self.model {
            // integer side lengths; the fudge absorbs roots like 1000^(1/3)
            SceneModel::UniformCube => (n + 1e-9).floor(),
            SceneModel::Gaussian => n,
        })
    }

    /// `(s, n)` pairs in config order.
    pub fn scene_grid(&self) -> Result<Vec<(u64, f64)>> {
        if self.s.is_empty() {
            let t = self.theta.expect("validated");
            let n = self.resolution(0)?;
            return Ok(vec![(crate::scene::sparsity_for(t, n, self.d), n)]);
        }
        self.s.iter().map(|&s| Ok((s, self.resolution(s)?))).collect()
    }

    fn mistr_params(&self, projections: usize) -> MistrParams {
        MistrParams { projections, c: self.c, node_budget: self.node_budget }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, T::Err> {
    value.split(',').map(|v| v.trim().parse()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    /// Index within its group; the trial seed is `seed + trial`.
    pub trial: usize,
    pub s: u64,
    pub n: f64,
    pub d: usize,
    pub theta: f64,
    pub sigma: f64,
    pub projections: usize,
    /// Realized support size.
    pub k: usize,
    pub kappa: usize,
    pub exact: bool,
    pub equivalent: bool,
    /// Thresholding recovered the true difference set; always true without noise.
    pub support_ok: bool,
    /// 0 when the solver failed or did not run.
    pub depth: usize,
    pub nodes: u64,
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn success(&self) -> bool {
        self.support_ok && self.exact && self.equivalent
    }

    fn csv_row(&self, out: &mut String) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{},{}",
            self.trial,
            self.s,
            self.n,
            self.d,
            self.theta,
            self.sigma,
            self.k,
            self.kappa,
            self.exact,
            self.equivalent,
            self.depth,
            self.nodes,
            self.wall_ms,
            self.projections,
            self.support_ok
        )
        .unwrap();
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuntimeSummary {
    pub mean: f64,
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupSummary {
    pub s: u64,
    pub theta: f64,
    pub sigma: f64,
    pub projections: usize,
    pub n: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub exact_rate: f64,
    pub errors: usize,
    pub mean_depth: f64,
    pub depth1_fraction: f64,
    pub mean_k: f64,
    pub mean_kappa: f64,
    /// Mean of `κ / (k(k-1) + 1)`.
    pub mean_kappa_ratio: f64,
    pub mean_nodes: f64,
    pub runtime_ms: RuntimeSummary,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<GroupSummary>,
}

impl ExperimentOutput {
    pub fn group(&self, s: u64, projections: usize) -> Option<&GroupSummary> {
        self.summary.iter().find(|g| g.s == s && g.projections == projections)
    }
}

/// Order-independent mean.
fn mean(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Aggregates records per `(s, θ, σ, projections)`, sorted by that key.
pub fn summarize(records: &[ExperimentRecord]) -> Result<Vec<GroupSummary>> {
    if records.is_empty() {
        return Err(Error::invalid("no records to summarize"));
    }
    let key = |r: &ExperimentRecord| (r.s, r.theta.to_bits(), r.sigma.to_bits(), r.projections);
    let mut keys: Vec<_> = records.iter().map(key).collect();
    keys.sort_by(|a, b| {
        (a.0, f64::from_bits(a.1), f64::from_bits(a.2), a.3)
            .partial_cmp(&(b.0, f64::from_bits(b.1), f64::from_bits(b.2), b.3))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    keys.dedup();

    let summaries = keys
        .into_iter()
        .map(|k| {
            let group: Vec<&ExperimentRecord> = records.iter().filter(|r| key(r) == k).collect();
            let count = group.len();
            let frac = |f: &dyn Fn(&ExperimentRecord) -> bool| group.iter().filter(|r| f(r)).count() as f64 / count as f64;
            let field = |f: &dyn Fn(&ExperimentRecord) -> f64| mean(group.iter().map(|r| f(r)).collect());
            let mut times: Vec<f64> = group.iter().map(|r| r.wall_ms).collect();
            times.sort_by(f64::total_cmp);
            let successes = group.iter().filter(|r| r.success()).count();
            GroupSummary {
                s: k.0,
                theta: f64::from_bits(k.1),
                sigma: f64::from_bits(k.2),
                projections: k.3,
                n: group[0].n,
                trials: count,
                successes,
                success_rate: successes as f64 / count as f64,
                exact_rate: frac(&|r| r.exact),
                errors: group.iter().filter(|r| r.error.is_some()).count(),
                mean_depth: field(&|r| r.depth as f64),
                depth1_fraction: frac(&|r| r.depth == 1),
                mean_k: field(&|r| r.k as f64),
                mean_kappa: field(&|r| r.kappa as f64),
                mean_kappa_ratio: field(&|r| r.kappa as f64 / (r.k * r.k.saturating_sub(1) + 1) as f64),
                mean_nodes: field(&|r| r.nodes as f64),
                runtime_ms: RuntimeSummary {
                    mean: mean(times.clone()),
                    median: quantile(&times, 0.5),
                    p10: quantile(&times, 0.1),
                    p90: quantile(&times, 0.9),
                },
            }
        })
        .collect();
    Ok(summaries)
}

struct TrialSpec {
    s: u64,
    n: f64,
    projections: usize,
    trial: usize,
}

fn run_trial(cfg: &ExperimentConfig, spec: &TrialSpec) -> ExperimentRecord {
    let seed = cfg.seed.wrapping_add(spec.trial as u64);
    let scene = SceneParams::new(cfg.model, spec.s, spec.n, cfg.d);
    let mut record = ExperimentRecord {
        trial: spec.trial,
        s: spec.s,
        n: spec.n,
        d: cfg.d,
        theta: theta(spec.s, spec.n, cfg.d),
        sigma: cfg.sigma,
        projections: spec.projections,
        k: 0,
        kappa: 0,
        exact: false,
        equivalent: false,
        support_ok: true,
        depth: 0,
        nodes: 0,
        wall_ms: 0.0,
        error: None,
    };
    let params = cfg.mistr_params(spec.projections);

    if cfg.kind == ExperimentKind::NoisyPr {
        let mut noisy = NoisyParams::new(scene, cfg.sigma, cfg.tau_thresh);
        noisy.extent = cfg.extent;
        noisy.mistr = params;
        match noisy_pipeline(&noisy, seed) {
            Ok(r) => {
                record.k = r.realized_k;
                record.kappa = r.kappa;
                record.support_ok = r.support_ok;
                record.exact = r.mistr_exact;
                record.equivalent = r.equivalent;
                record.depth = r.depth;
                record.wall_ms = r.wall_ms;
            }
            Err(e) => record.error = Some(e.to_string()),
        }
        return record;
    }

    let outcome = (|| -> Result<()> {
        let v = generate(&scene, &mut stream(seed, SCENE_STREAM))?;
        let w = difference_set(&v)?;
        record.k = v.len();
        record.kappa = w.kappa();
        let start = Instant::now();
        let result = mistr(&w, &params, &mut stream(seed, DIRECTION_STREAM));
        record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let result = result?;
        record.exact = result.exact;
        record.equivalent = equivalent(&result.recovered, &v)?;
        record.depth = result.depth_used;
        record.nodes = result.stats.nodes_explored;
        Ok(())
    })();
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
    }
    record
}

/// Runs every trial of the config; errors inside a trial become failed rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut specs = Vec::new();
    for (s, n) in cfg.scene_grid()? {
        for &projections in &cfg.projections {
            specs.extend((0..cfg.trials).map(|trial| TrialSpec { s, n, projections, trial }));
        }
    }

    let mut records: Vec<ExperimentRecord> = if cfg.timing {
        if let Some(first) = specs.first() {
            // warm-up, discarded
            run_trial(cfg, first);
        }
        specs.iter().map(|spec| run_trial(cfg, spec)).collect()
    } else if cfg.parallel {
        specs.par_iter().map(|spec| run_trial(cfg, spec)).collect()
    } else {
        specs.iter().map(|spec| run_trial(cfg, spec)).collect()
    };
    if !cfg.timing {
        for r in &mut records {
            r.wall_ms = 0.0;
        }
    }
    let summary = summarize(&records)?;
    Ok(ExperimentOutput { records, summary })
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        r.csv_row(&mut out);
    }
    out
}

/// Writes `<name>.csv` and `<name>.summary.json` under the output directory.
pub fn write_outputs(cfg: &ExperimentConfig, output: &ExperimentOutput) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join(format!("{}.csv", cfg.name));
    let json_path = cfg.output_dir.join(format!("{}.summary.json", cfg.name));
    std::fs::write(&csv_path, records_to_csv(&output.records))?;
    let json = serde_json::json!({
        "name": cfg.name,
        "experiment": cfg.kind,
        "model": cfg.model,
        "d": cfg.d,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "groups": output.summary,
    });
    let text = serde_json::to_string_pretty(&json).map_err(|e| Error::invalid(e.to_string()))?;
    std::fs::write(&json_path, text + "\n")?;
    Ok((csv_path, json_path))
}
