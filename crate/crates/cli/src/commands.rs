//! The five commands. Each returns a structured result and writes its files
//! under the given output directory from a single thread.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rsgd::analysis::{
    constant_batch_constants, critical_batch, increasing_batch_constants, lemma1_bound, sfo_const_eps,
    sfo_eps_increasing, theorem_bound, tradeoff_curves, BoundInputs, ConstantBatchConstants, CriticalBatch,
    IncreasingBatchConstants, SfoMode, Theorem, TradeoffTables,
};
use rsgd::data::{build_problem, generate_dataset, write_dataset, write_run_csv, write_summary, Dataset, DatasetSpec};
use rsgd::schedule::{BatchSchedule, Decay};
use rsgd::{AnyProblem, Problem, RunRecord};
use serde::Serialize;

use crate::config::{AnalyzeConfig, ExperimentConfig, ProblemSection, TradeoffConfig};
use crate::error::{CliError, CliResult};

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}", dir.display()), e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

fn core_at(path: &Path) -> impl Fn(rsgd::Error) -> CliError + '_ {
    move |e| match e {
        rsgd::Error::Io(source) => CliError::io(format!("cannot write {}", path.display()), source),
        other => CliError::Core(other),
    }
}

/// Files written by `gen-data`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenDataOutcome {
    pub data_path: PathBuf,
    pub truth_path: Option<PathBuf>,
    pub warnings: Vec<String>,
}

/// Writes the dataset as `data.csv` (dense rows) or `triplets.csv`, plus the
/// planted basis as `truth.csv` when there is one.
pub fn cmd_gen_data(spec: &DatasetSpec, output_dir: &Path) -> CliResult<GenDataOutcome> {
    let generated = generate_dataset(spec)?;
    create_dir(output_dir)?;
    let name = match generated.data {
        Dataset::Dense(_) => "data.csv",
        Dataset::Masked { .. } => "triplets.csv",
    };
    let data_path = output_dir.join(name);
    write_dataset(&generated.data, &data_path).map_err(core_at(&data_path))?;
    let truth_path = match &generated.truth {
        Some(q) => {
            let path = output_dir.join("truth.csv");
            write_dataset(&Dataset::Dense(q.clone()), &path).map_err(core_at(&path))?;
            Some(path)
        }
        None => None,
    };
    Ok(GenDataOutcome { data_path, truth_path, warnings: generated.warnings })
}

/// Generates the data of a `[problem]` section and binds the objective.
pub fn build_experiment_problem(section: &ProblemSection) -> CliResult<(AnyProblem, Vec<String>)> {
    let generated = generate_dataset(&section.data)?;
    let problem = build_problem(&generated.data, section.objective(), section.r)?;
    Ok((problem, generated.warnings))
}

/// Runs every seed of `cfg` on `problem`, in parallel. Results keep seed order.
pub fn run_seeds(cfg: &ExperimentConfig, problem: &AnyProblem) -> CliResult<Vec<RunRecord>> {
    let labels = cfg.labels();
    let manifold = problem.manifold();
    let results: Vec<rsgd::Result<RunRecord>> = cfg
        .run
        .seeds
        .par_iter()
        .map(|&seed| rsgd::run(problem, &cfg.rsgd_config(seed, manifold)))
        .collect();
    results
        .into_iter()
        .zip(labels)
        .map(|(r, label)| {
            r.map_err(|e| match e {
                rsgd::Error::Diverged { iter, reason } => CliError::Diverged { label, iter, reason },
                other => CliError::Core(other),
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub labels: Vec<String>,
    pub records: Vec<RunRecord>,
    pub csv_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub warnings: Vec<String>,
}

/// Runs all seeds and writes `<label>.csv` per run plus `summary.json`.
pub fn cmd_run(cfg: &ExperimentConfig, output_dir: &Path) -> CliResult<RunOutcome> {
    cfg.validate()?;
    let (problem, warnings) = build_experiment_problem(&cfg.problem)?;
    let records = run_seeds(cfg, &problem)?;
    let labels = cfg.labels();
    create_dir(output_dir)?;
    let mut csv_paths = Vec::with_capacity(labels.len());
    for (label, record) in labels.iter().zip(&records) {
        let path = output_dir.join(format!("{label}.csv"));
        write_run_csv(&record.rows, &path).map_err(core_at(&path))?;
        csv_paths.push(path);
    }
    let summary_path = output_dir.join("summary.json");
    write_summary(labels.iter().map(String::as_str).zip(&records), &summary_path).map_err(core_at(&summary_path))?;
    Ok(RunOutcome { labels, records, csv_paths, summary_path, warnings })
}

/// One seed-averaged evaluation point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub iter: usize,
    pub sfo_cum: u64,
    pub grad_norm_sq: f64,
    pub loss: f64,
}

/// One experiment of a comparison, averaged over its seeds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareEntry {
    pub label: String,
    pub seeds: usize,
    pub total_sfo: u64,
    /// Minimum over evaluation points of the seed-averaged `‖grad f‖²`.
    pub min_grad_norm_sq: f64,
    /// Cumulative SFO at the first evaluation point with averaged `‖grad f‖² ≤ ε²`.
    pub sfo_to_eps: Option<u64>,
    pub frontier: Vec<FrontierPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub eps: f64,
    pub entries: Vec<CompareEntry>,
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "eps = {}", self.eps)?;
        writeln!(f, "{:<24} {:>14} {:>22} {:>14}", "label", "total_sfo", "min_grad_norm_sq", "sfo_to_eps")?;
        for e in &self.entries {
            let reached = e.sfo_to_eps.map_or_else(|| "not reached".to_string(), |s| s.to_string());
            writeln!(f, "{:<24} {:>14} {:>22.6e} {:>14}", e.label, e.total_sfo, e.min_grad_norm_sq, reached)?;
        }
        Ok(())
    }
}

/// Averages `‖grad f‖²` and loss across seeds at matched evaluation points.
pub fn seed_average(label: &str, records: &[RunRecord], eps: f64) -> CliResult<CompareEntry> {
    let first = records.first().ok_or_else(|| CliError::Config(format!("'{label}' has no runs")))?;
    let k = records.len() as f64;
    let mut frontier = Vec::with_capacity(first.rows.len());
    for (i, row) in first.rows.iter().enumerate() {
        let mut g = 0.0;
        let mut loss = 0.0;
        for r in records {
            let other = r.rows.get(i).filter(|o| o.iter == row.iter).ok_or_else(|| {
                CliError::Config(format!("runs of '{label}' have mismatched evaluation points"))
            })?;
            g += other.grad_norm * other.grad_norm;
            loss += other.loss;
        }
        frontier.push(FrontierPoint { iter: row.iter, sfo_cum: row.sfo_cum, grad_norm_sq: g / k, loss: loss / k });
    }
    let min_grad_norm_sq = frontier.iter().map(|p| p.grad_norm_sq).fold(f64::INFINITY, f64::min);
    let sfo_to_eps = frontier.iter().find(|p| p.grad_norm_sq <= eps * eps).map(|p| p.sfo_cum);
    Ok(CompareEntry {
        label: label.to_string(),
        seeds: records.len(),
        total_sfo: first.total_sfo,
        min_grad_norm_sq,
        sfo_to_eps,
        frontier,
    })
}

/// Runs each experiment over its seeds and compares the seed-averaged
/// gradient norms against cumulative SFO. Writes `compare.csv`,
/// `compare.txt`, `frontier_<name>.csv` and the per-run CSVs under `<name>/`.
pub fn cmd_compare(cfgs: &[ExperimentConfig], eps: f64, output_dir: &Path) -> CliResult<CompareReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(CliError::Config(format!("eps must be positive, got {eps}")));
    }
    if cfgs.is_empty() {
        return Err(CliError::Config("compare needs at least one configuration".into()));
    }
    let mut names = HashSet::new();
    for cfg in cfgs {
        cfg.validate()?;
        if !names.insert(cfg.run.name.as_str()) {
            return Err(CliError::Config(format!("labels must be unique; '{}' repeats", cfg.run.name)));
        }
    }
    let mut runs = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let (problem, _) = build_experiment_problem(&cfg.problem)?;
        runs.push(run_seeds(cfg, &problem)?);
    }

    create_dir(output_dir)?;
    let mut entries = Vec::with_capacity(cfgs.len());
    let mut table = String::from("label,total_sfo,min_grad_norm_sq,sfo_to_eps\n");
    for (cfg, records) in cfgs.iter().zip(&runs) {
        let name = &cfg.run.name;
        let run_dir = output_dir.join(name);
        create_dir(&run_dir)?;
        for (label, record) in cfg.labels().iter().zip(records) {
            let path = run_dir.join(format!("{label}.csv"));
            write_run_csv(&record.rows, &path).map_err(core_at(&path))?;
        }
        let entry = seed_average(name, records, eps)?;
        let mut frontier = String::from("iter,sfo_cum,grad_norm_sq,loss\n");
        for p in &entry.frontier {
            frontier.push_str(&format!("{},{},{:.16e},{:.16e}\n", p.iter, p.sfo_cum, p.grad_norm_sq, p.loss));
        }
        write_text(&output_dir.join(format!("frontier_{name}.csv")), &frontier)?;
        let reached = entry.sfo_to_eps.map_or_else(|| "not reached".to_string(), |s| s.to_string());
        table.push_str(&format!("{name},{},{:.16e},{reached}\n", entry.total_sfo, entry.min_grad_norm_sq));
        entries.push(entry);
    }
    let report = CompareReport { eps, entries };
    write_text(&output_dir.join("compare.csv"), &table)?;
    write_text(&output_dir.join("compare.txt"), &report.to_string())?;
    Ok(report)
}

/// Bound and SFO report for one set of schedule and problem constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub case: Theorem,
    pub t_w: usize,
    pub lemma1_bound: f64,
    pub theorem_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_batch: Option<ConstantBatchConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub increasing_batch: Option<IncreasingBatchConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Critical batch for the constant-batch case, when `eps` is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_batch: Option<CriticalBatch>,
    /// SFO for the configured batch to reach `eps`; `None` when infeasible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sfo_to_eps: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl fmt::Display for AnalyzeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "case: {}", serde_json::to_value(self.case).map_err(|_| fmt::Error)?.as_str().unwrap_or(""))?;
        writeln!(f, "T_w: {}", self.t_w)?;
        writeln!(f, "lemma1_bound: {}", self.lemma1_bound)?;
        writeln!(f, "theorem_bound: {}", self.theorem_bound)?;
        if let Some(c) = &self.constant_batch {
            writeln!(f, "Q1: {}\nQ2: {}", c.q1, c.q2)?;
        }
        if let Some(c) = &self.increasing_batch {
            writeln!(f, "Q1: {}\nQ2: {}\nQ3: {}", c.q1, c.q2, c.q3)?;
        }
        if let Some(eps) = self.eps {
            writeln!(f, "eps: {eps}")?;
        }
        if let Some(c) = &self.critical_batch {
            writeln!(f, "critical_batch: {}\nsfo_at_critical_batch: {}", c.b_star, c.sfo_at_star)?;
        }
        if let Some(s) = self.sfo_to_eps {
            writeln!(f, "sfo_to_eps: {s}")?;
        }
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        Ok(())
    }
}

/// Evaluates the summed and closed-form bounds, the case constants and,
/// given `eps`, the SFO needed to reach it.
pub fn cmd_analyze(cfg: &AnalyzeConfig) -> CliResult<AnalyzeReport> {
    let a = &cfg.analysis;
    let inputs = BoundInputs {
        f0_gap: a.f0_gap,
        l_r: a.l_r,
        sigma_sq: a.sigma_sq,
        lr: cfg.lr.clone(),
        bs: cfg.bs.clone(),
        total: a.total,
    };
    let case = Theorem::for_schedules(&inputs.lr, &inputs.bs);
    let lemma = lemma1_bound(&inputs)?;
    let closed = theorem_bound(case, &inputs)?;
    let mut report = AnalyzeReport {
        case,
        t_w: inputs.t_w(),
        lemma1_bound: lemma,
        theorem_bound: closed,
        constant_batch: None,
        increasing_batch: None,
        eps: a.eps,
        critical_batch: None,
        sfo_to_eps: None,
        notes: Vec::new(),
    };
    if inputs.lr.decay() == Decay::Diminishing {
        report.notes.push("the diminishing learning rate has no Q1/T + Q2 sigma^2/b form".into());
        return Ok(report);
    }
    if let Some(eps) = a.eps {
        if !(eps > 0.0) {
            return Err(CliError::Config(format!("eps must be positive, got {eps}")));
        }
    }
    match inputs.bs {
        BatchSchedule::Constant { b0 } => {
            let c = constant_batch_constants(&inputs)?;
            report.constant_batch = Some(c);
            if let Some(eps) = a.eps {
                report.critical_batch = Some(critical_batch(&c, a.sigma_sq, eps)?);
                match sfo_const_eps(&c, a.sigma_sq, eps, b0 as f64) {
                    Ok(s) => report.sfo_to_eps = Some(s),
                    Err(e) => report.notes.push(e.to_string()),
                }
            }
        }
        BatchSchedule::Exponential { b0, gamma, k } => {
            let c = increasing_batch_constants(&inputs)?;
            report.increasing_batch = Some(c);
            if let Some(eps) = a.eps {
                let stages = ((a.total - inputs.t_w()) / k).max(1) as f64;
                match sfo_eps_increasing(&c, a.sigma_sq, b0 as f64, gamma, eps, SfoMode::FixedM { m: stages }) {
                    Ok(s) => report.sfo_to_eps = Some(s),
                    Err(e) => report.notes.push(e.to_string()),
                }
            }
        }
        BatchSchedule::Polynomial { .. } => {
            report.increasing_batch = Some(increasing_batch_constants(&inputs)?);
            if a.eps.is_some() {
                report.notes.push("the SFO-to-eps formula covers exponential batch growth only".into());
            }
        }
    }
    Ok(report)
}

/// Tabulates `f(γ)`, `g(b₀)` and `h(M)`; writes `tradeoff_f.csv`,
/// `tradeoff_g.csv` and `tradeoff_h.csv` when `output_dir` is given.
pub fn cmd_tradeoff(cfg: &TradeoffConfig, output_dir: Option<&Path>) -> CliResult<TradeoffTables> {
    let t = &cfg.tradeoff;
    let tables = tradeoff_curves(&t.gammas, &t.b0s, &t.ms, t.gamma_fixed)?;
    if let Some(dir) = output_dir {
        create_dir(dir)?;
        for (name, header, rows) in
            [("tradeoff_f.csv", "gamma,f", &tables.f), ("tradeoff_g.csv", "b0,g", &tables.g), ("tradeoff_h.csv", "M,h", &tables.h)]
        {
            let mut text = format!("{header}\n");
            for (x, y) in rows {
                text.push_str(&format!("{x:.16e},{y:.16e}\n"));
            }
            write_text(&dir.join(name), &text)?;
        }
    }
    Ok(tables)
}

/// Text rendering of the trade-off tables.
pub fn tradeoff_text(tables: &TradeoffTables) -> String {
    let mut out = String::from("f(gamma) = 1 + gamma/(gamma - 1)\n");
    for (x, y) in &tables.f {
        out.push_str(&format!("  {x:>10} {y:.6}\n"));
    }
    out.push_str("g(b0) = b0^3/(b0^2 - 1)\n");
    for (x, y) in &tables.g {
        out.push_str(&format!("  {x:>10} {y:.6}\n"));
    }
    out.push_str(&format!("h(M) = gamma^M/M with gamma = {}\n", tables.gamma_fixed));
    for (x, y) in &tables.h {
        out.push_str(&format!("  {x:>10} {y:.6}\n"));
    }
    out
}
