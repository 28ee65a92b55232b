use std::path::Path;
use std::process::Command;

use rsgd_cli::{cmd_analyze, cmd_compare, cmd_gen_data, cmd_run, cmd_tradeoff, AnalyzeConfig, ExperimentConfig, TradeoffConfig};

const EXPERIMENT: &str = r#"
[problem]
kind = "gaussian_low_rank"
N = 60
n = 10
r_true = 2
noise = 0.1
seed = 3
r = 2

[lr]
kind = "cosine"
eta_max = 0.05

[bs]
kind = "bs_exp"
b0 = 2
gamma = 3.0
K = 20

[run]
T = 60
eval_period = 5
seeds = [0, 1]
name = "demo"
"#;

fn experiment() -> ExperimentConfig {
    ExperimentConfig::from_toml_str(EXPERIMENT).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn zero_step_single_iteration_run_reports_one_batch() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = experiment();
    cfg.lr = rsgd::schedule::LrSchedule::Constant { eta_max: 0.0 };
    cfg.bs = rsgd::schedule::BatchSchedule::Constant { b0: 7 };
    cfg.run.total = 1;
    cfg.run.eval_period = 1;
    let out = cmd_run(&cfg, dir.path()).unwrap();
    assert_eq!(out.labels, ["demo-s0", "demo-s1"]);
    for record in &out.records {
        assert_eq!(record.total_sfo, 7);
        assert_eq!(record.rows.len(), 1);
    }
    let text = std::fs::read_to_string(&out.csv_paths[0]).unwrap();
    assert!(text.starts_with("iter,batch_size,lr,sfo_cum,grad_norm,loss,wall_ms"));
    assert!(out.summary_path.exists());
}

#[test]
fn compare_reports_geometric_sfo_totals() {
    let dir = tempfile::tempdir().unwrap();
    let growing = experiment();
    let mut constant = experiment();
    constant.bs = rsgd::schedule::BatchSchedule::Constant { b0: 2 };
    constant.run.name = "flat".into();
    let report = cmd_compare(&[growing, constant], 1e-2, dir.path()).unwrap();
    // T = 3K with b0 = 2, γ = 3: b0·K·(γ³ − 1)/(γ − 1)
    assert_eq!(report.entries[0].total_sfo, 2 * 20 * 26 / 2);
    assert_eq!(report.entries[1].total_sfo, 2 * 60);
    for e in &report.entries {
        assert_eq!(e.seeds, 2);
        assert!(e.frontier.windows(2).all(|w| w[0].sfo_cum <= w[1].sfo_cum));
    }
    for f in ["compare.csv", "compare.txt", "frontier_demo.csv", "frontier_flat.csv", "demo/demo-s0.csv", "flat/flat-s1.csv"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert!(csv.starts_with("label,total_sfo,min_grad_norm_sq,sfo_to_eps"));
}

#[test]
fn compare_rejects_duplicate_names() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cmd_compare(&[experiment(), experiment()], 1e-2, dir.path()).is_err());
}

#[test]
fn analyze_worked_example() {
    let cfg = AnalyzeConfig::from_toml_str(
        r#"
[analysis]
f0_gap = 1.0
L_r = 1.0
sigma_sq = 1.0
T = 10

[lr]
kind = "constant"
eta_max = 1.0

[bs]
kind = "bs_constant"
b0 = 4
"#,
    )
    .unwrap();
    let report = cmd_analyze(&cfg).unwrap();
    assert!((report.lemma1_bound - 0.45).abs() < 1e-12);
    assert!((report.theorem_bound - 0.45).abs() < 1e-12);
    let text = report.to_string();
    assert!(text.contains("lemma1_bound: 0.45"), "{text}");
}

#[test]
fn analyze_exponential_batch_reports_sfo() {
    let cfg = AnalyzeConfig::from_toml_str(
        r#"
[analysis]
f0_gap = 1.0
L_r = 1.0
sigma_sq = 1e-6
T = 3000
eps = 0.05

[lr]
kind = "cosine"
eta_max = 0.1

[bs]
kind = "bs_exp"
b0 = 27
gamma = 3.0
K = 1000
"#,
    )
    .unwrap();
    let report = cmd_analyze(&cfg).unwrap();
    assert!(report.increasing_batch.is_some());
    assert!(report.theorem_bound >= report.lemma1_bound);
    assert!(report.sfo_to_eps.unwrap() > 0.0);
}

#[test]
fn config_round_trips_and_runs_deterministically() {
    let cfg = experiment();
    let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
    assert_eq!(again, cfg);
    let dir = tempfile::tempdir().unwrap();
    let a = cmd_run(&cfg, &dir.path().join("a")).unwrap();
    let b = cmd_run(&again, &dir.path().join("b")).unwrap();
    for (ra, rb) in a.records.iter().zip(&b.records) {
        assert_eq!(ra.total_sfo, rb.total_sfo);
        assert_eq!(ra.min_grad_norm_sq.to_bits(), rb.min_grad_norm_sq.to_bits());
        assert_eq!(ra.final_point.value(), rb.final_point.value());
    }
}

#[test]
fn gen_data_writes_data_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = experiment();
    let out = cmd_gen_data(&cfg.problem.data, dir.path()).unwrap();
    let text = std::fs::read_to_string(&out.data_path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.is_empty()).count(), 60);
    assert!(out.truth_path.unwrap().exists());

    let mut masked = cfg.problem.data.clone();
    masked.kind = rsgd::data::DatasetKind::MaskedLowRank;
    masked.mask_density = 0.5;
    let out = cmd_gen_data(&masked, &dir.path().join("masked")).unwrap();
    assert!(out.data_path.ends_with("triplets.csv"));
}

#[test]
fn tradeoff_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let tables = cmd_tradeoff(&TradeoffConfig::default(), Some(dir.path())).unwrap();
    assert!(!rsgd_cli::tradeoff_text(&tables).is_empty());
    for f in ["tradeoff_f.csv", "tradeoff_g.csv", "tradeoff_h.csv"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
}

fn rsgd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rsgd"))
}

#[test]
fn binary_runs_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "exp.toml", EXPERIMENT);
    let out = rsgd().args(["run", "--config"]).arg(&config).arg("--output").arg(dir.path().join("out")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("demo-s0: total_sfo"), "{stdout}");
    assert!(dir.path().join("out/summary.json").exists());
}

#[test]
fn binary_exits_2_on_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let bad = EXPERIMENT.replace("T = 60", "T = 0");
    let config = write(dir.path(), "bad.toml", &bad);
    let out = rsgd().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let unknown = write(dir.path(), "unknown.toml", &EXPERIMENT.replace("r = 2", "r = 2\nrank = 4"));
    let out = rsgd().args(["run", "--config"]).arg(&unknown).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn binary_exits_3_on_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..4).map(|i| format!("1e300,{i}e299,1e300\n")).collect();
    let data = write(dir.path(), "huge.csv", &rows);
    let config = format!(
        r#"
[problem]
kind = "dense_csv"
path = "{}"
r = 1

[lr]
kind = "constant"
eta_max = 0.1

[bs]
kind = "bs_constant"
b0 = 2

[run]
T = 5
"#,
        data.display()
    );
    let config = write(dir.path(), "huge.toml", &config);
    let out = rsgd().args(["run", "--config"]).arg(&config).arg("--output").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
}
