//! Multi-run experiments: configuration, parallel execution, persisted run
//! records, metric tables and plot-ready fronts.
//!
//! Output layout under `output_dir`:
//!
//! ```text
//! experiment.toml                     configuration snapshot
//! runs/<problem>/<algorithm>/<seed>.json
//! tables/<problem>.csv                mean/std of IGD and HV per algorithm
//! summary.csv                         all cells plus average ranks
//! fronts/<problem>_reference.csv
//! fronts/<problem>_<algorithm>_<seed>.csv
//! fronts/<problem>.gp                 gnuplot script for the median runs
//! cache/                              reference fronts
//! manifest.json                       only when some runs failed
//! ```

mod config;
mod summary;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, OperatorParams, ProblemSpec};
pub use summary::{mean_ranks, summarize, AlgorithmRank, CellSummary, MetricStats, Summary};

use crate::algorithm::{Algorithm, GenerationRecord};
use crate::error::{Error, Result};
use crate::metrics::{hv_reference_point, MetricReport};
use crate::model::{AlgorithmConfig, ProblemDefinition, Solution};
use crate::problems::{
    fmt_f64, has_reference_front, reference_front_cached, write_front_csv, ProblemRegistry,
};

/// Everything needed to audit or replay one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    pub run_index: usize,
    pub seed: u64,
    pub config: AlgorithmConfig,
    /// Size of the reference front used for IGD.
    pub reference_points: usize,
    pub hv_reference_point: Option<Vec<f64>>,
    pub metrics: MetricReport,
    pub fes: u64,
    pub trace: Vec<GenerationRecord>,
    pub final_population: Vec<Solution>,
    pub raw_population: Vec<Solution>,
}

impl RunRecord {
    pub fn relative_path(&self) -> PathBuf {
        Path::new("runs")
            .join(self.problem.label())
            .join(self.algorithm.as_str())
            .join(format!("{}.json", self.seed))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn feasible_front(&self) -> Vec<Vec<f64>> {
        self.final_population
            .iter()
            .filter(|s| s.is_feasible())
            .map(|s| s.objectives.clone())
            .collect()
    }
}

/// Reference data shared by all runs on one problem.
#[derive(Clone, Debug, Default)]
pub struct ReferenceData {
    pub front: Option<Vec<Vec<f64>>>,
    pub hv_ref: Option<Vec<f64>>,
}

impl ReferenceData {
    /// Reference front for built-in problems that have one; empty otherwise.
    pub fn for_problem(name: &str, count: usize, cache_dir: &Path) -> Result<Self> {
        if !has_reference_front(name) {
            return Ok(Self::default());
        }
        let front = reference_front_cached(name, count, cache_dir)?;
        let hv_ref = hv_reference_point(&front);
        Ok(Self {
            front: Some(front),
            hv_ref,
        })
    }
}

/// Runs one algorithm once and scores the result.
pub fn execute_run(
    spec: &ProblemSpec,
    problem: &ProblemDefinition,
    algorithm: Algorithm,
    config: &AlgorithmConfig,
    run_index: usize,
    reference_points: usize,
    reference: &ReferenceData,
) -> Result<RunRecord> {
    let result = panic::catch_unwind(AssertUnwindSafe(|| algorithm.run(problem, config)))
        .unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            Err(Error::Contract(format!("run panicked: {msg}")))
        })?;
    let metrics = MetricReport::compute(
        &result.final_population,
        reference.front.as_deref(),
        reference.hv_ref.as_deref(),
    )?;
    Ok(RunRecord {
        problem: spec.clone(),
        algorithm,
        run_index,
        seed: config.seed,
        config: config.clone(),
        reference_points,
        hv_reference_point: reference.hv_ref.clone(),
        metrics,
        fes: result.fes,
        trace: result.trace,
        final_population: result.final_population,
        raw_population: result.raw_population,
    })
}

/// Reruns a record from its embedded configuration against the built-in
/// problems. The result should equal the record exactly.
pub fn replay(record: &RunRecord) -> Result<RunRecord> {
    replay_with(record, &ProblemRegistry::builtin(), None)
}

/// [`replay`] with a custom registry and an optional reference-front cache.
pub fn replay_with(
    record: &RunRecord,
    registry: &ProblemRegistry,
    cache_dir: Option<&Path>,
) -> Result<RunRecord> {
    let problem = record.problem.build(registry)?;
    let reference = match cache_dir {
        Some(dir) => {
            ReferenceData::for_problem(&record.problem.name, record.reference_points, dir)?
        }
        None if has_reference_front(&record.problem.name) => {
            let front =
                crate::problems::reference_front(&record.problem.name, record.reference_points)?;
            ReferenceData {
                hv_ref: hv_reference_point(&front),
                front: Some(front),
            }
        }
        None => ReferenceData::default(),
    };
    execute_run(
        &record.problem,
        &problem,
        record.algorithm,
        &record.config,
        record.run_index,
        record.reference_points,
        &reference,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    /// 1-based position in the experiment's job order (problem, algorithm, run).
    pub job: usize,
    pub problem: String,
    pub algorithm: Algorithm,
    pub run_index: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub completed: usize,
    pub failures: Vec<RunFailure>,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
    /// Absent when every run failed.
    pub summary: Option<Summary>,
}

impl ExperimentReport {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// [`run_experiment_with`] on the built-in problems.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentReport> {
    run_experiment_with(config, &ProblemRegistry::builtin(), jobs)
}

/// Validates the configuration, runs every (problem, algorithm, run) triple on
/// a pool of `jobs` workers (default: available parallelism), and writes the
/// report files. Failed runs do not stop the others; they are listed in
/// `manifest.json` and in the returned report.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    registry: &ProblemRegistry,
    jobs: Option<usize>,
) -> Result<ExperimentReport> {
    config.validate(registry)?;
    if jobs == Some(0) {
        return Err(Error::Config("jobs must be at least 1".into()));
    }
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let snapshot = out.join("experiment.toml");
    fs::write(&snapshot, config.to_toml()?).map_err(|e| Error::io(&snapshot, e))?;

    let cache = out.join("cache");
    let mut problems = Vec::new();
    for spec in &config.problems {
        let def = spec.build(registry)?;
        let reference = ReferenceData::for_problem(&spec.name, config.reference_points, &cache)?;
        problems.push((spec, def, reference));
    }

    let mut tasks = Vec::new();
    for (p, (_, def, _)) in problems.iter().enumerate() {
        for &algorithm in &config.algorithms {
            for run in 0..config.runs {
                tasks.push((p, algorithm, run, config.algorithm_config(def, run)));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<Result<RunRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(p, algorithm, run, cfg)| {
                let (spec, def, reference) = &problems[*p];
                execute_run(
                    spec,
                    def,
                    *algorithm,
                    cfg,
                    *run,
                    config.reference_points,
                    reference,
                )
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (job, ((p, algorithm, run, cfg), outcome)) in tasks.iter().zip(outcomes).enumerate() {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(RunFailure {
                job: job + 1,
                problem: problems[*p].0.label(),
                algorithm: *algorithm,
                run_index: *run,
                seed: cfg.seed,
                error: e.to_string(),
            }),
        }
    }

    for r in &records {
        let path = out.join(r.relative_path());
        write_file(&path, r.to_json()?.as_bytes())?;
    }
    write_fronts(out, &problems, &records)?;

    let manifest_path = out.join("manifest.json");
    if failures.is_empty() {
        if manifest_path.exists() {
            fs::remove_file(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        }
    } else {
        let manifest = Manifest {
            completed: records.len(),
            failures: failures.clone(),
        };
        write_file(
            &manifest_path,
            (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes(),
        )?;
    }

    let summary = if records.is_empty() {
        None
    } else {
        let s = summarize(&records)?;
        s.write(out)?;
        Some(s)
    };
    Ok(ExperimentReport {
        output_dir: out.clone(),
        records,
        failures,
        summary,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_objectives(path: &Path, points: &[Vec<f64>], m: usize) -> Result<()> {
    if points.is_empty() {
        let header: Vec<String> = (1..=m).map(|i| format!("f{i}")).collect();
        return write_file(path, (header.join(",") + "\n").as_bytes());
    }
    write_front_csv(path, points)
}

/// Per-run feasible fronts, the reference front, and one gnuplot script per
/// problem showing the median-IGD run of each algorithm.
fn write_fronts(
    out: &Path,
    problems: &[(&ProblemSpec, ProblemDefinition, ReferenceData)],
    records: &[RunRecord],
) -> Result<()> {
    let dir = out.join("fronts");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for (spec, def, reference) in problems {
        let label = spec.label();
        let m = def.n_obj();
        let mut lines = vec![
            format!("# {label}: reference front and the median-IGD run of each algorithm"),
            "set datafile separator ','".into(),
            "set key outside".into(),
            "set xlabel 'f1'".into(),
            "set ylabel 'f2'".into(),
        ];
        if m == 3 {
            lines.push("set zlabel 'f3'".into());
        }
        let cols = if m == 3 { "1:2:3" } else { "1:2" };
        let mut series = Vec::new();
        if let Some(front) = &reference.front {
            let name = format!("{label}_reference.csv");
            write_objectives(&dir.join(&name), front, m)?;
            series.push(format!(
                "'{name}' skip 1 using {cols} with lines title 'reference'"
            ));
        }
        let mine: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.problem.label() == label)
            .collect();
        for r in &mine {
            let name = format!("{label}_{}_{}.csv", r.algorithm.as_str(), r.seed);
            write_objectives(&dir.join(&name), &r.feasible_front(), m)?;
        }
        let mut algos: Vec<Algorithm> = mine.iter().map(|r| r.algorithm).collect();
        algos.dedup();
        for a in algos {
            let mut runs: Vec<&&RunRecord> = mine.iter().filter(|r| r.algorithm == a).collect();
            runs.sort_by(|x, y| {
                let key = |r: &RunRecord| r.metrics.igd.unwrap_or(f64::INFINITY);
                key(x).total_cmp(&key(y)).then(x.seed.cmp(&y.seed))
            });
            let median = runs[(runs.len() - 1) / 2];
            series.push(format!(
                "'{label}_{}_{}.csv' skip 1 using {cols} with points title '{} (seed {})'",
                a.as_str(),
                median.seed,
                a.as_str(),
                median.seed
            ));
        }
        if !series.is_empty() {
            let cmd = if m == 3 { "splot" } else { "plot" };
            lines.push(format!("{cmd} {}", series.join(", \\\n     ")));
        }
        write_file(
            &dir.join(format!("{label}.gp")),
            (lines.join("\n") + "\n").as_bytes(),
        )?;
    }
    Ok(())
}

/// Loads every run record under `<dir>/runs`, in path order.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
            .collect::<Result<_>>()?;
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, out)?;
            } else if p.extension().is_some_and(|e| e == "json") {
                out.push(p);
            }
        }
        Ok(())
    }
    let runs = dir.join("runs");
    if !runs.is_dir() {
        return Err(Error::Structural(format!(
            "{} has no runs directory",
            dir.display()
        )));
    }
    let mut paths = Vec::new();
    walk(&runs, &mut paths)?;
    paths.iter().map(|p| RunRecord::load(p)).collect()
}

/// Rebuilds the tables and `summary.csv` of an output directory from its run records.
pub fn summarize_dir(dir: &Path) -> Result<Summary> {
    let records = load_records(dir)?;
    let summary = summarize(&records)?;
    summary.write(dir)?;
    Ok(summary)
}

/// Reads a CSV written by the harness back into (header, rows of cells).
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// Formats an optional metric the way tables do (`NaN` when absent).
pub fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), fmt_f64)
}
