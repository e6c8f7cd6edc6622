use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{Error, Result};
use crate::problems::fmt_f64;

/// Mean and sample standard deviation over the runs where a metric exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Runs contributing a value.
    pub count: usize,
}

impl MetricStats {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                mean: None,
                std: None,
                count,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean: Some(mean),
            std: Some(std),
            count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub problem: String,
    pub algorithm: String,
    pub runs: usize,
    pub igd: MetricStats,
    pub hv: MetricStats,
    /// Rank among the algorithms on this problem (1 is best).
    pub igd_rank: f64,
    pub hv_rank: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRank {
    pub algorithm: String,
    pub igd_rank: f64,
    pub hv_rank: f64,
    pub problems: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// One entry per (problem, algorithm), sorted by problem then algorithm.
    pub cells: Vec<CellSummary>,
    pub ranks: Vec<AlgorithmRank>,
}

/// Ranks of `scores` (lower is better). Equal scores share the mean of the
/// positions they occupy; missing scores rank behind every present one.
pub fn mean_ranks(scores: &[Option<f64>]) -> Vec<f64> {
    let key = |s: Option<f64>| s.unwrap_or(f64::INFINITY);
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| key(scores[a]).total_cmp(&key(scores[b])));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && key(scores[order[j + 1]]) == key(scores[order[i]]) {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Aggregates run records into per-problem statistics and average ranks.
pub fn summarize(records: &[RunRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::Structural("no run records to summarize".into()));
    }
    let mut groups: BTreeMap<String, BTreeMap<String, Vec<&RunRecord>>> = BTreeMap::new();
    for r in records {
        groups
            .entry(r.problem.label())
            .or_default()
            .entry(r.algorithm.as_str().to_string())
            .or_default()
            .push(r);
    }
    let mut cells = Vec::new();
    let mut totals: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for (problem, algos) in &groups {
        let stats: Vec<(String, usize, MetricStats, MetricStats)> = algos
            .iter()
            .map(|(a, rs)| {
                let igd: Vec<f64> = rs.iter().filter_map(|r| r.metrics.igd).collect();
                let hv: Vec<f64> = rs.iter().filter_map(|r| r.metrics.hv).collect();
                (
                    a.clone(),
                    rs.len(),
                    MetricStats::from_values(&igd),
                    MetricStats::from_values(&hv),
                )
            })
            .collect();
        let igd_ranks = mean_ranks(&stats.iter().map(|s| s.2.mean).collect::<Vec<_>>());
        let hv_ranks = mean_ranks(
            &stats
                .iter()
                .map(|s| s.3.mean.map(|v| -v))
                .collect::<Vec<_>>(),
        );
        for (k, (algorithm, runs, igd, hv)) in stats.into_iter().enumerate() {
            let t = totals.entry(algorithm.clone()).or_default();
            t.0 += igd_ranks[k];
            t.1 += hv_ranks[k];
            t.2 += 1;
            cells.push(CellSummary {
                problem: problem.clone(),
                algorithm,
                runs,
                igd,
                hv,
                igd_rank: igd_ranks[k],
                hv_rank: hv_ranks[k],
            });
        }
    }
    let ranks = totals
        .into_iter()
        .map(|(algorithm, (i, h, n))| AlgorithmRank {
            algorithm,
            igd_rank: i / n as f64,
            hv_rank: h / n as f64,
            problems: n,
        })
        .collect();
    Ok(Summary { cells, ranks })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), fmt_f64)
}

fn to_csv(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Serde(e.to_string()))
}

const TABLE_HEADER: [&str; 8] = [
    "algorithm",
    "runs",
    "igd_mean",
    "igd_std",
    "hv_mean",
    "hv_std",
    "igd_rank",
    "hv_rank",
];

impl Summary {
    pub fn problems(&self) -> Vec<String> {
        let mut p: Vec<String> = self.cells.iter().map(|c| c.problem.clone()).collect();
        p.dedup();
        p
    }

    /// Metric table for one problem: mean and std of each indicator per algorithm.
    pub fn table_csv(&self, problem: &str) -> Result<Vec<u8>> {
        let rows = self
            .cells
            .iter()
            .filter(|c| c.problem == problem)
            .map(|c| {
                vec![
                    c.algorithm.clone(),
                    c.runs.to_string(),
                    opt(c.igd.mean),
                    opt(c.igd.std),
                    opt(c.hv.mean),
                    opt(c.hv.std),
                    fmt_f64(c.igd_rank),
                    fmt_f64(c.hv_rank),
                ]
            })
            .collect();
        to_csv(&TABLE_HEADER, rows)
    }

    /// All cells in long form followed by one `average` row per algorithm.
    pub fn summary_csv(&self) -> Result<Vec<u8>> {
        let mut header = vec!["scope"];
        header.extend(TABLE_HEADER);
        let mut rows: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|c| {
                vec![
                    c.problem.clone(),
                    c.algorithm.clone(),
                    c.runs.to_string(),
                    opt(c.igd.mean),
                    opt(c.igd.std),
                    opt(c.hv.mean),
                    opt(c.hv.std),
                    fmt_f64(c.igd_rank),
                    fmt_f64(c.hv_rank),
                ]
            })
            .collect();
        for r in &self.ranks {
            rows.push(vec![
                "average".into(),
                r.algorithm.clone(),
                r.problems.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                fmt_f64(r.igd_rank),
                fmt_f64(r.hv_rank),
            ]);
        }
        to_csv(&header, rows)
    }

    /// Writes `tables/<problem>.csv` and `summary.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let tables = dir.join("tables");
        std::fs::create_dir_all(&tables).map_err(|e| Error::io(&tables, e))?;
        for p in self.problems() {
            let path = tables.join(format!("{p}.csv"));
            std::fs::write(&path, self.table_csv(&p)?).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join("summary.csv");
        std::fs::write(&path, self.summary_csv()?).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_example() {
        let s = MetricStats::from_values(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, Some(2.0));
        assert_eq!(s.std, Some(1.0));
        assert_eq!(MetricStats::from_values(&[]).mean, None);
        assert_eq!(MetricStats::from_values(&[4.0]).std, Some(0.0));
    }

    #[test]
    fn ranks_share_ties() {
        assert_eq!(mean_ranks(&[Some(1.0), Some(2.0)]), vec![1.0, 2.0]);
        assert_eq!(mean_ranks(&[Some(1.0), Some(1.0)]), vec![1.5, 1.5]);
        assert_eq!(
            mean_ranks(&[None, Some(3.0), Some(1.0), Some(3.0)]),
            vec![4.0, 2.5, 1.0, 2.5]
        );
    }
}
