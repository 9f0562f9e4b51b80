//! Running sweeps and summarizing them.
//!
//! [`run_experiment`] generates and solves every repetition of every
//! configuration point of an [`ExperimentPlan`] on a bounded worker pool and
//! returns one [`ExperimentRecord`] per instance, ordered by configuration
//! point and repetition. [`aggregate`] turns records into per-point
//! summaries and least-squares fits of solve time.

pub mod stats;

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{DocError, FORMAT_VERSION};
use crate::model::{RoutingConfig, SolveStatus};
use crate::scenario::{ExperimentPlan, GenError, Sweep};
use crate::solver::{solve_exact, SolverLimits};

pub use stats::{median, ols, spearman, summarize, Regression, StatsError, Summary};

pub const CSV_HEADER: &str = "preset,slices,sfcs,nfs,nodes,seed,active_nodes,solve_time_s,status";

/// Outcome of one generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub preset: String,
    pub slices: usize,
    pub sfcs: usize,
    pub nfs: usize,
    pub nodes: usize,
    pub seed: u64,
    /// Zero when no placement was found.
    pub active_nodes: usize,
    pub solve_time_s: f64,
    pub status: SolveStatus,
}

impl ExperimentRecord {
    pub fn placed(&self) -> bool {
        self.active_nodes > 0
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub limits: SolverLimits,
    pub routing: RoutingConfig,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 0,
            limits: SolverLimits::with_time_budget(10.0),
            routing: RoutingConfig::default(),
        }
    }
}

/// Generate and solve every instance of `plan`.
pub fn run_experiment(
    plan: &ExperimentPlan,
    master_seed: u64,
    options: &RunOptions,
) -> Result<Vec<ExperimentRecord>, GenError> {
    let jobs: Vec<(usize, usize)> = (0..plan.points.len())
        .flat_map(|p| (0..plan.repetitions).map(move |r| (p, r)))
        .collect();
    let run = |&(p, rep): &(usize, usize)| -> Result<ExperimentRecord, GenError> {
        let point = &plan.points[p];
        let seed = plan.instance_seed(master_seed, point, rep);
        let (graph, requests) = plan.instance(point, seed)?;
        let start = Instant::now();
        let sol = solve_exact(&graph, &requests, &options.routing, &options.limits);
        let solve_time_s = start.elapsed().as_secs_f64();
        Ok(ExperimentRecord {
            preset: point.label.clone(),
            slices: point.slices,
            sfcs: point.sfcs,
            nfs: point.nfs,
            nodes: point.nodes,
            seed,
            active_nodes: if sol.has_placement() { sol.objective } else { 0 },
            solve_time_s,
            status: sol.status,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .expect("worker pool starts");
    pool.install(|| jobs.par_iter().map(run).collect())
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected CSV header `{0}`")]
    Header(String),
}

pub fn write_records<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<ExperimentRecord>, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(CsvError::Header(header));
    }
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Summary of one configuration point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointStats {
    pub label: String,
    pub slices: usize,
    pub sfcs: usize,
    pub nfs: usize,
    pub nodes: usize,
    /// Value of the swept dimension.
    pub x: usize,
    pub records: usize,
    pub placed: usize,
    pub timeouts: usize,
    pub infeasible: usize,
    /// Active nodes over placed records; `None` when nothing was placed.
    pub active: Option<Summary>,
    pub time: Option<Summary>,
    pub median_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateStats {
    pub sweep: Sweep,
    pub points: Vec<PointStats>,
    /// Solve time against the swept value, over placed records.
    pub time_vs_x: Option<Regression>,
    /// Solve time against active nodes, over placed records.
    pub time_vs_active: Option<Regression>,
    /// Active nodes over every placed record.
    pub active_overall: Option<Summary>,
}

impl AggregateStats {
    pub fn regression(&self) -> Result<Regression, StatsError> {
        self.time_vs_x.ok_or(StatsError::RegressionUndefined)
    }

    pub fn time_vs_active_regression(&self) -> Result<Regression, StatsError> {
        self.time_vs_active.ok_or(StatsError::RegressionUndefined)
    }

    /// Spearman correlation between the swept value and mean active nodes.
    pub fn trend(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter_map(|p| p.active.map(|a| (p.x as f64, a.mean)))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        spearman(&xs, &ys)
    }

    /// `x,mean,ci,time_mean,time_ci` lines for plotting.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("x,mean,ci,time_mean,time_ci\n");
        for p in &self.points {
            let (Some(a), Some(t)) = (p.active, p.time) else { continue };
            out.push_str(&format!("{},{},{},{},{}\n", p.x, a.mean, a.ci, t.mean, t.ci));
        }
        out
    }
}

impl Sweep {
    /// The dimension that varies most across `records`; slices on ties.
    pub fn infer(records: &[ExperimentRecord]) -> Sweep {
        let distinct = |f: fn(&ExperimentRecord) -> usize| {
            let mut v: Vec<usize> = records.iter().map(f).collect();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        let counts = [
            (distinct(|r| r.slices), Sweep::Slices),
            (distinct(|r| r.sfcs), Sweep::Sfcs),
            (distinct(|r| r.nfs), Sweep::Nfs),
        ];
        counts
            .iter()
            .fold(counts[0], |best, c| if c.0 > best.0 { *c } else { best })
            .1
    }
}

/// Per-point summaries and regressions of one series of records.
pub fn aggregate(records: &[ExperimentRecord], sweep: Sweep) -> AggregateStats {
    let mut groups: BTreeMap<(String, usize, usize, usize, usize), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.preset.clone(), r.slices, r.sfcs, r.nfs, r.nodes))
            .or_default()
            .push(r);
    }
    let x_of = |r: &ExperimentRecord| match sweep {
        Sweep::Slices => r.slices,
        Sweep::Sfcs => r.sfcs,
        Sweep::Nfs => r.nfs,
    };

    let mut points: Vec<PointStats> = groups
        .into_iter()
        .map(|((label, slices, sfcs, nfs, nodes), rs)| {
            let placed: Vec<&&ExperimentRecord> = rs.iter().filter(|r| r.placed()).collect();
            let active: Vec<f64> = placed.iter().map(|r| r.active_nodes as f64).collect();
            let times: Vec<f64> = placed.iter().map(|r| r.solve_time_s).collect();
            PointStats {
                x: x_of(rs[0]),
                label,
                slices,
                sfcs,
                nfs,
                nodes,
                records: rs.len(),
                placed: placed.len(),
                timeouts: rs.iter().filter(|r| r.status == SolveStatus::Timeout).count(),
                infeasible: rs.iter().filter(|r| r.status == SolveStatus::Infeasible).count(),
                active: summarize(&active),
                time: summarize(&times),
                median_time: median(&times),
            }
        })
        .collect();
    points.sort_by(|a, b| (a.x, &a.label, a.nodes).cmp(&(b.x, &b.label, b.nodes)));

    let placed: Vec<&ExperimentRecord> = records.iter().filter(|r| r.placed()).collect();
    let xs: Vec<f64> = placed.iter().map(|r| x_of(r) as f64).collect();
    let actives: Vec<f64> = placed.iter().map(|r| r.active_nodes as f64).collect();
    let times: Vec<f64> = placed.iter().map(|r| r.solve_time_s).collect();
    AggregateStats {
        sweep,
        points,
        time_vs_x: ols(&xs, &times).ok(),
        time_vs_active: ols(&actives, &times).ok(),
        active_overall: summarize(&actives),
    }
}

/// Records grouped by their `preset` label.
pub fn by_series(records: &[ExperimentRecord]) -> BTreeMap<String, Vec<ExperimentRecord>> {
    let mut out: BTreeMap<String, Vec<ExperimentRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.preset.clone()).or_default().push(r.clone());
    }
    out
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    format: u32,
    #[serde(flatten)]
    plan: ExperimentPlan,
}

/// Read a custom plan document (`{"format": 1, "name": ..., "points": ...}`).
pub fn load_plan(path: impl AsRef<Path>) -> Result<ExperimentPlan, DocError> {
    let doc: PlanDoc = serde_json::from_str(&crate::io::read(path.as_ref())?)?;
    if doc.format != FORMAT_VERSION {
        return Err(DocError::UnsupportedFormat(doc.format));
    }
    Ok(doc.plan)
}

pub fn plan_to_json(plan: &ExperimentPlan) -> String {
    serde_json::to_string_pretty(&PlanDoc {
        format: FORMAT_VERSION,
        plan: plan.clone(),
    })
    .expect("plan serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(slices: usize, active: usize, time: f64) -> ExperimentRecord {
        ExperimentRecord {
            preset: "VARY_SLICES".into(),
            slices,
            sfcs: 2,
            nfs: 4,
            nodes: 12,
            seed: slices as u64 * 31 + active as u64,
            active_nodes: active,
            solve_time_s: time,
            status: SolveStatus::Optimal,
        }
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![record(1, 2, 0.125), record(2, 3, 1e-7)];
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(read_records(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn unplaced_records_are_left_out_of_summaries() {
        let mut failed = record(1, 0, 9.0);
        failed.status = SolveStatus::Infeasible;
        let stats = aggregate(&[record(1, 4, 1.0), failed], Sweep::Slices);
        let p = &stats.points[0];
        assert_eq!((p.records, p.placed, p.infeasible), (2, 1, 1));
        assert_eq!(p.active.unwrap().mean, 4.0);
        assert_eq!(stats.regression(), Err(StatsError::RegressionUndefined));
    }

    #[test]
    fn sweep_inference() {
        let rs = vec![record(1, 1, 0.0), record(2, 1, 0.0)];
        assert_eq!(Sweep::infer(&rs), Sweep::Slices);
        let mut r2 = rs.clone();
        r2[1].slices = 1;
        r2[1].nfs = 6;
        assert_eq!(Sweep::infer(&r2), Sweep::Nfs);
    }
}
