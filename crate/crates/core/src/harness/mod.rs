//! Experiment orchestration: read a dataset, run one algorithm with
//! checkpoints every `stride` points and emit a report record per
//! checkpoint.

mod data;
mod report;

use std::collections::VecDeque;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use data::{ingest_csv, ingest_reader, planted_centers, synth_generate, Dataset, Schema, SynthKind, SynthSpec};
pub use report::{read_csv, read_jsonl, summary_path, to_csv, to_jsonl, ReportRecord, ReportWriter, SummaryRow};

use crate::error::{Error, Result};
use crate::greedy::gonzalez_greedy;
use crate::mapreduce::{run_mapreduce, MapReduceMode};
use crate::metric::{evaluate_cost, PointRef};
use crate::oracle::{exact_fair_kcenter, exact_fair_radius};
use crate::problem::{Instance, Solution};
use crate::solver::solve_fair_3approx;
use crate::streaming::{StreamMode, StreamState};
use crate::window::{SlidingWindow, WindowConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    OnePass,
    OnePassHeuristic,
    Mapreduce,
    MapreduceHeuristic,
    SlidingWindow,
    JnnStatic,
    ExactOracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::OnePass,
        Algorithm::OnePassHeuristic,
        Algorithm::Mapreduce,
        Algorithm::MapreduceHeuristic,
        Algorithm::SlidingWindow,
        Algorithm::JnnStatic,
        Algorithm::ExactOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::OnePass => "one_pass",
            Algorithm::OnePassHeuristic => "one_pass_heuristic",
            Algorithm::Mapreduce => "mapreduce",
            Algorithm::MapreduceHeuristic => "mapreduce_heuristic",
            Algorithm::SlidingWindow => "sliding_window",
            Algorithm::JnnStatic => "jnn_static",
            Algorithm::ExactOracle => "exact_oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::input(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBoundKind {
    /// Cost of Gonzalez's greedy with `k` centers, seeded by the run seed.
    #[default]
    Gonzalez,
    /// The exact fair optimum.
    Oracle,
}

impl std::str::FromStr for LowerBoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gonzalez" => Ok(LowerBoundKind::Gonzalez),
            "oracle" => Ok(LowerBoundKind::Oracle),
            other => Err(Error::input(format!("unknown lower bound `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: PathBuf,
    pub schema: Schema,
    pub capacities: Vec<usize>,
    pub algorithm: Algorithm,
    pub epsilon: f64,
    /// `Q` for the heuristic variants.
    pub coreset_size: Option<usize>,
    /// `ell` for the MapReduce variants.
    pub processors: Option<usize>,
    /// `N` for the sliding window.
    pub window: Option<u64>,
    pub lambda: Option<f64>,
    pub stride: u64,
    pub lower_bound: LowerBoundKind,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub parallel: bool,
}

impl ExperimentSpec {
    pub fn new(dataset: impl Into<PathBuf>, schema: Schema, capacities: Vec<usize>, algorithm: Algorithm) -> Self {
        ExperimentSpec {
            dataset: dataset.into(),
            schema,
            capacities,
            algorithm,
            epsilon: 0.1,
            coreset_size: None,
            processors: None,
            window: None,
            lambda: None,
            stride: 2500,
            lower_bound: LowerBoundKind::Gonzalez,
            out: None,
            seed: 0,
            parallel: true,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::input("stride must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::input(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        let need = |present: bool, flag: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::input(format!("{} needs --{flag}", self.algorithm)))
            }
        };
        match self.algorithm {
            Algorithm::OnePassHeuristic => need(self.coreset_size.is_some(), "coreset-size"),
            Algorithm::Mapreduce => need(self.processors.is_some(), "processors"),
            Algorithm::MapreduceHeuristic => {
                need(self.processors.is_some(), "processors")?;
                need(self.coreset_size.is_some(), "coreset-size")
            }
            Algorithm::SlidingWindow => {
                need(self.window.is_some(), "window")?;
                need(self.lambda.is_some(), "lambda")
            }
            Algorithm::OnePass | Algorithm::JnnStatic | Algorithm::ExactOracle => Ok(()),
        }
    }

    fn checkpoints(&self, n: usize) -> Vec<usize> {
        let stride = self.stride as usize;
        let mut at: Vec<usize> = (1..=n / stride).map(|i| i * stride).collect();
        if !n.is_multiple_of(stride) {
            at.push(n);
        }
        at
    }
}

/// Reads the dataset, runs the experiment and writes `out` (JSON lines)
/// and its CSV summary when an output path is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ReportRecord>> {
    spec.check()?;
    let ds = ingest_csv(&spec.dataset, &spec.schema)?;
    log::info!(
        "loaded {} points in {} groups from {}",
        ds.points.len(),
        ds.m(),
        spec.dataset.display()
    );
    let mut writer = spec.out.as_deref().map(ReportWriter::create).transpose()?;
    let mut records = Vec::new();
    run_on_dataset(spec, &ds, &mut |rec| {
        if let Some(w) = writer.as_mut() {
            w.push(&rec)?;
        }
        records.push(rec);
        Ok(())
    })?;
    Ok(records)
}

struct Scorer<'a> {
    spec: &'a ExperimentSpec,
    inst: &'a Instance,
}

impl Scorer<'_> {
    fn lower_bound(&self, points: &[PointRef]) -> Result<f64> {
        match self.spec.lower_bound {
            LowerBoundKind::Gonzalez => {
                let seed = (self.spec.seed % points.len() as u64) as usize;
                Ok(gonzalez_greedy(&self.inst.metric, points, self.inst.k(), seed)?.1)
            }
            LowerBoundKind::Oracle => exact_fair_radius(&self.inst.metric, points, &self.inst.capacities),
        }
    }

    fn record(&self, t: usize, sol: &Solution, points: &[PointRef], timing: (f64, f64)) -> Result<ReportRecord> {
        let cost = evaluate_cost(&self.inst.metric, points, &sol.centers)?;
        let lower_bound = self.lower_bound(points)?;
        Ok(ReportRecord {
            algorithm: self.spec.algorithm,
            t: t as u64,
            cost,
            lower_bound,
            lower_bound_kind: self.spec.lower_bound,
            ratio: (lower_bound > 0.0).then(|| cost / lower_bound),
            memory_points: 0,
            update_seconds: timing.0,
            query_seconds: timing.1,
            scratch_seconds: None,
            centers: sol.center_ids(),
            comm: None,
        })
    }
}

/// Runs `spec` on an already loaded dataset, handing each record to `sink`
/// as soon as it is complete.
pub fn run_on_dataset(
    spec: &ExperimentSpec,
    ds: &Dataset,
    sink: &mut dyn FnMut(ReportRecord) -> Result<()>,
) -> Result<()> {
    spec.check()?;
    let inst = Instance::new(ds.metric, spec.capacities.clone(), spec.epsilon)?;
    if inst.m() != ds.m() {
        return Err(Error::input(format!(
            "{} capacities given for {} groups",
            inst.m(),
            ds.m()
        )));
    }
    let scorer = Scorer { spec, inst: &inst };
    let points = &ds.points;
    let checkpoints = spec.checkpoints(points.len());

    match spec.algorithm {
        Algorithm::OnePass | Algorithm::OnePassHeuristic => {
            let mode = match spec.coreset_size {
                Some(q) if spec.algorithm == Algorithm::OnePassHeuristic => StreamMode::Heuristic { q },
                _ => StreamMode::Robust,
            };
            let mut state = StreamState::new(&inst, mode)?;
            let mut total_update = 0.0;
            let mut next = 0;
            for &at in &checkpoints {
                let clock = Instant::now();
                for p in &points[next..at] {
                    state.insert(p)?;
                }
                let update = clock.elapsed().as_secs_f64();
                total_update += update;
                next = at;
                let clock = Instant::now();
                let sol = state.query(&inst)?;
                let query = clock.elapsed().as_secs_f64();
                let mut rec = scorer.record(at, &sol, &points[..at], (update, query))?;
                rec.memory_points = state.memory_points();
                rec.scratch_seconds = Some(total_update + query);
                log::debug!("t={at} cost={} memory={}", rec.cost, rec.memory_points);
                sink(rec)?;
            }
        }
        Algorithm::SlidingWindow => {
            let window = spec.window.expect("checked");
            let mut cfg = WindowConfig::new(
                ds.metric,
                spec.capacities.clone(),
                window,
                spec.lambda.expect("checked"),
                spec.epsilon,
            )?;
            cfg.trace = log::log_enabled!(log::Level::Trace);
            let mut sw = SlidingWindow::new(cfg)?;
            let mut live: VecDeque<PointRef> = VecDeque::new();
            let mut next = 0;
            for &at in &checkpoints {
                let clock = Instant::now();
                for p in &points[next..at] {
                    sw.step(p.as_ref().clone())?;
                }
                let update = clock.elapsed().as_secs_f64();
                for rec in sw.take_trace() {
                    log::trace!("t={} guess={} {}", rec.t, rec.exponent, rec.event);
                }
                live.extend(points[next..at].iter().cloned());
                while live.len() as u64 > window {
                    live.pop_front();
                }
                next = at;
                let clock = Instant::now();
                let answer = match sw.query() {
                    Ok(a) => a,
                    Err(e @ Error::RetryLater { .. }) => {
                        log::warn!("t={at}: {e}; checkpoint skipped");
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let query = clock.elapsed().as_secs_f64();
                let window_points: Vec<PointRef> = live.iter().cloned().collect();
                let mut rec = scorer.record(at, &answer.solution, &window_points, (update, query))?;
                rec.memory_points = sw.memory_points();
                sink(rec)?;
            }
        }
        Algorithm::Mapreduce | Algorithm::MapreduceHeuristic => {
            let ell = spec.processors.expect("checked");
            let mode = match spec.algorithm {
                Algorithm::Mapreduce => MapReduceMode::Robust,
                _ => MapReduceMode::Heuristic {
                    q: spec.coreset_size.expect("checked"),
                },
            };
            for &at in &checkpoints {
                let clock = Instant::now();
                let out = run_mapreduce(&inst, &points[..at], ell, mode, spec.parallel)?;
                let elapsed = clock.elapsed().as_secs_f64();
                let mut rec = scorer.record(at, &out.solution, &points[..at], (0.0, elapsed))?;
                rec.memory_points = match &out.merged {
                    Some(net) => net.memory_points(),
                    None => out.comm.total,
                };
                rec.comm = Some(out.comm);
                sink(rec)?;
            }
        }
        Algorithm::JnnStatic | Algorithm::ExactOracle => {
            for &at in &checkpoints {
                let prefix = &points[..at];
                let clock = Instant::now();
                let sol = if spec.algorithm == Algorithm::JnnStatic {
                    solve_fair_3approx(&inst, prefix)?
                } else {
                    exact_fair_kcenter(&inst.metric, prefix, &inst.capacities)?
                };
                let elapsed = clock.elapsed().as_secs_f64();
                let mut rec = scorer.record(at, &sol, prefix, (0.0, elapsed))?;
                rec.memory_points = at;
                sink(rec)?;
            }
        }
    }
    Ok(())
}
