//! Simulated two-round distributed pipeline: every processor summarizes its
//! partition as a net, a coordinator merges the nets and solves on the
//! result. Communication is counted in points, not transported.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::farthest_first;
use crate::metric::{Metric, PointRef};
use crate::net::{build_net, merge_nets, Net, NetEntry};
use crate::problem::{Instance, Solution};
use crate::solver::{solve_fair_3approx, solve_on_coreset};

#[derive(Clone, Debug)]
pub struct ProcessorSummary {
    pub net: Net,
    pub r_t: f64,
    pub processor_id: usize,
    /// `sum_y |Pot(y)|`, the points this processor ships.
    pub points_sent: usize,
}

fn check_part(part: &[PointRef], m: usize) -> Result<()> {
    if part.is_empty() {
        return Err(Error::input("a processor needs at least one point"));
    }
    if let Some(p) = part.iter().find(|p| p.group >= m) {
        return Err(Error::input(format!("point {} has group {} but m = {m}", p.id, p.group)));
    }
    Ok(())
}

/// Greedy `k` centers give `r_t = radius / 8`; the summary is the scan net
/// at `2 * eps_bar * r_t`.
pub fn processor_summary(
    metric: &Metric,
    part: &[PointRef],
    k: usize,
    eps_bar: f64,
    m: usize,
    processor_id: usize,
) -> Result<ProcessorSummary> {
    check_part(part, m)?;
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    let r_t = farthest_first(metric, part, k, 0).radius() / 8.0;
    let net = build_net(metric, part, 2.0 * eps_bar * r_t, m)?;
    Ok(ProcessorSummary {
        points_sent: net.pot_count(),
        net,
        r_t,
        processor_id,
    })
}

/// Folds the summaries, in processor order, into one net at `eps_bar * R`
/// with `R = 2 max r_t`.
pub fn coordinator_merge(metric: &Metric, summaries: &[ProcessorSummary], eps_bar: f64) -> Result<Net> {
    let first = summaries
        .first()
        .ok_or_else(|| Error::input("the coordinator needs at least one summary"))?;
    let big_r = 2.0 * summaries.iter().map(|s| s.r_t).fold(0.0, f64::max);
    let scale = eps_bar * big_r;
    let mut order: Vec<&ProcessorSummary> = summaries.iter().collect();
    order.sort_by_key(|s| s.processor_id);
    let mut acc = Net::empty(scale, 2.0, first.net.m);
    for s in order {
        acc = merge_nets(metric, &s.net, acc, scale, 1.0)?;
    }
    Ok(acc)
}

/// `q` greedy centers, each point assigned to its closest center (ties by
/// smaller id); every center keeps the closest point of each group.
pub fn processor_summary_heuristic(
    metric: &Metric,
    part: &[PointRef],
    q: usize,
    k: usize,
    m: usize,
    processor_id: usize,
) -> Result<ProcessorSummary> {
    check_part(part, m)?;
    if q <= k {
        return Err(Error::input(format!("coreset size {q} must exceed k = {k}")));
    }
    let tr = farthest_first(metric, part, q, 0);
    // picks made at distance zero duplicate an earlier center
    let centers: Vec<usize> = tr
        .order
        .iter()
        .zip(&tr.insertion)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&i, _)| i)
        .collect();
    let mut entries: Vec<NetEntry> = centers.iter().map(|&c| NetEntry::new(part[c].clone(), m)).collect();
    let mut best: Vec<Vec<Option<f64>>> = centers
        .iter()
        .map(|&c| {
            let mut row = vec![None; m];
            row[part[c].group] = Some(0.0);
            row
        })
        .collect();
    let mut r_q = 0.0f64;
    for (j, p) in part.iter().enumerate() {
        let mut home = 0;
        let mut home_d = f64::INFINITY;
        for (ci, &c) in centers.iter().enumerate() {
            let d = metric.distance(p, &part[c]);
            if d < home_d || (d == home_d && part[c].id < part[centers[home]].id) {
                home = ci;
                home_d = d;
            }
        }
        r_q = r_q.max(home_d);
        if centers[home] == j {
            continue;
        }
        entries[home].neighbor_count += 1;
        let slot = &mut best[home][p.group];
        if slot.is_none_or(|b| home_d < b) {
            *slot = Some(home_d);
            entries[home].pot[p.group] = Some(p.clone());
        }
    }
    let net = Net {
        entries,
        r: r_q / 2.0,
        alpha: 2.0,
        m,
    };
    Ok(ProcessorSummary {
        points_sent: net.pot_count(),
        net,
        r_t: r_q,
        processor_id,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapReduceMode {
    Robust,
    Heuristic { q: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommStats {
    pub per_processor: Vec<usize>,
    pub total: usize,
}

#[derive(Clone, Debug)]
pub struct MapReduceOutput {
    pub solution: Solution,
    pub summaries: Vec<ProcessorSummary>,
    pub comm: CommStats,
    /// The coordinator's net (robust mode only).
    pub merged: Option<Net>,
}

/// Round-robin split of `points` into `ell` parts, dropping empty parts.
pub fn partition(points: &[PointRef], ell: usize) -> Vec<Vec<PointRef>> {
    let mut parts = vec![Vec::new(); ell];
    for (i, p) in points.iter().enumerate() {
        parts[i % ell].push(p.clone());
    }
    parts.retain(|p| !p.is_empty());
    parts
}

pub fn run_mapreduce(
    inst: &Instance,
    points: &[PointRef],
    ell: usize,
    mode: MapReduceMode,
    parallel: bool,
) -> Result<MapReduceOutput> {
    inst.check()?;
    inst.check_groups(points)?;
    if ell == 0 {
        return Err(Error::input("at least one processor is required"));
    }
    if points.is_empty() {
        return Err(Error::input("no points to cluster"));
    }
    let parts = partition(points, ell);
    let (k, m, eps_bar, metric) = (inst.k(), inst.m(), inst.eps_bar(), inst.metric);
    let work = |(id, part): (usize, &Vec<PointRef>)| match mode {
        MapReduceMode::Robust => processor_summary(&metric, part, k, eps_bar, m, id),
        MapReduceMode::Heuristic { q } => processor_summary_heuristic(&metric, part, q, k, m, id),
    };
    let summaries: Vec<ProcessorSummary> = if parallel {
        parts.par_iter().enumerate().map(work).collect::<Result<_>>()?
    } else {
        parts.iter().enumerate().map(work).collect::<Result<_>>()?
    };
    let per_processor: Vec<usize> = summaries.iter().map(|s| s.points_sent).collect();
    let comm = CommStats {
        total: per_processor.iter().sum(),
        per_processor,
    };
    let (solution, merged) = match mode {
        MapReduceMode::Robust => {
            let net = coordinator_merge(&metric, &summaries, eps_bar)?;
            (solve_on_coreset(inst, &net)?, Some(net))
        }
        MapReduceMode::Heuristic { .. } => {
            let pooled: Vec<PointRef> = summaries.iter().flat_map(|s| s.net.pot_points()).collect();
            (solve_fair_3approx(inst, &pooled)?, None)
        }
    };
    Ok(MapReduceOutput {
        solution,
        summaries,
        comm,
        merged,
    })
}

/// The same coreset built on one machine: greedy bound, scan net, solve.
pub fn single_machine_coreset(inst: &Instance, points: &[PointRef]) -> Result<Solution> {
    let summary = processor_summary(&inst.metric, points, inst.k(), inst.eps_bar(), inst.m(), 0)?;
    solve_on_coreset(inst, &summary.net)
}
