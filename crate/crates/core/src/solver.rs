//! Static fair k-center 3-approximation and its use on nets.
//!
//! The solver picks `k + 1` pivots farthest-first and searches the smallest
//! radius `R` at which every pivot inserted more than `2R` from its
//! predecessors can be matched, under the group capacities, to a group with a
//! point within `R` of the pivot. Each matched pivot then takes its nearest
//! point of that group. Pivots outside the matched prefix lie within `2R` of
//! it, so the cost is at most `3R`, and `R` never exceeds the optimum.

use std::borrow::Borrow;

use crate::error::{Error, Result};
use crate::flow::FlowGraph;
use crate::greedy::farthest_first;
use crate::metric::{evaluate_cost, Metric, Point, PointRef};
use crate::net::{expand, extract_candidate, Net, NetEntry};
use crate::problem::{Instance, Solution};

struct Pivots {
    insertion: Vec<f64>,
    /// `near[i][g]`: distance and index of the point of group `g` closest
    /// to pivot `i` (ties by smaller id).
    near: Vec<Vec<Option<(f64, usize)>>>,
}

fn pivots<P: Borrow<Point>>(metric: &Metric, points: &[P], k: usize, m: usize) -> Pivots {
    let tr = farthest_first(metric, points, k + 1, 0);
    let mut near = Vec::with_capacity(tr.order.len());
    for &pi in &tr.order {
        let pivot = points[pi].borrow();
        let mut row: Vec<Option<(f64, usize)>> = vec![None; m];
        for (j, p) in points.iter().enumerate() {
            let p = p.borrow();
            let d = metric.distance(pivot, p);
            let better = match row[p.group] {
                None => true,
                Some((bd, bj)) => d < bd || (d == bd && p.id < points[bj].borrow().id),
            };
            if better {
                row[p.group] = Some((d, j));
            }
        }
        near.push(row);
    }
    Pivots {
        insertion: tr.insertion,
        near,
    }
}

/// Tries to match the pivots inserted farther than `2R` to distinct
/// capacity slots. Returns the matched group per prefix pivot.
fn assign(pv: &Pivots, capacities: &[usize], radius: f64) -> Option<Vec<usize>> {
    let prefix = pv.insertion.iter().take_while(|&&d| d > 2.0 * radius).count();
    let m = capacities.len();
    let source = 0;
    let sink = 1 + prefix + m;
    let mut g = FlowGraph::new(sink + 1);
    let mut links = Vec::with_capacity(prefix);
    for i in 0..prefix {
        g.add_edge(source, 1 + i, 1);
        let mut row = Vec::new();
        for (grp, near) in pv.near[i].iter().enumerate() {
            if capacities[grp] == 0 {
                continue;
            }
            if let Some((d, _)) = near {
                if *d <= radius {
                    row.push((grp, g.add_edge(1 + i, 1 + prefix + grp, 1)));
                }
            }
        }
        links.push(row);
    }
    for (grp, &cap) in capacities.iter().enumerate() {
        if cap > 0 {
            g.add_edge(1 + prefix + grp, sink, cap as u32);
        }
    }
    if g.max_flow(source, sink) as usize != prefix {
        return None;
    }
    Some(
        links
            .iter()
            .map(|row| {
                row.iter()
                    .find(|&&(_, e)| g.flow(e) == 1)
                    .map(|&(grp, _)| grp)
                    .expect("saturated pivot has a matched group")
            })
            .collect(),
    )
}

/// Indices of a capacity-feasible center set with cost at most three times
/// the optimum.
pub fn jnn_select<P: Borrow<Point>>(metric: &Metric, points: &[P], capacities: &[usize]) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::input("solver needs at least one point"));
    }
    let m = capacities.len();
    if let Some(p) = points.iter().map(Borrow::borrow).find(|p| p.group >= m) {
        return Err(Error::input(format!("point {} has group {} but m = {m}", p.id, p.group)));
    }
    if !points.iter().any(|p| capacities[p.borrow().group] > 0) {
        return Err(Error::Infeasible(
            "no group present in the input has a positive capacity".into(),
        ));
    }
    let k: usize = capacities.iter().sum();
    let pv = pivots(metric, points, k, m);

    let mut critical: Vec<f64> = vec![0.0];
    critical.extend(pv.insertion.iter().filter(|d| d.is_finite()).map(|d| d / 2.0));
    for row in &pv.near {
        critical.extend(row.iter().flatten().map(|&(d, _)| d));
    }
    critical.sort_by(f64::total_cmp);
    critical.dedup();

    // smallest critical radius that admits an assignment
    let (mut lo, mut hi) = (0usize, critical.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if assign(&pv, capacities, critical[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let radius = *critical.get(lo).ok_or_else(|| {
        Error::Infeasible("no radius admits a capacity-feasible assignment".into())
    })?;
    let groups = assign(&pv, capacities, radius).expect("feasible at the searched radius");
    Ok(groups
        .iter()
        .enumerate()
        .map(|(i, &grp)| pv.near[i][grp].expect("linked group has a point").1)
        .collect())
}

/// Fair k-center 3-approximation on `points`; the cost is evaluated over
/// `points`.
pub fn solve_fair_3approx(inst: &Instance, points: &[PointRef]) -> Result<Solution> {
    let chosen = jnn_select(&inst.metric, points, &inst.capacities)?;
    let centers: Vec<PointRef> = chosen.iter().map(|&i| points[i].clone()).collect();
    let cost = evaluate_cost(&inst.metric, points, &centers)?;
    Ok(Solution { centers, cost })
}

/// Solves on the expansion of `entries` and maps the picks back to real
/// points through Pot. The cost is evaluated over the anchors.
pub fn solve_on_entries(metric: &Metric, entries: &[NetEntry], capacities: &[usize]) -> Result<Solution> {
    if entries.is_empty() {
        return Err(Error::input("cannot solve on an empty net"));
    }
    let ex = expand(entries);
    let chosen = jnn_select(metric, &ex.points, capacities)?;
    let pairs: Vec<(usize, usize)> = chosen.iter().map(|&i| ex.origin[i]).collect();
    let centers = extract_candidate(entries, &pairs)?;
    let anchors: Vec<&Point> = entries.iter().map(|e| e.anchor.as_ref()).collect();
    let cost = evaluate_cost(metric, &anchors, &centers)?;
    Ok(Solution { centers, cost })
}

pub fn solve_on_coreset(inst: &Instance, net: &Net) -> Result<Solution> {
    solve_on_entries(&inst.metric, &net.entries, &inst.capacities)
}
