//! Exact fair k-center, for testing and for small fixtures.
//!
//! Two independent routes: [`exact_fair_kcenter`] enumerates every maximal
//! capacity-feasible center set, while [`exact_fair_radius`] binary-searches
//! the optimal radius over pairwise distances with a branching cover check.
//! The first is limited to tiny inputs; the second scales to a few hundred
//! points when `k` is small.

use std::borrow::Borrow;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{Metric, Point, PointRef};
use crate::problem::Solution;

/// Largest number of center sets [`exact_fair_kcenter`] will evaluate.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn group_members<P: Borrow<Point>>(points: &[P], m: usize) -> Result<Vec<Vec<usize>>> {
    let mut members = vec![Vec::new(); m];
    for (i, p) in points.iter().enumerate() {
        let g = p.borrow().group;
        if g >= m {
            return Err(Error::input(format!("group {g} has no capacity entry")));
        }
        members[g].push(i);
    }
    Ok(members)
}

/// Advances `comb` (indices into a pool of size `n`) to the next
/// lexicographic combination. Returns false after the last one.
fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let r = comb.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if comb[i] < n - r + i {
            comb[i] += 1;
            for j in (i + 1)..r {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Minimum-cost capacity-feasible center set by exhaustive enumeration.
///
/// Only center sets using `min(k_j, n_j)` points of every group `j` are
/// enumerated: any feasible set extends to one of those without raising its
/// cost. Refuses when the enumeration would exceed [`ENUMERATION_LIMIT`].
pub fn exact_fair_kcenter<P: Borrow<Point>>(
    metric: &Metric,
    points: &[P],
    capacities: &[usize],
) -> Result<Solution> {
    if points.is_empty() {
        return Err(Error::input("exact solver needs at least one point"));
    }
    let members = group_members(points, capacities.len())?;
    let sizes: Vec<usize> = members
        .iter()
        .zip(capacities)
        .map(|(mem, &cap)| cap.min(mem.len()))
        .collect();
    if sizes.iter().all(|&s| s == 0) {
        return Err(Error::Infeasible(
            "no group present in the input has a positive capacity".into(),
        ));
    }
    let count = members
        .iter()
        .zip(&sizes)
        .fold(1u128, |acc, (mem, &s)| acc.saturating_mul(binomial(mem.len(), s)));
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }

    let n = points.len();
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.distance(points[i].borrow(), points[j].borrow());
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    let groups: Vec<usize> = (0..members.len()).filter(|&g| sizes[g] > 0).collect();
    let mut combs: Vec<Vec<usize>> = groups.iter().map(|&g| (0..sizes[g]).collect()).collect();
    let mut best_cost = f64::INFINITY;
    let mut best: Vec<usize> = Vec::new();
    let mut chosen = Vec::with_capacity(sizes.iter().sum());

    loop {
        chosen.clear();
        for (gi, &g) in groups.iter().enumerate() {
            chosen.extend(combs[gi].iter().map(|&c| members[g][c]));
        }
        let mut cost = 0.0f64;
        for p in 0..n {
            let row = &dist[p * n..(p + 1) * n];
            let d = chosen.iter().map(|&c| row[c]).fold(f64::INFINITY, f64::min);
            if d > cost {
                cost = d;
                if cost >= best_cost {
                    break;
                }
            }
        }
        if cost < best_cost {
            best_cost = cost;
            best = chosen.clone();
        }

        // odometer over the per-group combinations
        let mut advanced = false;
        for gi in (0..groups.len()).rev() {
            let pool = members[groups[gi]].len();
            if next_combination(&mut combs[gi], pool) {
                advanced = true;
                break;
            }
            combs[gi] = (0..sizes[groups[gi]]).collect();
        }
        if !advanced {
            break;
        }
    }

    best.sort_unstable();
    let centers: Vec<PointRef> = best
        .iter()
        .map(|&i| Arc::new(points[i].borrow().clone()))
        .collect();
    Ok(Solution {
        centers,
        cost: best_cost,
    })
}

/// Fixed-size bitset over point indices.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn union(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }
    fn first_unset(&self, n: usize) -> Option<usize> {
        for (w, &word) in self.0.iter().enumerate() {
            if word != u64::MAX {
                let i = w * 64 + (!word).trailing_zeros() as usize;
                return (i < n).then_some(i);
            }
        }
        None
    }
}

/// Pairwise distances plus groups, reused across radius decisions.
pub struct CoverOracle {
    n: usize,
    dist: Vec<f64>,
    groups: Vec<usize>,
    capacities: Vec<usize>,
}

impl CoverOracle {
    pub fn new<P: Borrow<Point>>(metric: &Metric, points: &[P], capacities: &[usize]) -> Result<Self> {
        let n = points.len();
        let groups: Vec<usize> = points.iter().map(|p| p.borrow().group).collect();
        if let Some(&g) = groups.iter().find(|&&g| g >= capacities.len()) {
            return Err(Error::input(format!("group {g} has no capacity entry")));
        }
        let mut dist = vec![0.0f64; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric.distance(points[i].borrow(), points[j].borrow());
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(CoverOracle {
            n,
            dist,
            groups,
            capacities: capacities.to_vec(),
        })
    }

    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    fn within(&self, d: f64, radius: f64, strict: bool) -> bool {
        if strict {
            d < radius
        } else {
            d <= radius
        }
    }

    /// Is there a capacity-feasible center set covering every point within
    /// `radius` (strictly below it when `strict`)?
    pub fn covers(&self, radius: f64, strict: bool) -> bool {
        if self.n == 0 {
            return true;
        }
        let balls: Vec<Bits> = (0..self.n)
            .map(|c| {
                let mut b = Bits::new(self.n);
                for p in 0..self.n {
                    if self.within(self.d(c, p), radius, strict) {
                        b.set(p);
                    }
                }
                b
            })
            .collect();
        let mut caps = self.capacities.clone();
        self.search(&Bits::new(self.n), &mut caps, &balls, radius, strict)
    }

    fn search(&self, covered: &Bits, caps: &mut [usize], balls: &[Bits], radius: f64, strict: bool) -> bool {
        let Some(u) = covered.first_unset(self.n) else {
            return true;
        };
        if caps.iter().all(|&c| c == 0) {
            return false;
        }
        // some center must cover u
        for c in 0..self.n {
            let g = self.groups[c];
            if caps[g] == 0 || !self.within(self.d(u, c), radius, strict) {
                continue;
            }
            caps[g] -= 1;
            let next = covered.union(&balls[c]);
            let ok = self.search(&next, caps, balls, radius, strict);
            caps[g] += 1;
            if ok {
                return true;
            }
        }
        false
    }

    /// The optimal fair k-center radius.
    pub fn optimum(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::input("exact solver needs at least one point"));
        }
        if !self.groups.iter().any(|&g| self.capacities[g] > 0) {
            return Err(Error::Infeasible(
                "no group present in the input has a positive capacity".into(),
            ));
        }
        let mut candidates: Vec<f64> = Vec::with_capacity(self.n * (self.n + 1) / 2);
        candidates.push(0.0);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                candidates.push(self.d(i, j));
            }
        }
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        // the largest candidate always succeeds with a single center
        let (mut lo, mut hi) = (0usize, candidates.len() - 1);
        if self.covers(candidates[0], false) {
            return Ok(candidates[0]);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.covers(candidates[mid], false) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(candidates[hi])
    }
}

/// Optimal fair k-center radius via binary search over pairwise distances.
pub fn exact_fair_radius<P: Borrow<Point>>(
    metric: &Metric,
    points: &[P],
    capacities: &[usize],
) -> Result<f64> {
    CoverOracle::new(metric, points, capacities)?.optimum()
}

/// Optimal unconstrained k-center radius (all groups pooled).
pub fn exact_kcenter_radius<P: Borrow<Point>>(metric: &Metric, points: &[P], k: usize) -> Result<f64> {
    let pooled: Vec<Point> = points
        .iter()
        .map(|p| {
            let mut q = p.borrow().clone();
            q.group = 0;
            q
        })
        .collect();
    exact_fair_radius(metric, &pooled, &[k])
}
