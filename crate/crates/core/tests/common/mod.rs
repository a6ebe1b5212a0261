#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use fairkc::window::GuessState;
use fairkc::{Metric, Point, PointRef};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn pt(id: u64, coords: Vec<f64>, group: usize) -> PointRef {
    Point::vector(id, coords, group).into_ref()
}

/// `n` points of the plane, on a half-unit grid so ties and duplicates occur.
pub fn grid_points(rng: &mut ChaCha8Rng, n: usize, m: usize, side: f64) -> Vec<PointRef> {
    (0..n)
        .map(|i| {
            let x = (rng.gen::<f64>() * side * 2.0).floor() / 2.0;
            let y = (rng.gen::<f64>() * side * 2.0).floor() / 2.0;
            pt(i as u64, vec![x, y], rng.gen_range(0..m))
        })
        .collect()
}

/// Capacities over `m` groups with total in `1..=k_max`, positive on at
/// least one group that `points` uses.
pub fn capacities(rng: &mut ChaCha8Rng, points: &[PointRef], m: usize, k_max: usize) -> Vec<usize> {
    loop {
        let k = rng.gen_range(1..=k_max);
        let mut caps = vec![0; m];
        for _ in 0..k {
            caps[rng.gen_range(0..m)] += 1;
        }
        if points.iter().any(|p| caps[p.group] > 0) {
            return caps;
        }
    }
}

pub fn cost(metric: &Metric, points: &[PointRef], centers: &[PointRef]) -> f64 {
    points
        .iter()
        .map(|p| centers.iter().map(|c| metric.distance(p, c)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Fair optimum by trying every subset of at most `sum caps` points.
pub fn brute_force_opt(metric: &Metric, points: &[PointRef], caps: &[usize]) -> f64 {
    let n = points.len();
    assert!(n <= 16, "brute force is for tiny inputs");
    let k: usize = caps.iter().sum();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let mut used = vec![0; caps.len()];
        let mut chosen = Vec::new();
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                used[p.group] += 1;
                chosen.push(p.clone());
            }
        }
        if used.iter().zip(caps).any(|(u, c)| u > c) {
            continue;
        }
        best = best.min(cost(metric, points, &chosen));
    }
    best
}

/// Unconstrained k-center optimum by brute force.
pub fn brute_force_kcenter(metric: &Metric, points: &[PointRef], k: usize) -> f64 {
    let pooled: Vec<PointRef> = points
        .iter()
        .map(|p| {
            let mut q = (**p).clone();
            q.group = 0;
            q.into_ref()
        })
        .collect();
    brute_force_opt(metric, &pooled, &[k])
}

/// Checks one guess against the live window (oldest first): every live
/// point is attracted to exactly one stored entry within `delta * phi`, and
/// each entry keeps, per group present among its points, the newest one.
pub fn check_guess_against_window(metric: &Metric, g: &GuessState, window: &VecDeque<PointRef>) -> Result<(), String> {
    let map = g.attraction().ok_or("attraction is not tracked")?;
    if map.len() != window.len() {
        return Err(format!(
            "guess {}: {} attracted points for a window of {}",
            g.exponent,
            map.len(),
            window.len()
        ));
    }
    let mut neighbors: BTreeMap<u64, Vec<&PointRef>> = BTreeMap::new();
    for p in window {
        let entry = *map
            .get(&(p.arrival, p.id))
            .ok_or_else(|| format!("guess {}: point {} is not attracted", g.exponent, p.id))?;
        let e = g
            .entries
            .get(&entry)
            .ok_or_else(|| format!("guess {}: point {} attracted to missing entry {entry}", g.exponent, p.id))?;
        let d = metric.distance(p, &e.anchor);
        if d > g.delta_phi + 1e-9 {
            return Err(format!(
                "guess {}: point {} is {d} from entry {entry}, above {}",
                g.exponent, p.id, g.delta_phi
            ));
        }
        neighbors.entry(entry).or_default().push(p);
    }
    for (id, e) in &g.entries {
        let members = neighbors.get(id).map(Vec::as_slice).unwrap_or(&[]);
        for (group, pot) in e.pot.iter().enumerate() {
            let newest = members.iter().filter(|p| p.group == group).max_by_key(|p| p.arrival);
            match (newest, pot) {
                (None, None) => {}
                (Some(p), Some(q)) if p.id == q.id => {}
                (newest, pot) => {
                    return Err(format!(
                        "guess {}: entry {id} group {group} keeps {:?}, newest attracted is {:?}",
                        g.exponent,
                        pot.as_ref().map(|q| q.id),
                        newest.map(|p| p.id)
                    ))
                }
            }
        }
    }
    Ok(())
}
