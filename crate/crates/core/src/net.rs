//! Group-aware nets: anchors carrying a color vector and one representative
//! point per color.

use std::io::Write;

use serde_json::json;

use crate::error::{Error, Result};
use crate::metric::{Location, Metric, Point, PointRef};

/// One net point together with its color bookkeeping.
///
/// `pot[i]` is the stored representative of group `i` among the points this
/// anchor covers; the color bit `Col_i` is simply `pot[i].is_some()`.
#[derive(Clone, Debug)]
pub struct NetEntry {
    pub anchor: PointRef,
    pub pot: Vec<Option<PointRef>>,
    pub neighbor_count: usize,
}

impl NetEntry {
    /// An entry for a freshly inserted anchor, which represents its own group.
    pub fn new(anchor: PointRef, m: usize) -> Self {
        let mut pot = vec![None; m];
        pot[anchor.group] = Some(anchor.clone());
        NetEntry {
            anchor,
            pot,
            neighbor_count: 1,
        }
    }

    pub fn has(&self, group: usize) -> bool {
        self.pot.get(group).is_some_and(Option::is_some)
    }

    pub fn col(&self) -> Vec<bool> {
        self.pot.iter().map(Option::is_some).collect()
    }

    /// The color vector as a string of `0`/`1`, group 0 first.
    pub fn col_string(&self) -> String {
        self.pot
            .iter()
            .map(|p| if p.is_some() { '1' } else { '0' })
            .collect()
    }

    pub fn popcount(&self) -> usize {
        self.pot.iter().filter(|p| p.is_some()).count()
    }

    /// Records `p` as a covered point; it becomes the representative of its
    /// group only if that color was missing.
    pub fn attach(&mut self, p: &PointRef) {
        self.neighbor_count += 1;
        let slot = &mut self.pot[p.group];
        if slot.is_none() {
            *slot = Some(p.clone());
        }
    }

    /// Copies the colors of `other` that this entry lacks.
    pub fn absorb_missing(&mut self, other: &NetEntry) {
        self.neighbor_count += other.neighbor_count;
        for (mine, theirs) in self.pot.iter_mut().zip(&other.pot) {
            if mine.is_none() {
                *mine = theirs.clone();
            }
        }
    }

    /// Copies the colors of `other`, replacing an existing representative
    /// when the incoming one is strictly closer to this anchor.
    pub fn absorb_nearer(&mut self, metric: &Metric, other: &NetEntry) {
        self.neighbor_count += other.neighbor_count;
        for (mine, theirs) in self.pot.iter_mut().zip(&other.pot) {
            let Some(q) = theirs else { continue };
            match mine {
                None => *mine = Some(q.clone()),
                Some(cur) => {
                    if metric.distance(q, &self.anchor) < metric.distance(cur, &self.anchor) {
                        *mine = Some(q.clone());
                    }
                }
            }
        }
    }

    /// Distinct stored points other than the anchor itself.
    pub fn extra_points(&self) -> usize {
        let mut ids: Vec<u64> = self
            .pot
            .iter()
            .flatten()
            .filter(|p| p.id != self.anchor.id)
            .map(|p| p.id)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// A packing/covering net: anchors pairwise farther than `r` apart, every
/// covered point within `alpha * r` of an anchor holding its color.
#[derive(Clone, Debug)]
pub struct Net {
    pub entries: Vec<NetEntry>,
    pub r: f64,
    pub alpha: f64,
    pub m: usize,
}

impl Net {
    pub fn empty(r: f64, alpha: f64, m: usize) -> Self {
        Net {
            entries: Vec::new(),
            r,
            alpha,
            m,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cover_radius(&self) -> f64 {
        self.alpha * self.r
    }

    pub fn anchors(&self) -> Vec<PointRef> {
        self.entries.iter().map(|e| e.anchor.clone()).collect()
    }

    /// Every stored representative, each point once, in entry order.
    pub fn pot_points(&self) -> Vec<PointRef> {
        let mut seen = std::collections::HashSet::new();
        self.entries
            .iter()
            .flat_map(|e| e.pot.iter().flatten())
            .filter(|p| seen.insert(p.id))
            .cloned()
            .collect()
    }

    /// Total number of representatives, `sum_y |Pot(y)|`.
    pub fn pot_count(&self) -> usize {
        self.entries.iter().map(NetEntry::popcount).sum()
    }

    /// Points held by the structure: anchors plus representatives that are
    /// not themselves the anchor.
    pub fn memory_points(&self) -> usize {
        self.entries.iter().map(|e| 1 + e.extra_points()).sum()
    }

    /// Index of the first entry whose anchor lies within `radius` of `p`.
    pub fn first_within(&self, metric: &Metric, p: &Point, radius: f64) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| metric.distance(p, &e.anchor) <= radius)
    }

    /// Scan-inserts `p`: attach to the first anchor within `radius`,
    /// otherwise start a new entry. Returns whether `p` became an anchor.
    pub fn insert(&mut self, metric: &Metric, p: &PointRef, radius: f64) -> bool {
        match self.first_within(metric, p, radius) {
            Some(i) => {
                self.entries[i].attach(p);
                false
            }
            None => {
                self.entries.push(NetEntry::new(p.clone(), self.m));
                true
            }
        }
    }

    /// Writes one JSON object per anchor: id, location, color bits, pot ids.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            let pot: Vec<Option<u64>> = e.pot.iter().map(|p| p.as_ref().map(|p| p.id)).collect();
            let line = json!({
                "id": e.anchor.id,
                "location": location_json(&e.anchor.location),
                "col": e.col_string(),
                "pot": pot,
            });
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub(crate) fn location_json(loc: &Location) -> serde_json::Value {
    match loc {
        Location::Vector(v) => json!(v),
        Location::Ranking(r) => json!(r.order()),
    }
}

/// Single-scan net over `points` at `threshold`.
pub fn build_net(metric: &Metric, points: &[PointRef], threshold: f64, m: usize) -> Result<Net> {
    if !(threshold >= 0.0) {
        return Err(Error::input(format!("net threshold must be nonnegative, got {threshold}")));
    }
    let mut net = Net::empty(threshold, 1.0, m);
    for p in points {
        if p.group >= m {
            return Err(Error::input(format!("point {} has group {} but m = {m}", p.id, p.group)));
        }
        net.insert(metric, p, threshold);
    }
    Ok(net)
}

/// Folds `y1` into `y2` at scale `big_r`: each anchor of `y1` within
/// `alpha * big_r` of an accumulated anchor hands over its missing colors,
/// otherwise it is appended. The result is recorded as a
/// `(big_r, 2 * alpha)` net.
pub fn merge_nets(metric: &Metric, y1: &Net, y2: Net, big_r: f64, alpha: f64) -> Result<Net> {
    if y1.m != y2.m {
        return Err(Error::input(format!(
            "cannot merge nets over {} and {} groups",
            y1.m, y2.m
        )));
    }
    let mut out = y2;
    out.r = big_r;
    out.alpha = 2.0 * alpha;
    let reach = alpha * big_r;
    for y in &y1.entries {
        match out.first_within(metric, &y.anchor, reach) {
            Some(i) => out.entries[i].absorb_missing(y),
            None => out.entries.push(y.clone()),
        }
    }
    Ok(out)
}

/// The colored point set obtained by splitting every anchor into one copy
/// per set color.
#[derive(Clone, Debug, Default)]
pub struct Expansion {
    pub points: Vec<Point>,
    /// `(entry index, group)` behind each expanded point.
    pub origin: Vec<(usize, usize)>,
}

pub fn expand(entries: &[NetEntry]) -> Expansion {
    let mut ex = Expansion::default();
    for (idx, e) in entries.iter().enumerate() {
        for (g, slot) in e.pot.iter().enumerate() {
            if slot.is_some() {
                let id = ex.points.len() as u64;
                ex.points.push(Point {
                    id,
                    location: e.anchor.location.clone(),
                    group: g,
                    arrival: e.anchor.arrival,
                });
                ex.origin.push((idx, g));
            }
        }
    }
    ex
}

/// Maps chosen `(entry, group)` pairs back to real points through Pot.
/// When several pairs share an entry, the one with the smallest group wins.
pub fn extract_candidate(entries: &[NetEntry], pairs: &[(usize, usize)]) -> Result<Vec<PointRef>> {
    let mut chosen: Vec<Option<usize>> = vec![None; entries.len()];
    for &(idx, g) in pairs {
        let entry = entries
            .get(idx)
            .ok_or_else(|| Error::Contract(format!("entry {idx} does not exist")))?;
        if !entry.has(g) {
            return Err(Error::Contract(format!(
                "anchor {} has no representative of group {g}",
                entry.anchor.id
            )));
        }
        let slot = &mut chosen[idx];
        *slot = Some(slot.map_or(g, |cur| cur.min(g)));
    }
    Ok(chosen
        .iter()
        .enumerate()
        .filter_map(|(idx, g)| g.and_then(|g| entries[idx].pot[g].clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(id: u64, x: f64, g: usize) -> PointRef {
        Point::scalar(id, x, g).into_ref()
    }

    fn ids(net: &Net) -> Vec<u64> {
        net.entries.iter().map(|e| e.anchor.id).collect()
    }

    #[test]
    fn scan_example() {
        let pts = vec![pt(0, 0.0, 0), pt(1, 0.5, 1), pt(2, 10.0, 0), pt(3, 10.4, 0)];
        let net = build_net(&Metric::l1(1), &pts, 2.0, 2).unwrap();
        assert_eq!(ids(&net), vec![0, 2]);
        assert_eq!(net.entries[0].col_string(), "11");
        assert_eq!(net.entries[0].pot[1].as_ref().unwrap().id, 1);
        assert_eq!(net.entries[1].col_string(), "10");
        assert_eq!(net.entries[1].neighbor_count, 2);
    }

    #[test]
    fn empty_and_single() {
        let net = build_net(&Metric::l1(1), &[], 1.0, 2).unwrap();
        assert!(net.is_empty());
        let net = build_net(&Metric::l1(1), &[pt(7, 3.0, 1)], 1.0, 2).unwrap();
        assert_eq!(net.entries[0].col_string(), "01");
        assert_eq!(net.entries[0].pot[1].as_ref().unwrap().id, 7);
    }

    #[test]
    fn duplicates_attach_at_zero_threshold() {
        let pts = vec![pt(0, 1.0, 0), pt(1, 1.0, 1), pt(2, 2.0, 0)];
        let net = build_net(&Metric::l1(1), &pts, 0.0, 2).unwrap();
        assert_eq!(ids(&net), vec![0, 2]);
        assert_eq!(net.entries[0].col_string(), "11");
    }

    #[test]
    fn merge_example() {
        let m = Metric::l1(1);
        let y2 = build_net(&m, &[pt(0, 0.0, 0), pt(1, 10.0, 0)], 1.0, 2).unwrap();
        let y1 = build_net(&m, &[pt(2, 3.0, 1), pt(3, 20.0, 1)], 1.0, 2).unwrap();
        let merged = merge_nets(&m, &y1, y2.clone(), 4.0, 1.0).unwrap();
        assert_eq!(ids(&merged), vec![0, 1, 3]);
        assert_eq!(merged.entries[0].col_string(), "11");
        assert_eq!(merged.entries[0].pot[1].as_ref().unwrap().id, 2);

        let same = merge_nets(&m, &Net::empty(1.0, 1.0, 2), y2, 4.0, 1.0).unwrap();
        assert_eq!(ids(&same), vec![0, 1]);

        let rethinned = merge_nets(&m, &y1, Net::empty(0.0, 1.0, 2), 4.0, 1.0).unwrap();
        assert_eq!(ids(&rethinned), vec![2, 3]);
    }

    #[test]
    fn merge_keeps_existing_representatives() {
        let m = Metric::l1(1);
        let y2 = build_net(&m, &[pt(0, 0.0, 0)], 1.0, 1).unwrap();
        let y1 = build_net(&m, &[pt(1, 1.0, 0)], 1.0, 1).unwrap();
        let merged = merge_nets(&m, &y1, y2, 4.0, 1.0).unwrap();
        assert_eq!(merged.entries[0].pot[0].as_ref().unwrap().id, 0);
        assert_eq!(merged.entries[0].neighbor_count, 2);
    }

    #[test]
    fn merge_rejects_group_mismatch() {
        assert!(merge_nets(&Metric::l1(1), &Net::empty(1.0, 1.0, 2), Net::empty(1.0, 1.0, 3), 1.0, 1.0).is_err());
    }

    #[test]
    fn expansion_sizes() {
        let m = Metric::l1(1);
        let pts = vec![pt(0, 0.0, 0), pt(1, 10.0, 0), pt(2, 10.0, 1)];
        let net = build_net(&m, &pts, 1.0, 2).unwrap();
        let ex = expand(&net.entries);
        assert_eq!(ex.points.len(), 3);
        assert_eq!(ex.origin, vec![(0, 0), (1, 0), (1, 1)]);
        assert!(expand(&[]).points.is_empty());
    }

    #[test]
    fn candidate_extraction() {
        let m = Metric::l1(1);
        let pts = vec![pt(0, 0.0, 0), pt(1, 0.5, 1), pt(2, 10.0, 0)];
        let net = build_net(&m, &pts, 2.0, 2).unwrap();
        let s = extract_candidate(&net.entries, &[(0, 1)]).unwrap();
        assert_eq!(s[0].id, 1);
        assert!(extract_candidate(&net.entries, &[]).unwrap().is_empty());
        // two picks on one anchor collapse to the smaller group
        let s = extract_candidate(&net.entries, &[(0, 1), (0, 0)]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].group, 0);
        assert!(matches!(
            extract_candidate(&net.entries, &[(1, 1)]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn memory_counts_distinct_extras() {
        let m = Metric::l1(1);
        let pts = vec![pt(0, 0.0, 0), pt(1, 0.5, 1), pt(2, 10.0, 0)];
        let net = build_net(&m, &pts, 2.0, 2).unwrap();
        assert_eq!(net.memory_points(), 3);
        assert_eq!(net.pot_count(), 3);
    }

    #[test]
    fn jsonl_dump() {
        let m = Metric::l1(1);
        let net = build_net(&m, &[pt(0, 0.0, 0), pt(1, 0.5, 1)], 2.0, 2).unwrap();
        let mut buf = Vec::new();
        net.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "{\"col\":\"11\",\"id\":0,\"location\":[0.0],\"pot\":[0,1]}\n");
    }
}
