//! One-pass coreset maintenance over an insertion-only stream.
//!
//! [`DoublingState`] is the incremental doubling algorithm for `c`-center:
//! at most `c` anchors, pairwise farther than `4r` apart, covering every
//! seen point within `8r`, where `r` only grows by powers of two and stays
//! below the optimal `c`-center radius of the prefix. The robust stream
//! keeps a separate net at scale `eps_bar * r`; the heuristic stream uses the
//! doubling anchors themselves, with their colors, as the coreset.

use crate::error::{Error, Result};
use crate::metric::{Metric, Point, PointRef};
use crate::net::{merge_nets, Net, NetEntry};
use crate::problem::{Instance, Solution};
use crate::solver::solve_on_entries;

#[derive(Clone, Debug, PartialEq)]
pub enum DoublingEvent {
    /// Covered by the anchor with this id.
    Attached(u64),
    Added,
    /// `r` left zero; the anchors were thinned for the first time.
    Initialized { r: f64 },
    /// `r` was multiplied by `2^lambda`.
    Doubled { lambda: u32, r: f64 },
}

#[derive(Clone, Debug)]
pub struct DoublingState {
    pub anchors: Vec<NetEntry>,
    pub r: f64,
    pub capacity: usize,
    /// `(t, r)` after every change of `r`.
    pub history: Vec<(u64, f64)>,
    pub t: u64,
    metric: Metric,
    m: usize,
    track_colors: bool,
}

impl DoublingState {
    /// With `track_colors` off, anchors keep no representatives besides
    /// themselves.
    pub fn new(metric: Metric, m: usize, capacity: usize, track_colors: bool) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::input("doubling capacity must be at least 1"));
        }
        Ok(DoublingState {
            anchors: Vec::new(),
            r: 0.0,
            capacity,
            history: Vec::new(),
            t: 0,
            metric,
            m,
            track_colors,
        })
    }

    fn nearest(&self, p: &Point, among: &[NetEntry]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in among.iter().enumerate() {
            let d = self.metric.distance(p, &e.anchor);
            let better = match best {
                None => true,
                Some((bi, bd)) => d < bd || (d == bd && e.anchor.id < among[bi].anchor.id),
            };
            if better {
                best = Some((i, d));
            }
        }
        best
    }

    fn attach(&mut self, idx: usize, p: &PointRef) {
        let entry = &mut self.anchors[idx];
        entry.neighbor_count += 1;
        if !self.track_colors {
            return;
        }
        let anchor = entry.anchor.clone();
        let slot = &mut entry.pot[p.group];
        match slot {
            None => *slot = Some(p.clone()),
            Some(cur) => {
                if self.metric.distance(p, &anchor) < self.metric.distance(cur, &anchor) {
                    *slot = Some(p.clone());
                }
            }
        }
    }

    /// Insertion-order greedy maximal subset of `pool` pairwise farther
    /// than `sep` apart.
    fn greedy_subset(&self, pool: &[NetEntry], sep: f64) -> Vec<usize> {
        let mut keep: Vec<usize> = Vec::new();
        for (i, e) in pool.iter().enumerate() {
            if keep
                .iter()
                .all(|&j| self.metric.distance(&e.anchor, &pool[j].anchor) > sep)
            {
                keep.push(i);
            }
        }
        keep
    }

    pub fn insert(&mut self, p: &PointRef) -> DoublingEvent {
        self.t += 1;
        if let Some((i, d)) = self.nearest(p, &self.anchors) {
            if d <= 8.0 * self.r {
                let id = self.anchors[i].anchor.id;
                self.attach(i, p);
                return DoublingEvent::Attached(id);
            }
        }
        if self.anchors.len() < self.capacity {
            self.anchors.push(NetEntry::new(p.clone(), self.m));
            return DoublingEvent::Added;
        }

        let mut pool = std::mem::take(&mut self.anchors);
        pool.push(NetEntry::new(p.clone(), self.m));
        let initializing = self.r == 0.0;
        if initializing {
            let mut min = f64::INFINITY;
            for (i, x) in pool.iter().enumerate() {
                for y in &pool[i + 1..] {
                    min = min.min(self.metric.distance(&x.anchor, &y.anchor));
                }
            }
            self.r = min / 2.0;
        }
        let mut lambda = 0u32;
        let keep = loop {
            let keep = self.greedy_subset(&pool, 4.0 * 2f64.powi(lambda as i32) * self.r);
            if keep.len() <= self.capacity {
                break keep;
            }
            lambda += 1;
        };
        self.r *= 2f64.powi(lambda as i32);
        self.history.push((self.t, self.r));

        let mut survivors = Vec::with_capacity(keep.len());
        let mut evicted = Vec::new();
        let mut next = keep.iter().peekable();
        for (i, e) in pool.into_iter().enumerate() {
            if next.peek() == Some(&&i) {
                next.next();
                survivors.push(e);
            } else {
                evicted.push(e);
            }
        }
        for y in evicted {
            let (j, _) = self.nearest(&y.anchor, &survivors).expect("at least one survivor");
            if self.track_colors {
                survivors[j].absorb_nearer(&self.metric, &y);
            } else {
                survivors[j].neighbor_count += y.neighbor_count;
            }
        }
        self.anchors = survivors;
        if initializing {
            DoublingEvent::Initialized { r: self.r }
        } else {
            DoublingEvent::Doubled { lambda, r: self.r }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamMode {
    Robust,
    /// Coreset capped at `q` anchors.
    Heuristic { q: usize },
}

#[derive(Clone, Debug)]
pub struct StreamState {
    pub doubling: DoublingState,
    /// The robust net; stays empty in heuristic mode.
    pub net: Net,
    pub eps_bar: f64,
    pub mode: StreamMode,
    pub t: u64,
    metric: Metric,
}

impl StreamState {
    pub fn new(inst: &Instance, mode: StreamMode) -> Result<Self> {
        inst.check()?;
        let m = inst.m();
        let doubling = match mode {
            StreamMode::Robust => DoublingState::new(inst.metric, m, inst.k(), false)?,
            StreamMode::Heuristic { q } => {
                if q <= inst.k() {
                    return Err(Error::input(format!(
                        "coreset size {q} must exceed k = {}",
                        inst.k()
                    )));
                }
                DoublingState::new(inst.metric, m, q, true)?
            }
        };
        Ok(StreamState {
            doubling,
            net: Net::empty(0.0, 2.0, m),
            eps_bar: inst.eps_bar(),
            mode,
            t: 0,
            metric: inst.metric,
        })
    }

    pub fn insert(&mut self, p: &PointRef) -> Result<DoublingEvent> {
        if p.group >= self.net.m {
            return Err(Error::input(format!(
                "point {} has group {} but m = {}",
                p.id, p.group, self.net.m
            )));
        }
        self.t += 1;
        let before = self.doubling.r;
        let event = self.doubling.insert(p);
        if self.mode != StreamMode::Robust {
            return Ok(event);
        }
        let r = self.doubling.r;
        let half = self.eps_bar * r / 2.0;
        if r > before {
            let m = self.net.m;
            let old = std::mem::replace(&mut self.net, Net::empty(half, 2.0, m));
            let empty = Net::empty(half, 1.0, m);
            self.net = merge_nets(&self.metric, &old, empty, half, 1.0)?;
        }
        self.net.insert(&self.metric, p, self.eps_bar * r);
        self.net.r = half;
        self.net.alpha = 2.0;
        Ok(event)
    }

    /// The coreset queries are answered from.
    pub fn coreset(&self) -> Net {
        match self.mode {
            StreamMode::Robust => self.net.clone(),
            StreamMode::Heuristic { .. } => Net {
                entries: self.doubling.anchors.clone(),
                r: 4.0 * self.doubling.r,
                alpha: 2.0,
                m: self.net.m,
            },
        }
    }

    fn entries(&self) -> &[NetEntry] {
        match self.mode {
            StreamMode::Robust => &self.net.entries,
            StreamMode::Heuristic { .. } => &self.doubling.anchors,
        }
    }

    pub fn anchor_count(&self) -> usize {
        self.entries().len()
    }

    /// Points held: coreset anchors and their extra representatives, plus the
    /// doubling anchors in robust mode.
    pub fn memory_points(&self) -> usize {
        let core: usize = self.entries().iter().map(|e| 1 + e.extra_points()).sum();
        match self.mode {
            StreamMode::Robust => core + self.doubling.anchors.len(),
            StreamMode::Heuristic { .. } => core,
        }
    }

    pub fn query(&self, inst: &Instance) -> Result<Solution> {
        if self.t == 0 {
            return Err(Error::input("no points have been streamed yet"));
        }
        solve_on_entries(&inst.metric, self.entries(), &inst.capacities)
    }
}
