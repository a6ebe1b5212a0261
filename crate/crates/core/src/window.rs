//! Fair k-center coreset over a sliding window of the last `N` points.
//!
//! One [`GuessState`] is kept per radius guess `phi = (1 + lambda)^i`. It
//! holds at most `k` attractors pairwise farther than `2 phi` apart; each
//! attractor owns a small net of entries at scale `delta * phi`. Entries
//! whose attractor left become orphans and stay until the points they
//! represent expire. Time is the arrival index: the point with arrival `t`
//! is in the window while `t > now - N`, so comparing time-to-live values
//! is comparing arrivals.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{Metric, Point, PointRef};
use crate::net::NetEntry;
use crate::problem::Solution;
use crate::solver::{jnn_select, solve_on_entries};

#[derive(Clone, Debug, PartialEq)]
pub struct WindowConfig {
    pub metric: Metric,
    pub capacities: Vec<usize>,
    /// Window length `N`.
    pub window: u64,
    pub lambda: f64,
    pub epsilon: f64,
    /// Record one trace line per guess event.
    pub trace: bool,
    /// Remember which entry attracted every live point (for replay checks).
    pub track_attraction: bool,
}

impl WindowConfig {
    pub fn new(metric: Metric, capacities: Vec<usize>, window: u64, lambda: f64, epsilon: f64) -> Result<Self> {
        let cfg = WindowConfig {
            metric,
            capacities,
            window,
            lambda,
            epsilon,
            trace: false,
            track_attraction: false,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.capacities.is_empty() || self.k() == 0 {
            return Err(Error::input("capacities must sum to at least 1"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::input(format!("lambda must lie in (0, 1], got {}", self.lambda)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::input(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.window <= self.k() as u64 {
            return Err(Error::input(format!(
                "window length {} must exceed k = {}",
                self.window,
                self.k()
            )));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.capacities.iter().sum()
    }

    pub fn m(&self) -> usize {
        self.capacities.len()
    }

    pub fn delta(&self) -> f64 {
        self.epsilon / (1.0 + self.lambda)
    }

    pub fn phi(&self, exponent: i32) -> f64 {
        (1.0 + self.lambda).powi(exponent)
    }

    fn floor_log(&self, x: f64) -> i32 {
        (x.ln() / self.lambda.ln_1p()).floor() as i32
    }

    fn ceil_log(&self, x: f64) -> i32 {
        (x.ln() / self.lambda.ln_1p()).ceil() as i32
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GuessEvent {
    Attached { entry: u64, point: u64 },
    NewEntry { entry: u64, parent: u64 },
    NewAttractor(u64),
    Evicted { attractor: u64, infeasible_until: u64 },
    AttractorExpired(u64),
    EntryVirtual(u64),
    PotCleared { entry: u64, group: usize },
    EntryDeleted(u64),
    Seeded,
    Retired,
}

impl fmt::Display for GuessEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuessEvent::Attached { entry, point } => write!(f, "attach {point} -> {entry}"),
            GuessEvent::NewEntry { entry, parent } => write!(f, "entry {entry} under {parent}"),
            GuessEvent::NewAttractor(a) => write!(f, "attractor {a}"),
            GuessEvent::Evicted {
                attractor,
                infeasible_until,
            } => write!(f, "evict {attractor}, infeasible until {infeasible_until}"),
            GuessEvent::AttractorExpired(a) => write!(f, "attractor {a} expired"),
            GuessEvent::EntryVirtual(e) => write!(f, "entry {e} virtual"),
            GuessEvent::PotCleared { entry, group } => write!(f, "entry {entry} lost group {group}"),
            GuessEvent::EntryDeleted(e) => write!(f, "entry {e} deleted"),
            GuessEvent::Seeded => write!(f, "seeded"),
            GuessEvent::Retired => write!(f, "retired"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WindowEntry {
    pub anchor: PointRef,
    /// Id of the attractor the entry was created under.
    pub parent: u64,
    /// The parent is no longer an attractor.
    pub orphan: bool,
    /// The anchor itself has left the window.
    pub is_virtual: bool,
    /// Newest covered point of each group.
    pub pot: Vec<Option<PointRef>>,
}

#[derive(Clone, Debug)]
pub struct Attractor {
    pub point: PointRef,
    /// Entry ids in creation order.
    pub members: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct GuessState {
    pub exponent: i32,
    pub phi: f64,
    pub delta_phi: f64,
    pub attractors: Vec<Attractor>,
    pub entries: BTreeMap<u64, WindowEntry>,
    /// The guess may not be used before this time (0: usable).
    pub infeasible_until: u64,
    /// `(arrival, entry, group)` of every stored representative.
    pot_index: BTreeSet<(u64, u64, usize)>,
    /// `(arrival, entry)` of every non-virtual anchor.
    anchor_index: BTreeSet<(u64, u64)>,
    /// `(arrival, point) -> entry` for live points, when tracked.
    attraction: Option<BTreeMap<(u64, u64), u64>>,
    events: Vec<GuessEvent>,
    trace: bool,
    k: usize,
    m: usize,
    window: u64,
}

impl GuessState {
    pub fn new(cfg: &WindowConfig, exponent: i32) -> Self {
        let phi = cfg.phi(exponent);
        GuessState {
            exponent,
            phi,
            delta_phi: cfg.delta() * phi,
            attractors: Vec::new(),
            entries: BTreeMap::new(),
            infeasible_until: 0,
            pot_index: BTreeSet::new(),
            anchor_index: BTreeSet::new(),
            attraction: cfg.track_attraction.then(BTreeMap::new),
            events: Vec::new(),
            trace: cfg.trace,
            k: cfg.k(),
            m: cfg.m(),
            window: cfg.window,
        }
    }

    fn log(&mut self, e: GuessEvent) {
        if self.trace {
            self.events.push(e);
        }
    }

    pub fn is_feasible(&self, t: u64) -> bool {
        t >= self.infeasible_until
    }

    /// Entry that attracted the live point `(arrival, id)`, when tracked.
    pub fn attraction(&self) -> Option<&BTreeMap<(u64, u64), u64>> {
        self.attraction.as_ref()
    }

    fn attract(&mut self, p: &Point, entry: u64) {
        if let Some(map) = &mut self.attraction {
            map.insert((p.arrival, p.id), entry);
        }
    }

    fn set_pot(&mut self, entry: u64, p: &PointRef) {
        let e = self.entries.get_mut(&entry).expect("entry exists");
        if let Some(old) = e.pot[p.group].replace(p.clone()) {
            self.pot_index.remove(&(old.arrival, entry, p.group));
        }
        self.pot_index.insert((p.arrival, entry, p.group));
    }

    fn add_entry(&mut self, p: &PointRef, parent: u64) {
        self.entries.insert(
            p.id,
            WindowEntry {
                anchor: p.clone(),
                parent,
                orphan: false,
                is_virtual: false,
                pot: vec![None; self.m],
            },
        );
        self.anchor_index.insert((p.arrival, p.id));
        self.set_pot(p.id, p);
        self.attract(p, p.id);
    }

    fn add_attractor(&mut self, p: &PointRef) {
        self.attractors.push(Attractor {
            point: p.clone(),
            members: vec![p.id],
        });
        self.add_entry(p, p.id);
        self.log(GuessEvent::NewAttractor(p.id));
    }

    fn orphan_members(&mut self, a: Attractor) {
        for id in a.members {
            if let Some(e) = self.entries.get_mut(&id) {
                e.orphan = true;
            }
        }
    }

    pub fn insert(&mut self, metric: &Metric, p: &PointRef) {
        let two_phi = 2.0 * self.phi;
        let mut parent: Option<usize> = None;
        for (i, a) in self.attractors.iter().enumerate() {
            if metric.distance(p, &a.point) <= two_phi {
                let newer = parent.is_none_or(|j| {
                    let b = &self.attractors[j].point;
                    a.point.arrival > b.arrival || (a.point.arrival == b.arrival && a.point.id < b.id)
                });
                if newer {
                    parent = Some(i);
                }
            }
        }

        if let Some(i) = parent {
            let hit = self.attractors[i]
                .members
                .iter()
                .copied()
                .find(|id| metric.distance(p, &self.entries[id].anchor) <= self.delta_phi);
            match hit {
                Some(entry) => {
                    self.set_pot(entry, p);
                    self.attract(p, entry);
                    self.log(GuessEvent::Attached { entry, point: p.id });
                }
                None => {
                    let a = self.attractors[i].point.id;
                    self.attractors[i].members.push(p.id);
                    self.add_entry(p, a);
                    self.log(GuessEvent::NewEntry { entry: p.id, parent: a });
                }
            }
            return;
        }

        if self.attractors.len() >= self.k {
            let (i, _) = self
                .attractors
                .iter()
                .enumerate()
                .min_by_key(|(_, a)| (a.point.arrival, a.point.id))
                .expect("k >= 1 attractors");
            let a = self.attractors.remove(i);
            let arrival = a.point.arrival;
            let until = arrival + self.window;
            self.infeasible_until = self.infeasible_until.max(until);
            self.log(GuessEvent::Evicted {
                attractor: a.point.id,
                infeasible_until: until,
            });
            self.orphan_members(a);
            self.expire_through(arrival);
        }
        self.add_attractor(p);
    }

    /// Drops everything that arrived at or before `cutoff`.
    pub fn expire_through(&mut self, cutoff: u64) {
        // an expired attractor hands its entries to the orphans
        let mut i = 0;
        while i < self.attractors.len() {
            if self.attractors[i].point.arrival <= cutoff {
                let a = self.attractors.remove(i);
                self.log(GuessEvent::AttractorExpired(a.point.id));
                self.orphan_members(a);
            } else {
                i += 1;
            }
        }

        // expired anchors stay as virtual entries
        while let Some(&(arrival, id)) = self.anchor_index.first() {
            if arrival > cutoff {
                break;
            }
            self.anchor_index.pop_first();
            if let Some(e) = self.entries.get_mut(&id) {
                e.is_virtual = true;
            }
            self.log(GuessEvent::EntryVirtual(id));
        }

        // expired representatives clear their color; colorless entries go
        while let Some(&(arrival, id, group)) = self.pot_index.first() {
            if arrival > cutoff {
                break;
            }
            self.pot_index.pop_first();
            let e = self.entries.get_mut(&id).expect("indexed entry exists");
            e.pot[group] = None;
            let colorless = e.pot.iter().all(Option::is_none);
            self.log(GuessEvent::PotCleared { entry: id, group });
            if colorless {
                let e = self.entries.remove(&id).expect("entry exists");
                if !e.is_virtual {
                    self.anchor_index.remove(&(e.anchor.arrival, id));
                }
                if !e.orphan {
                    if let Some(a) = self.attractors.iter_mut().find(|a| a.point.id == e.parent) {
                        a.members.retain(|&x| x != id);
                    }
                }
                self.log(GuessEvent::EntryDeleted(id));
            }
        }

        if let Some(map) = &mut self.attraction {
            while let Some((&(arrival, _), _)) = map.first_key_value() {
                if arrival > cutoff {
                    break;
                }
                map.pop_first();
            }
        }
    }

    /// Live entries as net entries, for solving.
    pub fn net_entries(&self) -> Vec<NetEntry> {
        self.entries
            .values()
            .map(|e| NetEntry {
                anchor: e.anchor.clone(),
                pot: e.pot.clone(),
                neighbor_count: 0,
            })
            .collect()
    }

    /// Points held: entry anchors, representatives that are not their
    /// anchor, and attractors without an entry of their own.
    pub fn storage_points(&self) -> usize {
        let extra: usize = self
            .entries
            .values()
            .map(|e| {
                let mut ids: Vec<u64> = e.pot.iter().flatten().map(|p| p.id).filter(|&id| id != e.anchor.id).collect();
                ids.sort_unstable();
                ids.dedup();
                ids.len()
            })
            .sum();
        let lone = self
            .attractors
            .iter()
            .filter(|a| !self.entries.contains_key(&a.point.id))
            .count();
        self.entries.len() + extra + lone
    }

    /// Distinct former attractors that still have orphaned entries.
    pub fn orphan_parents(&self) -> usize {
        let parents: BTreeSet<u64> = self.entries.values().filter(|e| e.orphan).map(|e| e.parent).collect();
        parents.len()
    }

    fn take_events(&mut self) -> Vec<GuessEvent> {
        std::mem::take(&mut self.events)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub exponent: i32,
    pub event: GuessEvent,
}

/// A query answer: the centers, an upper bound on their window cost, and
/// the guess it came from (`None` while the window is still buffered).
#[derive(Clone, Debug)]
pub struct WindowAnswer {
    pub solution: Solution,
    pub exponent: Option<i32>,
}

#[derive(Clone, Debug)]
pub struct SlidingWindow {
    pub cfg: WindowConfig,
    pub t: u64,
    pub lb: f64,
    pub ub: f64,
    pub guesses: BTreeMap<i32, GuessState>,
    first: Option<PointRef>,
    recent: VecDeque<PointRef>,
    newest: Vec<Option<PointRef>>,
    /// Window contents until the ladder can be built.
    buffer: Option<VecDeque<PointRef>>,
    /// `(arrival, id)` of the live points, kept while attraction is tracked.
    live: VecDeque<(u64, u64)>,
    trace: Vec<TraceRecord>,
}

impl SlidingWindow {
    pub fn new(cfg: WindowConfig) -> Result<Self> {
        cfg.check()?;
        let m = cfg.m();
        Ok(SlidingWindow {
            cfg,
            t: 0,
            lb: 0.0,
            ub: 0.0,
            guesses: BTreeMap::new(),
            first: None,
            recent: VecDeque::new(),
            newest: vec![None; m],
            buffer: Some(VecDeque::new()),
            live: VecDeque::new(),
            trace: Vec::new(),
        })
    }

    pub fn is_bootstrapping(&self) -> bool {
        self.buffer.is_some()
    }

    pub fn cutoff(&self) -> u64 {
        self.t.saturating_sub(self.cfg.window)
    }

    /// Exponent range `[floor log LB, ceil log (UB / delta)]`.
    pub fn exponent_range(&self) -> Option<(i32, i32)> {
        if self.lb > 0.0 && self.ub > 0.0 {
            Some((self.cfg.floor_log(self.lb), self.cfg.ceil_log(self.ub / self.cfg.delta())))
        } else {
            None
        }
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        std::mem::take(&mut self.trace)
    }

    fn collect_trace(&mut self) {
        if !self.cfg.trace {
            return;
        }
        let t = self.t;
        for (&exponent, g) in self.guesses.iter_mut() {
            for event in g.take_events() {
                self.trace.push(TraceRecord { t, exponent, event });
            }
        }
    }

    /// Live points of the newest arrival per group.
    fn newest_alive(&self) -> Vec<Option<PointRef>> {
        let cutoff = self.cutoff();
        self.newest
            .iter()
            .map(|p| p.clone().filter(|p| p.arrival > cutoff))
            .collect()
    }

    fn bounds_with(&self, p: &PointRef) -> (f64, f64) {
        let metric = &self.cfg.metric;
        let ub = match &self.first {
            Some(first) => self.ub.max(2.0 * metric.distance(first, p)),
            None => 0.0,
        };
        let mut lb = self.lb;
        let k = self.cfg.k();
        if self.recent.len() >= k {
            let last: Vec<&PointRef> = self.recent.iter().skip(self.recent.len() - k).chain([p]).collect();
            let mut min = f64::INFINITY;
            for (i, x) in last.iter().enumerate() {
                for y in &last[i + 1..] {
                    min = min.min(metric.distance(x, y));
                }
            }
            if min > 0.0 {
                lb = min / 2.0;
            }
        }
        (lb, ub)
    }

    /// Adds guesses entering the range, seeded from the window before `p`
    /// arrives, and retires those below it.
    fn adjust_ladder(&mut self, old: (i32, i32), new: (i32, i32)) {
        let cfg = self.cfg.clone();
        let t = self.t;
        let retired: Vec<i32> = self.guesses.range(..new.0).map(|(&i, _)| i).collect();
        for i in retired {
            self.guesses.remove(&i);
            if cfg.trace {
                self.trace.push(TraceRecord {
                    t,
                    exponent: i,
                    event: GuessEvent::Retired,
                });
            }
        }

        if new.1 > old.1 {
            // every live point is within the old upper bound of the
            // previous arrival, which is below delta * phi here
            let last = self.recent.back().expect("ladder exists after bootstrap").clone();
            let pot = self.newest_alive();
            for i in (old.1 + 1).max(new.0)..=new.1 {
                let mut g = GuessState::new(&cfg, i);
                g.attractors.push(Attractor {
                    point: last.clone(),
                    members: vec![last.id],
                });
                g.entries.insert(
                    last.id,
                    WindowEntry {
                        anchor: last.clone(),
                        parent: last.id,
                        orphan: false,
                        is_virtual: false,
                        pot: vec![None; cfg.m()],
                    },
                );
                g.anchor_index.insert((last.arrival, last.id));
                for q in pot.iter().flatten() {
                    g.set_pot(last.id, q);
                }
                if let Some(map) = &mut g.attraction {
                    for &key in &self.live {
                        map.insert(key, last.id);
                    }
                }
                g.log(GuessEvent::Seeded);
                self.guesses.insert(i, g);
            }
        }

        if new.0 < old.0 {
            // the last k + 1 points are pairwise farther than 2 phi apart,
            // so no such guess is usable before the oldest of them leaves
            let k = cfg.k();
            let oldest = self.recent.front().expect("k + 1 recent points").arrival;
            let seeds: Vec<PointRef> = self.recent.iter().skip(self.recent.len() - k).cloned().collect();
            for i in new.0..old.0.min(new.1 + 1) {
                let mut g = GuessState::new(&cfg, i);
                g.infeasible_until = oldest + cfg.window;
                for q in &seeds {
                    g.insert(&cfg.metric, q);
                }
                g.log(GuessEvent::Seeded);
                self.guesses.insert(i, g);
            }
        }
    }

    /// Processes the next point. Its arrival index is set to the new time.
    pub fn step(&mut self, p: Point) -> Result<()> {
        if p.group >= self.cfg.m() {
            return Err(Error::input(format!(
                "point {} has group {} but m = {}",
                p.id,
                p.group,
                self.cfg.m()
            )));
        }
        self.t += 1;
        let p = p.with_arrival(self.t).into_ref();
        let cutoff = self.cutoff();
        let metric = self.cfg.metric;

        while self.live.front().is_some_and(|&(a, _)| a <= cutoff) {
            self.live.pop_front();
        }
        if let Some(buf) = &mut self.buffer {
            while buf.front().is_some_and(|q| q.arrival <= cutoff) {
                buf.pop_front();
            }
        } else {
            self.guesses.par_iter_mut().for_each(|(_, g)| g.expire_through(cutoff));
        }

        let (lb, ub) = self.bounds_with(&p);
        if !self.is_bootstrapping() {
            let old = self.exponent_range().expect("bounds are positive after bootstrap");
            let new = (self.cfg.floor_log(lb), self.cfg.ceil_log(ub / self.cfg.delta()));
            if new != old {
                self.adjust_ladder(old, new);
            }
            self.guesses.par_iter_mut().for_each(|(_, g)| g.insert(&metric, &p));
        }

        self.lb = lb;
        self.ub = ub;
        if self.first.is_none() {
            self.first = Some(p.clone());
        }
        self.recent.push_back(p.clone());
        if self.recent.len() > self.cfg.k() + 1 {
            self.recent.pop_front();
        }
        self.newest[p.group] = Some(p.clone());
        if self.cfg.track_attraction {
            self.live.push_back((p.arrival, p.id));
        }

        if let Some(buf) = &mut self.buffer {
            buf.push_back(p);
            if let Some((lo, hi)) = self.exponent_range() {
                let buf = self.buffer.take().expect("buffer present");
                let cfg = &self.cfg;
                self.guesses = (lo..=hi)
                    .into_par_iter()
                    .map(|i| {
                        let mut g = GuessState::new(cfg, i);
                        for q in &buf {
                            g.insert(&metric, q);
                        }
                        (i, g)
                    })
                    .collect();
            }
        }
        self.collect_trace();
        Ok(())
    }

    /// Centers for the current window. Guesses are tried in ascending
    /// order; the answer with the smallest certified cost bound
    /// `max_x d(x, S) + delta * phi` wins.
    pub fn query(&self) -> Result<WindowAnswer> {
        if self.t == 0 {
            return Err(Error::input("the window is empty"));
        }
        let metric = &self.cfg.metric;
        let caps = &self.cfg.capacities;
        if let Some(buf) = &self.buffer {
            let pts: Vec<PointRef> = buf.iter().cloned().collect();
            let chosen = jnn_select(metric, &pts, caps)?;
            let centers: Vec<PointRef> = chosen.iter().map(|&i| pts[i].clone()).collect();
            let cost = crate::metric::evaluate_cost(metric, &pts, &centers)?;
            return Ok(WindowAnswer {
                solution: Solution { centers, cost },
                exponent: None,
            });
        }

        let mut best: Option<WindowAnswer> = None;
        let mut retry_at = u64::MAX;
        for (&i, g) in &self.guesses {
            if !g.is_feasible(self.t) {
                retry_at = retry_at.min(g.infeasible_until);
                continue;
            }
            let entries = g.net_entries();
            if entries.is_empty() {
                continue;
            }
            let mut sol = solve_on_entries(metric, &entries, caps)?;
            sol.cost += g.delta_phi;
            if best.as_ref().is_none_or(|b| sol.cost < b.solution.cost) {
                best = Some(WindowAnswer {
                    solution: sol,
                    exponent: Some(i),
                });
            }
        }
        best.ok_or(Error::RetryLater { t: self.t, retry_at })
    }

    /// Largest per-guess storage, in points.
    pub fn max_guess_storage(&self) -> usize {
        self.guesses.values().map(GuessState::storage_points).max().unwrap_or(0)
    }

    /// Total points held across all guesses plus any bootstrap buffer.
    pub fn memory_points(&self) -> usize {
        self.guesses.values().map(GuessState::storage_points).sum::<usize>()
            + self.buffer.as_ref().map_or(0, VecDeque::len)
    }
}
