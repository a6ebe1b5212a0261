//! Points, metric spaces and the clustering cost `C(S)`.

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shared handle to an input point. Nets, coresets and solutions all refer
/// back to original points through these.
pub type PointRef = Arc<Point>;

/// A permutation of distinct items, compared by the number of inverted pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    order: Vec<u32>,
    sorted: Vec<u32>,
    /// `positions[j]` is the rank position of the j-th smallest item.
    positions: Vec<u32>,
}

impl Ranking {
    pub fn new(order: Vec<u32>) -> Result<Self> {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::input("ranking contains a repeated item"));
        }
        let mut positions = vec![0u32; order.len()];
        for (pos, item) in order.iter().enumerate() {
            let j = sorted.binary_search(item).expect("item present");
            positions[j] = pos as u32;
        }
        Ok(Ranking {
            order,
            sorted,
            positions,
        })
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn inversions(&self, other: &Ranking) -> u64 {
        let n = self.positions.len();
        let mut count = 0u64;
        for a in 0..n {
            for b in (a + 1)..n {
                let left = self.positions[a] < self.positions[b];
                let right = other.positions[a] < other.positions[b];
                if left != right {
                    count += 1;
                }
            }
        }
        count
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    Vector(Vec<f64>),
    Ranking(Ranking),
}

impl Location {
    pub fn dimension(&self) -> usize {
        match self {
            Location::Vector(v) => v.len(),
            Location::Ranking(r) => r.len(),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Vector(v) => write!(f, "{v:?}"),
            Location::Ranking(r) => write!(f, "{:?}", r.order),
        }
    }
}

/// An input point. `group` is a zero-based group index in `0..m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub id: u64,
    pub location: Location,
    pub group: usize,
    pub arrival: u64,
}

impl Point {
    /// A vector point whose arrival index equals its id.
    pub fn vector(id: u64, coords: Vec<f64>, group: usize) -> Self {
        Point {
            id,
            location: Location::Vector(coords),
            group,
            arrival: id,
        }
    }

    /// Convenience for one-dimensional examples.
    pub fn scalar(id: u64, x: f64, group: usize) -> Self {
        Self::vector(id, vec![x], group)
    }

    pub fn ranking(id: u64, order: Vec<u32>, group: usize) -> Result<Self> {
        Ok(Point {
            id,
            location: Location::Ranking(Ranking::new(order)?),
            group,
            arrival: id,
        })
    }

    pub fn with_arrival(mut self, arrival: u64) -> Self {
        self.arrival = arrival;
        self
    }

    pub fn into_ref(self) -> PointRef {
        Arc::new(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    L1,
    L2,
    KendallInversions,
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "manhattan" => Ok(MetricKind::L1),
            "l2" | "euclidean" => Ok(MetricKind::L2),
            "kendall" | "kendall_inversions" | "inversions" => Ok(MetricKind::KendallInversions),
            other => Err(Error::input(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metric {
    pub kind: MetricKind,
    /// Coordinate count for vector metrics, ranking length for inversions.
    pub dimension: usize,
}

impl Metric {
    pub fn l1(dimension: usize) -> Self {
        Metric {
            kind: MetricKind::L1,
            dimension,
        }
    }

    pub fn l2(dimension: usize) -> Self {
        Metric {
            kind: MetricKind::L2,
            dimension,
        }
    }

    pub fn kendall(len: usize) -> Self {
        Metric {
            kind: MetricKind::KendallInversions,
            dimension: len,
        }
    }

    /// Checked distance; fails when the two locations are not comparable.
    pub fn try_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        match (self.kind, &x.location, &y.location) {
            (MetricKind::L1 | MetricKind::L2, Location::Vector(a), Location::Vector(b)) => {
                if a.len() != b.len() {
                    return Err(Error::DimensionMismatch {
                        left: a.len(),
                        right: b.len(),
                    });
                }
                Ok(self.vector_distance(a, b))
            }
            (MetricKind::KendallInversions, Location::Ranking(a), Location::Ranking(b)) => {
                if a.sorted != b.sorted {
                    if a.len() != b.len() {
                        return Err(Error::DimensionMismatch {
                            left: a.len(),
                            right: b.len(),
                        });
                    }
                    return Err(Error::input("rankings are over different item sets"));
                }
                Ok(a.inversions(b) as f64)
            }
            (kind, _, _) => Err(Error::input(format!(
                "location kind does not match metric {kind:?}"
            ))),
        }
    }

    /// Distance between two points of a validated dataset.
    ///
    /// Panics on incomparable locations; run [`Metric::validate`] on inputs
    /// before handing them to the algorithms.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match (&x.location, &y.location) {
            (Location::Vector(a), Location::Vector(b)) if self.kind != MetricKind::KendallInversions => {
                debug_assert_eq!(a.len(), b.len());
                self.vector_distance(a, b)
            }
            (Location::Ranking(a), Location::Ranking(b)) if self.kind == MetricKind::KendallInversions => {
                debug_assert_eq!(a.sorted, b.sorted);
                a.inversions(b) as f64
            }
            _ => panic!("location kind does not match metric {:?}", self.kind),
        }
    }

    fn vector_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            MetricKind::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            MetricKind::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            MetricKind::KendallInversions => unreachable!(),
        }
    }

    /// Checks that every point is comparable under this metric and that ids
    /// are unique.
    pub fn validate<P: Borrow<Point>>(&self, points: &[P]) -> Result<()> {
        let mut ids = std::collections::HashSet::with_capacity(points.len());
        let mut reference: Option<&Ranking> = None;
        for p in points {
            let p = p.borrow();
            if !ids.insert(p.id) {
                return Err(Error::input(format!("duplicate point id {}", p.id)));
            }
            match (&p.location, self.kind) {
                (Location::Vector(v), MetricKind::L1 | MetricKind::L2) => {
                    if v.len() != self.dimension {
                        return Err(Error::DimensionMismatch {
                            left: v.len(),
                            right: self.dimension,
                        });
                    }
                    if v.iter().any(|c| !c.is_finite()) {
                        return Err(Error::input(format!("point {} has a non-finite coordinate", p.id)));
                    }
                }
                (Location::Ranking(r), MetricKind::KendallInversions) => {
                    if r.len() != self.dimension {
                        return Err(Error::DimensionMismatch {
                            left: r.len(),
                            right: self.dimension,
                        });
                    }
                    match reference {
                        None => reference = Some(r),
                        Some(first) if first.sorted != r.sorted => {
                            return Err(Error::input(format!(
                                "point {} ranks a different item set",
                                p.id
                            )));
                        }
                        Some(_) => {}
                    }
                }
                _ => {
                    return Err(Error::input(format!(
                        "point {} does not match metric {:?}",
                        p.id, self.kind
                    )))
                }
            }
        }
        Ok(())
    }

    /// `d(p, S) = min_{s in S} d(p, s)`; infinite for an empty `S`.
    pub fn distance_to_set<P: Borrow<Point>>(&self, p: &Point, set: &[P]) -> f64 {
        set.iter()
            .map(|s| self.distance(p, s.borrow()))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `C(S) = max_{p in P} min_{s in S} d(p, s)`.
pub fn evaluate_cost<P: Borrow<Point>, S: Borrow<Point>>(
    metric: &Metric,
    points: &[P],
    centers: &[S],
) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::input("cost of an empty center set is undefined"));
    }
    Ok(points
        .iter()
        .map(|p| metric.distance_to_set(p.borrow(), centers))
        .fold(0.0, f64::max))
}
