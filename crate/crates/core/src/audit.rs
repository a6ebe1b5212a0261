//! Replay checks for nets: packing between anchors and color-faithful
//! covering of a retained source set.

use std::borrow::Borrow;
use std::fmt;

use crate::metric::{Metric, Point};
use crate::net::{Net, NetEntry};

/// Absolute slack for covering comparisons.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Two anchors not strictly farther apart than the packing radius.
    Packing { a: u64, b: u64, distance: f64 },
    /// A source point with no anchor that covers it and holds its color.
    Covering { point: u64 },
    /// A representative stored under the wrong group.
    WrongGroup { anchor: u64, slot: usize, point: u64 },
    /// A representative farther from its anchor than the covering radius.
    FarRepresentative { anchor: u64, point: u64, distance: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Packing { a, b, distance } => {
                write!(f, "anchors {a} and {b} only {distance} apart")
            }
            Violation::Covering { point } => write!(f, "point {point} is not covered"),
            Violation::WrongGroup { anchor, slot, point } => {
                write!(f, "anchor {anchor} stores point {point} in slot {slot} of another group")
            }
            Violation::FarRepresentative {
                anchor,
                point,
                distance,
            } => write!(f, "anchor {anchor} represents point {point} from {distance} away"),
        }
    }
}

pub fn check_packing(metric: &Metric, entries: &[NetEntry], r: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, x) in entries.iter().enumerate() {
        for y in &entries[i + 1..] {
            let d = metric.distance(&x.anchor, &y.anchor);
            if !(d > r) {
                out.push(Violation::Packing {
                    a: x.anchor.id,
                    b: y.anchor.id,
                    distance: d,
                });
            }
        }
    }
    out
}

/// Every representative has the group of its slot and lies within `radius`
/// of its anchor.
pub fn check_representatives(metric: &Metric, entries: &[NetEntry], radius: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in entries {
        for (slot, p) in e.pot.iter().enumerate() {
            let Some(p) = p else { continue };
            if p.group != slot {
                out.push(Violation::WrongGroup {
                    anchor: e.anchor.id,
                    slot,
                    point: p.id,
                });
            }
            let d = metric.distance(p, &e.anchor);
            if d > radius + TOLERANCE {
                out.push(Violation::FarRepresentative {
                    anchor: e.anchor.id,
                    point: p.id,
                    distance: d,
                });
            }
        }
    }
    out
}

/// Every source point has an anchor within `radius` holding its color.
pub fn check_covering<P: Borrow<Point>>(
    metric: &Metric,
    entries: &[NetEntry],
    sources: &[P],
    radius: f64,
) -> Vec<Violation> {
    sources
        .iter()
        .map(Borrow::borrow)
        .filter(|p| {
            !entries
                .iter()
                .any(|e| e.has(p.group) && metric.distance(p, &e.anchor) <= radius + TOLERANCE)
        })
        .map(|p| Violation::Covering { point: p.id })
        .collect()
}

/// Packing at `net.r` plus color-faithful covering at `net.cover_radius()`.
pub fn audit_net<P: Borrow<Point>>(metric: &Metric, net: &Net, sources: &[P]) -> Vec<Violation> {
    let radius = net.cover_radius();
    let mut out = check_packing(metric, &net.entries, net.r);
    out.extend(check_representatives(metric, &net.entries, radius));
    out.extend(check_covering(metric, &net.entries, sources, radius));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::build_net;

    #[test]
    fn clean_scan_net_passes() {
        let m = Metric::l1(1);
        let pts: Vec<_> = [0.0, 0.5, 3.0, 3.2, 9.0]
            .iter()
            .enumerate()
            .map(|(i, &x)| Point::scalar(i as u64, x, i % 2).into_ref())
            .collect();
        let net = build_net(&m, &pts, 1.0, 2).unwrap();
        assert!(audit_net(&m, &net, &pts).is_empty());
    }

    #[test]
    fn detects_uncovered_color() {
        let m = Metric::l1(1);
        let pts = vec![Point::scalar(0, 0.0, 0).into_ref()];
        let net = build_net(&m, &pts, 1.0, 2).unwrap();
        let stranger = [Point::scalar(1, 0.5, 1)];
        assert_eq!(
            check_covering(&m, &net.entries, &stranger, 1.0),
            vec![Violation::Covering { point: 1 }]
        );
    }

    #[test]
    fn detects_close_anchors() {
        let m = Metric::l1(1);
        let pts = vec![Point::scalar(0, 0.0, 0).into_ref(), Point::scalar(1, 2.0, 0).into_ref()];
        let mut net = build_net(&m, &pts, 1.0, 1).unwrap();
        net.r = 2.0;
        assert_eq!(check_packing(&m, &net.entries, net.r).len(), 1);
    }
}
