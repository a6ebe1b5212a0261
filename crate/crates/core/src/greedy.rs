//! Farthest-first traversal (Gonzalez's greedy k-center 2-approximation).

use std::borrow::Borrow;

use crate::error::{Error, Result};
use crate::metric::{Metric, Point};

/// Result of a farthest-first traversal over a point slice.
#[derive(Clone, Debug)]
pub struct Traversal {
    /// Indices (into the input slice) of the picked centers, in pick order.
    pub order: Vec<usize>,
    /// `insertion[i]` is the distance of pick `i` to the earlier picks at the
    /// moment it was chosen; infinite for the seed.
    pub insertion: Vec<f64>,
    /// Distance of every input point to its nearest pick.
    pub residual: Vec<f64>,
    /// Position in `order` of every input point's nearest pick. Ties go to
    /// the pick with the smaller point id.
    pub nearest: Vec<usize>,
}

impl Traversal {
    pub fn radius(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Picks up to `count` centers farthest-first, starting from `seed`.
/// Farthest-point ties are broken by smallest point id.
pub fn farthest_first<P: Borrow<Point>>(
    metric: &Metric,
    points: &[P],
    count: usize,
    seed: usize,
) -> Traversal {
    let n = points.len();
    let count = count.min(n);
    let mut order = Vec::with_capacity(count);
    let mut insertion = Vec::with_capacity(count);
    let mut residual = vec![f64::INFINITY; n];
    let mut nearest = vec![0usize; n];
    if count == 0 {
        return Traversal {
            order,
            insertion,
            residual,
            nearest,
        };
    }

    let mut next = seed;
    let mut next_dist = f64::INFINITY;
    for pick in 0..count {
        order.push(next);
        insertion.push(next_dist);
        let center = points[next].borrow();

        let mut far = usize::MAX;
        let mut far_dist = f64::NEG_INFINITY;
        for (j, p) in points.iter().enumerate() {
            let p = p.borrow();
            let d = metric.distance(p, center);
            let closer = d < residual[j]
                || (d == residual[j] && center.id < points[order[nearest[j]]].borrow().id);
            if closer {
                residual[j] = d;
                nearest[j] = pick;
            }
            let better = residual[j] > far_dist
                || (residual[j] == far_dist && p.id < points[far].borrow().id);
            if better {
                far = j;
                far_dist = residual[j];
            }
        }
        next = far;
        next_dist = far_dist;
    }

    Traversal {
        order,
        insertion,
        residual,
        nearest,
    }
}

/// Gonzalez's greedy: `min(k, |P|)` centers and the covering radius
/// `max_p d(p, centers)`. Returns indices into `points`.
pub fn gonzalez_greedy<P: Borrow<Point>>(
    metric: &Metric,
    points: &[P],
    k: usize,
    seed_index: usize,
) -> Result<(Vec<usize>, f64)> {
    if points.is_empty() {
        return Err(Error::input("greedy k-center needs at least one point"));
    }
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if seed_index >= points.len() {
        return Err(Error::input(format!(
            "seed index {seed_index} out of range for {} points",
            points.len()
        )));
    }
    let tr = farthest_first(metric, points, k, seed_index);
    let radius = tr.radius();
    Ok((tr.order, radius))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<Point> {
        xs.iter()
            .enumerate()
            .map(|(i, &x)| Point::scalar(i as u64, x, 0))
            .collect()
    }

    #[test]
    fn two_centers_on_a_line() {
        let pts = line(&[0.0, 1.0, 8.0, 9.0]);
        let (centers, radius) = gonzalez_greedy(&Metric::l1(1), &pts, 2, 0).unwrap();
        assert_eq!(centers, vec![0, 3]);
        assert_eq!(radius, 1.0);
    }

    #[test]
    fn single_center_radius_is_max_distance() {
        let pts = line(&[0.0, 1.0, 8.0, 9.0]);
        let (centers, radius) = gonzalez_greedy(&Metric::l1(1), &pts, 1, 0).unwrap();
        assert_eq!(centers, vec![0]);
        assert_eq!(radius, 9.0);
    }

    #[test]
    fn every_point_a_center() {
        let pts = line(&[0.0, 1.0, 8.0, 9.0]);
        let (centers, radius) = gonzalez_greedy(&Metric::l1(1), &pts, 4, 0).unwrap();
        assert_eq!(centers.len(), 4);
        assert_eq!(radius, 0.0);
        let (centers, _) = gonzalez_greedy(&Metric::l1(1), &pts, 10, 0).unwrap();
        assert_eq!(centers.len(), 4);
    }

    #[test]
    fn ties_prefer_smaller_id() {
        // 2 and -2 are equally far from the seed
        let pts = line(&[0.0, 2.0, -2.0]);
        let (centers, _) = gonzalez_greedy(&Metric::l1(1), &pts, 2, 0).unwrap();
        assert_eq!(centers, vec![0, 1]);
    }

    #[test]
    fn empty_input_is_rejected() {
        let pts: Vec<Point> = vec![];
        assert!(gonzalez_greedy(&Metric::l1(1), &pts, 2, 0).is_err());
    }
}
