use std::borrow::Borrow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Metric, Point, PointRef};

/// A fair k-center instance: at most `capacities[j]` centers from group `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub metric: Metric,
    pub capacities: Vec<usize>,
    pub epsilon: f64,
}

impl Instance {
    pub fn new(metric: Metric, capacities: Vec<usize>, epsilon: f64) -> Result<Self> {
        let inst = Instance {
            metric,
            capacities,
            epsilon,
        };
        inst.check()?;
        Ok(inst)
    }

    pub fn check(&self) -> Result<()> {
        if self.capacities.is_empty() {
            return Err(Error::input("at least one group capacity is required"));
        }
        if self.k() == 0 {
            return Err(Error::input("capacities must sum to at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::input(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Number of groups.
    pub fn m(&self) -> usize {
        self.capacities.len()
    }

    /// Total number of centers, `sum k_j`.
    pub fn k(&self) -> usize {
        self.capacities.iter().sum()
    }

    /// The net-scale parameter `epsilon / 3`.
    pub fn eps_bar(&self) -> f64 {
        self.epsilon / 3.0
    }

    /// Rejects points whose group has no capacity slot.
    pub fn check_groups<P: Borrow<Point>>(&self, points: &[P]) -> Result<()> {
        for p in points {
            let p = p.borrow();
            if p.group >= self.m() {
                return Err(Error::input(format!(
                    "point {} has group {} but only {} groups are configured",
                    p.id,
                    p.group,
                    self.m()
                )));
            }
        }
        Ok(())
    }
}

/// A capacity-feasible set of centers and its cost over the evaluated set.
#[derive(Clone, Debug)]
pub struct Solution {
    pub centers: Vec<PointRef>,
    pub cost: f64,
}

impl Solution {
    pub fn center_ids(&self) -> Vec<u64> {
        self.centers.iter().map(|c| c.id).collect()
    }

    pub fn group_counts(&self, m: usize) -> Vec<usize> {
        let mut counts = vec![0; m];
        for c in &self.centers {
            if c.group < m {
                counts[c.group] += 1;
            } else {
                counts.resize(c.group + 1, 0);
                counts[c.group] += 1;
            }
        }
        counts
    }

    pub fn is_feasible(&self, capacities: &[usize]) -> bool {
        self.group_counts(capacities.len())
            .iter()
            .enumerate()
            .all(|(j, &c)| c <= capacities.get(j).copied().unwrap_or(0))
    }
}

impl PartialEq for Solution {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.center_ids() == other.center_ids()
    }
}
