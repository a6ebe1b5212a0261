//! Fair k-center clustering with group-aware coresets.
//!
//! Points carry a group label and every group `j` may contribute at most
//! `k_j` centers. Small nets that remember one representative per group
//! stand in for the full input, so a 3-approximate solver run on the net
//! yields a `3(1 + eps)`-approximate center set for the data. The nets are
//! maintained over insertion-only streams ([`streaming`]), across simulated
//! processors ([`mapreduce`]) and over a sliding window ([`window`]).

pub mod audit;
pub mod error;
pub mod flow;
pub mod greedy;
pub mod harness;
pub mod metric;
pub mod net;
pub mod oracle;
pub mod problem;
pub mod solver;
pub mod mapreduce;
pub mod streaming;
pub mod window;

pub use error::{Error, Result};
pub use metric::{evaluate_cost, Location, Metric, MetricKind, Point, PointRef, Ranking};
pub use net::{build_net, expand, extract_candidate, merge_nets, Net, NetEntry};
pub use problem::{Instance, Solution};
pub use solver::{solve_fair_3approx, solve_on_coreset};
