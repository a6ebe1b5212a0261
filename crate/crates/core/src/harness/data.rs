//! CSV datasets: ingestion and synthetic generation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Metric, MetricKind, Point, PointRef};

/// Column layout of an input file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub metric: MetricKind,
    pub group_column: String,
}

impl Schema {
    pub fn new(metric: MetricKind) -> Self {
        Schema {
            metric,
            group_column: "group".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub points: Vec<PointRef>,
    /// Original labels; group `j` is the `j`-th label by first appearance.
    pub group_names: Vec<String>,
    pub metric: Metric,
}

impl Dataset {
    pub fn m(&self) -> usize {
        self.group_names.len()
    }
}

fn parse_err(line: u64, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn ingest_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    ingest_reader(file, schema)
}

/// Reads `id`, the group column and the feature columns (or a single
/// `ranking` column of space-separated items for the inversion metric).
/// Line numbers in errors count the header as line 1.
pub fn ingest_reader<R: Read>(input: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().all(|h| h.trim().is_empty()) {
        return Err(parse_err(1, "missing header row"));
    }
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = col("id").ok_or_else(|| parse_err(1, "header has no `id` column"))?;
    let group_col = col(&schema.group_column)
        .ok_or_else(|| parse_err(1, format!("header has no group column `{}`", schema.group_column)))?;
    let features: Vec<usize> = (0..headers.len())
        .filter(|&i| i != id_col && i != group_col)
        .collect();
    if features.is_empty() {
        return Err(parse_err(1, "header has no feature columns"));
    }
    let ranking = schema.metric == MetricKind::KendallInversions;
    if ranking && (features.len() != 1 || headers[features[0]].trim() != "ranking") {
        return Err(parse_err(1, "the inversion metric needs a single `ranking` column"));
    }
    if !ranking && headers.iter().any(|h| h.trim() == "ranking") {
        return Err(parse_err(1, "a `ranking` column needs the inversion metric"));
    }

    let mut groups: HashMap<String, usize> = HashMap::new();
    let mut group_names = Vec::new();
    let mut points = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row as u64 + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if rec.len() != headers.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", headers.len(), rec.len()),
            ));
        }
        let id: u64 = rec[id_col]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("id `{}` is not a nonnegative integer", &rec[id_col])))?;
        let label = rec[group_col].trim().to_string();
        let next = groups.len();
        let group = *groups.entry(label.clone()).or_insert_with(|| {
            group_names.push(label);
            next
        });
        let arrival = row as u64 + 1;
        let point = if ranking {
            let order: Vec<u32> = rec[features[0]]
                .split_whitespace()
                .map(|s| s.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(line, "ranking items must be nonnegative integers"))?;
            Point::ranking(id, order, group).map_err(|e| parse_err(line, e.to_string()))?
        } else {
            let coords: Vec<f64> = features
                .iter()
                .map(|&i| {
                    let s = rec[i].trim();
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| parse_err(line, format!("feature `{s}` is not a finite number")))
                })
                .collect::<Result<_>>()?;
            Point::vector(id, coords, group)
        };
        points.push(point.with_arrival(arrival));
    }
    if points.is_empty() {
        return Err(parse_err(2, "no data rows"));
    }

    let dim = points[0].location.dimension();
    let metric = match schema.metric {
        MetricKind::L1 => Metric::l1(dim),
        MetricKind::L2 => Metric::l2(dim),
        MetricKind::KendallInversions => Metric::kendall(dim),
    };
    for (i, p) in points.iter().enumerate() {
        if p.location.dimension() != dim {
            return Err(parse_err(i as u64 + 2, format!("expected {dim} coordinates")));
        }
    }
    metric.validate(&points)?;
    Ok(Dataset {
        points: points.into_iter().map(Point::into_ref).collect(),
        group_names,
        metric,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    UniformCube,
    Clustered,
}

impl std::str::FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_cube" => Ok(SynthKind::UniformCube),
            "clustered" => Ok(SynthKind::Clustered),
            other => Err(Error::input(format!("unknown generator `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub dim: usize,
    pub m: usize,
    pub seed: u64,
    pub kind: SynthKind,
    /// Planted centers for the clustered kind.
    pub clusters: usize,
}

/// Planted cluster centers: pairwise at least `20` apart in a cube of side
/// `100`, each cluster filling a unit-radius box around its center.
pub fn planted_centers(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut side = 100.0;
    while centers.len() < count {
        let mut placed = false;
        for _ in 0..1000 {
            let c: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * side).collect();
            let far = centers
                .iter()
                .all(|o| o.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) >= 20.0);
            if far {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            side *= 2.0;
        }
    }
    centers
}

/// A reproducible dataset as CSV text: `id,group,x0,..`. The first `m`
/// rows take groups `g0..g{m-1}` in order so labels and capacities line up.
pub fn synth_generate(spec: &SynthSpec) -> Result<String> {
    if spec.n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if spec.dim == 0 || spec.m == 0 {
        return Err(Error::input("dim and m must be at least 1"));
    }
    if spec.kind == SynthKind::Clustered && spec.clusters == 0 {
        return Err(Error::input("the clustered generator needs at least one cluster"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers = match spec.kind {
        SynthKind::UniformCube => Vec::new(),
        SynthKind::Clustered => planted_centers(&mut rng, spec.clusters, spec.dim),
    };
    let mut out = String::from("id,group");
    for j in 0..spec.dim {
        write!(out, ",x{j}").expect("writing to a string");
    }
    out.push('\n');
    for i in 0..spec.n {
        let group = if i < spec.m { i } else { rng.gen_range(0..spec.m) };
        write!(out, "{i},g{group}").expect("writing to a string");
        let center = (!centers.is_empty()).then(|| &centers[rng.gen_range(0..centers.len())]);
        for j in 0..spec.dim {
            let x = match center {
                None => rng.gen::<f64>(),
                Some(c) => c[j] + rng.gen_range(-1.0..1.0),
            };
            write!(out, ",{x}").expect("writing to a string");
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_groups_remapped_in_order() {
        let csv = "id,group,x\n1,F,0.5\n2,M,1.5\n";
        let ds = ingest_reader(csv.as_bytes(), &Schema::new(MetricKind::L1)).unwrap();
        assert_eq!(ds.m(), 2);
        assert_eq!(ds.group_names, vec!["F", "M"]);
        assert_eq!(ds.points[1].group, 1);
        assert_eq!(ds.points[1].arrival, 2);
    }

    #[test]
    fn ranking_column() {
        let csv = "id,group,ranking\n1,a,2 1 3\n2,b,1 2 3\n";
        let ds = ingest_reader(csv.as_bytes(), &Schema::new(MetricKind::KendallInversions)).unwrap();
        assert_eq!(ds.metric.distance(&ds.points[0], &ds.points[1]), 1.0);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let schema = Schema::new(MetricKind::L1);
        assert!(matches!(
            ingest_reader("".as_bytes(), &schema),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ingest_reader("1,F,0.5\n".as_bytes(), &schema),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ingest_reader("id,group,x\n1,F,0.5\n2,M\n".as_bytes(), &schema),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            ingest_reader("id,group,x\n1,F,abc\n".as_bytes(), &schema),
            Err(Error::Parse { line: 2, .. })
        ));
        let custom = Schema {
            metric: MetricKind::L1,
            group_column: "sex".into(),
        };
        assert!(matches!(
            ingest_reader("id,group,x\n1,F,0.5\n".as_bytes(), &custom),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn generator_contract() {
        let mut spec = SynthSpec {
            n: 1000,
            dim: 2,
            m: 3,
            seed: 5,
            kind: SynthKind::UniformCube,
            clusters: 0,
        };
        let a = synth_generate(&spec).unwrap();
        assert_eq!(a, synth_generate(&spec).unwrap());
        let ds = ingest_reader(a.as_bytes(), &Schema::new(MetricKind::L2)).unwrap();
        assert_eq!(ds.points.len(), 1000);
        assert_eq!(ds.group_names, vec!["g0", "g1", "g2"]);
        for p in &ds.points {
            let crate::metric::Location::Vector(v) = &p.location else { panic!() };
            assert!(v.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        spec.n = 0;
        assert!(synth_generate(&spec).is_err());
    }

    #[test]
    fn clustered_points_stay_near_centers() {
        let spec = SynthSpec {
            n: 200,
            dim: 2,
            m: 2,
            seed: 1,
            kind: SynthKind::Clustered,
            clusters: 4,
        };
        let ds = ingest_reader(synth_generate(&spec).unwrap().as_bytes(), &Schema::new(MetricKind::L2)).unwrap();
        let (_, radius) = crate::greedy::gonzalez_greedy(&ds.metric, &ds.points, 4, 0).unwrap();
        assert!(radius <= 2.0 * 2f64.sqrt());
    }
}
