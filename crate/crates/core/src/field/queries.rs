use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::distance::graph_distance;
use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::graph::SpatialGraph;

/// Query points with their exact occupancy labels.
#[derive(Clone, Debug, PartialEq)]
pub struct QuerySet {
    pub points: Vec<Point3>,
    pub labels: Vec<u8>,
}

impl QuerySet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of points labeled occupied.
    pub fn positive_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l == 1).count() as f64 / self.labels.len() as f64
    }
}

/// How supervision points are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingConfig {
    pub count: usize,
    /// Share of points drawn near the centerlines.
    pub near_fraction: f64,
    /// Range of the isotropic Gaussian perturbation scale.
    pub sigma_range: (f64, f64),
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            count: 2048,
            near_fraction: 0.5,
            sigma_range: (0.005, 0.05),
        }
    }
}

/// Draws `round(near_fraction * count)` points near the graph and the rest
/// uniformly in `[-1, 1]³`, labeling every point with the exact occupancy test.
///
/// Near points perturb a center chosen uniformly by arc length along the edges
/// (isolated nodes are picked uniformly when there are no edges) with
/// `N(0, σ² I)`, `σ ~ U(sigma_range)`.
pub fn sample_queries(
    graph: &SpatialGraph,
    r: f64,
    config: &SamplingConfig,
    seed: u64,
) -> Result<QuerySet> {
    let SamplingConfig {
        count,
        near_fraction,
        sigma_range: (sigma_lo, sigma_hi),
    } = *config;
    if count == 0 {
        return Err(Error::InvalidArgument("query count must be positive".into()));
    }
    if !(0.0..=1.0).contains(&near_fraction) {
        return Err(Error::InvalidArgument(format!(
            "near fraction {near_fraction} outside [0, 1]"
        )));
    }
    if !(sigma_lo > 0.0 && sigma_lo <= sigma_hi) {
        return Err(Error::InvalidArgument(format!(
            "sigma range [{sigma_lo}, {sigma_hi}] must satisfy 0 < lo <= hi"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("pseudo radius must be > 0, got {r}")));
    }
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_near = (near_fraction * count as f64).round() as usize;
    let mut points = Vec::with_capacity(count);

    let nodes = graph.nodes();
    let cumulative: Vec<f64> = graph
        .edges()
        .iter()
        .scan(0.0, |acc, &(i, j)| {
            *acc += geom::dist(nodes[i], nodes[j]);
            Some(*acc)
        })
        .collect();
    let total = cumulative.last().copied().unwrap_or(0.0);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    for _ in 0..n_near {
        let center = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let e = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
            let (a, b) = graph.segment(e);
            let t = rng.random::<f64>();
            geom::add(a, geom::scale(geom::sub(b, a), t))
        } else {
            nodes[rng.random_range(0..nodes.len())]
        };
        let sigma = if sigma_hi > sigma_lo {
            rng.random_range(sigma_lo..=sigma_hi)
        } else {
            sigma_lo
        };
        let noise: Point3 = [0, 1, 2].map(|_| sigma * std_normal.sample(&mut rng));
        points.push(geom::add(center, noise));
    }
    for _ in n_near..count {
        points.push([0, 1, 2].map(|_| rng.random_range(-1.0..=1.0)));
    }

    let labels = points
        .iter()
        .map(|&p| graph_distance(p, graph).map(|d| u8::from(d <= r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuerySet { points, labels })
}
