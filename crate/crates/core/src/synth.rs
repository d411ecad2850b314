//! Synthetic centerline graphs with analytically known topology.
//!
//! Every generator keeps coordinates inside `[-0.95, 0.95]` and keeps branches
//! that do not share a node well apart, so rasterizing at the default pseudo
//! radius on a 128³ grid cannot fuse distinct structures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::graph::{BettiPair, SpatialGraph};

/// Generator family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SynthSpec {
    /// Full `branching`-ary tree with `depth` levels below the root.
    Tree { depth: usize, branching: usize },
    /// Closed ring of `nodes` nodes.
    Loop { nodes: usize },
    /// `tubes` straight tubes along x, `separation` apart in y. With `bridged`
    /// the ends of neighbouring tubes are joined, giving narrow loops.
    ParallelTubes {
        tubes: usize,
        separation: f64,
        nodes_per_tube: usize,
        #[serde(default)]
        bridged: bool,
    },
    /// Planar lattice of `nx` by `ny` nodes.
    Grid { nx: usize, ny: usize },
}

impl SynthSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SynthSpec::Tree { .. } => "tree",
            SynthSpec::Loop { .. } => "loop",
            SynthSpec::ParallelTubes { .. } => "parallel-tubes",
            SynthSpec::Grid { .. } => "grid",
        }
    }

    /// Betti numbers the generated graph has by construction.
    pub fn expected_betti(&self) -> BettiPair {
        match *self {
            SynthSpec::Tree { .. } => BettiPair::new(1, 0),
            SynthSpec::Loop { .. } => BettiPair::new(1, 1),
            SynthSpec::ParallelTubes { tubes, bridged, .. } => {
                if bridged {
                    BettiPair::new(1, tubes - 1)
                } else {
                    BettiPair::new(tubes, 0)
                }
            }
            SynthSpec::Grid { nx, ny } => BettiPair::new(1, (nx - 1) * (ny - 1)),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match *self {
            SynthSpec::Tree { depth, branching } => {
                if depth == 0 || branching == 0 {
                    return bad(format!("tree needs depth >= 1 and branching >= 1, got {depth}/{branching}"));
                }
                if branching.checked_pow(depth as u32).map_or(true, |l| l > 4096) {
                    return bad(format!("tree with {branching}^{depth} leaves is too large"));
                }
            }
            SynthSpec::Loop { nodes } => {
                if nodes < 3 {
                    return bad(format!("loop needs at least 3 nodes, got {nodes}"));
                }
            }
            SynthSpec::ParallelTubes {
                tubes,
                separation,
                nodes_per_tube,
                ..
            } => {
                if tubes == 0 || nodes_per_tube < 2 {
                    return bad("parallel tubes need >= 1 tube of >= 2 nodes".into());
                }
                if !(separation > 0.0) || separation * (tubes as f64 - 1.0) > 1.6 {
                    return bad(format!("tube separation {separation} does not fit in the unit cube"));
                }
            }
            SynthSpec::Grid { nx, ny } => {
                if nx < 2 || ny < 2 {
                    return bad(format!("grid needs nx, ny >= 2, got {nx}x{ny}"));
                }
            }
        }
        Ok(())
    }
}

/// Generates a graph for `spec`. `jitter` perturbs node positions uniformly
/// by at most that amount per axis.
pub fn synth_graph(spec: &SynthSpec, jitter: f64, seed: u64) -> Result<SpatialGraph> {
    spec.validate()?;
    if !(0.0..=0.05).contains(&jitter) {
        return Err(Error::InvalidArgument(format!(
            "jitter {jitter} outside [0, 0.05]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut nodes, edges) = match *spec {
        SynthSpec::Tree { depth, branching } => tree(depth, branching),
        SynthSpec::Loop { nodes } => ring(nodes),
        SynthSpec::ParallelTubes {
            tubes,
            separation,
            nodes_per_tube,
            bridged,
        } => parallel_tubes(tubes, separation, nodes_per_tube, bridged),
        SynthSpec::Grid { nx, ny } => lattice(nx, ny),
    };
    if jitter > 0.0 {
        for p in &mut nodes {
            for c in p.iter_mut() {
                *c += rng.random_range(-jitter..=jitter);
            }
        }
    }
    SpatialGraph::new(nodes, edges)
}

fn tree(depth: usize, branching: usize) -> (Vec<Point3>, Vec<(usize, usize)>) {
    struct Frame {
        node: usize,
        level: usize,
        lo: [f64; 2],
        hi: [f64; 2],
    }
    let z_of = |level: usize| 0.9 - 1.8 * level as f64 / depth as f64;
    let mut nodes = vec![[0.0, 0.0, z_of(0)]];
    let mut edges = Vec::new();
    let mut stack = vec![Frame {
        node: 0,
        level: 0,
        lo: [-0.8, -0.8],
        hi: [0.8, 0.8],
    }];
    while let Some(f) = stack.pop() {
        if f.level == depth {
            continue;
        }
        let axis = f.level % 2;
        let width = (f.hi[axis] - f.lo[axis]) / branching as f64;
        for c in 0..branching {
            let mut lo = f.lo;
            let mut hi = f.hi;
            lo[axis] = f.lo[axis] + width * c as f64;
            hi[axis] = lo[axis] + width;
            let id = nodes.len();
            nodes.push([
                0.5 * (lo[0] + hi[0]),
                0.5 * (lo[1] + hi[1]),
                z_of(f.level + 1),
            ]);
            edges.push((f.node, id));
            stack.push(Frame {
                node: id,
                level: f.level + 1,
                lo,
                hi,
            });
        }
    }
    (nodes, edges)
}

fn ring(n: usize) -> (Vec<Point3>, Vec<(usize, usize)>) {
    let nodes = (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            // gently tilted out of the xy-plane
            let (x, y) = (0.7 * t.cos(), 0.7 * t.sin());
            [x, y, 0.2 * x]
        })
        .collect();
    let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
    (nodes, edges)
}

fn parallel_tubes(
    tubes: usize,
    separation: f64,
    per_tube: usize,
    bridged: bool,
) -> (Vec<Point3>, Vec<(usize, usize)>) {
    let mut nodes = Vec::with_capacity(tubes * per_tube);
    let mut edges = Vec::new();
    for t in 0..tubes {
        let y = (t as f64 - (tubes as f64 - 1.0) / 2.0) * separation;
        let base = nodes.len();
        for i in 0..per_tube {
            let x = -0.8 + 1.6 * i as f64 / (per_tube - 1) as f64;
            nodes.push([x, y, 0.0]);
            if i > 0 {
                edges.push((base + i - 1, base + i));
            }
        }
        if bridged && t > 0 {
            let prev = base - per_tube;
            edges.push((prev, base));
            edges.push((prev + per_tube - 1, base + per_tube - 1));
        }
    }
    (nodes, edges)
}

fn lattice(nx: usize, ny: usize) -> (Vec<Point3>, Vec<(usize, usize)>) {
    let coord = |i: usize, n: usize| -0.7 + 1.4 * i as f64 / (n - 1) as f64;
    let mut nodes = Vec::with_capacity(nx * ny);
    let mut edges = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let id = j * nx + i;
            nodes.push([coord(i, nx), coord(j, ny), 0.1 * coord(i, nx)]);
            if i > 0 {
                edges.push((id - 1, id));
            }
            if j > 0 {
                edges.push((id - nx, id));
            }
        }
    }
    (nodes, edges)
}

/// Splits the longest edge at its midpoint until the graph has `target` nodes.
/// Topology is unchanged. Ties go to the lowest edge index.
pub fn densify(graph: &SpatialGraph, target: usize) -> Result<SpatialGraph> {
    if target < graph.node_count() {
        return Err(Error::InvalidArgument(format!(
            "cannot densify {} nodes down to {target}",
            graph.node_count()
        )));
    }
    if graph.edge_count() == 0 && target > graph.node_count() {
        return Err(Error::InvalidArgument("cannot densify a graph without edges".into()));
    }
    let mut nodes = graph.nodes().to_vec();
    let mut edges = graph.edges().to_vec();
    while nodes.len() < target {
        let (longest, _) = edges
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| (k, geom::dist2(nodes[i], nodes[j])))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let (i, j) = edges[longest];
        let mid = geom::scale(geom::add(nodes[i], nodes[j]), 0.5);
        let m = nodes.len();
        nodes.push(mid);
        edges[longest] = (i, m);
        edges.push((m, j));
    }
    SpatialGraph::new(nodes, edges)
}

/// Bridged parallel tubes whose gaps sit on both sides of the merge distance
/// `2r` for the radii 0.008, 0.016 and 0.032. The narrow ones fuse at the
/// largest radius and lose their loops. At 0.016 every gap is still at least
/// two voxels wide on a 256³ grid, so a half-voxel shift of the extracted
/// centerline cannot fuse the re-rasterized tubes.
pub fn radius_phantoms() -> Vec<(String, SynthSpec)> {
    let mut out = Vec::new();
    for tubes in [2, 3] {
        for separation in [0.058, 0.062, 0.075, 0.09] {
            let spec = SynthSpec::ParallelTubes {
                tubes,
                separation,
                nodes_per_tube: 33,
                bridged: true,
            };
            out.push((format!("tubes{tubes}_sep{separation}"), spec));
        }
    }
    out
}
