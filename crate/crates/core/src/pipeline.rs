//! Non-learned round trip: graph → occupancy field → skeleton → graph, with an
//! optional crop-wise mode for volumes processed piece by piece.

use crate::error::{Error, Result};
use crate::extract::{extract_graph, CHUNKED_MIN_COMPONENT};
use crate::field::{rasterize, rasterize_into, FieldConfig, GridGeometry, GridValues, OccupancyGrid};
use crate::geom::{self, Point3};
use crate::graph::SpatialGraph;
use crate::metrics::{evaluate_fields, MetricsConfig, MetricsReport};

/// Output of [`roundtrip`].
#[derive(Clone, Debug)]
pub struct RoundTrip {
    pub field: OccupancyGrid,
    pub extracted: SpatialGraph,
    pub report: MetricsReport,
}

/// Rasterizes `graph`, extracts a graph back from the field and scores it
/// against the source. With `crop = Some(n)` the field is assembled from
/// `n³`-voxel crops (see [`chunked_field`]) and dust components below
/// [`CHUNKED_MIN_COMPONENT`] nodes are dropped.
pub fn roundtrip(
    graph: &SpatialGraph,
    config: &MetricsConfig,
    crop: Option<usize>,
) -> Result<RoundTrip> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let field_cfg = config.field_config();
    let gt_field = rasterize(graph, &field_cfg)?;
    let (field, min_component) = match crop {
        None => (gt_field.clone(), 0),
        Some(n) => {
            let geometry = field_cfg.geometry()?;
            let r = config.pseudo_radius;
            let chunk = field_cfg.chunk_edge;
            let f = chunked_field(graph, &geometry, n, r, |sub, local| {
                rasterize_into(sub, r, chunk.min(*local.dims.iter().min().unwrap()), *local)
            })?;
            (f, CHUNKED_MIN_COMPONENT)
        }
    };
    let extracted = extract_graph(&field, config.tau, min_component)?;
    let pred_field = rasterize(&extracted, &field_cfg)?;
    let report = evaluate_fields(&pred_field, &gt_field, &extracted, graph, config)?;
    Ok(RoundTrip {
        field,
        extracted,
        report,
    })
}

/// Subgraph whose `r`-dilation can reach the box `[lo, hi]`: every edge with
/// a dilated bounding box overlapping it plus isolated nodes within reach.
pub fn crop_subgraph(graph: &SpatialGraph, lo: Point3, hi: Point3, r: f64) -> SpatialGraph {
    let nodes = graph.nodes();
    let pad = r * (1.0 + 1e-9) + 1e-12;
    let overlaps = |a: Point3, b: Point3| {
        (0..3).all(|k| a[k].min(b[k]) - pad <= hi[k] && a[k].max(b[k]) + pad >= lo[k])
    };
    let mut keep = vec![false; nodes.len()];
    let mut edges = Vec::new();
    for &(i, j) in graph.edges() {
        if overlaps(nodes[i], nodes[j]) {
            keep[i] = true;
            keep[j] = true;
            edges.push((i, j));
        }
    }
    for i in graph.isolated_nodes() {
        if overlaps(nodes[i], nodes[i]) {
            keep[i] = true;
        }
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::new();
    for (i, &k) in keep.iter().enumerate() {
        if k {
            remap[i] = kept.len();
            kept.push(nodes[i]);
        }
    }
    let edges = edges.into_iter().map(|(i, j)| (remap[i], remap[j])).collect();
    SpatialGraph::new(kept, edges).expect("subgraph of a valid graph")
}

/// Builds a field over `geometry` crop by crop. Each `crop³` block receives
/// the subgraph reaching it, translated so its node centroid sits at the
/// origin (no scaling); `reconstruct` renders that subgraph on the block's
/// equally translated lattice, and the result is pasted back in place.
pub fn chunked_field<F>(
    graph: &SpatialGraph,
    geometry: &GridGeometry,
    crop: usize,
    r: f64,
    reconstruct: F,
) -> Result<OccupancyGrid>
where
    F: Fn(&SpatialGraph, &GridGeometry) -> Result<OccupancyGrid>,
{
    if crop == 0 {
        return Err(Error::InvalidArgument("crop edge must be positive".into()));
    }
    let [nx, ny, nz] = geometry.dims;
    let mut out = OccupancyGrid::zeros(*geometry)?;
    let mut probs: Option<Vec<f32>> = None;
    for z0 in (0..nz).step_by(crop) {
        for y0 in (0..ny).step_by(crop) {
            for x0 in (0..nx).step_by(crop) {
                let start = [x0, y0, z0];
                let end = [(x0 + crop).min(nx), (y0 + crop).min(ny), (z0 + crop).min(nz)];
                let lo = geometry.voxel_center(x0, y0, z0);
                let hi = geometry.voxel_center(end[0] - 1, end[1] - 1, end[2] - 1);
                let sub = crop_subgraph(graph, lo, hi, r);
                if sub.is_empty() {
                    continue;
                }
                let com = geom::centroid(sub.nodes());
                let local_graph = sub.map_nodes(|p| geom::sub(p, com))?;
                let local = GridGeometry::new(
                    [0, 1, 2].map(|k| end[k] - start[k]),
                    geom::sub(lo, com),
                    geometry.spacing,
                )?;
                let block = reconstruct(&local_graph, &local)?;
                if block.dims() != local.dims {
                    return Err(Error::GridMismatch(format!(
                        "crop reconstruction has dims {:?}, expected {:?}",
                        block.dims(),
                        local.dims
                    )));
                }
                paste(&mut out, &mut probs, &block, start)?;
            }
        }
    }
    match probs {
        Some(p) => OccupancyGrid::new(*geometry, GridValues::Probability(p)),
        None => Ok(out),
    }
}

fn paste(
    out: &mut OccupancyGrid,
    probs: &mut Option<Vec<f32>>,
    block: &OccupancyGrid,
    start: [usize; 3],
) -> Result<()> {
    let geometry = *out.geometry();
    let local = *block.geometry();
    if let GridValues::Probability(_) = block.values() {
        if probs.is_none() {
            let seed = out.binary()?.iter().map(|&v| v as f32).collect();
            *probs = Some(seed);
        }
    }
    for k in 0..local.dims[2] {
        for j in 0..local.dims[1] {
            for i in 0..local.dims[0] {
                let dst = geometry.index(start[0] + i, start[1] + j, start[2] + k);
                let v = block.value(local.index(i, j, k));
                match probs {
                    Some(p) => p[dst] = v as f32,
                    None => out.binary_mut()[dst] = u8::from(v != 0.0),
                }
            }
        }
    }
    Ok(())
}

/// Rasterizes with a fresh config; handy for callers that only need the field.
pub fn field_of(graph: &SpatialGraph, r: f64, grid: usize) -> Result<OccupancyGrid> {
    rasterize(graph, &FieldConfig::new(r, grid))
}
