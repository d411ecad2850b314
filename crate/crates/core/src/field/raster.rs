use std::collections::HashMap;

use rayon::prelude::*;

use super::distance::{graph_distance, point_segment_distance};
use super::grid::{GridGeometry, GridValues, OccupancyGrid};
use super::{DEFAULT_CHUNK, DEFAULT_PSEUDO_RADIUS, DESK_GRID};
use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::graph::SpatialGraph;

/// Pseudo radius, output lattice and chunking for rasterization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldConfig {
    pub pseudo_radius: f64,
    pub grid_dims: [usize; 3],
    pub chunk_edge: usize,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            pseudo_radius: DEFAULT_PSEUDO_RADIUS,
            grid_dims: [DESK_GRID; 3],
            chunk_edge: DEFAULT_CHUNK,
        }
    }
}

impl FieldConfig {
    /// Cubic grid of edge `n`; the chunk edge is clamped to the grid.
    pub fn new(pseudo_radius: f64, n: usize) -> Self {
        Self {
            pseudo_radius,
            grid_dims: [n; 3],
            chunk_edge: DEFAULT_CHUNK.min(n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pseudo_radius > 0.0) || !self.pseudo_radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "pseudo radius must be > 0, got {}",
                self.pseudo_radius
            )));
        }
        if self.chunk_edge == 0 || self.grid_dims.iter().any(|&d| self.chunk_edge > d) {
            return Err(Error::InvalidArgument(format!(
                "chunk edge {} must be in 1..=min(grid dims {:?})",
                self.chunk_edge, self.grid_dims
            )));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<GridGeometry> {
        GridGeometry::unit_cube(self.grid_dims)
    }
}

/// Uniform spatial hash over the r-dilated bounding boxes of a graph's
/// primitives (edge segments, plus isolated nodes as degenerate segments).
#[derive(Debug)]
pub struct SegmentHash {
    segments: Vec<(Point3, Point3)>,
    boxes: Vec<(Point3, Point3)>,
    cell: f64,
    cells: HashMap<[i64; 3], Vec<u32>>,
}

impl SegmentHash {
    pub fn new(graph: &SpatialGraph, radius: f64, cell: f64) -> Self {
        let nodes = graph.nodes();
        let mut segments: Vec<(Point3, Point3)> = graph
            .edges()
            .iter()
            .map(|&(i, j)| (nodes[i], nodes[j]))
            .collect();
        segments.extend(graph.isolated_nodes().into_iter().map(|i| (nodes[i], nodes[i])));

        // Widened slightly past r so floating-point rounding in the distance
        // never puts an occupied point outside its primitive's box.
        let pad = radius * (1.0 + 1e-9) + 1e-12;
        let boxes: Vec<(Point3, Point3)> = segments
            .iter()
            .map(|&(a, b)| {
                let lo = [0, 1, 2].map(|k| a[k].min(b[k]) - pad);
                let hi = [0, 1, 2].map(|k| a[k].max(b[k]) + pad);
                (lo, hi)
            })
            .collect();

        let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (id, (lo, hi)) in boxes.iter().enumerate() {
            let clo = lo.map(|v| (v / cell).floor() as i64);
            let chi = hi.map(|v| (v / cell).floor() as i64);
            for cz in clo[2]..=chi[2] {
                for cy in clo[1]..=chi[1] {
                    for cx in clo[0]..=chi[0] {
                        cells.entry([cx, cy, cz]).or_default().push(id as u32);
                    }
                }
            }
        }
        Self {
            segments,
            boxes,
            cell,
            cells,
        }
    }

    pub fn primitive_count(&self) -> usize {
        self.segments.len()
    }

    /// Primitive ids whose dilated box may overlap `[lo, hi]`, ascending and unique.
    pub fn candidates(&self, lo: Point3, hi: Point3) -> Vec<u32> {
        let clo = lo.map(|v| (v / self.cell).floor() as i64);
        let chi = hi.map(|v| (v / self.cell).floor() as i64);
        let mut out = Vec::new();
        for cz in clo[2]..=chi[2] {
            for cy in clo[1]..=chi[1] {
                for cx in clo[0]..=chi[0] {
                    if let Some(ids) = self.cells.get(&[cx, cy, cz]) {
                        out.extend(ids.iter().copied().filter(|&id| {
                            let (blo, bhi) = self.boxes[id as usize];
                            (0..3).all(|k| blo[k] <= hi[k] && bhi[k] >= lo[k])
                        }));
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Distance to the nearest primitive among those hashed near `p`, or
    /// infinity if nothing lies within `radius`.
    pub fn distance_within(&self, p: Point3) -> f64 {
        self.candidates(p, p)
            .into_iter()
            .map(|id| {
                let (a, b) = self.segments[id as usize];
                point_segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Renders the r-dilated graph onto a binary grid over `[-1, 1]³`.
///
/// The domain is processed in z-slabs of `chunk_edge` voxels (in parallel)
/// and within each slab chunk by chunk; each chunk only evaluates primitives
/// whose dilated box overlaps it, painting voxels inside that box. Result is
/// identical to evaluating [`occupancy`](super::occupancy) at every voxel center.
pub fn rasterize(graph: &SpatialGraph, config: &FieldConfig) -> Result<OccupancyGrid> {
    config.validate()?;
    let geometry = config.geometry()?;
    rasterize_into(graph, config.pseudo_radius, config.chunk_edge, geometry)
}

/// Rasterizes onto an arbitrary lattice, chunked in `chunk`-voxel blocks.
pub fn rasterize_into(
    graph: &SpatialGraph,
    r: f64,
    chunk: usize,
    geometry: GridGeometry,
) -> Result<OccupancyGrid> {
    let mut grid = OccupancyGrid::zeros(geometry)?;
    if graph.is_empty() {
        return Ok(grid);
    }
    let cell = (chunk as f64 * geometry.spacing).max(2.0 * r);
    let hash = SegmentHash::new(graph, r, cell);
    let [nx, ny, nz] = geometry.dims;
    let slab_len = nx * ny * chunk;

    grid.binary_mut()
        .par_chunks_mut(slab_len)
        .enumerate()
        .for_each(|(slab, out)| {
            let z0 = slab * chunk;
            let z1 = (z0 + chunk).min(nz);
            for y0 in (0..ny).step_by(chunk) {
                for x0 in (0..nx).step_by(chunk) {
                    let lo_idx = [x0, y0, z0];
                    let hi_idx = [(x0 + chunk).min(nx) - 1, (y0 + chunk).min(ny) - 1, z1 - 1];
                    paint_chunk(&hash, r, &geometry, lo_idx, hi_idx, z0, out);
                }
            }
        });
    Ok(grid)
}

fn paint_chunk(
    hash: &SegmentHash,
    r: f64,
    geometry: &GridGeometry,
    lo_idx: [usize; 3],
    hi_idx: [usize; 3],
    slab_z0: usize,
    out: &mut [u8],
) {
    let lo = geometry.voxel_center(lo_idx[0], lo_idx[1], lo_idx[2]);
    let hi = geometry.voxel_center(hi_idx[0], hi_idx[1], hi_idx[2]);
    let [nx, ny, _] = geometry.dims;
    for id in hash.candidates(lo, hi) {
        let (a, b) = hash.segments[id as usize];
        let (blo, bhi) = hash.boxes[id as usize];
        // one extra voxel either side covers rounding in the index range
        let mut range = [(0usize, 0usize); 3];
        for k in 0..3 {
            let Some((s, e)) = geometry.index_range(k, blo[k], bhi[k]) else {
                range[k] = (1, 0);
                continue;
            };
            let s = s.saturating_sub(1).max(lo_idx[k]);
            let e = (e + 1).min(geometry.dims[k] - 1).min(hi_idx[k]);
            range[k] = (s, e);
        }
        if range.iter().any(|&(s, e)| s > e) {
            continue;
        }
        for k in range[2].0..=range[2].1 {
            for j in range[1].0..=range[1].1 {
                let row = nx * (j + ny * (k - slab_z0));
                for i in range[0].0..=range[0].1 {
                    let cell = &mut out[row + i];
                    if *cell == 0 && point_segment_distance(geometry.voxel_center(i, j, k), a, b) <= r {
                        *cell = 1;
                    }
                }
            }
        }
    }
}

/// Reference rasterizer: the exact occupancy test at every voxel center.
pub fn rasterize_bruteforce(graph: &SpatialGraph, config: &FieldConfig) -> Result<OccupancyGrid> {
    config.validate()?;
    let geometry = config.geometry()?;
    let len = geometry.checked_len()?;
    if graph.is_empty() {
        return OccupancyGrid::zeros(geometry);
    }
    let values = (0..len)
        .into_par_iter()
        .map(|idx| {
            let d = graph_distance(geometry.center_of_index(idx), graph).expect("non-empty graph");
            u8::from(d <= config.pseudo_radius)
        })
        .collect();
    OccupancyGrid::new(geometry, GridValues::Binary(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_ball_matches_oracle() {
        let g = SpatialGraph::new(vec![[0.1, -0.2, 0.05]], vec![]).unwrap();
        let geo = GridGeometry::cube(32).unwrap();
        let cfg = FieldConfig::new(2.0 * geo.spacing, 32);
        let fast = rasterize(&g, &cfg).unwrap();
        assert!(fast.count_occupied() > 0);
        assert_eq!(fast, rasterize_bruteforce(&g, &cfg).unwrap());
    }

    #[test]
    fn thin_radius_between_centers_may_be_empty() {
        // segment on the plane halfway between voxel rows; r below half a voxel
        let geo = GridGeometry::cube(9).unwrap();
        let h = 0.5 * geo.spacing;
        let g = SpatialGraph::new(vec![[-0.5, h, h], [0.5, h, h]], vec![(0, 1)]).unwrap();
        let cfg = FieldConfig::new(0.4 * geo.spacing, 9);
        let grid = rasterize(&g, &cfg).unwrap();
        assert_eq!(grid.count_occupied(), 0);
        assert_eq!(grid, rasterize_bruteforce(&g, &cfg).unwrap());
    }

    #[test]
    fn config_validation() {
        let mut cfg = FieldConfig::new(0.1, 16);
        assert!(cfg.validate().is_ok());
        cfg.chunk_edge = 32;
        assert!(cfg.validate().is_err());
        assert!(FieldConfig::new(0.0, 16).validate().is_err());
    }

    #[test]
    fn uneven_chunks_cover_everything() {
        let g = SpatialGraph::new(vec![[-0.9, -0.8, -0.7], [0.9, 0.85, 0.8]], vec![(0, 1)]).unwrap();
        let cfg = FieldConfig {
            pseudo_radius: 0.1,
            grid_dims: [23, 23, 23],
            chunk_edge: 7,
        };
        assert_eq!(rasterize(&g, &cfg).unwrap(), rasterize_bruteforce(&g, &cfg).unwrap());
    }
}
