//! Inference-side graph recovery: threshold a decoded field, thin it to a
//! one-voxel skeleton, connect skeleton voxels and drop dust components.

mod skeleton_graph;
mod thinning;

pub use skeleton_graph::skeleton_to_graph;
pub use thinning::{is_simple_point, skeletonize, Neighborhood, VoxelSkeleton};

use crate::error::{Error, Result};
use crate::field::{GridValues, OccupancyGrid};
use crate::graph::SpatialGraph;

/// Default occupancy threshold.
pub const DEFAULT_TAU: f64 = 0.5;
/// Minimum component size for the chunked-inference cleanup.
pub const CHUNKED_MIN_COMPONENT: usize = 100;

/// Binary grid with 1 wherever the value is `>= tau`.
pub fn threshold_grid(grid: &OccupancyGrid, tau: f64) -> Result<OccupancyGrid> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {tau} outside (0, 1)")));
    }
    let values = match grid.values() {
        GridValues::Binary(v) => v.iter().map(|&x| u8::from(x as f64 >= tau)).collect(),
        GridValues::Probability(v) => v.iter().map(|&x| u8::from(x as f64 >= tau)).collect(),
    };
    OccupancyGrid::new(*grid.geometry(), GridValues::Binary(values))
}

/// Drops connected components with fewer than `min_nodes` nodes, reindexing
/// the survivors in their original order.
pub fn prune_components(graph: &SpatialGraph, min_nodes: usize) -> SpatialGraph {
    if min_nodes == 0 {
        return graph.clone();
    }
    let labels = graph.component_labels();
    let mut sizes = vec![0usize; labels.iter().max().map_or(0, |m| m + 1)];
    for &l in &labels {
        sizes[l] += 1;
    }
    let keep: Vec<bool> = labels.iter().map(|&l| sizes[l] >= min_nodes).collect();
    graph.retain_nodes(&keep)
}

/// Threshold, skeletonize, connect and prune, in that order.
pub fn extract_graph(grid: &OccupancyGrid, tau: f64, min_component: usize) -> Result<SpatialGraph> {
    let binary = threshold_grid(grid, tau)?;
    let skeleton = skeletonize(&binary)?;
    let graph = skeleton_to_graph(&skeleton);
    Ok(prune_components(&graph, min_component))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridGeometry;
    use crate::graph::betti_numbers;

    fn prob_grid(values: Vec<f32>) -> OccupancyGrid {
        let n = values.len();
        let g = GridGeometry::new([n, 1, 1], [0.0; 3], 1.0).unwrap();
        OccupancyGrid::new(g, GridValues::Probability(values)).unwrap()
    }

    #[test]
    fn threshold_is_inclusive() {
        let t = threshold_grid(&prob_grid(vec![0.4, 0.6, 0.5]), 0.5).unwrap();
        assert_eq!(t.binary().unwrap(), &[0, 1, 1]);
        let t = threshold_grid(&prob_grid(vec![0.1, 0.2]), 0.5).unwrap();
        assert_eq!(t.count_occupied(), 0);
        assert!(threshold_grid(&prob_grid(vec![0.1]), 1.0).is_err());
        assert!(threshold_grid(&prob_grid(vec![0.1]), 0.0).is_err());
    }

    #[test]
    fn prune_by_component_size() {
        let path = |n: usize, x: f64| {
            let nodes = (0..n).map(|i| [x, i as f64, 0.0]).collect();
            SpatialGraph::new(nodes, (1..n).map(|i| (i - 1, i)).collect()).unwrap()
        };
        let g = path(150, 0.0).union(&path(50, 5.0));
        let pruned = prune_components(&g, 100);
        assert_eq!(pruned.node_count(), 150);
        assert_eq!(betti_numbers(&pruned).beta0, 1);
        assert_eq!(prune_components(&g, 0), g);
        assert!(prune_components(&g, 1000).is_empty());
    }

    #[test]
    fn empty_grid_gives_empty_graph() {
        let g = GridGeometry::cube(8).unwrap();
        let grid = OccupancyGrid::zeros(g).unwrap();
        assert!(extract_graph(&grid, DEFAULT_TAU, 0).unwrap().is_empty());
    }
}
