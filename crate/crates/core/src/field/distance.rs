use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::graph::SpatialGraph;

/// Distance from `p` to the closed segment `[a, b]`.
///
/// The projection parameter is clamped to `[0, 1]`; a degenerate segment
/// (`a == b`) measures the distance to `a`.
#[inline]
pub fn point_segment_distance(p: Point3, a: Point3, b: Point3) -> f64 {
    let ab = geom::sub(b, a);
    let len2 = geom::norm2(ab);
    if len2 == 0.0 {
        return geom::dist(p, a);
    }
    let t = (geom::dot(geom::sub(p, a), ab) / len2).clamp(0.0, 1.0);
    geom::dist(p, geom::add(a, geom::scale(ab, t)))
}

/// Distance from `p` to the nearest edge segment or isolated node.
pub fn graph_distance(p: Point3, graph: &SpatialGraph) -> Result<f64> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let nodes = graph.nodes();
    let mut best = f64::INFINITY;
    for &(i, j) in graph.edges() {
        best = best.min(point_segment_distance(p, nodes[i], nodes[j]));
    }
    for i in graph.isolated_nodes() {
        best = best.min(point_segment_distance(p, nodes[i], nodes[i]));
    }
    Ok(best)
}

/// 1 if `p` lies within `r` of the graph (boundary inclusive), else 0.
pub fn occupancy(p: Point3, graph: &SpatialGraph, r: f64) -> Result<u8> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("pseudo radius must be > 0, got {r}")));
    }
    Ok(u8::from(graph_distance(p, graph)? <= r))
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Point3 = [0.0, 0.0, 0.0];
    const B: Point3 = [1.0, 0.0, 0.0];

    #[test]
    fn segment_distance_cases() {
        assert!((point_segment_distance([0.5, 0.3, 0.0], A, B) - 0.3).abs() < 1e-15);
        assert_eq!(point_segment_distance([2.0, 0.0, 0.0], A, B), 1.0);
        assert_eq!(point_segment_distance([-1.0, 1.0, 0.0], A, B), 2f64.sqrt());
        assert_eq!(point_segment_distance([0.0, 3.0, 4.0], A, A), 5.0);
    }

    #[test]
    fn isolated_node_branch() {
        let g = SpatialGraph::new(vec![A], vec![]).unwrap();
        assert_eq!(graph_distance([0.0, 0.0, 0.2], &g).unwrap(), 0.2);
        assert!(graph_distance(A, &SpatialGraph::empty()).is_err());
    }

    #[test]
    fn shared_node_is_on_graph() {
        let g = SpatialGraph::new(vec![A, B, [1.0, 1.0, 0.0]], vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(graph_distance(B, &g).unwrap(), 0.0);
    }

    #[test]
    fn occupancy_boundary_and_caps() {
        let g = SpatialGraph::new(vec![A, B], vec![(0, 1)]).unwrap();
        assert_eq!(occupancy([0.5, 0.5, 0.0], &g, 0.5).unwrap(), 1);
        assert_eq!(occupancy([0.5, 0.500001, 0.0], &g, 0.5).unwrap(), 0);
        assert_eq!(occupancy([1.05, 0.0, 0.0], &g, 0.1).unwrap(), 1);
        assert!(occupancy(A, &g, 0.0).is_err());
    }
}
