use std::collections::HashMap;

use super::thinning::VoxelSkeleton;
use crate::graph::SpatialGraph;

type Voxel = [i64; 3];

/// Total order on candidate edges: squared step length, then the endpoints
/// in lexicographic voxel order.
type EdgeKey = (i64, Voxel, Voxel);

fn edge_key(u: Voxel, v: Voxel) -> EdgeKey {
    let len2 = (0..3).map(|a| (u[a] - v[a]).pow(2)).sum();
    (len2, u.min(v), u.max(v))
}

/// Connects skeleton voxels into a graph.
///
/// Nodes are voxel centers in lexicographic `(i, j, k)` order. Every pair of
/// 26-adjacent voxels is a candidate edge; a candidate `(u, v)` is dropped
/// when some 2×2×2 block containing both also links them through a path of
/// candidates that all rank strictly below `(u, v)` (shorter step, ties by
/// voxel order). A face-diagonal closing a right-angle turn is the typical
/// casualty. Dropped edges always have such a detour, so connectivity is
/// unchanged, while the small cycles that voxel clusters create inside a
/// block are removed.
pub fn skeleton_to_graph(skeleton: &VoxelSkeleton) -> SpatialGraph {
    let mut voxels: Vec<Voxel> = skeleton
        .voxels
        .iter()
        .map(|v| v.map(|c| c as i64))
        .collect();
    voxels.sort_unstable();
    voxels.dedup();
    let ids: HashMap<Voxel, usize> = voxels.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let present = |v: &Voxel| ids.contains_key(v);

    let mut edges = Vec::new();
    for &u in &voxels {
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let v = [u[0] + dx, u[1] + dy, u[2] + dz];
                    if v <= u || !present(&v) {
                        continue;
                    }
                    if !has_cheaper_detour(u, v, &present) {
                        edges.push((ids[&u], ids[&v]));
                    }
                }
            }
        }
    }
    let nodes = voxels
        .iter()
        .map(|&[i, j, k]| skeleton.geometry.voxel_center(i as usize, j as usize, k as usize))
        .collect();
    SpatialGraph::new(nodes, edges).expect("skeleton edges are valid")
}

fn has_cheaper_detour(u: Voxel, v: Voxel, present: &impl Fn(&Voxel) -> bool) -> bool {
    let key = edge_key(u, v);
    let lo = [0, 1, 2].map(|a| u[a].max(v[a]) - 1);
    let hi = [0, 1, 2].map(|a| u[a].min(v[a]));
    for bz in lo[2]..=hi[2] {
        for by in lo[1]..=hi[1] {
            for bx in lo[0]..=hi[0] {
                let mut block: Vec<Voxel> = Vec::with_capacity(8);
                for c in 0..8i64 {
                    let w = [bx + (c & 1), by + ((c >> 1) & 1), bz + ((c >> 2) & 1)];
                    if present(&w) {
                        block.push(w);
                    }
                }
                if block.len() > 2 && connected_below(&block, u, v, key) {
                    return true;
                }
            }
        }
    }
    false
}

/// Whether `u` reaches `v` inside `block` using only pairs ranked below `key`.
/// All voxels in a 2×2×2 block are mutually 26-adjacent.
fn connected_below(block: &[Voxel], u: Voxel, v: Voxel, key: EdgeKey) -> bool {
    let mut reached = vec![false; block.len()];
    let start = block.iter().position(|&w| w == u).expect("u in block");
    reached[start] = true;
    let mut stack = vec![start];
    while let Some(a) = stack.pop() {
        for b in 0..block.len() {
            if !reached[b] && edge_key(block[a], block[b]) < key {
                if block[b] == v {
                    return true;
                }
                reached[b] = true;
                stack.push(b);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridGeometry;
    use crate::graph::{betti_numbers, BettiPair};

    fn skel(voxels: &[[usize; 3]]) -> VoxelSkeleton {
        VoxelSkeleton {
            geometry: GridGeometry::new([16, 16, 16], [0.0; 3], 1.0).unwrap(),
            voxels: voxels.to_vec(),
        }
    }

    #[test]
    fn collinear_voxels_form_a_path() {
        let g = skeleton_to_graph(&skel(&[[1, 1, 1], [2, 1, 1], [3, 1, 1]]));
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn l_turn_drops_the_diagonal() {
        let g = skeleton_to_graph(&skel(&[[1, 1, 1], [2, 1, 1], [2, 2, 1]]));
        // brute force: the only triangle is (1,1,1)-(2,1,1)-(2,2,1); its face
        // diagonal (squared length 2) has a detour of two unit steps
        assert_eq!(g.edge_count(), 2);
        let lens: Vec<f64> = (0..2)
            .map(|e| {
                let (a, b) = g.segment(e);
                crate::geom::dist(a, b)
            })
            .collect();
        assert_eq!(lens, vec![1.0, 1.0]);
    }

    #[test]
    fn equilateral_triangle_tie_is_broken() {
        // three mutual face diagonals (all squared length 2)
        let g = skeleton_to_graph(&skel(&[[2, 1, 1], [1, 2, 1], [1, 1, 2]]));
        assert_eq!(betti_numbers(&g), BettiPair::new(1, 0));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn twelve_voxel_ring_has_one_cycle() {
        let ring: Vec<[usize; 3]> = vec![
            [3, 1, 5], [4, 1, 5], [5, 2, 5], [5, 3, 5], [5, 4, 5], [4, 5, 5],
            [3, 5, 5], [2, 5, 5], [1, 4, 5], [1, 3, 5], [1, 2, 5], [2, 1, 5],
        ];
        let g = skeleton_to_graph(&skel(&ring));
        assert_eq!(g.node_count(), 12);
        assert_eq!(betti_numbers(&g), BettiPair::new(1, 1));
    }

    #[test]
    fn filled_block_collapses_to_a_tree() {
        let mut vox = Vec::new();
        for c in 0..8usize {
            vox.push([3 + (c & 1), 3 + ((c >> 1) & 1), 3 + ((c >> 2) & 1)]);
        }
        let g = skeleton_to_graph(&skel(&vox));
        assert_eq!(betti_numbers(&g), BettiPair::new(1, 0));
    }

    #[test]
    fn enumeration_order_does_not_matter() {
        let vox = vec![[1, 1, 1], [2, 1, 1], [2, 2, 1], [3, 3, 2], [1, 2, 2], [2, 2, 2]];
        let mut rev = vox.clone();
        rev.reverse();
        assert_eq!(skeleton_to_graph(&skel(&vox)), skeleton_to_graph(&skel(&rev)));
    }
}
