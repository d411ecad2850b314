use vesseltok_core::extract::{extract_graph, skeleton_to_graph, skeletonize, threshold_grid, VoxelSkeleton};
use vesseltok_core::field::{rasterize, FieldConfig, GridGeometry, GridValues, OccupancyGrid};
use vesseltok_core::synth::{synth_graph, SynthSpec};
use vesseltok_core::topology::voxel_topology;
use vesseltok_core::{betti_numbers, BettiPair};

fn mask(n: usize, on: impl Fn(usize, usize, usize) -> bool) -> OccupancyGrid {
    let g = GridGeometry::cube(n).unwrap();
    let mut v = vec![0u8; g.len()];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                v[g.index(i, j, k)] = u8::from(on(i, j, k));
            }
        }
    }
    OccupancyGrid::new(g, GridValues::Binary(v)).unwrap()
}

#[test]
fn threshold_examples() {
    let g = GridGeometry::new([3, 1, 1], [0.0; 3], 1.0).unwrap();
    let p = OccupancyGrid::new(g, GridValues::Probability(vec![0.4, 0.6, 0.5])).unwrap();
    assert_eq!(threshold_grid(&p, 0.5).unwrap().binary().unwrap(), &[0, 1, 1]);
    assert!(threshold_grid(&p, 1.0).is_err());
    assert!(threshold_grid(&p, 0.0).is_err());
}

#[test]
fn rasterized_ring_thins_to_one_cycle() {
    let ring = synth_graph(&SynthSpec::Loop { nodes: 32 }, 0.0, 0).unwrap();
    let n = 48;
    let spacing = 2.0 / (n as f64 - 1.0);
    let grid = rasterize(&ring, &FieldConfig::new(4.0 * spacing, n)).unwrap();
    let skel = skeletonize(&grid).unwrap();
    let t = voxel_topology(grid.dims(), &skel.to_mask());
    assert_eq!((t.beta0, t.beta1), (1, 1));
    let g = skeleton_to_graph(&skel);
    assert_eq!(betti_numbers(&g), BettiPair::new(1, 1));
}

#[test]
fn skeleton_is_subset_of_input() {
    let grid = mask(20, |i, j, k| (3..17).contains(&i) && (4..9).contains(&j) && (5..12).contains(&k));
    let skel = skeletonize(&grid).unwrap();
    let input = grid.binary().unwrap();
    for &[i, j, k] in &skel.voxels {
        assert_eq!(input[grid.geometry().index(i, j, k)], 1);
    }
}

#[test]
fn empty_grid_gives_empty_graph() {
    let grid = mask(8, |_, _, _| false);
    assert!(extract_graph(&grid, 0.5, 0).unwrap().is_empty());
    let s: VoxelSkeleton = skeletonize(&grid).unwrap();
    assert!(s.is_empty());
}

fn round_trip_betti(spec: SynthSpec, seed: u64) {
    let g = synth_graph(&spec, 0.02, seed).unwrap();
    let grid = rasterize(&g, &FieldConfig::new(0.016, 128)).unwrap();
    let back = extract_graph(&grid, 0.5, 0).unwrap();
    assert_eq!(betti_numbers(&back), betti_numbers(&g), "{spec:?} seed {seed}");
}

#[test]
fn tree_round_trip_preserves_betti() {
    round_trip_betti(SynthSpec::Tree { depth: 4, branching: 2 }, 1);
    round_trip_betti(SynthSpec::Tree { depth: 2, branching: 3 }, 2);
}

#[test]
fn loop_and_lattice_round_trip_preserves_betti() {
    round_trip_betti(SynthSpec::Loop { nodes: 20 }, 3);
    round_trip_betti(SynthSpec::Grid { nx: 3, ny: 3 }, 4);
}
