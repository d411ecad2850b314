use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vesseltok_core::field::{
    graph_distance, occupancy, point_segment_distance, rasterize, rasterize_bruteforce, sample_queries,
    FieldConfig, SamplingConfig,
};
use vesseltok_core::geom::{self, random_rotation, rotate};
use vesseltok_core::SpatialGraph;

fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> SpatialGraph {
    let n = rng.random_range(1..=max_nodes);
    let nodes: Vec<[f64; 3]> = (0..n)
        .map(|_| [0, 1, 2].map(|_| rng.random_range(-1.0..1.0)))
        .collect();
    let mut edges = Vec::new();
    for i in 1..n {
        if rng.random::<f64>() < 0.85 {
            edges.push((rng.random_range(0..i), i));
        }
    }
    SpatialGraph::new(nodes, edges).unwrap()
}

#[test]
fn graph_distance_matches_exhaustive_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = random_graph(&mut rng, 10);
    let degrees = g.degrees();
    for _ in 0..100 {
        let p = [0, 1, 2].map(|_| rng.random_range(-1.2..1.2));
        let mut best = f64::INFINITY;
        for e in 0..g.edge_count() {
            let (a, b) = g.segment(e);
            best = best.min(point_segment_distance(p, a, b));
        }
        for (i, &d) in degrees.iter().enumerate() {
            if d == 0 {
                best = best.min(geom::dist(p, g.nodes()[i]));
            }
        }
        assert_eq!(graph_distance(p, &g).unwrap(), best);
    }
}

#[test]
fn occupancy_boundary_examples() {
    let g = SpatialGraph::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![(0, 1)]).unwrap();
    assert_eq!(occupancy([0.5, 0.5, 0.0], &g, 0.5).unwrap(), 1);
    assert_eq!(occupancy([0.5, 0.500001, 0.0], &g, 0.5).unwrap(), 0);
    assert_eq!(occupancy([1.05, 0.0, 0.0], &g, 0.1).unwrap(), 1);
}

#[test]
fn fifty_node_graph_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let nodes: Vec<[f64; 3]> = (0..50).map(|_| [0, 1, 2].map(|_| rng.random_range(-0.9..0.9))).collect();
    let edges = (1..50).map(|i| (i - 1, i)).collect();
    let g = SpatialGraph::new(nodes, edges).unwrap();
    let cfg = FieldConfig::new(0.05, 32);
    let fast = rasterize(&g, &cfg).unwrap();
    assert!(fast.count_occupied() > 0);
    assert_eq!(fast, rasterize_bruteforce(&g, &cfg).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rasterize_equals_oracle(seed in any::<u64>(), r in 0.01f64..0.2, n in 4usize..33, chunk in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 50);
        let cfg = FieldConfig { pseudo_radius: r, grid_dims: [n; 3], chunk_edge: chunk.min(n) };
        prop_assert_eq!(rasterize(&g, &cfg).unwrap(), rasterize_bruteforce(&g, &cfg).unwrap());
    }

    #[test]
    fn occupancy_is_monotone_in_radius(seed in any::<u64>(), r1 in 0.01f64..0.15, dr in 0.0f64..0.1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 20);
        let small = rasterize(&g, &FieldConfig::new(r1, 24)).unwrap();
        let large = rasterize(&g, &FieldConfig::new(r1 + dr, 24)).unwrap();
        for (a, b) in small.binary().unwrap().iter().zip(large.binary().unwrap()) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn occupancy_is_rigid_motion_equivariant(seed in any::<u64>(), r in 0.02f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 15);
        let rot = random_rotation([rng.random(), rng.random(), rng.random()]);
        let t = [0, 1, 2].map(|_| rng.random_range(-2.0..2.0));
        let moved = g.map_nodes(|p| geom::add(rotate(&rot, p), t)).unwrap();
        for _ in 0..200 {
            let p = [0, 1, 2].map(|_| rng.random_range(-1.2..1.2));
            let d = graph_distance(p, &g).unwrap();
            if (d - r).abs() < 1e-9 {
                continue;
            }
            let q = geom::add(rotate(&rot, p), t);
            prop_assert_eq!(occupancy(p, &g, r).unwrap(), occupancy(q, &moved, r).unwrap());
        }
    }

    #[test]
    fn sampled_labels_equal_oracle(seed in any::<u64>(), near in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 20);
        let cfg = SamplingConfig { count: 300, near_fraction: near, ..Default::default() };
        let q = sample_queries(&g, 0.03, &cfg, seed).unwrap();
        prop_assert_eq!(q.len(), 300);
        for (p, &l) in q.points.iter().zip(&q.labels) {
            prop_assert_eq!(l, occupancy(*p, &g, 0.03).unwrap());
        }
    }
}
