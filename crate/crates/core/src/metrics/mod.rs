//! Reconstruction metrics: clDice on thinned occupancy fields, Chamfer
//! distance on occupied voxel centers, and graph Betti errors.

mod kdtree;
mod report;

pub use kdtree::KdTree;
pub use report::{append_reports_csv, read_reports_csv, write_reports_csv, MetricsReport, ReportRow};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extract::{skeletonize, DEFAULT_TAU};
use crate::field::{rasterize, FieldConfig, OccupancyGrid, DEFAULT_PSEUDO_RADIUS, DESK_GRID};
use crate::geom::{self, Point3};
use crate::graph::{betti_numbers, SpatialGraph};

/// Stabilizer added to both sides of the clDice ratios.
pub const CLDICE_EPSILON: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsConfig {
    pub epsilon: f64,
    pub pseudo_radius: f64,
    pub grid_dims: [usize; 3],
    pub tau: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            epsilon: CLDICE_EPSILON,
            pseudo_radius: DEFAULT_PSEUDO_RADIUS,
            grid_dims: [DESK_GRID; 3],
            tau: DEFAULT_TAU,
        }
    }
}

impl MetricsConfig {
    pub fn field_config(&self) -> FieldConfig {
        FieldConfig {
            pseudo_radius: self.pseudo_radius,
            grid_dims: self.grid_dims,
            chunk_edge: crate::field::DEFAULT_CHUNK.min(*self.grid_dims.iter().min().unwrap_or(&1)),
        }
    }
}

/// clDice with its two component ratios.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClDice {
    pub cldice: f64,
    pub topo_precision: f64,
    pub topo_sensitivity: f64,
}

/// Harmonic mean of topology precision and sensitivity.
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// clDice between a predicted and a reference binary grid. Precision counts the
/// predicted skeleton inside the reference mask, sensitivity the reference
/// skeleton inside the predicted mask.
pub fn cldice(pred: &OccupancyGrid, gt: &OccupancyGrid, epsilon: f64) -> Result<ClDice> {
    pred.check_same_geometry(gt)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("clDice epsilon must be > 0, got {epsilon}")));
    }
    let (pred_mask, gt_mask) = (pred.binary()?, gt.binary()?);
    let (pred_skel, gt_skel) = rayon::join(|| skeletonize(pred), || skeletonize(gt));
    let (pred_skel, gt_skel) = (pred_skel?, gt_skel?);
    let geometry = pred.geometry();

    let inside = |voxels: &[[usize; 3]], mask: &[u8]| {
        voxels
            .iter()
            .filter(|&&[i, j, k]| mask[geometry.index(i, j, k)] != 0)
            .count() as f64
    };
    let topo_precision =
        (inside(&pred_skel.voxels, gt_mask) + epsilon) / (pred_skel.len() as f64 + epsilon);
    let topo_sensitivity =
        (inside(&gt_skel.voxels, pred_mask) + epsilon) / (gt_skel.len() as f64 + epsilon);
    Ok(ClDice {
        cldice: harmonic_mean(topo_precision, topo_sensitivity),
        topo_precision,
        topo_sensitivity,
    })
}

/// Symmetric mean nearest-neighbor distance:
/// `½ (mean_a min_b |a-b| + mean_b min_a |a-b|)`.
pub fn chamfer(a: &[Point3], b: &[Point3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("chamfer distance needs non-empty point sets".into()));
    }
    let one_way = |from: &[Point3], to: &[Point3]| {
        let tree = KdTree::new(to);
        let total: f64 = from.par_iter().map(|&p| tree.nearest_distance(p)).sum();
        total / from.len() as f64
    };
    let (ab, ba) = rayon::join(|| one_way(a, b), || one_way(b, a));
    Ok(0.5 * (ab + ba))
}

/// Reference Chamfer distance by exhaustive search.
pub fn chamfer_bruteforce(a: &[Point3], b: &[Point3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("chamfer distance needs non-empty point sets".into()));
    }
    let one_way = |from: &[Point3], to: &[Point3]| {
        from.iter()
            .map(|&p| to.iter().map(|&q| geom::dist(p, q)).fold(f64::INFINITY, f64::min))
            .sum::<f64>()
            / from.len() as f64
    };
    Ok(0.5 * (one_way(a, b) + one_way(b, a)))
}

/// `(|Δβ0|, |Δβ1|)` between two graphs.
pub fn betti_error(pred: &SpatialGraph, gt: &SpatialGraph) -> (usize, usize) {
    let (p, g) = (betti_numbers(pred), betti_numbers(gt));
    (p.beta0.abs_diff(g.beta0), p.beta1.abs_diff(g.beta1))
}

/// Rasterizes both graphs at the configured radius and grid, then reports
/// clDice and Chamfer on the fields and Betti errors on the graphs.
///
/// Chamfer is infinite when either field has no occupied voxel.
pub fn evaluate(
    pred: &SpatialGraph,
    gt: &SpatialGraph,
    config: &MetricsConfig,
) -> Result<MetricsReport> {
    let field = config.field_config();
    let (pred_grid, gt_grid) = rayon::join(|| rasterize(pred, &field), || rasterize(gt, &field));
    evaluate_fields(&pred_grid?, &gt_grid?, pred, gt, config)
}

/// Like [`evaluate`] but with the predicted field given directly.
pub fn evaluate_fields(
    pred_grid: &OccupancyGrid,
    gt_grid: &OccupancyGrid,
    pred: &SpatialGraph,
    gt: &SpatialGraph,
    config: &MetricsConfig,
) -> Result<MetricsReport> {
    let cl = cldice(pred_grid, gt_grid, config.epsilon)?;
    let (pa, pb) = (pred_grid.occupied_centers()?, gt_grid.occupied_centers()?);
    let chamfer = if pa.is_empty() || pb.is_empty() {
        f64::INFINITY
    } else {
        chamfer(&pa, &pb)?
    };
    let (d0, d1) = betti_error(pred, gt);
    Ok(MetricsReport {
        case: String::new(),
        cldice: cl.cldice,
        topo_precision: cl.topo_precision,
        topo_sensitivity: cl.topo_sensitivity,
        chamfer,
        delta_beta0: d0,
        delta_beta1: d1,
        kappa: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GridGeometry, GridValues};

    fn line_grid(n: usize, rows: &[(usize, usize)], x: std::ops::Range<usize>) -> OccupancyGrid {
        let g = GridGeometry::new([n, n, n], [0.0; 3], 1.0).unwrap();
        let mut v = vec![0u8; g.len()];
        for &(j, k) in rows {
            for i in x.clone() {
                v[g.index(i, j, k)] = 1;
            }
        }
        OccupancyGrid::new(g, GridValues::Binary(v)).unwrap()
    }

    #[test]
    fn identical_masks_score_one() {
        let a = line_grid(14, &[(5, 5)], 2..12);
        let c = cldice(&a, &a, CLDICE_EPSILON).unwrap();
        assert_eq!(c.cldice, 1.0);
    }

    #[test]
    fn disjoint_masks_score_near_zero() {
        let a = line_grid(14, &[(2, 2)], 2..12);
        let b = line_grid(14, &[(9, 9)], 2..12);
        let c = cldice(&a, &b, CLDICE_EPSILON).unwrap();
        assert!(c.cldice < 1e-8);
    }

    #[test]
    fn dilated_prediction_hand_count() {
        // ground truth: 10-voxel line; prediction: the same line thickened to a
        // 3x3 cross-section, whose skeleton is a 10-voxel line on the middle row
        // lying inside the truth, so both ratios are 1
        let gt = line_grid(14, &[(5, 5)], 2..12);
        let mut rows = Vec::new();
        for j in 4..=6 {
            for k in 4..=6 {
                rows.push((j, k));
            }
        }
        let pred = line_grid(14, &rows, 2..12);
        let c = cldice(&pred, &gt, CLDICE_EPSILON).unwrap();
        assert_eq!(c.topo_sensitivity, 1.0);
        let skel = skeletonize(&pred).unwrap();
        let inside = skel.voxels.iter().filter(|v| v[1] == 5 && v[2] == 5).count() as f64;
        let expected = (inside + CLDICE_EPSILON) / (skel.len() as f64 + CLDICE_EPSILON);
        assert_eq!(c.topo_precision, expected);
        assert_eq!(c.cldice, harmonic_mean(expected, 1.0));
    }

    #[test]
    fn chamfer_examples() {
        assert_eq!(chamfer(&[[0.0; 3]], &[[1.0, 0.0, 0.0]]).unwrap(), 1.0);
        let pts = vec![[0.0, 1.0, 2.0], [3.0, -1.0, 0.5]];
        assert_eq!(chamfer(&pts, &pts).unwrap(), 0.0);
        assert!(chamfer(&[], &pts).is_err());
    }

    #[test]
    fn cldice_rejects_mismatched_grids() {
        let a = line_grid(14, &[(5, 5)], 2..12);
        let b = line_grid(12, &[(5, 5)], 2..10);
        assert!(cldice(&a, &b, CLDICE_EPSILON).is_err());
    }
}
