//! Farthest point sampling.

use crate::error::{Error, Result};
use crate::geom::{self, Point3};

/// Greedy farthest point sampling.
///
/// Starts at the point farthest from the centroid, then repeatedly takes the
/// point whose distance to the selected set is largest. Ties always go to the
/// lowest index, so the result is fully determined by the input order.
pub fn farthest_point_sampling(points: &[Point3], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "FPS needs 1 <= k <= {} points, got k = {k}",
            points.len()
        )));
    }
    let c = geom::centroid(points);
    let start = argmax_first(points.iter().map(|&p| geom::dist2(p, c)));

    let mut selected = Vec::with_capacity(k);
    let mut taken = vec![false; points.len()];
    let mut min_d2 = vec![f64::INFINITY; points.len()];
    let mut current = start;
    loop {
        selected.push(current);
        taken[current] = true;
        if selected.len() == k {
            break;
        }
        let anchor = points[current];
        for (d, &p) in min_d2.iter_mut().zip(points) {
            *d = d.min(geom::dist2(p, anchor));
        }
        current = argmax_first(
            min_d2
                .iter()
                .zip(&taken)
                .map(|(&d, &t)| if t { f64::NEG_INFINITY } else { d }),
        );
    }
    Ok(selected)
}

/// Index of the first maximum.
fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}
