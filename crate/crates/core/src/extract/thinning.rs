//! Topology-preserving 3D thinning in the style of Lee, Kashyap and Chu:
//! six directional sub-iterations, each collecting border voxels that are
//! simple, Euler-invariant and not line ends, then deleting them one by one
//! with a re-check (simple and still not a line end) against the current
//! volume.

use std::sync::OnceLock;

use crate::error::Result;
use crate::field::{GridGeometry, OccupancyGrid};
use crate::geom::Point3;

/// Thinned voxel set with the lattice it lives on.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelSkeleton {
    pub geometry: GridGeometry,
    /// Occupied voxels, sorted by linear (x-fastest) index.
    pub voxels: Vec<[usize; 3]>,
}

impl VoxelSkeleton {
    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn centers(&self) -> Vec<Point3> {
        self.voxels
            .iter()
            .map(|&[i, j, k]| self.geometry.voxel_center(i, j, k))
            .collect()
    }

    /// Skeleton as a dense 0/1 volume.
    pub fn to_mask(&self) -> Vec<u8> {
        let mut m = vec![0u8; self.geometry.len()];
        for &[i, j, k] in &self.voxels {
            m[self.geometry.index(i, j, k)] = 1;
        }
        m
    }
}

/// 3×3×3 neighborhood, indexed `(dx+1) + 3(dy+1) + 9(dz+1)`; the center is 13.
pub type Neighborhood = [bool; 27];

const CENTER: usize = 13;

#[inline]
fn nb_index(dx: i32, dy: i32, dz: i32) -> usize {
    ((dx + 1) + 3 * (dy + 1) + 9 * (dz + 1)) as usize
}

fn offset_of(idx: usize) -> [i32; 3] {
    let i = idx as i32;
    [i % 3 - 1, (i / 3) % 3 - 1, i / 9 - 1]
}

struct Tables {
    /// 26-adjacency among the 26 non-center positions.
    adj26: Vec<Vec<usize>>,
    /// 6-adjacency among the 18-neighborhood (no corners, no center).
    adj6_in18: Vec<Vec<usize>>,
    in18: [bool; 27],
    face: [usize; 6],
    /// `corner_weight8` for every 2×2×2 block configuration.
    euler_lut: [i32; 256],
    /// Per octant, neighborhood index of each of its 8 block positions.
    octants: [[usize; 8]; 8],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut in18 = [false; 27];
        let mut adj26 = vec![Vec::new(); 27];
        let mut adj6_in18 = vec![Vec::new(); 27];
        for a in 0..27 {
            let oa = offset_of(a);
            let l1: i32 = oa.iter().map(|v| v.abs()).sum();
            in18[a] = a != CENTER && l1 <= 2;
        }
        for a in 0..27 {
            for b in 0..27 {
                if a == b || a == CENTER || b == CENTER {
                    continue;
                }
                let (oa, ob) = (offset_of(a), offset_of(b));
                let d: Vec<i32> = (0..3).map(|k| (oa[k] - ob[k]).abs()).collect();
                if d.iter().all(|&v| v <= 1) {
                    adj26[a].push(b);
                }
                if in18[a] && in18[b] && d.iter().sum::<i32>() == 1 {
                    adj6_in18[a].push(b);
                }
            }
        }
        let face = [
            nb_index(-1, 0, 0),
            nb_index(1, 0, 0),
            nb_index(0, -1, 0),
            nb_index(0, 1, 0),
            nb_index(0, 0, -1),
            nb_index(0, 0, 1),
        ];

        let mut octants = [[0usize; 8]; 8];
        for (o, oct) in octants.iter_mut().enumerate() {
            let sign = [(o & 1) as i32, ((o >> 1) & 1) as i32, ((o >> 2) & 1) as i32];
            for (b, slot) in oct.iter_mut().enumerate() {
                let local = [(b & 1) as i32, ((b >> 1) & 1) as i32, ((b >> 2) & 1) as i32];
                // sign 1 covers offsets {0, 1}; sign 0 covers {-1, 0}
                let off = [0, 1, 2].map(|k| local[k] + sign[k] - 1);
                *slot = nb_index(off[0], off[1], off[2]);
            }
        }
        let mut euler_lut = [0i32; 256];
        for (cfg, slot) in euler_lut.iter_mut().enumerate() {
            *slot = corner_weight8(cfg as u8);
        }
        Tables {
            adj26,
            adj6_in18,
            in18,
            face,
            euler_lut,
            octants,
        }
    })
}

/// Eight times the Euler contribution of the lattice vertex shared by a
/// 2×2×2 block: the vertex counts 1, each of its 6 edges 1/2, each of its 12
/// faces 1/4 and each cube 1/8, for cells present in the closed-cube union.
fn corner_weight8(block: u8) -> i32 {
    let bit = |x: usize, y: usize, z: usize| block >> (x + 2 * y + 4 * z) & 1 == 1;
    if block == 0 {
        return 0;
    }
    let mut edges = 0;
    for axis in 0..3 {
        for side in 0..2 {
            let mut present = false;
            for u in 0..2 {
                for v in 0..2 {
                    let mut c = [0; 3];
                    c[axis] = side;
                    c[(axis + 1) % 3] = u;
                    c[(axis + 2) % 3] = v;
                    present |= bit(c[0], c[1], c[2]);
                }
            }
            edges += present as i32;
        }
    }
    let mut faces = 0;
    for axis in 0..3 {
        for u in 0..2 {
            for v in 0..2 {
                let mut present = false;
                for side in 0..2 {
                    let mut c = [0; 3];
                    c[axis] = side;
                    c[(axis + 1) % 3] = u;
                    c[(axis + 2) % 3] = v;
                    present |= bit(c[0], c[1], c[2]);
                }
                faces += present as i32;
            }
        }
    }
    let cubes = block.count_ones() as i32;
    8 - 4 * edges + 2 * faces - cubes
}

/// True if removing the center leaves the Euler characteristic unchanged.
fn is_euler_invariant(nb: &Neighborhood) -> bool {
    let t = tables();
    let mut delta = 0;
    for oct in &t.octants {
        let mut with = 0u8;
        for (b, &pos) in oct.iter().enumerate() {
            if nb[pos] || pos == CENTER {
                with |= 1 << b;
            }
        }
        let center_bit = oct.iter().position(|&p| p == CENTER).expect("octant holds center");
        let without = with & !(1 << center_bit);
        delta += t.euler_lut[with as usize] - t.euler_lut[without as usize];
    }
    delta == 0
}

/// Simple-point test for (26, 6) connectivity: the foreground in the punctured
/// 26-neighborhood forms exactly one 26-component, and the background in the
/// punctured 18-neighborhood has exactly one 6-component touching a face
/// neighbor of the center.
pub fn is_simple_point(nb: &Neighborhood) -> bool {
    let t = tables();

    let mut seen = [false; 27];
    let mut stack = Vec::with_capacity(26);
    let mut fg_components = 0;
    for start in 0..27 {
        if start == CENTER || !nb[start] || seen[start] {
            continue;
        }
        fg_components += 1;
        if fg_components > 1 {
            return false;
        }
        seen[start] = true;
        stack.push(start);
        while let Some(p) = stack.pop() {
            for &q in &t.adj26[p] {
                if nb[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    if fg_components != 1 {
        return false;
    }

    let mut seen = [false; 27];
    let mut bg_components = 0;
    for &start in &t.face {
        if nb[start] || seen[start] {
            continue;
        }
        bg_components += 1;
        if bg_components > 1 {
            return false;
        }
        seen[start] = true;
        stack.push(start);
        while let Some(p) = stack.pop() {
            for &q in &t.adj6_in18[p] {
                if t.in18[q] && !nb[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    bg_components == 1
}

/// Working copy of the foreground padded by one background layer on every side.
struct Volume {
    dims: [usize; 3],
    lo: [usize; 3],
    data: Vec<u8>,
    offsets: [isize; 27],
}

impl Volume {
    fn neighborhood(&self, idx: usize) -> Neighborhood {
        let mut nb = [false; 27];
        for (slot, &off) in nb.iter_mut().zip(&self.offsets) {
            *slot = self.data[(idx as isize + off) as usize] != 0;
        }
        nb
    }
}

/// Thins a binary grid to a one-voxel-wide skeleton with the same topology.
pub fn skeletonize(grid: &OccupancyGrid) -> Result<VoxelSkeleton> {
    let geometry = *grid.geometry();
    let values = grid.binary()?;
    let [nx, ny, _] = geometry.dims;

    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    let mut any = false;
    for (idx, &v) in values.iter().enumerate() {
        if v != 0 {
            any = true;
            let c = geometry.coords(idx);
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
    }
    if !any {
        return Ok(VoxelSkeleton {
            geometry,
            voxels: Vec::new(),
        });
    }

    let dims = [0, 1, 2].map(|a| hi[a] - lo[a] + 3);
    let stride = [1isize, dims[0] as isize, (dims[0] * dims[1]) as isize];
    let mut offsets = [0isize; 27];
    for (n, off) in offsets.iter_mut().enumerate() {
        let o = offset_of(n);
        *off = o[0] as isize * stride[0] + o[1] as isize * stride[1] + o[2] as isize * stride[2];
    }
    let mut vol = Volume {
        dims,
        lo,
        data: vec![0u8; dims[0] * dims[1] * dims[2]],
        offsets,
    };
    let mut foreground = Vec::new();
    for k in lo[2]..=hi[2] {
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                if values[i + nx * (j + ny * k)] != 0 {
                    let p = (i - lo[0] + 1) + dims[0] * ((j - lo[1] + 1) + dims[1] * (k - lo[2] + 1));
                    vol.data[p] = 1;
                    foreground.push(p);
                }
            }
        }
    }

    let borders = [
        nb_index(0, -1, 0),
        nb_index(0, 1, 0),
        nb_index(1, 0, 0),
        nb_index(-1, 0, 0),
        nb_index(0, 0, 1),
        nb_index(0, 0, -1),
    ];
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for &border in &borders {
            candidates.clear();
            let off = vol.offsets[border];
            for &p in &foreground {
                if vol.data[p] == 0 || vol.data[(p as isize + off) as usize] != 0 {
                    continue;
                }
                let nb = vol.neighborhood(p);
                let neighbours = nb.iter().filter(|&&b| b).count() - 1;
                if neighbours == 1 {
                    continue;
                }
                if is_euler_invariant(&nb) && is_simple_point(&nb) {
                    candidates.push(p);
                }
            }
            // line ends created earlier in this pass are kept too, otherwise a
            // two-voxel-thick bar collapses end by end into a single voxel
            for &p in &candidates {
                let nb = vol.neighborhood(p);
                if nb.iter().filter(|&&b| b).count() > 2 && is_simple_point(&nb) {
                    vol.data[p] = 0;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        foreground.retain(|&p| vol.data[p] != 0);
    }

    let [px, py, _] = vol.dims;
    let voxels = foreground
        .into_iter()
        .filter(|&p| vol.data[p] != 0)
        .map(|p| {
            let (i, j, k) = (p % px, (p / px) % py, p / (px * py));
            [i - 1 + vol.lo[0], j - 1 + vol.lo[1], k - 1 + vol.lo[2]]
        })
        .collect();
    Ok(VoxelSkeleton { geometry, voxels })
}
