//! Homology of a binary volume under (26, 6) connectivity.
//!
//! The foreground is taken as the union of closed unit cubes centered on its
//! voxels, which is exactly 26-connected with a 6-connected complement. Betti
//! numbers come from global counting: `beta0` by union-find over 26-adjacency,
//! `beta2` as background 6-components enclosed by the foreground, the Euler
//! characteristic by counting the vertices, edges, faces and cubes of the
//! cubical complex, and `beta1 = beta0 + beta2 - chi`.

use crate::union_find::DisjointSet;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VoxelTopology {
    pub beta0: usize,
    pub beta1: usize,
    pub beta2: usize,
    pub euler: i64,
}

/// Foreground voxels inside a bounding box padded by one background layer.
struct Padded {
    dims: [usize; 3],
    fg: Vec<bool>,
}

impl Padded {
    fn new(dims: [usize; 3], values: &[u8]) -> Option<Self> {
        let [nx, ny, _] = dims;
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        for (idx, &v) in values.iter().enumerate() {
            if v != 0 {
                any = true;
                let c = [idx % nx, (idx / nx) % ny, idx / (nx * ny)];
                for a in 0..3 {
                    lo[a] = lo[a].min(c[a]);
                    hi[a] = hi[a].max(c[a]);
                }
            }
        }
        if !any {
            return None;
        }
        let pdims = [0, 1, 2].map(|a| hi[a] - lo[a] + 3);
        let mut fg = vec![false; pdims[0] * pdims[1] * pdims[2]];
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    if values[i + nx * (j + ny * k)] != 0 {
                        let p = (i - lo[0] + 1) + pdims[0] * ((j - lo[1] + 1) + pdims[1] * (k - lo[2] + 1));
                        fg[p] = true;
                    }
                }
            }
        }
        Some(Self { dims: pdims, fg })
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// Foreground test that treats out-of-range (including negative) coordinates as background.
    #[inline]
    fn at(&self, i: isize, j: isize, k: isize) -> bool {
        let [nx, ny, nz] = self.dims.map(|d| d as isize);
        if i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz {
            return false;
        }
        self.fg[self.idx(i as usize, j as usize, k as usize)]
    }
}

/// Betti numbers and Euler characteristic of a binary volume.
pub fn voxel_topology(dims: [usize; 3], values: &[u8]) -> VoxelTopology {
    assert_eq!(values.len(), dims[0] * dims[1] * dims[2], "value count must match dims");
    let Some(vol) = Padded::new(dims, values) else {
        return VoxelTopology::default();
    };
    let [nx, ny, nz] = vol.dims;
    let n = vol.fg.len();

    let mut fg_sets = DisjointSet::new(n);
    let mut bg_sets = DisjointSet::new(n);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let here = vol.idx(i, j, k);
                if vol.fg[here] {
                    for dk in -1isize..=1 {
                        for dj in -1isize..=1 {
                            for di in -1isize..=1 {
                                let (a, b, c) = (i as isize + di, j as isize + dj, k as isize + dk);
                                if (di, dj, dk) != (0, 0, 0) && vol.at(a, b, c) {
                                    fg_sets.union(here, vol.idx(a as usize, b as usize, c as usize));
                                }
                            }
                        }
                    }
                } else {
                    for (di, dj, dk) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
                        let (a, b, c) = (i + di, j + dj, k + dk);
                        if a < nx && b < ny && c < nz && !vol.fg[vol.idx(a, b, c)] {
                            bg_sets.union(here, vol.idx(a, b, c));
                        }
                    }
                }
            }
        }
    }
    let fg_count = vol.fg.iter().filter(|&&f| f).count();
    let bg_count = n - fg_count;
    // each foreground voxel is a singleton in bg_sets and vice versa
    let beta0 = fg_sets.set_count() - bg_count;
    let bg_components = bg_sets.set_count() - fg_count;
    // the padding shell is one connected background component
    let beta2 = bg_components - 1;

    let euler = euler_by_cell_count(&vol);
    let beta1 = (beta0 as i64 + beta2 as i64 - euler) as usize;
    VoxelTopology {
        beta0,
        beta1,
        beta2,
        euler,
    }
}

/// `V - E + F - C` of the union of closed voxel cubes, counting each lattice
/// cell once.
fn euler_by_cell_count(vol: &Padded) -> i64 {
    let [nx, ny, nz] = vol.dims.map(|d| d as isize);
    let any = |cells: &[(isize, isize, isize)]| cells.iter().any(|&(i, j, k)| vol.at(i, j, k));
    let (mut v, mut e, mut f, mut c) = (0i64, 0i64, 0i64, 0i64);
    // corner (a, b, c) sits between voxels a-1..a, b-1..b, c-1..c
    for a in 0..=nx {
        for b in 0..=ny {
            for cc in 0..=nz {
                if vol.at(a, b, cc) {
                    c += 1;
                }
                let mut block = [(0, 0, 0); 8];
                let mut t = 0;
                for dk in [-1, 0] {
                    for dj in [-1, 0] {
                        for di in [-1, 0] {
                            block[t] = (a + di, b + dj, cc + dk);
                            t += 1;
                        }
                    }
                }
                if any(&block) {
                    v += 1;
                }
                // edges leaving this corner in +x, +y, +z
                if any(&[(a, b - 1, cc - 1), (a, b, cc - 1), (a, b - 1, cc), (a, b, cc)]) {
                    e += 1;
                }
                if any(&[(a - 1, b, cc - 1), (a, b, cc - 1), (a - 1, b, cc), (a, b, cc)]) {
                    e += 1;
                }
                if any(&[(a - 1, b - 1, cc), (a, b - 1, cc), (a - 1, b, cc), (a, b, cc)]) {
                    e += 1;
                }
                // faces with this corner as their minimum: normal x, y, z
                if any(&[(a - 1, b, cc), (a, b, cc)]) {
                    f += 1;
                }
                if any(&[(a, b - 1, cc), (a, b, cc)]) {
                    f += 1;
                }
                if any(&[(a, b, cc - 1), (a, b, cc)]) {
                    f += 1;
                }
            }
        }
    }
    v - e + f - c
}
