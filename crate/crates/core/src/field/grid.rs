use crate::error::{Error, Result};
use crate::geom::Point3;

/// Placement of a regular voxel lattice: voxel `(i, j, k)` is centered at
/// `origin + spacing * (i, j, k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridGeometry {
    pub dims: [usize; 3],
    pub origin: Point3,
    pub spacing: f64,
}

impl GridGeometry {
    pub fn new(dims: [usize; 3], origin: Point3, spacing: f64) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!("grid dims must be positive, got {dims:?}")));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidArgument(format!("grid spacing must be > 0, got {spacing}")));
        }
        if !origin.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("grid origin must be finite".into()));
        }
        let geometry = Self {
            dims,
            origin,
            spacing,
        };
        geometry.checked_len()?;
        Ok(geometry)
    }

    /// Lattice whose voxel centers span `[-1, 1]` along the longest axis, with
    /// the shorter axes centered on the origin.
    pub fn unit_cube(dims: [usize; 3]) -> Result<Self> {
        let longest = *dims.iter().max().unwrap_or(&0);
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidArgument(format!("grid dims must be >= 2, got {dims:?}")));
        }
        let spacing = 2.0 / (longest - 1) as f64;
        let origin = dims.map(|d| -0.5 * (d - 1) as f64 * spacing);
        Self::new(dims, origin, spacing)
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::unit_cube([n; 3])
    }

    /// Voxel count, or a capacity error if it does not fit in memory addressing.
    pub fn checked_len(&self) -> Result<usize> {
        let [nx, ny, nz] = self.dims;
        nx.checked_mul(ny)
            .and_then(|v| v.checked_mul(nz))
            .filter(|&v| v <= isize::MAX as usize / 4)
            .ok_or(Error::Capacity { dims: self.dims })
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> Point3 {
        [
            self.origin[0] + self.spacing * i as f64,
            self.origin[1] + self.spacing * j as f64,
            self.origin[2] + self.spacing * k as f64,
        ]
    }

    pub fn center_of_index(&self, idx: usize) -> Point3 {
        let [i, j, k] = self.coords(idx);
        self.voxel_center(i, j, k)
    }

    /// Inclusive index range of voxels whose centers fall in `[lo, hi]` along `axis`,
    /// or `None` when the interval misses the lattice.
    pub fn index_range(&self, axis: usize, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let n = self.dims[axis];
        let a = ((lo - self.origin[axis]) / self.spacing).ceil();
        let b = ((hi - self.origin[axis]) / self.spacing).floor();
        if b < 0.0 || a > (n - 1) as f64 || a > b {
            return None;
        }
        Some((a.max(0.0) as usize, (b as usize).min(n - 1)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridValues {
    /// Occupancy in `{0, 1}`.
    Binary(Vec<u8>),
    /// Occupancy probabilities in `[0, 1]`.
    Probability(Vec<f32>),
}

/// Voxel lattice holding binary occupancy or predicted probabilities, stored
/// x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    geometry: GridGeometry,
    values: GridValues,
}

impl OccupancyGrid {
    pub fn new(geometry: GridGeometry, values: GridValues) -> Result<Self> {
        let expected = geometry.checked_len()?;
        let (len, ok) = match &values {
            GridValues::Binary(v) => (v.len(), v.iter().all(|&x| x <= 1)),
            GridValues::Probability(v) => (v.len(), v.iter().all(|x| (0.0..=1.0).contains(x))),
        };
        if len != expected {
            return Err(Error::GridMismatch(format!(
                "{len} values for {:?} grid ({expected} voxels)",
                geometry.dims
            )));
        }
        if !ok {
            return Err(Error::GridMismatch("grid values out of range".into()));
        }
        Ok(Self { geometry, values })
    }

    pub fn zeros(geometry: GridGeometry) -> Result<Self> {
        let len = geometry.checked_len()?;
        let mut v = Vec::new();
        v.try_reserve_exact(len)
            .map_err(|_| Error::Capacity { dims: geometry.dims })?;
        v.resize(len, 0u8);
        Ok(Self {
            geometry,
            values: GridValues::Binary(v),
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geometry.dims
    }

    pub fn values(&self) -> &GridValues {
        &self.values
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.values, GridValues::Binary(_))
    }

    /// Binary voxel values; errors for probability grids.
    pub fn binary(&self) -> Result<&[u8]> {
        match &self.values {
            GridValues::Binary(v) => Ok(v),
            GridValues::Probability(_) => {
                Err(Error::GridMismatch("expected a binary grid, got probabilities".into()))
            }
        }
    }

    pub(crate) fn binary_mut(&mut self) -> &mut Vec<u8> {
        match &mut self.values {
            GridValues::Binary(v) => v,
            GridValues::Probability(_) => unreachable!("binary_mut on probability grid"),
        }
    }

    pub fn probabilities(&self) -> Result<&[f32]> {
        match &self.values {
            GridValues::Probability(v) => Ok(v),
            GridValues::Binary(_) => {
                Err(Error::GridMismatch("expected a probability grid, got binary".into()))
            }
        }
    }

    /// Value at a linear index as a float in `[0, 1]`.
    pub fn value(&self, idx: usize) -> f64 {
        match &self.values {
            GridValues::Binary(v) => v[idx] as f64,
            GridValues::Probability(v) => v[idx] as f64,
        }
    }

    pub fn count_occupied(&self) -> usize {
        match &self.values {
            GridValues::Binary(v) => v.iter().filter(|&&x| x != 0).count(),
            GridValues::Probability(v) => v.iter().filter(|&&x| x >= 0.5).count(),
        }
    }

    /// World-space centers of all voxels with value 1 (binary grids only).
    pub fn occupied_centers(&self) -> Result<Vec<Point3>> {
        let v = self.binary()?;
        Ok(v.iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(i, _)| self.geometry.center_of_index(i))
            .collect())
    }

    /// Errors unless `other` shares dims, origin and spacing.
    pub fn check_same_geometry(&self, other: &OccupancyGrid) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.geometry, other.geometry
            )));
        }
        Ok(())
    }
}
