//! The graph occupancy field: exact point-to-graph distance, binary occupancy
//! under a pseudo radius, voxel rasterization and supervision sampling.

mod distance;
mod grid;
mod io;
mod queries;
mod raster;

pub use distance::{graph_distance, occupancy, point_segment_distance};
pub use grid::{GridGeometry, GridValues, OccupancyGrid};
pub use io::{read_grid, write_grid, write_obj_points, GRID_MAGIC, GRID_VERSION};
pub use queries::{sample_queries, QuerySet, SamplingConfig};
pub use raster::{rasterize, rasterize_bruteforce, rasterize_into, FieldConfig, SegmentHash};

/// Pseudo radius used when none is configured.
pub const DEFAULT_PSEUDO_RADIUS: f64 = 0.016;
/// Evaluation grid edge length.
pub const EVAL_GRID: usize = 512;
/// Grid edge length for desk-scale runs.
pub const DESK_GRID: usize = 128;
/// Chunk edge used when rendering large grids.
pub const DEFAULT_CHUNK: usize = 64;
