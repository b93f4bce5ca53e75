//! Exact point-to-surface distance queries.

mod bvh;
mod triangle;

pub use bvh::{Aabb, ClosestPointResult, SurfaceIndex, DEFAULT_LEAF_SIZE};
pub use triangle::{closest_point_on_triangle, closest_point_unchecked};
