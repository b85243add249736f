//! Direction grids, sampling surfaces, closed meshes and crack geometries.

mod crack;
mod grid;
mod mesh;
mod surface;

pub use crack::{penny_crack, surface_patch, CrackElement, CrackGeometry, PatchRegion, QuadPoint, FRONT_ORDER};
pub use grid::{DirectionGrid, GridSpec};
pub use mesh::{MeshMap, SurfaceMesh, SurfacePoint};
pub use surface::{parametric_surface, tangent_frame, SamplingSurface, SurfaceKind};
