//! Kähler measure on planar Delaunay triangulations.
//!
//! The crate is organised bottom-up: [`geom`] primitives, [`tri`]
//! triangulations, the measure in [`kahler`], differential forms in [`forms`],
//! the regions of the volume bound in [`regions`], the Voronoï dual in
//! [`voronoi`] and the Monte-Carlo engine in [`mc`].

pub mod geom;
pub mod tri;
pub mod forms;
pub mod kahler;
pub mod linalg;
pub mod mc;
pub mod regions;
pub mod voronoi;
