//! Multiply connected machinery: harmonic measures, period matrices,
//! Green's functions, the kernel `Φ` of circularly slit disks and canonical
//! circular-slit maps.
//!
//! All harmonic functions are represented by least-squares fits in local
//! exterior coordinates of the boundary components; see [`fit`].

pub mod basis;
pub mod bundle;
pub mod canonical;
pub mod fit;
pub mod kernel;

pub use basis::{Hole, LaplaceDomain, LaplaceOptions};
pub use bundle::{green, harmonic_bundle, GreenFunction, HarmonicBundle};
pub use canonical::{canonical_slit_disk_map, reduced_map, CanonicalMap, HoleOracle, ReducedMap};
pub use fit::{solve_dirichlet, Component, HarmonicFunction};
pub use kernel::{mobius_kernel, phi_kernel, KernelField, KernelSolver, POLE_GUARD};
