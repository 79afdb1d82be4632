//! Direct-calculation direction finding for a regular-tetrahedron receiver array.
//!
//! Four receivers sit on the vertices of a regular tetrahedron. Given the
//! time difference of arrival of a signal at each receiver, bearing and
//! elevation of the source are read off in a fixed, short sequence of
//! closed-form steps: no iteration, no multilateration.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: tetrahedron and face construction, gating window.
//! - [`normalize`]: raw TDOA readings to mean-zero path differences,
//!   plus the sum-of-squares distance recovery identities.
//! - [`solver`]: per-vertex elevation, best-vertex selection, triangle
//!   preparation, bearing fusion and the full / degraded solves.
//! - [`sim`]: exact spherical and plane wavefront forward models.
//! - [`harness`]: near-field error sweeps, chord errors, sinusoid fits and
//!   CSV / JSON reporting.
//!
//! Conventions: lengths in meters, angles in degrees at every public
//! boundary. Bearing is counter-clockwise from +x in the xy-plane, in
//! `[0, 360)`; elevation is measured from the xy-plane, in `[-90, 90]`.
//! Vertex `d` sits on +z with the base face `a, b, c` below it.
//!
//! ```
//! use tetradf::{geometry::TetraArray, sim::{simulate_plane, SourceSpec}, solver::solve_full};
//!
//! let array = TetraArray::new(0.5, 299_792_458.0).unwrap();
//! let sample = simulate_plane(&SourceSpec::far_field(120.0, 20.0), &array).unwrap();
//! let est = solve_full(&sample, &array).unwrap();
//! assert!((est.bearing_deg - 120.0).abs() < 1e-6);
//! assert!((est.elevation_deg - 20.0).abs() < 1e-6);
//! ```

pub mod angles;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod normalize;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{TetraArray, TriangleFace, Vertex};
pub use normalize::{NormalizedReadings, TdoaSample, TdoaUnit};
pub use sim::SourceSpec;
pub use solver::{DirectionEstimate, SignHint, SolveMode};
