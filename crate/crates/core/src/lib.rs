//! Constant-area chord maps on convex polygons.
//!
//! For a convex polygon of area `S` and `0 < A < S/2`, every boundary point
//! `x` has a unique counterclockwise partner `y` such that the chord `xy`
//! cuts off area `A`. The map `x -> y` is an orientation-preserving circle
//! homeomorphism of the boundary. Sweeping `A` and recording its rotation
//! number traces a devil's staircase.
//!
//! ```
//! use areamap::{rotation_number, MapConfig, Polygon, RotationOptions};
//!
//! let square = Polygon::regular(4, 1.0)?;
//! let cfg = MapConfig::new(&square, 0.1)?;
//! let tau = rotation_number(&cfg, &RotationOptions::default());
//! assert_eq!(tau.fraction(), Some((1, 4)));
//! # Ok::<(), areamap::Error>(())
//! ```
//!
//! * [`geometry`]: polygons, boundary parametrization, cut areas.
//! * [`billiard`]: the chord map, its lift and derivative, orbits.
//! * [`rotation`]: rotation numbers, rational detection, staircase sweeps.
//! * [`analysis`]: good/bad chord checks and return-map derivatives.
//! * [`moebius`]: line-to-line area maps as projective transformations.

pub mod analysis;
pub mod billiard;
pub mod error;
pub mod geometry;
pub mod moebius;
pub mod rotation;

pub use analysis::{
    chord_marks, fake_orbit, return_derivative, sigma, verify, ChordRecord, FakeOrbit, ReturnDerivative, Sigma,
    VerificationReport, VerifyOptions,
};
pub use billiard::{
    derivative, envelope_midpoint, iterate_lift, orbit, orbit_with_areas, phi, phi_lift, phi_step_area, Lift,
    MapConfig, OrbitRecord,
};
pub use error::{Error, Result};
pub use geometry::{BoundaryPoint, Polygon, Vec2};
pub use moebius::{area_map, compose, is_identity, parallelogram_config, triangle_config, ExtReal, ProjMap};
pub use rotation::{
    plateau_bounds, rotation_number, staircase_sweep, RotationEstimate, RotationKind, RotationOptions, StaircaseRow,
    SweepOptions,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/area-construction.md")]
    mod area_construction {}
    #[doc = include_str!("../../../book/src/rotation-numbers.md")]
    mod rotation_numbers {}
    #[doc = include_str!("../../../book/src/staircase.md")]
    mod staircase {}
    #[doc = include_str!("../../../book/src/chord-checks.md")]
    mod chord_checks {}
    #[doc = include_str!("../../../book/src/projective-maps.md")]
    mod projective_maps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
}
