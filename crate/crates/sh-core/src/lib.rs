//! Spherical-harmonic and rigid-sphere acoustics primitives: directions,
//! spherical Bessel functions, harmonics, sampling grids, array steering and
//! HRTF sets.

mod array;
mod bessel;
mod direction;
mod error;
mod grid;
mod harmonics;
mod hrtf;
mod radial;

pub use array::{
    steering_vector, steering_vector_sh_sum, wavenumber, ArrayGeometry, ArrayResponse,
    PreparedResponse, RigidSphere, SteeringMatrix, SPEED_OF_SOUND,
};
pub use bessel::{derivatives, spherical_jn, spherical_yn};
pub use direction::{rotate_azimuth, wrap_azimuth, Direction};
pub use error::ShError;
pub use grid::{nearly_uniform_grid, SphereGrid};
pub use harmonics::{
    acn, legendre_polynomials, num_coefficients, real_sph_harmonics, sph_harmonics,
};
pub use hrtf::{hrtf_interpolate, HrtfKind, HrtfSet};
pub use radial::{
    open_sphere_radial_all, rigid_sphere_radial, rigid_sphere_radial_all,
    truncation_order,
};
