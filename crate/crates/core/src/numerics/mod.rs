//! Numerical kernels used by the physics modules.

pub mod bessel;
pub mod linalg;
pub mod ode;
pub mod quad;

pub use bessel::{bessel_j0, bessel_j1, bessel_y0, bessel_y1};
pub use linalg::{eig_smallest, expm, matrix_exp_apply, SmallestEigen};
pub use ode::{integrate_ode, OdeOptions, OdeStats};
pub use quad::{integrate, quad_adaptive, QuadOptions, QuadratureResult};
