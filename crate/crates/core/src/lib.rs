//! Numerical machinery for deciding whether radial Gaussians are critical
//! points of the adjoint Fourier restriction functional on the paraboloid
//! and of the mixed-norm Strichartz functionals.
//!
//! The library is organised around one-dimensional integrals: the extension
//! of a Gaussian has a closed form, the Euler-Lagrange nonlinearity applied
//! to it reduces to a radial profile integral in a single variable, and
//! criticality is equivalent to that profile being a pure exponential.
//! Everything is evaluated twice — once by adaptive quadrature on the real
//! line and once through a branch-cut contour identity — and the two routes
//! cross-check each other.
//!
//! Module layout:
//!
//! * [`exponents`] — dual exponent algebra and Strichartz admissibility.
//! * [`branch`] — branch-cut-aware complex powers of `1 ± it` and `q-1-it`.
//! * [`quadrature`] — adaptive real-line and half-line engines with error
//!   control and decay certificates.
//! * [`extension`] — radial Gaussians, their closed-form extension, the
//!   symmetry group, and a direct-quadrature oracle.
//! * [`contour`] — the profile integrals, their series coefficients, and
//!   the contour identity connecting them.
//! * [`el_verify`] — constancy profiles and criticality verdicts.
//! * [`mixed_norm`] — discrete space-time norms, first variations, the
//!   functionals themselves, and directional derivatives.

pub mod branch;
pub mod contour;
pub mod el_verify;
mod error;
pub mod exponents;
pub mod extension;
pub mod mixed_norm;
pub mod quadrature;

pub use error::{Error, Result};

/// The complex scalar used throughout.
pub type Complex64 = num_complex::Complex<f64>;
