//! Associated Legendre functions `P^mu_nu(z)` and `Q^mu_nu(z)` for `z > 1`,
//! complex degree and complex order, together with the machinery used to map
//! the complex-`nu` pole structure of `Q^{-1/2-K}_nu(cosh rho)`: pole
//! prediction and contour-integral confirmation, the exceptional-point
//! classification over the order parameter `K`, and the normalization
//! integral over conical degrees `nu = -1/2 + i tau`.
//!
//! All evaluators use the convention in which
//!
//! ```text
//! Q^mu_nu(z) = e^{i mu pi} sqrt(pi) Gamma(nu+mu+1) / (2^{nu+1} Gamma(nu+3/2))
//!              (z^2-1)^{mu/2} z^{-nu-mu-1}
//!              2F1(nu/2+mu/2+1, nu/2+mu/2+1/2; nu+3/2; 1/z^2)
//! ```
//!
//! i.e. the `e^{i mu pi}` phase factor is kept. Every identity implemented
//! here (Whipple, order reflection, the conical product formula) is stated
//! in that convention.

pub mod cli;
pub mod error;
pub mod gamma;
pub mod hyp2f1;
pub mod legendre;
pub mod norms;
pub mod polescan;
pub mod quadrature;
pub mod records;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
