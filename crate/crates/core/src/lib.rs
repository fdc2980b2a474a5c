//! Greedy first-order methods for least squares and LASSO, and the geometry
//! constants that govern their linear rates.
//!
//! The building blocks:
//!
//! - [`problems`]: instances, generators, objective and a certified reference optimum
//! - [`geometry`]: smoothness / strong convexity / Łojasiewicz constants in the ℓ2 and ℓ1 geometries
//! - [`solvers`]: gradient descent, Gauss-Southwell coordinate descent, proximal
//!   variants, regularized matching pursuit and the gauge method
//! - [`experiments`]: ε-curves, bound overlays, support identification
//!
//! ```
//! use greedy_geometry::problems::{gen_synthetic, GeneratorSpec};
//! use greedy_geometry::geometry::closed_form_constants;
//!
//! let inst = gen_synthetic(&GeneratorSpec { n: 40, d: 10, sparsity: 3, noise_sigma: 0.1, seed: 1 }).unwrap();
//! let c = closed_form_constants(&inst.p).unwrap();
//! assert!(c.mu2 > 0.0 && c.mu2 <= c.l2_smooth);
//! ```

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use problems::ProblemInstance;
