//! Numerical Bergman, reduced Bergman and weighted reduced Bergman kernels of
//! bounded planar domains, together with residual checks of their
//! transformation rules under proper holomorphic maps and correspondences.
//!
//! The pipeline is:
//!
//! 1. [`geometry`] builds a [`PlanarDomain`] and an area quadrature rule on it;
//! 2. [`holobasis`] supplies raw (Laurent) monomial bases, weights, and the
//!    filter keeping only elements with a single-valued primitive;
//! 3. [`kernel`] orthonormalizes a basis against the discrete weighted inner
//!    product and evaluates the resulting reproducing kernel;
//! 4. [`propermaps`] models proper maps and algebraic correspondences and
//!    solves for their branches;
//! 5. [`transform`] pushes functions through the branch-sum operators and
//!    measures how well both sides of each kernel identity agree.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod holobasis;
pub mod kernel;
pub mod propermaps;
pub mod transform;

pub use error::{Error, Result};
pub use geometry::{PlanarDomain, QuadratureRule, Shape};
pub use holobasis::{RawBasis, RawBasisElement, WeightFn};
pub use kernel::{GramMatrix, KernelEvaluator, OrthonormalBasis};
pub use propermaps::{BiPoly, BranchSet, CorrespondenceModel, MapKind, Poly, ProperMapModel};
pub use transform::{TransformReport, Verification};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Default relative pivot tolerance for dropping near-dependent basis elements.
pub const DEFAULT_DROP_TOL: f64 = 1e-10;

pub(crate) fn ensure_finite(z: C64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} = {z}")))
    }
}
