//! Proper holomorphic maps and algebraic proper correspondences.
//!
//! Everything here is algebraic so that branch solving reduces to polynomial
//! roots: companion-matrix eigenvalues followed by one Newton polish step.

mod correspondence;
mod map;
mod poly;

pub use correspondence::{BiPoly, CorrespondenceModel};
pub use map::{MapKind, ProperMapModel};
pub use poly::Poly;

use crate::C64;

/// Queries closer than this to a critical value or discriminant point are rejected.
pub const NEAR_SINGULAR: f64 = 1e-8;

/// Half-width of the boundary band used when filtering roots by domain.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// Branch points at one query point together with the branch derivatives there.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSet {
    pub points: Vec<C64>,
    pub derivatives: Vec<C64>,
}

impl BranchSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        self.points.iter().copied().zip(self.derivatives.iter().copied())
    }

    /// Orders branches by real then imaginary part of the point.
    pub fn sort_by_point(&mut self) {
        let mut pairs: Vec<_> = self.iter().collect();
        pairs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        (self.points, self.derivatives) = pairs.into_iter().unzip();
    }
}

pub(crate) fn dedup_points(points: Vec<C64>, tol: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| (q - p).norm() <= tol) {
            out.push(p);
        }
    }
    out
}
