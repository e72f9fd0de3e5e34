//! Raw holomorphic basis families, weights, and the reduced-space filter.
//!
//! A function on a planar domain has a single-valued primitive exactly when
//! its periods `(1/2πi) ∮ e(z) dz` around every hole vanish. For (Laurent)
//! monomials `(z − c)^n` the only non-zero period is the residue of `n = −1`
//! around a hole containing `c`, so periods are stored in closed form.

use std::fmt;
use std::sync::Arc;

use crate::geometry::Shape;
use crate::{ensure_finite, Error, PlanarDomain, ProperMapModel, Result, C64};

const PERIOD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    Monomial { n: u32, center: C64 },
    Laurent { n: i32, center: C64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawBasisElement {
    kind: ElementKind,
    periods: Vec<C64>,
}

impl fmt::Display for RawBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, c) = (self.exponent(), self.center());
        if c == C64::new(0.0, 0.0) {
            write!(f, "z^{n}")
        } else {
            write!(f, "(z - ({c}))^{n}")
        }
    }
}

impl RawBasisElement {
    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn exponent(&self) -> i32 {
        match self.kind {
            ElementKind::Monomial { n, .. } => n as i32,
            ElementKind::Laurent { n, .. } => n,
        }
    }

    pub fn center(&self) -> C64 {
        match self.kind {
            ElementKind::Monomial { center, .. } | ElementKind::Laurent { center, .. } => center,
        }
    }

    /// `(1/2πi) ∮ e dz` around each hole of the basis domain.
    pub fn periods(&self) -> &[C64] {
        &self.periods
    }

    pub fn has_zero_periods(&self) -> bool {
        self.periods.iter().all(|p| p.norm() <= PERIOD_TOL)
    }

    pub fn eval(&self, z: C64) -> C64 {
        (z - self.center()).powi(self.exponent())
    }

    /// Derivative of order `order`.
    pub fn deriv(&self, z: C64, order: u32) -> C64 {
        let n = self.exponent();
        let mut factor = 1.0;
        for k in 0..order as i32 {
            factor *= (n - k) as f64;
        }
        if factor == 0.0 {
            return C64::new(0.0, 0.0);
        }
        (z - self.center()).powi(n - order as i32) * factor
    }

    /// Analytic primitive, or `None` for `(z − c)^{-1}`.
    pub fn primitive(&self, z: C64) -> Option<C64> {
        let n = self.exponent();
        if n == -1 {
            return None;
        }
        Some((z - self.center()).powi(n + 1) / (n + 1) as f64)
    }
}

/// Ordered raw basis on a domain.
#[derive(Debug, Clone)]
pub struct RawBasis {
    elements: Vec<RawBasisElement>,
    domain: Arc<PlanarDomain>,
}

impl RawBasis {
    /// Elements as given. The family constructors below produce pairwise
    /// distinct elements; this one does not check.
    pub fn new(domain: Arc<PlanarDomain>, elements: Vec<RawBasisElement>) -> Self {
        Self { elements, domain }
    }

    pub fn elements(&self) -> &[RawBasisElement] {
        &self.elements
    }

    pub fn domain(&self) -> &Arc<PlanarDomain> {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn eval_all(&self, z: C64) -> Vec<C64> {
        self.elements.iter().map(|e| e.eval(z)).collect()
    }

    pub fn with_elements(&self, elements: Vec<RawBasisElement>) -> Self {
        Self { elements, domain: self.domain.clone() }
    }
}

/// Periods of `(z − c)^n` around the holes of `domain`.
fn laurent_periods(domain: &PlanarDomain, n: i32, center: C64) -> Result<Vec<C64>> {
    let zero = C64::new(0.0, 0.0);
    match domain.shape() {
        Shape::Disc { center: dc, radius } => {
            if n < 0 && (center - dc).norm() <= *radius {
                return Err(Error::InvalidArgument(format!(
                    "pole of (z - {center})^{n} lies in the closed disc"
                )));
            }
            Ok(Vec::new())
        }
        Shape::Annulus { center: ac, r_inner, r_outer } => {
            let d = (center - ac).norm();
            if n < 0 {
                if d < *r_inner {
                    Ok(vec![if n == -1 { C64::new(1.0, 0.0) } else { zero }])
                } else if d > *r_outer {
                    Ok(vec![zero])
                } else {
                    Err(Error::InvalidArgument(format!(
                        "pole of (z - {center})^{n} lies in the closed annulus"
                    )))
                }
            } else {
                Ok(vec![zero])
            }
        }
        Shape::Generic { holes, .. } => {
            if n < 0 {
                return Err(Error::InvalidArgument(
                    "generic domains only support polynomial basis elements".into(),
                ));
            }
            Ok(vec![zero; holes.len()])
        }
    }
}

/// `(z − c)^0, …, (z − c)^degree`.
pub fn monomial_basis(domain: Arc<PlanarDomain>, center: C64, degree: u32) -> Result<RawBasis> {
    ensure_finite(center, "basis center")?;
    let holes = domain.hole_count();
    let elements = (0..=degree)
        .map(|n| RawBasisElement {
            kind: ElementKind::Monomial { n, center },
            periods: vec![C64::new(0.0, 0.0); holes],
        })
        .collect();
    Ok(RawBasis { elements, domain })
}

/// `(z − c)^n` for `n_min ≤ n ≤ n_max`. Poles must sit in a hole or outside.
pub fn laurent_basis(domain: Arc<PlanarDomain>, center: C64, n_min: i32, n_max: i32) -> Result<RawBasis> {
    ensure_finite(center, "basis center")?;
    if n_min > n_max {
        return Err(Error::InvalidArgument(format!("n_min = {n_min} exceeds n_max = {n_max}")));
    }
    let elements = (n_min..=n_max)
        .map(|n| {
            Ok(RawBasisElement {
                kind: ElementKind::Laurent { n, center },
                periods: laurent_periods(&domain, n, center)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RawBasis { elements, domain })
}

/// Keeps the elements with a single-valued primitive (all periods zero), in order.
pub fn reduced_filter(basis: &RawBasis) -> RawBasis {
    basis.with_elements(basis.elements.iter().filter(|e| e.has_zero_periods()).cloned().collect())
}

/// Positive weight `ν` on a domain.
#[derive(Debug, Clone)]
pub enum WeightFn {
    Constant,
    /// `|z − c|^{2α}`
    Power { alpha: f64, center: C64 },
    /// `Σ a_k |z − c|^{2k}`
    RadialPoly { coeffs: Vec<f64>, center: C64 },
    /// `ν ∘ f`
    Pullback { base: Box<WeightFn>, map: Arc<ProperMapModel> },
}

impl WeightFn {
    pub fn power(alpha: f64, center: C64) -> Result<Self> {
        ensure_finite(center, "weight center")?;
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidArgument(format!("power weight needs alpha >= 0, got {alpha}")));
        }
        Ok(WeightFn::Power { alpha, center })
    }

    pub fn radial_poly(coeffs: Vec<f64>, center: C64) -> Result<Self> {
        ensure_finite(center, "weight center")?;
        if coeffs.is_empty() || coeffs.iter().any(|a| !a.is_finite() || *a < 0.0) || coeffs[0] <= 0.0 {
            return Err(Error::InvalidArgument(
                "radial polynomial weight needs a_0 > 0 and a_k >= 0".into(),
            ));
        }
        Ok(WeightFn::RadialPoly { coeffs, center })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, WeightFn::Constant)
    }

    pub fn eval(&self, z: C64) -> f64 {
        match self {
            WeightFn::Constant => 1.0,
            WeightFn::Power { alpha, center } => {
                let r2 = (z - center).norm_sqr();
                if alpha.fract() == 0.0 && *alpha <= i32::MAX as f64 {
                    r2.powi(*alpha as i32)
                } else {
                    r2.powf(*alpha)
                }
            }
            WeightFn::RadialPoly { coeffs, center } => {
                let r2 = (z - center).norm_sqr();
                coeffs.iter().rev().fold(0.0, |acc, &a| acc * r2 + a)
            }
            WeightFn::Pullback { base, map } => base.eval(map.eval(z)),
        }
    }

    /// Smallest weight over the given points.
    pub fn min_over(&self, points: &[C64]) -> f64 {
        points.iter().map(|&z| self.eval(z)).fold(f64::INFINITY, f64::min)
    }

    /// Errors unless `ν > 0` at every point.
    pub fn check_positive(&self, points: &[C64]) -> Result<()> {
        match points.iter().find(|&&z| !(self.eval(z) > 0.0)) {
            Some(z) => Err(Error::InvalidArgument(format!("weight is not positive at {z}"))),
            None => Ok(()),
        }
    }
}

/// `ν ∘ f`; a constant weight stays constant.
pub fn pullback_weight(nu: &WeightFn, f: &Arc<ProperMapModel>) -> WeightFn {
    match nu {
        WeightFn::Constant => WeightFn::Constant,
        other => WeightFn::Pullback { base: Box::new(other.clone()), map: f.clone() },
    }
}
