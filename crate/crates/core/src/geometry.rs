//! Bounded planar domains and area-measure quadrature rules on them.
//!
//! Discs and annuli get a polar tensor-product rule: Gauss–Legendre in the
//! radius (with the Jacobian `r` folded into the weights) times the
//! equispaced trapezoid rule in the angle. Because every basis family in this
//! crate is a (Laurent) monomial, the angular sum is exact for Gram entries and
//! all quadrature error sits in the smooth radial integrals.
//!
//! Generic domains are described by a membership predicate plus a bounding box
//! and use a first-order midpoint rule.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::{ensure_finite, Error, Result, C64};

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let all_finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !all_finite || x_min >= x_max || y_min >= y_max {
            return Err(Error::InvalidArgument(format!(
                "bbox [{x_min}, {x_max}] x [{y_min}, {y_max}] is empty or non-finite"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.x_min && z.re <= self.x_max && z.im >= self.y_min && z.im <= self.y_max
    }
}

/// Sign condition for one polynomial inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

/// `Σ c · x^i · y^j  (> 0 | < 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyInequality {
    pub terms: Vec<(u32, u32, f64)>,
    pub sign: Sign,
}

impl PolyInequality {
    pub fn value(&self, z: C64) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| c * z.re.powi(i as i32) * z.im.powi(j as i32))
            .sum()
    }

    pub fn holds(&self, z: C64) -> bool {
        let v = self.value(z);
        match self.sign {
            Sign::Positive => v > 0.0,
            Sign::Negative => v < 0.0,
        }
    }
}

/// Membership predicate of a generic domain.
#[derive(Clone)]
pub enum Membership {
    /// Intersection of strict polynomial inequalities in `(x, y)`.
    Inequalities(Vec<PolyInequality>),
    Custom(Arc<dyn Fn(C64) -> bool + Send + Sync>),
}

impl Membership {
    pub fn holds(&self, z: C64) -> bool {
        match self {
            Membership::Inequalities(list) => list.iter().all(|p| p.holds(z)),
            Membership::Custom(f) => f(z),
        }
    }
}

impl fmt::Debug for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::Inequalities(list) => f.debug_tuple("Inequalities").field(list).finish(),
            Membership::Custom(_) => f.write_str("Custom(<fn>)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    Disc {
        center: C64,
        radius: f64,
    },
    Annulus {
        center: C64,
        r_inner: f64,
        r_outer: f64,
    },
    Generic {
        inside: Membership,
        bbox: BBox,
        /// One marker point per bounded complementary component.
        holes: Vec<C64>,
    },
}

/// Where a point sits relative to a domain, with a margin band around the
/// boundary that is reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Outside,
    Boundary,
}

/// A bounded open subset of the plane.
#[derive(Debug, Clone)]
pub struct PlanarDomain {
    shape: Shape,
}

impl PlanarDomain {
    pub fn disc(center: C64, radius: f64) -> Result<Self> {
        ensure_finite(center, "disc center")?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("disc radius must be > 0, got {radius}")));
        }
        Ok(Self { shape: Shape::Disc { center, radius } })
    }

    pub fn unit_disc() -> Self {
        Self { shape: Shape::Disc { center: C64::new(0.0, 0.0), radius: 1.0 } }
    }

    pub fn annulus(center: C64, r_inner: f64, r_outer: f64) -> Result<Self> {
        ensure_finite(center, "annulus center")?;
        if !(r_inner.is_finite() && r_outer.is_finite() && r_inner > 0.0 && r_inner < r_outer) {
            return Err(Error::InvalidArgument(format!(
                "annulus radii must satisfy 0 < r_inner < r_outer, got ({r_inner}, {r_outer})"
            )));
        }
        Ok(Self { shape: Shape::Annulus { center, r_inner, r_outer } })
    }

    /// Generic domain. Hole markers must lie inside `bbox` and outside the domain.
    pub fn generic(inside: Membership, bbox: BBox, holes: Vec<C64>) -> Result<Self> {
        for &h in &holes {
            ensure_finite(h, "hole marker")?;
            if !bbox.contains(h) {
                return Err(Error::InvalidArgument(format!("hole marker {h} lies outside the bbox")));
            }
            if inside.holds(h) {
                return Err(Error::InvalidArgument(format!("hole marker {h} lies inside the domain")));
            }
        }
        Ok(Self { shape: Shape::Generic { inside, bbox, holes } })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn contains(&self, z: C64) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        match &self.shape {
            Shape::Disc { center, radius } => (z - center).norm() < *radius,
            Shape::Annulus { center, r_inner, r_outer } => {
                let d = (z - center).norm();
                d > *r_inner && d < *r_outer
            }
            Shape::Generic { inside, bbox, .. } => bbox.contains(z) && inside.holds(z),
        }
    }

    /// Membership with a boundary band of half-width `margin`. Generic domains
    /// have no distance function, so only the predicate is consulted there.
    pub fn locate(&self, z: C64, margin: f64) -> Location {
        let band = |d: f64, r: f64| (d - r).abs() <= margin;
        match &self.shape {
            Shape::Disc { center, radius } => {
                let d = (z - center).norm();
                if band(d, *radius) {
                    Location::Boundary
                } else if d < *radius {
                    Location::Inside
                } else {
                    Location::Outside
                }
            }
            Shape::Annulus { center, r_inner, r_outer } => {
                let d = (z - center).norm();
                if band(d, *r_inner) || band(d, *r_outer) {
                    Location::Boundary
                } else if d > *r_inner && d < *r_outer {
                    Location::Inside
                } else {
                    Location::Outside
                }
            }
            Shape::Generic { .. } => {
                if self.contains(z) {
                    Location::Inside
                } else {
                    Location::Outside
                }
            }
        }
    }

    /// One marker per hole, in a fixed order.
    pub fn holes(&self) -> Vec<C64> {
        match &self.shape {
            Shape::Disc { .. } => Vec::new(),
            Shape::Annulus { center, .. } => vec![*center],
            Shape::Generic { holes, .. } => holes.clone(),
        }
    }

    pub fn hole_count(&self) -> usize {
        match &self.shape {
            Shape::Disc { .. } => 0,
            Shape::Annulus { .. } => 1,
            Shape::Generic { holes, .. } => holes.len(),
        }
    }

    /// Analytic area where available.
    pub fn area(&self) -> Option<f64> {
        match &self.shape {
            Shape::Disc { radius, .. } => Some(PI * radius * radius),
            Shape::Annulus { r_inner, r_outer, .. } => Some(PI * (r_outer * r_outer - r_inner * r_inner)),
            Shape::Generic { .. } => None,
        }
    }

    /// Smallest closed disc around the origin containing the domain.
    pub fn outer_radius(&self) -> f64 {
        match &self.shape {
            Shape::Disc { center, radius } => center.norm() + radius,
            Shape::Annulus { center, r_outer, .. } => center.norm() + r_outer,
            Shape::Generic { bbox, .. } => [
                C64::new(bbox.x_min, bbox.y_min),
                C64::new(bbox.x_min, bbox.y_max),
                C64::new(bbox.x_max, bbox.y_min),
                C64::new(bbox.x_max, bbox.y_max),
            ]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max),
        }
    }
}

/// Nodes and positive weights approximating `∫_D · dA`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<C64>,
    weights: Vec<f64>,
    domain: Arc<PlanarDomain>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> &Arc<PlanarDomain> {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(C64) -> C64>(&self, f: F) -> C64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| f(z) * w).sum()
    }

    pub fn integrate_real<F: Fn(C64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| f(z) * w).sum()
    }
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // The crate requires at least two points.
    if n == 1 {
        return vec![(0.0, 2.0)];
    }
    let rule = gauss_quad::GaussLegendre::new(n.try_into().expect("n >= 2"));
    let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

fn polar_rule(
    domain: Arc<PlanarDomain>,
    center: C64,
    r_lo: f64,
    r_hi: f64,
    n_radial: usize,
    n_angular: usize,
) -> Result<QuadratureRule> {
    if n_radial == 0 || n_angular == 0 {
        return Err(Error::InvalidArgument(format!(
            "quadrature counts must be >= 1, got n_radial = {n_radial}, n_angular = {n_angular}"
        )));
    }
    let half = 0.5 * (r_hi - r_lo);
    let mid = 0.5 * (r_hi + r_lo);
    let d_theta = 2.0 * PI / n_angular as f64;
    let mut nodes = Vec::with_capacity(n_radial * n_angular);
    let mut weights = Vec::with_capacity(n_radial * n_angular);
    for (x, w) in gauss_legendre(n_radial) {
        let r = mid + half * x;
        let radial_weight = half * w * r;
        for j in 0..n_angular {
            let theta = d_theta * j as f64;
            nodes.push(center + C64::from_polar(r, theta));
            weights.push(radial_weight * d_theta);
        }
    }
    Ok(QuadratureRule { nodes, weights, domain })
}

pub fn build_disc_quadrature(center: C64, radius: f64, n_radial: usize, n_angular: usize) -> Result<QuadratureRule> {
    let domain = Arc::new(PlanarDomain::disc(center, radius)?);
    polar_rule(domain, center, 0.0, radius, n_radial, n_angular)
}

pub fn build_annulus_quadrature(
    center: C64,
    r_inner: f64,
    r_outer: f64,
    n_radial: usize,
    n_angular: usize,
) -> Result<QuadratureRule> {
    let domain = Arc::new(PlanarDomain::annulus(center, r_inner, r_outer)?);
    polar_rule(domain, center, r_inner, r_outer, n_radial, n_angular)
}

/// Polar rule on an existing disc or annulus, sharing the domain handle.
pub fn build_polar_quadrature(domain: &Arc<PlanarDomain>, n_radial: usize, n_angular: usize) -> Result<QuadratureRule> {
    match *domain.shape() {
        Shape::Disc { center, radius } => polar_rule(domain.clone(), center, 0.0, radius, n_radial, n_angular),
        Shape::Annulus { center, r_inner, r_outer } => {
            polar_rule(domain.clone(), center, r_inner, r_outer, n_radial, n_angular)
        }
        Shape::Generic { .. } => Err(Error::InvalidArgument(
            "polar quadrature needs a disc or annulus; use build_generic_quadrature".into(),
        )),
    }
}

/// Midpoint rule on an `n_grid × n_grid` cell grid over the bbox, keeping
/// cells whose center lies in the domain. First-order accurate in the cell size.
pub fn build_generic_quadrature(domain: &Arc<PlanarDomain>, n_grid: usize) -> Result<QuadratureRule> {
    let Shape::Generic { bbox, .. } = domain.shape() else {
        return Err(Error::InvalidArgument("build_generic_quadrature needs a generic domain".into()));
    };
    if n_grid < 8 {
        return Err(Error::InvalidArgument(format!("n_grid must be >= 8, got {n_grid}")));
    }
    let hx = (bbox.x_max - bbox.x_min) / n_grid as f64;
    let hy = (bbox.y_max - bbox.y_min) / n_grid as f64;
    let cell = hx * hy;
    let mut nodes = Vec::new();
    for i in 0..n_grid {
        let y = bbox.y_min + (i as f64 + 0.5) * hy;
        for j in 0..n_grid {
            let z = C64::new(bbox.x_min + (j as f64 + 0.5) * hx, y);
            if domain.contains(z) {
                nodes.push(z);
            }
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let weights = vec![cell; nodes.len()];
    Ok(QuadratureRule { nodes, weights, domain: domain.clone() })
}

/// Builds the natural rule for any domain: polar for discs and annuli,
/// midpoint cells (`n_grid = n_radial`) for generic shapes.
pub fn build_quadrature(domain: &Arc<PlanarDomain>, n_radial: usize, n_angular: usize) -> Result<QuadratureRule> {
    match domain.shape() {
        Shape::Generic { .. } => build_generic_quadrature(domain, n_radial),
        _ => build_polar_quadrature(domain, n_radial, n_angular),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn origin() -> C64 {
        C64::new(0.0, 0.0)
    }

    fn unit_square() -> Arc<PlanarDomain> {
        let ineq = |terms: Vec<(u32, u32, f64)>| PolyInequality { terms, sign: Sign::Positive };
        let inside = Membership::Inequalities(vec![
            ineq(vec![(1, 0, 1.0)]),
            ineq(vec![(0, 0, 1.0), (1, 0, -1.0)]),
            ineq(vec![(0, 1, 1.0)]),
            ineq(vec![(0, 0, 1.0), (0, 1, -1.0)]),
        ]);
        let bbox = BBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        Arc::new(PlanarDomain::generic(inside, bbox, vec![]).unwrap())
    }

    fn assert_rule_invariants(rule: &QuadratureRule) {
        assert!(!rule.is_empty());
        assert_eq!(rule.nodes().len(), rule.weights().len());
        for (&z, &w) in rule.nodes().iter().zip(rule.weights()) {
            assert!(w > 0.0);
            assert!(rule.domain().contains(z), "node {z} outside its domain");
        }
    }

    #[test]
    fn one_point_disc_rule() {
        let rule = build_disc_quadrature(origin(), 1.0, 1, 1).unwrap();
        assert_eq!(rule.len(), 1);
        assert_relative_eq!(rule.nodes()[0].re, 0.5);
        assert_relative_eq!(rule.total_weight(), PI, max_relative = 1e-14);
    }

    #[test]
    fn disc_rule_area_and_second_moment() {
        let rule = build_disc_quadrature(origin(), 1.0, 40, 80).unwrap();
        assert_eq!(rule.len(), 3200);
        assert_rule_invariants(&rule);
        assert_relative_eq!(rule.total_weight(), PI, max_relative = 1e-10);
        let m2 = rule.integrate_real(|z| z.norm_sqr());
        assert!((m2 - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn annulus_rule_area_and_log_moment() {
        let rule = build_annulus_quadrature(origin(), 0.5, 1.0, 40, 80).unwrap();
        assert_rule_invariants(&rule);
        assert_relative_eq!(rule.total_weight(), 0.75 * PI, max_relative = 1e-10);
        let v = rule.integrate_real(|z| 1.0 / z.norm_sqr());
        assert!((v - 2.0 * PI * 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn bad_radii_rejected() {
        assert!(matches!(
            build_annulus_quadrature(origin(), 1.0, 0.5, 10, 10),
            Err(Error::InvalidArgument(_))
        ));
        assert!(build_disc_quadrature(origin(), 0.0, 10, 10).is_err());
        assert!(build_disc_quadrature(origin(), 1.0, 0, 10).is_err());
        assert!(build_disc_quadrature(C64::new(f64::NAN, 0.0), 1.0, 4, 4).is_err());
    }

    #[test]
    fn off_center_disc() {
        let c = C64::new(0.3, -1.2);
        let rule = build_disc_quadrature(c, 2.0, 20, 40).unwrap();
        assert_rule_invariants(&rule);
        assert_relative_eq!(rule.total_weight(), 4.0 * PI, max_relative = 1e-10);
        // mean of z over a disc is its center
        let mean = rule.integrate(|z| z) / rule.total_weight();
        assert!((mean - c).norm() < 1e-12);
    }

    #[test]
    fn angular_exactness_of_mixed_monomials() {
        let n_angular = 24;
        for rule in [
            build_disc_quadrature(origin(), 1.0, 12, n_angular).unwrap(),
            build_annulus_quadrature(origin(), 0.4, 1.0, 12, n_angular).unwrap(),
        ] {
            for a in 0..n_angular / 2 {
                for b in 0..n_angular / 2 {
                    if a == b {
                        continue;
                    }
                    let v = rule.integrate(|z| z.powi(a as i32) * z.conj().powi(b as i32));
                    assert!(v.norm() < 1e-12, "a={a} b={b} -> {v}");
                }
            }
        }
    }

    #[test]
    fn refinement_does_not_increase_error() {
        let exact = PI / 2.0;
        let mut last = f64::INFINITY;
        for (nr, na) in [(1, 2), (2, 4), (4, 8)] {
            let rule = build_disc_quadrature(origin(), 1.0, nr, na).unwrap();
            let err = (rule.integrate_real(|z| z.norm_sqr()) - exact).abs();
            assert!(err <= last + 1e-15, "error grew: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn generic_unit_square() {
        let dom = unit_square();
        let rule = build_generic_quadrature(&dom, 10).unwrap();
        assert_eq!(rule.len(), 100);
        assert_rule_invariants(&rule);
        assert!((rule.total_weight() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn generic_disc_area_converges() {
        let inside = Membership::Inequalities(vec![PolyInequality {
            terms: vec![(0, 0, 1.0), (2, 0, -1.0), (0, 2, -1.0)],
            sign: Sign::Positive,
        }]);
        let bbox = BBox::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let dom = Arc::new(PlanarDomain::generic(inside, bbox, vec![]).unwrap());
        let rule = build_generic_quadrature(&dom, 400).unwrap();
        assert_rule_invariants(&rule);
        assert_relative_eq!(rule.total_weight(), PI, max_relative = 1e-2);
    }

    #[test]
    fn generic_empty_and_bad_grid() {
        let inside = Membership::Custom(Arc::new(|_| false));
        let bbox = BBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let dom = Arc::new(PlanarDomain::generic(inside, bbox, vec![]).unwrap());
        assert!(matches!(build_generic_quadrature(&dom, 16), Err(Error::EmptyDomain)));
        assert!(build_generic_quadrature(&unit_square(), 4).is_err());
    }

    #[test]
    fn hole_markers_validated() {
        let ring = Membership::Custom(Arc::new(|z: C64| z.norm() > 0.5 && z.norm() < 1.0));
        let bbox = BBox::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(PlanarDomain::generic(ring.clone(), bbox, vec![C64::new(0.0, 0.0)]).is_ok());
        assert!(PlanarDomain::generic(ring.clone(), bbox, vec![C64::new(0.75, 0.0)]).is_err());
        assert!(PlanarDomain::generic(ring, bbox, vec![C64::new(3.0, 0.0)]).is_err());
    }

    #[test]
    fn locate_reports_boundary_band() {
        let d = PlanarDomain::unit_disc();
        assert_eq!(d.locate(C64::new(0.5, 0.0), 1e-12), Location::Inside);
        assert_eq!(d.locate(C64::new(1.0, 0.0), 1e-12), Location::Boundary);
        assert_eq!(d.locate(C64::new(1.5, 0.0), 1e-12), Location::Outside);
        let a = PlanarDomain::annulus(C64::new(0.0, 0.0), 0.5, 1.0).unwrap();
        assert_eq!(a.locate(C64::new(0.25, 0.0), 1e-12), Location::Outside);
        assert_eq!(a.locate(C64::new(0.0, 0.5), 1e-12), Location::Boundary);
    }
}
