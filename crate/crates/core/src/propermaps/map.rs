use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{dedup_points, BranchSet, Poly, BOUNDARY_MARGIN, NEAR_SINGULAR};
use crate::geometry::Location;
use crate::{ensure_finite, Error, PlanarDomain, Result, C64};

/// Algebraic families of proper maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MapKind {
    /// `z ↦ z^m`
    Power { m: u32 },
    /// `z ↦ Π (z − a_k) / (1 − conj(a_k) z)`
    Blaschke { zeros: Vec<C64> },
    /// `z ↦ Σ c_k z^k`, lowest degree first.
    Polynomial { coeffs: Vec<C64> },
}

/// A proper holomorphic map between two planar domains, with its critical
/// values precomputed.
#[derive(Debug, Clone)]
pub struct ProperMapModel {
    kind: MapKind,
    source: Arc<PlanarDomain>,
    target: Arc<PlanarDomain>,
    critical_points: Vec<C64>,
    critical_values: Vec<C64>,
}

impl ProperMapModel {
    pub fn new(kind: MapKind, source: Arc<PlanarDomain>, target: Arc<PlanarDomain>) -> Result<Self> {
        match &kind {
            MapKind::Power { m } if *m == 0 => {
                return Err(Error::InvalidArgument("power map needs m >= 1".into()));
            }
            MapKind::Blaschke { zeros } => {
                if zeros.is_empty() {
                    return Err(Error::InvalidArgument("Blaschke product needs at least one zero".into()));
                }
                for &a in zeros {
                    ensure_finite(a, "Blaschke zero")?;
                    if a.norm() >= 1.0 {
                        return Err(Error::InvalidArgument(format!("Blaschke zero {a} is not inside the unit disc")));
                    }
                }
            }
            MapKind::Polynomial { coeffs } => {
                for &c in coeffs {
                    ensure_finite(c, "polynomial coefficient")?;
                }
                if Poly::new(coeffs.clone()).degree() == 0 {
                    return Err(Error::InvalidArgument("polynomial map must be non-constant".into()));
                }
            }
            _ => {}
        }
        let mut model = Self { kind, source, target, critical_points: Vec::new(), critical_values: Vec::new() };
        model.compute_critical_set()?;
        Ok(model)
    }

    /// `z ↦ z` on a domain.
    pub fn identity(domain: Arc<PlanarDomain>) -> Self {
        Self::new(MapKind::Power { m: 1 }, domain.clone(), domain).expect("identity map is valid")
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn source(&self) -> &Arc<PlanarDomain> {
        &self.source
    }

    pub fn target(&self) -> &Arc<PlanarDomain> {
        &self.target
    }

    pub fn multiplicity(&self) -> usize {
        match &self.kind {
            MapKind::Power { m } => *m as usize,
            MapKind::Blaschke { zeros } => zeros.len(),
            MapKind::Polynomial { coeffs } => Poly::new(coeffs.clone()).degree(),
        }
    }

    pub fn critical_values(&self) -> &[C64] {
        &self.critical_values
    }

    pub fn critical_points(&self) -> &[C64] {
        &self.critical_points
    }

    pub fn eval(&self, z: C64) -> C64 {
        match &self.kind {
            MapKind::Power { m } => z.powu(*m),
            MapKind::Blaschke { zeros } => zeros.iter().map(|&a| (z - a) / (C64::new(1.0, 0.0) - a.conj() * z)).product(),
            MapKind::Polynomial { coeffs } => Poly::new(coeffs.clone()).eval(z),
        }
    }

    pub fn eval_deriv(&self, z: C64) -> C64 {
        match &self.kind {
            MapKind::Power { m } => z.powu(*m - 1) * *m as f64,
            MapKind::Blaschke { zeros } => {
                // product rule; factor derivative is (1 - |a|^2) / (1 - conj(a) z)^2
                let one = C64::new(1.0, 0.0);
                let factors: Vec<C64> = zeros.iter().map(|&a| (z - a) / (one - a.conj() * z)).collect();
                let derivs: Vec<C64> = zeros
                    .iter()
                    .map(|&a| {
                        let d = one - a.conj() * z;
                        (1.0 - a.norm_sqr()) / (d * d)
                    })
                    .collect();
                (0..zeros.len())
                    .map(|k| {
                        factors
                            .iter()
                            .enumerate()
                            .map(|(j, &f)| if j == k { derivs[k] } else { f })
                            .product::<C64>()
                    })
                    .sum()
            }
            MapKind::Polynomial { coeffs } => Poly::new(coeffs.clone()).derivative().eval(z),
        }
    }

    /// Numerator and denominator of `f` as polynomials.
    fn rational_parts(&self) -> (Poly, Poly) {
        let one = C64::new(1.0, 0.0);
        match &self.kind {
            MapKind::Power { m } => {
                let mut c = vec![C64::new(0.0, 0.0); *m as usize + 1];
                c[*m as usize] = one;
                (Poly::new(c), Poly::constant(one))
            }
            MapKind::Blaschke { zeros } => {
                let num = zeros.iter().fold(Poly::constant(one), |acc, &a| acc.mul(&Poly::linear_root(a)));
                let den = zeros
                    .iter()
                    .fold(Poly::constant(one), |acc, &a| acc.mul(&Poly::new(vec![one, -a.conj()])));
                (num, den)
            }
            MapKind::Polynomial { coeffs } => (Poly::new(coeffs.clone()), Poly::constant(one)),
        }
    }

    fn compute_critical_set(&mut self) -> Result<()> {
        let (num, den) = self.rational_parts();
        let deriv_num = num.derivative().mul(&den).sub(&num.mul(&den.derivative()));
        if deriv_num.is_zero() {
            return Err(Error::InvalidArgument("map has identically vanishing derivative".into()));
        }
        let roots = deriv_num.roots()?;
        let points = dedup_points(roots.into_iter().filter(|&z| self.source.contains(z)).collect(), 1e-9);
        let values = dedup_points(points.iter().map(|&z| self.eval(z)).collect(), 1e-9);
        self.critical_points = points;
        self.critical_values = values;
        Ok(())
    }

    /// Distance from `w` to the nearest critical value, with that value.
    pub fn nearest_critical_value(&self, w: C64) -> Option<(C64, f64)> {
        self.critical_values
            .iter()
            .map(|&v| (v, (v - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// The `m` preimages of `w` in the source together with `F_k'(w) = 1/f'(F_k(w))`.
    pub fn local_inverses(&self, w: C64) -> Result<BranchSet> {
        ensure_finite(w, "branch query")?;
        if let Some((critical, distance)) = self.nearest_critical_value(w) {
            if distance <= NEAR_SINGULAR {
                return Err(Error::NearCritical { at: w, critical, distance });
            }
        }
        let (num, den) = self.rational_parts();
        let equation = num.sub(&den.scale(w));
        let mut points = Vec::new();
        for z in equation.roots()? {
            match self.source.locate(z, BOUNDARY_MARGIN) {
                Location::Inside => points.push(z),
                Location::Boundary => {
                    return Err(Error::BranchCount { at: w, expected: self.multiplicity(), found: vec![z] });
                }
                Location::Outside => {}
            }
        }
        if points.len() != self.multiplicity() {
            return Err(Error::BranchCount { at: w, expected: self.multiplicity(), found: points });
        }
        let derivatives = points.iter().map(|&z| C64::new(1.0, 0.0) / self.eval_deriv(z)).collect();
        Ok(BranchSet { points, derivatives })
    }
}
