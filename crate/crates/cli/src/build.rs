//! Turns config sections into library objects.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reduced_bergman::geometry::{build_quadrature, BBox, Membership, PolyInequality};
use reduced_bergman::holobasis::{laurent_basis, monomial_basis, reduced_filter};
use reduced_bergman::{
    BiPoly, CorrespondenceModel, KernelEvaluator, MapKind, PlanarDomain, ProperMapModel, RawBasis, WeightFn, C64,
};

use crate::config::{BasisSpec, CorrespondenceSpec, DomainSpec, GridSpec, MapSpec, Pt, SpaceSpec, WeightSpec};
use crate::RunError;

pub fn pt(p: Pt) -> C64 {
    C64::new(p[0], p[1])
}

fn field<T>(what: &str, r: reduced_bergman::Result<T>) -> Result<T, RunError> {
    r.map_err(|e| RunError::Config(format!("{what}: {e}")))
}

pub fn domain(side: &str, spec: &DomainSpec) -> Result<Arc<PlanarDomain>, RunError> {
    let d = match spec {
        DomainSpec::Disc { center, radius } => PlanarDomain::disc(pt(*center), *radius),
        DomainSpec::Annulus { center, r_inner, r_outer } => PlanarDomain::annulus(pt(*center), *r_inner, *r_outer),
        DomainSpec::Generic { bbox, inequalities, holes } => {
            let b = field(&format!("{side}.domain.bbox"), BBox::new(bbox[0], bbox[1], bbox[2], bbox[3]))?;
            let list = inequalities
                .iter()
                .map(|ineq| PolyInequality {
                    terms: ineq.terms.iter().map(|t| (t[0] as u32, t[1] as u32, t[2])).collect(),
                    sign: ineq.sign,
                })
                .collect();
            PlanarDomain::generic(Membership::Inequalities(list), b, holes.iter().copied().map(pt).collect())
        }
    };
    field(&format!("{side}.domain"), d).map(Arc::new)
}

/// Raw basis after the optional reduced filter, and the raw size before it.
pub fn basis(side: &str, spec: &SpaceSpec, d: &Arc<PlanarDomain>) -> Result<(RawBasis, usize), RunError> {
    let raw = match spec.basis {
        BasisSpec::Monomial { center, degree, .. } => monomial_basis(d.clone(), pt(center), degree),
        BasisSpec::Laurent { center, n_min, n_max, .. } => laurent_basis(d.clone(), pt(center), n_min, n_max),
    };
    let raw = field(&format!("{side}.basis"), raw)?;
    let n_raw = raw.len();
    let b = if spec.basis.reduced() { reduced_filter(&raw) } else { raw };
    Ok((b, n_raw))
}

pub fn weight(spec: &WeightSpec) -> Result<WeightFn, RunError> {
    match spec {
        WeightSpec::Constant => Ok(WeightFn::Constant),
        WeightSpec::Power { alpha, center } => field("weight", WeightFn::power(*alpha, pt(*center))),
        WeightSpec::RadialPoly { coeffs, center } => field("weight", WeightFn::radial_poly(coeffs.clone(), pt(*center))),
    }
}

/// One side fully assembled.
pub struct Space {
    pub domain: Arc<PlanarDomain>,
    pub raw_count: usize,
    pub evaluator: KernelEvaluator,
}

pub fn space(side: &str, spec: &SpaceSpec, nu: WeightFn, drop_tol: f64) -> Result<Space, RunError> {
    let d = domain(side, &spec.domain)?;
    space_on(side, spec, d, nu, drop_tol)
}

pub fn space_on(side: &str, spec: &SpaceSpec, d: Arc<PlanarDomain>, nu: WeightFn, drop_tol: f64) -> Result<Space, RunError> {
    let (b, raw_count) = basis(side, spec, &d)?;
    let q = &spec.quadrature;
    let (n_r, n_a) = match spec.domain {
        DomainSpec::Generic { .. } => (q.n_grid.unwrap_or(0), 0),
        _ => (q.n_radial.unwrap_or(0), q.n_angular.unwrap_or(0)),
    };
    let rule = field(&format!("{side}.quadrature"), build_quadrature(&d, n_r, n_a))?;
    let evaluator = KernelEvaluator::new(&b, rule, nu, drop_tol).map_err(|e| RunError::from_core(side, e))?;
    Ok(Space { domain: d, raw_count, evaluator })
}

pub fn map(spec: &MapSpec, source: Arc<PlanarDomain>, target: Arc<PlanarDomain>) -> Result<Arc<ProperMapModel>, RunError> {
    let kind = match spec {
        MapSpec::Power { m } => MapKind::Power { m: *m },
        MapSpec::Blaschke { zeros } => MapKind::Blaschke { zeros: zeros.iter().copied().map(pt).collect() },
        MapSpec::Polynomial { coeffs } => MapKind::Polynomial { coeffs: coeffs.iter().copied().map(pt).collect() },
    };
    field("map", ProperMapModel::new(kind, source, target)).map(Arc::new)
}

pub fn correspondence(
    spec: &CorrespondenceSpec,
    d1: Arc<PlanarDomain>,
    d2: Arc<PlanarDomain>,
) -> Result<CorrespondenceModel, RunError> {
    let terms: Vec<(usize, usize, C64)> =
        spec.terms.iter().map(|t| (t[0] as usize, t[1] as usize, C64::new(t[2], t[3]))).collect();
    field("correspondence", CorrespondenceModel::new(BiPoly::from_terms(&terms), d1, d2))
}

/// Grid points in a fixed order; random grids draw from `seed`.
pub fn grid(spec: &GridSpec, seed: u64) -> Vec<C64> {
    match spec {
        GridSpec::Lattice { center, radius, n } => {
            let c = pt(*center);
            let step = |k: usize| if *n == 1 { 0.0 } else { radius * (2 * k as i64 - (*n as i64 - 1)) as f64 / (*n - 1) as f64 };
            (0..*n)
                .flat_map(|i| (0..*n).map(move |j| C64::new(step(j), step(i))))
                .filter(|z| z.norm() <= *radius * (1.0 + 1e-12))
                .map(|z| z + c)
                .collect()
        }
        GridSpec::Polar { center, r_min, r_max, n_radial, n_angular } => {
            let c = pt(*center);
            (0..*n_radial)
                .flat_map(|i| {
                    let r = if *n_radial == 1 { *r_min } else { r_min + (r_max - r_min) * i as f64 / (*n_radial - 1) as f64 };
                    (0..*n_angular).map(move |j| c + C64::from_polar(r, TAU * (j as f64 + 0.5) / *n_angular as f64))
                })
                .collect()
        }
        GridSpec::Random { center, r_min, r_max, n } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = pt(*center);
            (0..*n)
                .map(|_| {
                    let u: f64 = rng.gen();
                    let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
                    let t: f64 = rng.gen::<f64>() * TAU;
                    c + C64::from_polar(r, t)
                })
                .collect()
        }
        GridSpec::Points { points } => points.iter().copied().map(pt).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_is_clipped_to_disc() {
        let g = grid(&GridSpec::Lattice { center: [0.0, 0.0], radius: 0.7, n: 21 }, 0);
        assert!(g.iter().all(|z| z.norm() <= 0.7 + 1e-12));
        assert!(g.len() > 300 && g.len() < 441);
        assert!(g.contains(&C64::new(0.0, 0.0)));
    }

    #[test]
    fn random_grid_is_seeded() {
        let spec = GridSpec::Random { center: [0.0, 0.0], r_min: 0.2, r_max: 0.5, n: 50 };
        assert_eq!(grid(&spec, 7), grid(&spec, 7));
        assert_ne!(grid(&spec, 7), grid(&spec, 8));
        assert!(grid(&spec, 1).iter().all(|z| (0.2..=0.5).contains(&z.norm())));
    }

    #[test]
    fn polar_grid_radii() {
        let g = grid(&GridSpec::Polar { center: [0.0, 0.0], r_min: 0.55, r_max: 0.95, n_radial: 5, n_angular: 4 }, 0);
        assert_eq!(g.len(), 20);
        assert!((g[0].norm() - 0.55).abs() < 1e-15);
        assert!((g[19].norm() - 0.95).abs() < 1e-15);
    }
}
