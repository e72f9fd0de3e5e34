//! Branch-sum operators and residual checks of the kernel transformation rules.
//!
//! For a proper map `f: D1 → D2` of multiplicity `m` with local inverses `F_k`:
//!
//! ```text
//! f'(z) K2(f(z), w) = Σ_k K1(z, F_k(w)) conj(F_k'(w))
//! ```
//!
//! and for a correspondence with forward branches `f_i` and backward branches `F_j`:
//!
//! ```text
//! Σ_i f_i'(z) K2(f_i(z), w) = Σ_j K1(z, F_j(w)) conj(F_j'(w))
//! ```
//!
//! The same identity holds for weighted kernels with `ν` on `D2` and `ν ∘ f` on
//! `D1`. Both sides are evaluated independently and compared sample by sample.

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::Shape;
use crate::{
    BranchSet, CorrespondenceModel, Error, KernelEvaluator, ProperMapModel, QuadratureRule, Result, WeightFn, C64,
};

/// Grid points closer than this to a critical value or singular locus are skipped.
pub const EXCLUSION_RADIUS: f64 = 1e-6;

/// Below this `|LHS|` the relative residual falls back to the absolute one.
pub const ABS_FALLBACK_BELOW: f64 = 1e-10;

const REL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformReport {
    pub label: String,
    pub n_samples: usize,
    pub excluded: usize,
    pub max_abs_residual: f64,
    pub max_rel_residual: f64,
    /// `max |LHS|` over evaluated samples.
    pub lhs_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleResidual {
    pub z: C64,
    pub w: C64,
    pub lhs: C64,
    pub rhs: C64,
    pub abs_residual: f64,
    pub rel_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub report: TransformReport,
    pub samples: Vec<SampleResidual>,
}

/// `|LHS − RHS| / max(|LHS|, floor)`, or the absolute residual when `|LHS|` is tiny.
pub fn relative_residual(lhs: C64, rhs: C64) -> f64 {
    let diff = (lhs - rhs).norm();
    let scale = lhs.norm();
    if scale < ABS_FALLBACK_BELOW {
        diff
    } else {
        diff / scale.max(REL_FLOOR)
    }
}

/// `Γ₁(u)(z) = Σ_i f_i'(z) · u(f_i(z))`
pub fn gamma1<U: Fn(C64) -> C64>(c: &CorrespondenceModel, u: U, z: C64) -> Result<C64> {
    Ok(branch_sum(&c.forward_branches(z)?, u))
}

/// `Γ₂(v)(w) = Σ_j F_j'(w) · v(F_j(w))`
pub fn gamma2<V: Fn(C64) -> C64>(c: &CorrespondenceModel, v: V, w: C64) -> Result<C64> {
    Ok(branch_sum(&c.backward_branches(w)?, v))
}

/// `Λ₁(u)(z) = f'(z) · u(f(z))`
pub fn lambda1<U: Fn(C64) -> C64>(f: &ProperMapModel, u: U, z: C64) -> C64 {
    f.eval_deriv(z) * u(f.eval(z))
}

/// `Λ₂(v)(w) = Σ_k F_k'(w) · v(F_k(w))`
pub fn lambda2<V: Fn(C64) -> C64>(f: &ProperMapModel, v: V, w: C64) -> Result<C64> {
    Ok(branch_sum(&f.local_inverses(w)?, v))
}

fn branch_sum<V: Fn(C64) -> C64>(branches: &BranchSet, v: V) -> C64 {
    branches.iter().map(|(p, d)| d * v(p)).sum()
}

/// The operator pair whose adjointness is being checked.
#[derive(Clone, Copy)]
pub enum Pairing<'a> {
    /// `⟨Γ₁u, v⟩₁ = ⟨u, Γ₂v⟩₂`, unweighted.
    Correspondence(&'a CorrespondenceModel),
    /// `⟨Λ₁u, v⟩_{ν∘f} = ⟨u, Λ₂v⟩_ν`.
    Map { map: &'a ProperMapModel, weight: &'a WeightFn },
}

/// `|⟨T₁u, v⟩₁ − ⟨u, T₂v⟩₂|` with `u` on `D2`, `v` on `D1`, both inner
/// products by quadrature (`rule1` on `D1`, `rule2` on `D2`).
pub fn adjoint_residual<U, V>(pairing: Pairing<'_>, u: U, v: V, rule1: &QuadratureRule, rule2: &QuadratureRule) -> Result<f64>
where
    U: Fn(C64) -> C64 + Sync,
    V: Fn(C64) -> C64 + Sync,
{
    let (lhs, rhs) = adjoint_sides(pairing, &u, &v, rule1, rule2)?;
    Ok((lhs - rhs).norm())
}

/// Both pairings `(⟨T₁u, v⟩₁, ⟨u, T₂v⟩₂)`.
pub fn adjoint_sides<U, V>(pairing: Pairing<'_>, u: &U, v: &V, rule1: &QuadratureRule, rule2: &QuadratureRule) -> Result<(C64, C64)>
where
    U: Fn(C64) -> C64 + Sync,
    V: Fn(C64) -> C64 + Sync,
{
    let weights = |rule: &QuadratureRule, nu: &dyn Fn(C64) -> f64| -> Vec<f64> {
        rule.nodes().iter().zip(rule.weights()).map(|(&z, &w)| w * nu(z)).collect()
    };
    let (w1, w2) = match pairing {
        Pairing::Correspondence(_) => (rule1.weights().to_vec(), rule2.weights().to_vec()),
        Pairing::Map { map, weight } => (
            weights(rule1, &|z| weight.eval(map.eval(z))),
            weights(rule2, &|w| weight.eval(w)),
        ),
    };
    let t1u: Vec<C64> = rule1
        .nodes()
        .par_iter()
        .map(|&z| match pairing {
            Pairing::Correspondence(c) => gamma1(c, u, z),
            Pairing::Map { map, .. } => Ok(lambda1(map, u, z)),
        })
        .collect::<Result<_>>()?;
    let t2v: Vec<C64> = rule2
        .nodes()
        .par_iter()
        .map(|&w| match pairing {
            Pairing::Correspondence(c) => gamma2(c, v, w),
            Pairing::Map { map, .. } => lambda2(map, v, w),
        })
        .collect::<Result<_>>()?;
    let lhs: C64 = rule1.nodes().iter().enumerate().map(|(q, &z)| t1u[q] * v(z).conj() * w1[q]).sum();
    let rhs: C64 = rule2.nodes().iter().enumerate().map(|(q, &w)| u(w) * t2v[q].conj() * w2[q]).sum();
    Ok((lhs, rhs))
}

/// `(⟨Γ₂v, Γ₂v⟩₂, p·q·⟨v, v⟩₁)`; the first never exceeds the second.
pub fn operator_bound_check<V>(c: &CorrespondenceModel, v: V, rule1: &QuadratureRule, rule2: &QuadratureRule) -> Result<(f64, f64)>
where
    V: Fn(C64) -> C64 + Sync,
{
    let lhs = rule2
        .nodes()
        .par_iter()
        .zip(rule2.weights())
        .map(|(&w, &wt)| Ok(gamma2(c, &v, w)?.norm_sqr() * wt))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    let rhs = (c.p() * c.q()) as f64 * rule1.integrate_real(|z| v(z).norm_sqr());
    Ok((lhs, rhs))
}

/// Ingredients of the left side at one `z`: `(coefficient, φ₂(point))` pairs.
struct ZSide {
    z: C64,
    phi1: Vec<C64>,
    terms: Vec<(C64, Vec<C64>)>,
}

/// Ingredients of the right side at one `w`: `(conj(F'), φ₁(F(w)))` pairs.
struct WSide {
    w: C64,
    phi2: Vec<C64>,
    terms: Vec<(C64, Vec<C64>)>,
}

fn near(points: &[C64], at: C64) -> bool {
    points.iter().any(|&v| (v - at).norm() <= EXCLUSION_RADIUS)
}

fn sweep(label: String, zs: Vec<Option<ZSide>>, ws: Vec<Option<WSide>>) -> Result<Verification> {
    let n_samples = zs.len() * ws.len();
    let per_w: Vec<Vec<SampleResidual>> = ws
        .par_iter()
        .map(|ws| {
            let Some(ws) = ws else { return Vec::new() };
            zs.iter()
                .flatten()
                .map(|zs| {
                    let lhs: C64 = zs.terms.iter().map(|(a, phi)| a * KernelEvaluator::pair(phi, &ws.phi2)).sum();
                    let rhs: C64 = ws.terms.iter().map(|(b, phi)| KernelEvaluator::pair(&zs.phi1, phi) * b).sum();
                    SampleResidual {
                        z: zs.z,
                        w: ws.w,
                        lhs,
                        rhs,
                        abs_residual: (lhs - rhs).norm(),
                        rel_residual: relative_residual(lhs, rhs),
                    }
                })
                .collect()
        })
        .collect();
    let samples: Vec<SampleResidual> = per_w.into_iter().flatten().collect();
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    let max = |f: fn(&SampleResidual) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let report = TransformReport {
        label,
        n_samples,
        excluded: n_samples - samples.len(),
        max_abs_residual: max(|s| s.abs_residual),
        max_rel_residual: max(|s| s.rel_residual),
        lhs_scale: max(|s| s.lhs.norm()),
    };
    Ok(Verification { report, samples })
}

fn map_sides(
    f: &ProperMapModel,
    ev1: &KernelEvaluator,
    ev2: &KernelEvaluator,
    z_grid: &[C64],
    w_grid: &[C64],
) -> (Vec<Option<ZSide>>, Vec<Option<WSide>>) {
    let zs = z_grid
        .par_iter()
        .map(|&z| {
            if !f.source().contains(z) {
                return None;
            }
            Some(ZSide { z, phi1: ev1.features(z), terms: vec![(f.eval_deriv(z), ev2.features(f.eval(z)))] })
        })
        .collect();
    let ws = w_grid
        .par_iter()
        .map(|&w| {
            if near(f.critical_values(), w) {
                return None;
            }
            let branches = f.local_inverses(w).ok()?;
            let terms = branches.iter().map(|(p, d)| (d.conj(), ev1.features(p))).collect();
            Some(WSide { w, phi2: ev2.features(w), terms })
        })
        .collect();
    (zs, ws)
}

/// Residuals of `f'(z) K2(f(z), w) = Σ_k K1(z, F_k(w)) conj(F_k'(w))`.
///
/// `ev1` is the reduced kernel on the source, `ev2` on the target. Grid points
/// outside the domains, near critical values, or with failing branch solves
/// are counted as excluded.
pub fn verify_proper(
    f: &ProperMapModel,
    ev1: &KernelEvaluator,
    ev2: &KernelEvaluator,
    z_grid: &[C64],
    w_grid: &[C64],
) -> Result<Verification> {
    let (zs, ws) = map_sides(f, ev1, ev2, z_grid, w_grid);
    sweep(format!("proper map {:?}", f.kind()), zs, ws)
}

/// Weighted version: `ev2` carries `ν` on the target and `ev1` carries `ν ∘ f`.
pub fn verify_weighted(
    f: &ProperMapModel,
    nu: &WeightFn,
    ev1: &KernelEvaluator,
    ev2: &KernelEvaluator,
    z_grid: &[C64],
    w_grid: &[C64],
) -> Result<Verification> {
    // the weights live inside the evaluators; ν only tags the report
    let (zs, ws) = map_sides(f, ev1, ev2, z_grid, w_grid);
    let label = if nu.is_constant() {
        format!("proper map {:?}", f.kind())
    } else {
        format!("weighted proper map {:?}", f.kind())
    };
    sweep(label, zs, ws)
}

/// Residuals of `Σ_i f_i'(z) K2(f_i(z), w) = Σ_j K1(z, F_j(w)) conj(F_j'(w))`.
pub fn verify_correspondence(
    c: &CorrespondenceModel,
    ev1: &KernelEvaluator,
    ev2: &KernelEvaluator,
    z_grid: &[C64],
    w_grid: &[C64],
) -> Result<Verification> {
    let zs = z_grid
        .par_iter()
        .map(|&z| {
            if !c.d1().contains(z) || near(c.v1(), z) {
                return None;
            }
            let branches = c.forward_branches(z).ok()?;
            let terms = branches.iter().map(|(p, d)| (d, ev2.features(p))).collect();
            Some(ZSide { z, phi1: ev1.features(z), terms })
        })
        .collect();
    let ws = w_grid
        .par_iter()
        .map(|&w| {
            if !c.d2().contains(w) || near(c.v2(), w) {
                return None;
            }
            let branches = c.backward_branches(w).ok()?;
            let terms = branches.iter().map(|(p, d)| (d.conj(), ev1.features(p))).collect();
            Some(WSide { w, phi2: ev2.features(w), terms })
        })
        .collect();
    sweep("correspondence".to_string(), zs, ws)
}

/// Left side `f'(z) K2(f(z), w)` at one point.
pub fn proper_lhs(f: &ProperMapModel, ev2: &KernelEvaluator, z: C64, w: C64) -> C64 {
    f.eval_deriv(z) * ev2.eval_kernel(f.eval(z), w)
}

/// Right side `Σ_k K1(z, F_k(w)) conj(F_k'(w))` at one point.
pub fn proper_rhs(f: &ProperMapModel, ev1: &KernelEvaluator, z: C64, w: C64) -> Result<C64> {
    let phi = ev1.features(z);
    Ok(f.local_inverses(w)?
        .iter()
        .map(|(p, d)| KernelEvaluator::pair(&phi, &ev1.features(p)) * d.conj())
        .sum())
}

/// Wirtinger derivatives `(∂h/∂w, ∂h/∂w̄)` from the 4-point central stencil of radius `delta`.
pub fn wirtinger<H: Fn(C64) -> C64>(h: H, w: C64, delta: f64) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let dx = (h(w + delta) - h(w - delta)) / (2.0 * delta);
    let dy = (h(w + i * delta) - h(w - i * delta)) / (2.0 * delta);
    ((dx - i * dy) * 0.5, (dx + i * dy) * 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoverOptions {
    /// Preferred probe point `w₀` in the target disc.
    pub probe: C64,
    /// Used when `probe` is within the exclusion radius of a critical value.
    pub fallback_probe: C64,
    pub stencil_radius: f64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        Self { probe: C64::new(0.0, 0.0), fallback_probe: C64::new(0.1, 0.0), stencil_radius: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveredPoint {
    pub z: C64,
    /// `None` when `|g0(z)|` was too small to divide by.
    pub estimate: Option<C64>,
    pub truth: C64,
}

impl RecoveredPoint {
    pub fn error(&self) -> Option<f64> {
        self.estimate.map(|g| (g - self.truth).norm())
    }
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub probe: C64,
    pub points: Vec<RecoveredPoint>,
    pub sup_error: f64,
    pub excluded: usize,
}

/// Reconstructs `f` from kernel data on its source, for a proper map onto the unit disc.
///
/// With `h(w) = Σ_k K̃(z, F_k(w)) conj(F_k'(w))` and the disc kernel on the
/// target, `g0 = h(w₀)` and `g1 = ∂h/∂w̄ (w₀)` satisfy
/// `g1 / g0 = 2f(z) / (1 − f(z) conj(w₀))`, hence
/// `f(z) = R / (2 + R conj(w₀))` with `R = g1 / g0`. At `w₀ = 0` this is `g1 / (2 g0)`.
pub fn recover_map(f: &ProperMapModel, ev: &KernelEvaluator, z_grid: &[C64], opts: RecoverOptions) -> Result<Recovery> {
    match *f.target().shape() {
        Shape::Disc { center, radius } if center == C64::new(0.0, 0.0) && radius == 1.0 => {}
        _ => return Err(Error::InvalidArgument("map recovery needs the unit disc as target".into())),
    }
    if !(opts.stencil_radius > 0.0) {
        return Err(Error::InvalidArgument("stencil radius must be > 0".into()));
    }
    let is_regular = |w: C64| f.nearest_critical_value(w).is_none_or(|(_, d)| d > EXCLUSION_RADIUS);
    let probe = if is_regular(opts.probe) {
        opts.probe
    } else if is_regular(opts.fallback_probe) {
        opts.fallback_probe
    } else {
        let (critical, distance) = f.nearest_critical_value(opts.fallback_probe).expect("critical set is non-empty");
        return Err(Error::NearCritical { at: opts.fallback_probe, critical, distance });
    };

    let d = opts.stencil_radius;
    let i = C64::new(0.0, 1.0);
    let stencil = [probe, probe + d, probe - d, probe + i * d, probe - i * d];
    // (conj(F'), φ(F)) for every branch at every stencil point
    let branch_features: Vec<Vec<(C64, Vec<C64>)>> = stencil
        .iter()
        .map(|&w| {
            Ok(f.local_inverses(w)?
                .iter()
                .map(|(p, dp)| (dp.conj(), ev.features(p)))
                .collect())
        })
        .collect::<Result<_>>()?;

    let points: Vec<RecoveredPoint> = z_grid
        .par_iter()
        .map(|&z| {
            let phi = ev.features(z);
            let h: Vec<C64> = branch_features
                .iter()
                .map(|terms| terms.iter().map(|(b, phi_f)| KernelEvaluator::pair(&phi, phi_f) * b).sum())
                .collect();
            let g0 = h[0];
            let dx = (h[1] - h[2]) / (2.0 * d);
            let dy = (h[3] - h[4]) / (2.0 * d);
            let g1 = (dx + i * dy) * 0.5;
            let estimate = if g0.norm() < 1e-12 {
                None
            } else {
                let r = g1 / g0;
                Some(r / (2.0 + r * probe.conj()))
            };
            RecoveredPoint { z, estimate, truth: f.eval(z) }
        })
        .collect();
    let excluded = points.iter().filter(|p| p.estimate.is_none()).count();
    if excluded == points.len() {
        return Err(Error::NoSamples);
    }
    let sup_error = points.iter().filter_map(RecoveredPoint::error).fold(0.0, f64::max);
    Ok(Recovery { probe, points, sup_error, excluded })
}
