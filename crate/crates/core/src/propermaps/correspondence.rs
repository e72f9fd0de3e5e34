use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{dedup_points, BranchSet, Poly, BOUNDARY_MARGIN, NEAR_SINGULAR};
use crate::geometry::Location;
use crate::{ensure_finite, Error, PlanarDomain, Result, C64};

/// Bivariate polynomial `Q(z, w) = Σ a[i][j] z^i w^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly {
    /// `coeffs[i][j]` multiplies `z^i w^j`.
    coeffs: Vec<Vec<C64>>,
}

impl BiPoly {
    /// Builds from `(deg_z, deg_w, coefficient)` triples; repeated indices add up.
    pub fn from_terms(terms: &[(usize, usize, C64)]) -> Self {
        let dz = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let dw = terms.iter().map(|t| t.1).max().unwrap_or(0);
        let mut coeffs = vec![vec![C64::new(0.0, 0.0); dw + 1]; dz + 1];
        for &(i, j, c) in terms {
            coeffs[i][j] += c;
        }
        Self { coeffs }
    }

    pub fn coeff(&self, i: usize, j: usize) -> C64 {
        self.coeffs.get(i).and_then(|row| row.get(j)).copied().unwrap_or_default()
    }

    fn nonzero(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &c)| (i, j, c)))
            .filter(|t| t.2 != C64::new(0.0, 0.0))
    }

    pub fn deg_z(&self) -> usize {
        self.nonzero().map(|t| t.0).max().unwrap_or(0)
    }

    pub fn deg_w(&self) -> usize {
        self.nonzero().map(|t| t.1).max().unwrap_or(0)
    }

    pub fn eval(&self, z: C64, w: C64) -> C64 {
        self.nonzero().map(|(i, j, c)| c * z.powu(i as u32) * w.powu(j as u32)).sum()
    }

    pub fn d_dz(&self, z: C64, w: C64) -> C64 {
        self.nonzero()
            .filter(|t| t.0 > 0)
            .map(|(i, j, c)| c * i as f64 * z.powu(i as u32 - 1) * w.powu(j as u32))
            .sum()
    }

    pub fn d_dw(&self, z: C64, w: C64) -> C64 {
        self.nonzero()
            .filter(|t| t.1 > 0)
            .map(|(i, j, c)| c * j as f64 * z.powu(i as u32) * w.powu(j as u32 - 1))
            .sum()
    }

    /// Coefficients of `Q(z, ·)` up to the formal degree `deg_w`.
    pub fn coeffs_in_w(&self, z: C64) -> Vec<C64> {
        (0..=self.deg_w())
            .map(|j| (0..self.coeffs.len()).map(|i| self.coeff(i, j) * z.powu(i as u32)).sum())
            .collect()
    }

    /// Coefficients of `Q(·, w)` up to the formal degree `deg_z`.
    pub fn coeffs_in_z(&self, w: C64) -> Vec<C64> {
        (0..=self.deg_z())
            .map(|i| {
                let row = self.coeffs.get(i).map(|r| r.len()).unwrap_or(0);
                (0..row).map(|j| self.coeff(i, j) * w.powu(j as u32)).sum()
            })
            .collect()
    }

    /// Swaps the roles of `z` and `w`.
    pub fn transposed(&self) -> BiPoly {
        let terms: Vec<_> = self.nonzero().map(|(i, j, c)| (j, i, c)).collect();
        BiPoly::from_terms(&terms)
    }
}

/// Determinant of the Sylvester matrix of `a` (degree `p`) and its derivative.
fn discriminant_at(a: &[C64]) -> Result<C64> {
    let p = a.len() - 1;
    let b: Vec<C64> = a.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect();
    let n = 2 * p - 1;
    let mut m = DMatrix::<C64>::zeros(n, n);
    // rows hold coefficients highest degree first
    for r in 0..p - 1 {
        for (k, &c) in a.iter().rev().enumerate() {
            m[(r, r + k)] = c;
        }
    }
    for r in 0..p {
        for (k, &c) in b.iter().rev().enumerate() {
            m[(p - 1 + r, r + k)] = c;
        }
    }
    let det = m.lu().determinant();
    ensure_finite(det, "discriminant")?;
    Ok(det)
}

/// Points of `domain` where `Q(t, ·)` (in the other variable) has a repeated
/// root or drops degree. `coeffs_at(t)` gives the formal coefficient vector.
fn singular_locus(
    coeffs_at: impl Fn(C64) -> Vec<C64>,
    param_degree: usize,
    domain: &PlanarDomain,
) -> Result<Vec<C64>> {
    let formal = coeffs_at(C64::new(0.0, 0.0)).len() - 1;
    let mut candidates = Vec::new();

    // leading coefficient as a polynomial in t, by interpolation
    let interpolate = |f: &dyn Fn(C64) -> Result<C64>, degree: usize| -> Result<Poly> {
        let n = degree + 1;
        let rho = domain.outer_radius().max(1e-3);
        let samples = (0..n)
            .map(|k| f(C64::from_polar(rho, TAU * k as f64 / n as f64)))
            .collect::<Result<Vec<_>>>()?;
        let mut coeffs: Vec<C64> = (0..n)
            .map(|j| {
                let s: C64 = samples
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| v * C64::from_polar(1.0, -TAU * (j * k) as f64 / n as f64))
                    .sum();
                s / n as f64
            })
            .collect();
        // coefficient j currently carries rho^j
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c = if c.norm() <= 1e-12 * scale { C64::new(0.0, 0.0) } else { *c / rho.powi(j as i32) };
        }
        Ok(Poly::new(coeffs))
    };

    let lead = interpolate(&|t| Ok(coeffs_at(t)[formal]), param_degree)?;
    if lead.is_zero() {
        return Err(Error::InvalidArgument("leading coefficient vanishes identically".into()));
    }
    candidates.extend(lead.roots()?);

    if formal >= 2 {
        let disc = interpolate(&|t| discriminant_at(&coeffs_at(t)), (2 * formal - 1) * param_degree)?;
        if disc.is_zero() {
            return Err(Error::InvalidArgument(
                "discriminant vanishes identically (repeated factor in Q)".into(),
            ));
        }
        candidates.extend(disc.roots()?);
    }
    Ok(dedup_points(candidates.into_iter().filter(|&t| domain.contains(t)).collect(), 1e-9))
}

/// Proper holomorphic correspondence given by the zero set of `Q` in `D1 × D2`.
#[derive(Debug, Clone)]
pub struct CorrespondenceModel {
    q: BiPoly,
    qt: BiPoly,
    d1: Arc<PlanarDomain>,
    d2: Arc<PlanarDomain>,
    p: usize,
    q_count: usize,
    v1: Vec<C64>,
    v2: Vec<C64>,
}

impl CorrespondenceModel {
    pub fn new(q: BiPoly, d1: Arc<PlanarDomain>, d2: Arc<PlanarDomain>) -> Result<Self> {
        let p = q.deg_w();
        let q_count = q.deg_z();
        if p == 0 || q_count == 0 {
            return Err(Error::InvalidArgument(format!(
                "Q must involve both variables (deg_z = {q_count}, deg_w = {p})"
            )));
        }
        for (i, j, c) in q.nonzero() {
            ensure_finite(c, &format!("Q coefficient ({i}, {j})"))?;
        }
        let qt = q.transposed();
        let v1 = singular_locus(|z| q.coeffs_in_w(z), q_count, &d1)?;
        let v2 = singular_locus(|w| qt.coeffs_in_w(w), p, &d2)?;
        Ok(Self { q, qt, d1, d2, p, q_count, v1, v2 })
    }

    pub fn poly(&self) -> &BiPoly {
        &self.q
    }

    pub fn d1(&self) -> &Arc<PlanarDomain> {
        &self.d1
    }

    pub fn d2(&self) -> &Arc<PlanarDomain> {
        &self.d2
    }

    /// Number of forward branches `f_i`.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of backward branches `F_j`.
    pub fn q(&self) -> usize {
        self.q_count
    }

    pub fn v1(&self) -> &[C64] {
        &self.v1
    }

    pub fn v2(&self) -> &[C64] {
        &self.v2
    }

    /// Roots `w_i` of `Q(z, ·)` in `D2`, with `f_i'(z) = −Q_z / Q_w`.
    pub fn forward_branches(&self, z: C64) -> Result<BranchSet> {
        let roots = solve_branches(z, self.q.coeffs_in_w(z), &self.v1, &self.d2, self.p)?;
        let derivatives = roots
            .iter()
            .map(|&w| implicit_derivative(z, self.q.d_dz(z, w), self.q.d_dw(z, w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BranchSet { points: roots, derivatives })
    }

    /// Roots `z_j` of `Q(·, w)` in `D1`, with `F_j'(w) = −Q_w / Q_z`.
    pub fn backward_branches(&self, w: C64) -> Result<BranchSet> {
        let roots = solve_branches(w, self.qt.coeffs_in_w(w), &self.v2, &self.d1, self.q_count)?;
        let derivatives = roots
            .iter()
            .map(|&z| implicit_derivative(w, self.q.d_dw(z, w), self.q.d_dz(z, w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BranchSet { points: roots, derivatives })
    }
}

fn implicit_derivative(at: C64, numerator: C64, denominator: C64) -> Result<C64> {
    if denominator.norm() == 0.0 {
        return Err(Error::SingularLocus { at, reason: "vanishing partial derivative".into() });
    }
    Ok(-numerator / denominator)
}

fn solve_branches(at: C64, coeffs: Vec<C64>, locus: &[C64], domain: &PlanarDomain, expected: usize) -> Result<Vec<C64>> {
    ensure_finite(at, "branch query")?;
    if let Some(&v) = locus.iter().find(|&&v| (v - at).norm() <= NEAR_SINGULAR) {
        return Err(Error::SingularLocus { at, reason: format!("within {NEAR_SINGULAR:e} of {v}") });
    }
    let mut roots = Vec::new();
    for r in Poly::new(coeffs).roots()? {
        match domain.locate(r, BOUNDARY_MARGIN) {
            Location::Inside => roots.push(r),
            Location::Boundary => return Err(Error::BranchCount { at, expected, found: vec![r] }),
            Location::Outside => {}
        }
    }
    if roots.len() != expected {
        return Err(Error::BranchCount { at, expected, found: roots });
    }
    for (i, a) in roots.iter().enumerate() {
        if roots[i + 1..].iter().any(|b| (a - b).norm() <= NEAR_SINGULAR) {
            return Err(Error::SingularLocus { at, reason: "colliding branches".into() });
        }
    }
    Ok(roots)
}
