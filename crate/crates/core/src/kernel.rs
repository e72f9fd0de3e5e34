//! Gram matrices, orthonormalization, and reproducing-kernel evaluation.
//!
//! The kernel of the span of a raw basis under the discrete inner product
//! `⟨f, g⟩_ν = Σ_q w_q f(z_q) conj(g(z_q)) ν(z_q)` is `Σ_k φ_k(z) conj(φ_k(w))`
//! for any orthonormal system `φ_k` of that span. We obtain `φ_k` from a
//! pivoted Cholesky factorization of the diagonally equilibrated Gram matrix.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::{ensure_finite, Error, QuadratureRule, RawBasis, Result, WeightFn, C64};

/// Hermitian Gram matrix `G[i][j] = ⟨e_i, e_j⟩_ν`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: DMatrix<C64>,
}

impl GramMatrix {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }
}

/// Raw basis values at every node, rows = nodes.
fn sample_basis(basis: &RawBasis, nodes: &[C64]) -> Result<DMatrix<C64>> {
    let rows: Vec<Vec<C64>> = nodes.par_iter().map(|&z| basis.eval_all(z)).collect();
    let n = basis.len();
    let mut values = DMatrix::<C64>::zeros(nodes.len(), n);
    for (q, row) in rows.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Evaluation { element: basis.elements()[i].to_string(), node: nodes[q] });
            }
            values[(q, i)] = v;
        }
    }
    Ok(values)
}

fn node_weights(rule: &QuadratureRule, nu: &WeightFn) -> Result<Vec<f64>> {
    nu.check_positive(rule.nodes())?;
    Ok(rule.nodes().iter().zip(rule.weights()).map(|(&z, &w)| w * nu.eval(z)).collect())
}

fn hermitian_part(m: DMatrix<C64>) -> DMatrix<C64> {
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn gram_matrix(basis: &RawBasis, rule: &QuadratureRule, nu: &WeightFn) -> Result<GramMatrix> {
    let values = sample_basis(basis, rule.nodes())?;
    let w = node_weights(rule, nu)?;
    Ok(GramMatrix { entries: gram_from_samples(&values, &w) })
}

fn gram_from_samples(values: &DMatrix<C64>, w: &[f64]) -> DMatrix<C64> {
    let mut weighted = values.map(|v| v.conj());
    for (q, &wq) in w.iter().enumerate() {
        weighted.row_mut(q).scale_mut(wq);
    }
    hermitian_part(values.transpose() * weighted)
}

/// Orthonormal system `φ_k = Σ_j coeffs[k][j] · raw_j` for the span of a raw basis.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    raw: RawBasis,
    coeffs: DMatrix<C64>,
    pivots: Vec<usize>,
    pivot_values: Vec<f64>,
    gram_condition: f64,
}

impl OrthonormalBasis {
    pub fn raw(&self) -> &RawBasis {
        &self.raw
    }

    /// `retained_count × raw.len()`; lower triangular when columns are taken
    /// in pivot order.
    pub fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }

    /// Raw indices of retained elements, in pivot order.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Schur-complement pivots of the equilibrated Gram matrix.
    pub fn pivot_values(&self) -> &[f64] {
        &self.pivot_values
    }

    pub fn retained_count(&self) -> usize {
        self.pivots.len()
    }

    pub fn gram_condition(&self) -> f64 {
        self.gram_condition
    }

    fn combine(&self, raw_values: &[C64]) -> Vec<C64> {
        (0..self.coeffs.nrows())
            .map(|k| self.coeffs.row(k).iter().zip(raw_values).map(|(&c, &v)| c * v).sum())
            .collect()
    }

    /// `φ_k(z)` for every retained `k`.
    pub fn eval(&self, z: C64) -> Vec<C64> {
        self.combine(&self.raw.eval_all(z))
    }

    pub fn eval_deriv(&self, z: C64, order: u32) -> Vec<C64> {
        let raw: Vec<C64> = self.raw.elements().iter().map(|e| e.deriv(z, order)).collect();
        self.combine(&raw)
    }

    /// Analytic primitives `Φ_k(z)`; fails if a contributing element has no primitive.
    pub fn primitive(&self, z: C64) -> Result<Vec<C64>> {
        let mut raw = Vec::with_capacity(self.raw.len());
        for (j, e) in self.raw.elements().iter().enumerate() {
            match e.primitive(z) {
                Some(p) => raw.push(p),
                None => {
                    if self.coeffs.column(j).iter().any(|c| c.norm() != 0.0) {
                        return Err(Error::ContractViolation(format!(
                            "basis element {e} has no single-valued primitive"
                        )));
                    }
                    raw.push(C64::new(0.0, 0.0));
                }
            }
        }
        Ok(self.combine(&raw))
    }
}

/// Pivoted Cholesky on the equilibrated Gram matrix. Elements whose pivot
/// falls below `drop_tol · max pivot` are dropped.
pub fn orthonormalize(basis: &RawBasis, rule: &QuadratureRule, nu: &WeightFn, drop_tol: f64) -> Result<OrthonormalBasis> {
    let gram = gram_matrix(basis, rule, nu)?;
    orthonormalize_gram(basis, &gram, drop_tol)
}

pub fn orthonormalize_gram(basis: &RawBasis, gram: &GramMatrix, drop_tol: f64) -> Result<OrthonormalBasis> {
    if !(drop_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("drop_tol must be > 0, got {drop_tol}")));
    }
    let n = gram.dim();
    if n == 0 {
        return Err(Error::DegenerateBasis);
    }
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = gram.get(i, i).re;
            if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }
        })
        .collect();
    let a = DMatrix::from_fn(n, n, |i, j| gram.get(i, j) * (scale[i] * scale[j]));

    let mut l = DMatrix::<C64>::zeros(n, n);
    let mut diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    let mut pivot_values = Vec::new();
    let mut max_pivot = 0.0;
    for k in 0..n {
        let (slot, &j) = remaining
            .iter()
            .enumerate()
            .max_by(|x, y| diag[*x.1].total_cmp(&diag[*y.1]).then(y.1.cmp(x.1)))
            .expect("remaining is non-empty");
        let d = diag[j];
        if k == 0 {
            max_pivot = d;
        }
        if !(d > drop_tol * max_pivot) || !(d > 0.0) {
            break;
        }
        remaining.swap_remove(slot);
        remaining.sort_unstable();
        let root = d.sqrt();
        l[(j, k)] = C64::new(root, 0.0);
        for &i in &remaining {
            let mut s = a[(i, j)];
            for t in 0..k {
                s -= l[(i, t)] * l[(j, t)].conj();
            }
            let v = s / root;
            l[(i, k)] = v;
            diag[i] -= v.norm_sqr();
        }
        pivots.push(j);
        pivot_values.push(d);
    }
    if pivots.is_empty() {
        return Err(Error::DegenerateBasis);
    }
    let r = pivots.len();
    let lp = DMatrix::from_fn(r, r, |k, t| l[(pivots[k], t)]);
    let inv = lp
        .solve_lower_triangular(&DMatrix::identity(r, r))
        .ok_or_else(|| Error::NumericalFailure("singular triangular factor".into()))?;
    let mut coeffs = DMatrix::<C64>::zeros(r, n);
    for k in 0..=r - 1 {
        for t in 0..=k {
            coeffs[(k, pivots[t])] = inv[(k, t)] * scale[pivots[t]];
        }
    }
    let min_pivot = pivot_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OrthonormalBasis {
        raw: basis.clone(),
        coeffs,
        pivots,
        pivot_values,
        gram_condition: max_pivot / min_pivot,
    })
}

/// Reproducing kernel of the span of an orthonormal basis, with the rule and
/// weight that define its inner product.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    onb: OrthonormalBasis,
    rule: QuadratureRule,
    weight: WeightFn,
    /// `φ_k` at every node, rows = nodes.
    node_features: DMatrix<C64>,
    /// `w_q · ν(z_q)`
    node_weights: Vec<f64>,
}

impl KernelEvaluator {
    pub fn new(basis: &RawBasis, rule: QuadratureRule, weight: WeightFn, drop_tol: f64) -> Result<Self> {
        let values = sample_basis(basis, rule.nodes())?;
        let node_weights = node_weights(&rule, &weight)?;
        let gram = GramMatrix { entries: gram_from_samples(&values, &node_weights) };
        let onb = orthonormalize_gram(basis, &gram, drop_tol)?;
        let node_features = values * onb.coeffs.transpose();
        Ok(Self { onb, rule, weight, node_features, node_weights })
    }

    pub fn onb(&self) -> &OrthonormalBasis {
        &self.onb
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn weight(&self) -> &WeightFn {
        &self.weight
    }

    /// `w_q · ν(z_q)` at every node.
    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// `φ_k(z)`; the building block for batched kernel sweeps.
    pub fn features(&self, z: C64) -> Vec<C64> {
        self.onb.eval(z)
    }

    /// `Σ_k a_k · conj(b_k)`
    pub fn pair(a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(&x, &y)| x * y.conj()).sum()
    }

    /// `K(z, w) = Σ_k φ_k(z) · conj(φ_k(w))`
    pub fn eval_kernel(&self, z: C64, w: C64) -> C64 {
        Self::pair(&self.features(z), &self.features(w))
    }

    /// `∂^β/∂w̄^β K(z, w)`, differentiating the conjugated factor analytically.
    pub fn eval_kernel_dbar(&self, z: C64, w: C64, beta: u32) -> C64 {
        Self::pair(&self.features(z), &self.onb.eval_deriv(w, beta))
    }

    /// `Σ_q w_q f(z_q) conj(K(z_q, ζ)) ν(z_q)` for samples of `f` at the nodes.
    pub fn reproduce(&self, f_samples: &[C64], zeta: C64) -> Result<C64> {
        if f_samples.len() != self.rule.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                self.rule.len(),
                f_samples.len()
            )));
        }
        let k = self.node_kernel_column(zeta);
        Ok((0..self.rule.len()).map(|q| f_samples[q] * k[q].conj() * self.node_weights[q]).sum())
    }

    /// `K(z_q, ζ)` at every node.
    fn node_kernel_column(&self, zeta: C64) -> DVector<C64> {
        let phi = DVector::from_iterator(self.onb.retained_count(), self.features(zeta).into_iter().map(|v| v.conj()));
        &self.node_features * phi
    }

    /// Values of `f` at the quadrature nodes.
    pub fn sample<F: Fn(C64) -> C64>(&self, f: F) -> Vec<C64> {
        self.rule.nodes().iter().map(|&z| f(z)).collect()
    }

    /// `|K(z, ζ) − ∫ K(ξ, ζ) conj(K(ξ, z)) ν(ξ) dA(ξ)|` with the discrete integral.
    pub fn self_reproduction_residual(&self, z: C64, zeta: C64) -> f64 {
        let k_zeta = self.node_kernel_column(zeta);
        let k_z = self.node_kernel_column(z);
        let integral: C64 = (0..self.rule.len()).map(|q| k_zeta[q] * k_z[q].conj() * self.node_weights[q]).sum();
        (self.eval_kernel(z, zeta) - integral).norm()
    }

    /// `max |⟨φ_i, φ_j⟩ − δ_ij|` under the evaluator's own discrete inner product.
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = gram_from_samples(&self.node_features, &self.node_weights);
        let r = gram.nrows();
        (0..r)
            .flat_map(|i| (0..r).map(move |j| (i, j)))
            .map(|(i, j)| {
                let target = if i == j { 1.0 } else { 0.0 };
                (gram[(i, j)] - target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Primitive `M(z, ξ)` of `K(·, ξ)` normalized by `M(ξ, ξ) = 0`.
    pub fn sakai_primitive(&self, xi: C64, z: C64) -> Result<C64> {
        ensure_finite(xi, "xi")?;
        ensure_finite(z, "z")?;
        let phi_xi = self.features(xi);
        let big_z = self.onb.primitive(z)?;
        let big_xi = self.onb.primitive(xi)?;
        Ok(Self::pair(&big_z, &phi_xi) - Self::pair(&big_xi, &phi_xi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_annulus_quadrature, build_disc_quadrature};
    use crate::holobasis::{laurent_basis, monomial_basis, reduced_filter, RawBasisElement};
    use crate::DEFAULT_DROP_TOL;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn origin() -> C64 {
        c(0.0, 0.0)
    }

    // closed-form oracles, independent of the orthonormalization path
    fn disc_kernel(z: C64, w: C64) -> C64 {
        let d = C64::new(1.0, 0.0) - z * w.conj();
        C64::new(1.0 / PI, 0.0) / (d * d)
    }

    fn annulus_series(z: C64, w: C64, r: f64, n_min: i32, n_max: i32, skip_residue: bool) -> C64 {
        let x = z * w.conj();
        (n_min..=n_max)
            .filter(|&n| !(skip_residue && n == -1))
            .map(|n| {
                let norm2 = if n == -1 {
                    2.0 * PI * (1.0 / r).ln()
                } else {
                    PI * (1.0 - r.powi(2 * n + 2)) / (n + 1) as f64
                };
                x.powi(n) / norm2
            })
            .sum()
    }

    fn disc_setup(degree: u32, nr: usize, na: usize, nu: WeightFn) -> KernelEvaluator {
        let rule = build_disc_quadrature(origin(), 1.0, nr, na).unwrap();
        let basis = monomial_basis(rule.domain().clone(), origin(), degree).unwrap();
        KernelEvaluator::new(&basis, rule, nu, DEFAULT_DROP_TOL).unwrap()
    }

    fn annulus_setup(n_min: i32, n_max: i32, reduced: bool) -> KernelEvaluator {
        let rule = build_annulus_quadrature(origin(), 0.5, 1.0, 40, 2 * (n_max - n_min + 1) as usize + 8).unwrap();
        let raw = laurent_basis(rule.domain().clone(), origin(), n_min, n_max).unwrap();
        let basis = if reduced { reduced_filter(&raw) } else { raw };
        KernelEvaluator::new(&basis, rule, WeightFn::Constant, DEFAULT_DROP_TOL).unwrap()
    }

    #[test]
    fn gram_of_low_monomials() {
        let rule = build_disc_quadrature(origin(), 1.0, 10, 20).unwrap();
        let basis = monomial_basis(rule.domain().clone(), origin(), 1).unwrap();
        let g = gram_matrix(&basis, &rule, &WeightFn::Constant).unwrap();
        assert!((g.get(0, 0) - PI).norm() < 1e-12);
        assert!((g.get(1, 1) - PI / 2.0).norm() < 1e-12);
        assert!(g.get(0, 1).norm() < 1e-13);

        let weighted = gram_matrix(&basis, &rule, &WeightFn::power(1.0, origin()).unwrap()).unwrap();
        assert!((weighted.get(0, 0) - PI / 2.0).norm() < 1e-12);
        assert!((weighted.get(1, 1) - PI / 3.0).norm() < 1e-12);

        for i in 0..2 {
            assert!(g.get(i, i).re > 0.0);
            for j in 0..2 {
                assert!((g.get(i, j) - g.get(j, i).conj()).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn gram_of_residue_term_on_annulus() {
        let rule = build_annulus_quadrature(origin(), 0.5, 1.0, 40, 80).unwrap();
        let basis = laurent_basis(rule.domain().clone(), origin(), -1, -1).unwrap();
        let g = gram_matrix(&basis, &rule, &WeightFn::Constant).unwrap();
        assert!((g.get(0, 0).re - 2.0 * PI * 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn non_finite_basis_value_is_reported() {
        let rule = build_disc_quadrature(origin(), 1.0, 4, 4).unwrap();
        // pole at a quadrature node
        let node = rule.nodes()[0];
        let bad = RawBasis::new(
            rule.domain().clone(),
            vec![laurent_basis(Arc::new(crate::PlanarDomain::disc(c(5.0, 0.0), 1.0).unwrap()), node, -1, -1)
                .unwrap()
                .elements()[0]
                .clone()],
        );
        assert!(matches!(gram_matrix(&bad, &rule, &WeightFn::Constant), Err(Error::Evaluation { .. })));
    }

    #[test]
    fn disc_orthonormal_basis_is_scaled_monomials() {
        let ev = disc_setup(12, 20, 40, WeightFn::Constant);
        let onb = ev.onb();
        assert_eq!(onb.retained_count(), 13);
        for (k, &j) in onb.pivots().iter().enumerate() {
            let n = ev.onb().raw().elements()[j].exponent();
            let expected = ((n + 1) as f64 / PI).sqrt();
            assert!((onb.coeffs()[(k, j)].norm() - expected).abs() < 1e-8);
        }
        assert!(ev.orthonormality_residual() < 1e-8);
    }

    #[test]
    fn duplicate_element_is_dropped() {
        let rule = build_disc_quadrature(origin(), 1.0, 10, 20).unwrap();
        let basis = monomial_basis(rule.domain().clone(), origin(), 4).unwrap();
        let mut elements: Vec<RawBasisElement> = basis.elements().to_vec();
        elements.push(elements[2].clone());
        let dup = basis.with_elements(elements);
        let onb = orthonormalize(&dup, &rule, &WeightFn::Constant, DEFAULT_DROP_TOL).unwrap();
        assert_eq!(onb.retained_count(), dup.len() - 1);
    }

    #[test]
    fn degenerate_inputs() {
        let rule = build_disc_quadrature(origin(), 1.0, 4, 4).unwrap();
        let empty = RawBasis::new(rule.domain().clone(), vec![]);
        assert!(matches!(orthonormalize(&empty, &rule, &WeightFn::Constant, 1e-10), Err(Error::DegenerateBasis)));
        let basis = monomial_basis(rule.domain().clone(), origin(), 2).unwrap();
        assert!(orthonormalize(&basis, &rule, &WeightFn::Constant, 0.0).is_err());
    }

    #[test]
    fn reduced_annulus_basis_keeps_everything() {
        let ev = annulus_setup(-8, 8, true);
        assert_eq!(ev.onb().retained_count(), 16);
        assert!(ev.orthonormality_residual() < 1e-8);
    }

    #[test]
    fn disc_kernel_values() {
        let ev = disc_setup(40, 40, 160, WeightFn::Constant);
        assert!((ev.eval_kernel(origin(), origin()) - 1.0 / PI).norm() < 1e-8);
        let half = c(0.5, 0.0);
        assert!((ev.eval_kernel(half, half) - 1.0 / (PI * 0.5625)).norm() < 1e-6);
        for &(z, w) in &[(c(0.3, 0.2), c(-0.5, 0.4)), (c(0.6, -0.3), c(0.1, 0.65))] {
            let k = ev.eval_kernel(z, w);
            assert!((k - disc_kernel(z, w)).norm() / disc_kernel(z, w).norm() < 1e-6);
            assert_eq!(k, ev.eval_kernel(w, z).conj());
        }
    }

    #[test]
    fn weighted_disc_kernel_at_origin() {
        let ev = disc_setup(40, 40, 160, WeightFn::power(1.0, origin()).unwrap());
        assert!((ev.eval_kernel(origin(), origin()) - 2.0 / PI).norm() < 1e-6);
        let (z, w) = (c(0.4, 0.1), c(-0.2, 0.5));
        let x = z * w.conj();
        let one = C64::new(1.0, 0.0);
        let oracle = (2.0 - x) / ((one - x) * (one - x) * PI);
        assert!((ev.eval_kernel(z, w) - oracle).norm() < 1e-6 * oracle.norm());
    }

    #[test]
    fn dbar_derivatives() {
        let ev = disc_setup(40, 40, 160, WeightFn::Constant);
        let z = c(0.35, -0.2);
        let w = c(-0.1, 0.3);
        assert_eq!(ev.eval_kernel_dbar(z, w, 0), ev.eval_kernel(z, w));
        for &z in &[c(0.7, 0.0), c(0.2, 0.5), c(-0.4, -0.4)] {
            let d = ev.eval_kernel_dbar(z, origin(), 1);
            assert!((d - 2.0 * z / PI).norm() < 1e-6);
        }
        // ∂/∂w̄ K(z, w) = conj(∂/∂w K(w, z)), the latter by finite differences in the first slot
        let h = 1e-5;
        let fd = (ev.eval_kernel(w + h, z) - ev.eval_kernel(w - h, z)) / (2.0 * h);
        let d = ev.eval_kernel_dbar(z, w, 1);
        assert!((d - fd.conj()).norm() < 1e-5 * d.norm());
    }

    #[test]
    fn reproducing_property() {
        let ev = disc_setup(20, 24, 60, WeightFn::Constant);
        let k = 3;
        let phi3 = ev.sample(|z| ev.features(z)[k]);
        let zeta = c(0.4, 0.0);
        assert!((ev.reproduce(&phi3, zeta).unwrap() - ev.features(zeta)[k]).norm() < 1e-6);
        let ones = ev.sample(|_| c(1.0, 0.0));
        assert!((ev.reproduce(&ones, c(0.2, 0.1)).unwrap() - 1.0).norm() < 1e-6);
        assert!(ev.reproduce(&ones[1..], zeta).is_err());
    }

    #[test]
    fn residue_term_projects_to_zero_on_reduced_space() {
        let ev = annulus_setup(-6, 6, true);
        let f = ev.sample(|z| z.inv());
        let zeta = c(0.7, 0.2);
        // z^-1 is orthogonal to every other Laurent monomial, so its projection vanishes
        let projected = ev.reproduce(&f, zeta).unwrap();
        assert!(projected.norm() < 1e-8);
        assert!((projected - zeta.inv()).norm() > 1.0);
    }

    #[test]
    fn self_reproduction() {
        let disc = disc_setup(40, 40, 160, WeightFn::Constant);
        assert!(disc.self_reproduction_residual(c(0.3, 0.0), c(0.5, 0.0)) < 1e-8);
        let ann = annulus_setup(-10, 10, true);
        assert!(ann.self_reproduction_residual(c(0.7, 0.0), c(0.6, 0.0)) < 1e-8);
        let weighted = disc_setup(30, 32, 80, WeightFn::power(1.0, origin()).unwrap());
        assert!(weighted.self_reproduction_residual(c(0.2, 0.0), c(0.0, 0.4)) < 1e-8);
    }

    #[test]
    fn annulus_reduced_kernel_matches_series() {
        let ev = annulus_setup(-10, 10, true);
        for &(z, w) in &[(c(0.6, 0.1), c(0.7, -0.3)), (c(-0.9, 0.0), c(0.0, 0.56))] {
            let oracle = annulus_series(z, w, 0.5, -10, 10, true);
            assert!((ev.eval_kernel(z, w) - oracle).norm() < 1e-8 * oracle.norm());
        }
    }

    #[test]
    fn sakai_primitive_properties() {
        let ev = disc_setup(20, 24, 60, WeightFn::Constant);
        let xi = c(0.3, 0.0);
        assert_eq!(ev.sakai_primitive(xi, xi).unwrap(), origin());
        let z = c(-0.2, 0.45);
        let h = 1e-6;
        let fd = (ev.sakai_primitive(xi, z + h).unwrap() - ev.sakai_primitive(xi, z - h).unwrap()) / (2.0 * h);
        assert!((fd - ev.eval_kernel(z, xi)).norm() < 1e-6 * ev.eval_kernel(z, xi).norm());

        let ann = annulus_setup(-4, 4, false);
        assert!(matches!(ann.sakai_primitive(c(0.7, 0.0), c(0.8, 0.0)), Err(Error::ContractViolation(_))));
        let reduced = annulus_setup(-4, 4, true);
        assert!(reduced.sakai_primitive(c(0.7, 0.0), c(-0.8, 0.1)).is_ok());
    }

    #[test]
    fn diagonal_positive_and_monotone_in_degree() {
        let zeta = c(0.55, -0.3);
        let mut last = 0.0;
        for degree in [2, 5, 10, 20] {
            let ev = disc_setup(degree, 24, 64, WeightFn::Constant);
            let k = ev.eval_kernel(zeta, zeta);
            assert!(k.re > 0.0 && k.im == 0.0);
            assert!(k.re >= last);
            last = k.re;
        }
    }
}
