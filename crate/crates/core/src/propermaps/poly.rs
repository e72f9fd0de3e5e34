use nalgebra::DMatrix;

use crate::{Error, Result, C64};

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// Univariate polynomial with complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// `z - a`
    pub fn linear_root(a: C64) -> Self {
        Self::new(vec![-a, C64::new(1.0, 0.0)])
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == C64::new(0.0, 0.0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::constant(C64::new(0.0, 0.0));
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly, k: usize| p.coeffs.get(k).copied().unwrap_or_default();
        Poly::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Drops leading coefficients below `rel_tol · max |c|`.
    pub fn trimmed(&self, rel_tol: f64) -> Poly {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() <= rel_tol * scale) {
            coeffs.pop();
        }
        Poly::new(coeffs)
    }

    /// All complex roots, as eigenvalues of the companion matrix followed by
    /// one Newton step on the original polynomial.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let n = self.degree();
        if self.is_zero() {
            return Err(Error::NumericalFailure("roots of the zero polynomial".into()));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[n];
        if n == 1 {
            return Ok(vec![-self.coeffs[0] / lead]);
        }
        let mut companion = DMatrix::<C64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let eig = companion
            .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
            .and_then(|s| s.eigenvalues())
            .ok_or_else(|| Error::NumericalFailure(format!("companion eigensolver did not converge for {self:?}")))?;
        let dp = self.derivative();
        let polished = eig
            .iter()
            .map(|&z| {
                let d = dp.eval(z);
                if d.norm() == 0.0 {
                    return z;
                }
                let step = z - self.eval(z) / d;
                if step.re.is_finite() && step.im.is_finite() && self.eval(step).norm() <= self.eval(z).norm() {
                    step
                } else {
                    z
                }
            })
            .collect();
        Ok(polished)
    }
}
