//! Closed-form and series kernels used as independent references.

use std::f64::consts::PI;

use reduced_bergman::C64;

/// `1 / (π (1 − z w̄)²)`
pub fn disc(z: C64, w: C64) -> C64 {
    let d = 1.0 - z * w.conj();
    1.0 / (PI * d * d)
}

/// Weighted kernel of the unit disc for `|z|^{2α}`: `Σ (n + 1 + α) xⁿ / π`.
pub fn disc_power_weight(z: C64, w: C64, alpha: f64) -> C64 {
    let x = z * w.conj();
    let d = 1.0 - x;
    (1.0 / (d * d) + alpha / d) / PI
}

/// `‖zⁿ‖²` on `{r < |z| < R}`.
pub fn annulus_norm_sq(n: i32, r: f64, big_r: f64) -> f64 {
    if n == -1 {
        2.0 * PI * (big_r / r).ln()
    } else {
        let k = 2 * n + 2;
        PI * (big_r.powi(k) - r.powi(k)) / (n + 1) as f64
    }
}

/// `Σ_{n = n_min}^{n_max} xⁿ / ‖zⁿ‖²`, with or without the `n = −1` term.
pub fn annulus_series(z: C64, w: C64, r: f64, big_r: f64, n_min: i32, n_max: i32, include_residue: bool) -> C64 {
    let x = z * w.conj();
    (n_min..=n_max)
        .filter(|&n| include_residue || n != -1)
        .map(|n| x.powi(n) / annulus_norm_sq(n, r, big_r))
        .sum()
}
