//! Jukes-Cantor transition probabilities and the two-taxon likelihood.
//!
//! Branch lengths are in expected substitutions per site (the generator has
//! -1 on its diagonal and 1/3 elsewhere).

use crate::error::{Error, Result};

/// Distance reported for saturated pairs (difference rate >= 3/4).
pub const T_MAX: f64 = 10.0;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("branch length must be >= 0, got {t}")));
    }
    Ok(())
}

/// Probability that a site is unchanged after time `t`.
pub fn jc_p_same(t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(p_same(t))
}

/// Probability that a site has changed to one specific other base.
pub fn jc_p_diff(t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(p_diff(t))
}

#[inline]
pub(crate) fn p_same(t: f64) -> f64 {
    0.25 + 0.75 * (-4.0 * t / 3.0).exp()
}

#[inline]
pub(crate) fn p_diff(t: f64) -> f64 {
    -0.25 * (-4.0 * t / 3.0).exp_m1()
}

/// `(1 - r) ln p_same(t) + r ln p_diff(t)`, the per-site pairwise
/// log-likelihood with the stationary constant dropped.
#[inline]
pub(crate) fn per_site_loglik(r: f64, t: f64) -> f64 {
    let mut v = 0.0;
    if r < 1.0 {
        v += (1.0 - r) * p_same(t).ln();
    }
    if r > 0.0 {
        v += r * p_diff(t).ln();
    }
    v
}

/// Derivative in `t` of [`per_site_loglik`]:
/// `e^{-4t/3} (r / (3 p_diff) - (1 - r) / p_same)`.
#[inline]
pub(crate) fn per_site_loglik_slope(r: f64, t: f64) -> f64 {
    let e = (4.0 * t / 3.0).exp();
    let mut w = -(1.0 - r) * 4.0 / (e + 3.0);
    if r > 0.0 {
        w += r * (4.0 / 3.0) / (4.0 * t / 3.0).exp_m1();
    }
    w
}

/// Two-taxon log-likelihood of distance `t` given difference rate `r` over
/// `length` sites, without the constant `length * ln(1/4)`. Negative infinity
/// when `r > 0` and `t = 0`.
pub fn pairwise_loglik(r: f64, length: usize, t: f64) -> Result<f64> {
    check_time(t)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("difference rate must lie in [0, 1], got {r}")));
    }
    Ok(length as f64 * per_site_loglik(r, t))
}

/// Maximum-likelihood two-taxon distance, `-3/4 ln(1 - 4r/3)`, saturating
/// at [`T_MAX`] for `r >= 3/4`.
pub fn ml_pairwise_distance(r: f64) -> f64 {
    if r >= 0.75 {
        return T_MAX;
    }
    let r = r.max(0.0);
    (-0.75 * (-4.0 * r / 3.0).ln_1p()).min(T_MAX)
}
