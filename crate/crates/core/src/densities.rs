//! Closed-form marginal densities.
//!
//! The Gaussian family is Brownian motion started from `N(0, 1)`, so the law
//! at time `t` is `N(0, 1 + t)`. The lognormal family is the exponential
//! martingale `exp(B_t - t/2)` with `B_0 = 0`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::rng::{PathSeed, Purpose};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub(crate) fn phi(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal distribution function, accurate in both tails.
pub(crate) fn big_phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return domain(format!("time must be non-negative, got {t}"));
    }
    Ok(())
}

/// Density of `N(0, 1 + t)` at `x`.
pub fn gaussian_density(x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let var = 1.0 + t;
    Ok((-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
}

/// Distribution function of `N(0, 1 + t)`.
pub fn gaussian_cdf(x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(big_phi(x / (1.0 + t).sqrt()))
}

/// `∂p/∂t` for the Gaussian family, from the heat equation.
pub fn density_time_derivative(x: f64, t: f64) -> Result<f64> {
    let p = gaussian_density(x, t)?;
    let s = 1.0 + t;
    Ok((x * x / (2.0 * s * s) - 1.0 / (2.0 * s)) * p)
}

fn check_lazy_site(x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return domain(format!(
            "lazy site {x} outside [-1, 1]: the density is not monotone in time there"
        ));
    }
    Ok(())
}

/// `p(x, t) / p(x, 0)`: the probability that a lazy particle at `x` is still
/// lazy at time `t`.
pub fn survival_ratio(x: f64, t: f64) -> Result<f64> {
    check_lazy_site(x)?;
    check_time(t)?;
    Ok(survival_ratio_unchecked(x, t))
}

fn survival_ratio_unchecked(x: f64, t: f64) -> f64 {
    (x * x * t / (2.0 * (1.0 + t))).exp() / (1.0 + t).sqrt()
}

/// Bisection tolerance on the switch time.
pub const SWITCH_TIME_TOL: f64 = 1e-12;

/// The unique `t` with `survival_ratio(x, t) = u`.
///
/// With `u` uniform this is the switch time of a lazy particle started at `x`.
pub fn invert_survival_ratio(x: f64, u: f64) -> Result<f64> {
    check_lazy_site(x)?;
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("survival level must lie in (0, 1), got {u}"));
    }
    let ratio = |t: f64| survival_ratio_unchecked(x, t);
    let mut hi = 1.0;
    while ratio(hi) >= u {
        hi *= 2.0;
        if !hi.is_finite() {
            return domain(format!("no finite switch time for x = {x}, u = {u}"));
        }
    }
    Ok(bisect_decreasing(ratio, u, 0.0, hi, SWITCH_TIME_TOL))
}

/// Root of `f(t) = u` for `f` decreasing on `[lo, hi]` with `f(lo) ≥ u > f(hi)`.
pub(crate) fn bisect_decreasing(f: impl Fn(f64) -> f64, u: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Net rate at which Brownian mass crosses `a` into `[a, ∞)`:
/// `-(∂p/∂x)(a, t) / 2`.
pub fn net_inflow(a: f64, t: f64) -> Result<f64> {
    let p = gaussian_density(a, t)?;
    Ok(a / (2.0 * (1.0 + t)) * p)
}

fn check_lognormal_args(x: f64, t: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return domain(format!("lognormal support is x > 0, got {x}"));
    }
    if t.is_nan() || t <= 0.0 {
        return domain(format!("lognormal law is degenerate at t = {t}; need t > 0"));
    }
    Ok(())
}

/// Density of `exp(B_t - t/2)`, `B_0 = 0`: lognormal with parameters `(-t/2, t)`.
pub fn lognormal_density(x: f64, t: f64) -> Result<f64> {
    check_lognormal_args(x, t)?;
    let z = (x.ln() + 0.5 * t) / t.sqrt();
    Ok(phi(z) / (x * t.sqrt()))
}

pub fn lognormal_cdf(x: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return domain(format!("time must be non-negative, got {t}"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(if x >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok(big_phi((x.ln() + 0.5 * t) / t.sqrt()))
}

/// `∂p/∂t` for the lognormal family.
pub fn lognormal_time_derivative(x: f64, t: f64) -> Result<f64> {
    let p = lognormal_density(x, t)?;
    let u = x.ln();
    Ok(((u * u - t * t / 4.0) / (2.0 * t * t) - 1.0 / (2.0 * t)) * p)
}

/// Default grid resolution used by [`check_exp_window`].
pub const EXP_WINDOW_GRID: usize = 64;

/// Whether `(a, b) × (t1, t2)` supports a fake exponential Brownian motion:
/// `x ↦ x·p(x, t)` concave in `x` and `p` decreasing in `t` on a grid.
pub fn check_exp_window(a: f64, b: f64, t1: f64, t2: f64) -> Result<bool> {
    check_exp_window_with_grid(a, b, t1, t2, EXP_WINDOW_GRID, EXP_WINDOW_GRID)
}

pub fn check_exp_window_with_grid(
    a: f64,
    b: f64,
    t1: f64,
    t2: f64,
    nx: usize,
    nt: usize,
) -> Result<bool> {
    if !(a > 0.0 && a < b) {
        return domain(format!("need 0 < a < b, got a = {a}, b = {b}"));
    }
    if !(t1 > 0.0 && t1 < t2) {
        return domain(format!("need 0 < t1 < t2, got t1 = {t1}, t2 = {t2}"));
    }
    if nx < 3 || nt < 2 {
        return domain("grid needs at least 3 space and 2 time points");
    }
    let hx = (b - a) / (nx - 1) as f64;
    let ht = (t2 - t1) / (nt - 1) as f64;
    for it in 0..nt {
        let t = t1 + ht * it as f64;
        let g = |x: f64| lognormal_density(x, t).map(|p| x * p);
        for ix in 0..nx {
            let x = a + hx * ix as f64;
            if lognormal_time_derivative(x, t)? >= 0.0 {
                return Ok(false);
            }
            if ix > 0 && ix + 1 < nx && g(x - hx)? - 2.0 * g(x)? + g(x + hx)? > 0.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Which closed-form marginal family a process is meant to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalFamily {
    Gaussian,
    Lognormal,
}

impl MarginalFamily {
    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        match self {
            MarginalFamily::Gaussian => gaussian_density(x, t),
            MarginalFamily::Lognormal => lognormal_density(x, t),
        }
    }

    pub fn cdf(&self, x: f64, t: f64) -> Result<f64> {
        match self {
            MarginalFamily::Gaussian => gaussian_cdf(x, t),
            MarginalFamily::Lognormal => lognormal_cdf(x, t),
        }
    }

    pub fn time_derivative(&self, x: f64, t: f64) -> Result<f64> {
        match self {
            MarginalFamily::Gaussian => density_time_derivative(x, t),
            MarginalFamily::Lognormal => lognormal_time_derivative(x, t),
        }
    }

    /// Draw from the time-0 law: `N(0, 1)` or the point mass at 1.
    pub fn sample_initial(&self, seed: PathSeed) -> f64 {
        match self {
            MarginalFamily::Gaussian => seed.rng(Purpose::Driver).sample(StandardNormal),
            MarginalFamily::Lognormal => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_density_closed_form() {
        assert_relative_eq!(gaussian_density(0.0, 0.0).unwrap(), 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gaussian_density(0.0, 3.0).unwrap(), 1.0 / (8.0 * PI).sqrt(), max_relative = 1e-15);
        assert_eq!(gaussian_density(0.7, 1.0).unwrap(), gaussian_density(-0.7, 1.0).unwrap());
        assert!(gaussian_density(0.0, -0.1).is_err());
    }

    #[test]
    fn gaussian_density_integrates_to_one() {
        for &t in &[0.0f64, 0.5, 1.0, 4.0] {
            // trapezoid on [-20 sd, 20 sd]; the integrand is analytic so this converges fast
            let sd = (1.0 + t).sqrt();
            let n = 40_000;
            let h = 40.0 * sd / n as f64;
            let total: f64 = (0..=n)
                .map(|k| {
                    let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                    w * gaussian_density(-20.0 * sd + h * k as f64, t).unwrap()
                })
                .sum::<f64>()
                * h;
            assert!((total - 1.0).abs() < 1e-8, "t = {t}: {total}");
        }
    }

    #[test]
    fn time_derivative_values() {
        // vanishes where x^2 = t + 1
        assert!(density_time_derivative(2.0, 3.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(
            density_time_derivative(0.0, 0.0).unwrap(),
            -1.0 / (2.0 * (2.0 * PI).sqrt()),
            max_relative = 1e-14
        );
    }

    #[test]
    fn time_derivative_matches_finite_differences() {
        let h = 1e-5;
        let fd = |x: f64, t: f64| {
            (gaussian_density(x, t + h).unwrap() - gaussian_density(x, t - h).unwrap()) / (2.0 * h)
        };
        assert!((fd(0.5, 1.0) - density_time_derivative(0.5, 1.0).unwrap()).abs() < 1e-9);
        for ix in -20..=20 {
            for it in 1..=10 {
                let (x, t) = (ix as f64 * 0.15, it as f64 * 0.3);
                assert!((fd(x, t) - density_time_derivative(x, t).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn survival_ratio_values() {
        assert_eq!(survival_ratio(0.3, 0.0).unwrap(), 1.0);
        assert_relative_eq!(survival_ratio(0.0, 3.0).unwrap(), 0.5, max_relative = 1e-15);
        // sqrt(1/2) * exp(0.25 * 1 / (2 * 2))
        let expected = (0.5f64).sqrt() * (0.0625f64).exp();
        assert_relative_eq!(survival_ratio(0.5, 1.0).unwrap(), expected, max_relative = 1e-15);
        assert!((expected - 0.752_711).abs() < 1e-6);
        assert!(survival_ratio(1.2, 1.0).is_err());
    }

    #[test]
    fn survival_ratio_strictly_decreasing_on_grid() {
        for ix in -19..=19 {
            let x = ix as f64 / 20.0;
            let mut prev = survival_ratio(x, 0.0).unwrap();
            for it in 1..=200 {
                let cur = survival_ratio(x, it as f64 * 0.05).unwrap();
                assert!(cur < prev, "x = {x}");
                prev = cur;
            }
        }
    }

    #[test]
    fn inversion_values() {
        assert!((invert_survival_ratio(0.0, 0.5).unwrap() - 3.0).abs() < 1e-10);
        assert!(invert_survival_ratio(0.2, 1.0 - 1e-12).unwrap() < 1e-9);
        let u = survival_ratio(0.5, 1.0).unwrap();
        assert!((invert_survival_ratio(0.5, u).unwrap() - 1.0).abs() < 1e-9);
        assert!(invert_survival_ratio(0.5, 0.0).is_err());
        assert!(invert_survival_ratio(0.5, 1.0).is_err());
    }

    #[test]
    fn inversion_round_trip_on_grid() {
        for ix in -10..=10 {
            for it in 1..=40 {
                let (x, t) = (ix as f64 / 10.0, it as f64 * 0.25);
                let u = survival_ratio(x, t).unwrap();
                assert!((invert_survival_ratio(x, u).unwrap() - t).abs() < 1e-9, "x = {x}, t = {t}");
            }
        }
        // monotone decreasing in u
        let a = invert_survival_ratio(0.4, 0.3).unwrap();
        let b = invert_survival_ratio(0.4, 0.6).unwrap();
        assert!(a > b);
    }

    #[test]
    fn net_inflow_values_and_flux_balance() {
        assert_eq!(net_inflow(0.0, 1.7).unwrap(), 0.0);
        assert!((net_inflow(0.5, 0.0).unwrap() - 0.088_016).abs() < 1e-6);
        for &a in &[-1.3, -0.2, 0.4, 2.0] {
            let v = net_inflow(a, 0.8).unwrap();
            assert_eq!(v.signum(), a.signum());
            assert_relative_eq!(v, -net_inflow(-a, 0.8).unwrap());
        }
        let h = 1e-5;
        let tail = |a: f64, t: f64| 1.0 - gaussian_cdf(a, t).unwrap();
        for &a in &[-1.0, 0.3, 0.9, 1.5] {
            for &t in &[0.2, 1.0, 2.5] {
                let fd = (tail(a, t + h) - tail(a, t - h)) / (2.0 * h);
                assert!((fd - net_inflow(a, t).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn lognormal_basics() {
        for &t in &[0.1, 0.5, 1.0, 3.0] {
            assert!((lognormal_cdf((-t / 2.0f64).exp(), t).unwrap() - 0.5).abs() < 1e-15);
        }
        assert!(lognormal_density(0.0, 1.0).is_err());
        assert!(lognormal_density(-1.0, 1.0).is_err());
        let h = 1e-5;
        for &x in &[0.5, 0.9, 1.3] {
            let fd = (lognormal_density(x, 0.8 + h).unwrap() - lognormal_density(x, 0.8 - h).unwrap()) / (2.0 * h);
            assert!((fd - lognormal_time_derivative(x, 0.8).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn exp_window_checks() {
        assert!(check_exp_window(0.6, 1.1, 0.5, 1.0).unwrap());
        assert!(check_exp_window_with_grid(0.6, 1.1, 0.5, 1.0, 128, 128).unwrap());
        // far right tail: x p(x, t) is convex there
        assert!(!check_exp_window(3.0, 5.0, 0.5, 1.0).unwrap());
        assert!(check_exp_window(1.0, 0.5, 0.5, 1.0).is_err());
        assert!(check_exp_window(-1.0, 0.5, 0.5, 1.0).is_err());
    }
}
