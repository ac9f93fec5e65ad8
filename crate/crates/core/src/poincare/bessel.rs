//! Bessel functions of the first kind `J_ν(t)` for real `ν ≥ 0`, `t > 0`.
//!
//! Three regimes:
//!
//! * ascending power series while `(t/2)² ≤ (ν+1)/2` or `t ≤ 1`, where the
//!   terms shrink from the first one and nothing cancels;
//! * Hankel's asymptotic expansion once `t ≥ max(30, ν²)`;
//! * Miller's backward recurrence in between, started well above
//!   `max(ν, t)` and normalized by
//!   `(t/2)^μ = Σ_{k≥0} (μ+2k) Γ(μ+k)/k! · J_{μ+2k}(t)` with `μ = ν − ⌊ν⌋`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest argument accepted by [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 1e6;

/// Relative accuracy charged to a Bessel value by downstream error budgets,
/// measured against `max(|J_ν(t)|, envelope)`.
pub const BESSEL_REL_ERROR: f64 = 1e-11;

const RESCALE: f64 = 1e250;

pub fn bessel_j(nu: f64, t: f64) -> Result<f64> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::invalid(format!("Bessel order must be finite and nonnegative, got {nu}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("Bessel argument must be positive, got {t}")));
    }
    if t > MAX_ARGUMENT {
        return Err(Error::invalid(format!("Bessel argument {t} exceeds {MAX_ARGUMENT}")));
    }
    let half = t / 2.0;
    Ok(if t <= 1.0 || half * half <= (nu + 1.0) / 2.0 {
        power_series(nu, t)
    } else if t >= 30f64.max(nu * nu) {
        hankel(nu, t)
    } else {
        miller(nu, t)
    })
}

/// `(t/2)^ν / Γ(ν+1)`: an upper bound for `|J_ν(t)|` valid for all `t > 0`.
pub fn small_argument_envelope(nu: f64, t: f64) -> f64 {
    (nu * (t / 2.0).ln() - ln_gamma(nu + 1.0)).exp()
}

/// `min(√(2/(πt)), (t/2)^ν/Γ(ν+1))`, the size scale used for error budgets.
pub fn envelope(nu: f64, t: f64) -> f64 {
    small_argument_envelope(nu, t).min((2.0 / (PI * t)).sqrt())
}

fn power_series(nu: f64, t: f64) -> f64 {
    let x = -(t * t) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= x / (k * (k + nu));
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    small_argument_envelope(nu, t) * sum
}

fn hankel(nu: f64, t: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * 8.0 * t);
        if term == 0.0 || term.abs() >= prev {
            break;
        }
        // a_k / t^k alternates between Q (odd k) and P (even k), with signs
        // (+, -, -, +) repeating with period four.
        let signed = match (k as u64) % 4 {
            1 | 2 => -term,
            _ => term,
        };
        if (k as u64) % 2 == 1 {
            q -= signed;
        } else {
            p += signed;
        }
        if term.abs() < f64::EPSILON * 1e-3 {
            break;
        }
        prev = term.abs();
        k += 1.0;
    }
    let chi = t - (nu / 2.0 + 0.25) * PI;
    (2.0 / (PI * t)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn miller(nu: f64, t: f64) -> f64 {
    let order = nu.floor();
    let frac = nu - order;
    let target = order as usize;
    let scale = nu.max(t);
    let mut start = (scale + (160.0 * scale.max(1.0)).sqrt() + 20.0).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    // weights[i] = (μ+2i) Γ(μ+i)/i!, with weights[0] = Γ(μ+1).
    let gamma_mu1 = ln_gamma(frac + 1.0).exp();
    let half = start / 2;
    let mut weights = Vec::with_capacity(half + 1);
    weights.push(gamma_mu1);
    let mut w = gamma_mu1;
    for i in 1..=half {
        if i > 1 {
            let k = (i - 1) as f64;
            w *= (frac + k) / (k + 1.0);
        }
        weights.push((frac + 2.0 * i as f64) * w);
    }

    let mut above = 0.0f64;
    let mut current = 1e-30f64;
    let mut norm = 0.0f64;
    let mut value = 0.0f64;
    let mut k = start;
    loop {
        if k == target {
            value = current;
        }
        if k.is_multiple_of(2) {
            norm += weights[k / 2] * current;
        }
        if k == 0 {
            break;
        }
        let below = 2.0 * (frac + k as f64) / t * current - above;
        above = current;
        current = below;
        k -= 1;
        if current.abs() > RESCALE {
            current /= RESCALE;
            above /= RESCALE;
            norm /= RESCALE;
            value /= RESCALE;
        }
    }
    (frac * (t / 2.0).ln()).exp() * value / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form for `J_{order+1/2}` and the rounding it suffers from
    /// cancellation between its terms at small `t`.
    fn half_integer_closed_form(order: u32, t: f64) -> (f64, f64) {
        let (s, c) = t.sin_cos();
        let root = (2.0 / (PI * t)).sqrt();
        let (value, magnitude) = match order {
            0 => (s, s.abs()),
            1 => (s / t - c, (s / t).abs() + c.abs()),
            2 => (
                (3.0 / (t * t) - 1.0) * s - 3.0 * c / t,
                (3.0 / (t * t) + 1.0) * s.abs() + 3.0 * c.abs() / t,
            ),
            _ => unreachable!(),
        };
        (root * value, 8.0 * f64::EPSILON * root * magnitude)
    }

    #[test]
    fn half_order_examples() {
        let j = bessel_j(0.5, PI / 2.0).unwrap();
        assert!((j - 2.0 / PI).abs() < 1e-14);
        let tiny = bessel_j(1.0, 1e-12).unwrap();
        assert!(tiny.abs() < 1e-12);
        assert!((bessel_j(0.0, 1.0).unwrap() - 0.765_197_686_557_966_6).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(bessel_j(1.0, 0.0).is_err());
        assert!(bessel_j(1.0, -1.0).is_err());
        assert!(bessel_j(-0.5, 1.0).is_err());
        assert!(bessel_j(1.0, 2e6).is_err());
        assert!(bessel_j(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn regimes_agree_with_closed_forms() {
        for order in 0..3u32 {
            let nu = order as f64 + 0.5;
            let mut t = 0.05;
            while t < 2000.0 {
                let (exact, rounding) = half_integer_closed_form(order, t);
                let got = bessel_j(nu, t).unwrap();
                let scale = exact.abs().max(envelope(nu, t));
                assert!(
                    (got - exact).abs() <= 1e-12 * scale + rounding,
                    "nu={nu} t={t} got={got} exact={exact}"
                );
                t *= 1.037;
            }
        }
    }

    #[test]
    fn regimes_are_continuous_at_crossovers() {
        for nu in [0.0f64, 0.3, 1.0, 2.5, 4.0, 7.25, 10.5] {
            for t in [1.0, 30.0, (nu * nu).max(30.0), 2.0 * (0.5 * (nu + 1.0)).sqrt()] {
                // |J'| ≤ 1, so the step itself moves the value by at most 2h.
                let h = t * 1e-14;
                let a = bessel_j(nu, t - h).unwrap();
                let b = bessel_j(nu, t + h).unwrap();
                assert!((a - b).abs() <= 1e-11 * envelope(nu, t) + 2.0 * h, "nu={nu} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn miller_matches_series_where_both_apply() {
        for nu in [0.0, 0.5, 1.7, 6.0, 12.5] {
            for t in [1.5, 3.0, 6.0] {
                let s = power_series(nu, t);
                let m = miller(nu, t);
                assert!((s - m).abs() <= 1e-12 * envelope(nu, t), "nu={nu} t={t}: {s} vs {m}");
            }
        }
    }

    #[test]
    fn large_arguments_match_asymptotic_envelope() {
        for nu in [0.0, 1.0, 5.5] {
            let j = bessel_j(nu, 1e5).unwrap();
            assert!(j.abs() <= (2.0 / (PI * 1e5)).sqrt() * 1.001);
        }
    }
}
