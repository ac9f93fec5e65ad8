//! Fourier coefficients of Jacobi Poincaré series of exponential type.
//!
//! For `k > g/2 + 2` the coefficient of `e(n'τ + r'ᵀz)` in `P_{k,m;(n,r)}` is
//!
//! ```text
//! g(n',r') = δ_m(n,r,n',r') + 2π i^k det(2m)^{-1/2} (D'/D)^{k/2 - g/4 - 1/2}
//!            · Σ_{c≥1} e_{2c}(rᵀm⁻¹r') H_{m,c}(n,r,n',r') J_{k-g/2-1}(2π√(DD')/(det(2m) c)) c^{-g/2-1}
//! ```
//!
//! and the full coefficient is `g(n',r') + (-1)^k g(n',-r')`.
//!
//! The series is truncated at `c_max`. The reported `abs_error` is the
//! accumulated rounding plus a *heuristic* tail estimate: the Kloosterman
//! bound shape `σ₀(c) (D,c) c^{(g+1)/2} det(2m)^{1/2}` with a constant
//! calibrated on the computed terms, times the Bessel envelope, times a
//! safety factor of 4. The implied constants of the underlying bounds are
//! not known, so this estimate is not a certificate; agreement under doubling
//! of `c_max` is the operative convergence check.

pub mod bessel;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

pub use bessel::bessel_j;

use crate::arith::{divisor_count, gcd_u};
use crate::error::{Error, Result};
use crate::forms::{HalfIntegralMatrix, JacobiDatum};
use crate::kloosterman::{kloosterman, signed_vector, EvalConfig, KloostermanParams};
use crate::numeric::{unit_root_rational, CompensatedSum, ExpSumValue};

/// Safety factor applied to the heuristic tail estimate.
pub const TAIL_SAFETY_FACTOR: f64 = 4.0;

/// Explicit tail terms summed past `c_max` before switching to an integral.
const TAIL_WINDOW: u64 = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareParams {
    pub k: u32,
    pub datum: JacobiDatum,
    pub n2: i64,
    pub r2: Vec<i64>,
    /// Target accuracy for [`poincare_coefficient_adaptive`].
    pub tol: f64,
    /// Allow `k ≤ g/2 + 2`, outside the range where the expansion is known to hold.
    pub permissive: bool,
}

impl PoincareParams {
    pub fn new(k: u32, datum: JacobiDatum, n2: i64, r2: Vec<i64>) -> Result<Self> {
        let p = PoincareParams { k, datum, n2, r2, tol: 1e-10, permissive: false };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for the diagonal coefficient `(n', r') = (n, r)`.
    pub fn diagonal(k: u32, datum: JacobiDatum) -> Result<Self> {
        let (n, r) = (datum.n, datum.r.clone());
        Self::new(k, datum, n, r)
    }

    pub fn permissive(mut self) -> Self {
        self.permissive = true;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn g(&self) -> usize {
        self.datum.g()
    }

    fn m(&self) -> &HalfIntegralMatrix {
        &self.datum.m
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.g();
        if self.r2.len() != g {
            return Err(Error::invalid(format!("r2 must have length {g}")));
        }
        if self.k == 0 {
            return Err(Error::invalid("weight must be at least 1"));
        }
        if self.datum.discriminant() <= 0 {
            return Err(Error::invalid("D must be positive"));
        }
        if self.discriminant2() <= 0 {
            return Err(Error::invalid("D' must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if !self.in_validity_range() && !self.permissive {
            return Err(Error::OutOfRange(format!(
                "weight k = {} must exceed g/2 + 2 = {}",
                self.k,
                g as f64 / 2.0 + 2.0
            )));
        }
        Ok(())
    }

    /// `k > g/2 + 2`.
    pub fn in_validity_range(&self) -> bool {
        2 * self.k as usize > self.g() + 4
    }

    /// `D' = det((2n', r'ᵀ), (r', 2m))`.
    pub fn discriminant2(&self) -> i128 {
        JacobiDatum { n: self.n2, r: self.r2.clone(), m: self.m().clone() }.discriminant()
    }

    fn bessel_order(&self) -> f64 {
        self.k as f64 - self.g() as f64 / 2.0 - 1.0
    }

    /// Whether the Kloosterman-bound shape predicts a convergent tail
    /// (`k > g/2 + 3/2`).
    pub fn tail_decays(&self) -> bool {
        2 * self.k as usize > self.g() + 3
    }
}

/// A truncated coefficient with its error budget split out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareCoefficient {
    /// `abs_error = rounding_error + tail_estimate`.
    pub value: ExpSumValue,
    pub rounding_error: f64,
    /// Heuristic; see the module documentation.
    pub tail_estimate: f64,
    pub c_max: u64,
    pub warnings: Vec<String>,
}

impl PoincareCoefficient {
    fn combine(self, other: PoincareCoefficient, sign: f64) -> PoincareCoefficient {
        let mut warnings = self.warnings;
        for w in other.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        let rounding = self.rounding_error + other.rounding_error;
        let tail = self.tail_estimate + other.tail_estimate;
        let v = self.value.value + other.value.value * sign;
        PoincareCoefficient {
            value: ExpSumValue::new(v, rounding + tail + 2.0 * f64::EPSILON * v.norm()),
            rounding_error: rounding,
            tail_estimate: tail,
            c_max: self.c_max,
            warnings,
        }
    }
}

/// `δ_m(n,r,n',r')`: 1 iff `D' = D` and `r' − r ∈ 2mℤ^g`.
pub fn delta_term(m: &HalfIntegralMatrix, n: i64, r: &[i64], n2: i64, r2: &[i64]) -> Result<u8> {
    let d1 = JacobiDatum::new_unchecked(n, r.to_vec(), m.clone())?.discriminant();
    let d2 = JacobiDatum::new_unchecked(n2, r2.to_vec(), m.clone())?.discriminant();
    if d1 != d2 {
        return Ok(0);
    }
    let diff: Vec<i64> = r2.iter().zip(r).map(|(a, b)| a - b).collect();
    let x = m.solve_twice(&diff);
    Ok(x.iter().all(|v| v.is_integer()) as u8)
}

/// `g_{k,m;(n,r)}(n', r')` truncated at `c_max`.
pub fn poincare_coefficient(p: &PoincareParams, c_max: u64, cfg: &EvalConfig) -> Result<PoincareCoefficient> {
    p.validate()?;
    let g = p.g();
    let m = p.m();
    let datum = &p.datum;
    let mut warnings = Vec::new();
    if !p.in_validity_range() {
        warnings.push(format!(
            "k = {} is outside k > g/2 + 2; the coefficient formula is not known to hold",
            p.k
        ));
    }
    if !p.tail_decays() {
        warnings.push(format!(
            "k = {} <= g/2 + 3/2: the Kloosterman bound gives no tail decay; series may diverge",
            p.k
        ));
    }

    let delta = delta_term(m, datum.n, &datum.r, p.n2, &p.r2)? as f64;
    let d1 = datum.discriminant() as f64;
    let d2 = p.discriminant2() as f64;
    let det = m.det_twice() as f64;
    let nu = p.bessel_order();
    let kernel_scale = 2.0 * PI * (d1 * d2).sqrt() / det;
    let q = m.inverse_form(&datum.r, &p.r2);

    let terms: Vec<Result<(Complex64, f64, f64)>> = (1..=c_max)
        .into_par_iter()
        .map(|c| {
            let params = KloostermanParams::new(m.clone(), c, datum.n, datum.r.clone(), p.n2, p.r2.clone())?;
            let h = kloosterman(&params, cfg)?;
            let t = kernel_scale / c as f64;
            let j = bessel_j(nu, t)?;
            let j_err = bessel::BESSEL_REL_ERROR * j.abs().max(bessel::envelope(nu, t));
            let weight = (c as f64).powf(-(g as f64) / 2.0 - 1.0);
            let phase = unit_root_rational(*q.numer(), *q.denom(), 2 * c);
            let term = phase * h.value * (j * weight);
            let err = weight * (h.abs_error * j.abs() + h.norm() * j_err) + 4.0 * f64::EPSILON * term.norm();
            let shape = (divisor_count(c) * gcd_u(datum.discriminant() as u64, c)) as f64
                * (c as f64).powf((g as f64 + 1.0) / 2.0)
                * det.sqrt();
            Ok((term, err, h.norm() / shape))
        })
        .collect();

    let mut sum = CompensatedSum::new();
    let mut rounding = 0.0;
    let mut calibration = 1.0f64;
    for t in terms {
        let (term, err, ratio) = t?;
        sum.add(term);
        rounding += err;
        calibration = calibration.max(ratio);
    }

    let i_k = i_pow(p.k);
    let prefactor_abs = 2.0 * PI / det.sqrt() * ((d2.ln() - d1.ln()) * (p.k as f64 / 2.0 - g as f64 / 4.0 - 0.5)).exp();
    let series = sum.value();
    let value = Complex64::new(delta, 0.0) + i_k * series * prefactor_abs;
    let rounding = prefactor_abs * rounding + 4.0 * f64::EPSILON * value.norm();

    let tail = if p.tail_decays() {
        prefactor_abs
            * TAIL_SAFETY_FACTOR
            * calibration
            * tail_shape(g, nu, kernel_scale, det, datum.discriminant() as u64, c_max)
    } else {
        0.0
    };
    if !tail.is_finite() {
        warnings.push("tail estimate is not finite; abs_error covers rounding only".into());
    }
    let tail = if tail.is_finite() { tail } else { 0.0 };

    Ok(PoincareCoefficient {
        value: ExpSumValue::new(value, rounding + tail),
        rounding_error: rounding,
        tail_estimate: tail,
        c_max,
        warnings,
    })
}

/// `Σ_{c > c_max} σ₀(c)(D,c) c^{(g+1)/2} det(2m)^{1/2} · env_ν(A/c) · c^{-g/2-1}`.
fn tail_shape(g: usize, nu: f64, kernel_scale: f64, det: f64, disc: u64, c_max: u64) -> f64 {
    let term = |c: u64| {
        let cf = c as f64;
        (divisor_count(c) * gcd_u(disc, c)) as f64
            * cf.powf((g as f64 + 1.0) / 2.0 - g as f64 / 2.0 - 1.0)
            * det.sqrt()
            * bessel::envelope(nu, kernel_scale / cf)
    };
    let end = c_max + TAIL_WINDOW;
    let mut window = 0.0;
    let mut weights = 0.0;
    for c in (c_max + 1)..=end {
        window += term(c);
        weights += (divisor_count(c) * gcd_u(disc, c)) as f64;
    }
    // Beyond the window: the envelope is (A/2c)^ν/Γ(ν+1), so the summand
    // behaves like w̄ · C · c^{-1/2-ν} with w̄ the mean arithmetic weight.
    let mean_weight = weights / TAIL_WINDOW as f64;
    let power = 0.5 + nu;
    let endf = end as f64;
    let coeff = det.sqrt() * bessel::small_argument_envelope(nu, kernel_scale);
    let remainder = mean_weight * coeff * endf.powf(1.0 - power) / (power - 1.0);
    window + remainder
}

/// `g(n',r') + (−1)^k g(n',−r')`, checked to be real within its error bound.
pub fn poincare_coefficient_pm(p: &PoincareParams, c_max: u64, cfg: &EvalConfig) -> Result<PoincareCoefficient> {
    let plus = poincare_coefficient(p, c_max, cfg)?;
    let mirrored = PoincareParams { r2: signed_vector(&p.r2, -1)?, ..p.clone() };
    let minus = poincare_coefficient(&mirrored, c_max, cfg)?;
    let sign = if p.k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let combined = plus.combine(minus, sign);
    let im = combined.value.im().abs();
    if im > combined.value.abs_error {
        return Err(Error::Consistency(format!(
            "combined coefficient has imaginary part {im:e} above its error bound {:e}",
            combined.value.abs_error
        )));
    }
    Ok(combined)
}

/// `b_{n,r}(P_{k,m;(n,r)})`: the full coefficient at `(n', r') = (n, r)`.
pub fn diagonal_coefficient(k: u32, datum: &JacobiDatum, c_max: u64, cfg: &EvalConfig) -> Result<PoincareCoefficient> {
    let p = PoincareParams::diagonal(k, datum.clone())?;
    poincare_coefficient_pm(&p, c_max, cfg)
}

/// Same as [`diagonal_coefficient`] but accepts `k ≤ g/2 + 2` with a warning.
pub fn diagonal_coefficient_permissive(
    k: u32,
    datum: &JacobiDatum,
    c_max: u64,
    cfg: &EvalConfig,
) -> Result<PoincareCoefficient> {
    let p = PoincareParams {
        k,
        datum: datum.clone(),
        n2: datum.n,
        r2: datum.r.clone(),
        tol: 1e-10,
        permissive: true,
    };
    poincare_coefficient_pm(&p, c_max, cfg)
}

/// Doubles `c_max` from `c_start` until two successive truncations agree
/// within `p.tol` and the tail estimate is below `p.tol`, or `c_limit` is hit.
pub fn poincare_coefficient_adaptive(
    p: &PoincareParams,
    c_start: u64,
    c_limit: u64,
    cfg: &EvalConfig,
) -> Result<PoincareCoefficient> {
    let mut c = c_start.max(1);
    let mut prev = poincare_coefficient(p, c, cfg)?;
    while c < c_limit {
        let next_c = (2 * c).min(c_limit);
        let next = poincare_coefficient(p, next_c, cfg)?;
        let change = (next.value.value - prev.value.value).norm();
        c = next_c;
        let done = change <= p.tol && next.tail_estimate <= p.tol;
        prev = next;
        if done {
            return Ok(prev);
        }
    }
    prev.warnings.push(format!("adaptive truncation stopped at c_max = {c_limit} before reaching tol"));
    Ok(prev)
}

/// `λ_{k,m,D} = 2^{-g/2} Γ(k-g/2-1) (2π)^{-k+g/2+1} det(2m)^{k-(g+3)/2} D^{-k+g/2+1}`.
pub fn petersson_lambda(k: u32, g: usize, det2m: u64, d: u64) -> Result<f64> {
    let k = k as f64;
    let g = g as f64;
    let arg = k - g / 2.0 - 1.0;
    if arg <= 0.0 {
        return Err(Error::OutOfRange(format!("Gamma argument k - g/2 - 1 = {arg} is not positive")));
    }
    if det2m == 0 || d == 0 {
        return Err(Error::invalid("det(2m) and D must be positive"));
    }
    let log = -g / 2.0 * 2f64.ln()
        + ln_gamma(arg)
        + (-k + g / 2.0 + 1.0) * (2.0 * PI).ln()
        + (k - (g + 3.0) / 2.0) * (det2m as f64).ln()
        + (-k + g / 2.0 + 1.0) * (d as f64).ln();
    Ok(log.exp())
}

/// `i^k` as an exact unit.
fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn datum(n: i64, r: &[i64], m: &[i64]) -> JacobiDatum {
        JacobiDatum::new(n, r.to_vec(), HalfIntegralMatrix::diagonal(m).unwrap()).unwrap()
    }

    #[test]
    fn delta_examples() {
        let m = HalfIntegralMatrix::diagonal(&[1]).unwrap();
        assert_eq!(delta_term(&m, 2, &[1], 2, &[1]).unwrap(), 1);
        assert_eq!(delta_term(&m, 2, &[1], 3, &[1]).unwrap(), 0);
        assert_eq!(delta_term(&m, 1, &[1], 1, &[-1]).unwrap(), 1);
        // Same D, but r' - r = 1 is not in 2ℤ.
        assert_eq!(delta_term(&m, 1, &[0], 1, &[1]).unwrap(), 0);
        let m2 = HalfIntegralMatrix::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        // r' - r = (2, 1) = 2m · (1, 0), and n' = n + m[λ] + rᵀλ keeps D.
        assert_eq!(delta_term(&m2, 3, &[0, 0], 4, &[2, 1]).unwrap(), 1);
        assert_eq!(delta_term(&m2, 3, &[0, 0], 3, &[2, 1]).unwrap(), 0);
    }

    #[test]
    fn delta_only_when_truncated_at_zero() {
        let p = PoincareParams::diagonal(12, datum(1, &[0], &[1])).unwrap();
        let c = poincare_coefficient(&p, 0, &EvalConfig::default()).unwrap();
        assert_eq!(c.value.value, Complex64::new(1.0, 0.0));
        assert_eq!(c.rounding_error, 4.0 * f64::EPSILON);
    }

    #[test]
    fn weight_range_is_checked() {
        let d = datum(1, &[0], &[1]);
        assert!(matches!(PoincareParams::diagonal(2, d.clone()), Err(Error::OutOfRange(_))));
        let p = PoincareParams { k: 2, n2: 1, r2: vec![0], tol: 1e-10, permissive: true, datum: d };
        let c = poincare_coefficient(&p, 4, &EvalConfig::default()).unwrap();
        assert!(!c.warnings.is_empty());
    }

    #[test]
    fn self_convergence_for_weight_twelve() {
        let p = PoincareParams::diagonal(12, datum(1, &[0], &[1])).unwrap();
        let cfg = EvalConfig::default();
        let a = poincare_coefficient(&p, 50, &cfg).unwrap();
        let b = poincare_coefficient(&p, 100, &cfg).unwrap();
        assert!((a.value.value - b.value.value).norm() < 1e-8);
        assert!((a.value.value - b.value.value).norm() <= a.value.abs_error);
    }

    #[test]
    fn pm_is_real_and_has_expected_delta_part() {
        let cfg = EvalConfig::default();
        let d = datum(2, &[1], &[1]);
        for k in [11u32, 12] {
            let c = diagonal_coefficient(k, &d, 0, &cfg).unwrap();
            // r' = r gives δ = 1; r' = -r: -1 - 1 = -2 ∈ 2ℤ, so δ = 1 as well.
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(c.value.value, Complex64::new(1.0 + sign, 0.0));
            let full = diagonal_coefficient(k, &d, 40, &cfg).unwrap();
            assert!(full.value.im().abs() <= full.value.abs_error);
        }
        let c = diagonal_coefficient(10, &datum(3, &[0], &[2]), 0, &cfg).unwrap();
        assert_eq!(c.value.value, Complex64::new(2.0, 0.0));
    }

    #[test]
    fn adaptive_truncation_reaches_tolerance() {
        let p = PoincareParams::diagonal(12, datum(3, &[1], &[1])).unwrap().with_tol(1e-9);
        let c = poincare_coefficient_adaptive(&p, 8, 1024, &EvalConfig::default()).unwrap();
        assert!(c.tail_estimate <= 1e-9);
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn petersson_lambda_formula() {
        let got = petersson_lambda(10, 1, 2, 4).unwrap();
        let gamma_8_5 = statrs::function::gamma::gamma(8.5);
        let direct = 2f64.powf(-0.5) * gamma_8_5 * (2.0 * PI).powf(-8.5) * 2f64.powf(8.0) * 4f64.powf(-8.5);
        assert!((got - direct).abs() <= 1e-12 * direct);
        assert!(petersson_lambda(10, 1, 2, 5).unwrap() < got);
        let scaled = petersson_lambda(10, 1, 2, 16).unwrap();
        assert!((scaled / got - 4f64.powf(-8.5)).abs() < 1e-12 * 4f64.powf(-8.5));
        assert!(petersson_lambda(1, 1, 2, 4).is_err());
    }
}
