//! Generalized quadratic Gauss sums
//! `G(a, b; c) = Σ_{n mod c} e_c(a n² + b n)`.
//!
//! Three evaluators are provided: direct enumeration, closed forms at prime
//! powers, and composite assembly through twisted multiplicativity
//! `G(a, b; c₁c₂) = G(a c₂, b; c₁) · G(a c₁, b; c₂)` for coprime `c₁, c₂`.
//!
//! # Closed forms at `p^ν`
//!
//! Let `α = ord_p(a)` (with `α ≥ ν` when `p^ν | a`) and `a' = a / p^α`.
//!
//! * `α ≥ ν`: `G = p^ν` if `p^ν | b`, else `0`.
//! * `α < ν` and `p^α ∤ b`: `G = 0`.
//! * `p` odd: `G = p^{(ν+α)/2} · ε_{p^{ν-α}} · (a' / p^{ν-α}) · e_{p^{ν+α}}(-b² · inv(4a'))`,
//!   where the inverse of `4a'` is taken modulo `p^{ν+α}`. Since `p^{2α} | b²`
//!   this is the same as `e_{p^{ν-α}}(-(b/p^α)² · inv(4a'))`.
//! * `p = 2`, `ν - α = 1`: `G = 2^ν` if `b ≢ 0 (mod 2^ν)`, else `0`.
//! * `p = 2`, `ν - α ≥ 2`: `G = 2^{(ν+α)/2} · (-2^{ν-α} / a') · ε_{a'} · (1 + i) ·
//!   e_{2^{ν+α+2}}(-b² · inv(a'))` if `2^{α+1} | b`, else `0`; the inverse is
//!   taken modulo `2^{ν+α+2}`.
//!
//! The last case holds for every `ν - α ≥ 2`, not only for `ν ≡ α (mod 2)`:
//! enumeration gives `G(1, 0; 8) = 4 e^{πi/4}`, which a parity restriction
//! would wrongly send to zero. All readings above were fixed by comparison
//! with [`gauss_sum_brute`] over the full grid `p ∈ {2,3,5,7}`, `ν ≤ 4`.

use num_complex::Complex64;

use crate::arith::{epsilon_factor, factorize, is_prime, jacobi_symbol, mod_inverse, residue};
use crate::error::{Error, Result};
use crate::numeric::{root_sum_value, unit_root, CompensatedSum, ExpSumValue, RootTable};

/// Relative error charged to a closed-form evaluation.
const CLOSED_FORM_REL_ERROR: f64 = 16.0 * f64::EPSILON;

const TABLE_LIMIT: u64 = 1 << 20;

/// Direct enumeration over `n mod c`.
pub fn gauss_sum_brute(a: i64, b: i64, c: u64) -> Result<ExpSumValue> {
    if c == 0 {
        return Err(Error::invalid("Gauss sum modulus must be positive"));
    }
    let (a, b) = (residue(a as i128, c), residue(b as i128, c));
    let sum: CompensatedSum = if c <= TABLE_LIMIT {
        // e(n) = a n² + b n stepped by e(n+1) − e(n) = a(2n+1) + b, all mod c.
        let table = RootTable::cached(c);
        let twice_a = (2 * a) % c;
        let (mut e, mut step) = (0u64, (a + b) % c);
        let mut sum = CompensatedSum::new();
        let add_mod = |x: u64, y: u64| if x + y >= c { x + y - c } else { x + y };
        for _ in 0..c {
            sum.add(table.get(e));
            e = add_mod(e, step);
            step = add_mod(step, twice_a);
        }
        sum
    } else {
        let (a, b, c128) = (a as u128, b as u128, c as u128);
        (0..c as u128).map(|n| unit_root(((a * n % c128 * n + b * n) % c128) as i128, c)).collect()
    };
    Ok(root_sum_value(sum.value(), c as u128))
}

/// Closed-form evaluation of `G(a, b; p^ν)`.
pub fn gauss_sum_prime_power(a: i64, b: i64, p: u64, nu: u32) -> Result<ExpSumValue> {
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if nu == 0 {
        return Err(Error::invalid("prime-power exponent must be at least 1"));
    }
    let q = p
        .checked_pow(nu)
        .filter(|q| *q <= u32::MAX as u64)
        .ok_or_else(|| Error::invalid(format!("{p}^{nu} is too large")))?;
    let a = residue(a as i128, q);
    let b = residue(b as i128, q);

    // Case α ≥ ν.
    if a == 0 {
        return Ok(if b == 0 { real(q as f64) } else { ExpSumValue::zero() });
    }
    let alpha = crate::arith::ord_p(a as i64, p)?;
    let p_alpha = p.pow(alpha);
    if !b.is_multiple_of(p_alpha) {
        return Ok(ExpSumValue::zero());
    }
    let unit = (a / p_alpha) as i64;
    let depth = nu - alpha;

    let value = if p != 2 {
        let level = p.pow(depth);
        let magnitude = sqrt_prime_power(p, nu + alpha);
        let eps = epsilon_factor(level as i64)?;
        let symbol = jacobi_symbol(unit, level)? as f64;
        let modulus = p.pow(nu + alpha);
        let inv = mod_inverse(4 * unit, modulus)? as i128;
        let b = b as i128;
        let phase = unit_root(-(b * b % modulus as i128) * inv, modulus);
        eps * phase * (magnitude * symbol)
    } else if depth == 1 {
        if !b.is_multiple_of(q) {
            Complex64::new(q as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    } else if b.is_multiple_of(2 * p_alpha) {
        let magnitude = sqrt_prime_power(2, nu + alpha);
        let level = 1i64 << depth;
        let symbol = jacobi_symbol(-level, unit as u64)? as f64;
        let eps = epsilon_factor(unit)?;
        let modulus = 1u64 << (nu + alpha + 2);
        let inv = mod_inverse(unit, modulus)? as i128;
        let b = b as i128;
        let phase = unit_root(-(b * b % modulus as i128) * inv, modulus);
        eps * Complex64::new(1.0, 1.0) * phase * (magnitude * symbol)
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(ExpSumValue::new(value, CLOSED_FORM_REL_ERROR * value.norm()))
}

/// `G(a, b; c)` for any `c ≥ 1`, assembled from prime-power closed forms.
pub fn gauss_sum(a: i64, b: i64, c: u64) -> Result<ExpSumValue> {
    if c == 0 {
        return Err(Error::invalid("Gauss sum modulus must be positive"));
    }
    let factors = factorize(c as i64)?;
    let mut acc = ExpSumValue::one();
    for (p, e, q) in factors.prime_powers() {
        let twist = residue(a as i128 * (c / q) as i128, q) as i64;
        let local = gauss_sum_prime_power(twist, b, p, e)?;
        if local.value == Complex64::new(0.0, 0.0) && local.abs_error == 0.0 {
            return Ok(ExpSumValue::zero());
        }
        acc = acc * local;
    }
    Ok(acc)
}

fn real(x: f64) -> ExpSumValue {
    ExpSumValue::exact(Complex64::new(x, 0.0))
}

/// `p^{k/2}`, exact whenever `k` is even.
fn sqrt_prime_power(p: u64, k: u32) -> f64 {
    let whole = (p as f64).powi((k / 2) as i32);
    if k.is_multiple_of(2) {
        whole
    } else {
        whole * (p as f64).sqrt()
    }
}
