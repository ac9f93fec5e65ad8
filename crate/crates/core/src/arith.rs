//! Exact integer and modular arithmetic.
//!
//! All residues are canonicalized to `[0, c)`. Intermediate products are
//! carried in `i128`, which covers every modulus reachable at desk scale.

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// Prime factorization `n = ∏ p^e` with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    pairs: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The prime powers `p^e`, in increasing order of `p`.
    pub fn prime_powers(&self) -> impl Iterator<Item = (u64, u32, u64)> + '_ {
        self.pairs.iter().map(|&(p, e)| (p, e, p.pow(e)))
    }

    /// Reassembles the factored integer.
    pub fn value(&self) -> u64 {
        self.pairs.iter().map(|&(p, e)| p.pow(e)).product()
    }
}

/// Trial-division factorization.
pub fn factorize(n: i64) -> Result<Factorization> {
    if n <= 0 {
        return Err(Error::invalid(format!("cannot factor {n}: need n >= 1")));
    }
    let mut n = n as u64;
    let mut pairs = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            pairs.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        pairs.push((n, 1));
    }
    Ok(Factorization { pairs })
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Canonical residue of `a` modulo `c` in `[0, c)`.
#[inline]
pub fn residue(a: i128, c: u64) -> u64 {
    a.rem_euclid(c as i128) as u64
}

pub fn gcd(a: i64, b: i64) -> u64 {
    a.unsigned_abs().gcd(&b.unsigned_abs())
}

/// Euler's totient.
pub fn euler_phi(c: u64) -> u64 {
    if c == 0 {
        return 0;
    }
    let f = factorize(c as i64).expect("c >= 1");
    f.pairs()
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Number of positive divisors.
pub fn divisor_count(c: u64) -> u64 {
    if c == 0 {
        return 0;
    }
    let f = factorize(c as i64).expect("c >= 1");
    f.pairs().iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Inverse of `a` modulo `c`, canonicalized to `[0, c)`.
pub fn mod_inverse(a: i64, c: u64) -> Result<u64> {
    if c == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    if c == 1 {
        return Ok(0);
    }
    let (mut old_r, mut r) = (residue(a as i128, c) as i128, c as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible { a, modulus: c });
    }
    Ok(residue(old_s, c))
}

/// `p`-adic valuation of a nonzero integer.
pub fn ord_p(a: i64, p: u64) -> Result<u32> {
    if a == 0 {
        return Err(Error::invalid("ord_p(0) is undefined"));
    }
    if p < 2 {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    let mut a = a.unsigned_abs();
    let mut k = 0;
    while a.is_multiple_of(p) {
        a /= p;
        k += 1;
    }
    Ok(k)
}

/// Jacobi symbol `(a / n)` for odd positive `n`.
pub fn jacobi_symbol(a: i64, n: u64) -> Result<i8> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "Jacobi symbol needs an odd positive modulus, got {n}"
        )));
    }
    let mut a = residue(a as i128, n);
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

/// `1` for `j ≡ 1 (mod 4)`, `i` for `j ≡ 3 (mod 4)`.
pub fn epsilon_factor(j: i64) -> Result<Complex64> {
    match j.rem_euclid(4) {
        1 => Ok(Complex64::new(1.0, 0.0)),
        3 => Ok(Complex64::new(0.0, 1.0)),
        _ => Err(Error::invalid(format!("epsilon factor needs odd j, got {j}"))),
    }
}

/// `(D, c)` as it appears in the Kloosterman bounds.
pub fn gcd_u(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
