//! Higher-dimensional Kloosterman sums
//!
//! ```text
//! H_{m,c}(n, r, n', r') = Σ_{λ mod c} Σ_{d mod c, (d,c)=1} e_c((m[λ] + rᵀλ + n) d̄ + n' d + r'ᵀλ)
//! ```
//!
//! evaluated three ways:
//!
//! * [`kloosterman_brute`]: direct enumeration of all `c^g · φ(c)` terms.
//! * [`kloosterman_crt`]: splitting over coprime factors. For `c = c₁c₂`,
//!   writing `e_c(x) = e_{c₁}(x c̄₂) e_{c₂}(x c̄₁)` and substituting `λ → c₂λ`
//!   in the first factor gives
//!   `H_{m,c}(n,r,n',r') = H_{c₂m,c₁}(n c̄₂, r, n' c̄₂, r') · H_{c₁m,c₂}(n c̄₁, r, n' c̄₁, r')`
//!   with `c̄₂` inverted modulo `c₁` and `c̄₁` modulo `c₂`. For `(n', r') = (n, ±r)`
//!   this is the classical identity for `H^±`; the general-argument form is
//!   the one used here and is checked against brute force.
//! * [`kloosterman_diag_prime_power`]: for diagonal `m` and odd `p`, the
//!   λ-sum factors into one-dimensional Gauss sums,
//!   `H = Σ_d e_q(n d̄ + n' d) ∏_j G(m_j d̄, r_j d̄ + r'_j; q)`,
//!   each evaluated in closed form. Work drops from `O(q^g φ(q))` to `O(g φ(q))`.
//!
//! The powers of two and non-diagonal `m` go through brute force after the
//! CRT split.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::{euler_phi, factorize, gcd_u, is_prime, mod_inverse, residue};
use crate::error::{Error, Result};
use crate::forms::{HalfIntegralMatrix, JacobiDatum};
use crate::gauss::gauss_sum_prime_power;
use crate::numeric::{root_sum_value, unit_root, CompensatedSum, ExpSumValue, RootTable, ROOT_ERROR};

/// Default cap on enumerated terms for a single brute-force evaluation.
pub const DEFAULT_WORK_LIMIT: u128 = 100_000_000;

const PRECOMPUTE_LIMIT: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KloostermanParams {
    pub m: HalfIntegralMatrix,
    pub c: u64,
    pub n: i64,
    pub r: Vec<i64>,
    pub n2: i64,
    pub r2: Vec<i64>,
}

impl KloostermanParams {
    pub fn new(m: HalfIntegralMatrix, c: u64, n: i64, r: Vec<i64>, n2: i64, r2: Vec<i64>) -> Result<Self> {
        let g = m.dim();
        if r.len() != g || r2.len() != g {
            return Err(Error::invalid(format!(
                "r and r2 must have length {g}, got {} and {}",
                r.len(),
                r2.len()
            )));
        }
        if c == 0 {
            return Err(Error::invalid("Kloosterman modulus must be positive"));
        }
        Ok(KloostermanParams { m, c, n, r, n2, r2 })
    }

    /// Parameters of `H^±_{m,c}(n, r) = H_{m,c}(n, r, n, ±r)`.
    pub fn signed(m: HalfIntegralMatrix, c: u64, n: i64, r: Vec<i64>, sign: i8) -> Result<Self> {
        let r2 = signed_vector(&r, sign)?;
        Self::new(m, c, n, r, n, r2)
    }

    pub fn g(&self) -> usize {
        self.m.dim()
    }

    /// Number of terms in the defining double sum, `c^g · φ(c)`.
    pub fn term_count(&self) -> u128 {
        (self.c as u128)
            .checked_pow(self.g() as u32)
            .and_then(|x| x.checked_mul(euler_phi(self.c) as u128))
            .unwrap_or(u128::MAX)
    }
}

/// How a Kloosterman sum is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Direct enumeration.
    Brute,
    /// CRT split to prime powers, brute force at each.
    Crt,
    /// CRT split, closed-form Gauss factorization wherever available.
    #[default]
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub strategy: Strategy,
    pub work_limit: u128,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { strategy: Strategy::Fast, work_limit: DEFAULT_WORK_LIMIT }
    }
}

impl EvalConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        EvalConfig { strategy, ..Default::default() }
    }
}

/// Evaluates `H_{m,c}(n, r, n', r')` with the configured strategy.
pub fn kloosterman(p: &KloostermanParams, cfg: &EvalConfig) -> Result<ExpSumValue> {
    match cfg.strategy {
        Strategy::Brute => kloosterman_brute(p, cfg.work_limit),
        Strategy::Crt => split_with(p, |local| kloosterman_brute(local, cfg.work_limit)),
        Strategy::Fast => split_with(p, |local| local_fast(local, cfg.work_limit)),
    }
}

/// `H^±_{m,c}(n, r) = H_{m,c}(n, r, n, ±r)`.
pub fn kloosterman_pm(
    m: &HalfIntegralMatrix,
    c: u64,
    n: i64,
    r: &[i64],
    sign: i8,
    cfg: &EvalConfig,
) -> Result<ExpSumValue> {
    let p = KloostermanParams::signed(m.clone(), c, n, r.to_vec(), sign)?;
    kloosterman(&p, cfg)
}

/// Direct enumeration over `λ mod c` and units `d mod c`.
pub fn kloosterman_brute(p: &KloostermanParams, work_limit: u128) -> Result<ExpSumValue> {
    let work = p.term_count();
    if work > work_limit {
        return Err(Error::WorkLimit { work, limit: work_limit });
    }
    let c = p.c;
    let g = p.g();
    let table = RootTable::new(c);
    let units: Vec<(u64, u64)> = (0..c)
        .filter(|&d| gcd_u(d, c) == 1)
        .map(|d| (d, mod_inverse(d as i64, c).expect("unit")))
        .collect();
    let lattice_size = (c as u128).pow(g as u32);

    let n = residue(p.n as i128, c) as u128;
    let n2 = residue(p.n2 as i128, c) as u128;
    let c128 = c as u128;

    // (m[λ] + rᵀλ mod c, r'ᵀλ mod c) for every λ.
    let pairs: Option<Vec<(u64, u64)>> =
        (lattice_size <= PRECOMPUTE_LIMIT).then(|| LatticeIter::new(g, c).map(|l| lattice_pair(p, &l)).collect());

    let partials: Vec<Complex64> = units
        .par_iter()
        .map(|&(d, dbar)| {
            let d = d as u128;
            let dbar = dbar as u128;
            let shift = ((n * dbar) % c128 + (n2 * d) % c128) % c128;
            let term = |(q, l): (u64, u64)| {
                let e = ((q as u128 * dbar) % c128 + shift + l as u128) % c128;
                table.get(e as u64)
            };
            let sum: CompensatedSum = match &pairs {
                Some(pairs) => pairs.iter().map(|&ql| term(ql)).collect(),
                None => LatticeIter::new(g, c).map(|l| term(lattice_pair(p, &l))).collect(),
            };
            sum.value()
        })
        .collect();
    let total: CompensatedSum = partials.into_iter().collect();
    Ok(root_sum_value(total.value(), work))
}

fn lattice_pair(p: &KloostermanParams, lambda: &[i64]) -> (u64, u64) {
    let c = p.c;
    let lin: i128 = p.r.iter().zip(lambda).map(|(&r, &l)| r as i128 * l as i128).sum();
    let lin2: i128 = p.r2.iter().zip(lambda).map(|(&r, &l)| r as i128 * l as i128).sum();
    (residue(p.m.quadratic_form(lambda) + lin, c), residue(lin2, c))
}

/// Odometer over `(ℤ/c)^g`.
struct LatticeIter {
    c: i64,
    current: Option<Vec<i64>>,
}

impl LatticeIter {
    fn new(g: usize, c: u64) -> Self {
        LatticeIter { c: c as i64, current: Some(vec![0; g]) }
    }
}

impl Iterator for LatticeIter {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        for x in next.iter_mut() {
            *x += 1;
            if *x < self.c {
                self.current = Some(next);
                return Some(out);
            }
            *x = 0;
        }
        Some(out)
    }
}

/// CRT evaluation with brute force at each prime power.
pub fn kloosterman_crt(p: &KloostermanParams) -> Result<ExpSumValue> {
    kloosterman(p, &EvalConfig::with_strategy(Strategy::Crt))
}

fn split_with<F>(p: &KloostermanParams, local: F) -> Result<ExpSumValue>
where
    F: Fn(&KloostermanParams) -> Result<ExpSumValue>,
{
    let c = p.c;
    let factors = factorize(c as i64)?;
    if factors.pairs().len() <= 1 {
        return local(p);
    }
    let mut acc = ExpSumValue::one();
    for (_, _, q) in factors.prime_powers() {
        let cofactor = c / q;
        let inv = mod_inverse(cofactor as i64, q)? as i128;
        let twisted = KloostermanParams {
            m: p.m.scaled(cofactor as i64)?,
            c: q,
            n: residue(p.n as i128 * inv, q) as i64,
            r: p.r.clone(),
            n2: residue(p.n2 as i128 * inv, q) as i64,
            r2: p.r2.clone(),
        };
        acc = acc * local(&twisted)?;
    }
    Ok(acc)
}

fn local_fast(p: &KloostermanParams, work_limit: u128) -> Result<ExpSumValue> {
    let f = factorize(p.c as i64)?;
    if let [(prime, nu)] = f.pairs() {
        match kloosterman_diag_prime_power(&p.m, *prime, *nu, p.n, &p.r, p.n2, &p.r2) {
            Err(Error::StrategyUnavailable(_)) => {}
            other => return other,
        }
    }
    kloosterman_brute(p, work_limit)
}

/// Gauss-sum factorization for diagonal `m` at an odd prime power `p^ν`.
pub fn kloosterman_diag_prime_power(
    m: &HalfIntegralMatrix,
    p: u64,
    nu: u32,
    n: i64,
    r: &[i64],
    n2: i64,
    r2: &[i64],
) -> Result<ExpSumValue> {
    if !m.is_diagonal() {
        return Err(Error::StrategyUnavailable("index matrix is not diagonal"));
    }
    if p == 2 {
        return Err(Error::StrategyUnavailable("no closed-form path at p = 2"));
    }
    if !is_prime(p) || nu == 0 {
        return Err(Error::invalid(format!("{p}^{nu} is not a prime power")));
    }
    let g = m.dim();
    if r.len() != g || r2.len() != g {
        return Err(Error::invalid("r and r2 must match the dimension of m"));
    }
    let q = p.pow(nu);
    let diag = m.diagonal_entries();

    let mut sum = CompensatedSum::new();
    let mut err = 0.0;
    let mut terms = 0u32;
    for d in (1..q).filter(|d| d % p != 0) {
        let dbar = mod_inverse(d as i64, q)? as i128;
        let mut term = ExpSumValue::exact(unit_root(n as i128 * dbar + n2 as i128 * d as i128, q));
        term.abs_error = ROOT_ERROR;
        for j in 0..g {
            let a = residue(diag[j] as i128 * dbar, q) as i64;
            let b = residue(r[j] as i128 * dbar + r2[j] as i128, q) as i64;
            let gj = gauss_sum_prime_power(a, b, p, nu)?;
            term = term * gj;
            if term.value == Complex64::new(0.0, 0.0) && term.abs_error == 0.0 {
                break;
            }
        }
        sum.add(term.value);
        err += term.abs_error;
        terms += 1;
    }
    let value = sum.value();
    Ok(ExpSumValue::new(value, err + 4.0 * f64::EPSILON * (value.norm() + terms as f64)))
}

/// `|H^±_{m,c}(n,r)| / ((D,c) · c^{(g+1)/2} · det(2m)^{1/2})`.
pub fn bound_ratio_lemma32(
    m: &HalfIntegralMatrix,
    c: u64,
    n: i64,
    r: &[i64],
    sign: i8,
    cfg: &EvalConfig,
) -> Result<f64> {
    let d = positive_discriminant(m, n, r)?;
    let h = kloosterman_pm(m, c, n, r, sign, cfg)?;
    Ok(h.norm() / lemma32_bound(m, c, d))
}

/// The Kloosterman bound `(D,c) · c^{(g+1)/2} · det(2m)^{1/2}` itself.
pub fn lemma32_bound(m: &HalfIntegralMatrix, c: u64, discriminant: u64) -> f64 {
    let g = m.dim() as f64;
    let gcd = gcd_u(discriminant, c) as f64;
    gcd * (c as f64).powf((g + 1.0) / 2.0) * (m.det_twice() as f64).sqrt()
}

/// `|H^±_{m,c}(n,r)| / (c^{g+ε} · (D,c))`.
pub fn bound_ratio_bk(
    m: &HalfIntegralMatrix,
    c: u64,
    n: i64,
    r: &[i64],
    sign: i8,
    eps: f64,
    cfg: &EvalConfig,
) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::invalid("epsilon must be a nonnegative finite number"));
    }
    let d = positive_discriminant(m, n, r)?;
    let h = kloosterman_pm(m, c, n, r, sign, cfg)?;
    let g = m.dim() as f64;
    Ok(h.norm() / ((c as f64).powf(g + eps) * gcd_u(d, c) as f64))
}

fn positive_discriminant(m: &HalfIntegralMatrix, n: i64, r: &[i64]) -> Result<u64> {
    let datum = JacobiDatum::new(n, r.to_vec(), m.clone())?;
    u64::try_from(datum.discriminant()).map_err(|_| Error::invalid("discriminant out of range"))
}

pub(crate) fn signed_vector(r: &[i64], sign: i8) -> Result<Vec<i64>> {
    match sign {
        1 => Ok(r.to_vec()),
        -1 => Ok(r.iter().map(|x| -x).collect()),
        _ => Err(Error::invalid(format!("sign must be +1 or -1, got {sign}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_by_one(m: i64) -> HalfIntegralMatrix {
        HalfIntegralMatrix::diagonal(&[m]).unwrap()
    }

    fn brute(p: &KloostermanParams) -> ExpSumValue {
        kloosterman_brute(p, DEFAULT_WORK_LIMIT).unwrap()
    }

    #[test]
    fn brute_examples() {
        let m = one_by_one(1);
        let p = KloostermanParams::new(m.clone(), 1, 5, vec![3], -2, vec![7]).unwrap();
        assert!(brute(&p).agrees_with(&ExpSumValue::one(), 1e-14));

        let p = KloostermanParams::new(m.clone(), 2, 1, vec![0], 1, vec![0]).unwrap();
        assert!(brute(&p).norm() < 1e-12);

        let p = KloostermanParams::new(m.clone(), 3, 1, vec![0], 1, vec![0]).unwrap();
        assert!(brute(&p).agrees_with(&ExpSumValue::exact(Complex64::new(3.0, 0.0)), 1e-12));
    }

    #[test]
    fn pm_examples() {
        let m = one_by_one(1);
        let cfg = EvalConfig::default();
        let h = kloosterman_pm(&m, 3, 1, &[1], 1, &cfg).unwrap();
        assert!(h.norm() < 1e-12, "{h:?}");
        assert!(kloosterman_pm(&m, 3, 1, &[1], 0, &cfg).is_err());

        let plus = kloosterman_pm(&m, 7, 2, &[1], 1, &cfg).unwrap();
        let minus = kloosterman_pm(&m, 7, 2, &[1], -1, &cfg).unwrap();
        assert!(plus.conj().agrees_with(&minus, 1e-12));
    }

    #[test]
    fn crt_examples() {
        let m = one_by_one(1);
        let p = KloostermanParams::new(m, 6, 1, vec![0], 1, vec![0]).unwrap();
        assert!(kloosterman_crt(&p).unwrap().agrees_with(&brute(&p), 1e-10));

        let id = HalfIntegralMatrix::identity(2);
        let p = KloostermanParams::new(id, 15, 2, vec![1, -1], 3, vec![0, 2]).unwrap();
        assert!(kloosterman_crt(&p).unwrap().agrees_with(&brute(&p), 1e-9));

        let p = KloostermanParams::new(one_by_one(2), 7, 1, vec![1], 4, vec![3]).unwrap();
        assert_eq!(kloosterman_crt(&p).unwrap(), brute(&p));
    }

    #[test]
    fn diagonal_fast_path_examples() {
        let id = HalfIntegralMatrix::identity(2);
        let fast = kloosterman_diag_prime_power(&id, 3, 1, 1, &[0, 0], 1, &[0, 0]).unwrap();
        let p = KloostermanParams::new(id, 3, 1, vec![0, 0], 1, vec![0, 0]).unwrap();
        assert!(fast.agrees_with(&brute(&p), 1e-10));

        let m = HalfIntegralMatrix::diagonal(&[1, 2]).unwrap();
        for (n, r, n2, r2) in [(1, [0, 0], 1, [0, 0]), (2, [1, -1], 3, [2, 0]), (4, [1, 1], 4, [-1, -1])] {
            let fast = kloosterman_diag_prime_power(&m, 5, 2, n, &r, n2, &r2).unwrap();
            let p = KloostermanParams::new(m.clone(), 25, n, r.to_vec(), n2, r2.to_vec()).unwrap();
            assert!(fast.agrees_with(&brute(&p), 1e-9));
        }
    }

    #[test]
    fn diagonal_fast_path_when_p_nu_divides_every_entry() {
        // m = 3·diag(1, 2) at c = 3: every λ-sum is G(0, b; 3) = 3·[3 | b].
        let m = HalfIntegralMatrix::diagonal(&[3, 6]).unwrap();
        let fast = kloosterman_diag_prime_power(&m, 3, 1, 1, &[0, 0], 1, &[0, 0]).unwrap();
        // λ-sums give 3² each; the d-sum is a Kloosterman sum S(1,1;3) = -1.
        assert!((fast.value - Complex64::new(-9.0, 0.0)).norm() < 1e-12);
        let p = KloostermanParams::new(m, 3, 1, vec![0, 0], 1, vec![0, 0]).unwrap();
        assert!(fast.agrees_with(&brute(&p), 1e-12));
    }

    #[test]
    fn fast_path_refuses_unsupported_inputs() {
        let m = HalfIntegralMatrix::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        assert!(matches!(
            kloosterman_diag_prime_power(&m, 3, 1, 1, &[0, 0], 1, &[0, 0]),
            Err(Error::StrategyUnavailable(_))
        ));
        let id = HalfIntegralMatrix::identity(1);
        assert!(matches!(
            kloosterman_diag_prime_power(&id, 2, 3, 1, &[0], 1, &[0]),
            Err(Error::StrategyUnavailable(_))
        ));
    }

    #[test]
    fn work_limit_is_enforced() {
        let id = HalfIntegralMatrix::identity(3);
        let p = KloostermanParams::new(id, 50, 1, vec![0; 3], 1, vec![0; 3]).unwrap();
        assert!(matches!(kloosterman_brute(&p, 1000), Err(Error::WorkLimit { .. })));
    }

    #[test]
    fn ratio_examples() {
        let m = one_by_one(1);
        let cfg = EvalConfig::default();
        let r1 = bound_ratio_lemma32(&m, 1, 1, &[0], 1, &cfg).unwrap();
        assert!((r1 - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        let r3 = bound_ratio_lemma32(&m, 3, 1, &[0], 1, &cfg).unwrap();
        assert!((r3 - 3.0 / (3.0 * 2f64.sqrt())).abs() < 1e-12);

        assert!((bound_ratio_bk(&m, 1, 1, &[0], 1, 0.0, &cfg).unwrap() - 1.0).abs() < 1e-12);
        assert!((bound_ratio_bk(&m, 3, 1, &[0], 1, 0.0, &cfg).unwrap() - 1.0).abs() < 1e-12);
        assert!(bound_ratio_bk(&m, 3, 1, &[2], 1, 0.0, &cfg).is_err());
    }

    #[test]
    fn lattice_iterator_covers_everything_once() {
        let all: Vec<Vec<i64>> = LatticeIter::new(2, 3).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![1, 0]);
        assert_eq!(all[8], vec![2, 2]);
        assert_eq!(LatticeIter::new(0, 5).count(), 1);
    }
}
