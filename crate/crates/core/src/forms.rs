//! Half-integral positive definite matrices, Jacobi discriminants and the
//! reduction-theory quantity `m_{g-1}(T)`.
//!
//! A half-integral matrix `m` is stored through its integral double `2m`,
//! which is symmetric with even diagonal. Every determinant here is exact.

use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Upper bound on enumerated column configurations in [`min_submatrix_det`].
pub const UNIMODULAR_SEARCH_LIMIT: u128 = 100_000_000;

/// Positive definite symmetric half-integral `g × g` matrix, stored as `2m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HalfIntegralMatrix {
    g: usize,
    twice_m: Vec<i64>,
}

/// Wire format: `{"g": int, "twice_m": [[int, ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixJson {
    g: usize,
    twice_m: Vec<Vec<i64>>,
}

impl TryFrom<MatrixJson> for HalfIntegralMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.twice_m.len() != j.g {
            return Err(Error::invalid(format!(
                "matrix has {} rows but g = {}",
                j.twice_m.len(),
                j.g
            )));
        }
        HalfIntegralMatrix::new(j.twice_m)
    }
}

impl From<HalfIntegralMatrix> for MatrixJson {
    fn from(m: HalfIntegralMatrix) -> Self {
        MatrixJson { g: m.g, twice_m: m.rows() }
    }
}

impl HalfIntegralMatrix {
    /// Validates symmetry, even diagonal and positive definiteness of `2m`.
    pub fn new(twice_m: Vec<Vec<i64>>) -> Result<Self> {
        let g = twice_m.len();
        if g == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        if twice_m.iter().any(|row| row.len() != g) {
            return Err(Error::invalid("matrix must be square"));
        }
        for i in 0..g {
            if twice_m[i][i] % 2 != 0 {
                return Err(Error::invalid(format!(
                    "diagonal entry {} of 2m is odd",
                    twice_m[i][i]
                )));
            }
            for j in 0..i {
                if twice_m[i][j] != twice_m[j][i] {
                    return Err(Error::invalid("2m must be symmetric"));
                }
            }
        }
        let m = HalfIntegralMatrix { g, twice_m: twice_m.concat() };
        for k in 1..=g {
            if m.leading_minor(k) <= 0 {
                return Err(Error::invalid(format!(
                    "matrix is not positive definite (leading {k}x{k} minor of 2m is not positive)"
                )));
            }
        }
        Ok(m)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("matrix JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serializes")
    }

    /// `m = diag(entries)`.
    pub fn diagonal(entries: &[i64]) -> Result<Self> {
        let g = entries.len();
        let rows = (0..g)
            .map(|i| (0..g).map(|j| if i == j { 2 * entries[i] } else { 0 }).collect())
            .collect();
        Self::new(rows)
    }

    pub fn identity(g: usize) -> Self {
        Self::diagonal(&vec![1; g]).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.g
    }

    /// Entry `(2m)_{ij}`.
    #[inline]
    pub fn twice(&self, i: usize, j: usize) -> i64 {
        self.twice_m[i * self.g + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.twice_m.chunks(self.g).map(|r| r.to_vec()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.g).all(|i| (0..self.g).all(|j| i == j || self.twice(i, j) == 0))
    }

    /// Diagonal entries of `m` (integers).
    pub fn diagonal_entries(&self) -> Vec<i64> {
        (0..self.g).map(|i| self.twice(i, i) / 2).collect()
    }

    /// `det(2m)`.
    pub fn det_twice(&self) -> i128 {
        self.leading_minor(self.g)
    }

    fn leading_minor(&self, k: usize) -> i128 {
        let a = (0..k)
            .map(|i| (0..k).map(|j| self.twice(i, j) as i128).collect())
            .collect();
        det_bareiss(a)
    }

    /// `s · m` for a positive integer `s`.
    pub fn scaled(&self, s: i64) -> Result<Self> {
        if s <= 0 {
            return Err(Error::invalid("scale factor must be positive"));
        }
        let twice_m = self
            .twice_m
            .iter()
            .map(|&x| x.checked_mul(s).ok_or_else(|| Error::invalid("scaled matrix overflows")))
            .collect::<Result<Vec<_>>>()?;
        Ok(HalfIntegralMatrix { g: self.g, twice_m })
    }

    /// `m[λ] = λᵀ m λ`, an integer because `2m` has even diagonal.
    pub fn quadratic_form(&self, lambda: &[i64]) -> i128 {
        let mut total: i128 = 0;
        for i in 0..self.g {
            let li = lambda[i] as i128;
            total += (self.twice(i, i) / 2) as i128 * li * li;
            for j in (i + 1)..self.g {
                total += self.twice(i, j) as i128 * li * lambda[j] as i128;
            }
        }
        total
    }

    /// Solves `(2m) x = rhs` exactly.
    pub fn solve_twice(&self, rhs: &[i64]) -> Vec<Rational> {
        let g = self.g;
        let mut a: Vec<Vec<Rational>> = (0..g)
            .map(|i| {
                let mut row: Vec<Rational> =
                    (0..g).map(|j| Rational::from_integer(self.twice(i, j) as i128)).collect();
                row.push(Rational::from_integer(rhs[i] as i128));
                row
            })
            .collect();
        for col in 0..g {
            let pivot = (col..g).find(|&r| !a[r][col].is_zero()).expect("2m is nonsingular");
            a.swap(col, pivot);
            let inv = a[col][col].recip();
            for x in a[col].iter_mut() {
                *x *= inv;
            }
            for r in 0..g {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col];
                    for c in col..=g {
                        let v = a[col][c] * f;
                        a[r][c] -= v;
                    }
                }
            }
        }
        a.into_iter().map(|row| row[g]).collect()
    }

    /// `uᵀ m⁻¹ v`, exact.
    pub fn inverse_form(&self, u: &[i64], v: &[i64]) -> Rational {
        let x = self.solve_twice(v);
        let s: Rational = u.iter().zip(&x).map(|(&ui, xi)| *xi * ui as i128).sum();
        s * 2
    }

    /// `T[U] = Uᵀ T U` for a square integer `U` given by rows.
    pub fn transform(&self, u: &[Vec<i64>]) -> Result<Self> {
        let g = self.g;
        if u.len() != g || u.iter().any(|r| r.len() != g) {
            return Err(Error::invalid("transform matrix has the wrong shape"));
        }
        let rows = (0..g)
            .map(|i| {
                (0..g)
                    .map(|j| {
                        let mut s: i128 = 0;
                        for a in 0..g {
                            for b in 0..g {
                                s += u[a][i] as i128 * self.twice(a, b) as i128 * u[b][j] as i128;
                            }
                        }
                        i64::try_from(s).map_err(|_| Error::invalid("transformed matrix overflows"))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }
}

/// A Fourier index `(n, r)` together with its index matrix `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiDatum {
    pub n: i64,
    pub r: Vec<i64>,
    pub m: HalfIntegralMatrix,
}

impl JacobiDatum {
    /// Checks dimensions and `D > 0`.
    pub fn new(n: i64, r: Vec<i64>, m: HalfIntegralMatrix) -> Result<Self> {
        let d = Self::new_unchecked(n, r, m)?;
        if d.discriminant() <= 0 {
            return Err(Error::invalid(format!(
                "discriminant {} of (n, r) is not positive",
                d.discriminant()
            )));
        }
        Ok(d)
    }

    /// Checks dimensions only.
    pub fn new_unchecked(n: i64, r: Vec<i64>, m: HalfIntegralMatrix) -> Result<Self> {
        if r.len() != m.dim() {
            return Err(Error::invalid(format!(
                "r has length {} but m is {}x{}",
                r.len(),
                m.dim(),
                m.dim()
            )));
        }
        Ok(JacobiDatum { n, r, m })
    }

    pub fn g(&self) -> usize {
        self.m.dim()
    }

    /// `D = det((2n, rᵀ), (r, 2m))`.
    pub fn discriminant(&self) -> i128 {
        let g = self.g();
        let mut a = vec![vec![0i128; g + 1]; g + 1];
        a[0][0] = 2 * self.n as i128;
        for i in 0..g {
            a[0][i + 1] = self.r[i] as i128;
            a[i + 1][0] = self.r[i] as i128;
            for j in 0..g {
                a[i + 1][j + 1] = self.m.twice(i, j) as i128;
            }
        }
        det_bareiss(a)
    }

    /// `½ det(2m) (4n − m⁻¹[r])`, evaluated over the rationals.
    pub fn discriminant_split(&self) -> Rational {
        let det = Rational::from_integer(self.m.det_twice());
        let inner = Rational::from_integer(4 * self.n as i128) - self.m.inverse_form(&self.r, &self.r);
        det * inner / 2
    }
}

/// `m[λ]` as an exact rational.
pub fn quadratic_value(m: &HalfIntegralMatrix, lambda: &[i64]) -> Result<Rational> {
    if lambda.len() != m.dim() {
        return Err(Error::invalid(format!(
            "vector has length {} but m is {}x{}",
            lambda.len(),
            m.dim(),
            m.dim()
        )));
    }
    Ok(Rational::from_integer(m.quadratic_form(lambda)))
}

/// Fraction-free Gaussian elimination.
pub(crate) fn det_bareiss(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match ((k + 1)..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Upper estimate of `m_{g-1}(T)`: the minimum, over primitive column systems
/// `C ∈ ℤ^{g×(g-1)}` with entries in `[-bound, bound]`, of `det(Cᵀ T C)`.
///
/// Primitive systems are exactly the leading `g-1` columns of matrices in
/// `GL_g(ℤ)`, so every candidate is a genuine value of `det(T[U]|_{g-1})`.
/// Bounded search can only overestimate the true minimum; the result is
/// nonincreasing in `bound`.
pub fn min_submatrix_det(t: &HalfIntegralMatrix, bound: u32) -> Result<Rational> {
    let g = t.dim();
    if g < 2 {
        return Err(Error::invalid("m_{g-1}(T) needs g >= 2"));
    }
    if bound == 0 {
        return Err(Error::invalid("search bound must be positive"));
    }
    let k = g - 1;
    let side = 2 * bound as u128 + 1;
    let cells = (g * k) as u32;
    let total = side
        .checked_pow(cells)
        .filter(|&w| w <= UNIMODULAR_SEARCH_LIMIT)
        .ok_or(Error::WorkLimit { work: side.saturating_pow(cells), limit: UNIMODULAR_SEARCH_LIMIT })?;

    let best = (0..total as u64)
        .into_par_iter()
        .filter_map(|code| {
            let cols = decode_columns(code, g, k, bound);
            if !is_primitive(&cols, g) {
                return None;
            }
            Some(gram_det(t, &cols))
        })
        .min()
        .expect("the standard basis is always enumerated");
    Ok(Rational::new(best, 1i128 << k))
}

/// `m_{g-1}(T) / D^{1 - 1/g}` with `D = det(2T)`.
pub fn reduction_ratio(t: &HalfIntegralMatrix, bound: u32) -> Result<f64> {
    let m = min_submatrix_det(t, bound)?;
    let g = t.dim() as f64;
    let d = t.det_twice() as f64;
    let m = *m.numer() as f64 / *m.denom() as f64;
    Ok(m / d.powf(1.0 - 1.0 / g))
}

fn decode_columns(mut code: u64, g: usize, k: usize, bound: u32) -> Vec<Vec<i64>> {
    let side = 2 * bound as u64 + 1;
    let mut cols = vec![vec![0i64; g]; k];
    for col in cols.iter_mut() {
        for x in col.iter_mut() {
            *x = (code % side) as i64 - bound as i64;
            code /= side;
        }
    }
    cols
}

/// `det((2T)[C])`, i.e. `2^{g-1} det(T[C])`.
fn gram_det(t: &HalfIntegralMatrix, cols: &[Vec<i64>]) -> i128 {
    let g = t.dim();
    let gram = cols
        .iter()
        .map(|u| {
            cols.iter()
                .map(|v| {
                    let mut s = 0i128;
                    for a in 0..g {
                        for b in 0..g {
                            s += u[a] as i128 * t.twice(a, b) as i128 * v[b] as i128;
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    det_bareiss(gram)
}

/// The `g × k` matrix with these columns extends to `GL_g(ℤ)` iff its maximal
/// minors are coprime.
fn is_primitive(cols: &[Vec<i64>], g: usize) -> bool {
    let k = cols.len();
    let mut acc: i128 = 0;
    for skip in RowSubsets::new(g, k) {
        let minor = skip
            .iter()
            .map(|&row| cols.iter().map(|c| c[row] as i128).collect())
            .collect();
        acc = num_integer::gcd(acc, det_bareiss(minor));
        if acc.is_one() {
            return true;
        }
    }
    false
}

/// All `k`-subsets of `0..g`, in lexicographic order.
struct RowSubsets {
    g: usize,
    current: Option<Vec<usize>>,
}

impl RowSubsets {
    fn new(g: usize, k: usize) -> Self {
        RowSubsets { g, current: (k <= g).then(|| (0..k).collect()) }
    }
}

impl Iterator for RowSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.g - k + i {
                next[i] += 1;
                for j in (i + 1)..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
