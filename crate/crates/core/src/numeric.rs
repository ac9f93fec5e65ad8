//! Complex values with a tracked absolute error, roots of unity and
//! compensated accumulation.

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::ops::Mul;
use std::rc::Rc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::residue;

/// Absolute error charged to one evaluated root of unity.
pub const ROOT_ERROR: f64 = 8.0 * f64::EPSILON;

/// A complex number together with a guaranteed absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ExpSumRepr", into = "ExpSumRepr")]
pub struct ExpSumValue {
    pub value: Complex64,
    pub abs_error: f64,
}

#[derive(Serialize, Deserialize)]
struct ExpSumRepr {
    re: f64,
    im: f64,
    abs_error: f64,
}

impl From<ExpSumRepr> for ExpSumValue {
    fn from(r: ExpSumRepr) -> Self {
        ExpSumValue::new(Complex64::new(r.re, r.im), r.abs_error)
    }
}

impl From<ExpSumValue> for ExpSumRepr {
    fn from(v: ExpSumValue) -> Self {
        ExpSumRepr { re: v.value.re, im: v.value.im, abs_error: v.abs_error }
    }
}

impl ExpSumValue {
    pub fn new(value: Complex64, abs_error: f64) -> Self {
        debug_assert!(abs_error >= 0.0 && abs_error.is_finite());
        ExpSumValue { value, abs_error }
    }

    pub fn exact(value: Complex64) -> Self {
        ExpSumValue { value, abs_error: 0.0 }
    }

    pub fn zero() -> Self {
        Self::exact(Complex64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self::exact(Complex64::new(1.0, 0.0))
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }

    pub fn norm(&self) -> f64 {
        self.value.norm()
    }

    pub fn conj(&self) -> Self {
        ExpSumValue { value: self.value.conj(), abs_error: self.abs_error }
    }

    /// Multiplies by an exactly known scalar, charging one rounding.
    pub fn scale(&self, s: Complex64) -> Self {
        let v = self.value * s;
        ExpSumValue::new(v, self.abs_error * s.norm() + 2.0 * f64::EPSILON * v.norm())
    }

    /// True when the two values are consistent within `tol` plus both error bounds.
    pub fn agrees_with(&self, other: &ExpSumValue, tol: f64) -> bool {
        (self.value - other.value).norm() <= tol + self.abs_error + other.abs_error
    }
}

impl Mul for ExpSumValue {
    type Output = ExpSumValue;

    fn mul(self, rhs: ExpSumValue) -> ExpSumValue {
        let v = self.value * rhs.value;
        let err = self.norm() * rhs.abs_error
            + rhs.norm() * self.abs_error
            + self.abs_error * rhs.abs_error
            + 2.0 * f64::EPSILON * v.norm();
        ExpSumValue::new(v, err)
    }
}

/// `exp(2πi x / c)` with `x` reduced modulo `c` first.
#[inline]
pub fn unit_root(x: i128, c: u64) -> Complex64 {
    let r = residue(x, c);
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, co) = (TAU * (r as f64 / c as f64)).sin_cos();
    Complex64::new(co, s)
}

/// `exp(2πi (num/den) / c)` for a rational `num/den` with `den > 0`.
pub fn unit_root_rational(num: i128, den: i128, c: u64) -> Complex64 {
    debug_assert!(den > 0);
    let modulus = u64::try_from(den * c as i128).expect("modulus fits in u64");
    unit_root(num, modulus)
}

/// Precomputed `exp(2πi j / c)` for `j` in `[0, c)`.
#[derive(Debug, Clone)]
pub struct RootTable {
    modulus: u64,
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(modulus: u64) -> Self {
        let roots = (0..modulus).map(|j| unit_root(j as i128, modulus)).collect();
        RootTable { modulus, roots }
    }

    /// Table for `modulus`, reusing the one most recently built on this thread.
    pub fn cached(modulus: u64) -> Rc<RootTable> {
        thread_local! {
            static LAST: RefCell<Option<Rc<RootTable>>> = const { RefCell::new(None) };
        }
        LAST.with(|last| {
            let mut last = last.borrow_mut();
            match &*last {
                Some(t) if t.modulus == modulus => t.clone(),
                _ => {
                    let t = Rc::new(RootTable::new(modulus));
                    *last = Some(t.clone());
                    t
                }
            }
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Root for an already reduced exponent.
    #[inline]
    pub fn get(&self, j: u64) -> Complex64 {
        self.roots[j as usize]
    }

    #[inline]
    pub fn at(&self, x: i128) -> Complex64 {
        self.roots[residue(x, self.modulus) as usize]
    }
}

/// Neumaier compensated summation of complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: Neumaier,
    im: Neumaier,
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}

/// Sums `terms` unit roots: the result carries `terms · ROOT_ERROR` plus the
/// compensated-summation residual.
pub fn root_sum_value(sum: Complex64, terms: u128) -> ExpSumValue {
    let n = terms as f64;
    ExpSumValue::new(sum, n * ROOT_ERROR + 4.0 * f64::EPSILON * (sum.norm() + 1.0))
}
