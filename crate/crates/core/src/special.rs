//! Scalar kernels shared by every closed-form element: associated Laguerre
//! polynomials, Pochhammer symbols, falling factorials, binomials and
//! log-Gamma ratios.
//!
//! Factorial-type quantities are exact in integer arithmetic while they fit,
//! and move to log space past that. Alternating sums are accumulated in
//! [`DoubleDouble`]; plain sums of logs use [`KahanSum`].

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Largest `n` for which `n!` is finite in `f64`.
pub const MAX_FACTORIAL: u32 = 170;

/// Running sum with Kahan–Babuška (Neumaier) compensation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Unevaluated sum `hi + lo` of two doubles with `|lo| <= ulp(hi)/2`,
/// giving roughly 106 bits of significand.
///
/// Used for the alternating finite sums of the su(1,1) and su(2) elements,
/// where the individual terms can exceed the result by ten or more orders
/// of magnitude.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Self::new(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Self::new(b).mul_f64(q2);
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }

    /// Integer power by repeated squaring; `x.powi(0) == 1` including `x == 0`.
    pub fn powi(self, mut k: u32) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 20 {
        return (factorial_u64(n) as f64).ln();
    }
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

fn factorial_u64(n: u64) -> u64 {
    (1..=n).product()
}

/// `n!` as a double; `+inf` past [`MAX_FACTORIAL`].
pub fn factorial(n: u64) -> f64 {
    if n <= 20 {
        factorial_u64(n) as f64
    } else if n <= MAX_FACTORIAL as u64 {
        (21..=n).fold(factorial_u64(20) as f64, |acc, k| acc * k as f64)
    } else {
        f64::INFINITY
    }
}

/// Binomial coefficient `C(n, k)` for integer arguments.
///
/// Exact while the running product fits in `u128`, then through log-Gamma.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        match acc.checked_mul((n - i) as u128) {
            Some(p) => acc = p / (i as u128 + 1),
            None => {
                return (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp();
            }
        }
    }
    acc as f64
}

/// Associated Laguerre polynomial `L_n^{(alpha)}(x)` from its explicit
/// finite sum `sum_j (-1)^j C(n+alpha, n-j) x^j / j!`, ascending in `j`
/// with compensated accumulation.
pub fn laguerre_assoc(n: i64, alpha: i64, x: f64) -> Result<f64> {
    if n < 0 || alpha < 0 {
        return Err(Error::Domain(format!(
            "laguerre_assoc requires n >= 0 and alpha >= 0, got n={n}, alpha={alpha}"
        )));
    }
    Ok(laguerre(n as u32, alpha as u32, x))
}

/// Infallible form of [`laguerre_assoc`] for unsigned indices.
pub fn laguerre(n: u32, alpha: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let n = n as u64;
    let top = n + alpha as u64;
    // term_j = C(top, n-j) x^j / j!; walk the ratio from j = 0 so that no
    // factorial is ever formed explicitly. The walk and the sum run in
    // double-double: at x = 5, n = 24 the terms reach 1e9 times the result.
    let mut term = DoubleDouble::new(binomial(top, n));
    let mut acc = term;
    for j in 1..=n {
        // C(top, n-j) / C(top, n-j+1) = (n-j+1) / (top-n+j)
        term = term
            .mul_f64(-x)
            .mul_f64((n - j + 1) as f64)
            .div_f64((top - n + j) as f64 * j as f64);
        acc = acc + term;
    }
    acc.to_f64()
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`; `(a)_0 = 1`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// `ln |(a)_n|`, the log-space companion of [`pochhammer`] for large `n`.
pub fn ln_pochhammer(a: f64, n: u32) -> f64 {
    (0..n).map(|i| (a + i as f64).abs().ln()).collect::<KahanSum>().value()
}

/// Falling factorial `N!/(N-n)! = N (N-1) ... (N-n+1)`.
pub fn falling_factorial(big_n: u64, n: u64) -> Result<f64> {
    if n > big_n {
        return Err(Error::Domain(format!(
            "falling_factorial requires n <= N, got N={big_n}, n={n}"
        )));
    }
    Ok((0..n).fold(1.0, |acc, i| acc * (big_n - i) as f64))
}

/// `ln(Gamma(a+k)/Gamma(a)) = sum_{i<k} ln(a+i)` for `a > 0`.
pub fn log_gamma_ratio(a: f64, k: u32) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!(
            "log_gamma_ratio requires a > 0, got a={a}"
        )));
    }
    Ok(ln_pochhammer(a, k))
}
