//! Closed-form matrix elements `<n|U(z)|m>`, `<K,n|V(z)|K,m>` and
//! `<J,n|W(z)|J,m>`.
//!
//! Every element is split into a log-space magnitude, a unit phase carried
//! by integer powers of `kappa` (or `-conj(kappa)`), and a finite alternating
//! sum. For su(1,1) and su(2) the sum is normalized by its last term and
//! accumulated in [`DoubleDouble`]: with `|kappa|^2 = sinh^2|z|` the terms of
//! the su(1,1) sum exceed the result by up to `(1 + 2 sinh^2|z|)^min(n,m)`,
//! which plain doubles cannot absorb.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repr::AlgebraSpec;
use crate::special::{laguerre, ln_factorial, ln_pochhammer, DoubleDouble};
use crate::C64;

/// `|cos|z||` below which `tan|z|` is treated as a pole.
pub const POLE_EPS: f64 = 1e-12;

/// Change of variables attached to a displacement `z`.
///
/// `aux` holds `zeta = tanh|z| z/|z|` (su(1,1)) or `eta = tan|z| z/|z|`
/// (su(2)); it is `None` at a pole of `tan`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementFrame {
    pub z: C64,
    aux: Option<C64>,
    pub kappa: C64,
    /// `|kappa|^2`.
    pub kappa_sq: f64,
    /// `1 + |kappa|^2 = cosh^2|z|` for su(1,1), `1 - |kappa|^2 = cos^2|z|`
    /// for su(2), evaluated without cancellation.
    pub complement: f64,
    /// Square root of `complement` continued analytically in `|z|`:
    /// `cosh|z|`, or the signed `cos|z|`.
    pub root: f64,
}

impl DisplacementFrame {
    /// `zeta` or `eta`; a pole error when `cos|z| = 0` for su(2).
    pub fn aux(&self) -> Result<C64> {
        self.aux.ok_or_else(|| {
            Error::Pole(format!("eta = tan|z| z/|z| is undefined at |z| = {}", self.z.norm()))
        })
    }

    pub fn aux_opt(&self) -> Option<C64> {
        self.aux
    }
}

/// `z/|z|`, with the convention `0/0 = 0`.
fn unit(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        z / r
    }
}

pub fn frame(spec: &AlgebraSpec, z: C64) -> Result<DisplacementFrame> {
    let r = z.norm();
    let u = unit(z);
    match spec {
        AlgebraSpec::Su11 { .. } => {
            let sh = r.sinh();
            let ch = r.cosh();
            Ok(DisplacementFrame {
                z,
                aux: Some(u * r.tanh()),
                kappa: u * sh,
                kappa_sq: sh * sh,
                complement: ch * ch,
                root: ch,
            })
        }
        AlgebraSpec::Su2 { .. } => {
            let (s, c) = r.sin_cos();
            let aux = if c.abs() < POLE_EPS { None } else { Some(u * r.tan()) };
            Ok(DisplacementFrame {
                z,
                aux,
                kappa: u * s,
                kappa_sq: s * s,
                complement: c * c,
                root: c,
            })
        }
        AlgebraSpec::HeisenbergWeyl => Err(Error::Domain(
            "the Heisenberg-Weyl element has no kappa frame".into(),
        )),
    }
}

/// Unit phase of `kappa^(n-m)` for `n >= m`, of `(-conj kappa)^(m-n)` otherwise.
fn branch_phase(n: usize, m: usize, kappa: C64) -> C64 {
    let u = unit(kappa);
    if n >= m {
        u.powi((n - m) as i32)
    } else {
        (-u.conj()).powi((m - n) as i32)
    }
}

/// `<n| exp(z a+ - conj(z) a) |m>`.
pub fn u_element(n: usize, m: usize, z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        return if n == m { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let x = r * r;
    let (hi, lo) = (n.max(m), n.min(m));
    let ln_mag = -0.5 * x + 0.5 * (ln_factorial(lo as u64) - ln_factorial(hi as u64))
        + (hi - lo) as f64 * r.ln();
    let lag = laguerre(lo as u32, (hi - lo) as u32, x);
    branch_phase(n, m, z) * (ln_mag.exp() * lag)
}

/// `<K,n| exp(z K+ - conj(z) K-) |K,m>` for any spin `K > 0`.
pub fn v_element(k: f64, n: usize, m: usize, z: C64) -> Result<C64> {
    let spec = AlgebraSpec::su11(k)
        .map_err(|_| Error::Domain(format!("v_element requires K > 0, got {k}")))?;
    let f = frame(&spec, z)?;
    let (hi, lo) = (n.max(m), n.min(m));
    if f.kappa_sq == 0.0 && hi != lo {
        return Ok(C64::new(0.0, 0.0));
    }
    let two_k = 2.0 * k;
    let b = DoubleDouble::new(f.kappa_sq);
    // 1 + |kappa|^2, exact in double-double
    let a = DoubleDouble::ONE + b;
    let two_k_dd = DoubleDouble::new(two_k);

    // terms normalized by c_lo = (2K)_hi / ((hi-lo)! lo!)
    let mut ratio = DoubleDouble::ONE;
    let mut sum = DoubleDouble::ZERO;
    for j in (0..=lo).rev() {
        let term = ratio * a.powi(j as u32) * b.powi((lo - j) as u32);
        sum = if (lo - j) % 2 == 0 { sum + term } else { sum - term };
        if j > 0 {
            // c_{j-1} / c_j = (2K + n + m - j) j / ((lo - j + 1)(hi - j + 1))
            let up = (two_k_dd + DoubleDouble::new((n + m - j) as f64)).mul_f64(j as f64);
            ratio = (ratio * up).div_f64(((lo - j + 1) * (hi - j + 1)) as f64);
        }
    }

    let ln_c_lo =
        ln_pochhammer(two_k, hi as u32) - ln_factorial((hi - lo) as u64) - ln_factorial(lo as u64);
    let ln_norm = 0.5
        * (ln_factorial(n as u64) + ln_factorial(m as u64)
            - ln_pochhammer(two_k, n as u32)
            - ln_pochhammer(two_k, m as u32));
    let ln_kappa = if hi == lo { 0.0 } else { (hi - lo) as f64 * f.kappa_sq.sqrt().ln() };
    let ln_a = f.kappa_sq.ln_1p();
    let ln_mag = ln_norm + ln_kappa - (k + 0.5 * (n + m) as f64) * ln_a + ln_c_lo;
    Ok(branch_phase(n, m, f.kappa) * (ln_mag.exp() * sum.to_f64()))
}

/// `<J,n| exp(z J+ - conj(z) J-) |J,m>` with `two_j = 2J`.
///
/// The power `(1 - |kappa|^2)^(J - (n+m)/2)` is merged into each term of the
/// restricted sum; under `2J - n - m + j >= 0` the merged exponent
/// `J - (n+m)/2 + j` is never negative, so `|cos|z|| = 0` needs no special
/// treatment. Half-integer powers of `1 - |kappa|^2` are powers of the
/// signed `cos|z|`, which continues the formula past `|z| = pi/2`.
pub fn w_element(two_j: u32, n: usize, m: usize, z: C64) -> Result<C64> {
    if two_j == 0 {
        return Err(Error::InvalidSpin("su(2) spin must be positive".into()));
    }
    let tj = two_j as usize;
    if n > tj || m > tj {
        return Err(Error::IndexOutOfRange(format!(
            "w_element indices ({n}, {m}) outside 0..={tj}"
        )));
    }
    let spec = AlgebraSpec::Su2 { two_j };
    let f = frame(&spec, z)?;
    let (hi, lo) = (n.max(m), n.min(m));
    if f.kappa_sq == 0.0 && hi != lo {
        return Ok(C64::new(0.0, 0.0));
    }
    let b = DoubleDouble::new(f.kappa_sq);
    let s = DoubleDouble::new(f.root);
    let base = tj as isize - (n + m) as isize;

    // terms normalized by c_lo = 2J! / ((2J - hi)! (hi - lo)! lo!)
    let mut ratio = DoubleDouble::ONE;
    let mut sum = DoubleDouble::ZERO;
    for j in (0..=lo).rev() {
        let shift = base + j as isize;
        if shift < 0 {
            break;
        }
        let term = ratio * s.powi((shift + j as isize) as u32) * b.powi((lo - j) as u32);
        sum = if (lo - j) % 2 == 0 { sum + term } else { sum - term };
        if j > 0 {
            // c_{j-1} / c_j = (2J - n - m + j) j / ((lo - j + 1)(hi - j + 1))
            ratio = ratio
                .mul_f64((shift * j as isize) as f64)
                .div_f64(((lo - j + 1) * (hi - j + 1)) as f64);
        }
    }

    let ln_perm = |top: usize, k: usize| ln_factorial(top as u64) - ln_factorial((top - k) as u64);
    let ln_c_lo = ln_perm(tj, hi) - ln_factorial((hi - lo) as u64) - ln_factorial(lo as u64);
    let ln_norm = 0.5
        * (ln_factorial(n as u64) + ln_factorial(m as u64) - ln_perm(tj, n) - ln_perm(tj, m));
    let ln_kappa = if hi == lo { 0.0 } else { (hi - lo) as f64 * f.kappa_sq.sqrt().ln() };
    let ln_mag = ln_norm + ln_kappa + ln_c_lo;
    Ok(branch_phase(n, m, f.kappa) * (ln_mag.exp() * sum.to_f64()))
}

/// One matrix element request. `t != 0` selects the extended operators
/// `exp(z X+ - conj(z) X- + 2 i t X3)`, which only the oracle evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementQuery {
    pub algebra: AlgebraSpec,
    pub n: usize,
    pub m: usize,
    pub z: C64,
    pub t: f64,
}

impl ElementQuery {
    pub fn new(algebra: AlgebraSpec, n: usize, m: usize, z: C64) -> Self {
        Self { algebra, n, m, z, t: 0.0 }
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.algebra.check_index(self.n)?;
        self.algebra.check_index(self.m)?;
        if !(self.z.re.is_finite() && self.z.im.is_finite() && self.t.is_finite()) {
            return Err(Error::Domain("z and t must be finite".into()));
        }
        Ok(())
    }
}

/// Closed-form element for any of the three families.
pub fn element(q: &ElementQuery) -> Result<C64> {
    q.validate()?;
    if q.t != 0.0 {
        return Err(Error::NoClosedForm { t: q.t });
    }
    match q.algebra {
        AlgebraSpec::HeisenbergWeyl => Ok(u_element(q.n, q.m, q.z)),
        AlgebraSpec::Su11 { k } => v_element(k, q.n, q.m, q.z),
        AlgebraSpec::Su2 { two_j } => w_element(two_j, q.n, q.m, q.z),
    }
}
