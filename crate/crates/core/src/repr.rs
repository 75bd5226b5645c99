//! Finite matrix realizations of the three ladder-operator triples.
//!
//! Matrices act on column vectors indexed by the Fock label `n`; entry
//! `[row, col]` is `<row| X |col>`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraKind {
    #[serde(rename = "hw")]
    HeisenbergWeyl,
    Su11,
    Su2,
}

impl AlgebraKind {
    pub fn label(self) -> &'static str {
        match self {
            AlgebraKind::HeisenbergWeyl => "hw",
            AlgebraKind::Su11 => "su11",
            AlgebraKind::Su2 => "su2",
        }
    }
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for AlgebraKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hw" | "heisenberg-weyl" | "heisenbergweyl" => Ok(AlgebraKind::HeisenbergWeyl),
            "su11" | "su(1,1)" => Ok(AlgebraKind::Su11),
            "su2" | "su(2)" => Ok(AlgebraKind::Su2),
            other => Err(Error::Domain(format!("unknown algebra '{other}'"))),
        }
    }
}

/// Operator family together with its spin.
///
/// su(1,1) accepts any positive spin `K`, integral `2K` or not; su(2)
/// stores `2J` so that the half-integer constraint holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgebraSpec {
    HeisenbergWeyl,
    Su11 { k: f64 },
    Su2 { two_j: u32 },
}

impl AlgebraSpec {
    pub fn su11(k: f64) -> Result<Self> {
        if k.is_finite() && k > 0.0 {
            Ok(AlgebraSpec::Su11 { k })
        } else {
            Err(Error::InvalidSpin(format!("su(1,1) spin must be positive, got {k}")))
        }
    }

    pub fn su2(j: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        if j.is_finite() && two_j >= 1.0 && two_j.fract() == 0.0 && two_j <= u32::MAX as f64 {
            Ok(AlgebraSpec::Su2 { two_j: two_j as u32 })
        } else {
            Err(Error::InvalidSpin(format!(
                "su(2) spin must be a positive half-integer, got {j}"
            )))
        }
    }

    /// Build from a kind and an optional spin, as read from a command line.
    pub fn from_parts(kind: AlgebraKind, spin: Option<f64>) -> Result<Self> {
        match kind {
            AlgebraKind::HeisenbergWeyl => Ok(AlgebraSpec::HeisenbergWeyl),
            AlgebraKind::Su11 => Self::su11(spin.ok_or_else(|| {
                Error::InvalidSpin("su(1,1) requires a spin K".into())
            })?),
            AlgebraKind::Su2 => Self::su2(spin.ok_or_else(|| {
                Error::InvalidSpin("su(2) requires a spin J".into())
            })?),
        }
    }

    pub fn kind(&self) -> AlgebraKind {
        match self {
            AlgebraSpec::HeisenbergWeyl => AlgebraKind::HeisenbergWeyl,
            AlgebraSpec::Su11 { .. } => AlgebraKind::Su11,
            AlgebraSpec::Su2 { .. } => AlgebraKind::Su2,
        }
    }

    pub fn spin(&self) -> Option<f64> {
        match *self {
            AlgebraSpec::HeisenbergWeyl => None,
            AlgebraSpec::Su11 { k } => Some(k),
            AlgebraSpec::Su2 { two_j } => Some(two_j as f64 / 2.0),
        }
    }

    /// Dimension of the representation, `None` when infinite.
    pub fn exact_dim(&self) -> Option<usize> {
        match *self {
            AlgebraSpec::Su2 { two_j } => Some(two_j as usize + 1),
            _ => None,
        }
    }

    pub fn check_index(&self, n: usize) -> Result<()> {
        match self.exact_dim() {
            Some(d) if n >= d => Err(Error::IndexOutOfRange(format!(
                "state index {n} outside 0..={} for {}",
                d - 1,
                self
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.spin() {
            None => write!(f, "{}", self.kind()),
            Some(s) => write!(f, "{}(spin={})", self.kind(), s),
        }
    }
}

/// Dense square complex matrix on a cutoff Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    entries: DMatrix<C64>,
}

impl TruncatedOperator {
    pub fn new(entries: DMatrix<C64>) -> Self {
        assert!(entries.is_square(), "truncated operators are square");
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.entries.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(&self.entries * s)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self::new(&self.entries * &other.entries - &other.entries * &self.entries)
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|c| (0..d).all(|r| r == c || self.entries[(r, c)] == C64::new(0.0, 0.0)))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.norm()))
    }
}

impl std::ops::Add for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn add(self, rhs: &TruncatedOperator) -> TruncatedOperator {
        TruncatedOperator::new(&self.entries + &rhs.entries)
    }
}

impl std::ops::Sub for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn sub(self, rhs: &TruncatedOperator) -> TruncatedOperator {
        TruncatedOperator::new(&self.entries - &rhs.entries)
    }
}

impl std::ops::Mul for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn mul(self, rhs: &TruncatedOperator) -> TruncatedOperator {
        TruncatedOperator::new(&self.entries * &rhs.entries)
    }
}

/// Lowering, raising and diagonal (Cartan) generators of one representation.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub lower: TruncatedOperator,
    pub raise: TruncatedOperator,
    pub diag: TruncatedOperator,
}

/// Coefficient of `X_+ |n> = c |n+1>`.
fn raise_coeff(spec: &AlgebraSpec, n: usize) -> f64 {
    let n = n as f64;
    match *spec {
        AlgebraSpec::HeisenbergWeyl => (n + 1.0).sqrt(),
        AlgebraSpec::Su11 { k } => ((n + 1.0) * (2.0 * k + n)).sqrt(),
        AlgebraSpec::Su2 { two_j } => ((n + 1.0) * (two_j as f64 - n)).sqrt(),
    }
}

fn diag_value(spec: &AlgebraSpec, n: usize) -> f64 {
    let n = n as f64;
    match *spec {
        AlgebraSpec::HeisenbergWeyl => n,
        AlgebraSpec::Su11 { k } => k + n,
        AlgebraSpec::Su2 { two_j } => n - two_j as f64 / 2.0,
    }
}

/// Ladder matrices on the first `dim` basis states. For su(2) `dim` must be
/// exactly `2J+1`.
pub fn ladder_matrices(spec: &AlgebraSpec, dim: usize) -> Result<Ladder> {
    if let Some(d) = spec.exact_dim() {
        if dim != d {
            return Err(Error::DimensionMismatch { expected: d, got: dim });
        }
    } else if dim < 2 {
        return Err(Error::Domain(format!("cutoff dimension must be >= 2, got {dim}")));
    }
    let mut raise = DMatrix::<C64>::zeros(dim, dim);
    let mut diag = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..dim {
        if n + 1 < dim {
            raise[(n + 1, n)] = C64::new(raise_coeff(spec, n), 0.0);
        }
        diag[(n, n)] = C64::new(diag_value(spec, n), 0.0);
    }
    // the lowering coefficient sqrt(n (2K+n-1)) etc. is the raising one
    // shifted down by one, so the adjoint is exact
    let lower = raise.transpose();
    Ok(Ladder {
        lower: TruncatedOperator::new(lower),
        raise: TruncatedOperator::new(raise),
        diag: TruncatedOperator::new(diag),
    })
}

/// `z X_+ - conj(z) X_- + 2 i t X_3` on the truncated space.
pub fn generator(spec: &AlgebraSpec, dim: usize, z: C64, t: f64) -> Result<TruncatedOperator> {
    let l = ladder_matrices(spec, dim)?;
    Ok(generator_from(&l, z, t))
}

pub(crate) fn generator_from(l: &Ladder, z: C64, t: f64) -> TruncatedOperator {
    let mut g = l.raise.entries() * z - l.lower.entries() * z.conj();
    if t != 0.0 {
        g += l.diag.entries() * C64::new(0.0, 2.0 * t);
    }
    TruncatedOperator::new(g)
}

/// The 2x2 fundamental triple `(lower, raise, diag)` in the Weyl basis of
/// su(1,1) or su(2) inside sl(2, C).
///
/// For su(1,1) the lowering element carries a minus sign, so that
/// `[k+, k-] = -2 k3`; for su(2) `[j+, j-] = 2 j3`.
pub fn fundamental(kind: AlgebraKind) -> Result<Ladder> {
    let c = |x: f64| C64::new(x, 0.0);
    let z = c(0.0);
    let raise = DMatrix::from_row_slice(2, 2, &[z, c(1.0), z, z]);
    let diag = DMatrix::from_row_slice(2, 2, &[c(0.5), z, z, c(-0.5)]);
    let lower = match kind {
        AlgebraKind::Su11 => DMatrix::from_row_slice(2, 2, &[z, z, c(-1.0), z]),
        AlgebraKind::Su2 => DMatrix::from_row_slice(2, 2, &[z, z, c(1.0), z]),
        AlgebraKind::HeisenbergWeyl => {
            return Err(Error::Domain(
                "the Heisenberg-Weyl algebra has no 2x2 fundamental representation".into(),
            ))
        }
    };
    Ok(Ladder {
        lower: TruncatedOperator::new(lower),
        raise: TruncatedOperator::new(raise),
        diag: TruncatedOperator::new(diag),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_diff_interior(a: &TruncatedOperator, b: &TruncatedOperator, skip_edge: bool) -> f64 {
        let d = a.dim();
        let lim = if skip_edge { d - 1 } else { d };
        let mut m: f64 = 0.0;
        for r in 0..lim {
            for col in 0..lim {
                m = m.max((a.get(r, col) - b.get(r, col)).norm());
            }
        }
        m
    }

    #[test]
    fn su2_spin_half() {
        let l = ladder_matrices(&AlgebraSpec::su2(0.5).unwrap(), 2).unwrap();
        assert_eq!(l.raise.get(1, 0), c(1.0, 0.0));
        assert_eq!(l.raise.get(0, 1), c(0.0, 0.0));
        assert_eq!(l.diag.get(0, 0), c(-0.5, 0.0));
        assert_eq!(l.diag.get(1, 1), c(0.5, 0.0));
    }

    #[test]
    fn hw_dim3_raise() {
        let l = ladder_matrices(&AlgebraSpec::HeisenbergWeyl, 3).unwrap();
        assert_eq!(l.raise.get(1, 0), c(1.0, 0.0));
        assert_eq!(l.raise.get(2, 1), c(2f64.sqrt(), 0.0));
        assert_eq!(l.lower.get(0, 1), c(1.0, 0.0));
    }

    #[test]
    fn su11_quarter_spin() {
        let l = ladder_matrices(&AlgebraSpec::su11(0.25).unwrap(), 2).unwrap();
        assert!((l.raise.get(1, 0).re - 0.5f64.sqrt()).abs() < 1e-16);
        assert_eq!(l.diag.get(1, 1), c(1.25, 0.0));
    }

    #[test]
    fn su2_dimension_is_forced() {
        let spec = AlgebraSpec::su2(1.0).unwrap();
        assert_eq!(
            ladder_matrices(&spec, 4).unwrap_err(),
            Error::DimensionMismatch { expected: 3, got: 4 }
        );
        assert!(ladder_matrices(&AlgebraSpec::HeisenbergWeyl, 1).is_err());
    }

    #[test]
    fn spin_validation() {
        assert!(AlgebraSpec::su11(0.0).is_err());
        assert!(AlgebraSpec::su11(-1.0).is_err());
        assert!(AlgebraSpec::su11(0.3).is_ok());
        assert!(AlgebraSpec::su2(0.75).is_err());
        assert!(AlgebraSpec::su2(0.0).is_err());
        assert_eq!(AlgebraSpec::su2(1.5).unwrap(), AlgebraSpec::Su2 { two_j: 3 });
        assert!(AlgebraSpec::from_parts(AlgebraKind::Su11, None).is_err());
    }

    #[test]
    fn generator_examples() {
        let g = generator(&AlgebraSpec::HeisenbergWeyl, 2, c(1.0, 0.0), 0.0).unwrap();
        assert_eq!(g.get(0, 1), c(-1.0, 0.0));
        assert_eq!(g.get(1, 0), c(1.0, 0.0));
        assert_eq!(g.get(0, 0), c(0.0, 0.0));

        let g = generator(&AlgebraSpec::su2(0.5).unwrap(), 2, c(0.0, 1.0), 0.0).unwrap();
        assert_eq!(g.get(0, 1), c(0.0, 1.0));
        assert_eq!(g.get(1, 0), c(0.0, 1.0));

        for spec in [
            AlgebraSpec::HeisenbergWeyl,
            AlgebraSpec::su11(0.75).unwrap(),
            AlgebraSpec::su2(2.0).unwrap(),
        ] {
            let d = spec.exact_dim().unwrap_or(6);
            let g = generator(&spec, d, c(0.0, 0.0), 0.0).unwrap();
            assert_eq!(g.max_abs(), 0.0);
        }
    }

    #[test]
    fn adjoint_pairing_is_exact() {
        for spec in [
            AlgebraSpec::HeisenbergWeyl,
            AlgebraSpec::su11(0.25).unwrap(),
            AlgebraSpec::su11(2.5).unwrap(),
            AlgebraSpec::su2(2.5).unwrap(),
        ] {
            let d = spec.exact_dim().unwrap_or(12);
            let l = ladder_matrices(&spec, d).unwrap();
            assert_eq!(l.raise, l.lower.adjoint());
            assert!(l.raise.entries().iter().all(|x| x.im == 0.0 && x.re >= 0.0));
        }
    }

    #[test]
    fn commutation_relations() {
        let d = 10;
        for (spec, sign) in [
            (AlgebraSpec::su11(0.25).unwrap(), -2.0),
            (AlgebraSpec::su11(1.0).unwrap(), -2.0),
            (AlgebraSpec::su2(4.5).unwrap(), 2.0),
            (AlgebraSpec::su2(1.0).unwrap(), 2.0),
        ] {
            let d = spec.exact_dim().unwrap_or(d);
            let l = ladder_matrices(&spec, d).unwrap();
            let edge = spec.exact_dim().is_none();
            let dr = l.diag.commutator(&l.raise);
            let dl = l.diag.commutator(&l.lower);
            let rl = l.raise.commutator(&l.lower);
            let tol = 1e-12;
            assert!(max_diff_interior(&dr, &l.raise, edge) < tol);
            assert!(max_diff_interior(&dl, &l.lower.scale(c(-1.0, 0.0)), edge) < tol);
            assert!(max_diff_interior(&rl, &l.diag.scale(c(sign, 0.0)), edge) < tol, "{spec}");
        }
        // Heisenberg-Weyl: [N, a+] = a+, [a+, a] = -1 away from the cutoff
        let l = ladder_matrices(&AlgebraSpec::HeisenbergWeyl, d).unwrap();
        assert!(max_diff_interior(&l.diag.commutator(&l.raise), &l.raise, true) < 1e-12);
        let rl = l.raise.commutator(&l.lower);
        assert!(max_diff_interior(&rl, &TruncatedOperator::identity(d).scale(c(-1.0, 0.0)), true) < 1e-12);
    }

    #[test]
    fn fundamental_relations() {
        let one = c(1.0, 0.0);
        let f = fundamental(AlgebraKind::Su11).unwrap();
        assert_eq!(f.raise.commutator(&f.lower), f.diag.scale(c(-2.0, 0.0)));
        assert_eq!(f.diag.commutator(&f.raise), f.raise.scale(one));
        let f = fundamental(AlgebraKind::Su2).unwrap();
        assert_eq!(f.raise.commutator(&f.lower), f.diag.scale(c(2.0, 0.0)));
        assert_eq!(f.diag.commutator(&f.lower), f.lower.scale(c(-1.0, 0.0)));
        assert!(fundamental(AlgebraKind::HeisenbergWeyl).is_err());
    }
}
