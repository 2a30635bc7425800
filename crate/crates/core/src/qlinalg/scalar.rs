use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational numbers.
pub type Q = BigRational;

/// Field operations shared by the exact and the high-precision scalar types.
///
/// Elimination routines only need arithmetic, an exact-zero test and a rough
/// base-2 magnitude for pivot selection and rank decisions on inexact types.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync + 'static {
    /// Arithmetic never rounds.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Panics when `other` is exactly zero.
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Approximate `log2 |self|`; `None` exactly when the value is zero.
    fn log2_magnitude(&self) -> Option<i64>;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

impl Scalar for Q {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        assert!(!Zero::is_zero(other), "division by zero");
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn log2_magnitude(&self) -> Option<i64> {
        if Zero::is_zero(self) {
            return None;
        }
        let n = self.numer().abs().bits() as i64;
        let d = self.denom().bits() as i64;
        Some(n - d)
    }
}

/// Rank decisions: exact, or "negligible relative to the largest entry by
/// this many bits".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tol {
    Exact,
    RelBits(u32),
}

impl Tol {
    pub(crate) fn negligible<F: Scalar>(&self, x: &F, scale: Option<i64>) -> bool {
        match (self, x.log2_magnitude()) {
            (_, None) => true,
            (Tol::Exact, Some(_)) => false,
            (Tol::RelBits(bits), Some(m)) => match scale {
                Some(s) => m < s - *bits as i64,
                None => false,
            },
        }
    }
}

/// Parses `"a"`, `"a/b"` or a plain decimal such as `"-0.125"` into an exact
/// rational.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    Some(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Canonical text form used in reports and documents.
pub fn format_rational(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn q(n: i64) -> Q {
    Q::from_i64(n)
}

pub fn qf(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6"), Some(qf(1, 2)));
        assert_eq!(parse_rational("-0.125"), Some(qf(-1, 8)));
        assert_eq!(parse_rational("2.5e2"), Some(q(250)));
        assert_eq!(parse_rational("1e-3"), Some(qf(1, 1000)));
        assert_eq!(parse_rational("7"), Some(q(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn magnitude_is_rough_log2() {
        assert_eq!(Scalar::log2_magnitude(&q(0)), None);
        assert_eq!(Scalar::log2_magnitude(&q(8)), Some(3));
        assert!(Scalar::log2_magnitude(&qf(1, 1024)).unwrap() < -8);
    }
}
