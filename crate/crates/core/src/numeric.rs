//! Real and complex scalars: multiprecision floats for transcendental work and
//! exact Gaussian rationals for Hodge data that happen to be algebraic.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, Sign as BigSign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::qlinalg::{Scalar, Q};

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision in bits.
pub const DEFAULT_BITS: usize = 128;

thread_local! {
    static BITS: Cell<usize> = const { Cell::new(DEFAULT_BITS) };
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

/// Working precision of the current thread.
pub fn working_bits() -> usize {
    BITS.with(Cell::get)
}

/// Runs `f` with the thread's working precision set to `bits`.
pub fn with_precision<T>(bits: usize, f: impl FnOnce() -> T) -> T {
    let old = BITS.with(|b| b.replace(bits.max(64)));
    struct Restore(usize);
    impl Drop for Restore {
        fn drop(&mut self) {
            BITS.with(|b| b.set(self.0));
        }
    }
    let _restore = Restore(old);
    f()
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Multiprecision real number; operations round to the working precision.
#[derive(Clone, Debug)]
pub struct Real(BigFloat);

impl Real {
    pub fn from_bigint(n: &BigInt) -> Self {
        let (sign, words) = n.to_u64_digits();
        if words.is_empty() {
            return Real(BigFloat::from_word(0, 64));
        }
        let s = if sign == BigSign::Minus { Sign::Neg } else { Sign::Pos };
        let e = (64 * words.len()) as i32;
        Real(BigFloat::from_words(&words, s, e))
    }

    pub fn from_q(q: &Q) -> Self {
        let n = Self::from_bigint(q.numer());
        if q.is_integer() {
            return n;
        }
        n.div_r(&Self::from_bigint(q.denom()))
    }

    pub fn from_f64(x: f64) -> Self {
        Real(BigFloat::from_f64(x, 64))
    }

    /// Parses a decimal literal.
    pub fn parse(s: &str) -> Option<Self> {
        crate::qlinalg::parse_rational(s).map(|q| Self::from_q(&q))
    }

    pub fn pi() -> Self {
        let p = working_bits();
        Real(with_consts(|cc| cc.pi(p, RM)))
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    /// Exact value of the binary float.
    pub fn to_q(&self) -> Q {
        let Some((words, _, sign, e, _)) = self.0.as_raw_parts() else {
            panic!("non-finite real");
        };
        if self.0.is_zero() {
            return <Q as Scalar>::zero();
        }
        let mut digits = Vec::with_capacity(words.len() * 2);
        for w in words {
            digits.push((*w & 0xffff_ffff) as u32);
            digits.push((*w >> 32) as u32);
        }
        let m = BigInt::from_slice(if sign == Sign::Neg { BigSign::Minus } else { BigSign::Plus }, &digits);
        let shift = e as i64 - 64 * words.len() as i64;
        if shift >= 0 {
            BigRational::from_integer(m << shift as usize)
        } else {
            BigRational::new(m, BigInt::from(1) << (-shift) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_q().to_f64().unwrap_or(f64::NAN)
    }

    pub fn add_r(&self, o: &Self) -> Self {
        Real(self.0.add(&o.0, working_bits(), RM))
    }

    pub fn sub_r(&self, o: &Self) -> Self {
        Real(self.0.sub(&o.0, working_bits(), RM))
    }

    pub fn mul_r(&self, o: &Self) -> Self {
        Real(self.0.mul(&o.0, working_bits(), RM))
    }

    pub fn div_r(&self, o: &Self) -> Self {
        assert!(!o.0.is_zero(), "division by zero");
        Real(self.0.div(&o.0, working_bits(), RM))
    }

    pub fn neg_r(&self) -> Self {
        Real(self.0.neg())
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative()
    }

    pub fn ln(&self) -> Self {
        let p = working_bits();
        Real(with_consts(|cc| self.0.ln(p, RM, cc)))
    }

    pub fn exp(&self) -> Self {
        let p = working_bits();
        Real(with_consts(|cc| self.0.exp(p, RM, cc)))
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt(working_bits(), RM))
    }

    /// Nonnegative `n`-th root of a nonnegative number.
    pub fn nth_root(&self, n: u32) -> Self {
        assert!(!self.is_negative(), "root of a negative number");
        if self.0.is_zero() || n == 1 {
            return self.clone();
        }
        if n == 2 {
            return self.sqrt();
        }
        let p = working_bits() + 32;
        let r = with_precision(p, || self.ln().div_r(&Real::from_i64(n as i64)).exp());
        Real(r.0.round(working_bits(), RM))
    }

    /// Atan2 on the working precision.
    pub fn atan2(y: &Self, x: &Self) -> Self {
        let p = working_bits();
        if x.0.is_zero() {
            let half_pi = Real::pi().div_r(&Real::from_i64(2));
            return if y.is_negative() { half_pi.neg_r() } else { half_pi };
        }
        let base = Real(with_consts(|cc| y.div_r(x).0.atan(p, RM, cc)));
        if !x.is_negative() {
            base
        } else if y.is_negative() {
            base.sub_r(&Real::pi())
        } else {
            base.add_r(&Real::pi())
        }
    }

    /// Decimal rendering with `digits` places after the point, rounded half
    /// away from zero from the exact binary value.
    pub fn to_decimal(&self, digits: usize) -> String {
        format_q_decimal(&self.to_q(), digits)
    }

    /// Scientific rendering via the float library, for debugging.
    pub fn to_sci(&self) -> String {
        with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }
}

/// Exact decimal rendering of a rational, rounded half away from zero.
pub fn format_q_decimal(q: &Q, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = q * BigRational::from_integer(scale.clone());
    let neg = scaled.is_negative();
    let a = scaled.abs();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let rounded = (a + half).floor().to_integer();
    let int_part = &rounded / &scale;
    let frac = &rounded % &scale;
    let sign = if neg && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    format!("{sign}{int_part}.{:0>width$}", frac.to_string(), width = digits)
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "{}", self.to_decimal(digits))
    }
}

impl Scalar for Real {
    const EXACT: bool = false;

    fn zero() -> Self {
        Real(BigFloat::from_word(0, 64))
    }
    fn one() -> Self {
        Real(BigFloat::from_word(1, 64))
    }
    fn from_i64(n: i64) -> Self {
        Real(BigFloat::from_i64(n, 64))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        self.add_r(o)
    }
    fn sub(&self, o: &Self) -> Self {
        self.sub_r(o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_r(o)
    }
    fn div(&self, o: &Self) -> Self {
        self.div_r(o)
    }
    fn neg(&self) -> Self {
        self.neg_r()
    }
    fn log2_magnitude(&self) -> Option<i64> {
        if self.0.is_zero() {
            None
        } else {
            self.0.exponent().map(|e| e as i64)
        }
    }
}

/// Complex field operations shared by [`Cx`] and [`Gq`].
pub trait ComplexScalar: Scalar {
    fn i() -> Self;
    fn from_q(q: &Q) -> Self;
    fn from_parts(re: &Q, im: &Q) -> Self;
    fn conj(&self) -> Self;
    fn to_cx(&self) -> Cx;

    fn re(&self) -> Self {
        self.add(&self.conj()).div(&Self::from_i64(2))
    }

    fn im(&self) -> Self {
        self.sub(&self.conj()).div(&Self::from_i64(2)).div(&Self::i())
    }
}

/// Complex number with [`Real`] parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Cx {
    pub re: Real,
    pub im: Real,
}

impl Cx {
    pub fn new(re: Real, im: Real) -> Self {
        Cx { re, im }
    }

    pub fn from_real(re: Real) -> Self {
        Cx { re, im: Real::zero() }
    }

    pub fn abs2(&self) -> Real {
        self.re.mul_r(&self.re).add_r(&self.im.mul_r(&self.im))
    }

    /// Principal logarithm of a nonzero rational.
    pub fn log_q(a: &Q) -> Self {
        assert!(!Scalar::is_zero(a), "log of zero");
        let re = Real::from_q(&a.abs()).ln();
        let im = if a.is_negative() { Real::pi() } else { Real::zero() };
        Cx { re, im }
    }

    /// Parses `"re"`, `"re+im i"`, `"re-im i"`, `"im i"`, with decimal or
    /// fractional parts; whitespace is ignored.
    pub fn parse(s: &str) -> Option<Self> {
        let (re, im) = parse_complex_parts(s)?;
        Some(Cx { re: Real::from_q(&re), im: Real::from_q(&im) })
    }
}

/// Splits a complex literal into exact real and imaginary parts.
pub fn parse_complex_parts(s: &str) -> Option<(Q, Q)> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i') else {
        return Some((crate::qlinalg::parse_rational(&t)?, <Q as Scalar>::zero()));
    };
    // Split at the last sign that is not the leading one nor part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let (re_s, im_s) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im_s = match im_s {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let im_s = im_s.strip_suffix('*').unwrap_or(im_s);
    Some((crate::qlinalg::parse_rational(re_s)?, crate::qlinalg::parse_rational(im_s.trim_start_matches('+'))?))
}

impl Scalar for Cx {
    const EXACT: bool = false;

    fn zero() -> Self {
        Cx { re: Real::zero(), im: Real::zero() }
    }
    fn one() -> Self {
        Cx { re: Real::one(), im: Real::zero() }
    }
    fn from_i64(n: i64) -> Self {
        Cx { re: Real::from_i64(n), im: Real::zero() }
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(&self.re) && Scalar::is_zero(&self.im)
    }
    fn add(&self, o: &Self) -> Self {
        Cx { re: self.re.add_r(&o.re), im: self.im.add_r(&o.im) }
    }
    fn sub(&self, o: &Self) -> Self {
        Cx { re: self.re.sub_r(&o.re), im: self.im.sub_r(&o.im) }
    }
    fn mul(&self, o: &Self) -> Self {
        Cx {
            re: self.re.mul_r(&o.re).sub_r(&self.im.mul_r(&o.im)),
            im: self.re.mul_r(&o.im).add_r(&self.im.mul_r(&o.re)),
        }
    }
    fn div(&self, o: &Self) -> Self {
        assert!(!o.is_zero(), "division by zero");
        let d = o.abs2();
        let num = self.mul(&o.conj());
        Cx { re: num.re.div_r(&d), im: num.im.div_r(&d) }
    }
    fn neg(&self) -> Self {
        Cx { re: self.re.neg_r(), im: self.im.neg_r() }
    }
    fn log2_magnitude(&self) -> Option<i64> {
        match (self.re.log2_magnitude(), self.im.log2_magnitude()) {
            (None, None) => None,
            (a, b) => a.max(b),
        }
    }
}

impl ComplexScalar for Cx {
    fn i() -> Self {
        Cx { re: Real::zero(), im: Real::one() }
    }
    fn from_q(q: &Q) -> Self {
        Cx { re: Real::from_q(q), im: Real::zero() }
    }
    fn from_parts(re: &Q, im: &Q) -> Self {
        Cx { re: Real::from_q(re), im: Real::from_q(im) }
    }
    fn conj(&self) -> Self {
        Cx { re: self.re.clone(), im: self.im.neg_r() }
    }
    fn to_cx(&self) -> Cx {
        self.clone()
    }
    fn re(&self) -> Self {
        Cx::from_real(self.re.clone())
    }
    fn im(&self) -> Self {
        Cx::from_real(self.im.clone())
    }
}

/// Exact Gaussian rational `re + im·i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gq {
    pub re: Q,
    pub im: Q,
}

impl Gq {
    pub fn new(re: Q, im: Q) -> Self {
        Gq { re, im }
    }
}

impl Scalar for Gq {
    const EXACT: bool = true;

    fn zero() -> Self {
        Gq { re: <Q as Scalar>::zero(), im: <Q as Scalar>::zero() }
    }
    fn one() -> Self {
        Gq { re: <Q as Scalar>::from_i64(1), im: <Q as Scalar>::zero() }
    }
    fn from_i64(n: i64) -> Self {
        Gq { re: <Q as Scalar>::from_i64(n), im: <Q as Scalar>::zero() }
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(&self.re) && Scalar::is_zero(&self.im)
    }
    fn add(&self, o: &Self) -> Self {
        Gq { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn sub(&self, o: &Self) -> Self {
        Gq { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    fn mul(&self, o: &Self) -> Self {
        Gq { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
    fn div(&self, o: &Self) -> Self {
        assert!(!o.is_zero(), "division by zero");
        let d = &o.re * &o.re + &o.im * &o.im;
        let n = self.mul(&o.conj());
        Gq { re: n.re / &d, im: n.im / d }
    }
    fn neg(&self) -> Self {
        Gq { re: -&self.re, im: -&self.im }
    }
    fn log2_magnitude(&self) -> Option<i64> {
        match (Scalar::log2_magnitude(&self.re), Scalar::log2_magnitude(&self.im)) {
            (None, None) => None,
            (a, b) => a.max(b),
        }
    }
}

impl ComplexScalar for Gq {
    fn i() -> Self {
        Gq { re: <Q as Scalar>::zero(), im: <Q as Scalar>::from_i64(1) }
    }
    fn from_q(q: &Q) -> Self {
        Gq { re: q.clone(), im: <Q as Scalar>::zero() }
    }
    fn from_parts(re: &Q, im: &Q) -> Self {
        Gq { re: re.clone(), im: im.clone() }
    }
    fn conj(&self) -> Self {
        Gq { re: self.re.clone(), im: -&self.im }
    }
    fn to_cx(&self) -> Cx {
        Cx::from_parts(&self.re, &self.im)
    }
    fn re(&self) -> Self {
        Gq { re: self.re.clone(), im: <Q as Scalar>::zero() }
    }
    fn im(&self) -> Self {
        Gq { re: self.im.clone(), im: <Q as Scalar>::zero() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::qf;

    #[test]
    fn rational_roundtrip_is_exact_for_dyadics() {
        let x = qf(-13, 64);
        assert_eq!(Real::from_q(&x).to_q(), x);
        assert_eq!(Real::from_i64(0).to_q(), <Q as Scalar>::zero());
        let big = Q::from_integer(BigInt::from(3).pow(90));
        assert_eq!(Real::from_q(&big).to_q(), big);
    }

    #[test]
    fn logs_and_roots() {
        let l = Real::from_i64(4).ln();
        let two_l2 = Real::from_i64(2).ln().mul_r(&Real::from_i64(2));
        assert!(l.sub_r(&two_l2).abs().to_f64() < 1e-35);
        let r = Real::from_i64(27).nth_root(3);
        assert!(r.sub_r(&Real::from_i64(3)).abs().to_f64() < 1e-35);
        assert_eq!(Real::from_q(&qf(1, 3)).to_decimal(5), "0.33333");
        assert_eq!(format_q_decimal(&qf(-5, 2), 0), "-3");
    }

    #[test]
    fn precision_guard_restores() {
        let before = working_bits();
        with_precision(256, || assert_eq!(working_bits(), 256));
        assert_eq!(working_bits(), before);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex_parts("1.5-2i"), Some((qf(3, 2), qf(-2, 1))));
        assert_eq!(parse_complex_parts("-i"), Some((qf(0, 1), qf(-1, 1))));
        assert_eq!(parse_complex_parts("3/4 + 1/2 i"), Some((qf(3, 4), qf(1, 2))));
        assert_eq!(parse_complex_parts("1e-3+2e-2i"), Some((qf(1, 1000), qf(1, 50))));
        assert_eq!(parse_complex_parts("7"), Some((qf(7, 1), qf(0, 1))));
    }

    #[test]
    fn gaussian_division() {
        let a = Gq::new(qf(1, 1), qf(2, 1));
        let b = Gq::new(qf(3, 1), qf(-1, 1));
        assert_eq!(a.div(&b).mul(&b), a);
    }
}
