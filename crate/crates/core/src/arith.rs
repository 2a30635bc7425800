//! Integer factorization, p-adic valuations, and exact linear combinations
//! of logarithms of primes.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::numeric::Real;
use crate::qlinalg::{format_rational, Q};

const SMALL_PRIMES_BOUND: u32 = 2000;

fn small_primes() -> Vec<u32> {
    let n = SMALL_PRIMES_BOUND as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).map(|k| k as u32).collect()
}

/// Deterministic for `n < 3.3e24`, probabilistic with negligible error above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: &BigUint, c: u64) -> Option<BigUint> {
    let one = BigUint::one();
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut r: u64 = 1;
    let mut q = BigUint::one();
    let m: u64 = 64;
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    while g == one {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g == one {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
        if r > 1 << 24 {
            return None;
        }
    }
    if g == *n {
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if g != one {
                break;
            }
        }
    }
    (g != *n).then_some(g)
}

fn split_into(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        out.push(n);
        return;
    }
    for c in 1u64.. {
        if let Some(d) = pollard_brent(&n, c) {
            let other = &n / &d;
            split_into(d, out);
            split_into(other, out);
            return;
        }
    }
}

/// Prime factorization `[(p, e)]` in increasing order of `p`.
pub fn factor(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut n = n.clone();
    let mut out: BTreeMap<BigUint, u32> = BTreeMap::new();
    if n.is_zero() {
        return vec![];
    }
    for p in small_primes() {
        let bp = BigUint::from(p);
        if &bp * &bp > n {
            break;
        }
        while (&n % &bp).is_zero() {
            n /= &bp;
            *out.entry(bp.clone()).or_default() += 1;
        }
    }
    let mut rest = Vec::new();
    split_into(n, &mut rest);
    for p in rest {
        *out.entry(p).or_default() += 1;
    }
    out.into_iter().collect()
}

/// Exponent of `p` in the nonzero rational `q`.
pub fn valuation(q: &Q, p: &BigUint) -> i64 {
    assert!(!q.is_zero(), "valuation of zero");
    let p = BigInt::from(p.clone());
    let count = |x: &BigInt| {
        let mut x = x.abs();
        let mut k = 0i64;
        while (&x % &p).is_zero() {
            x /= &p;
            k += 1;
        }
        k
    };
    count(q.numer()) - count(q.denom())
}

/// Primes dividing the numerator or denominator of `q`, increasing.
pub fn support(q: &Q) -> Vec<BigUint> {
    let mut ps: Vec<BigUint> = factor(&q.numer().magnitude().clone())
        .into_iter()
        .chain(factor(q.denom().magnitude()))
        .map(|(p, _)| p)
        .collect();
    ps.sort();
    ps.dedup();
    ps
}

/// Exact real number `Σ c_p log p` with rational coefficients over primes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogLinear {
    terms: BTreeMap<BigUint, Q>,
}

impl LogLinear {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c · log n` for a positive integer `n`, expanded over primes.
    pub fn log_int(n: &BigUint, c: &Q) -> Self {
        assert!(!n.is_zero(), "log of zero");
        let mut out = Self::zero();
        for (p, e) in factor(n) {
            out.add_term(p, c * Q::from_integer(BigInt::from(e)));
        }
        out
    }

    /// `log |q|` for a nonzero rational.
    pub fn log_abs(q: &Q) -> Self {
        let num = Self::log_int(q.numer().magnitude(), &Q::one());
        let den = Self::log_int(q.denom().magnitude(), &Q::one());
        num.sub(&den)
    }

    fn add_term(&mut self, p: BigUint, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(p.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(p.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero();
        for (p, d) in &self.terms {
            out.add_term(p.clone(), c * d);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &Q)> {
        self.terms.iter()
    }

    /// Coefficient of `log p`.
    pub fn coefficient(&self, p: &BigUint) -> Q {
        self.terms.get(p).cloned().unwrap_or_else(Q::zero)
    }

    /// Numerical value at the working precision.
    pub fn eval(&self) -> Real {
        let mut acc = Real::from_f64(0.0);
        for (p, c) in &self.terms {
            let lp = Real::from_bigint(&BigInt::from(p.clone())).ln();
            acc = acc.add_r(&Real::from_q(c).mul_r(&lp));
        }
        acc
    }

    /// Absolute value when the sign is decidable: every coefficient shares a
    /// sign. `None` otherwise.
    pub fn abs_if_signed(&self) -> Option<Self> {
        let pos = self.terms.values().all(|c| c.is_positive());
        let neg = self.terms.values().all(|c| c.is_negative());
        if pos {
            Some(self.clone())
        } else if neg {
            Some(self.scale(&-Q::one()))
        } else {
            None
        }
    }
}

impl fmt::Display for LogLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if a.is_one() {
                write!(f, "log {p}")?;
            } else {
                write!(f, "{} log {p}", format_rational(&a))?;
            }
        }
        Ok(())
    }
}

/// Naive height of a rational: `log max(|n|, |m|)` in lowest terms.
pub fn rational_height(t: &Q) -> LogLinear {
    let n = t.numer().magnitude();
    let m = t.denom().magnitude();
    let big = if n > m { n } else { m };
    if big.is_zero() {
        return LogLinear::zero();
    }
    LogLinear::log_int(big, &Q::one())
}

/// `max(|n|, |m|)` for `t = n/m` in lowest terms.
pub fn height_bound(t: &Q) -> BigUint {
    let n = t.numer().magnitude().clone();
    let m = t.denom().magnitude().clone();
    n.max(m)
}

pub fn biguint_to_u64(n: &BigUint) -> Option<u64> {
    n.to_u64()
}
