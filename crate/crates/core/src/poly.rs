//! Univariate rational polynomials and rational functions in `T`, enough to
//! describe one-parameter Kummer families `a(T)`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::HeightError;
use crate::qlinalg::{format_rational, parse_rational, Q};

/// Dense polynomial, `coeffs[i]` the coefficient of `T^i`, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<Q>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    /// `T - x`.
    pub fn linear(x: &Q) -> Self {
        Self::new(vec![-x.clone(), Q::one()])
    }

    pub fn t() -> Self {
        Self::new(vec![Q::zero(), Q::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has degree `-1` here.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn leading(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = Q::zero();
        Self::new((0..n).map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z)).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(Q::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.coeffs.clone();
        let dd = d.coeffs.len();
        if r.len() < dd {
            return (Self::zero(), self.clone());
        }
        let lead = d.leading();
        let mut q = vec![Q::zero(); r.len() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd - 1] / &lead;
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= &c * dc;
            }
            q[k] = c;
        }
        r.truncate(dd - 1);
        (Self::new(q), Self::new(r))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Q::one() / self.leading()))
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer((i as i64).into())).collect())
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Multiplicity of the root `x`.
    pub fn root_multiplicity(&self, x: &Q) -> u32 {
        assert!(!self.is_zero());
        let lin = Self::linear(x);
        let mut p = self.clone();
        let mut k = 0;
        loop {
            let (q, r) = p.div_rem(&lin);
            if !r.is_zero() {
                return k;
            }
            p = q;
            k += 1;
        }
    }

    /// Yun's squarefree decomposition: monic squarefree `g_i` with
    /// `self = c · Π g_i^i`, returned as `(g_i, i)` with nonconstant `g_i`.
    pub fn squarefree(&self) -> Vec<(Self, u32)> {
        let mut out = Vec::new();
        if self.degree() < 1 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_rem(&a0).0;
        let mut c = fp.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree() >= 1 {
            let a = b.gcd(&d);
            if a.degree() >= 1 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let a = c.abs();
            let mono = match i {
                0 => String::new(),
                1 => "T".into(),
                _ => format!("T^{i}"),
            };
            if mono.is_empty() {
                write!(f, "{}", format_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", format_rational(&a))?;
            }
        }
        Ok(())
    }
}

/// Rational function `num/den` in lowest terms with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFn {
    num: QPoly,
    den: QPoly,
}

impl RatFn {
    pub fn new(num: QPoly, den: QPoly) -> Result<Self, HeightError> {
        if den.is_zero() {
            return Err(HeightError::Parse("rational function with zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(RatFn { num, den: QPoly::constant(Q::one()) });
        }
        let g = num.gcd(&den);
        let num = num.div_rem(&g).0;
        let den = den.div_rem(&g).0;
        let lc = den.leading();
        Ok(RatFn { num: num.scale(&(Q::one() / &lc)), den: den.scale(&(Q::one() / lc)) })
    }

    pub fn poly(p: QPoly) -> Self {
        RatFn { num: p, den: QPoly::constant(Q::one()) }
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree() <= 0 && self.den.degree() == 0
    }

    pub fn add(&self, o: &Self) -> Result<Self, HeightError> {
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn sub(&self, o: &Self) -> Result<Self, HeightError> {
        Self::new(self.num.mul(&o.den).sub(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn mul(&self, o: &Self) -> Result<Self, HeightError> {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &Self) -> Result<Self, HeightError> {
        if o.is_zero() {
            return Err(HeightError::Parse("division by the zero function".into()));
        }
        Self::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    /// Value at `t`; `None` at a pole.
    pub fn eval(&self, t: &Q) -> Option<Q> {
        let d = self.den.eval(t);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(t) / d)
    }

    /// Order of vanishing at the rational point `x` (negative at poles).
    pub fn ord_at(&self, x: &Q) -> i64 {
        if self.num.is_zero() {
            return 0;
        }
        self.num.root_multiplicity(x) as i64 - self.den.root_multiplicity(x) as i64
    }

    /// Order of vanishing at infinity.
    pub fn ord_at_infinity(&self) -> i64 {
        self.den.degree() - self.num.degree()
    }

    /// `Σ_x deg(x)·|ord_x|` over all closed points of the projective line:
    /// the degree of the divisor of zeros plus the divisor of poles.
    pub fn divisor_degree(&self) -> i64 {
        if self.num.is_zero() {
            return 0;
        }
        let finite = |p: &QPoly| p.squarefree().iter().map(|(g, m)| g.degree() * *m as i64).sum::<i64>();
        finite(&self.num) + finite(&self.den) + self.ord_at_infinity().abs()
    }

    /// Parses expressions in `T` built from rationals, `+ - * / ^`, and
    /// parentheses, e.g. `"T*(T-1)^2"` or `"(3T+1)/(T^2-2)"`.
    pub fn parse(s: &str) -> Result<Self, HeightError> {
        let mut p = Parser { chars: s.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
        let v = p.expr()?;
        if p.pos != p.chars.len() {
            return Err(HeightError::Parse(format!("unexpected '{}' in family expression", p.chars[p.pos])));
        }
        Ok(v)
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RatFn, HeightError> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc.add(&rhs)? } else { acc.sub(&rhs)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFn, HeightError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?)?;
                }
                Some('/') => {
                    self.pos += 1;
                    acc = acc.div(&self.power()?)?;
                }
                Some('(' | 'T' | 't') => acc = acc.mul(&self.power()?)?,
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<RatFn, HeightError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            let v = self.power()?;
            return RatFn::poly(QPoly::zero()).sub(&v);
        }
        let base = self.primary()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let e: u32 = self.chars[start..self.pos]
            .iter()
            .collect::<String>()
            .parse()
            .map_err(|_| HeightError::Parse("exponent must be a nonnegative integer".into()))?;
        RatFn::new(base.num.pow(e), base.den.pow(e))
    }

    fn primary(&mut self) -> Result<RatFn, HeightError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(HeightError::Parse("missing ')' in family expression".into()));
                }
                self.pos += 1;
                Ok(v)
            }
            Some('T' | 't') => {
                self.pos += 1;
                Ok(RatFn::poly(QPoly::t()))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                let lit: String = self.chars[start..self.pos].iter().collect();
                let q = parse_rational(&lit).ok_or_else(|| HeightError::Parse(format!("bad number '{lit}'")))?;
                Ok(RatFn::poly(QPoly::constant(q)))
            }
            Some(c) => Err(HeightError::Parse(format!("unexpected '{c}' in family expression"))),
            None => Err(HeightError::Parse("family expression ended early".into())),
        }
    }
}
