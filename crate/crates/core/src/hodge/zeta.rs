//! Coefficient table for `ζ` as a Lie polynomial in the components
//! `δ_{p,q}`.
//!
//! File schema, one record per line, `#` starts a comment:
//!
//! ```text
//! version 1
//! max_weight 4
//! term -1:-2 re=0 im=-1/2
//! term -1:-1 -1:-2 re=-1/8 im=0
//! ```
//!
//! A `term` lists bidegrees `(p_1, q_1) ... (p_r, q_r)` and stands for the
//! nested bracket `[δ_{p_1,q_1}, [δ_{p_2,q_2}, ... δ_{p_r,q_r}]]` times the
//! complex rational coefficient. `max_weight` is the largest `-(p+q)` the
//! table is complete for: a component of `δ` beyond it is an error.

use std::collections::BTreeMap;
use std::path::Path;

use super::bigrading::Bidegree;
use crate::error::HeightError;
use crate::numeric::ComplexScalar;
use crate::qlinalg::{format_rational, parse_rational, Matrix, Scalar, Q};

const TRANSCRIBED: &str = include_str!("../../data/zeta_table.txt");

#[derive(Clone, Debug, PartialEq)]
pub struct ZetaTerm {
    pub word: Vec<Bidegree>,
    pub re: Q,
    pub im: Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZetaTable {
    pub version: u32,
    pub max_weight: i64,
    pub terms: Vec<ZetaTerm>,
}

impl ZetaTable {
    /// The table shipped with the crate.
    pub fn transcribed() -> Self {
        Self::parse(TRANSCRIBED).expect("shipped table parses")
    }

    /// No terms, complete for every weight: `ζ = 0`.
    pub fn zero() -> Self {
        ZetaTable { version: 1, max_weight: i64::MAX, terms: vec![] }
    }

    pub fn parse(text: &str) -> Result<Self, HeightError> {
        let mut version = None;
        let mut max_weight = None;
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| HeightError::Parse(format!("zeta table line {}: {what}", lineno + 1));
            let mut words = line.split_whitespace();
            match words.next() {
                Some("version") => {
                    version = Some(words.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad version"))?)
                }
                Some("max_weight") => {
                    max_weight =
                        Some(words.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad max_weight"))?)
                }
                Some("term") => {
                    let mut word = Vec::new();
                    let (mut re, mut im) = (Q::zero(), Q::zero());
                    for tok in words {
                        if let Some(v) = tok.strip_prefix("re=") {
                            re = parse_rational(v).ok_or_else(|| bad("bad coefficient"))?;
                        } else if let Some(v) = tok.strip_prefix("im=") {
                            im = parse_rational(v).ok_or_else(|| bad("bad coefficient"))?;
                        } else {
                            let (p, q) = tok.split_once(':').ok_or_else(|| bad("expected p:q"))?;
                            let p: i64 = p.parse().map_err(|_| bad("bad p"))?;
                            let q: i64 = q.parse().map_err(|_| bad("bad q"))?;
                            if p >= 0 || q >= 0 {
                                return Err(bad("bidegrees must have p < 0 and q < 0"));
                            }
                            word.push((p, q));
                        }
                    }
                    if word.is_empty() {
                        return Err(bad("empty term"));
                    }
                    terms.push(ZetaTerm { word, re, im });
                }
                Some(other) => return Err(bad(&format!("unknown record `{other}`"))),
                None => {}
            }
        }
        let version = version.ok_or_else(|| HeightError::Parse("zeta table: missing version".into()))?;
        if version != 1 {
            return Err(HeightError::Parse(format!("zeta table: unsupported version {version}")));
        }
        let max_weight = max_weight.ok_or_else(|| HeightError::Parse("zeta table: missing max_weight".into()))?;
        Ok(ZetaTable { version, max_weight, terms })
    }

    /// Reads a table file. A missing file gives the zero table and a warning
    /// string for the caller to print.
    pub fn load(path: &Path) -> Result<(Self, Option<String>), HeightError> {
        match std::fs::read_to_string(path) {
            Ok(text) => Ok((Self::parse(&text)?, None)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok((
                Self::zero(),
                Some(format!("warning: zeta table {} not found; using the zero table", path.display())),
            )),
            Err(e) => Err(HeightError::Io(format!("{}: {e}", path.display()))),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("version {}\nmax_weight {}\n", self.version, self.max_weight);
        for t in &self.terms {
            out.push_str("term");
            for (p, q) in &t.word {
                out.push_str(&format!(" {p}:{q}"));
            }
            out.push_str(&format!(" re={} im={}\n", format_rational(&t.re), format_rational(&t.im)));
        }
        out
    }

    /// Same words with every coefficient zero.
    pub fn zeroed(&self) -> Self {
        ZetaTable {
            terms: self.terms.iter().map(|t| ZetaTerm { word: t.word.clone(), re: Q::zero(), im: Q::zero() }).collect(),
            ..self.clone()
        }
    }

    /// `ζ` from the components of `δ`. Components absent from the map are
    /// zero.
    pub fn evaluate<C: ComplexScalar>(
        &self,
        components: &BTreeMap<Bidegree, Matrix<C>>,
        dim: usize,
    ) -> Result<Matrix<C>, HeightError> {
        if let Some(((p, q), _)) = components.iter().find(|((p, q), _)| -(p + q) > self.max_weight) {
            return Err(HeightError::CoefficientTableMissing(format!(
                "delta has a ({p},{q}) component of weight {} beyond the table's {}",
                p + q,
                -self.max_weight
            )));
        }
        let mut zeta = Matrix::zeros(dim, dim);
        for t in &self.terms {
            if t.re.is_zero() && t.im.is_zero() {
                continue;
            }
            let mut acc: Option<Matrix<C>> = None;
            for pq in t.word.iter().rev() {
                let Some(d) = components.get(pq) else {
                    acc = None;
                    break;
                };
                acc = Some(match acc {
                    None => d.clone(),
                    Some(inner) => d.commutator(&inner),
                });
            }
            if let Some(m) = acc {
                zeta = zeta.add(&m.scale(&C::from_parts(&t.re, &t.im)));
            }
        }
        Ok(zeta)
    }
}
