//! Motive description documents (TOML).
//!
//! ```toml
//! dimension = 2
//! precision = 128            # optional; bits used for decimal entries
//!
//! [[weight]]                 # W_k = span of the generators of every entry with k' <= k
//! k = -2
//! generators = [["1", "0"]]  # must be a basis of gr_k modulo W_{k-1}
//! form = [["1"]]             # polarization of gr_k in that basis
//!
//! [[weight]]
//! k = 0
//! generators = [["0", "1"]]
//! form = [["1"]]
//!
//! [[finite]]
//! label = "2"
//! norm = 2
//! n = [["0", "2"], ["0", "0"]]
//!
//! [[point]]                  # degeneration points, for geo-height
//! label = "T=0"
//! degree = 1
//! n = [["0", "1"], ["0", "0"]]
//!
//! [[arch]]
//! label = "inf"
//! kind = "real"              # or "complex"
//! entries = "decimal"        # or "exact" (Gaussian rationals)
//! [[arch.hodge]]             # F^p = span of the generators of every entry with p' >= p
//! p = 0
//! generators = [["0-0.2206356001526516i", "1"]]
//! [[arch.hodge]]
//! p = -1
//! full = true
//! ```
//!
//! Rationals are written `"n/d"` or as plain decimals, complex entries as
//! `"re+im i"`. Integers may be written bare.

use serde::{Deserialize, Serialize};

use crate::error::HeightError;
use crate::geoheight::{DegenerationPoint, GeometricVariation, Polarization, PolarizedFiltration};
use crate::hodge::{default_tol, HodgeFiltration, MixedHodgeStructure, PlaceKind};
use crate::monodromy::NilpotentMap;
use crate::motives::{ArchHodge, ArchPlaceData, FinitePlaceData, MotiveData};
use crate::numeric::{parse_complex_parts, with_precision, ComplexScalar, Cx, Gq, Real};
use crate::qlinalg::{format_rational, parse_rational, Filtration, Matrix, QuotientSpace, RationalMatrix, Scalar, Subspace, Tol, Q};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
}

impl Entry {
    fn text(&self) -> String {
        match self {
            Entry::Int(n) => n.to_string(),
            Entry::Text(s) => s.clone(),
        }
    }
}

impl From<&Q> for Entry {
    fn from(q: &Q) -> Self {
        Entry::Text(format_rational(q))
    }
}

pub type Rows = Vec<Vec<Entry>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    pub k: i64,
    pub generators: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Rows>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteEntry {
    pub label: String,
    pub norm: Entry,
    pub n: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointEntry {
    pub label: String,
    #[serde(default = "one")]
    pub degree: u32,
    pub n: Rows,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HodgeEntry {
    pub p: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Rows,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub full: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Exact,
    Decimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindEntry {
    Real,
    Complex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchEntry {
    pub label: String,
    pub kind: KindEntry,
    pub entries: EntryKind,
    pub hodge: Vec<HodgeEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    #[serde(default)]
    pub weight: Vec<WeightEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub finite: Vec<FiniteEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point: Vec<PointEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arch: Vec<ArchEntry>,
}

fn perr(msg: impl Into<String>) -> HeightError {
    HeightError::Parse(msg.into())
}

fn rational(e: &Entry, ctx: &str) -> Result<Q, HeightError> {
    parse_rational(&e.text()).ok_or_else(|| perr(format!("{ctx}: '{}' is not a rational", e.text())))
}

fn rational_rows(rows: &Rows, cols: usize, ctx: &str) -> Result<Vec<Vec<Q>>, HeightError> {
    rows.iter()
        .map(|r| {
            if r.len() != cols {
                return Err(perr(format!("{ctx}: row of length {} where {cols} entries are needed", r.len())));
            }
            r.iter().map(|e| rational(e, ctx)).collect()
        })
        .collect()
}

fn square(rows: &Rows, n: usize, ctx: &str) -> Result<RationalMatrix, HeightError> {
    if rows.len() != n {
        return Err(perr(format!("{ctx}: {} rows where {n} are needed", rows.len())));
    }
    Ok(Matrix::from_rows_with_cols(rational_rows(rows, n, ctx)?, n))
}

fn complex_rows<C: ComplexScalar>(rows: &Rows, n: usize, ctx: &str, parse: impl Fn(&Q, &Q) -> C) -> Result<Vec<Vec<C>>, HeightError> {
    rows.iter()
        .map(|r| {
            if r.len() != n {
                return Err(perr(format!("{ctx}: row of length {} where {n} entries are needed", r.len())));
            }
            r.iter()
                .map(|e| {
                    let (re, im) = parse_complex_parts(&e.text())
                        .ok_or_else(|| perr(format!("{ctx}: '{}' is not a complex number", e.text())))?;
                    Ok(parse(&re, &im))
                })
                .collect()
        })
        .collect()
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, HeightError> {
        let doc: Document = toml::from_str(text).map_err(|e| perr(format!("document: {e}")))?;
        if doc.dimension == 0 {
            return Err(perr("document: dimension must be positive"));
        }
        Ok(doc)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HeightError> {
        let text = std::fs::read_to_string(path).map_err(|e| HeightError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("documents serialize")
    }

    /// `W` and, per weight, the lift basis of `gr_k` the generators give.
    fn weight_data(&self) -> Result<(Filtration<Q>, Vec<(i64, Vec<Vec<Q>>)>), HeightError> {
        let n = self.dimension;
        let mut entries: Vec<&WeightEntry> = self.weight.iter().collect();
        entries.sort_by_key(|e| e.k);
        if entries.windows(2).any(|w| w[0].k == w[1].k) {
            return Err(perr("weight: repeated k"));
        }
        let mut gens: Vec<Vec<Q>> = Vec::new();
        let mut steps = Vec::new();
        let mut pieces = Vec::new();
        let mut below = Subspace::zero(n, Tol::Exact);
        for e in entries {
            let new = rational_rows(&e.generators, n, &format!("weight {}", e.k))?;
            gens.extend(new.iter().cloned());
            let step = Subspace::span(&gens, n, Tol::Exact);
            if step.dim() != below.dim() + new.len() {
                return Err(perr(format!("weight {}: generators are not independent modulo lower weights", e.k)));
            }
            steps.push((e.k, step.clone()));
            pieces.push((e.k, new));
            below = step;
        }
        if !below.is_full() {
            return Err(perr(format!("weight: generators span {} of {n} dimensions", below.dim())));
        }
        Ok((Filtration::new(n, steps, Tol::Exact)?, pieces))
    }

    pub fn weight_filtration(&self) -> Result<Filtration<Q>, HeightError> {
        Ok(self.weight_data()?.0)
    }

    /// Forms moved from generator coordinates to canonical lift coordinates:
    /// with `S` the lift coordinates of the generators, `S^{-T} G S^{-1}`.
    pub fn polarized(&self) -> Result<PolarizedFiltration, HeightError> {
        let (w, pieces) = self.weight_data()?;
        let mut pols = Vec::new();
        for (k, gens) in pieces {
            let e = self.weight.iter().find(|e| e.k == k).expect("entry per weight");
            let form = e.form.as_ref().ok_or_else(|| perr(format!("weight {k}: missing form")))?;
            let g = square(form, gens.len(), &format!("form {k}"))?;
            let piece: QuotientSpace<Q> = w.graded_piece(k);
            let cols = gens
                .iter()
                .map(|v| piece.class_coordinates(v).expect("generator lies in W_k"))
                .collect::<Vec<_>>();
            let s = Matrix::from_columns(&cols, piece.dim());
            let s_inv = s.inverse(Tol::Exact).expect("generators form a basis of gr_k");
            pols.push(Polarization::new(k, s_inv.transpose().mul(&g).mul(&s_inv))?);
        }
        PolarizedFiltration::new(w, pols)
    }

    /// `N` at the finite place or degeneration point with this label.
    pub fn monodromy(&self, label: &str) -> Result<NilpotentMap, HeightError> {
        let rows = self
            .finite
            .iter()
            .find(|e| e.label == label)
            .map(|e| &e.n)
            .or_else(|| self.point.iter().find(|e| e.label == label).map(|e| &e.n))
            .ok_or_else(|| perr(format!("no finite place or point labelled '{label}'")))?;
        NilpotentMap::new(square(rows, self.dimension, label)?)
    }

    fn finite_places(&self) -> Result<Vec<FinitePlaceData>, HeightError> {
        self.finite
            .iter()
            .map(|e| {
                let norm = e.norm.text().parse().map_err(|_| perr(format!("finite {}: bad norm", e.label)))?;
                FinitePlaceData::new(e.label.clone(), norm, self.monodromy(&e.label)?)
            })
            .collect()
    }

    fn hodge<C: ComplexScalar>(
        &self,
        a: &ArchEntry,
        w: &Filtration<Q>,
        parse: impl Fn(&Q, &Q) -> C + Copy,
    ) -> Result<MixedHodgeStructure<C>, HeightError> {
        let n = self.dimension;
        let tol = default_tol::<C>();
        let mut entries: Vec<&HodgeEntry> = a.hodge.iter().collect();
        entries.sort_by_key(|e| -e.p);
        let mut gens: Vec<Vec<C>> = Vec::new();
        let mut steps = Vec::new();
        for e in entries {
            let s = if e.full {
                Subspace::full(n, tol)
            } else {
                gens.extend(complex_rows(&e.generators, n, &format!("arch {} F^{}", a.label, e.p), parse)?);
                Subspace::span(&gens, n, tol)
            };
            steps.push((e.p, s));
        }
        let f = HodgeFiltration::new(n, steps, tol)?;
        MixedHodgeStructure::new(w.clone(), f)
    }

    fn arch_places(&self, w: &Filtration<Q>) -> Result<Vec<ArchPlaceData>, HeightError> {
        self.arch
            .iter()
            .map(|a| {
                let hodge = match a.entries {
                    EntryKind::Exact => ArchHodge::Exact(self.hodge(a, w, |re, im| Gq::new(re.clone(), im.clone()))?),
                    EntryKind::Decimal => {
                        let bits = self.precision.unwrap_or_else(crate::numeric::working_bits);
                        let h = with_precision(bits, || self.hodge(a, w, |re, im| Cx::new(Real::from_q(re), Real::from_q(im))))?;
                        ArchHodge::Float(h)
                    }
                };
                let kind = match a.kind {
                    KindEntry::Real => PlaceKind::Real,
                    KindEntry::Complex => PlaceKind::Complex,
                };
                Ok(ArchPlaceData { label: a.label.clone(), kind, hodge })
            })
            .collect()
    }

    pub fn motive(&self) -> Result<MotiveData, HeightError> {
        let pols = self.polarized()?;
        let arch = self.arch_places(pols.filtration())?;
        MotiveData::new(pols, self.finite_places()?, arch)
    }

    pub fn variation(&self) -> Result<GeometricVariation, HeightError> {
        let pols = self.polarized()?;
        let points = self
            .point
            .iter()
            .map(|e| {
                let n = NilpotentMap::new(square(&e.n, self.dimension, &format!("point {}", e.label))?)?;
                Ok(DegenerationPoint::new(e.label.clone(), n, pols.filtration())?.with_degree(e.degree))
            })
            .collect::<Result<Vec<_>, HeightError>>()?;
        GeometricVariation::new(pols, points)
    }

    /// Document for `m`: lift bases as generators, so the forms are copied
    /// unchanged. Floating Hodge entries are written with `digits` decimals.
    pub fn from_motive(m: &MotiveData, digits: usize) -> Self {
        let w = m.weight();
        let rows = |vs: &[Vec<Q>]| -> Rows { vs.iter().map(|v| v.iter().map(Entry::from).collect()).collect() };
        let mat = |a: &RationalMatrix| -> Rows { rows(&a.row_vecs()) };
        let weight = w
            .weights()
            .into_iter()
            .map(|k| WeightEntry {
                k,
                generators: rows(w.graded_piece(k).lifts()),
                form: m.polarized().polarization(k).ok().map(|p| mat(p.form())),
            })
            .collect();
        let finite = m
            .finite_places()
            .iter()
            .map(|v| FiniteEntry { label: v.label.clone(), norm: Entry::Text(v.residue_norm.to_string()), n: mat(v.n.matrix()) })
            .collect();
        let arch = m
            .arch_places()
            .iter()
            .map(|v| {
                let (entries, hodge) = match &v.hodge {
                    ArchHodge::Exact(h) => (EntryKind::Exact, hodge_entries(h, |x: &Gq| gaussian_text(x))),
                    ArchHodge::Float(h) => (EntryKind::Decimal, hodge_entries(h, |x: &Cx| complex_text(x, digits))),
                };
                let kind = match v.kind {
                    PlaceKind::Real => KindEntry::Real,
                    PlaceKind::Complex => KindEntry::Complex,
                };
                ArchEntry { label: v.label.clone(), kind, entries, hodge }
            })
            .collect();
        Document { dimension: m.dim(), precision: None, weight, finite, point: vec![], arch }
    }
}

/// Hodge entries listing, for each jump, the basis vectors new at that step.
fn hodge_entries<C: ComplexScalar>(h: &MixedHodgeStructure<C>, fmt: impl Fn(&C) -> String) -> Vec<HodgeEntry> {
    let f = h.hodge();
    let mut out = Vec::new();
    let mut prev = Subspace::zero(h.dim(), h.tol());
    let mut jumps = f.jumps();
    jumps.sort_by_key(|(p, _)| -p);
    for (p, s) in jumps {
        if s.is_full() {
            out.push(HodgeEntry { p, generators: vec![], full: true });
            break;
        }
        let new = QuotientSpace::new(&s, &prev).expect("decreasing filtration").lifts().to_vec();
        let generators = new.iter().map(|v| v.iter().map(|x| Entry::Text(fmt(x))).collect()).collect();
        out.push(HodgeEntry { p, generators, full: false });
        prev = s;
    }
    out
}

pub fn gaussian_text(x: &Gq) -> String {
    if Scalar::is_zero(&x.im) {
        return format_rational(&x.re);
    }
    let sign = if x.im < Q::from_i64(0) { "-" } else { "+" };
    let im = if x.im < Q::from_i64(0) { -x.im.clone() } else { x.im.clone() };
    format!("{}{sign}{}i", format_rational(&x.re), format_rational(&im))
}

pub fn complex_text(x: &Cx, digits: usize) -> String {
    let sign = if x.im.is_negative() { "-" } else { "+" };
    format!("{}{sign}{}i", x.re.to_decimal(digits), x.im.abs().to_decimal(digits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodge::HodgeContext;
    use crate::motives::{global_height_wd, kummer_motive, same_realizations};
    use crate::qlinalg::{q, qf};

    const KUMMER: &str = r#"
dimension = 2

[[weight]]
k = -2
generators = [["1", "0"]]
form = [["1"]]

[[weight]]
k = 0
generators = [["0", "1"]]
form = [["1"]]

[[finite]]
label = "2"
norm = 2
n = [[0, 2], [0, 0]]

[[arch]]
label = "inf"
kind = "real"
entries = "decimal"

[[arch.hodge]]
p = 0
generators = [["0-0.220635600152651593396456432117997690982689749i", 1]]

[[arch.hodge]]
p = -1
full = true
"#;

    #[test]
    fn kummer_document_gives_four_log_two() {
        let m = Document::parse(KUMMER).unwrap().motive().unwrap();
        let (h, _) = global_height_wd(&m, 0, 2, &HodgeContext::default()).unwrap();
        assert!((h.to_f64() - 4.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn forms_move_to_lift_coordinates() {
        let text = r#"
dimension = 2
[[weight]]
k = 0
generators = [["2", "0"], ["1", "1"]]
form = [["4", "0"], ["0", "1"]]
"#;
        let p = Document::parse(text).unwrap().polarized().unwrap();
        // e1 = g1/2, e2 = g2 - g1/2.
        let f = p.polarization(0).unwrap().form().clone();
        assert_eq!(f[(0, 0)], q(1));
        assert_eq!(f[(0, 1)], q(-1));
        assert_eq!(f[(1, 1)], q(2));
    }

    #[test]
    fn round_trip_through_text() {
        let m = kummer_motive(&qf(5, 3)).unwrap();
        let doc = Document::from_motive(&m, 45);
        let back = Document::parse(&doc.to_toml()).unwrap().motive().unwrap();
        assert!(same_realizations(&m, &back));
    }

    #[test]
    fn errors_are_parse_errors() {
        assert!(matches!(Document::parse("dimension = 0"), Err(HeightError::Parse(_))));
        assert!(matches!(Document::parse("dimension = 2\nbogus = 1"), Err(HeightError::Parse(_))));
        let text = "dimension = 2\n[[weight]]\nk = 0\ngenerators = [[\"1\", \"0\"]]\nform = [[\"1\"]]\n";
        assert!(matches!(Document::parse(text).unwrap().motive(), Err(HeightError::Parse(_))));
    }
}
