//! Duals, Tate twists, direct sums, and pullback/pushout of extensions in
//! block form.
//!
//! A dual is written in the dual basis, so `dual(dual(M))` returns `M` in
//! its own coordinates. An extension `0 → A → E → B → 0` is kept as its two
//! ends plus the off-diagonal blocks: `x_v` with `N_E = [N_A, x_v; 0, N_B]`
//! at a finite place, and `e_v` with `F^p E = F^p A ⊕ {(e_v b, b) : b ∈ F^p B}`
//! at an archimedean place.

use super::{ArchHodge, ArchPlaceData, FinitePlaceData, MotiveData};
use crate::error::HeightError;
use crate::geoheight::{Polarization, PolarizedFiltration};
use crate::hodge::{filtration_distance, HodgeFiltration, MixedHodgeStructure};
use crate::monodromy::NilpotentMap;
use crate::numeric::{ComplexScalar, Cx, Gq};
use crate::qlinalg::{Filtration, Matrix, RationalMatrix, Scalar, Subspace, Tol, Q};

fn block_diag<F: Scalar>(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
    let (n1, n2) = (a.rows(), b.rows());
    Matrix::from_fn(n1 + n2, a.cols() + b.cols(), |r, c| {
        if r < n1 && c < a.cols() {
            a[(r, c)].clone()
        } else if r >= n1 && c >= a.cols() {
            b[(r - n1, c - a.cols())].clone()
        } else {
            F::zero()
        }
    })
}

fn subspace_sum<F: Scalar>(a: &Subspace<F>, b: &Subspace<F>, tol: Tol) -> Subspace<F> {
    let n = a.ambient() + b.ambient();
    let mut vs: Vec<Vec<F>> = a.basis_vectors().into_iter().map(|mut v| {
        v.extend((0..b.ambient()).map(|_| F::zero()));
        v
    }).collect();
    vs.extend(b.basis_vectors().into_iter().map(|v| {
        let mut u: Vec<F> = (0..a.ambient()).map(|_| F::zero()).collect();
        u.extend(v);
        u
    }));
    Subspace::span(&vs, n, tol)
}

fn filtration_sum<F: Scalar>(a: &Filtration<F>, b: &Filtration<F>, tol: Tol) -> Filtration<F> {
    let mut ks: Vec<i64> = a.weights().into_iter().chain(b.weights()).collect();
    ks.sort();
    ks.dedup();
    let steps = ks.iter().map(|&k| (k, subspace_sum(&a.step(k), &b.step(k), tol))).collect();
    Filtration::new(a.ambient() + b.ambient(), steps, tol).expect("sums of nested steps")
}

fn hodge_sum<C: ComplexScalar>(a: &HodgeFiltration<C>, b: &HodgeFiltration<C>, tol: Tol) -> HodgeFiltration<C> {
    let mut ps: Vec<i64> = a.jumps().iter().chain(b.jumps().iter()).map(|(p, _)| *p).collect();
    ps.sort();
    ps.dedup();
    let steps = ps.iter().map(|&p| (p, subspace_sum(&a.step(p), &b.step(p), tol))).collect();
    HodgeFiltration::new(a.ambient() + b.ambient(), steps, tol).expect("sums of nested steps")
}

fn mhs_sum<C: ComplexScalar>(
    w: &Filtration<Q>,
    a: &MixedHodgeStructure<C>,
    b: &MixedHodgeStructure<C>,
) -> Result<MixedHodgeStructure<C>, HeightError> {
    MixedHodgeStructure::new(w.clone(), hodge_sum(a.hodge(), b.hodge(), a.tol()))
}

/// `M1 ⊕ M2` in the coordinates `(V1, V2)`. A finite place present in only
/// one summand gets `N = 0` on the other; archimedean places must agree.
pub fn direct_sum(m1: &MotiveData, m2: &MotiveData) -> Result<MotiveData, HeightError> {
    let w = filtration_sum(m1.weight(), m2.weight(), Tol::Exact);
    let mut pols = Vec::new();
    for k in w.weights() {
        let f = |m: &MotiveData| {
            m.polarized().polarization(k).map(|p| p.form().clone()).unwrap_or_else(|_| Matrix::zeros(0, 0))
        };
        pols.push(Polarization::new(k, block_diag(&f(m1), &f(m2)))?);
    }
    let pols = PolarizedFiltration::new(w.clone(), pols)?;
    let mut finite: Vec<FinitePlaceData> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for v in m1.finite_places().iter().chain(m2.finite_places()) {
        if !labels.contains(&v.label) {
            labels.push(v.label.clone());
        }
    }
    for l in &labels {
        let find = |m: &MotiveData| m.finite_places().iter().find(|v| &v.label == l).cloned();
        let (a, b) = (find(m1), find(m2));
        let norm = a.as_ref().or(b.as_ref()).map(|v| v.residue_norm.clone()).expect("label from one side");
        if let (Some(x), Some(y)) = (&a, &b) {
            if x.residue_norm != y.residue_norm {
                return Err(HeightError::Incompatible(format!("residue norms differ at {l}")));
            }
        }
        let na = a.map(|v| v.n.matrix().clone()).unwrap_or_else(|| Matrix::zeros(m1.dim(), m1.dim()));
        let nb = b.map(|v| v.n.matrix().clone()).unwrap_or_else(|| Matrix::zeros(m2.dim(), m2.dim()));
        finite.push(FinitePlaceData::new(l.clone(), norm, NilpotentMap::new(block_diag(&na, &nb))?)?);
    }
    if m1.arch_places().len() != m2.arch_places().len() {
        return Err(HeightError::Incompatible("archimedean places differ".into()));
    }
    let mut arch = Vec::new();
    for v in m1.arch_places() {
        let u = m2
            .arch_places()
            .iter()
            .find(|u| u.label == v.label && u.kind == v.kind)
            .ok_or_else(|| HeightError::Incompatible(format!("no matching archimedean place {}", v.label)))?;
        let hodge = match (&v.hodge, &u.hodge) {
            (ArchHodge::Exact(a), ArchHodge::Exact(b)) => ArchHodge::Exact(mhs_sum(&w, a, b)?),
            (a, b) => ArchHodge::Float(mhs_sum(&w, &a.to_float(), &b.to_float())?),
        };
        arch.push(ArchPlaceData { label: v.label.clone(), kind: v.kind, hodge });
    }
    MotiveData::new(pols, finite, arch)
}

fn dual_weight(w: &Filtration<Q>) -> Filtration<Q> {
    let steps = w.weights().iter().map(|&k| (-k, w.step(k - 1).annihilator())).collect();
    Filtration::new(w.ambient(), steps, Tol::Exact).expect("annihilators reverse inclusions")
}

/// `F^p V^* = ann(F^{1-p} V)`.
fn dual_hodge<C: ComplexScalar>(h: &MixedHodgeStructure<C>, wd: &Filtration<Q>) -> Result<MixedHodgeStructure<C>, HeightError> {
    let f = h.hodge();
    let (pmin, pmax) = f.range().ok_or_else(|| HeightError::MhsAxiomViolation("empty Hodge filtration".into()))?;
    let steps = (-pmax..=1 - pmin).map(|p| (p, f.step(1 - p).annihilator())).collect();
    MixedHodgeStructure::new(wd.clone(), HodgeFiltration::new(h.dim(), steps, h.tol())?)
}

/// `M^*` in the dual basis: `N ↦ -N^T`, weights negated, and on `gr_{-k}`
/// the form dual to the one on `gr_k`.
pub fn dual(m: &MotiveData) -> Result<MotiveData, HeightError> {
    let w = m.weight();
    let wd = dual_weight(w);
    let mut pols = Vec::new();
    for k in w.weights() {
        let orig = w.graded_piece(k);
        let dualp = wd.graded_piece(-k);
        let s = Matrix::from_fn(dualp.dim(), orig.dim(), |i, j| {
            dualp.lifts()[i].iter().zip(&orig.lifts()[j]).fold(Q::zero(), |acc, (a, b)| acc + a * b)
        });
        let qinv_t = m
            .polarized()
            .polarization(k)?
            .form()
            .inverse(Tol::Exact)
            .expect("nondegenerate")
            .transpose();
        pols.push(Polarization::new(-k, s.mul(&qinv_t).mul(&s.transpose()))?);
    }
    let pols = PolarizedFiltration::new(wd.clone(), pols)?;
    let finite = m
        .finite_places()
        .iter()
        .map(|v| FinitePlaceData::new(v.label.clone(), v.residue_norm.clone(), NilpotentMap::new(v.n.matrix().transpose().neg())?))
        .collect::<Result<Vec<_>, _>>()?;
    let arch = m
        .arch_places()
        .iter()
        .map(|v| {
            let hodge = match &v.hodge {
                ArchHodge::Exact(h) => ArchHodge::Exact(dual_hodge(h, &wd)?),
                ArchHodge::Float(h) => ArchHodge::Float(dual_hodge(h, &wd)?),
            };
            Ok(ArchPlaceData { label: v.label.clone(), kind: v.kind, hodge })
        })
        .collect::<Result<Vec<_>, HeightError>>()?;
    MotiveData::new(pols, finite, arch)
}

fn twist_hodge<C: ComplexScalar>(h: &MixedHodgeStructure<C>, wt: &Filtration<Q>, n: i64) -> Result<MixedHodgeStructure<C>, HeightError> {
    let steps = h.hodge().jumps().into_iter().map(|(p, s)| (p - n, s)).collect();
    MixedHodgeStructure::new(wt.clone(), HodgeFiltration::new(h.dim(), steps, h.tol())?)
}

/// `M(n)`: weights drop by `2n`, `F^p M(n) = F^{p+n} M`, `N` and the
/// forms are unchanged.
pub fn tate_twist(m: &MotiveData, n: i64) -> Result<MotiveData, HeightError> {
    let wt = m.weight().shift(-2 * n);
    let pols = m
        .polarized()
        .polarizations()
        .map(|p| Polarization::new(p.weight() - 2 * n, p.form().clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let pols = PolarizedFiltration::new(wt.clone(), pols)?;
    let arch = m
        .arch_places()
        .iter()
        .map(|v| {
            let hodge = match &v.hodge {
                ArchHodge::Exact(h) => ArchHodge::Exact(twist_hodge(h, &wt, n)?),
                ArchHodge::Float(h) => ArchHodge::Float(twist_hodge(h, &wt, n)?),
            };
            Ok(ArchPlaceData { label: v.label.clone(), kind: v.kind, hodge })
        })
        .collect::<Result<Vec<_>, HeightError>>()?;
    MotiveData::new(pols, m.finite_places().to_vec(), arch)
}

/// Whether two motives have the same realizations in the same coordinates,
/// with Hodge filtrations compared up to `1e-20`.
pub fn same_realizations(a: &MotiveData, b: &MotiveData) -> bool {
    if a.weight() != b.weight() || a.type_signature() != b.type_signature() {
        return false;
    }
    let forms_equal = a.weight().weights().iter().all(|&k| {
        matches!((a.polarized().polarization(k), b.polarized().polarization(k)), (Ok(x), Ok(y)) if x == y)
    });
    let finite_equal = a.finite_places().len() == b.finite_places().len()
        && a.finite_places().iter().zip(b.finite_places()).all(|(x, y)| {
            x.label == y.label && x.residue_norm == y.residue_norm && x.n.matrix() == y.n.matrix()
        });
    let bound = crate::numeric::Real::parse("1e-20").expect("literal");
    let arch_equal = a.arch_places().len() == b.arch_places().len()
        && a.arch_places().iter().zip(b.arch_places()).all(|(x, y)| {
            x.label == y.label
                && x.kind == y.kind
                && match (&x.hodge, &y.hodge) {
                    (ArchHodge::Exact(p), ArchHodge::Exact(q)) => p.hodge() == q.hodge(),
                    (p, q) => filtration_distance(p.to_float().hodge(), q.to_float().hodge()) < bound,
                }
        });
    forms_equal && finite_equal && arch_equal
}

/// Off-diagonal Hodge block `e_v`, exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum ArchBlock {
    Exact(Matrix<Gq>),
    Float(Matrix<Cx>),
}

impl ArchBlock {
    fn to_float(&self) -> Matrix<Cx> {
        match self {
            ArchBlock::Exact(m) => m.map(|x| x.to_cx()),
            ArchBlock::Float(m) => m.clone(),
        }
    }

    fn map_exact(&self, f: impl Fn(&Matrix<Gq>) -> Matrix<Gq>, g: impl Fn(&Matrix<Cx>) -> Matrix<Cx>) -> Self {
        match self {
            ArchBlock::Exact(m) => ArchBlock::Exact(f(m)),
            ArchBlock::Float(m) => ArchBlock::Float(g(m)),
        }
    }
}

/// `0 → A → E → B → 0` with coordinates `(A, B)` on `E`.
#[derive(Clone, Debug)]
pub struct BlockExtension {
    pub sub: MotiveData,
    pub quot: MotiveData,
    /// `x_v` by finite place label; absent labels mean `x_v = 0`.
    pub x: Vec<(String, RationalMatrix)>,
    /// `e_v` by archimedean place label; absent labels mean `e_v = 0`.
    pub e: Vec<(String, ArchBlock)>,
}

fn graph_hodge<C: ComplexScalar>(
    wt: &Filtration<Q>,
    a: &MixedHodgeStructure<C>,
    b: &MixedHodgeStructure<C>,
    e: &Matrix<C>,
) -> Result<MixedHodgeStructure<C>, HeightError> {
    let tol = a.tol();
    let (da, db) = (a.dim(), b.dim());
    let mut ps: Vec<i64> = a.hodge().jumps().iter().chain(b.hodge().jumps().iter()).map(|(p, _)| *p).collect();
    ps.sort();
    ps.dedup();
    let steps = ps
        .iter()
        .map(|&p| {
            let mut gens: Vec<Vec<C>> = a
                .hodge()
                .step(p)
                .basis_vectors()
                .into_iter()
                .map(|mut v| {
                    v.extend((0..db).map(|_| C::zero()));
                    v
                })
                .collect();
            for v in b.hodge().step(p).basis_vectors() {
                let mut u = e.mul_vec(&v);
                u.extend(v);
                gens.push(u);
            }
            (p, Subspace::span(&gens, da + db, tol))
        })
        .collect();
    MixedHodgeStructure::new(wt.clone(), HodgeFiltration::new(da + db, steps, tol)?)
}

impl BlockExtension {
    pub fn new(
        sub: MotiveData,
        quot: MotiveData,
        x: Vec<(String, RationalMatrix)>,
        e: Vec<(String, ArchBlock)>,
    ) -> Result<Self, HeightError> {
        let (a, b) = (sub.dim(), quot.dim());
        for (_, m) in &x {
            if m.rows() != a || m.cols() != b {
                return Err(HeightError::Incompatible(format!("x block must be {a} x {b}")));
            }
        }
        for (_, m) in &e {
            let (r, c) = match m {
                ArchBlock::Exact(m) => (m.rows(), m.cols()),
                ArchBlock::Float(m) => (m.rows(), m.cols()),
            };
            if r != a || c != b {
                return Err(HeightError::Incompatible(format!("e block must be {a} x {b}")));
            }
        }
        let ext = BlockExtension { sub, quot, x, e };
        ext.motive()?;
        Ok(ext)
    }

    /// The split extension `A ⊕ B`.
    pub fn split(sub: MotiveData, quot: MotiveData) -> Result<Self, HeightError> {
        Self::new(sub, quot, vec![], vec![])
    }

    pub fn x_block(&self, label: &str) -> RationalMatrix {
        self.x
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| Matrix::zeros(self.sub.dim(), self.quot.dim()))
    }

    pub fn e_block(&self, label: &str) -> ArchBlock {
        self.e
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| ArchBlock::Exact(Matrix::zeros(self.sub.dim(), self.quot.dim())))
    }

    /// The middle term `E`.
    pub fn motive(&self) -> Result<MotiveData, HeightError> {
        let split = direct_sum(&self.sub, &self.quot)?;
        let a = self.sub.dim();
        let finite = split
            .finite_places()
            .iter()
            .map(|v| {
                let x = self.x_block(&v.label);
                let mut n = v.n.matrix().clone();
                for r in 0..a {
                    for c in 0..self.quot.dim() {
                        n[(r, a + c)] = x[(r, c)].clone();
                    }
                }
                FinitePlaceData::new(v.label.clone(), v.residue_norm.clone(), NilpotentMap::new(n)?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let wt = split.weight().clone();
        let mut arch = Vec::new();
        for (va, vb) in self.sub.arch_places().iter().zip(self.quot.arch_places()) {
            let hodge = match (&va.hodge, &vb.hodge, self.e_block(&va.label)) {
                (ArchHodge::Exact(ha), ArchHodge::Exact(hb), ArchBlock::Exact(e)) => {
                    ArchHodge::Exact(graph_hodge(&wt, ha, hb, &e)?)
                }
                (ha, hb, e) => ArchHodge::Float(graph_hodge(&wt, &ha.to_float(), &hb.to_float(), &e.to_float())?),
            };
            arch.push(ArchPlaceData { label: va.label.clone(), kind: va.kind, hodge });
        }
        split.with_finite(finite)?.with_arch(arch)
    }

    fn check_morphism(src: &MotiveData, dst: &MotiveData, f: &RationalMatrix) -> Result<(), HeightError> {
        if f.rows() != dst.dim() || f.cols() != src.dim() {
            return Err(HeightError::Incompatible(format!("map must be {} x {}", dst.dim(), src.dim())));
        }
        for v in dst.finite_places() {
            let ns = src
                .finite_places()
                .iter()
                .find(|u| u.label == v.label)
                .map(|u| u.n.matrix().clone())
                .unwrap_or_else(|| Matrix::zeros(src.dim(), src.dim()));
            if f.mul(&ns) != v.n.matrix().mul(f) {
                return Err(HeightError::Incompatible(format!("map does not commute with N at {}", v.label)));
            }
        }
        Ok(())
    }

    /// Pullback along `f: B' → B`.
    pub fn pullback(&self, quot: &MotiveData, f: &RationalMatrix) -> Result<Self, HeightError> {
        Self::check_morphism(quot, &self.quot, f)?;
        let fg = f.map(Gq::from_q);
        let fc = f.map(|x| Cx::from_q(x));
        let x = self.x.iter().map(|(l, m)| (l.clone(), m.mul(f))).collect();
        let e = self.e.iter().map(|(l, m)| (l.clone(), m.map_exact(|m| m.mul(&fg), |m| m.mul(&fc)))).collect();
        Self::new(self.sub.clone(), quot.clone(), x, e)
    }

    /// Pushout along `g: A → A'`.
    pub fn pushout(&self, sub: &MotiveData, g: &RationalMatrix) -> Result<Self, HeightError> {
        Self::check_morphism(&self.sub, sub, g)?;
        let gg = g.map(Gq::from_q);
        let gc = g.map(|x| Cx::from_q(x));
        let x = self.x.iter().map(|(l, m)| (l.clone(), g.mul(m))).collect();
        let e = self.e.iter().map(|(l, m)| (l.clone(), m.map_exact(|m| gg.mul(m), |m| gc.mul(m)))).collect();
        Self::new(sub.clone(), self.quot.clone(), x, e)
    }

    /// `0 → B^* → E^* → A^* → 0` with blocks `-x^T` and `-e^T`.
    pub fn dual(&self) -> Result<Self, HeightError> {
        let x = self.x.iter().map(|(l, m)| (l.clone(), m.transpose().neg())).collect();
        let e = self
            .e
            .iter()
            .map(|(l, m)| (l.clone(), m.map_exact(|m| m.transpose().neg(), |m| m.transpose().neg())))
            .collect();
        Self::new(dual(&self.quot)?, dual(&self.sub)?, x, e)
    }

    pub fn tate_twist(&self, n: i64) -> Result<Self, HeightError> {
        Self::new(tate_twist(&self.sub, n)?, tate_twist(&self.quot, n)?, self.x.clone(), self.e.clone())
    }

    /// Same ends and the same blocks.
    pub fn same_presentation(&self, other: &Self) -> bool {
        let labels_f: Vec<&String> = self.x.iter().chain(&other.x).map(|(l, _)| l).collect();
        let labels_a: Vec<&String> = self.e.iter().chain(&other.e).map(|(l, _)| l).collect();
        same_realizations(&self.sub, &other.sub)
            && same_realizations(&self.quot, &other.quot)
            && labels_f.iter().all(|l| self.x_block(l) == other.x_block(l))
            && labels_a.iter().all(|l| match (self.e_block(l), other.e_block(l)) {
                (ArchBlock::Exact(a), ArchBlock::Exact(b)) => a == b,
                (a, b) => crate::hodge::max_abs(&a.to_float().sub(&b.to_float())).to_f64() < 1e-20,
            })
    }
}
