//! Algebra-valued differential forms with polynomial coefficients on a
//! single coordinate patch.
//!
//! A [`ScalarForm`] maps strictly increasing multi-indices (bitmasks over the
//! patch coordinates) to polynomial coefficients. A [`PolyForm`] is a
//! homogeneous form with one scalar form per basis element of its value
//! space. All operations that need structure constants, the action or `α`
//! live on [`FormAlgebra`], which binds a crossed module and a patch
//! dimension.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{for_each_tuple, DifferentialCrossedModule, InvariantPairing};
use crate::error::{Error, Result};
use crate::group::GroupMap;
use crate::matrix::PolyMatrix;
use crate::poly::{Poly, Var};
use crate::scalar::Scalar;

/// Bitmask multi-index: bit `i` stands for `dx_{i+1}`.
pub type MultiIndex = u16;

/// Sign of `dx_I ∧ dx_J` relative to `dx_{I∪J}`; zero if they overlap.
#[inline]
pub fn wedge_sign(i: MultiIndex, j: MultiIndex) -> i32 {
    if i & j != 0 {
        return 0;
    }
    let mut swaps = 0;
    let mut rest = j;
    while rest != 0 {
        let b = rest.trailing_zeros();
        swaps += ((i as u32) >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Multi-index from one-based coordinate labels in any order, with the sign
/// of the sorting permutation; `None` on repeats.
pub fn multi_index(labels: &[usize]) -> Option<(MultiIndex, i32)> {
    let mut mask: MultiIndex = 0;
    let mut sign = 1;
    for &l in labels {
        assert!((1..=16).contains(&l), "coordinate label {l} out of range");
        let bit = 1 << (l - 1);
        let s = wedge_sign(mask, bit);
        if s == 0 {
            return None;
        }
        sign *= s;
        mask |= bit;
    }
    Some((mask, sign))
}

pub fn index_labels(i: MultiIndex) -> Vec<usize> {
    (0..16).filter(|b| i >> b & 1 == 1).map(|b| b + 1).collect()
}

#[derive(Clone, Default, PartialEq, Eq)]
pub struct ScalarForm {
    terms: BTreeMap<MultiIndex, Poly>,
}

impl ScalarForm {
    pub fn zero() -> ScalarForm {
        ScalarForm::default()
    }

    pub fn term(index: MultiIndex, coeff: Poly) -> ScalarForm {
        let mut f = ScalarForm::zero();
        f.add_term(index, coeff);
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &Poly)> {
        self.terms.iter().map(|(i, p)| (*i, p))
    }

    pub fn coeff(&self, i: MultiIndex) -> Poly {
        self.terms.get(&i).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, index: MultiIndex, coeff: Poly) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&index) {
            Some(p) => {
                let s = p.add(&coeff);
                if s.is_zero() {
                    self.terms.remove(&index);
                } else {
                    *p = s;
                }
            }
            None => {
                self.terms.insert(index, coeff);
            }
        }
    }

    pub fn add(&self, o: &ScalarForm) -> ScalarForm {
        let mut out = self.clone();
        for (i, p) in &o.terms {
            out.add_term(*i, p.clone());
        }
        out
    }

    pub fn neg(&self) -> ScalarForm {
        self.map(|p| p.neg())
    }

    pub fn sub(&self, o: &ScalarForm) -> ScalarForm {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Scalar) -> ScalarForm {
        self.map(|p| p.scale(c))
    }

    pub fn mul_poly(&self, q: &Poly) -> ScalarForm {
        self.map(|p| p.mul(q))
    }

    /// Applies `f` to every coefficient, dropping zeros.
    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> ScalarForm {
        let mut out = ScalarForm::zero();
        for (i, p) in &self.terms {
            let q = f(p);
            if !q.is_zero() {
                out.terms.insert(*i, q);
            }
        }
        out
    }

    pub fn wedge(&self, o: &ScalarForm) -> ScalarForm {
        let mut out = ScalarForm::zero();
        self.wedge_into(o, &Scalar::one(), &mut out);
        out
    }

    /// `acc += c · self ∧ o`.
    pub fn wedge_into(&self, o: &ScalarForm, c: &Scalar, acc: &mut ScalarForm) {
        for (i, p) in &self.terms {
            for (j, q) in &o.terms {
                let s = wedge_sign(*i, *j);
                if s == 0 {
                    continue;
                }
                let mut prod = p.mul(q);
                if s < 0 {
                    prod = prod.neg();
                }
                if !c.is_one() {
                    prod = prod.scale(c);
                }
                acc.add_term(i | j, prod);
            }
        }
    }

    /// Exterior derivative in the first `dim` coordinates.
    pub fn d(&self, dim: usize) -> ScalarForm {
        let mut out = ScalarForm::zero();
        for (i, p) in &self.terms {
            for k in 0..dim {
                let bit: MultiIndex = 1 << k;
                if i & bit != 0 {
                    continue;
                }
                let dp = p.deriv(Var::X(k));
                if dp.is_zero() {
                    continue;
                }
                let s = wedge_sign(bit, *i);
                out.add_term(i | bit, if s < 0 { dp.neg() } else { dp });
            }
        }
        out
    }
}

impl fmt::Debug for ScalarForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(i, p)| format!("({p}) {}", fmt_index(*i))).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

pub fn fmt_index(i: MultiIndex) -> String {
    if i == 0 {
        return "1".into();
    }
    index_labels(i).iter().map(|l| format!("dx{l}")).collect::<Vec<_>>().join("∧")
}

/// Where the values of a form live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    G,
    H,
    /// `m × m` matrices, stored row-major.
    Mat(usize),
    Scalar,
}

#[derive(Clone, PartialEq, Eq)]
pub struct PolyForm {
    degree: usize,
    space: Space,
    comps: Vec<ScalarForm>,
}

impl PolyForm {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn components(&self) -> &[ScalarForm] {
        &self.comps
    }

    pub fn component(&self, k: usize) -> &ScalarForm {
        &self.comps[k]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(ScalarForm::is_zero)
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyForm {
        PolyForm { degree: self.degree, space: self.space, comps: self.comps.iter().map(|c| c.map(&f)).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> PolyForm {
        self.map(|p| p.scale(c))
    }

    pub fn neg(&self) -> PolyForm {
        self.map(Poly::neg)
    }

    pub fn mul_poly(&self, q: &Poly) -> PolyForm {
        self.map(|p| p.mul(q))
    }

    /// Total number of polynomial terms across all coefficients.
    pub fn size(&self) -> usize {
        self.comps.iter().flat_map(|c| c.terms.values()).map(Poly::num_terms).sum()
    }

    /// Largest absolute value among coefficients of the constant terms,
    /// used for relative tolerances on evaluated jets.
    pub fn constant_magnitude(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.terms.values())
            .map(|p| p.constant_term().to_f64().abs())
            .fold(0.0, f64::max)
    }

    fn check_same(&self, o: &PolyForm, op: &str) -> Result<()> {
        if self.space != o.space {
            return Err(Error::Type(format!("{op} of {:?}- and {:?}-valued forms", self.space, o.space)));
        }
        if self.degree != o.degree && !self.is_zero() && !o.is_zero() {
            return Err(Error::Type(format!("{op} of forms of degree {} and {}", self.degree, o.degree)));
        }
        Ok(())
    }

    pub fn add(&self, o: &PolyForm) -> Result<PolyForm> {
        self.check_same(o, "sum")?;
        let degree = if self.is_zero() { o.degree } else { self.degree };
        Ok(PolyForm {
            degree,
            space: self.space,
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, o: &PolyForm) -> Result<PolyForm> {
        self.add(&o.neg())
    }
}

impl fmt::Debug for PolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}-valued {}-form {{", self.space, self.degree)?;
        for (k, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                write!(f, " [{k}]: {c:?};")?;
            }
        }
        write!(f, " }}")
    }
}

/// Operations on forms over a fixed crossed module and patch dimension.
#[derive(Clone, Debug)]
pub struct FormAlgebra {
    xm: Arc<DifferentialCrossedModule>,
    dim: usize,
}

impl FormAlgebra {
    pub fn new(xm: Arc<DifferentialCrossedModule>, dim: usize) -> Result<Self> {
        if dim == 0 || dim > crate::poly::MAX_COORDS {
            return Err(Error::Config(format!("patch dimension must be in 1..={}", crate::poly::MAX_COORDS)));
        }
        Ok(FormAlgebra { xm, dim })
    }

    pub fn module(&self) -> &Arc<DifferentialCrossedModule> {
        &self.xm
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space_dim(&self, s: Space) -> usize {
        match s {
            Space::G => self.xm.g().dim(),
            Space::H => self.xm.h().dim(),
            Space::Mat(m) => m * m,
            Space::Scalar => 1,
        }
    }

    pub fn zero(&self, degree: usize, space: Space) -> PolyForm {
        PolyForm { degree, space, comps: vec![ScalarForm::zero(); self.space_dim(space)] }
    }

    /// Builds a form from per-component scalar forms, checking homogeneity.
    pub fn from_components(&self, degree: usize, space: Space, comps: Vec<ScalarForm>) -> Result<PolyForm> {
        if comps.len() != self.space_dim(space) {
            return Err(Error::Type(format!("{} components for {:?}", comps.len(), space)));
        }
        for c in &comps {
            for (i, _) in c.terms() {
                if i.count_ones() as usize != degree {
                    return Err(Error::Structural(format!("term {} in a {degree}-form", fmt_index(i))));
                }
                if (i as u32) >> self.dim != 0 {
                    return Err(Error::Structural(format!("term {} outside a {}-dimensional patch", fmt_index(i), self.dim)));
                }
            }
        }
        Ok(PolyForm { degree, space, comps })
    }

    /// `p · dx_{labels} · e_k`, with one-based coordinate labels in any order.
    pub fn monomial(&self, space: Space, element: usize, labels: &[usize], p: Poly) -> Result<PolyForm> {
        if element >= self.space_dim(space) {
            return Err(Error::Structural(format!("basis element {element} out of range for {space:?}")));
        }
        if labels.iter().any(|&l| l == 0 || l > self.dim) {
            return Err(Error::Structural(format!("coordinate labels {labels:?} outside a {}-dimensional patch", self.dim)));
        }
        let mut f = self.zero(labels.len(), space);
        if let Some((i, s)) = multi_index(labels) {
            f.comps[element].add_term(i, if s < 0 { p.neg() } else { p });
        }
        Ok(f)
    }

    /// Shorthand for `monomial` naming a basis element of `g` or `h`.
    pub fn term(&self, space: Space, name: &str, labels: &[usize], p: &str) -> Result<PolyForm> {
        let element = match space {
            Space::G => self.xm.g().index_of(name),
            Space::H => self.xm.h().index_of(name),
            _ => None,
        }
        .ok_or_else(|| Error::Structural(format!("no basis element `{name}` in {space:?}")))?;
        let poly = p.parse().map_err(|e| Error::Fixture(format!("{e}")))?;
        self.monomial(space, element, labels, poly)
    }

    pub fn scalar(&self, degree: usize, f: ScalarForm) -> PolyForm {
        PolyForm { degree, space: Space::Scalar, comps: vec![f] }
    }

    pub fn sum(&self, forms: &[PolyForm]) -> Result<PolyForm> {
        let mut it = forms.iter();
        let mut acc = it.next().ok_or_else(|| Error::Structural("empty sum".into()))?.clone();
        for f in it {
            acc = acc.add(f)?;
        }
        Ok(acc)
    }

    pub fn d(&self, w: &PolyForm) -> PolyForm {
        PolyForm { degree: w.degree + 1, space: w.space, comps: w.comps.iter().map(|c| c.d(self.dim)).collect() }
    }

    /// Expands a `g`- or `h`-valued form into matrices.
    pub fn to_matrix(&self, w: &PolyForm) -> PolyForm {
        let l = match w.space {
            Space::G => self.xm.g(),
            Space::H => self.xm.h(),
            _ => return w.clone(),
        };
        let m = l.size();
        let mut comps = vec![ScalarForm::zero(); m * m];
        for (a, b) in l.basis().iter().enumerate() {
            if w.comps[a].is_zero() {
                continue;
            }
            for (e, x) in b.entries().iter().enumerate() {
                if !x.is_zero() {
                    comps[e] = comps[e].add(&w.comps[a].scale(x));
                }
            }
        }
        PolyForm { degree: w.degree, space: Space::Mat(m), comps }
    }

    /// Reads a matrix-valued form back into `g` or `h` coordinates.
    pub fn project(&self, w: &PolyForm, target: Space) -> Result<PolyForm> {
        let l = match target {
            Space::G => self.xm.g(),
            Space::H => self.xm.h(),
            _ => return Err(Error::Type(format!("cannot project onto {target:?}"))),
        };
        let m = l.size();
        if w.space != Space::Mat(m) {
            return Err(Error::Type(format!("projecting a {:?}-valued form onto {target:?}", w.space)));
        }
        let mut indices: Vec<MultiIndex> = w.comps.iter().flat_map(|c| c.terms.keys().copied()).collect();
        indices.sort_unstable();
        indices.dedup();
        let mut comps = vec![ScalarForm::zero(); l.dim()];
        for i in indices {
            let entries: Vec<Poly> = w.comps.iter().map(|c| c.coeff(i)).collect();
            let pm = PolyMatrix::from_entries(m, entries);
            let coords = l
                .poly_coordinates(&pm)
                .ok_or_else(|| Error::Type(format!("matrix form leaves {target:?} at {}", fmt_index(i))))?;
            for (a, p) in coords.into_iter().enumerate() {
                comps[a].add_term(i, p);
            }
        }
        Ok(PolyForm { degree: w.degree, space: target, comps })
    }

    /// `ω₁ ∧ ω₂` with matrix product on values; `g`/`h` values are first
    /// expanded into matrices.
    pub fn wedge(&self, a: &PolyForm, b: &PolyForm) -> Result<PolyForm> {
        let degree = a.degree + b.degree;
        match (a.space, b.space) {
            (Space::Scalar, _) => Ok(PolyForm {
                degree,
                space: b.space,
                comps: b.comps.iter().map(|c| a.comps[0].wedge(c)).collect(),
            }),
            (_, Space::Scalar) => Ok(PolyForm {
                degree,
                space: a.space,
                comps: a.comps.iter().map(|c| c.wedge(&b.comps[0])).collect(),
            }),
            _ => {
                let (ma, mb) = (self.to_matrix(a), self.to_matrix(b));
                let (Space::Mat(m), Space::Mat(m2)) = (ma.space, mb.space) else { unreachable!() };
                if m != m2 {
                    return Err(Error::Type(format!("wedge of {m}×{m} and {m2}×{m2} matrix forms")));
                }
                let mut comps = vec![ScalarForm::zero(); m * m];
                for i in 0..m {
                    for k in 0..m {
                        let x = &ma.comps[i * m + k];
                        if x.is_zero() {
                            continue;
                        }
                        for j in 0..m {
                            x.wedge_into(&mb.comps[k * m + j], &Scalar::one(), &mut comps[i * m + j]);
                        }
                    }
                }
                Ok(PolyForm { degree, space: Space::Mat(m), comps })
            }
        }
    }

    /// Matrix wedge square `ω ∧ ω`, read back into the space of `ω`.
    pub fn wedge_square(&self, w: &PolyForm) -> Result<PolyForm> {
        let sq = self.wedge(w, w)?;
        match w.space {
            Space::G | Space::H => self.project(&sq, w.space),
            _ => Ok(sq),
        }
    }

    /// Graded bracket through the structure constants.
    pub fn bracket(&self, a: &PolyForm, b: &PolyForm) -> Result<PolyForm> {
        let l = match (a.space, b.space) {
            (Space::G, Space::G) => self.xm.g(),
            (Space::H, Space::H) => self.xm.h(),
            _ => return Err(Error::Type(format!("bracket of {:?}- and {:?}-valued forms", a.space, b.space))),
        };
        let d = l.dim();
        let mut comps = vec![ScalarForm::zero(); d];
        for (i, x) in a.comps.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.comps.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = x.wedge(y);
                if xy.is_zero() {
                    continue;
                }
                for (k, c) in comps.iter_mut().enumerate() {
                    let s = l.c(i, j, k);
                    if !s.is_zero() {
                        *c = c.add(&xy.scale(s));
                    }
                }
            }
        }
        Ok(PolyForm { degree: a.degree + b.degree, space: a.space, comps })
    }

    /// `½[ω, ω]`.
    pub fn half_square(&self, w: &PolyForm) -> Result<PolyForm> {
        Ok(self.bracket(w, w)?.scale(&Scalar::new(1, 2)))
    }

    /// `ω_g ▷ ω_h` through the action tensor.
    pub fn act(&self, a: &PolyForm, b: &PolyForm) -> Result<PolyForm> {
        if a.space != Space::G || b.space != Space::H {
            return Err(Error::Type(format!("action of a {:?}-valued form on a {:?}-valued form", a.space, b.space)));
        }
        let dh = self.xm.h().dim();
        let mut comps = vec![ScalarForm::zero(); dh];
        for (i, x) in a.comps.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.comps.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let mut xy: Option<ScalarForm> = None;
                for (k, c) in comps.iter_mut().enumerate() {
                    let s = self.xm.act_coeff(i, j, k);
                    if !s.is_zero() {
                        let p = xy.get_or_insert_with(|| x.wedge(y));
                        *c = c.add(&p.scale(s));
                    }
                }
            }
        }
        Ok(PolyForm { degree: a.degree + b.degree, space: Space::H, comps })
    }

    pub fn alpha_push(&self, b: &PolyForm) -> Result<PolyForm> {
        if b.space != Space::H {
            return Err(Error::Type(format!("α applied to a {:?}-valued form", b.space)));
        }
        let dg = self.xm.g().dim();
        let mut comps = vec![ScalarForm::zero(); dg];
        for (k, c) in comps.iter_mut().enumerate() {
            for (j, y) in b.comps.iter().enumerate() {
                let s = self.xm.alpha_coeff(k, j);
                if !s.is_zero() && !y.is_zero() {
                    *c = c.add(&y.scale(s));
                }
            }
        }
        Ok(PolyForm { degree: b.degree, space: Space::G, comps })
    }

    /// `dω + [A, ω]` or `dω + A ▷ ω`.
    pub fn cov_d(&self, a: &PolyForm, w: &PolyForm) -> Result<PolyForm> {
        let dw = self.d(w);
        match w.space {
            Space::G => dw.add(&self.bracket(a, w)?),
            Space::H => dw.add(&self.act(a, w)?),
            s => Err(Error::Type(format!("covariant derivative of a {s:?}-valued form"))),
        }
    }

    /// `⟨ω₁ ⋯ ω_n, β⟩`: scalar coefficient forms are multiplied in argument
    /// order and contracted with the pairing coefficients.
    pub fn pair(&self, p: &InvariantPairing, gs: &[&PolyForm], beta: &PolyForm) -> Result<PolyForm> {
        if gs.len() != p.n() {
            return Err(Error::Arity { expected: p.n(), got: gs.len() });
        }
        if gs.iter().any(|w| w.space != Space::G) || beta.space != Space::H {
            return Err(Error::Type("pairing takes g-valued forms and one h-valued form".into()));
        }
        let degree = gs.iter().map(|w| w.degree).sum::<usize>() + beta.degree;
        let dg = self.xm.g().dim();
        let n = p.n();
        // Products of the g-slots are built prefix by prefix, skipping
        // prefixes on which every pairing coefficient vanishes.
        let mut acc = ScalarForm::zero();
        // One extra degree for a parameter differential such as `dt`.
        if degree > self.dim + 1 {
            return Ok(self.scalar(degree, acc));
        }
        let mut prefixes: Vec<(Vec<usize>, ScalarForm)> = vec![(vec![], ScalarForm::term(0, Poly::int(1)))];
        for w in gs {
            let mut next = Vec::new();
            for (prefix, f) in &prefixes {
                for a in 0..dg {
                    if w.comps[a].is_zero() {
                        continue;
                    }
                    let mut t = prefix.clone();
                    t.push(a);
                    if !self.prefix_live(p, &t, n) {
                        continue;
                    }
                    let g = f.wedge(&w.comps[a]);
                    if !g.is_zero() {
                        next.push((t, g));
                    }
                }
            }
            prefixes = next;
            if prefixes.is_empty() {
                break;
            }
        }
        for (tuple, f) in &prefixes {
            for (b, y) in beta.comps.iter().enumerate() {
                let c = p.coeff(tuple, b);
                if !c.is_zero() && !y.is_zero() {
                    f.wedge_into(y, c, &mut acc);
                }
            }
        }
        Ok(self.scalar(degree, acc))
    }

    fn prefix_live(&self, p: &InvariantPairing, prefix: &[usize], n: usize) -> bool {
        let dg = self.xm.g().dim();
        let rest = n - prefix.len();
        let mut live = false;
        for_each_tuple(dg, rest, |tail| {
            if live {
                return;
            }
            let mut t = prefix.to_vec();
            t.extend_from_slice(tail);
            live = (0..self.xm.h().dim()).any(|b| !p.coeff(&t, b).is_zero());
        });
        live
    }

    /// Applies a coefficient matrix to the components: `out_c = Σ_a M[c][a] ω_a`.
    pub fn linear_map(&self, w: &PolyForm, m: &PolyMatrix, target: Space) -> PolyForm {
        let dt = self.space_dim(target);
        let mut comps = vec![ScalarForm::zero(); dt];
        for (c, out) in comps.iter_mut().enumerate() {
            for (a, x) in w.comps.iter().enumerate() {
                let k = m.get(c, a);
                if !k.is_zero() && !x.is_zero() {
                    *out = out.add(&x.mul_poly(k));
                }
            }
        }
        PolyForm { degree: w.degree, space: target, comps }
    }

    /// `g ω g⁻¹` for `g`-valued `ω`.
    pub fn conj_g(&self, g: &GroupMap, w: &PolyForm) -> Result<PolyForm> {
        let ad = crate::group::ad_g(&self.xm, g)?;
        Ok(self.linear_map(w, &ad, Space::G))
    }

    /// `g ▷ ω` for `h`-valued `ω`.
    pub fn act_group(&self, g: &GroupMap, w: &PolyForm) -> Result<PolyForm> {
        let m = crate::group::h_action(&self.xm, g)?;
        Ok(self.linear_map(w, &m, Space::H))
    }

    /// `g⁻¹ dg` as a `g`-valued 1-form.
    pub fn maurer_cartan(&self, g: &GroupMap) -> Result<PolyForm> {
        let size = self.xm.g().size();
        let mut f = PolyForm { degree: 1, space: Space::Mat(size), comps: vec![ScalarForm::zero(); size * size] };
        if g.kind() == crate::group::GroupKind::Constant {
            return Ok(self.zero(1, Space::G));
        }
        for i in 0..self.dim {
            let m = g.inverse_matrix().mul(&g.partial(i));
            for (e, p) in m.entries().iter().enumerate() {
                f.comps[e].add_term(1 << i, p.clone());
            }
        }
        self.project(&f, Space::G).map_err(|_| Error::Capability("g⁻¹dg leaves g".into()))
    }

    /// `∫₀¹ ω dv`.
    pub fn integrate_param(&self, w: &PolyForm, v: Var) -> PolyForm {
        w.map(|p| p.integrate_unit(v))
    }

    pub fn deriv_param(&self, w: &PolyForm, v: Var) -> PolyForm {
        w.map(|p| p.deriv(v))
    }

    pub fn substitute(&self, w: &PolyForm, v: Var, value: &Scalar) -> PolyForm {
        w.map(|p| p.substitute(v, value))
    }

    /// Exact values of every component at a point, per multi-index.
    pub fn eval_at(&self, w: &PolyForm, point: &[Scalar]) -> Result<BTreeMap<MultiIndex, Vec<Scalar>>> {
        if point.len() != self.dim {
            return Err(Error::Structural(format!("point has {} coordinates, patch has {}", point.len(), self.dim)));
        }
        let mut out: BTreeMap<MultiIndex, Vec<Scalar>> = BTreeMap::new();
        let n = w.comps.len();
        for (k, c) in w.comps.iter().enumerate() {
            for (i, p) in c.terms() {
                let v = p.eval_coords(point);
                out.entry(i).or_insert_with(|| vec![Scalar::zero(); n])[k] = v;
            }
        }
        out.retain(|_, v| v.iter().any(|x| !x.is_zero()));
        Ok(out)
    }

    /// Re-expands every coefficient as a jet around `point`.
    pub fn shift_coords(&self, w: &PolyForm, point: &[Scalar], order: i16) -> PolyForm {
        w.map(|p| p.shift_coords(point, order))
    }

    /// Human-readable rendering with basis element names.
    pub fn render(&self, w: &PolyForm) -> String {
        let names: Vec<String> = match w.space {
            Space::G => self.xm.g().names().to_vec(),
            Space::H => self.xm.h().names().to_vec(),
            Space::Mat(m) => (0..m * m).map(|e| format!("e{}{}", e / m + 1, e % m + 1)).collect(),
            Space::Scalar => vec![String::new()],
        };
        let mut parts = Vec::new();
        let mut indices: Vec<MultiIndex> = w.comps.iter().flat_map(|c| c.terms.keys().copied()).collect();
        indices.sort_unstable();
        indices.dedup();
        for i in indices {
            for (k, c) in w.comps.iter().enumerate() {
                if let Some(p) = c.terms.get(&i) {
                    let elem = if names[k].is_empty() { String::new() } else { format!("·{}", names[k]) };
                    parts.push(format!("({p}) {}{elem}", fmt_index(i)));
                }
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::symmetrized_trace_pairing;
    use crate::fixture;

    fn sl2(dim: usize) -> FormAlgebra {
        FormAlgebra::new(Arc::new(fixture::module("adjoint:sl2").unwrap()), dim).unwrap()
    }

    #[test]
    fn wedge_signs() {
        assert_eq!(wedge_sign(0b01, 0b10), 1);
        assert_eq!(wedge_sign(0b10, 0b01), -1);
        assert_eq!(wedge_sign(0b01, 0b01), 0);
        assert_eq!(multi_index(&[3, 1, 2]), Some((0b111, 1)));
        assert_eq!(multi_index(&[2, 1]), Some((0b11, -1)));
        assert_eq!(multi_index(&[2, 2]), None);
    }

    #[test]
    fn exterior_derivative_example() {
        let fa = sl2(5);
        let w = fa.term(Space::G, "H", &[1], "x2").unwrap();
        assert_eq!(fa.d(&w), fa.term(Space::G, "H", &[1, 2], "-1").unwrap());
        let v = fa.term(Space::G, "E", &[2], "x1*x3").unwrap();
        assert!(fa.d(&fa.d(&v)).is_zero());
        assert!(fa.d(&fa.term(Space::G, "E", &[], "7").unwrap()).is_zero());
    }

    #[test]
    fn wedge_examples() {
        let fa = sl2(5);
        let a = fa.term(Space::G, "E", &[1], "x2").unwrap();
        assert!(fa.wedge(&a, &a).unwrap().is_zero());
        let e = fa.term(Space::G, "E", &[1], "1").unwrap();
        let f = fa.term(Space::G, "F", &[2], "1").unwrap();
        let ef = fa.wedge(&e, &f).unwrap();
        assert_eq!(ef.space(), Space::Mat(2));
        assert_eq!(ef.component(0), &ScalarForm::term(0b11, Poly::int(1)));
        assert!(ef.components()[1..].iter().all(ScalarForm::is_zero));
        let c = fa.scalar(0, ScalarForm::term(0, Poly::int(3)));
        assert_eq!(fa.wedge(&c, &a).unwrap(), a.scale(&Scalar::from_int(3)));
    }

    #[test]
    fn bracket_examples() {
        let fa = sl2(5);
        let a = fa.term(Space::G, "E", &[1], "x2").unwrap().add(&fa.term(Space::G, "F", &[3], "x4").unwrap()).unwrap();
        assert_eq!(fa.bracket(&a, &a).unwrap(), fa.term(Space::G, "H", &[1, 3], "2*x2*x4").unwrap());
        let h = fa.term(Space::G, "H", &[1], "x2").unwrap();
        assert!(fa.bracket(&h, &h).unwrap().is_zero());
        assert!(matches!(fa.bracket(&h, &fa.zero(1, Space::Scalar)), Err(Error::Type(_))));
    }

    #[test]
    fn action_examples() {
        let fa = sl2(5);
        let h = fa.term(Space::G, "H", &[1], "x2").unwrap();
        let b = fa.term(Space::H, "E", &[3, 4], "x5").unwrap();
        assert_eq!(fa.act(&h, &b).unwrap(), fa.term(Space::H, "E", &[1, 3, 4], "2*x2*x5").unwrap());
        assert!(fa.act(&h, &fa.zero(2, Space::H)).unwrap().is_zero());
        let e1 = fa.term(Space::G, "E", &[1], "1").unwrap();
        let e2 = fa.term(Space::H, "E", &[2], "1").unwrap();
        assert!(fa.act(&e1, &e2).unwrap().is_zero());
        assert!(matches!(fa.act(&e2, &e1), Err(Error::Type(_))));
    }

    #[test]
    fn alpha_push_examples() {
        let fa = sl2(5);
        let b = fa.term(Space::H, "E", &[3, 4], "x5").unwrap();
        assert_eq!(fa.alpha_push(&b).unwrap(), fa.term(Space::G, "E", &[3, 4], "x5").unwrap());
        let ab = FormAlgebra::new(Arc::new(fixture::module("abelian:sl2-defining").unwrap()), 5).unwrap();
        let v = ab.term(Space::H, "v1", &[1], "x2").unwrap();
        assert!(ab.alpha_push(&v).unwrap().is_zero());
    }

    #[test]
    fn covariant_derivative_example() {
        let fa = sl2(5);
        let a = fa.term(Space::G, "E", &[1], "x2").unwrap();
        let w = fa.term(Space::G, "F", &[3], "x4").unwrap();
        let expected = fa
            .term(Space::G, "F", &[4, 3], "1")
            .unwrap()
            .add(&fa.term(Space::G, "H", &[1, 3], "x2*x4").unwrap())
            .unwrap();
        assert_eq!(fa.cov_d(&a, &w).unwrap(), expected);
        assert_eq!(fa.cov_d(&fa.zero(1, Space::G), &w).unwrap(), fa.d(&w));
    }

    #[test]
    fn pairing_examples() {
        let fa = sl2(5);
        let p = symmetrized_trace_pairing(fa.module(), 1).unwrap();
        let e = fa.term(Space::G, "E", &[1], "1").unwrap();
        let f = fa.term(Space::H, "F", &[2], "1").unwrap();
        let v = fa.pair(&p, &[&e], &f).unwrap();
        assert_eq!(v.component(0), &ScalarForm::term(0b11, Poly::int(1)));
        assert!(matches!(fa.pair(&p, &[&e, &e], &f), Err(Error::Arity { expected: 1, got: 2 })));
    }

    #[test]
    fn wedge_square_is_half_bracket_on_one_forms() {
        let fa = sl2(4);
        let w = fa
            .term(Space::H, "E", &[1], "x2")
            .unwrap()
            .add(&fa.term(Space::H, "F", &[3], "x4 + 1").unwrap())
            .unwrap()
            .add(&fa.term(Space::H, "H", &[2], "x1").unwrap())
            .unwrap();
        assert_eq!(fa.wedge_square(&w).unwrap(), fa.half_square(&w).unwrap());
    }

    #[test]
    fn evaluation() {
        let fa = sl2(5);
        let w = fa.term(Space::G, "H", &[1], "x2").unwrap();
        let point: Vec<Scalar> = [0, 3, 0, 0, 0].iter().map(|&x| Scalar::from_int(x)).collect();
        let vals = fa.eval_at(&w, &point).unwrap();
        assert_eq!(vals.len(), 1);
        assert_eq!(vals[&0b1], vec![Scalar::from_int(3), Scalar::zero(), Scalar::zero()]);
        assert!(fa.eval_at(&fa.zero(2, Space::G), &point).unwrap().is_empty());
        assert!(fa.eval_at(&w, &point[..2]).is_err());
    }

    #[test]
    fn parameter_integrals() {
        let fa = sl2(3);
        let w = fa.term(Space::G, "E", &[1], "t^2 - t").unwrap();
        let i = fa.integrate_param(&w, Var::T);
        assert_eq!(i, fa.term(Space::G, "E", &[1], "-1/6").unwrap());
        let w2 = fa.term(Space::G, "E", &[1], "(t^2 - t)^2").unwrap();
        assert_eq!(fa.integrate_param(&w2, Var::T), fa.term(Space::G, "E", &[1], "1/30").unwrap());
    }
}
