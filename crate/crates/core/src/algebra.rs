//! Matrix Lie algebras, differential crossed modules and invariant pairings.
//!
//! Everything is stored densely in fixed bases: structure constants
//! `c^k_ij`, the action tensor `a^c_ab` with `X_a ▷ Y_b = Σ_c a^c_ab Y_c`,
//! and `α` as a `dim g × dim h` coefficient array. The validators check each
//! axiom exactly on every basis tuple.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupMap;
use crate::matrix::{Coordinates, Matrix, PolyMatrix};
use crate::poly::{Poly, Var};
use crate::scalar::Scalar;

/// One failed axiom instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub law: &'static str,
    /// Basis element names of the offending tuple, in argument order.
    pub tuple: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub subject: String,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn new(subject: &str) -> Self {
        ValidationReport { subject: subject.to_string(), ..Default::default() }
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn laws_violated(&self) -> Vec<&'static str> {
        let mut laws: Vec<&'static str> = self.violations.iter().map(|v| v.law).collect();
        laws.dedup();
        laws
    }

    fn check(&mut self, ok: bool, law: &'static str, tuple: Vec<String>, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(Violation { law, tuple, detail: detail() });
        }
    }

    fn merge(&mut self, other: ValidationReport) {
        self.checks += other.checks;
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {} checks, {} violations", self.subject, self.checks, self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {} at ({}): {}", v.law, v.tuple.join(", "), v.detail)?;
        }
        Ok(())
    }
}

fn fmt_vec(v: &[Scalar]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

#[derive(Clone, Debug)]
pub struct MatrixLieAlgebra {
    name: String,
    names: Vec<String>,
    basis: Vec<Matrix>,
    /// `structure[(i * dim + j) * dim + k] = c^k_ij`.
    structure: Vec<Scalar>,
    coords: Option<Coordinates>,
}

impl MatrixLieAlgebra {
    /// Stores a basis together with claimed structure constants without
    /// checking either; see [`validate_lie_algebra`].
    pub fn with_structure(
        name: &str,
        names: Vec<String>,
        basis: Vec<Matrix>,
        constants: Vec<Scalar>,
    ) -> Result<Self> {
        let dim = basis.len();
        if names.len() != dim {
            return Err(Error::Structural(format!("{} names for {} basis matrices", names.len(), dim)));
        }
        if constants.len() != dim * dim * dim {
            return Err(Error::Structural(format!(
                "expected {} structure constants, got {}",
                dim * dim * dim,
                constants.len()
            )));
        }
        let coords = if basis.iter().all(|b| b.size() == basis[0].size()) {
            let vecs: Vec<Vec<Scalar>> = basis.iter().map(|b| b.entries().to_vec()).collect();
            Coordinates::new(&vecs)
        } else {
            None
        };
        Ok(MatrixLieAlgebra { name: name.to_string(), names, basis, structure: constants, coords })
    }

    /// Computes the structure constants from the basis; fails unless the basis
    /// is nonempty, square, independent and closed under the commutator.
    pub fn from_basis(name: &str, names: &[&str], basis: Vec<Matrix>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Structural("empty basis".into()));
        }
        let size = basis[0].size();
        if basis.iter().any(|b| b.size() != size) {
            return Err(Error::Structural("basis matrices have different sizes".into()));
        }
        let dim = basis.len();
        let vecs: Vec<Vec<Scalar>> = basis.iter().map(|b| b.entries().to_vec()).collect();
        let coords = Coordinates::new(&vecs)
            .ok_or_else(|| Error::Structural(format!("basis of {name} is linearly dependent")))?;
        let mut structure = vec![Scalar::zero(); dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let br = basis[i].commutator(&basis[j]);
                let c = coords.solve(br.entries()).ok_or_else(|| {
                    Error::Structural(format!("[{}, {}] leaves the span of {name}", names[i], names[j]))
                })?;
                for (k, ck) in c.into_iter().enumerate() {
                    structure[(i * dim + j) * dim + k] = ck;
                }
            }
        }
        Ok(MatrixLieAlgebra {
            name: name.to_string(),
            names: names.iter().map(|s| s.to_string()).collect(),
            basis,
            structure,
            coords: Some(coords),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Size of the square matrices.
    pub fn size(&self) -> usize {
        self.basis.first().map_or(0, Matrix::size)
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `c^k_ij`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> &Scalar {
        let d = self.dim();
        &self.structure[(i * d + j) * d + k]
    }

    pub fn structure_constants(&self) -> &[Scalar] {
        &self.structure
    }

    /// Bracket of coordinate vectors via the structure constants.
    pub fn bracket(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let d = self.dim();
        let mut out = vec![Scalar::zero(); d];
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y[j].is_zero() {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.c(i, j, k);
                    if !c.is_zero() {
                        *o += &(&xy * c);
                    }
                }
            }
        }
        out
    }

    pub fn to_matrix(&self, coords: &[Scalar]) -> Matrix {
        let mut m = Matrix::zeros(self.size());
        for (c, b) in coords.iter().zip(&self.basis) {
            if !c.is_zero() {
                m = m.add(&b.scale(c));
            }
        }
        m
    }

    pub fn to_poly_matrix(&self, coords: &[Poly]) -> PolyMatrix {
        let n = self.size();
        let mut entries = vec![Poly::zero(); n * n];
        for (c, b) in coords.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (e, x) in entries.iter_mut().zip(b.entries()) {
                if !x.is_zero() {
                    *e = e.add(&c.scale(x));
                }
            }
        }
        PolyMatrix::from_entries(n, entries)
    }

    /// Coordinates of a constant matrix, `None` if outside the algebra.
    pub fn coordinates(&self, m: &Matrix) -> Option<Vec<Scalar>> {
        self.coords.as_ref()?.solve(m.entries())
    }

    /// Coordinates of a polynomial matrix, `None` if outside the algebra.
    pub fn poly_coordinates(&self, m: &PolyMatrix) -> Option<Vec<Poly>> {
        self.coords.as_ref()?.solve_poly(m.entries())
    }

    fn unit(&self, i: usize) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); self.dim()];
        v[i] = Scalar::one();
        v
    }
}

/// Exhaustive check of a matrix Lie algebra against its claimed constants.
pub fn validate_lie_algebra(l: &MatrixLieAlgebra) -> Result<ValidationReport> {
    if l.basis.is_empty() {
        return Err(Error::Structural("empty basis".into()));
    }
    let size = l.size();
    if l.basis.iter().any(|b| b.size() != size) {
        return Err(Error::Structural(format!("basis matrices of {} have different sizes", l.name)));
    }
    let mut rep = ValidationReport::new(&format!("lie algebra {}", l.name));
    let d = l.dim();
    let n = |i: usize| l.names[i].clone();
    rep.check(l.coords.is_some(), "independence", l.names.clone(), || "basis matrices are linearly dependent".into());
    for i in 0..d {
        for j in 0..d {
            let actual = l.basis[i].commutator(&l.basis[j]);
            let claimed = l.to_matrix(&(0..d).map(|k| l.c(i, j, k).clone()).collect::<Vec<_>>());
            rep.check(actual == claimed, "closure", vec![n(i), n(j)], || {
                format!("[X_i, X_j] = {:?} but constants give {:?}", actual, claimed)
            });
            for k in 0..d {
                let s = l.c(i, j, k) + l.c(j, i, k);
                rep.check(s.is_zero(), "antisymmetry", vec![n(i), n(j), n(k)], || {
                    format!("c^k_ij + c^k_ji = {s}")
                });
            }
        }
    }
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let (xi, xj, xk) = (l.unit(i), l.unit(j), l.unit(k));
                let t1 = l.bracket(&l.bracket(&xi, &xj), &xk);
                let t2 = l.bracket(&l.bracket(&xj, &xk), &xi);
                let t3 = l.bracket(&l.bracket(&xk, &xi), &xj);
                let sum: Vec<Scalar> = (0..d).map(|m| &(&t1[m] + &t2[m]) + &t3[m]).collect();
                rep.check(sum.iter().all(Scalar::is_zero), "jacobi", vec![n(i), n(j), n(k)], || {
                    format!("cyclic sum {}", fmt_vec(&sum))
                });
            }
        }
    }
    Ok(rep)
}

/// How a group element acts on `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupAction {
    /// `h` is a matrix algebra normalised by `G`; `g ▷ Y = g Y g⁻¹`.
    Adjoint,
    /// `h` is the representation space of `rep(X_a)`; `g ▷ v = ρ(g) v`.
    Representation { rep: Vec<Matrix> },
    /// No finite action available; gauge operations report a capability error.
    Unsupported,
}

#[derive(Clone, Debug)]
pub struct DifferentialCrossedModule {
    name: String,
    g: MatrixLieAlgebra,
    h: MatrixLieAlgebra,
    /// `alpha[k][b]`: coefficient of `X_k` in `α(Y_b)`.
    alpha: Vec<Vec<Scalar>>,
    /// `action[(a * dim_h + b) * dim_h + c] = a^c_ab`.
    action: Vec<Scalar>,
    group_action: GroupAction,
}

impl DifferentialCrossedModule {
    pub fn new(
        name: &str,
        g: MatrixLieAlgebra,
        h: MatrixLieAlgebra,
        alpha: Vec<Vec<Scalar>>,
        action: Vec<Scalar>,
        group_action: GroupAction,
    ) -> Self {
        DifferentialCrossedModule { name: name.to_string(), g, h, alpha, action, group_action }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn g(&self) -> &MatrixLieAlgebra {
        &self.g
    }

    pub fn h(&self) -> &MatrixLieAlgebra {
        &self.h
    }

    pub fn group_action(&self) -> &GroupAction {
        &self.group_action
    }

    pub fn alpha_matrix(&self) -> &[Vec<Scalar>] {
        &self.alpha
    }

    pub fn action_tensor(&self) -> &[Scalar] {
        &self.action
    }

    /// `a^c_ab`.
    pub fn act_coeff(&self, a: usize, b: usize, c: usize) -> &Scalar {
        let dh = self.h.dim();
        &self.action[(a * dh + b) * dh + c]
    }

    /// Coefficient of `X_k` in `α(Y_b)`.
    pub fn alpha_coeff(&self, k: usize, b: usize) -> &Scalar {
        &self.alpha[k][b]
    }

    pub fn is_alpha_zero(&self) -> bool {
        self.alpha.iter().flatten().all(Scalar::is_zero)
    }

    pub fn act_vec(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let dh = self.h.dim();
        let mut out = vec![Scalar::zero(); dh];
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let w = xa * yb;
                for (c, o) in out.iter_mut().enumerate() {
                    let k = self.act_coeff(a, b, c);
                    if !k.is_zero() {
                        *o += &(&w * k);
                    }
                }
            }
        }
        out
    }

    pub fn alpha_vec(&self, y: &[Scalar]) -> Vec<Scalar> {
        (0..self.g.dim())
            .map(|k| {
                let mut acc = Scalar::zero();
                for (b, yb) in y.iter().enumerate() {
                    acc += &(&self.alpha[k][b] * yb);
                }
                acc
            })
            .collect()
    }

    /// `α(Y_b)` as a matrix in the defining representation of `g`.
    pub fn alpha_matrix_of(&self, b: usize) -> Matrix {
        let mut e = vec![Scalar::zero(); self.h.dim()];
        e[b] = Scalar::one();
        self.g.to_matrix(&self.alpha_vec(&e))
    }

    /// Constant group elements bundled for the integrated-invariance checks.
    pub fn sample_group_elements(&self) -> Vec<(String, GroupMap)> {
        let size = self.g.size();
        let x1 = Poly::var(Var::X(0));
        let mut out = Vec::new();
        for (i, b) in self.g.basis().iter().enumerate() {
            let nil = b.to_poly();
            if !nil.is_strictly_triangular() || nil.is_zero() {
                continue;
            }
            if let Ok(g) = GroupMap::unipotent(nil.map(|p| p.mul(&x1))) {
                out.push((format!("exp(x1·{})", self.g.names()[i]), g));
            }
            if let Ok(g) = GroupMap::unipotent(nil.clone()) {
                out.push((format!("exp({})", self.g.names()[i]), g));
            }
        }
        if size >= 2 {
            let mut d = Matrix::identity(size);
            d.set(0, 0, Scalar::from_int(2));
            d.set(size - 1, size - 1, Scalar::new(1, 2));
            if let Ok(g) = GroupMap::constant(d) {
                if crate::group::ad_g(self, &g).is_ok() && crate::group::h_action(self, &g).is_ok() {
                    out.push(("diag(2,…,1/2)".to_string(), g));
                }
            }
        }
        out
    }
}

/// Checks the four crossed-module axioms on every basis tuple.
pub fn validate_crossed_module(xm: &DifferentialCrossedModule) -> Result<ValidationReport> {
    let (dg, dh) = (xm.g.dim(), xm.h.dim());
    if xm.alpha.len() != dg || xm.alpha.iter().any(|r| r.len() != dh) {
        return Err(Error::Structural(format!("alpha must be a {dg}×{dh} array")));
    }
    if xm.action.len() != dg * dh * dh {
        return Err(Error::Structural(format!("action tensor must have {} entries", dg * dh * dh)));
    }
    let mut rep = ValidationReport::new(&format!("crossed module {}", xm.name));
    rep.merge(validate_lie_algebra(&xm.g)?);
    rep.merge(validate_lie_algebra(&xm.h)?);
    let gn = |i: usize| xm.g.names[i].clone();
    let hn = |i: usize| xm.h.names[i].clone();
    let gu = |i| xm.g.unit(i);
    let hu = |i| xm.h.unit(i);
    let sub = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    let zero = |v: &[Scalar]| v.iter().all(Scalar::is_zero);

    for a in 0..dg {
        for b1 in 0..dh {
            for b2 in 0..dh {
                let lhs = xm.act_vec(&gu(a), &xm.h.bracket(&hu(b1), &hu(b2)));
                let r1 = xm.h.bracket(&xm.act_vec(&gu(a), &hu(b1)), &hu(b2));
                let r2 = xm.h.bracket(&hu(b1), &xm.act_vec(&gu(a), &hu(b2)));
                let res: Vec<Scalar> = sub(&sub(&lhs, &r1), &r2);
                rep.check(zero(&res), "derivation", vec![gn(a), hn(b1), hn(b2)], || {
                    format!("X▷[Y1,Y2] − [X▷Y1,Y2] − [Y1,X▷Y2] = {}", fmt_vec(&res))
                });
            }
        }
    }
    for a1 in 0..dg {
        for a2 in 0..dg {
            for b in 0..dh {
                let lhs = xm.act_vec(&xm.g.bracket(&gu(a1), &gu(a2)), &hu(b));
                let r1 = xm.act_vec(&gu(a1), &xm.act_vec(&gu(a2), &hu(b)));
                let r2 = xm.act_vec(&gu(a2), &xm.act_vec(&gu(a1), &hu(b)));
                let res = sub(&sub(&lhs, &r1), &r2.iter().map(|x| -x).collect::<Vec<_>>());
                rep.check(zero(&res), "morphism", vec![gn(a1), gn(a2), hn(b)], || {
                    format!("[X1,X2]▷Y − X1▷(X2▷Y) + X2▷(X1▷Y) = {}", fmt_vec(&res))
                });
            }
        }
    }
    for a in 0..dg {
        for b in 0..dh {
            let lhs = xm.alpha_vec(&xm.act_vec(&gu(a), &hu(b)));
            let rhs = xm.g.bracket(&gu(a), &xm.alpha_vec(&hu(b)));
            let res = sub(&lhs, &rhs);
            rep.check(zero(&res), "equivariance", vec![gn(a), hn(b)], || {
                format!("α(X▷Y) − [X,α(Y)] = {}", fmt_vec(&res))
            });
        }
    }
    for b1 in 0..dh {
        for b2 in 0..dh {
            let lhs = xm.act_vec(&xm.alpha_vec(&hu(b1)), &hu(b2));
            let rhs = xm.h.bracket(&hu(b1), &hu(b2));
            let res = sub(&lhs, &rhs);
            rep.check(zero(&res), "peiffer", vec![hn(b1), hn(b2)], || {
                format!("α(Y)▷Y′ − [Y,Y′] = {}", fmt_vec(&res))
            });
        }
    }
    Ok(rep)
}

/// `h = g = L`, `α = id`, `X ▷ Y = [X, Y]`, both acted on by conjugation.
pub fn adjoint_module(l: &MatrixLieAlgebra) -> DifferentialCrossedModule {
    let d = l.dim();
    let alpha = (0..d).map(|k| (0..d).map(|b| if k == b { Scalar::one() } else { Scalar::zero() }).collect()).collect();
    DifferentialCrossedModule::new(
        &format!("adjoint:{}", l.name()),
        l.clone(),
        l.clone(),
        alpha,
        l.structure_constants().to_vec(),
        GroupAction::Adjoint,
    )
}

/// `h = V` abelian, `α = 0`, `X ▷ v = rep(X) v`.
///
/// `h` is realised by the diagonal unit matrices of size `dim V` so that it
/// is itself a (commutative) matrix Lie algebra.
pub fn abelian_rep_module(l: &MatrixLieAlgebra, rep: Vec<Matrix>, rep_name: &str) -> Result<DifferentialCrossedModule> {
    if rep.len() != l.dim() {
        return Err(Error::Structural(format!("{} representation matrices for dim {}", rep.len(), l.dim())));
    }
    let m = rep.first().map_or(0, Matrix::size);
    if m == 0 || rep.iter().any(|r| r.size() != m) {
        return Err(Error::Structural("representation matrices must share a positive size".into()));
    }
    let names: Vec<String> = (1..=m).map(|i| format!("v{i}")).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let basis = (0..m)
        .map(|i| {
            let mut e = Matrix::zeros(m);
            e.set(i, i, Scalar::one());
            e
        })
        .collect();
    let h = MatrixLieAlgebra::from_basis(&format!("R{m}"), &name_refs, basis)?;
    let dg = l.dim();
    let mut action = vec![Scalar::zero(); dg * m * m];
    for a in 0..dg {
        for b in 0..m {
            for c in 0..m {
                action[(a * m + b) * m + c] = rep[a].get(c, b).clone();
            }
        }
    }
    let alpha = vec![vec![Scalar::zero(); m]; dg];
    Ok(DifferentialCrossedModule::new(
        &format!("abelian:{}-{}", l.name(), rep_name),
        l.clone(),
        h,
        alpha,
        action,
        GroupAction::Representation { rep },
    ))
}

/// Multilinear map `g^{⊗n} × h → ℚ`, stored densely.
#[derive(Clone, Debug)]
pub struct InvariantPairing {
    xm: Arc<DifferentialCrossedModule>,
    n: usize,
    /// Index `((a_1 · dg + a_2) · dg + … + a_n) · dh + b`.
    coeffs: Vec<Scalar>,
}

impl InvariantPairing {
    pub fn new(xm: Arc<DifferentialCrossedModule>, n: usize, coeffs: Vec<Scalar>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structural("pairing needs at least one g-slot".into()));
        }
        let expected = xm.g.dim().pow(n as u32) * xm.h.dim();
        if coeffs.len() != expected {
            return Err(Error::Structural(format!("expected {expected} pairing coefficients, got {}", coeffs.len())));
        }
        Ok(InvariantPairing { xm, n, coeffs })
    }

    pub fn module(&self) -> &Arc<DifferentialCrossedModule> {
        &self.xm
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index(&self, gs: &[usize], b: usize) -> usize {
        let dg = self.xm.g.dim();
        let mut idx = 0;
        for &a in gs {
            idx = idx * dg + a;
        }
        idx * self.xm.h.dim() + b
    }

    pub fn coeff(&self, gs: &[usize], b: usize) -> &Scalar {
        &self.coeffs[self.index(gs, b)]
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn with_coeff(mut self, gs: &[usize], b: usize, value: Scalar) -> Self {
        let i = self.index(gs, b);
        self.coeffs[i] = value;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Multilinear evaluation on coordinate vectors.
    pub fn eval(&self, xs: &[Vec<Scalar>], y: &[Scalar]) -> Scalar {
        assert_eq!(xs.len(), self.n);
        let mut acc = Scalar::zero();
        for_each_tuple(self.xm.g.dim(), self.n, |tuple| {
            let mut w = Scalar::one();
            for (slot, &a) in tuple.iter().enumerate() {
                if xs[slot][a].is_zero() {
                    return;
                }
                w = &w * &xs[slot][a];
            }
            for (b, yb) in y.iter().enumerate() {
                let c = self.coeff(tuple, b);
                if !c.is_zero() && !yb.is_zero() {
                    acc += &(&(&w * c) * yb);
                }
            }
        });
        acc
    }

    /// Multilinear evaluation on polynomial coordinate vectors.
    pub fn eval_poly(&self, xs: &[Vec<Poly>], y: &[Poly]) -> Poly {
        assert_eq!(xs.len(), self.n);
        let mut acc = Poly::zero();
        for_each_tuple(self.xm.g.dim(), self.n, |tuple| {
            let mut contracted = Poly::zero();
            for (b, yb) in y.iter().enumerate() {
                let c = self.coeff(tuple, b);
                if !c.is_zero() && !yb.is_zero() {
                    contracted = contracted.add(&yb.scale(c));
                }
            }
            if contracted.is_zero() {
                return;
            }
            for (slot, &a) in tuple.iter().enumerate() {
                contracted = contracted.mul(&xs[slot][a]);
                if contracted.is_zero() {
                    return;
                }
            }
            acc = acc.add(&contracted);
        });
        acc
    }
}

/// Calls `f` on every tuple in `{0..dim}^n`, in lexicographic order.
pub fn for_each_tuple(dim: usize, n: usize, mut f: impl FnMut(&[usize])) {
    if dim == 0 {
        return;
    }
    let mut t = vec![0usize; n];
    loop {
        f(&t);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            t[k] += 1;
            if t[k] < dim {
                break;
            }
            t[k] = 0;
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `⟨X_1 ⋯ X_n, Y⟩ = Str(X_1, …, X_n, α(Y))`, the trace of the product
/// symmetrised over all `n + 1` arguments.
pub fn symmetrized_trace_pairing(xm: &Arc<DifferentialCrossedModule>, n: usize) -> Result<InvariantPairing> {
    if n == 0 {
        return Err(Error::Structural("pairing needs at least one g-slot".into()));
    }
    let (dg, dh) = (xm.g.dim(), xm.h.dim());
    let perms = permutations(n + 1);
    let norm = Scalar::factorial(n as u32 + 1).recip();
    let alphas: Vec<Matrix> = (0..dh).map(|b| xm.alpha_matrix_of(b)).collect();
    let mut coeffs = vec![Scalar::zero(); dg.pow(n as u32) * dh];
    let mut idx = 0;
    for_each_tuple(dg, n, |tuple| {
        for alpha_b in &alphas {
            if !alpha_b.is_zero() {
                let mut args: Vec<&Matrix> = tuple.iter().map(|&a| &xm.g.basis()[a]).collect();
                args.push(alpha_b);
                let mut acc = Scalar::zero();
                for p in &perms {
                    let mut prod = args[p[0]].clone();
                    for &k in &p[1..] {
                        prod = prod.mul(args[k]);
                    }
                    acc += &prod.trace();
                }
                coeffs[idx] = &acc * &norm;
            }
            idx += 1;
        }
    });
    InvariantPairing::new(xm.clone(), n, coeffs)
}

/// Exact checks of slot symmetry, infinitesimal invariance and the α-swap
/// on every basis tuple, plus integrated invariance under the module's
/// sample group elements (symbolically, for unipotent ones).
pub fn validate_pairing(p: &InvariantPairing) -> Result<ValidationReport> {
    let xm = &p.xm;
    let (dg, dh, n) = (xm.g.dim(), xm.h.dim(), p.n);
    let mut rep = ValidationReport::new(&format!("pairing n={} on {}", n, xm.name));
    let gn = |i: usize| xm.g.names[i].clone();
    let hn = |i: usize| xm.h.names[i].clone();
    let tuple_names = |t: &[usize], b: usize| -> Vec<String> {
        t.iter().map(|&a| gn(a)).chain(std::iter::once(hn(b))).collect()
    };

    for_each_tuple(dg, n, |t| {
        for b in 0..dh {
            for i in 0..n {
                for j in i + 1..n {
                    let mut s = t.to_vec();
                    s.swap(i, j);
                    let (l, r) = (p.coeff(t, b), p.coeff(&s, b));
                    rep.check(l == r, "symmetry", tuple_names(t, b), || format!("slots {i},{j}: {l} vs {r}"));
                }
            }
        }
    });

    // ⟨X_1⋯X_n, X▷Y_b⟩ + Σ_i ⟨X_1⋯[X,X_i]⋯X_n, Y_b⟩ = 0
    for x in 0..dg {
        for_each_tuple(dg, n, |t| {
            for b in 0..dh {
                let mut acc = Scalar::zero();
                for c in 0..dh {
                    let a = xm.act_coeff(x, b, c);
                    if !a.is_zero() {
                        acc += &(a * p.coeff(t, c));
                    }
                }
                for i in 0..n {
                    let mut s = t.to_vec();
                    for k in 0..dg {
                        let c = xm.g.c(x, t[i], k);
                        if !c.is_zero() {
                            s[i] = k;
                            acc += &(c * p.coeff(&s, b));
                        }
                    }
                }
                let mut names = vec![gn(x)];
                names.extend(tuple_names(t, b));
                rep.check(acc.is_zero(), "invariance", names, || format!("residual {acc}"));
            }
        });
    }

    // ⟨⋯α(Y_i)⋯, Y⟩ = ⟨⋯α(Y)⋯, Y_i⟩, slot by slot.
    if n >= 1 {
        for_each_tuple(dg, n - 1, |rest| {
            for slot in 0..n {
                for bi in 0..dh {
                    for b in 0..dh {
                        let side = |inner: usize, outer: usize| {
                            let mut acc = Scalar::zero();
                            for k in 0..dg {
                                let a = xm.alpha_coeff(k, inner);
                                if a.is_zero() {
                                    continue;
                                }
                                let mut t = rest.to_vec();
                                t.insert(slot, k);
                                acc += &(a * p.coeff(&t, outer));
                            }
                            acc
                        };
                        let (l, r) = (side(bi, b), side(b, bi));
                        let mut names: Vec<String> = rest.iter().map(|&a| gn(a)).collect();
                        names.insert(slot, format!("α({})", hn(bi)));
                        names.push(hn(b));
                        rep.check(l == r, "alpha-swap", names, || format!("{l} vs {r}"));
                    }
                }
            }
        });
    }

    if !p.is_zero() {
        for (label, g) in xm.sample_group_elements() {
            let ad = crate::group::ad_g(xm, &g)?;
            let act = crate::group::h_action(xm, &g)?;
            let col = |m: &PolyMatrix, j: usize| -> Vec<Poly> { (0..m.size()).map(|i| m.get(i, j).clone()).collect() };
            for_each_tuple(dg, n, |t| {
                for b in 0..dh {
                    let xs: Vec<Vec<Poly>> = t.iter().map(|&a| col(&ad, a)).collect();
                    let lhs = p.eval_poly(&xs, &col(&act, b));
                    let rhs = Poly::constant(p.coeff(t, b).clone());
                    let res = lhs.sub(&rhs);
                    let mut names = vec![label.clone()];
                    names.extend(tuple_names(t, b));
                    rep.check(res.is_zero(), "integrated-invariance", names, || format!("residual {res}"));
                }
            });
        }
    }
    Ok(rep)
}
