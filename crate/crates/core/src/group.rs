//! Gauge group elements: constant invertible matrices and unipotent
//! polynomial matrices `exp(N)`, plus their action on `g` and `h`.

use crate::algebra::{DifferentialCrossedModule, GroupAction};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, PolyMatrix};
use crate::poly::Var;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Constant,
    Unipotent,
}

/// A group-valued function on the patch, stored with its exact inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupMap {
    kind: GroupKind,
    mat: PolyMatrix,
    inv: PolyMatrix,
    /// `N` with `g = exp(N)` for the unipotent kind.
    log: Option<PolyMatrix>,
}

impl GroupMap {
    pub fn identity(n: usize) -> GroupMap {
        GroupMap {
            kind: GroupKind::Constant,
            mat: PolyMatrix::identity(n),
            inv: PolyMatrix::identity(n),
            log: None,
        }
    }

    pub fn constant(m: Matrix) -> Result<GroupMap> {
        let inv = m
            .inverse()
            .ok_or_else(|| Error::Capability("constant group element is singular".into()))?;
        Ok(GroupMap { kind: GroupKind::Constant, mat: m.to_poly(), inv: inv.to_poly(), log: None })
    }

    /// `exp(N)` for strictly triangular `N` with polynomial entries.
    pub fn unipotent(n: PolyMatrix) -> Result<GroupMap> {
        if !n.is_strictly_triangular() {
            return Err(Error::Capability("unipotent generator must be strictly triangular".into()));
        }
        let mat = n.exp_nilpotent().expect("strictly triangular matrices are nilpotent");
        let inv = n.scale(&Scalar::from_int(-1)).exp_nilpotent().expect("nilpotent");
        Ok(GroupMap { kind: GroupKind::Unipotent, mat, inv, log: Some(n) })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.mat.size()
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.mat
    }

    pub fn inverse_matrix(&self) -> &PolyMatrix {
        &self.inv
    }

    pub fn generator(&self) -> Option<&PolyMatrix> {
        self.log.as_ref()
    }

    pub fn is_identity(&self) -> bool {
        self.mat == PolyMatrix::identity(self.size())
    }

    pub fn inverse(&self) -> GroupMap {
        GroupMap {
            kind: self.kind,
            mat: self.inv.clone(),
            inv: self.mat.clone(),
            log: self.log.as_ref().map(|n| n.scale(&Scalar::from_int(-1))),
        }
    }

    /// Pointwise product `self · other`, provided it stays in a supported class.
    pub fn product(&self, other: &GroupMap) -> Result<GroupMap> {
        if self.is_identity() {
            return Ok(other.clone());
        }
        if other.is_identity() {
            return Ok(self.clone());
        }
        let mat = self.mat.mul(&other.mat);
        let inv = other.inv.mul(&self.inv);
        match (self.kind, other.kind) {
            (GroupKind::Constant, GroupKind::Constant) => Ok(GroupMap { kind: GroupKind::Constant, mat, inv, log: None }),
            (GroupKind::Unipotent, GroupKind::Unipotent) => match mat.log_unipotent() {
                Some(log) if log.is_strictly_triangular() => {
                    Ok(GroupMap { kind: GroupKind::Unipotent, mat, inv, log: Some(log) })
                }
                _ => Err(Error::Capability("product of unipotent elements is not unipotent".into())),
            },
            _ => Err(Error::Capability("product of a constant and a unipotent element".into())),
        }
    }

    /// `∂g/∂x_i`.
    pub fn partial(&self, i: usize) -> PolyMatrix {
        self.mat.map(|p| p.deriv(Var::X(i)))
    }

    /// Re-expands around `point` as jets of the given order.
    pub fn shift_coords(&self, point: &[Scalar], order: i16) -> GroupMap {
        GroupMap {
            kind: self.kind,
            mat: self.mat.shift_coords(point, order),
            inv: self.inv.shift_coords(point, order),
            log: self.log.as_ref().map(|n| n.shift_coords(point, order)),
        }
    }
}

/// Matrix of `X ↦ g X g⁻¹` in the basis of `g`; column `a` holds the
/// coordinates of `g X_a g⁻¹`.
pub fn ad_g(xm: &DifferentialCrossedModule, g: &GroupMap) -> Result<PolyMatrix> {
    conjugation(xm.g(), g, "g")
}

fn conjugation(l: &crate::algebra::MatrixLieAlgebra, g: &GroupMap, label: &str) -> Result<PolyMatrix> {
    if g.size() != l.size() {
        return Err(Error::Type(format!("group element of size {} acting on {}×{} matrices", g.size(), l.size(), l.size())));
    }
    let d = l.dim();
    let mut entries = vec![crate::poly::Poly::zero(); d * d];
    for (a, x) in l.basis().iter().enumerate() {
        let c = g.matrix().mul(&x.to_poly()).mul(g.inverse_matrix());
        let coords = l
            .poly_coordinates(&c)
            .ok_or_else(|| Error::Capability(format!("group element does not normalise {label}")))?;
        for (k, p) in coords.into_iter().enumerate() {
            entries[k * d + a] = p;
        }
    }
    Ok(PolyMatrix::from_entries(d, entries))
}

/// Matrix of `Y ↦ g ▷ Y` in the basis of `h`.
pub fn h_action(xm: &DifferentialCrossedModule, g: &GroupMap) -> Result<PolyMatrix> {
    let dh = xm.h().dim();
    if g.is_identity() {
        return Ok(PolyMatrix::identity(dh));
    }
    match xm.group_action() {
        GroupAction::Adjoint => conjugation(xm.h(), g, "h"),
        GroupAction::Representation { rep } => {
            if rep.iter().all(Matrix::is_zero) {
                return Ok(PolyMatrix::identity(dh));
            }
            match g.kind() {
                GroupKind::Constant => {
                    if rep.as_slice() == xm.g().basis() {
                        Ok(g.matrix().clone())
                    } else {
                        Err(Error::Capability("constant element acting through a non-defining representation".into()))
                    }
                }
                GroupKind::Unipotent => {
                    let n = g.generator().expect("unipotent elements carry a generator");
                    let coords = xm
                        .g()
                        .poly_coordinates(n)
                        .ok_or_else(|| Error::Capability("unipotent generator outside g".into()))?;
                    let mut m = PolyMatrix::zeros(dh);
                    for (c, r) in coords.iter().zip(rep) {
                        if !c.is_zero() {
                            m = m.add(&r.to_poly().map(|x| x.mul(c)));
                        }
                    }
                    m.exp_nilpotent()
                        .ok_or_else(|| Error::Capability("represented generator is not nilpotent".into()))
                }
            }
        }
        GroupAction::Unsupported => Err(Error::Capability(format!("module {} has no group action", xm.name()))),
    }
}
