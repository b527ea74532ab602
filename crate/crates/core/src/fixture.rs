//! Named crossed modules and the JSON fixture format.
//!
//! Modules are written as basis matrices with rational entries (`"p/q"`
//! strings or integers), an `alpha` array with one row per basis element of
//! `g`, and an `action` tensor indexed `[a][b][c]` for `X_a ▷ Y_b = Σ_c
//! action[a][b][c] Y_c`. Forms are lists of `(index, element, coefficient)`
//! triples with one-based coordinate labels and polynomial strings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{abelian_rep_module, adjoint_module, DifferentialCrossedModule, GroupAction, MatrixLieAlgebra};
use crate::error::{Error, Result};
use crate::forms::{index_labels, FormAlgebra, PolyForm, Space};
use crate::gauge::{GaugeData, TwoConnection};
use crate::group::GroupMap;
use crate::matrix::{Matrix, PolyMatrix};
use crate::poly::Poly;
use crate::scalar::Scalar;

pub const NAMED_MODULES: &[&str] = &["adjoint:sl2", "adjoint:gl2", "adjoint:gl3", "abelian:sl2-defining", "sabotaged:sl2"];

pub fn sl2() -> MatrixLieAlgebra {
    MatrixLieAlgebra::from_basis(
        "sl2",
        &["H", "E", "F"],
        vec![
            Matrix::from_ints(&[&[1, 0], &[0, -1]]),
            Matrix::from_ints(&[&[0, 1], &[0, 0]]),
            Matrix::from_ints(&[&[0, 0], &[1, 0]]),
        ],
    )
    .expect("sl2 basis is valid")
}

pub fn gl2() -> MatrixLieAlgebra {
    MatrixLieAlgebra::from_basis(
        "gl2",
        &["H", "E", "F", "Z"],
        vec![
            Matrix::from_ints(&[&[1, 0], &[0, -1]]),
            Matrix::from_ints(&[&[0, 1], &[0, 0]]),
            Matrix::from_ints(&[&[0, 0], &[1, 0]]),
            Matrix::identity(2),
        ],
    )
    .expect("gl2 basis is valid")
}

/// Elementary matrices `e_ij`, named `eij`, in row-major order.
pub fn gl3() -> MatrixLieAlgebra {
    let mut names = Vec::new();
    let mut basis = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let mut m = Matrix::zeros(3);
            m.set(i, j, Scalar::one());
            names.push(format!("e{}{}", i + 1, j + 1));
            basis.push(m);
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    MatrixLieAlgebra::from_basis("gl3", &refs, basis).expect("gl3 basis is valid")
}

/// Looks up a named module.
pub fn module(name: &str) -> Result<DifferentialCrossedModule> {
    match name {
        "adjoint:sl2" => Ok(adjoint_module(&sl2())),
        "adjoint:gl2" => Ok(adjoint_module(&gl2())),
        "adjoint:gl3" => Ok(adjoint_module(&gl3())),
        "abelian:sl2-defining" => {
            let l = sl2();
            let rep = l.basis().to_vec();
            abelian_rep_module(&l, rep, "defining")
        }
        "sabotaged:sl2" => {
            // α = 2·id keeps derivation, morphism and equivariance but breaks Peiffer.
            let base = adjoint_module(&sl2());
            let alpha = base
                .alpha_matrix()
                .iter()
                .map(|row| row.iter().map(|x| x * &Scalar::from_int(2)).collect())
                .collect();
            Ok(DifferentialCrossedModule::new(
                name,
                base.g().clone(),
                base.h().clone(),
                alpha,
                base.action_tensor().to_vec(),
                GroupAction::Adjoint,
            ))
        }
        _ => Err(Error::UnknownFixture(name.to_string())),
    }
}

/// A named module, or a JSON fixture file if `spec` is not a known name.
pub fn load_module(spec: &str) -> Result<DifferentialCrossedModule> {
    match module(spec) {
        Err(Error::UnknownFixture(_)) if std::path::Path::new(spec).exists() => {
            let text = std::fs::read_to_string(spec).map_err(|e| Error::Fixture(format!("{spec}: {e}")))?;
            module_from_json(&text)
        }
        other => other,
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct AlgebraFile {
    pub names: Vec<String>,
    pub basis: Vec<Vec<Vec<Scalar>>>,
    /// Claimed structure constants `[i][j][k]`; computed from the basis when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Vec<Vec<Vec<Scalar>>>>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "snake_case")]
pub enum GroupActionFile {
    Adjoint,
    Representation(Vec<Vec<Vec<Scalar>>>),
    None,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ModuleFile {
    pub name: String,
    pub g: AlgebraFile,
    pub h: AlgebraFile,
    pub alpha: Vec<Vec<Scalar>>,
    pub action: Vec<Vec<Vec<Scalar>>>,
    #[serde(default = "default_action")]
    pub group_action: GroupActionFile,
}

fn default_action() -> GroupActionFile {
    GroupActionFile::None
}

fn algebra_from_file(name: &str, f: &AlgebraFile) -> Result<MatrixLieAlgebra> {
    let basis: Vec<Matrix> = f
        .basis
        .iter()
        .map(|rows| {
            if rows.iter().any(|r| r.len() != rows.len()) {
                return Err(Error::Structural(format!("basis matrix of {name} is not square")));
            }
            Ok(Matrix::from_rows(rows.clone()))
        })
        .collect::<Result<_>>()?;
    match &f.structure {
        Some(c) => {
            let flat: Vec<Scalar> = c.iter().flatten().flatten().cloned().collect();
            MatrixLieAlgebra::with_structure(name, f.names.clone(), basis, flat)
        }
        None => {
            let names: Vec<&str> = f.names.iter().map(String::as_str).collect();
            if names.len() != basis.len() {
                return Err(Error::Structural(format!("{} names for {} basis matrices", names.len(), basis.len())));
            }
            MatrixLieAlgebra::from_basis(name, &names, basis)
        }
    }
}

fn algebra_to_file(l: &MatrixLieAlgebra) -> AlgebraFile {
    let d = l.dim();
    AlgebraFile {
        names: l.names().to_vec(),
        basis: l.basis().iter().map(Matrix::rows).collect(),
        structure: Some(
            (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| l.c(i, j, k).clone()).collect()).collect()).collect(),
        ),
    }
}

pub fn module_from_json(text: &str) -> Result<DifferentialCrossedModule> {
    let f: ModuleFile = serde_json::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
    let g = algebra_from_file("g", &f.g)?;
    let h = algebra_from_file("h", &f.h)?;
    let (dg, dh) = (g.dim(), h.dim());
    let mut action = Vec::with_capacity(dg * dh * dh);
    if f.action.len() != dg || f.action.iter().any(|m| m.len() != dh || m.iter().any(|r| r.len() != dh)) {
        return Err(Error::Structural(format!("action tensor must be {dg}×{dh}×{dh}")));
    }
    for m in &f.action {
        for r in m {
            action.extend(r.iter().cloned());
        }
    }
    let group_action = match f.group_action {
        GroupActionFile::Adjoint => GroupAction::Adjoint,
        GroupActionFile::Representation(rep) => GroupAction::Representation {
            rep: rep.into_iter().map(Matrix::from_rows).collect(),
        },
        GroupActionFile::None => GroupAction::Unsupported,
    };
    Ok(DifferentialCrossedModule::new(&f.name, g, h, f.alpha, action, group_action))
}

pub fn module_to_json(xm: &DifferentialCrossedModule) -> String {
    let (dg, dh) = (xm.g().dim(), xm.h().dim());
    let file = ModuleFile {
        name: xm.name().to_string(),
        g: algebra_to_file(xm.g()),
        h: algebra_to_file(xm.h()),
        alpha: xm.alpha_matrix().to_vec(),
        action: (0..dg)
            .map(|a| (0..dh).map(|b| (0..dh).map(|c| xm.act_coeff(a, b, c).clone()).collect()).collect())
            .collect(),
        group_action: match xm.group_action() {
            GroupAction::Adjoint => GroupActionFile::Adjoint,
            GroupAction::Representation { rep } => GroupActionFile::Representation(rep.iter().map(Matrix::rows).collect()),
            GroupAction::Unsupported => GroupActionFile::None,
        },
    };
    serde_json::to_string_pretty(&file).expect("module serialises")
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct FormTerm {
    pub index: Vec<usize>,
    pub element: String,
    pub coeff: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct FormFile {
    pub degree: usize,
    pub space: String,
    pub terms: Vec<FormTerm>,
}

fn space_of(s: &str) -> Result<Space> {
    match s {
        "g" => Ok(Space::G),
        "h" => Ok(Space::H),
        _ => Err(Error::Fixture(format!("unknown value space `{s}` (expected g or h)"))),
    }
}

pub fn form_from_file(fa: &FormAlgebra, f: &FormFile) -> Result<PolyForm> {
    let space = space_of(&f.space)?;
    let mut acc = fa.zero(f.degree, space);
    for t in &f.terms {
        if t.index.len() != f.degree {
            return Err(Error::Structural(format!("term {:?} in a {}-form", t.index, f.degree)));
        }
        acc = acc.add(&fa.term(space, &t.element, &t.index, &t.coeff)?)?;
    }
    Ok(acc)
}

pub fn form_to_file(fa: &FormAlgebra, w: &PolyForm) -> Result<FormFile> {
    let (space, names) = match w.space() {
        Space::G => ("g", fa.module().g().names().to_vec()),
        Space::H => ("h", fa.module().h().names().to_vec()),
        s => return Err(Error::Type(format!("cannot serialise a {s:?}-valued form"))),
    };
    let mut terms = Vec::new();
    for (k, c) in w.components().iter().enumerate() {
        for (i, p) in c.terms() {
            terms.push(FormTerm { index: index_labels(i), element: names[k].clone(), coeff: p.to_string() });
        }
    }
    Ok(FormFile { degree: w.degree(), space: space.into(), terms })
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GroupFile {
    Identity,
    Constant(Vec<Vec<Scalar>>),
    /// Strictly triangular generator `N` with polynomial entries; `g = exp(N)`.
    Unipotent(Vec<Vec<String>>),
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct InstanceFile {
    pub module: String,
    pub dim: usize,
    pub a: FormFile,
    pub b: FormFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<GroupFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<FormFile>,
}

pub fn group_from_file(size: usize, f: &GroupFile) -> Result<GroupMap> {
    match f {
        GroupFile::Identity => Ok(GroupMap::identity(size)),
        GroupFile::Constant(rows) => GroupMap::constant(Matrix::from_rows(rows.clone())),
        GroupFile::Unipotent(rows) => {
            let mut entries = Vec::new();
            for r in rows {
                for s in r {
                    entries.push(s.parse::<Poly>().map_err(|e| Error::Fixture(e.to_string()))?);
                }
            }
            if entries.len() != size * size {
                return Err(Error::Fixture(format!("generator must be {size}×{size}")));
            }
            GroupMap::unipotent(PolyMatrix::from_entries(size, entries))
        }
    }
}

pub fn group_to_file(g: &GroupMap) -> GroupFile {
    let n = g.size();
    if g.is_identity() {
        return GroupFile::Identity;
    }
    match g.generator() {
        Some(gen) => GroupFile::Unipotent((0..n).map(|i| (0..n).map(|j| gen.get(i, j).to_string()).collect()).collect()),
        None => GroupFile::Constant(
            (0..n).map(|i| (0..n).map(|j| g.matrix().get(i, j).constant_term()).collect()).collect(),
        ),
    }
}

/// A connection with optional gauge data, as dumped for failing instances.
pub struct Instance {
    pub fa: FormAlgebra,
    pub connection: TwoConnection,
    pub gauge: Option<GaugeData>,
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let f: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
    let xm = Arc::new(load_module(&f.module)?);
    let fa = FormAlgebra::new(xm.clone(), f.dim)?;
    let a = form_from_file(&fa, &f.a)?;
    let b = form_from_file(&fa, &f.b)?;
    let connection = TwoConnection::new(a, b)?;
    let gauge = match (&f.g, &f.phi) {
        (None, None) => None,
        (g, phi) => {
            let g = match g {
                Some(g) => group_from_file(xm.g().size(), g)?,
                None => GroupMap::identity(xm.g().size()),
            };
            let phi = match phi {
                Some(p) => form_from_file(&fa, p)?,
                None => fa.zero(1, Space::H),
            };
            Some(GaugeData::new(g, phi)?)
        }
    };
    Ok(Instance { fa, connection, gauge })
}

pub fn instance_to_json(module: &str, fa: &FormAlgebra, c: &TwoConnection, gauge: Option<&GaugeData>) -> Result<String> {
    let file = InstanceFile {
        module: module.to_string(),
        dim: fa.dim(),
        a: form_to_file(fa, c.a())?,
        b: form_to_file(fa, c.b())?,
        g: gauge.map(|gd| group_to_file(gd.g())),
        phi: gauge.map(|gd| form_to_file(fa, gd.phi())).transpose()?,
    };
    Ok(serde_json::to_string_pretty(&file).expect("instance serialises"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::validate_crossed_module;

    #[test]
    fn named_modules_round_trip_through_json() {
        for name in NAMED_MODULES {
            let xm = module(name).unwrap();
            let back = module_from_json(&module_to_json(&xm)).unwrap();
            assert_eq!(back.g().structure_constants(), xm.g().structure_constants());
            assert_eq!(back.action_tensor(), xm.action_tensor());
            assert_eq!(back.alpha_matrix(), xm.alpha_matrix());
            assert_eq!(back.group_action(), xm.group_action());
        }
    }

    #[test]
    fn rational_strings_in_fixtures() {
        let text = r#"{
            "name": "scaled",
            "g": {"names": ["E"], "basis": [[["0", "1/2"], [0, 0]]]},
            "h": {"names": ["E"], "basis": [[["0", "1/2"], [0, 0]]]},
            "alpha": [["1"]],
            "action": [[["0"]]],
            "group_action": "adjoint"
        }"#;
        let xm = module_from_json(text).unwrap();
        assert_eq!(xm.g().basis()[0].get(0, 1), &Scalar::new(1, 2));
        assert!(validate_crossed_module(&xm).unwrap().is_valid());
    }

    #[test]
    fn unknown_names_are_reported() {
        assert!(matches!(module("adjoint:e8"), Err(Error::UnknownFixture(_))));
    }

    #[test]
    fn forms_round_trip() {
        let fa = FormAlgebra::new(Arc::new(module("adjoint:sl2").unwrap()), 5).unwrap();
        let w = fa.term(Space::H, "E", &[4, 3], "x5 - 1/2*x1^2").unwrap();
        let f = form_to_file(&fa, &w).unwrap();
        assert_eq!(f.terms[0].index, vec![3, 4]);
        assert_eq!(form_from_file(&fa, &f).unwrap(), w);
    }
}
