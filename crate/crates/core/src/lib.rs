//! Exact symbolic engine for higher (2-)gauge theory on a coordinate patch:
//! differential crossed modules, algebra-valued polynomial forms, 2-connections
//! and their gauge transformations, and Chern–Simons / WZW transgression forms.

pub mod algebra;
pub mod error;
pub mod fixture;
pub mod forms;
pub mod gauge;
pub mod golden;
pub mod group;
pub mod harness;
pub mod matrix;
pub mod poly;
pub mod scalar;
pub mod transgression;

pub use algebra::{
    abelian_rep_module, adjoint_module, symmetrized_trace_pairing, validate_crossed_module, validate_lie_algebra,
    validate_pairing, DifferentialCrossedModule, GroupAction, InvariantPairing, MatrixLieAlgebra, ValidationReport,
    Violation,
};
pub use error::{Error, Result};
pub use forms::{FormAlgebra, MultiIndex, PolyForm, ScalarForm, Space};
pub use gauge::{CurvaturePair, GaugeData, TwoConnection};
pub use group::{GroupKind, GroupMap};
pub use matrix::{Matrix, PolyMatrix};
pub use poly::{Poly, Var};
pub use scalar::Scalar;
