//! Worked examples on `adjoint:sl2` over a 5-dimensional patch.

use std::fmt::Write;
use std::sync::Arc;

use crate::algebra::symmetrized_trace_pairing;
use crate::error::{Error, Result};
use crate::fixture;
use crate::forms::{FormAlgebra, PolyForm, Space};
use crate::gauge::{curvatures, gauge_transform, GaugeData, TwoConnection};
use crate::group::GroupMap;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::transgression as tg;

pub const EXAMPLES: &[&str] = &["cs", "wzw", "gwzw"];

pub fn sl2_patch() -> FormAlgebra {
    let xm = Arc::new(fixture::module("adjoint:sl2").expect("bundled"));
    FormAlgebra::new(xm, 5).expect("dimension fits")
}

/// `A = x₂ dx₁ · E`, `B = x₅ dx₃∧dx₄ · F`.
pub fn worked_connection(fa: &FormAlgebra) -> TwoConnection {
    TwoConnection::new(
        fa.term(Space::G, "E", &[1], "x2").expect("E"),
        fa.term(Space::H, "F", &[3, 4], "x5").expect("F"),
    )
    .expect("degrees")
}

/// `φ = x₁ dx₂ · E + x₃ dx₄ · F`.
pub fn two_term_phi(fa: &FormAlgebra) -> PolyForm {
    fa.term(Space::H, "E", &[2], "x1").expect("E").add(&fa.term(Space::H, "F", &[4], "x3").expect("F")).expect("sum")
}

/// `φ = x₅ dx₁ · E + dx₂ · F + x₃ dx₄ · H`, whose WZW term is not zero.
pub fn three_term_phi(fa: &FormAlgebra) -> PolyForm {
    fa.sum(&[
        fa.term(Space::H, "E", &[1], "x5").expect("E"),
        fa.term(Space::H, "F", &[2], "1").expect("F"),
        fa.term(Space::H, "H", &[4], "x3").expect("H"),
    ])
    .expect("sum")
}

/// `diag(2, 1/2)`.
pub fn diag_group() -> GroupMap {
    GroupMap::constant(Matrix::from_rows(vec![
        vec![Scalar::from_int(2), Scalar::zero()],
        vec![Scalar::zero(), Scalar::new(1, 2)],
    ]))
    .expect("invertible")
}

fn line(out: &mut String, fa: &FormAlgebra, label: &str, w: &PolyForm) {
    let _ = writeln!(out, "{label:<24} {}", fa.render(w));
}

pub fn show(name: &str) -> Result<String> {
    let fa = sl2_patch();
    let p = symmetrized_trace_pairing(fa.module(), 1)?;
    let c = worked_connection(&fa);
    let mut out = String::new();
    match name {
        "cs" => {
            let cp = curvatures(&fa, &c)?;
            let q = tg::cs_form(&fa, &c, &p)?;
            line(&mut out, &fa, "A", c.a());
            line(&mut out, &fa, "B", c.b());
            line(&mut out, &fa, "F", &cp.f);
            line(&mut out, &fa, "G", &cp.g);
            line(&mut out, &fa, "Q4", &q);
            line(&mut out, &fa, "dQ4", &fa.d(&q));
            line(&mut out, &fa, "<F, G>", &tg::chern_weil_form(&fa, &c, &p)?);
        }
        "wzw" => {
            for (label, phi) in [("two-term phi", two_term_phi(&fa)), ("three-term phi", three_term_phi(&fa))] {
                let gd = GaugeData::new(GroupMap::identity(2), phi)?;
                let wz = tg::wzw_term(&fa, &gd, &p)?;
                let _ = writeln!(out, "[{label}, g = id]");
                line(&mut out, &fa, "phi", gd.phi());
                line(&mut out, &fa, "V", &wz.fields.v);
                line(&mut out, &fa, "W", &wz.fields.w);
                line(&mut out, &fa, "WZW", &wz.value);
                line(&mut out, &fa, "-1/2 <V^2, W>", &wz.closed_form);
            }
            let (coeff, beta) = tg::wzw_closed_form_coefficient(1)?;
            let _ = writeln!(out, "{:<24} {coeff} (Beta {beta})", "coefficient n=1");
        }
        "gwzw" => {
            let gd = GaugeData::new(diag_group(), fa.zero(1, Space::H))?;
            let c2 = gauge_transform(&fa, &c, &gd)?;
            line(&mut out, &fa, "A'", c2.a());
            line(&mut out, &fa, "B'", c2.b());
            line(&mut out, &fa, "gWZW", &tg::gwzw_form(&fa, &c, &gd, &p)?);
            line(&mut out, &fa, "alpha", &tg::alpha_form(&fa, &c, &gd, &p)?);
            line(&mut out, &fa, "B-form", &tg::b_form(&fa, &c, &c2, &p)?);
            line(&mut out, &fa, "exactness residual", &tg::gwzw_exactness_residual(&fa, &c, &gd, &p)?);
        }
        other => return Err(Error::Config(format!("unknown example `{other}`; expected one of {}", EXAMPLES.join(", ")))),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_render() {
        for name in EXAMPLES {
            assert!(!show(name).unwrap().is_empty());
        }
        assert!(show("nope").is_err());
    }
}
