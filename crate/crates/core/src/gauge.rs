//! 2-connections, their curvatures, and higher gauge transformations.

use crate::error::{Error, Result};
use crate::forms::{FormAlgebra, PolyForm, Space};
use crate::group::GroupMap;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoConnection {
    a: PolyForm,
    b: PolyForm,
}

impl TwoConnection {
    pub fn new(a: PolyForm, b: PolyForm) -> Result<Self> {
        if a.space() != Space::G || a.degree() != 1 {
            return Err(Error::Type(format!("A must be a g-valued 1-form, got {:?} {}-form", a.space(), a.degree())));
        }
        if b.space() != Space::H || b.degree() != 2 {
            return Err(Error::Type(format!("B must be an h-valued 2-form, got {:?} {}-form", b.space(), b.degree())));
        }
        Ok(TwoConnection { a, b })
    }

    pub fn a(&self) -> &PolyForm {
        &self.a
    }

    pub fn b(&self) -> &PolyForm {
        &self.b
    }

    pub fn map(&self, f: impl Fn(&PolyForm) -> PolyForm) -> TwoConnection {
        TwoConnection { a: f(&self.a), b: f(&self.b) }
    }
}

/// Fake curvature `F` and 2-curvature `G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvaturePair {
    pub f: PolyForm,
    pub g: PolyForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeData {
    g: GroupMap,
    phi: PolyForm,
}

impl GaugeData {
    pub fn new(g: GroupMap, phi: PolyForm) -> Result<Self> {
        if phi.space() != Space::H || phi.degree() != 1 {
            return Err(Error::Type("φ must be an h-valued 1-form".into()));
        }
        Ok(GaugeData { g, phi })
    }

    pub fn identity(fa: &FormAlgebra) -> Self {
        GaugeData { g: GroupMap::identity(fa.module().g().size()), phi: fa.zero(1, Space::H) }
    }

    pub fn g(&self) -> &GroupMap {
        &self.g
    }

    pub fn phi(&self) -> &PolyForm {
        &self.phi
    }

    pub fn is_identity(&self) -> bool {
        self.g.is_identity() && self.phi.is_zero()
    }

    pub fn map_phi(&self, f: impl Fn(&PolyForm) -> PolyForm) -> GaugeData {
        GaugeData { g: self.g.clone(), phi: f(&self.phi) }
    }

    pub fn shift_coords(&self, fa: &FormAlgebra, point: &[Scalar], order: i16) -> GaugeData {
        GaugeData { g: self.g.shift_coords(point, order), phi: fa.shift_coords(&self.phi, point, order) }
    }
}

/// `F = dA + ½[A,A] − α(B)`, `G = dB + A ▷ B`.
pub fn curvatures(fa: &FormAlgebra, c: &TwoConnection) -> Result<CurvaturePair> {
    let f = fa.d(&c.a).add(&fa.half_square(&c.a)?)?.sub(&fa.alpha_push(&c.b)?)?;
    let g = fa.d(&c.b).add(&fa.act(&c.a, &c.b)?)?;
    Ok(CurvaturePair { f, g })
}

/// `(dF + [A,F] + α(G), dG + A ▷ G − F ▷ B)`, both identically zero.
pub fn bianchi_residuals(fa: &FormAlgebra, c: &TwoConnection) -> Result<(PolyForm, PolyForm)> {
    let cp = curvatures(fa, c)?;
    let r1 = fa.cov_d(&c.a, &cp.f)?.add(&fa.alpha_push(&cp.g)?)?;
    let r2 = fa.cov_d(&c.a, &cp.g)?.sub(&fa.act(&cp.f, &c.b)?)?;
    Ok((r1, r2))
}

/// `g⁻¹ A g + g⁻¹ dg`.
pub fn gauge_a_part(fa: &FormAlgebra, a: &PolyForm, g: &GroupMap) -> Result<PolyForm> {
    fa.conj_g(&g.inverse(), a)?.add(&fa.maurer_cartan(g)?)
}

/// `A′ = g⁻¹Ag + g⁻¹dg + α(φ)`, `B′ = g⁻¹ ▷ B + dφ + A′ ▷ φ − φ ∧ φ`.
pub fn gauge_transform(fa: &FormAlgebra, c: &TwoConnection, gd: &GaugeData) -> Result<TwoConnection> {
    let a = gauge_a_part(fa, &c.a, &gd.g)?.add(&fa.alpha_push(&gd.phi)?)?;
    let b = fa
        .act_group(&gd.g.inverse(), &c.b)?
        .add(&fa.d(&gd.phi))?
        .add(&fa.act(&a, &gd.phi)?)?
        .sub(&fa.wedge_square(&gd.phi)?)?;
    TwoConnection::new(a, b)
}

/// The same transformation with `B′ = g⁻¹ ▷ B + (dφ + φ∧φ) + (g⁻¹Ag + g⁻¹dg) ▷ φ`.
pub fn gauge_transform_split(fa: &FormAlgebra, c: &TwoConnection, gd: &GaugeData) -> Result<TwoConnection> {
    let ag = gauge_a_part(fa, &c.a, &gd.g)?;
    let a = ag.add(&fa.alpha_push(&gd.phi)?)?;
    let b = fa
        .act_group(&gd.g.inverse(), &c.b)?
        .add(&fa.d(&gd.phi))?
        .add(&fa.wedge_square(&gd.phi)?)?
        .add(&fa.act(&ag, &gd.phi)?)?;
    TwoConnection::new(a, b)
}

/// Semidirect product `(g, φ)(g′, φ′) = (gg′, g ▷ φ′ + φ)`.
pub fn gauge_compose(fa: &FormAlgebra, gd1: &GaugeData, gd2: &GaugeData) -> Result<GaugeData> {
    let g = gd1.g.product(&gd2.g)?;
    let phi = fa.act_group(&gd1.g, &gd2.phi)?.add(&gd1.phi)?;
    GaugeData::new(g, phi)
}

/// `(g⁻¹, −g⁻¹ ▷ φ)`, the inverse under [`gauge_compose`].
pub fn gauge_inverse(fa: &FormAlgebra, gd: &GaugeData) -> Result<GaugeData> {
    let gi = gd.g.inverse();
    let phi = fa.act_group(&gi, &gd.phi)?.neg();
    GaugeData::new(gi, phi)
}

fn flip(gd: &GaugeData) -> GaugeData {
    GaugeData { g: gd.g.inverse(), phi: gd.phi.clone() }
}

/// Gauge data whose transformation equals transforming by `first` and then
/// by `second`: `(g₁g₂, g₂⁻¹ ▷ φ₁ + φ₂)`.
///
/// The transformation is a right action, so this is the semidirect product
/// conjugated by `(g, φ) ↦ (g⁻¹, φ)`, taken in reverse order.
pub fn sequential_composite(fa: &FormAlgebra, first: &GaugeData, second: &GaugeData) -> Result<GaugeData> {
    Ok(flip(&gauge_compose(fa, &flip(second), &flip(first))?))
}

/// Differences between transforming twice and transforming once by the
/// sequential composite.
pub fn composition_residuals(
    fa: &FormAlgebra,
    c: &TwoConnection,
    first: &GaugeData,
    second: &GaugeData,
) -> Result<(PolyForm, PolyForm)> {
    let twice = gauge_transform(fa, &gauge_transform(fa, c, first)?, second)?;
    let once = gauge_transform(fa, c, &sequential_composite(fa, first, second)?)?;
    Ok((twice.a.sub(&once.a)?, twice.b.sub(&once.b)?))
}

/// `(F′ − g⁻¹Fg, G′ − (g⁻¹ ▷ G + F′ ▷ φ))`.
pub fn curvature_covariance_residuals(fa: &FormAlgebra, c: &TwoConnection, gd: &GaugeData) -> Result<(PolyForm, PolyForm)> {
    let cp = curvatures(fa, c)?;
    let cp2 = curvatures(fa, &gauge_transform(fa, c, gd)?)?;
    let gi = gd.g.inverse();
    let r1 = cp2.f.sub(&fa.conj_g(&gi, &cp.f)?)?;
    let r2 = cp2.g.sub(&fa.act_group(&gi, &cp.g)?.add(&fa.act(&cp2.f, &gd.phi)?)?)?;
    Ok((r1, r2))
}
