//! Homotopy families of 2-connections, the homotopy operator `k01`, and the
//! higher Chern–Simons, transgression, WZW and gWZW forms.
//!
//! `l_t` acts on [`CsExpr`] trees over the generators `A_t, B_t, F_t, G_t`.
//! The parameter differential `dt` is carried as a genuine 1-form (multi-index
//! bit [`DT_BIT`]), so `l_t` is an even derivation that needs no sign
//! bookkeeping of its own: the Koszul signs come from the form algebra, and a
//! second `dt` vanishes because `dt ∧ dt = 0`. `k01` strips `dt` from the
//! front and integrates over `t ∈ [0, 1]`.

use crate::algebra::{symmetrized_trace_pairing, InvariantPairing};
use crate::error::{Error, Result};
use crate::forms::{FormAlgebra, MultiIndex, PolyForm, ScalarForm, Space};
use crate::gauge::{curvatures, gauge_a_part, gauge_transform, GaugeData, TwoConnection};
use crate::poly::{Poly, Var};
use crate::scalar::Scalar;

/// Multi-index bit standing for `dt`; beyond every patch coordinate.
pub const DT_BIT: MultiIndex = 1 << 15;

fn t() -> Poly {
    Poly::var(Var::T)
}

fn s() -> Poly {
    Poly::var(Var::S)
}

/// `A_t = A₀ + tΘ`, `B_t = B₀ + tΦ`.
#[derive(Clone, Debug)]
pub struct HomotopyFamily {
    pub c0: TwoConnection,
    pub c1: TwoConnection,
    pub theta: PolyForm,
    pub phi: PolyForm,
    pub a_t: PolyForm,
    pub b_t: PolyForm,
}

pub fn interpolate(c0: &TwoConnection, c1: &TwoConnection) -> Result<HomotopyFamily> {
    let theta = c1.a().sub(c0.a()).map_err(|e| Error::Patch(e.to_string()))?;
    let phi = c1.b().sub(c0.b()).map_err(|e| Error::Patch(e.to_string()))?;
    let a_t = c0.a().add(&theta.mul_poly(&t()))?;
    let b_t = c0.b().add(&phi.mul_poly(&t()))?;
    Ok(HomotopyFamily { c0: c0.clone(), c1: c1.clone(), theta, phi, a_t, b_t })
}

#[derive(Clone, Debug)]
pub struct FamilyCurvatures {
    pub f_t: PolyForm,
    pub g_t: PolyForm,
    /// `∂_t F_t = dΘ + [A_t, Θ] − α(Φ)`.
    pub df_t: PolyForm,
    /// `∂_t G_t = dΦ + A_t ▷ Φ + Θ ▷ B_t`.
    pub dg_t: PolyForm,
}

/// Closed formulas `F_t = F₀ + t(dΘ + [A₀,Θ] − α(Φ)) + t²Θ²` and
/// `G_t = G₀ + t(dΦ + Θ▷B₀ + A₀▷Φ) + t²Θ▷Φ`.
pub fn family_curvatures(fa: &FormAlgebra, fam: &HomotopyFamily) -> Result<FamilyCurvatures> {
    let c0 = curvatures(fa, &fam.c0)?;
    let (th, ph) = (&fam.theta, &fam.phi);
    let a0 = fam.c0.a();
    let b0 = fam.c0.b();
    let lin_f = fa.d(th).add(&fa.bracket(a0, th)?)?.sub(&fa.alpha_push(ph)?)?;
    let f_t = c0.f.add(&lin_f.mul_poly(&t()))?.add(&fa.half_square(th)?.mul_poly(&t().pow(2)))?;
    let lin_g = fa.d(ph).add(&fa.act(th, b0)?)?.add(&fa.act(a0, ph)?)?;
    let g_t = c0.g.add(&lin_g.mul_poly(&t()))?.add(&fa.act(th, ph)?.mul_poly(&t().pow(2)))?;
    let df_t = fa.d(th).add(&fa.bracket(&fam.a_t, th)?)?.sub(&fa.alpha_push(ph)?)?;
    let dg_t = fa.d(ph).add(&fa.act(&fam.a_t, ph)?)?.add(&fa.act(th, &fam.b_t)?)?;
    Ok(FamilyCurvatures { f_t, g_t, df_t, dg_t })
}

/// Differences between the closed formulas and direct computation:
/// `F_t − curv(A_t,B_t)`, `G_t − curv(A_t,B_t)`, `∂_tF_t − df_t`, `∂_tG_t − dg_t`.
pub fn family_curvature_residuals(fa: &FormAlgebra, fam: &HomotopyFamily) -> Result<Vec<PolyForm>> {
    let fc = family_curvatures(fa, fam)?;
    let direct = curvatures(fa, &TwoConnection::new(fam.a_t.clone(), fam.b_t.clone())?)?;
    Ok(vec![
        fc.f_t.sub(&direct.f)?,
        fc.g_t.sub(&direct.g)?,
        fa.deriv_param(&fc.f_t, Var::T).sub(&fc.df_t)?,
        fa.deriv_param(&fc.g_t, Var::T).sub(&fc.dg_t)?,
    ])
}

/// Generators of the polynomial algebra on which `l_t` acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gen {
    A,
    B,
    F,
    G,
}

/// Formal expressions over the family generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CsExpr {
    Gen(Gen),
    Theta,
    Phi,
    Zero { degree: usize, space: Space },
    Sum(Vec<CsExpr>),
    /// Multiplication by a polynomial in `t`, `s` (a 0-form).
    Scale(Poly, Box<CsExpr>),
    /// `½[x, x]`, i.e. `x ∧ x` for odd `g`-valued `x`.
    Square(Box<CsExpr>),
    Bracket(Box<CsExpr>, Box<CsExpr>),
    Act(Box<CsExpr>, Box<CsExpr>),
    Alpha(Box<CsExpr>),
    Pair(Vec<CsExpr>, Box<CsExpr>),
    /// `dt ∧ x`.
    Dt(Box<CsExpr>),
}

impl CsExpr {
    pub fn scale(p: Poly, x: CsExpr) -> CsExpr {
        CsExpr::Scale(p, Box::new(x))
    }

    pub fn bracket(x: CsExpr, y: CsExpr) -> CsExpr {
        CsExpr::Bracket(Box::new(x), Box::new(y))
    }

    pub fn act(x: CsExpr, y: CsExpr) -> CsExpr {
        CsExpr::Act(Box::new(x), Box::new(y))
    }

    pub fn square(x: CsExpr) -> CsExpr {
        CsExpr::Square(Box::new(x))
    }

    pub fn pair(xs: Vec<CsExpr>, y: CsExpr) -> CsExpr {
        CsExpr::Pair(xs, Box::new(y))
    }

    /// Form degree (counting `dt`) and value space.
    pub fn shape(&self) -> (usize, Space) {
        match self {
            CsExpr::Gen(Gen::A) | CsExpr::Theta => (1, Space::G),
            CsExpr::Gen(Gen::F) => (2, Space::G),
            CsExpr::Gen(Gen::B) | CsExpr::Phi => (2, Space::H),
            CsExpr::Gen(Gen::G) => (3, Space::H),
            CsExpr::Zero { degree, space } => (*degree, *space),
            CsExpr::Sum(xs) => xs.first().map_or((0, Space::Scalar), CsExpr::shape),
            CsExpr::Scale(_, x) => x.shape(),
            CsExpr::Square(x) => (2 * x.shape().0, Space::G),
            CsExpr::Bracket(x, y) => (x.shape().0 + y.shape().0, Space::G),
            CsExpr::Act(x, y) => (x.shape().0 + y.shape().0, Space::H),
            CsExpr::Alpha(x) => (x.shape().0, Space::G),
            CsExpr::Pair(xs, y) => (xs.iter().map(|x| x.shape().0).sum::<usize>() + y.shape().0, Space::Scalar),
            CsExpr::Dt(x) => (x.shape().0 + 1, x.shape().1),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CsExpr::Zero { .. } => true,
            CsExpr::Sum(xs) => xs.iter().all(CsExpr::is_zero),
            CsExpr::Scale(p, x) => p.is_zero() || x.is_zero(),
            CsExpr::Square(x) | CsExpr::Alpha(x) | CsExpr::Dt(x) => x.is_zero(),
            CsExpr::Bracket(x, y) | CsExpr::Act(x, y) => x.is_zero() || y.is_zero(),
            CsExpr::Pair(xs, y) => xs.iter().any(CsExpr::is_zero) || y.is_zero(),
            _ => false,
        }
    }

    pub fn contains_dt(&self) -> bool {
        match self {
            CsExpr::Dt(_) => true,
            CsExpr::Sum(xs) => xs.iter().any(CsExpr::contains_dt),
            CsExpr::Scale(_, x) | CsExpr::Square(x) | CsExpr::Alpha(x) => x.contains_dt(),
            CsExpr::Bracket(x, y) | CsExpr::Act(x, y) => x.contains_dt() || y.contains_dt(),
            CsExpr::Pair(xs, y) => xs.iter().any(CsExpr::contains_dt) || y.contains_dt(),
            _ => false,
        }
    }
}

fn sum_nonzero(terms: Vec<CsExpr>, shape: (usize, Space)) -> CsExpr {
    let mut live: Vec<CsExpr> = terms.into_iter().filter(|e| !e.is_zero()).collect();
    match live.len() {
        0 => CsExpr::Zero { degree: shape.0, space: shape.1 },
        1 => live.pop().expect("one term"),
        _ => CsExpr::Sum(live),
    }
}

/// The homotopy derivation: `l_t A_t = l_t B_t = 0`, `l_t F_t = dt ∧ Θ`,
/// `l_t G_t = dt ∧ Φ`, extended as a derivation through every node.
pub fn l_t(e: &CsExpr) -> Result<CsExpr> {
    if e.contains_dt() {
        return Err(Error::Structural("l_t applied to an expression that already carries dt".into()));
    }
    lt(e)
}

fn lt(e: &CsExpr) -> Result<CsExpr> {
    let shape = e.shape();
    let zero = CsExpr::Zero { degree: shape.0, space: shape.1 };
    Ok(match e {
        CsExpr::Gen(Gen::A) | CsExpr::Gen(Gen::B) | CsExpr::Zero { .. } => zero,
        CsExpr::Gen(Gen::F) => CsExpr::Dt(Box::new(CsExpr::Theta)),
        CsExpr::Gen(Gen::G) => CsExpr::Dt(Box::new(CsExpr::Phi)),
        CsExpr::Theta | CsExpr::Phi => {
            return Err(Error::Structural("l_t is only defined on polynomials in the family generators".into()))
        }
        CsExpr::Dt(_) => return Err(Error::Structural("second dt factor".into())),
        CsExpr::Sum(xs) => sum_nonzero(xs.iter().map(lt).collect::<Result<_>>()?, shape),
        CsExpr::Scale(p, x) => {
            let lx = lt(x)?;
            if lx.is_zero() {
                zero
            } else {
                CsExpr::scale(p.clone(), lx)
            }
        }
        CsExpr::Square(x) => {
            let lx = lt(x)?;
            if lx.is_zero() {
                zero
            } else {
                let half = Poly::constant(Scalar::new(1, 2));
                sum_nonzero(
                    vec![
                        CsExpr::scale(half.clone(), CsExpr::bracket(lx.clone(), (**x).clone())),
                        CsExpr::scale(half, CsExpr::bracket((**x).clone(), lx)),
                    ],
                    shape,
                )
            }
        }
        CsExpr::Bracket(x, y) => sum_nonzero(
            vec![CsExpr::bracket(lt(x)?, (**y).clone()), CsExpr::bracket((**x).clone(), lt(y)?)],
            shape,
        ),
        CsExpr::Act(x, y) => {
            sum_nonzero(vec![CsExpr::act(lt(x)?, (**y).clone()), CsExpr::act((**x).clone(), lt(y)?)], shape)
        }
        CsExpr::Alpha(x) => {
            let lx = lt(x)?;
            if lx.is_zero() {
                zero
            } else {
                CsExpr::Alpha(Box::new(lx))
            }
        }
        CsExpr::Pair(xs, y) => {
            let mut terms = Vec::new();
            for i in 0..xs.len() {
                let li = lt(&xs[i])?;
                if li.is_zero() {
                    continue;
                }
                let mut args = xs.clone();
                args[i] = li;
                terms.push(CsExpr::pair(args, (**y).clone()));
            }
            terms.push(CsExpr::pair(xs.clone(), lt(y)?));
            sum_nonzero(terms, shape)
        }
    })
}

/// Values of the generators (and of `Θ`, `Φ`) for evaluation.
#[derive(Clone, Debug)]
pub struct Binding {
    pub a: PolyForm,
    pub b: PolyForm,
    pub f: PolyForm,
    pub g: PolyForm,
    pub theta: PolyForm,
    pub phi: PolyForm,
}

impl Binding {
    /// A connection with its own curvatures; `Θ`, `Φ` unavailable (zero).
    pub fn of_connection(fa: &FormAlgebra, c: &TwoConnection) -> Result<Binding> {
        let cp = curvatures(fa, c)?;
        Ok(Binding {
            a: c.a().clone(),
            b: c.b().clone(),
            f: cp.f,
            g: cp.g,
            theta: fa.zero(1, Space::G),
            phi: fa.zero(2, Space::H),
        })
    }

    pub fn of_family(fa: &FormAlgebra, fam: &HomotopyFamily) -> Result<Binding> {
        let fc = family_curvatures(fa, fam)?;
        Ok(Binding {
            a: fam.a_t.clone(),
            b: fam.b_t.clone(),
            f: fc.f_t,
            g: fc.g_t,
            theta: fam.theta.clone(),
            phi: fam.phi.clone(),
        })
    }
}

pub fn eval(fa: &FormAlgebra, p: &InvariantPairing, e: &CsExpr, bind: &Binding) -> Result<PolyForm> {
    Ok(match e {
        CsExpr::Gen(Gen::A) => bind.a.clone(),
        CsExpr::Gen(Gen::B) => bind.b.clone(),
        CsExpr::Gen(Gen::F) => bind.f.clone(),
        CsExpr::Gen(Gen::G) => bind.g.clone(),
        CsExpr::Theta => bind.theta.clone(),
        CsExpr::Phi => bind.phi.clone(),
        CsExpr::Zero { degree, space } => fa.zero(*degree, *space),
        CsExpr::Sum(xs) => {
            let vals = xs.iter().map(|x| eval(fa, p, x, bind)).collect::<Result<Vec<_>>>()?;
            fa.sum(&vals)?
        }
        CsExpr::Scale(q, x) => eval(fa, p, x, bind)?.mul_poly(q),
        CsExpr::Square(x) => fa.half_square(&eval(fa, p, x, bind)?)?,
        CsExpr::Bracket(x, y) => fa.bracket(&eval(fa, p, x, bind)?, &eval(fa, p, y, bind)?)?,
        CsExpr::Act(x, y) => fa.act(&eval(fa, p, x, bind)?, &eval(fa, p, y, bind)?)?,
        CsExpr::Alpha(x) => fa.alpha_push(&eval(fa, p, x, bind)?)?,
        CsExpr::Pair(xs, y) => {
            let vals = xs.iter().map(|x| eval(fa, p, x, bind)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&PolyForm> = vals.iter().collect();
            fa.pair(p, &refs, &eval(fa, p, y, bind)?)?
        }
        CsExpr::Dt(x) => {
            let dt = fa.scalar(1, ScalarForm::term(DT_BIT, Poly::int(1)));
            fa.wedge(&dt, &eval(fa, p, x, bind)?)?
        }
    })
}

/// Removes a leading `dt`: `dt ∧ ω ↦ ω`. Every term must carry `dt`.
pub fn strip_dt(fa: &FormAlgebra, w: &PolyForm) -> Result<PolyForm> {
    let mut comps = Vec::with_capacity(w.components().len());
    for c in w.components() {
        let mut out = ScalarForm::zero();
        for (i, p) in c.terms() {
            if i & DT_BIT == 0 {
                return Err(Error::Structural("term without dt after l_t".into()));
            }
            let rest = i & !DT_BIT;
            // Canonical order puts dt last: dx_I ∧ dt = (−1)^{|I|} dt ∧ dx_I.
            let coeff = if rest.count_ones() % 2 == 1 { p.neg() } else { p.clone() };
            out.add_term(rest, coeff);
        }
        comps.push(out);
    }
    let degree = w.degree().saturating_sub(1);
    fa.from_components(degree, w.space(), comps)
}

/// `k01(e) = ∫₀¹ l_t(e)` with `dt` stripped from the front.
pub fn k01(fa: &FormAlgebra, p: &InvariantPairing, e: &CsExpr, bind: &Binding) -> Result<PolyForm> {
    let le = l_t(e)?;
    if le.is_zero() {
        let (deg, space) = e.shape();
        return Ok(fa.zero(deg.saturating_sub(1), space));
    }
    let v = eval(fa, p, &le, bind)?;
    Ok(fa.integrate_param(&strip_dt(fa, &v)?, Var::T))
}

/// `F_s = s F + (s² − s) A²` over the generators.
pub fn fs_expr() -> CsExpr {
    CsExpr::Sum(vec![
        CsExpr::scale(s(), CsExpr::Gen(Gen::F)),
        CsExpr::scale(s().pow(2).sub(&s()), CsExpr::square(CsExpr::Gen(Gen::A))),
    ])
}

/// `G_s = s G + (s² − s) A ▷ B` over the generators.
pub fn gs_expr() -> CsExpr {
    CsExpr::Sum(vec![
        CsExpr::scale(s(), CsExpr::Gen(Gen::G)),
        CsExpr::scale(s().pow(2).sub(&s()), CsExpr::act(CsExpr::Gen(Gen::A), CsExpr::Gen(Gen::B))),
    ])
}

/// Integrand of the higher CS form before the `s` integral:
/// `n ⟨A ∧ F_s^{n−1}, G_s⟩ + ⟨F_s^n, B⟩`.
pub fn cs_integrand_expr(n: usize) -> CsExpr {
    let mut first = vec![CsExpr::Gen(Gen::A)];
    first.extend(std::iter::repeat(fs_expr()).take(n - 1));
    CsExpr::Sum(vec![
        CsExpr::scale(Poly::int(n as i64), CsExpr::pair(first, gs_expr())),
        CsExpr::pair(vec![fs_expr(); n], CsExpr::Gen(Gen::B)),
    ])
}

/// `⟨F^n, G⟩` over the generators.
pub fn chern_weil_expr(n: usize) -> CsExpr {
    CsExpr::pair(vec![CsExpr::Gen(Gen::F); n], CsExpr::Gen(Gen::G))
}

fn repeat_pair(fa: &FormAlgebra, p: &InvariantPairing, lead: &[&PolyForm], fill: &PolyForm, beta: &PolyForm) -> Result<PolyForm> {
    let mut args: Vec<&PolyForm> = lead.to_vec();
    while args.len() < p.n() {
        args.push(fill);
    }
    fa.pair(p, &args, beta)
}

/// `⟨F^n, G⟩` of a connection.
pub fn chern_weil_form(fa: &FormAlgebra, c: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    let cp = curvatures(fa, c)?;
    repeat_pair(fa, p, &[], &cp.f, &cp.g)
}

/// Higher CS form `n∫ds ⟨A ∧ F_s^{n−1}, G_s⟩ + ∫ds ⟨F_s^n, B⟩`, computed
/// directly on forms.
pub fn cs_form(fa: &FormAlgebra, c: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    let n = p.n();
    let cp = curvatures(fa, c)?;
    let a = c.a();
    let w = s().pow(2).sub(&s());
    let f_s = cp.f.mul_poly(&s()).add(&fa.half_square(a)?.mul_poly(&w))?;
    let g_s = cp.g.mul_poly(&s()).add(&fa.act(a, c.b())?.mul_poly(&w))?;
    let first = repeat_pair(fa, p, &[a], &f_s, &g_s)?.scale(&Scalar::from_int(n as i64));
    let second = repeat_pair(fa, p, &[], &f_s, c.b())?;
    Ok(fa.integrate_param(&first.add(&second)?, Var::S))
}

/// The same form through the expression layer.
pub fn cs_form_expr(fa: &FormAlgebra, c: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    let v = eval(fa, p, &cs_integrand_expr(p.n()), &Binding::of_connection(fa, c)?)?;
    Ok(fa.integrate_param(&v, Var::S))
}

/// `dQ − ⟨F^n, G⟩`.
pub fn cs_descent_residual(fa: &FormAlgebra, c: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    fa.d(&cs_form(fa, c, p)?).sub(&chern_weil_form(fa, c, p)?)
}

/// `n∫dt ⟨Θ ∧ F_t^{n−1}, G_t⟩ + ∫dt ⟨F_t^n, Φ⟩`.
pub fn transgression_form(fa: &FormAlgebra, c0: &TwoConnection, c1: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    let fam = interpolate(c0, c1)?;
    let fc = family_curvatures(fa, &fam)?;
    let n = p.n();
    let first = repeat_pair(fa, p, &[&fam.theta], &fc.f_t, &fc.g_t)?.scale(&Scalar::from_int(n as i64));
    let second = repeat_pair(fa, p, &[], &fc.f_t, &fam.phi)?;
    Ok(fa.integrate_param(&first.add(&second)?, Var::T))
}

/// `k01 ⟨F_t^n, G_t⟩` through the expression layer.
pub fn transgression_form_k01(fa: &FormAlgebra, c0: &TwoConnection, c1: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    let fam = interpolate(c0, c1)?;
    k01(fa, p, &chern_weil_expr(p.n()), &Binding::of_family(fa, &fam)?)
}

/// `⟨F₁^n, G₁⟩ − ⟨F₀^n, G₀⟩ − dQ_trans`.
pub fn chern_weil_residual(fa: &FormAlgebra, c0: &TwoConnection, c1: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    chern_weil_form(fa, c1, p)?
        .sub(&chern_weil_form(fa, c0, p)?)?
        .sub(&fa.d(&transgression_form(fa, c0, c1, p)?))
}

/// Exact Beta integral `∫₀¹ (t² − t)^n dt`.
pub fn beta_integral(n: u32) -> Scalar {
    t().pow(2).sub(&t()).pow(n).integrate_unit(Var::T).constant_term()
}

/// `(−1)^n n! n! / (2n)!` together with the Beta value `(−1)^n n! n! / (2n+1)!`.
pub fn wzw_closed_form_coefficient(n: u32) -> Result<(Scalar, Scalar)> {
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    let sign = Scalar::from_int(if n % 2 == 0 { 1 } else { -1 });
    let nn = &Scalar::factorial(n) * &Scalar::factorial(n);
    let coeff = &(&sign * &nn) / &Scalar::factorial(2 * n);
    let beta = &(&sign * &nn) / &Scalar::factorial(2 * n + 1);
    assert_eq!(&beta * &Scalar::from_int(2 * n as i64 + 1), coeff);
    Ok((coeff, beta))
}

/// `V = dg g⁻¹ + g α(φ) g⁻¹`, `W = g ▷ F(φ) + (dg g⁻¹) ▷ (g ▷ φ)` and
/// `F(φ) = dφ + φ ∧ φ`.
#[derive(Clone, Debug)]
pub struct VwFields {
    pub v: PolyForm,
    pub w: PolyForm,
    pub f_phi: PolyForm,
}

pub fn vw_fields(fa: &FormAlgebra, gd: &GaugeData) -> Result<VwFields> {
    let phi = gd.phi();
    let f_phi = fa.d(phi).add(&fa.wedge_square(phi)?)?;
    let dg_ginv = fa.conj_g(gd.g(), &fa.maurer_cartan(gd.g())?)?;
    let v = dg_ginv.add(&fa.conj_g(gd.g(), &fa.alpha_push(phi)?)?)?;
    let w = fa.act_group(gd.g(), &f_phi)?.add(&fa.act(&dg_ginv, &fa.act_group(gd.g(), phi)?)?)?;
    Ok(VwFields { v, w, f_phi })
}

/// The `t = 0` end of the pure-gauge family: `(g⁻¹Vg, g⁻¹ ▷ W)`, i.e.
/// `(g⁻¹dg + α(φ), F(φ) + (g⁻¹dg) ▷ φ)`.
pub fn flat_pair(fa: &FormAlgebra, gd: &GaugeData) -> Result<TwoConnection> {
    let mc = fa.maurer_cartan(gd.g())?;
    let a = mc.add(&fa.alpha_push(gd.phi())?)?;
    let phi = gd.phi();
    let b = fa.d(phi).add(&fa.wedge_square(phi)?)?.add(&fa.act(&mc, phi)?)?;
    TwoConnection::new(a, b)
}

/// The higher WZW term with every stage of its reduction.
#[derive(Clone, Debug)]
pub struct WzwTerm {
    /// `Q(g⁻¹Vg, g⁻¹▷W, 0, 0)`.
    pub value: PolyForm,
    pub fields: VwFields,
    /// `β_n (n ⟨V (V²)^{n−1}, V ▷ W⟩ + ⟨(V²)^n, W⟩)` with `β_n = ∫(s²−s)^n`.
    pub beta_reduced: PolyForm,
    /// `⟨V (V²)^{n−1}, V ▷ W⟩`.
    pub identity_lhs: PolyForm,
    /// `2 ⟨(V²)^n, W⟩`.
    pub identity_rhs: PolyForm,
    /// `(−1)^n n!n!/(2n)! ⟨(V²)^n, W⟩`.
    pub closed_form: PolyForm,
}

pub fn wzw_term(fa: &FormAlgebra, gd: &GaugeData, p: &InvariantPairing) -> Result<WzwTerm> {
    let n = p.n();
    let fields = vw_fields(fa, gd)?;
    let value = cs_form(fa, &flat_pair(fa, gd)?, p)?;
    let (v, w) = (&fields.v, &fields.w);
    let v2 = fa.half_square(v)?;
    let identity_lhs = repeat_pair(fa, p, &[v], &v2, &fa.act(v, w)?)?;
    let vvw = repeat_pair(fa, p, &[], &v2, w)?;
    let identity_rhs = vvw.scale(&Scalar::from_int(2));
    let (coeff, beta) = wzw_closed_form_coefficient(n as u32)?;
    let beta_reduced = identity_lhs.scale(&Scalar::from_int(n as i64)).add(&vvw)?.scale(&beta);
    let closed_form = vvw.scale(&coeff);
    Ok(WzwTerm { value, fields, beta_reduced, identity_lhs, identity_rhs, closed_form })
}

/// `⟨V, …, V, W⟩` with `2n` copies of `V` in a pairing with `2n` slots.
pub fn wzw_slot_form(fa: &FormAlgebra, v: &PolyForm, w: &PolyForm, p2n: &InvariantPairing) -> Result<PolyForm> {
    repeat_pair(fa, p2n, &[], v, w)
}

/// The pairing with `2n` slots used by [`wzw_slot_form`].
pub fn slot_pairing(fa: &FormAlgebra, n: usize) -> Result<InvariantPairing> {
    symmetrized_trace_pairing(fa.module(), 2 * n)
}

/// Generators of the pure-gauge family
/// `A_t = g⁻¹(tA)g + g⁻¹dg + α(φ)`, `B_t = g⁻¹ ▷ (tB) + F(φ) + A^g_t ▷ φ`
/// with its curvatures and endpoint differences `Θ = g⁻¹Ag`,
/// `Φ = g⁻¹ ▷ B + (g⁻¹Ag) ▷ φ`.
pub fn gauge_family(fa: &FormAlgebra, c: &TwoConnection, gd: &GaugeData) -> Result<Binding> {
    let ginv = gd.g().inverse();
    let phi = gd.phi();
    let theta = fa.conj_g(&ginv, c.a())?;
    let ag_t = gauge_a_part(fa, &c.a().mul_poly(&t()), gd.g())?;
    let a = ag_t.add(&fa.alpha_push(phi)?)?;
    let gb = fa.act_group(&ginv, c.b())?;
    let b = gb
        .mul_poly(&t())
        .add(&fa.d(phi))?
        .add(&fa.wedge_square(phi)?)?
        .add(&fa.act(&ag_t, phi)?)?;
    let phi_diff = gb.add(&fa.act(&theta, phi)?)?;
    let cp = curvatures(fa, &TwoConnection::new(a.clone(), b.clone())?)?;
    Ok(Binding { a, b, f: cp.f, g: cp.g, theta, phi: phi_diff })
}

/// `α_{2n+1} = k01 Q(A_t, B_t, F_t, G_t)` on the pure-gauge family.
pub fn alpha_form(fa: &FormAlgebra, c: &TwoConnection, gd: &GaugeData, p: &InvariantPairing) -> Result<PolyForm> {
    let bind = gauge_family(fa, c, gd)?;
    Ok(fa.integrate_param(&k01(fa, p, &cs_integrand_expr(p.n()), &bind)?, Var::S))
}

/// `Q(c^{g,φ}) − Q(c) − WZW − dα`.
pub fn descent_residual(fa: &FormAlgebra, c: &TwoConnection, gd: &GaugeData, p: &InvariantPairing) -> Result<PolyForm> {
    let c2 = gauge_transform(fa, c, gd)?;
    cs_form(fa, &c2, p)?
        .sub(&cs_form(fa, c, p)?)?
        .sub(&wzw_term(fa, gd, p)?.value)?
        .sub(&fa.d(&alpha_form(fa, c, gd, p)?))
}

/// `Q(c^{g,φ}) − Q(c) − dα`, the descent relation with the WZW term dropped.
pub fn tr1_residual(fa: &FormAlgebra, c: &TwoConnection, gd: &GaugeData, p: &InvariantPairing) -> Result<PolyForm> {
    let c2 = gauge_transform(fa, c, gd)?;
    cs_form(fa, &c2, p)?.sub(&cs_form(fa, c, p)?)?.sub(&fa.d(&alpha_form(fa, c, gd, p)?))
}

/// `𝐁 = −∬ dt ds · n s {(n−1)⟨A_t ∧ Θ ∧ F_st^{n−2}, G_st⟩ + ⟨A_t ∧ F_st^{n−1}, Φ⟩ − ⟨Θ ∧ F_st^{n−1}, B_t⟩}`
/// with `F_st = sF_t + (s²−s)A_t²` and `G_st = sG_t + (s²−s)A_t ▷ B_t`.
pub fn b_form(fa: &FormAlgebra, c0: &TwoConnection, c1: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    let n = p.n();
    let fam = interpolate(c0, c1)?;
    let fc = family_curvatures(fa, &fam)?;
    let (a_t, b_t, th, ph) = (&fam.a_t, &fam.b_t, &fam.theta, &fam.phi);
    let w = s().pow(2).sub(&s());
    let f_st = fc.f_t.mul_poly(&s()).add(&fa.half_square(a_t)?.mul_poly(&w))?;
    let g_st = fc.g_t.mul_poly(&s()).add(&fa.act(a_t, b_t)?.mul_poly(&w))?;
    let mut inner = repeat_pair(fa, p, &[a_t], &f_st, ph)?.sub(&repeat_pair(fa, p, &[th], &f_st, b_t)?)?;
    if n >= 2 {
        let t1 = repeat_pair(fa, p, &[a_t, th], &f_st, &g_st)?.scale(&Scalar::from_int(n as i64 - 1));
        inner = inner.add(&t1)?;
    }
    let integrand = inner.mul_poly(&s()).scale(&Scalar::from_int(-(n as i64)));
    Ok(fa.integrate_param(&fa.integrate_param(&integrand, Var::S), Var::T))
}

/// `k01` of the CS integrand on the linear family, then the `s` integral.
pub fn b_form_k01(fa: &FormAlgebra, c0: &TwoConnection, c1: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    let fam = interpolate(c0, c1)?;
    let v = k01(fa, p, &cs_integrand_expr(p.n()), &Binding::of_family(fa, &fam)?)?;
    Ok(fa.integrate_param(&v, Var::S))
}

/// `Q_trans − Q(c₁) + Q(c₀) + d𝐁`.
pub fn eq1_residual(fa: &FormAlgebra, c0: &TwoConnection, c1: &TwoConnection, p: &InvariantPairing) -> Result<PolyForm> {
    transgression_form(fa, c0, c1, p)?
        .sub(&cs_form(fa, c1, p)?)?
        .add(&cs_form(fa, c0, p)?)?
        .add(&fa.d(&b_form(fa, c0, c1, p)?))
}

/// Transgression form between `c` and its gauge transform.
pub fn gwzw_form(fa: &FormAlgebra, c: &TwoConnection, gd: &GaugeData, p: &InvariantPairing) -> Result<PolyForm> {
    transgression_form(fa, c, &gauge_transform(fa, c, gd)?, p)
}

/// `gWZW − d(α − 𝐁(c, c^{g,φ}))`.
pub fn gwzw_exactness_residual(fa: &FormAlgebra, c: &TwoConnection, gd: &GaugeData, p: &InvariantPairing) -> Result<PolyForm> {
    let c2 = gauge_transform(fa, c, gd)?;
    let prim = alpha_form(fa, c, gd, p)?.sub(&b_form(fa, c, &c2, p)?)?;
    transgression_form(fa, c, &c2, p)?.sub(&fa.d(&prim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::group::GroupMap;
    use crate::matrix::Matrix;
    use std::sync::Arc;

    fn setup(name: &str, dim: usize, n: usize) -> (FormAlgebra, InvariantPairing) {
        let xm = Arc::new(fixture::module(name).unwrap());
        let p = symmetrized_trace_pairing(&xm, n).unwrap();
        (FormAlgebra::new(xm, dim).unwrap(), p)
    }

    fn worked(fa: &FormAlgebra) -> TwoConnection {
        TwoConnection::new(
            fa.term(Space::G, "E", &[1], "x2").unwrap(),
            fa.term(Space::H, "F", &[3, 4], "x5").unwrap(),
        )
        .unwrap()
    }

    fn zero(fa: &FormAlgebra) -> TwoConnection {
        TwoConnection::new(fa.zero(1, Space::G), fa.zero(2, Space::H)).unwrap()
    }

    fn other(fa: &FormAlgebra) -> TwoConnection {
        TwoConnection::new(
            fa.term(Space::G, "F", &[3], "x1").unwrap().add(&fa.term(Space::G, "H", &[2], "x4 + 1").unwrap()).unwrap(),
            fa.term(Space::H, "E", &[1, 5], "x2").unwrap().add(&fa.term(Space::H, "H", &[2, 3], "x3").unwrap()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn worked_cs_form() {
        let (fa, p) = setup("adjoint:sl2", 5, 1);
        let q = cs_form(&fa, &worked(&fa), &p).unwrap();
        let mut expected = ScalarForm::term(0b11101, "1/2*x2".parse().unwrap());
        expected.add_term(0b01111, "-1/2*x5".parse().unwrap());
        assert_eq!(q.components(), &[expected]);
        let dq = fa.d(&q);
        assert_eq!(dq.components(), &[ScalarForm::term(0b11111, Poly::int(-1))]);
        assert_eq!(dq, chern_weil_form(&fa, &worked(&fa), &p).unwrap());
        assert_eq!(cs_form_expr(&fa, &worked(&fa), &p).unwrap(), q);
        assert!(cs_form(&fa, &zero(&fa), &p).unwrap().is_zero());
    }

    #[test]
    fn family_endpoints_and_curvatures() {
        let (fa, _) = setup("adjoint:sl2", 5, 1);
        let fam = interpolate(&worked(&fa), &other(&fa)).unwrap();
        for (val, c) in [(Scalar::zero(), worked(&fa)), (Scalar::one(), other(&fa))] {
            assert_eq!(&fa.substitute(&fam.a_t, Var::T, &val), c.a());
            assert_eq!(&fa.substitute(&fam.b_t, Var::T, &val), c.b());
        }
        assert!(family_curvature_residuals(&fa, &fam).unwrap().iter().all(PolyForm::is_zero));
        let fam0 = interpolate(&zero(&fa), &worked(&fa)).unwrap();
        let fc = family_curvatures(&fa, &fam0).unwrap();
        let cp = curvatures(&fa, &worked(&fa)).unwrap();
        let w = t().pow(2).sub(&t());
        let expected_f = cp.f.mul_poly(&t()).add(&fa.half_square(worked(&fa).a()).unwrap().mul_poly(&w)).unwrap();
        assert_eq!(fc.f_t, expected_f);
        let constant = interpolate(&worked(&fa), &worked(&fa)).unwrap();
        assert_eq!(family_curvatures(&fa, &constant).unwrap().f_t, cp.f);
    }

    #[test]
    fn homotopy_derivation_rules() {
        assert!(l_t(&CsExpr::Gen(Gen::A)).unwrap().is_zero());
        assert!(l_t(&CsExpr::Gen(Gen::B)).unwrap().is_zero());
        assert_eq!(l_t(&CsExpr::Gen(Gen::F)).unwrap(), CsExpr::Dt(Box::new(CsExpr::Theta)));
        // l_t F_ts = s dt Θ: the A² part is killed.
        let fts = l_t(&fs_expr()).unwrap();
        assert_eq!(fts, CsExpr::scale(s(), CsExpr::Dt(Box::new(CsExpr::Theta))));
        let twice = l_t(&l_t(&CsExpr::Gen(Gen::G)).unwrap());
        assert!(matches!(twice, Err(Error::Structural(_))));
    }

    #[test]
    fn transgression_paths_agree() {
        let (fa, p) = setup("adjoint:sl2", 5, 1);
        let (c0, c1) = (worked(&fa), other(&fa));
        let direct = transgression_form(&fa, &c0, &c1, &p).unwrap();
        assert_eq!(transgression_form_k01(&fa, &c0, &c1, &p).unwrap(), direct);
        assert_eq!(transgression_form(&fa, &zero(&fa), &c1, &p).unwrap(), cs_form(&fa, &c1, &p).unwrap());
        assert!(transgression_form(&fa, &c0, &c0, &p).unwrap().is_zero());
        assert!(chern_weil_residual(&fa, &c0, &c1, &p).unwrap().is_zero());
    }

    #[test]
    fn b_form_paths_agree_and_eq1_holds() {
        let (fa, p) = setup("adjoint:sl2", 5, 1);
        let (c0, c1) = (worked(&fa), other(&fa));
        assert_eq!(b_form(&fa, &c0, &c1, &p).unwrap(), b_form_k01(&fa, &c0, &c1, &p).unwrap());
        assert!(eq1_residual(&fa, &c0, &c1, &p).unwrap().is_zero());
        assert!(eq1_residual(&fa, &zero(&fa), &c1, &p).unwrap().is_zero());
        assert!(b_form(&fa, &c0, &c0, &p).unwrap().is_zero());
    }

    #[test]
    fn beta_chain() {
        let expected = [Scalar::new(-1, 6), Scalar::new(1, 30), Scalar::new(-1, 140), Scalar::new(1, 630)];
        for (n, e) in (1..=4).zip(expected) {
            assert_eq!(beta_integral(n), e);
            let (coeff, beta) = wzw_closed_form_coefficient(n).unwrap();
            assert_eq!(beta, e);
            assert_eq!(&beta * &Scalar::from_int(2 * n as i64 + 1), coeff);
        }
        assert_eq!(wzw_closed_form_coefficient(1).unwrap().0, Scalar::new(-1, 2));
        assert_eq!(wzw_closed_form_coefficient(2).unwrap().0, Scalar::new(1, 6));
        assert_eq!(wzw_closed_form_coefficient(3).unwrap().0, Scalar::new(-1, 20));
    }

    #[test]
    fn vw_fields_for_pure_phi() {
        let (fa, _) = setup("adjoint:sl2", 5, 1);
        let phi = fa.term(Space::H, "E", &[2], "x1").unwrap();
        let gd = GaugeData::new(GroupMap::identity(2), phi).unwrap();
        let vw = vw_fields(&fa, &gd).unwrap();
        assert_eq!(vw.v, fa.term(Space::G, "E", &[2], "x1").unwrap());
        assert_eq!(vw.w, fa.term(Space::H, "E", &[1, 2], "1").unwrap());
        let triv = vw_fields(&fa, &GaugeData::identity(&fa)).unwrap();
        assert!(triv.v.is_zero() && triv.w.is_zero());
    }

    #[test]
    fn wzw_reduction_chain() {
        let (fa, p) = setup("adjoint:sl2", 5, 1);
        let phi = fa
            .term(Space::H, "E", &[1], "x5")
            .unwrap()
            .add(&fa.term(Space::H, "F", &[2], "1").unwrap())
            .unwrap()
            .add(&fa.term(Space::H, "H", &[4], "x3").unwrap())
            .unwrap();
        let gd = GaugeData::new(GroupMap::identity(2), phi).unwrap();
        let wz = wzw_term(&fa, &gd, &p).unwrap();
        assert_eq!(wz.value, wz.beta_reduced);
        assert_eq!(wz.identity_lhs, wz.identity_rhs);
        assert_eq!(wz.value, wz.closed_form);
        // For g = id the value is −½ tr(φ² dφ), which is not zero here.
        let mut expected = ScalarForm::term(0b01111, Poly::var(Var::X(4)).neg());
        expected.add_term(0b11011, Poly::var(Var::X(2)));
        assert_eq!(wz.value.components(), &[expected]);
        let p2 = slot_pairing(&fa, 1).unwrap();
        assert!(wzw_slot_form(&fa, &wz.fields.v, &wz.fields.w, &p2).unwrap().is_zero());
    }

    #[test]
    fn wzw_vanishes_on_the_two_term_example() {
        let (fa, p) = setup("adjoint:sl2", 5, 1);
        let phi = fa.term(Space::H, "E", &[2], "x1").unwrap().add(&fa.term(Space::H, "F", &[4], "x3").unwrap()).unwrap();
        let gd = GaugeData::new(GroupMap::identity(2), phi).unwrap();
        let wz = wzw_term(&fa, &gd, &p).unwrap();
        assert!(!wz.fields.v.is_zero() && !wz.fields.w.is_zero());
        assert!(wz.value.is_zero());
    }

    #[test]
    fn descent_with_constant_and_phi_gauges() {
        let (fa, p) = setup("adjoint:sl2", 5, 1);
        let g = GroupMap::constant(Matrix::from_rows(vec![
            vec![Scalar::from_int(2), Scalar::zero()],
            vec![Scalar::zero(), Scalar::new(1, 2)],
        ]))
        .unwrap();
        let c = worked(&fa);
        let constant = GaugeData::new(g, fa.zero(1, Space::H)).unwrap();
        let phi_only = GaugeData::new(GroupMap::identity(2), fa.term(Space::H, "H", &[3], "x2").unwrap()).unwrap();
        for gd in [&constant, &phi_only, &GaugeData::identity(&fa)] {
            assert!(descent_residual(&fa, &c, gd, &p).unwrap().is_zero());
            assert!(gwzw_exactness_residual(&fa, &c, gd, &p).unwrap().is_zero() == wzw_term(&fa, gd, &p).unwrap().value.is_zero());
        }
        let gw = gwzw_form(&fa, &c, &constant, &p).unwrap();
        assert!(!gw.is_zero());
        assert!(gwzw_form(&fa, &c, &GaugeData::identity(&fa), &p).unwrap().is_zero());
    }

    #[test]
    fn gauge_family_is_covariant_and_flat_at_zero() {
        let (fa, _) = setup("adjoint:sl2", 5, 1);
        let c = other(&fa);
        let n = crate::matrix::PolyMatrix::from_entries(
            2,
            vec![Poly::zero(), "x1 - x5".parse().unwrap(), Poly::zero(), Poly::zero()],
        );
        let gd = GaugeData::new(GroupMap::unipotent(n).unwrap(), fa.term(Space::H, "F", &[2], "x3").unwrap()).unwrap();
        let bind = gauge_family(&fa, &c, &gd).unwrap();
        let at0 = |w: &PolyForm| fa.substitute(w, Var::T, &Scalar::zero());
        assert!(at0(&bind.f).is_zero());
        assert!(at0(&bind.g).is_zero());
        let plain = Binding::of_family(&fa, &interpolate(&zero(&fa), &c).unwrap()).unwrap();
        let ginv = gd.g().inverse();
        assert_eq!(bind.f, fa.conj_g(&ginv, &plain.f).unwrap());
        let expected_g = fa.act_group(&ginv, &plain.g).unwrap().add(&fa.act(&bind.f, gd.phi()).unwrap()).unwrap();
        assert_eq!(bind.g, expected_g);
        let flat = flat_pair(&fa, &gd).unwrap();
        let vw = vw_fields(&fa, &gd).unwrap();
        assert_eq!(flat.a(), &fa.conj_g(&ginv, &vw.v).unwrap());
        assert_eq!(flat.b(), &fa.act_group(&ginv, &vw.w).unwrap());
    }
}
