//! Seeded instance generation, suite orchestration and reports.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{
    symmetrized_trace_pairing, validate_crossed_module, validate_lie_algebra, validate_pairing,
    DifferentialCrossedModule, InvariantPairing,
};
use crate::error::{Error, Result};
use crate::fixture;
use crate::forms::{FormAlgebra, MultiIndex, PolyForm, ScalarForm, Space};
use crate::gauge::{
    bianchi_residuals, composition_residuals, curvature_covariance_residuals, curvatures, gauge_transform,
    gauge_transform_split, GaugeData, TwoConnection,
};
use crate::group::GroupMap;
use crate::matrix::Matrix;
use crate::poly::{Poly, Var};
use crate::scalar::Scalar;
use crate::transgression as tg;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "HGAUGE_WORKERS";

/// Sample points per instance in numeric mode.
pub const NUMERIC_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Axioms,
    Forms,
    Bianchi,
    Covariance,
    Compose,
    CsDescent,
    ChernWeil,
    Wzw,
    Tr1,
    Descent,
    Eq1,
    Gwzw,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Axioms,
        Suite::Forms,
        Suite::Bianchi,
        Suite::Covariance,
        Suite::Compose,
        Suite::CsDescent,
        Suite::ChernWeil,
        Suite::Wzw,
        Suite::Tr1,
        Suite::Descent,
        Suite::Eq1,
        Suite::Gwzw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Forms => "forms",
            Suite::Bianchi => "bianchi",
            Suite::Covariance => "covariance",
            Suite::Compose => "compose",
            Suite::CsDescent => "cs-descent",
            Suite::ChernWeil => "chern-weil",
            Suite::Wzw => "wzw",
            Suite::Tr1 => "tr1",
            Suite::Descent => "descent",
            Suite::Eq1 => "eq1",
            Suite::Gwzw => "gwzw",
        }
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|s| *s == self).expect("listed") as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Parses `all` or a comma-separated list of suite names.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s.trim() == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    let mut out: Vec<Suite> = s.split(',').map(|x| x.trim().parse()).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    Exact,
    /// Residuals evaluated on exact jets of the given order at random
    /// rational points, converted to `f64` only for the comparison.
    Numeric { tolerance: f64, order: i16 },
}

impl Mode {
    pub fn numeric(tolerance: f64) -> Mode {
        Mode::Numeric { tolerance, order: 3 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Numeric { .. } => "numeric",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupDraw {
    Identity,
    Constant,
    Unipotent,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub fixture: String,
    pub n: usize,
    pub dim: usize,
    pub degree_cap: u32,
    pub sparsity_cap: usize,
    /// Largest number of (basis element, multi-index) terms in a random form.
    pub form_terms: usize,
    pub instances: usize,
    pub seed: u64,
    pub mode: Mode,
    pub suites: Vec<Suite>,
    pub group_draws: Vec<GroupDraw>,
    /// Runs only this instance index of each suite.
    pub only_instance: Option<usize>,
    #[serde(skip)]
    pub dump_dir: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            fixture: "adjoint:sl2".into(),
            n: 1,
            dim: 5,
            degree_cap: 2,
            sparsity_cap: 3,
            form_terms: 6,
            instances: 25,
            seed: 42,
            mode: Mode::Exact,
            suites: Suite::ALL.to_vec(),
            group_draws: vec![GroupDraw::Identity, GroupDraw::Constant, GroupDraw::Unipotent],
            only_instance: None,
            dump_dir: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > crate::poly::MAX_COORDS {
            return Err(Error::Config(format!("patch dimension must be in 1..={}", crate::poly::MAX_COORDS)));
        }
        if self.n == 0 {
            return Err(Error::Config("pairing degree n must be at least 1".into()));
        }
        if let Mode::Numeric { tolerance, order } = self.mode {
            if !(tolerance > 0.0) {
                return Err(Error::Config("tolerance must be positive".into()));
            }
            if order < 0 {
                return Err(Error::Config("jet order must be non-negative".into()));
            }
        }
        if self.sparsity_cap == 0 || self.form_terms == 0 {
            return Err(Error::Config("sparsity cap and form terms must be at least 1".into()));
        }
        if self.group_draws.is_empty() {
            return Err(Error::Config("at least one group draw kind is required".into()));
        }
        Ok(())
    }

    /// CLI invocation reproducing one instance of one suite.
    pub fn repro_command(&self, suite: Suite, instance: usize) -> String {
        let mut cmd = format!(
            "hgauge run --fixture {} --n {} --dim {} --seed {} --suites {} --only-instance {} --instances {}",
            self.fixture, self.n, self.dim, self.seed, suite, instance, self.instances
        );
        if self.degree_cap != 2 {
            cmd += &format!(" --degree-cap {}", self.degree_cap);
        }
        if self.sparsity_cap != 3 {
            cmd += &format!(" --sparsity-cap {}", self.sparsity_cap);
        }
        if self.form_terms != 6 {
            cmd += &format!(" --form-terms {}", self.form_terms);
        }
        if let Mode::Numeric { tolerance, order } = self.mode {
            cmd += &format!(" --mode numeric --tolerance {tolerance:e} --jet-order {order}");
        }
        if self.group_draws.len() != 3 {
            let names: Vec<String> = self
                .group_draws
                .iter()
                .map(|g| serde_json::to_value(g).expect("serialises").as_str().unwrap_or_default().to_string())
                .collect();
            cmd += &format!(" --groups {}", names.join(","));
        }
        cmd
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-instance seed, independent of scheduling order.
pub fn instance_seed(seed: u64, suite: Suite, instance: usize) -> u64 {
    splitmix(splitmix(seed ^ (suite.index() << 56)) ^ instance as u64)
}

fn random_poly(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Poly {
    let mut p = Poly::zero();
    let terms = rng.gen_range(1..=cfg.sparsity_cap);
    for _ in 0..terms {
        let deg = rng.gen_range(0..=cfg.degree_cap);
        let mut powers: Vec<(Var, u32)> = Vec::new();
        for _ in 0..deg {
            let v = Var::X(rng.gen_range(0..cfg.dim));
            match powers.iter_mut().find(|(w, _)| *w == v) {
                Some((_, e)) => *e += 1,
                None => powers.push((v, 1)),
            }
        }
        let mut c = rng.gen_range(1..=3i64);
        if rng.gen_bool(0.5) {
            c = -c;
        }
        p = p.add(&Poly::monomial(Scalar::from_int(c), &powers));
    }
    p
}

fn random_index(dim: usize, degree: usize, rng: &mut ChaCha8Rng) -> MultiIndex {
    let mut coords: Vec<usize> = (0..dim).collect();
    coords.shuffle(rng);
    coords[..degree].iter().fold(0, |m, &i| m | (1 << i))
}

/// Random `space`-valued form of the given degree, never zero when the
/// degree fits the patch.
pub fn random_form(fa: &FormAlgebra, cfg: &SuiteConfig, degree: usize, space: Space, rng: &mut ChaCha8Rng) -> PolyForm {
    let dim_v = fa.space_dim(space);
    let mut comps = vec![ScalarForm::zero(); dim_v];
    if degree > fa.dim() {
        return fa.zero(degree, space);
    }
    loop {
        let terms = rng.gen_range(1..=cfg.form_terms);
        for _ in 0..terms {
            let k = rng.gen_range(0..dim_v);
            let idx = random_index(fa.dim(), degree, rng);
            comps[k].add_term(idx, random_poly(cfg, rng));
        }
        if comps.iter().any(|c| !c.is_zero()) {
            break;
        }
    }
    fa.from_components(degree, space, comps).expect("indices fit the patch")
}

/// Deterministic random 2-connection for `(cfg, seed)`.
pub fn gen_connection(fa: &FormAlgebra, cfg: &SuiteConfig, seed: u64) -> TwoConnection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    connection_from(fa, cfg, &mut rng)
}

fn connection_from(fa: &FormAlgebra, cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> TwoConnection {
    let a = random_form(fa, cfg, 1, Space::G, rng);
    let b = random_form(fa, cfg, 2, Space::H, rng);
    TwoConnection::new(a, b).expect("degrees are right")
}

fn nilpotent_basis(xm: &DifferentialCrossedModule) -> Option<&Matrix> {
    xm.g().basis().iter().find(|b| !b.is_zero() && b.to_poly().is_strictly_triangular())
}

fn random_group(xm: &DifferentialCrossedModule, cfg: &SuiteConfig, draw: GroupDraw, rng: &mut ChaCha8Rng) -> GroupMap {
    let size = xm.g().size();
    match draw {
        GroupDraw::Identity => GroupMap::identity(size),
        GroupDraw::Constant => loop {
            let rows: Vec<Vec<Scalar>> = (0..size)
                .map(|_| (0..size).map(|_| Scalar::from_int(rng.gen_range(-2..=2))).collect())
                .collect();
            if let Ok(g) = GroupMap::constant(Matrix::from_rows(rows)) {
                if !g.is_identity() {
                    break g;
                }
            }
        },
        GroupDraw::Unipotent => match nilpotent_basis(xm) {
            Some(e) => {
                let mut p = random_poly(cfg, rng);
                while p.coord_total_degree() == 0 && cfg.degree_cap > 0 {
                    p = random_poly(cfg, rng);
                }
                GroupMap::unipotent(e.to_poly().map(|x| x.mul(&p))).expect("strictly triangular")
            }
            None => random_group(xm, cfg, GroupDraw::Constant, rng),
        },
    }
}

/// Deterministic random gauge data for `(cfg, seed)` with nonzero `φ`.
pub fn gen_gauge(fa: &FormAlgebra, cfg: &SuiteConfig, seed: u64) -> GaugeData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = *cfg.group_draws.choose(&mut rng).expect("nonempty");
    gauge_from(fa, cfg, draw, &mut rng)
}

fn gauge_from(fa: &FormAlgebra, cfg: &SuiteConfig, draw: GroupDraw, rng: &mut ChaCha8Rng) -> GaugeData {
    let g = random_group(fa.module(), cfg, draw, rng);
    let phi = random_form(fa, cfg, 1, Space::H, rng);
    GaugeData::new(g, phi).expect("φ is an h-valued 1-form")
}

/// Inputs of one instance.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub connections: Vec<TwoConnection>,
    pub gauges: Vec<GaugeData>,
}

impl Inputs {
    fn shift(&self, fa: &FormAlgebra, point: &[Scalar], order: i16) -> Inputs {
        Inputs {
            connections: self
                .connections
                .iter()
                .map(|c| c.map(|w| fa.shift_coords(w, point, order)))
                .collect(),
            gauges: self.gauges.iter().map(|g| g.shift_coords(fa, point, order)).collect(),
        }
    }
}

/// Instance inputs for a suite, derived from the instance seed alone.
pub fn gen_inputs(fa: &FormAlgebra, cfg: &SuiteConfig, suite: Suite, seed: u64) -> Inputs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = *cfg.group_draws.choose(&mut rng).expect("nonempty");
    match suite {
        Suite::Axioms => Inputs { connections: vec![], gauges: vec![] },
        Suite::Forms | Suite::ChernWeil | Suite::Eq1 => Inputs {
            connections: vec![connection_from(fa, cfg, &mut rng), connection_from(fa, cfg, &mut rng)],
            gauges: vec![],
        },
        Suite::Bianchi | Suite::CsDescent => {
            Inputs { connections: vec![connection_from(fa, cfg, &mut rng)], gauges: vec![] }
        }
        Suite::Compose => Inputs {
            connections: vec![connection_from(fa, cfg, &mut rng)],
            gauges: vec![gauge_from(fa, cfg, draw, &mut rng), gauge_from(fa, cfg, draw, &mut rng)],
        },
        Suite::Wzw => {
            // Resample until V and W are both nonzero.
            let mut gd = gauge_from(fa, cfg, draw, &mut rng);
            for _ in 0..16 {
                match tg::vw_fields(fa, &gd) {
                    Ok(vw) if vw.v.is_zero() || vw.w.is_zero() => gd = gauge_from(fa, cfg, draw, &mut rng),
                    _ => break,
                }
            }
            Inputs { connections: vec![], gauges: vec![gd] }
        }
        Suite::Covariance | Suite::Tr1 | Suite::Descent | Suite::Gwzw => Inputs {
            connections: vec![connection_from(fa, cfg, &mut rng)],
            gauges: vec![gauge_from(fa, cfg, draw, &mut rng)],
        },
    }
}

/// Shared state for one run.
pub struct Context {
    pub cfg: SuiteConfig,
    pub fa: FormAlgebra,
    pub pairing: InvariantPairing,
    slot: OnceLock<Result<InvariantPairing>>,
}

impl Context {
    pub fn new(cfg: SuiteConfig) -> Result<Context> {
        cfg.validate()?;
        let xm = Arc::new(fixture::load_module(&cfg.fixture)?);
        let fa = FormAlgebra::new(xm.clone(), cfg.dim)?;
        let pairing = symmetrized_trace_pairing(&xm, cfg.n)?;
        Ok(Context { cfg, fa, pairing, slot: OnceLock::new() })
    }

    fn slot_pairing(&self) -> Result<&InvariantPairing> {
        self.slot
            .get_or_init(|| tg::slot_pairing(&self.fa, self.cfg.n))
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// Residual forms of one evaluation together with the terms whose size sets
/// the numeric scale.
pub struct Check {
    pub residuals: Vec<(&'static str, PolyForm)>,
    pub scale: Vec<PolyForm>,
}

fn pair_of(r: (PolyForm, PolyForm), a: &'static str, b: &'static str) -> Vec<(&'static str, PolyForm)> {
    vec![(a, r.0), (b, r.1)]
}

/// Evaluates one suite on given inputs. Scale terms are only computed when
/// `with_scale` is set.
pub fn evaluate(ctx: &Context, suite: Suite, inp: &Inputs, with_scale: bool) -> Result<Check> {
    let fa = &ctx.fa;
    let p = &ctx.pairing;
    let mut scale = Vec::new();
    let residuals = match suite {
        Suite::Axioms => vec![],
        Suite::Forms => {
            let (c1, c2) = (&inp.connections[0], &inp.connections[1]);
            let (a, b, a2) = (c1.a(), c1.b(), c2.a());
            let leibniz = fa.d(&fa.bracket(a, a2)?).sub(&fa.bracket(&fa.d(a), a2)?)?.add(&fa.bracket(a, &fa.d(a2))?)?;
            let act = fa.d(&fa.act(a, b)?).sub(&fa.act(&fa.d(a), b)?)?.add(&fa.act(a, &fa.d(b))?)?;
            let equiv = fa.alpha_push(&fa.act(a, b)?)?.sub(&fa.bracket(a, &fa.alpha_push(b)?)?)?;
            let square = fa.wedge_square(a)?.sub(&fa.half_square(a)?)?;
            let jacobi = fa.bracket(a, &fa.bracket(a, a)?)?;
            if with_scale {
                scale = vec![fa.d(&fa.bracket(a, a2)?), fa.d(&fa.act(a, b)?), fa.wedge_square(a)?];
            }
            vec![
                ("d(dA)", fa.d(&fa.d(a))),
                ("d(dB)", fa.d(&fa.d(b))),
                ("bracket-leibniz", leibniz),
                ("action-leibniz", act),
                ("alpha-equivariance", equiv),
                ("wedge-square", square),
                ("jacobi", jacobi),
            ]
        }
        Suite::Bianchi => {
            let c = &inp.connections[0];
            if with_scale {
                let cp = curvatures(fa, c)?;
                scale = vec![fa.d(&cp.f), fa.d(&cp.g)];
            }
            pair_of(bianchi_residuals(fa, c)?, "bianchi-F", "bianchi-G")
        }
        Suite::Covariance => {
            let (c, gd) = (&inp.connections[0], &inp.gauges[0]);
            let t1 = gauge_transform(fa, c, gd)?;
            let t2 = gauge_transform_split(fa, c, gd)?;
            if with_scale {
                let cp = curvatures(fa, &t1)?;
                scale = vec![cp.f, cp.g, t1.a().clone(), t1.b().clone()];
            }
            let mut r = pair_of(curvature_covariance_residuals(fa, c, gd)?, "covariance-F", "covariance-G");
            r.push(("split-formula-B", t1.b().sub(t2.b())?));
            r
        }
        Suite::Compose => {
            let c = &inp.connections[0];
            if with_scale {
                let twice = gauge_transform(fa, &gauge_transform(fa, c, &inp.gauges[0])?, &inp.gauges[1])?;
                scale = vec![twice.a().clone(), twice.b().clone()];
            }
            pair_of(composition_residuals(fa, c, &inp.gauges[0], &inp.gauges[1])?, "compose-A", "compose-B")
        }
        Suite::CsDescent => {
            let c = &inp.connections[0];
            if with_scale {
                scale = vec![fa.d(&tg::cs_form(fa, c, p)?), tg::chern_weil_form(fa, c, p)?];
            }
            vec![("dQ-minus-chern-weil", tg::cs_descent_residual(fa, c, p)?)]
        }
        Suite::ChernWeil => {
            let (c0, c1) = (&inp.connections[0], &inp.connections[1]);
            if with_scale {
                scale = vec![tg::chern_weil_form(fa, c0, p)?, tg::chern_weil_form(fa, c1, p)?];
            }
            vec![("chern-weil", tg::chern_weil_residual(fa, c0, c1, p)?)]
        }
        Suite::Wzw => {
            let gd = &inp.gauges[0];
            let wz = tg::wzw_term(fa, gd, p)?;
            let slot = tg::wzw_slot_form(fa, &wz.fields.v, &wz.fields.w, ctx.slot_pairing()?)?;
            if with_scale {
                scale = vec![wz.identity_lhs.clone(), wz.identity_rhs.clone()];
            }
            vec![("wzw-term", wz.value), ("V^2n-W", slot)]
        }
        Suite::Tr1 | Suite::Descent => {
            let (c, gd) = (&inp.connections[0], &inp.gauges[0]);
            if with_scale {
                scale = vec![tg::cs_form(fa, &gauge_transform(fa, c, gd)?, p)?, tg::cs_form(fa, c, p)?];
            }
            if suite == Suite::Tr1 {
                vec![("tr1", tg::tr1_residual(fa, c, gd, p)?)]
            } else {
                vec![("descent-with-wzw", tg::descent_residual(fa, c, gd, p)?)]
            }
        }
        Suite::Eq1 => {
            let (c0, c1) = (&inp.connections[0], &inp.connections[1]);
            if with_scale {
                scale = vec![tg::cs_form(fa, c0, p)?, tg::cs_form(fa, c1, p)?];
            }
            vec![("eq1", tg::eq1_residual(fa, c0, c1, p)?)]
        }
        Suite::Gwzw => {
            let (c, gd) = (&inp.connections[0], &inp.gauges[0]);
            if with_scale {
                scale = vec![tg::gwzw_form(fa, c, gd, p)?];
            }
            vec![("gwzw-exactness", tg::gwzw_exactness_residual(fa, c, gd, p)?)]
        }
    };
    Ok(Check { residuals, scale })
}

/// Outcome of one instance.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceOutcome {
    pub instance: usize,
    pub seed: u64,
    pub passed: bool,
    /// Some reference term of the identity is nonzero, so the check is not vacuous.
    pub nontrivial: bool,
    /// Largest relative residual over the sample points (numeric mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip)]
    pub inputs: Option<Inputs>,
}

fn random_point(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Scalar> {
    (0..dim)
        .map(|_| Scalar::new(rng.gen_range(-4..=4), rng.gen_range(1..=3)))
        .collect()
}

fn describe(fa: &FormAlgebra, name: &str, w: &PolyForm) -> String {
    let mut text = fa.render(w);
    if text.chars().count() > 240 {
        text = text.chars().take(240).collect::<String>() + "…";
    }
    format!("{name} residual is nonzero ({} terms): {text}", w.size())
}

/// Runs one instance of a suite.
pub fn run_instance(ctx: &Context, suite: Suite, instance: usize) -> InstanceOutcome {
    let seed = instance_seed(ctx.cfg.seed, suite, instance);
    let inputs = gen_inputs(&ctx.fa, &ctx.cfg, suite, seed);
    let mut out =
        InstanceOutcome { instance, seed, passed: true, nontrivial: false, max_residual: None, reason: None, inputs: None };
    let result: Result<Option<String>> = match ctx.cfg.mode {
        Mode::Exact => evaluate(ctx, suite, &inputs, true).map(|chk| {
            out.nontrivial = chk.scale.iter().any(|w| !w.is_zero());
            chk.residuals
                .iter()
                .find(|(_, r)| !r.is_zero())
                .map(|(name, r)| describe(&ctx.fa, name, r))
        }),
        Mode::Numeric { tolerance, order } => (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ 0x5eed));
            let mut worst = 0.0f64;
            let mut reason = None;
            for k in 0..NUMERIC_POINTS {
                let point = random_point(ctx.fa.dim(), &mut rng);
                let shifted = inputs.shift(&ctx.fa, &point, order);
                let chk = evaluate(ctx, suite, &shifted, true)?;
                let scale = chk.scale.iter().map(PolyForm::constant_magnitude).fold(0.0, f64::max);
                out.nontrivial |= scale > 0.0;
                for (name, r) in &chk.residuals {
                    let abs = r.constant_magnitude();
                    let rel = if scale > 0.0 { abs / scale } else { abs };
                    worst = worst.max(rel);
                    if rel > tolerance && reason.is_none() {
                        let pt: Vec<String> = point.iter().map(Scalar::to_string).collect();
                        reason = Some(format!(
                            "{name} residual {rel:.3e} (relative to {scale:.3e}) exceeds tolerance at point {} ({})",
                            k,
                            pt.join(", ")
                        ));
                    }
                }
            }
            out.max_residual = Some(worst);
            Ok(reason)
        })(),
    };
    match result {
        Ok(None) => {}
        Ok(Some(reason)) => {
            out.passed = false;
            out.reason = Some(reason);
        }
        Err(e) => {
            out.passed = false;
            out.reason = Some(format!("error: {e}"));
        }
    }
    if !out.passed {
        out.inputs = Some(inputs);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct FailureRecord {
    pub instance: usize,
    pub seed: u64,
    pub reason: String,
    pub repro: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    /// Instances on which the identity had nonzero terms.
    pub nontrivial: usize,
    /// Set when the suite did not run because the fixture axioms failed.
    pub skipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    pub wall_time_s: f64,
    pub failures: Vec<FailureRecord>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        !self.skipped && self.failed == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub config: SuiteConfig,
    pub suites: Vec<SuiteReport>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::ok)
    }

    pub fn suite(&self, s: Suite) -> Option<&SuiteReport> {
        self.suites.iter().find(|r| r.suite == s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "fixture {} n={} dim={} mode={} seed={}",
            self.config.fixture,
            self.config.n,
            self.config.dim,
            self.config.mode.name(),
            self.config.seed
        )?;
        for r in &self.suites {
            let status = if r.skipped {
                "SKIP"
            } else if r.failed == 0 {
                "PASS"
            } else {
                "FAIL"
            };
            write!(
                f,
                "{status} {:<11} {}/{} passed  {} nontrivial  {:.2}s",
                r.suite.name(),
                r.passed,
                r.instances,
                r.nontrivial,
                r.wall_time_s
            )?;
            if let Some(m) = r.max_residual {
                write!(f, "  max residual {m:.3e}")?;
            }
            writeln!(f)?;
            for x in r.failures.iter().take(3) {
                writeln!(f, "    #{} seed {}: {}", x.instance, x.seed, x.reason)?;
                writeln!(f, "      repro: {}", x.repro)?;
            }
        }
        Ok(())
    }
}

/// Axiom checks for the fixture and pairing; one line per violated law.
pub fn axiom_failures(ctx: &Context) -> Result<Vec<String>> {
    let xm = ctx.fa.module();
    let mut out = Vec::new();
    for report in [
        validate_lie_algebra(xm.g())?,
        validate_lie_algebra(xm.h())?,
        validate_crossed_module(xm)?,
        validate_pairing(&ctx.pairing)?,
    ] {
        for v in &report.violations {
            out.push(format!("{}: {} at ({}) {}", report.subject, v.law, v.tuple.join(", "), v.detail));
        }
    }
    Ok(out)
}

fn dump_failure(ctx: &Context, suite: Suite, o: &InstanceOutcome) -> Option<String> {
    let dir = ctx.cfg.dump_dir.as_ref()?;
    let inputs = o.inputs.as_ref()?;
    let fa = &ctx.fa;
    let zero = TwoConnection::new(fa.zero(1, Space::G), fa.zero(2, Space::H)).ok()?;
    let mut items = Vec::new();
    let n = inputs.connections.len().max(inputs.gauges.len());
    for i in 0..n {
        let c = inputs.connections.get(i).unwrap_or(&zero);
        let text = fixture::instance_to_json(&ctx.cfg.fixture, fa, c, inputs.gauges.get(i)).ok()?;
        items.push(serde_json::from_str::<serde_json::Value>(&text).ok()?);
    }
    let doc = serde_json::json!({
        "suite": suite.name(),
        "instance": o.instance,
        "seed": o.seed,
        "reason": o.reason,
        "repro": ctx.cfg.repro_command(suite, o.instance),
        "inputs": items,
    });
    std::fs::create_dir_all(dir).ok()?;
    let path = dir.join(format!("{}-{}-{}.json", suite.name(), ctx.cfg.seed, o.instance));
    std::fs::write(&path, serde_json::to_string_pretty(&doc).ok()?).ok()?;
    Some(path.display().to_string())
}

fn run_suite(ctx: &Context, suite: Suite) -> SuiteReport {
    let start = Instant::now();
    let indices: Vec<usize> = match ctx.cfg.only_instance {
        Some(i) => vec![i],
        None => (0..ctx.cfg.instances).collect(),
    };
    let outcomes: Vec<InstanceOutcome> = indices.par_iter().map(|&i| run_instance(ctx, suite, i)).collect();
    let mut failures = Vec::new();
    for o in outcomes.iter().filter(|o| !o.passed) {
        failures.push(FailureRecord {
            instance: o.instance,
            seed: o.seed,
            reason: o.reason.clone().unwrap_or_default(),
            repro: ctx.cfg.repro_command(suite, o.instance),
            dump: dump_failure(ctx, suite, o),
        });
    }
    let max_residual = match ctx.cfg.mode {
        Mode::Exact => None,
        Mode::Numeric { .. } => Some(outcomes.iter().filter_map(|o| o.max_residual).fold(0.0, f64::max)),
    };
    let passed = outcomes.iter().filter(|o| o.passed).count();
    SuiteReport {
        suite,
        instances: outcomes.len(),
        passed,
        failed: outcomes.len() - passed,
        nontrivial: outcomes.iter().filter(|o| o.nontrivial).count(),
        skipped: false,
        max_residual,
        wall_time_s: start.elapsed().as_secs_f64(),
        failures,
    }
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.parse().map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer")))?;
        if n == 0 {
            return Err(Error::Config(format!("{WORKERS_ENV} must be a positive integer")));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Runs the configured suites. The fixture axioms are always checked first;
/// when they fail every other suite is reported as skipped.
pub fn run_suites(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let ctx = Context::new(cfg.clone())?;
    let pool = worker_pool()?;
    pool.install(|| {
        let start = Instant::now();
        let violations = axiom_failures(&ctx)?;
        let axioms = SuiteReport {
            suite: Suite::Axioms,
            instances: 1,
            passed: usize::from(violations.is_empty()),
            failed: usize::from(!violations.is_empty()),
            nontrivial: 1,
            skipped: false,
            max_residual: None,
            wall_time_s: start.elapsed().as_secs_f64(),
            failures: violations
                .iter()
                .map(|v| FailureRecord {
                    instance: 0,
                    seed: cfg.seed,
                    reason: v.clone(),
                    repro: format!("hgauge validate {}", cfg.fixture),
                    dump: None,
                })
                .collect(),
        };
        let valid = violations.is_empty();
        let mut suites = Vec::new();
        if cfg.suites.contains(&Suite::Axioms) || !valid {
            suites.push(axioms);
        }
        for &s in cfg.suites.iter().filter(|s| **s != Suite::Axioms) {
            if valid {
                suites.push(run_suite(&ctx, s));
            } else {
                suites.push(SuiteReport {
                    suite: s,
                    instances: 0,
                    passed: 0,
                    failed: 0,
                    nontrivial: 0,
                    skipped: true,
                    max_residual: None,
                    wall_time_s: 0.0,
                    failures: vec![],
                });
            }
        }
        Ok(VerificationReport { config: cfg.clone(), suites })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::PolyMatrix;

    fn ctx() -> Context {
        Context::new(SuiteConfig::default()).unwrap()
    }

    #[test]
    fn generation_is_deterministic() {
        let c = ctx();
        let a = gen_connection(&c.fa, &c.cfg, 7);
        assert_eq!(a, gen_connection(&c.fa, &c.cfg, 7));
        assert_ne!(a, gen_connection(&c.fa, &c.cfg, 8));
        assert_eq!(gen_gauge(&c.fa, &c.cfg, 3), gen_gauge(&c.fa, &c.cfg, 3));
    }

    #[test]
    fn degree_cap_zero_gives_constant_coefficients() {
        let cfg = SuiteConfig { degree_cap: 0, ..SuiteConfig::default() };
        let c = Context::new(cfg).unwrap();
        for seed in 0..10 {
            let conn = gen_connection(&c.fa, &c.cfg, seed);
            for w in [conn.a(), conn.b()] {
                for comp in w.components() {
                    assert!(comp.terms().all(|(_, p)| p.coord_total_degree() == 0));
                }
            }
        }
    }

    #[test]
    fn identity_only_draws_are_pure_phi() {
        let cfg = SuiteConfig { group_draws: vec![GroupDraw::Identity], ..SuiteConfig::default() };
        let c = Context::new(cfg).unwrap();
        for seed in 0..10 {
            let gd = gen_gauge(&c.fa, &c.cfg, seed);
            assert!(gd.g().is_identity());
            assert!(!gd.phi().is_zero());
        }
    }

    #[test]
    fn unipotent_draws_invert_exactly() {
        let cfg = SuiteConfig { group_draws: vec![GroupDraw::Unipotent], ..SuiteConfig::default() };
        let c = Context::new(cfg).unwrap();
        for seed in 0..10 {
            let g = gen_gauge(&c.fa, &c.cfg, seed).g().clone();
            assert_eq!(g.matrix().mul(g.inverse_matrix()), PolyMatrix::identity(2));
        }
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!(parse_suites("all").unwrap().len(), Suite::ALL.len());
        assert_eq!(parse_suites("eq1,bianchi").unwrap(), vec![Suite::Bianchi, Suite::Eq1]);
        assert!(parse_suites("nope").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SuiteConfig { dim: 0, ..SuiteConfig::default() }.validate().is_err());
        assert!(SuiteConfig { n: 0, ..SuiteConfig::default() }.validate().is_err());
        assert!(SuiteConfig { mode: Mode::numeric(0.0), ..SuiteConfig::default() }.validate().is_err());
    }

    #[test]
    fn instance_seeds_differ_by_suite_and_index() {
        let a = instance_seed(1, Suite::Bianchi, 0);
        assert_ne!(a, instance_seed(1, Suite::Bianchi, 1));
        assert_ne!(a, instance_seed(1, Suite::Eq1, 0));
        assert_ne!(a, instance_seed(2, Suite::Bianchi, 0));
    }
}
