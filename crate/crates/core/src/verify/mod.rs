//! Sampled evaluation of the E/F membership predicates on explicit
//! polynomial candidates, the slice holomorphy residual, and certificate
//! re-verification.

mod catalog;
mod slice;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use catalog::{Catalog, CatalogEntry, Rational, MAX_CATALOG_INDEX};
pub use slice::{slice_ad_residual, tabulate_slices, SliceTable};

use crate::error::{Error, Result};
use crate::geometry::{DomainProduct, ProductCompact, SampleGrid};
use crate::multiindex::{capture_index, family_fl, DiffOp, Enumeration};
use crate::poly::CoefficientStream;
use crate::poly::{Evaluator, Expansion, Poly, C64};
use crate::universal::{measure_stage, Certificate, StageRecord};

/// Default boundary spacing of predicate grids.
pub const DEFAULT_DENSITY: f64 = 0.05;

/// Which family of predicates is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Values only, open exhaustions.
    #[default]
    Plain,
    /// E-side max over all mixed partials of order `<= l`.
    Strong(u32),
    /// Closure exhaustions; F-side max over partials of order `<= l` on the
    /// truncations `{|w| <= l} × {|z| <= l}` of the closures.
    Infty(u32),
}

impl Variant {
    pub fn tag(&self) -> String {
        self.to_string()
    }

    pub fn closure(&self) -> bool {
        matches!(self, Variant::Infty(_))
    }

    pub fn level(&self) -> Option<u32> {
        match self {
            Variant::Plain => None,
            Variant::Strong(l) | Variant::Infty(l) => Some(*l),
        }
    }

    pub fn e_ops(&self, r: usize, d: usize) -> Vec<DiffOp> {
        match self {
            Variant::Strong(l) => family_fl(r, d, *l),
            _ => vec![DiffOp::identity(r, d)],
        }
    }

    pub fn f_ops(&self, r: usize, d: usize) -> Vec<DiffOp> {
        match self {
            Variant::Infty(l) => family_fl(r, d, *l),
            _ => vec![DiffOp::identity(r, d)],
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Plain => write!(f, "plain"),
            Variant::Strong(l) => write!(f, "strong:{l}"),
            Variant::Infty(l) => write!(f, "infty:{l}"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    /// `plain`, `strong[:l]`, `infty[:l]`; `l` defaults to 1.
    fn from_str(s: &str) -> Result<Self> {
        let (head, level) = match s.split_once(':') {
            Some((h, l)) => (h, Some(l.parse::<u32>().map_err(|_| Error::UnknownTag(s.to_string()))?)),
            None => (s, None),
        };
        let l = level.unwrap_or(1);
        if l == 0 {
            return Err(Error::InvalidArgument("derivative level must be at least 1".into()));
        }
        match (head, level) {
            ("plain", None) => Ok(Variant::Plain),
            ("strong", _) => Ok(Variant::Strong(l)),
            ("infty", _) => Ok(Variant::Infty(l)),
            _ => Err(Error::UnknownTag(s.to_string())),
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameter tuple of one E/F predicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateSpec {
    pub tau: u32,
    pub p: u32,
    pub m: u64,
    pub j: u64,
    pub s: u64,
    pub n: u64,
    #[serde(default)]
    pub variant: Variant,
    /// Fixed expansion center `ζ₀`; otherwise the center varies over `M_p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_center: Option<Vec<[f64; 2]>>,
}

impl PredicateSpec {
    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 || self.p == 0 || self.m == 0 || self.j == 0 || self.s == 0 {
            return Err(Error::InvalidArgument("predicate indices tau, p, m, j, s start at 1".into()));
        }
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        1.0 / self.s as f64
    }

    fn fixed(&self) -> Option<Vec<C64>> {
        self.fixed_center.as_ref().map(|v| v.iter().map(|p| C64::new(p[0], p[1])).collect())
    }
}

/// Everything a predicate index resolves against.
#[derive(Clone, Debug)]
pub struct Context {
    /// `G`, the parameter domains (`r` factors).
    pub parameter_domains: DomainProduct,
    /// `Ω`, the expansion domains (`d` factors).
    pub domains: DomainProduct,
    pub enumeration: Enumeration,
    /// Boundary spacing of the sampled compacts.
    pub density: f64,
    pub catalog: Catalog,
}

impl Context {
    pub fn new(parameter_domains: DomainProduct, domains: DomainProduct, enumeration: Enumeration) -> Result<Self> {
        if enumeration.dim() != domains.dim() {
            return Err(Error::DimensionMismatch { expected: domains.dim(), got: enumeration.dim() });
        }
        let catalog = Catalog::new(parameter_domains.dim(), domains.dim());
        Ok(Context { parameter_domains, domains, enumeration, density: DEFAULT_DENSITY, catalog })
    }

    pub fn r(&self) -> usize {
        self.parameter_domains.dim()
    }

    pub fn d(&self) -> usize {
        self.domains.dim()
    }
}

/// Where the expansion centers `ζ` come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Centers {
    /// The 9-point-per-factor probe of a compact.
    Probe(ProductCompact),
    Fixed(Vec<C64>),
}

impl Centers {
    pub fn grid(&self) -> Result<SampleGrid> {
        match self {
            Centers::Probe(k) => k.center_probe(),
            Centers::Fixed(z) => SampleGrid::from_points(std::slice::from_ref(z), 0.0, "fixed-center"),
        }
    }
}

/// Sampled sup of one predicate, with the grid it was measured on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateValue {
    pub achieved: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Points of the `(w, z)` grid.
    pub points: usize,
    /// Expansion centers probed (1 when the index captures the candidate).
    pub centers: usize,
    pub grid_density: f64,
    pub captured: bool,
}

/// Sampling of one predicate: centers, the `w` and `z` grids, the operators.
#[derive(Clone, Debug)]
pub struct Probe {
    pub centers: SampleGrid,
    pub w: SampleGrid,
    pub z: SampleGrid,
    pub ops: Vec<DiffOp>,
    pub density: f64,
}

impl Probe {
    pub fn new(
        centers: &Centers,
        w_set: &ProductCompact,
        z_set: &ProductCompact,
        ops: Vec<DiffOp>,
        density: f64,
    ) -> Result<Self> {
        Ok(Probe { centers: centers.grid()?, w: w_set.sample(density)?, z: z_set.sample(density)?, ops, density })
    }
}

/// `max_D sup |D(S_n(f, w, ζ)(z) - g(w, z))|` over the probe, where `g` is
/// `reference` or, if `None`, the candidate itself.
///
/// When `n` reaches the capture index of the candidate the partial sum is the
/// candidate for every `ζ`, so a single evaluation suffices.
pub fn sup_deviation(
    candidate: &Expansion,
    reference: Option<&Expansion>,
    probe: &Probe,
    enumeration: &Enumeration,
    n: u64,
) -> Result<(f64, bool)> {
    let (r, d) = (candidate.r(), candidate.d());
    if probe.w.dim != r || probe.z.dim != d || probe.centers.dim != d || enumeration.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: probe.z.dim });
    }
    if let Some(g) = reference {
        if g.r() != r || g.d() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.d() });
        }
    }
    if probe.w.is_empty() || probe.z.is_empty() || probe.centers.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let captured = n >= capture_index(enumeration, &candidate.local.degree_z())?;
    let mut diffs: Vec<Expansion> = Vec::new();
    if captured {
        diffs.push(match reference {
            None => Expansion::zero(r, candidate.center.clone()),
            Some(g) => Expansion {
                center: candidate.center.clone(),
                local: &candidate.local - &g.recenter(&candidate.center)?.local,
            },
        });
    } else {
        for zeta in probe.centers.points() {
            let here = candidate.recenter(zeta)?;
            let s = here.truncate(n, enumeration)?;
            let g = match reference {
                None => here.local,
                Some(g) => g.recenter(zeta)?.local,
            };
            diffs.push(Expansion { center: zeta.to_vec(), local: &s.local - &g });
        }
    }
    let mut worst: f64 = 0.0;
    let mut u = vec![C64::default(); d];
    for diff in &diffs {
        for op in &probe.ops {
            let dp = diff.local.differentiate(op);
            if dp.is_zero() {
                continue;
            }
            let mut ev = Evaluator::new(&dp);
            for w in probe.w.points() {
                for z in probe.z.points() {
                    for i in 0..d {
                        u[i] = z[i] - diff.center[i];
                    }
                    worst = worst.max(ev.eval(w, &u).norm());
                }
            }
        }
    }
    Ok((worst, captured))
}

fn value(achieved: f64, tolerance: f64, probe: &Probe, captured: bool) -> PredicateValue {
    PredicateValue {
        achieved,
        tolerance,
        pass: achieved < tolerance,
        points: probe.w.len() * probe.z.len(),
        centers: if captured { 1 } else { probe.centers.len() },
        grid_density: probe.density,
        captured,
    }
}

/// E-side on explicit sets: `S_n` of the candidate against `target` on `w_set × z_set`.
#[allow(clippy::too_many_arguments)]
pub fn check_e_instance(
    candidate: &Expansion,
    target: &Expansion,
    centers: &Centers,
    w_set: &ProductCompact,
    z_set: &ProductCompact,
    ops: Vec<DiffOp>,
    enumeration: &Enumeration,
    n: u64,
    tolerance: f64,
    density: f64,
) -> Result<PredicateValue> {
    let probe = Probe::new(centers, w_set, z_set, ops, density)?;
    let (sup, captured) = sup_deviation(candidate, Some(target), &probe, enumeration, n)?;
    Ok(value(sup, tolerance, &probe, captured))
}

/// F-side on explicit sets: `S_n` of the candidate against itself.
#[allow(clippy::too_many_arguments)]
pub fn check_f_instance(
    candidate: &Expansion,
    centers: &Centers,
    w_set: &ProductCompact,
    z_set: &ProductCompact,
    ops: Vec<DiffOp>,
    enumeration: &Enumeration,
    n: u64,
    tolerance: f64,
    density: f64,
) -> Result<PredicateValue> {
    let probe = Probe::new(centers, w_set, z_set, ops, density)?;
    let (sup, captured) = sup_deviation(candidate, None, &probe, enumeration, n)?;
    Ok(value(sup, tolerance, &probe, captured))
}

/// The compacts an index tuple names.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedSets {
    /// `F_τ` (E-side `w` set, and F-side outside the infinity variant).
    pub f_tau: ProductCompact,
    /// `M_p`: the center set, and the plain F-side `z` set.
    pub m_p: ProductCompact,
    pub t_m: ProductCompact,
    /// F-side sets of the infinity variant: closure truncations at level `l`.
    pub f_side_w: ProductCompact,
    pub f_side_z: ProductCompact,
}

pub fn resolve_sets(spec: &PredicateSpec, ctx: &Context) -> Result<ResolvedSets> {
    spec.validate()?;
    let closure = spec.variant.closure();
    let f_tau = ctx.parameter_domains.exhaustion(spec.tau, closure)?;
    let m_p = ctx.domains.exhaustion(spec.p, closure)?;
    let t_m = ctx.domains.enumerate_tm(spec.m, closure)?;
    let (f_side_w, f_side_z) = match spec.variant {
        Variant::Infty(l) => (ctx.parameter_domains.exhaustion(l, true)?, ctx.domains.exhaustion(l, true)?),
        _ => (f_tau.clone(), m_p.clone()),
    };
    Ok(ResolvedSets { f_tau, m_p, t_m, f_side_w, f_side_z })
}

fn centers_for(spec: &PredicateSpec, sets: &ResolvedSets, d: usize) -> Result<Centers> {
    match spec.fixed() {
        Some(z) if z.len() != d => Err(Error::DimensionMismatch { expected: d, got: z.len() }),
        Some(z) => Ok(Centers::Fixed(z)),
        None => Ok(Centers::Probe(sets.m_p.clone())),
    }
}

fn check_dims(f: &Poly, ctx: &Context) -> Result<()> {
    if f.r() != ctx.r() || f.d() != ctx.d() {
        return Err(Error::DimensionMismatch { expected: ctx.d(), got: f.d() });
    }
    Ok(())
}

/// `sup |D(S_n(f, w, ζ)(z) - f_j(w, z))| < 1/s` over `ζ ∈ M_p` (or `ζ₀`),
/// `w ∈ F_τ`, `z ∈ T_m`, with `D` ranging over the variant's E-side operators.
pub fn check_e(f: &Poly, spec: &PredicateSpec, ctx: &Context) -> Result<PredicateValue> {
    check_dims(f, ctx)?;
    let sets = resolve_sets(spec, ctx)?;
    let target = Expansion::from_global(ctx.catalog.resolve(spec.j)?);
    check_e_instance(
        &Expansion::from_global(f.clone()),
        &target,
        &centers_for(spec, &sets, ctx.d())?,
        &sets.f_tau,
        &sets.t_m,
        spec.variant.e_ops(ctx.r(), ctx.d()),
        &ctx.enumeration,
        spec.n,
        spec.tolerance(),
        ctx.density,
    )
}

/// `sup |D(S_n(f, w, ζ)(z) - f(w, z))| < 1/s`; plain and strong variants use
/// `w ∈ F_τ`, `z ∈ M_p`, the infinity variant the closure truncations and all
/// partials of order `<= l`.
pub fn check_f(f: &Poly, spec: &PredicateSpec, ctx: &Context) -> Result<PredicateValue> {
    check_dims(f, ctx)?;
    let sets = resolve_sets(spec, ctx)?;
    check_f_instance(
        &Expansion::from_global(f.clone()),
        &centers_for(spec, &sets, ctx.d())?,
        &sets.f_side_w,
        &sets.f_side_z,
        spec.variant.f_ops(ctx.r(), ctx.d()),
        &ctx.enumeration,
        spec.n,
        spec.tolerance(),
        ctx.density,
    )
}

/// One line of a predicates report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateRecord {
    pub spec: PredicateSpec,
    pub e: PredicateValue,
    pub f: PredicateValue,
}

pub fn check_batch(f: &Poly, specs: &[PredicateSpec], ctx: &Context) -> Result<Vec<PredicateRecord>> {
    specs
        .iter()
        .map(|spec| Ok(PredicateRecord { spec: spec.clone(), e: check_e(f, spec, ctx)?, f: check_f(f, spec, ctx)? }))
        .collect()
}

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub stages_checked: usize,
    pub issues: Vec<String>,
}

/// Largest disagreement tolerated between recorded and recomputed sups.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-12;

/// Recomputes every recorded predicate from the stream and the geometry stored
/// in the certificate. Refuses (with an error) artifacts that disagree on the
/// enumeration or the expansion center.
pub fn verify_certificate(stream: &CoefficientStream, cert: &Certificate) -> Result<VerifyReport> {
    let body = &cert.body;
    if body.enumeration != stream.enumeration().tag() {
        return Err(Error::Refused(format!(
            "certificate enumeration {} but stream uses {}",
            body.enumeration,
            stream.enumeration().tag()
        )));
    }
    if !body.stages.is_empty() {
        let center: Vec<[f64; 2]> = stream.center().iter().map(|c| [c.re, c.im]).collect();
        if center != body.reference_center || body.r != stream.r() || body.d != stream.d() {
            return Err(Error::Refused("certificate center or dimensions differ from the stream".into()));
        }
    }
    let mut report = VerifyReport { ok: true, stages_checked: 0, issues: Vec::new() };
    if cert.body_sha256 != body.digest() {
        report.issues.push("body hash mismatch".into());
    }
    let mu = crate::multiindex::IndexSet::from_tag(&body.mu)?;
    let mut last_lambda = 0;
    for st in &body.stages {
        report.stages_checked += 1;
        if !mu.contains(st.lambda) {
            report.issues.push(format!("stage {}: lambda {} not in {}", st.stage, st.lambda, body.mu));
        }
        if st.lambda < last_lambda {
            report.issues.push(format!("stage {}: lambda decreases", st.stage));
        }
        last_lambda = st.lambda;
        match recompute_stage(stream, cert, st) {
            Ok((e, f)) => {
                compare(&mut report, st.stage, "e_side", e.achieved, st.e_side_error, st.tolerance);
                compare(&mut report, st.stage, "f_side", f.achieved, st.f_side_error, st.tolerance);
            }
            Err(err) => report.issues.push(format!("stage {}: {err}", st.stage)),
        }
        if !st.passed {
            report.issues.push(format!("stage {} recorded as failed", st.stage));
        }
    }
    report.ok = report.issues.is_empty();
    Ok(report)
}

fn compare(report: &mut VerifyReport, stage: usize, what: &str, got: f64, recorded: f64, tolerance: f64) {
    if !((got - recorded).abs() <= RECOMPUTE_TOLERANCE) {
        report.issues.push(format!("stage {stage}: {what} recomputed {got:e}, recorded {recorded:e}"));
    }
    if !(got < tolerance) {
        report.issues.push(format!("stage {stage}: {what} {got:e} not below tolerance {tolerance:e}"));
    }
}

/// E- and F-side values of one recorded stage, measured exactly as the
/// constructor measures them.
pub fn recompute_stage(
    stream: &CoefficientStream,
    cert: &Certificate,
    st: &StageRecord,
) -> Result<(PredicateValue, PredicateValue)> {
    let variant: Variant = cert.body.variant.parse()?;
    measure_stage(stream, st, variant, &cert.body.center_mode, cert.body.density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, PlanarCompact};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn disk_ctx(r: usize) -> Context {
        let g = DomainProduct::new(vec![Domain::unit_disk(); r]);
        let o = DomainProduct::new(vec![Domain::unit_disk()]);
        Context::new(g, o, Enumeration::graded_lex(1)).unwrap()
    }

    fn spec(j: u64, s: u64, n: u64) -> PredicateSpec {
        PredicateSpec { tau: 1, p: 1, m: 1, j, s, n, variant: Variant::Plain, fixed_center: None }
    }

    #[test]
    fn variant_tags() {
        for v in [Variant::Plain, Variant::Strong(1), Variant::Infty(3)] {
            assert_eq!(v.tag().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("strong".parse::<Variant>().unwrap(), Variant::Strong(1));
        assert!("strong:0".parse::<Variant>().is_err());
        assert!("plain:2".parse::<Variant>().is_err());
        assert_eq!(serde_json::to_string(&Variant::Infty(2)).unwrap(), "\"infty:2\"");
    }

    #[test]
    fn candidate_equal_to_target_passes() {
        let ctx = disk_ctx(0);
        for j in [3, 17, 250, 4000] {
            let f = ctx.catalog.resolve(j).unwrap();
            let v = check_e(&f, &spec(j, 1_000_000_000, 10_000), &ctx).unwrap();
            assert!(v.achieved <= 1e-10 && v.pass, "j = {j}: {v:?}");
            assert!(v.captured);
        }
    }

    #[test]
    fn zero_against_one() {
        let ctx = disk_ctx(0);
        let f = Poly::zero(0, 1);
        let v = check_e(&f, &spec(3, 2, 0), &ctx).unwrap();
        assert_eq!(v.achieved, 1.0);
        assert!(!v.pass);
    }

    #[test]
    fn f_side_of_z_squared() {
        let ctx = disk_ctx(0);
        let z = Poly::z_var(0, 1, 0);
        let f = &z * &z;
        let mut sp = spec(1, 4, 1);
        sp.fixed_center = Some(vec![[0.0, 0.0]]);
        let v = check_f(&f, &sp, &ctx).unwrap();
        assert!((v.achieved - 0.25).abs() < 1e-15, "{v:?}");
        assert!(!v.pass);
        sp.s = 3;
        assert!(check_f(&f, &sp, &ctx).unwrap().pass);
        sp.s = 5;
        assert!(!check_f(&f, &sp, &ctx).unwrap().pass);
        // captured: exact for every center
        sp.fixed_center = None;
        sp.n = 2;
        assert_eq!(check_f(&f, &sp, &ctx).unwrap().achieved, 0.0);
        sp.variant = Variant::Infty(1);
        assert_eq!(check_f(&f, &sp, &ctx).unwrap().achieved, 0.0);
    }

    #[test]
    fn varying_center_sees_more_than_fixed() {
        // S_1 about ζ misses -(z - ζ)²; over ζ, z ∈ {|z| <= 1/2} this reaches 1
        let ctx = disk_ctx(0);
        let z = Poly::z_var(0, 1, 0);
        let f = &z * &z;
        let v = check_f(&f, &spec(1, 4, 1), &ctx).unwrap();
        assert!((v.achieved - 1.0).abs() < 1e-12, "{v:?}");
        assert_eq!(v.centers, 9);
    }

    #[test]
    fn strong_identity_only_matches_plain() {
        let ctx = disk_ctx(1);
        let f = &Poly::w_var(1, 1, 0) * &Poly::z_var(1, 1, 0);
        let sets = resolve_sets(&spec(9, 2, 0), &ctx).unwrap();
        let target = Expansion::from_global(ctx.catalog.resolve(9).unwrap());
        let cand = Expansion::from_global(f.clone());
        let centers = Centers::Probe(sets.m_p.clone());
        let run = |ops: Vec<DiffOp>| {
            check_e_instance(
                &cand,
                &target,
                &centers,
                &sets.f_tau,
                &sets.t_m,
                ops,
                &ctx.enumeration,
                0,
                0.5,
                ctx.density,
            )
            .unwrap()
        };
        let plain = check_e(&f, &spec(9, 2, 0), &ctx).unwrap();
        assert_eq!(run(vec![DiffOp::identity(1, 1)]), plain);
        let strong = run(family_fl(1, 1, 1));
        assert!(strong.achieved >= plain.achieved);
    }

    #[test]
    fn fixed_center_on_singleton() {
        let z = Poly::z_var(0, 1, 0);
        let f = &(&z * &z) + &z;
        let cand = Expansion::from_global(f);
        let zeta0 = vec![C64::new(0.1, 0.2)];
        let single = ProductCompact::new(vec![PlanarCompact::disk(zeta0[0], 0.0)]);
        let z_set = ProductCompact::new(vec![PlanarCompact::disk(c(0.0), 0.5)]);
        let e = Enumeration::graded_lex(1);
        let run = |centers: Centers| {
            check_f_instance(
                &cand,
                &centers,
                &ProductCompact::empty(),
                &z_set,
                vec![DiffOp::identity(0, 1)],
                &e,
                1,
                0.5,
                0.05,
            )
            .unwrap()
        };
        let a = run(Centers::Probe(single));
        let b = run(Centers::Fixed(zeta0));
        assert_eq!(a.achieved, b.achieved);
    }

    #[test]
    fn bad_indices() {
        let ctx = disk_ctx(0);
        let f = Poly::zero(0, 1);
        assert!(check_e(&f, &spec(0, 1, 0), &ctx).is_err());
        assert!(matches!(check_e(&f, &spec(MAX_CATALOG_INDEX + 1, 1, 0), &ctx), Err(Error::CatalogIndex(_))));
        assert!(check_e(&Poly::zero(1, 1), &spec(1, 1, 0), &ctx).is_err());
    }
}
