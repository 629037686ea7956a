//! Staged construction of one coefficient stream whose partial sums meet a
//! schedule of (possibly conflicting) targets on outer compacts.
//!
//! Stage `t` starts from the materialized polynomial `P` (frozen through
//! `λ_{t-1}`), fits a correction `Q = (z_{i0} - c)^e · q` with `q` chosen so
//! that `P + Q` approximates the target on the outer block while `Q` stays
//! small on the inner block, appends `Q`, and picks `λ_t ∈ μ` at or beyond the
//! capture index of `P + Q`. Because the enumeration is graded and every term
//! of `Q` has total degree `>= e`, the new terms land after `λ_{t-1}`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{DomainProduct, ProductCompact};
use crate::mergelyan::{fit_with_scaling, glue_target, ApproxTask, FitReport, SweepStep};
use crate::multiindex::{capture_index, Enumeration, IndexSet};
use crate::poly::{CoefficientStream, Evaluator, Expansion, Poly, TermList, C64};
use crate::verify::{check_e_instance, check_f_instance, Centers, PredicateValue, Variant};

/// How far past a floor the index set is searched for a member.
pub const MU_SCAN_BOUND: u64 = 1 << 24;

/// Expansion-center mode of the certified class.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterMode {
    /// Centers vary over the sampled inner compact.
    #[default]
    Varying,
    /// One fixed center `ζ₀`.
    Fixed(Vec<[f64; 2]>),
}

/// One entry of the schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct StageRequest {
    /// `K`, with a factor outside the domain (`d` factors).
    pub outer: ProductCompact,
    /// Global polynomial in `(w, z)`.
    pub target: Poly,
    /// `M`, inside the domain (`d` factors).
    pub inner: ProductCompact,
    /// `L`, the parameter compact (`r` factors).
    pub parameter_set: ProductCompact,
    pub tolerance: f64,
    /// F-side sets; default to `(parameter_set, inner)`.
    pub f_side: Option<(ProductCompact, ProductCompact)>,
}

impl StageRequest {
    fn validate(&self, r: usize, d: usize) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("stage tolerance must be positive".into()));
        }
        if self.outer.dim() != d || self.inner.dim() != d || self.parameter_set.dim() != r {
            return Err(Error::DimensionMismatch { expected: d, got: self.outer.dim() });
        }
        if self.target.r() != r || self.target.d() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.target.d() });
        }
        if let Some((w, z)) = &self.f_side {
            if w.dim() != r || z.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: z.dim() });
            }
        }
        for f in self.outer.factors.iter().chain(&self.inner.factors).chain(&self.parameter_set.factors) {
            f.validate()?;
        }
        Ok(())
    }

    fn f_side_sets(&self) -> (ProductCompact, ProductCompact) {
        self.f_side.clone().unwrap_or_else(|| (self.parameter_set.clone(), self.inner.clone()))
    }
}

/// Knobs of the constructor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructOptions {
    /// Boundary spacing of the certificate grids.
    pub density: f64,
    /// Cap on the degree of the fitted quotient in the separating coordinate.
    pub degree_budget: u32,
    /// Step of the per-stage degree sweep.
    pub sweep_step: u32,
    /// Fit to this fraction of the stage tolerance, leaving room for the
    /// certificate grid.
    pub fit_margin: f64,
    pub fit_points: usize,
    pub verify_points: usize,
    pub seed: u64,
    /// Overrides the reference center in varying mode.
    pub reference_center: Option<Vec<[f64; 2]>>,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            density: 0.02,
            degree_budget: 60,
            sweep_step: 1,
            fit_margin: 0.8,
            fit_points: 400,
            verify_points: 800,
            seed: 0,
            reference_center: None,
        }
    }
}

/// Worst-case layout of one stage, computed before any fitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedStage {
    /// Minimal total `z`-degree of the stage's block.
    pub floor_degree: u64,
    /// Upper bound on the total `z`-degree after the stage.
    pub max_degree: u64,
    /// Member of `μ` at or beyond the capture index of that bound.
    pub lambda: u64,
}

#[derive(Clone, Debug)]
pub struct StagePlan {
    pub r: usize,
    pub d: usize,
    pub requests: Vec<StageRequest>,
    pub mu: IndexSet,
    pub enumeration: Enumeration,
    pub variant: Variant,
    pub center_mode: CenterMode,
    pub reference_center: Vec<C64>,
    pub options: ConstructOptions,
    pub planned: Vec<PlannedStage>,
}

/// Validates the schedule and lays out worst-case degree floors and indices.
///
/// Refuses non-graded enumerations, and index sets without a member past a
/// planned capture floor. When `domains` is given each outer compact must
/// have a factor outside the domain (outside its closure for the infinity
/// variant) and each inner compact must lie inside.
#[allow(clippy::too_many_arguments)]
pub fn plan_stages(
    r: usize,
    schedule: Vec<StageRequest>,
    mu: IndexSet,
    enumeration: Enumeration,
    variant: Variant,
    center_mode: CenterMode,
    domains: Option<&DomainProduct>,
    options: ConstructOptions,
) -> Result<StagePlan> {
    let d = enumeration.dim();
    if !enumeration.is_graded() {
        return Err(Error::NotGraded(enumeration.tag().into()));
    }
    if !(options.density > 0.0) || options.degree_budget == 0 || options.sweep_step == 0 {
        return Err(Error::InvalidArgument("density, degree budget and sweep step must be positive".into()));
    }
    for req in &schedule {
        req.validate(r, d)?;
        if let Some(dom) = domains {
            let h = options.density;
            if dom.disjoint_factor(&req.outer, variant.closure(), h)?.is_none() {
                return Err(Error::InvalidArgument("outer compact has no factor outside the domain".into()));
            }
            for (f, o) in req.inner.factors.iter().zip(&dom.factors) {
                let inside = f.sample_boundary(h)?.iter().all(|z| {
                    if variant.closure() {
                        o.depth(*z) >= -1e-12
                    } else {
                        o.contains_open(*z)
                    }
                });
                if !inside {
                    return Err(Error::InvalidArgument("inner compact leaves the domain".into()));
                }
            }
        }
    }
    let reference_center: Vec<C64> = match (&center_mode, &options.reference_center) {
        (CenterMode::Fixed(z), _) | (CenterMode::Varying, Some(z)) => z.iter().map(|p| C64::new(p[0], p[1])).collect(),
        (CenterMode::Varying, None) => {
            schedule.first().map(|q| q.inner.center()).unwrap_or_else(|| vec![C64::default(); d])
        }
    };
    if reference_center.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: reference_center.len() });
    }
    let mut planned = Vec::with_capacity(schedule.len());
    let mut prev_max: Option<u64> = None;
    for req in &schedule {
        let floor = prev_max.map_or(0, |m| m + 1);
        let others: u64 = req.target.degree_z().entries().iter().map(|&e| e as u64).sum();
        let max_degree = floor + options.degree_budget as u64 + others;
        let last = enumeration.first_index_of_degree(max_degree + 1)? - 1;
        let lambda = mu.next_at_or_after(last, MU_SCAN_BOUND).ok_or(Error::IndexSetExhausted { floor: last })?;
        planned.push(PlannedStage { floor_degree: floor, max_degree, lambda });
        prev_max = Some(max_degree);
    }
    Ok(StagePlan {
        r,
        d,
        requests: schedule,
        mu,
        enumeration,
        variant,
        center_mode,
        reference_center,
        options,
        planned,
    })
}

/// Per-stage line of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub tolerance: f64,
    pub lambda: u64,
    pub capture_index: u64,
    /// Coordinate (among the `z`) carrying the divisor.
    pub divisor_coord: usize,
    /// Exponent `e` of the divisor, i.e. the block's degree floor.
    pub floor_degree: u64,
    pub planned_floor_degree: u64,
    /// Smallest total `z`-degree among the block's terms.
    pub min_block_degree: Option<u64>,
    /// Total `z`-degree of the stream after the stage.
    pub max_degree: u64,
    pub e_side_error: f64,
    pub f_side_error: f64,
    /// E-side sup per operator label.
    pub derivative_errors: BTreeMap<String, f64>,
    /// F-side at this stage's index for the final stream (informational).
    pub f_side_final: Option<f64>,
    /// `sup |Q|` of the block over `parameter_set × inner` (informational).
    pub inner_drift: f64,
    pub fit_degree: u32,
    pub fit_condition: f64,
    pub fit_history: Vec<SweepStep>,
    pub e_points: usize,
    pub f_points: usize,
    pub centers: usize,
    pub outer: ProductCompact,
    pub inner: ProductCompact,
    pub parameter_set: ProductCompact,
    pub f_side_w: ProductCompact,
    pub f_side_z: ProductCompact,
    pub target: TermList,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Hashed part of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateBody {
    pub enumeration: String,
    pub mu: String,
    pub variant: String,
    pub center_mode: CenterMode,
    pub reference_center: Vec<[f64; 2]>,
    pub r: usize,
    pub d: usize,
    pub density: f64,
    pub seed: u64,
    /// How the sups were sampled; they are not true suprema.
    pub sampling: String,
    /// `Σ |a_k|` over the materialized stream, a crude growth indicator.
    pub coefficient_l1: f64,
    pub stages: Vec<StageRecord>,
    pub passed: bool,
}

impl CertificateBody {
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("certificate body serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// The recorded indices with repeats dropped.
    pub fn strict_lambdas(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.stages.iter().map(|s| s.lambda).collect();
        out.dedup();
        out
    }

    /// `stage,lambda,e_side_error,f_side_error,max_degree` lines with a header.
    pub fn errors_csv(&self) -> String {
        let mut s = String::from("stage,lambda,e_side_error,f_side_error,max_degree\n");
        for st in &self.stages {
            s.push_str(&format!(
                "{},{},{:e},{:e},{}\n",
                st.stage, st.lambda, st.e_side_error, st.f_side_error, st.max_degree
            ));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub body: CertificateBody,
    pub body_sha256: String,
    /// Seconds since the Unix epoch; outside the hashed body.
    pub generated_at: u64,
    /// Wall time per stage; outside the hashed body.
    pub stage_millis: Vec<u64>,
}

impl Certificate {
    pub fn seal(body: CertificateBody, stage_millis: Vec<u64>) -> Self {
        let generated_at =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Certificate { body_sha256: body.digest(), body, generated_at, stage_millis }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Output of [`run_construction`].
#[derive(Clone, Debug)]
pub struct Construction {
    pub stream: CoefficientStream,
    pub certificate: Certificate,
    pub fits: Vec<FitReport>,
}

impl Construction {
    pub fn passed(&self) -> bool {
        self.certificate.body.passed
    }
}

/// E- and F-side of a recorded stage, as both the constructor and the
/// verifier measure it.
pub fn measure_stage(
    stream: &CoefficientStream,
    st: &StageRecord,
    variant: Variant,
    center_mode: &CenterMode,
    density: f64,
) -> Result<(PredicateValue, PredicateValue)> {
    let (r, d) = (stream.r(), stream.d());
    let candidate = stream.partial_sum(st.lambda)?;
    let target = Expansion::from_global(Poly::from_term_list(&st.target, Some(r), Some(d))?);
    let centers = centers_for(center_mode, &st.inner);
    let e = check_e_instance(
        &candidate,
        &target,
        &centers,
        &st.parameter_set,
        &st.outer,
        variant.e_ops(r, d),
        stream.enumeration(),
        st.lambda,
        st.tolerance,
        density,
    )?;
    let f = check_f_instance(
        &candidate,
        &centers,
        &st.f_side_w,
        &st.f_side_z,
        variant.f_ops(r, d),
        stream.enumeration(),
        st.lambda,
        st.tolerance,
        density,
    )?;
    Ok((e, f))
}

fn centers_for(mode: &CenterMode, inner: &ProductCompact) -> Centers {
    match mode {
        CenterMode::Varying => Centers::Probe(inner.clone()),
        CenterMode::Fixed(z) => Centers::Fixed(z.iter().map(|p| C64::new(p[0], p[1])).collect()),
    }
}

fn stage_sweep(budget: u32, step: u32) -> Vec<u32> {
    let mut v: Vec<u32> = (1..).map(|k| k * step).take_while(|&x| x < budget).collect();
    v.push(budget);
    v
}

/// `sup |Q|` over a product grid of `(w, z)` boundary samples.
fn block_sup(q: &Expansion, w_set: &ProductCompact, z_set: &ProductCompact, h: f64) -> Result<f64> {
    let (wg, zg) = (w_set.sample(h)?, z_set.sample(h)?);
    let mut ev = Evaluator::new(&q.local);
    let mut worst: f64 = 0.0;
    for w in wg.points() {
        for z in zg.points() {
            let u: Vec<C64> = z.iter().zip(&q.center).map(|(a, c)| a - c).collect();
            worst = worst.max(ev.eval(w, &u).norm());
        }
    }
    Ok(worst)
}

struct StageOutcome {
    record: StageRecord,
    fit: FitReport,
}

/// Fits and appends one stage. The stream is extended even when the stage
/// fails, so the partial certificate describes the emitted coefficients.
pub fn build_stage(
    stream: &mut CoefficientStream,
    stage: usize,
    req: &StageRequest,
    plan: &StagePlan,
) -> Result<(StageRecord, FitReport)> {
    let out = build_stage_inner(stream, stage, req, plan)?;
    Ok((out.record, out.fit))
}

fn build_stage_inner(
    stream: &mut CoefficientStream,
    stage: usize,
    req: &StageRequest,
    plan: &StagePlan,
) -> Result<StageOutcome> {
    let (r, d) = (plan.r, plan.d);
    let opts = &plan.options;
    let c = stream.center().to_vec();
    let current = stream.materialized()?;
    let floor = match stream.frozen_through() {
        None => 0,
        Some(prev) => {
            let mut e = 0;
            while plan.enumeration.first_index_of_degree(e)? <= prev {
                e += 1;
            }
            e
        }
    };

    let target = Expansion::from_global(req.target.clone()).recenter(&c)?;
    let residual = Expansion { center: c.clone(), local: &target.local - &current.local };
    let zero = Expansion::zero(r, c.clone());
    let inner_block = req.parameter_set.times(&req.inner);
    let outer_block = req.parameter_set.times(&req.outer);
    let glued = glue_target(&zero, &residual, &inner_block, &outer_block, r)?;
    let i0 = glued.split_coord - r;
    let gap = req.outer.factors[i0]
        .sample_boundary(opts.density)?
        .iter()
        .map(|z| (z - c[i0]).norm())
        .fold(f64::INFINITY, f64::min);
    if floor > 0 && !(gap > 1e-9) {
        return Err(Error::DivisorVanishes(gap));
    }

    let mut task =
        ApproxTask::new(r, d, glued.pieces, glued.split_coord, opts.degree_budget, req.tolerance * opts.fit_margin);
    task.basis_center = c.clone();
    task.sweep = stage_sweep(opts.degree_budget, opts.sweep_step);
    task.derivative_orders = plan.variant.e_ops(r, d);
    task.divisor = (floor > 0).then_some((i0, floor as u32));
    task.fit_points = opts.fit_points;
    task.verify_points = opts.verify_points;
    task.seed = opts.seed.wrapping_add(stage as u64);
    let fit = fit_with_scaling(&task, true)?;

    let block = Expansion { center: c.clone(), local: fit.fitted.clone() };
    let updated = &current.local + &block.local;
    let capture = capture_index(&plan.enumeration, &updated.degree_z())?;
    let lambda = plan
        .mu
        .next_at_or_after(capture.max(stream.frozen_through().unwrap_or(0)), MU_SCAN_BOUND)
        .ok_or(Error::IndexSetExhausted { floor: capture })?;
    let min_block_degree = block.local.min_total_degree_z();
    if let (Some(m), Some(_)) = (min_block_degree, stream.frozen_through()) {
        // graded safety: the block must sit strictly after the frozen prefix
        assert!(m >= floor, "block degree {m} below floor {floor}");
    }
    stream.append_local(stage, &block.local, lambda)?;

    let (f_side_w, f_side_z) = req.f_side_sets();
    let mut record = StageRecord {
        stage,
        tolerance: req.tolerance,
        lambda,
        capture_index: capture,
        divisor_coord: i0,
        floor_degree: floor,
        planned_floor_degree: plan.planned.get(stage).map_or(floor, |p| p.floor_degree),
        min_block_degree,
        max_degree: updated.total_degree_z(),
        e_side_error: f64::NAN,
        f_side_error: f64::NAN,
        derivative_errors: BTreeMap::new(),
        f_side_final: None,
        inner_drift: block_sup(&block, &req.parameter_set, &req.inner, opts.density)?,
        fit_degree: fit.degree,
        fit_condition: fit.condition_estimate,
        fit_history: fit.residual_history.clone(),
        e_points: 0,
        f_points: 0,
        centers: 0,
        outer: req.outer.clone(),
        inner: req.inner.clone(),
        parameter_set: req.parameter_set.clone(),
        f_side_w,
        f_side_z,
        target: req.target.to_terms(),
        passed: false,
        failure: None,
    };
    let (e, f) = measure_stage(stream, &record, plan.variant, &plan.center_mode, opts.density)?;
    record.e_side_error = e.achieved;
    record.f_side_error = f.achieved;
    record.e_points = e.points;
    record.f_points = f.points;
    record.centers = e.centers.max(f.centers);
    let candidate = stream.partial_sum(lambda)?;
    let target_global = Expansion::from_global(req.target.clone());
    for op in plan.variant.e_ops(r, d) {
        let label = op.label();
        let v = check_e_instance(
            &candidate,
            &target_global,
            &centers_for(&plan.center_mode, &req.inner),
            &req.parameter_set,
            &req.outer,
            vec![op],
            &plan.enumeration,
            lambda,
            req.tolerance,
            opts.density,
        )?;
        record.derivative_errors.insert(label, v.achieved);
    }
    record.passed = e.pass && f.pass;
    if !record.passed {
        record.failure = Some(if !fit.passed {
            format!("fit reached {:e} at degree {} (tolerance {:e})", fit.max_error(), fit.degree, fit.tolerance)
        } else {
            format!("sampled errors e = {:e}, f = {:e} not below {:e}", e.achieved, f.achieved, req.tolerance)
        });
    }
    Ok(StageOutcome { record, fit })
}

/// Runs every stage in order, stopping at the first failure; the returned
/// certificate covers the stages that ran.
pub fn run_construction(plan: &StagePlan) -> Result<Construction> {
    let mut stream = CoefficientStream::new(plan.enumeration.clone(), plan.reference_center.clone(), plan.r)?;
    let mut records = Vec::new();
    let mut fits = Vec::new();
    let mut millis = Vec::new();
    let mut passed = true;
    for (t, req) in plan.requests.iter().enumerate() {
        let start = Instant::now();
        let out = build_stage_inner(&mut stream, t, req, plan)?;
        millis.push(start.elapsed().as_millis() as u64);
        log::info!(
            "stage {t}: lambda {} degree {} e {:e} f {:e} {}",
            out.record.lambda,
            out.record.max_degree,
            out.record.e_side_error,
            out.record.f_side_error,
            if out.record.passed { "pass" } else { "FAIL" }
        );
        let ok = out.record.passed;
        records.push(out.record);
        fits.push(out.fit);
        if !ok {
            passed = false;
            break;
        }
    }
    if stream.frozen_through().is_some() {
        let final_poly = stream.materialized()?;
        for st in &mut records {
            let centers = centers_for(&plan.center_mode, &st.inner);
            let v = check_f_instance(
                &final_poly,
                &centers,
                &st.f_side_w,
                &st.f_side_z,
                plan.variant.f_ops(plan.r, plan.d),
                &plan.enumeration,
                st.lambda,
                st.tolerance,
                plan.options.density,
            )?;
            st.f_side_final = Some(v.achieved);
        }
    }
    let coefficient_l1 = stream.materialized()?.local.l1_norm();
    let body = CertificateBody {
        enumeration: plan.enumeration.tag().to_string(),
        mu: plan.mu.tag(),
        variant: plan.variant.tag(),
        center_mode: plan.center_mode.clone(),
        reference_center: plan.reference_center.iter().map(|z| [z.re, z.im]).collect(),
        r: plan.r,
        d: plan.d,
        density: plan.options.density,
        seed: plan.options.seed,
        sampling: format!(
            "boundary spacing {} on each factor (distinguished boundary); {} expansion centers",
            plan.options.density,
            match plan.center_mode {
                CenterMode::Varying => "9-point probe per inner factor as",
                CenterMode::Fixed(_) => "one fixed point as",
            }
        ),
        coefficient_l1,
        stages: records,
        passed,
    };
    Ok(Construction { stream, certificate: Certificate::seal(body, millis), fits })
}
