//! Polynomial least-squares approximation on products of planar compacts,
//! with glued piecewise targets and derivative matching.
//!
//! Coordinates are ordered `(w_1..w_r, z_1..z_d)`. Fitted polynomials are
//! written in powers of `z - basis_center` and of `w` itself, which is the
//! layout a [`crate::poly::CoefficientStream`] stores.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sampled_distance, PlanarCompact, ProductCompact, SampleGrid};
use crate::multiindex::{DiffOp, MultiIndex};
use crate::poly::{Evaluator, Expansion, Monomial, Poly, TermList, C64};

/// Relative singular-value cutoff of the regularized solve.
pub const SVD_CUTOFF: f64 = 1e-12;

/// Degrees tried by a sweep when none are given.
pub fn default_sweep(budget: u32) -> Vec<u32> {
    let mut out: Vec<u32> = [10, 20, 40].into_iter().filter(|&d| d < budget).collect();
    let mut d = 60;
    while d < budget {
        out.push(d);
        d += 20;
    }
    out.push(budget);
    out.dedup();
    out
}

/// One support block and the target on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    /// `r + d` factors.
    pub support: ProductCompact,
    pub target: Expansion,
}

#[derive(Clone, Debug)]
pub struct ApproxTask {
    pub r: usize,
    pub d: usize,
    pub pieces: Vec<Piece>,
    /// Per-coordinate degree caps of the fitted quotient, over `r + d` coordinates.
    pub degree_budget: Vec<u32>,
    /// Coordinate (in `r + d` indexing) whose degree the sweep raises.
    pub sweep_coord: usize,
    pub sweep: Vec<u32>,
    pub stop_at_first_pass: bool,
    pub derivative_orders: Vec<DiffOp>,
    pub tolerance: f64,
    /// Expansion center in `z`; `w` is never re-centered.
    pub basis_center: Vec<C64>,
    /// Fitted polynomial is `(z_i - c_i)^e · q` for `Some((i, e))`.
    pub divisor: Option<(usize, u32)>,
    /// Boundary points per curve on the swept factor for fitting.
    pub fit_points: usize,
    /// Same for the independent verification grid.
    pub verify_points: usize,
    pub max_rows: usize,
    pub seed: u64,
    pub max_condition: Option<f64>,
}

impl ApproxTask {
    /// Task with default densities, a degree sweep on `sweep_coord`, and the
    /// basis centered in the joint bounding box of the supports.
    pub fn new(r: usize, d: usize, pieces: Vec<Piece>, sweep_coord: usize, budget: u32, tolerance: f64) -> Self {
        let mut degree_budget = vec![0; r + d];
        for p in &pieces {
            let local = &p.target.local;
            for (i, &e) in local.degree_w().entries().iter().chain(local.degree_z().entries()).enumerate() {
                degree_budget[i] = degree_budget[i].max(e);
            }
        }
        degree_budget[sweep_coord] = budget;
        // monomials about the middle of the support stay far better conditioned
        let basis_center = (0..d)
            .map(|i| {
                let sets: Vec<&PlanarCompact> = pieces.iter().map(|p| &p.support.factors[r + i]).collect();
                if sets.is_empty() {
                    C64::default()
                } else {
                    enclosing_disk(&sets).center()
                }
            })
            .collect();
        ApproxTask {
            r,
            d,
            pieces,
            degree_budget,
            sweep_coord,
            sweep: default_sweep(budget),
            stop_at_first_pass: true,
            derivative_orders: vec![DiffOp::identity(r, d)],
            tolerance,
            basis_center,
            divisor: None,
            fit_points: 400,
            verify_points: 800,
            max_rows: 24_000,
            seed: 0,
            max_condition: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.r + self.d;
        if self.degree_budget.len() != n || self.sweep_coord >= n || self.basis_center.len() != self.d {
            return Err(Error::DimensionMismatch { expected: n, got: self.degree_budget.len() });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if self.pieces.is_empty() {
            return Err(Error::InvalidArgument("approximation task without pieces".into()));
        }
        for p in &self.pieces {
            if p.support.dim() != n || p.target.r() != self.r || p.target.d() != self.d {
                return Err(Error::DimensionMismatch { expected: n, got: p.support.dim() });
            }
        }
        for (a, pa) in self.pieces.iter().enumerate() {
            for pb in &self.pieces[a + 1..] {
                let separated = pa.support.factors.iter().zip(&pb.support.factors).any(|(fa, fb)| {
                    let h = fa.diameter().min(fb.diameter()).max(1e-6) / 200.0;
                    sampled_distance(fa, fb, h).map(|x| x > 0.0).unwrap_or(false)
                });
                if !separated {
                    return Err(Error::OverlappingPieces);
                }
            }
        }
        if let Some((i, _)) = self.divisor {
            if i >= self.d {
                return Err(Error::DimensionMismatch { expected: self.d, got: i });
            }
        }
        Ok(())
    }

    /// Every operator the recurrences need: the requested ones closed under
    /// lowering any order by one.
    fn operator_closure(&self) -> Vec<DiffOp> {
        let mut set: BTreeMap<Vec<u32>, DiffOp> = BTreeMap::new();
        let mut stack: Vec<DiffOp> = self.derivative_orders.clone();
        stack.push(DiffOp::identity(self.r, self.d));
        while let Some(op) = stack.pop() {
            let ex = op.exponents();
            if set.contains_key(ex.entries()) {
                continue;
            }
            for k in 0..ex.dim() {
                if ex[k] > 0 {
                    let mut lower = ex.entries().to_vec();
                    lower[k] -= 1;
                    stack.push(DiffOp::from_exponents(self.r, &MultiIndex::new(lower)));
                }
            }
            set.insert(ex.entries().to_vec(), op);
        }
        set.into_values().collect()
    }
}

/// Outcome of one degree in a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub degree: u32,
    /// Error of the fit at exactly this degree.
    pub max_error: f64,
    /// Smallest error over this and all earlier degrees of the sweep, i.e.
    /// the best achievable with this degree as the budget.
    pub best_error: f64,
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    /// In powers of `z - basis_center`.
    pub fitted: Poly,
    pub basis_center: Vec<C64>,
    /// Sup error per operator label on the verification grid.
    pub achieved_errors: BTreeMap<String, f64>,
    /// Same on the fitting grid.
    pub fit_grid_errors: BTreeMap<String, f64>,
    pub residual_history: Vec<SweepStep>,
    pub condition_estimate: f64,
    pub degree: u32,
    pub tolerance: f64,
    pub passed: bool,
    pub fit_rows: usize,
    pub verify_rows: usize,
    pub orthogonalized: bool,
}

impl FitReport {
    pub fn max_error(&self) -> f64 {
        self.achieved_errors.values().copied().fold(0.0, f64::max)
    }

    /// `Err(BudgetExhausted)` unless every achieved error is below tolerance.
    pub fn check(&self) -> Result<&FitReport> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::BudgetExhausted { best_error: self.max_error(), tolerance: self.tolerance })
        }
    }

    pub fn to_doc(&self) -> FitReportDoc {
        FitReportDoc {
            fitted: self.fitted.to_terms(),
            basis_center: self.basis_center.iter().map(|c| [c.re, c.im]).collect(),
            achieved_errors: self.achieved_errors.clone(),
            fit_grid_errors: self.fit_grid_errors.clone(),
            residual_history: self.residual_history.clone(),
            condition_estimate: self.condition_estimate,
            degree: self.degree,
            tolerance: self.tolerance,
            passed: self.passed,
            fit_rows: self.fit_rows,
            verify_rows: self.verify_rows,
            orthogonalized: self.orthogonalized,
        }
    }

    /// `degree,max_error,best_error,condition` lines with a header.
    pub fn history_csv(&self) -> String {
        let mut s = String::from("degree,max_error,best_error,condition\n");
        for step in &self.residual_history {
            s.push_str(&format!("{},{:e},{:e},{:e}\n", step.degree, step.max_error, step.best_error, step.condition));
        }
        s
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitReportDoc {
    pub fitted: TermList,
    pub basis_center: Vec<[f64; 2]>,
    pub achieved_errors: BTreeMap<String, f64>,
    pub fit_grid_errors: BTreeMap<String, f64>,
    pub residual_history: Vec<SweepStep>,
    pub condition_estimate: f64,
    pub degree: u32,
    pub tolerance: f64,
    pub passed: bool,
    pub fit_rows: usize,
    pub verify_rows: usize,
    pub orthogonalized: bool,
}

/// Pieces of a glued target: `g` on the inner block, `f` on the outer block.
#[derive(Clone, Debug, PartialEq)]
pub struct GluedTarget {
    pub pieces: Vec<Piece>,
    /// Separating coordinate in `r + d` indexing.
    pub split_coord: usize,
}

/// Builds the two-piece target. The blocks must be separated in some `z`
/// factor; every other factor where they differ is replaced on both sides by
/// a common enclosing disk.
pub fn glue_target(
    g: &Expansion,
    f: &Expansion,
    inner: &ProductCompact,
    outer: &ProductCompact,
    r: usize,
) -> Result<GluedTarget> {
    if inner.dim() != outer.dim() || inner.dim() < r {
        return Err(Error::DimensionMismatch { expected: inner.dim(), got: outer.dim() });
    }
    let mut split = None;
    for i in r..inner.dim() {
        let (a, b) = (&inner.factors[i], &outer.factors[i]);
        let h = a.diameter().min(b.diameter()).max(1e-6) / 400.0;
        if sampled_distance(a, b, h)? > 0.0 {
            split = Some(i);
            break;
        }
    }
    let split = split.ok_or(Error::OverlappingPieces)?;
    let mut inner_f = inner.factors.clone();
    let mut outer_f = outer.factors.clone();
    for i in 0..inner.dim() {
        if i == split || inner.factors[i] == outer.factors[i] {
            continue;
        }
        let ball = enclosing_disk(&[&inner.factors[i], &outer.factors[i]]);
        inner_f[i] = ball.clone();
        outer_f[i] = ball;
    }
    Ok(GluedTarget {
        pieces: vec![
            Piece { support: ProductCompact::new(inner_f), target: g.clone() },
            Piece { support: ProductCompact::new(outer_f), target: f.clone() },
        ],
        split_coord: split,
    })
}

/// A closed disk containing all the given sets (about their joint bounding-box center).
pub fn enclosing_disk(sets: &[&PlanarCompact]) -> PlanarCompact {
    let (mut lo, mut hi) = (C64::new(f64::INFINITY, f64::INFINITY), C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for s in sets {
        let (a, b) = s.bounding_box();
        lo = C64::new(lo.re.min(a.re), lo.im.min(a.im));
        hi = C64::new(hi.re.max(b.re), hi.im.max(b.im));
    }
    let center = (lo + hi) / 2.0;
    PlanarCompact::disk(center, (hi - lo).norm() / 2.0)
}

/// Raw column-scaled monomial least squares.
pub fn fit(task: &ApproxTask) -> Result<FitReport> {
    fit_with_scaling(task, false)
}

/// Least squares over the monomial box; with `orthogonalize` the columns come
/// from an Arnoldi recurrence on the fitting grid instead of raw monomials.
pub fn fit_with_scaling(task: &ApproxTask, orthogonalize: bool) -> Result<FitReport> {
    task.validate()?;
    let ops = task.operator_closure();
    let requested: Vec<DiffOp> = {
        let mut v = task.derivative_orders.clone();
        if v.is_empty() {
            v.push(DiffOp::identity(task.r, task.d));
        }
        v
    };
    let mut rng = ChaCha8Rng::seed_from_u64(task.seed);
    let phase: f64 = rng.gen_range(0.1..0.9);

    let mut history = Vec::new();
    let mut best: Option<FitReport> = None;
    let mut sweep = task.sweep.clone();
    if sweep.is_empty() {
        sweep.push(task.degree_budget[task.sweep_coord]);
    }
    for &deg in &sweep {
        let mut budget = task.degree_budget.clone();
        budget[task.sweep_coord] = deg.min(task.degree_budget[task.sweep_coord]);
        let fit_grids = build_grids(task, &budget, task.fit_points, 1, 0.0)?;
        let verify_grids = build_grids(task, &budget, task.verify_points, 2, phase)?;
        let (fitted, condition) = solve(task, &budget, &ops, &requested, &fit_grids, orthogonalize)?;
        if let Some(limit) = task.max_condition {
            if condition > limit {
                return Err(Error::IllConditioned(condition));
            }
        }
        let achieved = measure(task, &fitted, &requested, &verify_grids);
        let on_fit = measure(task, &fitted, &requested, &fit_grids);
        let max_error = achieved.values().copied().fold(0.0, f64::max);
        let best_error = history.last().map_or(max_error, |s: &SweepStep| s.best_error.min(max_error));
        history.push(SweepStep { degree: budget[task.sweep_coord], max_error, best_error, condition });
        log::debug!("fit degree {} error {:e} condition {:e}", budget[task.sweep_coord], max_error, condition);
        let passed = max_error < task.tolerance;
        let report = FitReport {
            fitted,
            basis_center: task.basis_center.clone(),
            achieved_errors: achieved,
            fit_grid_errors: on_fit,
            residual_history: Vec::new(),
            condition_estimate: condition,
            degree: budget[task.sweep_coord],
            tolerance: task.tolerance,
            passed,
            fit_rows: fit_grids.iter().map(|g| g.len()).sum(),
            verify_rows: verify_grids.iter().map(|g| g.len()).sum(),
            orthogonalized: orthogonalize,
        };
        let better = best.as_ref().is_none_or(|b| !b.passed && (passed || max_error < b.max_error()));
        if better {
            best = Some(report);
        }
        if passed && task.stop_at_first_pass {
            break;
        }
    }
    let mut report = best.expect("sweep is nonempty");
    report.residual_history = history;
    Ok(report)
}

/// Per-piece product grids. The swept factor gets `points` samples; other
/// factors get enough to pin down their (fixed) degree, scaled by `mult`.
fn build_grids(task: &ApproxTask, budget: &[u32], points: usize, mult: usize, phase: f64) -> Result<Vec<SampleGrid>> {
    let mut out = Vec::with_capacity(task.pieces.len());
    for piece in &task.pieces {
        let mut counts: Vec<usize> = (0..budget.len()).map(|k| mult * (4 * (budget[k] as usize + 1)).max(8)).collect();
        counts[task.sweep_coord] = points.max(2 * budget[task.sweep_coord] as usize + 2);
        let others: usize =
            counts.iter().enumerate().filter(|(k, _)| *k != task.sweep_coord).map(|(_, c)| *c).product();
        let cap = (task.max_rows * mult / task.pieces.len()).max(1);
        if counts[task.sweep_coord] * others > cap {
            counts[task.sweep_coord] = (cap / others).max(2 * budget[task.sweep_coord] as usize + 2);
        }
        out.push(piece.support.sample_counts(&counts, phase)?);
    }
    Ok(out)
}

fn falling(e: u32, k: u32) -> f64 {
    (0..k).map(|t| (e - t) as f64).product()
}

/// Monomials of the box in the basis order: the swept coordinate is the most
/// significant digit, the rest follow in natural order.
struct BoxBasis {
    order: Vec<usize>,
    monos: Vec<Vec<u32>>,
    index: BTreeMap<Vec<u32>, usize>,
}

impl BoxBasis {
    fn new(budget: &[u32], sweep_coord: usize) -> Self {
        let mut order = vec![sweep_coord];
        order.extend((0..budget.len()).filter(|&k| k != sweep_coord));
        let mut monos = Vec::new();
        let mut digits = vec![0u32; budget.len()];
        loop {
            let mut alpha = vec![0; budget.len()];
            for (pos, &k) in order.iter().enumerate() {
                alpha[k] = digits[pos];
            }
            monos.push(alpha);
            let mut pos = budget.len();
            loop {
                if pos == 0 {
                    let index = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
                    return BoxBasis { order, monos, index };
                }
                pos -= 1;
                if digits[pos] < budget[order[pos]] {
                    digits[pos] += 1;
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// `(parent index, coordinate)` with `monos[k] = monos[parent] + e_coord`.
    fn parent(&self, k: usize) -> (usize, usize) {
        let alpha = &self.monos[k];
        let j = *self.order.iter().find(|&&c| alpha[c] > 0).expect("nonzero monomial");
        let mut p = alpha.clone();
        p[j] -= 1;
        (self.index[&p], j)
    }
}

/// Shifted coordinates `x - c` of a grid point (no shift in `w`).
fn shifted(task: &ApproxTask, x: &[C64]) -> Vec<C64> {
    let mut u = x.to_vec();
    for i in 0..task.d {
        u[task.r + i] -= task.basis_center[i];
    }
    u
}

/// Value of `D[(x_s - c)^e]` at shifted point `u`, where `s` is the divisor coordinate.
fn start_value(task: &ApproxTask, op: &[u32], u: &[C64]) -> C64 {
    match task.divisor {
        None => C64::new(if op.iter().all(|&o| o == 0) { 1.0 } else { 0.0 }, 0.0),
        Some((i, e)) => {
            let s = task.r + i;
            if op.iter().enumerate().any(|(k, &o)| k != s && o > 0) || op[s] > e {
                return C64::default();
            }
            u[s].powu(e - op[s]) * falling(e, op[s])
        }
    }
}

fn solve(
    task: &ApproxTask,
    budget: &[u32],
    ops: &[DiffOp],
    requested: &[DiffOp],
    grids: &[SampleGrid],
    orthogonalize: bool,
) -> Result<(Poly, f64)> {
    let basis = BoxBasis::new(budget, task.sweep_coord);
    let ncols = basis.monos.len();
    let points: Vec<Vec<C64>> = grids.iter().flat_map(|g| g.points().map(|x| shifted(task, x))).collect();
    let globals: Vec<(usize, &[C64])> =
        grids.iter().enumerate().flat_map(|(pi, g)| g.points().map(move |x| (pi, x))).collect();
    let m = points.len();
    if m == 0 {
        return Err(Error::EmptyGrid);
    }
    let op_ex: Vec<Vec<u32>> = ops.iter().map(|o| o.exponents().entries().to_vec()).collect();
    let op_pos: BTreeMap<Vec<u32>, usize> = op_ex.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

    // columns[o][k] holds D_o(φ_k) at every point
    let mut columns: Vec<Vec<Vec<C64>>> = vec![Vec::with_capacity(ncols); ops.len()];
    // coefficients of φ_k over the box monomials (before the divisor)
    let mut coeffs: Vec<Vec<C64>> = Vec::with_capacity(ncols);

    if orthogonalize {
        let sqrt_m = (m as f64).sqrt();
        for k in 0..ncols {
            let mut vals: Vec<Vec<C64>>;
            let mut t = vec![C64::default(); ncols];
            if k == 0 {
                vals = op_ex.iter().map(|op| points.iter().map(|u| start_value(task, op, u)).collect()).collect();
                t[0] = C64::new(1.0, 0.0);
            } else {
                let (p, j) = basis.parent(k);
                vals = Vec::with_capacity(ops.len());
                for (oi, op) in op_ex.iter().enumerate() {
                    let mut v: Vec<C64> = columns[oi][p].iter().zip(&points).map(|(a, u)| a * u[j]).collect();
                    if op[j] > 0 {
                        let mut lower = op.clone();
                        lower[j] -= 1;
                        let li = op_pos[&lower];
                        let a = op[j] as f64;
                        for (x, y) in v.iter_mut().zip(&columns[li][p]) {
                            *x += y * a;
                        }
                    }
                    vals.push(v);
                }
                for (i, ci) in coeffs[p].iter().enumerate() {
                    if *ci != C64::default() {
                        let mut alpha = basis.monos[i].clone();
                        alpha[j] += 1;
                        t[basis.index[&alpha]] += ci;
                    }
                }
            }
            // two passes of classical Gram-Schmidt on the identity rows
            let id = op_pos[&vec![0; task.r + task.d]];
            let mut h_total = vec![C64::default(); k];
            for _ in 0..2 {
                let h: Vec<C64> = (0..k)
                    .map(|i| columns[id][i].iter().zip(&vals[id]).map(|(a, b)| a.conj() * b).sum::<C64>() / m as f64)
                    .collect();
                for (i, hi) in h.iter().enumerate() {
                    h_total[i] += hi;
                    for oi in 0..ops.len() {
                        let (head, col) = (&columns[oi][i], &mut vals[oi]);
                        for (x, y) in col.iter_mut().zip(head) {
                            *x -= y * hi;
                        }
                    }
                    for (x, y) in t.iter_mut().zip(&coeffs[i]) {
                        *x -= y * hi;
                    }
                }
            }
            let norm = vals[id].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() / sqrt_m;
            let scale = if norm > 1e-300 { 1.0 / norm } else { 0.0 };
            for col in vals.iter_mut() {
                col.iter_mut().for_each(|x| *x *= scale);
            }
            t.iter_mut().for_each(|x| *x *= scale);
            for (oi, col) in vals.into_iter().enumerate() {
                columns[oi].push(col);
            }
            coeffs.push(t);
        }
    } else {
        for k in 0..ncols {
            let alpha = &basis.monos[k];
            let mut vals = Vec::with_capacity(ops.len());
            for op in &op_ex {
                vals.push(points.iter().map(|u| raw_column_value(task, alpha, op, u)).collect::<Vec<C64>>());
            }
            let id = op_pos[&vec![0; task.r + task.d]];
            let norm = vals[id].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() / (m as f64).sqrt();
            let scale = if norm > 1e-300 { 1.0 / norm } else { 0.0 };
            let mut t = vec![C64::default(); ncols];
            t[k] = C64::new(scale, 0.0);
            for (oi, mut col) in vals.into_iter().enumerate() {
                col.iter_mut().for_each(|x| *x *= scale);
                columns[oi].push(col);
            }
            coeffs.push(t);
        }
    }

    // stack the requested operators' rows
    let nrows = m * requested.len();
    let mut a = DMatrix::<C64>::zeros(nrows, ncols);
    let mut b = DVector::<C64>::zeros(nrows);
    for (ri, op) in requested.iter().enumerate() {
        let oi = op_pos[op.exponents().entries()];
        for k in 0..ncols {
            for (row, v) in columns[oi][k].iter().enumerate() {
                a[(ri * m + row, k)] = *v;
            }
        }
        let derived: Vec<Poly> = task.pieces.iter().map(|p| p.target.local.differentiate(op)).collect();
        let mut evals: Vec<Evaluator> = derived.iter().map(Evaluator::new).collect();
        for (row, (pi, x)) in globals.iter().enumerate() {
            let piece = &task.pieces[*pi];
            let u: Vec<C64> = x[task.r..].iter().zip(&piece.target.center).map(|(a, c)| a - c).collect();
            b[ri * m + row] = evals[*pi].eval(&x[..task.r], &u);
        }
    }
    let (y, condition) = truncated_lstsq(a, b)?;

    let mut terms = Vec::new();
    for (k, alpha) in basis.monos.iter().enumerate() {
        let c: C64 = (0..ncols).map(|col| coeffs[col][k] * y[col]).sum();
        if c == C64::default() {
            continue;
        }
        let mut z = alpha[task.r..].to_vec();
        if let Some((i, e)) = task.divisor {
            z[i] += e;
        }
        terms.push((Monomial::new(alpha[..task.r].to_vec(), z), c));
    }
    Ok((Poly::from_terms(task.r, task.d, terms), condition))
}

fn raw_column_value(task: &ApproxTask, alpha: &[u32], op: &[u32], u: &[C64]) -> C64 {
    let mut ex = alpha.to_vec();
    if let Some((i, e)) = task.divisor {
        ex[task.r + i] += e;
    }
    let mut v = C64::new(1.0, 0.0);
    for k in 0..ex.len() {
        if op[k] > ex[k] {
            return C64::default();
        }
        v *= u[k].powu(ex[k] - op[k]) * falling(ex[k], op[k]);
    }
    v
}

/// Least squares by QR, then a truncated SVD of the triangular factor.
/// Returns the solution and `σ_max / σ_min`.
fn truncated_lstsq(a: DMatrix<C64>, b: DVector<C64>) -> Result<(DVector<C64>, f64)> {
    let n = a.ncols();
    let (r, qb) = if a.nrows() > n {
        let qr = a.qr();
        let qb = qr.q().ad_mul(&b);
        (qr.r(), qb)
    } else {
        (a, b)
    };
    let svd = r.svd(true, true);
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let utb = u.ad_mul(&qb);
    let mut y = DVector::<C64>::zeros(n);
    for (k, &sk) in s.iter().enumerate() {
        if sk > SVD_CUTOFF * smax && sk > 0.0 {
            let coef = utb[k] / sk;
            for col in 0..n {
                y[col] += vt[(k, col)].conj() * coef;
            }
        }
    }
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok((y, condition))
}

/// Sup of `|D(fitted - target)|` per operator over the given grids.
fn measure(task: &ApproxTask, fitted: &Poly, ops: &[DiffOp], grids: &[SampleGrid]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for op in ops {
        let df = fitted.differentiate(op);
        let mut ev = Evaluator::new(&df);
        let mut worst: f64 = 0.0;
        for (piece, grid) in task.pieces.iter().zip(grids) {
            let dt = piece.target.local.differentiate(op);
            let mut et = Evaluator::new(&dt);
            for x in grid.points() {
                let w = &x[..task.r];
                let uf: Vec<C64> = x[task.r..].iter().zip(&task.basis_center).map(|(a, c)| a - c).collect();
                let ut: Vec<C64> = x[task.r..].iter().zip(&piece.target.center).map(|(a, c)| a - c).collect();
                worst = worst.max((ev.eval(w, &uf) - et.eval(w, &ut)).norm());
            }
        }
        out.insert(op.label(), worst);
    }
    out
}

/// Sup of `|D(p - target)|` for each operator over an explicit grid of
/// `(w, z)` points, both sides given as expansions.
pub fn sup_error(p: &Expansion, target: &Expansion, op: &DiffOp, grid: &SampleGrid) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let r = p.r();
    let dp = p.local.differentiate(op);
    let dt = target.local.differentiate(op);
    let (mut ep, mut et) = (Evaluator::new(&dp), Evaluator::new(&dt));
    let mut worst: f64 = 0.0;
    for x in grid.points() {
        let up: Vec<C64> = x[r..].iter().zip(&p.center).map(|(a, c)| a - c).collect();
        let ut: Vec<C64> = x[r..].iter().zip(&target.center).map(|(a, c)| a - c).collect();
        worst = worst.max((ep.eval(&x[..r], &up) - et.eval(&x[..r], &ut)).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn disk(x: f64, r: f64) -> PlanarCompact {
        PlanarCompact::disk(c(x), r)
    }

    fn two_piece(budget: u32) -> ApproxTask {
        let zero = Expansion::from_global(Poly::zero(0, 1));
        let one = Expansion::from_global(Poly::constant(0, 1, c(1.0)));
        let glued = glue_target(
            &zero,
            &one,
            &ProductCompact::new(vec![disk(0.0, 0.5)]),
            &ProductCompact::new(vec![disk(2.0, 0.25)]),
            0,
        )
        .unwrap();
        ApproxTask::new(0, 1, glued.pieces, glued.split_coord, budget, 1e-3)
    }

    #[test]
    fn glue_examples() {
        let task = two_piece(60);
        assert_eq!(task.pieces.len(), 2);
        let d = sampled_distance(&disk(0.0, 0.5), &disk(2.0, 0.25), 1e-3).unwrap();
        assert!(d >= 1.25 - 0.75 - 1e-6);
        let overlap = glue_target(
            &Expansion::from_global(Poly::zero(0, 1)),
            &Expansion::from_global(Poly::zero(0, 1)),
            &ProductCompact::new(vec![disk(0.0, 1.0)]),
            &ProductCompact::new(vec![disk(0.5, 1.0)]),
            0,
        );
        assert!(matches!(overlap, Err(Error::OverlappingPieces)));
    }

    #[test]
    fn glue_with_parameter_block() {
        let w_inner = ProductCompact::new(vec![disk(0.0, 0.5), disk(0.0, 0.5)]);
        let w_outer = ProductCompact::new(vec![disk(0.0, 0.5), disk(2.0, 0.25)]);
        let g = Expansion::from_global(Poly::zero(1, 1));
        let f = Expansion::from_global(&Poly::w_var(1, 1, 0) * &Poly::z_var(1, 1, 0));
        let glued = glue_target(&g, &f, &w_inner, &w_outer, 1).unwrap();
        assert_eq!(glued.split_coord, 1);
        assert_eq!(glued.pieces[0].support.factors[0], glued.pieces[1].support.factors[0]);
    }

    #[test]
    fn exact_representability() {
        let z = Poly::z_var(0, 1, 0);
        let target = &(&z * &z) + &Poly::constant(0, 1, c(0.5));
        let piece = Piece {
            support: ProductCompact::new(vec![disk(0.3, 1.0)]),
            target: Expansion::from_global(target.clone()),
        };
        let mut task = ApproxTask::new(0, 1, vec![piece], 0, 10, 1e-9);
        task.basis_center = vec![c(0.3)];
        for ortho in [false, true] {
            let rep = fit_with_scaling(&task, ortho).unwrap();
            assert!(rep.passed, "{:?}", rep.achieved_errors);
            assert!(rep.max_error() <= 1e-10);
        }
    }

    #[test]
    fn derivative_matching_is_exact_for_cubics() {
        let z = Poly::z_var(0, 1, 0);
        let cube = &(&z * &z) * &z;
        let piece = Piece { support: ProductCompact::new(vec![disk(0.0, 1.0)]), target: Expansion::from_global(cube) };
        let mut task = ApproxTask::new(0, 1, vec![piece], 0, 5, 1e-9);
        task.derivative_orders = vec![DiffOp::identity(0, 1), DiffOp::d_z(0, 1, 0)];
        for ortho in [false, true] {
            let rep = fit_with_scaling(&task, ortho).unwrap();
            assert_eq!(rep.achieved_errors.len(), 2);
            assert!(rep.achieved_errors.values().all(|&e| e <= 1e-10), "{:?}", rep.achieved_errors);
        }
    }

    #[test]
    fn two_piece_demo_converges() {
        let mut task = two_piece(60);
        task.sweep = vec![10, 20, 40, 60];
        task.stop_at_first_pass = false;
        let ortho = fit_with_scaling(&task, true).unwrap();
        let errs: Vec<f64> = ortho.residual_history.iter().map(|s| s.max_error).collect();
        assert!(errs.last().unwrap() < &1e-3, "{errs:?}");
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{errs:?}");
        }
        let raw = fit(&task).unwrap();
        assert!(ortho.condition_estimate <= raw.condition_estimate);
        let ratio = raw.max_error().max(1e-16) / ortho.max_error().max(1e-16);
        assert!((0.1..=10.0).contains(&ratio), "raw {} ortho {}", raw.max_error(), ortho.max_error());
    }

    #[test]
    fn divisor_keeps_low_terms_empty() {
        let mut task = two_piece(30);
        task.basis_center = vec![c(0.0)];
        task.divisor = Some((0, 7));
        task.tolerance = 1e-2;
        let rep = fit_with_scaling(&task, true).unwrap();
        assert!(rep.passed, "{:?}", rep.residual_history);
        assert_eq!(rep.fitted.min_total_degree_z(), Some(7));
    }

    #[test]
    fn budget_exhaustion_reports_best() {
        let mut task = two_piece(5);
        task.tolerance = 1e-15;
        let rep = fit_with_scaling(&task, true).unwrap();
        assert!(!rep.passed);
        assert!(matches!(rep.check(), Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn verification_grid_tracks_fit_grid() {
        let mut task = two_piece(40);
        task.tolerance = 1e-4;
        let rep = fit_with_scaling(&task, true).unwrap();
        let on_fit = rep.fit_grid_errors["id"];
        let on_verify = rep.achieved_errors["id"];
        assert!(on_verify <= 2.0 * on_fit.max(1e-14), "fit {on_fit} verify {on_verify}");
    }
}
