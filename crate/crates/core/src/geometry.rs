//! Planar compacts, product compacts, the domain catalog and its exhaustions,
//! and boundary sampling for sup norms.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{Enumeration, MultiIndex};
use crate::poly::{Evaluator, Poly, C64};

/// Upper bound on the number of points a sampler may produce.
pub const MAX_POINTS: u128 = 10_000_000;

pub(crate) mod pt {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

fn default_slit_direction() -> f64 {
    PI
}

/// A compact subset of the plane with connected complement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PlanarCompact {
    Disk {
        #[serde(with = "pt")]
        center: C64,
        radius: f64,
    },
    /// Axis-parallel rectangle with lower-left `min` and upper-right `max`.
    Rectangle {
        #[serde(with = "pt")]
        min: C64,
        #[serde(with = "pt")]
        max: C64,
    },
    Segment {
        #[serde(with = "pt")]
        a: C64,
        #[serde(with = "pt")]
        b: C64,
    },
    /// Arc of the circle `|z - center| = radius` for angles in `[start, end]`.
    Arc {
        #[serde(with = "pt")]
        center: C64,
        radius: f64,
        start: f64,
        end: f64,
    },
    /// `{inner <= |z - center| <= outer}` with the sector of half-angle
    /// `slit_half_angle` around `slit_direction` removed.
    SlitAnnulus {
        #[serde(with = "pt")]
        center: C64,
        inner: f64,
        outer: f64,
        slit_half_angle: f64,
        #[serde(default = "default_slit_direction")]
        slit_direction: f64,
    },
    Union {
        parts: Vec<PlanarCompact>,
    },
    /// `base ∩ {|z| <= radius}`.
    Clipped {
        base: Box<PlanarCompact>,
        radius: f64,
    },
}

fn angle_in(theta: f64, start: f64, end: f64) -> bool {
    let t = (theta - start).rem_euclid(TAU);
    t <= end - start + 1e-12
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let t = (a - b).rem_euclid(TAU);
    t.min(TAU - t)
}

fn segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

fn sample_segment(a: C64, b: C64, h: f64, include_end: bool) -> Vec<C64> {
    let len = (b - a).norm();
    let n = ((len / h).ceil() as usize).max(1);
    let upto = if include_end { n + 1 } else { n };
    (0..upto).map(|k| a + (b - a) * (k as f64 / n as f64)).collect()
}

fn sample_arc(center: C64, radius: f64, start: f64, end: f64, h: f64) -> Vec<C64> {
    let span = end - start;
    let n = ((radius * span / h).ceil() as usize).max(1);
    (0..=n).map(|k| center + C64::from_polar(radius, start + span * k as f64 / n as f64)).collect()
}

impl PlanarCompact {
    pub fn disk(center: C64, radius: f64) -> Self {
        PlanarCompact::Disk { center, radius }
    }

    pub fn slit_annulus(center: C64, inner: f64, outer: f64, slit_half_angle: f64) -> Self {
        PlanarCompact::SlitAnnulus { center, inner, outer, slit_half_angle, slit_direction: PI }
    }

    /// Rejects empty or malformed parameters.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::EmptySet(m.to_string()));
        match self {
            PlanarCompact::Disk { radius, .. } if !(*radius >= 0.0) => bad("disk radius must be >= 0"),
            PlanarCompact::Rectangle { min, max } if !(min.re <= max.re && min.im <= max.im) => {
                bad("rectangle corners out of order")
            }
            PlanarCompact::Arc { radius, start, end, .. } if !(*radius > 0.0 && end >= start && end - start < TAU) => {
                bad("arc needs radius > 0 and 0 <= end - start < 2π")
            }
            PlanarCompact::SlitAnnulus { inner, outer, slit_half_angle, .. }
                if !(*inner >= 0.0 && outer >= inner && *slit_half_angle > 0.0 && *slit_half_angle < PI) =>
            {
                bad("slit annulus needs 0 <= inner <= outer and 0 < slit half-angle < π")
            }
            PlanarCompact::Union { parts } if parts.is_empty() => bad("empty union"),
            PlanarCompact::Union { parts } => parts.iter().try_for_each(|p| p.validate()),
            PlanarCompact::Clipped { base, radius } => {
                base.validate()?;
                if base.sample_boundary(base.diameter().max(1e-9) / 64.0)?.iter().any(|z| z.norm() <= *radius)
                    || base.contains(C64::default(), 0.0)
                {
                    Ok(())
                } else {
                    bad("clipping disk misses the base set")
                }
            }
            _ => Ok(()),
        }
    }

    /// Membership with slack `tol`.
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        match self {
            PlanarCompact::Disk { center, radius } => (z - center).norm() <= radius + tol,
            PlanarCompact::Rectangle { min, max } => {
                z.re >= min.re - tol && z.re <= max.re + tol && z.im >= min.im - tol && z.im <= max.im + tol
            }
            PlanarCompact::Segment { a, b } => segment_distance(z, *a, *b) <= tol,
            PlanarCompact::Arc { center, radius, start, end } => {
                let u = z - center;
                if ((u.norm() - radius).abs()) > tol {
                    return false;
                }
                if angle_in(u.arg(), *start, *end) {
                    return true;
                }
                let a = center + C64::from_polar(*radius, *start);
                let b = center + C64::from_polar(*radius, *end);
                (z - a).norm() <= tol || (z - b).norm() <= tol
            }
            PlanarCompact::SlitAnnulus { center, inner, outer, slit_half_angle, slit_direction } => {
                let u = z - center;
                let rho = u.norm();
                if rho < inner - tol || rho > outer + tol {
                    return false;
                }
                if rho == 0.0 {
                    return true;
                }
                if angular_distance(u.arg(), *slit_direction) >= *slit_half_angle {
                    return true;
                }
                [slit_direction - slit_half_angle, slit_direction + slit_half_angle].iter().any(|&theta| {
                    let dir = C64::from_polar(1.0, theta);
                    segment_distance(u, dir * *inner, dir * *outer) <= tol
                })
            }
            PlanarCompact::Union { parts } => parts.iter().any(|p| p.contains(z, tol)),
            PlanarCompact::Clipped { base, radius } => z.norm() <= radius + tol && base.contains(z, tol),
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (C64, C64) {
        match self {
            PlanarCompact::Disk { center, radius } => {
                (center - C64::new(*radius, *radius), center + C64::new(*radius, *radius))
            }
            PlanarCompact::Rectangle { min, max } => (*min, *max),
            PlanarCompact::Segment { a, b } => {
                (C64::new(a.re.min(b.re), a.im.min(b.im)), C64::new(a.re.max(b.re), a.im.max(b.im)))
            }
            PlanarCompact::Arc { center, radius, .. } | PlanarCompact::SlitAnnulus { center, outer: radius, .. } => {
                (center - C64::new(*radius, *radius), center + C64::new(*radius, *radius))
            }
            PlanarCompact::Union { parts } => parts.iter().map(|p| p.bounding_box()).fold(
                (C64::new(f64::INFINITY, f64::INFINITY), C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
                |(lo, hi), (a, b)| {
                    (C64::new(lo.re.min(a.re), lo.im.min(a.im)), C64::new(hi.re.max(b.re), hi.im.max(b.im)))
                },
            ),
            PlanarCompact::Clipped { base, radius } => {
                let (lo, hi) = base.bounding_box();
                (C64::new(lo.re.max(-radius), lo.im.max(-radius)), C64::new(hi.re.min(*radius), hi.im.min(*radius)))
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// A representative point: the geometric center for primitives.
    pub fn center(&self) -> C64 {
        match self {
            PlanarCompact::Disk { center, .. }
            | PlanarCompact::Arc { center, .. }
            | PlanarCompact::SlitAnnulus { center, .. } => *center,
            PlanarCompact::Rectangle { min, max } => (min + max) / 2.0,
            PlanarCompact::Segment { a, b } => (a + b) / 2.0,
            PlanarCompact::Union { .. } | PlanarCompact::Clipped { .. } => {
                let (lo, hi) = self.bounding_box();
                (lo + hi) / 2.0
            }
        }
    }

    /// Largest `ρ` such that some closed disk of radius `ρ` sits in the set,
    /// together with that disk's center. `None` for sets without interior.
    pub fn inscribed_disk(&self) -> Option<(C64, f64)> {
        match self {
            PlanarCompact::Disk { center, radius } if *radius > 0.0 => Some((*center, *radius)),
            PlanarCompact::Rectangle { min, max } => {
                let r = (max.re - min.re).min(max.im - min.im) / 2.0;
                (r > 0.0).then(|| ((min + max) / 2.0, r))
            }
            PlanarCompact::SlitAnnulus { center, inner, outer, slit_half_angle, slit_direction } => {
                let width = outer - inner;
                if width <= 0.0 {
                    return None;
                }
                // disk opposite the slit, limited by the annulus width and the sector opening
                let mid = (inner + outer) / 2.0;
                let sector = mid * (PI - slit_half_angle).min(PI / 2.0).sin();
                let r = (width / 2.0).min(sector);
                Some((center + C64::from_polar(mid, slit_direction + PI), r))
            }
            PlanarCompact::Union { parts } => {
                parts.iter().filter_map(|p| p.inscribed_disk()).max_by(|a, b| a.1.total_cmp(&b.1))
            }
            _ => None,
        }
    }

    /// Length of the sampled boundary curve(s).
    pub fn boundary_length(&self) -> f64 {
        match self {
            PlanarCompact::Disk { radius, .. } => TAU * radius,
            PlanarCompact::Rectangle { min, max } => 2.0 * ((max.re - min.re) + (max.im - min.im)),
            PlanarCompact::Segment { a, b } => (b - a).norm(),
            PlanarCompact::Arc { radius, start, end, .. } => radius * (end - start),
            PlanarCompact::SlitAnnulus { inner, outer, slit_half_angle, .. } => {
                let open = TAU - 2.0 * slit_half_angle;
                open * (inner + outer) + 2.0 * (outer - inner)
            }
            PlanarCompact::Union { parts } => parts.iter().map(|p| p.boundary_length()).sum(),
            PlanarCompact::Clipped { base, radius } => base.boundary_length() + TAU * radius,
        }
    }

    /// Samples the boundary at arc-length spacing at most `h`. Sets without
    /// interior are sampled entirely.
    pub fn sample_boundary(&self, h: f64) -> Result<Vec<C64>> {
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("sampling density must be positive, got {h}")));
        }
        let estimate = (self.boundary_length() / h).ceil() + 4.0;
        if estimate > MAX_POINTS as f64 {
            return Err(Error::TooManyPoints(estimate as u128));
        }
        Ok(match self {
            PlanarCompact::Disk { center, radius } => {
                if *radius == 0.0 {
                    return Ok(vec![*center]);
                }
                let n = ((TAU * radius / h).ceil() as usize).max(1);
                (0..n).map(|k| center + C64::from_polar(*radius, TAU * k as f64 / n as f64)).collect()
            }
            PlanarCompact::Rectangle { min, max } => {
                let c = [*min, C64::new(max.re, min.im), *max, C64::new(min.re, max.im)];
                let mut out = Vec::new();
                for i in 0..4 {
                    out.extend(sample_segment(c[i], c[(i + 1) % 4], h, false));
                }
                out.dedup();
                out
            }
            PlanarCompact::Segment { a, b } => sample_segment(*a, *b, h, true),
            PlanarCompact::Arc { center, radius, start, end } => sample_arc(*center, *radius, *start, *end, h),
            PlanarCompact::SlitAnnulus { center, inner, outer, slit_half_angle, slit_direction } => {
                let (s, e) = (slit_direction + slit_half_angle, slit_direction + TAU - slit_half_angle);
                let mut out = sample_arc(*center, *outer, s, e, h);
                if *inner > 0.0 {
                    out.extend(sample_arc(*center, *inner, s, e, h));
                } else {
                    out.push(*center);
                }
                for theta in [s, e] {
                    let dir = C64::from_polar(1.0, theta);
                    let pts = sample_segment(center + dir * *inner, center + dir * *outer, h, true);
                    out.extend(pts.into_iter().skip(1).take_while(|z| (z - center).norm() < outer - 1e-15));
                }
                out
            }
            PlanarCompact::Union { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.sample_boundary(h)?);
                }
                out
            }
            PlanarCompact::Clipped { base, radius } => {
                let mut out: Vec<C64> =
                    base.sample_boundary(h)?.into_iter().filter(|z| z.norm() <= radius + 1e-12).collect();
                let n = ((TAU * radius / h).ceil() as usize).max(1);
                out.extend(
                    (0..n)
                        .map(|k| C64::from_polar(*radius, TAU * k as f64 / n as f64))
                        .filter(|z| base.contains(*z, 1e-12)),
                );
                if out.is_empty() {
                    return Err(Error::EmptySet("clipped set has no sampled boundary".into()));
                }
                out
            }
        })
    }

    /// Boundary samples plus an interior lattice of spacing `h`.
    pub fn sample_filled(&self, h: f64) -> Result<Vec<C64>> {
        let mut out = self.sample_boundary(h)?;
        let (lo, hi) = self.bounding_box();
        let nx = ((hi.re - lo.re) / h).ceil() as u128 + 1;
        let ny = ((hi.im - lo.im) / h).ceil() as u128 + 1;
        if nx * ny > MAX_POINTS {
            return Err(Error::TooManyPoints(nx * ny));
        }
        for i in 0..nx as usize {
            for k in 0..ny as usize {
                let z = C64::new(lo.re + i as f64 * h, lo.im + k as f64 * h);
                if self.contains(z, 0.0) {
                    out.push(z);
                }
            }
        }
        Ok(out)
    }

    /// Nine probe points: the center (if it belongs to the set) and eight
    /// boundary points spread evenly along the sampled boundary.
    pub fn center_probe(&self) -> Result<Vec<C64>> {
        let boundary = self.sample_boundary(self.boundary_length().max(1e-9) / 256.0)?;
        let mut out = Vec::with_capacity(9);
        let c = self.center();
        if self.contains(c, 1e-12) {
            out.push(c);
        }
        let want = 9 - out.len();
        for k in 0..want {
            out.push(boundary[k * boundary.len() / want]);
        }
        out.dedup();
        Ok(out)
    }

    /// Whether the complement is connected, by construction rule: primitives
    /// always; unions only when the parts are pairwise disjoint and the
    /// flood-fill escape test succeeds.
    pub fn complement_connected(&self) -> bool {
        match self {
            PlanarCompact::Union { parts } => {
                for (i, a) in parts.iter().enumerate() {
                    for b in &parts[i + 1..] {
                        match sampled_distance(a, b, a.diameter().min(b.diameter()).max(1e-6) / 200.0) {
                            Ok(dist) if dist > 0.0 => {}
                            _ => return false,
                        }
                    }
                }
                parts.iter().all(|p| p.complement_connected())
                    && escape_test(self, None).map(|r| r.all_escaped()).unwrap_or(false)
            }
            PlanarCompact::Clipped { base, .. } => base.complement_connected(),
            _ => true,
        }
    }

    /// Narrowest feature the escape raster has to resolve.
    fn feature_size(&self) -> f64 {
        match self {
            PlanarCompact::SlitAnnulus { inner, outer, slit_half_angle, .. } => {
                2.0 * inner.max(1e-3 * outer) * slit_half_angle.sin()
            }
            PlanarCompact::Union { parts } => parts.iter().map(|p| p.feature_size()).fold(f64::INFINITY, f64::min),
            PlanarCompact::Clipped { base, .. } => base.feature_size(),
            _ => f64::INFINITY,
        }
    }
}

/// Result of the flood-fill escape test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub resolution: f64,
    pub probes: usize,
    pub escaped: usize,
}

impl EscapeReport {
    pub fn all_escaped(&self) -> bool {
        self.probes == self.escaped
    }
}

/// Rasterizes a margin-padded bounding box, blocks cells within one cell width
/// of the set, and flood-fills from the frame. Every unblocked cell is a
/// complement probe; it escapes if the fill reaches it.
pub fn escape_test(set: &PlanarCompact, resolution: Option<f64>) -> Result<EscapeReport> {
    let (lo, hi) = set.bounding_box();
    let size = (hi - lo).norm().max(1e-9);
    let h = resolution.unwrap_or_else(|| (set.feature_size() / 6.0).min(size / 200.0));
    let margin = 3.0 * h;
    let (lo, hi) = (lo - C64::new(margin, margin), hi + C64::new(margin, margin));
    let nx = ((hi.re - lo.re) / h).ceil() as usize + 1;
    let ny = ((hi.im - lo.im) / h).ceil() as usize + 1;
    if (nx as u128) * (ny as u128) > 16_000_000 {
        return Err(Error::TooManyPoints(nx as u128 * ny as u128));
    }
    let blocked: Vec<bool> = (0..nx * ny)
        .map(|idx| set.contains(C64::new(lo.re + (idx / ny) as f64 * h, lo.im + (idx % ny) as f64 * h), h))
        .collect();
    let mut seen = vec![false; nx * ny];
    let mut stack = Vec::new();
    for i in 0..nx {
        for k in 0..ny {
            if (i == 0 || k == 0 || i == nx - 1 || k == ny - 1) && !blocked[i * ny + k] {
                seen[i * ny + k] = true;
                stack.push((i, k));
            }
        }
    }
    while let Some((i, k)) = stack.pop() {
        let mut visit = |a: usize, b: usize| {
            let idx = a * ny + b;
            if !blocked[idx] && !seen[idx] {
                seen[idx] = true;
                stack.push((a, b));
            }
        };
        if i > 0 {
            visit(i - 1, k);
        }
        if i + 1 < nx {
            visit(i + 1, k);
        }
        if k > 0 {
            visit(i, k - 1);
        }
        if k + 1 < ny {
            visit(i, k + 1);
        }
    }
    let probes = blocked.iter().filter(|b| !**b).count();
    let escaped = seen.iter().filter(|s| **s).count();
    Ok(EscapeReport { resolution: h, probes, escaped })
}

/// Minimal distance between two compacts estimated from boundary samples at
/// spacing `h`; zero when a boundary sample of one lies in the other.
pub fn sampled_distance(a: &PlanarCompact, b: &PlanarCompact, h: f64) -> Result<f64> {
    let sa = a.sample_boundary(h)?;
    let sb = b.sample_boundary(h)?;
    if sa.iter().any(|z| b.contains(*z, 0.0)) || sb.iter().any(|z| a.contains(*z, 0.0)) {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    for x in &sa {
        for y in &sb {
            best = best.min((x - y).norm());
        }
    }
    Ok(best)
}

/// Cartesian product of planar compacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename = "product")]
pub struct ProductCompact {
    pub factors: Vec<PlanarCompact>,
}

impl ProductCompact {
    pub fn new(factors: Vec<PlanarCompact>) -> Self {
        ProductCompact { factors }
    }

    pub fn empty() -> Self {
        ProductCompact { factors: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn contains(&self, z: &[C64], tol: f64) -> bool {
        z.len() == self.dim() && self.factors.iter().zip(z).all(|(f, x)| f.contains(*x, tol))
    }

    /// Concatenation `self × other`.
    pub fn times(&self, other: &ProductCompact) -> ProductCompact {
        ProductCompact { factors: self.factors.iter().chain(&other.factors).cloned().collect() }
    }

    /// Product of per-factor boundary samples (the distinguished boundary).
    pub fn sample(&self, h: f64) -> Result<SampleGrid> {
        let per: Vec<Vec<C64>> = self.factors.iter().map(|f| f.sample_boundary(h)).collect::<Result<_>>()?;
        SampleGrid::product(per, h, "distinguished-boundary")
    }

    /// Product of per-factor boundary samples with `counts[i]` points requested
    /// on factor `i` (spacing `boundary_length / count`).
    pub fn sample_counts(&self, counts: &[usize], phase: f64) -> Result<SampleGrid> {
        let mut per = Vec::with_capacity(self.dim());
        let mut coarsest: f64 = 0.0;
        for (f, &n) in self.factors.iter().zip(counts) {
            let h = f.boundary_length().max(1e-12) / n.max(1) as f64;
            coarsest = coarsest.max(h);
            per.push(rotate_samples(f, f.sample_boundary(h)?, phase));
        }
        SampleGrid::product(per, coarsest, "distinguished-boundary")
    }

    pub fn center(&self) -> Vec<C64> {
        self.factors.iter().map(|f| f.center()).collect()
    }

    /// Product of per-factor [`PlanarCompact::center_probe`] sets.
    pub fn center_probe(&self) -> Result<SampleGrid> {
        let per = self.factors.iter().map(|f| f.center_probe()).collect::<Result<Vec<_>>>()?;
        SampleGrid::product(per, 0.0, "center-probe")
    }
}

/// Rotates circle samples by `phase` of a sample step so verification grids
/// interleave with fitting grids. Other shapes are returned unchanged.
fn rotate_samples(f: &PlanarCompact, pts: Vec<C64>, phase: f64) -> Vec<C64> {
    match f {
        PlanarCompact::Disk { center, radius } if *radius > 0.0 && phase != 0.0 => {
            let n = pts.len() as f64;
            let rot = C64::from_polar(1.0, TAU * phase / n);
            pts.into_iter().map(|z| center + (z - center) * rot).collect()
        }
        _ => pts,
    }
}

/// Finite point set in `ℂ^dim` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    pub dim: usize,
    pub count: usize,
    pub coords: Vec<C64>,
    pub density: f64,
    pub rule: String,
}

impl SampleGrid {
    pub fn from_points(points: &[Vec<C64>], density: f64, rule: &str) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Ok(SampleGrid { dim, count: points.len(), coords, density, rule: rule.to_string() })
    }

    /// Cartesian product of per-factor point lists. A zero-factor product is
    /// the single empty point.
    pub fn product(per: Vec<Vec<C64>>, density: f64, rule: &str) -> Result<Self> {
        let total: u128 = per.iter().map(|v| v.len() as u128).product();
        if total > MAX_POINTS {
            return Err(Error::TooManyPoints(total));
        }
        let dim = per.len();
        let mut coords = Vec::with_capacity(total as usize * dim);
        let mut idx = vec![0usize; dim];
        if total > 0 {
            loop {
                for (f, &i) in per.iter().zip(&idx) {
                    coords.push(f[i]);
                }
                let mut k = dim;
                loop {
                    if k == 0 {
                        return Ok(SampleGrid { dim, count: total as usize, coords, density, rule: rule.to_string() });
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < per[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        }
        Ok(SampleGrid { dim, count: 0, coords, density, rule: rule.to_string() })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[C64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[C64]> {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// `max |p|` over a grid of `(w, z)` points (first `r` coordinates are `w`).
pub fn sup_norm(p: &Poly, grid: &SampleGrid) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.dim != p.r() + p.d() {
        return Err(Error::DimensionMismatch { expected: p.r() + p.d(), got: grid.dim });
    }
    let mut ev = Evaluator::new(p);
    let r = p.r();
    Ok(grid.points().map(|x| ev.eval(&x[..r], &x[r..]).norm()).fold(0.0, f64::max))
}

/// Catalog of open simply connected planar domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Domain {
    Disk {
        #[serde(with = "pt")]
        center: C64,
        radius: f64,
    },
    Rectangle {
        #[serde(with = "pt")]
        min: C64,
        #[serde(with = "pt")]
        max: C64,
    },
}

impl Domain {
    pub fn unit_disk() -> Self {
        Domain::Disk { center: C64::default(), radius: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Disk { radius, .. } if !(*radius > 0.0) => Err(Error::EmptySet("domain radius must be > 0".into())),
            Domain::Rectangle { min, max } if !(min.re < max.re && min.im < max.im) => {
                Err(Error::EmptySet("domain rectangle is degenerate".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn center(&self) -> C64 {
        match self {
            Domain::Disk { center, .. } => *center,
            Domain::Rectangle { min, max } => (min + max) / 2.0,
        }
    }

    /// Radius of the smallest disk about [`Domain::center`] containing the closure.
    pub fn circumradius(&self) -> f64 {
        match self {
            Domain::Disk { radius, .. } => *radius,
            Domain::Rectangle { min, max } => (max - min).norm() / 2.0,
        }
    }

    pub fn contains_open(&self, z: C64) -> bool {
        self.depth(z) > 0.0
    }

    /// Distance from `z` to the boundary, positive inside and negative outside
    /// (for rectangles, exact inside and a lower bound outside).
    pub fn depth(&self, z: C64) -> f64 {
        match self {
            Domain::Disk { center, radius } => radius - (z - center).norm(),
            Domain::Rectangle { min, max } => (z.re - min.re).min(max.re - z.re).min(z.im - min.im).min(max.im - z.im),
        }
    }

    pub fn closure(&self) -> PlanarCompact {
        match self {
            Domain::Disk { center, radius } => PlanarCompact::Disk { center: *center, radius: *radius },
            Domain::Rectangle { min, max } => PlanarCompact::Rectangle { min: *min, max: *max },
        }
    }

    /// `p`-th exhaustion set. Plain: the closed set scaled by `1 - 2^{-p}` about
    /// the center. Closure variant: `closure ∩ {|z| <= p}`.
    pub fn exhaustion(&self, p: u32, closure_variant: bool) -> Result<PlanarCompact> {
        if p == 0 {
            return Err(Error::InvalidArgument("exhaustion index starts at 1".into()));
        }
        if closure_variant {
            let closure = self.closure();
            let (lo, hi) = closure.bounding_box();
            let far =
                [lo, hi, C64::new(lo.re, hi.im), C64::new(hi.re, lo.im)].iter().map(|z| z.norm()).fold(0.0, f64::max);
            let reach = match self {
                Domain::Disk { center, radius } => center.norm() + radius,
                Domain::Rectangle { .. } => far,
            };
            if reach <= p as f64 {
                return Ok(closure);
            }
            let clipped = PlanarCompact::Clipped { base: Box::new(closure), radius: p as f64 };
            clipped.validate()?;
            return Ok(clipped);
        }
        let t = 1.0 - 0.5f64.powi(p as i32);
        Ok(match self {
            Domain::Disk { center, radius } => PlanarCompact::Disk { center: *center, radius: radius * t },
            Domain::Rectangle { min, max } => {
                let c = (min + max) / 2.0;
                PlanarCompact::Rectangle { min: c + (min - c) * t, max: c + (max - c) * t }
            }
        })
    }

    /// `R_j`: a slit annulus about the center, outside the domain (or its
    /// closure), growing in `j` with the slit narrowing as `1/j`.
    pub fn outer_compact(&self, j: u32, closure_variant: bool) -> Result<PlanarCompact> {
        if j == 0 {
            return Err(Error::InvalidArgument("outer compact index starts at 1".into()));
        }
        let rho = self.circumradius();
        let inner = if closure_variant { rho + 1.0 / j as f64 } else { rho };
        let outer = (rho + j as f64 - 1.0).max(inner);
        Ok(PlanarCompact::SlitAnnulus {
            center: self.center(),
            inner,
            outer,
            slit_half_angle: 1.0 / j as f64,
            slit_direction: PI,
        })
    }

    /// Smallest `j` with `set ⊆ R_j` (checked on filled samples at spacing `h`).
    pub fn outer_index_for(&self, set: &PlanarCompact, closure_variant: bool, h: f64) -> Result<Option<u32>> {
        let pts = set.sample_filled(h)?;
        let (c, rho) = (self.center(), self.circumradius());
        let mut j_min: f64 = 1.0;
        for z in &pts {
            let u = z - c;
            let dist = u.norm();
            if dist < rho || (closure_variant && dist <= rho) {
                return Ok(None);
            }
            j_min = j_min.max((dist - rho + 1.0).ceil());
            if closure_variant {
                j_min = j_min.max((1.0 / (dist - rho)).ceil());
            }
            let gap = angular_distance(u.arg(), PI);
            if gap == 0.0 {
                return Ok(None);
            }
            j_min = j_min.max((1.0 / gap).ceil());
        }
        if j_min > u32::MAX as f64 {
            return Ok(None);
        }
        let j0 = j_min as u32;
        // absorb rounding at the edges
        for j in j0..j0.saturating_add(4) {
            let r = self.outer_compact(j, closure_variant)?;
            if pts.iter().all(|z| r.contains(*z, 1e-12)) {
                return Ok(Some(j));
            }
        }
        Ok(None)
    }
}

/// Product of domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainProduct {
    pub factors: Vec<Domain>,
}

/// Decoded position of `T_m` in its enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmIndex {
    /// Zero-based factor carrying the outer compact.
    pub i0: usize,
    pub j: u32,
    /// Radii of the other factors' disks, in factor order with `i0` skipped.
    pub radii: Vec<u32>,
}

impl DomainProduct {
    pub fn new(factors: Vec<Domain>) -> Self {
        DomainProduct { factors }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn exhaustion(&self, p: u32, closure_variant: bool) -> Result<ProductCompact> {
        Ok(ProductCompact::new(self.factors.iter().map(|f| f.exhaustion(p, closure_variant)).collect::<Result<_>>()?))
    }

    /// `m ↦ (i0, j, radii)`: `i0 = (m-1) mod d`, and `(j-1, radii-1)` is the
    /// diagonal-Cantor unranking of `(m-1) div d` in dimension `d`.
    pub fn decode_tm(&self, m: u64) -> Result<TmIndex> {
        let d = self.dim() as u64;
        if m == 0 || d == 0 {
            return Err(Error::InvalidArgument("T_m index starts at 1 and needs d >= 1".into()));
        }
        let i0 = ((m - 1) % d) as usize;
        let q = (m - 1) / d;
        let tuple = Enumeration::diagonal_cantor(self.dim()).unrank(q)?;
        let e = tuple.entries();
        Ok(TmIndex { i0, j: e[0] + 1, radii: e[1..].iter().map(|x| x + 1).collect() })
    }

    pub fn encode_tm(&self, idx: &TmIndex) -> Result<u64> {
        let d = self.dim();
        if idx.i0 >= d || idx.radii.len() + 1 != d || idx.j == 0 || idx.radii.contains(&0) {
            return Err(Error::InvalidArgument("malformed T_m index".into()));
        }
        let mut tuple = vec![idx.j - 1];
        tuple.extend(idx.radii.iter().map(|x| x - 1));
        let q = Enumeration::diagonal_cantor(d).rank(&MultiIndex::new(tuple))?;
        Ok(q * d as u64 + idx.i0 as u64 + 1)
    }

    pub fn tm_from_index(&self, idx: &TmIndex, closure_variant: bool) -> Result<ProductCompact> {
        let mut radii = idx.radii.iter();
        let factors = (0..self.dim())
            .map(|i| {
                if i == idx.i0 {
                    self.factors[i].outer_compact(idx.j, closure_variant)
                } else {
                    Ok(PlanarCompact::disk(C64::default(), *radii.next().expect("radius count") as f64))
                }
            })
            .collect::<Result<_>>()?;
        Ok(ProductCompact::new(factors))
    }

    pub fn enumerate_tm(&self, m: u64, closure_variant: bool) -> Result<ProductCompact> {
        self.tm_from_index(&self.decode_tm(m)?, closure_variant)
    }

    /// Some `m` with `K ⊆ T_m`, computed from the smallest admissible `j` and
    /// radii, or `None` if no factor of `K` lies in an outer compact.
    pub fn locate_in_tm(&self, k: &ProductCompact, closure_variant: bool, h: f64) -> Result<Option<(u64, TmIndex)>> {
        if k.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: k.dim() });
        }
        let mut best: Option<(u64, TmIndex)> = None;
        for i0 in 0..self.dim() {
            let Some(j) = self.factors[i0].outer_index_for(&k.factors[i0], closure_variant, h)? else {
                continue;
            };
            let radii = (0..self.dim())
                .filter(|&i| i != i0)
                .map(|i| {
                    let far = k.factors[i].sample_filled(h).map(|pts| pts.iter().map(|z| z.norm()).fold(0.0, f64::max));
                    far.map(|r| (r - 1e-12).ceil().max(1.0) as u32)
                })
                .collect::<Result<Vec<_>>>()?;
            let idx = TmIndex { i0, j, radii };
            let m = self.encode_tm(&idx)?;
            if best.as_ref().is_none_or(|(b, _)| m < *b) {
                best = Some((m, idx));
            }
        }
        Ok(best)
    }

    /// Index of a factor in which `K` avoids the domain (or its closure).
    pub fn disjoint_factor(&self, k: &ProductCompact, closure_variant: bool, h: f64) -> Result<Option<usize>> {
        for (i, (dom, f)) in self.factors.iter().zip(&k.factors).enumerate() {
            let pts = f.sample_filled(h)?;
            let clear = if closure_variant {
                sampled_distance(f, &dom.closure(), h)? > 0.0
            } else {
                pts.iter().all(|z| dom.depth(*z) <= 1e-12)
            };
            if clear {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}
