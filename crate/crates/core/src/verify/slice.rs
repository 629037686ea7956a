//! Discrete Cauchy-integral test of slice holomorphy.
//!
//! For a slice `ζ ↦ f(..., ζ, ...)` along one axis, with `(a, ρ)` an inscribed
//! disk of that factor, the test circle has center `c = a + 0.15 ρ` and radius
//! `0.8 ρ` (so it contains `a` without being centered at it). The residual is
//! `|(1/N) Σ_k f(ζ_k) (ζ_k - c) / (ζ_k - a) - f(a)|` over `N` equispaced nodes,
//! which is the trapezoid rule for the Cauchy integral at `a`. Holomorphic
//! slices give spectrally small residuals; `conj(z)` gives exactly `|c - a|`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::ProductCompact;
use crate::poly::C64;

/// Offset of the test-circle center, as a fraction of the inradius.
pub const CIRCLE_OFFSET: f64 = 0.15;
/// Test-circle radius as a fraction of the inradius.
pub const CIRCLE_RADIUS: f64 = 0.8;

/// Function values arranged for the slice test along one axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceTable {
    pub axis: usize,
    /// Evaluation point `a` of the Cauchy formula.
    pub anchor: C64,
    pub circle_center: C64,
    pub nodes: Vec<C64>,
    /// One row per fixed value of the other coordinates: `(f(a), f(nodes))`.
    pub rows: Vec<(C64, Vec<C64>)>,
}

/// Samples `f` for the slice test. The other coordinates run over the
/// boundary samples of their factors at spacing `h`.
pub fn tabulate_slices(
    f: impl Fn(&[C64]) -> C64,
    support: &ProductCompact,
    axis: usize,
    quadrature: usize,
    h: f64,
) -> Result<SliceTable> {
    if axis >= support.dim() {
        return Err(Error::DimensionMismatch { expected: support.dim(), got: axis });
    }
    if quadrature < 3 {
        return Err(Error::InvalidArgument("slice quadrature needs at least 3 nodes".into()));
    }
    let (anchor, rho) = support.factors[axis].inscribed_disk().ok_or(Error::NoInterior(axis))?;
    let circle_center = anchor + CIRCLE_OFFSET * rho;
    let nodes: Vec<C64> = (0..quadrature)
        .map(|k| circle_center + C64::from_polar(CIRCLE_RADIUS * rho, TAU * k as f64 / quadrature as f64))
        .collect();
    let mut others = support.clone();
    others.factors.remove(axis);
    let grid = others.sample(h)?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut x = vec![C64::default(); support.dim()];
    for p in grid.points() {
        x[..axis].copy_from_slice(&p[..axis]);
        x[axis + 1..].copy_from_slice(&p[axis..]);
        x[axis] = anchor;
        let at_anchor = f(&x);
        let mut vals = Vec::with_capacity(quadrature);
        for &zk in &nodes {
            x[axis] = zk;
            vals.push(f(&x));
        }
        rows.push((at_anchor, vals));
    }
    Ok(SliceTable { axis, anchor, circle_center, nodes, rows })
}

/// Max over rows of the discrete Cauchy residual.
pub fn slice_ad_residual(table: &SliceTable) -> Result<f64> {
    if table.rows.is_empty() || table.nodes.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let weights: Vec<C64> = table.nodes.iter().map(|z| (z - table.circle_center) / (z - table.anchor)).collect();
    let n = table.nodes.len() as f64;
    let mut worst: f64 = 0.0;
    for (at_anchor, vals) in &table.rows {
        if vals.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), got: vals.len() });
        }
        let integral: C64 = vals.iter().zip(&weights).map(|(v, w)| v * w).sum::<C64>() / n;
        worst = worst.max((integral - at_anchor).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PlanarCompact;

    fn unit() -> ProductCompact {
        ProductCompact::new(vec![PlanarCompact::disk(C64::default(), 1.0)])
    }

    #[test]
    fn holomorphic_and_constant() {
        let k = unit();
        let t = tabulate_slices(|x| x[0] * x[0] * x[0] - 2.0 * x[0], &k, 0, 256, 0.1).unwrap();
        assert!(slice_ad_residual(&t).unwrap() <= 1e-12);
        let t = tabulate_slices(|_| C64::new(3.0, -1.0), &k, 0, 256, 0.1).unwrap();
        assert!(slice_ad_residual(&t).unwrap() <= 1e-12);
    }

    #[test]
    fn conjugate_matches_cauchy_value() {
        // the integral of conj over the test circle evaluates to conj(c), so
        // the residual is |c - a| = 0.15 on the unit disk
        let t = tabulate_slices(|x| x[0].conj(), &unit(), 0, 256, 0.1).unwrap();
        let res = slice_ad_residual(&t).unwrap();
        assert!((res - 0.15).abs() < 1e-12, "{res}");
    }

    #[test]
    fn segment_has_no_interior() {
        let k = ProductCompact::new(vec![PlanarCompact::Segment { a: C64::default(), b: C64::new(1.0, 0.0) }]);
        assert!(matches!(tabulate_slices(|x| x[0], &k, 0, 64, 0.1), Err(Error::NoInterior(0))));
    }

    #[test]
    fn two_axes() {
        let k = ProductCompact::new(vec![
            PlanarCompact::disk(C64::default(), 1.0),
            PlanarCompact::Rectangle { min: C64::new(-1.0, -1.0), max: C64::new(1.0, 1.0) },
        ]);
        // holomorphic in z1, not in z2
        let f = |x: &[C64]| x[0] * x[0] * x[1].conj();
        let t0 = tabulate_slices(f, &k, 0, 128, 0.25).unwrap();
        assert!(slice_ad_residual(&t0).unwrap() <= 1e-10);
        let t1 = tabulate_slices(f, &k, 1, 128, 0.25).unwrap();
        assert!(slice_ad_residual(&t1).unwrap() >= 0.1);
    }
}
