//! Sparse complex polynomials in parameters `w ∈ ℂ^r` and variables `z ∈ ℂ^d`.
//!
//! A [`Poly`] stores its terms in global coordinates. An [`Expansion`] stores
//! the same kind of object in powers of `z - ζ` for a center `ζ`; partial sums
//! are truncations of an expansion along an [`Enumeration`]. Parameters are
//! never re-centered.

mod json;
mod stream;

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub use json::{PolyTerm, TermList};
pub use stream::{Block, CoefficientStream};

use crate::error::{Error, Result};
use crate::multiindex::{DiffOp, Enumeration, MultiIndex};

pub type C64 = Complex64;

/// Exponent pair of one term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub w: MultiIndex,
    pub z: MultiIndex,
}

impl Monomial {
    pub fn new(w: Vec<u32>, z: Vec<u32>) -> Self {
        Monomial { w: MultiIndex::new(w), z: MultiIndex::new(z) }
    }
}

/// Canonical sparse polynomial; no stored coefficient is exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    r: usize,
    d: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Poly {
    pub fn zero(r: usize, d: usize) -> Self {
        Poly { r, d, terms: BTreeMap::new() }
    }

    pub fn constant(r: usize, d: usize, c: C64) -> Self {
        Self::from_terms(r, d, [(Monomial::new(vec![0; r], vec![0; d]), c)])
    }

    /// The coordinate function `z_i`.
    pub fn z_var(r: usize, d: usize, i: usize) -> Self {
        Self::from_terms(r, d, [(Monomial { w: MultiIndex::zeros(r), z: MultiIndex::unit(d, i) }, C64::new(1.0, 0.0))])
    }

    /// The coordinate function `w_i`.
    pub fn w_var(r: usize, d: usize, i: usize) -> Self {
        Self::from_terms(r, d, [(Monomial { w: MultiIndex::unit(r, i), z: MultiIndex::zeros(d) }, C64::new(1.0, 0.0))])
    }

    /// Sums repeated monomials and drops zero coefficients.
    ///
    /// Panics if an exponent tuple has the wrong dimension; use
    /// [`Poly::try_from_terms`] for untrusted input.
    pub fn from_terms(r: usize, d: usize, terms: impl IntoIterator<Item = (Monomial, C64)>) -> Self {
        Self::try_from_terms(r, d, terms).expect("monomial dimensions")
    }

    pub fn try_from_terms(r: usize, d: usize, terms: impl IntoIterator<Item = (Monomial, C64)>) -> Result<Self> {
        let mut map: BTreeMap<Monomial, C64> = BTreeMap::new();
        for (m, c) in terms {
            if m.w.dim() != r {
                return Err(Error::DimensionMismatch { expected: r, got: m.w.dim() });
            }
            if m.z.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: m.z.dim() });
            }
            *map.entry(m).or_insert(C64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != C64::new(0.0, 0.0));
        Ok(Poly { r, d, terms: map })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    /// Per-coordinate maximal exponent in `z`.
    pub fn degree_z(&self) -> MultiIndex {
        self.terms.keys().fold(MultiIndex::zeros(self.d), |acc, m| acc.join(&m.z))
    }

    /// Per-coordinate maximal exponent in `w`.
    pub fn degree_w(&self) -> MultiIndex {
        self.terms.keys().fold(MultiIndex::zeros(self.r), |acc, m| acc.join(&m.w))
    }

    /// Maximal total degree in `z` over all terms (0 for the zero polynomial).
    pub fn total_degree_z(&self) -> u64 {
        self.terms.keys().map(|m| m.z.total()).max().unwrap_or(0)
    }

    /// Minimal total degree in `z` over all terms, `None` for the zero polynomial.
    pub fn min_total_degree_z(&self) -> Option<u64> {
        self.terms.keys().map(|m| m.z.total()).min()
    }

    /// Sum of coefficient moduli.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::from_terms(self.r, self.d, self.terms.iter().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn map_coeffs(&self, f: impl Fn(&Monomial, C64) -> C64) -> Poly {
        Poly::from_terms(self.r, self.d, self.terms.iter().map(|(m, c)| (m.clone(), f(m, *c))))
    }

    fn check_dims(&self, other: &Poly) {
        assert!(self.r == other.r && self.d == other.d, "polynomial dimensions differ");
    }

    /// Evaluates at `(w, z)`.
    pub fn eval(&self, w: &[C64], z: &[C64]) -> Result<C64> {
        if w.len() != self.r {
            return Err(Error::DimensionMismatch { expected: self.r, got: w.len() });
        }
        if z.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: z.len() });
        }
        Ok(self.eval_unchecked(w, z))
    }

    pub(crate) fn eval_unchecked(&self, w: &[C64], z: &[C64]) -> C64 {
        let mut ev = Evaluator::new(self);
        ev.eval(w, z)
    }

    /// Exact symbolic differentiation; the identity operator returns a clone.
    pub fn differentiate(&self, op: &DiffOp) -> Poly {
        assert!(op.w.dim() == self.r && op.z.dim() == self.d, "operator dimension");
        if op.is_identity() {
            return self.clone();
        }
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let mut factor = 1.0;
            let mut w = m.w.entries().to_vec();
            let mut z = m.z.entries().to_vec();
            for (e, &k) in w.iter_mut().chain(z.iter_mut()).zip(op.w.entries().iter().chain(op.z.entries())) {
                if *e < k {
                    return None;
                }
                for t in 0..k {
                    factor *= (*e - t) as f64;
                }
                *e -= k;
            }
            Some((Monomial::new(w, z), c * factor))
        });
        Poly::from_terms(self.r, self.d, terms)
    }

    /// Re-expands in powers of `z - center`: the coefficient of `u^m` in the
    /// result is the coefficient of `(z - center)^m` in `self`.
    ///
    /// Done one coordinate at a time with multiplicative binomial recurrences.
    pub fn shift_center(&self, center: &[C64]) -> Result<Poly> {
        if center.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: center.len() });
        }
        let mut current = self.clone();
        for (i, &zeta) in center.iter().enumerate() {
            if zeta == C64::new(0.0, 0.0) {
                continue;
            }
            let mut acc: BTreeMap<Monomial, C64> = BTreeMap::new();
            for (m, &c) in current.terms.iter() {
                let e = m.z[i];
                // term for k = e first, then walk k downwards
                let mut factor = c;
                let mut z = m.z.entries().to_vec();
                for k in (0..=e).rev() {
                    z[i] = k;
                    *acc.entry(Monomial { w: m.w.clone(), z: MultiIndex::new(z.clone()) }).or_default() += factor;
                    if k > 0 {
                        factor = factor * zeta * (k as f64) / ((e - k + 1) as f64);
                    }
                }
            }
            acc.retain(|_, c| *c != C64::new(0.0, 0.0));
            current = Poly { r: self.r, d: self.d, terms: acc };
        }
        Ok(current)
    }

    /// The expansion of `self` about `center`.
    pub fn expand_about(&self, center: &[C64]) -> Result<Expansion> {
        Ok(Expansion { center: center.to_vec(), local: self.shift_center(center)? })
    }

    /// Taylor coefficient `γ_m(f, w, ζ) = (1/m!) ∂^m_z f(w, ζ)`, evaluated directly
    /// from the terms.
    pub fn gamma(&self, w: &[C64], zeta: &[C64], m: &MultiIndex) -> Result<C64> {
        if w.len() != self.r {
            return Err(Error::DimensionMismatch { expected: self.r, got: w.len() });
        }
        if zeta.len() != self.d || m.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: zeta.len().min(m.dim()) });
        }
        let mut sum = C64::new(0.0, 0.0);
        for (mono, c) in &self.terms {
            if !m.le(&mono.z) {
                continue;
            }
            let mut term = *c;
            for (wi, &e) in w.iter().zip(mono.w.entries()) {
                term *= wi.powu(e);
            }
            for i in 0..self.d {
                let (e, k) = (mono.z[i], m[i]);
                term *= binomial_f64(e, k) * zeta[i].powu(e - k);
            }
            sum += term;
        }
        Ok(sum)
    }

    /// Coefficient polynomials in `w` grouped by `z`-exponent.
    pub fn coefficients_in_w(&self) -> BTreeMap<MultiIndex, Poly> {
        let mut groups: BTreeMap<MultiIndex, Vec<(Monomial, C64)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            groups.entry(m.z.clone()).or_default().push((Monomial { w: m.w.clone(), z: MultiIndex::zeros(0) }, *c));
        }
        groups.into_iter().map(|(z, t)| (z, Poly::from_terms(self.r, 0, t))).collect()
    }
}

/// `C(n, k)` in floating point via a multiplicative recurrence.
pub fn binomial_f64(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Reusable evaluator holding per-coordinate power tables.
pub struct Evaluator<'a> {
    poly: &'a Poly,
    wdeg: Vec<u32>,
    zdeg: Vec<u32>,
    wpow: Vec<Vec<C64>>,
    zpow: Vec<Vec<C64>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(poly: &'a Poly) -> Self {
        let wdeg = poly.degree_w().entries().to_vec();
        let zdeg = poly.degree_z().entries().to_vec();
        let wpow = wdeg.iter().map(|&n| vec![C64::default(); n as usize + 1]).collect();
        let zpow = zdeg.iter().map(|&n| vec![C64::default(); n as usize + 1]).collect();
        Evaluator { poly, wdeg, zdeg, wpow, zpow }
    }

    fn fill(table: &mut [Vec<C64>], degs: &[u32], x: &[C64]) {
        for ((row, &n), &xi) in table.iter_mut().zip(degs).zip(x) {
            row[0] = C64::new(1.0, 0.0);
            for k in 1..=n as usize {
                row[k] = row[k - 1] * xi;
            }
        }
    }

    pub fn eval(&mut self, w: &[C64], z: &[C64]) -> C64 {
        Self::fill(&mut self.wpow, &self.wdeg, w);
        Self::fill(&mut self.zpow, &self.zdeg, z);
        let mut sum = C64::new(0.0, 0.0);
        for (m, c) in &self.poly.terms {
            let mut t = *c;
            for (row, &e) in self.wpow.iter().zip(m.w.entries()) {
                t *= row[e as usize];
            }
            for (row, &e) in self.zpow.iter().zip(m.z.entries()) {
                t *= row[e as usize];
            }
            sum += t;
        }
        sum
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.check_dims(rhs);
        Poly::from_terms(self.r, self.d, self.terms.iter().chain(rhs.terms.iter()).map(|(m, c)| (m.clone(), *c)))
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.check_dims(rhs);
        let neg = rhs.terms.iter().map(|(m, c)| (m.clone(), -c));
        Poly::from_terms(self.r, self.d, self.terms.iter().map(|(m, c)| (m.clone(), *c)).chain(neg))
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.check_dims(rhs);
        let mut out = Vec::with_capacity(self.len() * rhs.len());
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.push((Monomial { w: a.w.add(&b.w), z: a.z.add(&b.z) }, ca * cb));
            }
        }
        Poly::from_terms(self.r, self.d, out)
    }
}

/// A polynomial written in powers of `z - center`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub center: Vec<C64>,
    pub local: Poly,
}

impl Expansion {
    /// A global polynomial viewed as its expansion about the origin.
    pub fn from_global(p: Poly) -> Self {
        Expansion { center: vec![C64::default(); p.d()], local: p }
    }

    pub fn zero(r: usize, center: Vec<C64>) -> Self {
        let d = center.len();
        Expansion { center, local: Poly::zero(r, d) }
    }

    pub fn r(&self) -> usize {
        self.local.r()
    }

    pub fn d(&self) -> usize {
        self.local.d()
    }

    /// Evaluates at the global point `(w, z)`.
    pub fn eval(&self, w: &[C64], z: &[C64]) -> Result<C64> {
        let u: Vec<C64> = z.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.local.eval(w, &u)
    }

    /// The same function expanded about another center.
    pub fn recenter(&self, center: &[C64]) -> Result<Expansion> {
        if center.len() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: center.len() });
        }
        let delta: Vec<C64> = center.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        Ok(Expansion { center: center.to_vec(), local: self.local.shift_center(&delta)? })
    }

    /// Global-coordinate polynomial.
    pub fn to_poly(&self) -> Result<Poly> {
        let origin = vec![C64::default(); self.d()];
        Ok(self.recenter(&origin)?.local)
    }

    /// Keeps the terms `(z - ζ)^{N_k}` with `k <= n`.
    pub fn truncate(&self, n: u64, enumeration: &Enumeration) -> Result<Expansion> {
        let mut kept = Vec::new();
        for (m, c) in self.local.terms() {
            if enumeration.rank(&m.z)? <= n {
                kept.push((m.clone(), *c));
            }
        }
        Ok(Expansion { center: self.center.clone(), local: Poly::from_terms(self.r(), self.d(), kept) })
    }

    /// `S_n` about `zeta`: re-expand, then truncate along the enumeration.
    pub fn partial_sum(&self, zeta: &[C64], n: u64, enumeration: &Enumeration) -> Result<Expansion> {
        self.recenter(zeta)?.truncate(n, enumeration)
    }
}

/// `S_n(f, w, ζ)(z) = Σ_{k<=n} γ_{N_k}(f, w, ζ) (z - ζ)^{N_k}`, kept symbolic in `w`.
pub fn partial_sum(f: &Poly, zeta: &[C64], n: u64, enumeration: &Enumeration) -> Result<Expansion> {
    if enumeration.dim() != f.d() {
        return Err(Error::DimensionMismatch { expected: f.d(), got: enumeration.dim() });
    }
    f.expand_about(zeta)?.truncate(n, enumeration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::capture_index;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_poly(rng: &mut ChaCha8Rng, r: usize, d: usize, max_deg: u32, terms: usize) -> Poly {
        let t = (0..terms).map(|_| {
            let w = (0..r).map(|_| rng.gen_range(0..=max_deg)).collect();
            let z = (0..d).map(|_| rng.gen_range(0..=max_deg)).collect();
            (Monomial::new(w, z), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        });
        Poly::from_terms(r, d, t)
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    // independent oracle: every monomial computed by repeated powu
    fn naive_eval(p: &Poly, w: &[C64], z: &[C64]) -> C64 {
        p.terms()
            .map(|(m, c)| {
                let mut t = *c;
                for (x, &e) in w.iter().zip(m.w.entries()) {
                    t *= x.powu(e);
                }
                for (x, &e) in z.iter().zip(m.z.entries()) {
                    t *= x.powu(e);
                }
                t
            })
            .sum()
    }

    fn abs_eval(p: &Poly, w: &[C64], z: &[C64]) -> f64 {
        let wa: Vec<C64> = w.iter().map(|x| C64::new(x.norm(), 0.0)).collect();
        let za: Vec<C64> = z.iter().map(|x| C64::new(x.norm(), 0.0)).collect();
        naive_eval(&p.map_coeffs(|_, c| C64::new(c.norm(), 0.0)), &wa, &za).re
    }

    #[test]
    fn eval_examples() {
        let p = Poly::from_terms(0, 2, [(Monomial::new(vec![], vec![1, 1]), c(1.0, 0.0))]);
        assert_eq!(p.eval(&[], &[c(2.0, 0.0), c(3.0, 0.0)]).unwrap(), c(6.0, 0.0));
        let zero = Poly::zero(1, 2);
        assert_eq!(zero.eval(&[c(5.0, 1.0)], &[c(2.0, 0.0), c(3.0, 0.0)]).unwrap(), c(0.0, 0.0));
        assert!(matches!(p.eval(&[], &[c(1.0, 0.0)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn eval_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (r, d) = (rng.gen_range(0..3), rng.gen_range(1..4));
            let p = random_poly(&mut rng, r, d, 6, 12);
            let w = random_point(&mut rng, r);
            let z = random_point(&mut rng, d);
            let got = p.eval(&w, &z).unwrap();
            let want = naive_eval(&p, &w, &z);
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn canonical_form_drops_zeros() {
        let m = Monomial::new(vec![], vec![2]);
        let p = Poly::from_terms(0, 1, [(m.clone(), c(1.0, 0.0)), (m, c(-1.0, 0.0))]);
        assert!(p.is_zero());
        let q = Poly::z_var(0, 1, 0);
        assert!((&q - &q).is_zero());
    }

    #[test]
    fn differentiate_examples() {
        let z2 = &Poly::z_var(0, 1, 0) * &Poly::z_var(0, 1, 0);
        assert_eq!(z2.differentiate(&DiffOp::identity(0, 1)), z2);
        let dz = z2.differentiate(&DiffOp::d_z(0, 1, 0));
        assert_eq!(dz, Poly::z_var(0, 1, 0).scale(c(2.0, 0.0)));
        assert!(Poly::constant(0, 1, c(3.0, 0.0)).differentiate(&DiffOp::d_z(0, 1, 0)).is_zero());
    }

    #[test]
    fn shift_center_examples() {
        let z = Poly::z_var(0, 1, 0);
        let z2 = &z * &z;
        let shifted = z2.shift_center(&[c(1.0, 0.0)]).unwrap();
        let want = Poly::from_terms(
            0,
            1,
            [
                (Monomial::new(vec![], vec![0]), c(1.0, 0.0)),
                (Monomial::new(vec![], vec![1]), c(2.0, 0.0)),
                (Monomial::new(vec![], vec![2]), c(1.0, 0.0)),
            ],
        );
        assert_eq!(shifted, want);

        let z1z2 = &Poly::z_var(0, 2, 0) * &Poly::z_var(0, 2, 1);
        let s = z1z2.shift_center(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        for e in [[0, 0], [1, 0], [0, 1], [1, 1]] {
            assert_eq!(s.coeff(&Monomial::new(vec![], e.to_vec())), c(1.0, 0.0));
        }
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn shift_round_trip_and_eval_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let (r, d) = (rng.gen_range(0..3), rng.gen_range(1..4));
            let p = random_poly(&mut rng, r, d, 6, 10);
            let zeta = random_point(&mut rng, d);
            let exp = p.expand_about(&zeta).unwrap();
            for _ in 0..50 {
                let w = random_point(&mut rng, r);
                let z = random_point(&mut rng, d);
                let a = p.eval(&w, &z).unwrap();
                let b = exp.eval(&w, &z).unwrap();
                // rounding scales with the modulus sums, not with the value
                let u: Vec<C64> = z.iter().zip(&zeta).map(|(x, y)| x - y).collect();
                let mag = abs_eval(&p, &w, &z).max(abs_eval(&exp.local, &w, &u)).max(1.0);
                assert!((a - b).norm() <= 1e-12 * mag);
            }
            let neg: Vec<C64> = zeta.iter().map(|x| -x).collect();
            let back = exp.local.shift_center(&neg).unwrap();
            let scale = p.l1_norm().max(1.0);
            for (m, cf) in p.terms() {
                assert!((back.coeff(m) - cf).norm() <= 1e-10 * scale);
            }
            for (m, cf) in back.terms() {
                assert!((p.coeff(m) - cf).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let z = Poly::z_var(0, 1, 0);
        let z2 = &z * &z;
        assert_eq!(z2.gamma(&[], &[c(0.0, 0.0)], &MultiIndex::new(vec![2])).unwrap(), c(1.0, 0.0));
        let wz = &Poly::w_var(1, 1, 0) * &Poly::z_var(1, 1, 0);
        assert_eq!(wz.gamma(&[c(3.0, 0.0)], &[c(0.0, 0.0)], &MultiIndex::new(vec![1])).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn gamma_agrees_with_shift_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let d = rng.gen_range(1..3);
            let p = random_poly(&mut rng, 1, d, 5, 8);
            let w = random_point(&mut rng, 1);
            let zeta = random_point(&mut rng, d);
            let local = p.shift_center(&zeta).unwrap();
            let coeffs = local.coefficients_in_w();
            for (zexp, a) in &coeffs {
                let want = a.eval(&w, &[]).unwrap();
                let got = p.gamma(&w, &zeta, zexp).unwrap();
                assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn partial_sum_small_cases() {
        let e = Enumeration::graded_lex(1);
        let z = Poly::z_var(0, 1, 0);
        let z2 = &z * &z;
        let s1 = partial_sum(&z2, &[c(0.0, 0.0)], 1, &e).unwrap();
        assert!(s1.local.is_zero());
        let s2 = partial_sum(&z2, &[c(0.0, 0.0)], 2, &e).unwrap();
        assert_eq!(s2.local, z2);
    }

    #[test]
    fn partial_sum_captures_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let e = Enumeration::graded_lex(2);
        for _ in 0..10 {
            let p = random_poly(&mut rng, 1, 2, 4, 8);
            let zeta = random_point(&mut rng, 2);
            let n = capture_index(&e, &p.degree_z()).unwrap();
            let full = p.expand_about(&zeta).unwrap();
            let s = partial_sum(&p, &zeta, n, &e).unwrap();
            assert_eq!(s, full);
            let s_next = partial_sum(&p, &zeta, n + 3, &e).unwrap();
            assert_eq!(s_next, full);
        }
    }

    #[test]
    fn nesting_adds_one_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = Enumeration::graded_lex(2);
        let p = random_poly(&mut rng, 1, 2, 3, 10);
        let zeta = random_point(&mut rng, 2);
        for n in 1..12 {
            let a = partial_sum(&p, &zeta, n, &e).unwrap();
            let b = partial_sum(&p, &zeta, n - 1, &e).unwrap();
            let diff = &a.local - &b.local;
            let nk = e.unrank(n).unwrap();
            assert!(diff.terms().all(|(m, _)| m.z == nk));
        }
    }
}
