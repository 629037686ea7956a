//! Multi-indices over ℕ^d, enumerations of ℕ^d, admissible index sets and
//! mixed-partial differential operators.
//!
//! An enumeration is a bijection `k ↦ N_k` between ℕ and ℕ^d. Partial sums
//! of a Taylor expansion are taken along such an enumeration, so every
//! certificate names the scheme it was computed under.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A tuple of non-negative integers with fixed dimension.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The unit vector `e_i` in dimension `dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise maximum.
    pub fn join(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn reversed(&self) -> MultiIndex {
        MultiIndex(self.0.iter().rev().copied().collect())
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of multi-indices in `dim` variables of total degree exactly `deg`.
fn count_eq(deg: u64, dim: usize) -> u128 {
    match dim {
        0 => (deg == 0) as u128,
        _ => binomial(deg + dim as u64 - 1, dim as u64 - 1),
    }
}

/// Number of multi-indices in `dim` variables of total degree at most `deg`.
fn count_le(deg: u64, dim: usize) -> u128 {
    binomial(deg + dim as u64, dim as u64)
}

fn to_u64(v: u128) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::InvalidArgument("enumeration rank overflows u64".into()))
}

fn glex_rank(m: &MultiIndex) -> Result<u64> {
    let d = m.dim();
    let deg = m.total();
    let mut acc: u128 = if deg == 0 { 0 } else { count_le(deg - 1, d) };
    let mut rem = deg;
    for i in 0..d.saturating_sub(1) {
        let k = d - i - 1;
        for v in 0..m[i] as u64 {
            acc = acc.saturating_add(count_eq(rem - v, k));
        }
        rem -= m[i] as u64;
    }
    to_u64(acc)
}

fn glex_unrank(d: usize, k: u64) -> MultiIndex {
    let k = k as u128;
    let mut deg = 0u64;
    while count_le(deg, d) <= k {
        deg += 1;
    }
    let mut r = if deg == 0 { k } else { k - count_le(deg - 1, d) };
    let mut out = vec![0u32; d];
    let mut rem = deg;
    for (i, slot) in out.iter_mut().enumerate().take(d - 1) {
        let parts = d - i - 1;
        let mut v = 0u64;
        loop {
            let c = count_eq(rem - v, parts);
            if r < c {
                break;
            }
            r -= c;
            v += 1;
        }
        *slot = v as u32;
        rem -= v;
    }
    out[d - 1] = rem as u32;
    MultiIndex(out)
}

pub(crate) fn cantor_pair(x: u128, y: u128) -> Option<u128> {
    let s = x.checked_add(y)?;
    s.checked_mul(s + 1).map(|t| t / 2)?.checked_add(y)
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub(crate) fn cantor_unpair(k: u128) -> (u128, u128) {
    let w = (isqrt(8 * k + 1) - 1) / 2;
    let t = w * (w + 1) / 2;
    let y = k - t;
    (w - y, y)
}

fn cantor_rank(m: &[u32]) -> Result<u64> {
    match m.len() {
        1 => Ok(m[0] as u64),
        _ => {
            let rest = cantor_rank(&m[1..])? as u128;
            cantor_pair(m[0] as u128, rest)
                .ok_or_else(|| Error::InvalidArgument("cantor rank overflows".into()))
                .and_then(to_u64)
        }
    }
}

fn cantor_unrank(d: usize, k: u64, out: &mut Vec<u32>) {
    if d == 1 {
        out.push(k as u32);
        return;
    }
    let (a, b) = cantor_unpair(k as u128);
    out.push(a as u32);
    cantor_unrank(d - 1, b as u64, out);
}

/// Ordering scheme of an enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Total degree first, then lexicographic ascending: (0,1) before (1,0).
    GradedLex,
    /// Total degree first, then lexicographic on the reversed tuple.
    GradedRevLex,
    /// Iterated Cantor pairing `N_k = (a, unrank_{d-1}(b))` with `(a, b) = π⁻¹(k)`.
    DiagonalCantor,
    /// A user table, optionally continued in graded-lex order past its end.
    ExplicitTable { entries: Vec<MultiIndex>, extend: bool },
}

/// A bijection ℕ → ℕ^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    dim: usize,
    scheme: Scheme,
    // graded-lex ranks of explicit table entries, sorted
    table_ranks: Vec<u64>,
}

impl Enumeration {
    pub fn graded_lex(dim: usize) -> Self {
        Self::catalog(dim, Scheme::GradedLex)
    }

    pub fn graded_revlex(dim: usize) -> Self {
        Self::catalog(dim, Scheme::GradedRevLex)
    }

    pub fn diagonal_cantor(dim: usize) -> Self {
        Self::catalog(dim, Scheme::DiagonalCantor)
    }

    fn catalog(dim: usize, scheme: Scheme) -> Self {
        assert!(dim >= 1, "enumeration dimension must be positive");
        Enumeration { dim, scheme, table_ranks: Vec::new() }
    }

    /// Builds an explicit-table enumeration. Entries must be distinct and of
    /// dimension `dim`; with `extend` the remaining multi-indices follow in
    /// graded-lex order.
    pub fn explicit(dim: usize, entries: Vec<MultiIndex>, extend: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidTable("dimension must be positive".into()));
        }
        let mut ranks = Vec::with_capacity(entries.len());
        for e in &entries {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.dim() });
            }
            ranks.push(glex_rank(e)?);
        }
        ranks.sort_unstable();
        if ranks.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTable("duplicate entries".into()));
        }
        Ok(Enumeration { dim, scheme: Scheme::ExplicitTable { entries, extend }, table_ranks: ranks })
    }

    /// Parses a scheme tag (`graded-lex`, `graded-revlex`, `diagonal-cantor`).
    pub fn from_tag(tag: &str, dim: usize) -> Result<Self> {
        match tag {
            "graded-lex" => Ok(Self::graded_lex(dim)),
            "graded-revlex" => Ok(Self::graded_revlex(dim)),
            "diagonal-cantor" => Ok(Self::diagonal_cantor(dim)),
            other => Err(Error::UnknownTag(other.to_string())),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.scheme {
            Scheme::GradedLex => "graded-lex",
            Scheme::GradedRevLex => "graded-revlex",
            Scheme::DiagonalCantor => "diagonal-cantor",
            Scheme::ExplicitTable { .. } => "explicit-table",
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// True when `|N_k|` is non-decreasing in `k`.
    pub fn is_graded(&self) -> bool {
        match &self.scheme {
            Scheme::GradedLex | Scheme::GradedRevLex => true,
            Scheme::DiagonalCantor => self.dim <= 2,
            Scheme::ExplicitTable { entries, extend } => {
                if !extend {
                    return false;
                }
                let monotone = entries.windows(2).all(|w| w[0].total() <= w[1].total());
                let Some(top) = entries.iter().map(|e| e.total()).max() else {
                    return true;
                };
                // every multi-index of degree < top must already be in the table
                let below = if top == 0 { 0 } else { count_le(top - 1, self.dim) };
                let covered = self.table_ranks.iter().filter(|&&r| (r as u128) < below).count();
                monotone && covered as u128 == below
            }
        }
    }

    /// `N_k`.
    pub fn unrank(&self, k: u64) -> Result<MultiIndex> {
        match &self.scheme {
            Scheme::GradedLex => Ok(glex_unrank(self.dim, k)),
            Scheme::GradedRevLex => Ok(glex_unrank(self.dim, k).reversed()),
            Scheme::DiagonalCantor => {
                let mut out = Vec::with_capacity(self.dim);
                cantor_unrank(self.dim, k, &mut out);
                Ok(MultiIndex(out))
            }
            Scheme::ExplicitTable { entries, extend } => {
                if (k as usize) < entries.len() {
                    return Ok(entries[k as usize].clone());
                }
                if !extend {
                    return Err(Error::BeyondTable { index: k, len: entries.len() });
                }
                let mut g = k - entries.len() as u64;
                for &t in &self.table_ranks {
                    if t <= g {
                        g += 1;
                    } else {
                        break;
                    }
                }
                Ok(glex_unrank(self.dim, g))
            }
        }
    }

    /// The position `k` with `N_k = m`.
    pub fn rank(&self, m: &MultiIndex) -> Result<u64> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.dim() });
        }
        match &self.scheme {
            Scheme::GradedLex => glex_rank(m),
            Scheme::GradedRevLex => glex_rank(&m.reversed()),
            Scheme::DiagonalCantor => cantor_rank(m.entries()),
            Scheme::ExplicitTable { entries, extend } => {
                if let Some(pos) = entries.iter().position(|e| e == m) {
                    return Ok(pos as u64);
                }
                if !extend {
                    return Err(Error::NotInTable(m.entries().to_vec()));
                }
                let g = glex_rank(m)?;
                let below = self.table_ranks.partition_point(|&t| t < g) as u64;
                Ok(entries.len() as u64 + g - below)
            }
        }
    }

    /// Index of the first multi-index of total degree `deg`, for graded schemes.
    pub fn first_index_of_degree(&self, deg: u64) -> Result<u64> {
        if !self.is_graded() {
            return Err(Error::NotGraded(self.tag().into()));
        }
        if deg == 0 {
            return Ok(0);
        }
        to_u64(count_le(deg - 1, self.dim))
    }
}

/// Least `n'` such that every `N_k` inside the box `∏ [0, l_i]` has `k <= n'`.
///
/// For graded schemes the box has a unique element of maximal total degree,
/// namely `l` itself, so the answer is `rank(l)`. Other schemes scan the box.
pub fn capture_index(enumeration: &Enumeration, degrees: &MultiIndex) -> Result<u64> {
    if degrees.dim() != enumeration.dim() {
        return Err(Error::DimensionMismatch { expected: enumeration.dim(), got: degrees.dim() });
    }
    if enumeration.is_graded() {
        return enumeration.rank(degrees);
    }
    let size: u128 = degrees.entries().iter().map(|&l| l as u128 + 1).product();
    if size > 10_000_000 {
        return Err(Error::TooManyPoints(size));
    }
    let mut best = 0;
    for m in BoxIter::new(degrees) {
        best = best.max(enumeration.rank(&m)?);
    }
    Ok(best)
}

/// Iterates the integer box `∏ [0, l_i]` in lexicographic order.
pub struct BoxIter {
    bounds: Vec<u32>,
    current: Option<Vec<u32>>,
}

impl BoxIter {
    pub fn new(bounds: &MultiIndex) -> Self {
        BoxIter { bounds: bounds.entries().to_vec(), current: Some(vec![0; bounds.dim()]) }
    }
}

impl Iterator for BoxIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let cur = self.current.take()?;
        let out = MultiIndex(cur.clone());
        let mut next = cur;
        let mut i = next.len();
        while i > 0 {
            i -= 1;
            if next[i] < self.bounds[i] {
                next[i] += 1;
                self.current = Some(next);
                return Some(out);
            }
            next[i] = 0;
        }
        Some(out)
    }
}

/// An infinite subset μ ⊆ ℕ of admissible partial-sum indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexSet {
    All,
    /// `{a + b·t : t ∈ ℕ}` with `b >= 1`.
    Arithmetic {
        start: u64,
        step: u64,
    },
    /// Sorted values; with `and_beyond` every integer past the last value is included.
    List {
        values: Vec<u64>,
        and_beyond: bool,
    },
}

impl IndexSet {
    /// Parses `mu:all`, `mu:arith:a,b` or `mu:list:v1,v2,...[+]`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let bad = || Error::UnknownTag(tag.to_string());
        let rest = tag.strip_prefix("mu:").ok_or_else(bad)?;
        if rest == "all" {
            return Ok(IndexSet::All);
        }
        if let Some(args) = rest.strip_prefix("arith:") {
            let mut it = args.split(',').map(|s| s.trim().parse::<u64>());
            let (Some(Ok(start)), Some(Ok(step)), None) = (it.next(), it.next(), it.next()) else {
                return Err(bad());
            };
            if step == 0 {
                return Err(Error::InvalidArgument("arithmetic index set needs step >= 1".into()));
            }
            return Ok(IndexSet::Arithmetic { start, step });
        }
        if let Some(args) = rest.strip_prefix("list:") {
            let (body, and_beyond) = match args.strip_suffix('+') {
                Some(b) => (b, true),
                None => (args, false),
            };
            let mut values = body
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            values.sort_unstable();
            values.dedup();
            return Ok(IndexSet::List { values, and_beyond });
        }
        Err(bad())
    }

    pub fn tag(&self) -> String {
        match self {
            IndexSet::All => "mu:all".into(),
            IndexSet::Arithmetic { start, step } => format!("mu:arith:{start},{step}"),
            IndexSet::List { values, and_beyond } => {
                let body: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                format!("mu:list:{}{}", body.join(","), if *and_beyond { "+" } else { "" })
            }
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            IndexSet::All => true,
            IndexSet::Arithmetic { start, step } => n >= *start && (n - start).is_multiple_of(*step),
            IndexSet::List { values, and_beyond } => {
                values.binary_search(&n).is_ok() || (*and_beyond && values.last().is_none_or(|&last| n > last))
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        !matches!(self, IndexSet::List { and_beyond: false, .. })
    }

    /// Smallest member `>= n`, if one exists within `n + scan_bound`.
    pub fn next_at_or_after(&self, n: u64, scan_bound: u64) -> Option<u64> {
        let found = match self {
            IndexSet::All => Some(n),
            IndexSet::Arithmetic { start, step } => {
                if n <= *start {
                    Some(*start)
                } else {
                    let t = (n - start).div_ceil(*step);
                    start.checked_add(t.checked_mul(*step)?)
                }
            }
            IndexSet::List { values, and_beyond } => {
                let pos = values.partition_point(|&v| v < n);
                match values.get(pos) {
                    Some(&v) => Some(v),
                    None if *and_beyond => Some(n.max(values.last().map_or(0, |&l| l + 1))),
                    None => None,
                }
            }
        }?;
        (found - n <= scan_bound).then_some(found)
    }
}

/// A mixed partial derivative `∂^{|a|+|b|} / ∂w^a ∂z^b`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DiffOp {
    pub w: MultiIndex,
    pub z: MultiIndex,
}

impl DiffOp {
    pub fn identity(r: usize, d: usize) -> Self {
        DiffOp { w: MultiIndex::zeros(r), z: MultiIndex::zeros(d) }
    }

    /// Splits a concatenated `(w, z)` exponent tuple after the first `r` entries.
    pub fn from_exponents(r: usize, exponents: &MultiIndex) -> Self {
        let e = exponents.entries();
        DiffOp { w: MultiIndex(e[..r].to_vec()), z: MultiIndex(e[r..].to_vec()) }
    }

    pub fn d_z(r: usize, d: usize, i: usize) -> Self {
        DiffOp { w: MultiIndex::zeros(r), z: MultiIndex::unit(d, i) }
    }

    pub fn d_w(r: usize, d: usize, i: usize) -> Self {
        DiffOp { w: MultiIndex::unit(r, i), z: MultiIndex::zeros(d) }
    }

    pub fn exponents(&self) -> MultiIndex {
        let mut v = self.w.entries().to_vec();
        v.extend_from_slice(self.z.entries());
        MultiIndex(v)
    }

    pub fn order(&self) -> u64 {
        self.w.total() + self.z.total()
    }

    pub fn is_identity(&self) -> bool {
        self.order() == 0
    }

    /// Short label such as `id` or `w^(1) z^(0)`, used as a report key.
    pub fn label(&self) -> String {
        if self.is_identity() {
            return "id".into();
        }
        format!("D{}", self.exponents())
    }
}

/// All mixed partials of total order `<= l` in `r + d` coordinates, identity
/// first, in graded-lex order of the exponent tuple. There are `C(l+r+d, r+d)`.
pub fn family_fl(r: usize, d: usize, l: u32) -> Vec<DiffOp> {
    let n = r + d;
    assert!(n >= 1, "need at least one coordinate");
    let count = count_le(l as u64, n) as u64;
    let e = Enumeration::graded_lex(n);
    (0..count).map(|k| DiffOp::from_exponents(r, &e.unrank(k).expect("graded-lex unrank is total"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    // Brute force: every multi-index of total degree <= max_deg, sorted by
    // (degree, lexicographic).
    fn brute_graded_lex(d: usize, max_deg: u32) -> Vec<MultiIndex> {
        let mut all: Vec<MultiIndex> =
            BoxIter::new(&MultiIndex::new(vec![max_deg; d])).filter(|m| m.total() <= max_deg as u64).collect();
        all.sort_by(|a, b| a.total().cmp(&b.total()).then_with(|| a.cmp(b)));
        all
    }

    #[test]
    fn one_dimensional_schemes_are_identity() {
        for e in [Enumeration::graded_lex(1), Enumeration::graded_revlex(1), Enumeration::diagonal_cantor(1)] {
            assert_eq!(e.unrank(3).unwrap(), mi(&[3]));
            assert_eq!(e.rank(&mi(&[17])).unwrap(), 17);
        }
    }

    #[test]
    fn graded_lex_first_six_in_two_variables() {
        let e = Enumeration::graded_lex(2);
        let got: Vec<_> = (0..6).map(|k| e.unrank(k).unwrap()).collect();
        let want = vec![mi(&[0, 0]), mi(&[0, 1]), mi(&[1, 0]), mi(&[0, 2]), mi(&[1, 1]), mi(&[2, 0])];
        assert_eq!(got, want);
        assert_eq!(brute_graded_lex(2, 2), want);
    }

    #[test]
    fn graded_lex_matches_brute_force_sort() {
        for d in 1..=4 {
            let brute = brute_graded_lex(d, 6);
            let e = Enumeration::graded_lex(d);
            for (k, m) in brute.iter().enumerate() {
                assert_eq!(&e.unrank(k as u64).unwrap(), m);
                assert_eq!(e.rank(m).unwrap(), k as u64);
            }
        }
    }

    #[test]
    fn bijection_all_schemes() {
        for d in 1..=3 {
            for e in [Enumeration::graded_lex(d), Enumeration::graded_revlex(d), Enumeration::diagonal_cantor(d)] {
                for k in 0..10_000u64 {
                    let m = e.unrank(k).unwrap();
                    assert_eq!(m.dim(), d);
                    assert_eq!(e.rank(&m).unwrap(), k, "{} d={d}", e.tag());
                }
            }
        }
    }

    #[test]
    fn cantor_two_dim_is_graded() {
        let e = Enumeration::diagonal_cantor(2);
        assert!(e.is_graded());
        assert!(!Enumeration::diagonal_cantor(3).is_graded());
        let mut prev = 0;
        for k in 0..2000 {
            let t = e.unrank(k).unwrap().total();
            assert!(t >= prev);
            prev = t;
        }
    }

    #[test]
    fn capture_index_examples() {
        assert_eq!(capture_index(&Enumeration::graded_lex(1), &mi(&[5])).unwrap(), 5);
        assert_eq!(capture_index(&Enumeration::graded_lex(2), &mi(&[1, 1])).unwrap(), 4);
        assert_eq!(capture_index(&Enumeration::graded_lex(2), &mi(&[0, 0])).unwrap(), 0);
    }

    #[test]
    fn capture_index_scans_for_non_graded() {
        let e = Enumeration::diagonal_cantor(3);
        let l = mi(&[2, 1, 2]);
        let want = BoxIter::new(&l).map(|m| e.rank(&m).unwrap()).max().unwrap();
        assert_eq!(capture_index(&e, &l).unwrap(), want);
    }

    #[test]
    fn explicit_table_with_extension() {
        let table = vec![mi(&[1, 0]), mi(&[0, 0]), mi(&[0, 1])];
        let e = Enumeration::explicit(2, table.clone(), true).unwrap();
        assert!(!e.is_graded());
        let graded = Enumeration::explicit(2, vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1]), mi(&[2, 0])], true).unwrap();
        assert!(graded.is_graded());
        assert_eq!(graded.unrank(4).unwrap(), mi(&[0, 2]));
        for k in 0..500 {
            let m = e.unrank(k).unwrap();
            assert_eq!(e.rank(&m).unwrap(), k);
        }
        assert_eq!(e.unrank(3).unwrap(), mi(&[0, 2]));

        let closed = Enumeration::explicit(2, table, false).unwrap();
        assert!(matches!(closed.unrank(3), Err(Error::BeyondTable { .. })));
        assert!(matches!(closed.rank(&mi(&[4, 4])), Err(Error::NotInTable(_))));
        assert!(Enumeration::explicit(2, vec![mi(&[0, 0]), mi(&[0, 0])], true).is_err());
    }

    #[test]
    fn explicit_table_not_graded_when_skipping_degrees() {
        let e = Enumeration::explicit(1, vec![mi(&[3])], true).unwrap();
        assert!(!e.is_graded());
    }

    #[test]
    fn index_set_tags() {
        let even = IndexSet::from_tag("mu:arith:0,2").unwrap();
        assert!(even.contains(4) && !even.contains(5));
        assert_eq!(even.next_at_or_after(5, 10), Some(6));
        assert_eq!(even.tag(), "mu:arith:0,2");
        let list = IndexSet::from_tag("mu:list:3,9,20+").unwrap();
        assert!(list.contains(9) && !list.contains(10) && list.contains(21));
        assert_eq!(list.next_at_or_after(10, 100), Some(20));
        assert_eq!(list.next_at_or_after(25, 100), Some(25));
        let finite = IndexSet::from_tag("mu:list:1,2").unwrap();
        assert!(!finite.is_infinite());
        assert_eq!(finite.next_at_or_after(3, 100), None);
        assert!(IndexSet::from_tag("mu:arith:1,0").is_err());
        assert!(IndexSet::from_tag("all").is_err());
        assert_eq!(IndexSet::All.next_at_or_after(7, 0), Some(7));
    }

    #[test]
    fn family_counts_and_identity() {
        let f = family_fl(0, 1, 1);
        assert_eq!(f.len(), 2);
        assert!(f[0].is_identity());
        assert_eq!(f[1], DiffOp::d_z(0, 1, 0));

        let f = family_fl(1, 1, 2);
        assert_eq!(f.len() as u128, binomial(4, 2));
        // explicit generation cross-check
        let mut explicit = Vec::new();
        for a in 0..=2u32 {
            for b in 0..=2u32 {
                if a + b <= 2 {
                    explicit.push((a, b));
                }
            }
        }
        assert_eq!(explicit.len(), f.len());
        for l in 1..5 {
            assert!(family_fl(2, 1, l).iter().any(DiffOp::is_identity));
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(60, 30), 118264581564861424);
        assert_eq!(binomial(3, 5), 0);
    }
}
