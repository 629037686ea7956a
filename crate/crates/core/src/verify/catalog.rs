//! Enumeration `j ↦ f_j` of all polynomials with Gaussian-rational coefficients.
//!
//! Decoding of `j >= 1`:
//! 1. `(a, b) = π⁻¹(j - 1)` with the Cantor pairing `π`; the polynomial has
//!    `L = a + 1` coefficient slots.
//! 2. `b` is split into `L` naturals `x_1..x_L` by iterated Cantor unpairing
//!    (`x_1` first, the last slot takes the remainder).
//! 3. Each `x_i` splits as `π⁻¹(x_i) = (re_code, im_code)`; a code `c` maps to
//!    `0` for `c = 0`, otherwise to `±cw((c + 1) / 2)` with `+` for odd `c`,
//!    where `cw(n) = fusc(n) / fusc(n + 1)` runs through every positive
//!    rational once (Calkin–Wilf order).
//! 4. Slot `i` multiplies the `i`-th monomial of the graded-lex order over
//!    the `r + d` variables `(w, z)`.
//!
//! Every polynomial appears (many times, since trailing zero slots are allowed).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{cantor_pair, cantor_unpair, Enumeration};
use crate::poly::{Monomial, Poly, C64};

/// Largest index the catalog resolves.
pub const MAX_CATALOG_INDEX: u64 = 1 << 40;

/// Reduced fraction `num / den` with `den >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let g = gcd(num.unsigned_abs(), den).max(1);
        Ok(Rational { num: num / g as i64, den: den / g })
    }

    pub fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Stern's diatomic sequence.
fn fusc(mut n: u64) -> u64 {
    let (mut a, mut b) = (1u64, 0u64);
    while n > 0 {
        if n & 1 == 1 {
            b += a;
        } else {
            a += b;
        }
        n >>= 1;
    }
    b
}

fn code_to_rational(c: u64) -> Rational {
    if c == 0 {
        return Rational::zero();
    }
    let n = c.div_ceil(2);
    let (p, q) = (fusc(n), fusc(n + 1));
    let sign = if c % 2 == 1 { 1 } else { -1 };
    Rational { num: sign * p as i64, den: q }
}

/// Position of `p / q` (coprime, positive) in the Calkin–Wilf sequence.
fn calkin_wilf_index(mut p: u64, mut q: u64) -> Result<u64> {
    let mut bits = Vec::new();
    while (p, q) != (1, 1) {
        if p > q {
            bits.push(1u64);
            p -= q;
        } else {
            bits.push(0);
            q -= p;
        }
        if bits.len() > 62 {
            return Err(Error::CatalogIndex(u64::MAX));
        }
    }
    Ok(bits.iter().rev().fold(1u64, |n, b| (n << 1) | b))
}

fn rational_to_code(x: Rational) -> Result<u64> {
    if x.num == 0 {
        return Ok(0);
    }
    let n = calkin_wilf_index(x.num.unsigned_abs(), x.den)?;
    Ok(if x.num > 0 { 2 * n - 1 } else { 2 * n })
}

/// A decoded catalog entry: exact coefficients per graded-lex slot.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub index: u64,
    /// `(monomial, re, im)` in slot order, zeros included.
    pub slots: Vec<(Monomial, Rational, Rational)>,
}

/// The catalog for fixed dimensions `(r, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Catalog {
    pub r: usize,
    pub d: usize,
    pub max_index: u64,
}

impl Catalog {
    pub fn new(r: usize, d: usize) -> Self {
        Catalog { r, d, max_index: MAX_CATALOG_INDEX }
    }

    pub fn decode(&self, j: u64) -> Result<CatalogEntry> {
        if j == 0 || j > self.max_index {
            return Err(Error::CatalogIndex(j));
        }
        let (a, mut b) = cantor_unpair((j - 1) as u128);
        let slots = a as usize + 1;
        let order = Enumeration::graded_lex(self.r + self.d);
        let mut out = Vec::with_capacity(slots);
        for i in 0..slots {
            let x = if i + 1 == slots {
                b
            } else {
                let (head, rest) = cantor_unpair(b);
                b = rest;
                head
            };
            let (re, im) = cantor_unpair(x);
            let exps = order.unrank(i as u64)?;
            let e = exps.entries();
            out.push((
                Monomial::new(e[..self.r].to_vec(), e[self.r..].to_vec()),
                code_to_rational(re as u64),
                code_to_rational(im as u64),
            ));
        }
        Ok(CatalogEntry { index: j, slots: out })
    }

    /// Index of the entry with the given slot coefficients (in slot order).
    pub fn encode(&self, coeffs: &[(Rational, Rational)]) -> Result<u64> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("catalog entries have at least one slot".into()));
        }
        let overflow = || Error::CatalogIndex(u64::MAX);
        let xs = coeffs
            .iter()
            .map(|(re, im)| {
                cantor_pair(rational_to_code(*re)? as u128, rational_to_code(*im)? as u128).ok_or_else(overflow)
            })
            .collect::<Result<Vec<u128>>>()?;
        let mut b = *xs.last().expect("nonempty");
        for &x in xs[..xs.len() - 1].iter().rev() {
            b = cantor_pair(x, b).ok_or_else(overflow)?;
        }
        let k = cantor_pair(xs.len() as u128 - 1, b).ok_or_else(overflow)?;
        let j = u64::try_from(k + 1).map_err(|_| overflow())?;
        if j > self.max_index {
            return Err(Error::CatalogIndex(j));
        }
        Ok(j)
    }

    /// `f_j` as a floating-point polynomial.
    pub fn resolve(&self, j: u64) -> Result<Poly> {
        let entry = self.decode(j)?;
        Ok(Poly::from_terms(
            self.r,
            self.d,
            entry.slots.into_iter().map(|(m, re, im)| (m, C64::new(re.to_f64(), im.to_f64()))),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calkin_wilf_prefix() {
        let got: Vec<(i64, u64)> = (1..=8).map(code_to_rational).map(|q| (q.num, q.den)).collect();
        assert_eq!(got, vec![(1, 1), (-1, 1), (1, 2), (-1, 2), (2, 1), (-2, 1), (1, 3), (-1, 3)]);
        for n in 1..2000u64 {
            let (p, q) = (fusc(n), fusc(n + 1));
            assert_eq!(gcd(p, q), 1);
            assert_eq!(calkin_wilf_index(p, q).unwrap(), n);
        }
    }

    #[test]
    fn first_entries() {
        let cat = Catalog::new(0, 1);
        assert!(cat.resolve(1).unwrap().is_zero());
        // j = 2 decodes to two zero slots, j = 3 to the constant 1
        assert_eq!(cat.decode(2).unwrap().slots.len(), 2);
        assert!(cat.resolve(2).unwrap().is_zero());
        assert_eq!(cat.resolve(3).unwrap(), Poly::constant(0, 1, C64::new(1.0, 0.0)));
        assert!(matches!(cat.decode(0), Err(Error::CatalogIndex(0))));
        assert!(matches!(cat.decode(MAX_CATALOG_INDEX + 1), Err(Error::CatalogIndex(_))));
    }

    #[test]
    fn encode_inverts_decode() {
        let cat = Catalog::new(1, 2);
        for j in (1..5000u64).chain([123_456_789, 987_654_321_012]) {
            let e = cat.decode(j).unwrap();
            let coeffs: Vec<(Rational, Rational)> = e.slots.iter().map(|s| (s.1, s.2)).collect();
            assert_eq!(cat.encode(&coeffs).unwrap(), j, "j = {j}");
        }
    }

    #[test]
    fn every_small_polynomial_appears() {
        // 1 + (1/2) z over d = 1: slots (1, 0), (1/2, 0)
        let cat = Catalog::new(0, 1);
        let one = Rational::new(1, 1).unwrap();
        let half = Rational::new(1, 2).unwrap();
        let j = cat.encode(&[(one, Rational::zero()), (half, Rational::zero())]).unwrap();
        let p = cat.resolve(j).unwrap();
        assert_eq!(p.coeff(&Monomial::new(vec![], vec![0])), C64::new(1.0, 0.0));
        assert_eq!(p.coeff(&Monomial::new(vec![], vec![1])), C64::new(0.5, 0.0));
        assert_eq!(p.len(), 2);
    }
}
