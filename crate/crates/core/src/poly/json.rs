use serde::{Deserialize, Serialize};

use super::{Monomial, Poly, C64};
use crate::error::{Error, Result};

/// One serialized term: `{ "w_exp": [..], "z_exp": [..], "re": .., "im": .. }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    #[serde(default)]
    pub w_exp: Vec<u32>,
    pub z_exp: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

pub type TermList = Vec<PolyTerm>;

impl Poly {
    pub fn to_terms(&self) -> TermList {
        self.terms()
            .map(|(m, c)| PolyTerm { w_exp: m.w.entries().to_vec(), z_exp: m.z.entries().to_vec(), re: c.re, im: c.im })
            .collect()
    }

    /// Builds a polynomial from serialized terms. `r` and `d` are taken from the
    /// first term unless given; an empty list needs explicit dimensions.
    pub fn from_term_list(terms: &[PolyTerm], r: Option<usize>, d: Option<usize>) -> Result<Poly> {
        let r = r.or_else(|| terms.first().map(|t| t.w_exp.len()));
        let d = d.or_else(|| terms.first().map(|t| t.z_exp.len()));
        let (Some(r), Some(d)) = (r, d) else {
            return Err(Error::InvalidArgument("empty term list needs explicit dimensions".into()));
        };
        Poly::try_from_terms(
            r,
            d,
            terms.iter().map(|t| (Monomial::new(t.w_exp.clone(), t.z_exp.clone()), C64::new(t.re, t.im))),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_terms()).expect("terms serialize")
    }

    pub fn from_json(s: &str, r: Option<usize>, d: Option<usize>) -> Result<Poly> {
        let terms: TermList = serde_json::from_str(s)?;
        Poly::from_term_list(&terms, r, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let p = Poly::z_var(1, 1, 0).scale(C64::new(0.5, -2.0));
        let s = p.to_json();
        assert_eq!(s, r#"[{"w_exp":[0],"z_exp":[1],"re":0.5,"im":-2.0}]"#);
        assert_eq!(Poly::from_json(&s, None, None).unwrap(), p);
        assert!(Poly::from_json("[]", None, None).is_err());
        assert!(Poly::from_json("[]", Some(0), Some(1)).unwrap().is_zero());
        assert!(Poly::from_json(r#"[{"z_exp":[1],"re":1},{"z_exp":[1,2],"re":1}]"#, None, None).is_err());
    }
}
