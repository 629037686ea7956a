use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Expansion, Monomial, Poly, PolyTerm, C64};
use crate::error::{Error, Result};
use crate::multiindex::Enumeration;

/// Coefficients appended by one construction stage.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub stage: usize,
    /// Highest enumeration index this block materializes.
    pub through: u64,
    /// `k ↦ a_k(w)`, each a polynomial in the parameters only.
    pub coeffs: BTreeMap<u64, Poly>,
}

/// Append-only coefficient sequence `a_k(w)` of a series `Σ a_k(w) (z - ζ)^{N_k}`.
///
/// Blocks only ever add coefficients at indices past the frozen prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientStream {
    enumeration: Enumeration,
    center: Vec<C64>,
    r: usize,
    blocks: Vec<Block>,
}

impl CoefficientStream {
    pub fn new(enumeration: Enumeration, center: Vec<C64>, r: usize) -> Result<Self> {
        if enumeration.dim() != center.len() {
            return Err(Error::DimensionMismatch { expected: enumeration.dim(), got: center.len() });
        }
        Ok(CoefficientStream { enumeration, center, r, blocks: Vec::new() })
    }

    pub fn enumeration(&self) -> &Enumeration {
        &self.enumeration
    }

    pub fn center(&self) -> &[C64] {
        &self.center
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.center.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Last index covered by the materialized blocks.
    pub fn frozen_through(&self) -> Option<u64> {
        self.blocks.last().map(|b| b.through)
    }

    pub fn coefficient(&self, k: u64) -> Option<&Poly> {
        self.blocks.iter().find_map(|b| b.coeffs.get(&k))
    }

    /// Appends a block of coefficients. Every index must lie strictly after the
    /// frozen prefix and at or before `through`.
    pub fn append_block(&mut self, stage: usize, coeffs: BTreeMap<u64, Poly>, through: u64) -> Result<()> {
        let frozen = self.frozen_through();
        if let Some(f) = frozen {
            if through < f {
                return Err(Error::FrozenPrefix { index: through, frozen: f });
            }
        }
        for (&k, a) in &coeffs {
            if let Some(f) = frozen {
                if k <= f {
                    return Err(Error::FrozenPrefix { index: k, frozen: f });
                }
            }
            if k > through {
                return Err(Error::InvalidArgument(format!("block index {k} beyond its declared end {through}")));
            }
            if a.r() != self.r || a.d() != 0 {
                return Err(Error::DimensionMismatch { expected: self.r, got: a.r() });
            }
        }
        let coeffs = coeffs.into_iter().filter(|(_, a)| !a.is_zero()).collect();
        self.blocks.push(Block { stage, through, coeffs });
        Ok(())
    }

    /// Appends the terms of `local`, a polynomial in powers of `z - center`.
    pub fn append_local(&mut self, stage: usize, local: &Poly, through: u64) -> Result<()> {
        if local.r() != self.r || local.d() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: local.d() });
        }
        let mut coeffs = BTreeMap::new();
        for (zexp, a) in local.coefficients_in_w() {
            coeffs.insert(self.enumeration.rank(&zexp)?, a);
        }
        self.append_block(stage, coeffs, through)
    }

    /// `Σ_{k<=n} a_k(w) (z - ζ)^{N_k}`. An empty stream is the zero series.
    pub fn partial_sum(&self, n: u64) -> Result<Expansion> {
        if let Some(through) = self.frozen_through() {
            if n > through {
                return Err(Error::BeyondMaterialized { requested: n, through });
            }
        }
        let mut terms = Vec::new();
        for block in &self.blocks {
            for (&k, a) in block.coeffs.range(..=n) {
                let z = self.enumeration.unrank(k)?;
                for (m, c) in a.terms() {
                    terms.push((Monomial { w: m.w.clone(), z: z.clone() }, *c));
                }
            }
        }
        Ok(Expansion { center: self.center.clone(), local: Poly::from_terms(self.r, self.d(), terms) })
    }

    /// The whole materialized prefix.
    pub fn materialized(&self) -> Result<Expansion> {
        self.partial_sum(self.frozen_through().unwrap_or(0))
    }

    pub fn to_doc(&self) -> StreamDoc {
        StreamDoc {
            enumeration: self.enumeration.tag().to_string(),
            explicit_table: match self.enumeration.scheme() {
                crate::multiindex::Scheme::ExplicitTable { entries, extend } => Some(ExplicitTableDoc {
                    entries: entries.iter().map(|e| e.entries().to_vec()).collect(),
                    extend: *extend,
                }),
                _ => None,
            },
            center: self.center.iter().map(|c| [c.re, c.im]).collect(),
            r: self.r,
            d: self.d(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockDoc {
                    stage: b.stage,
                    through: b.through,
                    coeffs: b.coeffs.iter().map(|(&k, a)| CoeffDoc { k, terms: a.to_terms() }).collect(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &StreamDoc) -> Result<Self> {
        let enumeration = match &doc.explicit_table {
            Some(t) => Enumeration::explicit(
                doc.d,
                t.entries.iter().map(|e| crate::multiindex::MultiIndex::new(e.clone())).collect(),
                t.extend,
            )?,
            None => Enumeration::from_tag(&doc.enumeration, doc.d)?,
        };
        let center = doc.center.iter().map(|p| C64::new(p[0], p[1])).collect();
        let mut s = CoefficientStream::new(enumeration, center, doc.r)?;
        for b in &doc.blocks {
            let mut coeffs = BTreeMap::new();
            for c in &b.coeffs {
                coeffs.insert(c.k, Poly::from_term_list(&c.terms, Some(doc.r), Some(0))?);
            }
            s.append_block(b.stage, coeffs, b.through)?;
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("stream serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitTableDoc {
    pub entries: Vec<Vec<u32>>,
    pub extend: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffDoc {
    pub k: u64,
    pub terms: Vec<PolyTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockDoc {
    pub stage: usize,
    pub through: u64,
    pub coeffs: Vec<CoeffDoc>,
}

/// On-disk form of a [`CoefficientStream`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StreamDoc {
    pub enumeration: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_table: Option<ExplicitTableDoc>,
    pub center: Vec<[f64; 2]>,
    pub r: usize,
    pub d: usize,
    pub blocks: Vec<BlockDoc>,
}
