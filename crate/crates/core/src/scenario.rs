//! Scenario files: the JSON input of the `construct` command.
//!
//! Compacts are given either as explicit factor lists or by index into the
//! exhaustions (`{"exhaustion": p}`) and outer compacts (`{"tm": m}`) of the
//! domains. Targets are term lists or catalog entries (`{"catalog": j}`).
//! Tolerances are given directly or as `s` with tolerance `1/s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainProduct, PlanarCompact, ProductCompact};
use crate::multiindex::{Enumeration, IndexSet};
use crate::poly::{Poly, TermList};
use crate::universal::{plan_stages, CenterMode, ConstructOptions, StagePlan, StageRequest};
use crate::verify::{Catalog, Variant};

/// A compact given explicitly or by index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    Factors(Vec<PlanarCompact>),
    Exhaustion { exhaustion: u32 },
    Tm { tm: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Terms(TermList),
    Catalog { catalog: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub outer: SetSpec,
    pub inner: SetSpec,
    /// Defaults to the first exhaustion compact of the parameter domains.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter_set: Option<SetSpec>,
    pub target: TargetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
}

fn default_enumeration() -> String {
    "graded-lex".into()
}

fn default_mu() -> String {
    "mu:all".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// `G`; empty when there are no parameters.
    #[serde(default)]
    pub parameter_domains: Vec<Domain>,
    /// `Ω`.
    pub domains: Vec<Domain>,
    #[serde(default = "default_enumeration")]
    pub enumeration: String,
    #[serde(default = "default_mu")]
    pub mu: String,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub center: CenterMode,
    #[serde(default)]
    pub options: ConstructOptions,
    pub schedule: Vec<StageSpec>,
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn r(&self) -> usize {
        self.parameter_domains.len()
    }

    pub fn d(&self) -> usize {
        self.domains.len()
    }

    fn resolve_set(&self, spec: &SetSpec, product: &DomainProduct, tm_allowed: bool) -> Result<ProductCompact> {
        let closure = self.variant.closure();
        let set = match spec {
            SetSpec::Factors(f) => ProductCompact::new(f.clone()),
            SetSpec::Exhaustion { exhaustion } => product.exhaustion(*exhaustion, closure)?,
            SetSpec::Tm { tm } if tm_allowed => product.enumerate_tm(*tm, closure)?,
            SetSpec::Tm { .. } => return Err(Error::InvalidArgument("tm indices only name outer compacts".into())),
        };
        if set.dim() != product.dim() {
            return Err(Error::DimensionMismatch { expected: product.dim(), got: set.dim() });
        }
        Ok(set)
    }

    /// Resolves indices and checks dimensions, then lays out the stages.
    pub fn plan(&self) -> Result<StagePlan> {
        let (r, d) = (self.r(), self.d());
        if d == 0 {
            return Err(Error::InvalidArgument("a scenario needs at least one domain".into()));
        }
        for dom in self.parameter_domains.iter().chain(&self.domains) {
            dom.validate()?;
        }
        let g = DomainProduct::new(self.parameter_domains.clone());
        let omega = DomainProduct::new(self.domains.clone());
        let enumeration = Enumeration::from_tag(&self.enumeration, d)?;
        let mu = IndexSet::from_tag(&self.mu)?;
        let catalog = Catalog::new(r, d);
        let mut requests = Vec::with_capacity(self.schedule.len());
        for st in &self.schedule {
            let tolerance = match (st.tolerance, st.s) {
                (Some(t), None) => t,
                (None, Some(s)) if s > 0 => 1.0 / s as f64,
                _ => return Err(Error::InvalidArgument("each stage needs exactly one of tolerance or s >= 1".into())),
            };
            let parameter_set = match &st.parameter_set {
                Some(spec) => self.resolve_set(spec, &g, false)?,
                None if r == 0 => ProductCompact::empty(),
                None => g.exhaustion(1, self.variant.closure())?,
            };
            let target = match &st.target {
                TargetSpec::Terms(t) => Poly::from_term_list(t, Some(r), Some(d))?,
                TargetSpec::Catalog { catalog: j } => catalog.resolve(*j)?,
            };
            requests.push(StageRequest {
                outer: self.resolve_set(&st.outer, &omega, true)?,
                target,
                inner: self.resolve_set(&st.inner, &omega, false)?,
                parameter_set,
                tolerance,
                f_side: None,
            });
        }
        plan_stages(r, requests, mu, enumeration, self.variant, self.center.clone(), Some(&omega), self.options.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "domains": [{"type": "disk", "center": [0, 0], "radius": 1}],
        "schedule": [{
            "outer": [{"type": "disk", "center": [2, 0], "radius": 0.25}],
            "inner": [{"type": "disk", "center": [0, 0], "radius": 0.5}],
            "target": [{"z_exp": [0], "re": 1}],
            "tolerance": 1e-3
        }]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let sc = Scenario::from_json(SMALL).unwrap();
        assert_eq!(sc.enumeration, "graded-lex");
        assert_eq!(sc.mu, "mu:all");
        assert_eq!(sc.variant, Variant::Plain);
        assert_eq!(sc.options, ConstructOptions::default());
        let plan = sc.plan().unwrap();
        assert_eq!((plan.r, plan.d), (0, 1));
        assert_eq!(plan.requests[0].tolerance, 1e-3);
        let back = Scenario::from_json(&sc.to_json()).unwrap();
        assert_eq!(back, sc);
    }

    #[test]
    fn indexed_sets_and_catalog_targets() {
        let json = r#"{
            "domains": [{"type": "disk", "center": [0, 0], "radius": 1}],
            "schedule": [{"outer": {"tm": 1}, "inner": {"exhaustion": 2}, "target": {"catalog": 3}, "s": 10}]
        }"#;
        let plan = Scenario::from_json(json).unwrap().plan().unwrap();
        let req = &plan.requests[0];
        assert_eq!(req.tolerance, 0.1);
        assert_eq!(req.target, Catalog::new(0, 1).resolve(3).unwrap());
        assert_eq!(req.inner.dim(), 1);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(Scenario::from_json("{"), Err(Error::Json(_))));
        let unknown = SMALL.replacen("\"schedule\"", "\"typo\": 1, \"schedule\"", 1);
        assert!(matches!(Scenario::from_json(&unknown), Err(Error::Json(_))));
        let both = SMALL.replace("\"tolerance\": 1e-3", "\"tolerance\": 1e-3, \"s\": 4");
        assert!(matches!(Scenario::from_json(&both).unwrap().plan(), Err(Error::InvalidArgument(_))));
        let wrong_dim = SMALL.replace("\"z_exp\": [0]", "\"z_exp\": [0, 0]");
        assert!(Scenario::from_json(&wrong_dim).unwrap().plan().is_err());
        let tm_inner =
            SMALL.replace(r#""inner": [{"type": "disk", "center": [0, 0], "radius": 0.5}]"#, r#""inner": {"tm": 3}"#);
        assert!(matches!(Scenario::from_json(&tm_inner).unwrap().plan(), Err(Error::InvalidArgument(_))));
    }
}
