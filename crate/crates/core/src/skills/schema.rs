use serde::Deserialize;
use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::sim::World;

use super::kind::SkillKind;
use super::spec::{ParamValue, SkillInvocation};
use super::SkillError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamType {
    Vector,
    Id,
    Number,
}

impl ParamType {
    fn matches(self, v: &ParamValue) -> bool {
        matches!(
            (self, v),
            (ParamType::Vector, ParamValue::Vector(_))
                | (ParamType::Id, ParamValue::Id(_))
                | (ParamType::Number, ParamValue::Number(_))
        )
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkillSchema {
    pub required: BTreeMap<String, ParamType>,
    #[serde(default)]
    pub optional: BTreeMap<String, ParamType>,
    /// Exactly one of these optional parameters must be present.
    #[serde(default)]
    pub one_of: Vec<String>,
}

static SCHEMAS: OnceLock<BTreeMap<SkillKind, SkillSchema>> = OnceLock::new();

pub fn skill_schemas() -> &'static BTreeMap<SkillKind, SkillSchema> {
    SCHEMAS.get_or_init(|| {
        serde_json::from_str(include_str!("../../assets/skill_schemas.json")).expect("embedded skill schemas parse")
    })
}

pub fn schema(kind: SkillKind) -> &'static SkillSchema {
    &skill_schemas()[&kind]
}

/// Checks parameter names, types and referenced ids against the schema.
pub fn check_params(inv: &SkillInvocation, world: &World) -> Result<(), SkillError> {
    let s = schema(inv.skill);
    let bad = |param: &str, reason: &str| SkillError::BadParam {
        skill: inv.skill,
        param: param.to_string(),
        reason: reason.to_string(),
    };
    for name in s.required.keys() {
        if !inv.params.contains_key(name) {
            return Err(SkillError::MissingParam { skill: inv.skill, param: name.clone() });
        }
    }
    for (name, value) in &inv.params {
        let ty = s.required.get(name).or_else(|| s.optional.get(name)).ok_or_else(|| bad(name, "is not accepted"))?;
        if !ty.matches(value) {
            return Err(bad(name, "has the wrong type"));
        }
        if let ParamValue::Number(x) = value {
            if !x.is_finite() {
                return Err(bad(name, "is not finite"));
            }
        }
        if let ParamValue::Vector(v) = value {
            if !v.is_finite() {
                return Err(bad(name, "is not finite"));
            }
        }
        if let ParamValue::Id(id) = value {
            let known = match name.as_str() {
                "articulation" | "lid" => world.articulation(id).is_some(),
                "hatch" => world.layout.hatch(id).is_some(),
                _ => world.body(id).is_some(),
            };
            if !known {
                return Err(SkillError::UnknownId(id.clone()));
            }
        }
    }
    if !s.one_of.is_empty() {
        let present = s.one_of.iter().filter(|k| inv.params.contains_key(*k)).count();
        if present != 1 {
            return Err(bad(&s.one_of.join("|"), "exactly one must be given"));
        }
    }
    Ok(())
}
