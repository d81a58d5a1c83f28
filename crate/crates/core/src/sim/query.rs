//! Ground-truth predicates over a world state.
//!
//! The same predicate language is used for subtask goals in collaboration
//! graphs, so it carries its own compact JSON form:
//! `{"pred": "InContainer", "args": ["cube_3", "bin_1"]}`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::math::{Aabb, Vec3};

use super::world::World;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionRef {
    /// A module, zone, hatch or box-shaped body, by id.
    Named(String),
    /// An inline axis-aligned region.
    Box(Aabb),
}

impl fmt::Display for RegionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionRef::Named(id) => f.write_str(id),
            RegionRef::Box(b) => write!(
                f,
                "[{:.2}, {:.2}, {:.2}]..[{:.2}, {:.2}, {:.2}]",
                b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPredicate", into = "RawPredicate")]
pub enum Predicate {
    /// Body centre inside the region.
    Within { body: String, region: RegionRef },
    /// Body rigidly held by the given gripper body.
    Held { body: String, gripper: String },
    DoorOpen { articulation: String, min_angle: f64 },
    DoorClosed { articulation: String, max_angle: f64 },
    /// Whole body extents inside the container body's box.
    InContainer { body: String, container: String },
    /// Centre distance at least `min_dist`.
    Separation { a: String, b: String, min_dist: f64 },
}

impl Predicate {
    pub fn kind(&self) -> &'static str {
        match self {
            Predicate::Within { .. } => "Within",
            Predicate::Held { .. } => "Held",
            Predicate::DoorOpen { .. } => "DoorOpen",
            Predicate::DoorClosed { .. } => "DoorClosed",
            Predicate::InContainer { .. } => "InContainer",
            Predicate::Separation { .. } => "Separation",
        }
    }

    /// Ids this predicate refers to (bodies, articulations, named regions).
    pub fn referenced_ids(&self) -> Vec<&str> {
        match self {
            Predicate::Within { body, region } => match region {
                RegionRef::Named(r) => vec![body, r],
                RegionRef::Box(_) => vec![body],
            },
            Predicate::Held { body, gripper } => vec![body, gripper],
            Predicate::DoorOpen { articulation, .. } | Predicate::DoorClosed { articulation, .. } => vec![articulation],
            Predicate::InContainer { body, container } => vec![body, container],
            Predicate::Separation { a, b, .. } => vec![a, b],
        }
    }

    /// The movable object this goal is about, if any.
    pub fn subject(&self) -> Option<&str> {
        match self {
            Predicate::Within { body, .. } | Predicate::Held { body, .. } | Predicate::InContainer { body, .. } => {
                Some(body)
            }
            Predicate::Separation { a, .. } => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Within { body, region } => write!(f, "Within({body}, {region})"),
            Predicate::Held { body, gripper } => write!(f, "Held({body}, {gripper})"),
            Predicate::DoorOpen { articulation, min_angle } => write!(f, "DoorOpen({articulation}, {min_angle})"),
            Predicate::DoorClosed { articulation, max_angle } => write!(f, "DoorClosed({articulation}, {max_angle})"),
            Predicate::InContainer { body, container } => write!(f, "InContainer({body}, {container})"),
            Predicate::Separation { a, b, min_dist } => write!(f, "Separation({a}, {b}, {min_dist})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredicateArg {
    Id(String),
    Number(f64),
    Region(Aabb),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPredicate {
    pub pred: String,
    pub args: Vec<PredicateArg>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("bad goal predicate: {0}")]
pub struct PredicateFormatError(pub String);

impl TryFrom<RawPredicate> for Predicate {
    type Error = PredicateFormatError;

    fn try_from(raw: RawPredicate) -> Result<Self, Self::Error> {
        use PredicateArg::*;
        let bad = || PredicateFormatError(format!("{} does not accept arguments {:?}", raw.pred, raw.args));
        let p = match (raw.pred.as_str(), raw.args.as_slice()) {
            ("Within", [Id(b), Id(r)]) => Predicate::Within { body: b.clone(), region: RegionRef::Named(r.clone()) },
            ("Within", [Id(b), Region(r)]) => Predicate::Within { body: b.clone(), region: RegionRef::Box(*r) },
            ("Held", [Id(b), Id(g)]) => Predicate::Held { body: b.clone(), gripper: g.clone() },
            ("DoorOpen", [Id(a), Number(v)]) => Predicate::DoorOpen { articulation: a.clone(), min_angle: *v },
            ("DoorClosed", [Id(a), Number(v)]) => Predicate::DoorClosed { articulation: a.clone(), max_angle: *v },
            ("InContainer", [Id(b), Id(c)]) => Predicate::InContainer { body: b.clone(), container: c.clone() },
            ("Separation", [Id(a), Id(b), Number(d)]) => {
                Predicate::Separation { a: a.clone(), b: b.clone(), min_dist: *d }
            }
            ("Within" | "Held" | "DoorOpen" | "DoorClosed" | "InContainer" | "Separation", _) => return Err(bad()),
            (other, _) => return Err(PredicateFormatError(format!("unknown predicate `{other}`"))),
        };
        Ok(p)
    }
}

impl From<Predicate> for RawPredicate {
    fn from(p: Predicate) -> Self {
        use PredicateArg::*;
        let pred = p.kind().to_string();
        let args = match p {
            Predicate::Within { body, region } => vec![
                Id(body),
                match region {
                    RegionRef::Named(r) => Id(r),
                    RegionRef::Box(b) => Region(b),
                },
            ],
            Predicate::Held { body, gripper } => vec![Id(body), Id(gripper)],
            Predicate::DoorOpen { articulation, min_angle } => vec![Id(articulation), Number(min_angle)],
            Predicate::DoorClosed { articulation, max_angle } => vec![Id(articulation), Number(max_angle)],
            Predicate::InContainer { body, container } => vec![Id(body), Id(container)],
            Predicate::Separation { a, b, min_dist } => vec![Id(a), Id(b), Number(min_dist)],
        };
        RawPredicate { pred, args }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
}

impl World {
    /// Resolves a named or inline region to a box.
    pub fn resolve_region(&self, region: &RegionRef) -> Result<Aabb, QueryError> {
        match region {
            RegionRef::Box(b) => Ok(*b),
            RegionRef::Named(id) => self
                .layout
                .region(id)
                .or_else(|| self.body(id).map(|b| b.world_aabb()))
                .ok_or_else(|| QueryError::UnknownId(id.clone())),
        }
    }

    fn need_body(&self, id: &str) -> Result<&super::body::Body, QueryError> {
        self.body(id).ok_or_else(|| QueryError::UnknownId(id.to_string()))
    }

    /// Evaluates a predicate against the current state. Pure.
    pub fn query(&self, p: &Predicate) -> Result<bool, QueryError> {
        match p {
            Predicate::Within { body, region } => {
                let b = self.need_body(body)?;
                Ok(self.resolve_region(region)?.contains(b.position()))
            }
            Predicate::Held { body, gripper } => {
                self.need_body(body)?;
                self.need_body(gripper)?;
                Ok(self.holder_of(body) == Some(gripper.as_str()))
            }
            Predicate::DoorOpen { articulation, min_angle } => {
                let a = self.articulation(articulation).ok_or_else(|| QueryError::UnknownId(articulation.clone()))?;
                Ok(a.value >= *min_angle)
            }
            Predicate::DoorClosed { articulation, max_angle } => {
                let a = self.articulation(articulation).ok_or_else(|| QueryError::UnknownId(articulation.clone()))?;
                Ok(a.value <= *max_angle)
            }
            Predicate::InContainer { body, container } => {
                let b = self.need_body(body)?;
                let c = self.need_body(container)?;
                Ok(c.world_aabb().contains_aabb(&b.world_aabb()))
            }
            Predicate::Separation { a, b, min_dist } => {
                let a = self.need_body(a)?;
                let b = self.need_body(b)?;
                Ok(a.position().distance(b.position()) >= *min_dist)
            }
        }
    }

    /// Ids of all bodies whose centre lies in `region`, in body order.
    pub fn bodies_within(&self, region: &RegionRef) -> Result<Vec<String>, QueryError> {
        let r = self.resolve_region(region)?;
        Ok(self.bodies().iter().filter(|b| r.contains(b.position())).map(|b| b.id.clone()).collect())
    }

    /// Ids of movable bodies fully inside `container`, in body order.
    pub fn contents(&self, container: &str) -> Result<Vec<String>, QueryError> {
        let c = self.need_body(container)?.world_aabb();
        Ok(self
            .bodies()
            .iter()
            .filter(|b| b.id != container && !b.flags.is_static && c.contains_aabb(&b.world_aabb()))
            .map(|b| b.id.clone())
            .collect())
    }

    /// Id of the module whose interior holds `p`.
    pub fn module_of_point(&self, p: Vec3) -> Option<&str> {
        self.layout.module_at(p).map(|m| m.id.as_str())
    }
}
