//! Scenario files: station layout, bodies, executors and the task, plus
//! seeded instantiation into a world.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AffordanceCatalog, PlannerBackend, PlannerError, RulePlanner, RuleStrategy};
use crate::cog::{validate_graph, CollaborationGraph, Roster, ValidationOptions};
use crate::math::{Pose, Twist, Vec3};
use crate::robots::{DescriptorSpec, RobotDescriptor};
use crate::sim::{Articulation, Body, BodyFlags, CollisionClass, Shape, StationLayout, World, DEFAULT_DT, EARTH_GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gravity {
    ZeroG,
    EarthG,
}

impl Gravity {
    pub fn vector(self) -> Vec3 {
        match self {
            Gravity::ZeroG => Vec3::ZERO,
            Gravity::EarthG => EARTH_GRAVITY,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Gravity::ZeroG => "0g",
            Gravity::EarthG => "1g",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayoutSpec {
    /// `"default_three_module"`.
    Named(String),
    Custom(StationLayout),
}

impl Default for LayoutSpec {
    fn default() -> Self {
        LayoutSpec::Named("default_three_module".into())
    }
}

impl LayoutSpec {
    pub fn resolve(&self) -> Result<StationLayout, ScenarioError> {
        match self {
            LayoutSpec::Named(n) if n == "default_three_module" => Ok(StationLayout::default_three_module()),
            LayoutSpec::Named(n) => Err(ScenarioError::invalid("layout", format!("unknown layout `{n}`"))),
            LayoutSpec::Custom(l) => Ok(l.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub id: String,
    pub shape: Shape,
    #[serde(default)]
    pub mass: f64,
    pub position: Vec3,
    #[serde(default)]
    pub velocity: Vec3,
    #[serde(default)]
    pub drag: f64,
    #[serde(default)]
    pub restitution: Option<f64>,
    #[serde(default, rename = "static")]
    pub is_static: bool,
    #[serde(default)]
    pub graspable: bool,
    #[serde(default)]
    pub fixed_to_surface: bool,
    /// Defaults to `solid` for static bodies and `object` otherwise.
    #[serde(default)]
    pub collision: Option<CollisionClass>,
    /// Uniform per-axis position perturbation half-range.
    #[serde(default)]
    pub jitter: Option<Vec3>,
    /// Initial drift speed range; direction is uniform on the sphere.
    #[serde(default)]
    pub drift: Option<[f64; 2]>,
}

impl BodySpec {
    fn instantiate(&self, rng: &mut ChaCha8Rng) -> Body {
        let mut position = self.position;
        if let Some(j) = self.jitter {
            for k in 0..3 {
                let h = j.get(k);
                if h > 0.0 {
                    position.set(k, position.get(k) + rng.gen_range(-h..=h));
                }
            }
        }
        let mut velocity = self.velocity;
        if let Some([lo, hi]) = self.drift {
            let speed = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            velocity += random_direction(rng) * speed;
        }
        Body {
            id: self.id.clone(),
            shape: self.shape,
            mass: self.mass,
            pose: Pose::from_position(position),
            twist: Twist { linear: velocity, angular: Vec3::ZERO },
            drag_coeff: self.drag,
            restitution: self.restitution.unwrap_or(if self.is_static { 1.0 } else { 0.5 }),
            flags: BodyFlags {
                is_static: self.is_static,
                graspable: self.graspable,
                fixed_to_surface: self.fixed_to_surface,
                kinematic: false,
            },
            collision: self.collision.unwrap_or(if self.is_static { CollisionClass::Solid } else { CollisionClass::Object }),
            grip_offset: Vec3::ZERO,
        }
    }
}

/// Uniform unit vector by rejection sampling in the unit ball.
pub fn random_direction(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Human-readable name for reports.
    #[serde(default)]
    pub title: Option<String>,
    pub task: String,
    #[serde(default)]
    pub seed: u64,
    pub gravity: Gravity,
    pub episode_timeout: u64,
    #[serde(default)]
    pub layout: LayoutSpec,
    #[serde(default)]
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub articulations: Vec<Articulation>,
    pub executors: Vec<DescriptorSpec>,
    /// Rule-planner strategy; scenarios may instead carry a fixed graph.
    #[serde(default)]
    pub plan: Option<RuleStrategy>,
    #[serde(default)]
    pub graph: Option<CollaborationGraph>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
        ScenarioError::Validation { field: field.into(), reason: reason.into() }
    }
}

/// A scenario instantiated at one seed.
#[derive(Debug, Clone)]
pub struct ScenarioInstance {
    pub world: World,
    pub roster: Roster,
    pub seed: u64,
}

impl ScenarioInstance {
    pub fn catalog(&self) -> AffordanceCatalog {
        AffordanceCatalog::from_roster(&self.roster)
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<ScenarioConfig, ScenarioError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the world at `seed` and checks every cross-reference.
    pub fn instantiate(&self, seed: u64) -> Result<ScenarioInstance, ScenarioError> {
        let layout = self.layout.resolve()?;
        if let Some((field, reason)) = layout.validate().into_iter().next() {
            return Err(ScenarioError::invalid(field, reason));
        }
        let mut world = World::new(self.gravity.vector(), DEFAULT_DT, layout.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids = HashSet::new();
        for (i, spec) in self.bodies.iter().enumerate() {
            let field = format!("bodies[{i}]");
            if !ids.insert(spec.id.clone()) {
                return Err(ScenarioError::invalid(format!("{field}.id"), format!("duplicate body id `{}`", spec.id)));
            }
            if !spec.is_static && spec.mass <= 0.0 {
                return Err(ScenarioError::invalid(format!("{field}.mass"), "dynamic bodies need a positive mass"));
            }
            let body = spec.instantiate(&mut rng);
            if !layout.contains(body.position()) {
                return Err(ScenarioError::invalid(format!("{field}.position"), format!("`{}` is outside the station", spec.id)));
            }
            world.add_body(body).map_err(|e| ScenarioError::invalid(field, e.to_string()))?;
        }
        for (i, a) in self.articulations.iter().enumerate() {
            let field = format!("articulations[{i}]");
            if world.body(&a.parent_body).is_none() {
                return Err(ScenarioError::invalid(field, format!("unknown parent body `{}`", a.parent_body)));
            }
            if !ids.insert(a.id.clone()) {
                return Err(ScenarioError::invalid(format!("{field}.id"), format!("duplicate id `{}`", a.id)));
            }
            world.add_articulation(a.clone()).map_err(|e| ScenarioError::invalid(field, e.to_string()))?;
        }
        let mut roster: Roster = BTreeMap::new();
        for spec in &self.executors {
            let d: RobotDescriptor = spec.resolve(&layout).map_err(|(f, r)| ScenarioError::invalid(f, r))?;
            for b in d.spawn_bodies(&layout) {
                if !ids.insert(b.id.clone()) {
                    return Err(ScenarioError::invalid(format!("executors.{}.id", d.id), format!("duplicate id `{}`", b.id)));
                }
                world.add_body(b).map_err(|e| ScenarioError::invalid(format!("executors.{}", d.id), e.to_string()))?;
            }
            roster.insert(d.id.clone(), Arc::new(d));
        }
        Ok(ScenarioInstance { world, roster, seed })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.episode_timeout == 0 {
            return Err(ScenarioError::invalid("episode_timeout", "must be positive"));
        }
        let inst = self.instantiate(self.seed)?;
        if let Some(g) = &self.graph {
            validate_graph(g, &inst.world, &inst.roster, ValidationOptions::default()).map_err(|errs| {
                ScenarioError::invalid("graph", errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))
            })?;
        }
        match &self.plan {
            Some(RuleStrategy::Rearrangement { objects, containers }) => {
                for id in objects.iter().chain(containers) {
                    if inst.world.body(id).is_none() {
                        return Err(ScenarioError::invalid("plan", format!("unknown body `{id}`")));
                    }
                }
            }
            Some(RuleStrategy::Relay { cargo, goal }) => {
                if inst.world.body(cargo).is_none() {
                    return Err(ScenarioError::invalid("plan.cargo", format!("unknown body `{cargo}`")));
                }
                inst.world.query(goal).map_err(|e| ScenarioError::invalid("plan.goal", e.to_string()))?;
            }
            None if self.graph.is_none() => {
                return Err(ScenarioError::invalid("plan", "a scenario needs a plan strategy or a graph"));
            }
            None => {}
        }
        Ok(())
    }

    pub fn display_name(&self) -> &str {
        self.title.as_deref().unwrap_or(&self.name)
    }

    pub fn rule_planner(&self) -> Option<RulePlanner> {
        self.plan.clone().map(|strategy| RulePlanner { strategy })
    }

    /// The scenario's fixed graph, or the rule planner's graph for `inst`.
    pub fn plan_graph(&self, inst: &ScenarioInstance, backend: Option<&dyn PlannerBackend>) -> Result<CollaborationGraph, PlannerError> {
        if let Some(b) = backend {
            return b.plan(&self.task, &inst.world, &inst.roster, &inst.catalog());
        }
        if let Some(g) = &self.graph {
            return Ok(g.clone());
        }
        let rule = self.rule_planner().expect("validated scenarios have a plan or a graph");
        rule.plan(&self.task, &inst.world, &inst.roster, &inst.catalog())
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    ScenarioConfig::from_json(&std::fs::read_to_string(path)?)
}

/// Shipped scenarios, embedded.
pub fn builtin_scenario(name: &str) -> Option<&'static str> {
    match name {
        "rearrangement" => Some(include_str!("../assets/scenarios/rearrangement.json")),
        "relay" => Some(include_str!("../assets/scenarios/relay.json")),
        _ => None,
    }
}
