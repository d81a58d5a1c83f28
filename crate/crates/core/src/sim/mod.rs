//! Deterministic fixed-step rigid-body simulation of the station.
//!
//! Semi-implicit Euler with linear drag, impulse contacts for spheres and
//! boxes, one-DoF articulations and rigid grasp attachments. A [`World`] has
//! exactly one owner that steps it; everyone else works on clones.

mod body;
mod collision;
mod layout;
mod query;
mod snapshot;
mod world;

pub use body::{Body, BodyFlags, CollisionClass, Shape};
pub use collision::{confine_to_station, detect, resolve_collision, resolve_contact, ContactResolution};
pub use layout::{Hatch, Module, Rail, RailPoint, StationLayout, Zone};
pub use query::{Predicate, PredicateArg, PredicateFormatError, QueryError, RawPredicate, RegionRef};
pub use snapshot::{ArticulationView, BodyView, SnapshotView};
pub use world::{
    Articulation, ArticulationKind, BodyCommand, GraspConstraint, GraspError, SimError, SimParams, StepReport, World,
    DEFAULT_DT, EARTH_GRAVITY,
};
