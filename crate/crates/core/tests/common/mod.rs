#![allow(dead_code)]

/// `assert!` for oracles that report instead of panicking.
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

pub mod dag;
pub mod physics_checks;
pub mod plan_checks;
pub mod session;

use std::sync::Arc;

use stationsim_core::cog::Roster;
use stationsim_core::math::{Aabb, Vec3};
use stationsim_core::robots::{DescriptorSpec, RobotDescriptor, RobotKind};
use stationsim_core::sim::{Body, StationLayout, World};

pub fn station() -> World {
    World::zero_g(StationLayout::default_three_module())
}

pub fn spec(id: &str, kind: RobotKind, home: Vec3) -> DescriptorSpec {
    DescriptorSpec {
        id: id.into(),
        kind,
        skills: None,
        locomotion: None,
        payload_limit: None,
        drag_capability: None,
        workspace: None,
        gripper_offset: None,
        home,
        limits: None,
    }
}

pub fn add_spec(w: &mut World, roster: &mut Roster, spec: DescriptorSpec) -> Arc<RobotDescriptor> {
    let d = Arc::new(spec.resolve(&w.layout).unwrap());
    for b in d.spawn_bodies(&w.layout.clone()) {
        w.add_body(b).unwrap();
    }
    roster.insert(d.id.clone(), d.clone());
    d
}

pub fn add(w: &mut World, roster: &mut Roster, id: &str, kind: RobotKind, home: Vec3) -> Arc<RobotDescriptor> {
    add_spec(w, roster, spec(id, kind, home))
}

pub fn add_with_workspace(w: &mut World, roster: &mut Roster, id: &str, kind: RobotKind, home: Vec3, ws: Aabb) -> Arc<RobotDescriptor> {
    add_spec(w, roster, DescriptorSpec { workspace: Some(vec![ws]), ..spec(id, kind, home) })
}

pub fn cube(id: &str, p: Vec3) -> Body {
    Body::cuboid(id, Vec3::splat(0.03), 0.2, p).graspable()
}

pub fn bin(id: &str, p: Vec3) -> Body {
    let mut b = Body::fixture(id, Vec3::splat(0.2), p);
    b.collision = stationsim_core::sim::CollisionClass::None;
    b
}
