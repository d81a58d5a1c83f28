use serde::{Deserialize, Serialize};

use crate::math::{Aabb, Pose, Quat, Twist, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Sphere { radius: f64 },
    Box { half_extents: Vec3 },
}

/// Which contact pairs a body takes part in.
///
/// `Object` bodies collide with each other, with `Solid` bodies and with the
/// station walls. `Agent` bodies (free-flyers, the human avatar) only collide
/// with the walls. `Solid` is a static collider (tables, cabinets). `None`
/// is a sensor volume or a kinematic gripper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionClass {
    #[default]
    Object,
    Agent,
    Solid,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BodyFlags {
    #[serde(rename = "static", default)]
    pub is_static: bool,
    #[serde(default)]
    pub graspable: bool,
    /// Pinned to whatever surface it rests on until a gripper takes it.
    #[serde(default)]
    pub fixed_to_surface: bool,
    /// Velocity comes from commands only; ignores gravity, drag and contacts.
    #[serde(default)]
    pub kinematic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub id: String,
    pub shape: Shape,
    pub mass: f64,
    pub pose: Pose,
    #[serde(default)]
    pub twist: Twist,
    #[serde(default)]
    pub drag_coeff: f64,
    #[serde(default = "default_restitution")]
    pub restitution: f64,
    #[serde(default)]
    pub flags: BodyFlags,
    #[serde(default)]
    pub collision: CollisionClass,
    /// Grip point in the body frame; grasps are measured from here.
    #[serde(default)]
    pub grip_offset: Vec3,
}

fn default_restitution() -> f64 {
    0.5
}

impl Body {
    pub fn sphere(id: impl Into<String>, radius: f64, mass: f64, position: Vec3) -> Body {
        Body {
            id: id.into(),
            shape: Shape::Sphere { radius },
            mass,
            pose: Pose::from_position(position),
            twist: Twist::ZERO,
            drag_coeff: 0.0,
            restitution: 0.5,
            flags: BodyFlags::default(),
            collision: CollisionClass::Object,
            grip_offset: Vec3::ZERO,
        }
    }

    pub fn cuboid(id: impl Into<String>, half_extents: Vec3, mass: f64, position: Vec3) -> Body {
        Body { shape: Shape::Box { half_extents }, ..Body::sphere(id, 0.0, mass, position) }
    }

    /// A static solid box (table, wall panel, cabinet).
    pub fn fixture(id: impl Into<String>, half_extents: Vec3, position: Vec3) -> Body {
        let mut b = Body::cuboid(id, half_extents, 0.0, position);
        b.flags.is_static = true;
        b.collision = CollisionClass::Solid;
        b.restitution = 1.0;
        b
    }

    pub fn with_velocity(mut self, v: Vec3) -> Body {
        self.twist.linear = v;
        self
    }

    pub fn with_drag(mut self, beta: f64) -> Body {
        self.drag_coeff = beta;
        self
    }

    pub fn with_restitution(mut self, e: f64) -> Body {
        self.restitution = e;
        self
    }

    pub fn graspable(mut self) -> Body {
        self.flags.graspable = true;
        self
    }

    pub fn position(&self) -> Vec3 {
        self.pose.position
    }

    pub fn is_dynamic(&self) -> bool {
        !self.flags.is_static && !self.flags.kinematic
    }

    /// Inverse mass seen by the contact solver. Static, kinematic and
    /// surface-fixed bodies behave as infinitely heavy.
    pub fn inverse_mass(&self) -> f64 {
        if self.flags.is_static || self.flags.kinematic || self.flags.fixed_to_surface || self.mass <= 0.0 {
            0.0
        } else {
            1.0 / self.mass
        }
    }

    /// Radius used for sphere-style contacts; boxes use their largest half-extent.
    pub fn contact_radius(&self) -> f64 {
        match self.shape {
            Shape::Sphere { radius } => radius,
            Shape::Box { half_extents } => half_extents.max_element(),
        }
    }

    pub fn grip_point(&self) -> Vec3 {
        self.pose.transform_point(self.grip_offset)
    }

    /// Velocity of the material point at world position `p` rigidly attached to this body.
    pub fn point_velocity(&self, p: Vec3) -> Vec3 {
        self.twist.linear + self.twist.angular.cross(p - self.pose.position)
    }

    /// World-space bounding box of the shape.
    pub fn world_aabb(&self) -> Aabb {
        match self.shape {
            Shape::Sphere { radius } => Aabb::from_center(self.pose.position, Vec3::splat(radius)),
            Shape::Box { half_extents } => {
                let q = self.pose.orientation;
                // |R| * h, row by row.
                let r = [q.rotate(Vec3::X), q.rotate(Vec3::Y), q.rotate(Vec3::Z)];
                let half = Vec3::new(
                    r[0].x.abs() * half_extents.x + r[1].x.abs() * half_extents.y + r[2].x.abs() * half_extents.z,
                    r[0].y.abs() * half_extents.x + r[1].y.abs() * half_extents.y + r[2].y.abs() * half_extents.z,
                    r[0].z.abs() * half_extents.x + r[1].z.abs() * half_extents.y + r[2].z.abs() * half_extents.z,
                );
                Aabb::from_center(self.pose.position, half)
            }
        }
    }

    /// Distance from a world point to the body's surface (zero inside).
    pub fn surface_distance(&self, p: Vec3) -> f64 {
        match self.shape {
            Shape::Sphere { radius } => (p.distance(self.pose.position) - radius).max(0.0),
            Shape::Box { half_extents } => {
                let local = self.pose.orientation.conjugate().rotate(p - self.pose.position);
                let outside = (local.abs() - half_extents).component_max(Vec3::ZERO);
                outside.norm()
            }
        }
    }

    pub fn orientation(&self) -> Quat {
        self.pose.orientation
    }
}
