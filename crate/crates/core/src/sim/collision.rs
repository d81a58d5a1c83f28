//! Impulse-based contact resolution for spheres and boxes.

use crate::math::{Twist, Vec3};

use super::body::{Body, Shape};
use super::layout::StationLayout;

/// Result of resolving one contact between two bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactResolution {
    pub twist_a: Twist,
    pub twist_b: Twist,
    /// Positional de-penetration, split by inverse mass.
    pub shift_a: Vec3,
    pub shift_b: Vec3,
    /// Unit contact normal pointing from `a` to `b`.
    pub normal: Vec3,
    pub penetration: f64,
}

/// Contact normal (a -> b) and penetration depth, if the shapes overlap.
pub fn detect(a: &Body, b: &Body) -> Option<(Vec3, f64)> {
    match (a.shape, b.shape) {
        (_, Shape::Box { half_extents }) if b.inverse_mass() == 0.0 && a.inverse_mass() > 0.0 => {
            sphere_box(a.position(), a.contact_radius(), b, half_extents).map(|(n, d)| (-n, d))
        }
        (Shape::Box { half_extents }, _) if a.inverse_mass() == 0.0 && b.inverse_mass() > 0.0 => {
            sphere_box(b.position(), b.contact_radius(), a, half_extents)
        }
        _ => sphere_sphere(a.position(), a.contact_radius(), b.position(), b.contact_radius()),
    }
}

fn sphere_sphere(pa: Vec3, ra: f64, pb: Vec3, rb: f64) -> Option<(Vec3, f64)> {
    let d = pb - pa;
    let dist = d.norm();
    let pen = ra + rb - dist;
    if pen <= 0.0 {
        return None;
    }
    let n = if dist > 1e-12 { d / dist } else { Vec3::X };
    Some((n, pen))
}

/// Normal points from the box towards the sphere.
fn sphere_box(center: Vec3, radius: f64, bx: &Body, half: Vec3) -> Option<(Vec3, f64)> {
    let q = bx.orientation();
    let local = q.conjugate().rotate(center - bx.position());
    let clamped = local.component_max(-half).component_min(half);
    let delta = local - clamped;
    let dist = delta.norm();
    if dist > 1e-12 {
        let pen = radius - dist;
        if pen <= 0.0 {
            return None;
        }
        return Some((q.rotate(delta / dist), pen));
    }
    // Centre inside the box: leave through the nearest face.
    let depth = half - local.abs();
    let axis = if depth.x <= depth.y && depth.x <= depth.z {
        0
    } else if depth.y <= depth.z {
        1
    } else {
        2
    };
    let mut n = Vec3::ZERO;
    n.set(axis, if local.get(axis) >= 0.0 { 1.0 } else { -1.0 });
    Some((q.rotate(n), radius + depth.get(axis)))
}

/// Resolves a contact with a normal impulse using `min(e_a, e_b)` and a
/// positional projection split by inverse mass. Returns `None` when the
/// bodies do not overlap or both are immovable.
pub fn resolve_contact(a: &Body, b: &Body) -> Option<ContactResolution> {
    let (n, pen) = detect(a, b)?;
    let (ia, ib) = (a.inverse_mass(), b.inverse_mass());
    let sum = ia + ib;
    if sum == 0.0 {
        return None;
    }
    let mut ta = a.twist;
    let mut tb = b.twist;
    let vn = (tb.linear - ta.linear).dot(n);
    if vn < 0.0 {
        let e = a.restitution.min(b.restitution);
        let j = -(1.0 + e) * vn / sum;
        ta.linear -= n * (j * ia);
        tb.linear += n * (j * ib);
    }
    Some(ContactResolution {
        twist_a: ta,
        twist_b: tb,
        shift_a: -n * (pen * ia / sum),
        shift_b: n * (pen * ib / sum),
        normal: n,
        penetration: pen,
    })
}

/// Post-contact twists; unchanged when the bodies are separated.
pub fn resolve_collision(a: &Body, b: &Body) -> (Twist, Twist) {
    match resolve_contact(a, b) {
        Some(r) => (r.twist_a, r.twist_b),
        None => (a.twist, b.twist),
    }
}

/// Keeps a sphere of `radius` inside the station, letting it through hatch
/// apertures wide enough for it. Returns the summed inward normal of the
/// walls that were hit, if any.
pub fn confine_to_station(layout: &StationLayout, body: &mut Body, radius: f64) -> Option<Vec3> {
    let module = layout.nearest_module(body.position())?;
    let interior = module.interior;
    let mut hit: Option<Vec3> = None;
    let e = body.restitution;
    for axis in 0..3 {
        for upper in [false, true] {
            let face = if upper { interior.max.get(axis) } else { interior.min.get(axis) };
            let c = body.pose.position.get(axis);
            let penetrating = if upper { c + radius > face } else { c - radius < face };
            if !penetrating {
                continue;
            }
            if through_hatch(layout, body.pose.position, radius, axis, face) {
                continue;
            }
            let clamped = if upper { face - radius } else { face + radius };
            body.pose.position.set(axis, clamped);
            let v = body.twist.linear.get(axis);
            let outward = if upper { v > 0.0 } else { v < 0.0 };
            if outward {
                body.twist.linear.set(axis, -e * v);
            }
            let mut inward = Vec3::ZERO;
            inward.set(axis, if upper { -1.0 } else { 1.0 });
            hit = Some(hit.unwrap_or_default() + inward);
        }
    }
    hit
}

fn through_hatch(layout: &StationLayout, p: Vec3, radius: f64, axis: usize, face: f64) -> bool {
    layout.hatches.iter().any(|h| {
        let ap = h.aperture;
        if face < ap.min.get(axis) || face > ap.max.get(axis) {
            return false;
        }
        (0..3).filter(|&k| k != axis).all(|k| {
            let c = p.get(k);
            c - radius >= ap.min.get(k) && c + radius <= ap.max.get(k)
        })
    })
}
