//! Station geometry: module interiors, hatches between them, and rails.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::math::{Aabb, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Module {
    pub id: String,
    pub interior: Aabb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hatch {
    pub id: String,
    pub module_a: String,
    pub module_b: String,
    pub aperture: Aabb,
}

impl Hatch {
    /// Axis along which the hatch is crossed (the aperture's thinnest axis).
    pub fn crossing_axis(&self) -> usize {
        let h = self.aperture.half_extents();
        if h.x <= h.y && h.x <= h.z {
            0
        } else if h.y <= h.z {
            1
        } else {
            2
        }
    }

    pub fn center(&self) -> Vec3 {
        self.aperture.center()
    }

    /// Point `distance` from the aperture centre along the crossing axis,
    /// on `module`'s side (negative distances land on the far side).
    pub fn standoff(&self, module: &Module, distance: f64) -> Vec3 {
        let k = self.crossing_axis();
        let c = self.center();
        let inward = if c.get(k) >= module.interior.center().get(k) { -1.0 } else { 1.0 };
        let mut p = c;
        p.set(k, c.get(k) + inward * distance);
        p
    }

    pub fn other_side(&self, module: &str) -> Option<&str> {
        if self.module_a == module {
            Some(&self.module_b)
        } else if self.module_b == module {
            Some(&self.module_a)
        } else {
            None
        }
    }
}

/// Open or closed polyline a rail robot's carriage is confined to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rail {
    pub id: String,
    pub module: String,
    pub points: Vec<Vec3>,
    #[serde(default)]
    pub closed: bool,
}

/// Closest point on a polyline, with its arc-length coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RailPoint {
    pub arc: f64,
    pub point: Vec3,
    pub distance: f64,
}

impl Rail {
    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        let n = self.points.len();
        let count = if self.closed && n > 2 { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn closest_point(&self, p: Vec3) -> RailPoint {
        let mut best = RailPoint { arc: 0.0, point: self.points.first().copied().unwrap_or_default(), distance: f64::INFINITY };
        let mut acc = 0.0;
        for (a, b) in self.segments() {
            let d = b - a;
            let len2 = d.norm_squared();
            let t = if len2 > 0.0 { ((p - a).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let q = a + d * t;
            let dist = q.distance(p);
            if dist < best.distance {
                best = RailPoint { arc: acc + t * len2.sqrt(), point: q, distance: dist };
            }
            acc += len2.sqrt();
        }
        if best.distance.is_infinite() {
            best.distance = best.point.distance(p);
        }
        best
    }

    /// Wraps (closed) or clamps (open) an arc-length coordinate.
    pub fn normalize_arc(&self, arc: f64) -> f64 {
        let len = self.length();
        if len <= 0.0 {
            return 0.0;
        }
        if self.closed {
            arc.rem_euclid(len)
        } else {
            arc.clamp(0.0, len)
        }
    }

    pub fn point_at(&self, arc: f64) -> Vec3 {
        let arc = self.normalize_arc(arc);
        let mut acc = 0.0;
        let mut last = self.points.first().copied().unwrap_or_default();
        for (a, b) in self.segments() {
            let len = a.distance(b);
            if arc <= acc + len && len > 0.0 {
                return a.lerp(b, (arc - acc) / len);
            }
            acc += len;
            last = b;
        }
        last
    }

    /// Signed shortest arc displacement from `from` to `to`.
    pub fn arc_delta(&self, from: f64, to: f64) -> f64 {
        let d = to - from;
        if !self.closed {
            return d;
        }
        let len = self.length();
        let d = d.rem_euclid(len);
        if d > len / 2.0 {
            d - len
        } else {
            d
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: String,
    pub region: Aabb,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StationLayout {
    #[serde(default)]
    pub modules: Vec<Module>,
    #[serde(default)]
    pub hatches: Vec<Hatch>,
    #[serde(default)]
    pub rails: Vec<Rail>,
    #[serde(default)]
    pub zones: Vec<Zone>,
}

impl StationLayout {
    /// Three `4 x 3 x 3 m` modules in a row along +x, joined by two hatches,
    /// with one rectangular rail loop near the ceiling of each module.
    pub fn default_three_module() -> StationLayout {
        let mut layout = StationLayout::default();
        for i in 0..3 {
            let x0 = 4.0 * i as f64;
            let id = format!("module_{}", i + 1);
            layout.modules.push(Module {
                id: id.clone(),
                interior: Aabb::new(Vec3::new(x0, 0.0, 0.0), Vec3::new(x0 + 4.0, 3.0, 3.0)),
            });
            let z = 2.4;
            layout.rails.push(Rail {
                id: format!("rail_{}", i + 1),
                module: id,
                points: vec![
                    Vec3::new(x0 + 0.4, 0.4, z),
                    Vec3::new(x0 + 3.6, 0.4, z),
                    Vec3::new(x0 + 3.6, 2.6, z),
                    Vec3::new(x0 + 0.4, 2.6, z),
                ],
                closed: true,
            });
        }
        for i in 0..2 {
            let x = 4.0 * (i + 1) as f64;
            layout.hatches.push(Hatch {
                id: format!("hatch_{}", i + 1),
                module_a: format!("module_{}", i + 1),
                module_b: format!("module_{}", i + 2),
                aperture: Aabb::new(Vec3::new(x - 0.1, 1.0, 1.0), Vec3::new(x + 0.1, 2.0, 2.0)),
            });
        }
        layout
    }

    pub fn module(&self, id: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.id == id)
    }

    pub fn hatch(&self, id: &str) -> Option<&Hatch> {
        self.hatches.iter().find(|h| h.id == id)
    }

    pub fn rail(&self, id: &str) -> Option<&Rail> {
        self.rails.iter().find(|r| r.id == id)
    }

    pub fn zone(&self, id: &str) -> Option<&Zone> {
        self.zones.iter().find(|z| z.id == id)
    }

    /// First module (in declaration order) whose interior holds `p`.
    pub fn module_at(&self, p: Vec3) -> Option<&Module> {
        self.modules.iter().find(|m| m.interior.contains(p))
    }

    /// Module holding `p`, falling back to the nearest one.
    pub fn nearest_module(&self, p: Vec3) -> Option<&Module> {
        self.module_at(p).or_else(|| {
            self.modules
                .iter()
                .min_by(|a, b| a.interior.distance_to(p).total_cmp(&b.interior.distance_to(p)))
        })
    }

    /// Inside the pressurized volume: some module interior or hatch aperture.
    pub fn contains(&self, p: Vec3) -> bool {
        self.modules.iter().any(|m| m.interior.contains(p)) || self.hatches.iter().any(|h| h.aperture.contains(p))
    }

    pub fn region(&self, id: &str) -> Option<Aabb> {
        self.module(id)
            .map(|m| m.interior)
            .or_else(|| self.zone(id).map(|z| z.region))
            .or_else(|| self.hatch(id).map(|h| h.aperture))
    }

    /// Hatches crossed on the shortest module-to-module route (BFS over hatches).
    pub fn hatch_path(&self, from: &str, to: &str) -> Option<Vec<&Hatch>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut prev: Vec<(String, Option<(String, usize)>)> = vec![(from.to_string(), None)];
        let mut queue = VecDeque::from([from.to_string()]);
        while let Some(cur) = queue.pop_front() {
            for (hi, h) in self.hatches.iter().enumerate() {
                let Some(next) = h.other_side(&cur) else { continue };
                if prev.iter().any(|(m, _)| m == next) {
                    continue;
                }
                prev.push((next.to_string(), Some((cur.clone(), hi))));
                if next == to {
                    let mut path = Vec::new();
                    let mut at = next.to_string();
                    while let Some((_, Some((p, hidx)))) = prev.iter().find(|(m, _)| *m == at).cloned() {
                        path.push(&self.hatches[hidx]);
                        at = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(next.to_string());
            }
        }
        None
    }

    /// Geometry problems, each as `(field, reason)`.
    pub fn validate(&self) -> Vec<(String, String)> {
        let mut errs = Vec::new();
        for (i, m) in self.modules.iter().enumerate() {
            if self.modules[..i].iter().any(|o| o.id == m.id) {
                errs.push((format!("layout.modules[{i}].id"), format!("duplicate module id `{}`", m.id)));
            }
        }
        for (i, h) in self.hatches.iter().enumerate() {
            for side in [&h.module_a, &h.module_b] {
                match self.module(side) {
                    None => errs.push((format!("layout.hatches[{i}]"), format!("hatch `{}` names unknown module `{side}`", h.id))),
                    Some(m) if !m.interior.intersects(&h.aperture) => errs.push((
                        format!("layout.hatches[{i}].aperture"),
                        format!("hatch `{}` aperture does not touch module `{side}`", h.id),
                    )),
                    _ => {}
                }
            }
        }
        for (i, r) in self.rails.iter().enumerate() {
            let field = format!("layout.rails[{i}]");
            let Some(m) = self.module(&r.module) else {
                errs.push((field, format!("rail `{}` names unknown module `{}`", r.id, r.module)));
                continue;
            };
            if r.points.len() < 2 {
                errs.push((field, format!("rail `{}` needs at least two points", r.id)));
                continue;
            }
            // Every segment must stay strictly inside the owning module: both
            // endpoints inside a convex box keep the whole segment inside, and
            // no segment may touch another module.
            let inner = m.interior.shrink(1e-9);
            let escapes = r.segments().any(|(a, b)| !inner.contains(a) || !inner.contains(b));
            let touches_other = r.segments().any(|(a, b)| {
                self.modules.iter().filter(|o| o.id != m.id).any(|o| o.interior.intersects_segment(a, b))
            });
            if escapes || touches_other {
                errs.push((field, format!("rail `{}` crosses the walls of module `{}`", r.id, r.module)));
            }
        }
        errs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout_is_valid() {
        let l = StationLayout::default_three_module();
        assert!(l.validate().is_empty(), "{:?}", l.validate());
        assert_eq!(l.modules.len(), 3);
        assert_eq!(l.hatches.len(), 2);
    }

    #[test]
    fn hatch_path_walks_modules() {
        let l = StationLayout::default_three_module();
        let p = l.hatch_path("module_1", "module_3").unwrap();
        let ids: Vec<_> = p.iter().map(|h| h.id.as_str()).collect();
        assert_eq!(ids, ["hatch_1", "hatch_2"]);
        assert!(l.hatch_path("module_2", "module_2").unwrap().is_empty());
        assert_eq!(l.hatch_path("module_3", "module_1").unwrap().len(), 2);
    }

    #[test]
    fn rail_projection_and_wrap() {
        let l = StationLayout::default_three_module();
        let r = l.rail("rail_1").unwrap();
        let len = r.length();
        assert!((len - 2.0 * (3.2 + 2.2)).abs() < 1e-12);
        let cp = r.closest_point(Vec3::new(2.0, -1.0, 2.4));
        assert!((cp.point - Vec3::new(2.0, 0.4, 2.4)).norm() < 1e-12);
        assert!((r.point_at(len + 0.5) - r.point_at(0.5)).norm() < 1e-12);
        assert!((r.arc_delta(0.1, len - 0.1) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn rail_crossing_wall_is_rejected() {
        let mut l = StationLayout::default_three_module();
        l.rails[0].points[1] = Vec3::new(5.0, 0.4, 2.4);
        let errs = l.validate();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].1.contains("rail_1"));
    }
}
