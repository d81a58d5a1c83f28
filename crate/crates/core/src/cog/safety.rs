use serde::{Deserialize, Serialize};

use crate::math::{Aabb, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SafetyVerdict {
    Allowed,
    Violation { executor: String, boundary: String },
}

/// Point-in-union test of a proposed effector position against the
/// executor's workspace boxes.
pub fn enforce_safety(executor: &str, proposed: Vec3, workspace: &[Aabb]) -> SafetyVerdict {
    if workspace.iter().any(|b| b.contains(proposed)) {
        return SafetyVerdict::Allowed;
    }
    let nearest = workspace
        .iter()
        .min_by(|a, b| a.distance_to(proposed).total_cmp(&b.distance_to(proposed)))
        .map(|b| {
            format!(
                "workspace [{:.2}, {:.2}, {:.2}]..[{:.2}, {:.2}, {:.2}]",
                b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z
            )
        })
        .unwrap_or_else(|| "empty workspace".into());
    SafetyVerdict::Violation { executor: executor.to_string(), boundary: nearest }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robots::station_volume;
    use crate::sim::StationLayout;

    #[test]
    fn module_center_is_allowed_for_whole_station() {
        let ws = station_volume(&StationLayout::default_three_module());
        assert_eq!(enforce_safety("f", Vec3::new(2.0, 1.5, 1.5), &ws), SafetyVerdict::Allowed);
    }

    #[test]
    fn beyond_module_wall_is_a_violation() {
        let layout = StationLayout::default_three_module();
        let ws = vec![layout.module("module_1").unwrap().interior];
        let v = enforce_safety("r", Vec3::new(2.0, -0.2, 1.5), &ws);
        assert!(matches!(v, SafetyVerdict::Violation { .. }));
    }
}
