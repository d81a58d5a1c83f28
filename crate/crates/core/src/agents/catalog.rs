//! Affordance catalog: one source, two renderings.

use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt::Write;

use crate::cog::Roster;
use crate::robots::{DragCapability, Locomotion, RobotKind};
use crate::skills::SkillKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Affordance {
    pub id: String,
    pub kind: RobotKind,
    pub skills: BTreeSet<SkillKind>,
    pub locomotion: String,
    pub payload_limit: f64,
    pub drag: String,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffordanceCatalog {
    pub executors: Vec<Affordance>,
}

impl AffordanceCatalog {
    pub fn from_roster(roster: &Roster) -> AffordanceCatalog {
        let executors = roster
            .values()
            .map(|d| Affordance {
                id: d.id.clone(),
                kind: d.kind,
                skills: d.skills.clone(),
                locomotion: match &d.locomotion {
                    Locomotion::WholeStation => "whole_station".into(),
                    Locomotion::RailBound(r) => format!("rail:{}", r.join(",")),
                    Locomotion::FixedBase(_) => "fixed_base".into(),
                },
                payload_limit: d.payload_limit,
                drag: match d.drag_capability {
                    DragCapability::None => "none".into(),
                    DragCapability::ShortRange(m) => format!("short_range:{m}"),
                    DragCapability::Stable => "stable".into(),
                },
                summary: d.summary(),
            })
            .collect();
        AffordanceCatalog { executors }
    }

    /// Prompt rendering, one paragraph per executor.
    pub fn text(&self) -> String {
        let mut s = String::new();
        for a in &self.executors {
            let _ = writeln!(s, "- {}", a.summary);
        }
        s
    }
}
