use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The basic-skill library. Serialized names are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SkillKind {
    MoveTo,
    RailMove,
    CrossHatch,
    Grasp,
    Release,
    Drag,
    Handover,
    PickCube,
    ThrowCube,
    CatchFloatingCube,
    OpenCabinetDoor,
    CloseCabinetDoor,
    OpenBox,
    PickFromBox,
}

impl SkillKind {
    pub const ALL: [SkillKind; 14] = [
        SkillKind::MoveTo,
        SkillKind::RailMove,
        SkillKind::CrossHatch,
        SkillKind::Grasp,
        SkillKind::Release,
        SkillKind::Drag,
        SkillKind::Handover,
        SkillKind::PickCube,
        SkillKind::ThrowCube,
        SkillKind::CatchFloatingCube,
        SkillKind::OpenCabinetDoor,
        SkillKind::CloseCabinetDoor,
        SkillKind::OpenBox,
        SkillKind::PickFromBox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SkillKind::MoveTo => "MoveTo",
            SkillKind::RailMove => "RailMove",
            SkillKind::CrossHatch => "CrossHatch",
            SkillKind::Grasp => "Grasp",
            SkillKind::Release => "Release",
            SkillKind::Drag => "Drag",
            SkillKind::Handover => "Handover",
            SkillKind::PickCube => "PickCube",
            SkillKind::ThrowCube => "ThrowCube",
            SkillKind::CatchFloatingCube => "CatchFloatingCube",
            SkillKind::OpenCabinetDoor => "OpenCabinetDoor",
            SkillKind::CloseCabinetDoor => "CloseCabinetDoor",
            SkillKind::OpenBox => "OpenBox",
            SkillKind::PickFromBox => "PickFromBox",
        }
    }

    /// Skills that are only defined in microgravity.
    pub fn zero_g_only(self) -> bool {
        matches!(self, SkillKind::CatchFloatingCube)
    }

    /// Skills that move the executor through the station rather than
    /// manipulate something.
    pub fn is_locomotion(self) -> bool {
        matches!(self, SkillKind::MoveTo | SkillKind::RailMove | SkillKind::CrossHatch)
    }
}

impl fmt::Display for SkillKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SkillKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SkillKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown skill `{s}`"))
    }
}
