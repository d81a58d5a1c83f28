//! Stable JSON rendering of world state.
//!
//! Field order is fixed and every number is written with nine significant
//! digits so snapshots can be compared byte-for-byte in golden files.

use serde::Deserialize;
use std::fmt::Write;

use crate::math::{format_sig, Vec3};

use super::world::World;

const DIGITS: usize = 9;

fn push_vec(out: &mut String, v: &[f64]) {
    out.push('[');
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format_sig(*x, DIGITS));
    }
    out.push(']');
}

fn push_str(out: &mut String, s: &str) {
    // Ids are plain identifiers, but escape anyway.
    out.push_str(&serde_json::to_string(s).unwrap_or_else(|_| "\"\"".into()));
}

fn v3(v: Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

impl World {
    /// `{tick, bodies:[{id,pos,quat,lin,ang,held_by}], articulations:[{id,value}]}`
    pub fn snapshot_json(&self) -> String {
        let mut out = String::with_capacity(128 + 160 * self.bodies().len());
        let _ = write!(out, "{{\"tick\":{},\"bodies\":[", self.tick);
        for (i, b) in self.bodies().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("{\"id\":");
            push_str(&mut out, &b.id);
            out.push_str(",\"pos\":");
            push_vec(&mut out, &v3(b.pose.position));
            out.push_str(",\"quat\":");
            let q = b.pose.orientation;
            push_vec(&mut out, &[q.w, q.x, q.y, q.z]);
            out.push_str(",\"lin\":");
            push_vec(&mut out, &v3(b.twist.linear));
            out.push_str(",\"ang\":");
            push_vec(&mut out, &v3(b.twist.angular));
            out.push_str(",\"held_by\":");
            match self.holder_of(&b.id) {
                Some(g) => push_str(&mut out, g),
                None => out.push_str("null"),
            }
            out.push('}');
        }
        out.push_str("],\"articulations\":[");
        for (i, a) in self.articulations().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("{\"id\":");
            push_str(&mut out, &a.id);
            out.push_str(",\"value\":");
            out.push_str(&format_sig(a.value, DIGITS));
            out.push('}');
        }
        out.push_str("]}");
        out
    }
}

/// Parsed form of [`World::snapshot_json`], for clients and tests.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SnapshotView {
    pub tick: u64,
    pub bodies: Vec<BodyView>,
    pub articulations: Vec<ArticulationView>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BodyView {
    pub id: String,
    pub pos: [f64; 3],
    pub quat: [f64; 4],
    pub lin: [f64; 3],
    pub ang: [f64; 3],
    pub held_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ArticulationView {
    pub id: String,
    pub value: f64,
}

impl SnapshotView {
    pub fn body(&self, id: &str) -> Option<&BodyView> {
        self.bodies.iter().find(|b| b.id == id)
    }
}
