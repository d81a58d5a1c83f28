//! Rendezvous with a drifting object.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{Pose, Vec3};
use crate::sim::{Body, StationLayout};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaserLimits {
    pub max_accel: f64,
    pub max_speed: f64,
}

impl ChaserLimits {
    /// Farthest distance a chaser starting at rest covers in `t` seconds.
    pub fn reach(&self, t: f64) -> f64 {
        let t_sat = self.max_speed / self.max_accel;
        if t <= t_sat {
            0.5 * self.max_accel * t * t
        } else {
            0.5 * self.max_accel * t_sat * t_sat + self.max_speed * (t - t_sat)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interception {
    pub point: Vec3,
    pub time: f64,
    pub ticks: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum InterceptError {
    #[error("object leaves the reachable volume before it can be intercepted")]
    Unreachable,
}

/// Force-free drift with linear drag: `p0 + v0 (1 - e^(-bt)) / b`.
pub fn drift_position(p0: Vec3, v0: Vec3, beta: f64, t: f64) -> Vec3 {
    if beta <= 0.0 {
        p0 + v0 * t
    } else {
        p0 + v0 * ((1.0 - (-beta * t).exp()) / beta)
    }
}

const SCAN_STEP: f64 = 0.02;
const HORIZON: f64 = 120.0;

/// Earliest point on the object's drift path the chaser can reach.
///
/// Scans forward in time for the first instant the chaser's reachable ball
/// covers the object, then bisects. With a station given, the object leaving
/// the station volume first makes the rendezvous unreachable.
pub fn intercept_point(
    object: &Body,
    chaser: &Pose,
    limits: ChaserLimits,
    station: Option<&StationLayout>,
    dt: f64,
) -> Result<Interception, InterceptError> {
    let p0 = object.position();
    let v0 = object.twist.linear;
    let beta = object.drag_coeff;
    let c = chaser.position;
    let gap = |t: f64| limits.reach(t) - drift_position(p0, v0, beta, t).distance(c);
    let done = |t: f64| {
        let point = drift_position(p0, v0, beta, t);
        let ticks = if dt > 0.0 { (t / dt).ceil() as u64 } else { 0 };
        Ok(Interception { point, time: t, ticks })
    };
    if gap(0.0) >= 0.0 {
        return done(0.0);
    }
    let mut lo = 0.0;
    let mut t = SCAN_STEP;
    while t <= HORIZON {
        if let Some(layout) = station {
            if !layout.contains(drift_position(p0, v0, beta, t)) {
                return Err(InterceptError::Unreachable);
            }
        }
        if gap(t) >= 0.0 {
            let mut hi = t;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if gap(mid) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return done(hi);
        }
        lo = t;
        t += SCAN_STEP;
    }
    Err(InterceptError::Unreachable)
}
