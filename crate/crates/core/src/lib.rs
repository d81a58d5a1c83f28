//! Microgravity station simulator and a hierarchical human/multi-robot
//! collaboration runtime.

pub mod agents;
pub mod bench;
pub mod cog;
pub mod gateway;
pub mod math;
pub mod robots;
pub mod scenario;
pub mod sim;
pub mod skills;
