//! Live-episode gateway: newline-delimited JSON over TCP.
//!
//! Server messages carry a per-session `seq` with no gaps. Snapshots go out
//! every `snapshot_every` ticks, `cog_state` on every node transition. One
//! client may hold the human role; its commands fold latest-wins into the
//! next tick, and the sim pauses while the human is absent mid-assignment.

mod client;
mod protocol;
mod server;

pub use client::GatewayClient;
pub use protocol::{codes, kinds, ClientMessage, Envelope, ProtocolViolation, Role};
pub use server::{serve_episode, Gateway, GatewayError, GatewayOptions};
