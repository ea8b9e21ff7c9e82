//! coachd service: HTTP API over the event-sourced state, log persistence,
//! and the offline commands behind the `coachd` binary.

pub mod api;
pub mod commands;
pub mod config;
pub mod server;
pub mod store;

pub use config::{ServiceConfig, ShownSetScope};
pub use store::{Store, StoreError};
