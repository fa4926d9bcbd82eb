//! Live steering service. Clients create sessions over a websocket (or plain
//! HTTP), move a target point, and receive state frames at the tick rate while
//! the arm follows by horizontal lifting.

pub mod config;
pub mod error;
pub mod hub;
pub mod protocol;
pub mod server;

pub use config::ServiceConfig;
pub use error::{Result, SteerError};
pub use hub::{Hub, SessionHandle};
pub use protocol::{Inbound, Outbound};
pub use server::{dispatch, router, serve, serve_on};
