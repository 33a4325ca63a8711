//! HTTP service and command-line front end for `clickwise`.
//!
//! The `clickwise` binary wraps every pipeline stage as a subcommand and
//! serves the loaded models over JSON:
//!
//! | route | body | returns |
//! |---|---|---|
//! | `GET /health` | | load status and artifact versions |
//! | `GET /tactics` | | the ten-tactic rubric |
//! | `POST /score` | `{"text"}` | clickbait and named attribute scores |
//! | `POST /rewrite` | [`api::RewriteRequest`] | [`api::RewriteResponse`] |
//! | `POST /sweep` | [`api::SweepRequest`] | rows as JSON, streamed CSV or NDJSON |

pub mod api;
pub mod cli;
pub mod config;
pub mod state;

pub use api::router;
pub use config::ServiceConfig;
pub use state::{AppState, ServiceState};
