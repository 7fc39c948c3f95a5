//! Service side of the pre-print portal: OAI-PMH harvesting, on-disk
//! state, mention-log ingestion, preview strips and the JSON HTTP API.
//! The algorithms live in `portal-core`.

pub mod api;
pub mod config;
pub mod harvest;
pub mod mentionlog;
pub mod oai;
pub mod persist;
pub mod state;
pub mod thumbs;
pub mod timefmt;

pub use portal_core as core;
