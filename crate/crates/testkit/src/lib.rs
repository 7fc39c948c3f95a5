//! Shared fixtures for the portal test suites: seeded synthetic corpora,
//! brute-force reference implementations, a scripted OAI-PMH server and a
//! fake PDF rasterizer.

pub mod checks;
pub mod corpus;
pub mod oai_server;
pub mod oracle;
pub mod raster;

pub use corpus::{Corpus, CorpusSpec};
pub use oai_server::{Fault, FixtureServer};
