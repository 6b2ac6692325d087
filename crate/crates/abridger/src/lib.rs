//! Ingestion, batch commands, the row store and the review service built on
//! `abridger-core`.

pub mod error;
pub mod formats;
pub mod ingest;
pub mod ops;
pub mod pipeline;
pub mod service;
pub mod store;
