//! Serve, query, and join RDF triples over plain HTTP GET.
//!
//! The crate is organized around a single resource: `GET /restpark` with
//! optional `subject`, `predicate`, and `object` parameters selects the
//! matching triples from an in-memory store and returns them as flattened
//! JSON-LD, paginated via `page` / `page_size`. On top of that sit a
//! blocking client that walks those pages and a small federation engine
//! that joins patterns across several such endpoints.
//!
//! - [`term`]: RDF terms, triples, patterns, canonical text syntax.
//! - [`ntriples`]: N-Triples documents in and out.
//! - [`store`]: immutable indexed triple store with pattern lookup.
//! - [`jsonld`]: the deterministic flattened JSON-LD profile.
//! - [`service`]: the HTTP contract as a pure request -> response function.
//! - [`server`]: binds the service to a TCP listener.
//! - [`client`]: blocking HTTP client for remote endpoints.
//! - [`federation`]: multi-endpoint join plans.
//! - [`fixtures`]: bundled sample datasets used by tests and the demo.

pub mod client;
pub mod federation;
pub mod fixtures;
pub mod jsonld;
pub mod ntriples;
pub mod server;
pub mod service;
pub mod store;
pub mod term;

#[cfg(test)]
pub(crate) mod testgen;

pub use term::{
    compare_terms, parse_term, KindSet, Term, TermError, TermKind, Triple, TriplePattern,
};
