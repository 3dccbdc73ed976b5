//! Crucible evaluates and compares property-based-testing generation
//! strategies by mutation testing: ground-truth bugs are embedded in
//! workload sources through a comment-marker grammar, an experiment driver
//! runs strategies against every mutant-property task, and the analysis
//! layer turns raw trial records into solve statuses, task bucket charts,
//! and statistical comparisons.
//!
//! The crate is organized around the experiment lifecycle:
//!
//! * [`mutation`] — parse, enumerate, and toggle mutants embedded in source
//!   files, byte-exactly.
//! * [`schema`] — workload configs, test specifications, and task expansion.
//! * [`driver`] — staging, subprocess execution with external timeouts, and
//!   the append-only results log.
//! * [`analysis`] / [`stats`] — solve statuses, bucket assignment, and
//!   Mann-Whitney U comparisons.
//! * [`report`] — task bucket charts as standalone SVG plus CSV/text tables.
//! * [`harness`] — a minimal embedded PBT framework acting as the reference
//!   adapter for the driver's child protocol.
//! * [`workloads`] — built-in BST and RBT workloads with their mutant
//!   catalogs and property specifications.
//! * [`crosslang`] — serialized-input corpora for cross-language replay with
//!   decoupled generation/execution timing.
//!
//! The narrative guide lives in `book/`; its code snippets are compiled as
//! doc-tests below so the book cannot drift from the library.

pub mod analysis;
pub mod cli;
pub mod crosslang;
pub mod driver;
pub mod harness;
pub mod mutation;
pub mod report;
pub mod rng;
pub mod schema;
pub mod stats;
pub mod trial;
pub mod workloads;

/// Book chapters, compiled as doc-tests so `cargo test` keeps the guide's
/// snippets in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/mutation-markers.md")]
    struct MutationMarkers;
    #[doc = include_str!("../../../book/src/workloads.md")]
    struct Workloads;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
    #[doc = include_str!("../../../book/src/analysis.md")]
    struct Analysis;
    #[doc = include_str!("../../../book/src/cross-language.md")]
    struct CrossLanguage;
}
