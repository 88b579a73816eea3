//! Tag-ecosystem simulation and analytics.
//!
//! `tagevo` generates synthetic tag streams with the Yule–Simon process (and
//! a set-valued variant where each step emits a whole post), and analyzes
//! annotation logs from social tagging services for signatures of
//! open-ended evolution:
//!
//! * [`ingest`]: parse `(time, item, user, tag)` logs into a [`Corpus`].
//! * [`ysmodel`]: original and set-based Yule–Simon generators.
//! * [`novelty`]: single-tag and pairwise novelty rates, pair-birth matrix,
//!   Heaps and Zipf fits.
//! * [`semshift`]: per-tag co-occurrence profiles and their drift measured by
//!   Jensen–Shannon divergence.
//! * [`community`]: user vocabulary-similarity networks, modularity
//!   communities, k-cores and per-user novelty production.
//!
//! The `book/` directory of the repository walks through each concept; its
//! code snippets are compiled and run as doctests of this crate.

pub mod community;
pub mod ingest;
pub mod novelty;
pub mod semshift;
pub mod ysmodel;

pub use ingest::{BucketWidth, Corpus, Post, TagId, UserId};

// The guide's chapters, so that `cargo test` runs their snippets.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ingestion.md")]
    mod ingestion {}
    #[doc = include_str!("../../../book/src/yule-simon.md")]
    mod yule_simon {}
    #[doc = include_str!("../../../book/src/novelty.md")]
    mod novelty {}
    #[doc = include_str!("../../../book/src/semantic-drift.md")]
    mod semantic_drift {}
    #[doc = include_str!("../../../book/src/communities.md")]
    mod communities {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
