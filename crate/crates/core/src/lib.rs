//! A registry of differential-privacy deployments.
//!
//! Each deployment is described by a [`DeploymentCard`] whose completeness is
//! graded by a [`TransparencyTier`]. Cards are stored as canonical JSON
//! ([`io`]), checked by the rule engine in [`validate`], and served from an
//! immutable [`RegistryIndex`] that supports table queries and trend
//! aggregation.
//!
//! ```
//! use dp_registry::{infer_tier, parse_card, TransparencyTier};
//!
//! let card = parse_card(r#"{
//!   "id": "example",
//!   "schema_version": "1.0",
//!   "declared_tier": 1,
//!   "data_product": {
//!     "name": "Example counts",
//!     "curator": "Example Office",
//!     "description": "Weekly visit counts.",
//!     "intended_use": "Service planning.",
//!     "publication_year": 2022,
//!     "region": "Canada",
//!     "sector": "government"
//!   }
//! }"#).unwrap();
//! assert_eq!(infer_tier(&card), Some(TransparencyTier::ONE));
//! ```

pub mod aggregate;
pub mod card;
pub mod index;
pub mod io;
pub mod manifest;
pub mod query;
pub mod tier;
pub mod validate;

#[cfg(any(test, feature = "test-support"))]
pub mod testing;

pub use aggregate::{AggregateResult, AggregateVariable, Bucket, YearBuckets, YearRange};
pub use card::{DeploymentCard, SCHEMA_VERSION};
pub use index::{project_row, RegistryIndex, RowProjection};
pub use io::{load_corpus, parse_card, serialize_card, CorpusLoadResult, ParseError};
pub use manifest::{corpus_manifest_check, CorpusManifest, Discrepancy};
pub use query::{Column, Filter, Query, QueryError, SortDirection};
pub use tier::TransparencyTier;
pub use validate::{
    admission_report, infer_tier, is_admissible, structural_check, validate_at_tier, Severity, ValidationIssue,
    ValidationReport,
};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/deployment-cards.md")]
    mod deployment_cards {}
    #[doc = include_str!("../../../book/src/tiers.md")]
    mod tiers {}
    #[doc = include_str!("../../../book/src/querying.md")]
    mod querying {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
}
