//! Location-based recommendation and log analytics for library IoT
//! middleware.
//!
//! The crate is organised around Library of Congress call numbers
//! ([`lccn`]): shelves in the stack map ([`stacksmap`]) cover call-number
//! ranges, the corpus ([`corpus`]) indexes catalog records by call number,
//! and the recommender ([`recommend`]) walks from a patron position to
//! nearby shelves to popular books, e-books and journal databases.
//! [`telemetry`] turns the middleware's JSON Lines transaction log back into
//! annotated tables, heat maps and subject distributions.

pub mod corpus;
pub mod diag;
pub mod geom;
pub mod lccn;
pub mod locate;
pub mod log;
pub mod recommend;
pub mod stacksmap;
pub mod telemetry;

pub use corpus::{BibRecord, CorpusStore, Format};
pub use diag::{Diagnostic, LoadError};
pub use geom::{Point, Rect};
pub use lccn::{CallNumber, CallNumberRange, ClassificationOutline};
pub use locate::{Beacon, BeaconDeployment, BeaconObservation, PatronLocation};
pub use log::{ApiLogEntry, Module};
pub use recommend::{Recommendation, RecommendationSet, Recommender, RecommenderConfig};
pub use stacksmap::{Shelf, StackMap};
