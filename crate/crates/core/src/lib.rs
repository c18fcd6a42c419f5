//! Profiling of fake-news and real-news spreaders on social media.
//!
//! The pipeline runs in stages, each a plain function over immutable data:
//!
//! * [`corpus`] loads tweets, users and story labels, tags every user as a
//!   fake- or real-news spreader and builds a short per-user document.
//! * [`lexicon`] parses category word lists and measures per-tweet category
//!   percentages.
//! * [`features`] turns each user into ten motivational features.
//! * [`stats`] compares the two spreader groups with Welch's t-test.
//! * [`classifier`] trains a feed-forward network on an embedding, with and
//!   without the features concatenated.
//! * [`cli`] wires the stages into subcommands with CSV handoffs.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the command line uses.

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod demo;
pub mod error;
pub mod features;
pub mod lexicon;
pub mod scalar;
pub mod stats;

pub use corpus::{
    NewsLabel, SpreaderClass, SpreaderLabel, TweetRecord, UserDocument, UserRecord, Veracity,
};
pub use error::{Error, Result};
pub use lexicon::{CategoryLexicon, Pattern, TokenList};
pub use scalar::Scalar;

pub type FeatureVector = features::FeatureVector<f64>;
pub type LabeledFeatureRow = features::LabeledFeatureRow<f64>;
pub type TTestResult = stats::TTestResult<f64>;
pub type EmbeddingTable = classifier::EmbeddingTable<f64>;
pub type FusionModel = classifier::FusionModel<f64>;
pub type NormParams = classifier::NormParams<f64>;
pub type ExperimentOutcome = classifier::ExperimentOutcome<f64>;
