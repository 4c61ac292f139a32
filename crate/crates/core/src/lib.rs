//! Corpus-to-classifier toolkit for national-dialect text.
//!
//! The pipeline runs in stages:
//!
//! 1. [`corpus`]: parse `<doc>`-delimited dumps, strip markup, enforce size
//!    rules and build labelled datasets at document or sentence granularity.
//! 2. [`arff`]: read and write those datasets as ARFF.
//! 3. [`features`]: string-to-word-vector conversion, stop-word removal and
//!    information-gain attribute selection.
//! 4. [`classifiers`]: multinomial naive Bayes, ridge logistic regression,
//!    linear SVM, bagging and an information-gain decision tree.
//! 5. [`evaluation`]: training-set, cross-validation and percentage-split
//!    protocols over feature × classifier grids.
//! 6. [`analysis`]: corpus similarity matrices and multi-word expressions.
//!
//! [`synthetic`] generates a seeded country-tagged corpus with planted marker
//! words for end-to-end checks.

pub mod analysis;
pub mod arff;
pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod synthetic;

pub use error::{Error, Result};
