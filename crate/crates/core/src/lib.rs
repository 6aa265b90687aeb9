//! Distinct-elements estimation with cutoff sketches.

pub mod cli;
pub mod delphic;
pub mod error;
pub mod harness;
pub mod list;
pub mod rng;
pub mod score;
pub mod sizing;
pub mod sketch;

pub use error::{Error, Result};
pub use list::CutoffList;
pub use score::{Score, ScoreDistribution, Truncation};
pub use sizing::{bucket_limit, SizingParams, SizingResult, SizingVariant};
pub use sketch::{
    run, EstimateReport, Form, RunOutcome, Sketch, SketchConfig, Status, UpdateRule, Variant,
};
