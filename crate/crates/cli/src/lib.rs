//! Harness runner: config loading, mock backend wiring, resumable evaluation,
//! reports, alignment against human annotations and fixture generation.

pub mod align;
pub mod backend;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod export;
pub mod fixture;
pub mod ingest;
pub mod report;
pub mod results;

use vbench2_core::{DimensionId, ScoreRecord};

pub use error::CliError;

/// Dimension and model filters from the command line; empty means all.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selection {
    pub dimensions: Vec<DimensionId>,
    pub models: Vec<String>,
}

impl Selection {
    pub fn includes_dimension(&self, d: DimensionId) -> bool {
        self.dimensions.is_empty() || self.dimensions.contains(&d)
    }

    pub fn includes(&self, r: &ScoreRecord) -> bool {
        self.includes_dimension(r.dimension) && (self.models.is_empty() || self.models.contains(&r.model))
    }
}
