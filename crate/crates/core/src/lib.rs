//! Evaluation engines for intrinsic-faithfulness video benchmarking.
//!
//! The numeric scorers (camera motion, multi-view consistency, diversity,
//! identity, rank statistics) are generic over [`num::Scalar`]; the backend
//! boundary speaks `f64`. Aliases for both precisions are exported below.

pub mod aggregation;
pub mod appearance;
pub mod assets;
pub mod backends;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod num;
pub mod registry;
pub mod schemes;
pub mod suite;
pub mod video;

pub use aggregation::{ScoreRecord, ScoreValue};
pub use backends::{BackendSuite, MockScript, Verdict};
pub use constants::Constants;
pub use error::ScoreError;
pub use num::Scalar;
pub use suite::{DimensionId, EvalScheme, PromptSpec, SuiteManifest};
pub use video::VideoHandle;

pub type TrackGrid32 = geometry::TrackGrid<f32>;
pub type TrackGrid64 = geometry::TrackGrid<f64>;
pub type GeometryConfig32 = geometry::GeometryConfig<f32>;
pub type GeometryConfig64 = geometry::GeometryConfig<f64>;
pub type FeatureFrame32 = appearance::FeatureFrame<f32>;
pub type FeatureFrame64 = appearance::FeatureFrame<f64>;
pub type FeatureTensor32 = appearance::FeatureTensor<f32>;
pub type FeatureTensor64 = appearance::FeatureTensor<f64>;
pub type DiversityResult32 = appearance::DiversityResult<f32>;
pub type DiversityResult64 = appearance::DiversityResult<f64>;
pub type IdentityTrace64 = appearance::IdentityTrace<f64>;
pub type CameraOutcome64 = geometry::CameraOutcome<f64>;
