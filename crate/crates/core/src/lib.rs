pub mod aggregation;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod imaging;
pub mod model;
pub mod observations;
pub mod pipeline;
pub mod pnm;
pub mod sim;
pub mod stats;

pub use codebook::{Codebook, CodebookEntry};
pub use error::{Error, Result};
pub use model::{BinaryImage, GrayImage, ModelConfig, PatternId, Validate, Violation};
pub use observations::{ChannelCount, ChannelObservations, ProbeFeatures};
