//! Community detection for node-attributed networks with the
//! metadata-weighted content map equation.
//!
//! A partition is scored by the per-step description length of a random
//! surf that must also report each visited node's label; the `eta` weight
//! trades topological compression against metadata purity of modules.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod codelength;
pub mod flow;
pub mod flowgraph;
pub mod harness;
pub mod metrics;
pub mod netcore;
pub mod optimizer;
pub mod scalar;
pub mod synth;

pub use codelength::{evaluate, module_exit_rate, CodelengthError, CodelengthReport, ModuleAggregates};
pub use flow::{stationary, stationary_distribution, FlowDistribution, FlowError};
pub use flowgraph::{AggregatedNode, FlowGraph};
pub use metrics::{ami, mutual_information, ContingencyTable, MetricsError};
pub use netcore::{
    load_metadata, load_network, write_partition, MetadataAnnotation, Network, NetworkError, NetworkFormat,
    Partition,
};
pub use optimizer::{search, SearchConfig, SearchResult};
pub use scalar::{plogp, Scalar};
pub use synth::{delta_star, generate, SbmInstance, SbmSpec};

pub type NetworkF64 = Network<f64>;
pub type NetworkF32 = Network<f32>;
pub type FlowF64 = FlowDistribution<f64>;
pub type FlowF32 = FlowDistribution<f32>;
pub type ReportF64 = CodelengthReport<f64>;
pub type ReportF32 = CodelengthReport<f32>;
pub type FlowGraphF64 = FlowGraph<f64>;
pub type FlowGraphF32 = FlowGraph<f32>;
pub type SearchConfigF64 = SearchConfig<f64>;
pub type SearchConfigF32 = SearchConfig<f32>;
