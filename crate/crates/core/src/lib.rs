//! Desk-scale neural architecture search toolkit.
//!
//! The crate implements random search over DAG cell spaces with a
//! weight-sharing supernet, an ASHA (random search + early stopping)
//! baseline, the three-stage search/select/evaluate pipeline, and a
//! manifest-based exact-reproducibility harness. All numeric kernels are
//! deterministic given a master seed: reruns within one build reproduce
//! every metric and genotype bit for bit.
//!
//! Core math is generic over the scalar type (anything implementing
//! [`numcore::Real`]); the orchestration layers pin [`Scalar`] = `f64`.

pub mod asha;
pub mod cellnet;
pub mod config;
pub mod numcore;
pub mod pipeline;
pub mod reproharness;
pub mod searchspace;
pub mod tasks;

mod error;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Scalar type used by the shipped pipelines and the CLI.
pub type Scalar = f64;

/// Parameter tensor at the default scalar type.
pub type Tensor = numcore::ParamTensor<Scalar>;

/// Dense row-major matrix at the default scalar type.
pub type Matrix = numcore::Matrix<Scalar>;

/// Supernet parameter store at the default scalar type.
pub type SharedWeights = cellnet::SharedWeights<Scalar>;

/// Standalone (active edges only) network at the default scalar type.
pub type StandaloneNet = cellnet::StandaloneNet<Scalar>;

/// Benchmark dataset at the default scalar type.
pub type Dataset = tasks::Dataset<Scalar>;

/// Version string recorded in manifests.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
