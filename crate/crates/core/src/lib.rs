//! Energy-efficiency optimization for mmWave multiuser MIMO downlinks with
//! spatial modulation and hybrid beamforming.
//!
//! The pipeline is: geometric channel draws ([`channel`]), per-link
//! beamformers and QAM symbols ([`beamforming`]), Monte-Carlo samples of the
//! effective link gain ([`rate`]), and the global energy efficiency
//! objective with its solvers ([`gee`], [`solver`]). [`experiments`] and
//! [`cli`] drive everything from flat config files.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the usual `f64` choice.

pub mod beamforming;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod gee;
pub mod linalg;
pub mod rate;
pub mod rng;
pub mod roots;
mod scalar;
pub mod solver;

pub use config::SystemConfig;
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ChannelRealization = channel::ChannelRealization<f64>;
pub type LinkBeamformers = beamforming::LinkBeamformers<f64>;
pub type Constellation = beamforming::Constellation<f64>;
pub type GainSampleSet = rate::GainSampleSet<f64>;
pub type RateEstimate = rate::RateEstimate<f64>;
pub type GeeProblem = gee::GeeProblem<f64>;
pub type GeeSolution = solver::GeeSolution<f64>;

pub type GainSampleSetF32 = rate::GainSampleSet<f32>;
pub type GeeProblemF32 = gee::GeeProblem<f32>;
pub type GeeSolutionF32 = solver::GeeSolution<f32>;
