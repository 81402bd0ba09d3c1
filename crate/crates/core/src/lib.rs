//! Structure-preserving H∞-optimal PI control of symmetric linear plants
//! and actuated networks.
//!
//! The core is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix double precision.

pub mod linalg;
pub mod lti;
pub mod network;
pub mod scalar;
pub mod simulation;
pub mod synthesis;
pub mod verification;

pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type StateSpace64 = lti::StateSpace<f64>;
pub type StateSpace32 = lti::StateSpace<f32>;
pub type PiGains64 = lti::PiGains<f64>;
pub type PiController64 = synthesis::PiController<f64>;
pub type PiController32 = synthesis::PiController<f32>;
pub type FrequencyResponse64 = lti::FrequencyResponse<f64>;
pub type TimeResponse64 = simulation::TimeResponse<f64>;
pub type NetworkPlant64 = network::NetworkPlant<f64>;
pub type VerificationConfig64 = verification::VerificationConfig<f64>;
