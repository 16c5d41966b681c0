//! Simulator and closed-form calculator for a two-step entanglement
//! purification scheme on photon pairs hyperentangled in polarization,
//! spatial mode and time bin.
//!
//! Everything is generic over [`scalar::Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod analytic;
pub mod efficiency;
pub mod error;
pub mod model;
pub mod optics;
pub mod protocol;
pub mod qstate;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type BellCoeffs = model::BellCoeffs<f64>;
pub type NoiseParams = model::NoiseParams<f64>;
pub type MixedState = qstate::MixedState<f64>;
pub type PureState = qstate::PureState<f64>;
pub type OutcomeReport = protocol::OutcomeReport<f64>;
pub type StepResult = analytic::StepResult<f64>;
pub type CriterionBand = analytic::CriterionBand<f64>;
pub type EfficiencyParams = efficiency::EfficiencyParams<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type BellCoeffs = crate::model::BellCoeffs<f32>;
    pub type NoiseParams = crate::model::NoiseParams<f32>;
    pub type MixedState = crate::qstate::MixedState<f32>;
    pub type OutcomeReport = crate::protocol::OutcomeReport<f32>;
    pub type StepResult = crate::analytic::StepResult<f32>;
    pub type EfficiencyParams = crate::efficiency::EfficiencyParams<f32>;
}
