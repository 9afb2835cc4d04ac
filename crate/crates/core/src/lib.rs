//! Hydrodynamic limits of one-dimensional log-gases through their Cauchy,
//! R- and S-transforms.

pub mod error;
pub mod evolution;
pub mod measures;
mod quad;
pub mod scalar;
pub mod sde;
pub mod series;
pub mod transforms;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases for the generic types.
pub mod f64 {
    pub type MeasureSpec = crate::measures::MeasureSpec<f64>;
    pub type Density = crate::measures::Density<f64>;
    pub type TruncatedSeries = crate::series::TruncatedSeries<f64>;
    pub type MomentSequence = crate::series::MomentSequence<f64>;
    pub type CumulantSequence = crate::series::CumulantSequence<f64>;
    pub type STransformSeries = crate::transforms::STransformSeries<f64>;
    pub type ClosedForm = crate::transforms::ClosedForm<f64>;
    pub type SharedField = crate::transforms::SharedField<f64>;
    pub type Family = crate::evolution::Family<f64>;
    pub type EvolutionProblem = crate::evolution::EvolutionProblem<f64>;
    pub type EvolutionResult = crate::evolution::EvolutionResult<f64>;
    pub type SdeFamily = crate::sde::SdeFamily<f64>;
    pub type SdeConfig = crate::sde::SdeConfig<f64>;
    pub type Ensemble = crate::sde::Ensemble<f64>;
}
