//! Post-processing of ensemble weather forecasts with D-vine copula quantile
//! regression, a Gaussian EMOS benchmark, and forecast verification tools.

pub mod dataset;
pub mod dvine;
pub mod emos;
pub mod error;
pub mod experiment;
pub mod marginal;
pub mod optim;
pub mod paircopula;
pub mod quad;
pub mod special;
pub mod verify;

pub use dataset::{StationSeries, SynthSpec, WindowKind, WindowSpec};
pub use dvine::DVineModel;
pub use emos::{EmosModel, EmosParams};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ModelKind};
pub use marginal::KdeMarginal;
pub use paircopula::{Family, PairCopula, Rotation};
pub use verify::{DayScore, ScoreReport};
