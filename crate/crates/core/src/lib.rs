pub mod cli;
pub mod error;
pub mod integrate;
pub mod dirac;
pub mod expr;
pub mod presets;
pub mod report;
pub mod scaling;
pub mod spectral;
pub mod verify;

pub use dirac::{DiracProblem, State2, Trajectory};
pub use error::{Error, Result};
pub use expr::{parse_coefficient, CoefficientExpr};
pub use integrate::{IntegratorConfig, Method};
pub use scaling::{ScalingIndex, ScalingModel};
pub use spectral::{solve_spectrum, Eigenpair, Spectrum};
