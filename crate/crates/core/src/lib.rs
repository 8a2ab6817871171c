//! Fractional p-Laplacian toolkit for radial profiles.
//!
//! Evaluates the operator pointwise, computes the Gagliardo energy and potential
//! energies, builds a constrained ground state by projected descent, and checks
//! the Pohozaev and integration-by-parts identities numerically.

pub mod config;
pub mod energy;
pub mod error;
pub mod identity;
pub mod kernel;
pub mod nonlinearity;
pub mod operator;
pub mod params;
pub mod planar;
pub mod profile;
pub mod quadrature;
pub mod run;
pub mod solver;
pub mod symmetrize;

pub use config::RunConfig;
pub use energy::{Energy, EnergyReport};
pub use error::{Error, Result};
pub use identity::{ibp_check, pohozaev_residual, IdentityReport, VectorFieldSpec};
pub use kernel::AngularKernel;
pub use nonlinearity::Nonlinearity;
pub use operator::{flp_apply, integrand_symmetrized, OperatorValue, QuadSpec};
pub use params::{normalization_constant, Params};
pub use planar::PlanarGrid;
pub use profile::{RadialGrid, RadialProfile};
pub use run::{run, Command, RunRecord};
pub use solver::{solve, SolveConfig, SolveReport};
pub use symmetrize::{schwarz_symmetrize, symmetrize_radial};
