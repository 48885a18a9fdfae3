pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod lightcone;
pub mod observables;
pub mod operators;
pub mod propagation;

pub use error::{Error, Result};
pub use hamiltonian::{Exponent, Family, HamiltonianMatrix, HamiltonianSpec};
pub use hilbert::{DensityMatrix, LocalPauli, LocalState, PauliKind, Region, StateVector};
pub use lightcone::{ContourResult, ScramblingField, VelocityFit};
pub use observables::{CommutatorSample, Ensemble, EntropySample};
pub use operators::{OperatorDensityProfile, PauliString};
pub use propagation::{
    HeisenbergOperator, KrylovConfig, Method, NumericalLimits, Propagator, SpectralDecomposition,
};
