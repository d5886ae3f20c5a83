//! Discrete-time Weyl and Dirac quantum walks on cubic and BCC lattices.

pub mod coin;
pub mod dump;
pub mod error;
pub mod evolution;
pub mod lattice;
pub mod observables;
pub mod spectral;
pub mod states;
pub mod walk;

pub use coin::{CoinMatrix, CoinVector};
pub use error::{QwError, Result};
pub use lattice::{GridSpec, LatticeKind, SiteCoord, Sublattice, WaveVector};
pub use spectral::{bcc_dft, bcc_idft, dft_rect, idft_rect, SpectralField, SpectralPlan};
pub use walk::{Branch, SpectrumSlot, TransitionSet, WalkFamily, WalkMatrix, WalkModel};
pub use evolution::{
    approximation_bound, evolve_spectral, evolve_truncated, overlap, step_position, ApproximationBound,
    DispersionApprox, Domain, FieldState, PositionStepper, Propagator,
};
pub use states::{
    band_concentration, branch_decompose, branch_weighted_state, gaussian_particle_state, localized_state,
    superposition_state, BranchDecomposition, ParticleStateSpec,
};
pub use observables::{
    commutator_expectation, decomposition_series, dominant_frequency, kinematic_operators, least_squares_line,
    marginal, mean_position, mean_position_decomposition, newton_wigner_mean, newton_wigner_series,
    position_series, position_spread, probability_distribution, velocity_expectation, Decomposition,
    KinematicOperators, Marginal, MeanPosition, ObservableSeries,
};
