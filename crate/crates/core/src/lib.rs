//! Lyapunov-Schmidt reduction for the critical magnetic Schrodinger equation.

pub mod functionals;
pub mod instanton;
pub mod melnikov;
pub mod potentials;
pub mod quadrature;
pub mod reduction;
pub mod spectral;

pub use functionals::{
    energy, f0, g1, g1_source, g2, g2_bubble, grad_g1, hessian_f0_apply, ComplexField, EnergyBreakdown, FieldBasis,
    FieldError, FieldKind, Frame, G2Parts, G2Rule, PotentialSamples,
};
pub use instanton::{bubble_field, bubble_norms, kappa, tangent_basis, Bubble, Dimension, InstantonError, TangentBasis};
pub use melnikov::{
    boundary_decay_check, correction_bound, correction_check, gamma_smallmu_closed_form, magnetic_smallmu_limit,
    richardson, scan, CorrectionBound, CorrectionOptions, CorrectionReport, DecayOptions, DecayReport, GammaLandscape,
    GammaSample, Melnikov, MelnikovError, SliceGrid,
};
pub use potentials::{
    check_assumptions, make_potential, AssumptionReport, CheckOptions, ElectricPotential, MagneticPotential,
    PotentialError, PotentialPair, PotentialSpec,
};
pub use quadrature::{Chart, Estimate, QuadMode, QuadratureError};
pub use reduction::{
    assemble_at, assemble_solution, find_critical_points, pde_residual, solution_residual, CriticalPoint, PointKind, ReducedSolution,
    ReductionError, Residuals, SearchOptions, SearchResult,
};
pub use spectral::{BlockDiagonalHessian, KernelCounts, SpectralError, SphereSpectrum, Transplant};

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Instanton(#[from] InstantonError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Melnikov(#[from] MelnikovError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}
