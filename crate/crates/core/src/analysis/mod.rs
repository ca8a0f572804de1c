//! Contraction constants, θ thresholds, residuals and stability certificates.

mod bounds;
mod stability;

pub use bounds::{
    bound_registry, contraction_constant_basic, contraction_constant_weighted, default_theta, holder_kernel_bound,
    omega, theta_threshold_basic, theta_threshold_weighted, AnalysisReport, BoundInputs, ContractionBound,
    HolderExponents, IntervalTerms, Weighted, WeightedBounds, THETA_BRACKET,
};
pub use stability::{
    c_phi_for, certify, check_comparison, residual_profile, stability_constant, stability_denominators, CPhiReport,
    CertifyOptions, CertifyStatus, Denominator, EpsilonOutcome, QuadratureStrategy, ResidualProfile,
    StabilityConstant, StabilityMode, StabilityReport, IMPULSE_EXACT_TOLERANCE,
};
