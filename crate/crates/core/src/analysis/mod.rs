//! Error functionals of point sets: worst-case errors by three routes,
//! q-norm energies, discrepancies, adversarial lower bounds, α transfer,
//! the perturbation experiment and scaling fits.

mod adversarial;
mod discrepancy;
mod moments;
mod qnorm;
mod scaling;
mod transfer;
mod wce;

pub use adversarial::{adversarial_bound, AdversarialReport, ADVERSARIAL_EPS, ADVERSARIAL_GRID_TOL, MAX_FFT_POINTS};
pub use discrepancy::{
    ball_volume, cap_discrepancy, invert_profile, levelset_discrepancy, shape_constant, DiscrepancyFamily,
    DiscrepancyReport, LevelRegime, LevelSetSummary,
};
pub use moments::moment_vector;
pub use qnorm::{qnorm_energy, quasi_uniform_grid, QnormReport, MIN_QNORM_GRID};
pub(crate) use moments::moment_residual;
pub use scaling::{discrepancy_csv, scaling_csv, scaling_fit, scaling_from_samples, ScalingResult, ScalingSample};
pub use transfer::{
    alpha_transfer_check, perturb_node, perturbation_experiment, safe_displacement, PerturbationReport, TransferReport,
    MATCHED_BUDGET, RULE_CHECK_TOL,
};
pub use wce::{spectral_partial_sums, wce, wce_spectral, WceMethod, WceReport, DEFAULT_SPECTRAL_BUDGET, TORUS_HEAT_FLOOR};
