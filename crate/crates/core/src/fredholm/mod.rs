//! Finite-dimensional approximation of (twisted) Fredholm families.

mod family;
mod kernel;
mod scenario;

pub use family::{
    approximate_family, approximate_single, approximate_twisted_family, compare_cutoffs,
    index_of_family, spectral_jumps, CutoffComparison, FamilyApproximation, FredholmFamily,
    SingleApproximation, SpectralJump, TwistedFamilyData,
};
pub use kernel::{kernel_bundle_family, kernel_line_transitions, KernelFamily};
pub use scenario::{
    bott_line_bundle, bott_state, builtin_complex, builtin_scenario, pauli_lifts, random_operator,
    sphere_point, tetrahedron_positions, Scenario, ScenarioInput, ScenarioParams,
    BOTT_KERNEL_CHERN, SCENARIOS,
};
