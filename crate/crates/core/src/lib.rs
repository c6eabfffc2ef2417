//! Kinematic thermalization of a system coupled to an oscillator bath by a
//! dephasing (non-demolition) interaction.
//!
//! - [`model`]: system, bath and coupling data; the deformed spectrum.
//! - [`counting`]: exact and analytic bath-state counts in the deformed shell, `P_n`.
//! - [`overlap`]: displaced Fock-state overlaps and decoherence factors.
//! - [`sampler`]: random universe states and their reduced density matrices.
//! - [`thermo`]: Gibbs fits, quasi-temperatures, two-level quasi-thermal states.

pub mod bigmath;
pub mod counting;
pub mod error;
pub mod model;
pub mod overlap;
pub mod sampler;
pub mod thermo;

pub use counting::{
    count_bath_states_exact, deformation_map, enumerate_bath_states, log_omega_bath_analytic,
    omega_bath_analytic, pn_counting, pn_counting_with, Abscissa, CountMode, CountTable, LevelCut,
    LevelPoint, QuantizedShell,
};
pub use error::{Error, Result};
pub use model::{
    coupling_summary, deformed_spectrum, kappa, level_spacing_effective, BathSpec, CouplingSummary,
    DeformedSpectrum, ShellWindow, SystemSpec,
};
pub use overlap::{decoherence_product, displaced_overlap, laguerre_assoc, DecoherenceFactor};
pub use sampler::{
    pn_typicality_check, reduce_density_matrix, sample_universe_state, ReducedDensityMatrix,
    ShellBasis, TypicalityReport, UniverseState,
};
pub use thermo::{
    fit_beta, fit_kappa_series, quasi_temperature, scan_fit_windows, subspace_overlap,
    thermodynamic_entropy, two_level_approx, two_level_exact, FitWindow, GibbsFit, TwoLevelState,
    WindowCandidate,
};

pub use num_bigint::BigUint;
pub use num_complex::Complex64;
