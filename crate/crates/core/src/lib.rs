//! Quantum noise spectroscopy of a ring Bose-Einstein condensate read out by a
//! driven optical cavity.
//!
//! The condensate sidemodes act as two mechanical oscillators whose splitting
//! encodes the persistent-current winding number. Two readout schemes are
//! modelled: a single-tone drive with optional squeezed input ([`response`]),
//! and a two-tone backaction-evading drive solved by Floquet expansion
//! ([`floquet`]). [`sensitivity`] turns either spectrum into figures of merit.

pub mod consts;
pub mod error;
pub mod floquet;
pub mod model;
pub mod noise;
pub mod numeric;
pub mod ode;
pub mod response;
pub mod sensitivity;
pub mod spectrum;

pub use error::{Error, Result};
pub use floquet::{
    bae_measurement_time, bae_spectrum, bae_spectrum_on_grid, bae_steady_state, bistability_map,
    floquet_coefficients, semiclassical_bound_check, BaeDrive, BaeSteadyState, BaeSystem,
    BistabilityAxis, BistabilityPoint, BoundReport, FloquetCoeffs, FloquetPairing, KerrModel,
};
pub use model::{
    collision_shift, drive_amplitude, sidemode_frequencies, winding_gap, Derived, Detuning,
    SystemParams, WindingGap,
};
pub use noise::{
    optical_kernel, squeeze_moments, thermal_kernel, thermal_photon_number, NoiseKernel,
    SqueezeConvention, SqueezeParams,
};
pub use response::{
    default_grid, optimal_homodyne_angle, output_coefficients, quadrature_spectra, response_matrix,
    solve_steady_state, spectral_density, spectrum_on_grid, HomodyneAngle, MonoSystem,
    OutputConvention, QuadCoeffs, SteadyState, Susceptibilities,
};
pub use sensitivity::{
    budget_references, comparison_suite, enhancement_factor, noise_budget_vs_power,
    sensitivity_curve, to_db, BudgetPoint, Comparison, NoiseBudgetCurve, PointStatus, Scheme,
    SensitivityCurve,
};
pub use spectrum::{Channels, ModelOptions};
