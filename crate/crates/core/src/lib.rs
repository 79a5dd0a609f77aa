//! Single-excitation physics of a finite linear chain of two-level atoms:
//! collective decay and shift spectra, coupled-dipole dynamics projected
//! onto generalized Dicke states, and the field the chain radiates.
//!
//! Rates are in units of the single-atom decay rate Γ, times in 1/Γ, and
//! the only geometric parameter is `a = k₀d`.

pub mod dickespace;
pub mod dynamics;
pub mod error;
pub mod greenkernel;
pub mod quadrature;
pub mod radiation;
pub mod special;
pub mod spectrum;
pub mod states;
pub mod validate;

pub use dickespace::{amplitude, density, overlap, partial_amplitudes, DipoleState, SpectralDensity};
pub use dynamics::{
    energy_balance_residual, infinite_chain_solution, integrate, mean_excitation, rhs, spectral_rhs_check,
    DriveConfig, IntegrationConfig, Trajectory,
};
pub use error::{Error, Result};
pub use greenkernel::{magic_angle, scalar_kernel, vector_kernel, ChainConfig, ComplexRate, Model};
pub use radiation::{
    evanescence_ratio, far_field_intensity, field_at_point, intensity_map, Axis, FieldMap, PlaneSpec,
};
pub use spectrum::{
    compute_spectrum, gamma_exact, gamma_infinite, gamma_sinc_approx, omega_finite, omega_infinite, SpectralGrid,
    SpectrumMethod, SpectrumResult,
};
pub use states::{most_subradiant, single_excited, subradiant_amplitude_limit, timed_dicke, uniform};
