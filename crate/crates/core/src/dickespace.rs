//! Projection of single-excitation states onto the continuous family of
//! generalized Dicke states `|x⟩ ∝ Σ_j e^{ix(j−1)} |j⟩`.
//!
//! Amplitudes use the unnormalized convention `A_N(x) = Σ_j e^{−ix(j−1)} β_j`;
//! the density divides out every normalization, so the convention never
//! reaches callers of [`density`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greenkernel::ChainConfig;
use crate::spectrum::SpectralGrid;

/// Site-basis amplitudes `β_j` at time `time` (units of 1/Γ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipoleState {
    pub beta: Vec<Complex64>,
    pub time: f64,
}

impl DipoleState {
    pub fn new(beta: Vec<Complex64>, time: f64) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidConfig("state needs at least one amplitude".into()));
        }
        if beta.iter().any(|b| !(b.re.is_finite() && b.im.is_finite())) {
            return Err(Error::InvalidConfig("state has non-finite amplitudes".into()));
        }
        Ok(DipoleState { beta, time })
    }

    pub fn zero(n_atoms: usize) -> Self {
        DipoleState { beta: vec![Complex64::new(0.0, 0.0); n_atoms], time: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    /// `Σ_j |β_j|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.beta.iter().map(|b| b.norm_sqr()).sum()
    }

    /// Check the state belongs to `cfg`.
    pub fn check_chain(&self, cfg: &ChainConfig) -> Result<()> {
        if self.beta.len() != cfg.n_atoms {
            return Err(Error::LengthMismatch { expected: cfg.n_atoms, got: self.beta.len() });
        }
        Ok(())
    }
}

/// `P(x)` sampled on a grid, normalized to unit integral over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub grid: SpectralGrid,
    pub p: Vec<f64>,
}

impl SpectralDensity {
    /// Probability mass over the grid points selected by `keep`.
    pub fn mass_where<F: Fn(f64) -> bool>(&self, keep: F) -> f64 {
        self.grid
            .points()
            .iter()
            .zip(self.grid.weights())
            .zip(&self.p)
            .filter(|((x, _), _)| keep(**x))
            .map(|((_, w), p)| w * p)
            .sum()
    }

    /// Grid point with the largest density.
    pub fn peak(&self) -> f64 {
        let (idx, _) = self
            .p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("density grid is never empty");
        self.grid.points()[idx]
    }
}

/// `A_N(x) = Σ_{j=1}^N e^{−ix(j−1)} β_j`.
pub fn amplitude(state: &DipoleState, x: f64) -> Complex64 {
    // Horner in w = e^{−ix}, highest site first
    let w = Complex64::from_polar(1.0, -x);
    state.beta.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, b| acc * w + b)
}

/// Prefix sums `A_n(x) = Σ_{m=1}^{n} e^{−ix(m−1)} β_m` for n = 1..=N.
pub fn partial_amplitudes(state: &DipoleState, x: f64) -> Vec<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    state
        .beta
        .iter()
        .enumerate()
        .map(|(m, b)| {
            acc += Complex64::from_polar(1.0, -x * m as f64) * b;
            acc
        })
        .collect()
}

/// `P(x) = |A_N(x)|² / ∫|A_N|²`, with the integral taken on `grid`.
pub fn density(state: &DipoleState, grid: &SpectralGrid) -> Result<SpectralDensity> {
    if state.norm_sqr() == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let raw: Vec<f64> = grid.points().iter().map(|&x| amplitude(state, x).norm_sqr()).collect();
    let total = grid.integrate(&raw);
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let p = raw.into_iter().map(|v| v / total).collect();
    Ok(SpectralDensity { grid: grid.clone(), p })
}

/// `Σ_j e^{i(x1−x2)(j−1)}`: the overlap of two generalized Dicke states
/// scaled by N, i.e. the Dirichlet kernel with its phase. Equals N at
/// coincidence (mod 2π).
pub fn overlap(x1: f64, x2: f64, cfg: &ChainConfig) -> Complex64 {
    let n = cfg.n_atoms as f64;
    let delta = x1 - x2;
    let half = 0.5 * delta;
    let phase = Complex64::from_polar(1.0, half * (n - 1.0));
    let den = half.sin();
    if den.abs() < 1e-9 {
        // sin(Nh)/sin(h) → N cos(Nh)/cos(h) near h = mπ
        return phase * (n * (n * half).cos() / half.cos());
    }
    phase * ((n * half).sin() / den)
}
