//! Canonical initial conditions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dickespace::DipoleState;
use crate::error::{Error, Result};
use crate::greenkernel::ChainConfig;

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Only site `j0` (1-based) excited.
pub fn single_excited(cfg: &ChainConfig, j0: usize) -> Result<DipoleState> {
    let n = cfg.n_atoms;
    if j0 == 0 || j0 > n {
        return Err(Error::SiteOutOfRange { index: j0, n_atoms: n });
    }
    let mut state = DipoleState::zero(n);
    state.beta[j0 - 1] = real(1.0);
    Ok(state)
}

/// State whose Dicke-space amplitude tends, as N → ∞, to a unit-modulus
/// step supported only outside the light line:
///
/// ```text
/// β_{N/2} = 1 − a/π,   β_j = −sin(a(j − N/2)) / (π (j − N/2))
/// ```
///
/// Not normalized. Requires an even atom count.
pub fn most_subradiant(cfg: &ChainConfig) -> Result<DipoleState> {
    let n = cfg.n_atoms;
    if n % 2 != 0 {
        return Err(Error::OddChainLength(n));
    }
    let center = (n / 2) as i64;
    let a = cfg.a;
    let beta = (1..=n as i64)
        .map(|j| {
            let offset = (j - center) as f64;
            if j == center {
                real(1.0 - a / PI)
            } else {
                real(-(a * offset).sin() / (PI * offset))
            }
        })
        .collect();
    Ok(DipoleState { beta, time: 0.0 })
}

/// Phase-matched to axial illumination: `β_j = e^{ia(j−1)}/√N`.
pub fn timed_dicke(cfg: &ChainConfig) -> DipoleState {
    let n = cfg.n_atoms;
    let amp = 1.0 / (n as f64).sqrt();
    let beta = (0..n).map(|j| Complex64::from_polar(amp, cfg.a * j as f64)).collect();
    DipoleState { beta, time: 0.0 }
}

/// Symmetric Dicke state, `β_j = 1/√N`.
pub fn uniform(cfg: &ChainConfig) -> DipoleState {
    let n = cfg.n_atoms;
    DipoleState { beta: vec![real(1.0 / (n as f64).sqrt()); n], time: 0.0 }
}

/// `|A_∞(x)|` of [`most_subradiant`] in the infinite-chain limit.
///
/// Up to a global phase `π·A_∞ = π − a + θ₂ − θ₁` with
/// `θ_{1,2} = arctan(cot((x ± a)/2))`; on (mπ, (m+1)π) the arctangent of a
/// cotangent is `π/2 − (z − mπ)`, which yields 1 outside and 0 inside the
/// light line.
pub fn subradiant_amplitude_limit(a: f64, x: f64) -> Result<f64> {
    if ((x.abs() - a).abs()) < 1e-12 {
        return Err(Error::LightLine { x, a });
    }
    let arctan_cot = |z: f64| -> f64 {
        let m = (z / PI).floor();
        PI / 2.0 - (z - m * PI)
    };
    let theta1 = arctan_cot(0.5 * (x + a));
    let theta2 = arctan_cot(0.5 * (x - a));
    Ok(((PI - a + theta2 - theta1) / PI).abs())
}
