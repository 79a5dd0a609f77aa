//! Oracle and identity suites run by `subchain validate`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dickespace::{amplitude, density, DipoleState};
use crate::dynamics::{
    energy_balance_residual, integrate, integrate_system, spectral_rhs_check, CoupledDipoles, DriveConfig,
    IntegrationConfig,
};
use crate::error::Result;
use crate::greenkernel::{magic_angle, scalar_kernel, vector_kernel, ChainConfig, ComplexRate, Model};
use crate::quadrature;
use crate::spectrum::SpectralGrid;
use crate::states::single_excited;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Smaller problem sizes; the whole run stays well under ten seconds.
    pub quick: bool,
    /// Evolve the energy-balance run with the sign of the collective decay
    /// flipped. The balance check must then fail.
    pub inject_kernel_sign_error: bool,
}

/// Outcome of one suite. `measured` is compared against `tolerance` in the
/// direction given by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub kind: Bound,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Pass iff `measured < tolerance`.
    Below,
    /// Pass iff `measured > tolerance`.
    Above,
}

impl CheckResult {
    fn new(name: &str, measured: f64, tolerance: f64, kind: Bound, detail: String) -> Self {
        let passed = match kind {
            Bound::Below => measured < tolerance,
            Bound::Above => measured > tolerance,
        };
        CheckResult { name: name.to_owned(), measured, tolerance, kind, passed, detail }
    }

    fn failed(name: &str, tolerance: f64, kind: Bound, err: impl std::fmt::Display) -> Self {
        CheckResult {
            name: name.to_owned(),
            measured: f64::NAN,
            tolerance,
            kind,
            passed: false,
            detail: format!("error: {err}"),
        }
    }

    fn from_result(name: &str, tolerance: f64, kind: Bound, r: Result<(f64, String)>) -> Self {
        match r {
            Ok((measured, detail)) => Self::new(name, measured, tolerance, kind, detail),
            Err(e) => Self::failed(name, tolerance, kind, e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub quick: bool,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const MAGIC_ANGLE_TOL: f64 = 1e-12;
pub const ANGULAR_AVERAGE_TOL: f64 = 1e-8;
pub const PLANCHEREL_TOL: f64 = 1e-8;
pub const SPECTRAL_RHS_TOL: f64 = 1e-10;
/// Minimum shrink factor of the energy-balance residual when dt halves.
pub const ENERGY_BALANCE_SHRINK: f64 = 3.8;
pub const STEP_HALVING_TOL: f64 = 1e-8;

pub fn run_validation(opts: ValidationOptions) -> ValidationReport {
    let checks = vec![
        check_magic_angle(if opts.quick { 1000 } else { 10_000 }),
        check_angular_average(),
        check_plancherel(if opts.quick { 5 } else { 20 }, 7),
        check_spectral_rhs(if opts.quick { 3 } else { 10 }, 11),
        check_energy_balance(opts.quick, opts.inject_kernel_sign_error),
        check_step_halving(opts.quick),
    ];
    ValidationReport { quick: opts.quick, checks }
}

/// Largest componentwise gap between the vectorial kernel at the magic
/// angle and the scalar kernel on `points` radii in (0, 50].
pub fn check_magic_angle(points: usize) -> CheckResult {
    let delta = magic_angle();
    let mut worst: f64 = 0.0;
    for k in 1..=points {
        let r = 50.0 * k as f64 / points as f64;
        let v = vector_kernel(r, delta);
        let s = scalar_kernel(r);
        worst = worst.max((v.decay - s.decay).abs()).max((v.shift - s.shift).abs());
    }
    CheckResult::new("magic_angle", worst, MAGIC_ANGLE_TOL, Bound::Below, format!("{points} radii in (0, 50]"))
}

/// `(1/2)∫₀^π sinθ cos(r cosθ) dθ = sin r / r` by adaptive quadrature.
pub fn check_angular_average() -> CheckResult {
    let mut worst: f64 = 0.0;
    for &r in &[0.5, 1.0, 2.0, 5.0, 10.0] {
        let q = quadrature::integrate(|t: f64| 0.5 * t.sin() * (r * t.cos()).cos(), 0.0, PI, 1e-13);
        worst = worst.max((q.value - r.sin() / r).abs());
    }
    CheckResult::new(
        "angular_average",
        worst,
        ANGULAR_AVERAGE_TOL,
        Bound::Below,
        "r in {0.5, 1, 2, 5, 10}".into(),
    )
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> DipoleState {
    let beta = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    DipoleState { beta, time: 0.0 }
}

/// `(1/2π)∫|A_N|² = Σ|β|²` and `∫P = 1` on a 4096-point grid, relative error.
pub fn check_plancherel(states: usize, seed: u64) -> CheckResult {
    let run = || -> Result<(f64, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for s in 0..states {
            let n = 1 + (s * 37) % 200;
            let a = rng.gen_range(0.1..3.0);
            let grid = SpectralGrid::uniform(4096, a)?;
            let state = random_state(&mut rng, n);
            let raw: Vec<f64> = grid.points().iter().map(|&x| amplitude(&state, x).norm_sqr()).collect();
            let norm = state.norm_sqr();
            worst = worst.max((grid.integrate(&raw) / TAU - norm).abs() / norm);
            let p = density(&state, &grid)?;
            worst = worst.max((grid.integrate(&p.p) - 1.0).abs());
        }
        Ok((worst, format!("{states} random states, N ≤ 200, 4096-point grid")))
    };
    CheckResult::from_result("plancherel", PLANCHEREL_TOL, Bound::Below, run())
}

/// Site-space derivative projected onto Dicke space against the Dicke-space
/// equation of motion, for random normalized states with the drive on.
pub fn check_spectral_rhs(states: usize, seed: u64) -> CheckResult {
    let run = || -> Result<(f64, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for s in 0..states {
            let n = 2 + (s * 7) % 29;
            let a = rng.gen_range(0.2..3.0);
            let model = if s % 2 == 0 {
                Model::Scalar
            } else {
                Model::Vectorial { delta: rng.gen_range(0.0..=PI / 2.0) }
            };
            let cfg = ChainConfig::new(n, a, model)?;
            let drive = DriveConfig { rabi: rng.gen_range(0.0..1.0), detuning: rng.gen_range(-5.0..5.0), t_off: 1.0 };
            let mut state = random_state(&mut rng, n);
            let scale = state.norm_sqr().sqrt();
            state.beta.iter_mut().for_each(|b| *b /= scale);
            for _ in 0..10 {
                let x = rng.gen_range(-PI..PI);
                worst = worst.max(spectral_rhs_check(&state, &cfg, &drive, x)?);
            }
        }
        Ok((worst, format!("{states} random states × 10 Bloch phases, N ≤ 30")))
    };
    CheckResult::from_result("spectral_rhs", SPECTRAL_RHS_TOL, Bound::Below, run())
}

/// Ratio of the energy-balance residual at dt and dt/2 for a free decay.
pub fn check_energy_balance(quick: bool, inject_sign_error: bool) -> CheckResult {
    let run = || -> Result<(f64, String)> {
        let n = if quick { 10 } else { 30 };
        let cfg = ChainConfig::vectorial(n, PI / 2.0, PI / 2.0)?;
        let initial = single_excited(&cfg, n / 2)?;
        let drive = DriveConfig::free(0.0);
        let system = if inject_sign_error {
            CoupledDipoles::with_kernel(&cfg, |l| {
                let g = cfg.coupling(l);
                ComplexRate { decay: -g.decay, shift: g.shift }
            })
        } else {
            CoupledDipoles::new(&cfg)
        };
        let dt = 0.01;
        let mut residual = [0.0; 2];
        for (k, h) in [dt, dt / 2.0].into_iter().enumerate() {
            let icfg = IntegrationConfig::new(h, 2.0).with_emission();
            let traj = integrate_system(&initial, &cfg, &system, &drive, &icfg)?;
            residual[k] = energy_balance_residual(&traj)?;
        }
        Ok((
            residual[0] / residual[1],
            format!("N = {n}, residual {:.3e} at dt = {dt}, {:.3e} at dt/2", residual[0], residual[1]),
        ))
    };
    CheckResult::from_result("energy_balance", ENERGY_BALANCE_SHRINK, Bound::Above, run())
}

/// Relative final-state difference between dt = 10⁻³ and its half.
pub fn check_step_halving(quick: bool) -> CheckResult {
    let run = || -> Result<(f64, String)> {
        let n = if quick { 20 } else { 50 };
        let t_end = if quick { 2.0 } else { 5.0 };
        let cfg = ChainConfig::vectorial(n, PI / 2.0, PI / 2.0)?;
        let initial = single_excited(&cfg, n / 2)?;
        let drive = DriveConfig { rabi: 0.1, detuning: 10.0, t_off: 0.5 * t_end };
        let coarse = integrate(&initial, &cfg, &drive, &IntegrationConfig::new(1e-3, t_end))?;
        let fine = integrate(&initial, &cfg, &drive, &IntegrationConfig::new(5e-4, t_end))?;
        let diff: f64 = coarse
            .final_state
            .beta
            .iter()
            .zip(&fine.final_state.beta)
            .map(|(p, q)| (p - q).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = fine.final_state.norm_sqr().sqrt();
        Ok((diff / scale, format!("N = {n}, driven, t_end = {t_end}")))
    };
    CheckResult::from_result("step_halving", STEP_HALVING_TOL, Bound::Below, run())
}
