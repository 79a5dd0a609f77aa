//! Coupled-dipole dynamics in the linear (single-excitation) regime:
//!
//! ```text
//! dβ_j/dt = (iΔ₀ − 1/2) β_j − i(Ω₀/2) e^{ia(j−1)} [t < t_off] − (1/2) Σ_{m≠j} G(a|j−m|) β_m
//! ```
//!
//! Integrated with the classical fixed-step fourth-order Runge–Kutta scheme.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dickespace::{amplitude, overlap, partial_amplitudes, DipoleState};
use crate::error::{Error, Result};
use crate::greenkernel::{coupling_matrix, ChainConfig, ComplexRate, Model};
use crate::spectrum::{gamma_infinite, omega_infinite};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Axial plane-wave drive, switched off instantaneously at `t_off`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Rabi frequency Ω₀ in units of Γ.
    pub rabi: f64,
    /// Laser-atom detuning Δ₀ in units of Γ.
    pub detuning: f64,
    /// Switch-off time; `f64::INFINITY` keeps the laser on.
    pub t_off: f64,
}

impl DriveConfig {
    /// No laser; only the detuning (rotating frame) remains.
    pub fn free(detuning: f64) -> Self {
        DriveConfig { rabi: 0.0, detuning, t_off: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi >= 0.0 && self.rabi.is_finite()) {
            return Err(Error::InvalidConfig(format!("Rabi frequency {} must be ≥ 0", self.rabi)));
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidConfig("detuning must be finite".into()));
        }
        if !(self.t_off >= 0.0) {
            return Err(Error::InvalidConfig(format!("t_off = {} must be ≥ 0", self.t_off)));
        }
        Ok(())
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.rabi > 0.0 && t < self.t_off
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    /// Record `Σ Re(β_j* Γ_jm β_m)` at every step (needed for the energy
    /// balance check; costs one extra matrix-vector product per step).
    #[serde(default)]
    pub track_emission: bool,
}

impl IntegrationConfig {
    pub const DEFAULT_DT: f64 = 1e-3;

    pub fn new(dt: f64, t_end: f64) -> Self {
        IntegrationConfig { dt, t_end, snapshot_times: Vec::new(), track_emission: false }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn with_emission(mut self) -> Self {
        self.track_emission = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return Err(Error::InvalidIntegration(format!("dt = {} must lie in (0, 0.01]", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidIntegration(format!("t_end = {} must be ≥ 0", self.t_end)));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return Err(Error::InvalidIntegration(format!(
                "snapshot time {t} outside [0, {}]",
                self.t_end
            )));
        }
        Ok(())
    }
}

/// Everything recorded along one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n_atoms: usize,
    pub drive: DriveConfig,
    /// Grid times, starting at 0.
    pub times: Vec<f64>,
    /// `Σ_j |β_j|²` at each grid time.
    pub norm: Vec<f64>,
    /// `Σ Re(β_j* Γ_jm β_m)` at each grid time, if requested.
    pub emission: Option<Vec<f64>>,
    /// Snapshots in the order the times were requested, each stamped with
    /// the grid time it was taken at.
    pub snapshots: Vec<DipoleState>,
    pub final_state: DipoleState,
}

impl Trajectory {
    /// `⟨|β|²⟩ = Σ|β_j|²/N` at each grid time.
    pub fn mean_excitation(&self) -> Vec<f64> {
        let n = self.n_atoms as f64;
        self.norm.iter().map(|v| v / n).collect()
    }

    /// Index of the grid time closest to `t`.
    pub fn index_near(&self, t: f64) -> usize {
        let idx = self.times.partition_point(|&s| s < t);
        if idx == 0 {
            return 0;
        }
        if idx == self.times.len() {
            return idx - 1;
        }
        if t - self.times[idx - 1] <= self.times[idx] - t {
            idx - 1
        } else {
            idx
        }
    }
}

/// The linear operator of the coupled-dipole equations for one chain.
#[derive(Debug, Clone)]
pub struct CoupledDipoles {
    n: usize,
    /// Off-diagonal couplings, row-major; zero on the diagonal.
    coupling: Vec<Complex64>,
    drive_phase: Vec<Complex64>,
}

impl CoupledDipoles {
    pub fn new(cfg: &ChainConfig) -> Self {
        Self::with_kernel(cfg, |steps| cfg.coupling(steps))
    }

    /// Build the operator from an arbitrary kernel of the site distance.
    /// Used to inject faults into validation runs.
    pub fn with_kernel<K: Fn(usize) -> ComplexRate>(cfg: &ChainConfig, kernel: K) -> Self {
        let n = cfg.n_atoms;
        let row: Vec<Complex64> = (0..n)
            .map(|l| if l == 0 { ZERO } else { kernel(l).to_complex() })
            .collect();
        let mut coupling = Vec::with_capacity(n * n);
        for j in 0..n {
            coupling.extend((0..n).map(|m| row[j.abs_diff(m)]));
        }
        let drive_phase = (0..n).map(|j| Complex64::from_polar(1.0, cfg.a * j as f64)).collect();
        CoupledDipoles { n, coupling, drive_phase }
    }

    fn eval(&self, beta: &[Complex64], drive: &DriveConfig, drive_on: bool, out: &mut [Complex64]) {
        let diag = Complex64::new(-0.5, drive.detuning);
        let pump = -0.5 * I * drive.rabi;
        for (j, o) in out.iter_mut().enumerate() {
            let row = &self.coupling[j * self.n..(j + 1) * self.n];
            let mut acc = ZERO;
            for (g, b) in row.iter().zip(beta) {
                acc += g * b;
            }
            let mut d = diag * beta[j] - 0.5 * acc;
            if drive_on {
                d += pump * self.drive_phase[j];
            }
            *o = d;
        }
    }
}

/// Time derivative of the amplitudes at time `t`.
pub fn rhs(state: &DipoleState, cfg: &ChainConfig, drive: &DriveConfig, t: f64) -> Result<Vec<Complex64>> {
    state.check_chain(cfg)?;
    let system = CoupledDipoles::new(cfg);
    let mut out = vec![ZERO; cfg.n_atoms];
    system.eval(&state.beta, drive, drive.is_active(t), &mut out);
    Ok(out)
}

/// `Σ_j |β_j|² / N`.
pub fn mean_excitation(state: &DipoleState) -> f64 {
    if state.beta.is_empty() {
        return 0.0;
    }
    state.norm_sqr() / state.beta.len() as f64
}

struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Rk4 {
            k1: vec![ZERO; n],
            k2: vec![ZERO; n],
            k3: vec![ZERO; n],
            k4: vec![ZERO; n],
            tmp: vec![ZERO; n],
        }
    }

    fn step(&mut self, sys: &CoupledDipoles, drive: &DriveConfig, on: bool, y: &mut [Complex64], h: f64) {
        sys.eval(y, drive, on, &mut self.k1);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = y + 0.5 * h * k;
        }
        sys.eval(&self.tmp, drive, on, &mut self.k2);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = y + 0.5 * h * k;
        }
        sys.eval(&self.tmp, drive, on, &mut self.k3);
        for ((t, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = y + h * k;
        }
        sys.eval(&self.tmp, drive, on, &mut self.k4);
        let w = h / 6.0;
        for (i, y) in y.iter_mut().enumerate() {
            *y += w * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

fn emission_rate(decay: &Array2<f64>, beta: &[Complex64]) -> f64 {
    let n = beta.len();
    let mut total = 0.0;
    for j in 0..n {
        let mut row = ZERO;
        for m in 0..n {
            row += decay[[j, m]] * beta[m];
        }
        total += (beta[j].conj() * row).re;
    }
    total
}

/// Integrate from `t = 0` to `icfg.t_end`.
pub fn integrate(
    initial: &DipoleState,
    cfg: &ChainConfig,
    drive: &DriveConfig,
    icfg: &IntegrationConfig,
) -> Result<Trajectory> {
    integrate_system(initial, cfg, &CoupledDipoles::new(cfg), drive, icfg)
}

/// As [`integrate`], but evolving with `system`. The emission series is
/// always computed from the physical kernel of `cfg`.
pub fn integrate_system(
    initial: &DipoleState,
    cfg: &ChainConfig,
    system: &CoupledDipoles,
    drive: &DriveConfig,
    icfg: &IntegrationConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    drive.validate()?;
    icfg.validate()?;
    initial.check_chain(cfg)?;
    let n = cfg.n_atoms;
    if system.n != n {
        return Err(Error::LengthMismatch { expected: n, got: system.n });
    }

    let decay = icfg.track_emission.then(|| coupling_matrix(cfg).mapv(|g| g.re));

    // Requested snapshot times, visited in increasing order.
    let mut order: Vec<usize> = (0..icfg.snapshot_times.len()).collect();
    order.sort_by(|&i, &j| icfg.snapshot_times[i].total_cmp(&icfg.snapshot_times[j]));
    let mut pending = order.into_iter().peekable();
    let mut snapshots: Vec<Option<DipoleState>> = vec![None; icfg.snapshot_times.len()];

    let mut beta = initial.beta.clone();
    let mut t = 0.0;
    let mut times = vec![t];
    let mut norm = vec![initial.norm_sqr()];
    let mut emission = decay.as_ref().map(|d| vec![emission_rate(d, &beta)]);

    let mut breakpoints = Vec::new();
    if drive.rabi > 0.0 && drive.t_off > 0.0 && drive.t_off < icfg.t_end {
        breakpoints.push(drive.t_off);
    }
    breakpoints.push(icfg.t_end);

    let mut rk = Rk4::new(n);
    let mut prev = beta.clone();
    let mut seg_start = 0.0;
    for seg_end in breakpoints {
        let on = drive.is_active(seg_start);
        let span = seg_end - seg_start;
        let steps = ((span / icfg.dt) - 1e-9).ceil().max(0.0) as usize;
        for k in 1..=steps {
            let t_next = if k == steps { seg_end } else { seg_start + k as f64 * icfg.dt };
            let h = t_next - t;
            prev.copy_from_slice(&beta);
            rk.step(system, drive, on, &mut beta, h);
            let t_prev = t;
            t = t_next;
            let nrm: f64 = beta.iter().map(|b| b.norm_sqr()).sum();
            if !nrm.is_finite() {
                return Err(Error::Diverged { time: t });
            }
            times.push(t);
            norm.push(nrm);
            if let (Some(d), Some(e)) = (decay.as_ref(), emission.as_mut()) {
                e.push(emission_rate(d, &beta));
            }
            while let Some(&idx) = pending.peek() {
                let ts = icfg.snapshot_times[idx];
                if ts > t {
                    break;
                }
                let (b, at) = if ts - t_prev <= t - ts { (&prev, t_prev) } else { (&beta, t) };
                snapshots[idx] = Some(DipoleState { beta: b.clone(), time: at });
                pending.next();
            }
        }
        seg_start = seg_end;
    }
    // anything left (t_end = 0, or times equal to the start)
    for idx in pending {
        snapshots[idx] = Some(DipoleState { beta: beta.clone(), time: t });
    }

    Ok(Trajectory {
        n_atoms: n,
        drive: *drive,
        times,
        norm,
        emission,
        snapshots: snapshots.into_iter().map(|s| s.expect("every snapshot visited")).collect(),
        final_state: DipoleState { beta, time: t },
    })
}

/// Largest `|d/dt Σ|β|² + Σ Re(β* Γ β)|` over the drive-free part of the
/// trajectory, with the derivative from three-point centered differences.
pub fn energy_balance_residual(traj: &Trajectory) -> Result<f64> {
    let emission = traj
        .emission
        .as_ref()
        .ok_or_else(|| Error::InvalidIntegration("trajectory was run without emission tracking".into()))?;
    let free_from = if traj.drive.rabi > 0.0 { traj.drive.t_off } else { f64::NEG_INFINITY };
    let t = &traj.times;
    let f = &traj.norm;
    let mut worst: f64 = 0.0;
    for i in 1..t.len().saturating_sub(1) {
        if t[i - 1] < free_from {
            continue;
        }
        let hm = t[i] - t[i - 1];
        let hp = t[i + 1] - t[i];
        let deriv = (hm * hm * f[i + 1] - hp * hp * f[i - 1] + (hp * hp - hm * hm) * f[i])
            / (hm * hp * (hm + hp));
        worst = worst.max((deriv + emission[i]).abs());
    }
    Ok(worst)
}

/// `|dA_N/dt|` computed by projecting [`rhs`] minus the same derivative
/// assembled in Dicke space from prefix sums:
///
/// ```text
/// dA_N/dt = (iΔ₀ − 1/2) A_N − i(Ω₀/2) D_N(x − a)
///           − (1/2) Σ_{ℓ=1}^{N−1} G(aℓ) [e^{−ixℓ} A_{N−ℓ} + e^{ixℓ} (A_N − A_ℓ)]
/// ```
///
/// where `D_N` is the phased Dirichlet kernel. The drive is taken as on iff
/// it is active at `state.time`.
pub fn spectral_rhs_check(state: &DipoleState, cfg: &ChainConfig, drive: &DriveConfig, x: f64) -> Result<f64> {
    let direct = amplitude(
        &DipoleState { beta: rhs(state, cfg, drive, state.time)?, time: state.time },
        x,
    );

    let n = cfg.n_atoms;
    let prefix = partial_amplitudes(state, x);
    let full = prefix[n - 1];
    let mut spectral = Complex64::new(-0.5, drive.detuning) * full;
    if drive.is_active(state.time) {
        // Σ_j e^{−i(x−a)(j−1)}
        spectral -= 0.5 * I * drive.rabi * overlap(cfg.a, x, cfg);
    }
    let mut exchange = ZERO;
    for l in 1..n {
        let g = cfg.coupling(l).to_complex();
        let lf = l as f64;
        exchange += g
            * (Complex64::from_polar(1.0, -x * lf) * prefix[n - l - 1]
                + Complex64::from_polar(1.0, x * lf) * (full - prefix[l - 1]));
    }
    spectral -= 0.5 * exchange;
    Ok((direct - spectral).norm())
}

/// Infinite-chain Dicke amplitude at `(x, t)`: a transient carried by the
/// initial amplitude plus the weight of the driven `δ(x − a)` component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfiniteDriveSolution {
    pub regular: Complex64,
    pub delta_coefficient: Complex64,
}

/// `(e^z − 1)/z`, accurate near z = 0.
fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Solve `∂A/∂t = [iΔ₀ + iΩ_∞/2 − Γ_∞/2] A − iπΩ₀ δ(x − a)` for a single
/// Bloch phase `x`, starting from `initial = A(x, 0)`. After `t_off` the
/// driven weight evolves freely.
pub fn infinite_chain_solution(
    a: f64,
    x: f64,
    model: Model,
    drive: &DriveConfig,
    initial: Complex64,
    t: f64,
) -> Result<InfiniteDriveSolution> {
    let limit = gamma_infinite(a, x, model);
    if limit.on_light_line {
        return Err(Error::LightLine { x, a });
    }
    let omega = omega_infinite(a, x, model)?;
    let lambda = Complex64::new(-0.5 * limit.rate, drive.detuning + 0.5 * omega);
    let regular = initial * (lambda * t).exp();

    let t_on = if drive.rabi > 0.0 { t.min(drive.t_off) } else { 0.0 };
    // −iπΩ₀ ∫_0^{t_on} e^{λ(t_on − s)} ds, then free evolution to t
    let driven = -I * PI * drive.rabi * t_on * exprel(lambda * t_on);
    let delta_coefficient = driven * (lambda * (t - t_on)).exp();
    Ok(InfiniteDriveSolution { regular, delta_coefficient })
}
