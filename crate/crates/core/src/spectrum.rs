//! Collective decay rate Γ(x) and frequency shift Ω(x) of the generalized
//! Dicke state with Bloch phase `x = k d`, for finite and infinite chains.
//!
//! Three evaluation routes are provided:
//!
//! * [`gamma_exact`] / [`omega_finite`]: the finite double (or ℓ-) sums;
//! * [`gamma_sinc_approx`]: the same decay rate rewritten as a sum of `sinc²`
//!   integrals in which `N` is only a parameter;
//! * [`gamma_infinite`] / [`omega_infinite`]: the `N → ∞` closed forms.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greenkernel::{ChainConfig, Model};
use crate::quadrature::integrate_panels;
use crate::special::{li2_unit, li3_unit};

/// Absolute tolerance of each `sinc²` integral in [`gamma_sinc_approx`].
pub const SINC_QUAD_TOL: f64 = 1e-8;
/// Times `1/N`: margin added on each side of the integration interval when
/// choosing which `m` terms to keep.
const SINC_WINDOW: f64 = 40.0 * PI;
/// Minimum distance from the light line for the logarithmic shift.
pub const LIGHT_LINE_GUARD: f64 = 1e-6;
/// Default number of spectral grid points.
pub const DEFAULT_GRID_POINTS: usize = 1024;

/// Sorted sample points in the first Brillouin zone together with the
/// quadrature weights used to integrate over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    edge_offset: f64,
}

impl SpectralGrid {
    /// `n` equally spaced points on (−π, π), shifted by half a step so that
    /// ±π are not sampled. Integration is the periodic trapezoid rule, which
    /// is exact for trigonometric polynomials of degree below `n`.
    pub fn uniform(n: usize, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("grid needs at least 2 points, got {n}")));
        }
        let h = TAU / n as f64;
        let points: Vec<f64> = (0..n).map(|k| -PI + (k as f64 + 0.5) * h).collect();
        let weights = vec![h; n];
        Ok(Self::assemble(points, weights, a))
    }

    /// Arbitrary strictly increasing points in (−π, π], integrated with the
    /// ordinary trapezoid rule between the first and last point.
    pub fn from_points(points: Vec<f64>, a: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidConfig("grid needs at least 2 points".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("grid points must be strictly increasing".into()));
        }
        if points.iter().any(|&x| !(x > -PI && x <= PI)) {
            return Err(Error::InvalidConfig("grid points must lie in (−π, π]".into()));
        }
        let n = points.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = points[i + 1] - points[i];
            weights[i] += 0.5 * h;
            weights[i + 1] += 0.5 * h;
        }
        Ok(Self::assemble(points, weights, a))
    }

    fn assemble(points: Vec<f64>, weights: Vec<f64>, a: f64) -> Self {
        let edge_offset = points
            .iter()
            .map(|&x| (x.abs() - a).abs())
            .fold(f64::INFINITY, f64::min);
        SpectralGrid { points, weights, edge_offset }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Smallest distance of any sample from `x = ±a`.
    pub fn edge_offset(&self) -> f64 {
        self.edge_offset
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.points.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    ExactSum,
    SincApprox,
    InfiniteClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub grid: SpectralGrid,
    pub gamma: Vec<f64>,
    /// NaN where the closed form is singular (light line, scalar shift).
    pub omega: Vec<f64>,
    pub config: ChainConfig,
    pub method: SpectrumMethod,
}

/// Evaluate Γ and Ω on every grid point with the requested route.
pub fn compute_spectrum(cfg: &ChainConfig, grid: &SpectralGrid, method: SpectrumMethod) -> SpectrumResult {
    let (gamma, omega) = grid
        .points()
        .iter()
        .map(|&x| match method {
            SpectrumMethod::ExactSum => (gamma_exact(cfg, x), omega_finite(cfg, x)),
            SpectrumMethod::SincApprox => (gamma_sinc_approx(cfg, x), omega_finite(cfg, x)),
            SpectrumMethod::InfiniteClosedForm => (
                gamma_infinite(cfg.a, x, cfg.model).rate,
                omega_infinite(cfg.a, x, cfg.model).unwrap_or(f64::NAN),
            ),
        })
        .unzip();
    SpectrumResult { grid: grid.clone(), gamma, omega, config: *cfg, method }
}

fn clamp_rate(g: f64) -> f64 {
    if (-1e-9..0.0).contains(&g) {
        0.0
    } else {
        g
    }
}

/// Γ_N(x) as the quadratic form `v† Re(M) v`, `v_j = e^{ix(j−1)}/√N`.
pub fn gamma_exact(cfg: &ChainConfig, x: f64) -> f64 {
    let n = cfg.n_atoms;
    let decay: Vec<f64> = (0..n).map(|l| cfg.coupling(l).decay).collect();
    let phase: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, x * j as f64)).collect();
    let mut form = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for m in 0..n {
            row += decay[j.abs_diff(m)] * phase[m];
        }
        form += phase[j].conj() * row;
    }
    clamp_rate(form.re / n as f64)
}

/// Γ_N(x) from the `m`-sum of `sinc²` integrals over `t ∈ [(x−a)/2, (x+a)/2]`.
///
/// Meant for `N ≥ 10`; terms are kept for every `m` with `mπ` inside the
/// integration interval widened by `40π/N` on each side.
pub fn gamma_sinc_approx(cfg: &ChainConfig, x: f64) -> f64 {
    let n = cfg.n_atoms as f64;
    let a = cfg.a;
    let lo = 0.5 * (x - a);
    let hi = 0.5 * (x + a);
    let widen = SINC_WINDOW / n;
    let m_min = ((lo - widen) / PI).ceil() as i64;
    let m_max = ((hi + widen) / PI).floor() as i64;

    // polarisation weight as a function of t
    let weight = |t: f64| -> f64 {
        match cfg.model {
            Model::Scalar => 1.0,
            Model::Vectorial { delta } => {
                let sin2 = delta.sin().powi(2);
                let aniso = 1.0 - 3.0 * delta.cos().powi(2);
                let s = x - 2.0 * t;
                1.5 * (sin2 + 0.5 * aniso * (s * s - a * a) / (a * a))
            }
        }
    };

    let mut total = 0.0;
    for m in m_min..=m_max {
        let shift = m as f64 * PI;
        let u_lo = n * (lo - shift);
        let u_hi = n * (hi - shift);
        let panels = ((u_hi - u_lo) / TAU).ceil().max(1.0) as usize;
        let q = integrate_panels(
            |u| {
                let s = crate::special::sinc(u);
                weight(shift + u / n) * s * s
            },
            u_lo,
            u_hi,
            panels,
            SINC_QUAD_TOL,
        );
        total += q.value;
    }
    clamp_rate(total / a)
}

/// Infinite-chain rate together with a flag raised exactly on the light line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRate {
    pub rate: f64,
    pub on_light_line: bool,
}

/// Γ_∞(x): a rectangle of height π/a inside the light line for the scalar
/// model, the parabolic profile for the vectorial one, zero outside.
/// On the light line the open-interval value 0 is returned and flagged.
pub fn gamma_infinite(a: f64, x: f64, model: Model) -> LimitRate {
    let mut on_light_line = false;
    let mut rate = 0.0;
    let zones = (((x.abs() + a) / TAU).ceil() as i64).max(1);
    for m in -zones..=zones {
        let local = x - TAU * m as f64;
        let gap = local.abs() - a;
        if gap.abs() <= 1e-12 * a.max(1.0) {
            on_light_line = true;
            continue;
        }
        if gap < 0.0 {
            rate += match model {
                Model::Scalar => PI / a,
                Model::Vectorial { delta } => {
                    let sin2 = delta.sin().powi(2);
                    let aniso = 1.0 - 3.0 * delta.cos().powi(2);
                    1.5 * PI / a * (sin2 + 0.5 * aniso * (local * local - a * a) / (a * a))
                }
            };
        }
    }
    LimitRate { rate, on_light_line }
}

/// Ω_N(x) = (2/N) Σ_{ℓ=1}^{N−1} (N − ℓ) Ω(aℓ) cos(xℓ).
pub fn omega_finite(cfg: &ChainConfig, x: f64) -> f64 {
    let n = cfg.n_atoms;
    let sum: f64 = (1..n)
        .map(|l| (n - l) as f64 * cfg.coupling(l).shift * (x * l as f64).cos())
        .sum();
    2.0 * sum / n as f64
}

fn light_line_distance(a: f64, x: f64) -> f64 {
    let wrap = |t: f64| {
        let r = t.rem_euclid(TAU);
        r.min(TAU - r)
    };
    wrap(x - a).min(wrap(x + a))
}

/// Ω_∞(x) in closed form.
///
/// The scalar shift diverges logarithmically on the light line and is
/// rejected within [`LIGHT_LINE_GUARD`] of it; the vectorial shift only
/// diverges there when the dipoles have a transverse component.
pub fn omega_infinite(a: f64, x: f64, model: Model) -> Result<f64> {
    let near_light_line = light_line_distance(a, x) < LIGHT_LINE_GUARD;
    match model {
        Model::Scalar => {
            if near_light_line {
                return Err(Error::LightLine { x, a });
            }
            Ok(-(2.0 * (a.cos() - x.cos()).abs()).ln() / a)
        }
        Model::Vectorial { delta } => {
            let sin2 = delta.sin().powi(2);
            let aniso = 3.0 * delta.cos().powi(2) - 1.0;
            let plus = x + a;
            let minus = x - a;
            let mut value = 0.0;
            if sin2 != 0.0 {
                if near_light_line {
                    return Err(Error::LightLine { x, a });
                }
                // Re ln(1 − e^{iθ}) = ln|2 sin(θ/2)|
                let log_re = |t: f64| (2.0 * (0.5 * t).sin().abs()).ln();
                value -= a * a * sin2 * (log_re(plus) + log_re(minus));
            }
            // Re(−ia Li2(z₊) + ia Li2(z₋)) = a (Im Li2(z₊) − Im Li2(z₋))
            let li2 = a * (li2_unit(plus).im - li2_unit(minus).im);
            let li3 = li3_unit(plus).re + li3_unit(minus).re;
            value += aniso * (li2 + li3);
            Ok(1.5 * value / (a * a * a))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greenkernel::magic_angle;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn uniform_grid_layout() {
        let g = SpectralGrid::uniform(1024, FRAC_PI_2).unwrap();
        assert_eq!(g.len(), 1024);
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
        assert!(g.points()[0] > -PI && *g.points().last().unwrap() < PI);
        assert!(g.edge_offset() > 1e-3);
        let total: f64 = g.weights().iter().sum();
        assert!((total - TAU).abs() < 1e-12);
        for (p, q) in g.points().iter().zip(g.points().iter().rev()) {
            assert!((p + q).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_rejects_bad_points() {
        assert!(SpectralGrid::uniform(1, 1.0).is_err());
        assert!(SpectralGrid::from_points(vec![0.0, 0.0, 1.0], 1.0).is_err());
        assert!(SpectralGrid::from_points(vec![-4.0, 0.0], 1.0).is_err());
        let g = SpectralGrid::from_points(vec![-1.0, 0.0, 2.0], 1.0).unwrap();
        assert!((g.integrate(&[1.0, 1.0, 1.0]) - 3.0).abs() < 1e-15);
        assert_eq!(g.edge_offset(), 0.0);
    }

    #[test]
    fn gamma_exact_examples() {
        let one = ChainConfig::scalar(1, 0.7).unwrap();
        for &x in &[-3.0, 0.0, 1.1] {
            assert!((gamma_exact(&one, x) - 1.0).abs() < 1e-15);
        }
        let two = ChainConfig::scalar(2, FRAC_PI_2).unwrap();
        assert!((gamma_exact(&two, 0.0) - (1.0 + 2.0 / PI)).abs() < 1e-14);
        // brute-force double sum, 30 digits
        let ten = ChainConfig::scalar(10, FRAC_PI_2).unwrap();
        assert!((gamma_exact(&ten, 0.0) - 1.935_730_014_622_825_9).abs() < 1e-13);
    }

    #[test]
    fn omega_finite_examples() {
        let two = ChainConfig::scalar(2, FRAC_PI_2).unwrap();
        assert!(omega_finite(&two, 0.0).abs() < 1e-15);
        let two = ChainConfig::scalar(2, PI).unwrap();
        assert!((omega_finite(&two, 0.0) + 1.0 / PI).abs() < 1e-15);
        let ten = ChainConfig::scalar(10, FRAC_PI_2).unwrap();
        assert!((omega_finite(&ten, FRAC_PI_4) + 0.159_154_943_091_895_34).abs() < 1e-14);
        assert_eq!(omega_finite(&ChainConfig::scalar(1, 1.0).unwrap(), 0.4), 0.0);
    }

    #[test]
    fn omega_finite_matches_double_sum() {
        for cfg in [
            ChainConfig::scalar(13, 1.3).unwrap(),
            ChainConfig::vectorial(9, 2.1, 0.4).unwrap(),
        ] {
            for &x in &[-2.0, 0.3, 1.9] {
                let n = cfg.n_atoms;
                let mut direct = 0.0;
                for j in 0..n {
                    for m in 0..n {
                        if j != m {
                            let l = j as f64 - m as f64;
                            direct += cfg.coupling(j.abs_diff(m)).shift * (x * l).cos();
                        }
                    }
                }
                direct /= n as f64;
                assert!((omega_finite(&cfg, x) - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gamma_infinite_examples() {
        let s = gamma_infinite(FRAC_PI_2, 0.0, Model::Scalar);
        assert_eq!(s, LimitRate { rate: 2.0, on_light_line: false });
        assert_eq!(gamma_infinite(FRAC_PI_2, 2.0, Model::Scalar).rate, 0.0);
        let v = gamma_infinite(FRAC_PI_2, 0.0, Model::Vectorial { delta: FRAC_PI_2 });
        assert!((v.rate - 1.5).abs() < 1e-15);
        let edge = gamma_infinite(FRAC_PI_2, FRAC_PI_2, Model::Scalar);
        assert_eq!(edge, LimitRate { rate: 0.0, on_light_line: true });
        let near = gamma_infinite(FRAC_PI_2, FRAC_PI_2 - 1e-9, Model::Vectorial { delta: 0.0 });
        assert!(near.rate.abs() < 1e-7 && !near.on_light_line);
    }

    #[test]
    fn omega_infinite_examples() {
        let v = omega_infinite(FRAC_PI_2, 0.0, Model::Scalar).unwrap();
        assert!((v + 2.0 / PI * 2f64.ln()).abs() < 1e-14);
        let v = omega_infinite(FRAC_PI_2, PI, Model::Scalar).unwrap();
        assert!((v + 2.0 / PI * 2f64.ln()).abs() < 1e-14);
        assert!(omega_infinite(FRAC_PI_2, FRAC_PI_2 + 1e-7, Model::Scalar).is_err());
        assert!(omega_infinite(FRAC_PI_2, -FRAC_PI_2, Model::Vectorial { delta: 1.0 }).is_err());

        // 30-digit polylog evaluations
        let v = omega_infinite(FRAC_PI_2, PI, Model::Vectorial { delta: FRAC_PI_2 }).unwrap();
        assert!((v - 0.539_002_221_780_924_5).abs() < 1e-12);
        let v = omega_infinite(FRAC_PI_2, 0.0, Model::Vectorial { delta: 0.0 }).unwrap();
        assert!((v - 2.052_904_428_051_507_4).abs() < 1e-12);
        let v = omega_infinite(1.0, 0.3, Model::Vectorial { delta: 0.0 }).unwrap();
        assert!((v - 8.510_306_524_578_522).abs() < 1e-11);
        // δ = 0 stays finite on the light line
        let v = omega_infinite(FRAC_PI_2, FRAC_PI_2, Model::Vectorial { delta: 0.0 }).unwrap();
        assert!((v - 0.232_609_077_617_500_8).abs() < 1e-12);
    }

    #[test]
    fn magic_angle_shift_matches_scalar() {
        for &x in &[0.0, 0.4, 2.0, 3.1] {
            let s = omega_infinite(1.2, x, Model::Scalar).unwrap();
            let v = omega_infinite(1.2, x, Model::Vectorial { delta: magic_angle() }).unwrap();
            assert!((s - v).abs() < 1e-12, "x = {x}: {s} vs {v}");
        }
    }

    #[test]
    fn sinc_route_examples() {
        let cfg = ChainConfig::scalar(100, FRAC_PI_2).unwrap();
        let exact = gamma_exact(&cfg, 0.0);
        let approx = gamma_sinc_approx(&cfg, 0.0);
        assert!((approx - exact).abs() < 0.02 * exact);
        let sub = gamma_sinc_approx(&cfg, 3.0 * FRAC_PI_4);
        assert!(sub < 0.05, "{sub}");
        assert!(gamma_exact(&cfg, 3.0 * FRAC_PI_4) < 0.05);
    }

    #[test]
    fn sinc_route_large_chain_limit() {
        let cfg = ChainConfig::scalar(100_000, FRAC_PI_2).unwrap();
        let g = gamma_sinc_approx(&cfg, 0.3);
        assert!((g - 2.0).abs() < 1e-3, "{g}");
    }

    #[test]
    fn spectrum_result_shapes() {
        let cfg = ChainConfig::vectorial(10, FRAC_PI_2, 0.0).unwrap();
        let grid = SpectralGrid::uniform(64, cfg.a).unwrap();
        for method in [SpectrumMethod::ExactSum, SpectrumMethod::SincApprox, SpectrumMethod::InfiniteClosedForm] {
            let r = compute_spectrum(&cfg, &grid, method);
            assert_eq!(r.gamma.len(), 64);
            assert_eq!(r.omega.len(), 64);
            assert!(r.gamma.iter().all(|&g| g >= 0.0));
        }
    }
}
