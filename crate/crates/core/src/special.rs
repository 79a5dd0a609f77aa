//! Special functions used by the coupling kernels and the infinite-chain
//! frequency shift.
//!
//! Polylogarithms are only ever needed on the unit circle, where they split
//! into a Bernoulli-polynomial part and a Clausen-function part:
//!
//! ```text
//! Li2(e^{iθ}) = [π²/6 − θ(2π − θ)/4] + i Cl2(θ)
//! Li3(e^{iθ}) = Cl3(θ) + i [π²θ/6 − πθ²/4 + θ³/12]      θ ∈ [0, 2π]
//! ```
//!
//! `Cl2` and `Cl3` are evaluated from their expansions about θ = 0 after
//! reduction to [−π, π], where the series converge at least as fast as 4^{-k}.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SERIES_SWITCH: f64 = 1e-4;
const J1_SERIES_SWITCH: f64 = 0.1;
const ZETA3: f64 = 1.202_056_903_159_594_3;
const CLAUSEN_TERMS: usize = 40;

/// `sin(x)/x` with the removable singularity at the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SERIES_SWITCH {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Spherical Bessel function of order zero.
pub fn sphbessel_j0(x: f64) -> f64 {
    sinc(x)
}

/// Spherical Bessel function of order one, `sin x/x² − cos x/x`.
///
/// The closed form cancels catastrophically for small arguments, so the
/// Taylor series is used below 0.1.
pub fn sphbessel_j1(x: f64) -> f64 {
    if x.abs() < J1_SERIES_SWITCH {
        let x2 = x * x;
        x * (1.0 / 3.0
            - x2 * (1.0 / 30.0 - x2 * (1.0 / 840.0 - x2 * (1.0 / 45_360.0 - x2 / 3_991_680.0))))
    } else {
        x.sin() / (x * x) - x.cos() / x
    }
}

/// Riemann zeta at even integers `2k`, k = 1..=CLAUSEN_TERMS, by
/// Euler–Maclaurin summation.
fn zeta_even_table() -> &'static [f64; CLAUSEN_TERMS] {
    static TABLE: OnceLock<[f64; CLAUSEN_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; CLAUSEN_TERMS];
        for (k, slot) in table.iter_mut().enumerate() {
            *slot = zeta(2.0 * (k as f64 + 1.0));
        }
        table
    })
}

fn zeta(s: f64) -> f64 {
    const M: f64 = 10.0;
    // B_{2j} / (2j)!
    const B_OVER_FACT: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
    ];
    let mut sum: f64 = (1..10).map(|n| (n as f64).powf(-s)).sum();
    sum += M.powf(1.0 - s) / (s - 1.0) + 0.5 * M.powf(-s);
    let mut rising = s;
    let mut power = M.powf(-s - 1.0);
    for (j, coeff) in B_OVER_FACT.iter().enumerate() {
        sum += coeff * rising * power;
        let j = j as f64;
        rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
        power /= M * M;
    }
    sum
}

/// Reduce an angle to (−π, π].
fn reduce_symmetric(theta: f64) -> f64 {
    let mut t = theta - TAU * (theta / TAU).round();
    if t <= -PI {
        t += TAU;
    }
    t
}

/// Reduce an angle to [0, 2π).
fn reduce_positive(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Clausen function `Cl2(θ) = Σ sin(kθ)/k²`.
pub fn clausen_sin2(theta: f64) -> f64 {
    let t = reduce_symmetric(theta);
    if t == 0.0 {
        return 0.0;
    }
    let q = (t / TAU).powi(2);
    let zetas = zeta_even_table();
    let mut power = q;
    let mut series = 0.0;
    for (k, z) in zetas.iter().enumerate() {
        let k = k as f64 + 1.0;
        series += z * power / (k * (2.0 * k + 1.0));
        power *= q;
        if power < 1e-20 {
            break;
        }
    }
    t - t * t.abs().ln() + t * series
}

/// Clausen-type cosine series `Σ cos(kθ)/k³`.
pub fn clausen_cos3(theta: f64) -> f64 {
    let t = reduce_symmetric(theta);
    if t == 0.0 {
        return ZETA3;
    }
    let t2 = t * t;
    let q = t2 / (TAU * TAU);
    let zetas = zeta_even_table();
    let mut power = q;
    let mut series = 0.0;
    for (k, z) in zetas.iter().enumerate() {
        let k = k as f64 + 1.0;
        series += z * power / (k * (2.0 * k + 1.0) * (2.0 * k + 2.0));
        power *= q;
        if power < 1e-20 {
            break;
        }
    }
    ZETA3 - 0.75 * t2 + 0.5 * t2 * t.abs().ln() - t2 * series
}

/// `Li2(e^{iθ})` for any θ. Finite everywhere, including θ = 0.
pub(crate) fn li2_unit(theta: f64) -> Complex64 {
    let t = reduce_positive(theta);
    let re = PI * PI / 6.0 - t * (TAU - t) / 4.0;
    Complex64::new(re, clausen_sin2(theta))
}

/// `Li3(e^{iθ})` for any θ.
pub(crate) fn li3_unit(theta: f64) -> Complex64 {
    let t = reduce_positive(theta);
    let im = PI * PI * t / 6.0 - PI * t * t / 4.0 + t * t * t / 12.0;
    Complex64::new(clausen_cos3(theta), im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolylogOrder {
    Two,
    Three,
}

/// `Li_ν(e^{iθ})` for ν ∈ {2, 3}.
///
/// Order 2 is restricted to θ ∈ (1e-6, 2π − 1e-6); order 3 accepts any θ.
pub fn polylog_unit_circle(order: PolylogOrder, theta: f64) -> Result<Complex64> {
    match order {
        PolylogOrder::Two => {
            if !(theta > 1e-6 && theta < TAU - 1e-6) {
                return Err(Error::PolylogDomain { theta });
            }
            Ok(li2_unit(theta))
        }
        PolylogOrder::Three => {
            if !theta.is_finite() {
                return Err(Error::PolylogDomain { theta });
            }
            Ok(li3_unit(theta))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removable_singularities() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sphbessel_j1(1e-8) - 1e-8 / 3.0).abs() < 1e-22);
        assert!(sphbessel_j0(PI).abs() < 1e-16);
    }

    #[test]
    fn series_branches_join_smoothly() {
        for &x in &[SERIES_SWITCH, J1_SERIES_SWITCH] {
            let below = x * (1.0 - 1e-12);
            let above = x * (1.0 + 1e-12);
            assert!((sinc(below) - sinc(above)).abs() < 1e-14);
            // the closed form just above the switch carries ~1e-14 cancellation error
            assert!((sphbessel_j1(below) - sphbessel_j1(above)).abs() < 1e-13);
        }
        assert!((sphbessel_j1(0.1 * (1.0 - 1e-15)) - 0.033_300_011_902_557_57).abs() < 3e-17);
        // j1 from the closed form at a point where it is well conditioned
        let x = 0.3_f64;
        let direct = x.sin() / (x * x) - x.cos() / x;
        assert!((sphbessel_j1(x) - direct).abs() < 1e-14);
    }

    #[test]
    fn zeta_values() {
        let z = zeta_even_table();
        assert!((z[0] - PI.powi(2) / 6.0).abs() < 1e-15);
        assert!((z[1] - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((z[2] - PI.powi(6) / 945.0).abs() < 1e-15);
        assert!((z[CLAUSEN_TERMS - 1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clausen_against_reference() {
        // (θ, Cl2(θ), Σcos(kθ)/k³) from a 30-digit evaluation
        let table = [
            (0.1, 0.330_272_398_882_816_65, 1.183_043_630_460_826_8),
            (1.0, 1.013_959_132_360_768_5, 0.448_573_007_280_017_4),
            (2.0, 0.727_146_050_863_279_2, -0.467_971_472_084_971_03),
            (3.0, 0.098_026_209_391_301_42, -0.894_598_592_123_167_3),
            (5.0, -0.992_820_132_546_956_7, 0.162_949_031_589_153_04),
            (6.2, -0.290_048_919_832_648_1, 1.188_263_216_350_318_3),
        ];
        for (theta, cl2, cl3) in table {
            assert!((clausen_sin2(theta) - cl2).abs() < 1e-14, "Cl2({theta})");
            assert!((clausen_cos3(theta) - cl3).abs() < 1e-14, "Cl3({theta})");
        }
    }

    #[test]
    fn polylog_special_points() {
        let li2 = polylog_unit_circle(PolylogOrder::Two, PI).unwrap();
        assert!((li2.re + PI * PI / 12.0).abs() < 1e-12);
        assert!(li2.im.abs() < 1e-12);

        let li3 = polylog_unit_circle(PolylogOrder::Three, PI).unwrap();
        assert!((li3.re + 0.75 * ZETA3).abs() < 1e-12);
        assert!(li3.im.abs() < 1e-12);

        assert!(polylog_unit_circle(PolylogOrder::Two, 0.0).is_err());
        assert!(polylog_unit_circle(PolylogOrder::Two, TAU).is_err());
        assert!(polylog_unit_circle(PolylogOrder::Three, 0.0).is_ok());
        assert!((li3_unit(0.0).re - ZETA3).abs() < 1e-15);
        assert!((li2_unit(0.0).re - PI * PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn polylog_periodicity() {
        for &t in &[0.3, 1.7, 4.0] {
            let a = li3_unit(t);
            let b = li3_unit(t + TAU);
            let c = li3_unit(t - 2.0 * TAU);
            assert!((a - b).norm() < 1e-12 && (a - c).norm() < 1e-12);
        }
    }
}
