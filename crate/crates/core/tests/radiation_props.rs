use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subchain::radiation::{evanescence_plane, DEFAULT_DIPOLE_AXIS};
use subchain::*;

#[test]
fn symmetric_states_give_mirror_symmetric_maps() {
    let cfg = ChainConfig::scalar(50, 1.0).unwrap();
    for state in [uniform(&cfg), most_subradiant(&cfg).unwrap()] {
        // mirror the subradiant profile so it is symmetric about the centre;
        // dipole axes along or across the chain keep the reflection symmetry
        let beta: Vec<Complex64> = (0..50).map(|j| state.beta[j.min(49 - j)]).collect();
        let s = DipoleState::new(beta, 0.0).unwrap();
        for axis in [DEFAULT_DIPOLE_AXIS, [0.6, 0.8, 0.0], [0.0, 0.0, 1.0]] {
            let map = intensity_map(&evanescence_plane(&cfg, 41), &s, &cfg, axis).unwrap();
            let scale = map.max();
            let res = map.resolution();
            for row in 0..res {
                for col in 0..res {
                    let d = (map.at(row, col) - map.at(res - 1 - row, col)).abs();
                    assert!(d < 1e-10 * scale, "axis {axis:?} pixel ({row}, {col})");
                }
            }
        }
    }
}

#[test]
fn far_field_matches_spectral_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let n = rng.gen_range(1..80);
        let a = rng.gen_range(0.2..3.0);
        let cfg = ChainConfig::scalar(n, a).unwrap();
        let beta = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let s = DipoleState::new(beta, 0.0).unwrap();
        let grid = SpectralGrid::uniform(512, a).unwrap();
        let d = density(&s, &grid).unwrap();
        let total = TAU * s.norm_sqr();
        for (x, p) in grid.points().iter().zip(&d.p) {
            if x.abs() < a {
                let theta = (x / a).acos();
                let far = far_field_intensity(theta, &s, &cfg, None).unwrap();
                assert!((far - total * p).abs() < 1e-9 * total, "N={n} x={x}");
                assert!(far == amplitude(&s, a * theta.cos()).norm_sqr());
            }
        }
    }
}

#[test]
fn far_field_is_continuous_and_nonnegative() {
    let cfg = ChainConfig::scalar(40, 1.0).unwrap();
    let s = most_subradiant(&cfg).unwrap();
    let mut last = far_field_intensity(0.0, &s, &cfg, Some(DEFAULT_DIPOLE_AXIS)).unwrap();
    for k in 1..=2000 {
        let v = far_field_intensity(PI * k as f64 / 2000.0, &s, &cfg, Some(DEFAULT_DIPOLE_AXIS)).unwrap();
        assert!(v >= 0.0);
        assert!((v - last).abs() < 0.05, "jump at step {k}");
        last = v;
    }
}

#[test]
fn far_zone_field_is_a_dipole_wave() {
    let cfg = ChainConfig::scalar(1, 1.0).unwrap();
    let s = DipoleState::new(vec![Complex64::new(1.0, 0.0)], 0.0).unwrap();
    let e = DEFAULT_DIPOLE_AXIS;
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..100 {
        let theta: f64 = rng.gen_range(0.0..PI);
        let phi: f64 = rng.gen_range(0.0..TAU);
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let ne = n[0] * e[0] + n[1] * e[1] + n[2] * e[2];
        let pattern = (1.0 - ne * ne).sqrt();
        if pattern < 0.2 {
            continue;
        }
        let r = rng.gen_range(100.0..1000.0);
        let field = field_at_point([r * n[0], r * n[1], r * n[2]], &s, &cfg, e).unwrap();
        let magnitude = field.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let leading = 1.5 * pattern / r;
        assert!((magnitude - leading).abs() < 0.01 * leading, "kr = {r}");
    }
}

#[test]
fn uniform_state_lights_up_beside_the_chain() {
    let cfg = ChainConfig::scalar(50, 1.0).unwrap();
    let map = intensity_map(&evanescence_plane(&cfg, 200), &uniform(&cfg), &cfg, DEFAULT_DIPOLE_AXIS).unwrap();
    let mut sorted = map.intensity.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let mut beside: f64 = 0.0;
    for row in 0..map.resolution() {
        if map.plane.v_at(row).abs() <= 24.5 {
            for col in 0..map.resolution() {
                beside = beside.max(map.at(row, col));
            }
        }
    }
    assert!(beside > 5.0 * median, "{beside} vs median {median}");
}

#[test]
fn evanescence_ratio_orders_the_states() {
    let cfg = ChainConfig::scalar(50, 1.0).unwrap();
    let bright = evanescence_ratio(&uniform(&cfg), &cfg).unwrap();
    let dark = evanescence_ratio(&most_subradiant(&cfg).unwrap(), &cfg).unwrap();
    assert!(bright > 20.0, "{bright}");
    assert!(dark < 2.0, "{dark}");
    let one = ChainConfig::vectorial(1, 1.0, FRAC_PI_2).unwrap();
    let single = evanescence_ratio(&uniform(&one), &one).unwrap();
    assert!(single > 0.5 && single < 5.0, "{single}");
}
