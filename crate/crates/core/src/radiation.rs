//! Field radiated by the chain.
//!
//! Lengths are in units of the lattice constant `d`; the chain lies on the
//! z axis centred on the origin, atom `j` at `z = (j − 1) − (N − 1)/2`.
//! Intensities are in arbitrary units (the overall physical prefactor of
//! the field is dropped).

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dickespace::{amplitude, DipoleState};
use crate::error::{Error, Result};
use crate::greenkernel::ChainConfig;

pub type Vec3 = [f64; 3];

const MIN_ATOM_DISTANCE: f64 = 1e-6;

/// Default dipole orientation: transverse to the chain, along x.
pub const DEFAULT_DIPOLE_AXIS: Vec3 = [1.0, 0.0, 0.0];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn unit(v: Vec3) -> Result<Vec3> {
    let n = dot(v, v).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidConfig(format!("dipole axis {v:?} has no direction")));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

/// Dipole orientation making angle `delta` with the chain axis, in the x–z plane.
pub fn dipole_axis_at(delta: f64) -> Vec3 {
    [delta.sin(), 0.0, delta.cos()]
}

/// Position of atom `j` (0-based) in units of `d`.
pub fn atom_position(cfg: &ChainConfig, j: usize) -> Vec3 {
    [0.0, 0.0, j as f64 - 0.5 * (cfg.n_atoms as f64 - 1.0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// The two in-plane axes (u, v) for a plane with this normal.
    fn in_plane(self) -> (usize, usize) {
        match self {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        }
    }

    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// A square raster on a coordinate plane. For normal x the in-plane axes
/// are (u, v) = (y, z); for normal y (x, z); for normal z (x, y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    pub normal_axis: Axis,
    pub offset: f64,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub resolution: usize,
}

impl PlaneSpec {
    pub fn validate(&self, cfg: &ChainConfig) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::InvalidPlane(format!("resolution {} < 2", self.resolution)));
        }
        for (name, (lo, hi)) in [("u", self.u_range), ("v", self.v_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidPlane(format!("{name} range ({lo}, {hi}) is empty")));
            }
        }
        if !self.offset.is_finite() {
            return Err(Error::InvalidPlane("offset must be finite".into()));
        }
        let (iu, iv) = self.normal_axis.in_plane();
        let inside = |x: f64, (lo, hi): (f64, f64)| x >= lo - MIN_ATOM_DISTANCE && x <= hi + MIN_ATOM_DISTANCE;
        for j in 0..cfg.n_atoms {
            let p = atom_position(cfg, j);
            if (p[self.normal_axis.index()] - self.offset).abs() < MIN_ATOM_DISTANCE
                && inside(p[iu], self.u_range)
                && inside(p[iv], self.v_range)
            {
                return Err(Error::InvalidPlane(format!("plane passes through atom {}", j + 1)));
            }
        }
        Ok(())
    }

    pub fn u_at(&self, col: usize) -> f64 {
        lerp(self.u_range, col, self.resolution)
    }

    pub fn v_at(&self, row: usize) -> f64 {
        lerp(self.v_range, row, self.resolution)
    }

    /// 3-D position of pixel (row, col).
    pub fn point(&self, row: usize, col: usize) -> Vec3 {
        let (iu, iv) = self.normal_axis.in_plane();
        let mut r = [0.0; 3];
        r[self.normal_axis.index()] = self.offset;
        r[iu] = self.u_at(col);
        r[iv] = self.v_at(row);
        r
    }
}

fn lerp((lo, hi): (f64, f64), i: usize, n: usize) -> f64 {
    lo + (hi - lo) * i as f64 / (n - 1) as f64
}

/// Radiated intensity on a plane; row `i` is `v_at(i)`, column `k` is `u_at(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub plane: PlaneSpec,
    pub intensity: Vec<f64>,
}

impl FieldMap {
    pub fn resolution(&self) -> usize {
        self.plane.resolution
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.intensity[row * self.plane.resolution + col]
    }

    pub fn max(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }

    /// Mean over the pixels whose `(u, v)` satisfy `keep`; `None` if no pixel does.
    pub fn mean_where<F: Fn(f64, f64) -> bool>(&self, keep: F) -> Option<f64> {
        let res = self.plane.resolution;
        let mut total = 0.0;
        let mut count = 0usize;
        for row in 0..res {
            let v = self.plane.v_at(row);
            for col in 0..res {
                if keep(self.plane.u_at(col), v) {
                    total += self.at(row, col);
                    count += 1;
                }
            }
        }
        (count > 0).then(|| total / count as f64)
    }

    /// `# comment`, a header row `v\u,u_0,u_1,…`, then one raster row per
    /// line led by its `v` coordinate.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W, comment: &str) -> io::Result<()> {
        writeln!(w, "# {comment}")?;
        let res = self.plane.resolution;
        let mut header = String::from("v\\u");
        for col in 0..res {
            header.push(',');
            header.push_str(&format_number(self.plane.u_at(col)));
        }
        writeln!(w, "{header}")?;
        for (row, values) in self.intensity.chunks(res).enumerate() {
            let mut line = format_number(self.plane.v_at(row));
            for v in values {
                line.push(',');
                line.push_str(&format_number(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Plain (ASCII) PGM, maxval 65535, linear in intensity from 0 to the map maximum.
    pub fn write_pgm<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        let res = self.plane.resolution;
        let max = self.max();
        writeln!(w, "P2")?;
        writeln!(w, "{res} {res}")?;
        writeln!(w, "65535")?;
        for row in self.intensity.chunks(res) {
            let mut line = String::new();
            for v in row {
                let level = if max > 0.0 { (v / max * 65535.0).round() as u32 } else { 0 };
                let word = level.to_string();
                if !line.is_empty() && line.len() + 1 + word.len() > 70 {
                    writeln!(w, "{line}")?;
                    line.clear();
                }
                if !line.is_empty() {
                    line.push(' ');
                }
                line.push_str(&word);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// 17 significant digits, the format used for every numeric output.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Field at `r` (units of d) radiated by all dipoles along `dipole_axis`:
/// `E_α = Σ_j Σ_β G_αβ(r − r_j) ê_β β_j` with the full dyadic kernel
///
/// ```text
/// G(R) = (3/2) e^{ikR}/(ikR) [ (1 − n̂n̂) + (1 − 3n̂n̂)(i/kR − 1/(kR)²) ]
/// ```
pub fn field_at_point(r: Vec3, state: &DipoleState, cfg: &ChainConfig, dipole_axis: Vec3) -> Result<[Complex64; 3]> {
    state.check_chain(cfg)?;
    let e = unit(dipole_axis)?;
    let mut field = [Complex64::new(0.0, 0.0); 3];
    for (j, beta) in state.beta.iter().enumerate() {
        let p = atom_position(cfg, j);
        let sep = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
        let dist = dot(sep, sep).sqrt();
        if dist < MIN_ATOM_DISTANCE {
            return Err(Error::TooCloseToAtom { site: j + 1, distance: dist });
        }
        if *beta == Complex64::new(0.0, 0.0) {
            continue;
        }
        let n = [sep[0] / dist, sep[1] / dist, sep[2] / dist];
        let ne = dot(n, e);
        let kr = cfg.a * dist;
        let spherical = 1.5 * Complex64::from_polar(1.0, kr) / Complex64::new(0.0, kr);
        let near = Complex64::new(-1.0 / (kr * kr), 1.0 / kr);
        for alpha in 0..3 {
            let transverse = e[alpha] - n[alpha] * ne;
            let longitudinal = e[alpha] - 3.0 * n[alpha] * ne;
            field[alpha] += spherical * (transverse + longitudinal * near) * beta;
        }
    }
    Ok(field)
}

/// `Σ_α |E_α|²` on every pixel of `plane`.
pub fn intensity_map(plane: &PlaneSpec, state: &DipoleState, cfg: &ChainConfig, dipole_axis: Vec3) -> Result<FieldMap> {
    plane.validate(cfg)?;
    let res = plane.resolution;
    let mut intensity = Vec::with_capacity(res * res);
    for row in 0..res {
        for col in 0..res {
            let e = field_at_point(plane.point(row, col), state, cfg, dipole_axis)?;
            intensity.push(e.iter().map(|c| c.norm_sqr()).sum());
        }
    }
    Ok(FieldMap { plane: *plane, intensity })
}

/// Far-zone intensity at polar angle `theta` from the chain axis:
/// `|Σ_j e^{−ia cosθ (j−1)} β_j|²`, i.e. `|A_N(a cosθ)|²`. With
/// `polarization = Some(ê)` it is multiplied by `|n̂ × (n̂ × ê)|²` for the
/// direction `n̂ = (sinθ, 0, cosθ)`.
pub fn far_field_intensity(theta: f64, state: &DipoleState, cfg: &ChainConfig, polarization: Option<Vec3>) -> Result<f64> {
    let structure = amplitude(state, cfg.a * theta.cos()).norm_sqr();
    match polarization {
        None => Ok(structure),
        Some(axis) => {
            let e = unit(axis)?;
            let n = [theta.sin(), 0.0, theta.cos()];
            let ne = dot(n, e);
            Ok(structure * (1.0 - ne * ne).max(0.0))
        }
    }
}

/// Geometry used by [`evanescence_ratio`]: the plane x = 5d, spanning the
/// chain plus 25 d beyond each end along z and ±(L/2 + 10) along y.
pub fn evanescence_plane(cfg: &ChainConfig, resolution: usize) -> PlaneSpec {
    let half = 0.5 * (cfg.n_atoms as f64 - 1.0);
    PlaneSpec {
        normal_axis: Axis::X,
        offset: 5.0,
        u_range: (-(half + 10.0), half + 10.0),
        v_range: (-(half + 25.0), half + 25.0),
        resolution,
    }
}

/// Distance beyond the chain ends where the end-cap band starts.
pub const END_CAP_MARGIN: f64 = 5.0;

/// Raster resolution used by [`evanescence_ratio`].
pub const EVANESCENCE_RESOLUTION: usize = 200;

/// Mean intensity in the band beside the chain (|z| ≤ L/2) over the mean
/// intensity in the end-cap bands (|z| ≥ L/2 + 5), both on
/// [`evanescence_plane`] with dipoles along [`DEFAULT_DIPOLE_AXIS`]. Large
/// for states radiating transversely, small for guided states that leak
/// out of the ends.
pub fn evanescence_ratio(state: &DipoleState, cfg: &ChainConfig) -> Result<f64> {
    evanescence_ratio_with(state, cfg, DEFAULT_DIPOLE_AXIS, EVANESCENCE_RESOLUTION)
}

pub fn evanescence_ratio_with(state: &DipoleState, cfg: &ChainConfig, dipole_axis: Vec3, resolution: usize) -> Result<f64> {
    let map = intensity_map(&evanescence_plane(cfg, resolution), state, cfg, dipole_axis)?;
    Ok(evanescence_ratio_of(&map, cfg))
}

/// [`evanescence_ratio`] for an already computed map on [`evanescence_plane`].
pub fn evanescence_ratio_of(map: &FieldMap, cfg: &ChainConfig) -> f64 {
    let half = 0.5 * (cfg.n_atoms as f64 - 1.0);
    let side = map.mean_where(|_, z| z.abs() <= half.max(0.5)).unwrap_or(0.0);
    let ends = map.mean_where(|_, z| z.abs() >= half + END_CAP_MARGIN).unwrap_or(0.0);
    side / ends
}
