//! Pairwise atom–atom coupling kernels.
//!
//! Every quantity is dimensionless: rates in units of the single-atom decay
//! rate Γ and separations as the phase `k₀ r`. Atom `j` (1-based) sits at
//! `z_j = d (j − 1)`, so the only geometric parameter is the lattice phase
//! `a = k₀ d`.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{sinc, sphbessel_j0, sphbessel_j1};

/// Dipole angle (radians from the chain axis) at which the vectorial kernel
/// coincides with the scalar one: `cos²δ = 1/3`.
pub fn magic_angle() -> f64 {
    (1.0 / 3.0_f64.sqrt()).acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Scalar,
    /// All dipoles at angle `delta` to the chain axis.
    Vectorial { delta: f64 },
}

impl Model {
    /// Short tag used in CSV headers, e.g. `scalar` or `vector:1.5707963`.
    pub fn tag(&self) -> String {
        match self {
            Model::Scalar => "scalar".to_string(),
            Model::Vectorial { delta } => format!("vector:{delta}"),
        }
    }

    /// Off-diagonal kernel at dimensionless separation `r > 0`.
    pub fn kernel(&self, r: f64) -> ComplexRate {
        match *self {
            Model::Scalar => scalar_kernel(r),
            Model::Vectorial { delta } => vector_kernel(r, delta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_atoms: usize,
    /// Lattice phase `k₀ d` in radians.
    pub a: f64,
    pub model: Model,
}

impl ChainConfig {
    pub fn new(n_atoms: usize, a: f64, model: Model) -> Result<Self> {
        let cfg = ChainConfig { n_atoms, a, model };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn scalar(n_atoms: usize, a: f64) -> Result<Self> {
        Self::new(n_atoms, a, Model::Scalar)
    }

    pub fn vectorial(n_atoms: usize, a: f64, delta: f64) -> Result<Self> {
        Self::new(n_atoms, a, Model::Vectorial { delta })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::InvalidConfig("n_atoms must be at least 1".into()));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidConfig(format!("a = {} must be positive", self.a)));
        }
        if let Model::Vectorial { delta } = self.model {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&delta) {
                return Err(Error::InvalidConfig(format!(
                    "dipole angle {delta} outside [0, π/2]"
                )));
            }
        }
        Ok(())
    }

    /// Kernel between two sites `|j − m|` lattice steps apart.
    pub fn coupling(&self, steps: usize) -> ComplexRate {
        if steps == 0 {
            ComplexRate::DIAGONAL
        } else {
            self.model.kernel(self.a * steps as f64)
        }
    }
}

/// Kernel value `G = decay − i·shift`, both in units of Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRate {
    pub decay: f64,
    pub shift: f64,
}

impl ComplexRate {
    pub const DIAGONAL: ComplexRate = ComplexRate { decay: 1.0, shift: 0.0 };

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.decay, -self.shift)
    }
}

/// Scalar kernel `(sin r / r, cos r / r)`; `r = 0` is the diagonal `(1, 0)`.
///
/// Panics on negative `r`.
pub fn scalar_kernel(r: f64) -> ComplexRate {
    assert!(r >= 0.0, "negative separation {r}");
    if r == 0.0 {
        return ComplexRate::DIAGONAL;
    }
    ComplexRate { decay: sinc(r), shift: r.cos() / r }
}

/// Off-diagonal kernel for dipoles at angle `delta` to the chain axis.
///
/// Panics unless `r > 0`: the diagonal is Γ by definition and must not be
/// taken from here.
pub fn vector_kernel(r: f64, delta: f64) -> ComplexRate {
    assert!(r > 0.0, "vector kernel needs r > 0, got {r}");
    let sin2 = delta.sin().powi(2);
    let mut aniso = 3.0 * delta.cos().powi(2) - 1.0;
    // rounding residue at the magic angle, amplified by the 1/r³ term
    if aniso.abs() < 8.0 * f64::EPSILON {
        aniso = 0.0;
    }
    let (s, c) = r.sin_cos();
    let decay = 1.5 * (sin2 * sphbessel_j0(r) + aniso * sphbessel_j1(r) / r);
    let shift = 1.5 * (sin2 * c / r + aniso * (s / (r * r) + c / (r * r * r)));
    ComplexRate { decay, shift }
}

/// Dense `N × N` coupling matrix in units of Γ; complex symmetric Toeplitz.
pub fn coupling_matrix(cfg: &ChainConfig) -> Array2<Complex64> {
    let n = cfg.n_atoms;
    let row: Vec<Complex64> = (0..n).map(|l| cfg.coupling(l).to_complex()).collect();
    Array2::from_shape_fn((n, n), |(j, m)| row[j.abs_diff(m)])
}
