//! Reduced internal state, interferometric visibility, and redshift
//! extraction, with their closed-form counterparts.

use crate::model::Constants;
use crate::quantum::JointState;
use crate::{Complex64, Error, Result};

/// Internal density matrix `ρ_kl = ∫ ψ_k(x) ψ_l*(x) dx`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalDensity {
    dim: usize,
    data: Vec<Complex64>,
}

impl InternalDensity {
    pub fn from_elements(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "{} elements for a {dim}×{dim} matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.data[k * self.dim + l]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// `tr ρ²`; equals `Σ_kl |ρ_kl|²` for Hermitian `ρ`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..self.dim {
            for l in 0..self.dim {
                worst = worst.max((self.get(k, l) - self.get(l, k).conj()).norm());
            }
        }
        worst
    }

    /// True when `ρ + shift·I` admits a Cholesky factorization, i.e. the
    /// smallest eigenvalue exceeds `−shift`.
    pub fn is_positive_above(&self, shift: f64) -> bool {
        let n = self.dim;
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut diag = self.get(j, j).re + shift;
            for p in 0..j {
                diag -= l[j * n + p].norm_sqr();
            }
            if diag <= 0.0 {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * n + j] = Complex64::new(ljj, 0.0);
            for i in j + 1..n {
                let mut v = self.get(i, j);
                for p in 0..j {
                    v -= l[i * n + p] * l[j * n + p].conj();
                }
                l[i * n + j] = v / ljj;
            }
        }
        true
    }

    /// Checks Hermiticity (1e-12), unit trace (1e-10) and positivity (−1e-10).
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::InvalidInput(format!("ρ is not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > 1e-10 {
            return Err(Error::InvalidInput(format!("tr ρ = {tr}")));
        }
        if !self.is_positive_above(1e-10) {
            return Err(Error::InvalidInput("ρ has a negative eigenvalue".into()));
        }
        Ok(())
    }
}

pub fn reduced_internal(state: &JointState) -> InternalDensity {
    let d = state.levels();
    let dx = state.grid.dx();
    let mut data = vec![Complex64::new(0.0, 0.0); d * d];
    for k in 0..d {
        for l in k..d {
            let v: Complex64 = state.psi[k]
                .iter()
                .zip(&state.psi[l])
                .map(|(a, b)| a * b.conj())
                .sum::<Complex64>()
                * dx;
            data[k * d + l] = v;
            data[l * d + k] = v.conj();
        }
        data[k * d + k] = Complex64::new(data[k * d + k].re, 0.0);
    }
    InternalDensity { dim: d, data }
}

/// Fringe contrast `2|ρ_kl|`, clamped to `[0, 1]` when the two levels carry
/// equal population.
pub fn visibility(rho: &InternalDensity, k: usize, l: usize) -> Result<f64> {
    for index in [k, l] {
        if index >= rho.dim() {
            return Err(Error::IndexOutOfRange {
                index,
                dim: rho.dim(),
            });
        }
    }
    if k == l {
        return Err(Error::InvalidInput("visibility needs two distinct levels".into()));
    }
    let raw = 2.0 * rho.get(k, l).norm();
    let equal = (rho.get(k, k).re - rho.get(l, l).re).abs() < 1e-12;
    Ok(if equal { raw.clamp(0.0, 1.0) } else { raw })
}

/// `|cos(g·dx·dE·t / (2ħc²))|` for a two-level clock split across heights `dx` apart.
pub fn analytic_visibility(d_e: f64, dx: f64, t: f64, constants: &Constants) -> f64 {
    let k = constants;
    (k.g * dx * d_e * t / (2.0 * k.hbar * k.c2())).cos().abs()
}

/// First zero of [`analytic_visibility`], `πħc²/(g·dx·dE)`.
pub fn analytic_visibility_zero(d_e: f64, dx: f64, constants: &Constants) -> f64 {
    std::f64::consts::PI * constants.hbar * constants.c2() / (constants.g * dx * d_e)
}

/// Fractional frequency shift `(φ_high − φ_low)ħ/(E0·t)` between two clocks.
pub fn redshift_from_phases(
    phi_low: f64,
    phi_high: f64,
    e0: f64,
    t: f64,
    constants: &Constants,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("t = {t} must be positive")));
    }
    if e0 == 0.0 {
        return Err(Error::InvalidInput("clock energy must be non-zero".into()));
    }
    Ok((phi_high - phi_low) * constants.hbar / (e0 * t))
}

/// `g·h/c²`.
pub fn analytic_redshift(h: f64, constants: &Constants) -> f64 {
    constants.g * h / constants.c2()
}
