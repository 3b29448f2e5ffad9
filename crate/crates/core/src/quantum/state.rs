use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::model::{BlockHamiltonian, Grid1D};
use crate::{Complex64, Error, Result};

/// Joint internal ⊗ external state: one wavefunction per internal level,
/// sampled on a common grid. The norm is `Σ_k Σ_i |ψ_k(x_i)|² dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub grid: Grid1D,
    pub psi: Vec<Vec<Complex64>>,
    pub t: f64,
}

impl JointState {
    /// Wraps per-level samples, checking shape and unit norm (within 1e-10).
    pub fn new(grid: Grid1D, psi: Vec<Vec<Complex64>>, t: f64) -> Result<Self> {
        grid.validate()?;
        if psi.is_empty() {
            return Err(Error::GridMismatch("state has no levels".into()));
        }
        if let Some(bad) = psi.iter().position(|v| v.len() != grid.n) {
            return Err(Error::GridMismatch(format!(
                "level {bad} has {} samples, grid has {}",
                psi[bad].len(),
                grid.n
            )));
        }
        let state = Self { grid, psi, t };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// `Σ_k c_k |k⟩ ⊗ |packet⟩`. The packet must be normalized on the grid.
    pub fn product(grid: Grid1D, amplitudes: &[Complex64], packet: &[Complex64]) -> Result<Self> {
        let psi = amplitudes
            .iter()
            .map(|&c| packet.iter().map(|&v| c * v).collect())
            .collect();
        Self::new(grid, psi, 0.0)
    }

    /// `Σ_k c_k |k⟩ ⊗ |packet_k⟩` with a separate normalized packet per level.
    pub fn correlated(
        grid: Grid1D,
        amplitudes: &[Complex64],
        packets: &[Vec<Complex64>],
    ) -> Result<Self> {
        if amplitudes.len() != packets.len() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for {} packets",
                amplitudes.len(),
                packets.len()
            )));
        }
        let psi = amplitudes
            .iter()
            .zip(packets)
            .map(|(&c, packet)| packet.iter().map(|&v| c * v).collect())
            .collect();
        Self::new(grid, psi, 0.0)
    }

    pub fn levels(&self) -> usize {
        self.psi.len()
    }

    pub fn norm(&self) -> f64 {
        (0..self.levels()).map(|k| self.level_population(k)).sum()
    }

    pub fn level_population(&self, k: usize) -> f64 {
        self.psi[k].iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// `⟨self|other⟩` over both factors.
    pub fn overlap(&self, other: &JointState) -> Result<Complex64> {
        if self.grid != other.grid || self.levels() != other.levels() {
            return Err(Error::GridMismatch("states live on different spaces".into()));
        }
        let sum: Complex64 = self
            .psi
            .iter()
            .zip(&other.psi)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| u.conj() * v))
            .sum();
        Ok(sum * self.grid.dx())
    }

    /// `|⟨self|other⟩|`.
    pub fn fidelity(&self, other: &JointState) -> Result<f64> {
        Ok(self.overlap(other)?.norm())
    }

    /// Checks that `blocks` act on this state's levels and grid.
    pub fn check_blocks(&self, blocks: &[BlockHamiltonian]) -> Result<()> {
        if blocks.len() != self.levels() {
            return Err(Error::GridMismatch(format!(
                "{} blocks for {} levels",
                blocks.len(),
                self.levels()
            )));
        }
        if let Some(b) = blocks.iter().find(|b| b.grid != self.grid) {
            return Err(Error::GridMismatch(format!("block {} uses another grid", b.level)));
        }
        Ok(())
    }
}

/// Scales `psi` so that `Σ|ψ|² dx = 1`.
pub fn normalize(psi: &mut [Complex64], grid: &Grid1D) {
    let norm = (psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx()).sqrt();
    if norm > 0.0 {
        psi.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Gaussian packet `exp(−(x−x0)²/4σ² + i p0 x/ħ)`, normalized on the grid.
pub fn gaussian_packet(grid: &Grid1D, x0: f64, sigma: f64, p0: f64, hbar: f64) -> Vec<Complex64> {
    let mut psi: Vec<Complex64> = grid
        .points()
        .into_iter()
        .map(|x| {
            let d = x - x0;
            Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), p0 * x / hbar)
        })
        .collect();
    normalize(&mut psi, grid);
    psi
}

/// Position spread of the ground state of `a p² + ½ K (x − x0)²`.
pub fn oscillator_width(kinetic: f64, stiffness: f64, hbar: f64) -> f64 {
    // σ² = ħ √(a / 2K)
    (hbar * (kinetic / (2.0 * stiffness)).sqrt()).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectations {
    pub norm: f64,
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_p: f64,
    pub level_populations: Vec<f64>,
}

/// Wavenumbers for spectral differentiation: the unpaired Nyquist mode is dropped.
pub(crate) fn derivative_wavenumbers(grid: &Grid1D) -> Vec<f64> {
    let mut k = grid.wavenumbers();
    k[grid.n / 2] = 0.0;
    k
}

/// Forward transform plan shared by the observable routines.
pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(n)
}

/// Moments of the joint state; `hbar` converts wavenumber to momentum.
pub fn expectations(state: &JointState, hbar: f64) -> Expectations {
    let grid = &state.grid;
    let dx = grid.dx();
    let xs = grid.points();
    let level_populations: Vec<f64> = (0..state.levels()).map(|k| state.level_population(k)).collect();
    let norm: f64 = level_populations.iter().sum();

    let mut sx = 0.0;
    let mut sxx = 0.0;
    for psi in &state.psi {
        for (v, &x) in psi.iter().zip(&xs) {
            let w = v.norm_sqr();
            sx += w * x;
            sxx += w * x * x;
        }
    }
    let mean_x = sx * dx / norm;
    let var_x = (sxx * dx / norm - mean_x * mean_x).max(0.0);

    let fft = forward_plan(grid.n);
    let kappa = derivative_wavenumbers(grid);
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.n];
    let mut sp = 0.0;
    for psi in &state.psi {
        buf.copy_from_slice(psi);
        fft.process(&mut buf);
        sp += buf.iter().zip(&kappa).map(|(v, k)| k * v.norm_sqr()).sum::<f64>();
    }
    // Parseval: Σ|ψ_i|² dx = (dx/n) Σ|ψ̂_j|²
    let mean_p = hbar * sp * dx / grid.n as f64 / norm;

    Expectations {
        norm,
        mean_x,
        var_x,
        mean_p,
        level_populations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(-20.0, 20.0, 512).unwrap()
    }

    #[test]
    fn symmetric_packet_is_centered() {
        let g = grid();
        let packet = gaussian_packet(&g, 0.0, 1.0, 0.0, 1.0);
        let amps = [Complex64::new(1.0, 0.0)];
        let s = JointState::product(g, &amps, &packet).unwrap();
        let e = expectations(&s, 1.0);
        assert!(e.mean_x.abs() < 1e-12);
        assert!(e.mean_p.abs() < 1e-12);
        assert!((e.var_x - 1.0).abs() < 1e-10);
        assert!((e.norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boosted_packet_carries_momentum() {
        let g = grid();
        let packet = gaussian_packet(&g, 1.0, 1.5, 0.75, 1.0);
        let s = JointState::product(g, &[Complex64::new(1.0, 0.0)], &packet).unwrap();
        assert!((expectations(&s, 1.0).mean_p - 0.75).abs() < 1e-8);
    }

    #[test]
    fn construction_errors() {
        let g = grid();
        let short = vec![vec![Complex64::new(1.0, 0.0); 3]];
        assert!(matches!(JointState::new(g, short, 0.0), Err(Error::GridMismatch(_))));
        let unnormalized = vec![vec![Complex64::new(1.0, 0.0); g.n]];
        assert!(JointState::new(g, unnormalized, 0.0).is_err());
    }

    #[test]
    fn populations_follow_amplitudes() {
        let g = grid();
        let packet = gaussian_packet(&g, 0.0, 1.0, 0.0, 1.0);
        let amps = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let s = JointState::product(g, &amps, &packet).unwrap();
        let e = expectations(&s, 1.0);
        assert!((e.level_populations[0] - 0.36).abs() < 1e-14);
        assert!((e.level_populations[1] - 0.64).abs() < 1e-14);
        assert!((s.fidelity(&s).unwrap() - 1.0).abs() < 1e-14);
    }
}
