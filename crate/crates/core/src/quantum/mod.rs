//! Joint-state dynamics and bound-state spectra.

mod airy;
mod eigen;
mod propagate;
mod state;

pub use airy::{airy_zero, bouncer_energy_scale, bouncer_levels_airy};
pub use eigen::{bisect_eigenvalue, eigensolve_fd, sturm_count, Spectrum};
pub use propagate::{propagate, Propagator, NORM_DRIFT_LIMIT};
pub use state::{
    expectations, gaussian_packet, normalize, oscillator_width, Expectations, JointState,
};

use crate::model::{BlockHamiltonian, Constants, PotentialSpec};
use crate::{Complex64, Error, Result};

pub(crate) use propagate::check_populations;

/// Analytic ground state of level `block` in a harmonic trap, centred on that
/// level's own equilibrium `x_c − g(m + E/c²)/(mω²)`.
pub fn harmonic_ground_state(
    block: &BlockHamiltonian,
    trap: &PotentialSpec,
    constants: &Constants,
) -> Result<Vec<Complex64>> {
    let PotentialSpec::Harmonic { center, omega } = *trap else {
        return Err(Error::InvalidPotential("ground state needs a harmonic trap".into()));
    };
    let stiffness = constants.m * omega * omega;
    let x_eq = center - constants.gravitating_mass(block.energy) * constants.g / stiffness;
    let sigma = oscillator_width(block.kinetic, stiffness, constants.hbar);
    Ok(gaussian_packet(&block.grid, x_eq, sigma, 0.0, constants.hbar))
}

/// Real eigenvector samples promoted to a complex wavefunction.
pub fn to_complex(real: &[f64]) -> Vec<Complex64> {
    real.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}
