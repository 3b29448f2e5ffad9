//! Physical constants, internal-clock and trap descriptions, and assembly of
//! the per-level block Hamiltonians.
//!
//! Because `H₀` commutes with `x` and `p`, the full Hamiltonian acts on the
//! internal eigenspace with energy `E_k` as
//!
//! ```text
//! H_k = a_k p² + V_k(x)
//! a_k = 1/(2m) − E_k/(2m²c²)
//! V_k = (m + E_k/c²) g x + E_k + U_ext(x; E_k)
//! ```
//!
//! and distinct levels never couple.

use crate::numeric::compensated_sum;
use crate::{Complex64, Error, Result};

/// Fraction of the rest energy `mc²` that internal energies must stay below.
pub const LOW_ENERGY_GUARD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub c: f64,
    pub g: f64,
    pub hbar: f64,
    pub m: f64,
}

impl Constants {
    pub fn new(c: f64, g: f64, hbar: f64, m: f64) -> Result<Self> {
        let k = Self { c, g, hbar, m };
        k.validate()?;
        Ok(k)
    }

    /// Dimensionless units with `ħ = m = 1`.
    pub fn dimensionless(c: f64, g: f64) -> Result<Self> {
        Self::new(c, g, 1.0, 1.0)
    }

    /// SI values for a neutron in Earth's surface gravity.
    pub fn si_neutron() -> Self {
        Self {
            c: 299_792_458.0,
            g: 9.81,
            hbar: 1.054_571_817e-34,
            m: 1.674_927_498_04e-27,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.c, self.g, self.hbar, self.m]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidConstants("all constants must be finite".into()));
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidConstants("c must be positive".into()));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidConstants("g must be non-negative".into()));
        }
        if self.hbar <= 0.0 {
            return Err(Error::InvalidConstants("hbar must be positive".into()));
        }
        if self.m <= 0.0 {
            return Err(Error::InvalidConstants("m must be positive".into()));
        }
        Ok(())
    }

    pub fn c2(&self) -> f64 {
        self.c * self.c
    }

    /// Gravitating mass `m + E/c²` of the particle with internal energy `E`.
    pub fn gravitating_mass(&self, energy: f64) -> f64 {
        self.m + energy / self.c2()
    }

    /// Largest admissible `|E_k|`.
    pub fn energy_limit(&self) -> f64 {
        LOW_ENERGY_GUARD * self.m * self.c2()
    }

    pub fn check_energy(&self, energy: f64) -> Result<()> {
        let limit = self.energy_limit();
        if !energy.is_finite() || energy.abs() >= limit {
            return Err(Error::ApproximationBreach {
                energy: energy.abs(),
                limit,
            });
        }
        Ok(())
    }
}

/// Internal Hamiltonian in its eigenbasis plus the initial internal amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalClockSpec {
    levels: Vec<f64>,
    amplitudes: Vec<Complex64>,
}

impl InternalClockSpec {
    pub fn new(levels: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidClock("at least one level is required".into()));
        }
        if levels.len() != amplitudes.len() {
            return Err(Error::InvalidClock(format!(
                "{} amplitudes given for {} levels",
                amplitudes.len(),
                levels.len()
            )));
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidClock("levels must be finite".into()));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidClock("levels must be strictly increasing".into()));
        }
        let weight: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (weight - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidClock(format!(
                "amplitudes have total weight {weight}, expected 1"
            )));
        }
        Ok(Self { levels, amplitudes })
    }

    /// Equal-weight real superposition of the given levels.
    pub fn equal_superposition(levels: Vec<f64>) -> Result<Self> {
        let a = Complex64::new(1.0 / (levels.len() as f64).sqrt(), 0.0);
        let amplitudes = vec![a; levels.len()];
        Self::new(levels, amplitudes)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Checks the low-energy guard against `constants`.
    pub fn validate_against(&self, constants: &Constants) -> Result<()> {
        self.levels.iter().try_for_each(|&e| constants.check_energy(e))
    }
}

/// External potential `U_ext`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    Zero,
    /// `U = −mgx`: cancels the Newtonian weight only.
    MassOnlyLinear,
    /// `U = −(m + E_k/c²)gx`: cancels every position dependence.
    CancellingLinear,
    /// `U = ½mω²(x − center)²`.
    Harmonic { center: f64, omega: f64 },
    /// Impenetrable floor: `U = ∞` below `floor`, zero above.
    HardFloor { floor: f64 },
}

impl PotentialSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::Zero => "zero",
            PotentialSpec::MassOnlyLinear => "mass_only_linear",
            PotentialSpec::CancellingLinear => "cancelling_linear",
            PotentialSpec::Harmonic { .. } => "harmonic",
            PotentialSpec::HardFloor { .. } => "hard_floor",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialSpec::Harmonic { center, omega } => {
                if !center.is_finite() {
                    return Err(Error::InvalidPotential("harmonic center must be finite".into()));
                }
                if !(omega > 0.0 && omega.is_finite()) {
                    return Err(Error::InvalidPotential("harmonic omega must be positive".into()));
                }
            }
            PotentialSpec::HardFloor { floor } if !floor.is_finite() => {
                return Err(Error::InvalidPotential("floor must be finite".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// The same potential moved up by `shift`.
    pub fn translated(&self, shift: f64) -> Self {
        match *self {
            PotentialSpec::Harmonic { center, omega } => PotentialSpec::Harmonic {
                center: center + shift,
                omega,
            },
            PotentialSpec::HardFloor { floor } => PotentialSpec::HardFloor {
                floor: floor + shift,
            },
            other => other,
        }
    }

    /// `U_ext(x; E)`; `None` below a hard floor.
    pub fn external(&self, constants: &Constants, energy: f64, x: f64) -> Option<f64> {
        match *self {
            PotentialSpec::Zero => Some(0.0),
            PotentialSpec::MassOnlyLinear => Some(-(constants.m * constants.g * x)),
            PotentialSpec::CancellingLinear => {
                Some(-(constants.gravitating_mass(energy) * constants.g * x))
            }
            PotentialSpec::Harmonic { center, omega } => {
                let d = x - center;
                Some(0.5 * constants.m * omega * omega * d * d)
            }
            PotentialSpec::HardFloor { floor } => (x >= floor).then_some(0.0),
        }
    }

    /// `dU_ext/dx` (above the floor for `HardFloor`).
    pub fn external_slope(&self, constants: &Constants, energy: f64, x: f64) -> f64 {
        match *self {
            PotentialSpec::Zero | PotentialSpec::HardFloor { .. } => 0.0,
            PotentialSpec::MassOnlyLinear => -(constants.m * constants.g),
            PotentialSpec::CancellingLinear => -(constants.gravitating_mass(energy) * constants.g),
            PotentialSpec::Harmonic { center, omega } => {
                constants.m * omega * omega * (x - center)
            }
        }
    }
}

/// Uniform periodic sampling `x_i = x_min + i·dx`, `i = 0..n`, `dx = (x_max − x_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let grid = Self { x_min, x_max, n };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) {
            return Err(Error::GridInvalid("bounds must be finite".into()));
        }
        if self.x_max <= self.x_min {
            return Err(Error::GridInvalid("x_max must exceed x_min".into()));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::GridInvalid(format!(
                "n = {} must be a power of two and at least 8",
                self.n
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Discrete wavenumbers in FFT order: `0, 1, …, n/2 − 1, −n/2, …, −1` times `2π/L`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * std::f64::consts::PI / self.length();
        let half = self.n / 2;
        (0..self.n)
            .map(|j| {
                if j < half {
                    j as f64 * dk
                } else {
                    (j as f64 - self.n as f64) * dk
                }
            })
            .collect()
    }

    /// Index of the last grid point at or below `x`.
    pub fn index_at_or_below(&self, x: f64) -> Option<usize> {
        if x < self.x_min || x >= self.x_max {
            return None;
        }
        let i = ((x - self.x_min) / self.dx()).floor() as usize;
        // guard against rounding across a node
        let i = if self.x(i) > x { i.saturating_sub(1) } else { i };
        Some(i.min(self.n - 1))
    }
}

/// External Hamiltonian `a p² + V(x)` acting on one internal level.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHamiltonian {
    pub level: usize,
    pub energy: f64,
    pub kinetic: f64,
    /// `V_k` at each grid point; `+∞` at and below a hard floor.
    pub potential: Vec<f64>,
    /// Grid index of the Dirichlet wall. Amplitudes at indices `<= floor` vanish.
    pub floor: Option<usize>,
    pub grid: Grid1D,
    pub hbar: f64,
}

impl BlockHamiltonian {
    /// First index carrying a free amplitude.
    pub fn first_active(&self) -> usize {
        self.floor.map_or(0, |f| f + 1)
    }

    /// True when `V` is the same everywhere, to within `tol`.
    pub fn potential_spread(&self) -> f64 {
        let (lo, hi) = self
            .potential
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }
}

pub fn kinetic_coefficient(m: f64, energy: f64, c: f64) -> Result<f64> {
    let limit = LOW_ENERGY_GUARD * m * c * c;
    if !energy.is_finite() || energy.abs() >= limit {
        return Err(Error::ApproximationBreach {
            energy: energy.abs(),
            limit,
        });
    }
    Ok(1.0 / (2.0 * m) - energy / (2.0 * m * m * c * c))
}

/// `V_k(x) = (m + E_k/c²)gx + E_k + U_ext(x; E_k)`.
///
/// Summed with compensation, so the cancelling potential yields `E_k` exactly.
pub fn potential_profile(
    spec: &PotentialSpec,
    constants: &Constants,
    energy: f64,
    x: f64,
) -> Result<f64> {
    let gravity = constants.gravitating_mass(energy) * constants.g * x;
    let external = spec.external(constants, energy, x).ok_or_else(|| match *spec {
        PotentialSpec::HardFloor { floor } => Error::OutOfDomain { x, floor },
        _ => unreachable!("only the hard floor has a forbidden region"),
    })?;
    Ok(compensated_sum(&[gravity, energy, external]))
}

/// `dV_k/dx`; identically zero for the cancelling potential.
pub fn potential_slope(spec: &PotentialSpec, constants: &Constants, energy: f64, x: f64) -> f64 {
    let gravity = constants.gravitating_mass(energy) * constants.g;
    gravity + spec.external_slope(constants, energy, x)
}

pub fn build_blocks(
    clock: &InternalClockSpec,
    spec: &PotentialSpec,
    constants: &Constants,
    grid: &Grid1D,
) -> Result<Vec<BlockHamiltonian>> {
    constants.validate()?;
    grid.validate()?;
    spec.validate()?;
    clock.validate_against(constants)?;

    let floor = match *spec {
        PotentialSpec::HardFloor { floor } => {
            let idx = grid.index_at_or_below(floor).ok_or_else(|| {
                Error::InvalidPotential(format!(
                    "floor {floor} outside the grid [{}, {})",
                    grid.x_min, grid.x_max
                ))
            })?;
            if idx + 2 >= grid.n {
                return Err(Error::InvalidPotential("floor leaves no room above it".into()));
            }
            Some(idx)
        }
        _ => None,
    };

    clock
        .levels()
        .iter()
        .enumerate()
        .map(|(level, &energy)| {
            let kinetic = kinetic_coefficient(constants.m, energy, constants.c)?;
            let potential = (0..grid.n)
                .map(|i| match floor {
                    Some(f) if i <= f => f64::INFINITY,
                    _ => potential_profile(spec, constants, energy, grid.x(i))
                        .unwrap_or(f64::INFINITY),
                })
                .collect();
            Ok(BlockHamiltonian {
                level,
                energy,
                kinetic,
                potential,
                floor,
                grid: *grid,
                hbar: constants.hbar,
            })
        })
        .collect()
}
