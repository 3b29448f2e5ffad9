//! Classical limit of the level-`E0` block: Hamilton's equations
//!
//! ```text
//! ẋ = 2 a₀ p,   ṗ = −V₀′(x)
//! ```
//!
//! integrated with kick–drift–kick leapfrog, while the internal clock phase
//! accumulates as `φ̇ = (E0/ħ)(1 − p²/2m²c² + gx/c²)`.
//!
//! A trapped particle is stationary when the force vanishes *on its
//! trajectory*, `V₀′(x*) = 0`. The force vanishes at every `x` only for the
//! cancelling potential; [`stationary_point`] distinguishes the two cases.

use crate::model::{kinetic_coefficient, potential_profile, potential_slope, Constants, PotentialSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub x: f64,
    pub p: f64,
    /// Accumulated internal clock phase.
    pub phi: f64,
    pub t: f64,
}

impl ClassicalState {
    pub fn at_rest(x: f64) -> Self {
        Self { x, p: 0.0, phi: 0.0, t: 0.0 }
    }

    fn check_finite(self) -> Result<Self> {
        if [self.x, self.p, self.phi, self.t].iter().all(|v| v.is_finite()) {
            Ok(self)
        } else {
            Err(Error::NonFinite(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<ClassicalState>,
    pub dt: f64,
    pub record_every: usize,
    pub e0: f64,
    pub potential: PotentialSpec,
}

/// Clock-rate factor `1 − p²/(2m²c²) + gx/c²` multiplying `H₀`.
pub fn clock_rate(x: f64, p: f64, constants: &Constants) -> f64 {
    let c2 = constants.c2();
    1.0 - p * p / (2.0 * constants.m * constants.m * c2) + constants.g * x / c2
}

/// Value of the level-`E0` block Hamiltonian `a₀p² + V₀(x)`.
pub fn block_energy(
    x: f64,
    p: f64,
    e0: f64,
    spec: &PotentialSpec,
    constants: &Constants,
) -> Result<f64> {
    let a0 = kinetic_coefficient(constants.m, e0, constants.c)?;
    Ok(a0 * p * p + potential_profile(spec, constants, e0, x)?)
}

/// Where a particle with internal energy `E0` can sit still.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stationarity {
    At(f64),
    /// The force vanishes identically; every height is stationary.
    EverywhereStationary,
}

pub fn stationary_point(spec: &PotentialSpec, e0: f64, constants: &Constants) -> Result<Stationarity> {
    match *spec {
        PotentialSpec::Harmonic { center, omega } => {
            let weight = constants.gravitating_mass(e0) * constants.g;
            Ok(Stationarity::At(center - weight / (constants.m * omega * omega)))
        }
        PotentialSpec::CancellingLinear => Ok(Stationarity::EverywhereStationary),
        PotentialSpec::Zero | PotentialSpec::MassOnlyLinear | PotentialSpec::HardFloor { .. } => {
            Err(Error::NoStationaryPoint)
        }
    }
}

/// One leapfrog step of length `dt`.
///
/// Above a hard floor the force is constant, so the step is the exact
/// ballistic flow, with elastic reflection (`p → −p`) at the instant the wall
/// is reached.
pub fn hamilton_step(
    state: ClassicalState,
    e0: f64,
    spec: &PotentialSpec,
    constants: &Constants,
    dt: f64,
) -> Result<ClassicalState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt = {dt} must be positive")));
    }
    let a0 = kinetic_coefficient(constants.m, e0, constants.c)?;
    let omega0 = e0 / constants.hbar;

    let (x, p, x_mid, p_mid) = match *spec {
        PotentialSpec::HardFloor { floor } => {
            if state.x < floor {
                return Err(Error::OutOfDomain { x: state.x, floor });
            }
            let force = constants.gravitating_mass(e0) * constants.g;
            let (xm, pm) = ballistic(state.x, state.p, a0, force, floor, 0.5 * dt);
            let (x, p) = ballistic(xm, pm, a0, force, floor, 0.5 * dt);
            (x, p, xm, pm)
        }
        _ => {
            let p_half = state.p - 0.5 * dt * potential_slope(spec, constants, e0, state.x);
            let x_mid = state.x + a0 * p_half * dt;
            let x = state.x + 2.0 * a0 * p_half * dt;
            let p = p_half - 0.5 * dt * potential_slope(spec, constants, e0, x);
            (x, p, x_mid, p_half)
        }
    };

    ClassicalState {
        x,
        p,
        phi: state.phi + omega0 * clock_rate(x_mid, p_mid, constants) * dt,
        t: state.t + dt,
    }
    .check_finite()
}

/// Exact motion under constant force `force` above a reflecting wall.
fn ballistic(mut x: f64, mut p: f64, a0: f64, force: f64, floor: f64, dt: f64) -> (f64, f64) {
    let mut remaining = dt;
    // x(s) = x + 2a₀p s − a₀F s²
    for _ in 0..64 {
        let height = x - floor;
        let b = 2.0 * a0 * p;
        let hit = if force > 0.0 {
            let disc = (b * b + 4.0 * a0 * force * height).sqrt();
            Some(if b >= 0.0 {
                (b + disc) / (2.0 * a0 * force)
            } else {
                2.0 * height / (disc - b)
            })
        } else if b < 0.0 {
            Some(-height / b)
        } else {
            None
        };
        match hit {
            Some(s) if s < remaining && s.is_finite() && (s > 0.0 || p < 0.0) => {
                p = -(p - force * s);
                x = floor;
                remaining -= s;
            }
            _ => {
                x += b * remaining - a0 * force * remaining * remaining;
                p -= force * remaining;
                return (x.max(floor), p);
            }
        }
    }
    (floor, 0.0)
}

pub fn integrate(
    start: ClassicalState,
    e0: f64,
    spec: &PotentialSpec,
    constants: &Constants,
    dt: f64,
    steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be at least 1".into()));
    }
    if record_every == 0 {
        return Err(Error::InvalidInput("record_every must be at least 1".into()));
    }
    let mut states = Vec::with_capacity(steps / record_every + 1);
    states.push(start);
    let mut s = start;
    for i in 1..=steps {
        s = hamilton_step(s, e0, spec, constants, dt)?;
        if i % record_every == 0 {
            states.push(s);
        }
    }
    Ok(Trajectory {
        states,
        dt,
        record_every,
        e0,
        potential: *spec,
    })
}

impl Trajectory {
    pub fn last(&self) -> ClassicalState {
        *self.states.last().expect("trajectory always holds its start")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units() -> Constants {
        Constants::dimensionless(10.0, 1.0).unwrap()
    }

    const TRAP: PotentialSpec = PotentialSpec::Harmonic { center: 0.0, omega: 1.0 };

    #[test]
    fn clock_rate_examples() {
        let k = units();
        assert_eq!(clock_rate(0.0, 0.0, &k), 1.0);
        assert!((clock_rate(5.0, 0.0, &k) - 1.05).abs() < 1e-15);
        assert!((clock_rate(0.0, 1.0, &k) - 0.995).abs() < 1e-15);
    }

    #[test]
    fn stationary_point_examples() {
        let k = units();
        match stationary_point(&TRAP, 0.1, &k).unwrap() {
            Stationarity::At(x) => {
                assert!((x + 1.001).abs() < 1e-15);
                // force changes sign across the root
                let left = potential_slope(&TRAP, &k, 0.1, x - 1e-6);
                let right = potential_slope(&TRAP, &k, 0.1, x + 1e-6);
                assert!(left < 0.0 && right > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let free_fall = Constants::dimensionless(10.0, 0.0).unwrap();
        let centered = PotentialSpec::Harmonic { center: 5.0, omega: 1.0 };
        assert_eq!(
            stationary_point(&centered, 0.0, &free_fall).unwrap(),
            Stationarity::At(5.0)
        );
        assert_eq!(
            stationary_point(&PotentialSpec::CancellingLinear, 0.1, &k).unwrap(),
            Stationarity::EverywhereStationary
        );
        for spec in [
            PotentialSpec::Zero,
            PotentialSpec::MassOnlyLinear,
            PotentialSpec::HardFloor { floor: 0.0 },
        ] {
            assert_eq!(stationary_point(&spec, 0.1, &k), Err(Error::NoStationaryPoint));
        }
    }

    #[test]
    fn stationary_solution_is_preserved() {
        let k = units();
        let start = ClassicalState::at_rest(-1.001);
        let traj = integrate(start, 0.1, &TRAP, &k, 1e-3, 100_000, 1000).unwrap();
        for s in &traj.states {
            assert!((s.x + 1.001).abs() < 1e-9);
            assert!(s.p.abs() < 1e-9);
            assert_eq!(clock_rate(s.x, s.p, &k), 1.0 + k.g * s.x / k.c2());
        }
        let end = traj.last();
        let expected = 0.1 * (1.0 - 1.001 / 100.0) * end.t;
        assert!(((end.phi - expected) / expected).abs() < 1e-10);
    }

    #[test]
    fn free_particle_moves_uniformly() {
        let k = Constants::dimensionless(10.0, 0.0).unwrap();
        let start = ClassicalState { x: 0.0, p: 1.0, phi: 0.0, t: 0.0 };
        let traj = integrate(start, 0.0, &PotentialSpec::Zero, &k, 1e-2, 1000, 100).unwrap();
        for s in &traj.states {
            assert!((s.x - s.t).abs() < 1e-10);
            assert_eq!(s.p, 1.0);
        }
    }

    #[test]
    fn cancelling_potential_exerts_no_force() {
        let k = units();
        let start = ClassicalState { x: 3.0, p: -0.7, phi: 0.0, t: 0.0 };
        let e0 = 0.1;
        let a0 = kinetic_coefficient(k.m, e0, k.c).unwrap();
        let mut s = start;
        for _ in 0..10_000 {
            s = hamilton_step(s, e0, &PotentialSpec::CancellingLinear, &k, 1e-3).unwrap();
            assert_eq!(s.p, start.p);
            let free = start.x + 2.0 * a0 * start.p * s.t;
            assert!((s.x - free).abs() < 1e-12 * (1.0 + free.abs()));
        }
    }

    #[test]
    fn energy_drift_is_second_order() {
        let k = units();
        let e0 = 0.1;
        let start = ClassicalState::at_rest(-1.001 + 1.0);
        let h0 = block_energy(start.x, start.p, e0, &TRAP, &k).unwrap();
        let drift = |dt: f64, steps: usize| {
            let end = integrate(start, e0, &TRAP, &k, dt, steps, steps).unwrap().last();
            let h1 = block_energy(end.x, end.p, e0, &TRAP, &k).unwrap();
            ((h1 - h0) / h0).abs()
        };
        let coarse = drift(1e-3, 100_000);
        assert!(coarse < 1e-6, "relative energy drift {coarse:e}");
        // a 10× finer step must shrink the energy error by close to 100×
        let fine = drift(1e-4, 1_000_000);
        assert!(fine < coarse / 50.0 || fine < 1e-12, "fine {fine:e} coarse {coarse:e}");
    }

    #[test]
    fn bounce_period_matches_ballistic_formula() {
        let k = Constants::dimensionless(10.0, 1.0).unwrap();
        let floor = PotentialSpec::HardFloor { floor: 0.0 };
        let dt = 1e-3;
        let traj = integrate(ClassicalState::at_rest(1.0), 0.0, &floor, &k, dt, 20_000, 1).unwrap();
        // apexes: p crosses zero from above; p is linear in t between samples
        let apexes: Vec<f64> = traj
            .states
            .windows(2)
            .filter(|w| w[0].p > 0.0 && w[1].p <= 0.0)
            .map(|w| w[0].t + dt * w[0].p / (w[0].p - w[1].p))
            .collect();
        assert!(apexes.len() >= 3);
        let expected = 2.0 * 2.0_f64.sqrt();
        assert!((apexes[0] - expected).abs() < 1e-4);
        for w in apexes.windows(2) {
            assert!((w[1] - w[0] - expected).abs() < 1e-4);
        }
        assert!(traj.states.iter().all(|s| s.x >= 0.0));
    }

    #[test]
    fn leapfrog_is_time_reversible() {
        let k = units();
        let start = ClassicalState { x: 0.3, p: 0.8, phi: 0.0, t: 0.0 };
        let n = 50_000;
        let fwd = integrate(start, 0.1, &TRAP, &k, 1e-3, n, n).unwrap().last();
        let flipped = ClassicalState { p: -fwd.p, ..fwd };
        let back = integrate(flipped, 0.1, &TRAP, &k, 1e-3, n, n).unwrap().last();
        assert!((back.x - start.x).abs() < 1e-9);
        assert!((-back.p - start.p).abs() < 1e-9);
    }

    #[test]
    fn clock_phase_is_additive() {
        let k = units();
        let start = ClassicalState { x: 0.5, p: 0.2, phi: 0.0, t: 0.0 };
        let whole = integrate(start, 0.1, &TRAP, &k, 1e-3, 2000, 2000).unwrap().last();
        let half = integrate(start, 0.1, &TRAP, &k, 1e-3, 1000, 1000).unwrap().last();
        let rest = integrate(half, 0.1, &TRAP, &k, 1e-3, 1000, 1000).unwrap().last();
        assert!((whole.phi - rest.phi).abs() <= 1e-12 * whole.phi.abs());
    }

    #[test]
    fn step_errors() {
        let k = units();
        let floor = PotentialSpec::HardFloor { floor: 0.0 };
        assert!(matches!(
            hamilton_step(ClassicalState::at_rest(-1.0), 0.0, &floor, &k, 1e-3),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(hamilton_step(ClassicalState::at_rest(0.0), 0.0, &TRAP, &k, 0.0).is_err());
        let huge = ClassicalState { x: f64::MAX, p: f64::MAX, phi: 0.0, t: 0.0 };
        assert!(matches!(
            hamilton_step(huge, 0.0, &TRAP, &k, 1.0),
            Err(Error::NonFinite(_))
        ));
        assert!(integrate(ClassicalState::at_rest(0.0), 0.0, &TRAP, &k, 1e-3, 0, 1).is_err());
    }
}
