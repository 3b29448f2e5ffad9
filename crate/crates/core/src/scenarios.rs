//! Config-driven experiments.
//!
//! Every scenario builds per-level block Hamiltonians from a
//! [`ScenarioConfig`], evolves one or two joint states, records observables
//! every `record_every` steps and compares the outcome with a closed form.
//! Clock phases are read from the internal coherences `arg ρ_0k`, unwrapped
//! over the recorded samples, so the sampling interval must keep the phase
//! advance per sample below π.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::model::{build_blocks, BlockHamiltonian, Constants, Grid1D, InternalClockSpec, PotentialSpec};
use crate::numeric::{first_sign_change, linear_fit, PhaseUnwrapper};
use crate::observables::{
    analytic_redshift, analytic_visibility, analytic_visibility_zero, redshift_from_phases,
    reduced_internal, visibility,
};
use crate::quantum::{
    check_populations, eigensolve_fd, expectations, gaussian_packet, harmonic_ground_state,
    to_complex, JointState, Propagator,
};
use crate::{Complex64, Error, Result};

/// Largest potential variation a block may have and still count as free.
pub const FREE_SPREAD_LIMIT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    FixedHeightClocks,
    CancellationControl,
    BouncerClock,
    MovingClock,
    SuperpositionInterference,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::FixedHeightClocks,
        ScenarioKind::CancellationControl,
        ScenarioKind::BouncerClock,
        ScenarioKind::MovingClock,
        ScenarioKind::SuperpositionInterference,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::FixedHeightClocks => "fixed_height_clocks",
            ScenarioKind::CancellationControl => "cancellation_control",
            ScenarioKind::BouncerClock => "bouncer_clock",
            ScenarioKind::MovingClock => "moving_clock",
            ScenarioKind::SuperpositionInterference => "superposition_interference",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// How the external wavefunction of each level is prepared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialState {
    /// `LevelGround` in a harmonic trap, `Eigen` above a hard floor, `Product` otherwise.
    Auto,
    /// One Gaussian packet (`sigma`, `p0`) shared by every level.
    Product,
    /// Each level in the analytic ground state of its own harmonic block.
    LevelGround,
    /// Each level in finite-difference eigenstate `eigenstates[0]` of its own block.
    Eigen,
}

impl InitialState {
    pub const ALL: [InitialState; 4] = [
        InitialState::Auto,
        InitialState::Product,
        InitialState::LevelGround,
        InitialState::Eigen,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InitialState::Auto => "auto",
            InitialState::Product => "product",
            InitialState::LevelGround => "level_ground",
            InitialState::Eigen => "eigen",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute, measured against `gΔx/c²`.
    pub redshift: f64,
    /// Absolute, on the shift between clocks in a cancelling potential.
    pub null_shift: f64,
    /// On `1 − |⟨ψ_ref|ψ⟩|`.
    pub fidelity: f64,
    /// Absolute, on the largest excursion of `mean_x`.
    pub mean_x_drift: f64,
    /// Relative, on inter-level frequency shifts.
    pub frequency: f64,
    /// Absolute, pointwise on the visibility curve.
    pub visibility: f64,
    /// Relative, on the first visibility zero.
    pub zero_time: f64,
    /// Absolute, on the moving-clock rate deficit.
    pub deficit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            redshift: 1e-4,
            null_shift: 1e-10,
            fidelity: 1e-10,
            mean_x_drift: 1e-8,
            frequency: 1e-3,
            visibility: 1e-4,
            zero_time: 1e-3,
            deficit: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub constants: Constants,
    pub clock: InternalClockSpec,
    pub potential: PotentialSpec,
    pub grid: Grid1D,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    /// Height difference between the two clocks or branches.
    pub separation: f64,
    /// Centre of the lower product packet.
    pub x0: f64,
    pub sigma: f64,
    pub p0: f64,
    pub initial: InitialState,
    /// 1-based eigenstate indices: the bouncer compares both, other kinds use the first.
    pub eigenstates: [usize; 2],
    pub tolerances: Tolerances,
}

impl ScenarioConfig {
    /// A config with every optional field at its default.
    pub fn new(
        kind: ScenarioKind,
        constants: Constants,
        clock: InternalClockSpec,
        potential: PotentialSpec,
        grid: Grid1D,
    ) -> Self {
        Self {
            kind,
            constants,
            clock,
            potential,
            grid,
            dt: 1e-3,
            steps: 1000,
            record_every: 10,
            separation: 0.0,
            x0: 0.0,
            sigma: 1.0,
            p0: 0.0,
            initial: InitialState::Auto,
            eigenstates: [1, 2],
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.grid.validate()?;
        self.potential.validate()?;
        self.clock.validate_against(&self.constants)?;
        if self.clock.len() < 2 {
            return Err(Error::config("clock.levels", "a clock needs at least two levels"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("evolution.dt", "must be positive and finite"));
        }
        if self.record_every == 0 {
            return Err(Error::config("evolution.record_every", "must be at least 1"));
        }
        if self.steps == 0 || self.steps % self.record_every != 0 {
            return Err(Error::config(
                "evolution.steps",
                "must be a positive multiple of record_every",
            ));
        }
        for (field, v) in [
            ("scenario.separation", self.separation),
            ("scenario.x0", self.x0),
            ("scenario.p0", self.p0),
        ] {
            if !v.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::config("scenario.sigma", "must be positive"));
        }
        if self.eigenstates.contains(&0) {
            return Err(Error::config("scenario.eigenstates", "indices start at 1"));
        }
        let t = &self.tolerances;
        let all_tol = [
            t.redshift,
            t.null_shift,
            t.fidelity,
            t.mean_x_drift,
            t.frequency,
            t.visibility,
            t.zero_time,
            t.deficit,
        ];
        if all_tol.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::config("scenario.tolerances", "must be finite and non-negative"));
        }

        let floor = matches!(self.potential, PotentialSpec::HardFloor { .. });
        let initial = self.resolved_initial();
        if initial == InitialState::LevelGround && !matches!(self.potential, PotentialSpec::Harmonic { .. }) {
            return Err(Error::config("scenario.initial", "level_ground needs a harmonic trap"));
        }
        if initial == InitialState::Product && floor {
            return Err(Error::config("scenario.initial", "a hard floor needs eigen initial states"));
        }
        match self.kind {
            ScenarioKind::CancellationControl if self.potential != PotentialSpec::CancellingLinear => {
                Err(Error::config("potential.kind", "cancellation_control needs cancelling_linear"))
            }
            ScenarioKind::BouncerClock => {
                if !floor {
                    return Err(Error::config("potential.kind", "bouncer_clock needs hard_floor"));
                }
                if initial != InitialState::Eigen {
                    return Err(Error::config("scenario.initial", "bouncer_clock starts in eigenstates"));
                }
                if self.eigenstates[0] == self.eigenstates[1] {
                    return Err(Error::config("scenario.eigenstates", "the two states must differ"));
                }
                Ok(())
            }
            ScenarioKind::MovingClock if initial != InitialState::Product => {
                Err(Error::config("scenario.initial", "moving_clock needs a product packet"))
            }
            ScenarioKind::SuperpositionInterference => {
                if !matches!(self.potential, PotentialSpec::Harmonic { .. }) {
                    return Err(Error::config(
                        "potential.kind",
                        "superposition_interference needs a harmonic trap per branch",
                    ));
                }
                if self.separation <= 0.0 {
                    return Err(Error::config("scenario.separation", "must be positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn resolved_initial(&self) -> InitialState {
        match (self.initial, self.potential) {
            (InitialState::Auto, PotentialSpec::Harmonic { .. }) => InitialState::LevelGround,
            (InitialState::Auto, PotentialSpec::HardFloor { .. }) => InitialState::Eigen,
            (InitialState::Auto, _) => InitialState::Product,
            (explicit, _) => explicit,
        }
    }

    /// Energy gap between the two lowest clock levels.
    pub fn clock_gap(&self) -> f64 {
        self.clock.levels()[1] - self.clock.levels()[0]
    }

    /// Total evolution time `steps·dt`.
    pub fn duration(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// The fixed-height config paired with its cancellation control (or back),
    /// identical except for the kind and `potential`.
    pub fn counterpart(&self, potential: PotentialSpec) -> Option<Self> {
        let kind = match self.kind {
            ScenarioKind::FixedHeightClocks => ScenarioKind::CancellationControl,
            ScenarioKind::CancellationControl => ScenarioKind::FixedHeightClocks,
            _ => return None,
        };
        Some(Self {
            kind,
            potential,
            ..self.clone()
        })
    }

    /// Names of the fields in which `self` and `other` differ.
    pub fn differing_fields(&self, other: &Self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut note = |name, differs: bool| {
            if differs {
                out.push(name);
            }
        };
        note("kind", self.kind != other.kind);
        note("constants", self.constants != other.constants);
        note("clock", self.clock != other.clock);
        note("potential", self.potential != other.potential);
        note("grid", self.grid != other.grid);
        note("dt", self.dt != other.dt);
        note("steps", self.steps != other.steps);
        note("record_every", self.record_every != other.record_every);
        note("separation", self.separation != other.separation);
        note("x0", self.x0 != other.x0);
        note("sigma", self.sigma != other.sigma);
        note("p0", self.p0 != other.p0);
        note("initial", self.initial != other.initial);
        note("eigenstates", self.eigenstates != other.eigenstates);
        note("tolerances", self.tolerances != other.tolerances);
        out
    }
}

/// Observables at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub norm: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub purity: f64,
    /// `2|ρ_01|`.
    pub visibility: f64,
    /// Unwrapped `arg ρ_0k` for k = 1..d.
    pub phases: Vec<f64>,
    pub populations: Vec<f64>,
}

/// Time series of one simulated clock.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub label: String,
    pub samples: Vec<Sample>,
}

impl Run {
    fn final_phase(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.phases[0])
    }

    fn mean_x_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return f64::NAN;
        };
        self.samples
            .iter()
            .fold(0.0_f64, |a, s| a.max((s.mean_x - first.mean_x).abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub relative: bool,
    pub passed: bool,
}

impl Check {
    pub fn absolute(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        let passed = (measured - expected).abs() <= tolerance;
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            relative: false,
            passed,
        }
    }

    pub fn relative(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        let passed = ((measured - expected) / expected).abs() <= tolerance;
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            relative: true,
            passed,
        }
    }

    /// `|measured − expected|`, divided by `|expected|` for relative checks.
    pub fn deviation(&self) -> f64 {
        let d = (self.measured - self.expected).abs();
        if self.relative {
            d / self.expected.abs()
        } else {
            d
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub kind: ScenarioKind,
    pub runs: Vec<Run>,
    /// Ordered summary scalars.
    pub summary: Vec<(String, f64)>,
    pub checks: Vec<Check>,
}

impl ScenarioResult {
    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    match cfg.kind {
        ScenarioKind::FixedHeightClocks | ScenarioKind::CancellationControl => two_heights(cfg),
        ScenarioKind::BouncerClock => bouncer(cfg),
        ScenarioKind::MovingClock => moving(cfg),
        ScenarioKind::SuperpositionInterference => superposition(cfg),
    }
}

/// Exact evolution under position-independent blocks: one spectral
/// multiplication by `exp(−i(aħκ² + V/ħ)t)` per level.
pub fn free_reference_evolution(
    state: &JointState,
    blocks: &[BlockHamiltonian],
    dt: f64,
    steps: usize,
) -> Result<JointState> {
    state.check_blocks(blocks)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt = {dt} must be positive")));
    }
    for b in blocks {
        let spread = b.potential_spread();
        if !(spread <= FREE_SPREAD_LIMIT) {
            return Err(Error::NotFree {
                level: b.level,
                spread,
            });
        }
    }
    if steps == 0 {
        return Ok(state.clone());
    }
    let t = dt * steps as f64;
    let grid = state.grid;
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(grid.n);
    let inverse = planner.plan_fft_inverse(grid.n);
    let kappa = grid.wavenumbers();
    let scale = 1.0 / grid.n as f64;
    let mut out = state.clone();
    for (psi, b) in out.psi.iter_mut().zip(blocks) {
        let v = b.potential[0];
        forward.process(psi);
        for (amp, k) in psi.iter_mut().zip(&kappa) {
            let phase = b.kinetic * b.hbar * k * k * t + v * t / b.hbar;
            *amp *= Complex64::from_polar(scale, -phase);
        }
        inverse.process(psi);
    }
    out.t = state.t + t;
    Ok(out)
}

struct Recorder {
    hbar: f64,
    unwrappers: Vec<PhaseUnwrapper>,
    samples: Vec<Sample>,
}

impl Recorder {
    fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            hbar: cfg.constants.hbar,
            unwrappers: vec![PhaseUnwrapper::new(); cfg.clock.len() - 1],
            samples: Vec::with_capacity(cfg.steps / cfg.record_every + 1),
        }
    }

    fn record(&mut self, state: &JointState) -> Result<()> {
        let e = expectations(state, self.hbar);
        let rho = reduced_internal(state);
        let phases = self
            .unwrappers
            .iter_mut()
            .enumerate()
            .map(|(i, u)| u.push(rho.get(0, i + 1).arg()))
            .collect();
        self.samples.push(Sample {
            t: state.t,
            norm: e.norm,
            mean_x: e.mean_x,
            mean_p: e.mean_p,
            purity: rho.purity(),
            visibility: visibility(&rho, 0, 1)?,
            phases,
            populations: e.level_populations,
        });
        Ok(())
    }

    fn into_run(self, label: &str) -> Run {
        Run {
            label: label.into(),
            samples: self.samples,
        }
    }
}

/// Initial joint state for one clock whose trap is `potential` and whose
/// product packet sits at `center`.
fn initial_state(
    cfg: &ScenarioConfig,
    blocks: &[BlockHamiltonian],
    potential: &PotentialSpec,
    center: f64,
    eigenstate: usize,
) -> Result<JointState> {
    let amps = cfg.clock.amplitudes();
    match cfg.resolved_initial() {
        InitialState::Product | InitialState::Auto => {
            let packet = gaussian_packet(&cfg.grid, center, cfg.sigma, cfg.p0, cfg.constants.hbar);
            JointState::product(cfg.grid, amps, &packet)
        }
        InitialState::LevelGround => {
            let packets = blocks
                .iter()
                .map(|b| harmonic_ground_state(b, potential, &cfg.constants))
                .collect::<Result<Vec<_>>>()?;
            JointState::correlated(cfg.grid, amps, &packets)
        }
        InitialState::Eigen => {
            let packets = blocks
                .iter()
                .map(|b| {
                    let spectrum = eigensolve_fd(b, eigenstate)?;
                    Ok(to_complex(&spectrum.wavefunctions[eigenstate - 1]))
                })
                .collect::<Result<Vec<_>>>()?;
            JointState::correlated(cfg.grid, amps, &packets)
        }
    }
}

struct ClockRun {
    run: Run,
    initial: JointState,
    last: JointState,
    blocks: Vec<BlockHamiltonian>,
}

fn clock_run(
    cfg: &ScenarioConfig,
    label: &str,
    potential: PotentialSpec,
    center: f64,
    eigenstate: usize,
) -> Result<ClockRun> {
    let blocks = build_blocks(&cfg.clock, &potential, &cfg.constants, &cfg.grid)?;
    let initial = initial_state(cfg, &blocks, &potential, center, eigenstate)?;
    let propagator = Propagator::new(&blocks, cfg.dt)?;
    let before: Vec<f64> = (0..initial.levels()).map(|k| initial.level_population(k)).collect();
    let mut recorder = Recorder::new(cfg);
    let mut state = initial.clone();
    recorder.record(&state)?;
    for _ in 0..cfg.steps / cfg.record_every {
        propagator.advance(&mut state, cfg.record_every);
        recorder.record(&state)?;
    }
    check_populations(&state, &before)?;
    Ok(ClockRun {
        run: recorder.into_run(label),
        initial,
        last: state,
        blocks,
    })
}

fn summary(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Two clocks at heights `Δx` apart, each in its own copy of the potential.
fn two_heights(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let n = cfg.eigenstates[0];
    let low = clock_run(cfg, "low", cfg.potential, cfg.x0, n)?;
    let high = clock_run(
        cfg,
        "high",
        cfg.potential.translated(cfg.separation),
        cfg.x0 + cfg.separation,
        n,
    )?;
    let z = redshift_from_phases(
        low.run.final_phase(),
        high.run.final_phase(),
        cfg.clock_gap(),
        cfg.duration(),
        &cfg.constants,
    )?;
    let tol = &cfg.tolerances;
    let (expected, checks, mut extra) = if cfg.kind == ScenarioKind::CancellationControl {
        let mut fidelities = Vec::new();
        for clock in [&low, &high] {
            let reference = free_reference_evolution(&clock.initial, &clock.blocks, cfg.dt, cfg.steps)?;
            fidelities.push(reference.fidelity(&clock.last)?);
        }
        let worst = fidelities.iter().fold(f64::INFINITY, |a, &f| a.min(f));
        (
            0.0,
            vec![
                Check::absolute("redshift", z, 0.0, tol.null_shift),
                Check::absolute("fidelity", worst, 1.0, tol.fidelity),
            ],
            vec![("fidelity_low", fidelities[0]), ("fidelity_high", fidelities[1])],
        )
    } else {
        let expected = analytic_redshift(cfg.separation, &cfg.constants);
        (
            expected,
            vec![Check::absolute("redshift", z, expected, tol.redshift)],
            Vec::new(),
        )
    };
    let mut pairs = vec![
        ("redshift_measured", z),
        ("redshift_expected", expected),
        ("redshift_deviation", z - expected),
        ("phase_low", low.run.final_phase()),
        ("phase_high", high.run.final_phase()),
    ];
    pairs.append(&mut extra);
    Ok(ScenarioResult {
        kind: cfg.kind,
        runs: vec![low.run, high.run],
        summary: summary(&pairs),
        checks,
    })
}

/// `Σ x ψ² dx` and the finite-difference `⟨p²⟩ = ħ² Σ (ψ_{i+1} − ψ_i)²/dx`
/// of a real eigenvector that vanishes beyond both ends of the grid.
fn eigen_moments(psi: &[f64], grid: &Grid1D, hbar: f64) -> (f64, f64) {
    let dx = grid.dx();
    let mean_x = psi
        .iter()
        .enumerate()
        .map(|(i, v)| grid.x(i) * v * v)
        .sum::<f64>()
        * dx;
    let mut prev = 0.0;
    let mut sum = 0.0;
    for &v in psi.iter().chain(std::iter::once(&0.0)) {
        sum += (v - prev) * (v - prev);
        prev = v;
    }
    (mean_x, hbar * hbar * sum / dx)
}

/// The clock in bouncer eigenstates `n1` and `n2`. The frequency shift
/// between the two runs is compared with the gravitational term alone and
/// with the full first-order shift, which adds the kinetic `−⟨p²⟩/2m²c²`.
fn bouncer(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let [n1, n2] = cfg.eigenstates;
    let a = clock_run(cfg, &format!("n{n1}"), cfg.potential, cfg.x0, n1)?;
    let b = clock_run(cfg, &format!("n{n2}"), cfg.potential, cfg.x0, n2)?;
    let measured = redshift_from_phases(
        a.run.final_phase(),
        b.run.final_phase(),
        cfg.clock_gap(),
        cfg.duration(),
        &cfg.constants,
    )?;

    let spectrum = eigensolve_fd(&a.blocks[0], n1.max(n2))?;
    let k = &cfg.constants;
    let (x1, p1) = eigen_moments(&spectrum.wavefunctions[n1 - 1], &cfg.grid, k.hbar);
    let (x2, p2) = eigen_moments(&spectrum.wavefunctions[n2 - 1], &cfg.grid, k.hbar);
    let gravity_only = k.g * (x2 - x1) / k.c2();
    let first_order = gravity_only - (p2 - p1) / (2.0 * k.m * k.m * k.c2());
    let drift = a.run.mean_x_drift().max(b.run.mean_x_drift());

    let tol = &cfg.tolerances;
    let checks = vec![
        Check::absolute("mean_x_drift", drift, 0.0, tol.mean_x_drift),
        Check::relative("shift_gravity_only", measured, gravity_only, tol.frequency),
        Check::relative("shift_first_order", measured, first_order, tol.frequency),
    ];
    let pairs = [
        ("mean_x_n1", x1),
        ("mean_x_n2", x2),
        ("p2_n1", p1),
        ("p2_n2", p2),
        ("mean_x_drift", drift),
        ("shift_measured", measured),
        ("shift_gravity_only", gravity_only),
        ("shift_first_order", first_order),
        ("ratio_to_gravity_only", measured / gravity_only),
    ];
    Ok(ScenarioResult {
        kind: cfg.kind,
        runs: vec![a.run, b.run],
        summary: summary(&pairs),
        checks,
    })
}

/// A free packet with mean momentum `p0`: the coherence phase advances at
/// `(ΔE/ħ)(1 − D)` with deficit `D = ⟨p²⟩/2m²c²`.
fn moving(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let clock = clock_run(cfg, "clock", cfg.potential, cfg.x0, cfg.eigenstates[0])?;
    let t: Vec<f64> = clock.run.samples.iter().map(|s| s.t).collect();
    let phi: Vec<f64> = clock.run.samples.iter().map(|s| s.phases[0]).collect();
    let (_, slope) = linear_fit(&t, &phi);
    let k = &cfg.constants;
    let deficit = 1.0 - slope * k.hbar / cfg.clock_gap();
    let scale = 2.0 * k.m * k.m * k.c2();
    let expected = cfg.p0 * cfg.p0 / scale;
    let sigma_p = k.hbar / (2.0 * cfg.sigma);
    let pairs = [
        ("deficit_measured", deficit),
        ("deficit_expected", expected),
        ("deficit_with_spread", (cfg.p0 * cfg.p0 + sigma_p * sigma_p) / scale),
        ("phase_rate", slope),
    ];
    Ok(ScenarioResult {
        kind: cfg.kind,
        runs: vec![clock.run],
        summary: summary(&pairs),
        checks: vec![Check::absolute("deficit", deficit, expected, cfg.tolerances.deficit)],
    })
}

/// The clock split over two traps `Δx` apart. Each branch evolves in its own
/// trap; the recorded state is their equal-weight sum, which is exact while
/// the branches do not overlap.
fn superposition(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let n = cfg.eigenstates[0];
    let potentials = [cfg.potential, cfg.potential.translated(cfg.separation)];
    let centers = [cfg.x0, cfg.x0 + cfg.separation];
    let mut branches = Vec::with_capacity(2);
    let mut propagators = Vec::with_capacity(2);
    let mut before = Vec::with_capacity(2);
    for (potential, center) in potentials.iter().zip(centers) {
        let blocks = build_blocks(&cfg.clock, potential, &cfg.constants, &cfg.grid)?;
        let state = initial_state(cfg, &blocks, potential, center, n)?;
        before.push((0..state.levels()).map(|k| state.level_population(k)).collect::<Vec<_>>());
        propagators.push(Propagator::new(&blocks, cfg.dt)?);
        branches.push(state);
    }

    let gap = cfg.clock_gap();
    let weight = std::f64::consts::FRAC_1_SQRT_2;
    let mut recorder = Recorder::new(cfg);
    let mut relative = PhaseUnwrapper::new();
    let mut times = Vec::new();
    let mut rel_phase = Vec::new();
    let mut worst = 0.0_f64;
    loop {
        let combined = JointState {
            grid: cfg.grid,
            psi: branches[0]
                .psi
                .iter()
                .zip(&branches[1].psi)
                .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u + v) * weight).collect())
                .collect(),
            t: branches[0].t,
        };
        recorder.record(&combined)?;
        let sample = recorder.samples.last().expect("just recorded");
        let analytic = analytic_visibility(gap, cfg.separation, combined.t, &cfg.constants);
        worst = worst.max((sample.visibility - analytic).abs());
        let c_low = reduced_internal(&branches[0]).get(0, 1);
        let c_high = reduced_internal(&branches[1]).get(0, 1);
        times.push(combined.t);
        rel_phase.push(relative.push((c_high * c_low.conj()).arg()));
        if times.len() > cfg.steps / cfg.record_every {
            break;
        }
        for (p, s) in propagators.iter().zip(branches.iter_mut()) {
            p.advance(s, cfg.record_every);
        }
    }
    for (state, pops) in branches.iter().zip(&before) {
        check_populations(state, pops)?;
    }

    let half_cos: Vec<f64> = rel_phase.iter().map(|p| (0.5 * p).cos()).collect();
    let past_revival: Vec<f64> = rel_phase.iter().map(|p| p.abs() - 2.0 * PI).collect();
    let zero = first_sign_change(&times, &half_cos).unwrap_or(f64::NAN);
    let revival = first_sign_change(&times, &past_revival).unwrap_or(f64::NAN);
    let zero_expected = analytic_visibility_zero(gap, cfg.separation, &cfg.constants);
    let tol = &cfg.tolerances;
    let pairs = [
        ("visibility_max_deviation", worst),
        ("zero_time_measured", zero),
        ("zero_time_expected", zero_expected),
        ("revival_time_measured", revival),
        ("revival_time_expected", 2.0 * zero_expected),
        ("relative_phase_final", rel_phase.last().copied().unwrap_or(f64::NAN)),
    ];
    Ok(ScenarioResult {
        kind: cfg.kind,
        runs: vec![recorder.into_run("clock")],
        summary: summary(&pairs),
        checks: vec![
            Check::absolute("visibility", worst, 0.0, tol.visibility),
            Check::relative("visibility_zero", zero, zero_expected, tol.zero_time),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dimless(c: f64, g: f64) -> Constants {
        Constants::dimensionless(c, g).unwrap()
    }

    fn clock(levels: Vec<f64>) -> InternalClockSpec {
        InternalClockSpec::equal_superposition(levels).unwrap()
    }

    fn fixed_height() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::new(
            ScenarioKind::FixedHeightClocks,
            dimless(10.0, 1.0),
            clock(vec![0.0, 0.1]),
            PotentialSpec::Harmonic { center: 0.0, omega: 1.0 },
            Grid1D::new(-16.0, 16.0, 512).unwrap(),
        );
        cfg.separation = 5.0;
        cfg.steps = 2000;
        cfg
    }

    #[test]
    fn kind_and_initial_names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(ScenarioKind::from_name(k.name()), Some(k));
        }
        for s in InitialState::ALL {
            assert_eq!(InitialState::from_name(s.name()), Some(s));
        }
        assert_eq!(ScenarioKind::from_name("bogus"), None);
    }

    #[test]
    fn validation_names_fields() {
        let field_of = |cfg: &ScenarioConfig| match cfg.validate() {
            Err(Error::ConfigInvalid { field, .. }) => field,
            other => panic!("expected ConfigInvalid, got {other:?}"),
        };
        let mut cfg = fixed_height();
        cfg.steps = 1005;
        assert_eq!(field_of(&cfg), "evolution.steps");
        let mut cfg = fixed_height();
        cfg.clock = clock(vec![0.1]);
        assert_eq!(field_of(&cfg), "clock.levels");
        let mut cfg = fixed_height();
        cfg.kind = ScenarioKind::BouncerClock;
        assert_eq!(field_of(&cfg), "potential.kind");
        let mut cfg = fixed_height();
        cfg.kind = ScenarioKind::CancellationControl;
        assert_eq!(field_of(&cfg), "potential.kind");
        let mut cfg = fixed_height();
        cfg.potential = PotentialSpec::Zero;
        cfg.initial = InitialState::LevelGround;
        assert_eq!(field_of(&cfg), "scenario.initial");
        let mut cfg = fixed_height();
        cfg.sigma = 0.0;
        assert_eq!(field_of(&cfg), "scenario.sigma");
        let mut cfg = fixed_height();
        cfg.clock = clock(vec![0.0, 20.0]);
        assert!(matches!(cfg.validate(), Err(Error::ApproximationBreach { .. })));
    }

    #[test]
    fn counterpart_differs_only_in_potential() {
        let fixed = fixed_height();
        let control = fixed.counterpart(PotentialSpec::CancellingLinear).unwrap();
        assert_eq!(control.kind, ScenarioKind::CancellationControl);
        assert_eq!(fixed.differing_fields(&control), vec!["kind", "potential"]);
        control.validate().unwrap();
        let back = control.counterpart(fixed.potential).unwrap();
        assert_eq!(back, fixed);
        let mut moving = fixed.clone();
        moving.kind = ScenarioKind::MovingClock;
        assert!(moving.counterpart(PotentialSpec::Zero).is_none());
    }

    #[test]
    fn fixed_height_shift_is_the_redshift() {
        let result = run_scenario(&fixed_height()).unwrap();
        let z = result.summary_value("redshift_measured").unwrap();
        assert!((z - 0.05).abs() < 1e-4, "z = {z}");
        assert!(result.passed());
        assert_eq!(result.runs.len(), 2);
        assert_eq!(result.runs[0].samples.len(), 201);
        assert_eq!(result.runs[0].samples[0].phases.len(), 1);
    }

    #[test]
    fn cancelling_potential_equalizes_clock_rates() {
        let control = fixed_height().counterpart(PotentialSpec::CancellingLinear).unwrap();
        let result = run_scenario(&control).unwrap();
        let z = result.summary_value("redshift_measured").unwrap();
        assert!(z.abs() < 1e-10, "z = {z}");
        assert!(result.check("fidelity").unwrap().passed);
    }

    #[test]
    fn free_reference_guards_and_identity() {
        let k = dimless(10.0, 1.0);
        let grid = Grid1D::new(-16.0, 16.0, 256).unwrap();
        let c = clock(vec![0.0, 0.1]);
        let packet = gaussian_packet(&grid, 0.0, 1.0, 0.3, 1.0);
        let state = JointState::product(grid, c.amplitudes(), &packet).unwrap();
        let trap = build_blocks(&c, &PotentialSpec::Harmonic { center: 0.0, omega: 1.0 }, &k, &grid).unwrap();
        assert!(matches!(
            free_reference_evolution(&state, &trap, 0.01, 10),
            Err(Error::NotFree { .. })
        ));
        let free = build_blocks(&c, &PotentialSpec::CancellingLinear, &k, &grid).unwrap();
        assert_eq!(free_reference_evolution(&state, &free, 0.01, 0).unwrap(), state);
        let evolved = free_reference_evolution(&state, &free, 0.01, 100).unwrap();
        assert!((evolved.t - 1.0).abs() < 1e-15);
        assert!((evolved.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn moving_clock_deficit() {
        let mut cfg = ScenarioConfig::new(
            ScenarioKind::MovingClock,
            dimless(10.0, 0.0),
            clock(vec![0.0, 0.1]),
            PotentialSpec::Zero,
            Grid1D::new(-512.0, 512.0, 2048).unwrap(),
        );
        cfg.sigma = 50.0;
        cfg.p0 = 1.0;
        cfg.dt = 0.1;
        cfg.steps = 200;
        let result = run_scenario(&cfg).unwrap();
        let d = result.summary_value("deficit_measured").unwrap();
        let with_spread = result.summary_value("deficit_with_spread").unwrap();
        assert!((d - with_spread).abs() < 1e-8, "{d} vs {with_spread}");
        assert!(result.passed());
    }

    #[test]
    fn eigen_moments_of_a_box_state() {
        // ground state of a box of m interior nodes: sin(jπ/(m+1))
        let grid = Grid1D::new(0.0, 1.0, 64).unwrap();
        let m = 63;
        let mut psi = vec![0.0];
        psi.extend((1..=m).map(|j| (j as f64 * PI / (m as f64 + 1.0)).sin()));
        let norm = (psi.iter().map(|v| v * v).sum::<f64>() * grid.dx()).sqrt();
        psi.iter_mut().for_each(|v| *v /= norm);
        let (x, p2) = eigen_moments(&psi, &grid, 1.0);
        assert!((x - 0.5).abs() < 1e-12);
        let dx = grid.dx();
        let fd = (2.0 - 2.0 * (PI * dx).cos()) / (dx * dx);
        assert!((p2 - fd).abs() < 1e-9 * fd);
    }
}
