//! Short runs of the core invariants, sized to finish in seconds.

use std::time::Instant;

use gravclock::model::{build_blocks, Constants, Grid1D, InternalClockSpec, PotentialSpec};
use gravclock::observables::{analytic_redshift, reduced_internal};
use gravclock::quantum::{bouncer_levels_airy, eigensolve_fd, gaussian_packet, propagate, JointState};
use gravclock::scenarios::{run_scenario, ScenarioConfig, ScenarioKind};
use gravclock::Complex64;

use crate::output::{real, write_csv};
use crate::{config_hash, parse_config, CliError};

type Outcome = Result<(bool, String), CliError>;

fn trapped_pair() -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::new(
        ScenarioKind::FixedHeightClocks,
        Constants::dimensionless(10.0, 1.0)?,
        InternalClockSpec::equal_superposition(vec![0.0, 0.1])?,
        PotentialSpec::Harmonic { center: 0.0, omega: 1.0 },
        Grid1D::new(-16.0, 16.0, 256)?,
    );
    cfg.separation = 5.0;
    cfg.dt = 1e-2;
    cfg.steps = 2000;
    cfg.record_every = 100;
    Ok(cfg)
}

fn redshift() -> Outcome {
    let r = run_scenario(&trapped_pair()?)?;
    let z = r.summary_value("redshift_measured").unwrap_or(f64::NAN);
    Ok(((z - 0.05).abs() <= 1e-4, format!("shift {z:.10} vs 0.05")))
}

fn cancellation() -> Outcome {
    let fixed = trapped_pair()?;
    let cfg = fixed
        .counterpart(PotentialSpec::CancellingLinear)
        .expect("fixed-height configs pair with a control");
    let r = run_scenario(&cfg)?;
    let z = r.summary_value("redshift_measured").unwrap_or(f64::NAN);
    let f = r
        .summary_value("fidelity_low")
        .unwrap_or(f64::NAN)
        .min(r.summary_value("fidelity_high").unwrap_or(f64::NAN));
    let only_potential = fixed.differing_fields(&cfg) == ["kind", "potential"];
    Ok((
        z.abs() < 1e-10 && 1.0 - f < 1e-10 && only_potential,
        format!("|shift| {:.1e}, 1 - fidelity {:.1e}", z.abs(), 1.0 - f),
    ))
}

fn moving_clock() -> Outcome {
    let mut cfg = ScenarioConfig::new(
        ScenarioKind::MovingClock,
        Constants::dimensionless(10.0, 0.0)?,
        InternalClockSpec::equal_superposition(vec![0.0, 0.1])?,
        PotentialSpec::Zero,
        Grid1D::new(-512.0, 512.0, 4096)?,
    );
    cfg.sigma = 100.0;
    cfg.p0 = 1.0;
    cfg.dt = 0.1;
    cfg.steps = 200;
    let r = run_scenario(&cfg)?;
    let d = r.summary_value("deficit_measured").unwrap_or(f64::NAN);
    Ok(((d - 0.005).abs() <= 1e-6, format!("deficit {d:.9} vs 0.005")))
}

fn bouncer_levels() -> Outcome {
    let k = Constants::dimensionless(10.0, 1.0)?;
    let clock = InternalClockSpec::equal_superposition(vec![0.0])?;
    let grid = Grid1D::new(0.0, 16.0, 2048)?;
    let blocks = build_blocks(&clock, &PotentialSpec::HardFloor { floor: 0.0 }, &k, &grid)?;
    let fd = eigensolve_fd(&blocks[0], 3)?;
    let airy = bouncer_levels_airy(&k, 3)?;
    let worst = fd
        .energies
        .iter()
        .zip(&airy)
        .fold(0.0_f64, |a, (e, r)| a.max(((e - r) / r).abs()));
    Ok((worst < 1e-4, format!("max rel err vs Airy {worst:.1e}")))
}

fn unitarity() -> Outcome {
    let k = Constants::dimensionless(10.0, 1.0)?;
    let grid = Grid1D::new(-16.0, 16.0, 256)?;
    let clock = InternalClockSpec::new(
        vec![0.0, 0.1],
        vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
    )?;
    let trap = PotentialSpec::Harmonic { center: 0.0, omega: 1.0 };
    let blocks = build_blocks(&clock, &trap, &k, &grid)?;
    let s = JointState::product(grid, clock.amplitudes(), &gaussian_packet(&grid, 1.0, 0.8, 0.5, 1.0))?;
    let out = propagate(&s, &blocks, 1e-3, 2000)?;
    let norm = (out.norm() - 1.0).abs();
    let pop = (0..2).fold(0.0_f64, |a, l| a.max((out.level_population(l) - s.level_population(l)).abs()));
    let rho_ok = reduced_internal(&out).validate().is_ok();
    Ok((
        norm < 1e-10 && pop < 1e-13 && rho_ok,
        format!("norm drift {norm:.1e}, population drift {pop:.1e}, density valid {rho_ok}"),
    ))
}

fn csv_round_trip() -> Outcome {
    let r = run_scenario(&trapped_pair()?)?;
    let mut worst = 0usize;
    let mut values = 0usize;
    for run in &r.runs {
        let mut buf = Vec::new();
        write_csv(run, 2, &mut buf).map_err(|e| CliError::io("<memory>".as_ref(), e))?;
        let text = String::from_utf8_lossy(&buf).into_owned();
        for (line, s) in text.lines().skip(1).zip(&run.samples) {
            let parsed: Vec<f64> = line.split(',').filter_map(|v| v.parse().ok()).collect();
            let mut expected = vec![s.t, s.norm, s.mean_x, s.mean_p, s.purity, s.visibility];
            expected.extend(&s.phases);
            expected.extend(&s.populations);
            values += expected.len();
            worst += parsed
                .iter()
                .zip(&expected)
                .filter(|(a, b)| a.to_bits() != b.to_bits())
                .count()
                + expected.len().abs_diff(parsed.len());
        }
    }
    Ok((worst == 0 && values > 0, format!("{values} values, {worst} mismatched")))
}

fn config_hash_stability() -> Outcome {
    let text = "[units]\nc = 10\ng = 1\n[clock]\nlevels = [0, 0.1]\n[potential]\nkind = harmonic\nomega = 1\n\
                [grid]\nx_min = -16\nx_max = 16\nn = 256\n[scenario]\nkind = fixed_height_clocks\nseparation = 5\n";
    let noisy = format!("# comment\n\n{}", text.replace(" = ", "=").replace("c=10", "c = 1e1  # light"));
    let changed = text.replace("omega = 1", "omega = 2");
    let a = config_hash(&parse_config(text)?);
    let b = config_hash(&parse_config(&noisy)?);
    let c = config_hash(&parse_config(&changed)?);
    Ok((a == b && a != c, format!("hash {}…", &a[..12])))
}

fn si_redshift() -> Outcome {
    let z = analytic_redshift(1.0, &Constants::si_neutron());
    let printed = format!("{z:.4e}");
    Ok((printed == "1.0915e-16", format!("g*1m/c^2 = {printed} ({})", real(z))))
}

/// Runs every check, printing one line each; true when all pass.
pub fn run_all() -> bool {
    let checks: [(&str, fn() -> Outcome); 8] = [
        ("trapped clocks keep the redshift", redshift),
        ("cancelling potential removes it", cancellation),
        ("moving clock rate deficit", moving_clock),
        ("bouncer levels match Airy zeros", bouncer_levels),
        ("norm and populations conserved", unitarity),
        ("CSV reals round-trip", csv_round_trip),
        ("config hash ignores formatting", config_hash_stability),
        ("SI redshift per metre", si_redshift),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        let started = Instant::now();
        let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!passed);
        println!(
            "[{}] {name}: {detail} ({:.2}s)",
            if passed { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
    println!("selftest: {} of {} passed", checks.len() - failures, checks.len());
    failures == 0
}
