//! Closed-form levels of the gravitational quantum bouncer,
//! `E_n = (ħ²mg²/2)^{1/3} aₙ` with `−aₙ` the zeros of Ai.

use crate::model::Constants;
use crate::{Error, Result};

/// Negated zeros `aₙ` of Ai, n = 1..=10.
const AIRY_ZEROS: [f64; 10] = [
    2.338_107_410_459_767,
    4.087_949_444_130_970,
    5.520_559_828_095_551,
    6.786_708_090_071_759,
    7.944_133_587_120_853,
    9.022_650_853_340_981,
    10.040_174_341_558_086,
    11.008_524_303_733_262,
    11.936_015_563_236_262,
    12.828_776_752_865_757,
];

/// `aₙ` (1-based): tabulated for n ≤ 10, asymptotic series beyond.
pub fn airy_zero(n: usize) -> f64 {
    assert!(n >= 1, "Airy zeros are numbered from 1");
    if n <= AIRY_ZEROS.len() {
        return AIRY_ZEROS[n - 1];
    }
    let t = 3.0 * std::f64::consts::PI * (4.0 * n as f64 - 1.0) / 8.0;
    let t2 = 1.0 / (t * t);
    let series = 1.0 + t2 * (5.0 / 48.0 + t2 * (-5.0 / 36.0 + t2 * (77_125.0 / 82_944.0 - t2 * 108_056_875.0 / 6_967_296.0)));
    t.powf(2.0 / 3.0) * series
}

/// Energy unit `(ħ²mg²/2)^{1/3}` of the bouncer.
pub fn bouncer_energy_scale(constants: &Constants) -> f64 {
    let k = constants;
    (k.hbar * k.hbar * k.m * k.g * k.g / 2.0).cbrt()
}

pub fn bouncer_levels_airy(constants: &Constants, n_max: usize) -> Result<Vec<f64>> {
    if constants.g <= 0.0 {
        return Err(Error::InvalidInput("the bouncer needs g > 0".into()));
    }
    let scale = bouncer_energy_scale(constants);
    Ok((1..=n_max).map(|n| scale * airy_zero(n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent Ai: Maclaurin series for |x| ≤ 8, leading oscillatory
    // asymptotics (with two correction terms) for x < −8.
    fn airy_ai(x: f64) -> f64 {
        if x < -8.0 {
            let z = (-x).powf(1.5) * 2.0 / 3.0;
            let amp = 1.0 / (std::f64::consts::PI.sqrt() * (-x).powf(0.25));
            let phase = z + std::f64::consts::FRAC_PI_4;
            let u1 = 5.0 / 72.0;
            let u2 = 385.0 / 10_368.0;
            return amp * (phase.sin() * (1.0 - u2 / (z * z)) - phase.cos() * u1 / z);
        }
        const C1: f64 = 0.355_028_053_887_817_2;
        const C2: f64 = 0.258_819_403_792_806_8;
        let x3 = x * x * x;
        let (mut f, mut ft) = (1.0, 1.0);
        let (mut g, mut gt) = (x, x);
        for k in 1..200 {
            let k3 = 3.0 * k as f64;
            ft *= x3 / (k3 * (k3 - 1.0));
            gt *= x3 / ((k3 + 1.0) * k3);
            f += ft;
            g += gt;
            if ft.abs() < 1e-18 * f.abs() && gt.abs() < 1e-18 * g.abs() {
                break;
            }
        }
        C1 * f - C2 * g
    }

    fn zero_by_bisection(mut lo: f64, mut hi: f64) -> f64 {
        let f_lo = airy_ai(-lo);
        assert!(f_lo * airy_ai(-hi) < 0.0, "no sign change in [{lo}, {hi}]");
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if airy_ai(-mid) * f_lo > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn series_reproduces_known_values() {
        assert!((airy_ai(0.0) - 0.355_028_053_887_817_2).abs() < 1e-15);
        assert!((airy_ai(1.0) - 0.135_292_416_312_881_4).abs() < 1e-12);
        assert!((airy_ai(-1.0) - 0.535_560_883_292_352_6).abs() < 1e-12);
    }

    #[test]
    fn tabulated_zeros_match_bisection_oracle() {
        // bracket each zero by scanning for sign changes on a fine mesh
        let mut brackets = Vec::new();
        let mut prev = airy_ai(-0.5);
        let mut x = 0.5;
        while brackets.len() < 10 {
            let next = x + 0.01;
            let v = airy_ai(-next);
            if v * prev < 0.0 {
                brackets.push((x, next));
            }
            prev = v;
            x = next;
        }
        for (n, (lo, hi)) in brackets.into_iter().enumerate() {
            let oracle = zero_by_bisection(lo, hi);
            let tol = if n < 5 { 1e-9 } else { 1e-5 };
            assert!(
                (airy_zero(n + 1) - oracle).abs() < tol,
                "a_{} = {} vs oracle {oracle}",
                n + 1,
                airy_zero(n + 1)
            );
        }
    }

    #[test]
    fn asymptotic_zeros_continue_the_table() {
        let t = |n: usize| {
            let t = 3.0 * std::f64::consts::PI * (4.0 * n as f64 - 1.0) / 8.0;
            let t2 = 1.0 / (t * t);
            t.powf(2.0 / 3.0) * (1.0 + t2 * (5.0 / 48.0 + t2 * (-5.0 / 36.0 + t2 * (77_125.0 / 82_944.0 - t2 * 108_056_875.0 / 6_967_296.0))))
        };
        assert!((t(10) - airy_zero(10)).abs() < 1e-9);
        assert!(airy_zero(11) > airy_zero(10));
        assert!((airy_zero(11) - airy_zero(10) - (airy_zero(10) - airy_zero(9))).abs() < 0.05);
    }

    #[test]
    fn dimensionless_ground_level() {
        let k = Constants::dimensionless(10.0, 1.0).unwrap();
        let levels = bouncer_levels_airy(&k, 3).unwrap();
        assert!((levels[0] - 1.855_757).abs() < 1e-6);
        assert_eq!(bouncer_levels_airy(&k, 0).unwrap(), Vec::<f64>::new());
        let flat = Constants::dimensionless(10.0, 0.0).unwrap();
        assert!(bouncer_levels_airy(&flat, 1).is_err());
    }

    #[test]
    fn neutron_ground_level() {
        let e1 = bouncer_levels_airy(&Constants::si_neutron(), 1).unwrap()[0];
        assert!(((e1 - 2.254e-31) / 2.254e-31).abs() < 5e-3);
        let pev = e1 / 1.602_176_634e-19 * 1e12;
        assert!((pev - 1.41).abs() < 0.01);
    }
}
