//! Small numerical helpers shared across modules.

use std::f64::consts::PI;

/// Neumaier-compensated sum of `terms`, evaluated left to right.
pub fn compensated_sum(terms: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for &v in terms {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Tracks a continuous phase from a sequence of wrapped angles in (−π, π].
#[derive(Debug, Clone, Default)]
pub struct PhaseUnwrapper {
    last_wrapped: Option<f64>,
    unwrapped: f64,
}

impl PhaseUnwrapper {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds the next wrapped angle and returns the unwrapped value.
    ///
    /// Consecutive samples must differ by less than π in true phase.
    pub fn push(&mut self, wrapped: f64) -> f64 {
        match self.last_wrapped {
            None => self.unwrapped = wrapped,
            Some(prev) => {
                let mut d = wrapped - prev;
                while d > PI {
                    d -= 2.0 * PI;
                }
                while d <= -PI {
                    d += 2.0 * PI;
                }
                self.unwrapped += d;
            }
        }
        self.last_wrapped = Some(wrapped);
        self.unwrapped
    }
}

/// Ordinary least-squares fit `y = intercept + slope·x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Locates the first sign change of `y` over the samples `t`, linearly
/// interpolated between the bracketing samples.
pub fn first_sign_change(t: &[f64], y: &[f64]) -> Option<f64> {
    t.windows(2)
        .zip(y.windows(2))
        .find(|(_, w)| w[0] != 0.0 && w[0].signum() != w[1].signum())
        .map(|(tw, w)| tw[0] + (tw[1] - tw[0]) * w[0] / (w[0] - w[1]))
}
