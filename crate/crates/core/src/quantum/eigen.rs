//! Bound states of a block on the finite-difference grid.
//!
//! Eigenvalues come from Sturm-sequence bisection on the symmetric
//! tridiagonal matrix, eigenvectors from inverse iteration with a
//! partially pivoted tridiagonal LU. Both are deterministic, and each vector
//! is signed so its first significant component is positive.

use super::propagate::fd_hamiltonian;
use crate::model::BlockHamiltonian;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    /// Full-grid eigenvectors normalized as `Σ ψ_i² dx = 1`, zero on wall nodes.
    pub wavefunctions: Vec<Vec<f64>>,
}

/// Number of eigenvalues of the tridiagonal `(diag, off)` strictly below `lambda`.
pub fn sturm_count(diag: &[f64], off: f64, lambda: f64) -> usize {
    let guard = f64::EPSILON * (off.abs() + diag.iter().fold(0.0_f64, |a, d| a.max(d.abs())));
    let off2 = off * off;
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - lambda } else { d - lambda - off2 / q };
        if q == 0.0 {
            q = -guard.max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) by bisection.
pub fn bisect_eigenvalue(diag: &[f64], off: f64, k: usize) -> f64 {
    let spread = 2.0 * off.abs();
    let mut lo = diag.iter().fold(f64::INFINITY, |a, &d| a.min(d)) - spread;
    let mut hi = diag.iter().fold(f64::NEG_INFINITY, |a, &d| a.max(d)) + spread;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Partially pivoted LU of a tridiagonal matrix, in the layout of LAPACK `dgttrf`.
struct TridiagLu {
    mult: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn new(diag: &[f64], off: f64, shift: f64) -> Self {
        let m = diag.len();
        let tiny = f64::EPSILON * (off.abs() + diag.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
        let tiny = tiny.max(f64::MIN_POSITIVE);
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut dl = vec![off; m.saturating_sub(1)];
        let mut du = vec![off; m.saturating_sub(1)];
        let mut du2 = vec![0.0; m.saturating_sub(2)];
        let mut swapped = vec![false; m.saturating_sub(1)];
        for i in 0..m.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < m {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(last) = d.last_mut() {
            if *last == 0.0 {
                *last = tiny;
            }
        }
        Self {
            mult: dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let m = b.len();
        for i in 0..m.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.mult[i] * b[i];
            } else {
                b[i + 1] -= self.mult[i] * b[i];
            }
        }
        for i in (0..m).rev() {
            let mut v = b[i];
            if i + 1 < m {
                v -= self.du[i] * b[i + 1];
            }
            if i + 2 < m {
                v -= self.du2[i] * b[i + 2];
            }
            b[i] = v / self.d[i];
        }
    }
}

fn scale_to_unit(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Eigenvector for the (already converged) eigenvalue `lambda`, orthogonalized
/// against `previous` (unit vectors).
fn inverse_iteration(diag: &[f64], off: f64, lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
    let lu = TridiagLu::new(diag, off, lambda);
    let m = diag.len();
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    for _ in 0..3 {
        lu.solve(&mut v);
        scale_to_unit(&mut v);
    }
    for p in previous {
        let proj: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(p).for_each(|(a, b)| *a -= proj * b);
    }
    scale_to_unit(&mut v);
    v
}

/// Lowest `n_max` eigenpairs of the finite-difference discretization of `block`.
pub fn eigensolve_fd(block: &BlockHamiltonian, n_max: usize) -> Result<Spectrum> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let (diag, off) = fd_hamiltonian(block);
    if n_max > diag.len() {
        return Err(Error::InvalidInput(format!(
            "n_max = {n_max} exceeds the {} active grid points",
            diag.len()
        )));
    }
    let first = block.first_active();
    let last = block.potential.len() - 1;
    let boundary = if block.floor.is_some() {
        block.potential[last]
    } else {
        block.potential[first].min(block.potential[last])
    };

    let energies: Vec<f64> = (0..n_max).map(|k| bisect_eigenvalue(&diag, off, k)).collect();
    if let Some(index) = energies.iter().position(|&e| e >= boundary) {
        return Err(Error::NotConfining {
            index,
            energy: energies[index],
            boundary,
        });
    }

    let dx = block.grid.dx();
    let mut unit_vectors: Vec<Vec<f64>> = Vec::with_capacity(n_max);
    for &e in &energies {
        let mut v = inverse_iteration(&diag, off, e, &unit_vectors);
        let peak = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if let Some(lead) = v.iter().find(|x| x.abs() > 1e-8 * peak) {
            if *lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        unit_vectors.push(v);
    }

    let wavefunctions = unit_vectors
        .into_iter()
        .map(|v| {
            let mut full = vec![0.0; block.potential.len()];
            let s = 1.0 / dx.sqrt();
            full[first..].iter_mut().zip(v).for_each(|(f, x)| *f = x * s);
            full
        })
        .collect();
    Ok(Spectrum {
        energies,
        wavefunctions,
    })
}
