use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative separation below which the top eigenvalue counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit eigenvector.
    pub vector: DVector<f64>,
    /// Second largest eigenvalue, if the matrix is at least 2×2.
    pub next: Option<f64>,
}

impl Eigenpair {
    pub fn spectral_gap(&self) -> f64 {
        self.next.map_or(f64::INFINITY, |n| self.value - n)
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn top_two(values: impl Iterator<Item = f64>) -> (f64, Option<usize>, Option<f64>) {
    let mut first = f64::NEG_INFINITY;
    let mut first_idx = None;
    let mut second = None::<f64>;
    for (i, v) in values.enumerate() {
        if v > first {
            if first_idx.is_some() {
                second = Some(first);
            }
            first = v;
            first_idx = Some(i);
        } else if second.is_none_or(|s| v > s) {
            second = Some(v);
        }
    }
    (first, first_idx, second)
}

fn check_gap(value: f64, next: Option<f64>) -> Result<()> {
    if let Some(n) = next {
        let rel = (value - n) / value.abs().max(f64::MIN_POSITIVE);
        if rel < DEGENERACY_TOL {
            return Err(Error::DegenerateTopEigenvalue {
                value,
                next: n,
                relative_gap: rel,
            });
        }
    }
    Ok(())
}

/// Largest and second largest eigenvalues of a symmetric matrix.
pub fn top_eigenvalues(m: &DMatrix<f64>) -> Result<(f64, Option<f64>)> {
    check_square(m)?;
    let values = m.clone().symmetric_eigenvalues();
    let (first, _, second) = top_two(values.iter().copied());
    Ok((first, second))
}

/// Largest eigenvalue and a unit eigenvector via dense symmetric
/// decomposition. A top eigenvalue separated from the next by less than
/// [`DEGENERACY_TOL`] (relative) is reported as an error.
pub fn max_eigenpair(m: &DMatrix<f64>) -> Result<Eigenpair> {
    check_square(m)?;
    let eig = m.clone().symmetric_eigen();
    let (value, idx, next) = top_two(eig.eigenvalues.iter().copied());
    check_gap(value, next)?;
    let vector = eig.eigenvectors.column(idx.unwrap()).into_owned();
    Ok(Eigenpair { value, vector, next })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerIteration {
    pub value: f64,
    pub vector: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on `M + sI`, with `s` from the Gershgorin bound so that the
/// shifted matrix is positive semidefinite and its dominant eigenvalue is the
/// shifted largest one.
pub fn power_iteration(m: &DMatrix<f64>, rel_tol: f64, max_iter: usize) -> Result<PowerIteration> {
    check_square(m)?;
    let n = m.nrows();
    let lower = (0..n)
        .map(|i| {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
            m[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min);
    let shift = (-lower).max(0.0);
    // deterministic start with no special alignment to any eigenvector
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin());
    v.normalize_mut();
    let mut rho = f64::NAN;
    let mut quiet = 0;
    for it in 1..=max_iter {
        let mut w = m * &v;
        let new_rho = v.dot(&w);
        w.axpy(shift, &v, 1.0);
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(PowerIteration {
                value: 0.0,
                vector: v,
                iterations: it,
                converged: true,
            });
        }
        v = w / norm;
        if (new_rho - rho).abs() <= rel_tol * new_rho.abs() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        rho = new_rho;
        if quiet >= 5 {
            return Ok(PowerIteration {
                value: rho,
                vector: v,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(PowerIteration {
        value: rho,
        vector: v,
        iterations: max_iter,
        converged: false,
    })
}

/// Dense top eigenpair cross-checked against power iteration.
pub fn max_eigenpair_verified(m: &DMatrix<f64>, rel_tol: f64) -> Result<Eigenpair> {
    let dense = max_eigenpair(m)?;
    let power = power_iteration(m, 1e-3 * rel_tol, 200_000)?;
    if !power.converged {
        log::warn!(
            "power iteration did not settle after {} steps (spectral gap {:e})",
            power.iterations,
            dense.spectral_gap()
        );
    }
    if (dense.value - power.value).abs() > rel_tol * dense.value.abs() {
        return Err(Error::EigenVerification {
            dense: dense.value,
            power: power.value,
        });
    }
    Ok(dense)
}
