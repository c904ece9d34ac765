//! Birman–Schwinger solver for the critical inverse temperature `β_c`.
//!
//! The operator `χ^{1/2} V χ^{1/2}` restricted to s-waves is discretized by a
//! symmetric Nyström scheme on a [`MomentumGrid`]:
//! `M_ij = √ŵ_i √χ_i Ṽ₀(p_i, p_j) √χ_j √ŵ_j` with `ŵ_i = w_i p_i²/(2π²)`.

mod eigen;
mod grid;

use std::f64::consts::PI;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};

pub use eigen::{
    max_eigenpair, max_eigenpair_verified, power_iteration, top_eigenvalues, Eigenpair, PowerIteration,
    DEGENERACY_TOL,
};
pub use grid::{GridOptions, MomentumGrid};

use crate::error::{Error, Result};
use crate::potentials::{MomentumKernel, Potential};
use crate::quad::{self, AdaptiveOptions};
use crate::specfun::{chi, spherical_j0};

/// Tolerance on `|λ_max(β_c) − 1|`.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-10;

/// Relative bracket width at which bisection hands over to the secant method.
pub const BISECTION_WIDTH: f64 = 1e-3;

/// Default `[β_low, β_high] = [1e-2/‖V‖∞, 1e4·max(1, 1/μ₊)]`.
pub fn default_bracket(sup_norm: f64, mu: f64) -> (f64, f64) {
    let high = if mu > 0.0 { 1e4 * (1.0f64).max(1.0 / mu) } else { 1e4 };
    (1e-2 / sup_norm, high)
}

/// Discretized Birman–Schwinger operator with the β-independent part cached.
pub struct BsOperator {
    grid: MomentumGrid,
    mu: f64,
    measure: Vec<f64>,
    /// `√ŵ_i K_ij √ŵ_j`
    weighted_kernel: DMatrix<f64>,
}

impl BsOperator {
    pub fn new<K: MomentumKernel + ?Sized>(kernel: &K, grid: MomentumGrid, mu: f64) -> Self {
        let measure = grid.measure();
        let mut m = kernel.matrix(grid.nodes());
        let sq: Vec<f64> = measure.iter().map(|w| w.sqrt()).collect();
        let n = grid.len();
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] *= sq[i] * sq[j];
            }
        }
        Self {
            grid,
            mu,
            measure,
            weighted_kernel: m,
        }
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn chi_values(&self, beta: f64) -> Vec<f64> {
        self.grid.nodes().iter().map(|p| chi(beta, p * p - self.mu)).collect()
    }

    pub fn matrix(&self, beta: f64) -> DMatrix<f64> {
        let d: Vec<f64> = self.chi_values(beta).iter().map(|c| c.sqrt()).collect();
        let n = self.grid.len();
        DMatrix::from_fn(n, n, |i, j| (d[i] * d[j]) * self.weighted_kernel[(i, j)])
    }

    /// `(λ_max, λ_2)` at inverse temperature `beta`.
    pub fn top_eigenvalues(&self, beta: f64) -> Result<(f64, Option<f64>)> {
        top_eigenvalues(&self.matrix(beta))
    }
}

/// The symmetric Birman–Schwinger matrix at inverse temperature `beta`.
pub fn build_bs_matrix<K: MomentumKernel + ?Sized>(beta: f64, mu: f64, kernel: &K, grid: &MomentumGrid) -> DMatrix<f64> {
    BsOperator::new(kernel, grid.clone(), mu).matrix(beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormConvention {
    /// Momentum at which the gap profile equals one.
    pub p_ref: f64,
    /// `Σ ŵ_i u_i² = 1`.
    pub eigenvector_norm: f64,
    /// Sign fixed by `Σ w_i p_i² u_i ≥ 0`.
    pub sign_moment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSolution {
    pub beta_c: f64,
    pub mu: f64,
    /// `λ_max` at `beta_c`.
    pub lambda_max: f64,
    /// Second largest eigenvalue at `beta_c`.
    pub next_eigenvalue: Option<f64>,
    /// `(β, λ_max(β))` evaluated during the root search, sorted by β.
    pub trace: Vec<(f64, f64)>,
    pub grid: MomentumGrid,
    /// Eigenfunction values `u(p_i)` with `Σ ŵ_i u_i² = 1`.
    pub u: Vec<f64>,
    /// `χ_{β_c}(p_i² − μ)`
    pub chi: Vec<f64>,
    /// Gap profile `t(p_i)`, normalized to `t(p_ref) = 1`.
    pub t: Vec<f64>,
    pub norm_convention: NormConvention,
    /// Number of secant/bisection evaluations used.
    pub evaluations: usize,
}

impl GapSolution {
    pub fn temperature(&self) -> f64 {
        1.0 / self.beta_c
    }

    pub fn spectral_gap(&self) -> f64 {
        self.next_eigenvalue.map_or(f64::INFINITY, |n| self.lambda_max - n)
    }

    pub fn measure(&self) -> Vec<f64> {
        self.grid.measure()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub grid: GridOptions,
    pub bracket: Option<(f64, f64)>,
    /// Cross-check the final eigenvalue with power iteration.
    pub verify: bool,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grid: GridOptions::default(),
            bracket: None,
            verify: true,
            max_iterations: 200,
        }
    }
}

struct Search<'a> {
    op: &'a BsOperator,
    trace: Vec<(f64, f64)>,
}

impl Search<'_> {
    fn f(&mut self, log_beta: f64) -> Result<f64> {
        let beta = log_beta.exp();
        let (l, _) = self.op.top_eigenvalues(beta)?;
        self.trace.push((beta, l));
        Ok(l - 1.0)
    }
}

/// Root of `λ_max(β) = 1` on a fixed grid.
///
/// Bisection in `ln β` narrows the bracket to relative width
/// [`BISECTION_WIDTH`], then a secant iteration safeguarded by the bracket
/// polishes until `|λ_max − 1| ≤` [`UNIT_EIGENVALUE_TOL`].
pub fn find_beta_c<K: MomentumKernel + ?Sized>(
    mu: f64,
    kernel: &K,
    grid: MomentumGrid,
    beta_bracket: (f64, f64),
) -> Result<GapSolution> {
    let opts = SolveOptions {
        bracket: Some(beta_bracket),
        ..SolveOptions::default()
    };
    let op = BsOperator::new(kernel, grid, mu);
    solve_on_operator(kernel, &op, beta_bracket, &opts)
}

fn solve_on_operator<K: MomentumKernel + ?Sized>(kernel: &K, op: &BsOperator, (beta_low, beta_high): (f64, f64), opts: &SolveOptions) -> Result<GapSolution> {
    if !(beta_low > 0.0 && beta_high > beta_low && beta_high.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "invalid beta bracket [{beta_low}, {beta_high}]"
        )));
    }
    let mut search = Search { op, trace: Vec::new() };
    let mut lo = beta_low.ln();
    let mut hi = beta_high.ln();
    let mut f_hi = search.f(hi)?;
    if f_hi <= 0.0 {
        return Err(Error::BracketHigh {
            beta_high,
            lambda_max: f_hi + 1.0,
        });
    }
    let mut f_lo = search.f(lo)?;
    if f_lo >= 0.0 {
        return Err(Error::BracketLow {
            beta_low,
            lambda_max: f_lo + 1.0,
        });
    }
    let mut root = None;
    let mut iterations = 0;
    while hi - lo > BISECTION_WIDTH.ln_1p() {
        iterations += 1;
        if iterations > opts.max_iterations {
            return Err(Error::RootFinding(format!("bisection exceeded {} steps", opts.max_iterations)));
        }
        let mid = 0.5 * (lo + hi);
        let fm = search.f(mid)?;
        if fm.abs() <= UNIT_EIGENVALUE_TOL {
            root = Some(mid);
            break;
        }
        if fm < 0.0 {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    let root = match root {
        Some(r) => r,
        None => {
            // secant from the bracket ends, falling back to bisection when
            // the step leaves the bracket
            let (mut x0, mut f0, mut x1, mut f1) = (lo, f_lo, hi, f_hi);
            loop {
                iterations += 1;
                if iterations > opts.max_iterations {
                    return Err(Error::RootFinding(format!(
                        "no convergence after {} evaluations (|lambda - 1| = {:e})",
                        opts.max_iterations,
                        f1.abs().min(f0.abs())
                    )));
                }
                let mut x = x1 - f1 * (x1 - x0) / (f1 - f0);
                if !(x > lo && x < hi) || !x.is_finite() {
                    x = 0.5 * (lo + hi);
                }
                let fx = search.f(x)?;
                if fx.abs() <= UNIT_EIGENVALUE_TOL {
                    break x;
                }
                if fx < 0.0 {
                    lo = x;
                } else {
                    hi = x;
                }
                if hi - lo < 1e-15 * hi.abs().max(1.0) {
                    return Err(Error::RootFinding(format!(
                        "bracket collapsed with |lambda - 1| = {:e}",
                        fx.abs()
                    )));
                }
                x0 = x1;
                f0 = f1;
                x1 = x;
                f1 = fx;
            }
        }
    };
    let beta_c = root.exp();
    let mut trace = search.trace;
    trace.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    trace.dedup_by(|a, b| a.0 == b.0);
    if trace.windows(2).any(|w| w[1].1 <= w[0].1) {
        warn!("largest eigenvalue not strictly increasing along the sampled betas");
    }
    let evaluations = trace.len();

    let m = op.matrix(beta_c);
    let pair = if opts.verify {
        max_eigenpair_verified(&m, 1e-10)?
    } else {
        max_eigenpair(&m)?
    };
    debug!(
        "beta_c = {beta_c}, lambda = {}, gap = {:e}, n = {}",
        pair.value,
        pair.spectral_gap(),
        op.grid.len()
    );
    assemble(kernel, op, beta_c, pair, trace, evaluations)
}

fn assemble<K: MomentumKernel + ?Sized>(kernel: &K, op: &BsOperator, beta_c: f64, pair: Eigenpair, trace: Vec<(f64, f64)>, evaluations: usize) -> Result<GapSolution> {
    let grid = op.grid.clone();
    let measure = op.measure();
    let chi_vals = op.chi_values(beta_c);
    let mut u: Vec<f64> = pair
        .vector
        .iter()
        .zip(measure)
        .map(|(v, w)| v / w.sqrt())
        .collect();
    let norm: f64 = u.iter().zip(measure).map(|(u, w)| w * u * u).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
    let moment: f64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(&u)
        .map(|((p, w), u)| w * p * p * u)
        .sum();
    if moment < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    let raw_t: Vec<f64> = u.iter().zip(&chi_vals).map(|(u, c)| u / c.sqrt()).collect();
    let p_ref = match grid.fermi_momentum() {
        Some(kf) => kf,
        None => grid.nodes()[0],
    };
    let mut sol = GapSolution {
        beta_c,
        mu: op.mu,
        lambda_max: pair.value,
        next_eigenvalue: pair.next,
        trace,
        grid,
        u,
        chi: chi_vals,
        t: raw_t,
        norm_convention: NormConvention {
            p_ref,
            eigenvector_norm: 1.0,
            sign_moment: moment.abs(),
        },
        evaluations,
    };
    let t_ref = if sol.grid.fermi_momentum().is_none() {
        sol.t[0]
    } else {
        nystrom(kernel, &sol, p_ref)
    };
    if t_ref.abs() < 1e-300 || !t_ref.is_finite() {
        return Err(Error::DegenerateProfile(t_ref));
    }
    sol.t.iter_mut().for_each(|t| *t /= t_ref);
    Ok(sol)
}

// λ^{-1} Σ_j K(p, p_j) χ_j ŵ_j t_j
fn nystrom<K: MomentumKernel + ?Sized>(kernel: &K, sol: &GapSolution, p: f64) -> f64 {
    let measure = sol.grid.measure();
    sol.grid
        .nodes()
        .iter()
        .zip(&measure)
        .zip(sol.t.iter().zip(&sol.chi))
        .map(|((&q, w), (t, c))| kernel.eval(p, q) * c * w * t)
        .sum::<f64>()
        / sol.lambda_max
}

/// Solve for `β_c` on a graded grid matched to the critical temperature.
///
/// A first solve on a grid resolving the coldest temperature of the bracket
/// locates `β_c`; the grid is then rebuilt for `T = 1/β_c` and the root is
/// polished there.
pub fn solve<K: MomentumKernel + ?Sized>(kernel: &K, mu: f64, opts: &SolveOptions) -> Result<GapSolution> {
    let bracket = opts.bracket.unwrap_or_else(|| default_bracket(kernel.sup_norm(), mu));
    let a = kernel.length_scale();
    let coarse = MomentumGrid::graded(mu, a, 1.0 / bracket.1, &opts.grid)?;
    let op = BsOperator::new(kernel, coarse, mu);
    let first = solve_on_operator(kernel, &op, bracket, &SolveOptions { verify: false, ..opts.clone() })?;
    let grid = MomentumGrid::graded(mu, a, first.temperature(), &opts.grid)?;
    let op = BsOperator::new(kernel, grid, mu);
    let mut local = (first.beta_c * 0.95, first.beta_c * 1.05);
    for _ in 0..20 {
        let (l_lo, _) = op.top_eigenvalues(local.0)?;
        let (l_hi, _) = op.top_eigenvalues(local.1)?;
        if l_lo < 1.0 && l_hi > 1.0 {
            break;
        }
        if l_lo >= 1.0 {
            local.0 = (local.0 * 0.5).max(bracket.0);
        }
        if l_hi <= 1.0 {
            local.1 = (local.1 * 2.0).min(bracket.1);
        }
    }
    // the trace stays on the final grid; evaluations count both passes
    let mut sol = solve_on_operator(kernel, &op, local, opts)?;
    sol.evaluations += first.evaluations;
    Ok(sol)
}

/// Gap profile `t(p)` as a function of momentum.
///
/// Off the grid the profile is evaluated by Nyström interpolation,
/// `t(p) = λ^{-1} Σ_j Ṽ₀(p, p_j) χ_j ŵ_j t_j`, which inherits the smoothness
/// of the kernel.
pub struct GapProfile<'a> {
    kernel: &'a dyn MomentumKernel,
    nodes: Vec<f64>,
    values: Vec<f64>,
    coefficients: Vec<f64>,
}

impl<'a> GapProfile<'a> {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.coefficients)
            .map(|(&q, c)| self.kernel.eval(p, q) * c)
            .sum()
    }

    /// Profile scaled by a constant.
    pub fn scaled(&self, kappa: f64) -> GapProfile<'a> {
        GapProfile {
            kernel: self.kernel,
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|v| v * kappa).collect(),
            coefficients: self.coefficients.iter().map(|c| c * kappa).collect(),
        }
    }
}

pub fn gap_profile<'a, K: MomentumKernel>(sol: &GapSolution, kernel: &'a K) -> GapProfile<'a> {
    let measure = sol.grid.measure();
    let raw: Vec<f64> = sol
        .t
        .iter()
        .zip(&sol.chi)
        .zip(&measure)
        .map(|((t, c), w)| t * c * w / sol.lambda_max)
        .collect();
    GapProfile {
        kernel,
        nodes: sol.grid.nodes().to_vec(),
        values: sol.t.clone(),
        coefficients: raw,
    }
}

/// Radial eigenfunction `φ*(r) ∝ V(r)^{1/2} h(r)` of the Birman–Schwinger
/// operator in position space, with
/// `h(r) = (1/2π²) Σ_j w_j q_j² √χ_j u_j j0(q_j r)`.
#[derive(Debug, Clone)]
pub struct PositionEigenfunction {
    potential: Potential,
    nodes: Vec<f64>,
    coefficients: Vec<f64>,
    r_max: f64,
}

impl PositionEigenfunction {
    pub fn eval(&self, r: f64) -> f64 {
        if r > self.r_max {
            return 0.0;
        }
        let h: f64 = self
            .nodes
            .iter()
            .zip(&self.coefficients)
            .map(|(&q, c)| c * spherical_j0(q * r))
            .sum();
        self.potential.value(r).sqrt() * h
    }

    pub fn values(&self, radii: &[f64]) -> Vec<f64> {
        radii.iter().map(|&r| self.eval(r)).collect()
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.r_max
    }

    /// `4π ∫ r^{2+m} φ*(r)² dr`
    pub fn moment(&self, m: i32) -> Result<f64> {
        radial_moment(|r| self.eval(r).powi(2), m, self.r_max, self.nodes.last().copied().unwrap_or(1.0))
    }

    /// Panel breakpoints resolving the oscillation of `j0(q_max r)`.
    fn breakpoints(r_max: f64, q_max: f64) -> Vec<f64> {
        let n = ((r_max * q_max / PI).ceil() as usize).clamp(8, 20_000);
        (0..=n).map(|j| r_max * j as f64 / n as f64).collect()
    }
}

pub(crate) fn radial_moment<F: Fn(f64) -> f64>(density: F, m: i32, r_max: f64, q_max: f64) -> Result<f64> {
    let pts = PositionEigenfunction::breakpoints(r_max, q_max);
    let v = quad::integrate_breakpoints(
        |r| r * r * r.powi(m) * density(r),
        &pts,
        AdaptiveOptions::with_tol(0.0, 1e-12),
    )?;
    Ok(4.0 * PI * v)
}

pub fn position_eigenfunction(sol: &GapSolution, potential: &Potential) -> Result<PositionEigenfunction> {
    let grid = &sol.grid;
    let coefficients: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(sol.u.iter().zip(&sol.chi))
        .map(|((q, w), (u, c))| w * q * q * c.sqrt() * u / (2.0 * PI * PI))
        .collect();
    let mut phi = PositionEigenfunction {
        potential: potential.clone(),
        nodes: grid.nodes().to_vec(),
        coefficients,
        r_max: potential.cutoff_radius(),
    };
    let norm = phi.moment(0)?.sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateProfile(norm));
    }
    let sign = if phi.eval(0.0) < 0.0 { -1.0 } else { 1.0 };
    phi.coefficients.iter_mut().for_each(|c| *c *= sign / norm);
    Ok(phi)
}

/// Unit vector `√ŵ u` as used in the symmetric eigenproblem.
pub fn symmetric_eigenvector(sol: &GapSolution) -> DVector<f64> {
    DVector::from_iterator(
        sol.u.len(),
        sol.u.iter().zip(sol.grid.measure()).map(|(u, w)| u * w.sqrt()),
    )
}
