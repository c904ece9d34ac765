//! Ginzburg–Landau coefficients `Λ0`, `Λ2` and the resulting critical-field
//! slope, plus the semiclassical functionals and kernel they come from.
//!
//! Momentum integrals `∫ d³p/(2π)³` are reduced radially to
//! `(1/2π²) ∫ p² dp` on the solver's grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gap_solver::{GapSolution, MomentumGrid};
use crate::specfun::{g0, g1, g2, sech2_half, xi};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GLCoefficients {
    pub lambda0: f64,
    pub lambda2: f64,
    /// `Λ0/Λ2`, an inverse temperature.
    pub ratio: f64,
    /// `2 T_c Λ0/Λ2`
    pub c0: f64,
    /// `−Λ2/(2 T_c Λ0)`
    pub slope_ratio_form: f64,
    /// `−∫t² cosh⁻² / ∫t² (g1 + (2/3)βp² g2)`
    pub slope_appendix_form: f64,
    pub t_c: f64,
    pub mu: f64,
}

impl GLCoefficients {
    /// `μ (dB_c2/dT) / T_c`
    pub fn slope_dimensionless(&self) -> f64 {
        self.slope_ratio_form * self.mu / self.t_c
    }
}

/// Radial integrals shared by `Λ0`, `Λ2` and the slope:
/// numerator `∫p² t² cosh⁻²(βe/2)` and denominator `∫p² t² (g1 + (2/3)βp² g2)(βe)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeIntegrals {
    pub numerator: f64,
    pub denominator: f64,
    /// `∫p² t² (|g1| + (2/3)βp² g2)`, the scale of the denominator.
    pub denominator_scale: f64,
}

pub fn slope_integrals(beta_c: f64, mu: f64, grid: &MomentumGrid, t: &[f64]) -> Result<SlopeIntegrals> {
    if t.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "profile has {} samples but the grid has {} nodes",
            t.len(),
            grid.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut scale = 0.0;
    for ((&p, &w), &t) in grid.nodes().iter().zip(grid.weights()).zip(t) {
        let z = beta_c * (p * p - mu);
        let wt = w * p * p * t * t;
        num += wt * sech2_half(z);
        let a = g1(z);
        let b = 2.0 / 3.0 * beta_c * p * p * g2(z);
        den += wt * (a + b);
        scale += wt * (a.abs() + b);
    }
    Ok(SlopeIntegrals {
        numerator: num,
        denominator: den,
        denominator_scale: scale,
    })
}

/// `Λ0 = (β²/16) (1/2π²) ∫p² t² (g1 + (2/3)βp² g2)` and
/// `Λ2 = (β/8) (1/2π²) ∫p² t² cosh⁻²(β(p²−μ)/2)`.
pub fn lambda_coeffs(beta_c: f64, mu: f64, grid: &MomentumGrid, t: &[f64]) -> Result<GLCoefficients> {
    if !(beta_c > 0.0) {
        return Err(Error::InvalidArgument(format!("beta_c must be positive, got {beta_c}")));
    }
    let s = slope_integrals(beta_c, mu, grid, t)?;
    if s.denominator.abs() < 1e-14 * s.denominator_scale || s.denominator_scale == 0.0 {
        return Err(Error::DegenerateProfile(s.denominator));
    }
    let radial = 1.0 / (2.0 * PI * PI);
    let lambda0 = beta_c * beta_c / 16.0 * radial * s.denominator;
    let lambda2 = beta_c / 8.0 * radial * s.numerator;
    let t_c = 1.0 / beta_c;
    let ratio = lambda0 / lambda2;
    Ok(GLCoefficients {
        lambda0,
        lambda2,
        ratio,
        c0: 2.0 * t_c * ratio,
        slope_ratio_form: -lambda2 / (2.0 * t_c * lambda0),
        slope_appendix_form: -s.numerator / s.denominator,
        t_c,
        mu,
    })
}

pub fn lambda_coeffs_for(sol: &GapSolution) -> Result<GLCoefficients> {
    lambda_coeffs(sol.beta_c, sol.mu, &sol.grid, &sol.t)
}

/// `dB_c2/dT` at `T_c` in the ratio-of-integrals form.
pub fn slope_appendix(beta_c: f64, mu: f64, grid: &MomentumGrid, t: &[f64]) -> Result<f64> {
    let s = slope_integrals(beta_c, mu, grid, t)?;
    if s.denominator.abs() < 1e-14 * s.denominator_scale || s.denominator_scale == 0.0 {
        return Err(Error::DegenerateProfile(s.denominator));
    }
    Ok(-s.numerator / s.denominator)
}

/// Leading-order critical temperature in a weak constant field
/// (lowest Landau level `2B`): `T_c − 2 T_c (Λ0/Λ2) B`.
pub fn tc_shift(coeffs: &GLCoefficients, t_c: f64, b: f64) -> Result<f64> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("field strength must be non-negative, got {b}")));
    }
    Ok(t_c - 2.0 * t_c * coeffs.ratio * b)
}

/// `A0 = β ∫ |τ̂|² g0(β(p²−μ)) dp` and
/// `A1 = −(β²/4) ∫ |τ̂|² (g1 + (2/3)βp² g2)(β(p²−μ)) dp` over `R³`.
pub fn a_functionals(temperature: f64, mu: f64, grid: &MomentumGrid, tau_hat: &[f64]) -> Result<(f64, f64)> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {temperature}")));
    }
    if tau_hat.len() != grid.len() {
        return Err(Error::InvalidArgument("tau_hat must be sampled on the grid".into()));
    }
    let beta = 1.0 / temperature;
    let mut a0 = 0.0;
    let mut a1 = 0.0;
    for ((&p, &w), &tau) in grid.nodes().iter().zip(grid.weights()).zip(tau_hat) {
        let z = beta * (p * p - mu);
        let wt = 4.0 * PI * w * p * p * tau * tau;
        a0 += wt * g0(z);
        a1 += wt * (g1(z) + 2.0 / 3.0 * beta * p * p * g2(z));
    }
    Ok((beta * a0, -0.25 * beta * beta * a1))
}

/// `τ̂ = (1/2)(2π)^{-3/2} t`
pub fn canonical_tau_hat(t: &[f64]) -> Vec<f64> {
    let c = 0.5 * (2.0 * PI).powf(-1.5);
    t.iter().map(|v| c * v).collect()
}

pub type Vec3 = [f64; 3];

fn norm2(v: &Vec3) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// `L(p, q) = [tanh(β(p²−μ)/2) + tanh(β(q²−μ)/2)] / (p² − μ + q² − μ)`.
pub fn kernel_l(beta: f64, mu: f64, p: &Vec3, q: &Vec3) -> f64 {
    xi(beta, norm2(p) - mu, norm2(q) - mu)
}

/// `−(3β²/2)(g1 + (2/3)βk² g2)(β(k²−μ))`
pub fn hessian_closed_form(beta: f64, mu: f64, k: &Vec3) -> f64 {
    let k2 = norm2(k);
    let z = beta * (k2 - mu);
    -1.5 * beta * beta * (g1(z) + 2.0 / 3.0 * beta * k2 * g2(z))
}

/// Laplacian in `ℓ` of `ℓ ↦ L(k + ℓ/2, k − ℓ/2)` at `ℓ = 0`: centered second
/// differences along the three axes with step `h`, Richardson-extrapolated
/// once with `h/2`. Returns `(numeric, closed_form)`.
pub fn hessian_check(beta: f64, mu: f64, k: &Vec3, h: f64) -> (f64, f64) {
    let f = |l: &Vec3| {
        let p = [k[0] + 0.5 * l[0], k[1] + 0.5 * l[1], k[2] + 0.5 * l[2]];
        let q = [k[0] - 0.5 * l[0], k[1] - 0.5 * l[1], k[2] - 0.5 * l[2]];
        kernel_l(beta, mu, &p, &q)
    };
    let laplacian = |h: f64| {
        let f0 = f(&[0.0; 3]);
        (0..3)
            .map(|axis| {
                let mut e = [0.0; 3];
                e[axis] = h;
                let plus = f(&e);
                e[axis] = -h;
                let minus = f(&e);
                (plus - 2.0 * f0 + minus) / (h * h)
            })
            .sum::<f64>()
    };
    let coarse = laplacian(h);
    let fine = laplacian(0.5 * h);
    ((4.0 * fine - coarse) / 3.0, hessian_closed_form(beta, mu, k))
}

/// Default finite-difference step `1e-3 (1 + |k|)`.
pub fn default_hessian_step(k: &Vec3) -> f64 {
    1e-3 * (1.0 + norm2(k).sqrt())
}
