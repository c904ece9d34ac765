//! Weak-coupling (WHH) limit of the upper-critical-field slope with its
//! first corrections in `1/(β_c μ)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gap_solver::{GapProfile, GapSolution};
use crate::gl_coeff::GLCoefficients;
use crate::quad::{self, AdaptiveOptions};
use crate::specfun::{d_x2_g1, g1, g2, sech2_half, ZETA3};

/// `7ζ(3)/π²`
pub fn gamma1_closed_form() -> f64 {
    7.0 * ZETA3 / (PI * PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma1 {
    /// `2 ∫₀^∞ g2`
    pub value: f64,
    /// `∫_R g2` integrated over the whole line
    pub full_line: f64,
    pub closed_form: f64,
}

fn g2_integral(lo: f64, hi: f64) -> Result<f64> {
    let n = ((hi - lo) / 2.0).ceil().max(1.0) as usize;
    let pts: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect();
    quad::integrate_breakpoints(g2, &pts, AdaptiveOptions::with_tol(1e-17, 1e-15))
}

/// `γ1 = ∫_R g2(z) dz` by quadrature; `g2 < 1e-30` beyond `|z| = 75`.
pub fn gamma1() -> Result<Gamma1> {
    Ok(Gamma1 {
        value: 2.0 * g2_integral(0.0, 75.0)?,
        full_line: g2_integral(-75.0, 75.0)?,
        closed_form: gamma1_closed_form(),
    })
}

/// Radius beyond which `|x² g1(x) − 1| < 1e-12`.
pub fn gamma2_tail_start() -> f64 {
    let mut x = 1.0;
    while (x * x * g1(x) - 1.0).abs() >= 1e-12 {
        x += 0.25;
    }
    x
}

// dyadic panels into the logarithmic endpoint, then unit panels
fn ln_weighted_breakpoints(cutoff: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = 0.1 * 2f64.powi(-60);
    while x < 0.1 {
        pts.push(x);
        x *= 2.0;
    }
    pts.push(0.1);
    let n = (cutoff - 0.1).ceil().max(1.0) as usize;
    for j in 1..=n {
        pts.push(0.1 + (cutoff - 0.1) * j as f64 / n as f64);
    }
    pts
}

/// `∫₀^X ln(x) d/dx(x² g1(x)) dx`
pub fn gamma2_log_integral(cutoff: f64) -> Result<f64> {
    let pts = ln_weighted_breakpoints(cutoff);
    quad::integrate_breakpoints(
        |x| if x == 0.0 { 0.0 } else { x.ln() * d_x2_g1(x) },
        &pts,
        AdaptiveOptions::with_tol(1e-17, 1e-15),
    )
}

/// `γ2 = exp(2/3 − ∫₀^∞ ln(x) d/dx(x² g1) dx)`, integrated to `cutoff`.
pub fn gamma2_with_cutoff(cutoff: f64) -> Result<f64> {
    Ok((2.0 / 3.0 - gamma2_log_integral(cutoff)?).exp())
}

pub fn gamma2() -> Result<f64> {
    gamma2_with_cutoff(gamma2_tail_start().max(40.0))
}

/// The same constant after integrating by parts:
/// `∫ ln(x) F' = −∫₀¹ F/x − ∫₁^∞ (F − 1)/x` with `F = x² g1`.
pub fn gamma2_by_parts() -> Result<f64> {
    let opts = AdaptiveOptions::with_tol(1e-17, 1e-15);
    let f = |x: f64| x * x * g1(x);
    let inner = quad::integrate(|x| if x == 0.0 { 0.0 } else { f(x) / x }, 0.0, 1.0, opts)?;
    let pts: Vec<f64> = (0..=79).map(|j| 1.0 + j as f64).collect();
    let outer = quad::integrate_breakpoints(|x| (f(x) - 1.0) / x, &pts, opts)?;
    Ok((2.0 / 3.0 + inner + outer).exp())
}

/// `G(z) = [t(√((1+z)μ)) / t(√μ)]² √(1+z) Θ(1+z)` for a gap profile `t`.
pub struct GFunction<'a> {
    t: &'a dyn Fn(f64) -> f64,
    mu: f64,
    t_ref: f64,
    p_max: f64,
}

/// Step in `z` for `G'(0)` and `G''(0)`.
pub const G_STEP: f64 = 1e-3;

impl<'a> GFunction<'a> {
    pub fn new(t: &'a dyn Fn(f64) -> f64, mu: f64, p_max: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidArgument(format!("G(z) needs mu > 0, got {mu}")));
        }
        let t_ref = t(mu.sqrt());
        if t_ref == 0.0 || !t_ref.is_finite() {
            return Err(Error::DegenerateProfile(t_ref));
        }
        Ok(Self { t, mu, t_ref, p_max })
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if z <= -1.0 {
            return Ok(0.0);
        }
        let p = ((1.0 + z) * self.mu).sqrt();
        if p > self.p_max {
            return Err(Error::ProfileOutOfRange(p));
        }
        let r = (self.t)(p) / self.t_ref;
        Ok(r * r * (1.0 + z).sqrt())
    }

    /// `(G'(0), G''(0))` by centered differences with one Richardson step.
    pub fn derivatives(&self) -> Result<(f64, f64)> {
        let g0 = self.eval(0.0)?;
        let d = |h: f64| -> Result<(f64, f64)> {
            let (gp, gm) = (self.eval(h)?, self.eval(-h)?);
            Ok(((gp - gm) / (2.0 * h), (gp - 2.0 * g0 + gm) / (h * h)))
        };
        let (d1h, d2h) = d(G_STEP)?;
        let (d1f, d2f) = d(0.5 * G_STEP)?;
        Ok(((4.0 * d1f - d1h) / 3.0, (4.0 * d2f - d2h) / 3.0))
    }
}

/// `(leading, corrected)` WHH slope in units where it reads `−6/(γ1 β_c μ)`.
pub fn slope_expansion(gamma1: f64, gamma2: f64, beta_c_mu: f64, gp0: f64, gpp0: f64) -> Result<(f64, f64)> {
    if !(beta_c_mu > 1.0) {
        return Err(Error::InvalidArgument(format!("expansion needs beta_c*mu > 1, got {beta_c_mu}")));
    }
    let nu = beta_c_mu;
    let leading = -6.0 / (gamma1 * nu);
    let correction = -(3.0 / gamma1) * gp0 * (gamma2 * nu).ln() / (nu * nu) + (PI * PI / 6.0 - 1.0 / gamma1) * gpp0 / (nu * nu);
    Ok((leading, leading * (1.0 + correction)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCheck {
    pub beta_c_mu: f64,
    pub numerator: f64,
    pub numerator_expansion: f64,
    pub denominator: f64,
    pub denominator_expansion: f64,
}

impl ExpansionCheck {
    pub fn numerator_residual(&self) -> f64 {
        self.numerator - self.numerator_expansion
    }

    pub fn denominator_residual(&self) -> f64 {
        self.denominator - self.denominator_expansion
    }
}

/// `∫ G(x/ν) cosh⁻²(x/2) dx` and `∫ G(x/ν)(g1(x) + (2/3)(x + ν) g2(x)) dx`
/// against `4 + (2π²/3)G''(0)/ν²` and
/// `(2/3)γ1ν + [2G'(0) ln(γ2ν) + (2/3)G''(0)]/ν`.
pub fn expansion_integral_checks<G>(g: G, gp0: f64, gpp0: f64, beta_c_mu: f64, gamma1: f64, gamma2: f64) -> Result<ExpansionCheck>
where
    G: Fn(f64) -> f64,
{
    if !(beta_c_mu >= 10.0) {
        return Err(Error::InvalidArgument(format!("expansion check needs beta_c*mu >= 10, got {beta_c_mu}")));
    }
    let nu = beta_c_mu;
    let opts = AdaptiveOptions::with_tol(1e-16, 1e-14);
    let gz = |x: f64| g(x / nu);
    // the thermal factor is below 1e-34 outside |x| < 80
    let mut pts: Vec<f64> = (0..=160).map(|j| -80.0 + j as f64).collect();
    if nu < 80.0 {
        pts.push(-nu);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let numerator = quad::integrate_breakpoints(|x| gz(x) * sech2_half(x), &pts, opts)?;

    // g1 decays like 1/x², so the denominator needs the whole line
    let den = |x: f64| gz(x) * (g1(x) + 2.0 / 3.0 * (x + nu) * g2(x));
    let core_hi = 80.0f64.max(nu);
    let mut core_pts: Vec<f64> = (0..=400).map(|j| -core_hi + 2.0 * core_hi * j as f64 / 400.0).collect();
    core_pts.push(-nu);
    core_pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    core_pts.dedup();
    let core = quad::integrate_breakpoints(den, &core_pts, opts)?;
    let tail_opts = AdaptiveOptions::with_tol(1e-18, 1e-14);
    let right = quad::integrate_to_infinity(den, core_hi, core_hi, tail_opts)?;
    let left = quad::integrate_to_infinity(|y| den(-y), core_hi, core_hi, tail_opts)?;
    let denominator = left + core + right;

    Ok(ExpansionCheck {
        beta_c_mu,
        numerator,
        numerator_expansion: 4.0 + 2.0 * PI * PI / 3.0 * gpp0 / (nu * nu),
        denominator,
        denominator_expansion: 2.0 / 3.0 * gamma1 * nu + (2.0 * gp0 * (gamma2 * nu).ln() + 2.0 / 3.0 * gpp0) / nu,
    })
}

/// Least-squares slope of `ln|y|` against `ln x`.
pub fn fitted_order(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// `c[G] = ∫₀^∞ [G(z) − G(−z) − 2G'(0) z Θ(1−z)] / z² dz`.
///
/// The odd part of `G` enters the `g1` term of the denominator through the
/// `1/x²` tail of `g1`, which probes `G` far from `z = 0`. Its contribution is
/// `c[G]/(β_c μ)`, the same order as the `G'(0)` and `G''(0)` corrections, and
/// is not fixed by the Taylor coefficients at the origin. `G` is taken to
/// vanish beyond `z_max`, which may be infinite.
pub fn odd_part_constant<G: Fn(f64) -> f64>(g: G, gp0: f64, z_max: f64) -> Result<f64> {
    let opts = AdaptiveOptions::with_tol(1e-14, 1e-12);
    let gz = |z: f64| if z > z_max { 0.0 } else { g(z) };
    let odd = |z: f64| gz(z) - gz(-z);
    let reduced = |z: f64| (odd(z) - 2.0 * gp0 * z) / (z * z);
    // the reduced integrand is odd and smooth, so ≈ linear on [0, Z0];
    // cancellation noise ε/z² makes sampling closer to 0 useless
    const Z0: f64 = 1e-2;
    let head = 0.5 * Z0 * reduced(Z0);
    let mut pts = vec![Z0, 1.0];
    if z_max > Z0 && z_max < 1.0 {
        pts.insert(1, z_max);
    }
    let near = head + quad::integrate_breakpoints(reduced, &pts, opts)?;
    if z_max <= 1.0 {
        return Ok(near);
    }
    let far = if z_max.is_finite() {
        let n = (z_max - 1.0).ceil().clamp(1.0, 400.0) as usize;
        let pts: Vec<f64> = (0..=n).map(|j| 1.0 + (z_max - 1.0) * j as f64 / n as f64).collect();
        quad::integrate_breakpoints(|z| odd(z) / (z * z), &pts, opts)?
    } else {
        quad::integrate_to_infinity(|z| odd(z) / (z * z), 1.0, 1.0, opts)?
    };
    Ok(near + far)
}

/// Corrected slope with the `c[G]` term added to the denominator expansion:
/// `corrected · (1 − (3/(2γ1)) c[G] / (β_c μ)²)` to the same order.
pub fn slope_expansion_completed(gamma1: f64, gamma2: f64, beta_c_mu: f64, gp0: f64, gpp0: f64, odd_constant: f64) -> Result<f64> {
    let (leading, corrected) = slope_expansion(gamma1, gamma2, beta_c_mu, gp0, gpp0)?;
    let nu = beta_c_mu;
    Ok(corrected - leading * 1.5 * odd_constant / (gamma1 * nu * nu))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhhReport {
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta_c_mu: f64,
    pub gp0: f64,
    pub gpp0: f64,
    pub slope_exact: f64,
    pub slope_whh_leading: f64,
    pub slope_whh_corrected: f64,
    /// `slope_exact/slope_whh_corrected − 1`
    pub relative_gap: f64,
    /// `slope_exact/slope_whh_leading − 1`
    pub relative_gap_leading: f64,
    /// `c[G]` from [`odd_part_constant`]
    pub odd_constant: f64,
    pub slope_whh_completed: f64,
    /// `slope_exact/slope_whh_completed − 1`
    pub relative_gap_completed: f64,
}

impl WhhReport {
    /// Named scalars in a stable order for serialization.
    pub fn fields(&self) -> [(&'static str, f64); 13] {
        [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("beta_c_mu", self.beta_c_mu),
            ("Gp0", self.gp0),
            ("Gpp0", self.gpp0),
            ("slope_exact", self.slope_exact),
            ("slope_whh_leading", self.slope_whh_leading),
            ("slope_whh_corrected", self.slope_whh_corrected),
            ("relative_gap", self.relative_gap),
            ("relative_gap_leading", self.relative_gap_leading),
            ("odd_constant", self.odd_constant),
            ("slope_whh_completed", self.slope_whh_completed),
            ("relative_gap_completed", self.relative_gap_completed),
        ]
    }
}

/// Exact slope against its WHH expansion for a solved potential.
pub fn whh_compare(sol: &GapSolution, coeffs: &GLCoefficients, profile: &GapProfile<'_>, mu: f64) -> Result<WhhReport> {
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("WHH comparison needs mu > 0, got {mu}")));
    }
    let t = |p: f64| profile.eval(p);
    let g = GFunction::new(&t, mu, sol.grid.p_max())?;
    let (gp0, gpp0) = g.derivatives()?;
    let gamma1 = gamma1()?.value;
    let gamma2 = gamma2()?;
    let nu = sol.beta_c * mu;
    let (leading, corrected) = slope_expansion(gamma1, gamma2, nu, gp0, gpp0)?;
    let z_max = sol.grid.p_max().powi(2) / mu - 1.0;
    let failure = std::cell::RefCell::new(None);
    let odd_constant = odd_part_constant(
        |z| {
            g.eval(z).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                0.0
            })
        },
        gp0,
        z_max,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let completed = slope_expansion_completed(gamma1, gamma2, nu, gp0, gpp0, odd_constant)?;
    let exact = coeffs.slope_appendix_form;
    Ok(WhhReport {
        gamma1,
        gamma2,
        beta_c_mu: nu,
        gp0,
        gpp0,
        slope_exact: exact,
        slope_whh_leading: leading,
        slope_whh_corrected: corrected,
        relative_gap: exact / corrected - 1.0,
        relative_gap_leading: exact / leading - 1.0,
        odd_constant,
        slope_whh_completed: completed,
        relative_gap_completed: exact / completed - 1.0,
    })
}
