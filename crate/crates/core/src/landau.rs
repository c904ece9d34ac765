//! Landau-level spectrum of the center-of-mass operator for a radial pair
//! density, its spectral-gap fit, and closed-form checks of the free resolvent.
//!
//! For a density `ρ(|r|)` and field `B`, with `u = x1² + x2²`,
//!
//! `R_{k,p3} = π ∫₀^∞ du ∫ dx3 ρ(√(u + x3²)) cos(x3 p3) e^{−Bu/2} L_k(Bu)`
//!
//! and the corresponding energy is `E_{k,p3} = 2B(2k+1) + p3²`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gap_solver::PositionEigenfunction;
use crate::interp::CubicHermite;
use crate::quad::{self, AdaptiveOptions, GaussLegendre};
use crate::specfun::{bessel_j0, laguerre_scaled, laguerre_scaled_table, laguerre_zeros};

/// Largest Landau index accepted by [`r_value`] and used by default grids.
pub const K_MAX_DEFAULT: usize = 500;

const NODES_PER_PANEL: usize = 16;
const SAMPLES_FROM_EIGENFUNCTION: usize = 2049;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Normalized radial density `ρ(r)` with `4π∫r²ρ = 1` and its moments.
#[derive(Clone)]
pub struct RadialDensity {
    profile: Profile,
    second_moment: f64,
    fourth_moment: f64,
    r_max: f64,
    normalization: f64,
}

impl std::fmt::Debug for RadialDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialDensity")
            .field("second_moment", &self.second_moment)
            .field("fourth_moment", &self.fourth_moment)
            .field("r_max", &self.r_max)
            .finish()
    }
}

fn moment(profile: &Profile, m: i32, r_max: f64, spacing: f64) -> Result<f64> {
    let n = ((r_max / spacing).ceil() as usize).clamp(8, 4000);
    let pts: Vec<f64> = (0..=n).map(|j| r_max * j as f64 / n as f64).collect();
    let v = quad::integrate_breakpoints(
        |r| r * r * r.powi(m) * profile(r),
        &pts,
        AdaptiveOptions::with_tol(1e-300, 1e-13),
    )?;
    Ok(4.0 * PI * v)
}

impl RadialDensity {
    /// `ρ(r) = (2πσ²)^{-3/2} e^{-r²/(2σ²)}`, for which `⟨r²⟩ = 3σ²`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        let c = (2.0 * PI * sigma * sigma).powf(-1.5);
        let s2 = sigma * sigma;
        let profile: Profile = Arc::new(move |r: f64| c * (-0.5 * r * r / s2).exp());
        // r² ρ(r) is below 1e-16 of its peak beyond nine standard deviations
        Self::normalized(profile, 9.0 * sigma, sigma / 4.0)
    }

    /// Density proportional to `f` on `[0, r_max]` and zero beyond.
    pub fn from_fn<F>(f: F, r_max: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
        }
        let profile: Profile = Arc::new(move |r: f64| if r > r_max { 0.0 } else { f(r) });
        Self::normalized(profile, r_max, r_max / 64.0)
    }

    /// Density from samples `(r_i, ρ_i)`, interpolated by cubic Hermite
    /// splines with three-point slopes.
    pub fn from_samples(rs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if rs.len() < 4 || rs.len() != values.len() {
            return Err(Error::InvalidArgument("a density needs at least four matching samples".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("density samples must be finite and non-negative".into()));
        }
        let slopes = three_point_slopes(&rs, &values);
        let spline = CubicHermite::with_slopes(rs, values, slopes)?;
        let r_max = spline.x_max();
        let spacing = (r_max - spline.x_min()) / (spline.knots().len() as f64);
        // tiny negative undershoots of the spline are clipped
        let profile: Profile = Arc::new(move |r: f64| if r > r_max { 0.0 } else { spline.eval(r).max(0.0) });
        Self::normalized(profile, r_max, 16.0 * spacing)
    }

    /// `|φ*(r)|²` of a reconstructed position-space eigenfunction.
    pub fn from_eigenfunction(phi: &PositionEigenfunction) -> Result<Self> {
        let r_max = phi.cutoff_radius();
        let n = SAMPLES_FROM_EIGENFUNCTION;
        let rs: Vec<f64> = (0..n).map(|j| r_max * j as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = rs.par_iter().map(|&r| phi.eval(r).powi(2)).collect();
        Self::from_samples(rs, values)
    }

    fn normalized(profile: Profile, r_max: f64, spacing: f64) -> Result<Self> {
        let norm = moment(&profile, 0, r_max, spacing)?;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument(format!("density has non-positive mass {norm}")));
        }
        let raw = profile;
        let profile: Profile = Arc::new(move |r: f64| raw(r) / norm);
        let second_moment = moment(&profile, 2, r_max, spacing)?;
        let fourth_moment = moment(&profile, 4, r_max, spacing)?;
        let normalization = moment(&profile, 0, r_max, spacing)?;
        Ok(Self {
            profile,
            second_moment,
            fourth_moment,
            r_max,
            normalization,
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.profile)(r)
    }

    /// `⟨|r|²⟩`
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// `⟨|r|⁴⟩`
    pub fn fourth_moment(&self) -> f64 {
        self.fourth_moment
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// `4π∫r²ρ dr` recomputed after normalization.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    fn length(&self) -> f64 {
        self.second_moment.sqrt()
    }
}

fn three_point_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let (a, b, c) = match i {
                0 => (0, 1, 2),
                i if i == n - 1 => (n - 3, n - 2, n - 1),
                i => (i - 1, i, i + 1),
            };
            // derivative at xs[i] of the quadratic through the three points
            let (x0, x1, x2) = (xs[a], xs[b], xs[c]);
            let x = xs[i];
            ys[a] * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
                + ys[b] * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
                + ys[c] * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
        })
        .collect()
}

fn uniform_breaks(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    let n = (((hi - lo) / spacing).ceil() as usize).max(1);
    (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect()
}

fn merge_breaks(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|x| *x >= lo && *x <= hi);
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * hi.abs().max(1.0));
    pts
}

fn nested_opts() -> AdaptiveOptions {
    AdaptiveOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_subdivisions: 2000,
        rule_points: 10,
    }
}

/// Target size of `R` at the largest `p3` of a [`LandauGrid::covering`] grid.
pub const TAIL_TOL: f64 = 1e-10;

/// `4π ∫ r² ρ(r) j0(qr) dr`, the `B → 0` value of `R` at `E = q²` for `k = 0`.
fn radial_transform(rho: &RadialDensity, q: f64) -> f64 {
    let width = (rho.length() / 3.0).min(if q > 0.0 { PI / q } else { f64::INFINITY });
    let (nodes, weights) = quad::composite_nodes(&GaussLegendre::new(NODES_PER_PANEL), &uniform_breaks(0.0, rho.r_max, width));
    4.0 * PI
        * nodes
            .iter()
            .zip(&weights)
            .map(|(&r, w)| w * r * r * rho.value(r) * crate::specfun::spherical_j0(q * r))
            .sum::<f64>()
}

/// `2∫₀^∞ ρ(√(u + x²)) cos(x p3) dx` with panels at half periods of the cosine.
fn cosine_transform(rho: &RadialDensity, u: f64, p3: f64) -> Result<f64> {
    let r2 = rho.r_max * rho.r_max;
    if u >= r2 {
        return Ok(0.0);
    }
    let x_max = (r2 - u).sqrt();
    let mut pts = uniform_breaks(0.0, x_max, rho.length() / 4.0);
    if p3 != 0.0 {
        pts.extend(uniform_breaks(0.0, x_max, PI / p3.abs()));
    }
    let pts = merge_breaks(pts, 0.0, x_max);
    let v = quad::integrate_breakpoints(|x| rho.value((u + x * x).sqrt()) * (x * p3).cos(), &pts, nested_opts())?;
    Ok(2.0 * v)
}

fn transverse_integral<W: Fn(f64) -> f64>(rho: &RadialDensity, p3: f64, weight: W, extra: Vec<f64>) -> Result<f64> {
    let u_max = rho.r_max * rho.r_max;
    let mut pts = uniform_breaks(0.0, u_max, rho.second_moment / 12.0);
    pts.extend(extra);
    let pts = merge_breaks(pts, 0.0, u_max);
    let mut failure = None;
    let v = quad::integrate_breakpoints(
        |u| match cosine_transform(rho, u, p3) {
            Ok(c) => c * weight(u),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &pts,
        nested_opts(),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(PI * v),
    }
}

/// `R_{k,p3}` by nested adaptive quadrature; `u`-panels split at the zeros of
/// `L_k(Bu)` and `x3`-panels at half periods of `cos(x3 p3)`.
pub fn r_value(k: usize, p3: f64, b: f64, rho: &RadialDensity) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("field strength must be positive, got {b}")));
    }
    if k > K_MAX_DEFAULT {
        return Err(Error::InvalidArgument(format!("Landau index {k} exceeds {K_MAX_DEFAULT}")));
    }
    let zeros: Vec<f64> = laguerre_zeros(k).into_iter().map(|x| x / b).collect();
    transverse_integral(rho, p3, |u| laguerre_scaled(k, b * u), zeros)
}

/// `B → 0` limit of `R` at fixed energy:
/// `π∫du∫dx3 ρ cos(x3 p3) J0(√((E − p3²)u))`.
pub fn b_zero_limit_value(p3: f64, e: f64, rho: &RadialDensity) -> Result<f64> {
    let q2 = e - p3 * p3;
    if q2 < 0.0 {
        return Err(Error::InvalidArgument(format!("energy {e} is below p3² = {}", p3 * p3)));
    }
    let u_max = rho.r_max * rho.r_max;
    // J0(√(q²u)) changes sign about once per π of its argument
    let extra: Vec<f64> = if q2 > 0.0 {
        let n = ((q2 * u_max).sqrt() / PI).ceil() as usize;
        (1..=n).map(|j| (j as f64 * PI).powi(2) / q2).collect()
    } else {
        Vec::new()
    };
    transverse_integral(rho, p3, |u| bessel_j0((q2 * u).sqrt()), extra)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub k: usize,
    pub p3: f64,
    pub r: f64,
    pub e: f64,
}

/// Landau indices `0..=k_max` crossed with a set of `p3 ≥ 0` (R is even in p3).
#[derive(Debug, Clone, PartialEq)]
pub struct LandauGrid {
    pub k_max: usize,
    pub p3: Vec<f64>,
}

impl LandauGrid {
    /// Grid whose energies reach `100/⟨r²⟩` and whose largest `p3` lies where
    /// the transform of `ρ` has decayed below [`TAIL_TOL`]. Points cluster
    /// quadratically at 0.
    pub fn covering(rho: &RadialDensity, k_max: usize, n_p3: usize) -> Self {
        let n = n_p3.max(2);
        let mut p3_max = (100.0 / rho.second_moment).sqrt().max(12.0 / rho.length());
        let tail = |q: f64| [1.0, 1.25, 1.5, 2.0].iter().map(|s| radial_transform(rho, s * q).abs()).fold(0.0, f64::max);
        while tail(p3_max) > TAIL_TOL && p3_max * rho.length() < 200.0 {
            p3_max *= 1.25;
        }
        let p3 = (0..n)
            .map(|j| {
                let s = j as f64 / (n - 1) as f64;
                p3_max * s * s
            })
            .collect();
        Self { k_max, p3 }
    }

    /// Same Landau indices with midpoints inserted between the `p3` values.
    pub fn refined(&self) -> Self {
        let mut p3 = Vec::with_capacity(2 * self.p3.len());
        for w in self.p3.windows(2) {
            p3.push(w[0]);
            p3.push(0.5 * (w[0] + w[1]));
        }
        p3.extend(self.p3.last());
        Self { k_max: self.k_max, p3 }
    }

    pub fn p3_max(&self) -> f64 {
        self.p3.iter().fold(0.0, |m, p| m.max(p.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandauSpectrum {
    pub b: f64,
    /// Ordered by `k`, then by position in the `p3` list.
    pub entries: Vec<SpectrumEntry>,
    pub fitted_c: f64,
    pub e0: f64,
}

impl LandauSpectrum {
    pub fn min_energy(&self) -> f64 {
        self.entries.iter().map(|e| e.e).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_r(&self) -> f64 {
        self.entries.iter().map(|e| e.r.abs()).fold(0.0, f64::max)
    }
}

/// All `R_{k,p3}` on a grid, from one fixed product rule.
///
/// With `s = √u`, `R = 2π ∫ s C(s², p3) e^{−Bs²/2} L_k(Bs²) ds`, where `C` is
/// the cosine transform along `x3`. Both integrals use 16-point Gauss–Legendre
/// panels narrower than half the local oscillation period, so the whole
/// spectrum is two matrix products.
pub fn landau_spectrum(b: f64, rho: &RadialDensity, grid: &LandauGrid) -> Result<LandauSpectrum> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("field strength must be positive, got {b}")));
    }
    if grid.p3.is_empty() {
        return Err(Error::InvalidArgument("the p3 list is empty".into()));
    }
    let rule = GaussLegendre::new(NODES_PER_PANEL);
    let length = rho.length();
    let r_max = rho.r_max;
    let laguerre_freq = 2.0 * ((grid.k_max as f64 + 1.0) * b).sqrt();
    let s_width = (length / 3.0).min(PI / laguerre_freq);
    let (s_nodes, s_weights) = quad::composite_nodes(&rule, &uniform_breaks(0.0, r_max, s_width));
    let p3_max = grid.p3_max();
    let x_width = if p3_max > 0.0 { (length / 3.0).min(PI / p3_max) } else { length / 3.0 };
    let (x_nodes, x_weights) = quad::composite_nodes(&rule, &uniform_breaks(0.0, r_max, x_width));

    let density = DMatrix::from_fn(s_nodes.len(), x_nodes.len(), |i, m| {
        let r = s_nodes[i].hypot(x_nodes[m]);
        2.0 * x_weights[m] * rho.value(r)
    });
    let cosines = DMatrix::from_fn(x_nodes.len(), grid.p3.len(), |m, j| (x_nodes[m] * grid.p3[j]).cos());
    let transform = density * cosines;

    let columns: Vec<Vec<f64>> = s_nodes
        .par_iter()
        .zip(&s_weights)
        .map(|(&s, &w)| {
            laguerre_scaled_table(grid.k_max, b * s * s)
                .into_iter()
                .map(|l| 2.0 * PI * w * s * l)
                .collect()
        })
        .collect();
    let weighted = DMatrix::from_fn(grid.k_max + 1, s_nodes.len(), |k, i| columns[i][k]);
    let r = weighted * transform;

    let entries: Vec<SpectrumEntry> = (0..=grid.k_max)
        .flat_map(|k| {
            let r = &r;
            grid.p3.iter().enumerate().map(move |(j, &p3)| SpectrumEntry {
                k,
                p3,
                r: r[(k, j)],
                e: 2.0 * b * (2 * k + 1) as f64 + p3 * p3,
            })
        })
        .collect();
    if let Some(bad) = entries.iter().find(|e| !(e.r.abs() < 1.0)) {
        log::warn!("|R| = {} is not below one at k = {}, p3 = {}", bad.r.abs(), bad.k, bad.p3);
    }
    let tail = entries
        .iter()
        .filter(|e| e.k == 0 && e.p3 == p3_max)
        .map(|e| e.r.abs())
        .fold(0.0, f64::max);
    if tail > TAIL_TOL {
        log::warn!("cosine transform tail {tail:e} at p3 = {p3_max} exceeds {TAIL_TOL:e}");
    }
    let (fitted_c, e0) = best_gap_fit(&entries, rho.second_moment);
    Ok(LandauSpectrum {
        b,
        entries,
        fitted_c,
        e0,
    })
}

/// Largest `c` with `1 − R² ≥ c E/(E0 + E)` on every entry.
pub fn gap_fit(entries: &[SpectrumEntry], e0: f64) -> f64 {
    entries
        .iter()
        .map(|e| (1.0 - e.r * e.r) * (e0 + e.e) / e.e)
        .fold(f64::INFINITY, f64::min)
}

/// [`gap_fit`] maximized over `E0 ∈ logspace(−2, 2)/⟨r²⟩` (41 points).
/// Returns `(c, E0)`.
pub fn best_gap_fit(entries: &[SpectrumEntry], second_moment: f64) -> (f64, f64) {
    (0..=40)
        .map(|j| 10f64.powf(-2.0 + 0.1 * j as f64) / second_moment)
        .map(|e0| (gap_fit(entries, e0), e0))
        .fold((f64::NEG_INFINITY, f64::NAN), |best, cur| if cur.0 > best.0 { cur } else { best })
}

fn resolvent_root(z: Complex64, mu: f64) -> Result<Complex64> {
    let mut s = (z + mu).sqrt();
    if s.im < 0.0 {
        s = -s;
    }
    if !(s.im > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "z + mu = {} lies on the spectrum [0, ∞)",
            z + mu
        )));
    }
    Ok(s)
}

/// Free resolvent kernel `g0^z(x) = −e^{i√(z+μ)|x|}/(4π|x|)` with
/// `Im√(z+μ) > 0`.
pub fn free_resolvent(x: [f64; 3], z: Complex64, mu: f64) -> Result<Complex64> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return Err(Error::InvalidArgument("the free resolvent is singular at x = 0".into()));
    }
    let s = resolvent_root(z, mu)?;
    Ok(-(Complex64::i() * s * r).exp() / (4.0 * PI * r))
}

/// `Im√(iω + μ)` from `((√(μ² + ω²) − μ)/2)^{1/2}`, written to avoid
/// cancellation when `μ > 0`.
pub fn resolvent_decay_rate(omega: f64, mu: f64) -> f64 {
    let h = mu.hypot(omega);
    if mu <= 0.0 {
        (0.5 * (h - mu)).sqrt()
    } else {
        (0.5 * omega * omega / (h + mu)).sqrt()
    }
}

/// `∫|x|^a |g0^{iω}(x)| dx`: the closed form `Γ(a+2) κ^{−a−2}` with
/// `κ = Im√(iω+μ)`, and a radial quadrature of the modulus of the kernel.
/// Returns `(closed, quadrature)`.
pub fn resolvent_weighted_norm(a: f64, omega: f64, mu: f64) -> Result<(f64, f64)> {
    if !(a > -2.0) {
        return Err(Error::InvalidArgument(format!("the weight exponent must exceed -2, got {a}")));
    }
    if omega == 0.0 {
        return Err(Error::InvalidArgument("omega must be non-zero".into()));
    }
    let z = Complex64::new(0.0, omega);
    let kappa = resolvent_root(z, mu)?.im;
    let closed = statrs::function::gamma::gamma(a + 2.0) * kappa.powf(-a - 2.0);
    // r = y² removes the endpoint singularity of r^{a+1} for a < −1
    let mut failure = None;
    let mut integrand = |y: f64| {
        if y == 0.0 {
            return 0.0;
        }
        let r = y * y;
        match free_resolvent([r, 0.0, 0.0], z, mu) {
            Ok(g) => 4.0 * PI * r * r * r.powf(a) * g.norm() * 2.0 * y,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let opts = AdaptiveOptions::with_tol(0.0, 1e-12);
    let knee = kappa.recip().sqrt();
    let head = quad::integrate(&mut integrand, 0.0, knee, opts);
    let tail = quad::integrate_to_infinity(&mut integrand, knee, knee, opts);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((closed, head? + tail?))
}

/// `∫ g0^z (−Δ − μ − z) φ dx` for the test function `φ(x) = e^{−|x|²}`,
/// reduced radially. The Green-function identity makes it `−φ(0) = −1`.
pub fn bump_identity(z: Complex64, mu: f64) -> Result<Complex64> {
    let s = resolvent_root(z, mu)?;
    let k2 = s * s;
    // 4πr² · g0(r) · (6 − 4r² − k²)e^{−r²}
    let integrand = |r: f64| -> Complex64 {
        let g = -(Complex64::i() * s * r).exp() * r;
        g * (Complex64::new(6.0 - 4.0 * r * r, 0.0) - k2) * (-r * r).exp()
    };
    let pts = uniform_breaks(0.0, 9.0, 0.25f64.min(PI / (4.0 * s.re.abs().max(1e-3))));
    let opts = AdaptiveOptions::with_tol(1e-15, 1e-12);
    let re = quad::integrate_breakpoints(|r| integrand(r).re, &pts, opts)?;
    let im = quad::integrate_breakpoints(|r| integrand(r).im, &pts, opts)?;
    Ok(Complex64::new(re, im))
}
