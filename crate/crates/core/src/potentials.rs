//! Radial pair potentials and their s-wave momentum kernels.
//!
//! Fourier convention: `Ṽ(k) = ∫ V(r) e^{-ik·r} dr`. The s-wave kernel is the
//! angular average of `Ṽ(p − q)`, or equivalently
//! `Ṽ₀(p, q) = 4π ∫ r² V(r) j0(pr) j0(qr) dr`.

use std::f64::consts::PI;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::CubicHermite;
use crate::quad::{self, AdaptiveOptions, GaussLegendre};
use crate::specfun::spherical_j0;

/// A symmetric s-wave momentum kernel `K(p, q)`.
///
/// The Birman–Schwinger discretization only needs kernel values on the
/// momentum grid, so anything implementing this trait can be solved for
/// `β_c`, not just potentials given in position space.
pub trait MomentumKernel: Send + Sync {
    fn eval(&self, p: f64, q: f64) -> f64;

    /// Characteristic length `a` used to size momentum grids.
    fn length_scale(&self) -> f64;

    /// Upper bound on the position-space potential, used for default β brackets.
    fn sup_norm(&self) -> f64;

    /// Kernel matrix on `nodes`, symmetric by construction.
    fn matrix(&self, nodes: &[f64]) -> DMatrix<f64> {
        symmetric_matrix(nodes, |p, q| self.eval(p, q))
    }
}

/// Lower triangle evaluated in parallel, mirrored to the upper.
pub fn symmetric_matrix<F: Fn(f64, f64) -> f64 + Sync>(nodes: &[f64], f: F) -> DMatrix<f64> {
    let n = nodes.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..=i).map(|j| f(nodes[i], nodes[j])).collect())
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
            m[(j, i)] = *v;
        }
    }
    m
}

/// Rank-one kernel `K(p, q) = v(p) v(q)`.
#[derive(Clone)]
pub struct SeparableKernel {
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    length_scale: f64,
    sup_norm: f64,
}

impl SeparableKernel {
    pub fn new<F>(profile: F, length_scale: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let sup = (0..2000)
            .map(|i| profile(i as f64 * 10.0 / (2000.0 * length_scale)).powi(2))
            .fold(0.0, f64::max);
        Self {
            profile: Arc::new(profile),
            length_scale,
            sup_norm: sup,
        }
    }

    pub fn profile(&self, p: f64) -> f64 {
        (self.profile)(p)
    }
}

impl fmt::Debug for SeparableKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeparableKernel")
            .field("length_scale", &self.length_scale)
            .finish_non_exhaustive()
    }
}

impl MomentumKernel for SeparableKernel {
    fn eval(&self, p: f64, q: f64) -> f64 {
        self.profile(p) * self.profile(q)
    }

    fn length_scale(&self) -> f64 {
        self.length_scale
    }

    fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    fn matrix(&self, nodes: &[f64]) -> DMatrix<f64> {
        let v: Vec<f64> = nodes.iter().map(|&p| self.profile(p)).collect();
        DMatrix::from_fn(nodes.len(), nodes.len(), |i, j| v[i] * v[j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Gaussian,
    Exponential,
    Tabulated,
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PotentialKind::Gaussian => "gaussian",
            PotentialKind::Exponential => "exponential",
            PotentialKind::Tabulated => "tabulated",
        })
    }
}

/// Potential given by samples `(r_i, V_i)`: monotone cubic interpolation
/// inside the data, the first value below it, zero beyond the last sample.
#[derive(Debug, Clone)]
pub struct TabulatedPotential {
    spline: CubicHermite,
    sup: f64,
    range: f64,
}

impl TabulatedPotential {
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::InvalidPotential(format!(
                "tabulated potential needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        if let Some((r, v)) = samples.iter().find(|(r, v)| !r.is_finite() || !v.is_finite() || *r < 0.0) {
            return Err(Error::InvalidPotential(format!("invalid sample ({r}, {v})")));
        }
        if let Some((r, v)) = samples.iter().find(|(_, v)| *v < 0.0) {
            return Err(Error::InvalidPotential(format!(
                "potential must be non-negative, got V({r}) = {v}"
            )));
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let spline = CubicHermite::monotone(xs, ys)
            .map_err(|e| Error::InvalidPotential(format!("tabulated samples: {e}")))?;
        let sup = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        if sup == 0.0 {
            return Err(Error::InvalidPotential("tabulated potential is identically zero".into()));
        }
        let (r0, v0) = samples[0];
        let (r1, v1) = samples[1];
        if r0 > 0.0 && v1 > 0.0 && (v0 / v1).ln() / (r1 / r0).ln() > 0.5 {
            warn!("tabulated potential grows steeply towards r = 0; V may be unbounded");
        }
        let mut tab = Self { spline, sup, range: 1.0 };
        tab.range = tab.rms_range();
        Ok(tab)
    }

    /// Read a two-column whitespace-separated file; `#` starts a comment.
    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let cols: Vec<&str> = content.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidPotential(format!("line {}: cannot parse number '{s}'", lineno + 1))
                })
            };
            if cols.len() != 2 {
                return Err(Error::InvalidPotential(format!(
                    "line {}: expected two columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            samples.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::from_samples(&samples)
    }

    pub fn value(&self, r: f64) -> f64 {
        if r > self.spline.x_max() {
            0.0
        } else {
            self.spline.eval(r).max(0.0)
        }
    }

    pub fn knots(&self) -> &[f64] {
        self.spline.knots()
    }

    pub fn r_max(&self) -> f64 {
        self.spline.x_max()
    }

    // length with ⟨r²⟩ = 3a², matching the gaussian's range parameter
    fn rms_range(&self) -> f64 {
        let pts = self.radial_breakpoints(f64::INFINITY);
        let opts = AdaptiveOptions::with_tol(0.0, 1e-10);
        let m2 = quad::integrate_breakpoints(|r| r * r * self.value(r), &pts, opts).unwrap_or(0.0);
        let m4 = quad::integrate_breakpoints(|r| r.powi(4) * self.value(r), &pts, opts).unwrap_or(0.0);
        if m2 > 0.0 && m4 > 0.0 {
            (m4 / (3.0 * m2)).sqrt()
        } else {
            self.r_max() / 3.0
        }
    }

    fn radial_breakpoints(&self, max_width: f64) -> Vec<f64> {
        let mut pts = vec![0.0];
        for &k in self.knots() {
            let last = *pts.last().unwrap();
            if k <= last {
                continue;
            }
            let pieces = ((k - last) / max_width).ceil().max(1.0) as usize;
            for j in 1..=pieces {
                pts.push(last + (k - last) * j as f64 / pieces as f64);
            }
        }
        pts
    }

    /// Radial product rule `(r_k, 4π r_k² w_k V(r_k))` resolving oscillations up
    /// to momentum `p_max`.
    fn radial_rule(&self, p_max: f64) -> (Vec<f64>, Vec<f64>) {
        let width = (2.0 / p_max.max(1e-12)).min(0.25 * self.range);
        let pts = self.radial_breakpoints(width);
        let rule = GaussLegendre::new(10);
        let (rs, ws) = quad::composite_nodes(&rule, &pts);
        let weights = rs
            .iter()
            .zip(&ws)
            .map(|(&r, &w)| 4.0 * PI * r * r * w * self.value(r))
            .collect();
        (rs, weights)
    }
}

/// Radially symmetric, non-negative pair potential.
#[derive(Debug, Clone)]
pub enum Potential {
    /// `λ e^{-r²/(2a²)}`
    Gaussian { strength: f64, range: f64 },
    /// `λ e^{-r/a}`
    Exponential { strength: f64, range: f64 },
    Tabulated(TabulatedPotential),
}

fn check_parameters(strength: f64, range: f64) -> Result<()> {
    if !(strength.is_finite() && strength > 0.0) {
        return Err(Error::InvalidPotential(format!("strength must be positive, got {strength}")));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::InvalidPotential(format!("range must be positive, got {range}")));
    }
    Ok(())
}

impl Potential {
    pub fn gaussian(strength: f64, range: f64) -> Result<Self> {
        check_parameters(strength, range)?;
        Ok(Potential::Gaussian { strength, range })
    }

    pub fn exponential(strength: f64, range: f64) -> Result<Self> {
        check_parameters(strength, range)?;
        Ok(Potential::Exponential { strength, range })
    }

    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        TabulatedPotential::from_samples(samples).map(Potential::Tabulated)
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Gaussian { .. } => PotentialKind::Gaussian,
            Potential::Exponential { .. } => PotentialKind::Exponential,
            Potential::Tabulated(_) => PotentialKind::Tabulated,
        }
    }

    /// Same shape with the strength multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        match self {
            Potential::Gaussian { strength, range } => Self::gaussian(strength * factor, *range),
            Potential::Exponential { strength, range } => Self::exponential(strength * factor, *range),
            Potential::Tabulated(t) => {
                if !(factor.is_finite() && factor > 0.0) {
                    return Err(Error::InvalidPotential(format!("scale factor must be positive, got {factor}")));
                }
                let samples: Vec<(f64, f64)> = t
                    .spline
                    .knots()
                    .iter()
                    .zip(t.spline.values())
                    .map(|(&r, &v)| (r, v * factor))
                    .collect();
                Self::tabulated(&samples)
            }
        }
    }

    /// `V(r)` for `r ≥ 0`.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Potential::Gaussian { strength, range } => strength * (-0.5 * (r / range).powi(2)).exp(),
            Potential::Exponential { strength, range } => strength * (-r / range).exp(),
            Potential::Tabulated(t) => t.value(r),
        }
    }

    pub fn range(&self) -> f64 {
        match self {
            Potential::Gaussian { range, .. } | Potential::Exponential { range, .. } => *range,
            Potential::Tabulated(t) => t.range,
        }
    }

    pub fn strength(&self) -> f64 {
        match self {
            Potential::Gaussian { strength, .. } | Potential::Exponential { strength, .. } => *strength,
            Potential::Tabulated(t) => t.sup,
        }
    }

    /// Radius beyond which `r² V(r)` is negligible (`< 1e-14 λ a²`).
    pub fn cutoff_radius(&self) -> f64 {
        match self {
            Potential::Tabulated(t) => t.r_max(),
            _ => {
                let (lam, a) = (self.strength(), self.range());
                let mut r = a;
                while r * r * self.value(r) >= 1e-14 * lam * a * a {
                    r *= 1.1;
                }
                r
            }
        }
    }

    /// Closed-form `Ṽ₀(p, q)` where one exists.
    pub fn closed_form_swave(&self, p: f64, q: f64) -> Option<f64> {
        match *self {
            Potential::Gaussian { strength, range: a } => {
                let a2 = a * a;
                let x = 2.0 * a2 * p * q;
                // sinh(y)/y e^{-y} folded into (1 − e^{-2y})/(2y)
                let ratio = if x < 1e-8 { 1.0 - 0.5 * x } else { -(-x).exp_m1() / x };
                let pref = strength * (2.0 * PI * a2).powf(1.5);
                Some(pref * (-0.5 * a2 * (p - q) * (p - q)).exp() * ratio)
            }
            Potential::Exponential { strength, range: a } => {
                let d = 1.0 + a * a * (p - q) * (p - q);
                let s = 1.0 + a * a * (p + q) * (p + q);
                Some(8.0 * PI * strength * a.powi(3) / (d * s))
            }
            Potential::Tabulated(_) => None,
        }
    }

    /// `Ṽ₀(p, q) = 4π ∫ r² V(r) j0(pr) j0(qr) dr` by adaptive quadrature on
    /// `[0, r_cut]`, with panels no wider than a quarter period of the
    /// fastest oscillation `cos((p+q) r)`.
    pub fn fourier_swave(&self, p: f64, q: f64) -> Result<f64> {
        if p < 0.0 || q < 0.0 {
            return Err(Error::InvalidArgument(format!("momenta must be non-negative, got ({p}, {q})")));
        }
        // order the arguments so the result is exactly symmetric
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        let r_cut = self.cutoff_radius();
        let a = self.range();
        let width = (0.5 * PI / (p + q).max(1e-300)).min(0.5 * a);
        let mut pts: Vec<f64> = match self {
            Potential::Tabulated(t) => t.radial_breakpoints(width),
            _ => {
                let n = (r_cut / width).ceil().max(1.0) as usize;
                (0..=n).map(|j| r_cut * j as f64 / n as f64).collect()
            }
        };
        pts.dedup();
        let scale = 4.0 * PI * self.strength() * a.powi(3);
        let opts = AdaptiveOptions {
            abs_tol: 1e-14 * scale,
            rel_tol: 1e-12,
            max_subdivisions: 20_000,
            rule_points: 10,
        };
        let v = quad::integrate_breakpoints(
            |r| r * r * self.value(r) * spherical_j0(p * r) * spherical_j0(q * r),
            &pts,
            opts,
        )?;
        Ok(4.0 * PI * v)
    }

    /// Weak-coupling gap profile `t_*(p) ∝ Ṽ₀(√μ, p)`.
    pub fn weak_coupling_gap(&self, mu: f64, p: f64) -> Result<f64> {
        if mu <= 0.0 {
            return Err(Error::InvalidArgument(format!("weak-coupling gap needs mu > 0, got {mu}")));
        }
        self.fourier_swave(mu.sqrt(), p)
    }
}

/// `V(r)` as a free function.
pub fn eval_potential(v: &Potential, r: f64) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::InvalidArgument(format!("radius must be non-negative, got {r}")));
    }
    Ok(v.value(r))
}

pub fn fourier_swave(v: &Potential, p: f64, q: f64) -> Result<f64> {
    v.fourier_swave(p, q)
}

pub fn weak_coupling_gap(v: &Potential, mu: f64, p: f64) -> Result<f64> {
    v.weak_coupling_gap(mu, p)
}

impl MomentumKernel for Potential {
    fn eval(&self, p: f64, q: f64) -> f64 {
        match self.closed_form_swave(p, q) {
            Some(v) => v,
            None => {
                let Potential::Tabulated(t) = self else { unreachable!() };
                let (rs, ws) = t.radial_rule(p.max(q));
                rs.iter()
                    .zip(&ws)
                    .map(|(&r, &w)| w * spherical_j0(p * r) * spherical_j0(q * r))
                    .sum()
            }
        }
    }

    fn length_scale(&self) -> f64 {
        self.range()
    }

    fn sup_norm(&self) -> f64 {
        self.strength()
    }

    fn matrix(&self, nodes: &[f64]) -> DMatrix<f64> {
        match self {
            Potential::Tabulated(t) => {
                // product rule: K = J W Jᵀ with J_ik = j0(p_i r_k)
                let p_max = nodes.iter().cloned().fold(0.0, f64::max);
                let (rs, ws) = t.radial_rule(p_max);
                let j = DMatrix::from_fn(nodes.len(), rs.len(), |i, k| spherical_j0(nodes[i] * rs[k]));
                let mut jw = j.clone();
                for (k, w) in ws.iter().enumerate() {
                    jw.column_mut(k).scale_mut(*w);
                }
                let m = &jw * j.transpose();
                // exact symmetry
                DMatrix::from_fn(nodes.len(), nodes.len(), |a, b| {
                    if a <= b {
                        m[(a, b)]
                    } else {
                        m[(b, a)]
                    }
                })
            }
            _ => {
                symmetric_matrix(nodes, |p, q| self.eval(p, q))
            }
        }
    }
}
