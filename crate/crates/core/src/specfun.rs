//! Scalar special functions: the thermal functions `g0`, `g1`, `g2`, `χ_β`,
//! `Ξ_β`, Matsubara-sum truncations, Laguerre polynomials and Bessel `J0`.
//!
//! Removable singularities are handled with Taylor series below
//! [`TAYLOR_SWITCH`]; hyperbolic ratios are rewritten with `e^{-|z|}` so that
//! nothing overflows for large arguments.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Below this magnitude the thermal functions switch to their Taylor series.
pub const TAYLOR_SWITCH: f64 = 1e-2;

/// Minimum distance from a pole `i(n+1/2)π` accepted by [`tanh_mittag_leffler`].
pub const POLE_DISTANCE: f64 = 1e-8;

/// Riemann zeta at 3.
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

/// Fermionic Matsubara index `n`, with frequency `ω_n = π(2n+1)T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatsubaraIndex(pub i64);

impl MatsubaraIndex {
    pub fn frequency(self, temperature: f64) -> f64 {
        PI * (2 * self.0 + 1) as f64 * temperature
    }

    /// The index paired with this one in symmetric truncations (`ω_{-n-1} = -ω_n`).
    pub fn partner(self) -> Self {
        MatsubaraIndex(-self.0 - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GFunction {
    G0,
    G1,
    G2,
}

pub fn eval_g(which: GFunction, z: f64) -> f64 {
    match which {
        GFunction::G0 => g0(z),
        GFunction::G1 => g1(z),
        GFunction::G2 => g2(z),
    }
}

/// `sech²(z/2)` without overflow.
pub fn sech2_half(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// `g0(z) = tanh(z/2)/z`, even, `g0(0) = 1/2`.
pub fn g0(z: f64) -> f64 {
    if z.abs() <= TAYLOR_SWITCH {
        let z2 = z * z;
        0.5 - z2 / 24.0 + z2 * z2 / 240.0
    } else {
        (0.5 * z).tanh() / z
    }
}

/// `g1(z) = (sinh z − z) / (2z² cosh²(z/2))`, odd, `g1(0) = 0`.
pub fn g1(z: f64) -> f64 {
    let a = z.abs();
    if a <= TAYLOR_SWITCH {
        let z2 = z * z;
        z * (1.0 / 12.0 - z2 / 60.0 + 17.0 * z2 * z2 / 6720.0)
    } else if a < 1.0 {
        // sinh z − z summed as a series: no cancellation
        let z2 = z * z;
        let mut term = z * z2 / 6.0;
        let mut sum = 0.0f64;
        let mut n = 1.0;
        while term.abs() > 1e-18 * sum.abs() {
            sum += term;
            term *= z2 / ((2.0 * n + 2.0) * (2.0 * n + 3.0));
            n += 1.0;
        }
        sum / (z2 * (1.0 + z.cosh()))
    } else {
        // sinh z/(1+cosh z) = tanh(z/2), 1/(1+cosh z) = sech²(z/2)/2
        ((0.5 * z).tanh() - 0.5 * z * sech2_half(z)) / (z * z)
    }
}

/// `g2(z) = tanh(z/2) / (2z cosh²(z/2))`, even, `g2(0) = 1/4`.
pub fn g2(z: f64) -> f64 {
    if z.abs() <= TAYLOR_SWITCH {
        let z2 = z * z;
        0.25 - z2 / 12.0 + 17.0 * z2 * z2 / 960.0
    } else {
        0.5 * g0(z) * sech2_half(z)
    }
}

/// `d/dx (x² g1(x)) = x sinh x / (1 + cosh x)²`.
pub fn d_x2_g1(x: f64) -> f64 {
    0.5 * x * (0.5 * x).tanh() * sech2_half(x)
}

/// `χ_β(E) = tanh(βE/2)/E`, with `χ_β(0) = β/2`.
pub fn chi(beta: f64, energy: f64) -> f64 {
    beta * g0(beta * energy)
}

/// `Ξ_β(E, E') = (tanh(βE/2) + tanh(βE'/2)) / (E + E')`, continuous across
/// `E' = −E` where it equals `(β/2)/cosh²(βE/2)`.
pub fn xi(beta: f64, e1: f64, e2: f64) -> f64 {
    let (mut a, mut b) = (0.5 * beta * e1, 0.5 * beta * e2);
    if a * b > 0.0 {
        return (a.tanh() + b.tanh()) / (e1 + e2);
    }
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    // a ≥ 0 ≥ b: tanh a + tanh b = 2 e^{-2a} expm1(2s) / ((1+e^{-2a})(1+e^{2b})), s = a+b
    let s = a + b;
    let ea = (-2.0 * a).exp();
    let eb = (2.0 * b).exp();
    let x = 2.0 * s;
    let ratio = if x.abs() <= TAYLOR_SWITCH {
        1.0 + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x / 720.0))))
    } else if x > 600.0 {
        // e^{-2a} expm1(2s) = e^{2b} − e^{-2a}; avoids inf·0
        return 2.0 * (eb - ea) / ((1.0 + ea) * (1.0 + eb)) / (e1 + e2);
    } else {
        x.exp_m1() / x
    };
    2.0 * beta * ea * ratio / ((1.0 + ea) * (1.0 + eb))
}

fn nearest_pole_distance(z: Complex64) -> f64 {
    let n = (z.im / PI - 0.5).round();
    let pole = Complex64::new(0.0, (n + 0.5) * PI);
    (z - pole).norm()
}

/// Symmetric truncation of the partial-fraction expansion of `tanh z`:
/// poles `i(n+1/2)π` for `n = −N−1, …, N`, each `n` paired with `−n−1`.
pub fn tanh_mittag_leffler(z: Complex64, n_max: usize) -> Result<Complex64> {
    let d = nearest_pole_distance(z);
    if d < POLE_DISTANCE {
        return Err(Error::NearPole {
            z: format!("{z}"),
            distance: d,
        });
    }
    let z2 = z * z;
    let mut sum = Complex64::new(0.0, 0.0);
    // smallest terms first
    for n in (0..=n_max).rev() {
        let w = (n as f64 + 0.5) * PI;
        sum += 2.0 * z / (z2 + w * w);
    }
    Ok(sum)
}

/// `−(2/β) Σ_n (iω_n − E)^{-1} (iω_n + E')^{-1}` over `n = −N−1, …, N`.
///
/// Paired terms are complex conjugates, so the truncation is real:
/// `(4/β) Σ_{n=0}^{N} (ω² + EE') / ((ω² + EE')² + ω²(E − E')²)`.
pub fn xi_matsubara(beta: f64, e1: f64, e2: f64, n_max: usize) -> f64 {
    let t = 1.0 / beta;
    let ee = e1 * e2;
    let de = e1 - e2;
    let mut sum = 0.0;
    for n in (0..=n_max).rev() {
        let w = MatsubaraIndex(n as i64).frequency(t);
        let w2 = w * w;
        let a = w2 + ee;
        sum += a / (a * a + w2 * de * de);
    }
    4.0 * sum / beta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaguerreOrder {
    /// `L_k = L_k^{(0)}`
    Zero,
    /// `L_k^{(1)}`
    One,
}

impl LaguerreOrder {
    fn alpha(self) -> f64 {
        match self {
            LaguerreOrder::Zero => 0.0,
            LaguerreOrder::One => 1.0,
        }
    }
}

/// `L_k^{(α)}(x)` for `α ∈ {0, 1}` by the three-term recurrence.
pub fn laguerre(k: usize, x: f64, order: LaguerreOrder) -> f64 {
    let alpha = order.alpha();
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for n in 1..k {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + alpha - x) * cur - (nf + alpha) * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `e^{-x/2} L_k(x)` for `k = 0..=k_max`, robust for large `x`: the
/// recurrence runs on rescaled values and the exponential is applied at the end.
pub fn laguerre_scaled_table(k_max: usize, x: f64) -> Vec<f64> {
    const BIG: f64 = 1e200;
    let mut out = Vec::with_capacity(k_max + 1);
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    // log of the common factor carried by prev/cur
    let mut log_scale = -0.5 * x;
    out.push((log_scale).exp() * prev);
    if k_max == 0 {
        return out;
    }
    out.push((log_scale).exp() * cur);
    for n in 1..k_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 - x) * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
        out.push(log_scale.exp() * cur);
    }
    out
}

pub fn laguerre_scaled(k: usize, x: f64) -> f64 {
    *laguerre_scaled_table(k, x).last().unwrap()
}

/// Zeros of `L_k`, found by bracketing sign changes of the recurrence on a
/// WKB-graded sampling grid and polishing each bracket by bisection.
pub fn laguerre_zeros(k: usize) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let kk = k as f64 + 0.5;
    let upper = 4.0 * k as f64 + 3.0;
    let mut fraction = 0.1;
    loop {
        let mut zeros = Vec::with_capacity(k);
        let mut x = 0.05 * 1.44 / kk;
        let mut fx = laguerre(k, x, LaguerreOrder::Zero);
        while x < upper && zeros.len() < k {
            // local angular frequency of x^{1/2} e^{-x/2} L_k(x)
            let omega2 = kk / x - 0.25 + 0.25 / (x * x);
            let omega = omega2.max(0.01).sqrt();
            let step = (fraction * PI / omega).min(1.0);
            let xn = x + step;
            let fxn = laguerre(k, xn, LaguerreOrder::Zero);
            if fx == 0.0 {
                zeros.push(x);
            } else if fx * fxn < 0.0 {
                zeros.push(bisect(|t| laguerre(k, t, LaguerreOrder::Zero), x, xn));
            }
            x = xn;
            fx = fxn;
        }
        if zeros.len() == k || fraction < 1e-3 {
            return zeros;
        }
        fraction *= 0.5;
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    SphericalJ0,
    J0,
}

pub fn bessel(kind: BesselKind, x: f64) -> f64 {
    match kind {
        BesselKind::SphericalJ0 => spherical_j0(x),
        BesselKind::J0 => bessel_j0(x),
    }
}

/// `j0(x) = sin x / x`.
pub fn spherical_j0(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Derivative of `j0`: `(x cos x − sin x)/x²`.
pub fn spherical_j0_prime(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        -x / 3.0 + x * x * x / 30.0
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

/// Bessel function of the first kind, order zero.
///
/// For `|x| ≤ 30` the periodic integral `J0(x) = (1/2π)∫cos(x sin θ)dθ` is
/// evaluated with the trapezoidal rule, whose aliasing error is `J_M(x)` for
/// `M` points and therefore negligible once `M > |x| + 40`. Larger arguments
/// use the Hankel asymptotic expansion.
pub fn bessel_j0(x: f64) -> f64 {
    let a = x.abs();
    if a <= 30.0 {
        let m = 2 * (a.ceil() as usize + 40);
        let mut sum = 0.0;
        // θ_j and π − θ_j give equal contributions; sum over the half period
        for j in 0..m {
            let theta = PI * (j as f64 + 0.5) / m as f64;
            sum += (a * theta.sin()).cos();
        }
        sum / m as f64
    } else {
        let mut p = 0.0;
        let mut q = 0.0;
        let mut ak = 1.0f64;
        let mut xpow = 1.0f64;
        let mut last = f64::INFINITY;
        for k in 0..60 {
            let term = ak / xpow;
            if term.abs() > last || term.abs() < 1e-17 {
                break;
            }
            last = term.abs();
            match k % 4 {
                0 => p += term,
                1 => q += term,
                2 => p -= term,
                _ => q -= term,
            }
            let kf = (k + 1) as f64;
            ak *= -(2.0 * kf - 1.0) * (2.0 * kf - 1.0) / (8.0 * kf);
            xpow *= a;
        }
        let w = a - 0.25 * PI;
        (2.0 / (PI * a)).sqrt() * (p * w.cos() - q * w.sin())
    }
}
