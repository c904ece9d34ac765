//! The identity suite behind `bcsgl verify`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bcs_core::gap_solver::{gap_profile, position_eigenfunction, solve, GapSolution, SolveOptions};
use bcs_core::gl_coeff::{self, GLCoefficients};
use bcs_core::landau::{self, LandauGrid, RadialDensity};
use bcs_core::potentials::{Potential, SeparableKernel};
use bcs_core::specfun::{chi, tanh_mittag_leffler, xi, xi_matsubara, ZETA3};
use bcs_core::whh;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::error::Result;
use crate::output::{Results, Table};

pub struct Check {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// The quantity compared against `tolerance`.
    pub error: f64,
    pub tolerance: f64,
    pub detail: String,
    pub elapsed: Duration,
}

struct Outcome {
    error: f64,
    tolerance: f64,
    passed: bool,
    detail: String,
}

impl Outcome {
    fn within(error: f64, tolerance: f64, detail: String) -> Self {
        Self {
            error,
            tolerance,
            passed: error <= tolerance,
            detail,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn slope_of(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

fn gamma1() -> Result<Outcome> {
    let g = whh::gamma1()?;
    let err = (g.value - 7.0 * ZETA3 / (PI * PI)).abs();
    Ok(Outcome::within(err, 1e-8, format!("gamma1 = {:.12}", g.value)))
}

fn gamma2() -> Result<Outcome> {
    let g = whh::gamma2()?;
    let drift = (whh::gamma2_with_cutoff(200.0)? - whh::gamma2_with_cutoff(400.0)?).abs();
    let err = (g - 0.8124).abs();
    Ok(Outcome {
        error: err,
        tolerance: 5e-4,
        passed: err <= 5e-4 && drift <= 1e-10,
        detail: format!("gamma2 = {g:.10}, cutoff doubling moves it by {drift:.1e}"),
    })
}

fn slope_identity(solved: &[&GLCoefficients]) -> Outcome {
    let worst = solved
        .iter()
        .map(|c| rel(c.slope_appendix_form, c.slope_ratio_form))
        .fold(0.0, f64::max);
    Outcome::within(worst, 1e-12, format!("{} solved potentials", solved.len()))
}

fn hessian() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(20_240_601);
    let worst = (0..12)
        .map(|_| {
            let beta = rng.gen_range(0.5..8.0);
            let mu = rng.gen_range(-1.0..2.0);
            let k = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let (num, closed) = gl_coeff::hessian_check(beta, mu, &k, gl_coeff::default_hessian_step(&k));
            rel(num, closed)
        })
        .fold(0.0, f64::max);
    Outcome::within(worst, 1e-5, "12 random (beta, mu, k)".into())
}

fn matsubara() -> Result<Outcome> {
    let ns = [100usize, 1000, 10000];
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let mut orders = Vec::new();
    for (beta, e1, e2) in [(2.0, 0.7, -0.3), (10.0, 0.05, 0.4), (0.5, -1.0, -2.5)] {
        let exact = xi(beta, e1, e2);
        let errs: Vec<f64> = ns.iter().map(|&n| (xi_matsubara(beta, e1, e2, n) - exact).abs().ln()).collect();
        orders.push(-slope_of(&log_n, &errs));
    }
    for z in [Complex64::new(0.8, 0.3), Complex64::new(-2.0, 5.0), Complex64::new(0.0, 0.7)] {
        let exact = z.tanh();
        let errs = ns
            .iter()
            .map(|&n| Ok((tanh_mittag_leffler(z, n)? - exact).norm().ln()))
            .collect::<Result<Vec<f64>>>()?;
        orders.push(-slope_of(&log_n, &errs));
    }
    let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
    // reported as the shortfall below order 0.9
    Ok(Outcome {
        error: (0.9 - min).max(0.0),
        tolerance: 0.0,
        passed: min >= 0.9,
        detail: format!("smallest empirical order {min:.3}"),
    })
}

fn resolvent() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for a in [-1.0, 0.0, 1.0, 2.0] {
        for omega in [0.5, 2.0, 10.0] {
            for mu in [-1.0, 0.0, 1.0] {
                let (closed, quad) = landau::resolvent_weighted_norm(a, omega, mu)?;
                worst = worst.max(rel(quad, closed));
            }
        }
    }
    Ok(Outcome::within(worst, 1e-8, "36 (a, omega, mu) samples".into()))
}

fn separable() -> Result<Outcome> {
    let mu = 1.0;
    let v = |p: f64| 8.0 * (-p * p).exp();
    let sol = solve(&SeparableKernel::new(v, 1.0), mu, &SolveOptions::default())?;
    // scalar equation ∫ v² χ p²/(2π²) dp = 1 by Simpson's rule and bisection in ln β
    let n = 200_000;
    let h = 8.0 / n as f64;
    let scalar = |beta: f64| {
        let f = |p: f64| v(p).powi(2) * chi(beta, p * p - mu) * p * p / (2.0 * PI * PI);
        let inner: f64 = (1..n).map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
        (f(0.0) + inner + f(8.0)) * h / 3.0
    };
    let (mut lo, mut hi) = (1e-2f64, 1e4f64);
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if scalar(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = (lo * hi).sqrt();
    Ok(Outcome::within(
        rel(sol.beta_c, oracle),
        1e-6,
        format!("matrix {:.10} vs scalar {oracle:.10}", sol.beta_c),
    ))
}

fn whh_limit() -> Result<Outcome> {
    let v = Potential::gaussian(0.5, 1.0)?;
    let sol = solve(&v, 1.0, &SolveOptions::default())?;
    let c = gl_coeff::lambda_coeffs_for(&sol)?;
    let r = whh::whh_compare(&sol, &c, &gap_profile(&sol, &v), 1.0)?;
    let nu = r.beta_c_mu;
    let envelope = 2.0 * nu.ln() / (nu * nu);
    let gap = r.relative_gap.abs();
    Ok(Outcome {
        error: gap,
        tolerance: envelope,
        passed: nu >= 50.0 && gap <= envelope && gap < r.relative_gap_leading.abs(),
        detail: format!("beta_c mu = {nu:.1}, leading gap {:.2e}", r.relative_gap_leading.abs()),
    })
}

fn a_functionals(sol: &GapSolution, c: &GLCoefficients) -> Result<Outcome> {
    let tau = gl_coeff::canonical_tau_hat(&sol.t);
    let t_c = sol.temperature();
    let (_, a1) = gl_coeff::a_functionals(t_c, sol.mu, &sol.grid, &tau)?;
    let h = 1e-4 * t_c;
    let (a0p, _) = gl_coeff::a_functionals(t_c + h, sol.mu, &sol.grid, &tau)?;
    let (a0m, _) = gl_coeff::a_functionals(t_c - h, sol.mu, &sol.grid, &tau)?;
    let e1 = rel(a1, -c.lambda0);
    let e2 = rel((a0p - a0m) / (2.0 * h), -c.lambda2 / t_c);
    Ok(Outcome {
        error: e2,
        tolerance: 1e-6,
        passed: e1 <= 1e-10 && e2 <= 1e-6,
        detail: format!("A1/(-Lambda0) - 1 = {e1:.1e}; dA0/dT against -Lambda2/T_c"),
    })
}

fn landau_spectrum(sol: &GapSolution, v: &Potential) -> Result<Outcome> {
    let gauss = RadialDensity::gaussian(1.0)?;
    let paired = RadialDensity::from_eigenfunction(&position_eigenfunction(sol, v)?)?;
    let mut worst_r = 0.0f64;
    let mut cs = Vec::new();
    for (is_gauss, rho) in [(true, &gauss), (false, &paired)] {
        let grid = LandauGrid::covering(rho, landau::K_MAX_DEFAULT, 48);
        for b in [1e-3, 1e-2, 1e-1] {
            let s = landau::landau_spectrum(b, rho, &grid)?;
            worst_r = worst_r.max(s.max_abs_r());
            if is_gauss {
                cs.push(s.fitted_c);
            }
        }
    }
    let r2 = paired.second_moment();
    let (e1, e2) = (1e-3 / r2, 2e-3 / r2);
    let f1 = 1.0 - landau::r_value(0, 0.0, 0.5 * e1, &paired)?;
    let f2 = 1.0 - landau::r_value(0, 0.0, 0.5 * e2, &paired)?;
    let coef_err = rel((4.0 * f1 - f2) / (2.0 * e1), r2 / 6.0);
    let b = 1e-3 / r2;
    let mut worst_lim = 0.0f64;
    for (k, p3) in [(0usize, 0.0), (10, 0.3), (100, 0.0), (500, 0.5)] {
        let p3 = p3 / r2.sqrt();
        let e = 2.0 * b * (2 * k + 1) as f64 + p3 * p3;
        let lim = landau::b_zero_limit_value(p3, e, &paired)?;
        worst_lim = worst_lim.max((landau::r_value(k, p3, b, &paired)? - lim).abs());
    }
    Ok(Outcome {
        error: coef_err,
        tolerance: 1e-2,
        passed: worst_r < 1.0 && cs.iter().all(|&c| c > 0.0) && coef_err <= 1e-2 && worst_lim <= 2e-3,
        detail: format!(
            "max|R| = {worst_r:.6}, fitted c = {cs:.4?}, |R - J0 limit| <= {worst_lim:.1e}"
        ),
    })
}

fn tc_line(c: &GLCoefficients) -> Result<Outcome> {
    let bs: Vec<f64> = (0..=10).map(|j| 1e-3 * j as f64).collect();
    let tcs = bs
        .iter()
        .map(|&b| gl_coeff::tc_shift(c, c.t_c, b))
        .collect::<bcs_core::error::Result<Vec<f64>>>()?;
    let decreasing = tcs.windows(2).all(|w| w[1] < w[0]);
    let slope = slope_of(&bs, &tcs);
    let mb = bs.iter().sum::<f64>() / bs.len() as f64;
    let mt = tcs.iter().sum::<f64>() / tcs.len() as f64;
    let residual = bs
        .iter()
        .zip(&tcs)
        .map(|(b, t)| (t - (mt + slope * (b - mb))).abs())
        .fold(0.0, f64::max);
    Ok(Outcome {
        error: residual,
        tolerance: 1e-12,
        passed: decreasing && residual <= 1e-12,
        detail: format!("strictly decreasing: {decreasing}, slope {slope:.6e}"),
    })
}

fn timed<F: FnOnce() -> Result<Outcome>>(id: usize, name: &'static str, f: F) -> Result<Check> {
    let t0 = Instant::now();
    let o = f()?;
    Ok(Check {
        id,
        name,
        passed: o.passed,
        error: o.error,
        tolerance: o.tolerance,
        detail: o.detail,
        elapsed: t0.elapsed(),
    })
}

/// Run every check in order.
pub fn checks() -> Result<Vec<Check>> {
    let gaussian = Potential::gaussian(1.0, 1.0)?;
    let exponential = Potential::exponential(1.0, 1.0)?;
    let sol_g = solve(&gaussian, 1.0, &SolveOptions::default())?;
    let sol_e = solve(&exponential, 1.0, &SolveOptions::default())?;
    let c_g = gl_coeff::lambda_coeffs_for(&sol_g)?;
    let c_e = gl_coeff::lambda_coeffs_for(&sol_e)?;
    Ok(vec![
        timed(1, "gamma1 quadrature", gamma1)?,
        timed(2, "gamma2 value and cutoff stability", gamma2)?,
        timed(3, "slope identity", || Ok(slope_identity(&[&c_g, &c_e])))?,
        timed(4, "Hessian identity", || Ok(hessian()))?,
        timed(5, "Matsubara convergence order", matsubara)?,
        timed(6, "free-resolvent weighted norm", resolvent)?,
        timed(7, "separable-kernel oracle", separable)?,
        timed(8, "WHH limit", whh_limit)?,
        timed(9, "A-functional consistency", || a_functionals(&sol_g, &c_g))?,
        timed(10, "Landau spectrum", || landau_spectrum(&sol_g, &gaussian))?,
        timed(11, "T_c(B) monotone and linear", || tc_line(&c_g))?,
    ])
}

/// Print the pass/fail table and record it in `out`; returns the number of failed checks.
pub fn run(out: &mut Results) -> Result<usize> {
    let checks = checks()?;
    let mut table = Table::new("verify", &["id", "error", "tolerance", "passed"]);
    println!("{:>3}  {:<36} {:<6} {:>10} {:>10} {:>9}  detail", "id", "check", "status", "error", "tol", "time");
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{:>3}  {:<36} {:<6} {:>10.2e} {:>10.2e} {:>8.2}s  {}",
            c.id,
            c.name,
            status,
            c.error,
            c.tolerance,
            c.elapsed.as_secs_f64(),
            c.detail
        );
        table.push(vec![c.id as f64, c.error, c.tolerance, f64::from(u8::from(c.passed))]);
        out.scalar(&format!("check_{}_error", c.id), c.error);
        out.scalar(&format!("check_{}_passed", c.id), f64::from(u8::from(c.passed)));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    out.scalar("checks_passed", (checks.len() - failed) as f64);
    out.scalar("checks_total", checks.len() as f64);
    out.tables.push(table);
    Ok(failed)
}
