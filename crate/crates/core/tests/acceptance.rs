//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bcs_core::gap_solver::{gap_profile, position_eigenfunction, solve, GapSolution, SolveOptions};
use bcs_core::gl_coeff::{self, GLCoefficients};
use bcs_core::landau::{self, LandauGrid, RadialDensity};
use bcs_core::potentials::{Potential, SeparableKernel};
use bcs_core::specfun::{tanh_mittag_leffler, xi, xi_matsubara};
use bcs_core::whh;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

const ZETA3: f64 = 1.202_056_903_159_594_3;

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

fn gamma1_line() -> (bool, String) {
    let g = whh::gamma1().expect("gamma1");
    let exact = 7.0 * ZETA3 / (PI * PI);
    let err = (g.value - exact).abs();
    (err <= 1e-8, format!("gamma1 = {:.12}, |err| = {err:.2e} (tol 1e-8)", g.value))
}

fn gamma2_line() -> (bool, String) {
    let g = whh::gamma2().expect("gamma2");
    let a = whh::gamma2_with_cutoff(200.0).expect("cutoff 200");
    let b = whh::gamma2_with_cutoff(400.0).expect("cutoff 400");
    let ok = (g - 0.8124).abs() <= 5e-4 && (a - b).abs() <= 1e-10;
    (
        ok,
        format!("gamma2 = {g:.10} (0.8124 +- 5e-4), cutoff doubling moves it by {:.1e}", (a - b).abs()),
    )
}

fn slope_identity_line(solved: &[(&str, &GLCoefficients)]) -> (bool, String) {
    let worst = solved
        .iter()
        .map(|(_, c)| rel(c.slope_appendix_form, c.slope_ratio_form))
        .fold(0.0, f64::max);
    let names: Vec<&str> = solved.iter().map(|(n, _)| *n).collect();
    (
        worst <= 1e-12,
        format!("max relative difference {worst:.2e} over {} (tol 1e-12)", names.join(", ")),
    )
}

fn hessian_line() -> (bool, String) {
    let mut rng = rand::rngs::StdRng::seed_from_u64(20_240_601);
    let mut worst = 0.0f64;
    for _ in 0..12 {
        let beta = rng.gen_range(0.5..8.0);
        let mu = rng.gen_range(-1.0..2.0);
        let k = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
        let (num, closed) = gl_coeff::hessian_check(beta, mu, &k, gl_coeff::default_hessian_step(&k));
        worst = worst.max(rel(num, closed));
    }
    (worst <= 1e-5, format!("max relative error {worst:.2e} over 12 samples (tol 1e-5)"))
}

fn matsubara_line() -> (bool, String) {
    let ns = [100usize, 1000, 10000];
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let mut orders = Vec::new();
    for (beta, e1, e2) in [(2.0, 0.7, -0.3), (10.0, 0.05, 0.4), (0.5, -1.0, -2.5)] {
        let exact = xi(beta, e1, e2);
        let errs: Vec<f64> = ns.iter().map(|&n| (xi_matsubara(beta, e1, e2, n) - exact).abs().ln()).collect();
        orders.push(-lsq_slope(&log_n, &errs));
    }
    for z in [Complex64::new(0.8, 0.3), Complex64::new(-2.0, 5.0), Complex64::new(0.0, 0.7)] {
        let exact = z.tanh();
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| (tanh_mittag_leffler(z, n).expect("off the poles") - exact).norm().ln())
            .collect();
        orders.push(-lsq_slope(&log_n, &errs));
    }
    let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
    (min >= 0.9, format!("smallest empirical order {min:.3} over 6 cases (need >= 0.9)"))
}

fn resolvent_line() -> (bool, String) {
    let mut worst = 0.0f64;
    for a in [-1.0, 0.0, 1.0, 2.0] {
        for omega in [0.5, 2.0, 10.0] {
            for mu in [-1.0, 0.0, 1.0] {
                let (closed, quad) = landau::resolvent_weighted_norm(a, omega, mu).expect("norm");
                worst = worst.max(rel(quad, closed));
            }
        }
    }
    (worst <= 1e-8, format!("max relative error {worst:.2e} over 36 samples (tol 1e-8)"))
}

// χ_β(E) = tanh(βE/2)/E, written out independently of the library
fn chi_direct(beta: f64, e: f64) -> f64 {
    if (beta * e).abs() < 1e-6 {
        0.5 * beta
    } else {
        (0.5 * beta * e).tanh() / e
    }
}

// composite Simpson rule on a uniform grid
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + inner + f(b)) * h / 3.0
}

fn separable_line() -> (bool, String) {
    let mu = 1.0;
    let v = |p: f64| 8.0 * (-p * p).exp();
    let kernel = SeparableKernel::new(v, 1.0);
    let sol = solve(&kernel, mu, &SolveOptions::default()).expect("separable solve");
    let scalar = |beta: f64| simpson(|p| v(p).powi(2) * chi_direct(beta, p * p - mu) * p * p / (2.0 * PI * PI), 0.0, 8.0, 400_000);
    let (mut lo, mut hi) = (1e-2f64, 1e4f64);
    for _ in 0..80 {
        let mid = (lo * hi).sqrt();
        if scalar(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = (lo * hi).sqrt();
    let err = rel(sol.beta_c, oracle);
    (
        err <= 1e-6,
        format!("matrix beta_c = {:.10}, scalar root = {oracle:.10}, rel {err:.2e} (tol 1e-6)", sol.beta_c),
    )
}

fn whh_report(lambda: f64) -> whh::WhhReport {
    let v = Potential::gaussian(lambda, 1.0).expect("potential");
    let sol = solve(&v, 1.0, &SolveOptions::default()).expect("solve");
    let coeffs = gl_coeff::lambda_coeffs_for(&sol).expect("coefficients");
    let profile = gap_profile(&sol, &v);
    whh::whh_compare(&sol, &coeffs, &profile, 1.0).expect("whh")
}

fn whh_line() -> (bool, String) {
    let r = whh_report(0.5);
    let nu = r.beta_c_mu;
    let envelope = nu.ln() / (nu * nu);
    let ok = nu >= 50.0 && r.relative_gap.abs() <= 2.0 * envelope && r.relative_gap.abs() < r.relative_gap_leading.abs();
    let mut detail = format!(
        "gaussian(0.5, 1), beta_c*mu = {nu:.2}: |exact/corrected - 1| = {:.2e} vs 2*envelope {:.2e}, leading gap {:.2e}",
        r.relative_gap.abs(),
        2.0 * envelope,
        r.relative_gap_leading.abs()
    );
    // closer to the weak-coupling threshold the printed correction is not yet
    // better than the leading term; shown for reference
    let near = whh_report(0.6);
    detail.push_str(&format!(
        "; at beta_c*mu = {:.1}: corrected {:.2e}, leading {:.2e}, with odd-part term {:.2e}",
        near.beta_c_mu,
        near.relative_gap.abs(),
        near.relative_gap_leading.abs(),
        near.relative_gap_completed.abs()
    ));
    (ok, detail)
}

fn a_functional_line(sol: &GapSolution, c: &GLCoefficients) -> (bool, String) {
    let tau = gl_coeff::canonical_tau_hat(&sol.t);
    let t_c = sol.temperature();
    let (_, a1) = gl_coeff::a_functionals(t_c, sol.mu, &sol.grid, &tau).expect("A at Tc");
    let h = 1e-4 * t_c;
    let (a0p, _) = gl_coeff::a_functionals(t_c + h, sol.mu, &sol.grid, &tau).expect("A above");
    let (a0m, _) = gl_coeff::a_functionals(t_c - h, sol.mu, &sol.grid, &tau).expect("A below");
    let d_a0 = (a0p - a0m) / (2.0 * h);
    let e1 = rel(a1, -c.lambda0);
    // A0 decreases through T_c: dA0/dT = −Λ2/T_c
    let e2 = rel(d_a0, -c.lambda2 / t_c);
    (
        e1 <= 1e-10 && e2 <= 1e-6,
        format!("A1/(-Lambda0) - 1 = {e1:.1e}; dA0/dT vs -Lambda2/Tc rel {e2:.2e} (tol 1e-6)"),
    )
}

fn landau_line(sol: &GapSolution, v: &Potential) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();

    let gauss = RadialDensity::gaussian(1.0).expect("gaussian density");
    let phi = position_eigenfunction(sol, v).expect("eigenfunction");
    let paired = RadialDensity::from_eigenfunction(&phi).expect("pair density");

    // |R| < 1 and fitted c > 0 on full grids
    let mut worst_r = 0.0f64;
    let mut cs = Vec::new();
    for rho in [&gauss, &paired] {
        let grid = LandauGrid::covering(rho, landau::K_MAX_DEFAULT, 48);
        for b in [1e-3, 1e-2, 1e-1] {
            let spec = landau::landau_spectrum(b, rho, &grid).expect("spectrum");
            worst_r = worst_r.max(spec.max_abs_r());
            if std::ptr::eq(rho, &gauss) {
                cs.push(spec.fitted_c);
            }
        }
    }
    ok &= worst_r < 1.0;
    ok &= cs.iter().all(|&c| c > 0.0);
    parts.push(format!("max|R| = {worst_r:.9}"));
    parts.push(format!("fitted c = [{:.4}, {:.4}, {:.4}]", cs[0], cs[1], cs[2]));

    // small-E coefficient ⟨r²⟩/6 from a two-point fit, k = 0, p3 = 0, E = 2B
    let r2 = paired.second_moment();
    let (e1, e2) = (1e-3 / r2, 2e-3 / r2);
    let f1 = 1.0 - landau::r_value(0, 0.0, 0.5 * e1, &paired).expect("R at e1");
    let f2 = 1.0 - landau::r_value(0, 0.0, 0.5 * e2, &paired).expect("R at e2");
    let linear = (4.0 * f1 - f2) / (2.0 * e1);
    let coef_err = rel(linear, r2 / 6.0);
    ok &= coef_err <= 1e-2;
    parts.push(format!("small-E coefficient rel err {coef_err:.2e}"));

    // B → 0 Bessel limit at matched energy
    let b = 1e-3 / r2;
    let mut worst_lim = 0.0f64;
    for (k, p3) in [(0usize, 0.0), (10, 0.3), (100, 0.0), (500, 0.5)] {
        let p3 = p3 / r2.sqrt();
        let e = 2.0 * b * (2 * k + 1) as f64 + p3 * p3;
        let r = landau::r_value(k, p3, b, &paired).expect("R");
        let lim = landau::b_zero_limit_value(p3, e, &paired).expect("limit");
        worst_lim = worst_lim.max((r - lim).abs());
    }
    ok &= worst_lim <= 2e-3;
    parts.push(format!("|R - J0 limit| <= {worst_lim:.2e}"));
    (ok, parts.join("; "))
}

fn tc_line(c: &GLCoefficients) -> (bool, String) {
    let bs: Vec<f64> = (0..=10).map(|j| 1e-3 * j as f64).collect();
    let tcs: Vec<f64> = bs.iter().map(|&b| gl_coeff::tc_shift(c, c.t_c, b).expect("tc")).collect();
    let decreasing = tcs.windows(2).all(|w| w[1] < w[0]);
    let slope = lsq_slope(&bs, &tcs);
    let mb = bs.iter().sum::<f64>() / bs.len() as f64;
    let mt = tcs.iter().sum::<f64>() / tcs.len() as f64;
    let residual = bs
        .iter()
        .zip(&tcs)
        .map(|(b, t)| (t - (mt + slope * (b - mb))).abs())
        .fold(0.0, f64::max);
    (
        decreasing && residual <= 1e-12,
        format!("strictly decreasing: {decreasing}, slope {slope:.6e}, max line residual {residual:.1e}"),
    )
}

fn timed<F: FnOnce() -> (bool, String)>(id: usize, name: &'static str, limit: Option<Duration>, f: F) -> Line {
    let t0 = Instant::now();
    let (mut passed, mut detail) = f();
    let elapsed = t0.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail.push_str(&format!("; runtime {elapsed:?} exceeds {limit:?}"));
        }
    }
    Line {
        id,
        name,
        passed,
        detail,
        elapsed,
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let gaussian = Potential::gaussian(1.0, 1.0).expect("gaussian");
    let exponential = Potential::exponential(1.0, 1.0).expect("exponential");
    let sol_g = solve(&gaussian, 1.0, &SolveOptions::default()).expect("gaussian solve");
    let sol_e = solve(&exponential, 1.0, &SolveOptions::default()).expect("exponential solve");
    let c_g = gl_coeff::lambda_coeffs_for(&sol_g).expect("gaussian coefficients");
    let c_e = gl_coeff::lambda_coeffs_for(&sol_e).expect("exponential coefficients");

    let lines = vec![
        timed(1, "gamma1 quadrature", Some(secs(1)), gamma1_line),
        timed(2, "gamma2 value and cutoff stability", Some(secs(1)), gamma2_line),
        timed(3, "slope identity", None, || {
            slope_identity_line(&[("gaussian", &c_g), ("exponential", &c_e)])
        }),
        timed(4, "Hessian identity", Some(secs(1)), hessian_line),
        timed(5, "Matsubara convergence order", Some(secs(5)), matsubara_line),
        timed(6, "free-resolvent weighted norm", Some(secs(5)), resolvent_line),
        timed(7, "separable-kernel oracle", Some(secs(10)), separable_line),
        timed(8, "WHH limit", Some(secs(120)), whh_line),
        timed(9, "A-functional consistency", None, || a_functional_line(&sol_g, &c_g)),
        timed(10, "Landau spectrum", Some(secs(300)), || landau_line(&sol_g, &gaussian)),
        timed(11, "T_c(B) monotone and linear", None, || tc_line(&c_g)),
    ];

    let mut failed = 0;
    for l in &lines {
        let tag = if l.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2} {:<36} {} ({:.2?})", l.id, l.name, l.detail, l.elapsed);
        failed += usize::from(!l.passed);
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
