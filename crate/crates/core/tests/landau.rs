use bcs_core::gap_solver::{position_eigenfunction, solve, SolveOptions};
use bcs_core::landau::{
    b_zero_limit_value, free_resolvent, landau_spectrum, r_value, resolvent_decay_rate, resolvent_weighted_norm,
    LandauGrid, RadialDensity,
};
use bcs_core::potentials::Potential;
use num_complex::Complex64;

/// `R` for `ρ(r) ∝ e^{−r²/(2σ²)}`.
fn gaussian_r(k: usize, p3: f64, b: f64, sigma: f64) -> f64 {
    let x = b * sigma * sigma;
    (1.0 - x).powi(k as i32) / (1.0 + x).powi(k as i32 + 1) * (-0.5 * sigma * sigma * p3 * p3).exp()
}

fn paired_density() -> RadialDensity {
    let v = Potential::gaussian(1.0, 1.0).unwrap();
    let sol = solve(&v, 1.0, &SolveOptions::default()).unwrap();
    let phi = position_eigenfunction(&sol, &v).unwrap();
    RadialDensity::from_eigenfunction(&phi).unwrap()
}

#[test]
fn spectrum_entries_satisfy_the_basic_bounds() {
    let rho = RadialDensity::gaussian(1.0).unwrap();
    let grid = LandauGrid::covering(&rho, 80, 16);
    for b in [1e-2, 1e-1, 0.5] {
        let s = landau_spectrum(b, &rho, &grid).unwrap();
        assert_eq!(s.entries.len(), 81 * 16);
        for e in &s.entries {
            assert!(e.r.abs() < 1.0);
            assert_eq!(e.e, 2.0 * b * (2 * e.k + 1) as f64 + e.p3 * e.p3);
        }
        assert_eq!(s.min_energy(), 2.0 * b);
        assert!(s.fitted_c > 0.0);
    }
}

#[test]
fn small_energy_expansion_is_two_sided() {
    let sigma = 0.8;
    let rho = RadialDensity::gaussian(sigma).unwrap();
    let (r2, r4) = (rho.second_moment(), rho.fourth_moment());
    let b = 1e-3 / r2;
    let grid = LandauGrid {
        k_max: 40,
        p3: (0..12).map(|j| 0.02 * j as f64 / r2.sqrt()).collect(),
    };
    let s = landau_spectrum(b, &rho, &grid).unwrap();
    let window: Vec<_> = s.entries.iter().filter(|e| e.e * r2 <= 0.2).collect();
    assert!(window.len() > 50);
    let mut c_fit = 0.0f64;
    for e in &window {
        let gap = 1.0 - e.r;
        let lin = r2 * e.e / 6.0;
        assert!(gap > 0.0);
        assert!(gap >= lin * (1.0 - 0.1), "k={} p3={}", e.k, e.p3);
        c_fit = c_fit.max((gap - lin).abs() / (r4 * e.e * e.e));
    }
    assert!(c_fit > 0.0 && c_fit < 1.0, "C' = {c_fit}");
    // the linear term dominates ever more closely as E shrinks
    for e in window.iter().filter(|e| e.e * r2 <= 0.02) {
        assert!(((1.0 - e.r) / (r2 * e.e / 6.0) - 1.0).abs() < 0.02);
    }
}

#[test]
fn fitted_constant_does_not_grow_under_refinement() {
    let rho = RadialDensity::gaussian(1.0).unwrap();
    let grid = LandauGrid::covering(&rho, 60, 10);
    for b in [1e-3, 1e-2, 1e-1] {
        let coarse = landau_spectrum(b, &rho, &grid).unwrap();
        let fine = landau_spectrum(b, &rho, &grid.refined()).unwrap();
        assert!(coarse.fitted_c > 0.0);
        assert!(fine.fitted_c <= coarse.fitted_c, "B={b}");
    }
}

#[test]
fn high_energies_decouple() {
    let sigma = 1.0;
    let rho = RadialDensity::gaussian(sigma).unwrap();
    let edge = [(0usize, 10.0), (400, 0.0), (400, 6.0)];
    for (k, p3) in edge {
        let r = r_value(k, p3, 0.1, &rho).unwrap();
        assert!(r.abs() < 1e-6, "k={k} p3={p3}: {r}");
        assert!((r - gaussian_r(k, p3, 0.1, sigma)).abs() < 1e-9);
    }
}

#[test]
fn weak_field_limit_is_approached() {
    let rho = RadialDensity::gaussian(1.0).unwrap();
    let (e, p3) = (0.9, 0.5);
    let lim = b_zero_limit_value(p3, e, &rho).unwrap();
    assert!((lim - (-0.5 * e).exp()).abs() < 1e-10);
    let mut prev = f64::INFINITY;
    for k in [2usize, 20, 200] {
        let b = (e - p3 * p3) / (2.0 * (2 * k + 1) as f64);
        let err = (r_value(k, p3, b, &rho).unwrap() - lim).abs();
        assert!(err < prev, "k={k}: {err}");
        prev = err;
    }
    assert!(prev < 1e-3);
}

#[test]
fn batch_spectrum_matches_pointwise_values_on_the_pair_density() {
    let rho = paired_density();
    assert!((rho.normalization() - 1.0).abs() < 1e-8);
    let r2 = rho.second_moment();
    let b = 0.05 / r2;
    let grid = LandauGrid {
        k_max: 30,
        p3: vec![0.0, 0.7 / r2.sqrt(), 2.0 / r2.sqrt()],
    };
    let s = landau_spectrum(b, &rho, &grid).unwrap();
    for e in s.entries.iter().filter(|e| [0, 7, 30].contains(&e.k)) {
        let single = r_value(e.k, e.p3, b, &rho).unwrap();
        assert!((single - e.r).abs() < 1e-8, "k={} p3={}: {} vs {}", e.k, e.p3, e.r, single);
    }
}

#[test]
fn resolvent_norm_ratio_and_decay_rate() {
    for mu in [-1.0, 0.0, 1.0] {
        for omega in [0.5, 2.0, 10.0] {
            let kappa = resolvent_decay_rate(omega, mu);
            let alt = ((mu * mu + omega * omega).sqrt() - mu) / 2.0;
            assert!((kappa * kappa - alt).abs() <= 1e-12 * alt.max(1.0));
            let (n1, _) = resolvent_weighted_norm(1.0, omega, mu).unwrap();
            let (n0, _) = resolvent_weighted_norm(0.0, omega, mu).unwrap();
            assert!((n1 / n0 - 2.0 / kappa).abs() < 1e-12 * n1 / n0);
        }
    }
}

#[test]
fn free_resolvent_solves_the_helmholtz_equation() {
    // (−Δ − μ − z) g = 0 away from the origin: (r g)'' = −(z + μ)(r g)
    let (z, mu) = (Complex64::new(0.3, 1.5), 0.8);
    let rg = |r: f64| free_resolvent([r, 0.0, 0.0], z, mu).unwrap() * r;
    let h = 1e-3;
    for r in [0.5, 1.0, 3.0] {
        let second = (rg(r + h) - rg(r) * 2.0 + rg(r - h)) / (h * h);
        let expect = -(z + mu) * rg(r);
        assert!((second - expect).norm() < 1e-5 * expect.norm(), "r={r}");
    }
    let g = free_resolvent([0.3, -0.4, 1.2], z, mu).unwrap();
    assert!((g - free_resolvent([1.3, 0.0, 0.0], z, mu).unwrap()).norm() < 1e-15);
    assert!(free_resolvent([0.0; 3], z, mu).is_err());
}
