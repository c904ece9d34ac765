use std::f64::consts::PI;

use bcs_core::gl_coeff::{default_hessian_step, hessian_check};
use bcs_core::potentials::{MomentumKernel, Potential};
use bcs_core::gap_solver::{GridOptions, MomentumGrid};
use bcs_core::specfun::{
    chi, eval_g, g1, g2, laguerre, laguerre_scaled_table, xi, xi_matsubara, GFunction, LaguerreOrder,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![-40.0..-1e-6f64, 1e-6..40.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn g_parity(z in nonzero()) {
        prop_assert_eq!(eval_g(GFunction::G1, -z), -eval_g(GFunction::G1, z));
        prop_assert_eq!(eval_g(GFunction::G0, -z), eval_g(GFunction::G0, z));
        prop_assert_eq!(eval_g(GFunction::G2, -z), eval_g(GFunction::G2, z));
    }

    #[test]
    fn printed_forms_of_g1_and_g2_agree(z in 0.5..30.0f64, neg in any::<bool>()) {
        let z = if neg { -z } else { z };
        let c2 = (0.5 * z).cosh().powi(2);
        let g1_hyp = (z.sinh() - z) / (2.0 * z * z * c2);
        let g2_hyp = (0.5 * z).tanh() / (2.0 * z * c2);
        prop_assert!(rel(g1(z), g1_hyp) <= 1e-12);
        prop_assert!(rel(g2(z), g2_hyp) <= 1e-12);
    }

    #[test]
    fn chi_increases_with_beta(e in -5.0..5.0f64, b in 0.1..50.0f64, f in 1.001..3.0f64) {
        // tanh saturates in double precision beyond βE/2 ≈ 19
        if f * b * e.abs() < 30.0 {
            prop_assert!(chi(b * f, e) > chi(b, e));
        } else {
            prop_assert!(chi(b * f, e) >= chi(b, e) * (1.0 - 4.0 * f64::EPSILON));
        }
    }

    #[test]
    fn xi_bounded_by_mean_of_chi(b in 0.1..50.0f64, e1 in -5.0..5.0f64, e2 in -5.0..5.0f64) {
        let bound = 0.5 * (chi(b, e1) + chi(b, e2));
        prop_assert!(xi(b, e1, e2) <= bound * (1.0 + 1e-14));
        prop_assert!(rel(xi(b, e1, e2), xi(b, e2, e1)) < 1e-15);
    }

    #[test]
    fn g1_tail(x in 50.0..1e6f64) {
        prop_assert!((x * x * g1(x) - 1.0).abs() <= 10.0 / x);
    }

    #[test]
    fn scaled_laguerre_at_most_one(x in 0.0..800.0f64) {
        prop_assert!(laguerre_scaled_table(200, x).iter().all(|v| v.abs() <= 1.0 + 1e-10));
    }

    #[test]
    fn hessian_matches_closed_form(
        beta in 0.5..8.0f64,
        mu in -1.0..2.0f64,
        k in prop::array::uniform3(-1.5..1.5f64),
    ) {
        let (num, closed) = hessian_check(beta, mu, &k, default_hessian_step(&k));
        prop_assert!(rel(num, closed) <= 1e-5, "{} vs {}", num, closed);
    }
}

#[test]
fn matsubara_truncation_converges_at_first_order() {
    let (beta, e1, e2) = (2.0, 0.7, -0.3);
    let exact = xi(beta, e1, e2);
    let ns = [50usize, 100, 200, 400, 800];
    let (lx, ly): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .map(|&n| ((n as f64).ln(), (xi_matsubara(beta, e1, e2, n) - exact).abs().ln()))
        .unzip();
    let order = -(ly[4] - ly[0]) / (lx[4] - lx[0]);
    assert!(order >= 0.9, "order {order}");
}

#[test]
fn laguerre_one_envelope_is_bounded() {
    // x |L_k^{(1)}(x)| e^{-x/2} / ((k+1) x)^{1/4} stays bounded over the sampled range
    let mut worst_by_k = Vec::new();
    for k in [1usize, 5, 20, 80, 200] {
        let top = 4.0 * k as f64 + 4.0;
        let worst = (1..=2000)
            .map(|i| {
                let x = top * i as f64 / 2000.0;
                x * laguerre(k, x, LaguerreOrder::One).abs() * (-0.5 * x).exp() / (((k + 1) as f64) * x).powf(0.25)
            })
            .fold(0.0, f64::max);
        worst_by_k.push(worst);
    }
    let max = worst_by_k.iter().cloned().fold(0.0, f64::max);
    assert!(max < 3.0, "{worst_by_k:?}");
    // no growth with k
    assert!(worst_by_k[4] <= 1.5 * worst_by_k[2], "{worst_by_k:?}");
}

fn weighted_kernel(v: &Potential, grid: &MomentumGrid) -> DMatrix<f64> {
    let sq: Vec<f64> = grid.measure().iter().map(|w| w.sqrt()).collect();
    let k = v.matrix(grid.nodes());
    DMatrix::from_fn(sq.len(), sq.len(), |i, j| sq[i] * sq[j] * k[(i, j)])
}

#[test]
fn swave_kernels_are_positive_semidefinite() {
    let table: Vec<(f64, f64)> = (0..=60).map(|i| (0.1 * i as f64, 1.0 / (1.0 + (0.1 * i as f64).powi(4)))).collect();
    let potentials = [
        Potential::gaussian(1.0, 1.0).unwrap(),
        Potential::gaussian(2.0, 0.6).unwrap(),
        Potential::exponential(1.0, 0.8).unwrap(),
        Potential::tabulated(&table).unwrap(),
    ];
    for v in &potentials {
        for mu in [0.5, 2.0] {
            let grid = MomentumGrid::graded(mu, v.range(), 0.1, &GridOptions { nodes_per_panel: 8, ..Default::default() }).unwrap();
            let m = weighted_kernel(v, &grid);
            let shift = 1e-10 * m.norm();
            let shifted = &m + DMatrix::identity(m.nrows(), m.ncols()) * shift;
            assert!(shifted.cholesky().is_some(), "{:?} mu={mu}", v.kind());
        }
    }
}

#[test]
fn gaussian_kernel_is_flat_at_zero_momentum() {
    let v = Potential::gaussian(1.3, 0.9).unwrap();
    // an even function of p changes quadratically away from p = 0
    let h = 1e-3;
    for q in [0.0, 0.5, 1.0, 2.0] {
        let f0 = v.fourier_swave(0.0, q).unwrap();
        let d1 = v.fourier_swave(h, q).unwrap() - f0;
        let d2 = v.fourier_swave(2.0 * h, q).unwrap() - f0;
        assert!((d2 / d1 - 4.0).abs() < 1e-3, "q={q}: {}", d2 / d1);
    }
}

#[test]
fn weak_coupling_gap_decays() {
    let v = Potential::gaussian(1.0, 1.0).unwrap();
    let at = |p: f64| v.weak_coupling_gap(1.0, p).unwrap().abs();
    let peak = at(0.0);
    assert!(at(12.0) <= 1e-12 * peak);
    let w = Potential::exponential(1.0, 1.0).unwrap();
    let at = |p: f64| w.weak_coupling_gap(1.0, p).unwrap().abs();
    assert!(at(200.0) <= 1e-6 * at(0.0));
    // closed form for the gaussian at the Fermi surface
    let fs = (2.0 * PI).powf(1.5) * (-1.0f64).exp() * 1f64.sinh();
    assert!(rel(v.weak_coupling_gap(1.0, 1.0).unwrap(), fs) < 1e-10);
}
