//! T_c → t(p) → Λ0, Λ2 → slope → WHH report, and the Landau spectrum.

use bcs_core::gap_solver::{default_bracket, gap_profile, position_eigenfunction, solve, GapSolution, SolveOptions};
use bcs_core::gl_coeff::{self, GLCoefficients};
use bcs_core::landau::{self, LandauGrid, RadialDensity};
use bcs_core::potentials::{MomentumKernel, Potential, PotentialKind};
use bcs_core::whh;
use log::info;

use crate::config::{DensitySpec, Pipeline, PotentialSpec, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{Plot, Results, Table};
use crate::verify;

pub fn build_potential(spec: &PotentialSpec) -> Result<Potential> {
    match spec {
        PotentialSpec::Analytic { kind, strength, range } => Ok(match kind {
            PotentialKind::Gaussian => Potential::gaussian(*strength, *range)?,
            PotentialKind::Exponential => Potential::exponential(*strength, *range)?,
            PotentialKind::Tabulated => unreachable!("tables are given by path"),
        }),
        PotentialSpec::Table(path) => {
            if !path.exists() {
                return Err(CliError::MissingInput(format!("table {} not found", path.display())));
            }
            Ok(Potential::Tabulated(bcs_core::potentials::TabulatedPotential::from_path(path)?))
        }
    }
}

pub struct Run {
    pub results: Results,
    /// Failed checks of the verify pipeline; the outputs are still written.
    pub failed_checks: usize,
}

pub fn run(cfg: &RunConfig) -> Result<Run> {
    let mut out = Results::default();
    let mut failed_checks = 0;
    out.label("pipeline", cfg.pipeline.name());
    match cfg.pipeline {
        Pipeline::Verify => failed_checks = verify::run(&mut out)?,
        Pipeline::Landau if matches!(cfg.density, DensitySpec::Gaussian(_)) => {
            let DensitySpec::Gaussian(sigma) = cfg.density else { unreachable!() };
            out.label("density", format!("gaussian:{sigma}"));
            landau_part(cfg, &RadialDensity::gaussian(sigma)?, &mut out)?;
        }
        p => {
            let (v, mu) = model(cfg)?;
            let sol = tc_part(cfg, &v, mu, &mut out)?;
            match p {
                Pipeline::Tc => {}
                Pipeline::Gl => {
                    gl_part(cfg, &sol, &mut out)?;
                }
                Pipeline::Whh => {
                    let c = gl_part(cfg, &sol, &mut out)?;
                    let report = whh::whh_compare(&sol, &c, &gap_profile(&sol, &v), mu)?;
                    for (k, val) in report.fields() {
                        out.scalar(k, val);
                    }
                }
                Pipeline::Landau => {
                    let phi = position_eigenfunction(&sol, &v)?;
                    out.label("density", "paired");
                    landau_part(cfg, &RadialDensity::from_eigenfunction(&phi)?, &mut out)?;
                }
                Pipeline::Verify => unreachable!(),
            }
        }
    }
    Ok(Run {
        results: out,
        failed_checks,
    })
}

fn model(cfg: &RunConfig) -> Result<(Potential, f64)> {
    let spec = cfg.potential.as_ref().ok_or_else(|| CliError::MissingInput("no potential given".into()))?;
    let mu = cfg.mu.ok_or_else(|| CliError::MissingInput("mu not given".into()))?;
    Ok((build_potential(spec)?, mu))
}

fn tc_part(cfg: &RunConfig, v: &Potential, mu: f64, out: &mut Results) -> Result<GapSolution> {
    let (lo, hi) = default_bracket(v.sup_norm(), mu);
    let bracket = (cfg.beta_low.unwrap_or(lo), cfg.beta_high.unwrap_or(hi));
    if bracket.0 >= bracket.1 {
        return Err(CliError::Conflict(format!("beta bracket [{}, {}] is empty", bracket.0, bracket.1)));
    }
    let opts = SolveOptions {
        grid: cfg.grid,
        bracket: Some(bracket),
        ..SolveOptions::default()
    };
    let sol = solve(v, mu, &opts)?;
    info!("beta_c = {} (T_c = {}) on {} nodes", sol.beta_c, sol.temperature(), sol.grid.len());

    out.label("potential", v.kind().to_string());
    out.scalar("potential_strength", v.strength());
    out.scalar("potential_range", v.range());
    out.scalar("mu", mu);
    out.scalar("beta_low", bracket.0);
    out.scalar("beta_high", bracket.1);
    out.scalar("beta_c", sol.beta_c);
    out.scalar("T_c", sol.temperature());
    out.scalar("lambda_max", sol.lambda_max);
    if let Some(next) = sol.next_eigenvalue {
        out.scalar("next_eigenvalue", next);
    }
    out.scalar("spectral_gap", sol.spectral_gap());
    out.scalar("grid_size", sol.grid.len() as f64);
    out.scalar("p_max", sol.grid.p_max());
    out.scalar("p_ref", sol.norm_convention.p_ref);
    out.scalar("evaluations", sol.evaluations as f64);

    let (betas, lambdas): (Vec<f64>, Vec<f64>) = sol.trace.iter().copied().unzip();
    let mut trace = Table::new("eigenvalue_trace", &["beta", "lambda_max"]);
    sol.trace.iter().for_each(|&(b, l)| trace.push(vec![b, l]));
    let mut profile = Table::new("gap_profile", &["p", "t"]);
    sol.grid.nodes().iter().zip(&sol.t).for_each(|(&p, &t)| profile.push(vec![p, t]));
    out.plots.push(
        Plot::new("eigenvalue_trace", "largest Birman-Schwinger eigenvalue", "beta", "lambda_max")
            .log_x()
            .line("lambda_max", sol.trace.clone()),
    );
    out.plots.push(
        Plot::new("gap_profile", "gap profile at T_c", "p", "t(p)")
            .line("t", sol.grid.nodes().iter().copied().zip(sol.t.iter().copied()).collect()),
    );
    out.tables.push(trace);
    out.tables.push(profile);
    out.array("trace_beta", betas);
    out.array("trace_lambda_max", lambdas);
    out.array("p", sol.grid.nodes().to_vec());
    out.array("t", sol.t.clone());
    Ok(sol)
}

fn gl_part(cfg: &RunConfig, sol: &GapSolution, out: &mut Results) -> Result<GLCoefficients> {
    let c = gl_coeff::lambda_coeffs_for(sol)?;
    out.scalar("lambda0", c.lambda0);
    out.scalar("lambda2", c.lambda2);
    out.scalar("lambda_ratio", c.ratio);
    out.scalar("c0", c.c0);
    out.scalar("slope", c.slope_ratio_form);
    out.scalar("slope_appendix", c.slope_appendix_form);
    out.scalar("slope_dimensionless", c.slope_dimensionless());
    let tcs: Vec<f64> = cfg
        .fields
        .iter()
        .map(|&b| gl_coeff::tc_shift(&c, c.t_c, b))
        .collect::<bcs_core::error::Result<_>>()?;
    let mut table = Table::new("tc_field", &["B", "T_c"]);
    cfg.fields.iter().zip(&tcs).for_each(|(&b, &t)| table.push(vec![b, t]));
    out.tables.push(table);
    out.plots.push(
        Plot::new("tc_field", "critical temperature in a weak field", "B", "T_c(B)")
            .line("T_c - 2 T_c (Lambda0/Lambda2) B", cfg.fields.iter().copied().zip(tcs.iter().copied()).collect()),
    );
    out.array("B", cfg.fields.clone());
    out.array("T_c_B", tcs);
    Ok(c)
}

fn landau_part(cfg: &RunConfig, rho: &RadialDensity, out: &mut Results) -> Result<()> {
    out.scalar("density_second_moment", rho.second_moment());
    out.scalar("density_fourth_moment", rho.fourth_moment());
    out.scalar("density_normalization", rho.normalization());
    out.scalar("k_max", cfg.k_max as f64);
    let grid = LandauGrid::covering(rho, cfg.k_max, cfg.n_p3);
    out.scalar("p3_max", grid.p3_max());
    let mut table = Table::new("landau_spectrum", &["B", "k", "p3", "E", "R"]);
    let mut plot = Plot::new("landau_spectrum", "R at p3 = 0 against E", "E", "R").log_x();
    let (mut cs, mut e0s, mut rmax, mut emin) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &b in &cfg.landau_fields {
        let s = landau::landau_spectrum(b, rho, &grid)?;
        info!("B = {b}: max |R| = {}, fitted c = {}", s.max_abs_r(), s.fitted_c);
        for e in &s.entries {
            table.push(vec![b, e.k as f64, e.p3, e.e, e.r]);
        }
        plot = plot.line(
            &format!("B = {b}"),
            s.entries.iter().filter(|e| e.p3 == 0.0).map(|e| (e.e, e.r)).collect(),
        );
        cs.push(s.fitted_c);
        e0s.push(s.e0);
        rmax.push(s.max_abs_r());
        emin.push(s.min_energy());
    }
    out.tables.push(table);
    out.plots.push(plot);
    out.array("landau_B", cfg.landau_fields.clone());
    out.array("fitted_c", cs);
    out.array("fitted_E0", e0s);
    out.array("max_abs_R", rmax);
    out.array("min_E", emin);
    out.array("p3", grid.p3.clone());
    Ok(())
}
