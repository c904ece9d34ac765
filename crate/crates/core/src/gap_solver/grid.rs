use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{composite_nodes, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Gauss–Legendre nodes per panel.
    pub nodes_per_panel: usize,
    /// Every panel is split into this many equal pieces; 2 doubles the density.
    pub refinement: usize,
    pub p_max: Option<f64>,
    /// Growth factor of consecutive panel widths away from the Fermi surface.
    pub grading: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            nodes_per_panel: 16,
            refinement: 1,
            p_max: None,
            grading: 3.0,
        }
    }
}

/// Composite Gauss–Legendre rule on `[0, p_max]` for the radial measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    breakpoints: Vec<f64>,
    nodes_per_panel: usize,
    fermi_momentum: Option<f64>,
}

impl MomentumGrid {
    pub fn from_breakpoints(breakpoints: Vec<f64>, nodes_per_panel: usize, fermi_momentum: Option<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints[0] < 0.0 || !breakpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("grid breakpoints must be increasing and non-negative".into()));
        }
        if nodes_per_panel == 0 {
            return Err(Error::InvalidArgument("grid needs at least one node per panel".into()));
        }
        let (nodes, weights) = composite_nodes(&GaussLegendre::new(nodes_per_panel), &breakpoints);
        Ok(Self {
            nodes,
            weights,
            breakpoints,
            nodes_per_panel,
            fermi_momentum,
        })
    }

    /// Graded grid for chemical potential `mu`, kernel range `a` and
    /// temperature scale `temperature`.
    ///
    /// For `mu > 0` the panel straddling `√μ` has width `2T/√μ` and widths grow
    /// geometrically away from it; for `mu ≤ 0` the grading starts at `p = 0`
    /// with width `√(T + |μ|)/2`. Far panels are at most `min(1, 1/(2a))` wide.
    pub fn graded(mu: f64, range: f64, temperature: f64, opts: &GridOptions) -> Result<Self> {
        if !(range > 0.0 && temperature > 0.0 && opts.grading > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs positive range and temperature (got a = {range}, T = {temperature})"
            )));
        }
        let mu_plus = mu.max(0.0);
        let p_max = opts
            .p_max
            .unwrap_or_else(|| (4.0 * (mu_plus + 4.0 / (range * range)).sqrt()).max(8.0 / range));
        let w_max = 1f64.min(0.5 / range);
        let mut pts;
        let fermi = (mu > 0.0).then(|| mu.sqrt());
        match fermi {
            Some(kf) if kf < p_max => {
                let h = (temperature / kf).min(0.5 * kf).min(0.5 * w_max);
                pts = vec![kf - h, kf + h];
                // towards zero
                let mut w = h * opts.grading;
                let mut x = kf - h;
                while x > 0.0 {
                    let w_here = w.min(w_max);
                    if x - w_here < 0.5 * w_here {
                        pts.push(0.0);
                        break;
                    }
                    x -= w_here;
                    pts.push(x);
                    w *= opts.grading;
                }
                // outwards
                let mut w = h * opts.grading;
                let mut x = kf + h;
                while x < p_max {
                    let w_here = w.min(w_max);
                    if p_max - x < 1.5 * w_here {
                        pts.push(p_max);
                        break;
                    }
                    x += w_here;
                    pts.push(x);
                    w *= opts.grading;
                }
            }
            _ => {
                let h = (0.5 * (temperature + mu.abs()).sqrt()).min(w_max);
                pts = vec![0.0];
                let mut w = h;
                let mut x = 0.0;
                while x < p_max {
                    let w_here = w.min(w_max);
                    if p_max - x < 1.5 * w_here {
                        pts.push(p_max);
                        break;
                    }
                    x += w_here;
                    pts.push(x);
                    w *= opts.grading;
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        if pts[0] != 0.0 {
            pts.insert(0, 0.0);
        }
        let pts = subdivide(&pts, opts.refinement.max(1));
        Self::from_breakpoints(pts, opts.nodes_per_panel, fermi)
    }

    /// Same panels, each split in two.
    pub fn refined(&self) -> Self {
        let pts = subdivide(&self.breakpoints, 2);
        Self::from_breakpoints(pts, self.nodes_per_panel, self.fermi_momentum).expect("refining a valid grid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn fermi_momentum(&self) -> Option<f64> {
        self.fermi_momentum
    }

    pub fn p_max(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Radial weights for `∫ d³p/(2π)³`: `w_i p_i²/(2π²)`.
    pub fn measure(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * p * p / (2.0 * PI * PI))
            .collect()
    }

    /// Width of the panel containing `p`.
    pub fn panel_width_at(&self, p: f64) -> Option<f64> {
        self.breakpoints
            .windows(2)
            .find(|w| w[0] <= p && p <= w[1])
            .map(|w| w[1] - w[0])
    }
}

fn subdivide(pts: &[f64], pieces: usize) -> Vec<f64> {
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        for j in 1..=pieces {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / pieces as f64);
        }
    }
    out
}
