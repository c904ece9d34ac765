//! Gauss–Legendre quadrature: fixed rules, composite rules on explicit
//! breakpoints, and a globally adaptive bisection driver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: one `rule` application per consecutive pair of `points`.
pub fn composite_nodes(rule: &GaussLegendre, points: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(rule.len() * points.len());
    let mut ws = Vec::with_capacity(rule.len() * points.len());
    for pair in points.windows(2) {
        for (x, w) in rule.mapped(pair[0], pair[1]) {
            xs.push(x);
            ws.push(w);
        }
    }
    (xs, ws)
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub rule_points: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
            rule_points: 10,
        }
    }
}

impl AdaptiveOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

struct Panel {
    lo: f64,
    hi: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            // ties broken by position so the refinement order is reproducible
            .then_with(|| other.lo.partial_cmp(&self.lo).unwrap_or(Ordering::Equal))
    }
}

/// Globally adaptive Gauss–Legendre integration over `[points[0], points[last]]`,
/// starting from the panels delimited by `points`.
///
/// Each panel's error is estimated by comparing the rule on the panel with the
/// sum of the rule on its two halves; the worst panel is bisected until the
/// summed estimate meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    opts: AdaptiveOptions,
) -> Result<f64> {
    if points.len() < 2 {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(opts.rule_points);
    let mut heap = BinaryHeap::new();
    let make = |lo: f64, hi: f64, whole: f64, f: &mut F| -> Panel {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(&mut *f, lo, mid);
        let right = rule.integrate(&mut *f, mid, hi);
        Panel {
            lo,
            hi,
            left,
            right,
            error: (left + right - whole).abs(),
        }
    };
    for pair in points.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi == lo {
            continue;
        }
        let whole = rule.integrate(&mut f, lo, hi);
        heap.push(make(lo, hi, whole, &mut f));
    }
    let mut subdivisions = 0;
    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(s, e), p| (s + p.left + p.right, e + p.error));
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            // sum in position order so the result does not depend on heap layout
            let mut panels: Vec<&Panel> = heap.iter().collect();
            panels.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
            return Ok(panels.iter().map(|p| p.left + p.right).sum());
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                lo: points[0],
                hi: points[points.len() - 1],
                subdivisions,
                estimate: err,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(0.0),
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval exhausted at machine precision; accept it as is
            heap.push(Panel { error: 0.0, ..worst });
            subdivisions += 1;
            continue;
        }
        heap.push(make(worst.lo, mid, worst.left, &mut f));
        heap.push(make(mid, worst.hi, worst.right, &mut f));
        subdivisions += 1;
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<f64> {
    integrate_breakpoints(f, &[a, b], opts)
}

/// Integrate over `[a, ∞)` with geometrically growing panels of initial width
/// `scale`. Stops once the running panel contributions are negligible for
/// several consecutive panels; suitable for integrands that decay without
/// sustained oscillation.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    opts: AdaptiveOptions,
) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = a;
    let mut width = scale;
    let mut quiet = 0;
    for _ in 0..400 {
        let hi = lo + width;
        let part = integrate_breakpoints(&mut f, &[lo, hi], opts)?;
        total += part;
        if part.abs() <= opts.abs_tol.max(opts.rel_tol * total.abs()) * 1e-2 {
            quiet += 1;
            if quiet >= 3 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::QuadratureNonConvergence {
        lo: a,
        hi: f64::INFINITY,
        subdivisions: 400,
        estimate: f64::NAN,
    })
}
