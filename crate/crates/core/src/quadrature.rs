//! Composite Gauss–Legendre quadrature with panel-halving self-convergence.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const NODES_PER_PANEL: usize = 32;
pub const MAX_PANELS: usize = 1 << 10;

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("Gauss-Legendre order must be >= 1".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    /// Shared 32-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(NODES_PER_PANEL).expect("order is positive"))
    }

    /// Mapped nodes and weights for `panels` equal panels on [a, b].
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (t, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * h * t);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Summation by recursive halving; the tree shape depends only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            min_panels: 1,
            max_panels: MAX_PANELS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// `|I(2p) - I(p)|` at the accepted level.
    pub error: f64,
    pub panels: usize,
}

/// Composite rule on `panels` panels.
pub fn integrate_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let (xs, ws) = GaussLegendre::standard().composite(a, b, panels);
    let terms: Vec<f64> = xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).collect();
    pairwise_sum(&terms)
}

/// Double the panel count until two successive levels agree.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let mut panels = cfg.min_panels.max(1);
    if panels > cfg.max_panels {
        return Err(Error::Quadrature(format!(
            "{panels} panels required, cap is {}",
            cfg.max_panels
        )));
    }
    let mut coarse = integrate_fixed(&f, a, b, panels);
    loop {
        let next = panels * 2;
        if next > cfg.max_panels {
            return Err(Error::Quadrature(format!(
                "no self-convergence on [{a}, {b}] within {} panels",
                cfg.max_panels
            )));
        }
        let fine = integrate_fixed(&f, a, b, next);
        if !fine.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        let err = (fine - coarse).abs();
        if err <= cfg.abs_tol.max(cfg.rel_tol * fine.abs()) {
            return Ok(QuadResult {
                value: fine,
                error: err,
                panels: next,
            });
        }
        coarse = fine;
        panels = next;
    }
}
