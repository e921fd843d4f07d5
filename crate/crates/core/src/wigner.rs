//! Thermal and eigenstate Wigner functions in the dimensionless variables
//! `x = (mω/ħ)^{1/2} q`, `k = (mωħ)^{-1/2} p`, plus phase-space quadrature.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::curve::CurveSeries;
use crate::error::{Error, Result};
use crate::quadrature::{pairwise_sum, GaussLegendre, MAX_PANELS, NODES_PER_PANEL};
use crate::specfun::{ive, laguerre_recurrence, log_gamma_unchecked, BesselOrder, Dd};
use crate::thermo::Beta;

/// Minimum quadrature nodes per period of `cos(2ky)`.
pub const NODES_PER_PERIOD: usize = 8;

/// `W_n = (-1)^n π^{-1} e^{-(x²+k²)} L_n[2(x²+k²)]`.
pub fn ho_eigen_wigner(n: u32, x: f64, k: f64) -> f64 {
    let r2 = x * x + k * k;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * (-r2).exp() * laguerre_recurrence(n, 0.0, 2.0 * r2) / PI
}

/// Gaussian thermal state `π^{-1} t e^{-t(x²+k²)}`, `t = tanh(βħω/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalWignerHO {
    beta: Beta,
    t: f64,
}

impl ThermalWignerHO {
    pub fn new(beta: Beta) -> Self {
        Self {
            beta,
            t: (0.5 * beta.value()).tanh(),
        }
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eval(&self, x: f64, k: f64) -> f64 {
        self.t / PI * (-self.t * (x * x + k * k)).exp()
    }
}

pub fn ho_thermal_wigner(state: &ThermalWignerHO, x: f64, k: f64) -> f64 {
    state.eval(x, k)
}

/// Configuration-space extension of the singular-oscillator state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SoDomain {
    /// Defined for `x >= 0`, zero elsewhere.
    #[default]
    HalfLine,
    /// `ρ(q, q') = ½ ρ_half(|q|, |q'|)`: a normalized full-line state, even in `x`.
    EvenExtension,
}

/// Inner `y`-quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerQuadrature {
    /// Relative to `∫ |kernel| dy`.
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for InnerQuadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_panels: MAX_PANELS,
        }
    }
}

/// Thermal singular-oscillator state at `u = βħω`:
/// `W(x,k) = ∫ cos(2ky) G(x,y) dy` with
/// `G = (2e^{αu}/π) |x²-y²|^{1/2} e^{-coth u (x²+y²)} I_α(|x²-y²|/sinh u)`,
/// integrated over `|y| <= x` on the half-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalWignerSO {
    beta: Beta,
    alpha: BesselOrder,
    domain: SoDomain,
    inner: InnerQuadrature,
    tanh_half: f64,
    inv_sinh: f64,
}

impl ThermalWignerSO {
    pub fn new(beta: Beta, alpha: BesselOrder) -> Self {
        let u = beta.value();
        Self {
            beta,
            alpha,
            domain: SoDomain::HalfLine,
            inner: InnerQuadrature::default(),
            tanh_half: (0.5 * u).tanh(),
            // 1/sinh u = 2e^{-u}/(1 - e^{-2u})
            inv_sinh: 2.0 * (-u).exp() / -(-2.0 * u).exp_m1(),
        }
    }

    pub fn with_domain(mut self, domain: SoDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_inner(mut self, inner: InnerQuadrature) -> Self {
        self.inner = inner;
        self
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn alpha(&self) -> BesselOrder {
        self.alpha
    }

    pub fn domain(&self) -> SoDomain {
        self.domain
    }

    /// `G(x, y)`, with the exponent assembled before exponentiation:
    /// `-x² tanh(u/2) - y² coth(u/2)` for `|y| <= |x|`, roles swapped otherwise.
    pub fn kernel(&self, x: f64, y: f64) -> f64 {
        let (x2, y2) = (x * x, y * y);
        let a = self.alpha.value();
        let u = self.beta.value();
        let (th, ch) = (self.tanh_half, 1.0 / self.tanh_half);
        let exponent = if y2 <= x2 {
            -x2 * th - y2 * ch
        } else {
            -x2 * ch - y2 * th
        };
        let w = (x2 - y2).abs();
        let pref = 2.0 / PI * (a * u + exponent).exp();
        if w == 0.0 {
            // |w|^{1/2} I_α(w/sinh u) at w → 0
            return if a == -0.5 {
                pref * (2.0 / (PI * self.inv_sinh)).sqrt()
            } else if a > -0.5 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        pref * w.sqrt() * ive(a, w * self.inv_sinh)
    }

    /// `∫ dk W(x, k) = π G(x, 0)`; on the half-line it integrates to one over `x >= 0`.
    pub fn x_marginal(&self, x: f64) -> Result<f64> {
        match self.domain {
            SoDomain::HalfLine if x < 0.0 => Ok(0.0),
            SoDomain::HalfLine => Ok(PI * self.kernel(x, 0.0)),
            SoDomain::EvenExtension => Ok(0.5 * PI * self.kernel(x.abs(), 0.0)),
        }
    }

    /// Gaussian decay rate of the kernel envelope, `tanh(u/2)`.
    pub fn envelope_rate(&self) -> f64 {
        self.tanh_half
    }

    /// `y` beyond which the off-diagonal kernel is below `1e-18` of its scale.
    fn y_cutoff(&self, x: f64) -> f64 {
        let a = self.alpha.value();
        let growth = (a * self.beta.value()).max(0.0);
        (x * x + (growth + 42.0) / self.tanh_half).sqrt()
    }

    pub fn eval(&self, x: f64, k: f64) -> Result<f64> {
        Ok(self.slice(x, &[k])?[0])
    }

    /// `W(x, k_j)` for all `k_j`, sharing the kernel samples.
    pub fn slice(&self, x: f64, ks: &[f64]) -> Result<Vec<f64>> {
        if !x.is_finite() || ks.iter().any(|k| !k.is_finite()) {
            return Err(Error::Domain("phase-space point must be finite".into()));
        }
        let (xa, factor) = match self.domain {
            SoDomain::HalfLine if x < 0.0 => {
                return Err(Error::Domain(format!("half-line state evaluated at x = {x} < 0")));
            }
            SoDomain::HalfLine => (x, 2.0),
            SoDomain::EvenExtension => (x.abs(), 1.0),
        };
        let k_max = ks.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        let mut total = vec![0.0; ks.len()];
        let mut pieces = vec![(0.0, xa)];
        if self.domain == SoDomain::EvenExtension {
            pieces.push((xa, self.y_cutoff(xa)));
        }
        // Later pieces are judged against the scale of earlier ones.
        let mut scale = 0.0f64;
        for (lo, hi) in pieces {
            if hi <= lo {
                continue;
            }
            let (part, s) = self.cosine_transform(xa, lo, hi, ks, k_max, scale)?;
            scale = scale.max(s);
            for (t, p) in total.iter_mut().zip(part) {
                *t += factor * p;
            }
        }
        Ok(total)
    }

    /// `∫_lo^hi cos(2ky) G(x, y) dy` for each `k`, panels doubled until
    /// two levels agree relative to `max(∫ |G|, outer_scale)`.
    fn cosine_transform(
        &self,
        x: f64,
        lo: f64,
        hi: f64,
        ks: &[f64],
        k_max: f64,
        outer_scale: f64,
    ) -> Result<(Vec<f64>, f64)> {
        let periods = k_max * (hi - lo) / PI;
        let needed = (periods * NODES_PER_PERIOD as f64 / NODES_PER_PANEL as f64).ceil() as usize;
        if needed > self.inner.max_panels {
            return Err(Error::Quadrature(format!(
                "cos(2ky) with k = {k_max} over [{lo}, {hi}] needs {needed} panels, cap is {}",
                self.inner.max_panels
            )));
        }
        let mut panels = needed.max(1);
        let mut coarse = self.cosine_level(x, lo, hi, ks, panels);
        loop {
            let next = panels * 2;
            if next > self.inner.max_panels {
                return Err(Error::Quadrature(format!(
                    "inner integral at x = {x} did not converge within {} panels",
                    self.inner.max_panels
                )));
            }
            let fine = self.cosine_level(x, lo, hi, ks, next);
            let diff = fine
                .0
                .iter()
                .zip(&coarse.0)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if !fine.1.is_finite() {
                return Err(Error::Quadrature(format!("non-finite kernel at x = {x}")));
            }
            if diff <= self.inner.rel_tol * fine.1.max(outer_scale) || diff < f64::MIN_POSITIVE {
                return Ok(fine);
            }
            coarse = fine;
            panels = next;
        }
    }

    fn cosine_level(&self, x: f64, lo: f64, hi: f64, ks: &[f64], panels: usize) -> (Vec<f64>, f64) {
        let (ys, ws) = GaussLegendre::standard().composite(lo, hi, panels);
        let g: Vec<f64> = ys.iter().zip(&ws).map(|(&y, &w)| w * self.kernel(x, y)).collect();
        let scale = pairwise_sum(&g.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let values = ks
            .iter()
            .map(|&k| {
                let terms: Vec<f64> = ys.iter().zip(&g).map(|(&y, &gw)| gw * (2.0 * k * y).cos()).collect();
                pairwise_sum(&terms)
            })
            .collect();
        (values, scale)
    }
}

pub fn so_thermal_wigner(state: &ThermalWignerSO, x: f64, k: f64) -> Result<f64> {
    if x < 0.0 && state.domain() == SoDomain::HalfLine {
        return Err(Error::Domain(format!("x = {x} < 0 outside the half-line")));
    }
    state.eval(x, k)
}

/// `∫_0^∞ dx ∫ dk W` through the exact `k`-marginal.
pub fn so_normalization(state: &ThermalWignerSO, tol: f64) -> Result<f64> {
    let half = state.with_domain(SoDomain::HalfLine);
    let x_max = half.y_cutoff(0.0);
    let cfg = crate::quadrature::QuadConfig {
        rel_tol: tol,
        abs_tol: 0.0,
        min_panels: 4,
        max_panels: MAX_PANELS,
    };
    // x² substitution removes the algebraic endpoint behaviour at x = 0 for α = -1/2.
    let r = crate::quadrature::integrate(
        |s: f64| {
            let x = s * s;
            2.0 * s * half.x_marginal(x).unwrap_or(f64::NAN)
        },
        0.0,
        x_max.sqrt(),
        cfg,
    )?;
    Ok(r.value)
}

/// A thermal state that can be sampled on phase-space grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalWigner {
    Ho(ThermalWignerHO),
    So(ThermalWignerSO),
}

impl ThermalWigner {
    fn envelope_rate(&self) -> f64 {
        match self {
            Self::Ho(h) => h.t(),
            Self::So(s) => s.envelope_rate(),
        }
    }

    fn half_line(&self) -> bool {
        matches!(self, Self::So(s) if s.domain() == SoDomain::HalfLine)
    }

    pub fn slice(&self, x: f64, ks: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Ho(h) => Ok(ks.iter().map(|&k| h.eval(x, k)).collect()),
            Self::So(s) if x < 0.0 && s.domain() == SoDomain::HalfLine => Ok(vec![0.0; ks.len()]),
            Self::So(s) => s.slice(x, ks),
        }
    }
}

impl From<ThermalWignerHO> for ThermalWigner {
    fn from(h: ThermalWignerHO) -> Self {
        Self::Ho(h)
    }
}

impl From<ThermalWignerSO> for ThermalWigner {
    fn from(s: ThermalWignerSO) -> Self {
        Self::So(s)
    }
}

/// Rectangle of composite Gauss–Legendre panels, 32 nodes each.
///
/// A mirrored axis starts at zero and stands for the symmetric interval
/// `[-max, max]`; integrals over it are doubled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub x_panels: usize,
    pub k_panels: usize,
    pub x_mirror: bool,
    pub k_mirror: bool,
}

type Axis = (Vec<f64>, Vec<f64>);

impl PhaseSpaceGrid {
    pub fn new(x_min: f64, x_max: f64, k_min: f64, k_max: f64, x_panels: usize, k_panels: usize) -> Result<Self> {
        let finite = [x_min, x_max, k_min, k_max].iter().all(|v| v.is_finite());
        if !finite || x_max <= x_min || k_max <= k_min {
            return Err(Error::Configuration(format!(
                "bad grid extents x [{x_min}, {x_max}], k [{k_min}, {k_max}]"
            )));
        }
        if x_panels == 0 || k_panels == 0 || x_panels > MAX_PANELS || k_panels > MAX_PANELS {
            return Err(Error::Configuration(format!(
                "panel counts must be in 1..={MAX_PANELS}, got {x_panels} x {k_panels}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            k_min,
            k_max,
            x_panels,
            k_panels,
            x_mirror: false,
            k_mirror: false,
        })
    }

    /// Declare even integrands along the given axes; mirrored axes must start at 0.
    pub fn with_mirror(mut self, x_mirror: bool, k_mirror: bool) -> Result<Self> {
        if (x_mirror && self.x_min != 0.0) || (k_mirror && self.k_min != 0.0) {
            return Err(Error::Configuration("a mirrored axis must start at 0".into()));
        }
        self.x_mirror = x_mirror;
        self.k_mirror = k_mirror;
        Ok(self)
    }

    fn mirror_factor(&self) -> f64 {
        let f = |m: bool| if m { 2.0 } else { 1.0 };
        f(self.x_mirror) * f(self.k_mirror)
    }

    pub fn n_x(&self) -> usize {
        self.x_panels * NODES_PER_PANEL
    }

    pub fn n_k(&self) -> usize {
        self.k_panels * NODES_PER_PANEL
    }

    pub fn refined(&self) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.k_min, self.k_max, self.x_panels * 2, self.k_panels * 2)?
            .with_mirror(self.x_mirror, self.k_mirror)
    }

    fn axes(&self) -> (Axis, Axis) {
        let rule = GaussLegendre::standard();
        (
            rule.composite(self.x_min, self.x_max, self.x_panels),
            rule.composite(self.k_min, self.k_max, self.k_panels),
        )
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        self.axes().0 .0
    }

    pub fn k_nodes(&self) -> Vec<f64> {
        self.axes().1 .0
    }

    /// `∫∫ f dx dk`, rows in parallel, pairwise reduction in fixed order.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let ((xs, wx), (ks, wk)) = self.axes();
        let rows: Vec<f64> = xs
            .par_iter()
            .zip(wx.par_iter())
            .map(|(&x, &w)| {
                let terms: Vec<f64> = ks.iter().zip(&wk).map(|(&k, &v)| v * f(x, k)).collect();
                w * pairwise_sum(&terms)
            })
            .collect();
        self.mirror_factor() * pairwise_sum(&rows)
    }

    /// Row-major samples of `state` on the grid nodes.
    pub fn sample(&self, state: &ThermalWigner) -> Result<Vec<Vec<f64>>> {
        let (xs, ks) = (self.x_nodes(), self.k_nodes());
        xs.par_iter().map(|&x| state.slice(x, &ks)).collect()
    }

    /// `∫∫ Π_s W_s dx dk` over pre-sampled states.
    fn integrate_product(&self, samples: &[&Vec<Vec<f64>>]) -> f64 {
        let ((_, wx), (_, wk)) = self.axes();
        let rows: Vec<f64> = (0..wx.len())
            .into_par_iter()
            .map(|i| {
                let terms: Vec<f64> = (0..wk.len())
                    .map(|j| wk[j] * samples.iter().map(|s| s[i][j]).product::<f64>())
                    .collect();
                wx[i] * pairwise_sum(&terms)
            })
            .collect();
        self.mirror_factor() * pairwise_sum(&rows)
    }

    /// CSV dump `x,k,w`, row-major, 17 significant digits.
    pub fn dump_csv(&self, state: &ThermalWigner) -> Result<String> {
        use std::fmt::Write as _;
        let samples = self.sample(state)?;
        let (xs, ks) = (self.x_nodes(), self.k_nodes());
        let mut out = String::from("x,k,w\n");
        for (x, row) in xs.iter().zip(&samples) {
            for (k, w) in ks.iter().zip(row) {
                let _ = writeln!(out, "{x:.16e},{k:.16e},{w:.16e}");
            }
        }
        Ok(out)
    }
}

/// Half-width `R` with `∫_{r>R} (1/π) e^{-c r²} < tol`, i.e. `e^{-cR²}/c·... ≤ tol`:
/// `R = √(-ln(tol·c/π)/c)`.
pub fn envelope_extent(c: f64, tol: f64) -> f64 {
    (-(tol * c / PI).ln()).max(0.0).sqrt() / c.sqrt()
}

fn grid_quantities(grid: &PhaseSpaceGrid, states: &[ThermalWigner]) -> Result<Vec<f64>> {
    let samples: Vec<Vec<Vec<f64>>> = states.iter().map(|s| grid.sample(s)).collect::<Result<_>>()?;
    if samples.len() == 1 {
        return Ok(vec![grid.integrate_product(&[&samples[0]])]);
    }
    let mut q = Vec::new();
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            q.push(2.0 * PI * grid.integrate_product(&[&samples[i], &samples[j]]));
        }
    }
    Ok(q)
}

/// Extents from the Gaussian envelope bound of every state; panel counts
/// doubled until the normalization (one state) or the pairwise projections
/// (several states) change by at most `tol`.
///
/// Thermal states are even in `k`, and in `x` unless one lives on the half-line,
/// so only nonnegative half-axes are sampled.
pub fn build_grid(states: &[ThermalWigner], tol: f64) -> Result<PhaseSpaceGrid> {
    build_grid_with_values(states, tol).map(|(g, _)| g)
}

/// [`build_grid`] together with the certified quantities on the returned grid.
pub fn build_grid_with_values(states: &[ThermalWigner], tol: f64) -> Result<(PhaseSpaceGrid, Vec<f64>)> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("build_grid needs at least one state".into()));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Configuration(format!("grid tolerance must be in (0, 1), got {tol}")));
    }
    let r = states
        .iter()
        .map(|s| envelope_extent(s.envelope_rate(), tol))
        .fold(0.0f64, f64::max);
    let x_even = !states.iter().any(ThermalWigner::half_line);
    let mut grid = PhaseSpaceGrid::new(0.0, r, 0.0, r, 1, 1)?.with_mirror(x_even, true)?;
    let mut coarse = grid_quantities(&grid, states)?;
    loop {
        let fine_grid = grid.refined().map_err(|_| {
            Error::Configuration(format!("grid tolerance {tol} not reachable within {MAX_PANELS} panels"))
        })?;
        let fine = grid_quantities(&fine_grid, states)?;
        let diff = fine.iter().zip(&coarse).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff <= tol {
            return Ok((fine_grid, fine));
        }
        grid = fine_grid;
        coarse = fine;
    }
}

/// `F = 2π ∫∫ W^a W^b dx dk` on a fixed grid.
pub fn phase_space_projection(a: &ThermalWigner, b: &ThermalWigner, grid: &PhaseSpaceGrid) -> Result<f64> {
    let (sa, sb) = (grid.sample(a)?, grid.sample(b)?);
    Ok(2.0 * PI * grid.integrate_product(&[&sa, &sb]))
}

/// `P = 2π ∫∫ W² dx dk` on a fixed grid.
pub fn phase_space_purity(w: &ThermalWigner, grid: &PhaseSpaceGrid) -> Result<f64> {
    let s = grid.sample(w)?;
    Ok(2.0 * PI * grid.integrate_product(&[&s, &s]))
}

/// `∫∫ W dx dk` on a fixed grid.
pub fn grid_normalization(w: &ThermalWigner, grid: &PhaseSpaceGrid) -> Result<f64> {
    let s = grid.sample(w)?;
    Ok(grid.integrate_product(&[&s]))
}

/// Projection between the HO at `2β` and the SO at `β` (even extension).
pub fn ho_so_projection(alpha: BesselOrder, beta: Beta, grid_tol: f64) -> Result<f64> {
    let ho: ThermalWigner = ThermalWignerHO::new(Beta::new(2.0 * beta.value())?).into();
    let so: ThermalWigner = ThermalWignerSO::new(beta, alpha)
        .with_domain(SoDomain::EvenExtension)
        .into();
    certified_projection(&ho, &so, grid_tol)
}

/// `2π ∫∫ W^a W^b` on a grid built for the pair, self-converged to `tol`.
pub fn certified_projection(a: &ThermalWigner, b: &ThermalWigner, tol: f64) -> Result<f64> {
    let (_, values) = build_grid_with_values(&[*a, *b], tol)?;
    Ok(values[0])
}

/// `F^{HO-SO}(2β, β)` per β; failed points become NaN with a row flag.
pub fn cross_fidelity_curve(alpha: BesselOrder, betas: &[Beta], grid_tol: f64) -> Result<CurveSeries> {
    let grid: Vec<f64> = betas.iter().map(|b| b.value()).collect();
    let mut curve = CurveSeries::new(grid)?;
    let results: Vec<Result<f64>> = betas
        .par_iter()
        .map(|&b| ho_so_projection(alpha, b, grid_tol))
        .collect();
    let mut values = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) => {
                values.push(f64::NAN);
                curve.flag(i, &e.to_string());
            }
        }
    }
    let monotone = values.windows(2).all(|w| !(w[1] < w[0]));
    curve.push_column(&format!("F_alpha={}", alpha.value()), values)?;
    curve.set_metadata("alpha", &alpha.value().to_string())?;
    curve.set_metadata("grid_tol", &grid_tol.to_string())?;
    curve.set_metadata("monotone", &monotone.to_string())?;
    Ok(curve)
}

/// Both sides of the bilinear Laguerre generating function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HilleHardy {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub terms: usize,
}

/// `Σ_n λ^n n!/Γ(α+n+1) L_n^α((x+y)²) L_n^α((x-y)²)` against
/// `(x²-y²)^{-α} (1-λ)^{-1} λ^{-α/2} e^{-2λ(x²+y²)/(1-λ)} I_α(2λ^{1/2}(x²-y²)/(1-λ))`.
///
/// Terms can exceed the sum by many orders of magnitude, so the series runs
/// in double-double arithmetic. Fails with [`Error::ConvergenceFailure`] if
/// the last terms are not below `1e-12` of the sum.
pub fn hille_hardy_check(alpha: BesselOrder, x: f64, y: f64, lambda: f64, n_terms: usize) -> Result<HilleHardy> {
    if !(y.abs() < x) {
        return Err(Error::Domain(format!("need |y| < x, got x = {x}, y = {y}")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if n_terms == 0 {
        return Err(Error::InvalidArgument("n_terms must be >= 1".into()));
    }
    let a = alpha.value();
    let (p, q) = ((x + y) * (x + y), (x - y) * (x - y));
    let mut coeff = Dd::from((-log_gamma_unchecked(a + 1.0)).exp());
    let (mut lp_prev, mut lp) = (Dd::from(0.0), Dd::from(1.0));
    let (mut lq_prev, mut lq) = (Dd::from(0.0), Dd::from(1.0));
    let mut sum = Dd::from(0.0);
    let mut recent = [0.0f64; 4];
    for n in 0..n_terms {
        if n > 0 {
            let nf = n as f64;
            coeff = coeff.mul(lambda).mul(nf).div(nf + a);
            // n L_n = (2n-1+α-z) L_{n-1} - (n-1+α) L_{n-2}
            let step = |l: Dd, l_prev: Dd, z: f64| {
                l.mul_dd(Dd::sum(2.0 * nf - 1.0 + a, -z))
                    .add(l_prev.mul(-(nf - 1.0 + a)))
                    .div(nf)
            };
            let next_p = step(lp, lp_prev, p);
            let next_q = step(lq, lq_prev, q);
            (lp_prev, lp) = (lp, next_p);
            (lq_prev, lq) = (lq, next_q);
        }
        let term = coeff.mul_dd(lp).mul_dd(lq);
        sum = sum.add(term);
        recent[n % 4] = term.value().abs();
    }
    let lhs = sum.value();
    let tail = recent.iter().fold(0.0f64, |m, t| m.max(*t)) / (1.0 - lambda);
    if !(tail <= 1e-12 * lhs.abs()) {
        return Err(Error::ConvergenceFailure {
            partial: lhs,
            terms: n_terms,
        });
    }
    let w = (x - y) * (x + y);
    let z = 2.0 * lambda.sqrt() * w / (1.0 - lambda);
    let log_rhs = -a * w.ln() - (-lambda).ln_1p() - 0.5 * a * lambda.ln()
        - 2.0 * lambda * (x * x + y * y) / (1.0 - lambda)
        + z;
    let rhs = log_rhs.exp() * ive(a, z);
    Ok(HilleHardy {
        lhs,
        rhs,
        rel_err: (lhs - rhs).abs() / rhs.abs(),
        terms: n_terms,
    })
}

/// Term count after which `λ^n` has absorbed both the target tail and the
/// `e^{(x+|y|)²}`-sized growth of the Laguerre products.
pub fn hille_hardy_terms(lambda: f64, x: f64) -> usize {
    ((92.0 + 4.0 * x * x) / -lambda.ln()).ceil() as usize + 40
}
