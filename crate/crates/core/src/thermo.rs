//! Partition functions with certified series tails, and the energy-storage
//! quantifiers `ε(β) = -β ∂_β ln Z` and `C(β) = β² ∂²_β ln Z`.

use crate::deriv::{log_beta_derivatives, StencilConfig};
use crate::error::{Error, Result};
use crate::spectra::{ClosedForm, EnsembleModel, SpectrumKind};

/// Smallest inverse temperature evaluated on unbounded ladders.
pub const BETA_MIN: f64 = 1e-4;

pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

/// Dimensionless inverse temperature `β ħω_ref`, strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Beta(f64);

impl Beta {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("beta must be positive and finite, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    /// Certified upper bound on the truncation error of `value`.
    pub tail_bound: f64,
}

/// How β-derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMethod {
    /// Analytic when a usable closed form exists, otherwise the default
    /// numeric route of the quantity.
    #[default]
    Auto,
    /// Closed forms only; an error when none applies.
    Analytic,
    /// Boltzmann-weighted moment series.
    Series,
    /// Log-β stencil with Richardson extrapolation.
    Stencil,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Relative tolerance for series truncation, in `(0, 1e-3]`.
    pub tol: f64,
    pub max_terms: usize,
    /// Use closed forms (including continuum approximations) for `Z`.
    pub prefer_closed_form: bool,
    pub method: DerivativeMethod,
    pub stencil: StencilConfig,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_terms: DEFAULT_MAX_TERMS,
            prefer_closed_form: false,
            method: DerivativeMethod::Auto,
            stencil: StencilConfig::default(),
        }
    }
}

impl EvalOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn closed_form(mut self, prefer: bool) -> Self {
        self.prefer_closed_form = prefer;
        self
    }

    pub fn with_method(mut self, method: DerivativeMethod) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must lie in (0, 1e-3], got {}",
                self.tol
            )));
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidArgument("max_terms must be >= 1".into()));
        }
        Ok(())
    }

    /// Options for the values fed to a difference stencil. Truncation error
    /// changes discontinuously with the term count, and the stencil divides
    /// it by h², so series are run to machine precision there.
    pub(crate) fn for_stencil(&self) -> Self {
        Self {
            tol: self.tol.min(STENCIL_SERIES_TOL),
            ..*self
        }
    }
}

const STENCIL_SERIES_TOL: f64 = 1e-16;

/// `Z = exp(-β shift) · scaled`, with `shift` the energy subtracted from
/// every level before exponentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Reduced {
    pub scaled: f64,
    pub shift: f64,
    /// Absolute truncation bound on `scaled`.
    pub tail: f64,
    pub terms: usize,
}

impl Reduced {
    fn relative_tail(&self) -> f64 {
        self.tail / self.scaled
    }
}

pub(crate) fn check_beta(model: &EnsembleModel, beta: f64) -> Result<()> {
    if model.is_unbounded() && beta < BETA_MIN {
        return Err(Error::Divergence {
            beta,
            beta_min: BETA_MIN,
        });
    }
    Ok(())
}

/// Canonical partition function `Z(β) = Σ g_n exp(-β θ ε_n)`.
pub fn partition(model: &EnsembleModel, beta: Beta, opts: &EvalOptions) -> Result<SeriesResult> {
    opts.validate()?;
    let r = reduced_partition(model, beta.value(), opts)?;
    let factor = (-beta.value() * r.shift).exp();
    Ok(SeriesResult {
        value: factor * r.scaled,
        terms_used: r.terms,
        tail_bound: factor * r.tail,
    })
}

/// `ln Z(β)`, assembled without forming `exp(-β E_0)`.
pub fn log_partition(model: &EnsembleModel, beta: Beta, opts: &EvalOptions) -> Result<f64> {
    opts.validate()?;
    let r = reduced_partition(model, beta.value(), opts)?;
    Ok(r.scaled.ln() - beta.value() * r.shift)
}

pub(crate) fn reduced_partition(model: &EnsembleModel, beta: f64, opts: &EvalOptions) -> Result<Reduced> {
    check_beta(model, beta)?;
    match model.kind() {
        SpectrumKind::Product(models) => {
            let sub = opts.with_tol(opts.tol / (2.0 * models.len() as f64));
            let mut scaled = 1.0;
            let mut shift = 0.0;
            let mut growth = 1.0;
            let mut terms = 0;
            for m in models {
                let r = reduced_partition(m, beta, &sub)?;
                scaled *= r.scaled;
                shift += r.shift;
                growth *= 1.0 + r.relative_tail();
                terms += r.terms;
            }
            Ok(Reduced {
                scaled,
                shift,
                tail: scaled * (growth - 1.0),
                terms,
            })
        }
        SpectrumKind::SymmetrizedPower { base, count } => {
            let n = f64::from(*count);
            let sub = opts.with_tol(opts.tol / (2.0 * n));
            let r = reduced_partition(base, beta, &sub)?;
            let log_fact: f64 = (2..=*count).map(|k| f64::from(k).ln()).sum();
            let scaled = (n * r.scaled.ln() - log_fact).exp();
            Ok(Reduced {
                scaled,
                shift: n * r.shift,
                tail: scaled * ((1.0 + r.relative_tail()).powf(n) - 1.0),
                terms: r.terms,
            })
        }
        _ => {
            if let Some(cf) = model.closed_form() {
                if opts.prefer_closed_form {
                    return Ok(closed_reduced(cf, model, beta));
                }
            }
            let m = ladder_moments(model, beta, opts, 0)?;
            Ok(Reduced {
                scaled: m.sums[0],
                shift: m.shift,
                tail: m.tails[0],
                terms: m.terms,
            })
        }
    }
}

fn closed_reduced(cf: ClosedForm, model: &EnsembleModel, beta: f64) -> Reduced {
    let u = beta * model.energy_scale();
    let (scaled, shift) = match cf {
        ClosedForm::Ho => (1.0 / -(-u).exp_m1(), 0.5 * model.energy_scale()),
        ClosedForm::So => (1.0 / -(-2.0 * u).exp_m1(), model.energy_scale()),
        ClosedForm::BoxContinuum => ((std::f64::consts::PI / (4.0 * u)).sqrt(), 0.0),
        ClosedForm::RotorContinuum => (1.0 / u, 0.0),
    };
    Reduced {
        scaled,
        shift,
        tail: 0.0,
        terms: 0,
    }
}

/// Boltzmann moments `Σ t_n (βΔE_n)^j`, `t_n = g_n exp(-βΔE_n)`, `ΔE_n = E_n - E_0`.
pub(crate) struct Moments {
    pub sums: [f64; 3],
    pub tails: [f64; 3],
    pub shift: f64,
    pub terms: usize,
}

#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Sum an elementary ladder in increasing energy. Built-in ladders have
/// nonincreasing successive-term ratios (also after weighting by powers of
/// `ΔE`), so once the ratio `r = s_{n+1}/s_n` drops below one the remainder
/// is bounded by `s_{n+1} / (1 - r)`.
pub(crate) fn ladder_moments(
    model: &EnsembleModel,
    beta: f64,
    opts: &EvalOptions,
    order: usize,
) -> Result<Moments> {
    let scale = model.energy_scale();
    let mut ladder = model
        .spectrum()
        .ladder()
        .ok_or_else(|| Error::InvalidArgument("composite spectrum has no single ladder".into()))?;
    let finite = ladder.is_finite();
    let first = ladder.next().expect("ladders are nonempty");
    let shift = scale * first.energy;

    let weighted = |energy: f64, degeneracy: u64| -> [f64; 3] {
        let x = beta * (scale * energy - shift);
        let t = degeneracy as f64 * (-x).exp();
        [t, t * x, t * x * x]
    };

    let mut acc = [Kahan::default(); 3];
    let mut current = weighted(first.energy, first.degeneracy);
    let mut terms = 0;
    loop {
        for j in 0..=order {
            acc[j].add(current[j]);
        }
        terms += 1;
        let Some(next_level) = ladder.next() else {
            return Ok(Moments {
                sums: acc.map(|k| k.sum),
                tails: [0.0; 3],
                shift,
                terms,
            });
        };
        let next = weighted(next_level.energy, next_level.degeneracy);
        if !finite {
            let mut tails = [0.0; 3];
            let mut certified = true;
            for j in 0..=order {
                if next[j] == 0.0 {
                    continue;
                }
                // Moment terms vanish at the ground level; certify from n >= 1.
                if current[j] == 0.0 {
                    certified = false;
                    break;
                }
                let r = next[j] / current[j];
                if r >= 1.0 {
                    certified = false;
                    break;
                }
                tails[j] = next[j] / (1.0 - r);
                if tails[j] > opts.tol * acc[j].sum {
                    certified = false;
                    break;
                }
            }
            if certified {
                return Ok(Moments {
                    sums: acc.map(|k| k.sum),
                    tails,
                    shift,
                    terms,
                });
            }
            if terms >= opts.max_terms {
                return Err(Error::ConvergenceFailure {
                    partial: acc[0].sum * (-beta * shift).exp(),
                    terms,
                });
            }
        }
        current = next;
    }
}

fn coth_times(w: f64) -> f64 {
    // w coth w
    if w < 1e-4 {
        return 1.0 + w * w / 3.0;
    }
    w * (1.0 + (-2.0 * w).exp()) / -(-2.0 * w).exp_m1()
}

pub(crate) fn over_sinh(w: f64) -> f64 {
    // w / sinh w
    if w < 1e-4 {
        return 1.0 - w * w / 6.0;
    }
    2.0 * w * (-w).exp() / -(-2.0 * w).exp_m1()
}

/// `ε` and `C` of a single closed form at `u = βθ`.
pub(crate) fn closed_energy_capacity(cf: ClosedForm, u: f64) -> (f64, f64) {
    match cf {
        ClosedForm::Ho => {
            let w = 0.5 * u;
            (coth_times(w), over_sinh(w).powi(2))
        }
        ClosedForm::So => (coth_times(u), over_sinh(u).powi(2)),
        ClosedForm::BoxContinuum | ClosedForm::RotorContinuum => {
            let m = cf.power_law_exponent().expect("power law");
            (-m, -m)
        }
    }
}

/// Whether analytic derivatives of `ln Z` exist under these options.
pub(crate) fn has_analytic(model: &EnsembleModel, opts: &EvalOptions) -> bool {
    match model.kind() {
        SpectrumKind::Product(models) => models.iter().all(|m| has_analytic(m, opts)),
        SpectrumKind::SymmetrizedPower { base, .. } => has_analytic(base, opts),
        _ => model
            .closed_form()
            .is_some_and(|cf| cf.is_exact() || opts.prefer_closed_form),
    }
}

fn analytic_energy_capacity(model: &EnsembleModel, beta: f64) -> (f64, f64) {
    match model.kind() {
        SpectrumKind::Product(models) => models
            .iter()
            .map(|m| analytic_energy_capacity(m, beta))
            .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1)),
        SpectrumKind::SymmetrizedPower { base, count } => {
            let (e, c) = analytic_energy_capacity(base, beta);
            (f64::from(*count) * e, f64::from(*count) * c)
        }
        _ => closed_energy_capacity(
            model.closed_form().expect("checked by has_analytic"),
            beta * model.energy_scale(),
        ),
    }
}

fn series_energy_capacity(model: &EnsembleModel, beta: f64, opts: &EvalOptions) -> Result<(f64, f64)> {
    check_beta(model, beta)?;
    match model.kind() {
        SpectrumKind::Product(models) => {
            let mut total = (0.0, 0.0);
            for m in models {
                let (e, c) = series_energy_capacity(m, beta, opts)?;
                total.0 += e;
                total.1 += c;
            }
            Ok(total)
        }
        SpectrumKind::SymmetrizedPower { base, count } => {
            let (e, c) = series_energy_capacity(base, beta, opts)?;
            Ok((f64::from(*count) * e, f64::from(*count) * c))
        }
        _ => {
            let m = ladder_moments(model, beta, opts, 2)?;
            let mean = m.sums[1] / m.sums[0];
            let second = m.sums[2] / m.sums[0];
            Ok((mean + beta * m.shift, (second - mean * mean).max(0.0)))
        }
    }
}

fn stencil_energy_capacity(model: &EnsembleModel, beta: f64, opts: &EvalOptions) -> Result<(f64, f64)> {
    let fine = opts.for_stencil();
    let d = log_beta_derivatives(
        |b| log_partition(model, Beta::new(b)?, &fine),
        beta,
        opts.stencil,
    )?;
    Ok((-d.beta_first(), d.beta_second()))
}

fn energy_capacity(model: &EnsembleModel, beta: Beta, opts: &EvalOptions) -> Result<(f64, f64)> {
    opts.validate()?;
    let b = beta.value();
    check_beta(model, b)?;
    match opts.method {
        DerivativeMethod::Auto if has_analytic(model, opts) => Ok(analytic_energy_capacity(model, b)),
        DerivativeMethod::Auto | DerivativeMethod::Series => series_energy_capacity(model, b, opts),
        DerivativeMethod::Analytic => {
            if has_analytic(model, opts) {
                Ok(analytic_energy_capacity(model, b))
            } else {
                Err(Error::InvalidArgument(format!(
                    "no closed form for {} under these options",
                    model.describe()
                )))
            }
        }
        DerivativeMethod::Stencil => stencil_energy_capacity(model, b, opts),
    }
}

/// `ε(β) = -β ∂_β ln Z`, i.e. `β⟨E⟩` in units of the reference energy.
pub fn internal_energy(model: &EnsembleModel, beta: Beta, opts: &EvalOptions) -> Result<f64> {
    energy_capacity(model, beta, opts).map(|(e, _)| e)
}

/// `C(β) = β² ∂²_β ln Z = β² Var(E)`.
pub fn heat_capacity(model: &EnsembleModel, beta: Beta, opts: &EvalOptions) -> Result<f64> {
    energy_capacity(model, beta, opts).map(|(_, c)| c)
}
