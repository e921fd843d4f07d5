//! Five-point central stencils in `u = ln β` with Richardson extrapolation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilConfig {
    /// Initial step in `ln β`.
    pub h0: f64,
    /// Number of step halvings fed into the Richardson tableau.
    pub halvings: usize,
}

impl Default for StencilConfig {
    fn default() -> Self {
        Self { h0: 1e-2, halvings: 2 }
    }
}

/// First and second derivatives of `f` with respect to `u = ln β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivatives {
    pub first: f64,
    pub second: f64,
    /// Difference between the last two Richardson levels, per derivative.
    pub first_error: f64,
    pub second_error: f64,
}

impl LogDerivatives {
    /// `β ∂_β f`
    pub fn beta_first(&self) -> f64 {
        self.first
    }

    /// `β² ∂²_β f = f_uu - f_u`
    pub fn beta_second(&self) -> f64 {
        self.second - self.first
    }
}

/// Differentiate `f(β)` at `beta` in the logarithmic variable.
///
/// The value at `beta` itself is expected to be valid; failures at the
/// offset points are reported as [`Error::NumericDifferentiation`].
pub fn log_beta_derivatives<F>(f: F, beta: f64, cfg: StencilConfig) -> Result<LogDerivatives>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(cfg.h0 > 0.0 && cfg.h0.is_finite()) {
        return Err(Error::Configuration(format!("stencil step must be > 0, got {}", cfg.h0)));
    }
    let u0 = beta.ln();
    let centre = f(beta)?;
    let eval = |u: f64| -> Result<f64> {
        let v = f(u.exp()).map_err(|e| {
            Error::NumericDifferentiation(format!("stencil point beta = {}: {e}", u.exp()))
        })?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NumericDifferentiation(format!(
                "non-finite value at stencil point beta = {}",
                u.exp()
            )))
        }
    };

    let levels = cfg.halvings + 1;
    let mut d1 = Vec::with_capacity(levels);
    let mut d2 = Vec::with_capacity(levels);
    let mut h = cfg.h0;
    for _ in 0..levels {
        let fm2 = eval(u0 - 2.0 * h)?;
        let fm1 = eval(u0 - h)?;
        let fp1 = eval(u0 + h)?;
        let fp2 = eval(u0 + 2.0 * h)?;
        d1.push((fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h));
        d2.push((-fm2 + 16.0 * fm1 - 30.0 * centre + 16.0 * fp1 - fp2) / (12.0 * h * h));
        h *= 0.5;
    }
    let (first, first_error) = richardson(d1);
    let (second, second_error) = richardson(d2);
    if !(first.is_finite() && second.is_finite()) {
        return Err(Error::NumericDifferentiation(format!(
            "non-finite extrapolated derivative at beta = {beta}"
        )));
    }
    Ok(LogDerivatives {
        first,
        second,
        first_error,
        second_error,
    })
}

/// Richardson tableau for an O(h⁴) leading error, halving the step each row.
fn richardson(mut row: Vec<f64>) -> (f64, f64) {
    let mut order = 4;
    let mut err = f64::INFINITY;
    while row.len() > 1 {
        let factor = f64::from(1u32 << order);
        let next: Vec<f64> = row
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        err = (next[next.len() - 1] - row[row.len() - 1]).abs();
        row = next;
        order += 2;
    }
    (row[0], err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_linear_function_is_exact() {
        // f = m ln β + c  =>  f_u = m, f_uu = 0
        let d = log_beta_derivatives(|b| Ok(-0.5 * b.ln() + 3.0), 2.0, StencilConfig::default())
            .unwrap();
        assert!((d.first + 0.5).abs() < 1e-12);
        assert!(d.second.abs() < 1e-9);
        assert!((d.beta_second() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn smooth_function_to_high_order() {
        // f(β) = sin β: β f' = β cos β, β² f'' = -β² sin β
        for &b in &[0.2, 1.0, 3.7] {
            let d = log_beta_derivatives(|x| Ok(x.sin()), b, StencilConfig::default()).unwrap();
            assert!((d.beta_first() - b * b.cos()).abs() < 1e-11, "b={b}");
            assert!((d.beta_second() + b * b * b.sin()).abs() < 1e-9, "b={b}");
        }
    }

    #[test]
    fn richardson_improves_on_raw_stencil() {
        let cfg = StencilConfig { h0: 0.1, halvings: 0 };
        let raw = log_beta_derivatives(|x| Ok(x.exp()), 1.0, cfg).unwrap();
        let ext = log_beta_derivatives(
            |x| Ok(x.exp()),
            1.0,
            StencilConfig { h0: 0.1, halvings: 2 },
        )
        .unwrap();
        let exact = std::f64::consts::E;
        assert!((ext.first - exact).abs() < (raw.first - exact).abs() / 100.0);
    }

    #[test]
    fn failing_offset_point_is_reported() {
        let f = |b: f64| {
            if b < 1.0 {
                Err(Error::Domain("below".into()))
            } else {
                Ok(b)
            }
        };
        let err = log_beta_derivatives(f, 1.0, StencilConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NumericDifferentiation(_)));
        let nan = log_beta_derivatives(|b| Ok(if b > 1.0 { f64::NAN } else { b }), 1.0, StencilConfig::default());
        assert!(matches!(nan, Err(Error::NumericDifferentiation(_))));
    }
}
