//! Special-function kernel: Laguerre polynomials, exponentially scaled
//! modified Bessel functions of the first kind and the log-gamma function.
//!
//! Bessel values are only ever produced in the scaled form `e^{-z} I_α(z)`;
//! callers fold the `e^{z}` factor into their own exponents.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Argument above which `bessel_i_scaled` switches from the ascending
/// power series to the large-argument expansion.
pub const BESSEL_Z_SWITCH: f64 = 30.0;

/// Maximum number of ascending-series terms.
pub const BESSEL_SERIES_TERMS: usize = 60;

/// Degree above which Laguerre recurrences run in compensated arithmetic.
const COMPENSATED_DEGREE: u32 = 50;

/// Order `α > -1` of a modified Bessel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= -1.0 {
            return Err(Error::Domain(format!(
                "Bessel order must be finite and > -1, got {alpha}"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `Some(n)` when the order is exactly `n + 1/2` (so `n >= -1`).
    pub fn half_integer_index(self) -> Option<i64> {
        let twice = 2.0 * self.0;
        if twice.fract() == 0.0 && twice.abs() < 1e15 {
            let t = twice as i64;
            if t.rem_euclid(2) == 1 {
                return Some((t - 1) / 2);
            }
        }
        None
    }
}

/// Laguerre polynomial `L_n(x)`.
pub fn laguerre(n: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Laguerre argument must be finite, got {x}"
        )));
    }
    Ok(laguerre_recurrence(n, 0.0, x))
}

/// Associated Laguerre polynomial `L_n^α(x)`; `L_n^0 = L_n`.
pub fn assoc_laguerre(n: u32, alpha: f64, x: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= -1.0 {
        return Err(Error::Domain(format!(
            "associated Laguerre order must be > -1, got {alpha}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Laguerre argument must be finite, got {x}"
        )));
    }
    Ok(laguerre_recurrence(n, alpha, x))
}

/// `(k+1) L_{k+1} = (2k+1+α-x) L_k - (k+α) L_{k-1}`.
pub(crate) fn laguerre_recurrence(n: u32, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let first = 1.0 + alpha - x;
    if n == 1 {
        return first;
    }
    if n > COMPENSATED_DEGREE {
        return laguerre_compensated(n, alpha, x);
    }
    let mut prev = 1.0;
    let mut cur = first;
    for k in 1..n {
        let kf = f64::from(k);
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn laguerre_compensated(n: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = Dd::from(1.0);
    let mut cur = Dd::sum(1.0 + alpha, -x);
    for k in 1..n {
        let kf = f64::from(k);
        let coeff = Dd::sum(2.0 * kf + 1.0 + alpha, -x);
        let next = cur
            .mul_dd(coeff)
            .add(prev.mul(-(kf + alpha)))
            .div(kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur.hi + cur.lo
}

/// Double-double value `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

impl Dd {
    pub(crate) fn sum(a: f64, b: f64) -> Self {
        let (s, e) = two_sum(a, b);
        quick_two_sum(s, e)
    }

    pub(crate) fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        quick_two_sum(s, e + self.lo + other.lo)
    }

    pub(crate) fn mul(self, c: f64) -> Dd {
        let p = self.hi * c;
        let e = self.hi.mul_add(c, -p);
        quick_two_sum(p, e + self.lo * c)
    }

    pub(crate) fn mul_dd(self, other: Dd) -> Dd {
        let p = self.hi * other.hi;
        let e = self.hi.mul_add(other.hi, -p);
        quick_two_sum(p, e + self.hi * other.lo + self.lo * other.hi)
    }

    pub(crate) fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub(crate) fn div(self, c: f64) -> Dd {
        let q1 = self.hi / c;
        let r = self.add(Dd::from(q1).mul(-c));
        quick_two_sum(q1, r.hi / c)
    }
}

/// Exponentially scaled modified Bessel function `e^{-z} I_α(z)` for `z >= 0`.
pub fn bessel_i_scaled(order: BesselOrder, z: f64) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::Domain(format!(
            "scaled Bessel argument must be >= 0, got {z}"
        )));
    }
    Ok(ive_order(order, z))
}

/// Unchecked `e^{-z} I_α(z)`; the caller guarantees `α > -1`, `z >= 0`.
pub(crate) fn ive(alpha: f64, z: f64) -> f64 {
    ive_order(BesselOrder(alpha), z)
}

fn ive_order(order: BesselOrder, z: f64) -> f64 {
    let alpha = order.value();
    if let Some(n) = order.half_integer_index() {
        return ive_half_integer(n, z);
    }
    if z == 0.0 {
        return if alpha == 0.0 {
            1.0
        } else if alpha > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if z.is_infinite() {
        return 0.0;
    }
    if z <= BESSEL_Z_SWITCH {
        ive_series(alpha, z, BESSEL_SERIES_TERMS)
    } else {
        ive_asymptotic(alpha, z)
    }
}

/// Ascending series `(z/2)^α Σ (z²/4)^k / (k! Γ(k+α+1))`, scaled by `e^{-z}`.
pub(crate) fn ive_series(alpha: f64, z: f64, max_terms: usize) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..max_terms {
        let kf = k as f64;
        term *= q / (kf * (kf + alpha));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    let log_pref = alpha * (0.5 * z).ln() - z - log_gamma_unchecked(alpha + 1.0);
    log_pref.exp() * sum
}

/// Large-argument expansion `Σ (-1)^k a_k(α) z^{-k} / sqrt(2πz)`.
pub(crate) fn ive_asymptotic(alpha: f64, z: f64) -> f64 {
    let mu = 4.0 * alpha * alpha;
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * z);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

/// Closed hyperbolic forms for `α = n + 1/2`.
fn ive_half_integer(n: i64, z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    match n {
        -1 => {
            if z == 0.0 {
                return f64::INFINITY;
            }
            (2.0 / (PI * z)).sqrt() * 0.5 * (1.0 + (-2.0 * z).exp())
        }
        0 => {
            if z == 0.0 {
                return 0.0;
            }
            (2.0 / (PI * z)).sqrt() * 0.5 * -(-2.0 * z).exp_m1()
        }
        _ => {
            let nf = n as f64;
            // The alternating finite sum cancels below z ≈ n(n+1).
            if z < (nf * (nf + 1.0)).max(1.0) {
                if z == 0.0 {
                    return 0.0;
                }
                return ive_series(nf + 0.5, z, BESSEL_SERIES_TERMS);
            }
            let inv2z = 0.5 / z;
            let mut c = 1.0;
            let mut pow = 1.0;
            let mut growing = 1.0;
            let mut decaying = 1.0;
            for k in 1..=n {
                let kf = k as f64;
                c *= (nf + kf) * (nf - kf + 1.0) / kf;
                pow *= inv2z;
                let t = c * pow;
                decaying += t;
                growing += if k % 2 == 0 { t } else { -t };
            }
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            (growing + sign * (-2.0 * z).exp() * decaying) / (2.0 * PI * z).sqrt()
        }
    }
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if x.fract() == 0.0 && x <= 30.0 {
        let mut acc = 1.0_f64;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc.ln();
    }
    // Shift into the Stirling range and divide out the rising factorial.
    let mut shift = 1.0_f64;
    let mut y = x;
    let mut log_shift = 0.0;
    while y < 10.0 {
        shift *= y;
        y += 1.0;
        if shift > 1e280 {
            log_shift += shift.ln();
            shift = 1.0;
        }
    }
    log_shift += shift.ln();
    stirling(y) - log_shift
}

fn stirling(x: f64) -> f64 {
    // Bernoulli coefficients B_{2k} / (2k (2k-1)).
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv;
    for c in C {
        series += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}
