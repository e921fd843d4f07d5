//! Purity, fidelity and overlap projections between canonical ensembles,
//! together with the storage-of-information capacities built from `ln P`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::deriv::log_beta_derivatives;
use crate::error::{Error, Result};
use crate::spectra::{ClosedForm, EnsembleModel, SpectrumKind};
use crate::thermo::{
    check_beta, has_analytic, over_sinh, reduced_partition, Beta, DerivativeMethod, EvalOptions,
};

/// Slack allowed on row and column sums of `|α|²`.
pub const COMPLETENESS_SLACK: f64 = 1e-9;

/// `P(β) = Z(2β) / Z(β)²`.
pub fn purity(model: &EnsembleModel, beta: Beta, opts: &EvalOptions) -> Result<f64> {
    self_fidelity(model, beta, beta, opts)
}

/// `F(β, β') = Z(β+β') / (Z(β) Z(β'))`.
///
/// The ground-energy shifts cancel exactly, so only reduced sums enter.
pub fn self_fidelity(model: &EnsembleModel, beta1: Beta, beta2: Beta, opts: &EvalOptions) -> Result<f64> {
    opts.validate()?;
    let (b1, b2) = (beta1.value(), beta2.value());
    // Arguments are ordered so the result is bitwise symmetric.
    let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
    let z_lo = reduced_partition(model, lo, opts)?;
    let z_hi = if hi == lo { z_lo } else { reduced_partition(model, hi, opts)? };
    let z_sum = reduced_partition(model, lo + hi, opts)?;
    let shift_gap = (lo + hi) * z_sum.shift - lo * z_lo.shift - hi * z_hi.shift;
    Ok(z_sum.scaled / (z_lo.scaled * z_hi.scaled) * (-shift_gap).exp())
}

/// Squared moduli `|⟨n_a|ℓ_b⟩|²` truncated to `rows × cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    row_defects: Vec<f64>,
    col_defects: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OverlapFile {
    rows: usize,
    cols: usize,
    abs_sq: Vec<Vec<f64>>,
}

impl OverlapMatrix {
    pub fn new(abs_sq: Vec<Vec<f64>>) -> Result<Self> {
        let rows = abs_sq.len();
        let cols = abs_sq.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("overlap matrix must be nonempty".into()));
        }
        if let Some(bad) = abs_sq.iter().position(|r| r.len() != cols) {
            return Err(Error::InvalidArgument(format!(
                "overlap row {bad} has {} entries, expected {cols}",
                abs_sq[bad].len()
            )));
        }
        let entries: Vec<f64> = abs_sq.into_iter().flatten().collect();
        if let Some(i) = entries.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "overlap entry ({}, {}) = {} outside [0, 1]",
                i / cols,
                i % cols,
                entries[i]
            )));
        }
        let row_sums: Vec<f64> = (0..rows).map(|n| entries[n * cols..(n + 1) * cols].iter().sum()).collect();
        let col_sums: Vec<f64> = (0..cols).map(|l| (0..rows).map(|n| entries[n * cols + l]).sum()).collect();
        for (kind, sums) in [("row", &row_sums), ("column", &col_sums)] {
            if let Some(i) = sums.iter().position(|s| *s > 1.0 + COMPLETENESS_SLACK) {
                return Err(Error::InvalidArgument(format!(
                    "overlap {kind} {i} sums to {} > 1",
                    sums[i]
                )));
            }
        }
        let defect = |s: &f64| (1.0 - s).max(0.0);
        Ok(Self {
            rows,
            cols,
            entries,
            row_defects: row_sums.iter().map(defect).collect(),
            col_defects: col_sums.iter().map(defect).collect(),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; cols]; rows])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: OverlapFile = serde_json::from_str(text)?;
        if file.abs_sq.len() != file.rows || file.abs_sq.iter().any(|r| r.len() != file.cols) {
            return Err(Error::Parse(format!(
                "abs_sq does not match declared shape {}x{}",
                file.rows, file.cols
            )));
        }
        Self::new(file.abs_sq)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let abs_sq = (0..self.rows)
            .map(|n| self.entries[n * self.cols..(n + 1) * self.cols].to_vec())
            .collect();
        serde_json::to_string(&OverlapFile {
            rows: self.rows,
            cols: self.cols,
            abs_sq,
        })
        .expect("plain numeric data serializes")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, n: usize, l: usize) -> f64 {
        self.entries[n * self.cols + l]
    }

    /// `max(0, 1 - Σ_ℓ |α_{nℓ}|²)` per row.
    pub fn row_defects(&self) -> &[f64] {
        &self.row_defects
    }

    pub fn col_defects(&self) -> &[f64] {
        &self.col_defects
    }
}

/// Truncated projection with its one-sided remainder: the exact value lies
/// in `[value, value + bracket]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub value: f64,
    pub bracket: f64,
}

/// Normalized Boltzmann weights `p_n = e^{-βE_n}/Z` of the first `count`
/// states, the weight of state `count` (zero if absent), and `Z`-normalized
/// mass beyond the first `count` states.
fn state_weights(model: &EnsembleModel, beta: f64, count: usize, opts: &EvalOptions) -> Result<(Vec<f64>, f64, f64)> {
    let r = reduced_partition(model, beta, opts)?;
    let energies = model.state_energies(count + 1)?;
    if energies.len() < count {
        return Err(Error::InvalidArgument(format!(
            "overlap matrix has {count} states on a side whose spectrum has only {}",
            energies.len()
        )));
    }
    let p = |e: f64| (-beta * (e - r.shift)).exp() / r.scaled;
    let weights: Vec<f64> = energies[..count].iter().map(|&e| p(e)).collect();
    let sup = energies.get(count).map_or(0.0, |&e| p(e));
    let rest = (1.0 - weights.iter().sum::<f64>()).max(0.0);
    Ok((weights, sup, rest))
}

/// `F^{ab} = Σ_{nℓ} a_n b_ℓ |α_{nℓ}|² / (Z^a Z^b)` over the truncated block,
/// with a remainder bracket assembled from the defects.
///
/// Fails with [`Error::PrecisionFailure`] when the bracket exceeds `tol`.
pub fn cross_projection(
    model_a: &EnsembleModel,
    model_b: &EnsembleModel,
    overlaps: &OverlapMatrix,
    beta1: Beta,
    beta2: Beta,
    tol: f64,
    opts: &EvalOptions,
) -> Result<Projection> {
    opts.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    let (pa, a_sup, a_rest) = state_weights(model_a, beta1.value(), overlaps.rows(), opts)?;
    let (pb, b_sup, b_rest) = state_weights(model_b, beta2.value(), overlaps.cols(), opts)?;

    let mut value = 0.0;
    for (n, an) in pa.iter().enumerate() {
        let row: f64 = pb.iter().enumerate().map(|(l, bl)| bl * overlaps.get(n, l)).sum();
        value += an * row;
    }
    // Pairs (n < Na, ℓ >= Nb): Σ_ℓ≥Nb |α|² <= rowdef_n and b_ℓ <= b_sup.
    let r1: f64 = b_sup * pa.iter().zip(overlaps.row_defects()).map(|(a, d)| a * d).sum::<f64>();
    let r2: f64 = a_sup * pb.iter().zip(overlaps.col_defects()).map(|(b, d)| b * d).sum::<f64>();
    // Pairs with both indices truncated: each factor's overlaps sum to at most one.
    let r3 = (b_sup * a_rest).min(a_sup * b_rest);
    let bracket = r1 + r2 + r3;
    if bracket > tol {
        return Err(Error::PrecisionFailure { value, bracket, tol });
    }
    Ok(Projection { value, bracket })
}

/// `ε^P = β ∂_β ln P` and `C^P = -β² ∂²_β ln P` of a single closed form.
fn closed_info(cf: ClosedForm, u: f64) -> (f64, f64) {
    // ln P_HO(v) = ln tanh(v/2); ε^P = v/sinh v, C^P = v² cosh v / sinh² v.
    let ho = |v: f64| {
        let e = over_sinh(v);
        let c = if v < 1e-4 {
            1.0 + v * v / 6.0
        } else {
            let s = (-2.0 * v).exp_m1();
            2.0 * v * v * (-v).exp() * (1.0 + (-2.0 * v).exp()) / (s * s)
        };
        (e, c)
    };
    match cf {
        ClosedForm::Ho => ho(u),
        ClosedForm::So => ho(2.0 * u),
        ClosedForm::BoxContinuum | ClosedForm::RotorContinuum => {
            let m = cf.power_law_exponent().expect("power law");
            (-m, -m)
        }
    }
}

fn analytic_info(model: &EnsembleModel, beta: f64) -> (f64, f64) {
    match model.kind() {
        SpectrumKind::Product(models) => models
            .iter()
            .map(|m| analytic_info(m, beta))
            .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1)),
        SpectrumKind::SymmetrizedPower { base, count } => {
            let (e, c) = analytic_info(base, beta);
            (f64::from(*count) * e, f64::from(*count) * c)
        }
        _ => closed_info(
            model.closed_form().expect("checked by has_analytic"),
            beta * model.energy_scale(),
        ),
    }
}

/// `ln P = ln Z(2β) - 2 ln Z(β)` gives `ε^P = 2ε(β) - ε(2β)`, `C^P = 2C(β) - C(2β)`.
fn series_info(model: &EnsembleModel, beta: f64, opts: &EvalOptions) -> Result<(f64, f64)> {
    let series = opts.with_method(DerivativeMethod::Series);
    let at = |b: f64| -> Result<(f64, f64)> {
        let b = Beta::new(b)?;
        Ok((
            crate::thermo::internal_energy(model, b, &series)?,
            crate::thermo::heat_capacity(model, b, &series)?,
        ))
    };
    let (e1, c1) = at(beta)?;
    let (e2, c2) = at(2.0 * beta)?;
    Ok((2.0 * e1 - e2, 2.0 * c1 - c2))
}

fn stencil_info(model: &EnsembleModel, beta: f64, opts: &EvalOptions) -> Result<(f64, f64)> {
    let fine = opts.for_stencil();
    let d = log_beta_derivatives(
        |b| purity(model, Beta::new(b)?, &fine).map(f64::ln),
        beta,
        opts.stencil,
    )?;
    Ok((d.beta_first(), -d.beta_second()))
}

fn info_pair(model: &EnsembleModel, beta: Beta, opts: &EvalOptions) -> Result<(f64, f64)> {
    opts.validate()?;
    let b = beta.value();
    check_beta(model, b)?;
    match opts.method {
        DerivativeMethod::Auto | DerivativeMethod::Analytic if has_analytic(model, opts) => {
            Ok(analytic_info(model, b))
        }
        DerivativeMethod::Analytic => Err(Error::InvalidArgument(format!(
            "no closed form for {} under these options",
            model.describe()
        ))),
        DerivativeMethod::Auto | DerivativeMethod::Series => series_info(model, b, opts),
        DerivativeMethod::Stencil => stencil_info(model, b, opts),
    }
}

/// `ε^P(β) = β ∂_β ln P(β)`.
pub fn info_energy(model: &EnsembleModel, beta: Beta, opts: &EvalOptions) -> Result<f64> {
    info_pair(model, beta, opts).map(|(e, _)| e)
}

/// `C^P(β) = -β² ∂²_β ln P(β)`.
pub fn info_capacity(model: &EnsembleModel, beta: Beta, opts: &EvalOptions) -> Result<f64> {
    info_pair(model, beta, opts).map(|(_, c)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{make_custom, make_ho, make_rotor, make_so, product, Level};

    fn b(v: f64) -> Beta {
        Beta::new(v).unwrap()
    }

    fn opts() -> EvalOptions {
        EvalOptions::default()
    }

    #[test]
    fn ho_purity_and_fidelity_closed_forms() {
        let ho = make_ho();
        assert!((purity(&ho, b(1.0), &opts()).unwrap() - 0.5f64.tanh()).abs() < 1e-12);
        let f = self_fidelity(&ho, b(1.0), b(2.0), &opts()).unwrap();
        let coth = |x: f64| 1.0 / x.tanh();
        assert!((f - 2.0 / (coth(0.5) + coth(1.0))).abs() < 1e-12);
        assert!((f - 0.5752104).abs() < 1e-7);
        assert_eq!(f, self_fidelity(&ho, b(2.0), b(1.0), &opts()).unwrap());
    }

    #[test]
    fn purity_is_diagonal_fidelity() {
        let so = make_so(1.5).unwrap();
        for &x in &[0.3, 1.0, 4.0] {
            assert_eq!(
                purity(&so, b(x), &opts()).unwrap(),
                self_fidelity(&so, b(x), b(x), &opts()).unwrap()
            );
        }
    }

    #[test]
    fn ground_state_limit_is_pure() {
        let m = make_custom("two", 1.0, vec![Level::new(0.0, 1), Level::new(1.0, 1)]).unwrap();
        assert!((purity(&m, b(60.0), &opts()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_validation() {
        assert!(OverlapMatrix::new(vec![vec![1.2]]).is_err());
        assert!(OverlapMatrix::new(vec![vec![0.6, 0.6]]).is_err());
        assert!(OverlapMatrix::new(vec![vec![0.5], vec![0.6]]).is_err());
        assert!(OverlapMatrix::new(vec![vec![0.5, 0.1], vec![0.2]]).is_err());
        let m = OverlapMatrix::new(vec![vec![0.5, 0.25], vec![0.25, 0.5]]).unwrap();
        assert_eq!(m.row_defects(), &[0.25, 0.25]);
        assert_eq!(m.col_defects(), &[0.25, 0.25]);
        let back = OverlapMatrix::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(matches!(
            OverlapMatrix::from_json(r#"{"rows":2,"cols":1,"abs_sq":[[0.1]]}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn two_by_two_toy_by_brute_force() {
        let a = make_custom("a", 1.0, vec![Level::new(0.0, 1), Level::new(1.0, 1)]).unwrap();
        let bm = make_custom("b", 1.0, vec![Level::new(0.0, 1), Level::new(2.0, 1)]).unwrap();
        let ov = OverlapMatrix::new(vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let p = cross_projection(&a, &bm, &ov, b(1.0), b(1.0), 1e-12, &opts()).unwrap();
        let wa = [1.0, (-1.0f64).exp()];
        let wb = [1.0, (-2.0f64).exp()];
        let m = [[0.8, 0.2], [0.2, 0.8]];
        let mut expect = 0.0;
        for n in 0..2 {
            for l in 0..2 {
                expect += wa[n] * wb[l] * m[n][l];
            }
        }
        expect /= (wa[0] + wa[1]) * (wb[0] + wb[1]);
        assert!((p.value - expect).abs() < 1e-15);
        assert_eq!(p.bracket, 0.0);
    }

    #[test]
    fn identity_and_zero_overlaps() {
        let ho = make_ho();
        let id = OverlapMatrix::identity(60).unwrap();
        let p = cross_projection(&ho, &ho, &id, b(1.0), b(2.0), 1e-12, &opts()).unwrap();
        let f = self_fidelity(&ho, b(1.0), b(2.0), &opts()).unwrap();
        assert!((p.value - f).abs() < 1e-12);
        // Containment holds up to the partition-series tolerance.
        assert!(p.value <= f + 1e-12 && f <= p.value + p.bracket + 1e-12);

        let zero = OverlapMatrix::zeros(60, 60).unwrap();
        let p = cross_projection(&ho, &ho, &zero, b(1.0), b(2.0), 1e-12, &opts()).unwrap();
        assert_eq!(p.value, 0.0);
        assert!(p.bracket < 1e-20);
    }

    #[test]
    fn coarse_truncation_is_a_precision_failure() {
        let ho = make_ho();
        let id = OverlapMatrix::identity(3).unwrap();
        match cross_projection(&ho, &ho, &id, b(0.5), b(0.5), 1e-6, &opts()) {
            Err(Error::PrecisionFailure { value, bracket, .. }) => {
                let f = self_fidelity(&ho, b(0.5), b(0.5), &opts()).unwrap();
                assert!(value < f && f <= value + bracket);
            }
            other => panic!("expected precision failure, got {other:?}"),
        }
    }

    #[test]
    fn capacities_agree_across_methods() {
        let ho = make_ho();
        let so = make_so(0.5).unwrap();
        for m in [&ho, &so] {
            for &x in &[0.3, 1.0, 3.0] {
                let a = info_pair(m, b(x), &opts().with_method(DerivativeMethod::Analytic)).unwrap();
                let s = info_pair(m, b(x), &opts().with_method(DerivativeMethod::Series)).unwrap();
                let d = info_pair(m, b(x), &opts().with_method(DerivativeMethod::Stencil)).unwrap();
                assert!((a.0 - s.0).abs() < 1e-9 && (a.1 - s.1).abs() < 1e-9, "{x}: {a:?} {s:?}");
                assert!((a.0 - d.0).abs() < 1e-7 && (a.1 - d.1).abs() < 1e-7, "{x}: {a:?} {d:?}");
            }
        }
        let v: f64 = 1.0;
        let (e, c) = closed_info(ClosedForm::Ho, v);
        assert!((e - v / v.sinh()).abs() < 1e-15);
        assert!((c - v * v * v.cosh() / v.sinh().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn saturated_purity_has_no_capacity() {
        let ho = make_ho();
        assert!(info_energy(&ho, b(80.0), &opts()).unwrap() < 1e-30);
        assert!(info_capacity(&ho, b(80.0), &opts()).unwrap() < 1e-30);
    }

    #[test]
    fn power_law_collapse_and_products() {
        let rotor = make_rotor(1.0).unwrap().scaled(1.0).unwrap();
        let o = opts().closed_form(true);
        assert_eq!(info_energy(&rotor, b(2.0), &o).unwrap(), 1.0);
        let prod = product(vec![make_ho(), make_so(0.5).unwrap()]).unwrap();
        let p = purity(&prod, b(1.3), &opts()).unwrap();
        let p1 = purity(&make_ho(), b(1.3), &opts()).unwrap();
        let p2 = purity(&make_so(0.5).unwrap(), b(1.3), &opts()).unwrap();
        assert!((p - p1 * p2).abs() < 1e-12);
    }
}
