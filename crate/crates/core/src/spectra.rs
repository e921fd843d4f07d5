//! Energy spectra and their composition.
//!
//! A model is a dimensionless ladder `ε_n` with degeneracies `g_n` plus an
//! energy scale multiplying β. Built-in ladders are generated lazily and
//! are unbounded above; custom ladders are finite lists.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::BesselOrder;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: u64,
}

impl Level {
    pub fn new(energy: f64, degeneracy: u64) -> Self {
        Self { energy, degeneracy }
    }
}

/// First index of the infinite square-well ladder `n²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoxGround {
    /// `n = 0, 1, 2, ...`, including a zero-energy term.
    #[default]
    Zero,
    /// `n = 1, 2, ...`, the physical well.
    One,
}

impl BoxGround {
    fn first_index(self) -> u64 {
        match self {
            BoxGround::Zero => 0,
            BoxGround::One => 1,
        }
    }
}

/// Analytic partition-function descriptor attached to a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `1 / (2 sinh(βθ/2))`
    Ho,
    /// `1 / (2 sinh(βθ))`
    So,
    /// `sqrt(π / (4βθ))`, the Gaussian integral of the `n²` ladder.
    BoxContinuum,
    /// `1 / (βθ)`
    RotorContinuum,
}

impl ClosedForm {
    /// Exact forms equal the series; continuum forms are high-temperature
    /// approximations used only on request.
    pub fn is_exact(self) -> bool {
        matches!(self, ClosedForm::Ho | ClosedForm::So)
    }

    /// Exponent `m` of `Z ∝ β^m` for the power-law continuum forms.
    pub fn power_law_exponent(self) -> Option<f64> {
        match self {
            ClosedForm::BoxContinuum => Some(-0.5),
            ClosedForm::RotorContinuum => Some(-1.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    Ho,
    So(BesselOrder),
    Box(BoxGround),
    Rotor,
    Custom { name: String, levels: Vec<Level> },
    Product(Vec<EnsembleModel>),
    SymmetrizedPower { base: Box<EnsembleModel>, count: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
}

impl Spectrum {
    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        match self.kind {
            SpectrumKind::Ho => Some(ClosedForm::Ho),
            SpectrumKind::So(_) => Some(ClosedForm::So),
            SpectrumKind::Box(_) => Some(ClosedForm::BoxContinuum),
            SpectrumKind::Rotor => Some(ClosedForm::RotorContinuum),
            _ => None,
        }
    }

    /// Lazy dimensionless ladder. `None` for composite spectra, which are
    /// only enumerated through [`EnsembleModel::levels_below`].
    pub fn ladder(&self) -> Option<Ladder<'_>> {
        let source = match &self.kind {
            SpectrumKind::Ho => LadderSource::Ho,
            SpectrumKind::So(_) => LadderSource::So,
            SpectrumKind::Box(g) => LadderSource::Box(g.first_index()),
            SpectrumKind::Rotor => LadderSource::Rotor,
            SpectrumKind::Custom { levels, .. } => LadderSource::Custom(levels),
            _ => return None,
        };
        Some(Ladder { source, index: 0 })
    }

    pub fn is_unbounded(&self) -> bool {
        match &self.kind {
            SpectrumKind::Custom { .. } => false,
            SpectrumKind::Product(models) => models.iter().any(EnsembleModel::is_unbounded),
            SpectrumKind::SymmetrizedPower { base, .. } => base.is_unbounded(),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum LadderSource<'a> {
    Ho,
    So,
    Box(u64),
    Rotor,
    Custom(&'a [Level]),
}

/// Independently instantiable iterator over `(ε_n, g_n)`.
#[derive(Debug, Clone)]
pub struct Ladder<'a> {
    source: LadderSource<'a>,
    index: u64,
}

impl Ladder<'_> {
    /// Whether the ladder is finite.
    pub fn is_finite(&self) -> bool {
        matches!(self.source, LadderSource::Custom(_))
    }
}

impl Iterator for Ladder<'_> {
    type Item = Level;

    fn next(&mut self) -> Option<Level> {
        let n = self.index;
        let nf = n as f64;
        let level = match self.source {
            LadderSource::Ho => Level::new(nf + 0.5, 1),
            LadderSource::So => Level::new(2.0 * nf + 1.0, 1),
            LadderSource::Box(first) => {
                let m = (n + first) as f64;
                Level::new(m * m, 1)
            }
            LadderSource::Rotor => Level::new(nf * (nf + 1.0), 2 * n + 1),
            LadderSource::Custom(levels) => *levels.get(n as usize)?,
        };
        self.index += 1;
        Some(level)
    }
}

/// A spectrum together with the dimensionless energy scale multiplying β.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    spectrum: Spectrum,
    energy_scale: f64,
}

fn check_scale(scale: f64, what: &str) -> Result<f64> {
    if scale.is_finite() && scale > 0.0 {
        Ok(scale)
    } else {
        Err(Error::Domain(format!("{what} must be positive and finite, got {scale}")))
    }
}

pub fn make_ho() -> EnsembleModel {
    EnsembleModel::elementary(SpectrumKind::Ho, 1.0)
}

pub fn make_so(alpha: f64) -> Result<EnsembleModel> {
    let order = BesselOrder::new(alpha)?;
    Ok(EnsembleModel::elementary(SpectrumKind::So(order), 1.0))
}

pub fn make_box(theta: f64) -> Result<EnsembleModel> {
    make_box_with_ground(theta, BoxGround::Zero)
}

pub fn make_box_with_ground(theta: f64, ground: BoxGround) -> Result<EnsembleModel> {
    let theta = check_scale(theta, "box theta")?;
    Ok(EnsembleModel::elementary(SpectrumKind::Box(ground), theta))
}

pub fn make_rotor(theta: f64) -> Result<EnsembleModel> {
    let theta = check_scale(theta, "rotor theta")?;
    Ok(EnsembleModel::elementary(SpectrumKind::Rotor, theta))
}

/// Custom finite ladder; energies must be nondecreasing, degeneracies ≥ 1.
pub fn make_custom(name: &str, energy_scale: f64, levels: Vec<Level>) -> Result<EnsembleModel> {
    let energy_scale = check_scale(energy_scale, "energy_scale")?;
    if levels.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "custom spectrum needs at least 2 levels, got {}",
            levels.len()
        )));
    }
    for (i, l) in levels.iter().enumerate() {
        if !l.energy.is_finite() {
            return Err(Error::InvalidArgument(format!("level {i} has non-finite energy")));
        }
        if l.degeneracy == 0 {
            return Err(Error::InvalidArgument(format!("level {i} has zero degeneracy")));
        }
    }
    if levels.windows(2).any(|w| w[1].energy < w[0].energy) {
        return Err(Error::InvalidArgument(
            "custom spectrum energies must be nondecreasing".into(),
        ));
    }
    Ok(EnsembleModel::elementary(
        SpectrumKind::Custom {
            name: name.to_string(),
            levels,
        },
        energy_scale,
    ))
}

/// Tensor product of distinguishable, non-interacting subsystems.
pub fn product(models: Vec<EnsembleModel>) -> Result<EnsembleModel> {
    match models.len() {
        0 => Err(Error::InvalidArgument("product of an empty model list".into())),
        1 => Ok(models.into_iter().next().expect("length checked")),
        _ => Ok(EnsembleModel::elementary(SpectrumKind::Product(models), 1.0)),
    }
}

/// `N` identical subsystems with the `1/N!` microstate correction.
pub fn symmetrized_power(model: EnsembleModel, count: u32) -> Result<EnsembleModel> {
    match count {
        0 => Err(Error::InvalidArgument("symmetrized power needs N >= 1".into())),
        1 => Ok(model),
        _ => Ok(EnsembleModel::elementary(
            SpectrumKind::SymmetrizedPower {
                base: Box::new(model),
                count,
            },
            1.0,
        )),
    }
}

impl EnsembleModel {
    fn elementary(kind: SpectrumKind, energy_scale: f64) -> Self {
        Self {
            spectrum: Spectrum { kind },
            energy_scale,
        }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.spectrum.kind
    }

    pub fn energy_scale(&self) -> f64 {
        self.energy_scale
    }

    /// Same ladder with the energy scale multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        self.energy_scale = check_scale(self.energy_scale * factor, "energy_scale")?;
        Ok(self)
    }

    pub fn is_unbounded(&self) -> bool {
        self.spectrum.is_unbounded()
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.spectrum.closed_form()
    }

    /// Lowest absolute energy `θ ε_0`.
    pub fn ground_energy(&self) -> f64 {
        match &self.spectrum.kind {
            SpectrumKind::Product(models) => models.iter().map(Self::ground_energy).sum(),
            SpectrumKind::SymmetrizedPower { base, count } => f64::from(*count) * base.ground_energy(),
            _ => {
                let first = self
                    .spectrum
                    .ladder()
                    .and_then(|mut l| l.next())
                    .map_or(0.0, |l| l.energy);
                self.energy_scale * first
            }
        }
    }

    /// Short human-readable descriptor used in CSV metadata.
    pub fn describe(&self) -> String {
        let scale = self.energy_scale;
        match &self.spectrum.kind {
            SpectrumKind::Ho => format!("ho(scale={scale})"),
            SpectrumKind::So(a) => format!("so(alpha={},scale={scale})", a.value()),
            SpectrumKind::Box(g) => format!("box(theta={scale},ground={})", g.first_index()),
            SpectrumKind::Rotor => format!("rotor(theta={scale})"),
            SpectrumKind::Custom { name, levels } => {
                format!("custom(name={name},levels={},scale={scale})", levels.len())
            }
            SpectrumKind::Product(models) => {
                let parts: Vec<_> = models.iter().map(Self::describe).collect();
                format!("product[{}]", parts.join(";"))
            }
            SpectrumKind::SymmetrizedPower { base, count } => {
                format!("sympow(N={count},{})", base.describe())
            }
        }
    }

    /// All levels with absolute energy `θ ε <= cutoff`, sorted, equal
    /// energies merged. Products are expanded as Minkowski sums.
    pub fn levels_below(&self, cutoff: f64) -> Result<Vec<Level>> {
        match &self.spectrum.kind {
            SpectrumKind::Product(models) => {
                let grounds: Vec<f64> = models.iter().map(Self::ground_energy).collect();
                let total_ground: f64 = grounds.iter().sum();
                let mut factors = Vec::with_capacity(models.len());
                for (m, g) in models.iter().zip(&grounds) {
                    // Each factor may use the headroom left by the others' ground states.
                    factors.push(m.levels_below(cutoff - (total_ground - g))?);
                }
                let mut merged = minkowski_sum(&factors);
                merged.retain(|l| l.energy <= cutoff);
                Ok(merged)
            }
            SpectrumKind::SymmetrizedPower { .. } => Err(Error::InvalidArgument(
                "symmetrized powers carry a 1/N! weight and have no integer level list".into(),
            )),
            _ => {
                let scale = self.energy_scale;
                let ladder = self.spectrum.ladder().expect("elementary ladder");
                Ok(ladder
                    .map(|l| Level::new(scale * l.energy, l.degeneracy))
                    .take_while(|l| l.energy <= cutoff)
                    .collect())
            }
        }
    }

    /// Absolute energies of the first `count` eigenstates (degeneracies expanded).
    pub fn state_energies(&self, count: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(count);
        match &self.spectrum.kind {
            SpectrumKind::Product(_) => {
                let mut cutoff = self.ground_energy() + 1.0;
                loop {
                    let levels = self.levels_below(cutoff)?;
                    let total: u64 = levels.iter().map(|l| l.degeneracy).sum();
                    if total as usize >= count || cutoff > 1e12 {
                        expand_states(&levels, count, &mut out);
                        return Ok(out);
                    }
                    cutoff = self.ground_energy() + 2.0 * (cutoff - self.ground_energy());
                }
            }
            SpectrumKind::SymmetrizedPower { .. } => Err(Error::InvalidArgument(
                "symmetrized powers have no eigenstate enumeration".into(),
            )),
            _ => {
                let scale = self.energy_scale;
                for l in self.spectrum.ladder().expect("elementary ladder") {
                    for _ in 0..l.degeneracy {
                        if out.len() == count {
                            return Ok(out);
                        }
                        out.push(scale * l.energy);
                    }
                }
                Ok(out)
            }
        }
    }
}

fn expand_states(levels: &[Level], count: usize, out: &mut Vec<f64>) {
    for l in levels {
        for _ in 0..l.degeneracy {
            if out.len() == count {
                return;
            }
            out.push(l.energy);
        }
    }
}

/// Minkowski sum of truncated ladders with degeneracy convolution; the total
/// degeneracy equals the product of the constituent totals.
pub fn minkowski_sum(factors: &[Vec<Level>]) -> Vec<Level> {
    let mut acc = vec![Level::new(0.0, 1)];
    for factor in factors {
        let mut next = Vec::with_capacity(acc.len() * factor.len());
        for a in &acc {
            for b in factor {
                next.push(Level::new(a.energy + b.energy, a.degeneracy * b.degeneracy));
            }
        }
        next.sort_by(|x, y| x.energy.total_cmp(&y.energy));
        next.dedup_by(|later, earlier| {
            if later.energy == earlier.energy {
                earlier.degeneracy += later.degeneracy;
                true
            } else {
                false
            }
        });
        acc = next;
    }
    acc
}

/// On-disk custom spectrum:
/// `{"name": str, "energy_scale": number, "levels": [[energy, degeneracy], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomSpectrumFile {
    pub name: String,
    pub energy_scale: f64,
    pub levels: Vec<(f64, f64)>,
}

impl CustomSpectrumFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn into_model(self) -> Result<EnsembleModel> {
        let mut levels = Vec::with_capacity(self.levels.len());
        for (i, (e, g)) in self.levels.into_iter().enumerate() {
            if !(g.fract() == 0.0 && g >= 1.0 && g < 9.0e15) {
                return Err(Error::InvalidArgument(format!(
                    "level {i}: degeneracy must be a positive integer, got {g}"
                )));
            }
            levels.push(Level::new(e, g as u64));
        }
        make_custom(&self.name, self.energy_scale, levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first(model: &EnsembleModel, n: usize) -> Vec<Level> {
        model.spectrum().ladder().unwrap().take(n).collect()
    }

    #[test]
    fn ho_ladder() {
        let ho = make_ho();
        let l = first(&ho, 11);
        assert_eq!(l[0].energy, 0.5);
        assert_eq!(l[1].energy, 1.5);
        assert_eq!(l[10].energy, 10.5);
        assert!(l.iter().all(|l| l.degeneracy == 1));
        assert_eq!(ho.closed_form(), Some(ClosedForm::Ho));
    }

    #[test]
    fn so_ladder_is_alpha_independent() {
        let a = make_so(0.5).unwrap();
        let b = make_so(-0.5).unwrap();
        assert_eq!(first(&a, 2), vec![Level::new(1.0, 1), Level::new(3.0, 1)]);
        assert_eq!(first(&a, 20), first(&b, 20));
        assert_eq!(first(&make_so(1.5).unwrap(), 6)[5].energy, 11.0);
        assert!(matches!(make_so(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn box_and_rotor_ladders() {
        let b = make_box(1.0).unwrap();
        let e: Vec<f64> = first(&b, 3).iter().map(|l| l.energy).collect();
        assert_eq!(e, vec![0.0, 1.0, 4.0]);
        let b1 = make_box_with_ground(1.0, BoxGround::One).unwrap();
        assert_eq!(first(&b1, 2)[0].energy, 1.0);

        let r = make_rotor(1.0).unwrap();
        assert_eq!(
            first(&r, 3),
            vec![Level::new(0.0, 1), Level::new(2.0, 3), Level::new(6.0, 5)]
        );
        assert!(matches!(make_box(0.0), Err(Error::Domain(_))));
        assert!(matches!(make_rotor(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ladders_strictly_increase() {
        for m in [
            make_ho(),
            make_so(2.5).unwrap(),
            make_box(0.3).unwrap(),
            make_rotor(2.0).unwrap(),
        ] {
            let l = first(&m, 500);
            assert!(l.windows(2).all(|w| w[1].energy > w[0].energy));
        }
    }

    #[test]
    fn ladders_are_independent_iterators() {
        let r = make_rotor(1.0).unwrap();
        let mut a = r.spectrum().ladder().unwrap();
        a.next();
        a.next();
        let mut b = r.spectrum().ladder().unwrap();
        assert_eq!(b.next().unwrap().energy, 0.0);
        assert_eq!(a.next().unwrap().energy, 6.0);
    }

    #[test]
    fn product_and_power_edge_cases() {
        assert!(matches!(product(vec![]), Err(Error::InvalidArgument(_))));
        let ho = make_ho();
        assert_eq!(product(vec![ho.clone()]).unwrap(), ho);
        assert_eq!(symmetrized_power(ho.clone(), 1).unwrap(), ho);
        assert!(matches!(symmetrized_power(ho, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn minkowski_sum_conserves_degeneracy() {
        let r = make_rotor(1.0).unwrap().levels_below(30.0).unwrap();
        let h = make_ho().scaled(0.7).unwrap().levels_below(9.0).unwrap();
        let b = make_box(0.5).unwrap().levels_below(12.0).unwrap();
        let total = |ls: &[Level]| ls.iter().map(|l| l.degeneracy).sum::<u64>();
        let merged = minkowski_sum(&[r.clone(), h.clone(), b.clone()]);
        assert_eq!(total(&merged), total(&r) * total(&h) * total(&b));
        assert!(merged.windows(2).all(|w| w[1].energy > w[0].energy));
    }

    #[test]
    fn product_levels_below_cutoff() {
        let p = product(vec![make_rotor(1.0).unwrap(), make_rotor(1.0).unwrap()]).unwrap();
        let levels = p.levels_below(6.0).unwrap();
        // (0,0):1; (0,2),(2,0): 2*3; (2,2): 9; (0,6),(6,0): 2*5
        assert_eq!(
            levels,
            vec![Level::new(0.0, 1), Level::new(2.0, 6), Level::new(4.0, 9), Level::new(6.0, 10)]
        );
        assert_eq!(p.ground_energy(), 0.0);
        let states = p.state_energies(8).unwrap();
        assert_eq!(states, vec![0.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 4.0]);
    }

    #[test]
    fn ground_energies() {
        assert_eq!(make_ho().ground_energy(), 0.5);
        assert_eq!(make_so(0.5).unwrap().scaled(2.0).unwrap().ground_energy(), 2.0);
        let ho3 = product(vec![
            make_ho().scaled(0.1).unwrap(),
            make_ho(),
            make_ho().scaled(10.0).unwrap(),
        ])
        .unwrap();
        assert!((ho3.ground_energy() - 5.55).abs() < 1e-14);
        let p = symmetrized_power(make_ho(), 3).unwrap();
        assert_eq!(p.ground_energy(), 1.5);
    }

    #[test]
    fn custom_json_round_trip_and_validation() {
        let text = r#"{"name": "two-level", "energy_scale": 1.0, "levels": [[0, 1], [1.5, 2]]}"#;
        let model = CustomSpectrumFile::from_json(text).unwrap().into_model().unwrap();
        assert!(!model.is_unbounded());
        assert_eq!(model.state_energies(5).unwrap(), vec![0.0, 1.5, 1.5]);

        let one = r#"{"name": "x", "energy_scale": 1.0, "levels": [[0, 1]]}"#;
        assert!(CustomSpectrumFile::from_json(one).unwrap().into_model().is_err());
        let frac = r#"{"name": "x", "energy_scale": 1.0, "levels": [[0, 1], [1, 1.5]]}"#;
        assert!(CustomSpectrumFile::from_json(frac).unwrap().into_model().is_err());
        let zero = r#"{"name": "x", "energy_scale": 1.0, "levels": [[0, 1], [1, 0]]}"#;
        assert!(CustomSpectrumFile::from_json(zero).unwrap().into_model().is_err());
        let dec = r#"{"name": "x", "energy_scale": 1.0, "levels": [[1, 1], [0, 1]]}"#;
        assert!(CustomSpectrumFile::from_json(dec).unwrap().into_model().is_err());
        let scale = r#"{"name": "x", "energy_scale": 0.0, "levels": [[0, 1], [1, 1]]}"#;
        assert!(CustomSpectrumFile::from_json(scale).unwrap().into_model().is_err());
        assert!(matches!(CustomSpectrumFile::from_json("{"), Err(Error::Parse(_))));
    }
}
