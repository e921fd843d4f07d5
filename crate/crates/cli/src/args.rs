use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ensinfo", version, about = "Thermal information quantities of quantum ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate quantities of one model over a β range.
    Eval(EvalArgs),
    /// Anisotropic 3D oscillator storage curves.
    Fig1(Fig1Args),
    /// Oscillator against singular-oscillator fidelity curves.
    Fig2(Fig2Args),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Comma-separated list from Z, P, F_self, F_cross, eps, C, eps_P, C_P.
    #[arg(long = "q", visible_alias = "quantities", value_delimiter = ',', required = true)]
    pub quantities: Vec<Quantity>,

    #[arg(long, default_value = "0.1:10:50log")]
    pub beta: BetaRange,

    /// Second inverse temperature for F_self and F_cross; defaults to each row's β.
    #[arg(long)]
    pub beta_ref: Option<f64>,

    /// JSON overlap matrix for F_cross.
    #[arg(long)]
    pub overlaps_file: Option<PathBuf>,

    #[command(flatten)]
    pub numerics: NumericArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    /// 1: ω ratios 1/10:1:10, 2: 1/10:1:100.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub variant: u8,

    #[arg(long, default_value = "0.001:1000:241log")]
    pub beta: BetaRange,

    #[command(flatten)]
    pub numerics: NumericArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    #[arg(long, default_value = "0.1:5:40log")]
    pub beta: BetaRange,

    /// Self-convergence tolerance of the phase-space grids.
    #[arg(long, default_value_t = 1e-8)]
    pub grid_tol: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,

    /// Bessel order of the singular oscillator.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,

    /// Comma-separated frequencies of the 3D oscillator.
    #[arg(long, value_delimiter = ',')]
    pub omegas: Vec<f64>,

    /// Energy scale of the box and rotor ladders.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,

    /// Lowest box quantum number.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub box_ground: u8,

    /// JSON spectrum for `--model custom`.
    #[arg(long)]
    pub spectrum_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NumericArgs {
    /// Relative truncation tolerance of the level sums.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    /// Use closed forms for Z where the spectrum has one.
    #[arg(long)]
    pub prefer_closed_form: bool,

    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Ho,
    So,
    Ho3d,
    Box,
    Rotor,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Auto,
    Analytic,
    Series,
    Stencil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Z,
    P,
    FSelf,
    FCross,
    Eps,
    C,
    EpsP,
    CP,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Z => "Z",
            Quantity::P => "P",
            Quantity::FSelf => "F_self",
            Quantity::FCross => "F_cross",
            Quantity::Eps => "eps",
            Quantity::C => "C",
            Quantity::EpsP => "eps_P",
            Quantity::CP => "C_P",
        }
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Quantity::Z,
            Quantity::P,
            Quantity::FSelf,
            Quantity::FCross,
            Quantity::Eps,
            Quantity::C,
            Quantity::EpsP,
            Quantity::CP,
        ]
        .into_iter()
        .find(|q| q.name() == s.trim())
        .ok_or_else(|| format!("unknown quantity {s:?}; expected Z, P, F_self, F_cross, eps, C, eps_P or C_P"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Lin,
}

/// `start:stop:count[log|lin]`, log spacing when the suffix is omitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl BetaRange {
    /// Endpoints are exact; interior points follow the spacing.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        let mut out: Vec<f64> = (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Lin => self.start + (self.stop - self.start) * t,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect();
        out[0] = self.start;
        out[self.count - 1] = self.stop;
        out
    }
}

impl FromStr for BetaRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, tail] = parts[..] else {
            return Err(format!("expected start:stop:count[log|lin], got {s:?}"));
        };
        let (count, spacing) = if let Some(c) = tail.strip_suffix("log") {
            (c, Spacing::Log)
        } else if let Some(c) = tail.strip_suffix("lin") {
            (c, Spacing::Lin)
        } else {
            (tail, Spacing::Log)
        };
        let number = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?} in {s:?}: {e}"));
        let (start, stop) = (number(start)?, number(stop)?);
        let count: usize = count.parse().map_err(|e| format!("bad count {count:?} in {s:?}: {e}"))?;
        if !(start > 0.0 && start.is_finite() && stop.is_finite()) {
            return Err(format!("beta range needs finite positive endpoints, got {s:?}"));
        }
        match count {
            0 => return Err("beta range needs at least one point".into()),
            1 if start != stop => return Err(format!("a single point needs start == stop, got {s:?}")),
            1 => {}
            _ if stop <= start => return Err(format!("beta range must increase, got {s:?}")),
            _ => {}
        }
        Ok(Self { start, stop, count, spacing })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_syntax() {
        let r: BetaRange = "0.1:10:3".parse().unwrap();
        assert_eq!(r.spacing, Spacing::Log);
        let v = r.values();
        assert_eq!(v[0], 0.1);
        assert!((v[1] - 1.0).abs() < 1e-15);
        assert_eq!(v[2], 10.0);
        let lin: BetaRange = "1:2:5lin".parse().unwrap();
        assert_eq!(lin.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!("2:2:1".parse::<BetaRange>().unwrap().values(), vec![2.0]);
        for bad in ["1:2", "0:1:4", "2:1:4", "1:2:0", "1:2:3cubic", "a:2:3", "1:3:1"] {
            assert!(bad.parse::<BetaRange>().is_err(), "{bad}");
        }
    }

    #[test]
    fn quantity_names_round_trip() {
        for name in ["Z", "P", "F_self", "F_cross", "eps", "C", "eps_P", "C_P"] {
            assert_eq!(name.parse::<Quantity>().unwrap().name(), name);
        }
        assert!("energy".parse::<Quantity>().is_err());
    }
}
