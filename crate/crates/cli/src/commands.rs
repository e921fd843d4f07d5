use std::fmt;
use std::path::Path;

use ensemble_info::curve::CurveSeries;
use ensemble_info::infoquant::{cross_projection, info_capacity, info_energy, purity, self_fidelity, OverlapMatrix};
use ensemble_info::specfun::BesselOrder;
use ensemble_info::spectra::{
    make_box_with_ground, make_ho, make_rotor, make_so, product, BoxGround, CustomSpectrumFile, EnsembleModel,
};
use ensemble_info::thermo::{heat_capacity, internal_energy, partition, Beta, DerivativeMethod, EvalOptions};
use ensemble_info::wigner::cross_fidelity_curve;
use rayon::prelude::*;

use crate::args::{BetaRange, EvalArgs, Fig1Args, Fig2Args, Method, ModelArgs, ModelKind, NumericArgs, Quantity};

const FIG2_ALPHAS: [f64; 4] = [-0.5, 0.5, 1.5, 2.5];

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or parameter values; nothing was computed.
    Usage(String),
    /// Computation ran but the result could not be delivered.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

fn usage<E: fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn build_model(args: &ModelArgs) -> Result<EnsembleModel, CliError> {
    let model = match args.model {
        ModelKind::Ho => Ok(make_ho()),
        ModelKind::So => make_so(args.alpha),
        ModelKind::Ho3d => {
            if args.omegas.is_empty() {
                return Err(CliError::Usage("--model ho3d needs --omegas".into()));
            }
            oscillator_product(&args.omegas)
        }
        ModelKind::Box => {
            let ground = if args.box_ground == 1 { BoxGround::One } else { BoxGround::Zero };
            make_box_with_ground(args.theta, ground)
        }
        ModelKind::Rotor => make_rotor(args.theta),
        ModelKind::Custom => {
            let path = args
                .spectrum_file
                .as_deref()
                .ok_or_else(|| CliError::Usage("--model custom needs --spectrum-file".into()))?;
            CustomSpectrumFile::load(path).and_then(CustomSpectrumFile::into_model)
        }
    };
    model.map_err(usage)
}

fn oscillator_product(omegas: &[f64]) -> ensemble_info::Result<EnsembleModel> {
    let factors = omegas
        .iter()
        .map(|&w| make_ho().scaled(w))
        .collect::<ensemble_info::Result<Vec<_>>>()?;
    product(factors)
}

fn eval_options(n: &NumericArgs) -> Result<EvalOptions, CliError> {
    let method = match n.method {
        Method::Auto => DerivativeMethod::Auto,
        Method::Analytic => DerivativeMethod::Analytic,
        Method::Series => DerivativeMethod::Series,
        Method::Stencil => DerivativeMethod::Stencil,
    };
    let opts = EvalOptions::default()
        .with_tol(n.tol)
        .closed_form(n.prefer_closed_form)
        .with_method(method);
    opts.validate().map_err(usage)?;
    Ok(opts)
}

fn describe_range(r: &BetaRange) -> String {
    let spacing = match r.spacing {
        crate::args::Spacing::Log => "log",
        crate::args::Spacing::Lin => "lin",
    };
    format!("{}:{}:{}{spacing}", r.start, r.stop, r.count)
}

/// Evaluates `columns` row by row; a failed cell becomes NaN and flags its row.
fn tabulate<F>(betas: Vec<f64>, names: &[&str], cell: F) -> Result<CurveSeries, CliError>
where
    F: Fn(usize, Beta) -> ensemble_info::Result<f64> + Sync,
{
    let rows: Vec<Vec<ensemble_info::Result<f64>>> = betas
        .par_iter()
        .map(|&b| match Beta::new(b) {
            Ok(beta) => (0..names.len()).map(|j| cell(j, beta)).collect(),
            Err(e) => vec![Err(e); names.len()],
        })
        .collect();
    let mut curve = CurveSeries::new(betas).map_err(usage)?;
    let mut columns = vec![Vec::with_capacity(rows.len()); names.len()];
    for (i, row) in rows.into_iter().enumerate() {
        for (j, r) in row.into_iter().enumerate() {
            match r {
                Ok(v) => columns[j].push(v),
                Err(e) => {
                    columns[j].push(f64::NAN);
                    curve.flag(i, &format!("{}: {e}", names[j]));
                }
            }
        }
    }
    for (name, values) in names.iter().zip(columns) {
        curve.push_column(name, values).map_err(usage)?;
    }
    Ok(curve)
}

fn stamp(curve: &mut CurveSeries, entries: &[(&str, String)]) -> Result<(), CliError> {
    curve
        .set_metadata("tool", &format!("ensinfo {}", env!("CARGO_PKG_VERSION")))
        .map_err(usage)?;
    for (k, v) in entries {
        curve.set_metadata(k, v).map_err(usage)?;
    }
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<CurveSeries, CliError> {
    let model = build_model(&args.model)?;
    let opts = eval_options(&args.numerics)?;
    let reference = args
        .beta_ref
        .map(|b| Beta::new(b).map_err(|e| CliError::Usage(format!("--beta-ref: {e}"))))
        .transpose()?;
    let overlaps = if args.quantities.contains(&Quantity::FCross) {
        let path = args
            .overlaps_file
            .as_deref()
            .ok_or_else(|| CliError::Usage("F_cross needs --overlaps-file".into()))?;
        Some(OverlapMatrix::load(path).map_err(usage)?)
    } else {
        None
    };
    let mut names: Vec<&str> = Vec::new();
    for q in &args.quantities {
        if names.contains(&q.name()) {
            return Err(CliError::Usage(format!("quantity {} listed twice", q.name())));
        }
        names.push(q.name());
    }

    let quantities = &args.quantities;
    let mut curve = tabulate(args.beta.values(), &names, |j, beta| {
        let other = reference.unwrap_or(beta);
        match quantities[j] {
            Quantity::Z => partition(&model, beta, &opts).map(|z| z.value),
            Quantity::P => purity(&model, beta, &opts),
            Quantity::FSelf => self_fidelity(&model, beta, other, &opts),
            Quantity::FCross => {
                let m = overlaps.as_ref().expect("loaded above");
                cross_projection(&model, &model, m, beta, other, opts.tol, &opts).map(|p| p.value)
            }
            Quantity::Eps => internal_energy(&model, beta, &opts),
            Quantity::C => heat_capacity(&model, beta, &opts),
            Quantity::EpsP => info_energy(&model, beta, &opts),
            Quantity::CP => info_capacity(&model, beta, &opts),
        }
    })?;
    let mut meta = vec![
        ("model", model.describe()),
        ("beta", describe_range(&args.beta)),
        ("tol", format!("{:e}", opts.tol)),
        ("method", format!("{:?}", args.numerics.method).to_lowercase()),
        ("prefer_closed_form", opts.prefer_closed_form.to_string()),
    ];
    if let Some(r) = reference {
        meta.push(("beta_ref", r.value().to_string()));
    }
    if let Some(path) = &args.overlaps_file {
        meta.push(("overlaps_file", path.display().to_string()));
    }
    stamp(&mut curve, &meta)?;
    Ok(curve)
}

pub fn fig1_omegas(variant: u8) -> [f64; 3] {
    if variant == 2 {
        [0.1, 1.0, 100.0]
    } else {
        [0.1, 1.0, 10.0]
    }
}

pub fn fig1(args: &Fig1Args) -> Result<CurveSeries, CliError> {
    let omegas = fig1_omegas(args.variant);
    let model = oscillator_product(&omegas).map_err(usage)?;
    let opts = eval_options(&args.numerics)?;
    let names = ["P", "eps_P", "C_P", "eps", "C"];
    let mut curve = tabulate(args.beta.values(), &names, |j, beta| match j {
        0 => purity(&model, beta, &opts),
        1 => info_energy(&model, beta, &opts),
        2 => info_capacity(&model, beta, &opts),
        3 => internal_energy(&model, beta, &opts),
        _ => heat_capacity(&model, beta, &opts),
    })?;
    let omegas: Vec<String> = omegas.iter().map(|w| w.to_string()).collect();
    stamp(
        &mut curve,
        &[
            ("model", model.describe()),
            ("omegas", omegas.join(" ")),
            ("beta", describe_range(&args.beta)),
            ("tol", format!("{:e}", opts.tol)),
        ],
    )?;
    Ok(curve)
}

pub fn fig2(args: &Fig2Args) -> Result<CurveSeries, CliError> {
    if !(args.grid_tol > 0.0 && args.grid_tol < 1.0) {
        return Err(CliError::Usage(format!("--grid-tol must lie in (0, 1), got {}", args.grid_tol)));
    }
    let betas = args.beta.values();
    let typed = betas.iter().map(|&b| Beta::new(b)).collect::<ensemble_info::Result<Vec<_>>>().map_err(usage)?;
    let mut curve = CurveSeries::new(betas.clone()).map_err(usage)?;
    let mut monotone = Vec::new();
    for alpha in FIG2_ALPHAS {
        let order = BesselOrder::new(alpha).map_err(usage)?;
        let part = cross_fidelity_curve(order, &typed, args.grid_tol).map_err(usage)?;
        for (i, f) in part.flags().iter().enumerate() {
            if !f.is_empty() {
                curve.flag(i, &format!("alpha={alpha}: {f}"));
            }
        }
        monotone.push(format!("{alpha}:{}", part.metadata("monotone").unwrap_or("unknown")));
        for (name, values) in part.columns() {
            curve.push_column(name, values.to_vec()).map_err(usage)?;
        }
    }
    curve
        .push_column("tanh_beta", betas.iter().map(|b| b.tanh()).collect())
        .map_err(usage)?;
    stamp(
        &mut curve,
        &[
            ("quantity", "F(HO at 2 beta, SO at beta), even-extended SO state".into()),
            ("beta", describe_range(&args.beta)),
            ("grid_tol", format!("{:e}", args.grid_tol)),
            ("monotone", monotone.join(" ")),
        ],
    )?;
    Ok(curve)
}

pub fn write_output(curve: &CurveSeries, out: Option<&Path>) -> Result<(), CliError> {
    let text = curve.to_csv();
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Runtime(format!("cannot write standard output: {e}")))
        }
    }
}
